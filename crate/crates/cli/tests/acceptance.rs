//! Acceptance suite. One PASS/FAIL line per criterion, then a tally.
//!
//! Run with `cargo test --release --test acceptance`; pass criterion ids
//! (`1`, `5`, ...) as arguments to run a subset. The process fails on any FAIL
//! that is not listed in [`KNOWN_RED`].

use std::io::Write;
use std::process::{Command, ExitCode};
use std::time::Instant;

use sampled_sde::rng::NormalStream;
use sampled_sde::{
    builtin_model, exact_linear_path, fit_rate, gaussian_check_with, moment_curves,
    probe_assumptions, run_ladder_stats, simulate_path, DeltaRule, EnsembleConfig, ErrorStats,
    GridTemplate, LadderSpec, ModelSpec, ProbeBox, ReferenceScheme, ScaleParams, TimeGrid,
};
use sampled_sde_cli::commands;
use sampled_sde_cli::config::{Purpose, RunConfig, Settings};
use sampled_sde_cli::exec::RayonExecutor;

const SEED: u64 = 42;

/// Criteria that fail for reasons analysed in the project notes. They still
/// print FAIL; they just do not fail the process.
const KNOWN_RED: &[&str] = &["1.example2.x0=-0.07", "1.example2.x0=1.5"];

/// Reference maxima of `|E[X − x − εZ]|` at the three tabulated ε per model
/// and initial condition.
const REFERENCE_MAX: &[(&str, f64, [f64; 3])] = &[
    ("example1", -0.07, [5.0744e-4, 2.3710e-4, 1.1243e-4]),
    ("example1", 1.5, [1.8e-3, 9.2053e-4, 4.6849e-4]),
    ("example2", -0.07, [3.2e-3, 1.4e-3, 6.496e-4]),
    ("example2", 1.5, [1.93e-2, 7.4e-3, 3.1e-3]),
    ("example3", 0.1, [1.64e-3, 4.3641e-4, 1.9649e-4]),
    ("example4", 0.1, [1.31e-2, 3.3e-3, 9.2848e-4]),
];

const TABLE_FACTOR: f64 = 3.0;
const LLN_SLOPE_BAND: (f64, f64) = (1.4, 2.6);
const STRONG_SLOPE_BAND: (f64, f64) = (0.8, 1.2);
const Z_MAX: f64 = 4.0;
const MOMENT_REL_TOL: f64 = 1e-6;
const PROBE_TOL: f64 = 1e-3;
const KERNEL_REL_TOL: f64 = 0.01;
const REDUCTION_TOL: f64 = 1e-3;

struct Suite {
    filter: Vec<String>,
    results: Vec<(String, bool)>,
}

impl Suite {
    fn wants(&self, criterion: &str) -> bool {
        self.filter.is_empty() || self.filter.iter().any(|f| f == criterion)
    }

    fn record(&mut self, id: &str, pass: bool, detail: String) {
        let tag = match (pass, KNOWN_RED.contains(&id)) {
            (true, _) => "PASS",
            (false, false) => "FAIL",
            (false, true) => "FAIL (known)",
        };
        println!("{tag:<12} {id:<24} {detail}");
        let _ = std::io::stdout().flush();
        self.results.push((id.to_string(), pass));
    }
}

fn fmt_list(v: &[f64]) -> String {
    let items: Vec<String> = v.iter().map(|x| format!("{x:.3e}")).collect();
    format!("[{}]", items.join(", "))
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

fn table_stats(model: &str) -> Vec<ErrorStats> {
    let flags = Settings {
        model: Some(model.into()),
        seed: Some(SEED),
        ..Default::default()
    };
    let cfg = RunConfig::resolve(flags, Purpose::Table).expect("table config");
    commands::table(&cfg, &mut std::io::sink()).expect("table run")
}

fn criterion_1(s: &mut Suite) {
    for model in ["example1", "example2", "example3", "example4"] {
        let stats = table_stats(model);
        for &(name, x0, reference) in REFERENCE_MAX.iter().filter(|r| r.0 == model) {
            let mut rows: Vec<&ErrorStats> = stats.iter().filter(|st| st.x0 == x0).collect();
            rows.sort_by(|a, b| b.eps.total_cmp(&a.eps));
            let ours: Vec<f64> = rows.iter().map(|st| st.sup_mean_resid_abs).collect();
            let ratios: Vec<f64> = ours.iter().zip(reference).map(|(o, r)| o / r).collect();
            let within = ours.len() == 3
                && ratios
                    .iter()
                    .all(|q| (1.0 / TABLE_FACTOR..=TABLE_FACTOR).contains(q));
            let pass = within && strictly_decreasing(&ours);
            s.record(
                &format!("1.{name}.x0={x0}"),
                pass,
                format!(
                    "max error {} vs reference {}, ratios {}",
                    fmt_list(&ours),
                    fmt_list(&reference),
                    fmt_list(&ratios)
                ),
            );
        }
    }
}

fn example1_ladder(reference: ReferenceScheme) -> Vec<ErrorStats> {
    let m = builtin_model("example1").unwrap();
    let eps: Vec<f64> = (4..=7).map(|k| 2f64.powi(-k)).collect();
    let ladder = LadderSpec::new(
        eps,
        DeltaRule::Ratio(2.0),
        EnsembleConfig::new(1000, SEED, 2).unwrap(),
    )
    .unwrap();
    let template = GridTemplate {
        reference,
        ..Default::default()
    };
    run_ladder_stats(&m, &ladder, &template, &RayonExecutor::default()).expect("ladder")
}

fn criterion_2(s: &mut Suite, rk4: &[ErrorStats]) {
    let pts: Vec<(f64, f64)> = rk4.iter().map(|st| (st.eps, st.sup_lln())).collect();
    let fit = fit_rate(&pts).unwrap();
    let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
    s.record(
        "2.lln_rate",
        (LLN_SLOPE_BAND.0..=LLN_SLOPE_BAND.1).contains(&fit.slope),
        format!(
            "sup E|X-x|^2 {} slope {:.3} r2 {:.3}",
            fmt_list(&ys),
            fit.slope,
            fit.r_squared
        ),
    );
}

fn criterion_3(s: &mut Suite, rk4: &[ErrorStats], euler: &[ErrorStats]) {
    let rk4_clt: Vec<f64> = rk4.iter().map(|st| st.sup_clt()).collect();
    let pts: Vec<(f64, f64)> = euler.iter().map(|st| (st.eps, st.sup_clt())).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
    let fit = fit_rate(&pts).unwrap();
    s.record(
        "3.clt_shrinks",
        strictly_decreasing(&ys) && fit.slope > 0.0,
        format!(
            "sup E|Zeps-Z|^2 (euler reference) {} slope {:.3}; rk4 reference {}",
            fmt_list(&ys),
            fit.slope,
            fmt_list(&rk4_clt)
        ),
    );
}

fn criterion_4(s: &mut Suite) {
    let m = builtin_model("example3").unwrap();
    let sc = ScaleParams::new(0.125, 0.25).unwrap();
    let n_paths = 200;
    let mut pts = Vec::new();
    for steps in [4, 8, 16, 32] {
        let g = TimeGrid::new(8.0, 0.25, steps).unwrap();
        let mut noise = vec![0.0; g.steps()];
        let mut total = 0.0;
        for j in 0..n_paths {
            NormalStream::for_path(SEED, j).fill(&mut noise);
            let euler = simulate_path(&m, &sc, &g, &noise).unwrap().x_sde;
            let exact = exact_linear_path(-3.0, -0.3166, m.x0(), &sc, &g, &noise).unwrap();
            total += euler
                .iter()
                .zip(&exact)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
        }
        pts.push((g.h(), total / n_paths as f64));
    }
    let fit = fit_rate(&pts).unwrap();
    let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
    s.record(
        "4.oracle_strong_order",
        (STRONG_SLOPE_BAND.0..=STRONG_SLOPE_BAND.1).contains(&fit.slope),
        format!(
            "E sup|Euler-exact| at h=delta/4..delta/32 {} slope {:.3}",
            fmt_list(&ys),
            fit.slope
        ),
    );
}

fn criterion_5(s: &mut Suite) {
    let m = builtin_model("example3").unwrap();
    let sc = ScaleParams::new(0.125, 0.25).unwrap();
    // h = δ/64 keeps the O(h) Euler variance bias well under one standard error.
    let g = TimeGrid::new(16.0, 0.25, 64).unwrap();
    let cfg = EnsembleConfig::new(10_000, SEED, 2).unwrap();
    let r = gaussian_check_with(&m, &sc, &g, &cfg, &RayonExecutor::default()).unwrap();
    let zm = r.z_mean.iter().map(|z| z.abs()).fold(0.0, f64::max);
    let zv = r.z_var.iter().map(|z| z.abs()).fold(0.0, f64::max);
    s.record(
        "5.gaussian_z",
        r.max_abs_z() <= Z_MAX,
        format!(
            "{} times, max|z_mean| {zm:.3}, max|z_var| {zv:.3}",
            r.times.len()
        ),
    );
}

fn criterion_6(s: &mut Suite) {
    let m = builtin_model("example3").unwrap();
    let (eps, delta) = (0.125, 0.25);
    let sc = ScaleParams::new(eps, delta).unwrap();
    let g = TimeGrid::new(4.0, delta, 2500).unwrap();
    let curves = moment_curves(&m, &sc, &g).unwrap();
    let (a, k, x0) = (-3.3166, -0.3166, m.x0());
    let rel = |num: f64, exact: f64| ((num - exact) / exact).abs();
    let (mut worst_mu, mut worst_xi2) = (0.0f64, 0.0f64);
    for i in 1..=g.steps() {
        let t = g.time(i);
        let x = x0 * (a * t).exp();
        // lag = Dκ·(f+κ) = k·a·x, so m(t) = −(c/2)·k·a·x0·t·e^{at}.
        let mu = x - eps * 0.5 * sc.c * k * a * x0 * t * (a * t).exp();
        let xi2 = eps * eps * (1.0 - (2.0 * a * t).exp()) / (-2.0 * a);
        worst_mu = worst_mu.max(rel(curves.mu[i], mu));
        worst_xi2 = worst_xi2.max(rel(curves.xi2[i], xi2));
    }
    s.record(
        "6.moment_odes",
        worst_mu <= MOMENT_REL_TOL && worst_xi2 <= MOMENT_REL_TOL,
        format!(
            "h = {:e}, max rel error mu {worst_mu:.2e}, xi2 {worst_xi2:.2e}",
            g.h()
        ),
    );
}

fn criterion_7(s: &mut Suite) {
    let dir = tempfile::tempdir().unwrap();
    let run = |threads: &str, name: &str| {
        let status = Command::new(env!("CARGO_BIN_EXE_sampled-sde"))
            .args([
                "simulate",
                "--model",
                "example1",
                "--eps",
                "0.03125",
                "--delta-ratio",
                "2",
                "--paths",
                "300",
                "--horizon",
                "128",
                "--seed",
                "42",
                "--threads",
                threads,
                "--out",
                &format!("{name}.csv"),
            ])
            .current_dir(dir.path())
            .output()
            .unwrap()
            .status;
        assert!(status.success());
        let read = |n: String| std::fs::read(dir.path().join(n)).unwrap();
        (
            read(format!("{name}.csv")),
            read(format!("{name}.summary.csv")),
        )
    };
    let a = run("1", "a");
    let b = run("1", "b");
    let c = run("8", "c");
    s.record(
        "7.determinism",
        a == b && a == c,
        format!("threads 1 twice and threads 8: {} series bytes", a.0.len()),
    );
}

fn criterion_8(s: &mut Suite) {
    let m = builtin_model("example1").unwrap();
    let r = probe_assumptions(&m, ProbeBox::default(), 601, 64.0).unwrap();
    let r2 = probe_assumptions(&m, ProbeBox::default(), 601, 128.0).unwrap();
    let drift: Vec<f64> = (0..2)
        .map(|k| ((r2.kernel_sup[k] - r.kernel_sup[k]) / r.kernel_sup[k]).abs())
        .collect();
    let pass = (r.lambda_hat - 1.0).abs() <= PROBE_TOL
        && (r.l_kappa_hat - 0.25).abs() <= PROBE_TOL
        && r.margin > 0.0
        && drift.iter().all(|d| *d < KERNEL_REL_TOL);
    s.record(
        "8.assumption_probes",
        pass,
        format!(
            "lambda {:.6} L_kappa {:.6} margin {:.6} kernel drift under horizon doubling {}",
            r.lambda_hat,
            r.l_kappa_hat,
            r.margin,
            fmt_list(&drift)
        ),
    );
}

fn criterion_9(s: &mut Suite) {
    let x0: f64 = 1.5;
    let m = ModelSpec::new("cubic")
        .with_drift(|x| -x - x * x * x, |x| -1.0 - 3.0 * x * x)
        .with_x0(x0);
    let sc = ScaleParams::new(0.1, 0.01).unwrap();
    let g = TimeGrid::new(8.0, 0.01, 100).unwrap();
    let mut noise = vec![0.0; g.steps()];
    NormalStream::for_path(SEED, 0).fill(&mut noise);
    let p = simulate_path(&m, &sc, &g, &noise).unwrap();
    // x' = −x − x³ solves to x² = x0² e^{−2t} / (1 + x0² (1 − e^{−2t})).
    let ode_err = p
        .x_sde
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let e = (-2.0 * g.time(i)).exp();
            (x - (x0 * x0 * e / (1.0 + x0 * x0 * (1.0 - e))).sqrt()).abs()
        })
        .fold(0.0, f64::max);

    let ex1 = builtin_model("example1").unwrap();
    let c0 = ScaleParams::with_c(0.03125, 0.0625, 0.0).unwrap();
    let g1 = TimeGrid::new(16.0, 0.0625, 16).unwrap();
    let curves = moment_curves(&ex1, &c0, &g1).unwrap();
    let reference = simulate_path(&ex1, &c0, &g1, &vec![0.0; g1.steps()])
        .unwrap()
        .x_det;
    let mu_is_x = curves.mu == reference;
    s.record(
        "9.trivial_reductions",
        ode_err <= REDUCTION_TOL && mu_is_x,
        format!("sigma=kappa=0 max|X-x| {ode_err:.2e} at h=1e-4; c=0 gives mu == x: {mu_is_x}"),
    );
}

fn main() -> ExitCode {
    let filter: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let mut s = Suite {
        filter,
        results: Vec::new(),
    };
    let start = Instant::now();
    if s.wants("1") {
        criterion_1(&mut s);
    }
    if s.wants("2") || s.wants("3") {
        let rk4 = example1_ladder(ReferenceScheme::Rk4);
        if s.wants("2") {
            criterion_2(&mut s, &rk4);
        }
        if s.wants("3") {
            let euler = example1_ladder(ReferenceScheme::Euler);
            criterion_3(&mut s, &rk4, &euler);
        }
    }
    type Criterion = fn(&mut Suite);
    let rest: [(&str, Criterion); 6] = [
        ("4", criterion_4),
        ("5", criterion_5),
        ("6", criterion_6),
        ("7", criterion_7),
        ("8", criterion_8),
        ("9", criterion_9),
    ];
    for (id, f) in rest {
        if s.wants(id) {
            f(&mut s);
        }
    }
    let failed: Vec<&str> = s
        .results
        .iter()
        .filter(|r| !r.1)
        .map(|r| r.0.as_str())
        .collect();
    let unexpected: Vec<&&str> = failed.iter().filter(|id| !KNOWN_RED.contains(id)).collect();
    println!(
        "{} passed, {} failed ({} known) in {:.0}s",
        s.results.len() - failed.len(),
        failed.len(),
        failed.len() - unexpected.len(),
        start.elapsed().as_secs_f64()
    );
    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
