//! The four subcommands. Each takes a resolved [`RunConfig`] and writes its
//! human-readable report to `out`.

use std::io::Write;
use std::path::PathBuf;

use sampled_sde::{
    check_derivatives, fit_rate, moment_curves, probe_assumptions, render_table, run_ensemble_with,
    run_ladder_stats, Error, ErrorStats, LadderSpec, ProbeBox, RateFit,
};

use crate::config::{DeltaSpec, RunConfig};
use crate::exec::RayonExecutor;
use crate::output::{self, Summary};
use crate::{CliError, Result};

/// Probe points used by `check`.
pub const CHECK_PROBE_POINTS: usize = 601;
const DERIVATIVE_TOL: f64 = 1e-6;

fn say(out: &mut dyn Write, line: std::fmt::Arguments<'_>) -> Result<()> {
    out.write_fmt(line)
        .and_then(|_| out.write_all(b"\n"))
        .map_err(|source| CliError::Io {
            path: PathBuf::from("<stdout>"),
            source,
        })
}

/// Runs one ensemble and writes its time series and summary. Returns the
/// summary that was written.
pub fn simulate(cfg: &RunConfig, out: &mut dyn Write) -> Result<Summary> {
    let exec = RayonExecutor::new(cfg.threads)?;
    let m = cfg.model_at(cfg.x0[0])?;
    let s = cfg.delta.scale(cfg.eps[0])?;
    let g = cfg.grid(s.delta)?;
    let ens = cfg.ensemble()?;
    let stats = run_ensemble_with(&m, &s, &g, &ens, &exec)?;
    let curves = moment_curves(&m, &s, &g)?;
    let stride = g.thinning_stride(ens.max_points);
    let mu: Vec<f64> = curves.mu.iter().step_by(stride).copied().collect();
    let xi2: Vec<f64> = curves.xi2.iter().step_by(stride).copied().collect();
    debug_assert_eq!(mu.len(), stats.times.len());

    let series = cfg
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("simulate.{}", cfg.format.extension())));
    let summary_path = output::summary_path(&series, cfg.format);
    output::write_time_series(&series, cfg.format, &stats, &mu, &xi2)?;
    let summary = Summary {
        model: cfg.model.clone(),
        reference: cfg.reference.name().to_string(),
        x0: stats.x0,
        eps: stats.eps,
        delta: stats.delta,
        c: stats.c,
        horizon: g.horizon(),
        steps_per_sample: g.steps_per_sample(),
        n_paths: stats.n_paths,
        p: stats.p,
        seed: cfg.seed,
        sup_mean_resid_abs: stats.sup_mean_resid_abs,
        min_mean_resid_abs: stats.min_mean_resid_abs,
        sup_lln: stats.sup_lln(),
        sup_clt: stats.sup_clt(),
    };
    summary.write(&summary_path, cfg.format)?;

    say(
        out,
        format_args!("wrote {} ({} rows)", series.display(), stats.times.len()),
    )?;
    say(out, format_args!("wrote {}", summary_path.display()))?;
    say(
        out,
        format_args!(
            "sup |E[X - x - eps Z]| = {:.4e}",
            summary.sup_mean_resid_abs
        ),
    )?;
    say(
        out,
        format_args!(
            "min |E[X - x - eps Z]| = {:.4e}",
            summary.min_mean_resid_abs
        ),
    )?;
    say(
        out,
        format_args!("sup E|X - x|^{}       = {:.4e}", stats.p, summary.sup_lln),
    )?;
    say(
        out,
        format_args!("sup E|Z_eps - Z|^{}   = {:.4e}", stats.p, summary.sup_clt),
    )?;
    Ok(summary)
}

/// Ensembles over every `(x0, ε)` pair; cell `k` of the ε list uses seed
/// `seed + k`. Prints the max/min table and optionally writes one plot file per
/// cell into the `--out` directory.
pub fn table(cfg: &RunConfig, out: &mut dyn Write) -> Result<Vec<ErrorStats>> {
    let exec = RayonExecutor::new(cfg.threads)?;
    let base = cfg.ensemble()?;
    if let Some(dir) = &cfg.out {
        std::fs::create_dir_all(dir).map_err(|source| CliError::Io {
            path: dir.clone(),
            source,
        })?;
    }
    let mut results = Vec::new();
    for &x0 in &cfg.x0 {
        let m = cfg.model_at(x0)?;
        for (k, &eps) in cfg.eps.iter().enumerate() {
            let s = cfg.delta.scale(eps)?;
            let g = cfg.grid(s.delta)?;
            let mut ens = base;
            ens.master_seed = cfg.seed.wrapping_add(k as u64);
            let stats = run_ensemble_with(&m, &s, &g, &ens, &exec)?;
            if let Some(dir) = &cfg.out {
                let name = output::plot_file_name(&cfg.model, x0, eps, cfg.format);
                output::write_plot(&dir.join(name), cfg.format, &stats)?;
            }
            results.push(stats);
        }
    }
    say(
        out,
        format_args!(
            "{}: {} paths, horizon {}, {} steps per sample, seed {}",
            cfg.model, cfg.n_paths, cfg.horizon, cfg.steps_per_sample, cfg.seed
        ),
    )?;
    say(
        out,
        format_args!("{}", render_table(&results)?.to_string().trim_end()),
    )?;
    Ok(results)
}

/// ε-ladder at the first initial condition, then a log-log fit of the chosen
/// functional.
pub fn rates(cfg: &RunConfig, out: &mut dyn Write) -> Result<RateFit> {
    if cfg.eps.len() < 2 {
        return Err(Error::Fit(format!(
            "need at least 2 ladder rungs, got {}",
            cfg.eps.len()
        ))
        .into());
    }
    let rule = match cfg.delta {
        DeltaSpec::Rule(r) => r,
        DeltaSpec::Fixed(_) => {
            return Err(CliError::config(
                "delta",
                "a ladder needs delta-ratio or delta-exponent",
            ))
        }
    };
    let exec = RayonExecutor::new(cfg.threads)?;
    let m = cfg.model_at(cfg.x0[0])?;
    let ladder = LadderSpec::new(cfg.eps.clone(), rule, cfg.ensemble()?)?;
    let stats = run_ladder_stats(&m, &ladder, &cfg.template(), &exec)?;
    let points: Vec<(f64, f64)> = stats
        .iter()
        .map(|st| (st.eps, cfg.functional.of(st)))
        .collect();
    say(
        out,
        format_args!(
            "{} {} (p = {}, x0 = {}, {} paths per rung)",
            cfg.model,
            cfg.functional.name(),
            cfg.p,
            m.x0(),
            cfg.n_paths
        ),
    )?;
    say(
        out,
        format_args!("{:<14} {:<14} {:>12}", "eps", "delta", "error"),
    )?;
    for (st, (_, err)) in stats.iter().zip(&points) {
        say(
            out,
            format_args!("{:<14.6e} {:<14.6e} {:>12.4e}", st.eps, st.delta, err),
        )?;
    }
    let fit = fit_rate(&points)?;
    say(out, format_args!("slope = {:.4}", fit.slope))?;
    say(out, format_args!("r2 = {:.4}", fit.r_squared))?;
    if let Some(path) = &cfg.out {
        let deltas: Vec<f64> = stats.iter().map(|st| st.delta).collect();
        output::write_rates(path, cfg.format, &deltas, &fit)?;
        say(out, format_args!("wrote {}", path.display()))?;
    }
    Ok(fit)
}

/// Prints the assumption probes for each initial condition. Never fails on a
/// violated assumption; it is reported as WARN.
pub fn check(cfg: &RunConfig, out: &mut dyn Write) -> Result<bool> {
    let probe_box = ProbeBox::default();
    let mut all_ok = true;
    for &x0 in &cfg.x0 {
        let m = cfg.model_at(x0)?;
        let r = probe_assumptions(&m, probe_box, CHECK_PROBE_POINTS, cfg.horizon)?;
        let d = check_derivatives(&m, &probe_box.points(CHECK_PROBE_POINTS), DERIVATIVE_TOL);
        let ok = r.all_hold() && d.passed;
        all_ok &= ok;
        say(out, format_args!("model                     {}", cfg.model))?;
        say(out, format_args!("x0                        {x0}"))?;
        say(
            out,
            format_args!(
                "probe box                 [{}, {}], {} points",
                r.probe_box.lo, r.probe_box.hi, r.n_probe
            ),
        )?;
        say(out, format_args!("horizon                   {}", r.horizon))?;
        say(
            out,
            format_args!("lambda                    {:.6}", r.lambda_hat),
        )?;
        say(
            out,
            format_args!("L_kappa                   {:.6}", r.l_kappa_hat),
        )?;
        say(
            out,
            format_args!("L_sigma                   {:.6}", r.l_sigma_hat),
        )?;
        say(
            out,
            format_args!("gamma                     {:.6}", r.gamma_hat),
        )?;
        say(
            out,
            format_args!("alpha                     {:.6}", r.alpha_hat),
        )?;
        say(
            out,
            format_args!("beta                      {:.6}", r.beta_hat),
        )?;
        say(
            out,
            format_args!("margin                    {:.6}", r.margin),
        )?;
        say(
            out,
            format_args!("kernel_sup m=1            {:.6}", r.kernel_sup[0]),
        )?;
        say(
            out,
            format_args!("kernel_sup m=2            {:.6}", r.kernel_sup[1]),
        )?;
        say(
            out,
            format_args!(
                "max (Df+Dkappa) on path   {:.6}",
                r.max_linearization_on_path
            ),
        )?;
        match r.expansive_region {
            Some((lo, hi)) => say(
                out,
                format_args!("expansive region (Df>0)   [{lo:.4}, {hi:.4}]"),
            )?,
            None => say(out, format_args!("expansive region (Df>0)   none"))?,
        }
        say(
            out,
            format_args!(
                "derivatives               max deviation {:.3e} at x = {}",
                d.max_deviation, d.worst_x
            ),
        )?;
        say(
            out,
            format_args!(
                "status                    {}",
                if ok { "OK" } else { "WARN" }
            ),
        )?;
    }
    Ok(all_ok)
}
