//! ε-ladders, empirical convergence orders and the max/min error tables.

use alloc::boxed::Box;
use alloc::format;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::integrate::{ReferenceScheme, TimeGrid};
use crate::model::ModelSpec;
use crate::montecarlo::{run_ensemble_with, EnsembleConfig, ErrorStats, PathExecutor};
use crate::scale::ScaleParams;

/// How the sampling period follows the noise size along a ladder.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DeltaRule {
    /// `δ = r·ε`; the regime constant is `c = r`.
    Ratio(f64),
    /// `δ = ε^a` with `a > 1`; the regime constant is `c = 0`.
    Exponent(f64),
}

impl DeltaRule {
    pub fn scale(&self, eps: f64) -> Result<ScaleParams> {
        match *self {
            DeltaRule::Ratio(r) => ScaleParams::from_ratio(eps, r),
            DeltaRule::Exponent(a) => {
                if !(a.is_finite() && a > 1.0) {
                    return Err(Error::config("delta exponent", "must be > 1"));
                }
                ScaleParams::with_c(eps, libm::pow(eps, a), 0.0)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LadderSpec {
    pub eps_values: Vec<f64>,
    pub delta_rule: DeltaRule,
    pub per_rung: EnsembleConfig,
}

impl LadderSpec {
    pub fn new(
        eps_values: Vec<f64>,
        delta_rule: DeltaRule,
        per_rung: EnsembleConfig,
    ) -> Result<Self> {
        if eps_values.is_empty() {
            return Err(Error::Empty("eps ladder"));
        }
        if !eps_values.iter().all(|&e| e.is_finite() && e > 0.0) {
            return Err(Error::config("eps", "ladder values must be finite and > 0"));
        }
        if eps_values.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::config("eps", "ladder must be strictly decreasing"));
        }
        per_rung.validate()?;
        for &e in &eps_values {
            delta_rule.scale(e)?;
        }
        Ok(LadderSpec {
            eps_values,
            delta_rule,
            per_rung,
        })
    }
}

/// Horizon and steps per sampling period; the step `h = δ/M` follows each rung.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridTemplate {
    pub horizon: f64,
    pub steps_per_sample: usize,
    pub reference: ReferenceScheme,
}

impl GridTemplate {
    pub fn grid(&self, delta: f64) -> Result<TimeGrid> {
        Ok(TimeGrid::new(self.horizon, delta, self.steps_per_sample)?
            .with_reference(self.reference))
    }
}

impl Default for GridTemplate {
    fn default() -> Self {
        GridTemplate {
            horizon: 128.0,
            steps_per_sample: 16,
            reference: ReferenceScheme::Rk4,
        }
    }
}

/// Sup-in-time functional reported per rung.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Functional {
    /// `max_t E|X_t − x_t|^p`.
    LlnSup,
    /// `max_t E|Z^ε_t − Z_t|^p`.
    CltSup,
    /// `max_t |E[X_t − x_t − εZ_t]|`.
    MeanResidSup,
}

impl Functional {
    pub fn of(&self, stats: &ErrorStats) -> f64 {
        match self {
            Functional::LlnSup => stats.sup_lln(),
            Functional::CltSup => stats.sup_clt(),
            Functional::MeanResidSup => stats.sup_mean_resid_abs,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Functional::LlnSup => "lln_sup",
            Functional::CltSup => "clt_sup",
            Functional::MeanResidSup => "mean_resid_sup",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "lln_sup" => Some(Functional::LlnSup),
            "clt_sup" => Some(Functional::CltSup),
            "mean_resid_sup" => Some(Functional::MeanResidSup),
            _ => None,
        }
    }
}

/// One ensemble per rung, rung `k` seeded with `master_seed + k`. Returns the
/// full statistics of every rung in ladder order.
pub fn run_ladder_stats<E: PathExecutor>(
    m: &ModelSpec,
    ladder: &LadderSpec,
    template: &GridTemplate,
    exec: &E,
) -> Result<Vec<ErrorStats>> {
    ladder
        .eps_values
        .iter()
        .enumerate()
        .map(|(rung, &eps)| {
            let tag = |e: Error| Error::Rung {
                rung,
                eps,
                source: Box::new(e),
            };
            let s = ladder.delta_rule.scale(eps).map_err(tag)?;
            let g = template.grid(s.delta).map_err(tag)?;
            let mut cfg = ladder.per_rung;
            cfg.master_seed = cfg.master_seed.wrapping_add(rung as u64);
            run_ensemble_with(m, &s, &g, &cfg, exec).map_err(tag)
        })
        .collect()
}

/// `(ε, functional)` for each rung.
pub fn run_ladder<E: PathExecutor>(
    m: &ModelSpec,
    ladder: &LadderSpec,
    template: &GridTemplate,
    functional: Functional,
    exec: &E,
) -> Result<Vec<(f64, f64)>> {
    Ok(run_ladder_stats(m, ladder, template, exec)?
        .iter()
        .map(|st| (st.eps, functional.of(st)))
        .collect())
}

/// Least-squares line through `(ln ε, ln error)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: Vec<(f64, f64)>,
}

pub fn fit_rate(points: &[(f64, f64)]) -> Result<RateFit> {
    if points.len() < 2 {
        return Err(Error::Fit(format!(
            "need at least 2 points, got {}",
            points.len()
        )));
    }
    for &(eps, err) in points {
        if !(eps.is_finite() && eps > 0.0) {
            return Err(Error::Fit(format!("eps = {eps} is not positive")));
        }
        if !(err.is_finite() && err > 0.0) {
            return Err(Error::Fit(format!(
                "error {err} at eps = {eps} is not positive (Monte Carlo noise floor?)"
            )));
        }
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| libm::log(p.0)).collect();
    let ys: Vec<f64> = points.iter().map(|p| libm::log(p.1)).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(&ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 {
        return Err(Error::Fit("all eps values are equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum();
    let r_squared = if syy > 0.0 {
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    } else {
        1.0
    };
    Ok(RateFit {
        slope,
        intercept,
        r_squared,
        points: points.to_vec(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub eps: f64,
    pub delta: f64,
    pub max_error: f64,
    pub min_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableSection {
    pub x0: f64,
    pub rows: Vec<TableRow>,
}

/// Max/min absolute mean residual per `(x0, ε)`: one section per initial
/// condition (ascending), rows by ε descending.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub sections: Vec<TableSection>,
}

pub fn render_table(results: &[ErrorStats]) -> Result<Table> {
    if results.is_empty() {
        return Err(Error::Empty("error statistics"));
    }
    let mut sorted: Vec<&ErrorStats> = results.iter().collect();
    sorted.sort_by(|a, b| a.x0.total_cmp(&b.x0).then(b.eps.total_cmp(&a.eps)));
    let mut sections: Vec<TableSection> = Vec::new();
    for st in sorted {
        let row = TableRow {
            eps: st.eps,
            delta: st.delta,
            max_error: st.sup_mean_resid_abs,
            min_error: st.min_mean_resid_abs,
        };
        match sections.last_mut() {
            Some(sec) if sec.x0.total_cmp(&st.x0).is_eq() => sec.rows.push(row),
            _ => sections.push(TableSection {
                x0: st.x0,
                rows: alloc::vec![row],
            }),
        }
    }
    Ok(Table { sections })
}

/// `2^-k` when `v` is an exact power of two, else the plain number.
fn pow2_label(v: f64) -> alloc::string::String {
    let k = libm::log2(v);
    let r = libm::round(k);
    if k == r && libm::fabs(r) < 64.0 {
        format!("2^{}", r as i64)
    } else {
        format!("{v}")
    }
}

impl fmt::Display for Table {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for sec in &self.sections {
            writeln!(f, "Initial condition x0 = {}", sec.x0)?;
            writeln!(
                f,
                "{:<10} {:<10} {:>12} {:>12}",
                "eps", "delta", "|max error|", "|min error|"
            )?;
            for r in &sec.rows {
                writeln!(
                    f,
                    "{:<10} {:<10} {:>12.3e} {:>12.3e}",
                    pow2_label(r.eps),
                    pow2_label(r.delta),
                    r.max_error,
                    r.min_error
                )?;
            }
        }
        Ok(())
    }
}
