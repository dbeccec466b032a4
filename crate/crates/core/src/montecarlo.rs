//! Seeded ensembles of coupled paths and their error functionals.
//!
//! Every path owns a random substream keyed by `(master_seed, path index)`, and
//! per-path results are folded into the running moments strictly in path-index
//! order. An ensemble is therefore a pure function of its inputs no matter how a
//! [`PathExecutor`] schedules the paths.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::integrate::{moment_curves, Coupled, Reference, TimeGrid};
use crate::model::ModelSpec;
use crate::rng::{path_seed, NormalStream};
use crate::scale::ScaleParams;

/// Default cap on reported time points.
pub const DEFAULT_MAX_POINTS: usize = 4096;

/// Paths materialised at once before they are folded into the accumulators.
const CHUNK: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnsembleConfig {
    pub n_paths: usize,
    pub master_seed: u64,
    /// Moment order of the LLN/CLT functionals.
    pub p: u32,
    /// Cap on reported time points; `usize::MAX` reports every grid point.
    pub max_points: usize,
}

impl EnsembleConfig {
    pub fn new(n_paths: usize, master_seed: u64, p: u32) -> Result<Self> {
        let cfg = EnsembleConfig {
            n_paths,
            master_seed,
            p,
            max_points: DEFAULT_MAX_POINTS,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn full_resolution(mut self) -> Self {
        self.max_points = usize::MAX;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_paths == 0 {
            return Err(Error::config("n_paths", "must be >= 1"));
        }
        if self.p == 0 {
            return Err(Error::config("p", "must be >= 1"));
        }
        if self.max_points < 2 {
            return Err(Error::config("max_points", "must be >= 2"));
        }
        Ok(())
    }
}

/// Runs a closure over a range of path indices and returns the results in index
/// order. Implementations may evaluate in any order or in parallel.
pub trait PathExecutor {
    fn map_indexed<T, F>(&self, range: core::ops::Range<usize>, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send;
}

/// Evaluates paths one after another on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl PathExecutor for Sequential {
    fn map_indexed<T, F>(&self, range: core::ops::Range<usize>, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        range.map(f).collect()
    }
}

/// Monte Carlo error functionals on the reported time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorStats {
    pub eps: f64,
    pub delta: f64,
    pub c: f64,
    pub x0: f64,
    pub n_paths: usize,
    pub p: u32,
    pub times: Vec<f64>,
    /// Sample mean of `X_t − x_t − εZ_t`.
    pub mean_resid: Vec<f64>,
    /// Standard error of `mean_resid`.
    pub stderr: Vec<f64>,
    /// Sample mean of `|X_t − x_t|^p`.
    pub lln_moment: Vec<f64>,
    /// Sample mean of `|Z^ε_t − Z_t|^p`.
    pub clt_moment: Vec<f64>,
    pub sup_mean_resid_abs: f64,
    /// Smallest `|mean_resid|` over reported times after `t = 0`.
    pub min_mean_resid_abs: f64,
}

impl ErrorStats {
    pub fn sup_lln(&self) -> f64 {
        self.lln_moment.iter().copied().fold(0.0, f64::max)
    }

    pub fn sup_clt(&self) -> f64 {
        self.clt_moment.iter().copied().fold(0.0, f64::max)
    }
}

/// Ensemble moments of `V_t` against the predicted Gaussian law.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianCheck {
    pub times: Vec<f64>,
    pub sample_mean: Vec<f64>,
    pub sample_var: Vec<f64>,
    pub mu: Vec<f64>,
    pub xi2: Vec<f64>,
    /// `(sample_mean − μ) / se(mean)`.
    pub z_mean: Vec<f64>,
    /// `(sample_var − ξ²) / se(var)`.
    pub z_var: Vec<f64>,
    /// Sample skewness of `V_t`.
    pub skewness: Vec<f64>,
}

impl GaussianCheck {
    pub fn max_abs_z(&self) -> f64 {
        self.z_mean
            .iter()
            .chain(&self.z_var)
            .map(|z| z.abs())
            .fold(0.0, f64::max)
    }
}

/// Streaming central moments up to order four.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct Moments {
    n: f64,
    mean: f64,
    m2: f64,
    m3: f64,
    m4: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        let n1 = self.n;
        self.n += 1.0;
        let n = self.n;
        let delta = x - self.mean;
        let delta_n = delta / n;
        let delta_n2 = delta_n * delta_n;
        let term1 = delta * delta_n * n1;
        self.mean += delta_n;
        self.m4 += term1 * delta_n2 * (n * n - 3.0 * n + 3.0) + 6.0 * delta_n2 * self.m2
            - 4.0 * delta_n * self.m3;
        self.m3 += term1 * delta_n * (n - 2.0) - 3.0 * delta_n * self.m2;
        self.m2 += term1;
    }

    /// Unbiased sample variance (0 for a single sample).
    fn variance(&self) -> f64 {
        if self.n > 1.0 {
            self.m2 / (self.n - 1.0)
        } else {
            0.0
        }
    }

    fn stderr_mean(&self) -> f64 {
        libm::sqrt(self.variance() / self.n)
    }

    /// Large-sample standard error of the sample variance, `√((μ₄ − μ₂²)/n)`.
    fn stderr_variance(&self) -> f64 {
        let mu2 = self.m2 / self.n;
        let mu4 = self.m4 / self.n;
        libm::sqrt(((mu4 - mu2 * mu2) / self.n).max(0.0))
    }

    fn skewness(&self) -> f64 {
        if self.m2 > 0.0 {
            libm::sqrt(self.n) * self.m3 / libm::pow(self.m2, 1.5)
        } else {
            0.0
        }
    }
}

/// Per-time accumulators: residual, LLN moment, CLT moment, `V`.
type Slot = [Moments; 4];

struct Ensemble {
    indices: Vec<usize>,
    times: Vec<f64>,
    slots: Vec<Slot>,
}

fn powi(x: f64, p: u32) -> f64 {
    let mut acc = 1.0;
    for _ in 0..p {
        acc *= x;
    }
    acc
}

fn simulate_ensemble<E: PathExecutor>(
    m: &ModelSpec,
    s: &ScaleParams,
    g: &TimeGrid,
    cfg: &EnsembleConfig,
    exec: &E,
) -> Result<Ensemble> {
    cfg.validate()?;
    if s.is_noiseless() {
        return Err(Error::config("eps", "ensembles need eps > 0"));
    }
    let reference = Reference::new(m, g)?;
    let stride = g.thinning_stride(cfg.max_points);
    let indices: Vec<usize> = (0..=g.steps()).step_by(stride).collect();
    let times = indices.iter().map(|&i| g.time(i)).collect();
    let mut slots = alloc::vec![Slot::default(); indices.len()];

    let stepper = Coupled {
        model: m,
        scale: *s,
        grid: g,
        reference: &reference,
    };
    let eps = s.eps;
    let p = cfg.p;
    let run_path = |j: usize| -> Result<Vec<[f64; 4]>> {
        let mut rec = Vec::with_capacity(indices.len());
        stepper
            .run(NormalStream::for_path(cfg.master_seed, j), |i, st| {
                if i % stride == 0 {
                    let x = reference.x[i];
                    let dev = st.x_sde - x;
                    rec.push([
                        dev - eps * st.z_lim,
                        powi(dev.abs(), p),
                        powi((dev / eps - st.z_lim).abs(), p),
                        x + eps * st.z_lim,
                    ]);
                }
            })
            .map_err(|e| match e {
                Error::Divergence { step } => Error::EnsembleDivergence {
                    path: j,
                    seed: path_seed(cfg.master_seed, j),
                    step,
                },
                other => other,
            })?;
        Ok(rec)
    };

    let mut start = 0;
    while start < cfg.n_paths {
        let end = (start + CHUNK).min(cfg.n_paths);
        for rec in exec.map_indexed(start..end, run_path) {
            for (slot, vals) in slots.iter_mut().zip(rec?) {
                for (acc, v) in slot.iter_mut().zip(vals) {
                    acc.push(v);
                }
            }
        }
        start = end;
    }
    Ok(Ensemble {
        indices,
        times,
        slots,
    })
}

/// Error functionals of `cfg.n_paths` coupled paths, evaluated in order on the
/// calling thread.
pub fn run_ensemble(
    m: &ModelSpec,
    s: &ScaleParams,
    g: &TimeGrid,
    cfg: &EnsembleConfig,
) -> Result<ErrorStats> {
    run_ensemble_with(m, s, g, cfg, &Sequential)
}

/// [`run_ensemble`] with paths scheduled by `exec`. The result does not depend
/// on the executor.
pub fn run_ensemble_with<E: PathExecutor>(
    m: &ModelSpec,
    s: &ScaleParams,
    g: &TimeGrid,
    cfg: &EnsembleConfig,
    exec: &E,
) -> Result<ErrorStats> {
    let ens = simulate_ensemble(m, s, g, cfg, exec)?;
    let mean_resid: Vec<f64> = ens.slots.iter().map(|s| s[0].mean).collect();
    let sup = mean_resid.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let min = mean_resid
        .iter()
        .skip(1)
        .map(|v| v.abs())
        .fold(f64::INFINITY, f64::min);
    Ok(ErrorStats {
        eps: s.eps,
        delta: s.delta,
        c: s.c,
        x0: m.x0(),
        n_paths: cfg.n_paths,
        p: cfg.p,
        times: ens.times,
        stderr: ens.slots.iter().map(|s| s[0].stderr_mean()).collect(),
        lln_moment: ens.slots.iter().map(|s| s[1].mean).collect(),
        clt_moment: ens.slots.iter().map(|s| s[2].mean).collect(),
        mean_resid,
        sup_mean_resid_abs: sup,
        min_mean_resid_abs: min,
    })
}

/// Standardised discrepancy; a zero standard error counts as agreement only
/// when the difference is exactly zero.
fn z_score(diff: f64, se: f64) -> f64 {
    if se > 0.0 {
        diff / se
    } else if diff == 0.0 {
        0.0
    } else {
        diff.signum() * f64::INFINITY
    }
}

/// Ensemble mean and variance of `V_t = x_t + εZ_t` against `μ_t`, `ξ_t²`.
pub fn gaussian_check(
    m: &ModelSpec,
    s: &ScaleParams,
    g: &TimeGrid,
    cfg: &EnsembleConfig,
) -> Result<GaussianCheck> {
    gaussian_check_with(m, s, g, cfg, &Sequential)
}

pub fn gaussian_check_with<E: PathExecutor>(
    m: &ModelSpec,
    s: &ScaleParams,
    g: &TimeGrid,
    cfg: &EnsembleConfig,
    exec: &E,
) -> Result<GaussianCheck> {
    let ens = simulate_ensemble(m, s, g, cfg, exec)?;
    let curves = moment_curves(m, s, g)?;
    let mu: Vec<f64> = ens.indices.iter().map(|&i| curves.mu[i]).collect();
    let xi2: Vec<f64> = ens.indices.iter().map(|&i| curves.xi2[i]).collect();
    let v = |k: usize| ens.slots[k][3];
    let n = ens.slots.len();
    Ok(GaussianCheck {
        sample_mean: (0..n).map(|k| v(k).mean).collect(),
        sample_var: (0..n).map(|k| v(k).variance()).collect(),
        z_mean: (0..n)
            .map(|k| z_score(v(k).mean - mu[k], v(k).stderr_mean()))
            .collect(),
        z_var: (0..n)
            .map(|k| z_score(v(k).variance() - xi2[k], v(k).stderr_variance()))
            .collect(),
        skewness: (0..n).map(|k| v(k).skewness()).collect(),
        times: ens.times,
        mu,
        xi2,
    })
}
