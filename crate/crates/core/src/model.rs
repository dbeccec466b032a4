//! The model triple `(f, κ, σ)` with analytic derivatives, the builtin examples,
//! and finite-box probes of the standing assumptions.

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::integrate::rk4_step;

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

pub const BUILTIN_NAMES: [&str; 4] = ["example1", "example2", "example3", "example4"];

/// Coefficient of the linear sampled feedback in `example3`.
pub const EXAMPLE3_GAIN: f64 = 0.3166;

/// Drift `f`, feedback `κ` and diffusion `σ` of a one-dimensional sampled system,
/// with the derivatives `Df`, `Dκ` used by the fluctuation limit.
///
/// Immutable once built; clones share the function objects.
#[derive(Clone)]
pub struct ModelSpec {
    name: String,
    f: ScalarFn,
    df: ScalarFn,
    kappa: ScalarFn,
    dkappa: ScalarFn,
    sigma: ScalarFn,
    x0: f64,
}

impl fmt::Debug for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ModelSpec")
            .field("name", &self.name)
            .field("x0", &self.x0)
            .finish_non_exhaustive()
    }
}

fn zero(_: f64) -> f64 {
    0.0
}

impl ModelSpec {
    /// A model with `f = κ = σ = 0` and `x0 = 0`; fill in with the `with_*` methods.
    pub fn new(name: impl Into<String>) -> Self {
        ModelSpec {
            name: name.into(),
            f: Arc::new(zero),
            df: Arc::new(zero),
            kappa: Arc::new(zero),
            dkappa: Arc::new(zero),
            sigma: Arc::new(zero),
            x0: 0.0,
        }
    }

    pub fn with_drift<F, D>(mut self, f: F, df: D) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        self.f = Arc::new(f);
        self.df = Arc::new(df);
        self
    }

    pub fn with_control<K, D>(mut self, kappa: K, dkappa: D) -> Self
    where
        K: Fn(f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        self.kappa = Arc::new(kappa);
        self.dkappa = Arc::new(dkappa);
        self
    }

    pub fn with_diffusion<S>(mut self, sigma: S) -> Self
    where
        S: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        self.sigma = Arc::new(sigma);
        self
    }

    pub fn with_x0(mut self, x0: f64) -> Self {
        self.x0 = x0;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    #[inline]
    pub fn f(&self, x: f64) -> f64 {
        (self.f)(x)
    }

    #[inline]
    pub fn df(&self, x: f64) -> f64 {
        (self.df)(x)
    }

    #[inline]
    pub fn kappa(&self, x: f64) -> f64 {
        (self.kappa)(x)
    }

    #[inline]
    pub fn dkappa(&self, x: f64) -> f64 {
        (self.dkappa)(x)
    }

    #[inline]
    pub fn sigma(&self, x: f64) -> f64 {
        (self.sigma)(x)
    }

    /// Closed-loop vector field `f(x) + κ(x)`.
    #[inline]
    pub fn closed_loop(&self, x: f64) -> f64 {
        self.f(x) + self.kappa(x)
    }

    /// Linearisation `Df(x) + Dκ(x)` of the closed loop.
    #[inline]
    pub fn linearization(&self, x: f64) -> f64 {
        self.df(x) + self.dkappa(x)
    }

    /// `Dκ(x) [f(x) + κ(x)]`, the sampling-lag term of the fluctuation drift.
    #[inline]
    pub fn lag_term(&self, x: f64) -> f64 {
        self.dkappa(x) * self.closed_loop(x)
    }
}

/// Logistic function `1/(1+e^{-x})`, evaluated without overflow.
pub fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + libm::exp(-x))
    } else {
        let e = libm::exp(x);
        e / (1.0 + e)
    }
}

fn logistic_slope(x: f64) -> f64 {
    let l = logistic(x);
    l * (1.0 - l)
}

/// One of the four worked examples, with its first initial condition.
///
/// | name | f | κ | x0 |
/// |------|---|---|----|
/// | example1 | −x³ − x | −1/(1+e^{−x}) | −0.07 (also 1.5) |
/// | example2 | −x³ + x | −1/(1+e^{−x}) | −0.07 (also 1.5) |
/// | example3 | −3x | −0.3166 x | 0.1 |
/// | example4 | sin x/(1+x²) − 3x | 1/(1+e^{−x}) − 5x | 0.1 |
///
/// All four use `σ ≡ 1`.
pub fn builtin_model(name: &str) -> Result<ModelSpec> {
    let m = match name {
        "example1" => ModelSpec::new("example1")
            .with_drift(|x| -x * x * x - x, |x| -3.0 * x * x - 1.0)
            .with_control(|x| -logistic(x), |x| -logistic_slope(x))
            .with_x0(-0.07),
        "example2" => ModelSpec::new("example2")
            .with_drift(|x| -x * x * x + x, |x| -3.0 * x * x + 1.0)
            .with_control(|x| -logistic(x), |x| -logistic_slope(x))
            .with_x0(-0.07),
        "example3" => ModelSpec::new("example3")
            .with_drift(|x| -3.0 * x, |_| -3.0)
            .with_control(|x| -EXAMPLE3_GAIN * x, |_| -EXAMPLE3_GAIN)
            .with_x0(0.1),
        "example4" => ModelSpec::new("example4")
            .with_drift(
                |x| libm::sin(x) / (1.0 + x * x) - 3.0 * x,
                |x| {
                    let d = 1.0 + x * x;
                    (libm::cos(x) * d - 2.0 * x * libm::sin(x)) / (d * d) - 3.0
                },
            )
            .with_control(|x| logistic(x) - 5.0 * x, |x| logistic_slope(x) - 5.0)
            .with_x0(0.1),
        other => return Err(Error::UnknownModel(other.into())),
    };
    Ok(m.with_diffusion(|_| 1.0))
}

/// Initial conditions used for a builtin model in the published experiments.
pub fn builtin_initial_conditions(name: &str) -> Result<&'static [f64]> {
    match name {
        "example1" | "example2" => Ok(&[-0.07, 1.5]),
        "example3" | "example4" => Ok(&[0.1]),
        other => Err(Error::UnknownModel(other.into())),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivativeCheck {
    pub passed: bool,
    /// Largest deviation `|analytic − fd| / max(1, |fd|)` over both derivatives.
    pub max_deviation: f64,
    pub worst_x: f64,
}

/// Compare `Df` and `Dκ` against central differences with step `1e-6·max(1,|x|)`.
///
/// A non-finite value anywhere counts as an infinite deviation at that point.
pub fn check_derivatives(m: &ModelSpec, grid: &[f64], tol: f64) -> DerivativeCheck {
    let mut worst = DerivativeCheck {
        passed: true,
        max_deviation: 0.0,
        worst_x: f64::NAN,
    };
    for &x in grid {
        let step = 1e-6 * x.abs().max(1.0);
        for (g, dg) in [(&m.f, &m.df), (&m.kappa, &m.dkappa)] {
            let fd = (g(x + step) - g(x - step)) / (2.0 * step);
            let analytic = dg(x);
            let dev = (analytic - fd).abs() / fd.abs().max(1.0);
            let dev = if dev.is_finite() { dev } else { f64::INFINITY };
            if dev > worst.max_deviation || worst.worst_x.is_nan() {
                worst.max_deviation = dev;
                worst.worst_x = x;
            }
        }
    }
    worst.passed = grid.is_empty() || worst.max_deviation <= tol;
    worst
}

/// Closed interval of probe points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeBox {
    pub lo: f64,
    pub hi: f64,
}

impl ProbeBox {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::config("probe box", "need finite lo < hi"));
        }
        Ok(ProbeBox { lo, hi })
    }

    /// `n` evenly spaced points including both ends.
    pub fn points(&self, n: usize) -> Vec<f64> {
        let span = self.hi - self.lo;
        (0..n)
            .map(|i| self.lo + span * i as f64 / (n - 1) as f64)
            .collect()
    }
}

impl Default for ProbeBox {
    fn default() -> Self {
        ProbeBox { lo: -3.0, hi: 3.0 }
    }
}

/// Estimates of the standing-assumption constants over a finite probe box and a
/// finite horizon. None of these are proofs; they are numbers to look at.
#[derive(Debug, Clone, PartialEq)]
pub struct AssumptionReport {
    pub probe_box: ProbeBox,
    pub n_probe: usize,
    pub horizon: f64,
    /// `min −(x−y)(f(x)−f(y))/|x−y|²` over probe pairs.
    pub lambda_hat: f64,
    pub l_kappa_hat: f64,
    pub l_sigma_hat: f64,
    /// `max |σ(x)| + |κ(x)|` over probe points.
    pub gamma_hat: f64,
    /// Least-squares fit of `x·f(x) ≈ −α x² + β`, `α ≥ 0`.
    pub alpha_hat: f64,
    pub beta_hat: f64,
    /// `lambda_hat/2 − l_kappa_hat`.
    pub margin: f64,
    /// `max_t ∫₀ᵗ exp(∫ₛᵗ m[Df+Dκ](x_u) du) ds` on `[0, horizon]`, for `m = 1, 2`.
    pub kernel_sup: [f64; 2],
    /// `max_t [Df + Dκ](x_t)` along the closed-loop trajectory.
    pub max_linearization_on_path: f64,
    /// Hull of the probe points where `Df > 0`, if any.
    pub expansive_region: Option<(f64, f64)>,
}

impl AssumptionReport {
    /// True when every probed condition holds: contractive drift, positive margin,
    /// finite kernel integrals.
    pub fn all_hold(&self) -> bool {
        self.lambda_hat > 0.0 && self.margin > 0.0 && self.kernel_sup.iter().all(|k| k.is_finite())
    }
}

const LOCAL_PAIR_SPACING: f64 = 1e-4;
const KERNEL_STEP: f64 = 1e-3;

/// Probe the contractivity, Lipschitz, growth, dissipativity and kernel
/// conditions of `m` on `probe_box` (with `n_probe` points) and along the
/// closed-loop trajectory on `[0, horizon]`.
///
/// Difference quotients are taken over all pairs of distinct probe points plus
/// each probe point paired with its neighbour at distance `1e-4`.
pub fn probe_assumptions(
    m: &ModelSpec,
    probe_box: ProbeBox,
    n_probe: usize,
    horizon: f64,
) -> Result<AssumptionReport> {
    if n_probe < 2 {
        return Err(Error::config("n_probe", "need at least 2 probe points"));
    }
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(Error::config("horizon", "must be finite and > 0"));
    }
    let probe_box = ProbeBox::new(probe_box.lo, probe_box.hi)?;

    struct Sample {
        x: f64,
        f: f64,
        kappa: f64,
        sigma: f64,
    }
    let eval = |x: f64| -> Result<Sample> {
        let s = Sample {
            x,
            f: m.f(x),
            kappa: m.kappa(x),
            sigma: m.sigma(x),
        };
        if s.f.is_finite() && s.kappa.is_finite() && s.sigma.is_finite() {
            Ok(s)
        } else {
            Err(Error::Probe { x })
        }
    };

    let grid = probe_box
        .points(n_probe)
        .into_iter()
        .map(eval)
        .collect::<Result<Vec<_>>>()?;
    let local = grid
        .iter()
        .map(|s| eval(s.x + LOCAL_PAIR_SPACING))
        .collect::<Result<Vec<_>>>()?;

    let mut lambda = f64::INFINITY;
    let mut l_kappa: f64 = 0.0;
    let mut l_sigma: f64 = 0.0;
    let mut visit = |a: &Sample, b: &Sample| {
        let dx = a.x - b.x;
        if dx == 0.0 {
            return;
        }
        lambda = lambda.min(-(a.f - b.f) / dx);
        l_kappa = l_kappa.max(((a.kappa - b.kappa) / dx).abs());
        l_sigma = l_sigma.max(((a.sigma - b.sigma) / dx).abs());
    };
    for (i, a) in grid.iter().enumerate() {
        for b in &grid[i + 1..] {
            visit(a, b);
        }
        visit(a, &local[i]);
    }

    let gamma = grid
        .iter()
        .map(|s| s.sigma.abs() + s.kappa.abs())
        .fold(0.0, f64::max);

    let (alpha, beta) = dissipativity_fit(&grid.iter().map(|s| (s.x, s.f)).collect::<Vec<_>>());

    let mut expansive: Option<(f64, f64)> = None;
    for s in &grid {
        if m.df(s.x) > 0.0 {
            expansive = Some(match expansive {
                None => (s.x, s.x),
                Some((lo, hi)) => (lo.min(s.x), hi.max(s.x)),
            });
        }
    }

    let (kernel_sup, max_lin) = kernel_sup(m, horizon)?;

    Ok(AssumptionReport {
        probe_box,
        n_probe,
        horizon,
        lambda_hat: lambda,
        l_kappa_hat: l_kappa,
        l_sigma_hat: l_sigma,
        gamma_hat: gamma,
        alpha_hat: alpha,
        beta_hat: beta,
        margin: lambda / 2.0 - l_kappa,
        kernel_sup,
        max_linearization_on_path: max_lin,
        expansive_region: expansive,
    })
}

/// Least squares of `y = x f(x)` on `u = x²`: `y ≈ −α u + β` with `α ≥ 0`.
fn dissipativity_fit(samples: &[(f64, f64)]) -> (f64, f64) {
    let n = samples.len() as f64;
    let (mut su, mut sy) = (0.0, 0.0);
    for &(x, f) in samples {
        su += x * x;
        sy += x * f;
    }
    let (mu, my) = (su / n, sy / n);
    let (mut suu, mut suy) = (0.0, 0.0);
    for &(x, f) in samples {
        let du = x * x - mu;
        suu += du * du;
        suy += du * (x * f - my);
    }
    let slope = if suu > 0.0 { suy / suu } else { 0.0 };
    if slope <= 0.0 {
        (-slope, my - slope * mu)
    } else {
        (0.0, my)
    }
}

/// Integrates `x' = f+κ`, `I_m' = m[Df+Dκ](x) I_m + 1` with RK4 and returns the
/// running maxima of `I_1`, `I_2` and of `Df+Dκ` along the path.
fn kernel_sup(m: &ModelSpec, horizon: f64) -> Result<([f64; 2], f64)> {
    let steps = libm::ceil(horizon / KERNEL_STEP) as usize;
    let h = horizon / steps as f64;
    let rhs = |s: [f64; 3]| {
        let a = m.linearization(s[0]);
        [m.closed_loop(s[0]), a * s[1] + 1.0, 2.0 * a * s[2] + 1.0]
    };
    let mut state = [m.x0(), 0.0, 0.0];
    let mut sup = [0.0f64; 2];
    let mut max_lin = m.linearization(state[0]);
    for step in 0..steps {
        state = rk4_step(&rhs, state, h);
        if !state.iter().all(|v| v.is_finite()) {
            return Err(Error::Divergence { step: step + 1 });
        }
        sup[0] = sup[0].max(state[1]);
        sup[1] = sup[1].max(state[2]);
        max_lin = max_lin.max(m.linearization(state[0]));
    }
    Ok((sup, max_lin))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        ProbeBox::new(lo, hi).unwrap().points(n)
    }

    #[test]
    fn builtin_values() {
        let e3 = builtin_model("example3").unwrap();
        assert_eq!(e3.f(1.0), -3.0);
        assert_eq!(e3.x0(), 0.1);
        let e1 = builtin_model("example1").unwrap();
        assert_eq!(e1.kappa(0.0), -0.5);
        assert_eq!(e1.df(2.0), -13.0);
        assert_eq!(e1.x0(), -0.07);
        assert_eq!(e1.sigma(123.0), 1.0);
        let e4 = builtin_model("example4").unwrap();
        assert_eq!(e4.kappa(0.0), 0.5);
        assert!((e4.f(1.0) - (libm::sin(1.0) / 2.0 - 3.0)).abs() < 1e-15);
    }

    #[test]
    fn unknown_builtin_is_config_error() {
        let err = builtin_model("example9").unwrap_err();
        assert_eq!(err.kind(), crate::ErrorKind::Config);
        assert!(builtin_initial_conditions("nope").is_err());
        assert_eq!(
            builtin_initial_conditions("example2").unwrap(),
            &[-0.07, 1.5]
        );
    }

    #[test]
    fn logistic_is_total() {
        assert_eq!(logistic(-1000.0), 0.0);
        assert_eq!(logistic(1000.0), 1.0);
        assert!(logistic_slope(-800.0).is_finite());
    }

    #[test]
    fn builtin_derivatives_pass() {
        for name in BUILTIN_NAMES {
            let m = builtin_model(name).unwrap();
            let c = check_derivatives(&m, &grid(-2.0, 2.0, 41), 1e-5);
            assert!(c.passed, "{name}: {c:?}");
        }
        let e4 = builtin_model("example4").unwrap();
        assert!(check_derivatives(&e4, &grid(-5.0, 5.0, 101), 1e-4).passed);
    }

    #[test]
    fn wrong_derivative_fails() {
        let m = builtin_model("example1")
            .unwrap()
            .with_drift(|x| -x * x * x - x, |_| 0.0);
        let c = check_derivatives(&m, &[1.0], 1e-5);
        assert!(!c.passed);
        assert!((c.max_deviation - 1.0).abs() < 1e-6, "{c:?}");
        assert_eq!(c.worst_x, 1.0);
    }

    #[test]
    fn non_finite_derivative_fails() {
        let m = ModelSpec::new("bad").with_drift(|x| x, |_| f64::NAN);
        let c = check_derivatives(&m, &[0.0, 1.0], 1e-5);
        assert!(!c.passed);
        assert!(c.max_deviation.is_infinite());
    }

    /// Brute-force oracle for the contractivity constant: every pair of distinct
    /// points from the probe grid and the local-offset grid, evaluated directly
    /// from `f(x) = −x³ − x`.
    fn brute_lambda_example1(lo: f64, hi: f64, n: usize) -> f64 {
        let f = |x: f64| -x * x * x - x;
        let mut pts = grid(lo, hi, n);
        let offs: Vec<f64> = pts.iter().map(|x| x + 1e-4).collect();
        pts.extend(offs);
        let mut best = f64::INFINITY;
        for (i, &x) in pts.iter().enumerate() {
            for &y in &pts[i + 1..] {
                if (x - y).abs() > 0.0 {
                    best = best.min(-(x - y) * (f(x) - f(y)) / ((x - y) * (x - y)));
                }
            }
        }
        best
    }

    #[test]
    fn example1_probe() {
        let m = builtin_model("example1").unwrap();
        let r = probe_assumptions(&m, ProbeBox::default(), 601, 64.0).unwrap();
        let brute = brute_lambda_example1(-3.0, 3.0, 601);
        assert!((brute - 1.0).abs() < 1e-6);
        // The probe skips cross pairs between offset points, so it can only be
        // at or above the brute force infimum, and both sit at 1.
        assert!(r.lambda_hat >= brute - 1e-12);
        assert!((r.lambda_hat - 1.0).abs() < 1e-6, "{}", r.lambda_hat);
        assert!((r.l_kappa_hat - 0.25).abs() < 1e-6);
        assert_eq!(r.l_sigma_hat, 0.0);
        assert_eq!(r.margin, r.lambda_hat / 2.0 - r.l_kappa_hat);
        assert!((r.margin - 0.25).abs() < 1e-6);
        assert!(r.alpha_hat > 0.0 && r.beta_hat >= 0.0);
        assert!((r.gamma_hat - (1.0 + logistic(3.0))).abs() < 1e-12);
        assert!(r.kernel_sup.iter().all(|k| k.is_finite() && *k >= 0.0));
        assert!(r.expansive_region.is_none());
        assert!(r.all_hold());
    }

    #[test]
    fn example2_reports_expansive_region() {
        let m = builtin_model("example2").unwrap();
        let r = probe_assumptions(&m, ProbeBox::default(), 601, 32.0).unwrap();
        assert!(r.lambda_hat < 0.0);
        assert!(r.margin < 0.0);
        assert!(!r.all_hold());
        let (lo, hi) = r.expansive_region.unwrap();
        let edge = 1.0 / libm::sqrt(3.0);
        assert!(
            (lo + edge).abs() < 0.011 && (hi - edge).abs() < 0.011,
            "{lo} {hi}"
        );
    }

    #[test]
    fn example4_linearization_negative_on_path() {
        let m = builtin_model("example4").unwrap();
        let r = probe_assumptions(&m, ProbeBox::default(), 201, 32.0).unwrap();
        assert!(r.max_linearization_on_path < 0.0);
        assert!(r.kernel_sup.iter().all(|k| k.is_finite()));
    }

    #[test]
    fn kernel_sup_stable_under_horizon_doubling() {
        for name in ["example1", "example3", "example4"] {
            let m = builtin_model(name).unwrap();
            let (a, _) = kernel_sup(&m, 64.0).unwrap();
            let (b, _) = kernel_sup(&m, 128.0).unwrap();
            for k in 0..2 {
                assert!((b[k] - a[k]).abs() < 0.01 * a[k], "{name} m={}", k + 1);
            }
        }
    }

    #[test]
    fn kernel_sup_linear_closed_form() {
        // Constant linearisation −A gives I_m(t) = (1 − e^{−mAt})/(mA).
        let m = builtin_model("example3").unwrap();
        let a = 3.0 + EXAMPLE3_GAIN;
        let (k, lin) = kernel_sup(&m, 10.0).unwrap();
        assert!((k[0] - (1.0 - libm::exp(-a * 10.0)) / a).abs() < 1e-10);
        assert!((k[1] - (1.0 - libm::exp(-2.0 * a * 10.0)) / (2.0 * a)).abs() < 1e-10);
        assert_eq!(lin, -a);
    }

    #[test]
    fn probe_rejects_bad_input() {
        let m = builtin_model("example1").unwrap();
        assert!(probe_assumptions(&m, ProbeBox::default(), 1, 1.0).is_err());
        assert!(probe_assumptions(&m, ProbeBox::default(), 10, 0.0).is_err());
        assert!(probe_assumptions(&m, ProbeBox { lo: 1.0, hi: 1.0 }, 10, 1.0).is_err());
        let nan =
            ModelSpec::new("nan").with_drift(|x| if x > 0.5 { f64::NAN } else { -x }, |_| -1.0);
        assert!(matches!(
            probe_assumptions(&nan, ProbeBox::new(0.0, 1.0).unwrap(), 3, 1.0),
            Err(Error::Probe { x }) if x == 1.0
        ));
    }

    #[test]
    fn dissipativity_fit_exact_on_quadratic() {
        // x f(x) = −2x² + 0.5 exactly when f(x) = −2x + 0.5/x; check the fit alone.
        let pts: Vec<(f64, f64)> = vec![1.0, 2.0, 3.0, 4.0]
            .into_iter()
            .map(|x: f64| (x, -2.0 * x + 0.5 / x))
            .collect();
        let (a, b) = dissipativity_fit(&pts);
        assert!((a - 2.0).abs() < 1e-12 && (b - 0.5).abs() < 1e-12);
        // Growing x f(x) clamps α to zero.
        let (a, _) = dissipativity_fit(&[(1.0, 1.0), (2.0, 2.0)]);
        assert_eq!(a, 0.0);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(24))]
            #[test]
            fn lambda_nonincreasing_in_box(k1 in 2usize..60, extra in 1usize..60) {
                // Nested grids with identical spacing 0.05.
                let m = builtin_model("example1").unwrap();
                let k2 = k1 + extra;
                let s = 0.05;
                let small = probe_assumptions(
                    &m, ProbeBox::new(-(k1 as f64) * s, k1 as f64 * s).unwrap(), 2 * k1 + 1, 1.0).unwrap();
                let large = probe_assumptions(
                    &m, ProbeBox::new(-(k2 as f64) * s, k2 as f64 * s).unwrap(), 2 * k2 + 1, 1.0).unwrap();
                prop_assert!(large.lambda_hat <= small.lambda_hat + 1e-9);
            }

            #[test]
            fn builtins_pass_derivative_check_anywhere(lo in -4.0f64..0.0, width in 0.1f64..4.0, n in 1usize..50) {
                let g: Vec<f64> = (0..n).map(|i| lo + width * i as f64 / n as f64).collect();
                for name in BUILTIN_NAMES {
                    let m = builtin_model(name).unwrap();
                    prop_assert!(check_derivatives(&m, &g, 1e-5).passed);
                }
            }
        }
    }
}
