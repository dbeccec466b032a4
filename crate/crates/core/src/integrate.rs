//! Time stepping on a grid that contains every sampling instant.
//!
//! One Euler–Maruyama pass advances the sampled SDE `X` and the limiting
//! fluctuation process `Z` with the same increments `dW`. The closed-loop ODE
//! `x` and the moment equations of the Gaussian approximation are integrated with
//! classical RK4 on the same grid so that their discretisation error stays well
//! below the stochastic effects being measured.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::model::ModelSpec;
use crate::scale::ScaleParams;

/// Most recent sampling instant `δ⌊t/δ⌋`.
///
/// Times within a few ulps of a multiple of `delta` are treated as that sampling
/// instant, so `pi_delta(0.3, 0.1) == 0.3` even though `0.3/0.1` rounds below 3.
pub fn pi_delta(t: f64, delta: f64) -> f64 {
    let q = t / delta;
    let r = libm::round(q);
    if (q - r).abs() <= 4.0 * f64::EPSILON * r.abs().max(1.0) {
        // A sampling instant up to rounding.
        return if r * delta <= t { r * delta } else { t };
    }
    libm::floor(q) * delta
}

/// How the closed-loop reference path `x_det` is integrated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReferenceScheme {
    /// Classical RK4 on the grid.
    #[default]
    Rk4,
    /// Forward Euler on the grid, the same drift discretisation as `X`. The
    /// leading O(h) drift error of `X` cancels in `X − x_det`, so `Z^ε − Z` has
    /// no O(h/ε) floor.
    Euler,
}

impl ReferenceScheme {
    pub fn name(&self) -> &'static str {
        match self {
            ReferenceScheme::Rk4 => "rk4",
            ReferenceScheme::Euler => "euler",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "rk4" => Some(ReferenceScheme::Rk4),
            "euler" => Some(ReferenceScheme::Euler),
            _ => None,
        }
    }
}

/// Uniform integration grid `t_i = i·h` on `[0, horizon]` with `h = delta/M`.
///
/// Sampling instants `kδ` are exactly the indices divisible by `M`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    horizon: f64,
    delta: f64,
    steps_per_sample: usize,
    h: f64,
    steps: usize,
    reference: ReferenceScheme,
}

const GRID_REL_TOL: f64 = 1e-9;

impl TimeGrid {
    pub fn new(horizon: f64, delta: f64, steps_per_sample: usize) -> Result<Self> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::config("horizon", "must be finite and > 0"));
        }
        if !(delta.is_finite() && delta > 0.0) {
            return Err(Error::config("delta", "must be finite and > 0"));
        }
        if steps_per_sample == 0 {
            return Err(Error::config("steps_per_sample", "must be >= 1"));
        }
        let h = delta / steps_per_sample as f64;
        let ratio = horizon / h;
        let steps = libm::round(ratio);
        if steps < 1.0 || (ratio - steps).abs() > GRID_REL_TOL * ratio {
            return Err(Error::config(
                "horizon",
                alloc::format!("{horizon} is not an integer multiple of the step {h}"),
            ));
        }
        if steps > (usize::MAX / 2) as f64 {
            return Err(Error::config("horizon", "too many steps"));
        }
        Ok(TimeGrid {
            horizon,
            delta,
            steps_per_sample,
            h,
            steps: steps as usize,
            reference: ReferenceScheme::default(),
        })
    }

    pub fn with_reference(mut self, reference: ReferenceScheme) -> Self {
        self.reference = reference;
        self
    }

    pub fn reference(&self) -> ReferenceScheme {
        self.reference
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn steps_per_sample(&self) -> usize {
        self.steps_per_sample
    }

    /// Integrator step.
    pub fn h(&self) -> f64 {
        self.h
    }

    /// Number of steps; arrays on the grid have `steps + 1` entries.
    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn time(&self, i: usize) -> f64 {
        i as f64 * self.h
    }

    pub fn is_sampling_index(&self, i: usize) -> bool {
        i.is_multiple_of(self.steps_per_sample)
    }

    /// Smallest divisor `d` of `steps` such that the indices `0, d, 2d, …, steps`
    /// number at most `max_points`. Keeps the final time on the thinned grid.
    pub fn thinning_stride(&self, max_points: usize) -> usize {
        let max_points = max_points.max(2);
        if self.steps < max_points {
            return 1;
        }
        let lower = self.steps.div_ceil(max_points - 1);
        (lower..=self.steps)
            .find(|d| self.steps.is_multiple_of(*d))
            .unwrap_or(self.steps)
    }
}

/// One coupled realisation on a shared grid. Index `i` is time `i·h`.
#[derive(Debug, Clone, PartialEq)]
pub struct PathBundle {
    pub grid: TimeGrid,
    /// Brownian increments, `dw[i]` drives step `i → i+1`.
    pub dw: Vec<f64>,
    /// Euler path of the sampled SDE.
    pub x_sde: Vec<f64>,
    /// Closed-loop ODE path.
    pub x_det: Vec<f64>,
    /// `(x_sde − x_det)/eps`; `None` in pure-ODE mode (`eps = 0`).
    pub z_eps: Option<Vec<f64>>,
    /// Euler path of the limiting fluctuation SDE.
    pub z_lim: Vec<f64>,
    /// Gaussian approximation `x_det + eps·z_lim`.
    pub v: Vec<f64>,
}

/// Mean and variance of the Gaussian approximation on the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentCurves {
    pub mu: Vec<f64>,
    pub xi2: Vec<f64>,
}

pub(crate) fn rk4_step<const N: usize, F>(rhs: &F, y: [f64; N], h: f64) -> [f64; N]
where
    F: Fn([f64; N]) -> [f64; N],
{
    let axpy = |a: &[f64; N], s: f64, b: &[f64; N]| {
        let mut out = *a;
        for (o, v) in out.iter_mut().zip(b) {
            *o += s * v;
        }
        out
    };
    let k1 = rhs(y);
    let k2 = rhs(axpy(&y, 0.5 * h, &k1));
    let k3 = rhs(axpy(&y, 0.5 * h, &k2));
    let k4 = rhs(axpy(&y, h, &k3));
    let mut out = y;
    for i in 0..N {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

/// Closed-loop trajectory with the coefficients of the fluctuation SDE
/// pre-evaluated at every grid point. Shared by all paths of an ensemble.
#[derive(Debug, Clone)]
pub(crate) struct Reference {
    pub x: Vec<f64>,
    /// `Df + Dκ` at `x[i]`.
    pub lin: Vec<f64>,
    /// `Dκ (f + κ)` at `x[i]`.
    pub lag: Vec<f64>,
    /// `σ` at `x[i]`.
    pub sig: Vec<f64>,
}

impl Reference {
    pub fn new(m: &ModelSpec, g: &TimeGrid) -> Result<Self> {
        let n = g.steps() + 1;
        let mut x = Vec::with_capacity(n);
        let rhs = |y: [f64; 1]| [m.closed_loop(y[0])];
        let mut y = [m.x0()];
        x.push(y[0]);
        for i in 0..g.steps() {
            y = match g.reference() {
                ReferenceScheme::Rk4 => rk4_step(&rhs, y, g.h()),
                ReferenceScheme::Euler => [y[0] + g.h() * m.closed_loop(y[0])],
            };
            if !y[0].is_finite() {
                return Err(Error::Divergence { step: i + 1 });
            }
            x.push(y[0]);
        }
        let lin = x.iter().map(|&v| m.linearization(v)).collect();
        let lag = x.iter().map(|&v| m.lag_term(v)).collect();
        let sig = x.iter().map(|&v| m.sigma(v)).collect();
        Ok(Reference { x, lin, lag, sig })
    }
}

/// Euler–Maruyama stepper for the pair `(X, Z)` against a precomputed
/// [`Reference`].
pub(crate) struct Coupled<'a> {
    pub model: &'a ModelSpec,
    pub scale: ScaleParams,
    pub grid: &'a TimeGrid,
    pub reference: &'a Reference,
}

/// State handed to the visitor of [`Coupled::run`].
#[derive(Debug, Clone, Copy)]
pub(crate) struct StepState {
    pub x_sde: f64,
    pub z_lim: f64,
    /// Increment applied on the step leaving this index (0 at the last index).
    pub dw: f64,
    /// Path value whose feedback drives the step leaving this index.
    #[cfg_attr(not(test), allow(dead_code))]
    pub held: f64,
}

impl Coupled<'_> {
    /// Runs one path, calling `visit(i, state)` for every index `0..=steps`.
    /// `noise` must yield at least `steps` standard normals.
    pub fn run<I, V>(&self, noise: I, mut visit: V) -> Result<()>
    where
        I: IntoIterator<Item = f64>,
        V: FnMut(usize, StepState),
    {
        let m = self.model;
        let r = self.reference;
        let h = self.grid.h();
        let sqrt_h = libm::sqrt(h);
        let eps = self.scale.eps;
        let half_c = 0.5 * self.scale.c;
        let noisy_z = !self.scale.is_noiseless();
        let per_sample = self.grid.steps_per_sample();

        let mut x = m.x0();
        let mut z = 0.0;
        let mut held = x;
        let mut held_kappa = 0.0;
        let mut noise = noise.into_iter();
        for i in 0..self.grid.steps() {
            if i % per_sample == 0 {
                held = x;
                held_kappa = m.kappa(x);
            }
            let n = noise.next().ok_or(Error::Config {
                field: "noise",
                reason: alloc::format!("ran out of normals at step {i}"),
            })?;
            let dw = sqrt_h * n;
            visit(
                i,
                StepState {
                    x_sde: x,
                    z_lim: z,
                    dw,
                    held,
                },
            );
            let x_next = x + (m.f(x) + held_kappa) * h + eps * m.sigma(x) * dw;
            let mut z_next = z + (r.lin[i] * z - half_c * r.lag[i]) * h;
            if noisy_z {
                z_next += r.sig[i] * dw;
            }
            if !(x_next.is_finite() && z_next.is_finite()) {
                return Err(Error::Divergence { step: i + 1 });
            }
            x = x_next;
            z = z_next;
        }
        let last = self.grid.steps();
        if last.is_multiple_of(per_sample) {
            held = x;
        }
        visit(
            last,
            StepState {
                x_sde: x,
                z_lim: z,
                dw: 0.0,
                held,
            },
        );
        Ok(())
    }
}

/// One coupled Euler–Maruyama realisation driven by `noise[i]·√h`.
///
/// The feedback is held at the path value of the last grid index divisible by
/// `M`. `x_det` follows the grid's [`ReferenceScheme`]; `z_eps` and `v` are
/// filled from their definitions, never integrated.
pub fn simulate_path(
    m: &ModelSpec,
    s: &ScaleParams,
    g: &TimeGrid,
    noise: &[f64],
) -> Result<PathBundle> {
    if noise.len() != g.steps() {
        return Err(Error::config(
            "noise",
            alloc::format!("expected {} normals, got {}", g.steps(), noise.len()),
        ));
    }
    let reference = Reference::new(m, g)?;
    let n = g.steps() + 1;
    let mut dw = Vec::with_capacity(g.steps());
    let mut x_sde = Vec::with_capacity(n);
    let mut z_lim = Vec::with_capacity(n);
    Coupled {
        model: m,
        scale: *s,
        grid: g,
        reference: &reference,
    }
    .run(noise.iter().copied(), |i, st| {
        if i < g.steps() {
            dw.push(st.dw);
        }
        x_sde.push(st.x_sde);
        z_lim.push(st.z_lim);
    })?;

    let x_det = reference.x;
    let z_eps = if s.is_noiseless() {
        None
    } else {
        Some(
            x_sde
                .iter()
                .zip(&x_det)
                .map(|(a, b)| (a - b) / s.eps)
                .collect(),
        )
    };
    let v = x_det
        .iter()
        .zip(&z_lim)
        .map(|(x, z)| x + s.eps * z)
        .collect();
    Ok(PathBundle {
        grid: *g,
        dw,
        x_sde,
        x_det,
        z_eps,
        z_lim,
        v,
    })
}

/// Mean `μ_t` and variance `ξ_t²` of `V_t = x_t + εZ_t`.
///
/// Integrates, jointly with `x_t` by RK4,
///
/// ```text
/// m' = [Df+Dκ](x) m − (c/2) Dκ(x)[f+κ](x),   m(0) = 0
/// v' = 2[Df+Dκ](x) v + σ²(x),               v(0) = 0
/// ```
///
/// and returns `μ = x + ε m`, `ξ² = ε² v`. Always RK4, whatever the grid's
/// reference scheme.
pub fn moment_curves(m: &ModelSpec, s: &ScaleParams, g: &TimeGrid) -> Result<MomentCurves> {
    let half_c = 0.5 * s.c;
    let rhs = |y: [f64; 3]| {
        let x = y[0];
        let a = m.linearization(x);
        let sig = m.sigma(x);
        [
            m.closed_loop(x),
            a * y[1] - half_c * m.lag_term(x),
            2.0 * a * y[2] + sig * sig,
        ]
    };
    let n = g.steps() + 1;
    let mut mu = Vec::with_capacity(n);
    let mut xi2 = Vec::with_capacity(n);
    let eps2 = s.eps * s.eps;
    let mut y = [m.x0(), 0.0, 0.0];
    mu.push(y[0]);
    xi2.push(0.0);
    for i in 0..g.steps() {
        y = rk4_step(&rhs, y, g.h());
        if !y.iter().all(|v| v.is_finite()) {
            return Err(Error::Divergence { step: i + 1 });
        }
        mu.push(y[0] + s.eps * y[1]);
        xi2.push(eps2 * y[2]);
    }
    Ok(MomentCurves { mu, xi2 })
}

/// Exact-in-distribution path of `dX = (aX + b X_{π_δ(t)}) dt + ε dW`.
///
/// On a step inside sampling interval `k` the feedback `u_k = b X_{kδ}` is
/// frozen and the transition is
///
/// ```text
/// X(t+h) = e^{ah} X(t) + (u_k/a)(e^{ah} − 1) + ε √((e^{2ah} − 1)/(2a)) n_i
/// ```
///
/// consuming `noise[i]` in the same order as [`simulate_path`], so the two paths
/// are coupled.
pub fn exact_linear_path(
    a: f64,
    b: f64,
    x0: f64,
    s: &ScaleParams,
    g: &TimeGrid,
    noise: &[f64],
) -> Result<Vec<f64>> {
    if a == 0.0 || !a.is_finite() {
        return Err(Error::config("a", "must be finite and nonzero"));
    }
    if noise.len() != g.steps() {
        return Err(Error::config(
            "noise",
            alloc::format!("expected {} normals, got {}", g.steps(), noise.len()),
        ));
    }
    let h = g.h();
    let decay = libm::exp(a * h);
    let forcing = libm::expm1(a * h) / a;
    let spread = s.eps * libm::sqrt(libm::expm1(2.0 * a * h) / (2.0 * a));
    let mut out = vec![0.0; g.steps() + 1];
    out[0] = x0;
    let mut u = 0.0;
    for i in 0..g.steps() {
        if g.is_sampling_index(i) {
            u = b * out[i];
        }
        let next = decay * out[i] + u * forcing + spread * noise[i];
        if !next.is_finite() {
            return Err(Error::Divergence { step: i + 1 });
        }
        out[i + 1] = next;
    }
    Ok(out)
}
