//! Simulation of a one-dimensional SDE with a sample-and-hold feedback law and
//! small additive-scale noise,
//!
//! ```text
//! dX_t = { f(X_t) + κ(X_{π_δ(t)}) } dt + ε σ(X_t) dW_t,      π_δ(t) = δ ⌊t/δ⌋,
//! ```
//!
//! together with its closed-loop limit `dx/dt = f(x) + κ(x)` and the limiting
//! fluctuation process
//!
//! ```text
//! dZ_t = { [Df + Dκ](x_t) Z_t − (c/2) Dκ(x_t) [f + κ](x_t) } dt + σ(x_t) dW_t,
//! ```
//!
//! all driven by one Brownian path. The crate is `no_std` (it needs `alloc`):
//! parallel execution, files and the command line live in `sampled-sde-cli`.
//!
//! Module map:
//!
//! * [`model`]: drift/control/diffusion triples, the four builtin examples and
//!   numerical probes of the contractivity, growth and kernel conditions.
//! * [`integrate`]: the sampling operator, coupled Euler–Maruyama paths, moment
//!   ODEs of the Gaussian approximation and the exact linear oracle.
//! * [`montecarlo`]: seeded ensembles, error functionals and Gaussian z-scores.
//! * [`rates`]: ε-ladders, log-log order fits and table rendering.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

mod error;
pub mod integrate;
pub mod model;
pub mod montecarlo;
pub mod rates;
pub mod rng;
mod scale;

pub use error::{Error, ErrorKind, Result};
pub use integrate::{
    exact_linear_path, moment_curves, pi_delta, simulate_path, MomentCurves, PathBundle,
    ReferenceScheme, TimeGrid,
};
pub use model::{
    builtin_model, check_derivatives, probe_assumptions, AssumptionReport, DerivativeCheck,
    ModelSpec, ProbeBox,
};
pub use montecarlo::{
    gaussian_check, gaussian_check_with, run_ensemble, run_ensemble_with, EnsembleConfig,
    ErrorStats, GaussianCheck, PathExecutor, Sequential,
};
pub use rates::{
    fit_rate, render_table, run_ladder, run_ladder_stats, DeltaRule, Functional, GridTemplate,
    LadderSpec, RateFit, Table,
};
pub use scale::ScaleParams;
