use crate::error::{Error, Result};

/// Noise size `eps`, sampling period `delta` and the regime constant `c`.
///
/// `c` stands in for the limit of `delta/eps`; at finite `eps` the default is the
/// actual ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaleParams {
    pub eps: f64,
    pub delta: f64,
    pub c: f64,
}

impl ScaleParams {
    /// `c = delta / eps`.
    pub fn new(eps: f64, delta: f64) -> Result<Self> {
        Self::validate_positive("eps", eps)?;
        Self::validate_positive("delta", delta)?;
        Ok(ScaleParams {
            eps,
            delta,
            c: delta / eps,
        })
    }

    pub fn with_c(eps: f64, delta: f64, c: f64) -> Result<Self> {
        Self::validate_positive("eps", eps)?;
        Self::validate_positive("delta", delta)?;
        if !(c.is_finite() && c >= 0.0) {
            return Err(Error::config("c", "must be finite and >= 0"));
        }
        Ok(ScaleParams { eps, delta, c })
    }

    /// `delta = ratio * eps`, so `c = ratio` exactly.
    pub fn from_ratio(eps: f64, ratio: f64) -> Result<Self> {
        Self::validate_positive("delta ratio", ratio)?;
        Self::with_c(eps, ratio * eps, ratio)
    }

    /// Pure-ODE mode: `eps = 0`, `c = 0`. Only the deterministic parts of a path
    /// are meaningful.
    pub fn noiseless(delta: f64) -> Result<Self> {
        Self::validate_positive("delta", delta)?;
        Ok(ScaleParams {
            eps: 0.0,
            delta,
            c: 0.0,
        })
    }

    pub fn is_noiseless(&self) -> bool {
        self.eps == 0.0
    }

    fn validate_positive(field: &'static str, v: f64) -> Result<()> {
        if v.is_finite() && v > 0.0 {
            Ok(())
        } else {
            Err(Error::config(field, "must be finite and > 0"))
        }
    }
}
