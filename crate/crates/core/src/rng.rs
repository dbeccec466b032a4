//! Per-path random substreams.
//!
//! Path `j` of an ensemble seeded with `master` draws from a ChaCha8 stream keyed
//! by [`path_seed`]`(master, j)`:
//!
//! ```text
//! path_seed(master, j) = splitmix64(master ^ j * 0x9E37_79B9_7F4A_7C15)
//! splitmix64(z):  z += 0x9E37_79B9_7F4A_7C15
//!                 z  = (z ^ (z >> 30)) * 0xBF58_476D_1CE4_E5B9
//!                 z  = (z ^ (z >> 27)) * 0x94D0_49BB_1331_11EB
//!                 z ^ (z >> 31)
//! ```
//!
//! Standard normals are produced by inversion: a 53-bit uniform on the open unit
//! interval is mapped through Acklam's rational approximation of the normal
//! quantile, refined by one Halley step against `erfc`.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn path_seed(master: u64, path: usize) -> u64 {
    splitmix64(master ^ (path as u64).wrapping_mul(GOLDEN_GAMMA))
}

/// Stream of independent standard normals.
#[derive(Clone, Debug)]
pub struct NormalStream {
    rng: ChaCha8Rng,
}

impl NormalStream {
    pub fn from_seed(seed: u64) -> Self {
        NormalStream {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn for_path(master: u64, path: usize) -> Self {
        Self::from_seed(path_seed(master, path))
    }

    /// Uniform on the open interval (0, 1).
    pub fn next_open01(&mut self) -> f64 {
        ((self.rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    pub fn next_normal(&mut self) -> f64 {
        normal_quantile(self.next_open01())
    }

    pub fn fill(&mut self, out: &mut [f64]) {
        for v in out {
            *v = self.next_normal();
        }
    }
}

impl Iterator for NormalStream {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        Some(self.next_normal())
    }
}

/// Inverse of the standard normal CDF on (0, 1).
pub fn normal_quantile(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.38357751867269e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LOW: f64 = 0.02425;

    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }

    let x = if p < P_LOW {
        let q = libm::sqrt(-2.0 * libm::log(p));
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = libm::sqrt(-2.0 * libm::log1p(-p));
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };

    // Halley refinement.
    let e = 0.5 * libm::erfc(-x / core::f64::consts::SQRT_2) - p;
    let u = e * libm::sqrt(2.0 * core::f64::consts::PI) * libm::exp(0.5 * x * x);
    x - u / (1.0 + 0.5 * x * u)
}
