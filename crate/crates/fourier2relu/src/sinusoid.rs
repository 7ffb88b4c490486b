//! Randomized sinusoid estimators built from four-ReLU bump functions.
//!
//! For a shift parameter `s` drawn uniformly on [0, 1], the weighted bump
//! difference `gamma_sin` integrates to `sin(omega t)` on one period window
//! and to zero outside, and the tiled sum `gamma_cos` does the same for
//! `cos(omega t)` on a window of `2n + 2` periods. The estimators stay
//! bounded by `pi^2 / 4` no matter how large `omega` is, which is what makes
//! sampling-based synthesis work at any frequency.

use crate::relu_net::{relu, LayerSpec};
use std::f64::consts::PI;

/// Parameters of the randomized cosine estimator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinusoidEstimatorParams {
    pub omega: f64,
    pub n: u32,
    pub s: f64,
}

impl SinusoidEstimatorParams {
    pub fn new(omega: f64, n: u32, s: f64) -> Result<Self, SinusoidError> {
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(SinusoidError::BadParameter {
                what: format!("omega must be positive and finite, got {omega}"),
            });
        }
        if !(0.0..=1.0).contains(&s) {
            return Err(SinusoidError::BadParameter {
                what: format!("s must lie in [0, 1], got {s}"),
            });
        }
        Ok(Self { omega, n, s })
    }
}

/// Four-ReLU bump: `ReLU(t) + ReLU(t - pi/omega) - ReLU(t - pi s/omega)
/// - ReLU(t - pi (1-s)/omega)`. Supported on `[0, pi/omega]` with
/// `|R4| <= (pi/omega) min(s, 1-s)`.
pub fn r4_eval(t: f64, s: f64, omega: f64) -> f64 {
    let p = PI / omega;
    relu(t) + relu(t - p) - relu(t - p * s) - relu(t - p * (1.0 - s))
}

/// Weighted bump difference whose expectation over `s ~ U[0,1]` is
/// `sin(omega t)` for `t` in `[0, 2 pi / omega]` and zero outside.
pub fn gamma_sin_eval(t: f64, s: f64, omega: f64) -> f64 {
    0.5 * PI * omega * (PI * s).sin() * (r4_eval(t, s, omega) - r4_eval(t - PI / omega, s, omega))
}

/// Tiled estimator whose expectation over `s ~ U[0,1]` is `cos(omega t)` on
/// the window given by [`gamma_cos_window`]. Almost surely bounded by
/// `pi^2 / 4`.
pub fn gamma_cos_eval(t: f64, s: f64, omega: f64, n: u32) -> f64 {
    let n = n as i64;
    let mut acc = 0.0;
    for i in -(n + 1)..=n {
        acc += gamma_sin_eval(t - window_offset(i, omega), s, omega);
    }
    acc
}

/// Left edge of tile `i`: the `gamma_sin` copies abut with period
/// `2 pi / omega`, offset by a quarter period so their union is symmetric.
fn window_offset(i: i64, omega: f64) -> f64 {
    2.0 * PI * i as f64 / omega - 0.5 * PI / omega
}

/// Validity window `[-pi/omega - 2 pi n/omega, 2 pi n/omega + pi/omega]` on
/// which the expectation of `gamma_cos` equals the cosine.
pub fn gamma_cos_window(omega: f64, n: u32) -> (f64, f64) {
    let edge = (2.0 * PI * n as f64 + PI) / omega;
    (-edge, edge)
}

/// Hard bound `pi^2 / 4` satisfied by `|gamma_cos|` for every `(t, s)`.
pub fn gamma_cos_sup_bound() -> f64 {
    0.25 * PI * PI
}

/// Realize `t -> gamma_cos(t; s, omega, n)` as a single ReLU layer over a
/// scalar input plus readout. Exactly `16 n + 16` units: each of the
/// `2n + 2` tiles contributes two four-ReLU bumps, kept verbatim (the
/// cancelling pair inside each tile is intentional; the provable unit-count
/// bound refers to this un-deduplicated form).
pub fn gamma_cos_layer(s: f64, omega: f64, n: u32) -> (LayerSpec, Vec<f64>) {
    let p = PI / omega;
    // ReLU shift pattern of gamma_sin expanded into single units.
    let shifts = [0.0, p, p * s, p * (1.0 - s), p, 2.0 * p, p + p * s, p + p * (1.0 - s)];
    let signs = [1.0, 1.0, -1.0, -1.0, -1.0, -1.0, 1.0, 1.0];
    let kappa = 0.5 * PI * omega * (PI * s).sin();

    let tiles = 2 * n as usize + 2;
    let units = 8 * tiles;
    let mut thresholds = Vec::with_capacity(units);
    let mut readout = Vec::with_capacity(units);
    for i in -(n as i64 + 1)..=(n as i64) {
        let base = window_offset(i, omega);
        for j in 0..8 {
            thresholds.push(base + shifts[j]);
            readout.push(kappa * signs[j]);
        }
    }
    let weights = vec![vec![1.0]; units];
    let layer = LayerSpec::new(weights, thresholds).expect("estimator layer shape is consistent");
    (layer, readout)
}

/// Shift values in (0, 1) at which `s -> gamma_cos(t; s, omega, n)` has a
/// kink, for a fixed `t`. Between consecutive kinks the map is
/// `sin(pi s) * (affine in s)`, hence analytic.
pub fn s_breakpoints(t: f64, omega: f64, n: u32) -> Vec<f64> {
    let mut kinks = Vec::new();
    for i in -(n as i64 + 1)..=(n as i64) {
        let u = (t - window_offset(i, omega)) * omega / PI;
        for cand in [u, 1.0 - u, u - 1.0, 2.0 - u] {
            if cand > 0.0 && cand < 1.0 {
                kinks.push(cand);
            }
        }
    }
    kinks.sort_by(f64::total_cmp);
    kinks.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    kinks
}

/// Exact expectation `int_0^1 gamma_cos(t; s, omega, n) ds`, computed by
/// splitting at every kink in `s` and applying Gauss-Legendre per piece.
/// Equals `cos(omega t)` on the validity window and vanishes far outside it.
pub fn expectation_oracle(t: f64, omega: f64, n: u32) -> f64 {
    let kinks = s_breakpoints(t, omega, n);
    crate::quadrature::integrate_piecewise(|s| gamma_cos_eval(t, s, omega, n), 0.0, 1.0, &kinks)
}

/// Sinusoid estimator failures.
#[derive(Debug, thiserror::Error)]
pub enum SinusoidError {
    #[error("invalid estimator parameter: {what}")]
    BadParameter { what: String },
}
