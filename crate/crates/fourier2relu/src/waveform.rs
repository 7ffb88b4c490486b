//! Triangle waveforms and their depth-multiplying composition law.
//!
//! The basic triangle `T(t; alpha, beta)` rises with slope `beta` on
//! `[0, alpha]`, falls back to zero on `(alpha, 2 alpha]` and vanishes
//! elsewhere. The waveform `T_k` tiles `2k` copies of it side by side over
//! `[-2 k alpha, 2 k alpha]`, which a single layer of `4k + 1` ReLU units
//! realizes exactly. Composing a `k`-waveform with an `l`-waveform whose
//! parameters satisfy the junction identity `alpha * beta = 2 * a * l`
//! yields a `2kl`-waveform, so oscillation count multiplies while unit count
//! only adds. That exchange rate is what the deep synthesizer exploits.

use crate::relu_net::{LayerSpec, NetError, ReluNetwork};

/// Parameters of a triangle waveform: half-period `alpha`, slope `beta`,
/// `k` repetitions on each side of the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriangleParams {
    pub alpha: f64,
    pub beta: f64,
    pub k: u32,
}

impl TriangleParams {
    pub fn new(alpha: f64, beta: f64, k: u32) -> Result<Self, WaveformError> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(WaveformError::BadParameter {
                what: format!("alpha must be positive and finite, got {alpha}"),
            });
        }
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(WaveformError::BadParameter {
                what: format!("beta must be positive and finite, got {beta}"),
            });
        }
        if k == 0 {
            return Err(WaveformError::BadParameter { what: "k must be at least 1".into() });
        }
        Ok(Self { alpha, beta, k })
    }

    /// Peak height `alpha * beta` of every triangle in the waveform.
    pub fn height(&self) -> f64 {
        self.alpha * self.beta
    }

    /// Support endpoint: the waveform vanishes outside `[-2 k alpha, 2 k alpha]`.
    pub fn support_radius(&self) -> f64 {
        2.0 * self.k as f64 * self.alpha
    }
}

/// The single triangle: `beta * t` on `[0, alpha]`, `2 alpha beta - beta t`
/// on `(alpha, 2 alpha]`, zero elsewhere.
pub fn triangle_eval(t: f64, alpha: f64, beta: f64) -> f64 {
    if t < 0.0 || t > 2.0 * alpha {
        0.0
    } else if t <= alpha {
        beta * t
    } else {
        2.0 * alpha * beta - beta * t
    }
}

/// Evaluate `T_k(t; alpha, beta)` in O(1): the waveform restricted to the
/// tile `[2 m alpha, 2 (m + 1) alpha]` equals the single triangle shifted by
/// `2 m alpha`, so it suffices to locate the tile index.
pub fn waveform_eval(t: f64, params: &TriangleParams) -> f64 {
    let TriangleParams { alpha, beta, k } = *params;
    // Exact zero at and beyond the support edge; the tile arithmetic below
    // can otherwise leave an ulp of noise at t = +-2 k alpha.
    if t.abs() >= params.support_radius() {
        return 0.0;
    }
    let k = k as i64;
    let m = (t / (2.0 * alpha)).floor() as i64;
    let m = m.clamp(-k, k - 1);
    triangle_eval(t - 2.0 * m as f64 * alpha, alpha, beta)
}

/// Literal-sum reference for `waveform_eval`: the defining sum of `2k`
/// shifted triangles. Kept as an independent oracle; do not "optimize" it.
pub fn waveform_eval_literal(t: f64, params: &TriangleParams) -> f64 {
    let TriangleParams { alpha, beta, k } = *params;
    let k = k as i64;
    let mut acc = 0.0;
    for i in (-k + 1)..=k {
        acc += triangle_eval(t - 2.0 * alpha * (i - 1) as f64, alpha, beta);
    }
    acc
}

/// Realize `T_k` as one ReLU layer over a scalar input plus a readout.
/// The layer has exactly `4k + 1` units with thresholds at the waveform's
/// breakpoints `-2 k alpha + j alpha`; the readout carries the slope change
/// at each breakpoint, so the coefficients alternate
/// `+beta, -2 beta, +2 beta, ..., -2 beta, +beta` and sum to zero.
pub fn waveform_layer(params: &TriangleParams) -> (LayerSpec, Vec<f64>) {
    let TriangleParams { alpha, beta, k } = *params;
    let units = 4 * k as usize + 1;
    let weights = vec![vec![1.0]; units];
    let thresholds: Vec<f64> =
        (0..units).map(|j| -2.0 * k as f64 * alpha + j as f64 * alpha).collect();
    let mut readout = Vec::with_capacity(units);
    for j in 0..units {
        let c = if j == 0 || j == units - 1 {
            beta
        } else if j % 2 == 1 {
            -2.0 * beta
        } else {
            2.0 * beta
        };
        readout.push(c);
    }
    debug_assert!(readout.iter().sum::<f64>().abs() < 1e-12 * beta.abs() * units as f64);
    let layer = LayerSpec::new(weights, thresholds).expect("waveform layer shape is consistent");
    (layer, readout)
}

/// Build the two-layer network realizing `T_outer(T_inner(t))`: the second
/// layer folds the first readout into its weight rows.
pub fn compose_waveform_net(
    inner: &TriangleParams,
    outer: &TriangleParams,
) -> Result<ReluNetwork, NetError> {
    let (layer1, readout1) = waveform_layer(inner);
    let (layer2_scalar, readout2) = waveform_layer(outer);
    let rows = layer2_scalar.n_units();
    let weights: Vec<Vec<f64>> = (0..rows).map(|_| readout1.clone()).collect();
    let layer2 = LayerSpec::new(weights, layer2_scalar.thresholds)?;
    ReluNetwork::new(1, vec![layer1, layer2], readout2)
}

/// Composition parameters produced by [`compose_params`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComposedParams {
    pub params: TriangleParams,
}

/// Under the junction identity `alpha * beta = 2 a l`, the composition
/// `T_l(T_k(t; alpha, beta); a, b)` equals `T_{2kl}(t; a / beta, b beta)`.
/// Returns the composed waveform's parameters, or an error when the
/// precondition fails (checked to 1e-12 relative).
pub fn compose_params(
    inner: &TriangleParams,
    outer: &TriangleParams,
) -> Result<ComposedParams, WaveformError> {
    let lhs = inner.alpha * inner.beta;
    let rhs = 2.0 * outer.alpha * outer.k as f64;
    if (lhs - rhs).abs() > 1e-12 * lhs.abs().max(rhs.abs()) {
        return Err(WaveformError::JunctionMismatch { peak: lhs, required: rhs });
    }
    let params = TriangleParams::new(
        outer.alpha / inner.beta,
        outer.beta * inner.beta,
        2 * inner.k * outer.k,
    )?;
    Ok(ComposedParams { params })
}

/// Grid-check the composition law: evaluates `T_outer(T_inner(t))` against
/// the closed-form `T_{2kl}` on `grid_points` points spanning one unit past
/// the support on each side. Returns `true` when every point agrees within
/// `1e-9 * (1 + inner_height * outer_beta)`.
pub fn check_composition(
    inner: &TriangleParams,
    outer: &TriangleParams,
    grid_points: usize,
) -> Result<bool, WaveformError> {
    let composed = compose_params(inner, outer)?.params;
    let lo = -inner.support_radius() - 1.0;
    let hi = inner.support_radius() + 1.0;
    let tol = 1e-9 * (1.0 + inner.height() * outer.beta);
    for i in 0..grid_points {
        let t = lo + (hi - lo) * i as f64 / (grid_points - 1) as f64;
        let two_step = waveform_eval(waveform_eval(t, inner), outer);
        let one_step = waveform_eval(t, &composed);
        if (two_step - one_step).abs() > tol {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Waveform parameter and precondition failures.
#[derive(Debug, thiserror::Error)]
pub enum WaveformError {
    #[error("invalid triangle parameter: {what}")]
    BadParameter { what: String },
    #[error(
        "composition precondition violated: inner peak {peak} must equal 2 * a * l = {required}"
    )]
    JunctionMismatch { peak: f64, required: f64 },
}
