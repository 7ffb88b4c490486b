//! Constructive synthesis of ReLU networks approximating Fourier targets.
//!
//! Each sampled frequency (xi, theta) yields a subnet that is an unbiased
//! estimator of cos(<xi, x> + theta) when averaged over its shift parameter
//! s ~ U[0,1]. Depth 1 realizes the estimator directly at frequency |xi|;
//! depth D >= 2 first compresses the input through a chain of D - 1 triangle
//! waveform layers so the estimator only needs frequency |xi|^(1/D), cutting
//! the unit count from O(|xi|) to O(|xi|^(1/D)). Averaging m such subnets
//! with coefficients C0/m gives the final network; best-of-M retries enforce
//! the unit budget.

use crate::fourier::{FourierMeasure, MeasureError};
use crate::piecewise::{from_network_1d, l2_loss_vs_target, PwlError};
use crate::relu_net::{dot, parallel_merge, LayerSpec, NetError, ReluNetwork};
use crate::sinusoid::{expectation_oracle, gamma_cos_eval, gamma_cos_layer};
use crate::waveform::{waveform_layer, TriangleParams, WaveformError};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use std::f64::consts::PI;

/// Frequencies below this are treated as zero: the subnet degenerates to the
/// constant cos(theta), exact on any bounded ball at this scale.
const MIN_FREQUENCY: f64 = 1e-9;

/// Everything `synthesize` needs besides the measure.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SynthesisConfig {
    /// Number of ReLU layers D in every subnet.
    pub depth: u32,
    /// Hard cap on total ReLU units in the returned network.
    pub budget: u64,
    /// Radius of the ball on which the approximation is measured.
    pub radius: f64,
    /// Smoothness index K of the target class; must be >= depth.
    pub smoothness: f64,
    /// Sample count override; None derives it from the budget.
    pub samples: Option<u64>,
    /// Number of independent draws to try before falling back.
    pub retries: u32,
    pub seed: u64,
    /// Monte Carlo draws per loss estimate when the domain is a ball in
    /// dimension > 1 (interval losses in dimension 1 are exact instead).
    #[serde(default = "default_mc_samples")]
    pub mc_samples: u64,
}

fn default_mc_samples() -> u64 {
    4096
}

impl SynthesisConfig {
    pub fn validate(&self) -> Result<(), SynthesisError> {
        if self.depth == 0 {
            return Err(SynthesisError::BadConfig { what: "depth must be at least 1".into() });
        }
        if self.budget < 2 {
            return Err(SynthesisError::BadConfig { what: "budget must be at least 2".into() });
        }
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(SynthesisError::BadConfig {
                what: format!("radius must be positive and finite, got {}", self.radius),
            });
        }
        if !(self.smoothness >= self.depth as f64) {
            return Err(SynthesisError::BadConfig {
                what: format!(
                    "smoothness must be at least the depth, got K={} < D={}",
                    self.smoothness, self.depth
                ),
            });
        }
        if self.samples == Some(0) {
            return Err(SynthesisError::BadConfig { what: "samples must be positive".into() });
        }
        if self.retries == 0 {
            return Err(SynthesisError::BadConfig { what: "retries must be positive".into() });
        }
        if self.mc_samples == 0 {
            return Err(SynthesisError::BadConfig {
                what: "mc_samples must be positive".into(),
            });
        }
        Ok(())
    }
}

/// Derived parameters of a depth-D cosine subnet for frequency magnitude
/// |xi|. The D - 1 waveform layers use triangle count `l_tri`, slope `gamma`
/// and the per-layer widths `alphas`; their composition equals a single
/// waveform with `k_big` tiles, peak height exactly (2n+1)pi/omega, feeding
/// the frequency-omega estimator layer.
#[derive(Debug, Clone, PartialEq)]
pub struct DeepParams {
    pub xi_norm: f64,
    pub radius: f64,
    pub depth: u32,
    pub omega: f64,
    pub n: u32,
    pub beta: f64,
    pub gamma: f64,
    pub l_tri: u32,
    /// Widths alpha_1 .. alpha_{D-1} of the waveform layers.
    pub alphas: Vec<f64>,
    /// Tile count of the composed waveform, 2^{D-2} l_tri^{D-1}.
    pub k_big: u128,
    /// How many times l_tri had to be bumped to satisfy coverage (0..=3).
    pub increments: u32,
}

impl DeepParams {
    /// Width of the composed waveform: each half-tile spans alpha.
    pub fn alpha_composed(&self) -> f64 {
        (2.0 * self.n as f64 + 1.0) * PI / self.xi_norm
    }

    /// Total ReLU units: D-1 waveform layers of 4 l_tri + 1 plus the
    /// estimator layer of 16 n + 16.
    pub fn unit_count(&self) -> u64 {
        (self.depth as u64 - 1) * (4 * self.l_tri as u64 + 1) + 16 * self.n as u64 + 16
    }

    /// Provable cap on `unit_count` as a function of (r |xi|)^{1/D}.
    pub fn unit_bound(&self) -> f64 {
        let d = self.depth as f64;
        (8.0 / PI + 2.0 * d - 2.0) * (self.radius * self.xi_norm).powf(1.0 / d) + 5.0 * d + 27.0
    }

    /// Relative defect of the junction identity alpha_i * gamma
    /// = 2 * alpha_{i+1} * l_tri at each waveform-to-waveform junction.
    /// All entries must be ~1e-16; anything larger means the layer chain no
    /// longer composes into a single waveform.
    pub fn junction_residuals(&self) -> Vec<f64> {
        self.alphas
            .windows(2)
            .map(|w| {
                let lhs = w[0] * self.gamma;
                let rhs = 2.0 * w[1] * self.l_tri as f64;
                (lhs - rhs).abs() / lhs.abs().max(1e-300)
            })
            .collect()
    }
}

/// Compute the waveform-chain parameters for a depth >= 2 subnet.
///
/// The coverage condition k_big >= ceil((r + pi/|xi|) / (2 alpha)) holds for
/// the base l_tri in every case we can construct, but ceilings interact, so
/// it is checked explicitly and l_tri is incremented (at most 3 times) if it
/// ever fails.
pub fn deep_cosine_params(
    xi_norm: f64,
    radius: f64,
    depth: u32,
) -> Result<DeepParams, SynthesisError> {
    if depth < 2 {
        return Err(SynthesisError::BadConfig {
            what: format!("waveform chain needs depth >= 2, got {depth}"),
        });
    }
    if !(xi_norm > 0.0 && xi_norm.is_finite()) {
        return Err(SynthesisError::BadConfig {
            what: format!("frequency magnitude must be positive, got {xi_norm}"),
        });
    }
    let d = depth as f64;
    let omega = xi_norm.powf(1.0 / d);
    let gamma = omega;
    let beta = xi_norm.powf(1.0 - 1.0 / d);
    let n_f = ((xi_norm * radius).powf(1.0 / d) / (2.0 * PI)).ceil();
    let n = n_f.max(1.0) as u32;
    let alpha = (2.0 * n as f64 + 1.0) * PI / xi_norm;
    let base_l = ((radius * xi_norm).powf(1.0 / d) / 2.0).ceil().max(1.0) as u32;

    let needed = ((radius + PI / xi_norm) / (2.0 * alpha)).ceil();
    let mut chosen = None;
    for inc in 0..=3u32 {
        let l = base_l + inc;
        let k_big = match 2u128.checked_pow(depth - 2).and_then(|p| {
            (0..depth - 1).try_fold(p, |acc, _| acc.checked_mul(l as u128))
        }) {
            Some(k) => k,
            None => {
                return Err(SynthesisError::BadConfig {
                    what: format!("tile count overflows at depth {depth}, l_tri {l}"),
                })
            }
        };
        if k_big as f64 >= needed {
            chosen = Some((l, k_big, inc));
            break;
        }
    }
    let (l_tri, k_big, increments) = chosen.ok_or(SynthesisError::CoverageUnsatisfiable {
        xi_norm,
        radius,
        depth,
        needed,
    })?;

    // alpha_1 = (2 l)^{D-2} (2n+1) pi / |xi|; subsequent widths shrink by
    // gamma / (2 l) so that each junction satisfies alpha_i gamma
    // = 2 alpha_{i+1} l exactly (the waveform composition precondition).
    let alpha_1 = (2.0 * l_tri as f64).powi(depth as i32 - 2) * alpha;
    let mut alphas = Vec::with_capacity(depth as usize - 1);
    let mut a = alpha_1;
    for _ in 0..depth - 1 {
        alphas.push(a);
        a = a * gamma / (2.0 * l_tri as f64);
    }

    Ok(DeepParams {
        xi_norm,
        radius,
        depth,
        omega,
        n,
        beta,
        gamma,
        l_tri,
        alphas,
        k_big,
        increments,
    })
}

fn l2_norm(xs: &[f64]) -> f64 {
    xs.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// A constant network: two always-active units whose difference is 1, padded
/// with identity layers so it can be merged with depth-D subnets. Valid on
/// any region where the first coordinate exceeds -(radius + 1).
pub fn constant_net(dim: usize, value: f64, radius: f64, depth: u32) -> ReluNetwork {
    let mut row = vec![0.0; dim];
    row[0] = 1.0;
    let first = LayerSpec::new(
        vec![row.clone(), row],
        vec![-(radius + 2.0), -(radius + 1.0)],
    )
    .expect("constant first layer is well formed");
    if depth == 1 {
        return ReluNetwork::new(dim, vec![first], vec![value, -value])
            .expect("constant net is well formed");
    }
    let mut layers = vec![first];
    layers.push(LayerSpec::new(vec![vec![1.0, -1.0]], vec![0.0]).expect("well formed"));
    for _ in 2..depth {
        layers.push(LayerSpec::new(vec![vec![1.0]], vec![0.0]).expect("well formed"));
    }
    ReluNetwork::new(dim, layers, vec![value]).expect("constant net is well formed")
}

/// All-zero single-unit network, the fallback when no attempt fits the
/// budget.
pub fn zero_net(dim: usize) -> ReluNetwork {
    ReluNetwork::new(
        dim,
        vec![LayerSpec::new(vec![vec![0.0; dim]], vec![0.0]).expect("well formed")],
        vec![0.0],
    )
    .expect("zero net is well formed")
}

/// Depth-1 subnet estimating cos(<xi, x> + theta) on the ball of the given
/// radius: the frequency-|xi| estimator layer applied to the scalar
/// projection u = <xi, x>/|xi| + theta/|xi|. Exactly 16n + 16 units with
/// n = ceil(|xi| r / 2 pi); a zero frequency yields the 2-unit constant.
pub fn shallow_cosine_net(
    xi: &[f64],
    theta: f64,
    s: f64,
    radius: f64,
) -> Result<ReluNetwork, SynthesisError> {
    let norm = l2_norm(xi);
    if norm <= MIN_FREQUENCY {
        return Ok(constant_net(xi.len(), theta.cos(), radius, 1));
    }
    check_shift(s)?;
    let n = ((norm * radius / (2.0 * PI)).ceil()).max(1.0) as u32;
    let dir: Vec<f64> = xi.iter().map(|v| v / norm).collect();
    let shift = theta / norm;
    let (proto, readout) = gamma_cos_layer(s, norm, n);
    let thresholds: Vec<f64> = proto.thresholds.iter().map(|t| t - shift).collect();
    let layer = LayerSpec::new(vec![dir; proto.n_units()], thresholds)?;
    Ok(ReluNetwork::new(xi.len(), vec![layer], readout)?)
}

/// Depth-D subnet (D >= 2) estimating cos(<xi, x> + theta): D - 1 triangle
/// waveform layers fold the projection down to a low-frequency scalar, then
/// the frequency-|xi|^{1/D} estimator layer finishes. Requires xi != 0.
pub fn deep_cosine_net(
    xi: &[f64],
    theta: f64,
    s: f64,
    radius: f64,
    depth: u32,
) -> Result<ReluNetwork, SynthesisError> {
    let norm = l2_norm(xi);
    if norm <= MIN_FREQUENCY {
        return Err(SynthesisError::BadConfig {
            what: "deep cosine subnet requires a nonzero frequency".into(),
        });
    }
    check_shift(s)?;
    let params = deep_cosine_params(norm, radius, depth)?;
    build_deep_net(xi, theta, s, &params)
}

fn check_shift(s: f64) -> Result<(), SynthesisError> {
    if (0.0..=1.0).contains(&s) {
        Ok(())
    } else {
        Err(SynthesisError::BadConfig { what: format!("shift s must lie in [0,1], got {s}") })
    }
}

fn build_deep_net(
    xi: &[f64],
    theta: f64,
    s: f64,
    params: &DeepParams,
) -> Result<ReluNetwork, SynthesisError> {
    let norm = params.xi_norm;
    let dir: Vec<f64> = xi.iter().map(|v| v / norm).collect();
    let shift = theta / norm;

    let mut layers = Vec::with_capacity(params.depth as usize);
    let mut prev_readout: Vec<f64> = Vec::new();
    for (i, &alpha_i) in params.alphas.iter().enumerate() {
        let tri = TriangleParams::new(alpha_i, params.gamma, params.l_tri)?;
        let (proto, readout) = waveform_layer(&tri);
        let layer = if i == 0 {
            // Scalar input u = <x, dir> + shift, absorbed into thresholds.
            let thresholds: Vec<f64> = proto.thresholds.iter().map(|t| t - shift).collect();
            LayerSpec::new(vec![dir.clone(); proto.n_units()], thresholds)?
        } else {
            // Fold the previous readout into every weight row.
            LayerSpec::new(vec![prev_readout.clone(); proto.n_units()], proto.thresholds)?
        };
        layers.push(layer);
        prev_readout = readout;
    }
    let (gproto, greadout) = gamma_cos_layer(s, params.omega, params.n);
    let glayer = LayerSpec::new(vec![prev_readout; gproto.n_units()], gproto.thresholds)?;
    layers.push(glayer);
    let net = ReluNetwork::new(xi.len(), layers, greadout)?;

    #[cfg(debug_assertions)]
    check_chain_against_composed(&net, theta, s, params, &dir);

    Ok(net)
}

/// Test-build check: along the driving direction the full network must agree
/// with the composed waveform fed into the scalar estimator.
#[cfg(debug_assertions)]
fn check_chain_against_composed(
    net: &ReluNetwork,
    theta: f64,
    s: f64,
    params: &DeepParams,
    dir: &[f64],
) {
    if params.k_big > u32::MAX as u128 {
        return; // composed waveform not representable; chain still valid
    }
    let composed = TriangleParams::new(
        params.alpha_composed(),
        params.beta,
        params.k_big as u32,
    )
    .expect("composed parameters are valid");
    let shift = theta / params.xi_norm;
    let edge = params.radius + PI / params.xi_norm;
    for i in 0..64 {
        let u = -edge + 2.0 * edge * i as f64 / 63.0;
        let x: Vec<f64> = dir.iter().map(|v| v * (u - shift)).collect();
        let via_net = net.evaluate(&x).expect("dimensions agree");
        let v = crate::waveform::waveform_eval(u, &composed);
        let direct = gamma_cos_eval(v, s, params.omega, params.n);
        debug_assert!(
            (via_net - direct).abs() <= 1e-8 * (1.0 + direct.abs()),
            "waveform chain does not compose: u={u}, net {via_net}, composed {direct}"
        );
    }
}

/// How a subnet realizes its target, kept alongside the weights so the
/// s-average can be computed exactly without rebuilding networks.
#[derive(Debug, Clone)]
enum SubnetKind {
    Constant { value: f64 },
    Oscillatory { omega: f64, n: u32, s: f64, xi_unit: Vec<f64>, shift: f64, prefix_readout: Option<Vec<f64>> },
}

/// One sampled-frequency subnet plus the bookkeeping for exact expectation
/// queries.
#[derive(Debug, Clone)]
pub struct CosineSubnet {
    pub network: ReluNetwork,
    kind: SubnetKind,
}

impl CosineSubnet {
    /// Build the depth-appropriate subnet for one draw (xi, theta, s).
    pub fn build(
        xi: &[f64],
        theta: f64,
        s: f64,
        radius: f64,
        depth: u32,
    ) -> Result<Self, SynthesisError> {
        let norm = l2_norm(xi);
        if norm <= MIN_FREQUENCY {
            let value = theta.cos();
            return Ok(Self {
                network: constant_net(xi.len(), value, radius, depth),
                kind: SubnetKind::Constant { value },
            });
        }
        if depth == 1 {
            let network = shallow_cosine_net(xi, theta, s, radius)?;
            let n = ((norm * radius / (2.0 * PI)).ceil()).max(1.0) as u32;
            Ok(Self {
                network,
                kind: SubnetKind::Oscillatory {
                    omega: norm,
                    n,
                    s,
                    xi_unit: xi.iter().map(|v| v / norm).collect(),
                    shift: theta / norm,
                    prefix_readout: None,
                },
            })
        } else {
            let params = deep_cosine_params(norm, radius, depth)?;
            let network = build_deep_net(xi, theta, s, &params)?;
            // The estimator layer folded the last waveform readout into its
            // rows; every row is that readout, so keep one copy for the
            // scalar fast path.
            let last = network.layers.last().expect("deep net has layers");
            let prefix_readout = last.weights[0].clone();
            Ok(Self {
                network,
                kind: SubnetKind::Oscillatory {
                    omega: params.omega,
                    n: params.n,
                    s,
                    xi_unit: xi.iter().map(|v| v / norm).collect(),
                    shift: theta / norm,
                    prefix_readout: Some(prefix_readout),
                },
            })
        }
    }

    /// Scalar value entering the estimator layer at input x, computed through
    /// the actual stored layers (not an idealized formula).
    pub fn gamma_input(&self, x: &[f64]) -> Option<f64> {
        match &self.kind {
            SubnetKind::Constant { .. } => None,
            SubnetKind::Oscillatory { xi_unit, shift, prefix_readout, .. } => {
                match prefix_readout {
                    None => Some(dot(xi_unit, x) + shift),
                    Some(readout) => {
                        let mut h: Vec<f64> = x.to_vec();
                        let prefix_len = self.network.layers.len() - 1;
                        for layer in &self.network.layers[..prefix_len] {
                            h = layer.apply(&h);
                        }
                        Some(dot(readout, &h))
                    }
                }
            }
        }
    }

    /// Exact average over the shift s ~ U[0,1] of this subnet's output at x.
    /// For oscillatory subnets the prefix layers do not depend on s, so the
    /// average reduces to the scalar estimator's expectation at the prefix
    /// output; piecewise quadrature makes that exact to ~1e-13.
    pub fn s_expectation(&self, x: &[f64]) -> f64 {
        match &self.kind {
            SubnetKind::Constant { value } => *value,
            SubnetKind::Oscillatory { omega, n, .. } => {
                let v = self.gamma_input(x).expect("oscillatory subnet has a prefix");
                expectation_oracle(v, *omega, *n)
            }
        }
    }

    /// Evaluate the stored network and the scalar fast path at the subnet's
    /// own shift; the pair must agree to float precision. Used to pin the
    /// fast path to the actual weights.
    pub fn self_consistency(&self, x: &[f64]) -> (f64, f64) {
        let full = self.network.evaluate(x).expect("dimensions agree");
        let fast = match &self.kind {
            SubnetKind::Constant { value } => *value,
            SubnetKind::Oscillatory { omega, n, s, .. } => {
                let v = self.gamma_input(x).expect("oscillatory subnet has a prefix");
                gamma_cos_eval(v, *s, *omega, *n)
            }
        };
        (full, fast)
    }
}

/// Sample schedule derived from the budget: the bracketed constant D0 bounds
/// the expected units-per-subnet measure, so m = floor(N0^{D/K} / D0) keeps
/// the expected total within budget at the theorem's rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleSchedule {
    pub m: u64,
    pub d0: f64,
    /// True when the budget is so small that even one subnet is unlikely to
    /// fit and the zero-network fallback should be expected.
    pub fallback_likely: bool,
}

/// The bracketed constant D0 = (8/pi + 2D - 2)^{D/K} r^{1/K} C^{1/K}/C^0
/// + (5D + 27)^{D/K}; at D = 1 this is the shallow bracket
/// (8r/pi)^{1/K} C^{1/K}/C^0 + 32^{1/K}.
pub fn sample_bracket(measure: &FourierMeasure, depth: u32, smoothness: f64, radius: f64) -> f64 {
    let d = depth as f64;
    let dk = d / smoothness;
    let c0 = measure.c0();
    let c_1k = measure.c_alpha(1.0 / smoothness);
    (8.0 / PI + 2.0 * d - 2.0).powf(dk) * radius.powf(1.0 / smoothness) * c_1k / c0
        + (5.0 * d + 27.0).powf(dk)
}

pub fn choose_sample_count(measure: &FourierMeasure, config: &SynthesisConfig) -> SampleSchedule {
    let d0 = sample_bracket(measure, config.depth, config.smoothness, config.radius);
    let lever = (config.budget as f64).powf(config.depth as f64 / config.smoothness);
    let m = ((lever / d0).floor() as u64).max(1);
    SampleSchedule { m, d0, fallback_likely: lever < d0 }
}

/// The proof's final display bound on the expected squared loss:
/// 3 pi^4 (2D+1)^{D/K} / (4 N0^{D/K}) r^{1/K} C^{1/K} C^0
/// + 3 pi^4 (5D+27)^{D/K} / (4 N0^{D/K}) (C^0)^2.
pub fn display_bound(
    measure: &FourierMeasure,
    depth: u32,
    smoothness: f64,
    budget: u64,
    radius: f64,
) -> f64 {
    let dk = depth as f64 / smoothness;
    let c0 = measure.c0();
    let c_1k = measure.c_alpha(1.0 / smoothness);
    let lever = (budget as f64).powf(dk);
    let front = 3.0 * PI.powi(4) / 4.0;
    front * (2.0 * depth as f64 + 1.0).powf(dk) / lever
        * radius.powf(1.0 / smoothness)
        * c_1k
        * c0
        + front * (5.0 * depth as f64 + 27.0).powf(dk) / lever * c0 * c0
}

/// Single-constant form of the same bound:
/// A0 (D/N0)^{D/K} (r^{1/K} C^{1/K} C^0 + (C^0)^2) with
/// A0 = (3 pi^4 / 4) max((2D+1)^{D/K}, (5D+27)^{D/K}).
pub fn simplified_bound(
    measure: &FourierMeasure,
    depth: u32,
    smoothness: f64,
    budget: u64,
    radius: f64,
) -> f64 {
    let d = depth as f64;
    let dk = d / smoothness;
    let a0 = 3.0 * PI.powi(4) / 4.0 * (2.0 * d + 1.0).powf(dk).max((5.0 * d + 27.0).powf(dk));
    let c0 = measure.c0();
    let c_1k = measure.c_alpha(1.0 / smoothness);
    a0 * (d / budget as f64).powf(dk)
        * (radius.powf(1.0 / smoothness) * c_1k * c0 + c0 * c0)
}

/// Where and how to measure the squared approximation error.
#[derive(Debug, Clone, PartialEq)]
pub enum MuSpec {
    /// Uniform on [-radius, radius]; exact via the piecewise-linear form.
    Interval { radius: f64 },
    /// Uniform on the ball of the given radius; Monte Carlo.
    Ball { radius: f64, samples: u64, seed: u64 },
    /// Empirical measure on explicit points.
    Points(Vec<Vec<f64>>),
}

/// A measured loss; `std_error` is present for Monte Carlo estimates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossEstimate {
    pub value: f64,
    pub std_error: Option<f64>,
}

/// Mean squared error of the network against the measure's target function.
pub fn measure_loss(
    net: &ReluNetwork,
    measure: &FourierMeasure,
    spec: &MuSpec,
) -> Result<LossEstimate, SynthesisError> {
    match spec {
        MuSpec::Interval { radius } => {
            if measure.dim() != 1 || net.input_dim != 1 {
                return Err(SynthesisError::BadConfig {
                    what: "interval loss requires a scalar measure and network".into(),
                });
            }
            let pwl = from_network_1d(net)?;
            let min_period = measure
                .max_frequency()
                .filter(|&f| f > 0.0)
                .map(|f| 2.0 * PI / f);
            let value = l2_loss_vs_target(
                &pwl,
                |x| measure.target_eval(&[x]).expect("dimension 1"),
                min_period,
                *radius,
            )?;
            Ok(LossEstimate { value, std_error: None })
        }
        MuSpec::Ball { radius, samples, seed } => {
            if *samples == 0 {
                return Err(SynthesisError::BadConfig { what: "MC loss needs samples > 0".into() });
            }
            let d = measure.dim();
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let mut sum = 0.0;
            let mut sum_sq = 0.0;
            for _ in 0..*samples {
                let x = sample_ball(&mut rng, d, *radius);
                let err = measure.target_eval(&x)? - net.evaluate(&x)?;
                let sq = err * err;
                sum += sq;
                sum_sq += sq * sq;
            }
            let nf = *samples as f64;
            let mean = sum / nf;
            let var = (sum_sq / nf - mean * mean).max(0.0);
            Ok(LossEstimate { value: mean, std_error: Some((var / nf).sqrt()) })
        }
        MuSpec::Points(points) => {
            if points.is_empty() {
                return Err(SynthesisError::BadConfig { what: "empirical loss needs points".into() });
            }
            let mut sum = 0.0;
            for x in points {
                let err = measure.target_eval(x)? - net.evaluate(x)?;
                sum += err * err;
            }
            Ok(LossEstimate { value: sum / points.len() as f64, std_error: None })
        }
    }
}

fn sample_ball<R: Rng + ?Sized>(rng: &mut R, dim: usize, radius: f64) -> Vec<f64> {
    loop {
        let dir: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
        let norm = l2_norm(&dir);
        if norm > 1e-12 {
            let r = radius * rng.gen::<f64>().powf(1.0 / dim as f64);
            return dir.iter().map(|v| v * r / norm).collect();
        }
    }
}

/// Outcome of one synthesis attempt.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct AttemptRecord {
    pub attempt: u32,
    pub unit_count: u64,
    pub accepted: bool,
    pub loss: Option<f64>,
}

/// Everything `synthesize` decided and measured.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct SynthesisReport {
    pub seed: u64,
    pub depth: u32,
    pub smoothness: f64,
    pub budget: u64,
    pub radius: f64,
    pub samples: u64,
    pub d0: f64,
    pub fallback_likely: bool,
    pub attempts: Vec<AttemptRecord>,
    pub chosen_attempt: Option<u32>,
    pub unit_count: u64,
    pub loss: f64,
    pub loss_std_error: Option<f64>,
    pub bound_display: f64,
    pub bound_simplified: f64,
    pub fallback: bool,
}

/// Mix function for deriving independent sub-seeds; one round of the
/// splitmix64 output permutation.
pub(crate) fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E3779B97F4A7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D049BB133111EB);
    x ^ (x >> 31)
}

/// Build the estimator network: best of `retries` attempts, each drawing m
/// iid (xi, theta, s) triples, building depth-D subnets and averaging them
/// with coefficients C^0/m. Attempts exceeding the unit budget are rejected;
/// the accepted attempt with the smallest measured loss wins; if none fit,
/// the zero network is returned (fallback flag set).
pub fn synthesize(
    measure: &FourierMeasure,
    config: &SynthesisConfig,
) -> Result<(ReluNetwork, SynthesisReport), SynthesisError> {
    config.validate()?;
    let schedule = choose_sample_count(measure, config);
    let m = config.samples.unwrap_or(schedule.m);
    let c0 = measure.c0();
    let coeff = c0 / m as f64;

    let mut attempts = Vec::with_capacity(config.retries as usize);
    let mut best: Option<(ReluNetwork, LossEstimate, u32, u64)> = None;
    for attempt in 0..config.retries {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(attempt as u64 + 1);
        let mut subnets = Vec::with_capacity(m as usize);
        for _ in 0..m {
            let (xi, theta) = measure.sample_xi(&mut rng);
            let s = rng.gen::<f64>();
            subnets.push(CosineSubnet::build(&xi, theta, s, config.radius, config.depth)?);
        }
        let nets: Vec<ReluNetwork> = subnets.into_iter().map(|s| s.network).collect();
        let merged = parallel_merge(&nets, &vec![coeff; nets.len()])?;
        let units = merged.unit_count() as u64;
        if units > config.budget {
            attempts.push(AttemptRecord { attempt, unit_count: units, accepted: false, loss: None });
            continue;
        }
        let loss = measure_loss(&merged, measure, &loss_spec(measure, config, attempt))?;
        attempts.push(AttemptRecord {
            attempt,
            unit_count: units,
            accepted: true,
            loss: Some(loss.value),
        });
        let better = match &best {
            None => true,
            Some((_, cur, _, _)) => loss.value < cur.value,
        };
        if better {
            best = Some((merged, loss, attempt, units));
        }
    }

    let bound_display = display_bound(measure, config.depth, config.smoothness, config.budget, config.radius);
    let bound_simplified =
        simplified_bound(measure, config.depth, config.smoothness, config.budget, config.radius);
    let (net, loss, chosen, units, fallback) = match best {
        Some((net, loss, attempt, units)) => (net, loss, Some(attempt), units, false),
        None => {
            let net = zero_net(measure.dim());
            let loss = measure_loss(&net, measure, &loss_spec(measure, config, config.retries))?;
            let units = net.unit_count() as u64;
            (net, loss, None, units, true)
        }
    };
    let report = SynthesisReport {
        seed: config.seed,
        depth: config.depth,
        smoothness: config.smoothness,
        budget: config.budget,
        radius: config.radius,
        samples: m,
        d0: schedule.d0,
        fallback_likely: schedule.fallback_likely,
        attempts,
        chosen_attempt: chosen,
        unit_count: units,
        loss: loss.value,
        loss_std_error: loss.std_error,
        bound_display,
        bound_simplified,
        fallback,
    };
    Ok((net, report))
}

/// Loss measurement spec used during attempt selection: exact on the line,
/// seeded Monte Carlo on higher-dimensional balls.
fn loss_spec(measure: &FourierMeasure, config: &SynthesisConfig, attempt: u32) -> MuSpec {
    if measure.dim() == 1 {
        MuSpec::Interval { radius: config.radius }
    } else {
        MuSpec::Ball {
            radius: config.radius,
            samples: config.mc_samples,
            seed: splitmix64(config.seed ^ (attempt as u64).wrapping_mul(0xA5A5_5A5A_0F0F_F0F0)),
        }
    }
}

/// Synthesis failures.
#[derive(Debug, thiserror::Error)]
pub enum SynthesisError {
    #[error("invalid synthesis configuration: {what}")]
    BadConfig { what: String },
    #[error(
        "waveform coverage unsatisfiable for |xi|={xi_norm}, r={radius}, depth {depth}: needs {needed} tiles"
    )]
    CoverageUnsatisfiable { xi_norm: f64, radius: f64, depth: u32, needed: f64 },
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    Waveform(#[from] WaveformError),
    #[error(transparent)]
    Pwl(#[from] PwlError),
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::FourierAtom;
    use crate::quadrature::integrate_piecewise;
    use crate::sinusoid::s_breakpoints;

    fn s_quadrature_of_subnet(subnet: &CosineSubnet, x: &[f64]) -> f64 {
        // Integrate the actual network family over s by splitting at the
        // kinks of s -> output and using the scalar fast path per node.
        match subnet.gamma_input(x) {
            None => subnet.s_expectation(x),
            Some(v) => {
                let (omega, n) = match &subnet.kind {
                    SubnetKind::Oscillatory { omega, n, .. } => (*omega, *n),
                    SubnetKind::Constant { .. } => unreachable!(),
                };
                let kinks = s_breakpoints(v, omega, n);
                integrate_piecewise(|s| gamma_cos_eval(v, s, omega, n), 0.0, 1.0, &kinks)
            }
        }
    }

    #[test]
    fn constant_nets_are_constant_and_depth_padded() {
        for depth in 1..=4u32 {
            let net = constant_net(3, 0.75, 1.0, depth);
            assert_eq!(net.depth(), depth as usize);
            assert_eq!(net.unit_count() as u32, depth + 1);
            for x in [[0.0, 0.0, 0.0], [1.0, -1.0, 0.5], [-0.9, 0.3, 0.2]] {
                assert!((net.evaluate(&x).unwrap() - 0.75).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn shallow_zero_frequency_is_constant_one() {
        let net = shallow_cosine_net(&[0.0], 0.0, 0.3, 2.0).unwrap();
        assert_eq!(net.unit_count(), 2);
        for i in 0..=20 {
            let x = -2.0 + 4.0 * i as f64 / 20.0;
            assert!((net.evaluate(&[x]).unwrap() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn shallow_unbiased_for_cos_5x() {
        // |xi| = 5, r = 1: n = 1, so 32 units.
        let subnet = CosineSubnet::build(&[5.0], 0.0, 0.4, 1.0, 1).unwrap();
        assert_eq!(subnet.network.unit_count(), 32);
        for i in 0..=100 {
            let x = -1.0 + 2.0 * i as f64 / 100.0;
            let got = s_quadrature_of_subnet(&subnet, &[x]);
            assert!(
                (got - (5.0 * x).cos()).abs() < 1e-8,
                "unbiasedness fails at x={x}: {got}"
            );
            let (full, fast) = subnet.self_consistency(&[x]);
            assert!((full - fast).abs() < 1e-9, "fast path mismatch at x={x}");
        }
    }

    #[test]
    fn shallow_unbiased_in_three_dimensions() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let raw: Vec<f64> = (0..3).map(|_| StandardNormal.sample(&mut rng)).collect();
        let norm = l2_norm(&raw);
        let xi: Vec<f64> = raw.iter().map(|v| 9.0 * v / norm).collect();
        let theta = PI / 3.0;
        let subnet = CosineSubnet::build(&xi, theta, 0.7, 1.0, 1).unwrap();
        for _ in 0..50 {
            let x = sample_ball(&mut rng, 3, 1.0);
            let want = (dot(&xi, &x) + theta).cos();
            let got = s_quadrature_of_subnet(&subnet, &x);
            assert!((got - want).abs() < 1e-8, "3d unbiasedness fails: {got} vs {want}");
        }
    }

    #[test]
    fn deep_unbiased_for_cos_100x() {
        let subnet = CosineSubnet::build(&[100.0], 0.0, 0.25, 1.0, 2).unwrap();
        for i in 0..=200 {
            let x = -1.0 + 2.0 * i as f64 / 200.0;
            let got = s_quadrature_of_subnet(&subnet, &[x]);
            assert!(
                (got - (100.0 * x).cos()).abs() < 1e-7,
                "depth-2 unbiasedness fails at x={x}: {got}"
            );
        }
        // Fast path tied to the real network at its own shift.
        for x in [-0.99, -0.5, 0.0, 0.31, 0.87] {
            let (full, fast) = subnet.self_consistency(&[x]);
            assert!((full - fast).abs() < 1e-9);
        }
    }

    #[test]
    fn deep_unbiased_for_cos_1000x_depth_3() {
        let subnet = CosineSubnet::build(&[1000.0], 0.0, 0.6, 1.0, 3).unwrap();
        for i in 0..=150 {
            let x = -1.0 + 2.0 * i as f64 / 150.0;
            let got = s_quadrature_of_subnet(&subnet, &[x]);
            assert!(
                (got - (1000.0 * x).cos()).abs() < 1e-7,
                "depth-3 unbiasedness fails at x={x}: {got}"
            );
        }
    }

    #[test]
    fn deep_params_satisfy_junctions_and_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let norm = 10f64.powf(rng.gen::<f64>() * 4.0);
            let depth = rng.gen_range(2..=4u32);
            let radius = 0.5 + rng.gen::<f64>() * 2.0;
            let p = deep_cosine_params(norm, radius, depth).unwrap();
            for res in p.junction_residuals() {
                assert!(res < 1e-12, "junction violated: {res} at norm={norm}, depth={depth}");
            }
            assert!(
                (p.unit_count() as f64) <= p.unit_bound(),
                "unit bound violated at norm={norm}, depth={depth}: {} > {}",
                p.unit_count(),
                p.unit_bound()
            );
            assert_eq!(p.increments, 0, "coverage needed increments at norm={norm}");
            // Chain peak equals the estimator window edge exactly.
            let peak = p.alpha_composed() * p.beta;
            let window = (2.0 * p.n as f64 + 1.0) * PI / p.omega;
            assert!((peak - window).abs() <= 1e-9 * window);
        }
    }

    #[test]
    fn depth_two_alpha_chain_starts_at_composed_width() {
        let p = deep_cosine_params(150.0, 1.0, 2).unwrap();
        assert_eq!(p.alphas.len(), 1);
        assert!((p.alphas[0] - p.alpha_composed()).abs() < 1e-15 * p.alphas[0]);
    }

    #[test]
    fn perturbed_alpha_chain_is_detected() {
        let mut p = deep_cosine_params(500.0, 1.0, 3).unwrap();
        p.alphas[1] *= 1.0 + 1e-6;
        let residuals = p.junction_residuals();
        assert!(residuals.iter().any(|&r| r > 1e-7), "perturbation went undetected");
    }

    #[test]
    fn deep_saves_units_at_high_frequency() {
        let shallow = CosineSubnet::build(&[1e4], 0.0, 0.5, 1.0, 1).unwrap();
        let deep = CosineSubnet::build(&[1e4], 0.0, 0.5, 1.0, 2).unwrap();
        let ratio = deep.network.unit_count() as f64 / shallow.network.unit_count() as f64;
        assert!(ratio < 0.1, "expected large savings, got ratio {ratio}");
    }

    #[test]
    fn sample_count_matches_hand_formula() {
        let (mu, _) = FourierMeasure::hard_instance(2, 1.0, 16).unwrap();
        let config = SynthesisConfig {
            depth: 2,
            budget: 4000,
            radius: 1.0,
            smoothness: 2.0,
            samples: None,
            retries: 8,
            seed: 1,
            mc_samples: 4096,
        };
        let schedule = choose_sample_count(&mu, &config);
        // Re-derive: D0 = (8/pi + 2)^1 r C^{1/2}/C^0 + 37^1; m = floor(N0 / D0).
        let c0 = mu.c0();
        let c_half = mu.c_alpha(0.5);
        let d0 = (8.0 / PI + 2.0) * c_half / c0 + 37.0;
        assert!((schedule.d0 - d0).abs() < 1e-12 * d0);
        assert_eq!(schedule.m, (4000.0 / d0).floor() as u64);
        assert!(!schedule.fallback_likely);

        // Tiny budget: m clamps to 1 and the fallback flag raises.
        let tiny = SynthesisConfig { budget: 2, ..config.clone() };
        let s2 = choose_sample_count(&mu, &tiny);
        assert_eq!(s2.m, 1);
        assert!(s2.fallback_likely);

        // Doubling the budget scales m by 2^{D/K} up to rounding.
        let doubled = SynthesisConfig { budget: 8000, ..config };
        let s3 = choose_sample_count(&mu, &doubled);
        assert_eq!(s3.m, (8000f64.powf(1.0) / d0).floor() as u64);
        assert!(s3.m >= schedule.m);
    }

    #[test]
    fn synthesize_constant_target_is_exact() {
        let mu = FourierMeasure::from_atoms(
            1,
            vec![FourierAtom::new(vec![0.0], 0.8, 0.0).unwrap()],
        )
        .unwrap();
        let config = SynthesisConfig {
            depth: 1,
            budget: 64,
            radius: 1.0,
            smoothness: 1.0,
            samples: None,
            retries: 2,
            seed: 11,
            mc_samples: 4096,
        };
        let (net, report) = synthesize(&mu, &config).unwrap();
        assert!(!report.fallback);
        assert!(report.loss < 1e-12, "constant target loss {}", report.loss);
        for x in [-1.0, -0.2, 0.5, 1.0] {
            assert!((net.evaluate(&[x]).unwrap() - 0.8).abs() < 1e-12);
        }
    }

    #[test]
    fn synthesize_tiny_budget_falls_back_to_zero_net() {
        let (mu, info) = FourierMeasure::hard_instance(2, 1.0, 8).unwrap();
        let config = SynthesisConfig {
            depth: 1,
            budget: 2,
            radius: 1.0,
            smoothness: 2.0,
            samples: None,
            retries: 4,
            seed: 3,
            mc_samples: 4096,
        };
        let (net, report) = synthesize(&mu, &config).unwrap();
        // All attempts draw subnets of at least 2 units merged with overhead;
        // the constant-only attempt has exactly 2 units and is accepted, so
        // fallback need not trigger; but when it does the loss is pinned.
        let omega = info.omega();
        let zero_loss = 3.0 / (8.0 * omega.powf(2.0 * info.alpha()));
        if report.fallback {
            assert_eq!(net.unit_count(), 1);
            assert!((report.loss - zero_loss).abs() < 1e-9 * zero_loss);
        }
        assert!(report.loss <= 1.5 * mu.c0() * mu.c0() + 1e-12);
        assert!(report.unit_count <= config.budget || report.fallback);
    }

    #[test]
    fn zero_net_loss_matches_closed_form_on_hard_instance() {
        let (mu, info) = FourierMeasure::hard_instance(2, 1.0, 8).unwrap();
        let net = zero_net(1);
        let loss = measure_loss(&net, &mu, &MuSpec::Interval { radius: 1.0 }).unwrap();
        // (1/2r) int (w/2)^2 (1 + cos(omega x))^2 dx = 3 w^2 / 8 exactly,
        // because omega = 2 pi L makes the cross terms vanish on [-1, 1].
        let want = 3.0 / (8.0 * info.omega().powf(2.0 * info.alpha()));
        assert!(
            ((loss.value - want) / want).abs() < 1e-9,
            "zero-net loss {} vs closed form {want}",
            loss.value
        );
    }

    #[test]
    fn budget_is_never_exceeded() {
        let (mu, _) = FourierMeasure::hard_instance(1, 1.0, 4).unwrap();
        for seed in 0..8u64 {
            for budget in [2u64, 16, 64, 256] {
                let config = SynthesisConfig {
                    depth: 1,
                    budget,
                    radius: 1.0,
                    smoothness: 1.0,
                    samples: None,
                    retries: 3,
                    seed,
                    mc_samples: 4096,
                };
                let (net, report) = synthesize(&mu, &config).unwrap();
                if !report.fallback {
                    assert!(net.unit_count() as u64 <= budget);
                }
            }
        }
    }

    #[test]
    fn synthesis_is_deterministic() {
        let (mu, _) = FourierMeasure::hard_instance(2, 1.0, 8).unwrap();
        let config = SynthesisConfig {
            depth: 2,
            budget: 512,
            radius: 1.0,
            smoothness: 2.0,
            samples: None,
            retries: 4,
            seed: 99,
            mc_samples: 4096,
        };
        let (net_a, rep_a) = synthesize(&mu, &config).unwrap();
        let (net_b, rep_b) = synthesize(&mu, &config).unwrap();
        assert_eq!(net_a.to_json(), net_b.to_json(), "network bytes differ across runs");
        assert_eq!(rep_a.loss.to_bits(), rep_b.loss.to_bits());
    }

    #[test]
    fn mc_loss_self_consistent_across_seeds() {
        let mu = FourierMeasure::gaussian(2).unwrap();
        let net = constant_net(2, 0.5, 1.0, 1);
        let a = measure_loss(&net, &mu, &MuSpec::Ball { radius: 1.0, samples: 20_000, seed: 1 })
            .unwrap();
        let b = measure_loss(&net, &mu, &MuSpec::Ball { radius: 1.0, samples: 20_000, seed: 2 })
            .unwrap();
        let combined = (a.std_error.unwrap().powi(2) + b.std_error.unwrap().powi(2)).sqrt();
        assert!(
            (a.value - b.value).abs() <= 6.0 * combined,
            "MC losses disagree: {} vs {} (se {combined})",
            a.value,
            b.value
        );
    }

    #[test]
    fn empirical_points_loss() {
        let mu = FourierMeasure::from_atoms(
            1,
            vec![FourierAtom::new(vec![1.0], 1.0, 0.0).unwrap()],
        )
        .unwrap();
        let net = zero_net(1);
        let pts = vec![vec![0.0], vec![PI / 2.0]];
        let loss = measure_loss(&net, &mu, &MuSpec::Points(pts)).unwrap();
        // Targets are cos(0) = 1 and cos(pi/2) = 0: mean square = 1/2.
        assert!((loss.value - 0.5).abs() < 1e-12);
    }

    #[test]
    fn config_validation_rejects_bad_fields() {
        let ok = SynthesisConfig {
            depth: 2,
            budget: 100,
            radius: 1.0,
            smoothness: 2.0,
            samples: None,
            retries: 8,
            seed: 0,
            mc_samples: 4096,
        };
        assert!(ok.validate().is_ok());
        assert!(SynthesisConfig { depth: 0, ..ok.clone() }.validate().is_err());
        assert!(SynthesisConfig { budget: 1, ..ok.clone() }.validate().is_err());
        assert!(SynthesisConfig { radius: -1.0, ..ok.clone() }.validate().is_err());
        assert!(SynthesisConfig { smoothness: 1.5, ..ok.clone() }.validate().is_err());
        assert!(SynthesisConfig { samples: Some(0), ..ok.clone() }.validate().is_err());
        assert!(SynthesisConfig { retries: 0, ..ok.clone() }.validate().is_err());
        assert!(SynthesisConfig { mc_samples: 0, ..ok }.validate().is_err());
    }
}
