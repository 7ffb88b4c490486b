//! Oscillation lower bounds: any depth-D network with few units cannot cross
//! a level often, and a target that oscillates 2L times on the interval then
//! forces a quantified squared loss. Verification here is exact: crossings
//! and losses come from the piecewise-linear form, never from sampling.

use crate::fourier::FourierMeasure;
use crate::piecewise::{crossing_number, from_network_1d, l2_loss_vs_target, telgarsky_bound};
use crate::relu_net::{LayerSpec, ReluNetwork};
use crate::synthesizer::SynthesisError;
use crate::waveform::{waveform_layer, TriangleParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

/// Loss floor forced by limited crossings: (pi/16)(2L - crossing)/omega^(2a+1)
/// with omega = 2 pi L, clipped to 0 when the crossing count already reaches
/// 2L (the hypothesis fails and the floor says nothing).
pub fn lemma5_floor(crossing: u64, big_l: u64, alpha: f64) -> f64 {
    let omega = 2.0 * PI * big_l as f64;
    let slack = 2.0 * big_l as f64 - crossing as f64;
    if slack <= 0.0 {
        return 0.0;
    }
    PI / 16.0 * slack / omega.powf(2.0 * alpha + 1.0)
}

/// Budget-level floor: pi D^{D/K} / (32 (6 pi)^{1/K} (2 N0)^{D/K}), the
/// crossing floor evaluated at the matched oscillation count for networks of
/// at most `budget` units and `depth` layers.
pub fn theorem2_floor(budget: u64, depth: u32, smoothness: f64) -> f64 {
    let dk = depth as f64 / smoothness;
    PI * (depth as f64).powf(dk)
        / (32.0 * (6.0 * PI).powf(1.0 / smoothness) * (2.0 * budget as f64).powf(dk))
}

/// The matched-instance constant implied by the floor: theorem2_floor divided
/// by (r^{1/K} C^{1/K} C^0 + (C^0)^2) (D/N0)^{D/K}. Computed per instance
/// rather than hard-coded.
pub fn theorem2_b0(
    budget: u64,
    depth: u32,
    smoothness: f64,
    radius: f64,
    measure: &FourierMeasure,
) -> f64 {
    let c0 = measure.c0();
    let combo = radius.powf(1.0 / smoothness) * measure.c_alpha(1.0 / smoothness) * c0 + c0 * c0;
    let dk = depth as f64 / smoothness;
    theorem2_floor(budget, depth, smoothness)
        / (combo * (depth as f64 / budget as f64).powf(dk))
}

/// Oscillation count L of the hard instance matched to a unit budget:
/// ceil(2 (2 N0 / D)^D), the smallest L exceeding the crossing capability of
/// every depth-D network with N0 units. Saturates at u64::MAX.
pub fn matched_l(budget: u64, depth: u32) -> u64 {
    let y = 2.0 * (2.0 * budget as f64 / depth as f64).powi(depth as i32);
    if y >= u64::MAX as f64 {
        u64::MAX
    } else {
        y.ceil() as u64
    }
}

/// Outcome of checking one network against one hard instance.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct LowerBoundReport {
    pub crossing: u64,
    pub big_l: u64,
    pub alpha: f64,
    /// Level at which crossings were counted: 1/(2 omega^alpha), the image
    /// of level 1/2 under the omega^alpha scaling of the network.
    pub level: f64,
    pub measured_loss: f64,
    pub lemma5_floor: f64,
    pub theorem2_floor: f64,
    pub lemma5_ok: bool,
    pub theorem2_ok: bool,
    /// The budget-level floor binds only when the instance's L is the one
    /// matched to this network's size; otherwise theorem2_ok is vacuous.
    pub theorem2_applicable: bool,
}

/// Check a scalar network against the hard instance (K, r, L): count level
/// crossings exactly, measure the loss exactly, and compare with the floors.
pub fn verify_lemma5(
    net: &ReluNetwork,
    k_smooth: u32,
    radius: f64,
    big_l: u64,
) -> Result<LowerBoundReport, SynthesisError> {
    let (measure, info) = FourierMeasure::hard_instance(k_smooth, radius, big_l)?;
    let omega = info.omega();
    let alpha = info.alpha();
    // Crossings of omega^alpha * net at level 1/2 equal crossings of net at
    // level 1/(2 omega^alpha): positive scaling maps level sets bijectively.
    let level = 0.5 * omega.powf(-alpha);
    let pwl = from_network_1d(net)?;
    let crossing = crossing_number(&pwl, level);
    let floor = lemma5_floor(crossing, big_l, alpha);

    let min_period = 2.0 * PI / (omega / radius);
    let measured_loss = l2_loss_vs_target(
        &pwl,
        |x| measure.target_eval(&[x]).expect("dimension 1"),
        Some(min_period),
        radius,
    )?;

    let units = net.unit_count() as u64;
    let depth = net.depth() as u32;
    let t2_floor = theorem2_floor(units, depth, k_smooth as f64);
    let applicable = big_l == matched_l(units, depth);
    Ok(LowerBoundReport {
        crossing,
        big_l,
        alpha,
        level,
        measured_loss,
        lemma5_floor: floor,
        theorem2_floor: t2_floor,
        lemma5_ok: measured_loss >= floor - 1e-10,
        theorem2_ok: !applicable || measured_loss >= t2_floor * (1.0 - 1e-6),
        theorem2_applicable: applicable,
    })
}

/// A depth-D chain of identical triangle-waveform layers, the construction
/// that maximizes crossings per unit. All slopes are 1 and the widths shrink
/// by 2l per layer so the chain composes exactly; the composed waveform has
/// 2^{D-1} l^D tiles and peak (2l)^{-(D-1)}. Returns the network and its
/// peak value.
pub fn waveform_chain_net(l: u32, depth: u32) -> (ReluNetwork, f64) {
    assert!(l >= 1 && depth >= 1, "need l >= 1 and depth >= 1");
    let mut layers = Vec::with_capacity(depth as usize);
    let mut prev_readout: Vec<f64> = Vec::new();
    let mut alpha = 1.0f64;
    for i in 0..depth {
        let tri = TriangleParams::new(alpha, 1.0, l).expect("valid chain parameters");
        let (proto, readout) = waveform_layer(&tri);
        let layer = if i == 0 {
            LayerSpec::new(vec![vec![1.0]; proto.n_units()], proto.thresholds)
                .expect("well formed")
        } else {
            LayerSpec::new(vec![prev_readout.clone(); proto.n_units()], proto.thresholds)
                .expect("well formed")
        };
        layers.push(layer);
        prev_readout = readout;
        alpha /= 2.0 * l as f64;
    }
    let peak = (2.0 * l as f64).powi(-(depth as i32 - 1));
    (ReluNetwork::new(1, layers, prev_readout).expect("well formed"), peak)
}

/// Result of a crossing-bound falsification sweep.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct CrossingSweepReport {
    pub trials: u64,
    pub violations: u64,
    /// Largest crossing/bound ratio over the random networks.
    pub max_ratio: f64,
    /// Largest ratio over the adversarial waveform chains.
    pub adversarial_max_ratio: f64,
    pub counterexamples: Vec<PathBuf>,
}

/// Throw `trials` random heavy-tailed networks plus a family of adversarial
/// waveform chains at the crossing bound 2 (2 N0 / D)^D. Any violation would
/// falsify the bound (or expose a crossing-count bug) and is serialized for
/// inspection when a directory is given.
pub fn crossing_bound_sweep(
    depth: u32,
    unit_cap: u64,
    trials: u64,
    seed: u64,
    counterexample_dir: Option<&Path>,
) -> Result<CrossingSweepReport, SynthesisError> {
    assert!(trials >= 1, "need at least one trial");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = CrossingSweepReport {
        trials,
        violations: 0,
        max_ratio: 0.0,
        adversarial_max_ratio: 0.0,
        counterexamples: Vec::new(),
    };

    for trial in 0..trials {
        let net = random_heavy_net(&mut rng, depth, unit_cap);
        let pwl = from_network_1d(&net)?;
        let bound = telgarsky_bound(net.unit_count(), net.depth());
        for level in [0.0, cauchy(&mut rng)] {
            let cr = crossing_number(&pwl, level) as f64;
            let ratio = cr / bound;
            if ratio > report.max_ratio {
                report.max_ratio = ratio;
            }
            if cr > bound {
                report.violations += 1;
                if let Some(dir) = counterexample_dir {
                    let path = dir.join(format!("crossing_violation_{trial}.json"));
                    std::fs::write(&path, net.to_json()).map_err(|e| {
                        SynthesisError::BadConfig {
                            what: format!("cannot write counterexample {}: {e}", path.display()),
                        }
                    })?;
                    report.counterexamples.push(path);
                }
            }
        }
    }

    // Adversarial chains: every l with D(4l+1) <= unit_cap.
    let mut l = 1u32;
    while depth as u64 * (4 * l as u64 + 1) <= unit_cap {
        let (net, peak) = waveform_chain_net(l, depth);
        let pwl = from_network_1d(&net)?;
        let bound = telgarsky_bound(net.unit_count(), net.depth());
        let cr = crossing_number(&pwl, 0.5 * peak) as f64;
        let ratio = cr / bound;
        if ratio > report.adversarial_max_ratio {
            report.adversarial_max_ratio = ratio;
        }
        if cr > bound {
            report.violations += 1;
            if let Some(dir) = counterexample_dir {
                let path = dir.join(format!("crossing_violation_chain_l{l}.json"));
                std::fs::write(&path, net.to_json()).map_err(|e| SynthesisError::BadConfig {
                    what: format!("cannot write counterexample {}: {e}", path.display()),
                })?;
                report.counterexamples.push(path);
            }
        }
        l += 1;
    }
    Ok(report)
}

/// Standard Cauchy draw: heavy tails spread thresholds and weights far apart,
/// which is what makes random networks oscillate.
fn cauchy<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    (PI * (rng.gen::<f64>() - 0.5)).tan()
}

fn random_heavy_net<R: Rng + ?Sized>(rng: &mut R, depth: u32, unit_cap: u64) -> ReluNetwork {
    let per_layer = (unit_cap / depth as u64).max(1);
    let mut layers = Vec::with_capacity(depth as usize);
    let mut fan_in = 1usize;
    for _ in 0..depth {
        let units = rng.gen_range(1..=per_layer) as usize;
        let weights: Vec<Vec<f64>> =
            (0..units).map(|_| (0..fan_in).map(|_| cauchy(rng)).collect()).collect();
        let thresholds: Vec<f64> = (0..units).map(|_| cauchy(rng)).collect();
        layers.push(LayerSpec::new(weights, thresholds).expect("finite draws"));
        fan_in = units;
    }
    let readout: Vec<f64> = (0..fan_in).map(|_| cauchy(rng)).collect();
    ReluNetwork::new(1, layers, readout).expect("well formed")
}
