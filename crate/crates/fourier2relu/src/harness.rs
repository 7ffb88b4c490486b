//! Experiment driver: structured configuration, rate sweeps over
//! (depth, budget) grids with log-log slope fits, CSV emission, and the
//! pass/fail verification suites behind the CLI.

use crate::fourier::{FourierAtom, FourierMeasure, HardInstance};
use crate::lowerbound::{
    crossing_bound_sweep, lemma5_floor, theorem2_floor, verify_lemma5,
};
use crate::piecewise::{from_network_1d, l2_loss_vs_target};
use crate::quadrature::{integrate_adaptive, integrate_gl10};
use crate::relu_net::ReluNetwork;
use crate::sinusoid::{expectation_oracle, gamma_cos_window};
use crate::synthesizer::{
    choose_sample_count, deep_cosine_params, display_bound, splitmix64, synthesize,
    CosineSubnet, SynthesisConfig, SynthesisError,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

fn default_retries() -> u32 {
    8
}
fn default_mc_samples() -> u64 {
    4096
}

/// Which frequency measure the experiment targets.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MeasureSpec {
    /// Explicit atom list: entries are (frequency vector, weight, phase).
    Atoms { dim: usize, atoms: Vec<(Vec<f64>, f64, f64)> },
    /// Standard Gaussian frequency density on R^dim.
    Gaussian { dim: usize },
    /// The oscillatory three-atom instance with parameters (K, r, L).
    HardInstance { smoothness: u32, radius: f64, big_l: u64 },
    /// Single scalar cosine `decay * cos(freq * x)`.
    ScaledCosine { freq: f64, decay: f64 },
}

impl MeasureSpec {
    pub fn build(&self) -> Result<(FourierMeasure, Option<HardInstance>), HarnessError> {
        match self {
            MeasureSpec::Atoms { dim, atoms } => {
                let atoms = atoms
                    .iter()
                    .map(|(xi, w, phase)| FourierAtom::new(xi.clone(), *w, *phase))
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|e| HarnessError::Config { what: e.to_string() })?;
                let mu = FourierMeasure::from_atoms(*dim, atoms)
                    .map_err(|e| HarnessError::Config { what: e.to_string() })?;
                Ok((mu, None))
            }
            MeasureSpec::Gaussian { dim } => {
                let mu = FourierMeasure::gaussian(*dim)
                    .map_err(|e| HarnessError::Config { what: e.to_string() })?;
                Ok((mu, None))
            }
            MeasureSpec::HardInstance { smoothness, radius, big_l } => {
                let (mu, info) = FourierMeasure::hard_instance(*smoothness, *radius, *big_l)
                    .map_err(|e| HarnessError::Config { what: e.to_string() })?;
                Ok((mu, Some(info)))
            }
            MeasureSpec::ScaledCosine { freq, decay } => {
                let mu = FourierMeasure::scaled_cosine(*freq, *decay)
                    .map_err(|e| HarnessError::Config { what: e.to_string() })?;
                Ok((mu, None))
            }
        }
    }
}

/// Full experiment description, loadable from a JSON file.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ExperimentConfig {
    pub measure: MeasureSpec,
    pub depths: Vec<u32>,
    pub budgets: Vec<u64>,
    pub smoothness: f64,
    pub radius: f64,
    #[serde(default = "default_retries")]
    pub retries: u32,
    #[serde(default)]
    pub seed: u64,
    /// Per-network sample-count override; None derives it from the budget.
    #[serde(default)]
    pub samples: Option<u64>,
    /// Monte Carlo sample count for ball losses (dimension > 1).
    #[serde(default = "default_mc_samples")]
    pub mc_samples: u64,
}

impl ExperimentConfig {
    pub fn from_json_file(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        let config: Self = serde_json::from_str(&text).map_err(|e| HarnessError::Parse {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.depths.is_empty() {
            return Err(HarnessError::Config { what: "depths must be nonempty".into() });
        }
        if self.depths.iter().any(|&d| d == 0) {
            return Err(HarnessError::Config { what: "depths must be positive".into() });
        }
        if self.budgets.is_empty() {
            return Err(HarnessError::Config { what: "budgets must be nonempty".into() });
        }
        if self.budgets.windows(2).any(|w| w[0] >= w[1]) {
            return Err(HarnessError::Config {
                what: "budgets must be strictly increasing".into(),
            });
        }
        if self.budgets[0] < 2 {
            return Err(HarnessError::Config { what: "budgets must be at least 2".into() });
        }
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(HarnessError::Config {
                what: format!("radius must be positive and finite, got {}", self.radius),
            });
        }
        if let Some(&d) = self.depths.iter().max() {
            if (d as f64) > self.smoothness {
                return Err(HarnessError::Config {
                    what: format!(
                        "depth {d} exceeds smoothness {}; rate sweeps need depth <= K",
                        self.smoothness
                    ),
                });
            }
        }
        if self.retries == 0 {
            return Err(HarnessError::Config { what: "retries must be positive".into() });
        }
        Ok(())
    }

    fn synthesis_config(&self, depth: u32, budget: u64, seed: u64) -> SynthesisConfig {
        SynthesisConfig {
            depth,
            budget,
            radius: self.radius,
            smoothness: self.smoothness,
            samples: self.samples,
            retries: self.retries,
            seed,
            mc_samples: self.mc_samples,
        }
    }
}

/// One sweep point: what was built and how it scored.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct SweepRecord {
    pub depth: u32,
    pub smoothness: f64,
    pub budget: u64,
    pub units: u64,
    pub loss: f64,
    pub upper_bound: f64,
    pub lower_floor: f64,
    pub seed: u64,
    pub wall_ms: u64,
}

/// Least-squares slope of log(loss) against log(budget) for one depth.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct SlopeFit {
    pub depth: u32,
    /// None when too few points carry numerically meaningful loss.
    pub slope: Option<f64>,
    pub points_used: usize,
    /// Budgets enter the fit only from this value up (top half of the list),
    /// recorded so the output documents the preasymptotic cut.
    pub min_budget_in_fit: u64,
}

/// Sweep outcome: per-point records sorted by (depth, budget) plus slope
/// fits per depth.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct SweepOutcome {
    pub records: Vec<SweepRecord>,
    pub slopes: Vec<SlopeFit>,
}

/// Run every (depth, budget) combination of the config: synthesize, measure,
/// and record. Points run in parallel with per-point seeds derived from the
/// master seed, and records are sorted afterwards, so the output does not
/// depend on scheduling.
pub fn run_sweep(config: &ExperimentConfig) -> Result<SweepOutcome, HarnessError> {
    config.validate()?;
    let (measure, instance) = config.measure.build()?;
    let points: Vec<(u32, u64)> = config
        .depths
        .iter()
        .flat_map(|&d| config.budgets.iter().map(move |&b| (d, b)))
        .collect();

    let mut records = points
        .par_iter()
        .map(|&(depth, budget)| -> Result<SweepRecord, HarnessError> {
            let started = Instant::now();
            let point_seed =
                splitmix64(config.seed ^ splitmix64(((depth as u64) << 40) ^ budget));
            let synth_config = config.synthesis_config(depth, budget, point_seed);
            let (net, report) = synthesize(&measure, &synth_config)?;
            let lower_floor = match &instance {
                Some(info) if measure.dim() == 1 => {
                    verify_lemma5(&net, info.k_smooth, info.radius, info.big_l)?.lemma5_floor
                }
                _ => 0.0,
            };
            Ok(SweepRecord {
                depth,
                smoothness: config.smoothness,
                budget,
                units: report.unit_count,
                loss: report.loss,
                upper_bound: report.bound_display,
                lower_floor,
                seed: point_seed,
                wall_ms: started.elapsed().as_millis() as u64,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    records.sort_by_key(|r| (r.depth, r.budget));

    let slopes = config
        .depths
        .iter()
        .map(|&depth| fit_slope(&records, depth, &config.budgets))
        .collect();
    Ok(SweepOutcome { records, slopes })
}

/// Fit log(loss) ~ a + slope * log(budget) on the top half of the budget
/// list, dropping points whose loss is below numerical noise.
fn fit_slope(records: &[SweepRecord], depth: u32, budgets: &[u64]) -> SlopeFit {
    let cut = budgets[budgets.len() / 2];
    let pts: Vec<(f64, f64)> = records
        .iter()
        .filter(|r| r.depth == depth && r.budget >= cut && r.loss > 1e-10)
        .map(|r| ((r.budget as f64).ln(), r.loss.ln()))
        .collect();
    if pts.len() < 2 {
        return SlopeFit { depth, slope: None, points_used: pts.len(), min_budget_in_fit: cut };
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    let slope = (n * sxy - sx * sy) / denom;
    SlopeFit { depth, slope: Some(slope), points_used: pts.len(), min_budget_in_fit: cut }
}

/// Write records as CSV: header then one row per record, full float
/// precision (shortest round-trip form), stable column order. The wall-time
/// column is emitted only on request since it is not reproducible.
pub fn emit_csv<W: Write>(
    records: &[SweepRecord],
    include_timings: bool,
    writer: W,
) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(writer);
    let io_err = |e: csv::Error| HarnessError::Io { path: "<csv>".into(), message: e.to_string() };
    let mut header = vec![
        "depth",
        "smoothness",
        "budget",
        "units",
        "loss",
        "upper_bound",
        "lower_floor",
        "seed",
    ];
    if include_timings {
        header.push("wall_ms");
    }
    w.write_record(&header).map_err(io_err)?;
    for r in records {
        let mut row = vec![
            r.depth.to_string(),
            r.smoothness.to_string(),
            r.budget.to_string(),
            r.units.to_string(),
            r.loss.to_string(),
            r.upper_bound.to_string(),
            r.lower_floor.to_string(),
            r.seed.to_string(),
        ];
        if include_timings {
            row.push(r.wall_ms.to_string());
        }
        w.write_record(&row).map_err(io_err)?;
    }
    w.flush().map_err(|e| HarnessError::Io { path: "<csv>".into(), message: e.to_string() })?;
    Ok(())
}

/// One verification check: which module, which invariant, did it hold.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct CheckResult {
    pub module: &'static str,
    pub id: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// A bundle of checks; `all_passed` decides the process exit code.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct VerifyReport {
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn check(module: &'static str, id: &'static str, passed: bool, detail: String) -> CheckResult {
    CheckResult { module, id, passed, detail }
}

/// Constructive-side verification: junction identities, unbiasedness through
/// actual weights, budget discipline, the loss bound, and determinism.
pub fn run_verify_upper(config: &ExperimentConfig) -> Result<VerifyReport, HarnessError> {
    config.validate()?;
    let (measure, _) = config.measure.build()?;
    let mut checks = Vec::new();

    // Junction identity across random frequencies and depths.
    {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0xA11CE);
        let mut worst = 0.0f64;
        for _ in 0..50 {
            let norm = 10f64.powf(rng.gen::<f64>() * 4.0);
            let depth = rng.gen_range(2..=4u32);
            let params = deep_cosine_params(norm, config.radius, depth)
                .map_err(synth_err)?;
            for r in params.junction_residuals() {
                worst = worst.max(r);
            }
        }
        checks.push(check(
            "synthesizer",
            "junction-identity",
            worst < 1e-12,
            format!("max junction residual {worst:.3e} over 50 random chains"),
        ));
    }

    // Unbiasedness through actual network weights, shallow and deep.
    {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0xBEEF);
        let mut worst = 0.0f64;
        let mut worst_fast = 0.0f64;
        let cases: [(Vec<f64>, f64, u32); 3] =
            [(vec![7.3], 0.4, 1), (vec![300.0], -0.8, 2), (vec![2000.0], 0.9, 3)];
        for (xi, theta, depth) in &cases {
            let s = rng.gen::<f64>();
            let subnet = CosineSubnet::build(xi, *theta, s, config.radius, *depth)
                .map_err(synth_err)?;
            for _ in 0..25 {
                let x = config.radius * (2.0 * rng.gen::<f64>() - 1.0);
                let want = (xi[0] * x + theta).cos();
                worst = worst.max((subnet.s_expectation(&[x]) - want).abs());
                let (full, fast) = subnet.self_consistency(&[x]);
                worst_fast = worst_fast.max((full - fast).abs());
            }
        }
        checks.push(check(
            "synthesizer",
            "unbiasedness",
            worst < 1e-7 && worst_fast < 1e-9,
            format!("max |E_s subnet - cos| {worst:.3e}, fast-path gap {worst_fast:.3e}"),
        ));
    }

    // Budget discipline and the display bound on the configured instance.
    {
        let depth = config.depths[0];
        let budget = config.budgets[0];
        let synth_config = config.synthesis_config(depth, budget, config.seed);
        let (net, report) = synthesize(&measure, &synth_config).map_err(synth_err)?;
        let within = report.fallback || net.unit_count() as u64 <= budget;
        checks.push(check(
            "synthesizer",
            "budget",
            within,
            format!(
                "units {} vs budget {budget} (fallback: {})",
                net.unit_count(),
                report.fallback
            ),
        ));
        let bound =
            display_bound(&measure, depth, config.smoothness, budget, config.radius);
        checks.push(check(
            "synthesizer",
            "loss-bound",
            report.loss <= bound,
            format!("loss {} vs bound {bound}", report.loss),
        ));
        let schedule = choose_sample_count(&measure, &synth_config);
        checks.push(check(
            "synthesizer",
            "sample-schedule",
            schedule.m >= 1,
            format!("m = {}, bracket D0 = {}", schedule.m, schedule.d0),
        ));
    }

    // Determinism: identical config must reproduce identical network bytes.
    {
        let synth_config =
            config.synthesis_config(config.depths[0], config.budgets[0], config.seed);
        let (a, _) = synthesize(&measure, &synth_config).map_err(synth_err)?;
        let (b, _) = synthesize(&measure, &synth_config).map_err(synth_err)?;
        checks.push(check(
            "synthesizer",
            "determinism",
            a.to_json() == b.to_json(),
            "two runs with one seed".into(),
        ));
    }

    Ok(VerifyReport { checks })
}

/// Lower-bound verification: pinned floor values, floor compliance for zero
/// and synthesized networks, the crossing bound sweep, and optionally a
/// user-supplied network.
pub fn run_verify_lower(
    config: &ExperimentConfig,
    loaded_net: Option<&ReluNetwork>,
) -> Result<VerifyReport, HarnessError> {
    config.validate()?;
    let mut checks = Vec::new();

    checks.push(check(
        "lowerbound",
        "pinned-floors",
        (lemma5_floor(0, 1, 0.0) - 1.0 / 16.0).abs() < 1e-15
            && (theorem2_floor(1, 1, 1.0) - 1.0 / 384.0).abs() < 1e-15,
        "lemma5(0,1,0) = 1/16 and theorem2(1,1,1) = 1/384".into(),
    ));

    // Which hard instance to test against: the configured one if present.
    let (k_smooth, radius, big_l) = match &config.measure {
        MeasureSpec::HardInstance { smoothness, radius, big_l } => {
            (*smoothness, *radius, *big_l)
        }
        _ => (2, 1.0, 8),
    };

    {
        let net = crate::synthesizer::zero_net(1);
        let report = verify_lemma5(&net, k_smooth, radius, big_l).map_err(synth_err)?;
        checks.push(check(
            "lowerbound",
            "zero-net-floor",
            report.lemma5_ok,
            format!("loss {} vs floor {}", report.measured_loss, report.lemma5_floor),
        ));
    }

    {
        let (mu, _) = FourierMeasure::hard_instance(k_smooth, radius, big_l)
            .map_err(|e| HarnessError::Config { what: e.to_string() })?;
        let synth_config =
            config.synthesis_config(config.depths[0], config.budgets[0], config.seed);
        let (net, _) = synthesize(&mu, &synth_config).map_err(synth_err)?;
        let report = verify_lemma5(&net, k_smooth, radius, big_l).map_err(synth_err)?;
        checks.push(check(
            "lowerbound",
            "synthesized-net-floor",
            report.lemma5_ok,
            format!(
                "crossing {}, loss {} vs floor {}",
                report.crossing, report.measured_loss, report.lemma5_floor
            ),
        ));
    }

    for depth in [1u32, 2] {
        let cap = 40 * depth as u64 + 2;
        let report = crossing_bound_sweep(depth, cap, 60, config.seed ^ depth as u64, None)
            .map_err(synth_err)?;
        checks.push(check(
            "lowerbound",
            if depth == 1 { "crossing-sweep-depth1" } else { "crossing-sweep-depth2" },
            report.violations == 0 && report.adversarial_max_ratio >= 0.05,
            format!(
                "violations {}, max ratio {:.4}, adversarial {:.4}",
                report.violations, report.max_ratio, report.adversarial_max_ratio
            ),
        ));
    }

    if let Some(net) = loaded_net {
        if net.input_dim == 1 {
            let report = verify_lemma5(net, k_smooth, radius, big_l).map_err(synth_err)?;
            checks.push(check(
                "lowerbound",
                "loaded-net-floor",
                report.lemma5_ok,
                format!(
                    "crossing {}, loss {} vs floor {}",
                    report.crossing, report.measured_loss, report.lemma5_floor
                ),
            ));
        } else {
            checks.push(check(
                "lowerbound",
                "loaded-net-floor",
                false,
                "loaded network must have input dimension 1".into(),
            ));
        }
    }

    Ok(VerifyReport { checks })
}

/// Numerical-oracle cross checks: quadrature exactness, estimator
/// expectations, moment identities, and exact piecewise losses.
pub fn run_oracle_suite() -> Result<VerifyReport, HarnessError> {
    let mut checks = Vec::new();

    {
        // Gauss-Legendre with 10 nodes is exact through degree 19.
        let f = |x: f64| x.powi(19) - 0.5 * x.powi(7) + 2.0 * x * x - 1.0;
        let got = integrate_gl10(f, -1.0, 1.0);
        // Odd powers vanish on [-1, 1]; int 2x^2 - 1 dx = 4/3 - 2 = -2/3.
        let want = -2.0 / 3.0;
        checks.push(check(
            "quadrature",
            "gl10-exactness",
            (got - want).abs() < 1e-13,
            format!("degree-19 polynomial residual {:.3e}", (got - want).abs()),
        ));
    }

    {
        let f = |x: f64| x * x * (-0.5 * x * x).exp();
        let got = integrate_adaptive(f, 0.0, 8.0, 1e-12).map_err(|e| HarnessError::Config {
            what: e.to_string(),
        })?;
        let want = 1.253_314_137_315_500_3;
        checks.push(check(
            "quadrature",
            "gaussian-tail",
            (got - want).abs() < 1e-10,
            format!("residual {:.3e}", (got - want).abs()),
        ));
    }

    {
        let mut worst = 0.0f64;
        for (omega, n) in [(1.0, 0u32), (5.0, 2), (40.0, 7)] {
            let (lo, hi) = gamma_cos_window(omega, n);
            for i in 0..=400 {
                let t = lo + (hi - lo) * i as f64 / 400.0;
                worst = worst.max((expectation_oracle(t, omega, n) - (omega * t).cos()).abs());
            }
        }
        checks.push(check(
            "sinusoid",
            "expectation-oracle",
            worst < 1e-8,
            format!("sup deviation from cosine {worst:.3e}"),
        ));
    }

    {
        let mut worst = 0.0f64;
        for d in [1usize, 3, 8] {
            let mu = FourierMeasure::gaussian(d)
                .map_err(|e| HarnessError::Config { what: e.to_string() })?;
            for alpha in [0.0, 0.5, 1.0, 2.0] {
                let closed = mu.c_alpha(alpha);
                let numeric = mu
                    .c_alpha_numeric(alpha)
                    .map_err(|e| HarnessError::Config { what: e.to_string() })?;
                worst = worst.max((closed - numeric).abs() / closed.abs());
            }
        }
        checks.push(check(
            "fourier",
            "gaussian-moments",
            worst < 1e-8,
            format!("max relative gap closed-vs-numeric {worst:.3e}"),
        ));
    }

    {
        let mut ok = true;
        let mut detail = String::new();
        for (k, l) in [(1u32, 2u64), (2, 8), (4, 32)] {
            let (mu, info) = FourierMeasure::hard_instance(k, 1.0, l)
                .map_err(|e| HarnessError::Config { what: e.to_string() })?;
            let omega = info.omega();
            let a = info.alpha();
            let c0_want = omega.powf(-a);
            let c1k_want = 0.5 * omega.powf(1.0 / k as f64 - a);
            let c0 = mu.c0();
            let c1k = mu.c_alpha(1.0 / k as f64);
            let combo = c1k * c0 + c0 * c0;
            if ((c0 - c0_want) / c0_want).abs() > 1e-12
                || ((c1k - c1k_want) / c1k_want).abs() > 1e-12
                || !(0.5..=1.5).contains(&combo)
            {
                ok = false;
                detail = format!("failed at K={k}, L={l}: C0={c0}, C1K={c1k}, combo={combo}");
                break;
            }
        }
        if ok {
            detail = "norm identities exact, combo in [1/2, 3/2]".into();
        }
        checks.push(check("fourier", "hard-instance-norms", ok, detail));
    }

    {
        // Composition identity on a pinned pair: T_1(T_1(t;1,2);1,1)
        // = T_2(t;1/2,2).
        let inner = crate::waveform::TriangleParams::new(1.0, 2.0, 1)
            .map_err(synth_err)?;
        let outer = crate::waveform::TriangleParams::new(1.0, 1.0, 1)
            .map_err(synth_err)?;
        let agrees = crate::waveform::check_composition(&inner, &outer, 2001)
            .map_err(synth_err)?;
        checks.push(check(
            "waveform",
            "composition",
            agrees,
            "two-step vs closed-form waveform on 2001 grid points".into(),
        ));
    }

    {
        // Exact loss of the zero network against cos over one period: 1/2.
        let net = crate::synthesizer::zero_net(1);
        let pwl = from_network_1d(&net).map_err(|e| HarnessError::Config {
            what: e.to_string(),
        })?;
        let loss = l2_loss_vs_target(&pwl, |x: f64| x.cos(), Some(2.0 * PI), PI)
            .map_err(|e| HarnessError::Config { what: e.to_string() })?;
        checks.push(check(
            "piecewise",
            "exact-loss",
            (loss - 0.5).abs() < 1e-12,
            format!("zero-vs-cosine loss {loss}"),
        ));
    }

    {
        // Uniform-ball sampling sanity in dimension 3: E|x|^2 = 3/5.
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let draws = 40_000;
        let mut sum = 0.0;
        for _ in 0..draws {
            let dir: Vec<f64> = (0..3).map(|_| StandardNormal.sample(&mut rng)).collect();
            let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
            let r = rng.gen::<f64>().powf(1.0 / 3.0);
            let x: Vec<f64> = dir.iter().map(|v| v / norm * r).collect();
            sum += x.iter().map(|v| v * v).sum::<f64>();
        }
        let mean = sum / draws as f64;
        checks.push(check(
            "harness",
            "ball-sampler",
            (mean - 0.6).abs() < 0.02,
            format!("E|x|^2 = {mean} vs 3/5"),
        ));
    }

    Ok(VerifyReport { checks })
}

fn synth_err<E: std::fmt::Display>(e: E) -> HarnessError {
    HarnessError::Config { what: e.to_string() }
}

/// Driver failures: configuration, I/O, or a propagated synthesis error.
#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("configuration error: {what}")]
    Config { what: String },
    #[error("I/O error at {path}: {message}")]
    Io { path: String, message: String },
    #[error("cannot parse {path}: {message}")]
    Parse { path: String, message: String },
    #[error(transparent)]
    Synthesis(#[from] SynthesisError),
}
