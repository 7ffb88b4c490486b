//! Exact piecewise-linear analysis of scalar-input networks.
//!
//! Every network with a one-dimensional input computes a continuous
//! piecewise-linear function. This module propagates an exact breakpoint
//! representation through the layers, which turns loss integrals into
//! per-segment Gauss-Legendre quadrature and crossing counts into exact
//! combinatorics. No sampling is involved anywhere here.

use crate::quadrature::{integrate_gl10, pairwise_sum};
use crate::relu_net::ReluNetwork;

/// Relative tolerance below which two adjacent slopes are considered equal
/// during canonicalization.
pub const SLOPE_MERGE_TOL: f64 = 1e-12;

/// A continuous piecewise-linear function on the whole real line.
///
/// Invariants: `xs` is strictly increasing and nonempty, `vs` has matching
/// length, both tails extend affinely with `left_slope` / `right_slope`.
/// Canonical form keeps no breakpoint whose incoming and outgoing slopes
/// agree within [`SLOPE_MERGE_TOL`], except that a globally affine function
/// retains a single anchor breakpoint (there is no other way to store its
/// value).
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinear {
    xs: Vec<f64>,
    vs: Vec<f64>,
    left_slope: f64,
    right_slope: f64,
}

impl PiecewiseLinear {
    /// Build from raw parts, validating the invariants.
    pub fn new(
        xs: Vec<f64>,
        vs: Vec<f64>,
        left_slope: f64,
        right_slope: f64,
    ) -> Result<Self, PwlError> {
        if xs.is_empty() || xs.len() != vs.len() {
            return Err(PwlError::BadShape {
                what: format!("{} breakpoints vs {} values", xs.len(), vs.len()),
            });
        }
        if !xs.windows(2).all(|w| w[0] < w[1]) {
            return Err(PwlError::BadShape {
                what: "breakpoints must be strictly increasing".into(),
            });
        }
        let finite = xs.iter().chain(&vs).all(|v| v.is_finite())
            && left_slope.is_finite()
            && right_slope.is_finite();
        if !finite {
            return Err(PwlError::BadShape { what: "non-finite breakpoint data".into() });
        }
        Ok(Self { xs, vs, left_slope, right_slope })
    }

    /// The constant function (stored as a single anchor at x = 0).
    pub fn constant(c: f64) -> Self {
        Self { xs: vec![0.0], vs: vec![c], left_slope: 0.0, right_slope: 0.0 }
    }

    /// The affine function `slope * x + value_at_zero`.
    pub fn affine(slope: f64, value_at_zero: f64) -> Self {
        Self { xs: vec![0.0], vs: vec![value_at_zero], left_slope: slope, right_slope: slope }
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.xs
    }

    pub fn values(&self) -> &[f64] {
        &self.vs
    }

    pub fn left_slope(&self) -> f64 {
        self.left_slope
    }

    pub fn right_slope(&self) -> f64 {
        self.right_slope
    }

    /// Evaluate at `x` by binary search over the breakpoints.
    pub fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return self.vs[0] + self.left_slope * (x - self.xs[0]);
        }
        if x >= self.xs[n - 1] {
            return self.vs[n - 1] + self.right_slope * (x - self.xs[n - 1]);
        }
        // partition_point returns the first index with xs[i] > x; the segment
        // is [i-1, i].
        let i = self.xs.partition_point(|&b| b <= x);
        self.segment_value(i - 1, x)
    }

    /// Value at `x` lying inside segment `[xs[i], xs[i+1]]`.
    fn segment_value(&self, i: usize, x: f64) -> f64 {
        let slope = (self.vs[i + 1] - self.vs[i]) / (self.xs[i + 1] - self.xs[i]);
        self.vs[i] + slope * (x - self.xs[i])
    }

    fn slope_of_segment(&self, i: usize) -> f64 {
        (self.vs[i + 1] - self.vs[i]) / (self.xs[i + 1] - self.xs[i])
    }

    /// Linear combination `sum_j coeff_j * term_j + offset`, merging the
    /// breakpoint grids exactly. Terms with coefficient exactly 0 are
    /// skipped, which keeps block-diagonal networks cheap.
    pub fn linear_combine(terms: &[(f64, &PiecewiseLinear)], offset: f64) -> Self {
        let active: Vec<&(f64, &PiecewiseLinear)> =
            terms.iter().filter(|(c, _)| *c != 0.0).collect();
        if active.is_empty() {
            return Self::constant(offset);
        }
        // Pairwise tree reduction keeps the merge cost near the total output
        // size instead of (terms x breakpoints).
        let mut level: Vec<PiecewiseLinear> =
            active.iter().map(|(c, p)| p.scaled(*c)).collect();
        while level.len() > 1 {
            let mut next = Vec::with_capacity(level.len() / 2 + 1);
            let mut iter = level.chunks(2);
            for chunk in &mut iter {
                match chunk {
                    [a, b] => next.push(add_two(a, b)),
                    [a] => next.push(a.clone()),
                    _ => unreachable!(),
                }
            }
            level = next;
        }
        let mut out = level.pop().expect("nonempty reduction");
        if offset != 0.0 {
            for v in &mut out.vs {
                *v += offset;
            }
        }
        out
    }

    /// Scale all values (and slopes) by `c`.
    fn scaled(&self, c: f64) -> Self {
        Self {
            xs: self.xs.clone(),
            vs: self.vs.iter().map(|v| c * v).collect(),
            left_slope: c * self.left_slope,
            right_slope: c * self.right_slope,
        }
    }

    /// Apply the ReLU: clamp negative parts to zero, inserting exact zero
    /// crossings as new breakpoints.
    pub fn relu(&self) -> Self {
        let n = self.xs.len();
        let mut xs = Vec::with_capacity(n + 2);
        let mut vs = Vec::with_capacity(n + 2);

        // Left tail crossing: exists when value and slope have the same
        // strict sign (value decreases towards the first breakpoint from a
        // positive tail, or increases from a negative one).
        if self.vs[0] != 0.0 && self.left_slope != 0.0 && (self.vs[0] > 0.0) == (self.left_slope > 0.0)
        {
            let x_star = self.xs[0] - self.vs[0] / self.left_slope;
            if x_star < self.xs[0] {
                xs.push(x_star);
                vs.push(0.0);
            }
        }
        for i in 0..n {
            if i > 0 {
                let (va, vb) = (self.vs[i - 1], self.vs[i]);
                if (va > 0.0 && vb < 0.0) || (va < 0.0 && vb > 0.0) {
                    let x_star =
                        self.xs[i - 1] + (self.xs[i] - self.xs[i - 1]) * va / (va - vb);
                    if x_star > *xs.last().unwrap_or(&f64::NEG_INFINITY) && x_star < self.xs[i] {
                        xs.push(x_star);
                        vs.push(0.0);
                    }
                }
            }
            if self.xs[i] > *xs.last().unwrap_or(&f64::NEG_INFINITY) {
                xs.push(self.xs[i]);
                vs.push(self.vs[i]);
            }
        }
        // Right tail crossing.
        if self.vs[n - 1] != 0.0
            && self.right_slope != 0.0
            && (self.vs[n - 1] > 0.0) != (self.right_slope > 0.0)
        {
            let x_star = self.xs[n - 1] - self.vs[n - 1] / self.right_slope;
            if x_star > *xs.last().unwrap() {
                xs.push(x_star);
                vs.push(0.0);
            }
        }

        // Tail slopes survive only where the tail region is positive.
        let left_positive = vs[0] > 0.0 || (vs[0] == 0.0 && self.left_slope < 0.0);
        let right_positive =
            *vs.last().unwrap() > 0.0 || (*vs.last().unwrap() == 0.0 && self.right_slope > 0.0);
        let left_slope = if left_positive { self.left_slope } else { 0.0 };
        let right_slope = if right_positive { self.right_slope } else { 0.0 };

        for v in &mut vs {
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        let out = Self { xs, vs, left_slope, right_slope };
        out.canonicalized(0.0)
    }

    /// Remove breakpoints whose incoming and outgoing slopes agree within
    /// `tol` relative (see [`SLOPE_MERGE_TOL`]). A single anchor always
    /// survives.
    pub fn canonicalized(&self, tol: f64) -> Self {
        let n = self.xs.len();
        let mut kept: Vec<usize> = Vec::with_capacity(n);
        let eq = |a: f64, b: f64| (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0);
        let slope_between = |i: usize, j: usize| -> f64 {
            (self.vs[j] - self.vs[i]) / (self.xs[j] - self.xs[i])
        };
        for p in 0..n {
            loop {
                match kept.len() {
                    0 => break,
                    1 => {
                        // The first kept point is removable when it lies on
                        // the left tail line extended to p.
                        if eq(self.left_slope, slope_between(kept[0], p)) {
                            kept.pop();
                        }
                        break;
                    }
                    _ => {
                        let b = kept[kept.len() - 1];
                        let a = kept[kept.len() - 2];
                        if eq(slope_between(a, b), slope_between(b, p)) {
                            kept.pop();
                        } else {
                            break;
                        }
                    }
                }
            }
            kept.push(p);
        }
        // Trailing points collinear with the right tail.
        while kept.len() >= 2 {
            let b = kept[kept.len() - 1];
            let a = kept[kept.len() - 2];
            if eq(slope_between(a, b), self.right_slope) {
                kept.pop();
            } else {
                break;
            }
        }
        if kept.len() == self.xs.len() {
            return self.clone();
        }
        Self {
            xs: kept.iter().map(|&i| self.xs[i]).collect(),
            vs: kept.iter().map(|&i| self.vs[i]).collect(),
            left_slope: self.left_slope,
            right_slope: self.right_slope,
        }
    }

    /// True when no interior breakpoint is removable at the standard
    /// tolerance (the single-anchor exemption applies).
    pub fn is_canonical(&self) -> bool {
        if self.xs.len() == 1 {
            return true;
        }
        let eq = |a: f64, b: f64| {
            (a - b).abs() <= SLOPE_MERGE_TOL * a.abs().max(b.abs()).max(1.0)
        };
        for i in 0..self.xs.len() {
            let s_in = if i == 0 { self.left_slope } else { self.slope_of_segment(i - 1) };
            let s_out = if i + 1 == self.xs.len() {
                self.right_slope
            } else {
                self.slope_of_segment(i)
            };
            if eq(s_in, s_out) {
                return false;
            }
        }
        true
    }
}

fn add_two(a: &PiecewiseLinear, b: &PiecewiseLinear) -> PiecewiseLinear {
    let mut xs = Vec::with_capacity(a.xs.len() + b.xs.len());
    let (mut i, mut j) = (0usize, 0usize);
    while i < a.xs.len() || j < b.xs.len() {
        let x = match (a.xs.get(i), b.xs.get(j)) {
            (Some(&xa), Some(&xb)) => {
                if xa < xb {
                    i += 1;
                    xa
                } else if xb < xa {
                    j += 1;
                    xb
                } else {
                    i += 1;
                    j += 1;
                    xa
                }
            }
            (Some(&xa), None) => {
                i += 1;
                xa
            }
            (None, Some(&xb)) => {
                j += 1;
                xb
            }
            (None, None) => unreachable!(),
        };
        xs.push(x);
    }
    let mut vs = Vec::with_capacity(xs.len());
    let (mut ia, mut ib) = (0usize, 0usize);
    for &x in &xs {
        vs.push(eval_with_cursor(a, x, &mut ia) + eval_with_cursor(b, x, &mut ib));
    }
    PiecewiseLinear {
        xs,
        vs,
        left_slope: a.left_slope + b.left_slope,
        right_slope: a.right_slope + b.right_slope,
    }
}

/// Evaluation that exploits monotone queries: `cursor` tracks the last
/// breakpoint at or before `x` and only moves forward. Returns stored values
/// exactly when `x` hits a breakpoint.
fn eval_with_cursor(p: &PiecewiseLinear, x: f64, cursor: &mut usize) -> f64 {
    let n = p.xs.len();
    while *cursor + 1 < n && p.xs[*cursor + 1] <= x {
        *cursor += 1;
    }
    if x < p.xs[0] {
        return p.vs[0] + p.left_slope * (x - p.xs[0]);
    }
    let i = *cursor;
    if p.xs[i] == x {
        return p.vs[i];
    }
    if i + 1 == n {
        return p.vs[n - 1] + p.right_slope * (x - p.xs[n - 1]);
    }
    p.segment_value(i, x)
}

/// Convert a scalar-input network into its exact piecewise-linear form by
/// propagating breakpoint representations through every layer.
pub fn from_network_1d(net: &ReluNetwork) -> Result<PiecewiseLinear, PwlError> {
    if net.input_dim != 1 {
        return Err(PwlError::NotScalarInput { dim: net.input_dim });
    }
    let first = &net.layers[0];
    let mut units: Vec<PiecewiseLinear> = first
        .weights
        .iter()
        .zip(&first.thresholds)
        .map(|(row, &t)| PiecewiseLinear::affine(row[0], -t).relu())
        .collect();

    for layer in &net.layers[1..] {
        // Sanity bound on breakpoint growth: each unit of this layer can add
        // at most one crossing per segment of the incoming grid.
        #[cfg(debug_assertions)]
        let budget = {
            let before = union_grid_size(&units);
            before + (before + 1) * layer.n_units()
        };
        let next: Vec<PiecewiseLinear> = layer
            .weights
            .iter()
            .zip(&layer.thresholds)
            .map(|(row, &t)| {
                let terms: Vec<(f64, &PiecewiseLinear)> =
                    row.iter().copied().zip(units.iter()).collect();
                PiecewiseLinear::linear_combine(&terms, -t).relu()
            })
            .collect();
        #[cfg(debug_assertions)]
        {
            let after = union_grid_size(&next);
            debug_assert!(
                after <= budget,
                "breakpoint growth exceeded the segment x unit bound: {after} > {budget}"
            );
        }
        units = next;
    }

    let terms: Vec<(f64, &PiecewiseLinear)> =
        net.readout.iter().copied().zip(units.iter()).collect();
    Ok(PiecewiseLinear::linear_combine(&terms, 0.0).canonicalized(SLOPE_MERGE_TOL))
}

#[cfg(debug_assertions)]
fn union_grid_size(units: &[PiecewiseLinear]) -> usize {
    let mut all: Vec<f64> = units.iter().flat_map(|p| p.xs.iter().copied()).collect();
    all.sort_by(f64::total_cmp);
    all.dedup();
    all.len()
}

/// Count the maximal intervals on which the indicator `1(f >= level)` is
/// constant. Exact for exactly-represented inputs; a segment lying exactly
/// at the level belongs to the `>=` side, and an isolated touch point forms
/// its own (degenerate) interval.
pub fn crossing_number(pwl: &PiecewiseLinear, level: f64) -> u64 {
    let n = pwl.xs.len();
    // Critical points: breakpoints plus strict level crossings, each tagged
    // with the exact indicator at that point.
    let mut criticals: Vec<(f64, bool)> = Vec::with_capacity(2 * n);

    // Left tail crossing.
    let v0 = pwl.vs[0];
    let ls = pwl.left_slope;
    if (ls > 0.0 && v0 > level) || (ls < 0.0 && v0 < level) {
        criticals.push((pwl.xs[0] - (v0 - level) / ls, true));
    }
    for i in 0..n {
        if i > 0 {
            let (va, vb) = (pwl.vs[i - 1], pwl.vs[i]);
            if (va > level && vb < level) || (va < level && vb > level) {
                let x_star =
                    pwl.xs[i - 1] + (pwl.xs[i] - pwl.xs[i - 1]) * (va - level) / (va - vb);
                if x_star > criticals.last().map_or(f64::NEG_INFINITY, |c| c.0)
                    && x_star < pwl.xs[i]
                {
                    criticals.push((x_star, true));
                }
            }
        }
        criticals.push((pwl.xs[i], pwl.vs[i] >= level));
    }
    let vl = pwl.vs[n - 1];
    let rs = pwl.right_slope;
    if (rs < 0.0 && vl > level) || (rs > 0.0 && vl < level) {
        criticals.push((pwl.xs[n - 1] + (level - vl) / rs, true));
    }

    // Indicator at the far tails.
    let ind_neg_inf = if ls > 0.0 { false } else if ls < 0.0 { true } else { v0 >= level };
    let ind_pos_inf = if rs > 0.0 { true } else if rs < 0.0 { false } else { vl >= level };

    // Walk the alternating sequence tail, c_0, gap_0, c_1, ..., tail and
    // count indicator transitions. Gap indicators are sampled at midpoints,
    // which is stable because crossings already sit at the criticals.
    let mut transitions = 0u64;
    let mut prev = ind_neg_inf;
    for (idx, &(x, ind)) in criticals.iter().enumerate() {
        if ind != prev {
            transitions += 1;
        }
        prev = ind;
        if idx + 1 < criticals.len() {
            let x_next = criticals[idx + 1].0;
            if x_next > x {
                let mid = pwl.eval(0.5 * (x + x_next)) >= level;
                if mid != prev {
                    transitions += 1;
                }
                prev = mid;
            }
        }
    }
    if ind_pos_inf != prev {
        transitions += 1;
    }
    transitions + 1
}

/// Upper bound `2 (2 N0 / D)^D` on the crossing number of any depth-`D`
/// network with `N0` units, evaluated in floating point.
pub fn telgarsky_bound(n0: usize, depth: usize) -> f64 {
    assert!(depth >= 1, "depth must be at least 1");
    2.0 * (2.0 * n0 as f64 / depth as f64).powi(depth as i32)
}

/// Mean squared error `(1/2r) int_{-r}^{r} (target - pwl)^2 dx`, computed
/// with 10-point Gauss-Legendre quadrature per piece. Pieces are cut at
/// every breakpoint of `pwl` inside the interval; when `target_min_period`
/// is given, pieces are further subdivided so none exceeds a tenth of it.
pub fn l2_loss_vs_target<F: FnMut(f64) -> f64>(
    pwl: &PiecewiseLinear,
    mut target: F,
    target_min_period: Option<f64>,
    r: f64,
) -> Result<f64, PwlError> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(PwlError::InvalidRadius { r });
    }
    let max_len = target_min_period.map(|p| p / 10.0);
    if let Some(ml) = max_len {
        if !(ml > 0.0) {
            return Err(PwlError::BadShape {
                what: format!("target period must be positive, got {:?}", target_min_period),
            });
        }
    }

    // Assemble the cut points: -r, breakpoints strictly inside, r.
    let mut cuts: Vec<f64> = Vec::with_capacity(pwl.xs.len() + 2);
    cuts.push(-r);
    for &x in &pwl.xs {
        if x > -r && x < r {
            cuts.push(x);
        }
    }
    cuts.push(r);

    let mut pieces: Vec<f64> = Vec::new();
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue; // duplicate cut at the boundary
        }
        // No breakpoint lies strictly inside (a, b), so the function is
        // affine there; the secant through the endpoint values is exact.
        let va = pwl.eval(a);
        let vb = pwl.eval(b);
        let slope = (vb - va) / (b - a);
        let parts = match max_len {
            Some(ml) => ((b - a) / ml).ceil().max(1.0) as usize,
            None => 1,
        };
        let step = (b - a) / parts as f64;
        for p in 0..parts {
            let lo = a + p as f64 * step;
            let hi = if p + 1 == parts { b } else { a + (p + 1) as f64 * step };
            pieces.push(integrate_gl10(
                |x| {
                    let d = target(x) - (va + slope * (x - a));
                    d * d
                },
                lo,
                hi,
            ));
        }
    }
    Ok(pairwise_sum(&pieces) / (2.0 * r))
}

/// Piecewise-linear analysis failures.
#[derive(Debug, thiserror::Error)]
pub enum PwlError {
    #[error("invalid piecewise-linear data: {what}")]
    BadShape { what: String },
    #[error("network has input dimension {dim}, exact analysis requires 1")]
    NotScalarInput { dim: usize },
    #[error("integration radius must be positive, got {r}")]
    InvalidRadius { r: f64 },
}
