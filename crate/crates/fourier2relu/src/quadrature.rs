//! Gauss-Legendre quadrature and deterministic summation helpers.
//!
//! All integral verification in this crate is built on the 10-point rule,
//! applied per segment after the caller has split the domain at every
//! non-smooth point. The rule is exact for polynomials of degree 19, so on
//! segments where the integrand is analytic the error is dominated by
//! floating-point roundoff.

/// Positive abscissas of the 10-point Gauss-Legendre rule on [-1, 1].
const GL10_NODES: [f64; 5] = [
    0.148_874_338_981_631_2,
    0.433_395_394_129_247_2,
    0.679_409_568_299_024_4,
    0.865_063_366_688_984_5,
    0.973_906_528_517_171_7,
];

/// Weights matching `GL10_NODES` (symmetric in the abscissa sign).
const GL10_WEIGHTS: [f64; 5] = [
    0.295_524_224_714_752_9,
    0.269_266_719_309_996_3,
    0.219_086_362_515_982,
    0.149_451_349_150_580_6,
    0.066_671_344_308_688_1,
];

/// Integrate `f` over `[a, b]` with a single 10-point Gauss-Legendre rule.
pub fn integrate_gl10<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64) -> f64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = 0.0;
    for i in 0..5 {
        let dx = half * GL10_NODES[i];
        acc += GL10_WEIGHTS[i] * (f(mid - dx) + f(mid + dx));
    }
    acc * half
}

/// Integrate `f` over `[a, b]`, splitting at the sorted interior points of
/// `cuts` (entries outside (a, b) are ignored) and applying the 10-point rule
/// on each piece. Piece contributions are combined with pairwise summation so
/// the result does not depend on evaluation order.
pub fn integrate_piecewise<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, cuts: &[f64]) -> f64 {
    debug_assert!(a <= b, "integration interval reversed: [{a}, {b}]");
    let mut pieces = Vec::with_capacity(cuts.len() + 1);
    let mut lo = a;
    for &c in cuts {
        if c > lo && c < b {
            pieces.push(integrate_gl10(&mut f, lo, c));
            lo = c;
        }
    }
    pieces.push(integrate_gl10(&mut f, lo, b));
    pairwise_sum(&pieces)
}

/// Adaptive integration of a smooth `f` over `[a, b]` to a relative
/// tolerance, by recursive bisection with the 10-point rule. Convergence is
/// declared when the two-half estimate agrees with the one-panel estimate.
/// Returns an error when the recursion depth cap is hit before the tolerance
/// is met, which in practice signals a divergent or non-integrable input.
pub fn integrate_adaptive<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    rel_tol: f64,
) -> Result<f64, QuadratureError> {
    let whole = integrate_gl10(&f, a, b);
    let scale = whole.abs().max(1e-300);
    // The per-piece tolerance halves with each split, which over-demands
    // near integrable endpoint singularities (think sqrt(r) at zero). A
    // floor at machine precision relative to the global scale keeps those
    // convergent while a genuinely divergent integrand still overflows it.
    let floor = f64::EPSILON * scale;
    adaptive_rec(&f, a, b, whole, rel_tol * scale, floor, 0)
}

fn adaptive_rec<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    whole: f64,
    abs_tol: f64,
    floor: f64,
    depth: u32,
) -> Result<f64, QuadratureError> {
    const MAX_DEPTH: u32 = 48;
    let mid = 0.5 * (a + b);
    let left = integrate_gl10(f, a, mid);
    let right = integrate_gl10(f, mid, b);
    let refined = left + right;
    if (refined - whole).abs() <= abs_tol.max(floor) {
        return Ok(refined);
    }
    if depth >= MAX_DEPTH {
        return Err(QuadratureError::NoConvergence {
            interval: (a, b),
            residual: (refined - whole).abs(),
        });
    }
    let l = adaptive_rec(f, a, mid, left, 0.5 * abs_tol, floor, depth + 1)?;
    let r = adaptive_rec(f, mid, b, right, 0.5 * abs_tol, floor, depth + 1)?;
    Ok(l + r)
}

/// Sum a slice in a fixed pairwise (binary tree) order. Deterministic for a
/// given input order and more accurate than a left fold on long inputs.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        2 => xs[0] + xs[1],
        n => {
            let mid = n / 2;
            pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
        }
    }
}

/// Quadrature failure modes.
#[derive(Debug, thiserror::Error)]
pub enum QuadratureError {
    #[error(
        "adaptive quadrature did not converge on [{}, {}] (residual {residual:.3e}); the integrand may be divergent",
        interval.0, interval.1
    )]
    NoConvergence { interval: (f64, f64), residual: f64 },
}
