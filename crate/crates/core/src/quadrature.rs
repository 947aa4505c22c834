//! Adaptive Gauss–Legendre quadrature on an interval.

const NODES: [f64; 5] = [
    0.0,
    -0.538_469_310_105_683_1,
    0.538_469_310_105_683_1,
    -0.906_179_845_938_664,
    0.906_179_845_938_664,
];
const WEIGHTS: [f64; 5] = [
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
    0.236_926_885_056_189_1,
];

const MAX_DEPTH: u32 = 24;

/// Returns the 5-point estimate of the integral and of the integral of `|f|`.
fn gauss5<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let (mut sum, mut abs) = (0.0, 0.0);
    for (x, w) in NODES.iter().zip(WEIGHTS.iter()) {
        let v = f(mid + half * x);
        sum += w * v;
        abs += w * v.abs();
    }
    (sum * half, abs * half.abs())
}

/// Integrates `f` over `[a, b]` to absolute tolerance `abs_tol` by
/// recursive bisection, comparing the 5-point rule on an interval with the
/// sum over its halves. Differences at the rounding level of `|f|` are
/// accepted regardless of `abs_tol`.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, abs_tol: f64) -> f64 {
    let (whole, _) = gauss5(&mut f, a, b);
    refine(&mut f, a, b, whole, abs_tol, 0)
}

fn refine<F: FnMut(f64) -> f64>(
    f: &mut F,
    a: f64,
    b: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let mid = 0.5 * (a + b);
    let (left, left_abs) = gauss5(f, a, mid);
    let (right, right_abs) = gauss5(f, mid, b);
    let split = left + right;
    let diff = (split - whole).abs();
    let floor = 64.0 * f64::EPSILON * (left_abs + right_abs);
    if depth >= MAX_DEPTH || diff <= tol || diff <= floor {
        return split;
    }
    refine(f, a, mid, left, 0.5 * tol, depth + 1) + refine(f, mid, b, right, 0.5 * tol, depth + 1)
}
