//! Shared quadrature and closed-form cell integrals.

/// `int_0^dx exp(v1 + (v2 - v1) s/dx) ds`, the exact integral of the
/// exponential of a linear function over a cell of width `dx`.
///
/// Falls back to a Taylor series when `|v2 - v1|` is tiny to avoid
/// cancellation in `(e^{v2} - e^{v1})/(v2 - v1)`.
pub fn integral_exp_linear(v1: f64, v2: f64, dx: f64) -> f64 {
    if v1 == f64::NEG_INFINITY && v2 == f64::NEG_INFINITY {
        return 0.0;
    }
    let d = v2 - v1;
    if d.abs() < 1e-8 {
        // e^{v1} (1 + d/2 + d^2/6 + d^3/24)
        dx * v1.exp() * (1.0 + d * (0.5 + d * (1.0 / 6.0 + d / 24.0)))
    } else {
        dx * (v2.exp() - v1.exp()) / d
    }
}

/// Trapezoid rule for samples on a uniform grid of spacing `dx`.
pub fn trapezoid_uniform(values: &[f64], dx: f64) -> f64 {
    debug_assert!(values.len() >= 2);
    let inner: f64 = values[1..values.len() - 1].iter().sum();
    dx * (0.5 * (values[0] + values[values.len() - 1]) + inner)
}

/// Nodes and weights of the 5-point Gauss-Legendre rule on [-1, 1].
pub const GL5_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683,
    0.0,
    0.538_469_310_105_683,
    0.906_179_845_938_664,
];
pub const GL5_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189,
    0.478_628_670_499_366,
    0.568_888_888_888_889,
    0.478_628_670_499_366,
    0.236_926_885_056_189,
];

/// 5-point Gauss-Legendre quadrature of `f` on `[a, b]`.
#[cfg_attr(not(test), allow(dead_code))]
pub fn gauss_legendre_5<F: Fn(f64) -> f64>(a: f64, b: f64, f: F) -> f64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = 0.0;
    for (x, w) in GL5_NODES.iter().zip(GL5_WEIGHTS.iter()) {
        acc += w * f(mid + half * x);
    }
    acc * half
}

/// Composite 5-point Gauss-Legendre with `cells` equal subintervals.
#[cfg_attr(not(test), allow(dead_code))]
pub fn composite_gl5<F: Fn(f64) -> f64>(a: f64, b: f64, cells: usize, f: F) -> f64 {
    let h = (b - a) / cells as f64;
    (0..cells)
        .map(|c| gauss_legendre_5(a + c as f64 * h, a + (c + 1) as f64 * h, &f))
        .sum()
}

/// Sample mean and standard error of the mean.
pub fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}
