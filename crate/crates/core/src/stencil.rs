//! Second-order finite-difference weights on uniform 1-D grids.
//!
//! Central stencils in the interior, one-sided second-order stencils at the
//! two ends. All of them are exact on quadratics.

/// Weights for the first derivative at node `k` of an `n`-point grid with spacing `h`.
/// Returns `(offset of the first weight, weights)`.
pub(crate) fn first(k: usize, n: usize, h: f64) -> (isize, [f64; 3]) {
    if k == 0 {
        (0, [-1.5 / h, 2.0 / h, -0.5 / h])
    } else if k + 1 == n {
        (-2, [0.5 / h, -2.0 / h, 1.5 / h])
    } else {
        (-1, [-0.5 / h, 0.0, 0.5 / h])
    }
}

/// Weights for the second derivative at node `k`. Interior nodes use three
/// points (the fourth weight is zero), ends use four.
pub(crate) fn second(k: usize, n: usize, h: f64) -> (isize, [f64; 4]) {
    let h2 = h * h;
    if k == 0 {
        (0, [2.0 / h2, -5.0 / h2, 4.0 / h2, -1.0 / h2])
    } else if k + 1 == n {
        (-3, [-1.0 / h2, 4.0 / h2, -5.0 / h2, 2.0 / h2])
    } else {
        (-1, [1.0 / h2, -2.0 / h2, 1.0 / h2, 0.0])
    }
}

pub(crate) fn apply_first(values: impl Fn(usize) -> f64, k: usize, n: usize, h: f64) -> f64 {
    let (off, w) = first(k, n, h);
    w.iter()
        .enumerate()
        .map(|(m, c)| if *c == 0.0 { 0.0 } else { c * values((k as isize + off + m as isize) as usize) })
        .sum()
}

pub(crate) fn apply_second(values: impl Fn(usize) -> f64, k: usize, n: usize, h: f64) -> f64 {
    let (off, w) = second(k, n, h);
    w.iter()
        .enumerate()
        .map(|(m, c)| if *c == 0.0 { 0.0 } else { c * values((k as isize + off + m as isize) as usize) })
        .sum()
}
