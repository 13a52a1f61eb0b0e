//! Small helpers for points stored as plain `f64` slices.

#[inline]
pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

#[inline]
pub fn norm_sq(x: &[f64]) -> f64 {
    dot(x, x)
}

#[inline]
pub fn norm(x: &[f64]) -> f64 {
    norm_sq(x).sqrt()
}

pub fn sub(x: &[f64], y: &[f64]) -> Vec<f64> {
    x.iter().zip(y).map(|(a, b)| a - b).collect()
}

pub fn scale(c: f64, x: &[f64]) -> Vec<f64> {
    x.iter().map(|v| c * v).collect()
}

pub fn unit(n: usize, i: usize) -> Vec<f64> {
    let mut e = vec![0.0; n];
    e[i] = 1.0;
    e
}

/// Unit vector in the direction of `x`, or `e_1` for the origin.
pub fn direction(x: &[f64]) -> Vec<f64> {
    let r = norm(x);
    if r == 0.0 {
        unit(x.len(), 0)
    } else {
        scale(1.0 / r, x)
    }
}

/// Rotation-free frame: returns `r * e` where `e` points along `axis`
/// tilted by angle `theta` toward a fixed orthogonal direction.
pub fn point_at_angle(axis: &[f64], r: f64, theta: f64) -> Vec<f64> {
    let n = axis.len();
    let a = direction(axis);
    // Pick the coordinate axis least aligned with `a` and orthonormalize.
    let j = (0..n)
        .min_by(|&i, &k| a[i].abs().partial_cmp(&a[k].abs()).unwrap())
        .unwrap();
    let mut b = unit(n, j);
    let proj = dot(&a, &b);
    for (bi, ai) in b.iter_mut().zip(&a) {
        *bi -= proj * ai;
    }
    let b = direction(&b);
    let (s, c) = theta.sin_cos();
    a.iter().zip(&b).map(|(ai, bi)| r * (c * ai + s * bi)).collect()
}
