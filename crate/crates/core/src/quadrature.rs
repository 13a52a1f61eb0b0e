//! Quadrature on the unit ball against the normalized weighted measures
//! `d nu_beta = (1 - |x|^2)^beta d nu / V_beta`.
//!
//! Rules are products of a radial Gauss-Jacobi rule and an angular rule.
//! With `u = |x|^2` the radial part becomes
//! `(n/2) / V_beta * int_0^1 g(u) (1 - u)^beta u^{n/2 - 1} du`, which after
//! `u = (1 + z)/2` is a Jacobi weight `(1 - z)^beta (1 + z)^{n/2 - 1}`.
//! Radial and angular weights are each normalized to sum to one, so the
//! constant function integrates to one up to rounding.
//!
//! Summation runs over fixed-size chunks of the node list in parallel and the
//! chunk totals are added in order, so results do not depend on the number of
//! worker threads.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Default radial node count.
pub const DEFAULT_LEVEL: usize = 64;

/// Nodes per summation chunk. Fixed so reductions are thread-count independent.
const CHUNK: usize = 1024;

/// Seed for Monte Carlo angular rules when none is given.
pub const DEFAULT_SEED: u64 = 0x5eed_b0b5;

/// Gauss-Jacobi nodes on `[-1, 1]` for the weight `(1 - z)^a (1 + z)^b`,
/// with weights normalized to sum to one.
pub fn gauss_jacobi(m: usize, a: f64, b: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    if !(a > -1.0 && b > -1.0) {
        return Err(Error::Domain(format!(
            "Jacobi exponents must exceed -1, got ({a}, {b})"
        )));
    }
    if m == 0 {
        return Ok((vec![], vec![]));
    }
    let ab = a + b;
    let mut diag = vec![0.0; m];
    let mut off = vec![0.0; m.saturating_sub(1)];
    diag[0] = (b - a) / (ab + 2.0);
    for (k, d) in diag.iter_mut().enumerate().skip(1) {
        let kf = k as f64;
        let c = 2.0 * kf + ab;
        *d = (b * b - a * a) / (c * (c + 2.0));
    }
    for (i, o) in off.iter_mut().enumerate() {
        let k = (i + 1) as f64;
        let c = 2.0 * k + ab;
        let beta_k = if i == 0 {
            4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + ab).powi(2) * (3.0 + ab))
        } else {
            4.0 * k * (k + a) * (k + b) * (k + ab) / (c * c * (c + 1.0) * (c - 1.0))
        };
        *o = beta_k.sqrt();
    }
    let mut jac = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        jac[(i, i)] = diag[i];
        if i + 1 < m {
            jac[(i, i + 1)] = off[i];
            jac[(i + 1, i)] = off[i];
        }
    }
    let eig = SymmetricEigen::new(jac);
    let mut pairs: Vec<(f64, f64)> = (0..m)
        .map(|j| (eig.eigenvalues[j], eig.eigenvectors[(0, j)].powi(2)))
        .collect();
    pairs.sort_by(|p, q| p.0.total_cmp(&q.0));
    let total: f64 = pairs.iter().map(|p| p.1).sum();
    Ok(pairs.into_iter().map(|(x, w)| (x, w / total)).unzip())
}

/// Gauss-Legendre nodes and weights on `[lo, hi]` (weights sum to `hi - lo`).
pub fn gauss_legendre(m: usize, lo: f64, hi: f64) -> (Vec<f64>, Vec<f64>) {
    let (z, w) = gauss_jacobi(m, 0.0, 0.0).expect("Legendre exponents are valid");
    let half = 0.5 * (hi - lo);
    let mid = 0.5 * (hi + lo);
    (
        z.iter().map(|z| mid + half * z).collect(),
        w.iter().map(|w| 2.0 * half * w).collect(),
    )
}

/// How the angular part of a rule was built.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AngularKind {
    /// Equispaced angles on the circle.
    Equispaced,
    /// Gauss-Legendre in the polar cosine times equispaced azimuth.
    LegendreProduct,
    /// Antithetic Monte Carlo directions; integrals carry a standard error.
    MonteCarlo,
}

/// A product quadrature rule for `nu_beta` on the unit ball of `R^n`.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    n: usize,
    weight_exponent: f64,
    level: usize,
    radial_nodes: Vec<f64>,
    radial_weights: Vec<f64>,
    angular_nodes: Vec<Vec<f64>>,
    angular_weights: Vec<f64>,
    angular_kind: AngularKind,
    /// Highest total polynomial degree integrated exactly, if deterministic.
    exactness: Option<usize>,
}

/// A quadrature value together with its Monte Carlo standard error (zero for
/// deterministic rules).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
}

impl QuadratureRule {
    /// Builds the rule with `level` radial nodes.
    ///
    /// Angular resolution: `4 * level` equispaced angles for `n = 2`,
    /// `level / 2` Legendre cosines times `level` azimuths for `n = 3`, and
    /// `4 * level` antithetic random directions for `n >= 4`.
    pub fn new(n: usize, weight_exponent: f64, level: usize) -> Result<Self> {
        QuadratureRule::with_seed(n, weight_exponent, level, DEFAULT_SEED)
    }

    pub fn with_seed(n: usize, weight_exponent: f64, level: usize, seed: u64) -> Result<Self> {
        if n < 2 {
            return Err(Error::UnsupportedDimension(n));
        }
        if !(weight_exponent > -1.0) {
            return Err(Error::Domain(format!(
                "quadrature weight exponent must exceed -1, got {weight_exponent}"
            )));
        }
        let level = level.max(2);
        let (z, radial_weights) = gauss_jacobi(level, weight_exponent, n as f64 / 2.0 - 1.0)?;
        let radial_nodes = z.iter().map(|z| (0.5 * (1.0 + z)).max(0.0).sqrt()).collect();
        let (angular_nodes, angular_weights, angular_kind, angular_exact) = match n {
            2 => {
                let m = 4 * level;
                let nodes = (0..m)
                    .map(|j| {
                        let th = 2.0 * PI * j as f64 / m as f64;
                        vec![th.cos(), th.sin()]
                    })
                    .collect();
                (nodes, vec![1.0 / m as f64; m], AngularKind::Equispaced, Some(m - 1))
            }
            3 => {
                let lz = (level / 2).max(2);
                let mphi = level.max(4);
                let (zs, zw) = gauss_legendre(lz, -1.0, 1.0);
                let mut nodes = Vec::with_capacity(lz * mphi);
                let mut weights = Vec::with_capacity(lz * mphi);
                for (z, w) in zs.iter().zip(&zw) {
                    let s = (1.0 - z * z).max(0.0).sqrt();
                    for j in 0..mphi {
                        let ph = 2.0 * PI * (j as f64 + 0.5) / mphi as f64;
                        nodes.push(vec![s * ph.cos(), s * ph.sin(), *z]);
                        weights.push(w / (2.0 * mphi as f64));
                    }
                }
                let exact = (2 * lz - 1).min(mphi - 1);
                (nodes, weights, AngularKind::LegendreProduct, Some(exact))
            }
            _ => {
                let pairs = 2 * level;
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut nodes = Vec::with_capacity(2 * pairs);
                for _ in 0..pairs {
                    let mut v: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
                    let r = v.iter().map(|c| c * c).sum::<f64>().sqrt();
                    v.iter_mut().for_each(|c| *c /= r);
                    let anti: Vec<f64> = v.iter().map(|c| -c).collect();
                    nodes.push(v);
                    nodes.push(anti);
                }
                let m = nodes.len();
                (nodes, vec![1.0 / m as f64; m], AngularKind::MonteCarlo, None)
            }
        };
        let exactness = angular_exact.map(|a| a.min(2 * level - 1));
        Ok(QuadratureRule {
            n,
            weight_exponent,
            level,
            radial_nodes,
            radial_weights,
            angular_nodes,
            angular_weights,
            angular_kind,
            exactness,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn weight_exponent(&self) -> f64 {
        self.weight_exponent
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn angular_kind(&self) -> AngularKind {
        self.angular_kind
    }

    /// Highest polynomial degree integrated exactly (`None` for Monte Carlo).
    pub fn exactness(&self) -> Option<usize> {
        self.exactness
    }

    pub fn radial(&self) -> (&[f64], &[f64]) {
        (&self.radial_nodes, &self.radial_weights)
    }

    pub fn angular(&self) -> (&[Vec<f64>], &[f64]) {
        (&self.angular_nodes, &self.angular_weights)
    }

    pub fn len(&self) -> usize {
        self.radial_nodes.len() * self.angular_nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Node `i` written into `buf`; returns its weight.
    #[inline]
    pub fn node(&self, i: usize, buf: &mut [f64]) -> f64 {
        let na = self.angular_nodes.len();
        let (ir, ia) = (i / na, i % na);
        let r = self.radial_nodes[ir];
        for (b, e) in buf.iter_mut().zip(&self.angular_nodes[ia]) {
            *b = r * e;
        }
        self.radial_weights[ir] * self.angular_weights[ia]
    }

    /// All nodes as points, in rule order.
    pub fn points(&self) -> Vec<(Vec<f64>, f64)> {
        let mut buf = vec![0.0; self.n];
        (0..self.len())
            .map(|i| {
                let w = self.node(i, &mut buf);
                (buf.clone(), w)
            })
            .collect()
    }

    /// `int_B f d nu_beta`.
    pub fn integrate<F>(&self, f: F) -> f64
    where
        F: Fn(&[f64]) -> f64 + Sync,
    {
        let len = self.len();
        let chunks: Vec<f64> = (0..len.div_ceil(CHUNK))
            .into_par_iter()
            .map(|c| {
                let mut buf = vec![0.0; self.n];
                let mut acc = 0.0;
                for i in c * CHUNK..((c + 1) * CHUNK).min(len) {
                    let w = self.node(i, &mut buf);
                    acc += w * f(&buf);
                }
                acc
            })
            .collect();
        chunks.iter().sum()
    }

    /// `int_B f d nu_beta` for a fallible integrand; the first error in node
    /// order is returned.
    pub fn try_integrate<F>(&self, f: F) -> Result<f64>
    where
        F: Fn(&[f64]) -> Result<f64> + Sync,
    {
        let len = self.len();
        let chunks: Result<Vec<f64>> = (0..len.div_ceil(CHUNK))
            .into_par_iter()
            .map(|c| {
                let mut buf = vec![0.0; self.n];
                let mut acc = 0.0;
                for i in c * CHUNK..((c + 1) * CHUNK).min(len) {
                    let w = self.node(i, &mut buf);
                    acc += w * f(&buf)?;
                }
                Ok(acc)
            })
            .collect();
        Ok(chunks?.iter().sum())
    }

    /// Integrates `m` functions at once; `f(x, out)` writes the `m` values.
    pub fn integrate_many<F>(&self, m: usize, f: F) -> Vec<f64>
    where
        F: Fn(&[f64], &mut [f64]) + Sync,
    {
        let len = self.len();
        let chunks: Vec<Vec<f64>> = (0..len.div_ceil(CHUNK))
            .into_par_iter()
            .map(|c| {
                let mut buf = vec![0.0; self.n];
                let mut vals = vec![0.0; m];
                let mut acc = vec![0.0; m];
                for i in c * CHUNK..((c + 1) * CHUNK).min(len) {
                    let w = self.node(i, &mut buf);
                    f(&buf, &mut vals);
                    for (a, v) in acc.iter_mut().zip(&vals) {
                        *a += w * v;
                    }
                }
                acc
            })
            .collect();
        let mut total = vec![0.0; m];
        for c in &chunks {
            for (t, v) in total.iter_mut().zip(c) {
                *t += v;
            }
        }
        total
    }

    /// Integral with a standard error. For Monte Carlo rules the error comes
    /// from the spread of the per-direction radial integrals, with antithetic
    /// pairs averaged first.
    pub fn integrate_with_error<F>(&self, f: F) -> Estimate
    where
        F: Fn(&[f64]) -> f64 + Sync,
    {
        if self.angular_kind != AngularKind::MonteCarlo {
            return Estimate {
                value: self.integrate(f),
                std_error: 0.0,
            };
        }
        let radial = |dir: &[f64]| -> f64 {
            let mut buf = vec![0.0; self.n];
            self.radial_nodes
                .iter()
                .zip(&self.radial_weights)
                .map(|(r, w)| {
                    buf.iter_mut().zip(dir).for_each(|(b, d)| *b = r * d);
                    w * f(&buf)
                })
                .sum()
        };
        let pair_means: Vec<f64> = self
            .angular_nodes
            .par_chunks(2)
            .map(|p| 0.5 * (radial(&p[0]) + radial(&p[1])))
            .collect();
        let m = pair_means.len() as f64;
        let mean = pair_means.iter().sum::<f64>() / m;
        let var = pair_means.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0).max(1.0);
        Estimate {
            value: mean,
            std_error: (var / m).sqrt(),
        }
    }
}

/// Repeats an integral with doubled levels until two successive values agree
/// to `tol` (relative to `max(1, |value|)`), starting from `level`.
/// Returns the last value and the level it came from.
pub fn integrate_adaptive<F>(
    n: usize,
    weight_exponent: f64,
    level: usize,
    max_level: usize,
    tol: f64,
    f: F,
) -> Result<(f64, usize)>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let mut level = level.max(2);
    let mut prev = QuadratureRule::new(n, weight_exponent, level)?.integrate(&f);
    while level * 2 <= max_level {
        level *= 2;
        let cur = QuadratureRule::new(n, weight_exponent, level)?.integrate(&f);
        if (cur - prev).abs() <= tol * cur.abs().max(1.0) {
            return Ok((cur, level));
        }
        prev = cur;
    }
    Ok((prev, level))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::radial_moment;
    use approx::assert_relative_eq;

    #[test]
    fn legendre_small_rule() {
        let (x, w) = gauss_legendre(2, -1.0, 1.0);
        assert_relative_eq!(x[1], 1.0 / 3f64.sqrt(), max_relative = 1e-14);
        assert_relative_eq!(w[0], 1.0, max_relative = 1e-14);
        let (x, w) = gauss_legendre(8, 0.0, 2.0);
        let int: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(7)).sum();
        assert_relative_eq!(int, 2f64.powi(8) / 8.0, max_relative = 1e-13);
    }

    #[test]
    fn jacobi_moments_match_beta_ratios() {
        // mean of (1+z)/2 under (1-z)^a (1+z)^b is (b+1)/(a+b+2)
        let (a, b) = (1.5, -0.5);
        let (z, w) = gauss_jacobi(12, a, b).unwrap();
        let m1: f64 = z.iter().zip(&w).map(|(z, w)| w * 0.5 * (1.0 + z)).sum();
        assert_relative_eq!(m1, (b + 1.0) / (a + b + 2.0), max_relative = 1e-13);
        assert!(gauss_jacobi(4, -1.0, 0.0).is_err());
    }

    #[test]
    fn constant_integrates_to_one() {
        for n in [2, 3, 5] {
            for beta in [-0.5, 0.0, 2.5] {
                let rule = QuadratureRule::new(n, beta, 16).unwrap();
                assert!((rule.integrate(|_| 1.0) - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn radial_moments_are_exact() {
        for n in [2, 3] {
            for beta in [-0.7, 0.0, 1.0, 4.0] {
                let rule = QuadratureRule::new(n, beta, 16).unwrap();
                for k in 0..10 {
                    let v = rule.integrate(|x| crate::vector::norm_sq(x).powi(k as i32));
                    assert_relative_eq!(v, radial_moment(n, beta, k), max_relative = 1e-12);
                }
            }
        }
    }

    #[test]
    fn odd_functions_vanish() {
        for n in [2, 3] {
            let rule = QuadratureRule::new(n, 0.0, 16).unwrap();
            assert!(rule.integrate(|x| x[0]).abs() < 1e-12);
            assert!(rule.integrate(|x| x[0] * x[1] * x[1]).abs() < 1e-12);
        }
    }

    #[test]
    fn sphere_second_moment() {
        // int x_1^2 d nu_0 = 1/(n + 2)
        for n in [2, 3] {
            let rule = QuadratureRule::new(n, 0.0, 16).unwrap();
            assert_relative_eq!(rule.integrate(|x| x[0] * x[0]), 1.0 / (n as f64 + 2.0), max_relative = 1e-12);
        }
    }

    #[test]
    fn monte_carlo_reports_error() {
        let rule = QuadratureRule::new(5, 0.0, 32).unwrap();
        let est = rule.integrate_with_error(|x| x[0] * x[0]);
        assert!(est.std_error > 0.0);
        assert!((est.value - 1.0 / 7.0).abs() < 6.0 * est.std_error + 1e-12);
        // antithetic pairs cancel odd functions exactly
        assert!(rule.integrate(|x| x[1]).abs() < 1e-14);
    }

    #[test]
    fn many_matches_single() {
        let rule = QuadratureRule::new(3, 1.0, 12).unwrap();
        let many = rule.integrate_many(2, |x, out| {
            out[0] = x[2] * x[2];
            out[1] = 1.0;
        });
        assert_eq!(many[1], rule.integrate(|_| 1.0));
        assert_eq!(many[0], rule.integrate(|x| x[2] * x[2]));
    }

    #[test]
    fn rejects_bad_weight() {
        assert!(matches!(QuadratureRule::new(2, -1.0, 8), Err(Error::Domain(_))));
    }

    #[test]
    fn adaptive_converges() {
        let (v, _) = integrate_adaptive(2, 0.0, 4, 64, 1e-12, |x| (x[0] * 3.0).cos()).unwrap();
        let rule = QuadratureRule::new(2, 0.0, 64).unwrap();
        assert!((v - rule.integrate(|x| (x[0] * 3.0).cos())).abs() < 1e-12);
    }
}
