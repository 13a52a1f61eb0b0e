//! Kernel coefficients, zonal harmonics and the Bergman-Besov reproducing
//! kernels `R_alpha(x, y) = sum_k gamma_k(alpha) Z_k(x, y)`.
//!
//! The coefficients come in two branches split at `alpha = -(1 + n/2)`:
//!
//! * `alpha > -(1 + n/2)`: `gamma_k = (1 + n/2 + alpha)_k / (n/2)_k`
//! * `alpha <= -(1 + n/2)`: `gamma_k = (k!)^2 / ((1 - (n/2 + alpha))_k (n/2)_k)`
//!
//! The two branches do not agree at the split point; the jump is kept as is.
//! All products are accumulated one factor at a time so that large degrees
//! never pass through a gamma function.
//!
//! Zonal harmonics are evaluated with the three-term recurrence of the
//! normalized Gegenbauer polynomials written in homogeneous form, so that
//! `Z_k(x, y)` is computed from `x . y` and `|x|^2 |y|^2` without dividing by
//! the norms.

use statrs::function::gamma::{gamma, ln_gamma};

use crate::error::{require_in_ball, Error, Result};
use crate::vector::{dot, norm_sq};

/// Default cap on the number of series terms.
pub const DEFAULT_MAX_TERMS: usize = 100_000;

/// Rising factorial `(a)_b` for integer `b`, as a plain product.
pub fn pochhammer(a: f64, b: u32) -> f64 {
    (0..b).fold(1.0, |acc, j| acc * (a + j as f64))
}

/// Rising factorial `Gamma(a + b) / Gamma(a)` for real `b`.
///
/// Integer `b` falls back to the product form, which is defined everywhere.
/// Otherwise `a` and `a + b` must avoid the poles `0, -1, -2, ...`.
pub fn pochhammer_real(a: f64, b: f64) -> Result<f64> {
    if b >= 0.0 && b.fract() == 0.0 && b <= u32::MAX as f64 {
        return Ok(pochhammer(a, b as u32));
    }
    let is_pole = |z: f64| z <= 0.0 && z.fract() == 0.0;
    if is_pole(a) || is_pole(a + b) {
        return Err(Error::Domain(format!(
            "({a})_{b}: gamma has a pole at {}",
            if is_pole(a) { a } else { a + b }
        )));
    }
    if a > 0.0 && a + b > 0.0 {
        Ok((ln_gamma(a + b) - ln_gamma(a)).exp())
    } else {
        Ok(gamma(a + b) / gamma(a))
    }
}

/// Which closed form produces `gamma_k(alpha)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// `alpha > -(1 + n/2)`
    Regular,
    /// `alpha <= -(1 + n/2)`
    Factorial,
}

pub fn branch(n: usize, alpha: f64) -> Branch {
    if alpha > -(1.0 + n as f64 / 2.0) {
        Branch::Regular
    } else {
        Branch::Factorial
    }
}

/// `gamma_{k+1}(alpha) / gamma_k(alpha)`.
#[inline]
fn coefficient_ratio(n: usize, alpha: f64, k: usize) -> f64 {
    let half = n as f64 / 2.0;
    let k = k as f64;
    match branch(n, alpha) {
        Branch::Regular => (1.0 + half + alpha + k) / (half + k),
        Branch::Factorial => {
            let c = 1.0 - (half + alpha);
            (k + 1.0) * (k + 1.0) / ((c + k) * (half + k))
        }
    }
}

/// `gamma_k(alpha)` computed directly as a product of `k` ratios.
pub fn gamma_k(n: usize, alpha: f64, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, j| acc * coefficient_ratio(n, alpha, j))
}

/// Cache of kernel coefficients `gamma_k(alpha)` for one `(n, alpha)`.
///
/// The cache grows on demand through `&mut self`; share it across threads
/// only after [`KernelCoeffs::ensure`] has populated every degree needed.
#[derive(Debug, Clone)]
pub struct KernelCoeffs {
    n: usize,
    alpha: f64,
    values: Vec<f64>,
    offset: usize,
}

impl KernelCoeffs {
    pub fn new(n: usize, alpha: f64) -> Self {
        assert!(n >= 2, "dimension must be at least 2");
        KernelCoeffs {
            n,
            alpha,
            values: vec![1.0],
            offset: 0,
        }
    }

    /// Fault-injection constructor used by the verification battery:
    /// degree `k` reports `gamma_{k + offset}`.
    #[doc(hidden)]
    pub fn with_index_shift(n: usize, alpha: f64, offset: usize) -> Self {
        KernelCoeffs {
            offset,
            ..KernelCoeffs::new(n, alpha)
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn branch(&self) -> Branch {
        branch(self.n, self.alpha)
    }

    /// Populates the cache through degree `k`.
    pub fn ensure(&mut self, k: usize) {
        let top = k + self.offset;
        while self.values.len() <= top {
            let j = self.values.len() - 1;
            let next = self.values[j] * coefficient_ratio(self.n, self.alpha, j);
            self.values.push(next);
        }
    }

    pub fn get(&mut self, k: usize) -> f64 {
        self.ensure(k);
        self.values[k + self.offset]
    }

    /// Coefficients for degrees `0..=k`.
    pub fn upto(&mut self, k: usize) -> Vec<f64> {
        self.ensure(k);
        self.values[self.offset..=k + self.offset].to_vec()
    }

    /// Builds an immutable evaluator holding `max_terms` coefficients.
    pub fn kernel(&mut self, config: KernelConfig) -> Kernel {
        Kernel::from_coeffs(self, config)
    }
}

/// Dimension `h_k` of the space of degree-`k` spherical harmonics on `S^{n-1}`.
pub fn dim_harmonics(n: usize, k: usize) -> u64 {
    fn binom(m: u64, r: u64) -> u128 {
        if r > m {
            return 0;
        }
        let r = r.min(m - r);
        let mut acc: u128 = 1;
        for j in 0..r {
            acc = acc.saturating_mul((m - j) as u128) / (j as u128 + 1);
        }
        acc
    }
    let (n, k) = (n as u64, k as u64);
    let top = binom(n + k - 1, n - 1);
    let low = if k >= 2 { binom(n + k - 3, n - 1) } else { 0 };
    u64::try_from(top - low).unwrap_or(u64::MAX)
}

/// `h_k` as a float, valid for degrees whose integer value would overflow.
pub fn dim_harmonics_f64(n: usize, k: usize) -> f64 {
    match (n, k) {
        (_, 0) => 1.0,
        (_, 1) => n as f64,
        (2, _) => 2.0,
        _ => {
            let kf = k as f64;
            let nf = n as f64;
            // (2k + n - 2)/(k + n - 2) * C(k + n - 2, n - 2)
            let binom = (1..=n - 2).fold(1.0, |acc, j| acc * (kf + j as f64) / j as f64);
            (2.0 * kf + nf - 2.0) / (kf + nf - 2.0) * binom
        }
    }
}

/// Homogeneous recurrence state for `q_k = |x|^k |y|^k P_k(t)` where `P_k`
/// is the Gegenbauer polynomial normalized by `P_k(1) = 1`.
#[inline]
fn next_q(n: usize, k: usize, s: f64, r2: f64, q_k: f64, q_km1: f64) -> f64 {
    if k == 0 {
        return s;
    }
    let (kf, nf) = (k as f64, n as f64);
    ((2.0 * kf + nf - 2.0) * s * q_k - kf * r2 * q_km1) / (kf + nf - 2.0)
}

/// Extended zonal harmonic `Z_k(x, y)`, homogeneous of degree `k` in each slot.
pub fn zonal(n: usize, k: usize, x: &[f64], y: &[f64]) -> f64 {
    let s = dot(x, y);
    let r2 = norm_sq(x) * norm_sq(y);
    zonal_from_products(n, k, s, r2)
}

/// `Z_k` from `s = x . y` and `r2 = |x|^2 |y|^2`.
pub fn zonal_from_products(n: usize, k: usize, s: f64, r2: f64) -> f64 {
    let (mut prev, mut cur) = (0.0, 1.0);
    for j in 0..k {
        let next = next_q(n, j, s, r2, cur, prev);
        prev = cur;
        cur = next;
    }
    dim_harmonics_f64(n, k) * cur
}

/// All of `Z_0(x, y), ..., Z_K(x, y)`.
pub fn zonal_all(n: usize, max_degree: usize, x: &[f64], y: &[f64]) -> Vec<f64> {
    let s = dot(x, y);
    let r2 = norm_sq(x) * norm_sq(y);
    let mut out = Vec::with_capacity(max_degree + 1);
    let (mut prev, mut cur) = (0.0, 1.0);
    for k in 0..=max_degree {
        out.push(dim_harmonics_f64(n, k) * cur);
        let next = next_q(n, k, s, r2, cur, prev);
        prev = cur;
        cur = next;
    }
    out
}

/// Truncation settings for kernel series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelConfig {
    /// Stop once the certified tail bound is at most `tol * max(1, |partial sum|)`.
    pub tol: f64,
    pub max_terms: usize,
}

impl Default for KernelConfig {
    fn default() -> Self {
        KernelConfig {
            tol: 1e-12,
            max_terms: DEFAULT_MAX_TERMS,
        }
    }
}

/// A kernel value together with its certified truncation bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelValue {
    pub value: f64,
    pub truncation_bound: f64,
    pub terms_used: usize,
}

/// Immutable kernel evaluator: coefficients, harmonic dimensions and the
/// ratio bounds used by the tail majorant, precomputed up to `max_terms`.
#[derive(Debug, Clone)]
pub struct Kernel {
    n: usize,
    alpha: f64,
    config: KernelConfig,
    /// `gamma_k * h_k`
    weights: Vec<f64>,
    /// `sup_{j >= k} weights[j + 1] / weights[j]`
    sup_ratio: Vec<f64>,
}

impl Kernel {
    pub fn new(n: usize, alpha: f64, config: KernelConfig) -> Self {
        Kernel::from_coeffs(&mut KernelCoeffs::new(n, alpha), config)
    }

    fn from_coeffs(coeffs: &mut KernelCoeffs, config: KernelConfig) -> Self {
        let (n, alpha) = (coeffs.n, coeffs.alpha);
        let len = config.max_terms + 2;
        let gammas = coeffs.upto(len);
        let dims: Vec<f64> = (0..=len).map(|k| dim_harmonics_f64(n, k)).collect();
        let weights: Vec<f64> = gammas.iter().zip(&dims).map(|(g, h)| g * h).collect();
        let regular_growing = branch(n, alpha) == Branch::Regular && 1.0 + alpha >= 0.0;
        let sup_ratio = (0..len)
            .map(|k| {
                // The gamma ratio is monotone in k: decreasing towards 1 when
                // the regular branch grows, increasing towards 1 otherwise.
                let g = if regular_growing {
                    gammas[k + 1] / gammas[k]
                } else {
                    1.0
                };
                // h_{k+1}/h_k is nonincreasing for k >= 1 and equals n at k = 0.
                let h = if n == 2 && k >= 1 { 1.0 } else { dims[k + 1] / dims[k] };
                g * h
            })
            .collect();
        Kernel {
            n,
            alpha,
            config,
            weights,
            sup_ratio,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn config(&self) -> KernelConfig {
        self.config
    }

    /// `gamma_k(alpha)`, read back from the cached weights.
    pub fn gamma(&self, k: usize) -> f64 {
        self.weights[k] / dim_harmonics_f64(self.n, k)
    }

    /// Certified bound on `sum_{k > K} gamma_k h_k rho^k`.
    pub fn tail_bound(&self, big_k: usize, rho: f64) -> f64 {
        if rho == 0.0 {
            return 0.0;
        }
        let q = self.sup_ratio[big_k + 1] * rho;
        if q >= 1.0 {
            return f64::INFINITY;
        }
        self.weights[big_k + 1] * rho.powi(big_k as i32 + 1) / (1.0 - q)
    }

    /// Evaluates the kernel series at `(x, y)`.
    pub fn eval(&self, x: &[f64], y: &[f64]) -> Result<KernelValue> {
        require_in_ball(x, "x")?;
        require_in_ball(y, "y")?;
        self.eval_products(dot(x, y), norm_sq(x) * norm_sq(y))
    }

    /// Evaluation from `s = x . y` and `r2 = |x|^2 |y|^2`; symmetric in the
    /// two points because only these products enter.
    pub fn eval_products(&self, s: f64, r2: f64) -> Result<KernelValue> {
        let rho = r2.sqrt();
        let (mut prev, mut cur) = (0.0, 1.0);
        let mut sum = 0.0;
        let mut rho_pow = rho;
        let mut bound = f64::INFINITY;
        let max = self.config.max_terms;
        for k in 0..max {
            sum += self.weights[k] * cur;
            // bound on sum_{j > k}
            bound = if rho == 0.0 {
                0.0
            } else {
                let q = self.sup_ratio[k + 1] * rho;
                if q < 1.0 {
                    self.weights[k + 1] * rho_pow / (1.0 - q)
                } else {
                    f64::INFINITY
                }
            };
            if bound <= self.config.tol * sum.abs().max(1.0) {
                return Ok(KernelValue {
                    value: sum,
                    truncation_bound: bound,
                    terms_used: k + 1,
                });
            }
            let next = next_q(self.n, k, s, r2, cur, prev);
            prev = cur;
            cur = next;
            rho_pow *= rho;
        }
        Err(Error::Truncation {
            terms: max,
            achieved: bound,
            target: self.config.tol * sum.abs().max(1.0),
        })
    }

    /// Kernel values along a meridian: `R(x, y)` for every `t` in `ts`, where
    /// `|x||y| = rho` and `x . y = rho * t`. Returns the number of terms used.
    pub fn eval_axial(&self, rho: f64, ts: &[f64], out: &mut [f64]) -> Result<usize> {
        let big_k = self.terms_for(rho, self.majorant_scale(rho))?;
        let r2 = rho * rho;
        let m = ts.len();
        let mut prev = vec![0.0; m];
        let mut cur = vec![1.0; m];
        out[..m].iter_mut().for_each(|o| *o = 0.0);
        for k in 0..big_k {
            let w = self.weights[k];
            for i in 0..m {
                out[i] += w * cur[i];
            }
            if k + 1 == big_k {
                break;
            }
            for i in 0..m {
                let next = next_q(self.n, k, rho * ts[i], r2, cur[i], prev[i]);
                prev[i] = cur[i];
                cur[i] = next;
            }
        }
        Ok(big_k)
    }

    /// `R(x, x)` style majorant sum `sum_k gamma_k h_k rho^k`, used to scale
    /// tolerances for batched evaluation.
    fn majorant_scale(&self, rho: f64) -> f64 {
        // A cheap lower estimate of the majorant: its partial sums only grow,
        // so a short prefix is a safe relative scale.
        let mut acc = 0.0;
        let mut p = 1.0;
        for k in 0..self.weights.len().min(64) {
            acc += self.weights[k].abs() * p;
            p *= rho;
        }
        acc
    }

    /// Number of terms needed so that the tail bound is below
    /// `tol * max(1, scale)`.
    pub fn terms_for(&self, rho: f64, scale: f64) -> Result<usize> {
        let target = self.config.tol * scale.max(1.0);
        if rho == 0.0 {
            return Ok(1);
        }
        let mut rho_pow = rho;
        let mut bound = f64::INFINITY;
        for k in 0..self.config.max_terms {
            let q = self.sup_ratio[k + 1] * rho;
            if q < 1.0 {
                bound = self.weights[k + 1] * rho_pow / (1.0 - q);
                if bound <= target {
                    return Ok(k + 1);
                }
            }
            rho_pow *= rho;
        }
        Err(Error::Truncation {
            terms: self.config.max_terms,
            achieved: bound,
            target,
        })
    }

    /// Plain partial sum with exactly `terms` terms, no bound bookkeeping.
    pub fn partial_sum(&self, x: &[f64], y: &[f64], terms: usize) -> f64 {
        let s = dot(x, y);
        let r2 = norm_sq(x) * norm_sq(y);
        let (mut prev, mut cur) = (0.0, 1.0);
        let mut sum = 0.0;
        for k in 0..terms {
            sum += self.weights[k] * cur;
            let next = next_q(self.n, k, s, r2, cur, prev);
            prev = cur;
            cur = next;
        }
        sum
    }
}

/// One-shot kernel evaluation. Builds the coefficient table on every call;
/// reuse a [`Kernel`] for repeated evaluation.
pub fn kernel_eval(n: usize, alpha: f64, x: &[f64], y: &[f64], tol: f64) -> Result<KernelValue> {
    if !(tol > 0.0) {
        return Err(Error::Precondition(format!("tolerance must be positive, got {tol}")));
    }
    let config = KernelConfig {
        tol,
        max_terms: DEFAULT_MAX_TERMS,
    };
    Kernel::new(n, alpha, config).eval(x, y)
}

/// Normalizing constant `V_alpha` making `nu_alpha` a probability measure;
/// equal to 1 for `alpha <= -1`.
pub fn v_alpha(n: usize, alpha: f64) -> f64 {
    if alpha <= -1.0 || alpha == 0.0 {
        return 1.0;
    }
    let half = n as f64 / 2.0;
    (ln_gamma(half + 1.0) + ln_gamma(alpha + 1.0) - ln_gamma(half + alpha + 1.0)).exp()
}

/// `int_B |x|^{2k} d nu_beta = (n/2)_k / (n/2 + beta + 1)_k` for `beta > -1`.
pub fn radial_moment(n: usize, beta: f64, k: usize) -> f64 {
    let half = n as f64 / 2.0;
    (0..k).fold(1.0, |acc, j| {
        let j = j as f64;
        acc * (half + j) / (half + beta + 1.0 + j)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn pochhammer_cases() {
        assert_eq!(pochhammer(7.3, 0), 1.0);
        assert_eq!(pochhammer(1.0, 5), 120.0);
        assert_relative_eq!(pochhammer(3.5, 4), 563.0625, max_relative = 1e-15);
        assert_relative_eq!(
            pochhammer_real(3.5, 4.0).unwrap(),
            563.0625,
            max_relative = 1e-15
        );
        assert_relative_eq!(
            pochhammer_real(0.5, 0.5).unwrap(),
            1.0 / std::f64::consts::PI.sqrt(),
            max_relative = 1e-12
        );
        assert!(matches!(pochhammer_real(-2.0, 0.5), Err(Error::Domain(_))));
        assert!(matches!(pochhammer_real(-0.5, -0.5), Err(Error::Domain(_))));
    }

    #[test]
    fn gamma_k_closed_forms() {
        for n in 2..6 {
            for k in 0..30 {
                assert_relative_eq!(
                    gamma_k(n, 0.0, k),
                    1.0 + 2.0 * k as f64 / n as f64,
                    max_relative = 1e-13
                );
            }
        }
        for k in 0..40 {
            assert_relative_eq!(gamma_k(2, -2.0, k), 1.0 / (k as f64 + 1.0), max_relative = 1e-13);
        }
        assert_eq!(gamma_k(3, -17.25, 0), 1.0);
    }

    #[test]
    fn branch_split_is_strict() {
        assert_eq!(branch(2, -1.999), Branch::Regular);
        assert_eq!(branch(2, -2.0), Branch::Factorial);
        assert_eq!(branch(4, -3.0), Branch::Factorial);
        // the two formulas disagree at the split point
        let factorial = gamma_k(2, -2.0, 3);
        let regular = pochhammer(1.0 + 1.0 - 2.0, 3) / pochhammer(1.0, 3);
        assert!((factorial - regular).abs() > 0.1);
    }

    #[test]
    fn cache_matches_direct_products() {
        let mut c = KernelCoeffs::new(3, 1.7);
        assert_relative_eq!(c.get(25), gamma_k(3, 1.7, 25), max_relative = 1e-14);
        assert_eq!(c.upto(4).len(), 5);
        let mut shifted = KernelCoeffs::with_index_shift(3, 1.7, 1);
        assert_relative_eq!(shifted.get(0), gamma_k(3, 1.7, 1), max_relative = 1e-14);
    }

    #[test]
    fn harmonic_dimensions() {
        for n in 2..7 {
            assert_eq!(dim_harmonics(n, 0), 1);
            assert_eq!(dim_harmonics(n, 1), n as u64);
        }
        for k in 1..50 {
            assert_eq!(dim_harmonics(2, k), 2);
            assert_eq!(dim_harmonics(3, k), 2 * k as u64 + 1);
        }
        for n in 2..8 {
            for k in 0..40 {
                assert_relative_eq!(
                    dim_harmonics_f64(n, k),
                    dim_harmonics(n, k) as f64,
                    max_relative = 1e-12
                );
            }
        }
    }

    #[test]
    fn zonal_low_degrees() {
        let x = [0.3, -0.2, 0.5];
        let y = [-0.1, 0.4, 0.7];
        assert_eq!(zonal(3, 0, &x, &y), 1.0);
        assert_relative_eq!(zonal(3, 1, &x, &y), 3.0 * dot(&x, &y), max_relative = 1e-14);
        assert_eq!(zonal(3, 4, &[0.0; 3], &y), 0.0);
    }

    #[test]
    fn zonal_plane_is_chebyshev() {
        for k in 1..40 {
            for &theta in &[0.0, 0.3, 1.1, 2.9] {
                let x = [1.0, 0.0];
                let y = [f64::cos(theta), f64::sin(theta)];
                let z = zonal(2, k, &x, &y);
                assert!((z - 2.0 * (k as f64 * theta).cos()).abs() < 1e-11, "k={k} theta={theta}");
            }
        }
    }

    #[test]
    fn zonal_all_agrees_with_single() {
        let x = [0.2, 0.1, -0.4, 0.3];
        let y = [0.5, -0.2, 0.1, 0.0];
        let all = zonal_all(4, 12, &x, &y);
        for (k, z) in all.iter().enumerate() {
            assert_relative_eq!(*z, zonal(4, k, &x, &y), max_relative = 1e-13, epsilon = 1e-16);
        }
    }

    #[test]
    fn kernel_at_origin_is_one() {
        for &alpha in &[-5.0, -2.0, -0.5, 0.0, 3.0] {
            let v = kernel_eval(3, alpha, &[0.2, 0.3, -0.1], &[0.0; 3], 1e-12).unwrap();
            assert_eq!(v.value, 1.0);
            assert_eq!(v.truncation_bound, 0.0);
        }
    }

    #[test]
    fn kernel_plane_weight_zero_brute_force() {
        // n = 2, alpha = 0: gamma_k = 1 + k, Z_k = 2 (|x||y|)^k cos(k theta)
        let x = [0.5, 0.0];
        let v = kernel_eval(2, 0.0, &x, &x, 1e-12).unwrap();
        let brute: f64 = 1.0 + (1..=200).map(|k| (1.0 + k as f64) * 2.0 * 0.25f64.powi(k)).sum::<f64>();
        assert!((v.value - brute).abs() < 1e-10);
        // closed form 2/(1 - 1/4)^2 - 1
        assert_relative_eq!(v.value, 2.0 / 0.5625 - 1.0, max_relative = 1e-12);
    }

    #[test]
    fn tail_bound_is_monotone() {
        let k = Kernel::new(3, 1.5, KernelConfig::default());
        let rho = 0.7;
        let mut last = f64::INFINITY;
        for big_k in 0..200 {
            let b = k.tail_bound(big_k, rho);
            assert!(b <= last, "bound increased at K = {big_k}");
            last = b;
        }
    }

    #[test]
    fn truncation_error_reports_bound() {
        let cfg = KernelConfig {
            tol: 1e-12,
            max_terms: 50,
        };
        let k = Kernel::new(2, 1.0, cfg);
        let err = k.eval(&[0.999, 0.0], &[0.999, 0.0]).unwrap_err();
        match err {
            Error::Truncation { terms, achieved, .. } => {
                assert_eq!(terms, 50);
                assert!(achieved > 1e-12);
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn outside_ball_is_rejected() {
        assert!(matches!(
            kernel_eval(2, 0.0, &[1.0, 0.0], &[0.0, 0.0], 1e-12),
            Err(Error::Parameter { .. })
        ));
    }

    #[test]
    fn axial_batch_matches_pointwise() {
        let k = Kernel::new(3, 0.5, KernelConfig::default());
        let rho = 0.6;
        let ts = [-1.0, -0.3, 0.0, 0.5, 0.99, 1.0];
        let mut out = vec![0.0; ts.len()];
        k.eval_axial(rho, &ts, &mut out).unwrap();
        for (t, o) in ts.iter().zip(&out) {
            let r = rho.sqrt();
            let x = [r, 0.0, 0.0];
            let y = [r * t, r * (1.0 - t * t).max(0.0).sqrt(), 0.0];
            let v = k.eval(&x, &y).unwrap();
            assert!((o - v.value).abs() < 1e-10);
        }
    }

    #[test]
    fn v_alpha_values() {
        for n in 2..6 {
            assert_eq!(v_alpha(n, 0.0), 1.0);
            assert_eq!(v_alpha(n, -1.0), 1.0);
            assert_eq!(v_alpha(n, -3.5), 1.0);
        }
        assert_relative_eq!(v_alpha(2, 1.0), 0.5, max_relative = 1e-14);
        // n = 3, alpha = 1: Gamma(5/2) Gamma(2) / Gamma(7/2) = 2/5
        assert_relative_eq!(v_alpha(3, 1.0), 0.4, max_relative = 1e-13);
    }

    #[test]
    fn radial_moment_is_beta_ratio() {
        // n = 2, beta = 0: int |x|^{2k} d nu = 1/(k+1)
        for k in 0..10 {
            assert_relative_eq!(radial_moment(2, 0.0, k), 1.0 / (k as f64 + 1.0), max_relative = 1e-14);
        }
    }
}
