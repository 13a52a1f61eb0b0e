//! Orthonormal bases of `b^2_alpha` made of solid spherical harmonics, for
//! `n = 2` (trigonometric pairs) and `n = 3` (real spherical harmonics).
//!
//! The inner product is the `(s, u)` realization
//! `[f, g] = (1/V_alpha) int D^u_s f D^u_s g (1 - |x|^2)^Phi dnu` with
//! `u = s - alpha` and `Phi = 2s - alpha`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::calculus::dts_multipliers;
use crate::error::{condition, Error, Result};
use crate::kernel::{dim_harmonics, radial_moment, v_alpha, zonal};
use crate::polynomial::HarmonicPolynomial;

/// Truncated basis parameters: all harmonics of degree at most `max_degree`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BasisSpec {
    pub n: usize,
    pub alpha: f64,
    pub s: f64,
    pub max_degree: usize,
}

impl BasisSpec {
    pub fn new(n: usize, alpha: f64, s: f64, max_degree: usize) -> Self {
        BasisSpec {
            n,
            alpha,
            s,
            max_degree,
        }
    }

    /// `u = s - alpha`.
    pub fn u(&self) -> f64 {
        self.s - self.alpha
    }

    /// `Phi = 2s - alpha`.
    pub fn phi(&self) -> f64 {
        2.0 * self.s - self.alpha
    }

    pub fn with_degree(&self, max_degree: usize) -> Self {
        BasisSpec { max_degree, ..*self }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n != 2 && self.n != 3 {
            return Err(Error::UnsupportedDimension(self.n));
        }
        if !(self.phi() > -1.0) {
            return Err(Error::param(
                condition::SCHATTEN_WEIGHT,
                format!("2s - alpha = 2*{} - {} = {}", self.s, self.alpha, self.phi()),
            ));
        }
        Ok(())
    }

    /// `sum_{k <= K} h_k`.
    pub fn size(&self) -> usize {
        (0..=self.max_degree).map(|k| dim_harmonics(self.n, k) as usize).sum()
    }
}

/// Which trigonometric factor a basis element carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Parity {
    Zonal,
    Cos,
    Sin,
}

/// Degree `k`, azimuthal order `m` and parity of one basis element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Label {
    pub degree: usize,
    pub order: usize,
    pub parity: Parity,
}

#[derive(Debug, Clone)]
pub struct Basis {
    spec: BasisSpec,
    labels: Vec<Label>,
    /// `1 / ||Y_k||` per degree, with `Y` sphere-orthonormal.
    scale: Vec<f64>,
    /// `gamma_k(Phi) / gamma_k(s)`.
    multiplier: Vec<f64>,
}

impl Basis {
    pub fn new(spec: BasisSpec) -> Result<Self> {
        spec.validate()?;
        let k_max = spec.max_degree;
        let mut labels = Vec::with_capacity(spec.size());
        for k in 0..=k_max {
            labels.push(Label {
                degree: k,
                order: if spec.n == 2 { k } else { 0 },
                parity: if k == 0 || spec.n == 3 { Parity::Zonal } else { Parity::Cos },
            });
            if spec.n == 2 {
                if k > 0 {
                    labels.push(Label {
                        degree: k,
                        order: k,
                        parity: Parity::Sin,
                    });
                }
            } else {
                for m in 1..=k {
                    for parity in [Parity::Cos, Parity::Sin] {
                        labels.push(Label { degree: k, order: m, parity });
                    }
                }
            }
        }
        let multiplier = dts_multipliers(spec.n, spec.s, spec.u(), k_max);
        let scale = (0..=k_max)
            .map(|k| 1.0 / norm_sq_closed_form(&spec, multiplier[k], k).sqrt())
            .collect();
        Ok(Basis {
            spec,
            labels,
            scale,
            multiplier,
        })
    }

    pub fn spec(&self) -> &BasisSpec {
        &self.spec
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    /// `gamma_k(Phi) / gamma_k(s)`, the action of `D^u_s` on degree `k`.
    pub fn multiplier(&self, k: usize) -> f64 {
        self.multiplier[k]
    }

    /// `1 / ||Y_k||_{b^2_alpha}` for sphere-orthonormal `Y` of degree `k`.
    pub fn scale(&self, k: usize) -> f64 {
        self.scale[k]
    }

    /// Sphere-orthonormal solid harmonics `Y_i(x)` in basis order.
    pub fn harmonics(&self, x: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len());
        match self.spec.n {
            2 => harmonics_2d(x, self.spec.max_degree, &mut out),
            _ => harmonics_3d(x, self.spec.max_degree, &mut out),
        }
        out
    }

    /// Orthonormal basis values `e_i(x)`.
    pub fn values(&self, x: &[f64]) -> Vec<f64> {
        let mut v = self.harmonics(x);
        for (v, l) in v.iter_mut().zip(&self.labels) {
            *v *= self.scale[l.degree];
        }
        v
    }

    /// `D^u_s e_i(x)`.
    pub fn derivative_values(&self, x: &[f64]) -> Vec<f64> {
        let mut v = self.harmonics(x);
        for (v, l) in v.iter_mut().zip(&self.labels) {
            *v *= self.scale[l.degree] * self.multiplier[l.degree];
        }
        v
    }

    /// Basis element `e_i` as a sum of zonal atoms, solved from its values at
    /// `h_k` spread poles (the Gram matrix `Z_k(eta_j, eta_l)` is invertible
    /// exactly when evaluation at the poles is injective on degree `k`).
    pub fn polynomial(&self, i: usize) -> Result<HarmonicPolynomial> {
        let label = self.labels[i];
        let (n, k) = (self.spec.n, label.degree);
        let poles = spread_poles(n, k);
        let h = poles.len();
        let gram = DMatrix::from_fn(h, h, |j, l| zonal(n, k, &poles[j], &poles[l]));
        let rhs = DVector::from_iterator(h, poles.iter().map(|p| self.values(p)[i]));
        let coeffs = gram
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::Domain(format!("singular pole configuration at degree {k}")))?;
        let mut f = HarmonicPolynomial::zero(n);
        for (c, p) in coeffs.iter().zip(poles) {
            f.push_atom(k, *c, p);
        }
        Ok(f)
    }
}

/// `||Y_k||^2_{b^2_alpha} = m_k^2 (V_Phi / V_alpha) int r^{2k} dnu_Phi`.
pub fn norm_sq_closed_form(spec: &BasisSpec, multiplier: f64, k: usize) -> f64 {
    let phi = spec.phi();
    multiplier * multiplier * v_alpha(spec.n, phi) / v_alpha(spec.n, spec.alpha)
        * radial_moment(spec.n, phi, k)
}

fn harmonics_2d(x: &[f64], k_max: usize, out: &mut Vec<f64>) {
    let sq2 = std::f64::consts::SQRT_2;
    out.push(1.0);
    let (mut re, mut im) = (1.0, 0.0);
    for _ in 1..=k_max {
        (re, im) = (re * x[0] - im * x[1], re * x[1] + im * x[0]);
        out.push(sq2 * re);
        out.push(sq2 * im);
    }
}

/// Real solid harmonics `U_k^m(x_3, |x|^2) Re/Im (x_1 + i x_2)^m`, with `U`
/// from the fully normalized associated Legendre recurrences made
/// homogeneous.
fn harmonics_3d(x: &[f64], k_max: usize, out: &mut Vec<f64>) {
    let (z, r2) = (x[2], x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
    // u[m][k - m] = U_k^m
    let mut u: Vec<Vec<f64>> = Vec::with_capacity(k_max + 1);
    let mut diag = 1.0;
    for m in 0..=k_max {
        if m == 1 {
            diag = 3f64.sqrt();
        } else if m > 1 {
            diag *= ((2 * m + 1) as f64 / (2 * m) as f64).sqrt();
        }
        let mut col = vec![diag];
        if m < k_max {
            col.push((2.0 * m as f64 + 3.0).sqrt() * z * diag);
        }
        for k in m + 2..=k_max {
            let (kf, mf) = (k as f64, m as f64);
            let a = ((4.0 * kf * kf - 1.0) / (kf * kf - mf * mf)).sqrt();
            let b = (((kf - 1.0) * (kf - 1.0) - mf * mf) / (4.0 * (kf - 1.0) * (kf - 1.0) - 1.0)).sqrt();
            let next = a * (z * col[k - m - 1] - b * r2 * col[k - m - 2]);
            col.push(next);
        }
        u.push(col);
    }
    let mut powers = Vec::with_capacity(k_max + 1);
    let (mut re, mut im) = (1.0, 0.0);
    powers.push((re, im));
    for _ in 1..=k_max {
        (re, im) = (re * x[0] - im * x[1], re * x[1] + im * x[0]);
        powers.push((re, im));
    }
    for k in 0..=k_max {
        out.push(u[0][k]);
        for m in 1..=k {
            let (re, im) = powers[m];
            out.push(u[m][k - m] * re);
            out.push(u[m][k - m] * im);
        }
    }
}

/// `h_k` unit vectors on which degree-`k` harmonics are determined by their
/// values: two angles a quarter period apart for `n = 2`; for `n = 3`, a
/// greedy pivoted-Cholesky pick from a golden-angle spiral, which keeps the
/// Gram matrix well conditioned.
fn spread_poles(n: usize, k: usize) -> Vec<Vec<f64>> {
    if k == 0 {
        return vec![crate::vector::unit(n, 0)];
    }
    if n == 2 {
        let th = std::f64::consts::PI / (2.0 * k as f64);
        return vec![vec![1.0, 0.0], vec![th.cos(), th.sin()]];
    }
    let h = 2 * k + 1;
    let count = 4 * h;
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    let cands: Vec<Vec<f64>> = (0..count)
        .map(|j| {
            let z = 1.0 - (2.0 * j as f64 + 1.0) / count as f64;
            let s = (1.0 - z * z).sqrt();
            let ph = golden * j as f64;
            vec![s * ph.cos(), s * ph.sin(), z]
        })
        .collect();
    let mut resid: Vec<f64> = cands.iter().map(|c| zonal(n, k, c, c)).collect();
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(h);
    let mut picked = Vec::with_capacity(h);
    for _ in 0..h {
        let (best, piv) = resid
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, v)| if *v > acc.1 { (i, *v) } else { acc });
        let root = piv.sqrt();
        let row: Vec<f64> = (0..count)
            .map(|j| {
                let dot: f64 = rows.iter().map(|r| r[best] * r[j]).sum();
                (zonal(n, k, &cands[best], &cands[j]) - dot) / root
            })
            .collect();
        for (r, v) in resid.iter_mut().zip(&row) {
            *r -= v * v;
        }
        resid[best] = f64::NEG_INFINITY;
        rows.push(row);
        picked.push(cands[best].clone());
    }
    picked
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::inner_product_u;
    use crate::polynomial::random_unit;
    use crate::quadrature::QuadratureRule;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn sizes() {
        assert_eq!(Basis::new(BasisSpec::new(2, 0.0, 0.0, 10)).unwrap().len(), 21);
        assert_eq!(Basis::new(BasisSpec::new(3, 0.0, 0.0, 4)).unwrap().len(), 25);
        assert_eq!(BasisSpec::new(3, 0.0, 0.0, 4).size(), 25);
        assert!(matches!(
            Basis::new(BasisSpec::new(4, 0.0, 0.0, 2)),
            Err(Error::UnsupportedDimension(4))
        ));
        assert!(matches!(
            Basis::new(BasisSpec::new(2, 1.0, -0.5, 2)),
            Err(Error::Parameter { .. })
        ));
    }

    #[test]
    fn constant_element() {
        let spec = BasisSpec::new(2, 0.5, 1.0, 3);
        let b = Basis::new(spec).unwrap();
        let expected = (v_alpha(2, 0.5) / v_alpha(2, spec.phi())).sqrt();
        assert_relative_eq!(b.values(&[0.3, 0.1])[0], expected, max_relative = 1e-14);
    }

    #[test]
    fn addition_theorem() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in [2, 3] {
            let b = Basis::new(BasisSpec::new(n, 0.0, 0.0, 9)).unwrap();
            let x = crate::vector::scale(0.8, &random_unit(n, &mut rng));
            let y = crate::vector::scale(0.6, &random_unit(n, &mut rng));
            let (yx, yy) = (b.harmonics(&x), b.harmonics(&y));
            for k in 0..=9 {
                let s: f64 = b
                    .labels()
                    .iter()
                    .enumerate()
                    .filter(|(_, l)| l.degree == k)
                    .map(|(i, _)| yx[i] * yy[i])
                    .sum();
                assert_relative_eq!(s, zonal(n, k, &x, &y), epsilon = 1e-12, max_relative = 1e-11);
            }
        }
    }

    #[test]
    fn gram_is_identity() {
        for (n, alpha, s) in [(2, 0.0, 0.5), (3, -1.5, 0.0), (2, -3.0, -0.5)] {
            let spec = BasisSpec::new(n, alpha, s, 4);
            let b = Basis::new(spec).unwrap();
            let rule = QuadratureRule::new(n, spec.phi(), 16).unwrap();
            let polys: Vec<HarmonicPolynomial> = (0..b.len()).map(|i| b.polynomial(i).unwrap()).collect();
            for i in 0..b.len() {
                for j in 0..=i {
                    let g = inner_product_u(alpha, s, spec.u(), &polys[i], &polys[j], &rule).unwrap();
                    let target = if i == j { 1.0 } else { 0.0 };
                    assert!((g - target).abs() < 1e-8, "n={n} ({i},{j}) {g}");
                }
            }
        }
    }

    #[test]
    fn polynomial_matches_values() {
        let b = Basis::new(BasisSpec::new(3, 0.0, 0.0, 6)).unwrap();
        let x = [0.2, -0.4, 0.5];
        let vals = b.values(&x);
        for (i, v) in vals.iter().enumerate() {
            assert_relative_eq!(b.polynomial(i).unwrap().evaluate(&x), *v, epsilon = 1e-12);
        }
    }
}
