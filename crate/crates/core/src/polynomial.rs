//! Harmonic polynomials stored as sums of zonal atoms.
//!
//! A degree-`k` part is `f_k(x) = sum_j c_j Z_k(x, eta_j)` with unit poles
//! `eta_j`. Every such sum is harmonic and homogeneous of degree `k`, the
//! representation is dimension-free, and radial multipliers such as `D^t_s`
//! act by rescaling coefficients.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::kernel::{dim_harmonics_f64, zonal_all};
use crate::vector::{direction, norm_sq};

/// A coefficient and the unit pole of one zonal atom.
#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    pub coeff: f64,
    pub pole: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicPolynomial {
    n: usize,
    parts: BTreeMap<usize, Vec<Atom>>,
}

impl HarmonicPolynomial {
    pub fn zero(n: usize) -> Self {
        assert!(n >= 2, "dimension must be at least 2");
        HarmonicPolynomial {
            n,
            parts: BTreeMap::new(),
        }
    }

    pub fn constant(n: usize, c: f64) -> Self {
        let mut f = HarmonicPolynomial::zero(n);
        f.push_atom(0, c, crate::vector::unit(n, 0));
        f
    }

    /// `c * Z_k(., pole)`; the pole is normalized to unit length.
    pub fn zonal_atom(n: usize, k: usize, pole: &[f64], c: f64) -> Self {
        let mut f = HarmonicPolynomial::zero(n);
        f.push_atom(k, c, pole.to_vec());
        f
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn push_atom(&mut self, k: usize, coeff: f64, pole: Vec<f64>) {
        assert_eq!(pole.len(), self.n, "pole dimension mismatch");
        let pole = direction(&pole);
        self.parts.entry(k).or_default().push(Atom { coeff, pole });
    }

    pub fn parts(&self) -> &BTreeMap<usize, Vec<Atom>> {
        &self.parts
    }

    /// Highest degree with at least one atom, `None` for the empty polynomial.
    pub fn max_degree(&self) -> Option<usize> {
        self.parts.keys().next_back().copied()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.values().all(|a| a.is_empty())
    }

    /// Values of the homogeneous parts `f_0(x), ..., f_K(x)` with `K` the max degree.
    ///
    /// Atoms sharing a pole across degrees reuse one run of the zonal
    /// recurrence.
    pub fn eval_parts(&self, x: &[f64]) -> Vec<f64> {
        let Some(top) = self.max_degree() else {
            return vec![];
        };
        let mut poles: Vec<(&[f64], usize)> = vec![];
        let mut index = vec![];
        for (&k, atoms) in &self.parts {
            for a in atoms {
                match poles.iter().position(|(p, _)| *p == a.pole.as_slice()) {
                    Some(j) => {
                        poles[j].1 = poles[j].1.max(k);
                        index.push(j);
                    }
                    None => {
                        index.push(poles.len());
                        poles.push((&a.pole, k));
                    }
                }
            }
        }
        let zonals: Vec<Vec<f64>> = poles.iter().map(|(p, k)| zonal_all(self.n, *k, x, p)).collect();
        let mut out = vec![0.0; top + 1];
        let mut j = index.iter();
        for (&k, atoms) in &self.parts {
            for a in atoms {
                out[k] += a.coeff * zonals[*j.next().expect("one index per atom")][k];
            }
        }
        out
    }

    pub fn evaluate(&self, x: &[f64]) -> f64 {
        self.eval_parts(x).iter().sum()
    }

    /// `sum_k m(k) f_k(x)`: evaluation after a degree-diagonal multiplier.
    pub fn evaluate_scaled(&self, x: &[f64], multipliers: &[f64]) -> f64 {
        self.eval_parts(x)
            .iter()
            .zip(multipliers)
            .map(|(v, m)| v * m)
            .sum()
    }

    /// Applies the multiplier `m(k)` to each degree-`k` part.
    pub fn map_degrees(&self, mut m: impl FnMut(usize) -> f64) -> Self {
        let parts = self
            .parts
            .iter()
            .map(|(&k, atoms)| {
                let c = m(k);
                let scaled = atoms
                    .iter()
                    .map(|a| Atom {
                        coeff: c * a.coeff,
                        pole: a.pole.clone(),
                    })
                    .collect();
                (k, scaled)
            })
            .collect();
        HarmonicPolynomial { n: self.n, parts }
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map_degrees(|_| c)
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n, "dimension mismatch");
        let mut out = self.clone();
        for (&k, atoms) in &other.parts {
            out.parts.entry(k).or_default().extend(atoms.iter().cloned());
        }
        out
    }

    /// Only the degree-`k` part.
    pub fn part(&self, k: usize) -> Self {
        let mut out = HarmonicPolynomial::zero(self.n);
        if let Some(a) = self.parts.get(&k) {
            out.parts.insert(k, a.clone());
        }
        out
    }

    /// Central finite-difference Laplacian at `x` with step `h`.
    pub fn laplacian_fd(&self, x: &[f64], h: f64) -> f64 {
        let f0 = self.evaluate(x);
        let mut y = x.to_vec();
        let mut acc = 0.0;
        for i in 0..self.n {
            y[i] = x[i] + h;
            let fp = self.evaluate(&y);
            y[i] = x[i] - h;
            let fm = self.evaluate(&y);
            y[i] = x[i];
            acc += fp - 2.0 * f0 + fm;
        }
        acc / (h * h)
    }

    /// Scale for relative Laplacian residuals: the sum over parts of
    /// `|c| h_k k^2 |x|^{k-2}`, an upper bound on second derivatives.
    pub fn second_derivative_scale(&self, x: &[f64]) -> f64 {
        let r = norm_sq(x).sqrt().max(1e-3);
        self.parts
            .iter()
            .map(|(&k, atoms)| {
                let c: f64 = atoms.iter().map(|a| a.coeff.abs()).sum();
                let kf = k as f64;
                c * dim_harmonics_f64(self.n, k) * kf * kf * r.powi(k as i32 - 2)
            })
            .sum::<f64>()
            .max(f64::MIN_POSITIVE)
    }
}

/// Atoms per degree used by [`random_polynomial`].
pub const RANDOM_ATOMS_PER_DEGREE: usize = 2;

/// Reproducible random harmonic polynomial: for each degree up to
/// `max_degree`, a few zonal atoms with uniform poles and standard normal
/// coefficients.
pub fn random_polynomial(n: usize, max_degree: usize, seed: u64) -> HarmonicPolynomial {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut f = HarmonicPolynomial::zero(n);
    for k in 0..=max_degree {
        let atoms = if k == 0 { 1 } else { RANDOM_ATOMS_PER_DEGREE };
        for _ in 0..atoms {
            let c: f64 = StandardNormal.sample(&mut rng);
            let pole = random_unit(n, &mut rng);
            f.push_atom(k, c, pole);
        }
    }
    f
}

pub fn random_unit(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
        if norm_sq(&v) > 1e-12 {
            return direction(&v);
        }
    }
}

/// Uniform point in the ball of radius `rmax`.
pub fn random_in_ball(n: usize, rmax: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    use rand::Rng;
    let u: f64 = rng.random();
    let r = rmax * u.powf(1.0 / n as f64);
    random_unit(n, rng).into_iter().map(|c| r * c).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vector::unit;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn constants_and_empty() {
        let one = HarmonicPolynomial::constant(3, 1.0);
        assert_eq!(one.evaluate(&[0.3, 0.1, -0.2]), 1.0);
        let z = HarmonicPolynomial::zero(2);
        assert_eq!(z.evaluate(&[0.3, 0.1]), 0.0);
        assert!(z.is_empty());
        assert_eq!(z.max_degree(), None);
    }

    #[test]
    fn linear_atom_is_scaled_coordinate() {
        for n in 2..6 {
            let f = HarmonicPolynomial::zonal_atom(n, 1, &unit(n, 0), 1.0);
            let mut x = vec![0.1; n];
            x[0] = 0.37;
            assert_relative_eq!(f.evaluate(&x), n as f64 * 0.37, max_relative = 1e-14);
        }
    }

    #[test]
    fn value_at_origin_is_constant_term() {
        let f = random_polynomial(3, 6, 11);
        let c0 = f.parts()[&0][0].coeff;
        assert_eq!(f.evaluate(&[0.0; 3]), c0);
    }

    #[test]
    fn random_is_reproducible() {
        assert_eq!(random_polynomial(3, 5, 42), random_polynomial(3, 5, 42));
        assert_ne!(random_polynomial(3, 5, 42), random_polynomial(3, 5, 43));
        assert_eq!(random_polynomial(2, 0, 1).max_degree(), Some(0));
    }

    proptest! {
        #[test]
        fn random_polynomials_are_harmonic(seed in 0u64..1000, n in 2usize..5) {
            let f = random_polynomial(n, 6, seed);
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabc);
            let x = random_in_ball(n, 0.8, &mut rng);
            let lap = f.laplacian_fd(&x, 1e-4);
            prop_assert!(lap.abs() <= 1e-6 * f.second_derivative_scale(&x) + 1e-9,
                "laplacian {lap}");
        }

        #[test]
        fn multipliers_act_per_degree(seed in 0u64..500) {
            let f = random_polynomial(3, 5, seed);
            let g = f.map_degrees(|k| 1.0 + k as f64);
            let x = [0.2, -0.4, 0.3];
            let direct: f64 = f.eval_parts(&x).iter().enumerate().map(|(k, v)| (1.0 + k as f64) * v).sum();
            prop_assert!((g.evaluate(&x) - direct).abs() < 1e-12 * (1.0 + direct.abs()));
        }
    }
}
