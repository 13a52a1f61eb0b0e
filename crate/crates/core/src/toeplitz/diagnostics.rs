//! Operator-level checks built on truncated matrices: the intertwining
//! relation with `D^t_s`, a one-dimensional oracle for radial measures, the
//! trace against the integrated Berezin transform, Schatten ladders, and
//! Monte Carlo boundedness estimates between Besov spaces.

use std::collections::HashMap;
use std::sync::Mutex;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::basis::{Basis, BasisSpec};
use super::matrix::{default_level, toeplitz_matrix};
use super::spectrum::spectrum;
use crate::calculus::{besov_norm, dts_multipliers, SpaceParams};
use crate::carleson::{
    carleson_statistic, growth_exponent, horizon_w, lattice_masses, tail_w, transform_lp_norm,
    CarlesonReport, LpNormReport, GROWTH_THRESHOLD, TRIAL_DEGREE,
};
use crate::error::{condition, Error, Result};
use crate::geometry::Lattice;
use crate::kernel::{pochhammer, radial_moment, v_alpha, Kernel, KernelCoeffs, KernelConfig};
use crate::measure::{berezin2_expanded, kappa_from_mu, Density, Measure};
use crate::polynomial::{random_polynomial, HarmonicPolynomial};
use crate::quadrature::QuadratureRule;
use crate::vector::{direction, norm, norm_sq};

/// Kernel series near the boundary need more terms than the default budget
/// allows past this radius, so Berezin integrals stop here.
pub const MAX_BEREZIN_HORIZON: f64 = 0.999;

/// Angular level of the Berezin integrals.
pub const BEREZIN_LEVEL: usize = 32;

/// Relative change of `S_p` between the two largest truncations below which
/// a ladder counts as converged.
pub const LADDER_TOL: f64 = 0.01;

/// Degree cap for `T_mu f` when `mu` has atoms: the kernel series is cut here.
pub const MAX_OUTPUT_DEGREE: usize = 60;

/// `G_ij = int Y_i Y_j (1 - |y|^2)^extra dmu` for the sphere-orthonormal solid
/// harmonics of `basis`.
fn harmonic_gram(basis: &Basis, mu: &Measure, extra: f64, level: usize) -> Result<DMatrix<f64>> {
    let size = basis.len();
    let mut g = DMatrix::<f64>::zeros(size, size);
    for a in &mu.atoms {
        let y = basis.harmonics(&a.x);
        let w = a.w * (1.0 - norm_sq(&a.x)).powf(extra);
        for i in 0..size {
            for j in 0..=i {
                g[(i, j)] += w * y[i] * y[j];
            }
        }
    }
    if let Some(d) = &mu.density {
        let e = d.exponent() + extra;
        if !(e > -1.0) {
            return Err(Error::param(
                condition::FINITE_WEIGHT,
                format!("reweighted density exponent {e}"),
            ));
        }
        let rule = QuadratureRule::new(mu.n, e, level)?;
        let tri = size * (size + 1) / 2;
        let sums = rule.integrate_many(tri, |x, out| {
            let y = basis.harmonics(x);
            let s = d.smooth(norm(x));
            let mut idx = 0;
            for i in 0..size {
                for j in 0..=i {
                    out[idx] = s * y[i] * y[j];
                    idx += 1;
                }
            }
        });
        let c = v_alpha(mu.n, e);
        let mut idx = 0;
        for i in 0..size {
            for j in 0..=i {
                g[(i, j)] += c * sums[idx];
                idx += 1;
            }
        }
    }
    for i in 0..size {
        for j in 0..i {
            g[(j, i)] = g[(i, j)];
        }
    }
    Ok(g)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntertwineReport {
    pub spec: BasisSpec,
    pub t: f64,
    /// `gamma_k(s + t) / gamma_k(s)` per degree.
    pub multipliers: Vec<f64>,
    /// Largest entry of `D^t_s T_mu` in absolute value.
    pub scale: f64,
    /// Largest entry of `D^t_s T_mu - T_kappa D^t_s`.
    pub residual: f64,
    pub relative_residual: f64,
}

/// Both sides of `D^t_s T_mu = T_kappa D^t_s` on harmonics of degree at most
/// `K`, as coefficient matrices in the sphere-orthonormal solid harmonics.
///
/// The left side integrates `(1 - |y|^2)^{s - alpha + t}` against `mu` and
/// applies `D^t_s` before and after; the right side integrates against
/// `kappa` with the kernel `R_{s+t}` and applies `D^t_s` to the input only.
/// Both carry the prefactor `V_alpha / V_s` of `T_mu`.
pub fn intertwine_matrices(
    mu: &Measure,
    spec: BasisSpec,
    t: f64,
    level: Option<usize>,
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let basis = Basis::new(spec)?;
    if mu.n != spec.n {
        return Err(Error::Domain(format!(
            "measure lives in dimension {} but the basis in {}",
            mu.n, spec.n
        )));
    }
    let (n, s, alpha, k_max) = (spec.n, spec.s, spec.alpha, spec.max_degree);
    let level = level.unwrap_or_else(|| default_level(&spec));
    let m = dts_multipliers(n, s, t, k_max);
    let gamma_s = KernelCoeffs::new(n, s).upto(k_max);
    let gamma_st = KernelCoeffs::new(n, s + t).upto(k_max);
    let pre = v_alpha(n, alpha) / v_alpha(n, s);
    let deg: Vec<usize> = basis.labels().iter().map(|l| l.degree).collect();

    let g_mu = harmonic_gram(&basis, mu, s - alpha + t, level)?;
    let lhs = DMatrix::from_fn(basis.len(), basis.len(), |i, j| {
        m[deg[i]] * pre * gamma_s[deg[i]] * m[deg[j]] * g_mu[(i, j)]
    });
    let kappa = kappa_from_mu(mu, s, t, alpha);
    let g_kappa = harmonic_gram(&basis, &kappa, 0.0, level)?;
    let rhs = DMatrix::from_fn(basis.len(), basis.len(), |i, j| {
        pre * gamma_st[deg[i]] * g_kappa[(i, j)] * m[deg[j]]
    });
    Ok((lhs, rhs))
}

/// Max-entry residual of the intertwining relation.
pub fn intertwine_check(mu: &Measure, spec: BasisSpec, t: f64, level: Option<usize>) -> Result<IntertwineReport> {
    let (lhs, rhs) = intertwine_matrices(mu, spec, t, level)?;
    let scale = lhs.amax();
    let residual = (&lhs - &rhs).amax();
    Ok(IntertwineReport {
        spec,
        t,
        multipliers: dts_multipliers(spec.n, spec.s, t, spec.max_degree),
        scale,
        residual,
        relative_residual: if scale > 0.0 { residual / scale } else { residual },
    })
}

/// Diagonal of the operator matrix of a radial measure, one entry per basis
/// element, from one-dimensional radial integrals.
///
/// For a power weight `S (1 - |y|^2)^e dnu` the entry of degree `k` is
/// `S (V_alpha V_{e'} / V_Phi) (n/2 + Phi + 1)_k / (n/2 + e' + 1)_k` with
/// `e' = e + 2u`.
pub fn radial_oracle(mu: &Measure, spec: BasisSpec) -> Result<Vec<f64>> {
    let basis = Basis::new(spec)?;
    if !mu.is_radial() {
        return Err(Error::Precondition("radial oracle needs a measure without atoms".into()));
    }
    let n = spec.n;
    let half = n as f64 / 2.0;
    let phi = spec.phi();
    let two_u = 2.0 * spec.u();
    let ratio = v_alpha(n, spec.alpha) / v_alpha(n, phi);
    let per_degree: Vec<f64> = (0..=spec.max_degree)
        .map(|k| match &mu.density {
            None => Ok(0.0),
            Some(d) => {
                let e = d.exponent() + two_u;
                if !(e > -1.0) {
                    return Err(Error::Precondition(format!(
                        "kappa = (1 - |y|^2)^(2u) mu has density exponent {e} <= -1 and is not finite"
                    )));
                }
                Ok(match d {
                    Density::PowerWeight { scale, .. } => {
                        scale * ratio * v_alpha(n, e) * pochhammer(half + phi + 1.0, k as u32)
                            / pochhammer(half + e + 1.0, k as u32)
                    }
                    Density::TabulatedRadial { .. } => {
                        ratio * d.radial_moment(n, two_u, k) / radial_moment(n, phi, k)
                    }
                })
            }
        })
        .collect::<Result<_>>()?;
    Ok(basis.labels().iter().map(|l| per_degree[l.degree]).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialCheck {
    pub oracle: Vec<f64>,
    pub diagonal: Vec<f64>,
    pub max_relative_error: f64,
    pub max_off_diagonal: f64,
}

/// Compares [`radial_oracle`] with the assembled matrix.
pub fn radial_check(mu: &Measure, spec: BasisSpec, level: Option<usize>) -> Result<RadialCheck> {
    let oracle = radial_oracle(mu, spec)?;
    let m = toeplitz_matrix(mu, spec, level)?;
    let size = m.size();
    let diagonal: Vec<f64> = (0..size).map(|i| m.entries[(i, i)]).collect();
    let max_relative_error = oracle
        .iter()
        .zip(&diagonal)
        .map(|(o, d)| if *o == 0.0 { d.abs() } else { ((d - o) / o).abs() })
        .fold(0.0, f64::max);
    let mut max_off_diagonal = 0.0f64;
    for i in 0..size {
        for j in 0..size {
            if i != j {
                max_off_diagonal = max_off_diagonal.max(m.entries[(i, j)].abs());
            }
        }
    }
    Ok(RadialCheck {
        oracle,
        diagonal,
        max_relative_error,
        max_off_diagonal,
    })
}

/// `x -> mu~_{Phi, alpha, 2}(x)` with the normalizer `R_Phi(x, x)` cached by
/// radius, and the whole value cached by radius for radial measures.
struct BerezinField<'a> {
    mu: &'a Measure,
    alpha: f64,
    kernel: Kernel,
    diag: Mutex<HashMap<u64, f64>>,
    radial: Mutex<HashMap<u64, f64>>,
}

impl<'a> BerezinField<'a> {
    fn new(mu: &'a Measure, spec: &BasisSpec) -> Self {
        BerezinField {
            mu,
            alpha: spec.alpha,
            kernel: Kernel::new(spec.n, spec.phi(), KernelConfig::default()),
            diag: Mutex::new(HashMap::new()),
            radial: Mutex::new(HashMap::new()),
        }
    }

    fn key(x2: f64) -> u64 {
        // points on one sphere differ in |x|^2 only by rounding
        (x2 * (1u64 << 44) as f64).round() as u64
    }

    fn eval(&self, x: &[f64]) -> Result<f64> {
        let x2 = norm_sq(x);
        let key = Self::key(x2);
        let radial = self.mu.is_radial();
        if radial {
            if let Some(v) = self.radial.lock().expect("cache lock").get(&key) {
                return Ok(*v);
            }
        }
        let cached = self.diag.lock().expect("cache lock").get(&key).copied();
        let diag = match cached {
            Some(d) => d,
            None => {
                let d = self.kernel.eval_products(x2, x2 * x2)?.value;
                self.diag.lock().expect("cache lock").insert(key, d);
                d
            }
        };
        let v = berezin2_expanded(self.mu, self.alpha, x, &self.kernel, diag)?;
        if radial {
            self.radial.lock().expect("cache lock").insert(key, v);
        }
        Ok(v)
    }
}

/// Horizon-truncated `int |mu~_{Phi, alpha, 2}|^p dnu_{-n}`.
pub fn berezin_lp(
    mu: &Measure,
    spec: &BasisSpec,
    p: f64,
    horizon: f64,
    lattice: Option<&Lattice>,
) -> Result<LpNormReport> {
    spec.validate()?;
    let field = BerezinField::new(mu, spec);
    transform_lp_norm(
        |x| field.eval(x),
        spec.n,
        horizon.min(MAX_BEREZIN_HORIZON),
        lattice,
        p,
        -(spec.n as f64),
        BEREZIN_LEVEL,
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceReport {
    pub spec: BasisSpec,
    pub trace: f64,
    pub berezin_integral: f64,
    pub horizon: f64,
    pub berezin_growth_exponent: f64,
    /// `trace / berezin_integral`; absent when both vanish.
    pub ratio: Option<f64>,
}

/// Trace of the truncated operator against `int mu~_{Phi, alpha, 2} dnu_{-n}`.
pub fn trace_vs_berezin(mu: &Measure, spec: BasisSpec, horizon: f64, level: Option<usize>) -> Result<TraceReport> {
    let m = toeplitz_matrix(mu, spec, level)?;
    let trace = m.entries.trace();
    let b = berezin_lp(mu, &spec, 1.0, horizon, None)?;
    let ratio = if trace == 0.0 && b.value == 0.0 {
        None
    } else {
        Some(trace / b.value)
    };
    Ok(TraceReport {
        spec,
        trace,
        berezin_integral: b.value,
        horizon: b.horizon,
        berezin_growth_exponent: b.growth_exponent,
        ratio,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LadderStep {
    pub max_degree: usize,
    pub size: usize,
    pub top: f64,
    pub schatten: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchattenReport {
    pub p: f64,
    pub spec: BasisSpec,
    pub ladder: Vec<LadderStep>,
    /// Relative change of `S_p` between the two largest truncations.
    pub ladder_change: f64,
    pub ladder_converged: bool,
    /// `int |mu~_{Phi, alpha, 2}|^p dnu_{-n}` up to the horizon.
    pub berezin: LpNormReport,
    /// `sum_k mu^_{alpha, delta}(a_k)^p` over the lattice.
    pub lattice_sum: f64,
    pub lattice_inner: f64,
    pub lattice_growth_exponent: f64,
    pub lattice_divergent: bool,
    /// All three diagnostics read the same way (all finite or all divergent).
    pub agree: bool,
}

impl SchattenReport {
    /// `[ladder, berezin, lattice]`, `true` meaning finite.
    pub fn finite(&self) -> [bool; 3] {
        [self.ladder_converged, !self.berezin.divergent, !self.lattice_divergent]
    }
}

/// Three readings of `T_mu in S_p`: the `S_p` norm over a ladder of
/// truncations, the `L^p_{-n}` norm of the Berezin transform, and the
/// `l^p` sum of lattice averages. The Berezin horizon is the lattice radius,
/// capped at [`MAX_BEREZIN_HORIZON`].
pub fn schatten_diagnostic(
    mu: &Measure,
    spec: BasisSpec,
    p: f64,
    ladder: &[usize],
    lattice: &Lattice,
    level: Option<usize>,
) -> Result<SchattenReport> {
    if !(p >= 1.0) {
        return Err(Error::Domain(format!("Schatten exponent must be at least 1, got {p}")));
    }
    if ladder.len() < 2 {
        return Err(Error::Domain("a Schatten ladder needs at least two truncations".into()));
    }
    let steps: Vec<LadderStep> = ladder
        .par_iter()
        .map(|&k| {
            let s = spec.with_degree(k);
            let m = toeplitz_matrix(mu, s, level)?;
            let rep = spectrum(&m, &[p])?;
            Ok(LadderStep {
                max_degree: k,
                size: rep.size,
                top: rep.top(),
                schatten: rep.schatten_norm(p).unwrap_or(0.0),
            })
        })
        .collect::<Result<_>>()?;
    let last = steps[steps.len() - 1].schatten;
    let prev = steps[steps.len() - 2].schatten;
    let ladder_change = if last == 0.0 { 0.0 } else { (last - prev).abs() / last };

    let berezin = berezin_lp(mu, &spec, p, lattice.rmax, None)?;

    let masses = lattice_masses(mu, spec.alpha, lattice)?;
    let w_in = tail_w(horizon_w(lattice));
    let (mut lattice_sum, mut lattice_inner) = (0.0, 0.0);
    for pm in &masses {
        let v = (pm.mass / pm.volume).powf(p);
        lattice_sum += v;
        if pm.w >= w_in {
            lattice_inner += v;
        }
    }
    let lattice_growth_exponent = growth_exponent(lattice_inner, lattice_sum, w_in, horizon_w(lattice));
    let lattice_divergent = lattice_growth_exponent > GROWTH_THRESHOLD;

    let mut report = SchattenReport {
        p,
        spec,
        ladder: steps,
        ladder_change,
        ladder_converged: ladder_change < LADDER_TOL,
        berezin,
        lattice_sum,
        lattice_inner,
        lattice_growth_exponent,
        lattice_divergent,
        agree: false,
    };
    let f = report.finite();
    report.agree = f.iter().all(|v| *v == f[0]);
    Ok(report)
}

/// The source space `b^{p1}_{alpha1}`, target `b^{p2}_{alpha2}` and the
/// operator parameters `(s, t)` of `T_mu`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatorSpaces {
    pub p1: f64,
    pub alpha1: f64,
    pub p2: f64,
    pub alpha2: f64,
    pub s: f64,
    pub t: f64,
}

impl OperatorSpaces {
    pub fn source(&self, n: usize) -> SpaceParams {
        SpaceParams::new(n, self.p1, self.alpha1, self.s, self.t)
    }

    pub fn target(&self, n: usize) -> SpaceParams {
        SpaceParams::new(n, self.p2, self.alpha2, self.s, self.t)
    }

    /// `zeta = 1 + 1/p1 - 1/p2`.
    pub fn zeta(&self) -> f64 {
        1.0 + 1.0 / self.p1 - 1.0 / self.p2
    }

    /// `gamma = (s + t + alpha1/p1 - alpha2/p2) / zeta`.
    pub fn gamma(&self) -> f64 {
        (self.s + self.t + self.alpha1 / self.p1 - self.alpha2 / self.p2) / self.zeta()
    }

    /// Norm admissibility and kernel integrability for both spaces.
    pub fn validate(&self, n: usize) -> Result<()> {
        for sp in [self.source(n), self.target(n)] {
            sp.require_norm()?;
            sp.require_onenorm()?;
        }
        Ok(())
    }
}

/// `T_mu f = (V_alpha1 / V_s) int R_s(., y) D^t_s f(y) dkappa(y)` with
/// `kappa = (1 - |y|^2)^{s + t - alpha1} mu`.
///
/// Atoms contribute the kernel series of `R_s(., a)` cut at `out_degree`;
/// the radial density acts as a degree multiplier.
pub fn toeplitz_apply(
    mu: &Measure,
    spaces: &OperatorSpaces,
    f: &HarmonicPolynomial,
    out_degree: usize,
) -> Result<HarmonicPolynomial> {
    let n = mu.n;
    let (s, t) = (spaces.s, spaces.t);
    let mut out = HarmonicPolynomial::zero(n);
    let Some(top) = f.max_degree() else {
        return Ok(out);
    };
    let kappa = kappa_from_mu(mu, s, t, spaces.alpha1);
    let pre = v_alpha(n, spaces.alpha1) / v_alpha(n, s);
    let k_max = out_degree.max(top);
    let gamma_s = KernelCoeffs::new(n, s).upto(k_max);
    let m = dts_multipliers(n, s, t, k_max);
    for a in &kappa.atoms {
        let g = a.w * f.evaluate_scaled(&a.x, &m);
        let r = norm(&a.x);
        let pole = if r > 0.0 { direction(&a.x) } else { crate::vector::unit(n, 0) };
        let mut rk = 1.0;
        for (k, gk) in gamma_s.iter().enumerate().take(out_degree + 1) {
            out.push_atom(k, pre * g * gk * rk, pole.clone());
            rk *= r;
            if rk == 0.0 {
                break;
            }
        }
    }
    if let Some(d) = &kappa.density {
        if !(d.exponent() > -1.0) {
            return Err(Error::param(
                condition::FINITE_WEIGHT,
                format!("kappa density exponent {} makes T_mu f infinite", d.exponent()),
            ));
        }
        let scaled = f.map_degrees(|k| pre * gamma_s[k] * m[k] * d.radial_moment(n, 0.0, k));
        out = out.add(&scaled);
    }
    Ok(out)
}

/// Kernel-section probes `R_beta(., a)` with `1 - |a| = 1/m` for these `m`.
pub const PROBE_SCALES: [usize; 2] = [4, 8];

/// Probes use `beta = s + PROBE_WEIGHT_OFFSET`; a larger weight concentrates
/// the section closer to its pole.
pub const PROBE_WEIGHT_OFFSET: f64 = 3.0;

/// Degrees kept per unit of `m` in a truncated probe.
const PROBE_DEGREES_PER_SCALE: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeRatio {
    /// `1 / (1 - |a|)`.
    pub scale: usize,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundednessReport {
    pub spaces: OperatorSpaces,
    pub zeta: f64,
    pub gamma: f64,
    /// `sup ||T_mu f|| / ||f||` over random trials and probes.
    pub estimate: f64,
    pub trials: usize,
    /// Index of the best random trial, or `None` when a probe won.
    pub best_trial: Option<usize>,
    pub output_degree: usize,
    pub probes: Vec<ProbeRatio>,
    /// `log(ratio_last / ratio_first) / log(m_last / m_first)` over the probes.
    pub probe_growth: f64,
    /// Probe ratios keep growing as the pole approaches the sphere.
    pub growing: bool,
    /// `(zeta, gamma)` lattice statistic of `kappa`, when a lattice is given
    /// and `gamma > -1`.
    pub carleson: Option<CarlesonReport>,
}

/// Degree at which the kernel series of the atoms of `mu` is cut.
fn output_degree(mu: &Measure, s: f64) -> Result<usize> {
    let rho = mu.support_radius();
    if mu.atoms.is_empty() || rho == 0.0 {
        return Ok(0);
    }
    let kernel = Kernel::new(mu.n, s, KernelConfig::default());
    Ok(kernel.terms_for(rho, 1.0)?.min(MAX_OUTPUT_DEGREE + 1) - 1)
}

/// `sum_{k <= 12 m} gamma_k(beta) |a|^k Z_k(., e_1)` with `|a| = 1 - 1/m`.
fn kernel_probe(n: usize, beta: f64, m: usize) -> HarmonicPolynomial {
    let k_max = PROBE_DEGREES_PER_SCALE * m;
    let g = KernelCoeffs::new(n, beta).upto(k_max);
    let r = 1.0 - 1.0 / m as f64;
    let pole = crate::vector::unit(n, 0);
    let mut f = HarmonicPolynomial::zero(n);
    let mut rk = 1.0;
    for (k, gk) in g.into_iter().enumerate() {
        f.push_atom(k, gk * rk, pole.clone());
        rk *= r;
    }
    f
}

/// Monte Carlo lower bound for the norm of `T_mu` from `b^{p1}_{alpha1}` to
/// `b^{p2}_{alpha2}`, optionally paired with the lattice Carleson statistic
/// of `kappa` at `(zeta, gamma)`.
///
/// Trial functions are random harmonic polynomials of degree
/// [`TRIAL_DEGREE`] and truncated kernel sections whose poles approach the
/// sphere ([`PROBE_SCALES`]); growth of the probe ratios flags an unbounded
/// operator.
pub fn boundedness_estimate(
    mu: &Measure,
    spaces: OperatorSpaces,
    trials: usize,
    seed: u64,
    lattice: Option<&Lattice>,
) -> Result<BoundednessReport> {
    let n = mu.n;
    spaces.validate(n)?;
    let out_degree = output_degree(mu, spaces.s)?;
    let probe_degree = PROBE_DEGREES_PER_SCALE * PROBE_SCALES[PROBE_SCALES.len() - 1];
    let level = 2 * out_degree.max(TRIAL_DEGREE).max(probe_degree) + 2;
    let src = spaces.source(n);
    let dst = spaces.target(n);
    let src_rule = QuadratureRule::new(n, src.norm_weight(), level)?;
    let dst_rule = QuadratureRule::new(n, dst.norm_weight(), level)?;
    let ratio = |f: &HarmonicPolynomial| -> Result<f64> {
        let tf = toeplitz_apply(mu, &spaces, f, out_degree)?;
        let num = besov_norm(dst, &tf, &dst_rule)?;
        let den = besov_norm(src, f, &src_rule)?;
        Ok(if den > 0.0 { num / den } else { 0.0 })
    };
    let ratios: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|i| ratio(&random_polynomial(n, TRIAL_DEGREE, seed.wrapping_add(i as u64))))
        .collect::<Result<_>>()?;
    let beta = spaces.s + PROBE_WEIGHT_OFFSET;
    let probes: Vec<ProbeRatio> = PROBE_SCALES
        .par_iter()
        .map(|&m| {
            Ok(ProbeRatio {
                scale: m,
                ratio: ratio(&kernel_probe(n, beta, m))?,
            })
        })
        .collect::<Result<_>>()?;
    let mut best_trial = None;
    let mut estimate = 0.0;
    for (i, r) in ratios.iter().enumerate() {
        if *r > estimate {
            estimate = *r;
            best_trial = Some(i);
        }
    }
    for p in &probes {
        if p.ratio > estimate {
            estimate = p.ratio;
            best_trial = None;
        }
    }
    let (first, last) = (probes[0], probes[probes.len() - 1]);
    let probe_growth = growth_exponent(first.ratio, last.ratio, 1.0 / first.scale as f64, 1.0 / last.scale as f64);
    let (zeta, gamma) = (spaces.zeta(), spaces.gamma());
    let carleson = match lattice {
        Some(lat) if gamma > -1.0 => {
            let kappa = kappa_from_mu(mu, spaces.s, spaces.t, spaces.alpha1);
            Some(carleson_statistic(&kappa, zeta, gamma, lat)?)
        }
        _ => None,
    };
    Ok(BoundednessReport {
        spaces,
        zeta,
        gamma,
        estimate,
        trials,
        best_trial,
        output_degree: out_degree,
        probes,
        probe_growth,
        growing: probe_growth > GROWTH_THRESHOLD,
        carleson,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn five_atoms(n: usize) -> Measure {
        let pts: Vec<(Vec<f64>, f64)> = (0..5)
            .map(|i| {
                let a = 0.9 * i as f64 + 0.3;
                let r = 0.1 + 0.12 * i as f64;
                let mut x = vec![r * a.cos(), r * a.sin()];
                if n == 3 {
                    x.push(0.2 * (i as f64 - 2.0) / 2.0);
                }
                (x, 0.5 + 0.25 * i as f64)
            })
            .collect();
        Measure::atoms(n, pts)
    }

    #[test]
    fn intertwining_holds_for_atoms() {
        for n in [2, 3] {
            for (s, t) in [(0.5, 1.0), (1.5, -0.5)] {
                let spec = BasisSpec::new(n, 0.0, s, 6);
                let r = intertwine_check(&five_atoms(n), spec, t, None).unwrap();
                assert!(r.relative_residual < 1e-12, "n={n} s={s} t={t}: {r:?}");
            }
        }
    }

    #[test]
    fn intertwining_on_weighted_volume_is_a_multiple_of_dts() {
        let (alpha, s, t) = (0.5, 1.0, 0.75);
        let spec = BasisSpec::new(2, alpha, s, 6);
        let (lhs, rhs) = intertwine_matrices(&Measure::weighted_volume(2, alpha), spec, t, None).unwrap();
        let basis = Basis::new(spec).unwrap();
        let m = dts_multipliers(2, s, t, 6);
        let c = v_alpha(2, s + t) / v_alpha(2, s);
        let expected = DMatrix::from_fn(basis.len(), basis.len(), |i, j| {
            if i == j {
                c * m[basis.labels()[i].degree]
            } else {
                0.0
            }
        });
        assert!((&lhs - &expected).amax() < 1e-10);
        assert!((&rhs - &expected).amax() < 1e-10);
    }

    #[test]
    fn zero_shift_is_exact() {
        let spec = BasisSpec::new(2, -0.5, 0.25, 5);
        let r = intertwine_check(&five_atoms(2), spec, 0.0, None).unwrap();
        assert_eq!(r.residual, 0.0);
    }

    #[test]
    fn radial_oracle_matches_matrix() {
        for (alpha, s, c) in [(0.0, 0.0, 1.0), (0.5, 1.0, 2.5), (-2.0, -0.25, 0.5)] {
            let mu = Measure::weighted_volume(2, alpha + c).scaled(3.0);
            let r = radial_check(&mu, BasisSpec::new(2, alpha, s, 8), None).unwrap();
            assert!(r.max_relative_error < 1e-10, "{r:?}");
            assert!(r.max_off_diagonal < 1e-12);
        }
        let ones = radial_oracle(&Measure::weighted_volume(3, 1.0), BasisSpec::new(3, 1.0, 0.7, 4)).unwrap();
        assert!(ones.iter().all(|v| (v - 1.0).abs() < 1e-12));
        assert!(radial_oracle(&five_atoms(2), BasisSpec::new(2, 0.0, 0.0, 2)).is_err());
    }

    #[test]
    fn tabulated_oracle_agrees_with_power_weight() {
        let spec = BasisSpec::new(2, 0.0, 0.5, 6);
        let power = Measure::power_weight(2, 1.5, 2.0);
        let mut tab = power.clone();
        tab.density = Some(Density::TabulatedRadial {
            radii: vec![0.0, 1.0],
            values: vec![1.0, 1.0],
            scale: 2.0,
            exponent: 1.5,
        });
        let a = radial_oracle(&power, spec).unwrap();
        let b = radial_oracle(&tab, spec).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_relative_eq!(x, y, max_relative = 1e-12);
        }
    }

    #[test]
    fn apply_on_weighted_volume_is_a_multiple_of_identity() {
        let (alpha, s) = (0.5, 1.0);
        let spaces = OperatorSpaces {
            p1: 2.0,
            alpha1: alpha,
            p2: 2.0,
            alpha2: alpha,
            s,
            t: s - alpha,
        };
        let f = random_polynomial(2, 4, 7);
        let tf = toeplitz_apply(&Measure::weighted_volume(2, alpha), &spaces, &f, 0).unwrap();
        let c = v_alpha(2, 2.0 * s - alpha) / v_alpha(2, s);
        for x in [[0.1, 0.2], [-0.5, 0.3]] {
            assert_relative_eq!(tf.evaluate(&x), c * f.evaluate(&x), max_relative = 1e-12);
        }
    }

    #[test]
    fn apply_matches_direct_integral_for_an_atom() {
        let spaces = OperatorSpaces {
            p1: 2.0,
            alpha1: 0.0,
            p2: 2.0,
            alpha2: 0.0,
            s: 0.5,
            t: 0.5,
        };
        let a = vec![0.3, -0.2];
        let mu = Measure::atoms(2, vec![(a.clone(), 1.5)]);
        let f = random_polynomial(2, 3, 11);
        let tf = toeplitz_apply(&mu, &spaces, &f, 60).unwrap();
        let x = [0.4, 0.1];
        let its = crate::calculus::its_apply(0.5, 0.5, &f, &a).unwrap();
        let r = crate::kernel::kernel_eval(2, 0.5, &x, &a, 1e-14).unwrap().value;
        let direct = v_alpha(2, 0.0) / v_alpha(2, 0.5) * r * its * 1.5 * (1.0 - norm_sq(&a)).powf(0.5);
        assert_relative_eq!(tf.evaluate(&x), direct, max_relative = 1e-10);
    }

    #[test]
    fn boundedness_of_zero_measure_is_zero() {
        let spaces = OperatorSpaces {
            p1: 2.0,
            alpha1: 0.0,
            p2: 2.0,
            alpha2: 0.0,
            s: 0.0,
            t: 0.0,
        };
        let r = boundedness_estimate(&Measure::zero(2), spaces, 3, 1, None).unwrap();
        assert_eq!(r.estimate, 0.0);
    }

    #[test]
    fn boundedness_rejects_inadmissible_spaces() {
        let spaces = OperatorSpaces {
            p1: 2.0,
            alpha1: -3.0,
            p2: 2.0,
            alpha2: 0.0,
            s: 0.0,
            t: 0.0,
        };
        assert!(matches!(
            boundedness_estimate(&Measure::zero(2), spaces, 1, 1, None),
            Err(Error::Parameter { .. })
        ));
    }

    #[test]
    fn zero_measure_trace_is_zero() {
        let r = trace_vs_berezin(&Measure::zero(2), BasisSpec::new(2, 0.0, 0.5, 4), 0.99, None).unwrap();
        assert_eq!(r.trace, 0.0);
        assert_eq!(r.berezin_integral, 0.0);
        assert!(r.ratio.is_none());
    }
    #[test]
    fn probes_and_carleson_cross_together() {
        // kappa = nu_{c + 3/2}; the (zeta, gamma) threshold sits at c = 1/2
        let lat = crate::geometry::lattice_gen(2, 0.5, 1.0 - 1e-4).unwrap();
        let spaces = OperatorSpaces {
            p1: 2.0,
            alpha1: 0.0,
            p2: 4.0,
            alpha2: 0.0,
            s: 1.0,
            t: 0.5,
        };
        for (c, unbounded) in [(0.3, true), (0.7, false)] {
            let r = boundedness_estimate(&Measure::power_weight(2, c, 1.0), spaces, 2, 5, Some(&lat)).unwrap();
            assert_eq!(r.growing, unbounded, "c={c} {:?}", r.probes);
            assert_eq!(r.carleson.unwrap().unbounded, unbounded, "c={c}");
        }
    }
}
