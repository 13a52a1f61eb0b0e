//! Lattice tests for `(lambda, alpha)`-Bergman-Carleson measures, their
//! vanishing counterparts, horizon-truncated `L^p_beta` norms of transforms,
//! and direct lower bounds for the embedding constant of `b^p_alpha` into
//! `L^q(mu)`.
//!
//! Every integral over the non-compact range is cut at a horizon `|x| <= rmax`.
//! Boundedness is judged by comparing a statistic at the horizon with the same
//! statistic two decades of `1 - |x|^2` further in: the growth exponent
//! `log(S_outer / S_inner) / log(w_inner / w_outer)` is about zero for a
//! bounded quantity and about `e` for one growing like `(1 - |x|^2)^{-e}`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::axisym::AxisymGrid;
use crate::calculus::{besov_norm, SpaceParams};
use crate::error::{condition, require_weight, Error, Result};
use crate::fit::log_log_fit;
use crate::geometry::{
    ball_integral, pseudoball, require_delta, weighted_ball_volume, Lattice, PseudoBall,
};
use crate::kernel::{v_alpha, Kernel};
use crate::measure::{kernel_power_integral, measure_of_pseudoball, Measure};
use crate::polynomial::{random_polynomial, random_unit, HarmonicPolynomial};
use crate::quadrature::QuadratureRule;
use crate::vector::{norm, norm_sq, scale};

/// Growth exponents above this count as horizon-growing.
pub const GROWTH_THRESHOLD: f64 = 0.05;

/// Decades of `1 - |x|^2` between the inner and the outer horizon.
pub const HORIZON_DECADES: f64 = 2.0;

/// Decades of `1 - |x|^2` in the tail window of integral and sum diagnostics.
/// A convergent integral only adds its tail there, so its growth exponent
/// stays near zero; a logarithmic one reads about 0.2 at the default horizon.
pub const TAIL_DECADES: f64 = 1.0;

/// Nodes per direction of the pseudoball grid used in lattice sweeps.
pub const SWEEP_BALL_NODES: usize = 16;

/// Last-shell to first-shell ratio below which a profile counts as vanishing.
pub const VANISHING_RATIO: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StatKind {
    /// `sup_k mu(E_k) / (1 - |a_k|^2)^{(n + alpha) lambda}`, for `lambda >= 1`.
    SupStatistic,
    /// `l^{1/(1 - lambda)}` norm of `mu_hat(a_k) (1 - |a_k|^2)^{(n + alpha)(1 - lambda)}`,
    /// for `lambda < 1`.
    LpStatistic,
}

/// One decade `w_inner < 1 - |a|^2 <= w_outer` of lattice points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Shell {
    pub w_outer: f64,
    pub w_inner: f64,
    pub points: usize,
    /// Maximum of the per-point quantity (sup statistic, profiles) or the
    /// sum of its `r`-th powers (`l^r` statistic).
    pub value: f64,
    /// `1 - |a|^2` at the maximizing point.
    pub w_at_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CarlesonReport {
    pub lambda: f64,
    pub alpha: f64,
    pub delta: f64,
    pub kind: StatKind,
    pub value: f64,
    pub horizon: f64,
    /// The statistic restricted to `|a_k| <= inner_horizon`.
    pub inner_value: f64,
    pub inner_horizon: f64,
    pub growth_exponent: f64,
    /// The statistic keeps growing with the horizon; read as `+inf`.
    pub unbounded: bool,
    pub shells: Vec<Shell>,
}

/// `(1 - |a|^2, mu(E_delta(a)), nu_alpha(E_delta(a)))` at every lattice point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointMass {
    pub w: f64,
    pub mass: f64,
    pub volume: f64,
}

fn sweep_grid(n: usize) -> AxisymGrid {
    AxisymGrid::uniform(n, SWEEP_BALL_NODES, SWEEP_BALL_NODES)
}

/// Ball masses at all lattice points, in lattice order.
///
/// `nu_alpha(E)` is defined for every real `alpha` (with `V_alpha = 1` for
/// `alpha <= -1`), so no weight condition is imposed here.
pub fn lattice_masses(mu: &Measure, alpha: f64, lattice: &Lattice) -> Result<Vec<PointMass>> {
    require_delta(lattice.delta)?;
    if mu.n != lattice.n {
        return Err(Error::Domain(format!(
            "measure lives in dimension {} but the lattice in {}",
            mu.n, lattice.n
        )));
    }
    let grid = sweep_grid(mu.n);
    let delta = lattice.delta;
    Ok(lattice
        .points
        .par_iter()
        .map(|a| {
            let ball = pseudoball(a, delta).expect("lattice points lie in the ball");
            PointMass {
                w: 1.0 - norm_sq(a),
                mass: measure_of_pseudoball(mu, &ball, &grid),
                volume: weighted_ball_volume(alpha, &ball, &grid),
            }
        })
        .collect())
}

/// Masses of `scale * (1 - |y|^2)^exponent dnu` for several exponents at
/// once, reusing one pass over the lattice. Returns `masses[e][k]`.
pub fn lattice_power_masses(lattice: &Lattice, exponents: &[f64], scales: &[f64]) -> Vec<Vec<f64>> {
    let grid = sweep_grid(lattice.n);
    let per_point: Vec<Vec<f64>> = lattice
        .points
        .par_iter()
        .map(|a| {
            let ball = pseudoball(a, lattice.delta).expect("lattice points lie in the ball");
            power_ball_masses(&ball, &grid, exponents, scales)
        })
        .collect();
    (0..exponents.len())
        .map(|e| per_point.iter().map(|m| m[e]).collect())
        .collect()
}

fn power_ball_masses(ball: &PseudoBall, grid: &AxisymGrid, exponents: &[f64], scales: &[f64]) -> Vec<f64> {
    exponents
        .iter()
        .zip(scales)
        .map(|(e, s)| s * ball_integral(ball, grid, |y2| (1.0 - y2).powf(*e)))
        .collect()
}

pub(crate) fn horizon_w(lattice: &Lattice) -> f64 {
    1.0 - lattice.rmax * lattice.rmax
}

pub(crate) fn inner_w(lattice: &Lattice) -> f64 {
    (horizon_w(lattice) * 10f64.powf(HORIZON_DECADES)).min(1.0)
}

pub(crate) fn tail_w(w_horizon: f64) -> f64 {
    (w_horizon * 10f64.powf(TAIL_DECADES)).min(1.0)
}

/// Decade shells from `w = 1` down to the horizon.
fn shell_edges(w_horizon: f64) -> Vec<(f64, f64)> {
    let mut edges = vec![];
    let mut outer = 1.0;
    while outer > w_horizon * (1.0 + 1e-12) {
        let inner = (outer / 10.0).max(w_horizon * (1.0 - 1e-12));
        edges.push((outer, inner));
        outer /= 10.0;
    }
    if edges.is_empty() {
        edges.push((1.0, 0.0));
    }
    // the last shell absorbs points sitting exactly on the horizon
    edges.last_mut().expect("nonempty").1 = 0.0;
    edges
}

fn shell_index(edges: &[(f64, f64)], w: f64) -> usize {
    edges
        .iter()
        .position(|(o, i)| w <= *o && w > *i)
        .unwrap_or(edges.len() - 1)
}

/// Shell maxima of `values[k]` keyed by `ws[k]`.
fn shell_maxima(ws: &[f64], values: &[f64], w_horizon: f64) -> Vec<Shell> {
    let edges = shell_edges(w_horizon);
    let mut shells: Vec<Shell> = edges
        .iter()
        .map(|(o, i)| Shell {
            w_outer: *o,
            w_inner: *i,
            points: 0,
            value: 0.0,
            w_at_max: *o,
        })
        .collect();
    for (w, v) in ws.iter().zip(values) {
        let s = &mut shells[shell_index(&edges, *w)];
        s.points += 1;
        if *v > s.value {
            s.value = *v;
            s.w_at_max = *w;
        }
    }
    shells
}

pub(crate) fn growth_exponent(inner: f64, outer: f64, w_inner: f64, w_outer: f64) -> f64 {
    if inner <= 0.0 && outer <= 0.0 {
        return 0.0;
    }
    if inner <= 0.0 {
        return f64::INFINITY;
    }
    (outer / inner).ln() / (w_inner / w_outer).ln()
}

/// The lattice Carleson statistic for `q / p = lambda`.
pub fn carleson_statistic(mu: &Measure, lambda: f64, alpha: f64, lattice: &Lattice) -> Result<CarlesonReport> {
    if !(lambda > 0.0) {
        return Err(Error::param(condition::POSITIVE, format!("lambda = {lambda}")));
    }
    require_weight(alpha, "alpha")?;
    let masses = lattice_masses(mu, alpha, lattice)?;
    Ok(statistic_from_masses(&masses, mu.n, lambda, alpha, lattice))
}

/// [`carleson_statistic`] from precomputed masses.
pub fn statistic_from_masses(
    masses: &[PointMass],
    n: usize,
    lambda: f64,
    alpha: f64,
    lattice: &Lattice,
) -> CarlesonReport {
    let na = n as f64 + alpha;
    let (w_h, w_in) = (horizon_w(lattice), inner_w(lattice));
    let ws: Vec<f64> = masses.iter().map(|m| m.w).collect();
    let inner_horizon = (1.0 - w_in).sqrt();
    if lambda >= 1.0 {
        let vals: Vec<f64> = masses.iter().map(|m| m.mass / m.w.powf(na * lambda)).collect();
        let value = vals.iter().cloned().fold(0.0, f64::max);
        let inner_value = vals
            .iter()
            .zip(&ws)
            .filter(|(_, w)| **w >= w_in)
            .map(|(v, _)| *v)
            .fold(0.0, f64::max);
        let g = growth_exponent(inner_value, value, w_in, w_h);
        CarlesonReport {
            lambda,
            alpha,
            delta: lattice.delta,
            kind: StatKind::SupStatistic,
            value,
            horizon: lattice.rmax,
            inner_value,
            inner_horizon,
            growth_exponent: g,
            unbounded: g > GROWTH_THRESHOLD,
            shells: shell_maxima(&ws, &vals, w_h),
        }
    } else {
        let r = 1.0 / (1.0 - lambda);
        let terms: Vec<f64> = masses
            .iter()
            .map(|m| (m.mass / m.volume * m.w.powf(na * (1.0 - lambda))).powf(r))
            .collect();
        let total: f64 = terms.iter().sum();
        let inner: f64 = terms.iter().zip(&ws).filter(|(_, w)| **w >= w_in).map(|(t, _)| t).sum();
        let (value, inner_value) = (total.powf(1.0 / r), inner.powf(1.0 / r));
        let g = growth_exponent(inner_value, value, w_in, w_h);
        let edges = shell_edges(w_h);
        let mut shells = shell_maxima(&ws, &vec![0.0; ws.len()], w_h);
        for (w, t) in ws.iter().zip(&terms) {
            shells[shell_index(&edges, *w)].value += t;
        }
        CarlesonReport {
            lambda,
            alpha,
            delta: lattice.delta,
            kind: StatKind::LpStatistic,
            value,
            horizon: lattice.rmax,
            inner_value,
            inner_horizon,
            growth_exponent: g,
            unbounded: g > GROWTH_THRESHOLD,
            shells,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VanishingProfile {
    pub lambda: f64,
    pub alpha: f64,
    pub delta: f64,
    pub horizon: f64,
    /// Shell maxima of `(1 - |a_k|^2)^{(n + alpha)(1 - lambda)} mu_hat(a_k)`.
    pub shells: Vec<Shell>,
    /// Log-log slope of the nonzero shell maxima against `1 - |a|^2`, leaving
    /// out the shell around the origin when enough others remain.
    pub slope: Option<f64>,
    pub vanishing: bool,
    pub note: Option<String>,
}

/// Boundary decay of the vanishing-Carleson quantity, shell by shell.
pub fn vanishing_profile(mu: &Measure, lambda: f64, alpha: f64, lattice: &Lattice) -> Result<VanishingProfile> {
    if !(lambda > 0.0) {
        return Err(Error::param(condition::POSITIVE, format!("lambda = {lambda}")));
    }
    require_weight(alpha, "alpha")?;
    let masses = lattice_masses(mu, alpha, lattice)?;
    let na = mu.n as f64 + alpha;
    let ws: Vec<f64> = masses.iter().map(|m| m.w).collect();
    let vals: Vec<f64> = masses
        .iter()
        .map(|m| m.w.powf(na * (1.0 - lambda)) * m.mass / m.volume)
        .collect();
    let shells = shell_maxima(&ws, &vals, horizon_w(lattice));
    let nonzero: Vec<&Shell> = shells.iter().filter(|s| s.points > 0 && s.value > 0.0).collect();
    // the shell around the origin is far from the boundary regime
    let skip = usize::from(nonzero.len() > 2 && nonzero[0].w_outer >= 1.0);
    let (xs, ys): (Vec<f64>, Vec<f64>) = nonzero[skip..].iter().map(|s| (s.w_at_max, s.value)).unzip();
    let slope = log_log_fit(&xs, &ys).map(|f| f.slope);
    let first = shells.first().map(|s| s.value).unwrap_or(0.0);
    let last = shells.last().map(|s| s.value).unwrap_or(0.0);
    let (vanishing, note) = if lambda >= 1.0 {
        (last <= VANISHING_RATIO * first, None)
    } else {
        let report = statistic_from_masses(&masses, mu.n, lambda, alpha, lattice);
        (
            !report.unbounded,
            Some("for lambda < 1 vanishing and plain Carleson coincide; classified by the l^r statistic".into()),
        )
    };
    Ok(VanishingProfile {
        lambda,
        alpha,
        delta: lattice.delta,
        horizon: lattice.rmax,
        shells,
        slope,
        vanishing,
        note,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpNormReport {
    pub p: f64,
    pub beta: f64,
    pub horizon: f64,
    /// `int_{|x| <= horizon} |F|^p (1 - |x|^2)^beta dnu` on a radial grid.
    pub value: f64,
    /// The same integral over `1 - |x|^2 >= 10^TAIL_DECADES (1 - horizon^2)`.
    pub inner_value: f64,
    pub growth_exponent: f64,
    /// `sum_k |F(a_k)|^p (1 - |a_k|^2)^{n + beta}` over lattice points inside
    /// the horizon, comparable to `value` up to constants depending on
    /// `delta` and the overlap bound.
    pub lattice_sum: Option<f64>,
    pub lattice_inner: Option<f64>,
    pub lattice_growth_exponent: Option<f64>,
    pub divergent: bool,
}

/// Radial nodes and `dnu` weights for `|x| <= rmax` with `(1 - r^2)^beta`
/// folded in: Legendre on `[0, 1/2]`, then Legendre panels in `log(1 - r^2)`
/// broken at every decade counted from the horizon.
fn horizon_radial(n: usize, beta: f64, w_h: f64, nodes: usize) -> (Vec<f64>, Vec<f64>) {
    let nf = n as f64;
    let (zr, zw) = crate::quadrature::gauss_legendre(nodes, 0.0, 0.5);
    let mut r = vec![];
    let mut wts = vec![];
    for (x, w) in zr.iter().zip(&zw) {
        r.push(*x);
        wts.push(w * nf * x.powi(n as i32 - 1) * (1.0 - x * x).powf(beta));
    }
    let mut breaks = vec![0.75f64.ln()];
    let mut k = 1;
    loop {
        let b = w_h * 10f64.powi(k);
        if b >= 0.75 {
            break;
        }
        breaks.push(b.ln());
        k += 1;
    }
    breaks.push(0.1f64.ln().max(w_h.ln()));
    breaks.push(w_h.ln());
    breaks.sort_by(|a, b| b.total_cmp(a));
    breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    for pair in breaks.windows(2) {
        let (zs, ws) = crate::quadrature::gauss_legendre(nodes, pair[1], pair[0]);
        for (s, w) in zs.iter().zip(&ws) {
            let wv = s.exp();
            let rv = (1.0 - wv).sqrt();
            r.push(rv);
            wts.push(w * 0.5 * nf * rv.powi(n as i32 - 2) * wv.powf(beta + 1.0));
        }
    }
    (r, wts)
}

/// Horizon-truncated `L^p_beta` norm (to the `p`-th power) of a field on the
/// ball `B` of `R^n` cut at `|x| <= horizon`, with an optional lattice-sum
/// comparison and a divergence flag. `level` sets the angular resolution.
pub fn transform_lp_norm<F>(
    field: F,
    n: usize,
    horizon: f64,
    lattice: Option<&Lattice>,
    p: f64,
    beta: f64,
    level: usize,
) -> Result<LpNormReport>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    if !(p >= 1.0) {
        return Err(Error::param(condition::POSITIVE, format!("p must be at least 1, got {p}")));
    }
    if !(horizon > 0.0 && horizon < 1.0) {
        return Err(Error::param(condition::UNIT_INTERVAL, format!("horizon = {horizon}")));
    }
    let w_h = 1.0 - horizon * horizon;
    let w_in = tail_w(w_h);
    let (radii, rw) = horizon_radial(n, beta, w_h, 12);
    let rule = QuadratureRule::new(n, 0.0, level)?;
    let (dirs, dw) = rule.angular();
    let shells: Vec<f64> = radii
        .par_iter()
        .map(|r| {
            let mut acc = 0.0;
            for (d, w) in dirs.iter().zip(dw) {
                acc += w * field(&scale(*r, d))?.abs().powf(p);
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    let mut value = 0.0;
    let mut inner_value = 0.0;
    for ((r, w), a) in radii.iter().zip(&rw).zip(&shells) {
        value += w * a;
        if 1.0 - r * r >= w_in * (1.0 - 1e-9) {
            inner_value += w * a;
        }
    }
    let g = growth_exponent(inner_value, value, w_in, w_h);
    let (mut lattice_sum, mut lattice_inner, mut lattice_growth_exponent) = (None, None, None);
    if let Some(lat) = lattice {
        let nb = n as f64 + beta;
        let terms: Vec<(f64, f64)> = lat
            .points
            .par_iter()
            .filter(|a| norm(a) <= horizon)
            .map(|a| {
                let w = 1.0 - norm_sq(a);
                Ok((w, field(a)?.abs().powf(p) * w.powf(nb)))
            })
            .collect::<Result<_>>()?;
        let total: f64 = terms.iter().map(|t| t.1).sum();
        let inner: f64 = terms.iter().filter(|t| t.0 >= w_in).map(|t| t.1).sum();
        lattice_sum = Some(total);
        lattice_inner = Some(inner);
        lattice_growth_exponent = Some(growth_exponent(inner, total, w_in, w_h));
    }
    Ok(LpNormReport {
        p,
        beta,
        horizon,
        value,
        inner_value,
        growth_exponent: g,
        lattice_sum,
        lattice_inner,
        lattice_growth_exponent,
        divergent: g > GROWTH_THRESHOLD,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TestFunction {
    /// `R_alpha(a, .)`.
    KernelSection { center: Vec<f64> },
    /// A random harmonic polynomial with the given seed and degree bound.
    Polynomial { seed: u64, max_degree: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingEstimate {
    pub p: f64,
    pub q: f64,
    pub alpha: f64,
    /// `max ||f||_{L^q(mu)} / ||f||_{b^p_alpha}` over the trial family.
    pub value: f64,
    pub trials: usize,
    pub best: Option<TestFunction>,
}

/// Degree bound of the random polynomial trials.
pub const TRIAL_DEGREE: usize = 6;

/// Smallest `1 - |a|^2` of the stratified kernel-section centers.
pub const TRIAL_W_MIN: f64 = 1e-3;

/// `||R_alpha(a, .)||_{b^p_alpha}` for `alpha > -1` (where `t = 0` works).
pub fn kernel_section_norm(kernel: &Kernel, a: &[f64], p: f64) -> Result<f64> {
    if p == 2.0 {
        return Ok(kernel.eval(a, a)?.value.sqrt());
    }
    Ok(kernel_power_integral(kernel, a, p, kernel.alpha())?.powf(1.0 / p))
}

/// `int |R_alpha(a, y)|^q dmu(y)`.
pub fn kernel_section_moment(mu: &Measure, kernel: &Kernel, a: &[f64], q: f64) -> Result<f64> {
    let mut atoms = 0.0;
    for pm in &mu.atoms {
        atoms += pm.w * kernel.eval(a, &pm.x)?.value.abs().powf(q);
    }
    let Some(d) = &mu.density else {
        return Ok(atoms);
    };
    if d.exponent() <= -1.0 {
        return Ok(f64::INFINITY);
    }
    let r0 = norm(a);
    let grid = AxisymGrid::graded(mu.n, r0, d.exponent())?;
    let dens = grid.try_integrate(|r, ts, out| {
        kernel.eval_axial(r0 * r, ts, out)?;
        let g = d.smooth(r);
        out.iter_mut().for_each(|v| *v = g * v.abs().powf(q));
        Ok(())
    })?;
    Ok(atoms + dens)
}

fn polynomial_moment(mu: &Measure, f: &HarmonicPolynomial, q: f64, level: usize) -> Result<f64> {
    let mut atoms = 0.0;
    for pm in &mu.atoms {
        atoms += pm.w * f.evaluate(&pm.x).abs().powf(q);
    }
    let Some(d) = &mu.density else {
        return Ok(atoms);
    };
    let e = d.exponent();
    if e <= -1.0 {
        return Ok(f64::INFINITY);
    }
    let rule = QuadratureRule::new(mu.n, e, level)?;
    let dens = rule.integrate(|x| d.smooth(norm(x)) * f.evaluate(x).abs().powf(q));
    Ok(atoms + v_alpha(mu.n, e) * dens)
}

/// Lower bound for the norm of `b^p_alpha -> L^q(mu)` from kernel sections
/// (centered at the atoms, then at seeded points with `1 - |a|^2` spread
/// over `[TRIAL_W_MIN, 0.1]`) and random harmonic polynomials.
pub fn embedding_constant_estimate(
    mu: &Measure,
    p: f64,
    q: f64,
    kernel: &Kernel,
    trials: usize,
    seed: u64,
) -> Result<EmbeddingEstimate> {
    let alpha = kernel.alpha();
    require_weight(alpha, "alpha")?;
    if !(p >= 1.0 && q >= 1.0) {
        return Err(Error::param(condition::POSITIVE, format!("p = {p}, q = {q} must be at least 1")));
    }
    if mu.n != kernel.n() {
        return Err(Error::Domain("measure and kernel dimensions differ".into()));
    }
    let n = mu.n;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut family: Vec<TestFunction> = mu
        .atoms
        .iter()
        .take(trials / 2)
        .map(|a| TestFunction::KernelSection { center: a.x.clone() })
        .collect();
    let sections = trials / 2 - family.len().min(trials / 2);
    for i in 0..sections {
        let frac = if sections > 1 { i as f64 / (sections - 1) as f64 } else { 0.0 };
        let w = 0.1 * (TRIAL_W_MIN / 0.1).powf(frac);
        let dir = random_unit(n, &mut rng);
        family.push(TestFunction::KernelSection {
            center: scale((1.0 - w).sqrt(), &dir),
        });
    }
    while family.len() < trials {
        family.push(TestFunction::Polynomial {
            seed: seed.wrapping_add(family.len() as u64),
            max_degree: TRIAL_DEGREE,
        });
    }
    let level = 2 * TRIAL_DEGREE + 8;
    let norm_rule = QuadratureRule::new(n, alpha, 4 * TRIAL_DEGREE.max(4))?;
    let ratios: Vec<f64> = family
        .iter()
        .map(|tf| match tf {
            TestFunction::KernelSection { center } => {
                let num = kernel_section_moment(mu, kernel, center, q)?.powf(1.0 / q);
                Ok(num / kernel_section_norm(kernel, center, p)?)
            }
            TestFunction::Polynomial { seed, max_degree } => {
                let f = random_polynomial(n, *max_degree, *seed);
                let num = polynomial_moment(mu, &f, q, level)?.powf(1.0 / q);
                let den = besov_norm(SpaceParams::new(n, p, alpha, alpha, 0.0), &f, &norm_rule)?;
                Ok(num / den)
            }
        })
        .collect::<Result<_>>()?;
    let mut best = None;
    let mut value = 0.0;
    for (tf, r) in family.iter().zip(&ratios) {
        if *r > value || (r.is_infinite() && best.is_none()) {
            value = *r;
            best = Some(tf.clone());
        }
    }
    Ok(EmbeddingEstimate {
        p,
        q,
        alpha,
        value,
        trials: family.len(),
        best,
    })
}

/// `||R_alpha(a, .)||^q_{L^q(mu_c)} / ||R_alpha(a, .)||^q_{b^p_alpha}` for the
/// family `mu_c = nu_{alpha + c} / V_{alpha + c}` with `1 - |a|^2 = w`, for
/// every `c` and `w`. One kernel sweep per `w` serves all `c`.
pub fn kernel_ratio_family(kernel: &Kernel, p: f64, q: f64, cs: &[f64], ws: &[f64]) -> Result<Vec<Vec<f64>>> {
    let alpha = kernel.alpha();
    let n = kernel.n();
    let c0 = cs.iter().cloned().fold(f64::INFINITY, f64::min);
    let beta0 = alpha + c0;
    if !(beta0 > -1.0) {
        return Err(Error::param(
            condition::FINITE_WEIGHT,
            format!("alpha + c = {beta0} must exceed -1 for the kernel moments to be finite"),
        ));
    }
    let mut out = vec![vec![0.0; ws.len()]; cs.len()];
    for (j, w) in ws.iter().enumerate() {
        let r0 = (1.0 - w).sqrt();
        let a: Vec<f64> = (0..n).map(|i| if i == 0 { r0 } else { 0.0 }).collect();
        let den = kernel_section_norm(kernel, &a, p)?.powf(q);
        let grid = AxisymGrid::graded(n, r0, beta0)?;
        let profile = grid.angular_profile(|r, ts, o| {
            kernel.eval_axial(r0 * r, ts, o)?;
            o.iter_mut().for_each(|v| *v = v.abs().powf(q));
            Ok(())
        })?;
        for (i, c) in cs.iter().enumerate() {
            let extra = c - c0;
            let scale_c = 1.0 / v_alpha(n, alpha + c);
            let num: f64 = grid
                .radii()
                .iter()
                .zip(grid.radial_weights())
                .zip(&profile)
                .map(|((r, wr), a)| wr * a * (1.0 - r * r).powf(extra))
                .sum();
            out[i][j] = scale_c * num / den;
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdRow {
    pub c: f64,
    pub statistic: f64,
    pub statistic_growth: f64,
    pub statistic_unbounded: bool,
    pub embedding_growth: f64,
    pub embedding_unbounded: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdScan {
    pub n: usize,
    pub alpha: f64,
    pub lambda: f64,
    pub p: f64,
    pub q: f64,
    /// `(n + alpha)(lambda - 1)`.
    pub predicted: f64,
    pub rows: Vec<ThresholdRow>,
    /// Smallest `c` from which on every row is bounded.
    pub statistic_transition: Option<f64>,
    pub embedding_transition: Option<f64>,
}

/// `1 - |a|^2` at which the embedding ratios are compared.
pub const EMBEDDING_W: [f64; 2] = [1e-2, 1e-3];

/// Carleson statistic and kernel-section embedding ratio for
/// `mu_c = nu_{alpha + c} / V_{alpha + c}` over a grid of `c`, with the
/// bounded/unbounded transition of each (`lambda >= 1`, `q = lambda p`).
pub fn carleson_threshold_scan(kernel: &Kernel, lambda: f64, p: f64, cs: &[f64], lattice: &Lattice) -> Result<ThresholdScan> {
    let alpha = kernel.alpha();
    let n = kernel.n();
    if !(lambda >= 1.0) {
        return Err(Error::param(condition::POSITIVE, format!("threshold scans need lambda >= 1, got {lambda}")));
    }
    let q = lambda * p;
    let exps: Vec<f64> = cs.iter().map(|c| alpha + c).collect();
    let scales: Vec<f64> = exps.iter().map(|e| 1.0 / v_alpha(n, *e)).collect();
    let masses = lattice_power_masses(lattice, &exps, &scales);
    let ratios = kernel_ratio_family(kernel, p, q, cs, &EMBEDDING_W)?;
    let decades = (EMBEDDING_W[0] / EMBEDDING_W[1]).ln();
    let mut rows = vec![];
    for (i, c) in cs.iter().enumerate() {
        let pm: Vec<PointMass> = lattice
            .points
            .iter()
            .zip(&masses[i])
            .map(|(a, m)| PointMass {
                w: 1.0 - norm_sq(a),
                mass: *m,
                volume: f64::NAN,
            })
            .collect();
        let rep = statistic_from_masses(&pm, n, lambda, alpha, lattice);
        let eg = (ratios[i][1] / ratios[i][0]).ln() / decades;
        rows.push(ThresholdRow {
            c: *c,
            statistic: rep.value,
            statistic_growth: rep.growth_exponent,
            statistic_unbounded: rep.unbounded,
            embedding_growth: eg,
            embedding_unbounded: eg > GROWTH_THRESHOLD,
        });
    }
    let transition = |flag: &dyn Fn(&ThresholdRow) -> bool| {
        let mut t = None;
        for row in rows.iter().rev() {
            if flag(row) {
                break;
            }
            t = Some(row.c);
        }
        t
    };
    let statistic_transition = transition(&|r| r.statistic_unbounded);
    let embedding_transition = transition(&|r| r.embedding_unbounded);
    Ok(ThresholdScan {
        n,
        alpha,
        lambda,
        p,
        q,
        predicted: (n as f64 + alpha) * (lambda - 1.0),
        rows,
        statistic_transition,
        embedding_transition,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::lattice_gen;
    use crate::kernel::KernelConfig;
    use approx::assert_relative_eq;

    fn small_lattice() -> Lattice {
        lattice_gen(2, 0.5, 0.999).unwrap()
    }

    #[test]
    fn shells_cover_to_horizon() {
        let e = shell_edges(2e-4);
        assert_eq!(e.len(), 4);
        assert_eq!(e[0], (1.0, 0.1));
        assert_eq!(e[3].1, 0.0);
        assert_eq!(shell_index(&e, 1.0), 0);
        assert_eq!(shell_index(&e, 0.1), 1);
        assert_eq!(shell_index(&e, 2e-4), 3);
    }

    #[test]
    fn kinds_follow_lambda() {
        let lat = small_lattice();
        let mu = Measure::atoms(2, vec![(vec![0.3, 0.1], 1.0)]);
        let sup = carleson_statistic(&mu, 1.5, 0.0, &lat).unwrap();
        assert_eq!(sup.kind, StatKind::SupStatistic);
        assert!(sup.value.is_finite() && sup.value > 0.0);
        assert!(!sup.unbounded);
        let lp = carleson_statistic(&mu, 0.5, 0.0, &lat).unwrap();
        assert_eq!(lp.kind, StatKind::LpStatistic);
        assert!(!lp.unbounded);
    }

    #[test]
    fn weighted_volume_profile_is_flat() {
        let lat = small_lattice();
        let prof = vanishing_profile(&Measure::weighted_volume(2, 0.0), 1.0, 0.0, &lat).unwrap();
        for s in &prof.shells {
            assert!((s.value - 1.0).abs() < 1e-9, "{s:?}");
        }
        assert!(!prof.vanishing);
    }

    #[test]
    fn compact_support_vanishes() {
        let lat = small_lattice();
        let mu = Measure::atoms(2, vec![(vec![0.2, 0.0], 1.0)]);
        let prof = vanishing_profile(&mu, 1.0, 0.0, &lat).unwrap();
        assert!(prof.shells[1..].iter().all(|s| s.value == 0.0));
        assert!(prof.vanishing);
    }

    #[test]
    fn lp_norm_of_power_field() {
        let lat = small_lattice();
        let m = 2.0;
        let rep = transform_lp_norm(|x| Ok((1.0 - norm_sq(x)).powf(m)), 2, lat.rmax, Some(&lat), 1.0, -2.0, 16).unwrap();
        // 2 int_0^rmax r (1 - r^2)^{m - 2} dr = (1 - w_h^{m - 1}) / (m - 1)
        let w_h = 1.0 - lat.rmax * lat.rmax;
        assert_relative_eq!(rep.value, 1.0 - w_h, max_relative = 1e-10);
        assert!(!rep.divergent);
        assert!(rep.lattice_growth_exponent.unwrap() < GROWTH_THRESHOLD);
        let one = transform_lp_norm(|_| Ok(1.0), 2, lat.rmax, Some(&lat), 1.0, -2.0, 16).unwrap();
        assert!(one.divergent);
        assert!(one.lattice_growth_exponent.unwrap() > 0.5);
    }

    #[test]
    fn atom_embedding_hits_kernel_diagonal() {
        let kernel = Kernel::new(2, 0.0, KernelConfig::default());
        let x0 = vec![0.4, 0.2];
        let mu = Measure::atoms(2, vec![(x0.clone(), 2.0)]);
        let est = embedding_constant_estimate(&mu, 2.0, 2.0, &kernel, 6, 1).unwrap();
        let rxx = kernel.eval(&x0, &x0).unwrap().value;
        assert_relative_eq!(est.value * est.value, 2.0 * rxx, max_relative = 1e-10);
        let zero = embedding_constant_estimate(&Measure::zero(2), 2.0, 2.0, &kernel, 6, 1).unwrap();
        assert_eq!(zero.value, 0.0);
    }
}
