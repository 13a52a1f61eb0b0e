//! Pseudohyperbolic geometry of the unit ball: the bracket `[x, y]`, Möbius
//! maps, the metric `rho`, pseudohyperbolic balls, and separated lattices.

use std::collections::HashMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::axisym::AxisymGrid;
use crate::error::{condition, require_in_ball, Error, Result};
use crate::kernel::v_alpha;
use crate::polynomial::{random_in_ball, random_unit};
use crate::vector::{dot, norm, norm_sq, sub};

/// Default lattice horizon.
pub const DEFAULT_RMAX: f64 = 1.0 - 1e-4;

/// Ceiling against which measured lattice multiplicities are checked.
pub const MULTIPLICITY_CEILING: usize = 64;

/// Sample size of the coverage and multiplicity audits.
pub const AUDIT_SAMPLES: usize = 10_000;

/// `[x, y] = sqrt(1 - 2 x.y + |x|^2 |y|^2)`, evaluated as
/// `sqrt(|x - y|^2 + (1 - |x|^2)(1 - |y|^2))` to avoid cancellation when both
/// points approach the same boundary point.
pub fn bracket(x: &[f64], y: &[f64]) -> f64 {
    (norm_sq(&sub(x, y)) + (1.0 - norm_sq(x)) * (1.0 - norm_sq(y))).max(0.0).sqrt()
}

/// `phi_a(x) = ((1 - |a|^2)(a - x) + |a - x|^2 a) / [x, a]^2`.
pub fn mobius(a: &[f64], x: &[f64]) -> Result<Vec<f64>> {
    require_in_ball(a, "a")?;
    require_in_ball(x, "x")?;
    Ok(mobius_unchecked(a, x))
}

fn mobius_unchecked(a: &[f64], x: &[f64]) -> Vec<f64> {
    let a2 = norm_sq(a);
    let d = sub(a, x);
    let d2 = norm_sq(&d);
    let b2 = 1.0 - 2.0 * dot(x, a) + norm_sq(x) * a2;
    d.iter()
        .zip(a)
        .map(|(di, ai)| ((1.0 - a2) * di + d2 * ai) / b2)
        .collect()
}

/// `rho(x, y) = |x - y| / [x, y]`.
pub fn rho(x: &[f64], y: &[f64]) -> Result<f64> {
    require_in_ball(x, "x")?;
    require_in_ball(y, "y")?;
    Ok(rho_unchecked(x, y))
}

#[inline]
fn rho_unchecked(x: &[f64], y: &[f64]) -> f64 {
    let b = bracket(x, y);
    if b == 0.0 {
        return 0.0;
    }
    norm(&sub(x, y)) / b
}

/// `rho(x, y) = |phi_x(y)|`, the Möbius form of the metric.
pub fn rho_mobius(x: &[f64], y: &[f64]) -> Result<f64> {
    Ok(norm(&mobius(x, y)?))
}

/// `rho(x, y) < delta` without square roots.
#[inline]
fn within(x: &[f64], y: &[f64], delta2: f64) -> bool {
    let mut d2 = 0.0;
    let mut xy = 0.0;
    let mut x2 = 0.0;
    let mut y2 = 0.0;
    for (a, b) in x.iter().zip(y) {
        d2 += (a - b) * (a - b);
        xy += a * b;
        x2 += a * a;
        y2 += b * b;
    }
    d2 < delta2 * (1.0 - 2.0 * xy + x2 * y2)
}

/// The pseudohyperbolic ball `E_delta(x)` together with its Euclidean form.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PseudoBall {
    pub center_x: Vec<f64>,
    pub delta: f64,
    pub euclid_center: Vec<f64>,
    pub euclid_radius: f64,
}

impl PseudoBall {
    /// Euclidean membership test.
    pub fn contains(&self, y: &[f64]) -> bool {
        norm_sq(&sub(y, &self.euclid_center)) < self.euclid_radius * self.euclid_radius
    }

    pub fn n(&self) -> usize {
        self.center_x.len()
    }
}

/// `E_delta(x)`: center `(1 - d^2) x / (1 - d^2 |x|^2)` and radius
/// `(1 - |x|^2) d / (1 - d^2 |x|^2)`.
pub fn pseudoball(x: &[f64], delta: f64) -> Result<PseudoBall> {
    require_in_ball(x, "x")?;
    require_delta(delta)?;
    let x2 = norm_sq(x);
    let d2 = delta * delta;
    let den = 1.0 - d2 * x2;
    Ok(PseudoBall {
        center_x: x.to_vec(),
        delta,
        euclid_center: x.iter().map(|v| (1.0 - d2) * v / den).collect(),
        euclid_radius: (1.0 - x2) * delta / den,
    })
}

pub(crate) fn require_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::param(condition::UNIT_INTERVAL, format!("delta = {delta}")));
    }
    Ok(())
}

/// Nodes per direction of the grid used for integrals over pseudoballs.
pub const BALL_NODES: usize = 32;

/// `int_{E} g(|y|^2) dnu(y)` over the Euclidean ball of `E`, computed on the
/// unit ball after the affine map `y = c + R z`.
pub fn ball_integral<G>(ball: &PseudoBall, grid: &AxisymGrid, g: G) -> f64
where
    G: Fn(f64) -> f64 + Sync,
{
    let c2 = norm_sq(&ball.euclid_center);
    let c = c2.sqrt();
    let big_r = ball.euclid_radius;
    let scale = big_r.powi(ball.n() as i32);
    scale
        * grid.integrate(|r, ts, out| {
            for (o, t) in out.iter_mut().zip(ts) {
                let y2 = c2 + 2.0 * big_r * c * r * t + big_r * big_r * r * r;
                *o = g(y2);
            }
        })
}

/// `nu_alpha(E_delta(x)) = (1/V_alpha) int_E (1 - |y|^2)^alpha dnu`.
///
/// Defined for every real `alpha` since pseudoballs stay away from the
/// boundary; `V_alpha = 1` for `alpha <= -1`.
pub fn weighted_ball_volume(alpha: f64, ball: &PseudoBall, grid: &AxisymGrid) -> f64 {
    let v = v_alpha(ball.n(), alpha);
    ball_integral(ball, grid, |y2| (1.0 - y2).powf(alpha)) / v
}

/// Default grid for [`weighted_ball_volume`] and pseudoball integrals.
pub fn ball_grid(n: usize) -> AxisymGrid {
    AxisymGrid::uniform(n, BALL_NODES, BALL_NODES)
}

/// A `delta`-separated sequence covering `|x| <= rmax` by `E_delta(a_k)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lattice {
    pub n: usize,
    pub delta: f64,
    pub rmax: f64,
    /// Largest number of balls `E_delta(a_k)` containing one audit point.
    pub multiplicity_bound: usize,
    pub points: Vec<Vec<f64>>,
}

impl Lattice {
    /// Parses a lattice document and checks its structure; the covering and
    /// separation properties are left to [`audit_lattice`].
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let l: Lattice = serde_path_to_error::deserialize(de).map_err(|e| Error::Schema {
            pointer: crate::measure::json_pointer(&e.path().to_string()),
            message: e.inner().to_string(),
        })?;
        let schema = |pointer: String, message: String| Error::Schema { pointer, message };
        if l.n < 2 {
            return Err(schema("/n".into(), format!("dimension must be at least 2, got {}", l.n)));
        }
        if !(l.delta > 0.0 && l.delta < 1.0) {
            return Err(schema("/delta".into(), format!("delta must lie in (0, 1), got {}", l.delta)));
        }
        if !(l.rmax > 0.0 && l.rmax < 1.0) {
            return Err(schema("/rmax".into(), format!("rmax must lie in (0, 1), got {}", l.rmax)));
        }
        for (i, a) in l.points.iter().enumerate() {
            if a.len() != l.n {
                return Err(schema(format!("/points/{i}"), format!("expected {} coordinates, got {}", l.n, a.len())));
            }
            if !(norm_sq(a) < 1.0) || a.iter().any(|v| !v.is_finite()) {
                return Err(schema(format!("/points/{i}"), "point must lie in the open unit ball".into()));
            }
        }
        Ok(l)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("lattice serializes")
    }
}

/// Spatial index for "is any stored point within rho < delta" queries.
///
/// Points are bucketed by hyperbolic radius `artanh |x|` into bands, and inside
/// a band by a cube grid on the direction `x / |x|` whose cell size bounds the
/// direction change between any two points within `rho < delta`.
struct NetIndex {
    n: usize,
    delta: f64,
    width: f64,
    window: usize,
    cells: Vec<f64>,
    bands: Vec<HashMap<Vec<i64>, Vec<usize>>>,
    points: Vec<Vec<f64>>,
}

impl NetIndex {
    fn new(n: usize, delta: f64, rmax: f64) -> Self {
        let hmax = rmax.atanh();
        let width = delta.atanh() / 2.0;
        let count = (hmax / width).ceil() as usize + 2;
        let window = (delta.atanh() / width).ceil() as usize + 1;
        let k = delta * (1.0 + delta) / (1.0 - delta);
        let cells = (0..count)
            .map(|j| {
                let lo_q = (j.saturating_sub(window) as f64 * width).tanh();
                let lo_j = (j as f64 * width).tanh();
                if lo_q == 0.0 || lo_j == 0.0 {
                    3.0
                } else {
                    (k * (1.0 - lo_q * lo_q) / (lo_q * lo_j).sqrt()).min(3.0)
                }
            })
            .collect();
        NetIndex {
            n,
            delta,
            width,
            window,
            cells,
            bands: vec![HashMap::new(); count],
            points: Vec::new(),
        }
    }

    fn band(&self, x: &[f64]) -> usize {
        let r = norm(x).min(1.0 - 1e-16);
        ((r.atanh() / self.width) as usize).min(self.bands.len() - 1)
    }

    fn key(&self, x: &[f64], h: f64) -> Vec<i64> {
        let r = norm(x);
        if r == 0.0 {
            return vec![0; self.n];
        }
        x.iter().map(|v| (v / r / h).floor() as i64).collect()
    }

    /// Calls `visit` on every stored point that may lie within `rho < delta`
    /// of `x`; stops early when `visit` returns `false`.
    fn for_near(&self, x: &[f64], mut visit: impl FnMut(usize) -> bool) {
        let b = self.band(x);
        let lo = b.saturating_sub(self.window);
        let hi = (b + self.window).min(self.bands.len() - 1);
        let mut offset = vec![-1i64; self.n];
        for j in lo..=hi {
            if self.bands[j].is_empty() {
                continue;
            }
            let key = self.key(x, self.cells[j]);
            offset.iter_mut().for_each(|o| *o = -1);
            loop {
                let probe: Vec<i64> = key.iter().zip(&offset).map(|(k, o)| k + o).collect();
                if let Some(ids) = self.bands[j].get(&probe) {
                    for &i in ids {
                        if !visit(i) {
                            return;
                        }
                    }
                }
                // next offset in {-1, 0, 1}^n
                let mut d = 0;
                while d < self.n {
                    offset[d] += 1;
                    if offset[d] <= 1 {
                        break;
                    }
                    offset[d] = -1;
                    d += 1;
                }
                if d == self.n {
                    break;
                }
            }
        }
    }

    fn is_covered(&self, x: &[f64]) -> bool {
        let d2 = self.delta * self.delta;
        let mut hit = false;
        self.for_near(x, |i| {
            hit = within(x, &self.points[i], d2);
            !hit
        });
        hit
    }

    fn multiplicity(&self, x: &[f64]) -> usize {
        let d2 = self.delta * self.delta;
        let mut count = 0;
        self.for_near(x, |i| {
            if within(x, &self.points[i], d2) {
                count += 1;
            }
            true
        });
        count
    }

    fn insert(&mut self, x: Vec<f64>) {
        let b = self.band(&x);
        let key = self.key(&x, self.cells[b]);
        self.bands[b].entry(key).or_default().push(self.points.len());
        self.points.push(x);
    }

    /// Adds `x` if it is at distance at least `delta` from every stored point.
    fn offer(&mut self, x: Vec<f64>) -> bool {
        if self.is_covered(&x) {
            return false;
        }
        self.insert(x);
        true
    }
}

/// Directions on `S^{n-1}` with roughly `spacing` between neighbours, in a
/// deterministic order (by angle for `n = 2`, by height then azimuth for `n = 3`).
fn shell_directions(n: usize, spacing: f64, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    use std::f64::consts::PI;
    match n {
        2 => {
            let m = ((2.0 * PI / spacing).ceil() as usize).max(1);
            (0..m)
                .map(|j| {
                    let th = 2.0 * PI * j as f64 / m as f64;
                    vec![th.cos(), th.sin()]
                })
                .collect()
        }
        3 => {
            // Fibonacci sphere
            let m = ((4.0 * PI / (spacing * spacing)).ceil() as usize).max(1);
            let golden = PI * (3.0 - 5f64.sqrt());
            (0..m)
                .map(|j| {
                    let z = 1.0 - (2.0 * j as f64 + 1.0) / m as f64;
                    let s = (1.0 - z * z).max(0.0).sqrt();
                    let ph = golden * j as f64;
                    vec![s * ph.cos(), s * ph.sin(), z]
                })
                .collect()
        }
        _ => {
            let area = 2.0 * PI.powf(n as f64 / 2.0) / statrs::function::gamma::gamma(n as f64 / 2.0);
            let m = ((area / spacing.powi(n as i32 - 1)).ceil() as usize).clamp(1, 1 << 22);
            (0..m).map(|_| random_unit(n, rng)).collect()
        }
    }
}

/// Offers candidates on shells `tanh(j d)` reaching `rmax`, each shell
/// sampled with pseudohyperbolic spacing about `delta / refine`.
fn shell_pass(index: &mut NetIndex, rmax: f64, refine: f64, rng: &mut ChaCha8Rng) {
    let delta = index.delta;
    let hmax = rmax.atanh();
    let shells = (hmax / (delta / refine)).ceil().max(1.0) as usize;
    let d = hmax / shells as f64;
    for j in 1..=shells {
        let r = (j as f64 * d).tanh();
        let spacing = (delta / refine) * (1.0 - r * r) / r;
        for u in shell_directions(index.n, spacing.min(1.0), rng) {
            index.offer(u.iter().map(|v| r * v).collect());
        }
    }
}

/// Uniform points in `|x| <= rmax`, half Euclidean-uniform and half uniform in
/// hyperbolic radius.
fn sample_points(n: usize, rmax: f64, count: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    use rand::Rng;
    let hmax = rmax.atanh();
    (0..count)
        .map(|i| {
            if i % 2 == 0 {
                random_in_ball(n, rmax, rng)
            } else {
                let r = (rng.random::<f64>() * hmax).tanh();
                random_unit(n, rng).into_iter().map(|v| r * v).collect()
            }
        })
        .collect()
}

const LATTICE_SEED: u64 = 0x1a77_1ce5;
const REPAIR_ROUNDS: usize = 6;
const REPAIR_SAMPLES: usize = 200_000;

/// Greedy `delta`-separated net on pseudohyperbolically equispaced shells,
/// origin first, followed by a refinement pass and repair rounds that insert
/// any sampled point not yet covered. The output depends only on
/// `(n, delta, rmax)`.
pub fn lattice_gen(n: usize, delta: f64, rmax: f64) -> Result<Lattice> {
    if n < 2 {
        return Err(Error::UnsupportedDimension(n));
    }
    require_delta(delta)?;
    if !(rmax > 0.0 && rmax < 1.0) {
        return Err(Error::param(condition::UNIT_INTERVAL, format!("rmax = {rmax}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(LATTICE_SEED);
    let mut index = NetIndex::new(n, delta, rmax);
    index.insert(vec![0.0; n]);
    shell_pass(&mut index, rmax, 3.0, &mut rng);
    if n == 2 {
        // Circle shells are cheap; elsewhere the candidate count grows like
        // refine^(n-1) and the repair rounds close the remaining gaps.
        shell_pass(&mut index, rmax, 6.0, &mut rng);
    }
    for _ in 0..REPAIR_ROUNDS {
        let mut added = 0;
        for x in sample_points(n, rmax, REPAIR_SAMPLES, &mut rng) {
            if index.offer(x) {
                added += 1;
            }
        }
        if added == 0 {
            break;
        }
    }
    let mut audit_rng = ChaCha8Rng::seed_from_u64(LATTICE_SEED ^ 0xa0d1);
    let multiplicity_bound = (0..AUDIT_SAMPLES)
        .map(|_| index.multiplicity(&random_in_ball(n, rmax, &mut audit_rng)))
        .max()
        .unwrap_or(0);
    Ok(Lattice {
        n,
        delta,
        rmax,
        multiplicity_bound,
        points: index.points,
    })
}

/// Result of re-checking a lattice against its defining properties.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LatticeAudit {
    pub points: usize,
    /// Smallest `rho(a_j, a_k)` over all pairs.
    pub min_separation: f64,
    pub separation_ok: bool,
    pub samples: usize,
    pub uncovered: usize,
    pub max_multiplicity: usize,
    pub multiplicity_ok: bool,
}

impl LatticeAudit {
    pub fn passed(&self) -> bool {
        self.separation_ok && self.uncovered == 0 && self.multiplicity_ok
    }
}

/// Smallest pairwise `rho` over the whole lattice, by exhaustive search.
///
/// Pairs are visited in order of hyperbolic radius; a pair is skipped only
/// when the radial lower bound `rho(x, y) >= tanh|artanh|x| - artanh|y||`
/// already exceeds the smallest distance found, so the result is exact.
/// Quadratic in the worst case; [`separation_check`] scales to large lattices.
pub fn min_separation(points: &[Vec<f64>]) -> f64 {
    let mut order: Vec<(f64, usize)> = points
        .iter()
        .enumerate()
        .map(|(i, p)| (norm(p).atanh(), i))
        .collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut best = f64::INFINITY;
    for i in 0..order.len() {
        let (hi, pi) = order[i];
        for &(hj, pj) in &order[i + 1..] {
            if (hj - hi).tanh() >= best {
                break;
            }
            let r = rho_unchecked(&points[pi], &points[pj]);
            if r < best {
                best = r;
            }
        }
    }
    best
}

/// Pairwise separation check covering every pair of points.
///
/// Every pair with `rho < delta` is visited through the neighbour index, whose
/// buckets are sized by the bounds `|x - y| < delta [x, y]` and
/// `[x, y] <= (1 - |x|^2)(1 + delta)/(1 - delta)`; pairs outside neighbouring
/// buckets are therefore at distance at least `delta`. Returns the smallest
/// `rho` among visited pairs, which equals the true minimum whenever that
/// minimum is below `delta`.
pub fn separation_check(points: &[Vec<f64>], n: usize, delta: f64) -> f64 {
    let rmax = max_radius(points).max(1e-3);
    let mut index = NetIndex::new(n, delta, rmax);
    for p in points {
        index.insert(p.clone());
    }
    let mut best = f64::INFINITY;
    for (i, p) in points.iter().enumerate() {
        index.for_near(p, |j| {
            if j != i {
                best = best.min(rho_unchecked(p, &index.points[j]));
            }
            true
        });
    }
    best
}

/// Separation, coverage and multiplicity audits with `samples` uniform
/// points in `|x| <= rmax` drawn from `seed`.
pub fn audit_lattice(lattice: &Lattice, samples: usize, seed: u64) -> Result<LatticeAudit> {
    require_delta(lattice.delta)?;
    for p in &lattice.points {
        if p.len() != lattice.n {
            return Err(Error::Precondition(format!(
                "lattice point of dimension {} in a dimension-{} lattice",
                p.len(),
                lattice.n
            )));
        }
        require_in_ball(p, "lattice point")?;
    }
    let min_sep = separation_check(&lattice.points, lattice.n, lattice.delta);
    let mut index = NetIndex::new(lattice.n, lattice.delta, lattice.rmax.max(max_radius(&lattice.points)));
    for p in &lattice.points {
        index.insert(p.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut uncovered = 0;
    let mut max_mult = 0;
    for _ in 0..samples {
        let x = random_in_ball(lattice.n, lattice.rmax, &mut rng);
        let m = index.multiplicity(&x);
        if m == 0 {
            uncovered += 1;
        }
        max_mult = max_mult.max(m);
    }
    Ok(LatticeAudit {
        points: lattice.points.len(),
        min_separation: min_sep,
        separation_ok: min_sep >= lattice.delta,
        samples,
        uncovered,
        max_multiplicity: max_mult,
        multiplicity_ok: max_mult <= MULTIPLICITY_CEILING,
    })
}

fn max_radius(points: &[Vec<f64>]) -> f64 {
    points.iter().map(|p| norm(p)).fold(0.0, f64::max).min(1.0 - 1e-15)
}

/// Indices of lattice points whose ball `E_delta(a_k)` contains `x`.
pub fn balls_containing(lattice: &Lattice, x: &[f64]) -> Vec<usize> {
    let d2 = lattice.delta * lattice.delta;
    lattice
        .points
        .iter()
        .enumerate()
        .filter(|(_, a)| within(x, a, d2))
        .map(|(i, _)| i)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn bracket_identities() {
        let x = [0.3, -0.4, 0.1];
        assert_eq!(bracket(&x, &[0.0; 3]), 1.0);
        assert_relative_eq!(bracket(&x, &x), 1.0 - norm_sq(&x), max_relative = 1e-14);
        let y = [-0.2, 0.5, 0.6];
        assert_eq!(bracket(&x, &y), bracket(&y, &x));
    }

    #[test]
    fn mobius_involution() {
        let a = [0.5, -0.3];
        let x = [0.1, 0.7];
        assert_relative_eq!(mobius(&a, &[0.0, 0.0]).unwrap()[0], a[0], max_relative = 1e-15);
        assert!(norm(&mobius(&a, &a).unwrap()) < 1e-15);
        let back = mobius(&a, &mobius(&a, &x).unwrap()).unwrap();
        for (b, v) in back.iter().zip(&x) {
            assert!((b - v).abs() < 1e-12);
        }
    }

    #[test]
    fn rho_forms_agree() {
        let x = [0.6, 0.2, -0.1];
        let y = [-0.3, 0.5, 0.4];
        assert_eq!(rho(&x, &x).unwrap(), 0.0);
        assert_relative_eq!(rho(&x, &[0.0; 3]).unwrap(), norm(&x), max_relative = 1e-15);
        assert!((rho(&x, &y).unwrap() - rho_mobius(&x, &y).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn pseudoball_formulas() {
        let b = pseudoball(&[0.0, 0.0], 0.3).unwrap();
        assert_eq!(b.euclid_radius, 0.3);
        assert_eq!(b.euclid_center, vec![0.0, 0.0]);
        let b = pseudoball(&[0.5, 0.0], 0.5).unwrap();
        assert_relative_eq!(b.euclid_center[0], 0.4, max_relative = 1e-15);
        assert_relative_eq!(b.euclid_radius, 0.4, max_relative = 1e-15);
        assert!(pseudoball(&[0.5, 0.0], 1.0).is_err());
    }

    #[test]
    fn ball_volume_at_origin() {
        for n in [2, 3, 4] {
            let g = ball_grid(n);
            let b = pseudoball(&vec![0.0; n], 0.4).unwrap();
            assert_relative_eq!(weighted_ball_volume(0.0, &b, &g), 0.4f64.powi(n as i32), max_relative = 1e-13);
        }
        // polynomial weight: nu_2 of E at the origin in the plane is 3 int_0^d (1-r^2)^2 2r dr
        let g = ball_grid(2);
        let b = pseudoball(&[0.0, 0.0], 0.5).unwrap();
        let exact = 3.0 * (1.0 - (1.0f64 - 0.25).powi(3)) / 3.0;
        assert_relative_eq!(weighted_ball_volume(2.0, &b, &g), exact, max_relative = 1e-12);
    }

    #[test]
    fn small_lattice_audits() {
        let lat = lattice_gen(2, 0.5, 0.99).unwrap();
        assert_eq!(lat.points[0], vec![0.0, 0.0]);
        let audit = audit_lattice(&lat, 2000, 7).unwrap();
        assert!(audit.passed(), "{audit:?}");
        assert_eq!(lat, lattice_gen(2, 0.5, 0.99).unwrap());
    }

    #[test]
    fn min_separation_matches_brute_force() {
        let lat = lattice_gen(2, 0.6, 0.95).unwrap();
        let mut brute = f64::INFINITY;
        for i in 0..lat.points.len() {
            for j in i + 1..lat.points.len() {
                brute = brute.min(rho(&lat.points[i], &lat.points[j]).unwrap());
            }
        }
        assert_eq!(min_separation(&lat.points), brute);
    }

    #[test]
    fn indexed_check_finds_close_pairs() {
        let mut lat = lattice_gen(3, 0.5, 0.9).unwrap();
        let exact = min_separation(&lat.points);
        assert_eq!(separation_check(&lat.points, 3, 0.5), exact);
        // plant a violating pair near the boundary
        let a = lat.points.last().unwrap().clone();
        let b: Vec<f64> = a.iter().map(|v| v * 0.9999).collect();
        lat.points.push(b.clone());
        let planted = rho(&a, &b).unwrap();
        assert!(planted < 0.5);
        assert_eq!(separation_check(&lat.points, 3, 0.5), min_separation(&lat.points));
    }

    #[test]
    fn lattice_json_round_trip() {
        let lat = lattice_gen(2, 0.5, 0.9).unwrap();
        let back = Lattice::from_json(&lat.to_json()).unwrap();
        assert_eq!(back, lat);
        let bad = lat.to_json().replace("\"delta\":0.5", "\"delta\":1.5");
        match Lattice::from_json(&bad) {
            Err(Error::Schema { pointer, .. }) => assert_eq!(pointer, "/delta"),
            other => panic!("{other:?}"),
        }
    }
}
