use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Battery, Outcome};
use crate::error::Result;
use crate::geometry::{
    audit_lattice, ball_grid, bracket, lattice_gen, min_separation, pseudoball, rho, separation_check,
    weighted_ball_volume, AUDIT_SAMPLES, MULTIPLICITY_CEILING,
};
use crate::kernel::v_alpha;
use crate::polynomial::{random_in_ball, random_unit};
use crate::vector::{norm_sq, scale};

const SLACK: f64 = 1e-12;
const TRIPLES: usize = 100_000;
const DELTAS: [f64; 3] = [0.3, 0.5, 0.7];

/// Point with `1 - |x|` log-uniform in `[1e-4, 1]`, so that boundary
/// configurations are sampled as often as interior ones.
fn boundary_biased(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let r = 1.0 - 10f64.powf(-4.0 * rng.random::<f64>());
    scale(r, &random_unit(n, rng))
}

/// Point of `E_delta(x)` drawn through its Euclidean form.
fn near(x: &[f64], delta: f64, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
    let ball = pseudoball(x, delta)?;
    let z = random_in_ball(x.len(), 1.0, rng);
    Ok(ball
        .euclid_center
        .iter()
        .zip(&z)
        .map(|(c, z)| c + ball.euclid_radius * z)
        .collect())
}

fn outside(v: f64, lo: f64, hi: f64) -> bool {
    v < lo * (1.0 - SLACK) || v > hi * (1.0 + SLACK)
}

pub(super) fn run(b: &mut Battery) {
    b.run(
        "bracket-ratio",
        "(1 - rho)/(1 + rho) <= [x, a]/[y, a] <= (1 + rho)/(1 - rho) with rho = rho(x, y)",
        [0.0, 0.0],
        |b| {
            let mut rng = ChaCha8Rng::seed_from_u64(b.seed("bracket-ratio"));
            let mut violations = 0usize;
            for i in 0..TRIPLES {
                let n = 2 + i % 2;
                let x = boundary_biased(n, &mut rng);
                // a third of the pairs are close, where the bounds are tight
                let y = if i % 3 == 0 {
                    near(&x, 0.2, &mut rng)?
                } else {
                    boundary_biased(n, &mut rng)
                };
                let a = boundary_biased(n, &mut rng);
                let r = rho(&x, &y)?;
                let ratio = bracket(&x, &a) / bracket(&y, &a);
                if outside(ratio, (1.0 - r) / (1.0 + r), (1.0 + r) / (1.0 - r)) {
                    violations += 1;
                }
            }
            Ok(Outcome::with(violations as f64, format!("violations over {TRIPLES} triples")))
        },
    );

    b.run(
        "near-pair-comparability",
        "rho(x, y) < delta puts [x, y], 1 - |x|^2 and 1 - |y|^2 within factors q = (1 - delta)/(1 + delta) of each other",
        [0.0, 0.0],
        |b| {
            let mut rng = ChaCha8Rng::seed_from_u64(b.seed("near-pair-comparability"));
            let mut violations = 0usize;
            for delta in DELTAS {
                let q = (1.0 - delta) / (1.0 + delta);
                for i in 0..5_000 {
                    let x = boundary_biased(2 + i % 2, &mut rng);
                    let y = near(&x, delta, &mut rng)?;
                    if rho(&x, &y)? >= delta {
                        continue;
                    }
                    let (wx, wy, bxy) = (1.0 - norm_sq(&x), 1.0 - norm_sq(&y), bracket(&x, &y));
                    if outside(bxy / wx, q, 1.0 / q)
                        || outside(bxy / wy, q, 1.0 / q)
                        || outside(wy / wx, q * q, 1.0 / (q * q))
                    {
                        violations += 1;
                    }
                }
            }
            Ok(Outcome::new(violations as f64))
        },
    );

    b.run(
        "bracket-comparability-sharp",
        "rho(x, y) < delta implies (1 - delta)/(1 + delta) <= [x, a]/[y, a] <= (1 + delta)/(1 - delta)",
        [0.0, 0.0],
        |b| {
            let mut rng = ChaCha8Rng::seed_from_u64(b.seed("bracket-comparability-sharp"));
            let mut violations = 0usize;
            for delta in DELTAS {
                let q = (1.0 - delta) / (1.0 + delta);
                for i in 0..10_000 {
                    let n = 2 + i % 2;
                    let x = boundary_biased(n, &mut rng);
                    let y = near(&x, delta, &mut rng)?;
                    if rho(&x, &y)? >= delta {
                        continue;
                    }
                    let a = boundary_biased(n, &mut rng);
                    if outside(bracket(&x, &a) / bracket(&y, &a), q, 1.0 / q) {
                        violations += 1;
                    }
                }
            }
            Ok(Outcome::new(violations as f64))
        },
    );

    b.run(
        "pseudoball-membership",
        "rho(x, y) < delta exactly when y lies in the Euclidean form of E_delta(x)",
        [0.0, 0.0],
        |b| {
            let mut rng = ChaCha8Rng::seed_from_u64(b.seed("pseudoball-membership"));
            let mut mismatches = 0usize;
            for i in 0..20_000 {
                let n = 2 + i % 2;
                let delta = DELTAS[i % 3];
                let x = boundary_biased(n, &mut rng);
                let ball = pseudoball(&x, delta)?;
                let y = near(&x, (delta * 1.3).min(0.95), &mut rng)?;
                let r = rho(&x, &y)?;
                if (r - delta).abs() > 1e-9 && (r < delta) != ball.contains(&y) {
                    mismatches += 1;
                }
            }
            Ok(Outcome::new(mismatches as f64))
        },
    );

    let audit = b
        .lattice()
        .and_then(|l| audit_lattice(l, AUDIT_SAMPLES, b.seed("lattice-audit")))
        .map_err(|e| e.to_string());
    let separation = audit
        .as_ref()
        .map(|a| Outcome::with(a.min_separation / 0.5, format!("{} points", a.points)))
        .map_err(|e| crate::Error::Precondition(e.clone()));
    b.run(
        "lattice-separation",
        "every pair of lattice points is at pseudohyperbolic distance at least delta (all pairs within delta visited through the neighbour index; delta = 0.5, n = 2); min rho / delta",
        [1.0, super::UNBOUNDED],
        |_| separation,
    );
    b.run(
        "lattice-separation-exhaustive",
        "the neighbour-index separation check agrees with exhaustive pairwise search on the lattice out to |x| = 0.999",
        [0.0, 0.0],
        |_| {
            let l = lattice_gen(2, 0.5, 0.999)?;
            let fast = separation_check(&l.points, 2, 0.5);
            let exact = min_separation(&l.points);
            Ok(Outcome::with((fast - exact).abs(), format!("{} points, min rho {exact:.9}", l.points.len())))
        },
    );
    let audit_field = |f: fn(&crate::geometry::LatticeAudit) -> f64| match &audit {
        Ok(a) => Ok(Outcome::with(f(a), format!("{} points, {} samples", a.points, a.samples))),
        Err(e) => Err(crate::Error::Precondition(e.clone())),
    };
    let uncovered = audit_field(|a| a.uncovered as f64);
    b.run(
        "lattice-coverage",
        "the balls E_delta(a_k) cover every sampled point inside the horizon",
        [0.0, 0.0],
        |_| uncovered,
    );
    let multiplicity = audit_field(|a| a.max_multiplicity as f64);
    b.run(
        "lattice-multiplicity",
        "no sampled point lies in more than the multiplicity ceiling of balls E_delta(a_k)",
        [1.0, MULTIPLICITY_CEILING as f64],
        |_| multiplicity,
    );

    b.run(
        "ball-volume-bracket",
        "nu_alpha(E_delta(x)) / (1 - |x|^2)^(n + alpha) lies in (delta^n / V_alpha) [min(q^(2 alpha), q^(-2 alpha)), max(q^(2 alpha), q^(-2 alpha)) / (1 - delta^2)^n]",
        [0.0, 1.0 + 1e-12],
        |_| {
            let mut worst: f64 = 0.0;
            let mut extremes = (f64::INFINITY, 0.0f64);
            for n in [2usize, 3] {
                let grid = ball_grid(n);
                let nf = n as f64;
                for alpha in [0.0, 2.0] {
                    for delta in [0.3, 0.5] {
                        let q: f64 = (1.0 - delta) / (1.0 + delta);
                        let (qa, qb) = (q.powf(2.0 * alpha), q.powf(-2.0 * alpha));
                        let base = delta.powf(nf) / v_alpha(n, alpha);
                        let lo = base * qa.min(qb);
                        let hi = base * qa.max(qb) / (1.0 - delta * delta).powf(nf);
                        for r in [0.0, 0.5, 0.9, 0.99, 0.999] {
                            let mut x = vec![0.0; n];
                            x[0] = r;
                            let ball = pseudoball(&x, delta)?;
                            let ratio = weighted_ball_volume(alpha, &ball, &grid)
                                / (1.0 - r * r).powf(nf + alpha);
                            let rel = ratio / base;
                            extremes = (extremes.0.min(rel), extremes.1.max(rel));
                            worst = worst.max(lo / ratio).max(ratio / hi);
                        }
                    }
                }
            }
            Ok(Outcome::with(
                worst,
                format!(
                    "max of lower/value and value/upper; value * V_alpha / delta^n ranged over [{:.4}, {:.4}]",
                    extremes.0, extremes.1
                ),
            ))
        },
    );
}
