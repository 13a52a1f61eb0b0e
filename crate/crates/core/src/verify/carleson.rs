use std::collections::HashMap;
use std::sync::Mutex;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Battery, Outcome};
use crate::carleson::{carleson_threshold_scan, transform_lp_norm, vanishing_profile};
use crate::error::Result;
use crate::geometry::{ball_grid, pseudoball, rho, weighted_ball_volume};
use crate::kernel::{v_alpha, Kernel, KernelConfig};
use crate::measure::{averaging, berezin2, berezin_t, berezin_type, measure_of_pseudoball, Measure};
use crate::polynomial::random_in_ball;
use crate::quadrature::QuadratureRule;
use crate::vector::norm_sq;

/// Step of the `c` grid in the threshold scans.
pub(crate) const THRESHOLD_STEP: f64 = 0.1;
/// Grid points on each side of the predicted threshold.
const THRESHOLD_HALF_WIDTH: i32 = 5;

/// `(lambda, c)` pairs for the vanishing profiles of `nu_c` with `alpha = 0`.
const VANISHING: [(f64, f64); 4] = [(1.0, 0.5), (1.0, 1.0), (1.5, 1.5), (1.5, 2.0)];

/// Horizons for the `L^p` classifications.
const CLASS_HORIZON: f64 = 0.999;
const CLASS_LEVEL: usize = 16;

/// Memoizes a radial field by `|x|^2`.
struct RadialMemo<F> {
    field: F,
    cache: Mutex<HashMap<u64, f64>>,
}

impl<F: Fn(&[f64]) -> Result<f64> + Sync> RadialMemo<F> {
    fn new(field: F) -> Self {
        RadialMemo {
            field,
            cache: Mutex::new(HashMap::new()),
        }
    }

    fn get(&self, x: &[f64]) -> Result<f64> {
        let key = (norm_sq(x) * 2f64.powi(44)).round() as u64;
        if let Some(v) = self.cache.lock().expect("memo lock").get(&key) {
            return Ok(*v);
        }
        let v = (self.field)(x)?;
        self.cache.lock().expect("memo lock").insert(key, v);
        Ok(v)
    }
}

fn nu(c: f64) -> Measure {
    Measure::weighted_volume(2, c)
}

fn class_measures() -> Vec<(&'static str, Measure)> {
    vec![
        ("nu_0", nu(0.0)),
        ("atoms", Measure::atoms(2, vec![(vec![0.3, 0.1], 1.0), (vec![-0.6, 0.5], 0.5), (vec![0.0, -0.9], 0.2)])),
        ("nu_0.25", nu(0.25)),
        ("nu_1", nu(1.0)),
        ("nu_2", nu(2.0)),
    ]
}

pub(super) fn run(b: &mut Battery) {
    b.run(
        "averaging-weighted-volume",
        "the averaging function of nu_alpha is identically 1",
        [0.0, 1e-9],
        |b| {
            let mut rng = ChaCha8Rng::seed_from_u64(b.seed("averaging-weighted-volume"));
            let mut worst: f64 = 0.0;
            for n in [2, 3] {
                let grid = ball_grid(n);
                for alpha in [-0.5, 0.0, 2.0] {
                    let mu = Measure::weighted_volume(n, alpha);
                    for delta in [0.3, 0.5, 0.7] {
                        for r in [0.0, 0.5, 0.9, 0.99, 0.999] {
                            let mut x = crate::polynomial::random_unit(n, &mut rng);
                            x.iter_mut().for_each(|c| *c *= r);
                            worst = worst.max((averaging(&mu, alpha, delta, &x, &grid)? - 1.0).abs());
                        }
                    }
                }
            }
            Ok(Outcome::new(worst))
        },
    );

    for lambda in [1.0, 1.5] {
        let cstar = 2.0 * (lambda - 1.0);
        let cs: Vec<f64> = (-THRESHOLD_HALF_WIDTH..=THRESHOLD_HALF_WIDTH)
            .map(|i| cstar + THRESHOLD_STEP * i as f64)
            .collect();
        let scan = b.lattice().and_then(|lat| {
            let kernel = Kernel::new(2, 0.0, KernelConfig::default());
            carleson_threshold_scan(&kernel, lambda, 2.0, &cs, lat)
        });
        let (stat, emb) = match &scan {
            Ok(s) => (Ok(s.statistic_transition), Ok(s.embedding_transition)),
            Err(e) => (Err(e.to_string()), Err(e.to_string())),
        };
        let score = |t: std::result::Result<Option<f64>, String>| match t {
            Ok(Some(t)) => Ok(Outcome::with((t - cstar).abs(), format!("transition at c = {t:.2}, predicted {cstar:.2}"))),
            Ok(None) => Ok(Outcome::with(f64::INFINITY, "no transition on the grid")),
            Err(e) => Err(crate::Error::Precondition(e)),
        };
        let bracket = [0.0, THRESHOLD_STEP + 1e-9];
        let stat = score(stat);
        b.run(
            &format!("carleson-threshold-statistic-lambda{lambda}"),
            "the lattice statistic of mu_c = nu_c / V_c (n = 2, alpha = 0) stops growing with the horizon at c = (n + alpha)(lambda - 1), within one grid step",
            bracket,
            |_| stat,
        );
        let emb = score(emb);
        b.run(
            &format!("carleson-threshold-embedding-lambda{lambda}"),
            "the embedding ratio of kernel sections for mu_c stops growing at the same c",
            bracket,
            |_| emb,
        );
    }

    b.run(
        "vanishing-profile-slope",
        "for mu = nu_c the weighted lattice averages decay like (1 - |a|^2)^(c - c*) with c* = (n + alpha)(lambda - 1); relative slope error",
        [0.0, 0.05],
        |b| {
            let lat = b.lattice()?;
            let mut worst: f64 = 0.0;
            let mut notes = vec![];
            for (lambda, c) in VANISHING {
                let expected = c - 2.0 * (lambda - 1.0);
                let prof = vanishing_profile(&nu(c), lambda, 0.0, lat)?;
                let slope = prof.slope.unwrap_or(f64::NAN);
                let err = (slope - expected).abs() / expected;
                worst = if err.is_nan() { f64::NAN } else { worst.max(err) };
                notes.push(format!("lambda {lambda} c {c}: {slope:.4}"));
            }
            Ok(Outcome::with(worst, notes.join("; ")))
        },
    );

    b.run(
        "averaging-class-delta-independent",
        "membership of the averaging function in L^p_{-n} (p = 2) reads the same for delta in {0.3, 0.5, 0.7}; value counts measures whose reading changes",
        [0.0, 0.0],
        |_| {
            let grid = ball_grid(2);
            let mut changes = 0;
            let mut notes = vec![];
            for (name, mu) in class_measures() {
                let mut reads = vec![];
                for delta in [0.3, 0.5, 0.7] {
                    let field = RadialMemo::new(|x: &[f64]| averaging(&mu, 0.0, delta, x, &grid));
                    let f = |x: &[f64]| if mu.is_radial() { field.get(x) } else { averaging(&mu, 0.0, delta, x, &grid) };
                    let rep = transform_lp_norm(f, 2, CLASS_HORIZON, None, 2.0, -2.0, CLASS_LEVEL)?;
                    reads.push(!rep.divergent);
                }
                if reads.iter().any(|r| *r != reads[0]) {
                    changes += 1;
                }
                notes.push(format!("{name}: {}", if reads[0] { "finite" } else { "divergent" }));
            }
            Ok(Outcome::with(changes as f64, notes.join("; ")))
        },
    );

    b.run(
        "transform-class-agreement",
        "the averaging function, the bracket transform (s = 2) and the Berezin transform (t = 2) of radial measures are all in L^p_{-n} (p = 2) or all outside; value counts disagreeing measures",
        [0.0, 0.0],
        |_| {
            let grid = ball_grid(2);
            let kernel = Kernel::new(2, 0.0, KernelConfig::default());
            let mut disagreements = 0;
            let mut notes = vec![];
            for c in [0.0, 0.25, 1.0, 2.0] {
                let mu = nu(c);
                let hat = RadialMemo::new(|x: &[f64]| averaging(&mu, 0.0, 0.5, x, &grid));
                let bar = RadialMemo::new(|x: &[f64]| berezin_type(&mu, 0.0, 2.0, x));
                let tilde = RadialMemo::new(|x: &[f64]| berezin_t(&mu, 2.0, x, &kernel));
                let reads = [
                    !transform_lp_norm(|x| hat.get(x), 2, CLASS_HORIZON, None, 2.0, -2.0, CLASS_LEVEL)?.divergent,
                    !transform_lp_norm(|x| bar.get(x), 2, CLASS_HORIZON, None, 2.0, -2.0, CLASS_LEVEL)?.divergent,
                    !transform_lp_norm(|x| tilde.get(x), 2, CLASS_HORIZON, None, 2.0, -2.0, CLASS_LEVEL)?.divergent,
                ];
                if reads.iter().any(|r| *r != reads[0]) {
                    disagreements += 1;
                }
                notes.push(format!("nu_{c}: {reads:?}"));
            }
            Ok(Outcome::with(disagreements as f64, notes.join("; ")))
        },
    );

    b.run(
        "transform-pointwise-power-bound",
        "for mu = nu_c the three transforms divided by (1 - |x|^2)^c stay within a bounded band; value is the largest max/min over the radius scan",
        [1.0, 5.0],
        |_| {
            let grid = ball_grid(2);
            let kernel = Kernel::new(2, 0.0, KernelConfig::default());
            let mut worst: f64 = 1.0;
            for c in [0.5, 1.0] {
                let mu = nu(c);
                let fields: [&dyn Fn(&[f64]) -> Result<f64>; 3] = [
                    &|x| averaging(&mu, 0.0, 0.5, x, &grid),
                    &|x| berezin_type(&mu, 0.0, 2.0, x),
                    &|x| berezin_t(&mu, 2.0, x, &kernel),
                ];
                for f in fields {
                    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
                    for i in 0..=6 {
                        let w = 10f64.powf(-0.5 * i as f64);
                        let x = [(1.0 - w).sqrt(), 0.0];
                        let v = f(&x)? / w.powf(c);
                        lo = lo.min(v);
                        hi = hi.max(v);
                    }
                    worst = worst.max(hi / lo);
                }
            }
            Ok(Outcome::new(worst))
        },
    );

    b.run(
        "transform-linearity",
        "averaging, bracket and Berezin transforms are additive and positively homogeneous on atomic measures; largest relative defect",
        [0.0, 1e-12],
        |b| {
            let mut rng = ChaCha8Rng::seed_from_u64(b.seed("transform-linearity"));
            let grid = ball_grid(2);
            let k0 = Kernel::new(2, 0.0, KernelConfig::default());
            let k1 = Kernel::new(2, 1.0, KernelConfig::default());
            let atoms = |m: usize, rng: &mut ChaCha8Rng| {
                Measure::atoms(2, (0..m).map(|_| (random_in_ball(2, 0.9, rng), rng.random_range(0.1..2.0))).collect())
            };
            let mut worst: f64 = 0.0;
            for _ in 0..10 {
                let (m1, m2) = (atoms(3, &mut rng), atoms(4, &mut rng));
                let c = rng.random_range(0.1..5.0);
                let mut sum = m1.scaled(c);
                sum.atoms.extend(m2.atoms.iter().cloned());
                let x = random_in_ball(2, 0.9, &mut rng);
                let transforms: [&dyn Fn(&Measure) -> Result<f64>; 4] = [
                    &|m| averaging(m, 0.0, 0.5, &x, &grid),
                    &|m| berezin_type(m, 0.0, 1.0, &x),
                    &|m| berezin_t(m, 2.0, &x, &k0),
                    &|m| berezin2(m, 0.0, &x, &k1),
                ];
                for t in transforms {
                    let (a, b2, s) = (t(&m1)?, t(&m2)?, t(&sum)?);
                    let expect = c * a + b2;
                    if expect != 0.0 {
                        worst = worst.max((s - expect).abs() / expect.abs());
                    }
                }
            }
            Ok(Outcome::new(worst))
        },
    );

    b.run(
        "averaging-inequality",
        "mu(E(x))^p <= C / nu_alpha(E(x)) int_{E(x)} mu(E(y))^p dnu_alpha(y), E = E_delta, delta = 0.5; value is the empirical C",
        [0.0, 10.0],
        |b| {
            let mut rng = ChaCha8Rng::seed_from_u64(b.seed("averaging-inequality"));
            let grid = ball_grid(2);
            let rule = QuadratureRule::new(2, 0.0, 32)?;
            let delta = 0.5;
            let mut worst: f64 = 0.0;
            for alpha in [0.0, 1.0] {
                for p in [1.0, 2.0] {
                    for _ in 0..20 {
                        let x = random_in_ball(2, 0.95, &mut rng);
                        let ball = pseudoball(&x, delta)?;
                        // atoms in and around E(x), where the inequality is tight
                        let mu = Measure::atoms(
                            2,
                            (0..4)
                                .map(|_| {
                                    let z = random_in_ball(2, 1.3, &mut rng);
                                    let y: Vec<f64> = ball.euclid_center.iter().zip(&z).map(|(c, z)| c + ball.euclid_radius * z).collect();
                                    (y, rng.random_range(0.1..1.0))
                                })
                                .filter(|(y, _)| norm_sq(y) < 1.0)
                                .collect(),
                        );
                        let lhs = measure_of_pseudoball(&mu, &ball, &grid).powf(p);
                        if lhs == 0.0 {
                            continue;
                        }
                        let scale = ball.euclid_radius.powi(2) / v_alpha(2, alpha);
                        let integral = scale
                            * rule.integrate(|z| {
                                let y: Vec<f64> = ball.euclid_center.iter().zip(z).map(|(c, z)| c + ball.euclid_radius * z).collect();
                                let m: f64 = mu.atoms.iter().filter(|a| rho(&y, &a.x).map_or(false, |r| r < delta)).map(|a| a.w).sum();
                                m.powf(p) * (1.0 - norm_sq(&y)).powf(alpha)
                            });
                        let rhs = integral / weighted_ball_volume(alpha, &ball, &grid);
                        worst = worst.max(lhs / rhs);
                    }
                }
            }
            Ok(Outcome::new(worst))
        },
    );
}
