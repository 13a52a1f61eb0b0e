use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::function::gamma::ln_gamma;

use super::{finite_max, Battery, Outcome};
use crate::calculus::dts_kernel;
use crate::kernel::{branch, Branch, KernelConfig};
use crate::polynomial::random_in_ball;

const STIRLING_DEGREES: [usize; 5] = [100, 300, 1_000, 3_000, 10_000];
const STIRLING_ALPHAS: [f64; 7] = [-5.5, -3.2, -1.5, -0.5, 0.0, 1.3, 2.5];
const SHIFT_ALPHAS: [f64; 4] = [-3.0, -1.5, 0.0, 2.0];

pub(super) fn run(b: &mut Battery) {
    b.run(
        "gamma-zero",
        "gamma_0(alpha) = 1 exactly on both branches",
        [0.0, 0.0],
        |b| {
            let mut worst: f64 = 0.0;
            for n in [2, 3] {
                for i in 0..50 {
                    let alpha = -6.0 + 12.0 * i as f64 / 49.0;
                    worst = worst.max((b.coeffs(n, alpha).get(0) - 1.0).abs());
                }
            }
            Ok(Outcome::new(worst))
        },
    );

    b.run(
        "stirling-consistency",
        "log gamma_k(alpha) follows the two-term Stirling expansion of its Pochhammer ratios, so log gamma_k - (1 + alpha) log k stays bounded",
        [0.0, 1.0],
        |b| {
            let mut worst: f64 = 0.0;
            for n in [2, 3] {
                for alpha in STIRLING_ALPHAS {
                    let pairs = pochhammer_pairs(n, alpha);
                    let size: f64 = pairs.iter().map(|(a, b)| (a.abs() + b.abs() + 1.0).powi(3)).sum();
                    let mut c = b.coeffs(n, alpha);
                    for k in STIRLING_DEGREES {
                        let r = c.get(k).ln() - stirling_log(&pairs, k as f64);
                        worst = worst.max((k * k) as f64 * r.abs() / size);
                    }
                }
            }
            Ok(Outcome::with(worst, "max k^2 |residual| / sum (|a| + |b| + 1)^3 over k in [1e2, 1e4]"))
        },
    );

    b.run(
        "kernel-at-origin",
        "R_alpha(x, 0) = R_alpha(0, y) = 1 exactly",
        [0.0, 0.0],
        |b| {
            let mut rng = ChaCha8Rng::seed_from_u64(b.seed("kernel-at-origin"));
            let mut worst: f64 = 0.0;
            for n in [2, 3] {
                for alpha in [-4.5, -1.0, 0.0, 2.5] {
                    let k = b.coeffs(n, alpha).kernel(KernelConfig::default());
                    let zero = vec![0.0; n];
                    for _ in 0..10 {
                        let x = random_in_ball(n, 0.99, &mut rng);
                        worst = worst.max((k.eval(&x, &zero)?.value - 1.0).abs());
                        worst = worst.max((k.eval(&zero, &x)?.value - 1.0).abs());
                    }
                }
            }
            Ok(Outcome::new(worst))
        },
    );

    b.run(
        "kernel-symmetry",
        "R_alpha(x, y) = R_alpha(y, x) bit for bit",
        [0.0, 0.0],
        |b| {
            let mut rng = ChaCha8Rng::seed_from_u64(b.seed("kernel-symmetry"));
            let mut mismatches = 0usize;
            for n in [2, 3] {
                for alpha in [-3.5, -0.5, 1.0] {
                    let k = b.coeffs(n, alpha).kernel(KernelConfig::default());
                    for _ in 0..50 {
                        let x = random_in_ball(n, 0.95, &mut rng);
                        let y = random_in_ball(n, 0.95, &mut rng);
                        let (u, v) = (k.eval(&x, &y)?.value, k.eval(&y, &x)?.value);
                        if u.to_bits() != v.to_bits() {
                            mismatches += 1;
                        }
                    }
                }
            }
            Ok(Outcome::with(mismatches as f64, "count of asymmetric pairs"))
        },
    );

    b.run(
        "truncation-bound",
        "the certified tail bound dominates the difference between the K-term and 4K-term partial sums",
        [0.0, 1.0],
        |b| {
            let mut rng = ChaCha8Rng::seed_from_u64(b.seed("truncation-bound"));
            let config = KernelConfig {
                tol: 1e-8,
                ..KernelConfig::default()
            };
            let mut ratios = vec![];
            for n in [2, 3] {
                for alpha in [-3.0, 0.0, 2.0] {
                    let k = b.coeffs(n, alpha).kernel(config);
                    for _ in 0..40 {
                        let x = random_in_ball(n, 0.9, &mut rng);
                        let y = random_in_ball(n, 0.9, &mut rng);
                        let v = k.eval(&x, &y)?;
                        let long = k.partial_sum(&x, &y, (4 * v.terms_used).min(config.max_terms));
                        let slack = 1e-13 * long.abs().max(1.0);
                        ratios.push((v.value - long).abs() / (v.truncation_bound + slack));
                    }
                }
            }
            Ok(Outcome::new(finite_max(ratios)?))
        },
    );

    b.run(
        "derivative-shift",
        "D^t_s applied to R_s(x, .) equals R_{s+t}(x, .), relative error",
        [0.0, 1e-9],
        |b| {
            let mut rng = ChaCha8Rng::seed_from_u64(b.seed("derivative-shift"));
            let config = KernelConfig::default();
            let mut worst: f64 = 0.0;
            for n in [2, 3] {
                for s in SHIFT_ALPHAS {
                    for _ in 0..100 {
                        let t = rng.random_range(-1.0..2.5);
                        let x = random_in_ball(n, 0.8, &mut rng);
                        let y = random_in_ball(n, 0.8, &mut rng);
                        let d = dts_kernel(n, s, t, &x, &y, config)?.value;
                        let r = b.coeffs(n, s + t).kernel(config).eval(&x, &y)?.value;
                        worst = worst.max((d - r).abs() / r.abs());
                    }
                }
            }
            Ok(Outcome::new(worst))
        },
    );
}

/// `gamma_k` as a product of ratios `(a)_k / (b)_k`.
fn pochhammer_pairs(n: usize, alpha: f64) -> Vec<(f64, f64)> {
    let half = n as f64 / 2.0;
    match branch(n, alpha) {
        Branch::Regular => vec![(1.0 + half + alpha, half)],
        Branch::Factorial => vec![(1.0, 1.0 - half - alpha), (1.0, half)],
    }
}

/// `sum log((a)_k / (b)_k)` through `log Gamma(k + a) - log Gamma(k + b)`
/// `= (a - b) log k + (a - b)(a + b - 1) / (2k) + O(k^-2)`.
fn stirling_log(pairs: &[(f64, f64)], k: f64) -> f64 {
    pairs
        .iter()
        .map(|&(a, b)| {
            ln_gamma(b) - ln_gamma(a) + (a - b) * k.ln() + (a - b) * (a + b - 1.0) / (2.0 * k)
        })
        .sum()
}
