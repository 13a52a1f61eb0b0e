//! Kernel values against closed forms that do not go through the series.

use approx::assert_relative_eq;
use harmonic_besov::geometry::bracket;
use harmonic_besov::kernel::{kernel_eval, v_alpha};
use harmonic_besov::vector::{dot, norm_sq};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use harmonic_besov::polynomial::random_in_ball;

/// Unweighted harmonic Bergman kernel of the ball for normalized volume:
/// `[n - (2n + 4 - 8 x.y)|x|^2|y|^2 + (n - 4)|x|^4|y|^4] / (n [x, y]^(n + 2))`.
fn bergman_closed_form(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let p = norm_sq(x) * norm_sq(y);
    (n - (2.0 * n + 4.0 - 8.0 * dot(x, y)) * p + (n - 4.0) * p * p) / (n * bracket(x, y).powf(n + 2.0))
}

/// Extended Poisson kernel `(1 - |x|^2 |y|^2) / [x, y]^n`.
fn poisson_closed_form(x: &[f64], y: &[f64]) -> f64 {
    (1.0 - norm_sq(x) * norm_sq(y)) / bracket(x, y).powi(x.len() as i32)
}

#[test]
fn unweighted_kernel_matches_closed_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for n in [2usize, 3, 4] {
        for _ in 0..40 {
            let x = random_in_ball(n, 0.9, &mut rng);
            let y = random_in_ball(n, 0.9, &mut rng);
            let v = kernel_eval(n, 0.0, &x, &y, 1e-13).unwrap().value;
            assert_relative_eq!(v, bergman_closed_form(&x, &y), max_relative = 1e-10, epsilon = 1e-12);
        }
    }
}

#[test]
fn disc_kernel_is_twice_the_analytic_part() {
    // n = 2: R(z, w) = 2 Re (1 - z conj(w))^-2 - 1
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..40 {
        let x = random_in_ball(2, 0.95, &mut rng);
        let y = random_in_ball(2, 0.95, &mut rng);
        let a = 1.0 - dot(&x, &y);
        let b = x[0] * y[1] - x[1] * y[0];
        let m = a * a + b * b;
        let oracle = 2.0 * (a * a - b * b) / (m * m) - 1.0;
        let v = kernel_eval(2, 0.0, &x, &y, 1e-13).unwrap().value;
        assert_relative_eq!(v, oracle, max_relative = 1e-10, epsilon = 1e-12);
    }
}

#[test]
fn hardy_endpoint_is_the_poisson_kernel() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for n in [2usize, 3] {
        for _ in 0..40 {
            let x = random_in_ball(n, 0.9, &mut rng);
            let y = random_in_ball(n, 0.9, &mut rng);
            let v = kernel_eval(n, -1.0, &x, &y, 1e-13).unwrap().value;
            assert_relative_eq!(v, poisson_closed_form(&x, &y), max_relative = 1e-10, epsilon = 1e-12);
        }
    }
}

#[test]
fn weight_normalizer_in_the_plane() {
    for alpha in [0.5, 1.0, 2.0, 7.5] {
        assert_relative_eq!(v_alpha(2, alpha), 1.0 / (1.0 + alpha), max_relative = 1e-13);
    }
    // n = 3, alpha = 1: Gamma(5/2) Gamma(2) / Gamma(7/2) = 2/5
    assert_relative_eq!(v_alpha(3, 1.0), 0.4, max_relative = 1e-13);
}
