use harmonic_besov::calculus::dts_apply;
use harmonic_besov::geometry::{bracket, mobius, rho, rho_mobius};
use harmonic_besov::kernel::{Kernel, KernelConfig};
use harmonic_besov::measure::Measure;
use harmonic_besov::polynomial::random_polynomial;
use harmonic_besov::toeplitz::{spectrum, toeplitz_matrix, BasisSpec};
use harmonic_besov::vector::norm_sq;
use proptest::prelude::*;

fn point(n: usize, rmax: f64) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, n).prop_filter_map("inside", move |v| {
        let r2 = norm_sq(&v);
        (r2 < 1.0).then(|| v.iter().map(|c| c * rmax).collect())
    })
}

fn pair(rmax: f64) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (2usize..=3).prop_flat_map(move |n| (point(n, rmax), point(n, rmax)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn rho_two_routes_agree((x, y) in pair(0.99)) {
        let (a, b) = (rho(&x, &y).unwrap(), rho_mobius(&x, &y).unwrap());
        prop_assert!((a - b).abs() <= 1e-12, "{a} vs {b}");
    }

    #[test]
    fn rho_is_mobius_invariant((x, y) in pair(0.95), t in 0.0f64..0.9) {
        let a: Vec<f64> = x.iter().zip(&y).map(|(p, q)| t * (p - q) / 2.0).collect();
        let (fx, fy) = (mobius(&a, &x).unwrap(), mobius(&a, &y).unwrap());
        let (before, after) = (rho(&x, &y).unwrap(), rho(&fx, &fy).unwrap());
        prop_assert!((before - after).abs() <= 1e-10, "{before} vs {after}");
    }

    #[test]
    fn bracket_is_symmetric_and_bounded((x, y) in pair(0.999)) {
        let b = bracket(&x, &y);
        prop_assert_eq!(b, bracket(&y, &x));
        // 1 - |x||y| <= [x, y] <= 1 + |x||y|
        let p = (norm_sq(&x) * norm_sq(&y)).sqrt();
        prop_assert!(b >= (1.0 - p) * (1.0 - 1e-14) && b <= 1.0 + p);
    }

    #[test]
    fn kernel_is_symmetric((x, y) in pair(0.9), alpha in -4.0f64..3.0) {
        let k = Kernel::new(x.len(), alpha, KernelConfig::default());
        prop_assert_eq!(k.eval(&x, &y).unwrap().value.to_bits(), k.eval(&y, &x).unwrap().value.to_bits());
    }

    #[test]
    fn derivative_round_trip(seed in 0u64..1000, n in 2usize..=3, s in -3.0f64..3.0, t in -1.5f64..2.5, x in point(3, 0.9)) {
        let f = random_polynomial(n, 8, seed);
        let g = dts_apply(s + t, -t, &dts_apply(s, t, &f));
        let x = &x[..n];
        let (a, b) = (f.evaluate(x), g.evaluate(x));
        prop_assert!((a - b).abs() <= 1e-11 * (1.0 + a.abs()), "{a} vs {b}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn atomic_toeplitz_matrices_are_psd(
        atoms in prop::collection::vec((point(2, 0.8), 0.01f64..3.0), 1..6),
        s in 0.0f64..2.0,
    ) {
        let mu = Measure::atoms(2, atoms);
        let m = toeplitz_matrix(&mu, BasisSpec::new(2, 0.0, s, 6), None).unwrap();
        let rep = spectrum(&m, &[1.0]).unwrap();
        prop_assert!(m.asymmetry() <= 1e-12 * rep.top().max(1.0));
        // eigenvalue sum equals the diagonal sum
        prop_assert!((rep.trace - rep.diagonal_trace).abs() <= 1e-9 * rep.trace.abs().max(1.0));
        // rank is at most the number of atoms
        let nonzero = rep.eigenvalues.iter().filter(|l| **l > 1e-9 * rep.top()).count();
        prop_assert!(nonzero <= mu.atoms.len());
    }

    #[test]
    fn toeplitz_is_monotone_in_the_measure(
        atoms in prop::collection::vec((point(2, 0.8), 0.01f64..3.0), 2..6),
    ) {
        let spec = BasisSpec::new(2, 0.0, 0.5, 5);
        let small = Measure::atoms(2, atoms[..1].to_vec());
        let big = Measure::atoms(2, atoms);
        let d = toeplitz_matrix(&big, spec, None).unwrap().entries - toeplitz_matrix(&small, spec, None).unwrap().entries;
        let least = d.symmetric_eigenvalues().min();
        prop_assert!(least >= -1e-10 * d.amax().max(1.0), "{least}");
    }
}
