use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{finite_max, Battery, Outcome, UNBOUNDED};
use crate::calculus::{
    besov_norm, bracket_integral_scan, dts_apply, inner_product_u, kernel_norm_scan,
    log_spaced_radii, project, Regime, Scan, SpaceParams,
};
use crate::error::Result;
use crate::kernel::{Kernel, KernelConfig};
use crate::polynomial::{random_in_ball, random_polynomial, random_unit, HarmonicPolynomial};
use crate::quadrature::QuadratureRule;
use crate::vector::norm_sq;

/// `1 - |x|^2` range of the boundary scans.
pub(crate) const SCAN_W: (f64, f64) = (5e-3, 1e-1);
pub(crate) const SCAN_POINTS: usize = 7;

/// Relative slope error allowed in power regimes.
pub(crate) const SLOPE_TOL: f64 = 0.05;
/// Least `R^2` of the fit against `log 1/(1 - |x|^2)` in the logarithmic regime.
pub(crate) const LOG_FIT_R2: f64 = 0.99;
/// Largest max/min ratio in bounded regimes.
pub(crate) const BOUNDED_RATIO: f64 = 10.0;

/// `(n, alpha, p, beta)` for the kernel norm scans.
const KERNEL_SCANS: [(usize, f64, f64, f64); 6] = [
    (2, 0.0, 2.0, 0.0),
    (3, 1.0, 1.0, 0.0),
    (3, 2.0, 1.5, 1.0),
    (2, 0.0, 1.0, 0.0),
    (3, -0.5, 1.0, 1.0),
    (2, -3.0, 2.0, 0.0),
];

/// `(n, beta, s)` for the bracket integral scans.
const BRACKET_SCANS: [(usize, f64, f64); 4] =
    [(2, 0.0, 1.0), (3, 1.0, 0.0), (2, 0.5, -0.5), (3, -0.5, 2.0)];

const PHIS: [f64; 3] = [0.0, 1.0, 2.5];

/// The acceptance bracket for a scan in its regime and the value compared
/// against it.
pub(crate) fn scan_score(scan: &Scan) -> (f64, [f64; 2], String) {
    match scan.regime {
        Regime::PowerGrowth => {
            let slope = scan.log_log_slope.unwrap_or(f64::NAN);
            let rel = (slope + scan.exponent).abs() / scan.exponent;
            (rel, [0.0, SLOPE_TOL], format!("slope {slope:.5} against {:.5}", -scan.exponent))
        }
        Regime::Logarithmic => {
            let r2 = scan.log_growth_r_squared.unwrap_or(f64::NAN);
            (r2, [LOG_FIT_R2, 1.0], format!("R^2 of the fit in log 1/(1 - |x|^2), slope {:.5}", scan.log_growth_slope.unwrap_or(f64::NAN)))
        }
        Regime::Bounded => (
            scan.max_min_ratio,
            [1.0, BOUNDED_RATIO],
            "max/min value over the scan".into(),
        ),
    }
}

fn regime_word(r: Regime) -> &'static str {
    match r {
        Regime::PowerGrowth => "power",
        Regime::Logarithmic => "log",
        Regime::Bounded => "bounded",
    }
}

fn run_scan(b: &mut Battery, name: String, property: String, regime: Regime, scan: impl FnOnce() -> Result<Scan>) {
    let outcome = scan().map(|s| scan_score(&s));
    let bracket = match &outcome {
        Ok((_, br, _)) => *br,
        Err(_) => match regime {
            Regime::PowerGrowth => [0.0, SLOPE_TOL],
            Regime::Logarithmic => [LOG_FIT_R2, 1.0],
            Regime::Bounded => [1.0, BOUNDED_RATIO],
        },
    };
    b.run(&name, &property, bracket, |_| outcome.map(|(v, _, d)| Outcome::with(v, d)));
}

pub(super) fn run(b: &mut Battery) {
    b.run(
        "dts-inversion",
        "D^{-t}_{s+t} D^t_s f = f coefficientwise, relative error, degrees up to 20",
        [0.0, 1e-14],
        |b| {
            let mut rng = ChaCha8Rng::seed_from_u64(b.seed("dts-inversion"));
            let mut worst: f64 = 0.0;
            for i in 0..20 {
                let s = rng.random_range(-4.0..4.0);
                let t = rng.random_range(-2.0..2.0);
                let n = 2 + i % 2;
                let f = random_polynomial(n, 20, rng.random());
                let back = dts_apply(s + t, -t, &dts_apply(s, t, &f));
                for (k, atoms) in f.parts() {
                    for (a, r) in atoms.iter().zip(&back.parts()[k]) {
                        worst = worst.max((a.coeff - r.coeff).abs() / a.coeff.abs());
                    }
                }
            }
            Ok(Outcome::new(worst))
        },
    );

    b.run(
        "reproducing",
        "int R_Phi(x, y) f(y) dnu_Phi(y) = f(x) for harmonic polynomials of degree <= 6, |x| <= 0.7",
        [0.0, 1e-6],
        |b| {
            let mut rng = ChaCha8Rng::seed_from_u64(b.seed("reproducing"));
            let mut worst: f64 = 0.0;
            for n in [2, 3] {
                for phi in PHIS {
                    // n = 3 has half as many polar nodes per level
                    let rule = QuadratureRule::new(n, phi, 48 * (n - 1))?;
                    let kernel = Kernel::new(n, phi, KernelConfig::default());
                    for _ in 0..50 {
                        let f = random_polynomial(n, 6, rng.random());
                        let x = random_in_ball(n, 0.7, &mut rng);
                        let err = (project(&f, &x, &rule, &kernel)? - f.evaluate(&x)).abs();
                        worst = worst.max(err);
                    }
                }
            }
            Ok(Outcome::new(worst))
        },
    );

    let radii = log_spaced_radii(SCAN_W.0, SCAN_W.1, SCAN_POINTS);
    for (n, alpha, p, beta) in KERNEL_SCANS {
        let c = p * (alpha + n as f64) - (beta + n as f64);
        let regime = Regime::of(c);
        let radii = radii.clone();
        run_scan(
            b,
            format!("kernel-norm-{}-n{n}-alpha{alpha}-p{p}-beta{beta}", regime_word(regime)),
            format!("int |R_alpha(x, y)|^p (1 - |y|^2)^beta dnu(y) grows like (1 - |x|^2)^(-c), c = {c}, log for c = 0, bounded for c < 0"),
            regime,
            move || kernel_norm_scan(n, alpha, p, beta, &radii, KernelConfig::default()),
        );
    }
    for (n, beta, s) in BRACKET_SCANS {
        let regime = Regime::of(s);
        let radii = radii.clone();
        run_scan(
            b,
            format!("bracket-integral-{}-n{n}-beta{beta}-s{s}", regime_word(regime)),
            format!("int (1 - |y|^2)^beta / [x, y]^(beta + n + s) dnu(y) grows like (1 - |x|^2)^(-s), s = {s}, log for s = 0, bounded for s < 0"),
            regime,
            move || bracket_integral_scan(n, beta, s, &radii),
        );
    }

    b.run(
        "growth-bound",
        "|u(x)| (1 - |x|^2)^((n + alpha)/p) / ||u||_{b^p_alpha} does not grow towards the sphere: its max over 1 - |x| < 1e-2 stays below the max over 1 - |x| >= 1e-2",
        [0.0, 1.0],
        |b| {
            let mut rng = ChaCha8Rng::seed_from_u64(b.seed("growth-bound"));
            let mut worst: f64 = 0.0;
            let mut constant: f64 = 0.0;
            for params in [SpaceParams::new(2, 2.0, 0.0, 0.0, 0.0), SpaceParams::new(3, 1.5, 1.0, 1.0, 0.5)] {
                let rule = QuadratureRule::new(params.n, params.norm_weight(), 24)?;
                let e = (params.n as f64 + params.alpha) / params.p;
                let (mut inner, mut outer) = (0.0f64, 0.0f64);
                for _ in 0..200 {
                    let u = random_polynomial(params.n, 6, rng.random());
                    let norm = besov_norm(params, &u, &rule)?;
                    for _ in 0..200 {
                        let gap = 10f64.powf(-3.0 * rng.random::<f64>());
                        let dir = random_in_ball(params.n, 1.0, &mut rng);
                        let d = norm_sq(&dir).sqrt();
                        let x: Vec<f64> = dir.iter().map(|c| c / d * (1.0 - gap)).collect();
                        let v = u.evaluate(&x).abs() * (1.0 - norm_sq(&x)).powf(e) / norm;
                        if gap < 1e-2 {
                            outer = outer.max(v);
                        } else {
                            inner = inner.max(v);
                        }
                    }
                }
                worst = worst.max(outer / inner);
                constant = constant.max(inner.max(outer));
            }
            Ok(Outcome::with(worst, format!("empirical constant {constant:.4}")))
        },
    );

    b.run(
        "subharmonic-mean",
        "|u(x)|^p <= (K / r^n) int_{B(x, r)} |u|^p dnu with K = 1, p in {1, 2, 3}; value is the empirical K",
        [0.0, 1.0 + 1e-3],
        |b| {
            let mut rng = ChaCha8Rng::seed_from_u64(b.seed("subharmonic-mean"));
            let mut worst: f64 = 0.0;
            for n in [2, 3] {
                let rule = QuadratureRule::new(n, 0.0, 24)?;
                for p in [1.0, 2.0, 3.0] {
                    for _ in 0..40 {
                        let u = random_polynomial(n, 6, rng.random());
                        let x = random_in_ball(n, 0.9, &mut rng);
                        let r = (1.0 - norm_sq(&x).sqrt()) * rng.random_range(0.2..1.0);
                        let mean = rule.integrate(|z| {
                            let y: Vec<f64> = x.iter().zip(z).map(|(a, b)| a + r * b).collect();
                            u.evaluate(&y).abs().powf(p)
                        });
                        worst = worst.max(u.evaluate(&x).abs().powf(p) / mean);
                    }
                }
            }
            Ok(Outcome::new(worst))
        },
    );

    b.run(
        "dts-isomorphism",
        "||D^t_s f|| in b^p_{alpha + p t} over ||f|| in b^p_alpha, each through a different realization, has spread max/min bounded on the test set",
        [1.0, 5.0],
        |b| {
            let mut rng = ChaCha8Rng::seed_from_u64(b.seed("dts-isomorphism"));
            let mut spread: f64 = 1.0;
            for (n, p, alpha, s, t) in [(2, 2.0, 0.0, 0.0, 1.0), (3, 1.5, 0.5, 1.0, 0.5)] {
                let source = SpaceParams::new(n, p, alpha, s, 0.5);
                let target = SpaceParams::new(n, p, alpha + p * t, s + t, 1.0);
                let rs = QuadratureRule::new(n, source.norm_weight(), 24)?;
                let rt = QuadratureRule::new(n, target.norm_weight(), 24)?;
                let mut ratios = vec![];
                for _ in 0..100 {
                    let f = random_polynomial(n, 6, rng.random());
                    let g = dts_apply(s, t, &f);
                    ratios.push(besov_norm(target, &g, &rt)? / besov_norm(source, &f, &rs)?);
                }
                let hi = finite_max(ratios.iter().copied())?;
                let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
                spread = spread.max(hi / lo);
            }
            Ok(Outcome::new(spread))
        },
    );

    b.run(
        "inner-product-positivity",
        "<f, f> > 0 for nonzero f and = 0 for f = 0; value is the smallest <f, f> over unit-coefficient test polynomials",
        [f64::MIN_POSITIVE, UNBOUNDED],
        |b| {
            let mut rng = ChaCha8Rng::seed_from_u64(b.seed("inner-product-positivity"));
            let mut least = f64::INFINITY;
            for (n, alpha, s, u) in [(2, 0.0, 0.0, 0.5), (3, -1.5, 1.0, 0.5), (2, 1.0, -0.5, 1.0)] {
                let rule = QuadratureRule::new(n, alpha + 2.0 * u, 24)?;
                let zero = HarmonicPolynomial::zero(n);
                if inner_product_u(alpha, s, u, &zero, &zero, &rule)? != 0.0 {
                    return Ok(Outcome::with(-1.0, "zero polynomial has nonzero square norm"));
                }
                for k in 0..=6 {
                    let f = HarmonicPolynomial::zonal_atom(n, k, &random_unit(n, &mut rng), 1.0);
                    least = least.min(inner_product_u(alpha, s, u, &f, &f, &rule)?);
                }
                for _ in 0..20 {
                    let f = random_polynomial(n, 6, rng.random());
                    least = least.min(inner_product_u(alpha, s, u, &f, &f, &rule)?);
                }
            }
            Ok(Outcome::new(least))
        },
    );
}
