use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Battery, Outcome};
use crate::carleson::transform_lp_norm;
use crate::error::{Error, Result};
use crate::geometry::{ball_grid, lattice_gen, Lattice};
use crate::kernel::{v_alpha, Kernel, KernelConfig};
use crate::measure::{averaging, Density, Measure};
use crate::polynomial::random_in_ball;
use crate::quadrature::QuadratureRule;
use crate::toeplitz::{
    intertwine_check, radial_check, schatten_diagnostic, toeplitz_matrix, trace_vs_berezin, Basis, BasisSpec,
};
use crate::toeplitz::diagnostics::MAX_BEREZIN_HORIZON;
use crate::vector::norm_sq;

/// Degrees of the Schatten ladder.
pub(crate) const LADDER: [usize; 4] = [4, 8, 12, 16];
/// Largest trace/Berezin ratio (or its inverse) accepted.
pub(crate) const TRACE_BRACKET: f64 = 10.0;

fn atoms(points: &[([f64; 2], f64)]) -> Measure {
    Measure::atoms(2, points.iter().map(|(x, w)| (x.to_vec(), *w)).collect())
}

/// Five atomic test measures in the plane.
pub(crate) fn atomic_measures() -> Vec<Measure> {
    vec![
        atoms(&[([0.0, 0.0], 1.0)]),
        atoms(&[([0.5, 0.0], 1.0), ([-0.3, 0.4], 0.5)]),
        atoms(&[([0.2, 0.7], 2.0), ([0.1, -0.1], 0.3), ([-0.6, -0.2], 1.0)]),
        atoms(&[([0.8, 0.1], 0.4), ([-0.1, 0.85], 0.7), ([0.3, -0.3], 1.5), ([-0.5, -0.5], 0.2)]),
        atoms(&[([0.9, 0.0], 1.0), ([0.0, 0.9], 1.0), ([-0.9, 0.0], 1.0), ([0.0, -0.9], 1.0), ([0.4, 0.4], 0.5)]),
    ]
}

/// Area measure on `|y| <= r0`, ramping linearly to zero by `r1`.
fn disk(r0: f64, r1: f64) -> Measure {
    Measure {
        n: 2,
        atoms: vec![],
        density: Some(Density::TabulatedRadial {
            radii: vec![r0, r1],
            values: vec![1.0, 0.0],
            scale: 1.0,
            exponent: 0.0,
        }),
    }
}

fn eigen(m: &DMatrix<f64>) -> Vec<f64> {
    let mut e: Vec<f64> = SymmetricEigen::new(m.clone()).eigenvalues.iter().copied().collect();
    e.sort_by(|a, b| b.total_cmp(a));
    e
}

/// `lambda_min / max |lambda|`.
fn relative_min_eigen(m: &DMatrix<f64>) -> f64 {
    let e = eigen(m);
    let scale = e.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if scale == 0.0 {
        0.0
    } else {
        e[e.len() - 1] / scale
    }
}

fn schatten_lattice() -> Result<Lattice> {
    lattice_gen(2, 0.5, MAX_BEREZIN_HORIZON)
}

pub(super) fn run(b: &mut Battery) {
    b.run(
        "toeplitz-identity",
        "mu = nu_alpha gives the identity matrix (n = 2, K = 10, three (alpha, s) with 2s - alpha > -1); max entry of M - I",
        [0.0, 1e-6],
        |_| {
            let mut worst: f64 = 0.0;
            for (alpha, s) in [(0.0, 0.0), (1.0, 0.5), (-0.5, 1.0)] {
                let spec = BasisSpec::new(2, alpha, s, 10);
                let m = toeplitz_matrix(&Measure::weighted_volume(2, alpha), spec, None)?;
                let size = m.size();
                worst = worst.max((&m.entries - DMatrix::<f64>::identity(size, size)).amax());
            }
            Ok(Outcome::new(worst))
        },
    );

    let rank_one = (|| -> Result<(f64, f64)> {
        let (mut top_err, mut rest): (f64, f64) = (0.0, 0.0);
        for (n, x0, alpha, s) in [
            (2, vec![0.5, 0.0], 0.0, 0.0),
            (2, vec![0.2, -0.3], 1.0, 1.5),
            (3, vec![0.1, 0.3, -0.2], 0.0, 0.5),
        ] {
            let spec = BasisSpec::new(n, alpha, s, 12);
            let w = 1.7;
            let m = toeplitz_matrix(&Measure::atoms(n, vec![(x0.clone(), w)]), spec, None)?;
            let e = eigen(&m.entries);
            let phi = spec.phi();
            let r = Kernel::new(n, phi, KernelConfig::default()).eval(&x0, &x0)?.value;
            let oracle = w * (1.0 - norm_sq(&x0)).powf(2.0 * spec.u()) * v_alpha(n, alpha) / v_alpha(n, phi) * r;
            top_err = top_err.max((e[0] - oracle).abs() / oracle);
            rest = rest.max(e[1].abs().max(e[e.len() - 1].abs()) / e[0]);
        }
        Ok((top_err, rest))
    })();
    let (top, rest) = match rank_one {
        Ok((t, r)) => (Ok(t), Ok(r)),
        Err(e) => (Err(e.to_string()), Err(e.to_string())),
    };
    b.run(
        "rank-one-top",
        "an atom w at x0 gives top eigenvalue w (1 - |x0|^2)^(2u) (V_alpha / V_Phi) R_Phi(x0, x0) at K = 12; relative error",
        [0.0, 0.01],
        |_| top.map(Outcome::new).map_err(Error::Precondition),
    );
    b.run(
        "rank-one-rest",
        "an atom gives a rank-one matrix: every other eigenvalue relative to the top",
        [0.0, 1e-6],
        |_| rest.map(Outcome::new).map_err(Error::Precondition),
    );

    b.run(
        "intertwining",
        "D^t_s T_mu = T_kappa D^t_s on harmonics of degree <= 8 for a 5-atom measure, two (s, t); relative max-entry residual",
        [0.0, 1e-8],
        |_| {
            let mu = atomic_measures().pop().expect("five measures");
            let mut worst: f64 = 0.0;
            for (s, t) in [(0.5, 1.0), (1.0, -0.5)] {
                let rep = intertwine_check(&mu, BasisSpec::new(2, 0.0, s, 8), t, None)?;
                worst = worst.max(rep.relative_residual);
            }
            Ok(Outcome::new(worst))
        },
    );

    let radial = (|| -> Result<(f64, f64)> {
        let (mut off, mut diag): (f64, f64) = (0.0, 0.0);
        for (n, alpha, s, c) in [(2, 0.0, 0.5, 1.0), (3, 1.0, 1.0, 0.5), (2, -0.5, 0.0, 2.5)] {
            let e = alpha + c;
            let mu = Measure::power_weight(n, e, 1.0 / v_alpha(n, e));
            let rep = radial_check(&mu, BasisSpec::new(n, alpha, s, 10), None)?;
            off = off.max(rep.max_off_diagonal);
            diag = diag.max(rep.max_relative_error);
        }
        Ok((off, diag))
    })();
    let (off, diag) = match radial {
        Ok((o, d)) => (Ok(o), Ok(d)),
        Err(e) => (Err(e.to_string()), Err(e.to_string())),
    };
    b.run(
        "radial-off-diagonal",
        "a radial measure nu_{alpha + c} / V gives a diagonal matrix; largest off-diagonal entry",
        [0.0, 1e-9],
        |_| off.map(Outcome::new).map_err(Error::Precondition),
    );
    b.run(
        "radial-diagonal-oracle",
        "diagonal entries for nu_{alpha + c} / V match the one-dimensional Beta-ratio formula; relative error",
        [0.0, 1e-8],
        |_| diag.map(Outcome::new).map_err(Error::Precondition),
    );

    let schatten = (|| -> Result<Vec<(String, [bool; 3], f64)>> {
        let lat = schatten_lattice()?;
        let spec = BasisSpec::new(2, 0.0, 0.5, LADDER[LADDER.len() - 1]);
        let mut rows = vec![];
        let mut cases: Vec<(String, Measure)> = atomic_measures()
            .into_iter()
            .skip(1)
            .take(2)
            .enumerate()
            .map(|(i, m)| (format!("atoms-{}", i + 1), m))
            .collect();
        cases.push(("disk-0.6".into(), disk(0.5, 0.6)));
        cases.push(("nu_0".into(), Measure::weighted_volume(2, 0.0)));
        for (name, mu) in cases {
            let rep = schatten_diagnostic(&mu, spec, 2.0, &LADDER, &lat, None)?;
            rows.push((name, rep.finite(), rep.ladder_change));
        }
        Ok(rows)
    })();
    let schatten = schatten.map_err(|e| e.to_string());
    let describe = |rows: &[(String, [bool; 3], f64)]| {
        rows.iter()
            .map(|(n, f, c)| format!("{n}: ladder/berezin/lattice finite {f:?}, ladder change {c:.2e}"))
            .collect::<Vec<_>>()
            .join("; ")
    };
    let compact = schatten.as_ref().map(|rows| {
        let bad = rows[..3].iter().filter(|(_, f, _)| f.iter().any(|v| !v)).count();
        Outcome::with(bad as f64, describe(rows))
    });
    b.run(
        "schatten-compact-support",
        "for two atomic measures and a disk measure the S_2 ladder converges and the lattice and Berezin L^2_{-n} statistics are finite; value counts measures with any divergent reading",
        [0.0, 0.0],
        |_| compact.map_err(|e| Error::Precondition(e.clone())),
    );
    let volume = schatten.as_ref().map(|rows| {
        let bad = rows[3].1.iter().filter(|v| **v).count();
        Outcome::with(bad as f64, describe(&rows[3..]))
    });
    b.run(
        "schatten-weighted-volume",
        "for mu = nu_alpha all three S_2 readings grow with K or the horizon; value counts readings that stay finite",
        [0.0, 0.0],
        |_| volume.map_err(|e| Error::Precondition(e.clone())),
    );

    b.run(
        "trace-berezin-bracket",
        "trace of T_mu over int mu~ dnu_{-n} lies in one bracket [1/C, C] for five atomic measures (alpha = 0, s = 0.5, K = 12); value is the largest of ratio and 1/ratio",
        [1.0, TRACE_BRACKET],
        |_| {
            let spec = BasisSpec::new(2, 0.0, 0.5, 12);
            let mut worst: f64 = 1.0;
            let mut ratios = vec![];
            for mu in atomic_measures() {
                let rep = trace_vs_berezin(&mu, spec, MAX_BEREZIN_HORIZON, None)?;
                let r = rep.ratio.unwrap_or(f64::NAN);
                ratios.push(format!("{r:.3}"));
                worst = worst.max(r).max(1.0 / r);
            }
            Ok(Outcome::with(worst, format!("ratios {}", ratios.join(", "))))
        },
    );

    b.run(
        "toeplitz-positivity",
        "matrices of positive measures are positive semidefinite: smallest eigenvalue relative to the largest",
        [-1e-10, 1.0],
        |_| {
            let mut least: f64 = 1.0;
            for (n, alpha, s) in [(2, 0.0, 0.5), (3, 1.0, 0.5)] {
                let spec = BasisSpec::new(n, alpha, s, 8);
                let mut cases = vec![
                    Measure::power_weight(n, 0.5, 2.0),
                    Measure::weighted_volume(n, alpha + 3.0),
                ];
                if n == 2 {
                    cases.extend(atomic_measures());
                }
                for mu in cases {
                    least = least.min(relative_min_eigen(&toeplitz_matrix(&mu, spec, None)?.entries));
                }
            }
            Ok(Outcome::new(least))
        },
    );

    b.run(
        "toeplitz-monotonicity",
        "mu <= mu' atomwise gives M(mu) <= M(mu') in the Loewner order: smallest eigenvalue of the difference relative to its largest",
        [-1e-10, 1.0],
        |b| {
            let mut rng = ChaCha8Rng::seed_from_u64(b.seed("toeplitz-monotonicity"));
            let spec = BasisSpec::new(2, 0.0, 0.5, 8);
            let mut least: f64 = 1.0;
            for _ in 0..10 {
                let mu = Measure::atoms(2, (0..6).map(|_| (random_in_ball(2, 0.9, &mut rng), rng.random_range(0.1..1.0))).collect());
                let mut bigger = mu.clone();
                for a in &mut bigger.atoms {
                    a.w *= 1.0 + rng.random_range(0.0..1.0);
                }
                bigger.atoms.push(crate::measure::PointMass { x: random_in_ball(2, 0.9, &mut rng), w: 0.5 });
                let d = toeplitz_matrix(&bigger, spec, None)?.entries - toeplitz_matrix(&mu, spec, None)?.entries;
                least = least.min(relative_min_eigen(&d));
            }
            Ok(Outcome::new(least))
        },
    );

    b.run(
        "truncation-interlacing",
        "eigenvalues at degree K interlace those at K + 2 (compressions of one positive operator); largest violation relative to the top",
        [0.0, 1e-10],
        |_| {
            let mut worst: f64 = 0.0;
            for mu in atomic_measures().into_iter().chain([Measure::power_weight(2, 1.0, 1.0)]) {
                for k in [4, 8] {
                    let spec = BasisSpec::new(2, 0.0, 0.5, k);
                    let small = eigen(&toeplitz_matrix(&mu, spec, None)?.entries);
                    let large = eigen(&toeplitz_matrix(&mu, spec.with_degree(k + 2), None)?.entries);
                    let d = large.len() - small.len();
                    let top = large[0].max(f64::MIN_POSITIVE);
                    for (i, l) in small.iter().enumerate() {
                        worst = worst.max((l - large[i]) / top).max((large[i + d] - l) / top);
                    }
                }
            }
            Ok(Outcome::new(worst))
        },
    );

    b.run(
        "averaged-domination",
        "M(mu) <= C M(mu^ dnu_alpha) with mu^ the delta = 0.5 averaging function; value is the empirical C (top generalized eigenvalue)",
        [0.0, 5.0],
        |_| {
            let spec = BasisSpec::new(2, 0.0, 0.5, 6);
            let basis = Basis::new(spec)?;
            let grid = ball_grid(2);
            let two_u = 2.0 * spec.u();
            let rule = QuadratureRule::new(2, spec.alpha + two_u, 64)?;
            let scale = v_alpha(2, spec.alpha + two_u) / v_alpha(2, spec.alpha);
            let size = basis.len();
            let mut worst: f64 = 0.0;
            for mu in atomic_measures() {
                let tri = size * (size + 1) / 2;
                let sums = rule.integrate_many(tri, |x, out| {
                    let v = basis.derivative_values(x);
                    let g = averaging(&mu, spec.alpha, 0.5, x, &grid).unwrap_or(f64::NAN);
                    let mut idx = 0;
                    for i in 0..size {
                        for j in 0..=i {
                            out[idx] = g * v[i] * v[j];
                            idx += 1;
                        }
                    }
                });
                let mut hat = DMatrix::<f64>::zeros(size, size);
                let mut idx = 0;
                for i in 0..size {
                    for j in 0..=i {
                        hat[(i, j)] = scale * sums[idx];
                        hat[(j, i)] = hat[(i, j)];
                        idx += 1;
                    }
                }
                let m = toeplitz_matrix(&mu, spec, None)?.entries;
                let chol = hat
                    .cholesky()
                    .ok_or_else(|| Error::Domain("averaged matrix is not positive definite".into()))?;
                let l_inv = chol
                    .l()
                    .try_inverse()
                    .ok_or_else(|| Error::Domain("singular Cholesky factor".into()))?;
                let g = &l_inv * m * l_inv.transpose();
                worst = worst.max(eigen(&(0.5 * (&g + g.transpose())))[0]);
            }
            Ok(Outcome::new(worst))
        },
    );

    b.run(
        "symbol-class-consistency",
        "for symbols (1 - |x|^2)^m the S_2 ladder converges exactly when the symbol lies in L^2_{-n} (m = 3 finite, m = 0 divergent); value counts mismatches",
        [0.0, 0.0],
        |_| {
            let lat = schatten_lattice()?;
            let spec = BasisSpec::new(2, 0.0, 0.5, LADDER[LADDER.len() - 1]);
            let mut mismatches = 0;
            let mut notes = vec![];
            for (m, expect_finite) in [(3.0, true), (0.0, false)] {
                let mu = Measure::power_weight(2, spec.alpha + m, 1.0 / v_alpha(2, spec.alpha));
                let rep = schatten_diagnostic(&mu, spec, 2.0, &LADDER, &lat, None)?;
                let lp = transform_lp_norm(|x| Ok((1.0 - norm_sq(x)).powf(m)), 2, lat.rmax, Some(&lat), 2.0, -2.0, 16)?;
                let readings = [rep.ladder_converged, !lp.divergent];
                mismatches += readings.iter().filter(|r| **r != expect_finite).count();
                notes.push(format!("m = {m}: ladder change {:.2e}, symbol growth {:.3}", rep.ladder_change, lp.growth_exponent));
            }
            Ok(Outcome::with(mismatches as f64, notes.join("; ")))
        },
    );
}
