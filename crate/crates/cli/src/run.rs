use std::path::Path;

use harmonic_besov::calculus::{bracket_integral_scan, kernel_norm_scan, log_spaced_radii, Scan};
use harmonic_besov::carleson::{carleson_statistic, vanishing_profile};
use harmonic_besov::geometry::{audit_lattice, ball_grid, lattice_gen, Lattice, DEFAULT_RMAX};
use harmonic_besov::kernel::{kernel_eval, Kernel, KernelConfig};
use harmonic_besov::measure::{averaging, berezin2, Measure};
use harmonic_besov::toeplitz::diagnostics::MAX_BEREZIN_HORIZON;
use harmonic_besov::toeplitz::{
    boundedness_estimate, intertwine_check, schatten_diagnostic, spectrum, toeplitz_matrix, BasisSpec,
    OperatorSpaces,
};
use harmonic_besov::verify::{verify, Fault, Status, Suite, VerifyConfig};
use serde_json::json;

use crate::args::{
    Cli, Command, Format, KernelCmd, LatticeArgs, LatticeSource, MeasureCmd, Points, Radii, SuiteArg, ToeplitzCmd,
    Truncation, VerifyArgs,
};
use crate::{Failure, Output};

type Res = Result<Output, Failure>;

pub fn dispatch(cli: &Cli) -> Res {
    let g = &cli.global;
    if !(g.tol > 0.0) {
        return Err(Failure::invalid(format!("--tol must be positive, got {}", g.tol)));
    }
    if let Some(h) = g.horizon {
        if !(h > 0.0 && h < 1.0) {
            return Err(Failure::invalid(format!("--horizon must lie in (0, 1), got {h}")));
        }
    }
    match &cli.command {
        Command::Kernel(cmd) => kernel(cli, cmd),
        Command::Lattice(args) => lattice(cli, args),
        Command::Measure(cmd) => measure(cli, cmd),
        Command::Toeplitz(cmd) => toeplitz(cli, cmd),
        Command::Verify(args) => run_verify(cli, args),
    }
}

fn pretty<T: serde::Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("reports serialize");
    s.push('\n');
    s
}

fn kernel_config(cli: &Cli) -> KernelConfig {
    KernelConfig {
        tol: cli.global.tol,
        ..KernelConfig::default()
    }
}

fn kernel(cli: &Cli, cmd: &KernelCmd) -> Res {
    match cmd {
        KernelCmd::Eval { n, alpha, x, y } => {
            if x.0.len() != *n || y.0.len() != *n {
                return Err(Failure::invalid(format!("x and y need {n} coordinates")));
            }
            let v = kernel_eval(*n, *alpha, &x.0, &y.0, cli.global.tol)?;
            Ok(Output::doc(pretty(&json!({
                "n": n,
                "alpha": alpha,
                "x": x.0,
                "y": y.0,
                "value": v.value,
                "truncation_bound": v.truncation_bound,
                "terms_used": v.terms_used,
                "tol": cli.global.tol,
            }))))
        }
        KernelCmd::NormScan {
            n,
            alpha,
            p,
            beta,
            radii,
            format,
        } => {
            let scan = kernel_norm_scan(*n, *alpha, *p, *beta, &scan_radii(radii)?, kernel_config(cli))?;
            Ok(scan_output(&scan, *format))
        }
        KernelCmd::BracketScan {
            n,
            beta,
            s,
            radii,
            format,
        } => {
            let scan = bracket_integral_scan(*n, *beta, *s, &scan_radii(radii)?)?;
            Ok(scan_output(&scan, *format))
        }
    }
}

fn scan_radii(r: &Radii) -> Result<Vec<f64>, Failure> {
    if let Some(list) = &r.radii {
        return Ok(list.0.clone());
    }
    if !(r.w_min > 0.0 && r.w_min < r.w_max && r.w_max <= 1.0) || r.count == 0 {
        return Err(Failure::invalid(format!(
            "need 0 < w-min < w-max <= 1 and count >= 1, got w-min {} w-max {} count {}",
            r.w_min, r.w_max, r.count
        )));
    }
    Ok(log_spaced_radii(r.w_min, r.w_max, r.count))
}

fn scan_output(scan: &Scan, format: Format) -> Output {
    let summary = format!(
        "regime {:?}, exponent {}, log-log slope {}, max/min {}",
        scan.regime,
        scan.exponent,
        scan.log_log_slope.map_or("n/a".into(), |v| format!("{v:.6}")),
        scan.max_min_ratio
    );
    let body = match format {
        Format::Json => pretty(scan),
        Format::Csv => {
            let mut w = csv::Writer::from_writer(vec![]);
            for row in &scan.rows {
                w.serialize(row).expect("in-memory csv");
            }
            String::from_utf8(w.into_inner().expect("in-memory csv")).expect("csv is utf-8")
        }
    };
    Output {
        body,
        summary: Some(summary),
        failed: false,
    }
}

fn lattice(cli: &Cli, args: &LatticeArgs) -> Res {
    let lat = match &args.check {
        Some(path) => Lattice::from_json(&read(path)?)?,
        None => {
            let (n, delta) = (args.n.unwrap_or(2), args.delta.unwrap_or(0.5));
            lattice_gen(n, delta, cli.global.horizon.unwrap_or(DEFAULT_RMAX))?
        }
    };
    let audit = audit_lattice(&lat, args.samples, cli.global.seed)?;
    let summary = serde_json::to_string(&audit).expect("audit serializes");
    let body = match &args.check {
        Some(_) => pretty(&audit),
        None => {
            let mut s = lat.to_json();
            s.push('\n');
            s
        }
    };
    Ok(Output {
        body,
        summary: Some(summary),
        failed: !audit.passed(),
    })
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::invalid(format!("{}: {e}", path.display())))
}

fn load_measure(path: &Path) -> Result<Measure, Failure> {
    Measure::from_json(&read(path)?).map_err(|e| Failure::invalid(format!("{}: {e}", path.display())))
}

/// The lattice file, or a generated lattice out to `horizon` (default
/// `default_rmax`).
fn load_lattice(cli: &Cli, src: &LatticeSource, n: usize, default_rmax: f64) -> Result<Lattice, Failure> {
    match &src.lattice {
        Some(path) => {
            let lat = Lattice::from_json(&read(path)?)?;
            if lat.n != n {
                return Err(Failure::invalid(format!(
                    "lattice lives in dimension {} but the measure in {n}",
                    lat.n
                )));
            }
            Ok(lat)
        }
        None => Ok(lattice_gen(n, src.delta, cli.global.horizon.unwrap_or(default_rmax))?),
    }
}

fn points(p: &Points, n: usize) -> Result<Vec<Vec<f64>>, Failure> {
    let mut out: Vec<Vec<f64>> = p.x.iter().map(|l| l.0.clone()).collect();
    if let Some(radii) = &p.radii {
        for r in &radii.0 {
            let mut x = vec![0.0; n];
            x[0] = *r;
            out.push(x);
        }
    }
    if out.is_empty() {
        return Err(Failure::invalid("give evaluation points with --x or --radii"));
    }
    if let Some(bad) = out.iter().find(|x| x.len() != n) {
        return Err(Failure::invalid(format!("point {bad:?} needs {n} coordinates")));
    }
    Ok(out)
}

/// CSV with columns `x1..xn,value`.
fn point_table(n: usize, rows: &[(Vec<f64>, f64)]) -> String {
    let mut w = csv::Writer::from_writer(vec![]);
    let mut header: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
    header.push("value".into());
    w.write_record(&header).expect("in-memory csv");
    for (x, v) in rows {
        let mut rec: Vec<String> = x.iter().map(|c| c.to_string()).collect();
        rec.push(v.to_string());
        w.write_record(&rec).expect("in-memory csv");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv")).expect("csv is utf-8")
}

fn measure(cli: &Cli, cmd: &MeasureCmd) -> Res {
    match cmd {
        MeasureCmd::Carleson {
            measure,
            lambda,
            alpha,
            lattice,
        } => {
            let mu = load_measure(measure)?;
            let lat = load_lattice(cli, lattice, mu.n, DEFAULT_RMAX)?;
            Ok(Output::doc(pretty(&carleson_statistic(&mu, *lambda, *alpha, &lat)?)))
        }
        MeasureCmd::Vanishing {
            measure,
            lambda,
            alpha,
            lattice,
        } => {
            let mu = load_measure(measure)?;
            let lat = load_lattice(cli, lattice, mu.n, DEFAULT_RMAX)?;
            Ok(Output::doc(pretty(&vanishing_profile(&mu, *lambda, *alpha, &lat)?)))
        }
        MeasureCmd::Berezin {
            measure,
            phi,
            alpha,
            points: p,
        } => {
            let mu = load_measure(measure)?;
            let kernel = Kernel::new(mu.n, *phi, kernel_config(cli));
            let rows = points(p, mu.n)?
                .into_iter()
                .map(|x| {
                    let v = berezin2(&mu, *alpha, &x, &kernel)?;
                    Ok((x, v))
                })
                .collect::<Result<Vec<_>, harmonic_besov::Error>>()?;
            Ok(Output::doc(point_table(mu.n, &rows)))
        }
        MeasureCmd::Averaging {
            measure,
            alpha,
            delta,
            points: p,
        } => {
            let mu = load_measure(measure)?;
            let grid = ball_grid(mu.n);
            let rows = points(p, mu.n)?
                .into_iter()
                .map(|x| {
                    let v = averaging(&mu, *alpha, *delta, &x, &grid)?;
                    Ok((x, v))
                })
                .collect::<Result<Vec<_>, harmonic_besov::Error>>()?;
            Ok(Output::doc(point_table(mu.n, &rows)))
        }
    }
}

fn basis(t: &Truncation, mu: &Measure) -> Result<BasisSpec, Failure> {
    let spec = BasisSpec::new(mu.n, t.alpha, t.s, t.max_degree);
    spec.validate()?;
    Ok(spec)
}

fn toeplitz(cli: &Cli, cmd: &ToeplitzCmd) -> Res {
    let level = cli.global.level;
    match cmd {
        ToeplitzCmd::Matrix { trunc, format } => {
            let mu = load_measure(&trunc.measure)?;
            let m = toeplitz_matrix(&mu, basis(trunc, &mu)?, level)?;
            Ok(Output::doc(match format {
                Format::Json => pretty(&m.to_document()),
                Format::Csv => m.to_csv(),
            }))
        }
        ToeplitzCmd::Spectrum { trunc, p } => {
            let mu = load_measure(&trunc.measure)?;
            let m = toeplitz_matrix(&mu, basis(trunc, &mu)?, level)?;
            Ok(Output::doc(pretty(&spectrum(&m, &p.0)?)))
        }
        ToeplitzCmd::Schatten {
            trunc,
            p,
            ladder,
            lattice,
        } => {
            let mu = load_measure(&trunc.measure)?;
            let top = ladder.0.iter().copied().max().unwrap_or(trunc.max_degree);
            let spec = basis(trunc, &mu)?.with_degree(top);
            let lat = load_lattice(cli, lattice, mu.n, MAX_BEREZIN_HORIZON)?;
            Ok(Output::doc(pretty(&schatten_diagnostic(&mu, spec, *p, &ladder.0, &lat, level)?)))
        }
        ToeplitzCmd::Intertwine { trunc, t } => {
            let mu = load_measure(&trunc.measure)?;
            Ok(Output::doc(pretty(&intertwine_check(&mu, basis(trunc, &mu)?, *t, level)?)))
        }
        ToeplitzCmd::Bounded {
            measure,
            p1,
            alpha1,
            p2,
            alpha2,
            s,
            t,
            trials,
            carleson,
            lattice,
        } => {
            let mu = load_measure(measure)?;
            let spaces = OperatorSpaces {
                p1: *p1,
                alpha1: *alpha1,
                p2: *p2,
                alpha2: *alpha2,
                s: *s,
                t: *t,
            };
            let lat = if *carleson {
                Some(load_lattice(cli, lattice, mu.n, DEFAULT_RMAX)?)
            } else {
                None
            };
            let rep = boundedness_estimate(&mu, spaces, *trials, cli.global.seed, lat.as_ref())?;
            Ok(Output::doc(pretty(&rep)))
        }
    }
}

fn run_verify(cli: &Cli, args: &VerifyArgs) -> Res {
    let suite = match args.suite {
        SuiteArg::Kernels => Suite::Kernels,
        SuiteArg::Geometry => Suite::Geometry,
        SuiteArg::Calculus => Suite::Calculus,
        SuiteArg::Carleson => Suite::Carleson,
        SuiteArg::Toeplitz => Suite::Toeplitz,
        SuiteArg::All => Suite::All,
    };
    let fault = match &args.inject_fault {
        None => None,
        Some(name) => Some(Fault::parse(name).ok_or_else(|| Failure::invalid(format!("unknown fault {name:?}")))?),
    };
    let report = verify(
        suite,
        VerifyConfig {
            seed: cli.global.seed,
            fault,
        },
    );
    let summary = report
        .checks
        .iter()
        .map(|c| {
            let mark = if c.status == Status::Pass { "pass" } else { "FAIL" };
            format!("{mark} {} = {:e} in [{:e}, {:e}]", c.name, c.value, c.bracket[0], c.bracket[1])
        })
        .collect::<Vec<_>>()
        .join("\n");
    Ok(Output {
        body: pretty(&report),
        summary: Some(summary),
        failed: !report.passed,
    })
}
