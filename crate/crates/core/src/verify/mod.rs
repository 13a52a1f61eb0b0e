//! The verification battery: every module invariant as a named numeric check
//! with an acceptance bracket, grouped into suites.
//!
//! Reports carry no timings, so a fixed seed gives byte-identical JSON.

use std::cell::OnceCell;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{lattice_gen, Lattice, DEFAULT_RMAX};
use crate::kernel::KernelCoeffs;

mod calculus;
mod carleson;
mod geometry;
mod kernels;
mod toeplitz;

/// Seed used when the caller gives none.
pub const DEFAULT_SEED: u64 = 20_240_601;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Kernels,
    Geometry,
    Calculus,
    Carleson,
    Toeplitz,
    All,
}

impl Suite {
    pub fn parse(s: &str) -> Option<Suite> {
        Some(match s {
            "kernels" => Suite::Kernels,
            "geometry" => Suite::Geometry,
            "calculus" => Suite::Calculus,
            "carleson" => Suite::Carleson,
            "toeplitz" => Suite::Toeplitz,
            "all" => Suite::All,
            _ => return None,
        })
    }

    fn parts(self) -> Vec<Suite> {
        match self {
            Suite::All => vec![
                Suite::Kernels,
                Suite::Geometry,
                Suite::Calculus,
                Suite::Carleson,
                Suite::Toeplitz,
            ],
            s => vec![s],
        }
    }
}

/// Deliberate defects for mutation testing of the battery itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Fault {
    /// Kernel coefficients report `gamma_{k+1}` at degree `k`; the same effect
    /// as changing `offset: 0` to `offset: 1` in `KernelCoeffs::new`.
    GammaIndexShift,
}

impl Fault {
    pub fn parse(s: &str) -> Option<Fault> {
        (s == "gamma-index-shift").then_some(Fault::GammaIndexShift)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyConfig {
    pub seed: u64,
    pub fault: Option<Fault>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            seed: DEFAULT_SEED,
            fault: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

/// One check: `value` must lie in the closed interval `bracket`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    /// The mathematical property under test, in words.
    pub property: String,
    pub status: Status,
    pub value: f64,
    pub bracket: [f64; 2],
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub suite: Suite,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fault: Option<Fault>,
    pub checks: Vec<Check>,
    pub passed: bool,
}

impl VerifyReport {
    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| c.status == Status::Fail)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Measured value of a check plus an optional note for the report.
pub(crate) struct Outcome {
    value: f64,
    detail: Option<String>,
}

impl Outcome {
    pub(crate) fn new(value: f64) -> Outcome {
        Outcome { value, detail: None }
    }

    pub(crate) fn with(value: f64, detail: impl Into<String>) -> Outcome {
        Outcome {
            value,
            detail: Some(detail.into()),
        }
    }
}

/// Upper end of brackets that are open above.
pub(crate) const UNBOUNDED: f64 = f64::MAX;

pub(crate) struct Battery {
    config: VerifyConfig,
    checks: Vec<Check>,
    lattice: OnceCell<Lattice>,
}

impl Battery {
    fn new(config: VerifyConfig) -> Battery {
        Battery {
            config,
            checks: vec![],
            lattice: OnceCell::new(),
        }
    }

    /// Seed for a named check, stable across runs and independent of the
    /// order in which checks run.
    pub(crate) fn seed(&self, name: &str) -> u64 {
        name.bytes().fold(self.config.seed ^ 0xcbf2_9ce4_8422_2325, |h, b| {
            (h ^ b as u64).wrapping_mul(0x0100_0000_01b3)
        })
    }

    /// Coefficient source for the kernel checks, honoring an injected fault.
    pub(crate) fn coeffs(&self, n: usize, alpha: f64) -> KernelCoeffs {
        match self.config.fault {
            Some(Fault::GammaIndexShift) => KernelCoeffs::with_index_shift(n, alpha, 1),
            None => KernelCoeffs::new(n, alpha),
        }
    }

    /// The `delta = 0.5`, `n = 2` lattice out to the default radius, built once.
    pub(crate) fn lattice(&self) -> Result<&Lattice> {
        if let Some(l) = self.lattice.get() {
            return Ok(l);
        }
        let l = lattice_gen(2, 0.5, DEFAULT_RMAX)?;
        Ok(self.lattice.get_or_init(|| l))
    }

    pub(crate) fn run<F>(&mut self, name: &str, property: &str, bracket: [f64; 2], f: F)
    where
        F: FnOnce(&Battery) -> Result<Outcome>,
    {
        let (value, detail) = match f(self) {
            Ok(o) => (o.value, o.detail),
            Err(e) => (f64::NAN, Some(format!("error: {e}"))),
        };
        let pass = value >= bracket[0] && value <= bracket[1];
        self.checks.push(Check {
            name: name.into(),
            property: property.into(),
            status: if pass { Status::Pass } else { Status::Fail },
            value,
            bracket,
            detail,
        });
    }
}

/// Runs the checks of `suite`.
pub fn verify(suite: Suite, config: VerifyConfig) -> VerifyReport {
    let mut b = Battery::new(config);
    for part in suite.parts() {
        match part {
            Suite::Kernels => kernels::run(&mut b),
            Suite::Geometry => geometry::run(&mut b),
            Suite::Calculus => calculus::run(&mut b),
            Suite::Carleson => carleson::run(&mut b),
            Suite::Toeplitz => toeplitz::run(&mut b),
            Suite::All => unreachable!(),
        }
    }
    let passed = b.checks.iter().all(|c| c.status == Status::Pass);
    VerifyReport {
        suite,
        seed: config.seed,
        fault: config.fault,
        checks: b.checks,
        passed,
    }
}

/// Largest of `values`, or an error when a value is not finite.
pub(crate) fn finite_max(values: impl IntoIterator<Item = f64>) -> Result<f64> {
    let mut m = f64::NEG_INFINITY;
    for v in values {
        if !v.is_finite() {
            return Err(Error::Domain(format!("non-finite value {v}")));
        }
        m = m.max(v);
    }
    Ok(m)
}
