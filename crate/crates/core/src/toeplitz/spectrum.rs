//! Eigenvalues, traces and Schatten norms of operator matrices.

use nalgebra::SymmetricEigen;
use serde::{Deserialize, Serialize};

use super::matrix::OperatorMatrix;
use crate::error::{Error, Result};

/// Relative tolerance for negative eigenvalues of a positive operator.
pub const POSITIVITY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchattenNorm {
    pub p: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    /// Truncation degree `K`.
    pub max_degree: usize,
    pub size: usize,
    /// Descending.
    pub eigenvalues: Vec<f64>,
    pub trace: f64,
    pub diagonal_trace: f64,
    pub schatten: Vec<SchattenNorm>,
}

impl SpectrumReport {
    pub fn schatten_norm(&self, p: f64) -> Option<f64> {
        self.schatten.iter().find(|s| s.p == p).map(|s| s.value)
    }

    pub fn top(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }
}

/// `(sum lambda_i^p)^{1/p}` over nonnegative eigenvalues.
pub fn schatten(eigenvalues: &[f64], p: f64) -> f64 {
    let top = eigenvalues.iter().cloned().fold(0.0, f64::max);
    if top == 0.0 {
        return 0.0;
    }
    // scaled to avoid overflow for large p
    let s: f64 = eigenvalues.iter().map(|l| (l.max(0.0) / top).powf(p)).sum();
    top * s.powf(1.0 / p)
}

/// Symmetric eigendecomposition with Schatten norms for each `p` in `ps`.
///
/// Fails with [`Error::PositivityViolation`] when the smallest eigenvalue is
/// below `-POSITIVITY_TOL * max |lambda|`, which for a positive measure means
/// the quadrature behind the matrix is inaccurate.
pub fn spectrum(m: &OperatorMatrix, ps: &[f64]) -> Result<SpectrumReport> {
    for p in ps {
        if !(*p >= 1.0) {
            return Err(Error::Domain(format!("Schatten exponent must be at least 1, got {p}")));
        }
    }
    let size = m.size();
    let diagonal_trace = m.entries.trace();
    let mut eigenvalues: Vec<f64> = if size == 0 {
        vec![]
    } else {
        SymmetricEigen::new(m.entries.clone()).eigenvalues.iter().copied().collect()
    };
    eigenvalues.sort_by(|a, b| b.total_cmp(a));
    let scale = eigenvalues.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let min = eigenvalues.last().copied().unwrap_or(0.0);
    let tol = POSITIVITY_TOL * scale;
    if min < -tol {
        return Err(Error::PositivityViolation { min, tol });
    }
    let trace = eigenvalues.iter().sum();
    let schatten = ps
        .iter()
        .map(|&p| SchattenNorm {
            p,
            value: schatten(&eigenvalues, p),
        })
        .collect();
    Ok(SpectrumReport {
        max_degree: m.spec.max_degree,
        size,
        eigenvalues,
        trace,
        diagonal_trace,
        schatten,
    })
}
