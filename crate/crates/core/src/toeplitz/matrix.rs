//! Matrices of positive Toeplitz operators on a truncated orthonormal basis:
//! `M_ij = int D^u_s e_i D^u_s e_j d kappa` with `d kappa = (1 - |y|^2)^{2u} d mu`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::basis::{Basis, BasisSpec, Label};
use crate::error::{Error, Result};
use crate::kernel::v_alpha;
use crate::measure::Measure;
use crate::quadrature::QuadratureRule;
use crate::vector::norm;

#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    pub spec: BasisSpec,
    pub labels: Vec<Label>,
    pub entries: DMatrix<f64>,
    /// Fingerprint of the measure the matrix was built from.
    pub fingerprint: String,
}

/// Serialized form: row-major entries.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixDocument {
    pub spec: BasisSpec,
    pub labels: Vec<Label>,
    pub fingerprint: String,
    pub rows: Vec<Vec<f64>>,
}

impl OperatorMatrix {
    pub fn size(&self) -> usize {
        self.entries.nrows()
    }

    /// Largest `|M_ij - M_ji|`.
    pub fn asymmetry(&self) -> f64 {
        let m = &self.entries;
        (m - m.transpose()).amax()
    }

    pub fn to_document(&self) -> MatrixDocument {
        MatrixDocument {
            spec: self.spec,
            labels: self.labels.clone(),
            fingerprint: self.fingerprint.clone(),
            rows: self
                .entries
                .row_iter()
                .map(|r| r.iter().copied().collect())
                .collect(),
        }
    }

    /// Entries as CSV, one matrix row per line, preceded by a header naming
    /// each column by `degree:order:parity`.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let header: Vec<String> = self
            .labels
            .iter()
            .map(|l| format!("{}:{}:{:?}", l.degree, l.order, l.parity).to_lowercase())
            .collect();
        out.push_str(&header.join(","));
        out.push('\n');
        for row in self.entries.row_iter() {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:.17e}")).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

/// Quadrature level for the density part: exact for products of two
/// degree-`K` harmonics against a power weight.
pub fn default_level(spec: &BasisSpec) -> usize {
    (2 * spec.max_degree + 2).max(16)
}

/// Assembles the operator matrix; atoms are summed exactly and a density
/// part is integrated with a product rule for `nu_{c + 2u}`.
pub fn toeplitz_matrix(mu: &Measure, spec: BasisSpec, level: Option<usize>) -> Result<OperatorMatrix> {
    let basis = Basis::new(spec)?;
    if mu.n != spec.n {
        return Err(Error::Domain(format!(
            "measure lives in dimension {} but the basis in {}",
            mu.n, spec.n
        )));
    }
    let two_u = 2.0 * spec.u();
    let size = basis.len();
    let mut m = DMatrix::<f64>::zeros(size, size);
    for a in &mu.atoms {
        let v = basis.derivative_values(&a.x);
        let w = a.w * (1.0 - crate::vector::norm_sq(&a.x)).powf(two_u);
        for i in 0..size {
            for j in 0..=i {
                m[(i, j)] += w * v[i] * v[j];
            }
        }
    }
    if let Some(d) = &mu.density {
        let e = d.exponent() + two_u;
        if !(e > -1.0) {
            return Err(Error::Precondition(format!(
                "kappa = (1 - |y|^2)^(2u) mu has density exponent {e} <= -1 and is not finite"
            )));
        }
        let rule = QuadratureRule::new(spec.n, e, level.unwrap_or_else(|| default_level(&spec)))?;
        let tri = size * (size + 1) / 2;
        let sums = rule.integrate_many(tri, |x, out| {
            let v = basis.derivative_values(x);
            let g = d.smooth(norm(x));
            let mut idx = 0;
            for i in 0..size {
                for j in 0..=i {
                    out[idx] = g * v[i] * v[j];
                    idx += 1;
                }
            }
        });
        let c = v_alpha(spec.n, e);
        let mut idx = 0;
        for i in 0..size {
            for j in 0..=i {
                m[(i, j)] += c * sums[idx];
                idx += 1;
            }
        }
    }
    for i in 0..size {
        for j in 0..i {
            m[(j, i)] = m[(i, j)];
        }
    }
    Ok(OperatorMatrix {
        spec,
        labels: basis.labels().to_vec(),
        entries: m,
        fingerprint: mu.fingerprint(),
    })
}
