//! Positive Toeplitz operators on `b^2_alpha`, truncated to harmonics of
//! bounded degree.

pub mod basis;
pub mod diagnostics;
pub mod matrix;
pub mod spectrum;

pub use basis::{Basis, BasisSpec, Label, Parity};
pub use diagnostics::{
    berezin_lp, boundedness_estimate, intertwine_check, intertwine_matrices, radial_check, radial_oracle,
    schatten_diagnostic, toeplitz_apply, trace_vs_berezin, BoundednessReport, IntertwineReport, LadderStep,
    OperatorSpaces, RadialCheck, SchattenReport, TraceReport,
};
pub use matrix::{toeplitz_matrix, MatrixDocument, OperatorMatrix};
pub use spectrum::{schatten, spectrum, SchattenNorm, SpectrumReport};
