//! Harmonic Bergman-Besov spaces on the unit ball: reproducing kernels,
//! radial derivatives, pseudohyperbolic geometry, Carleson measures and
//! truncated Toeplitz operators, with a verification battery that checks
//! each of them by independent routes.
//!
//! The guide in `book/` walks through the modules with runnable examples.

pub mod axisym;
pub mod calculus;
pub mod carleson;
pub mod error;
pub mod fit;
pub mod geometry;
pub mod kernel;
pub mod measure;
pub mod polynomial;
pub mod quadrature;
pub mod toeplitz;
pub mod vector;
pub mod verify;

pub use error::{Error, Result};

// The guide's code blocks run as doctests so the book cannot drift from the API.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/kernels.md")]
    mod kernels {}
    #[doc = include_str!("../../../book/src/derivatives.md")]
    mod derivatives {}
    #[doc = include_str!("../../../book/src/geometry.md")]
    mod geometry {}
    #[doc = include_str!("../../../book/src/measures.md")]
    mod measures {}
    #[doc = include_str!("../../../book/src/toeplitz.md")]
    mod toeplitz {}
    #[doc = include_str!("../../../book/src/verification.md")]
    mod verification {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
