use thiserror::Error;

/// Named admissibility conditions. Error messages cite these so a failing
/// parameter set can be traced back to the inequality it broke.
pub mod condition {
    pub const NORM: &str = "norm admissibility alpha + p*t > -1";
    pub const PROJECTION: &str = "projection bound alpha + 1 < p*(s + 1)";
    pub const KERNEL_INTEGRABILITY: &str =
        "kernel integrability n + s + 1 > n*max(1, 1/p) + (1 + alpha)/p";
    pub const FINITE_WEIGHT: &str = "finite weight exponent > -1";
    pub const OPEN_BALL: &str = "point inside the open unit ball |x| < 1";
    pub const UNIT_INTERVAL: &str = "radius strictly between 0 and 1";
    pub const SCHATTEN_WEIGHT: &str = "Schatten weight 2s - alpha > -1";
    pub const POSITIVE: &str = "strictly positive parameter";
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("{condition} violated: {detail}")]
    Parameter {
        condition: &'static str,
        detail: String,
    },

    #[error(
        "kernel series stopped at {terms} terms with tail bound {achieved:e} above target {target:e}"
    )]
    Truncation {
        terms: usize,
        achieved: f64,
        target: f64,
    },

    #[error("dimension n = {0} is not supported by this operation")]
    UnsupportedDimension(usize),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("matrix is not positive semidefinite: smallest eigenvalue {min:e} below -{tol:e}")]
    PositivityViolation { min: f64, tol: f64 },

    #[error("invalid document at {pointer}: {message}")]
    Schema { pointer: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn param(condition: &'static str, detail: impl Into<String>) -> Self {
        Error::Parameter {
            condition,
            detail: detail.into(),
        }
    }
}

pub(crate) fn require_in_ball(x: &[f64], what: &str) -> Result<()> {
    let r2 = crate::vector::norm_sq(x);
    if !(r2 < 1.0) || x.iter().any(|v| !v.is_finite()) {
        return Err(Error::param(
            condition::OPEN_BALL,
            format!("{what} has |{what}| = {}", r2.sqrt()),
        ));
    }
    Ok(())
}

pub(crate) fn require_weight(beta: f64, what: &str) -> Result<()> {
    if !(beta > -1.0) {
        return Err(Error::param(
            condition::FINITE_WEIGHT,
            format!("{what} = {beta}"),
        ));
    }
    Ok(())
}
