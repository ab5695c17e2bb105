use thiserror::Error;

/// Errors raised by the stability routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-finite input: {0}")]
    NonFinite(&'static str),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("predicate does not change sign on [{lo}, {hi}]")]
    NoBracket { lo: f64, hi: f64 },

    #[error("no Krein collision found in [{lo}, {hi}] (smallest gap {gap:.3e})")]
    NoCollision { lo: f64, hi: f64, gap: f64 },

    #[error("collision at Omega0 = {omega0} is not a Jordan block: {reason}")]
    DegenerateChain { omega0: f64, reason: String },

    #[error("critical surface denominator vanishes ({denominator:.3e})")]
    DegenerateSurface { denominator: f64 },

    #[error("instability tongue has lifted off (radicand {radicand:.3e})")]
    NoBoundary { radicand: f64 },

    #[error("step halving changed the monodromy matrix by {deviation:.3e}")]
    Integration { deviation: f64 },

    #[error("quadrature refinement changed an entry by {deviation:.3e}")]
    Quadrature { deviation: f64 },

    #[error("no flutter below q = {ceiling}")]
    NoFlutter { ceiling: f64 },

    #[error("leading coefficient of the dispersion quadratic vanishes")]
    DegenerateQuadratic,
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure_finite(value: f64, name: &'static str) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFinite(name))
    }
}
