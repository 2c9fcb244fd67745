//! Exact and interval scalars, integer Moebius maps and upper half-plane
//! primitives.

mod moebius;
mod number;
mod point;

pub use moebius::Moebius;
pub use number::{normalize_rational, normalize_surd, Number, Surd, Tracked};
#[allow(unused_imports)]
pub(crate) use number::ln_big;
pub use point::{hyperbolic_distance, UpperHalfPoint};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ArithError {
    #[error("malformed number: {0}")]
    Malformed(String),
    #[error("undecidable comparison: error intervals overlap")]
    Undecidable,
    #[error("precision exhausted")]
    PrecisionExhausted,
}
