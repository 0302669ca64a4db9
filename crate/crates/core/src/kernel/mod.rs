//! Polynomials over parameter variables, exact distributions, ground carriers.

mod dist;
mod ground;
mod poly;

pub use dist::{prob, Distribution, Prob};
pub use ground::{carrier, BitString, Carrier, GroundType, GroundValue};
pub use poly::{poly_leq, rho, Leq, Monomial, ParamSubstitution, Polynomial};

use alloc::string::String;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum KernelError {
    #[error("parameter variable `{0}` has no value")]
    UnboundParamVar(String),
    #[error("weights are negative or do not sum to 1")]
    InvalidWeights,
    #[error("arithmetic overflow while evaluating a polynomial")]
    Overflow,
}
