//! # rearrange-lab
//!
//! Decreasing rearrangements, rearrangement-invariant norms and mean
//! oscillations on finite probability spaces, together with a randomized
//! verification harness for a family of rearrangement and Leibniz-type
//! inequalities:
//!
//! | Module | Contents |
//! |--------|----------|
//! | [`space`] | probability spaces, simple functions, integration |
//! | [`rearrange`] | `f*`, step profiles, layer cakes |
//! | [`norms`] | `L^p`, Lorentz `Λ_φ`, generated and associate norms |
//! | [`oscillation`] | the bilinear form `I_{A,B}`, the derivation `∂`, zero-mean block decomposition |
//! | [`verify`] | seeded trial suites and violation certificates |
//! | [`search`] | hill-climbing search for near-equality instances |
//!
//! All computations are generic over [`Scalar`]; instantiate with
//! `BigRational` for exact answers, `f64` for speed, or [`Quad`] for a
//! 128-bit recheck.
//!
//! ```
//! use std::sync::Arc;
//! use rearrange_lab::{DiscreteSpace, SimpleFunction, rearrange::decreasing_rearrangement};
//!
//! let space = Arc::new(DiscreteSpace::<f64>::new(vec![0.2, 0.3, 0.5]).unwrap());
//! let f = SimpleFunction::new(space, vec![3.0, -1.0, 2.0]).unwrap();
//! let profile = decreasing_rearrangement(&f);
//! assert_eq!(profile.segments().len(), 3);
//! assert_eq!(profile.sup(), 3.0);
//! ```

use thiserror::Error;

pub mod io;
pub mod norms;
pub mod oscillation;
pub mod rearrange;
pub mod scalar;
pub mod search;
pub mod space;
pub mod verify;

pub use norms::{ConcaveWeight, RiNorm};
pub use rearrange::{LayerCake, StepProfile};
pub use scalar::{Exponent, FloatWidth, Mode, Quad, Scalar};
pub use space::{AtomSet, DiscreteSpace, SimpleFunction};

pub use num_rational::BigRational;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("space has no atoms")]
    EmptySpace,

    #[error("weight of atom {index} is not positive")]
    NonPositiveWeight { index: usize },

    #[error("weights sum to {sum}, not 1")]
    WeightSum { sum: String },

    #[error("function has {got} values but the space has {expected} atoms")]
    LengthMismatch { expected: usize, got: usize },

    #[error("functions are defined on different spaces")]
    SpaceMismatch,

    #[error("atom {index} out of range for a space of {atoms} atoms")]
    AtomOutOfRange { index: usize, atoms: usize },

    #[error("norm requires a space whose atoms all have equal measure")]
    NonEqualAtomSpace,

    #[error("function does not have zero mean (mean = {0})")]
    NotZeroMean(String),

    #[error("input is identically zero")]
    EmptyInput,

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("result is not representable in exact mode: {0}")]
    Inexact(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid exponent: {0}")]
    InvalidExponent(String),

    #[error("invalid literal `{0}`")]
    InvalidLiteral(String),

    #[error("invalid step profile: {0}")]
    InvalidProfile(String),

    #[error("invalid concave weight: {0}")]
    InvalidWeight(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("infeasible search problem: {0}")]
    InfeasibleProblem(String),

    #[error("landscape has {0} free parameters, at most 2 are supported")]
    TooManyFreeParameters(usize),

    #[error("kernel of size {0}x{0} exceeds the materialization limit")]
    KernelTooLarge(usize),

    #[error("malformed input: {0}")]
    Malformed(String),
}

impl Error {
    /// True for errors describing mathematically invalid input data, as
    /// opposed to malformed input or bad configuration.
    pub fn is_precondition(&self) -> bool {
        matches!(
            self,
            Error::EmptySpace
                | Error::NonPositiveWeight { .. }
                | Error::WeightSum { .. }
                | Error::LengthMismatch { .. }
                | Error::SpaceMismatch
                | Error::NonEqualAtomSpace
                | Error::NotZeroMean(_)
                | Error::EmptyInput
                | Error::PreconditionViolated(_)
                | Error::InfeasibleProblem(_)
        )
    }

    /// Short machine-readable name.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::EmptySpace => "empty_space",
            Error::NonPositiveWeight { .. } => "non_positive_weight",
            Error::WeightSum { .. } => "weight_sum",
            Error::LengthMismatch { .. } => "length_mismatch",
            Error::SpaceMismatch => "space_mismatch",
            Error::AtomOutOfRange { .. } => "atom_out_of_range",
            Error::NonEqualAtomSpace => "non_equal_atom_space",
            Error::NotZeroMean(_) => "not_zero_mean",
            Error::EmptyInput => "empty_input",
            Error::PreconditionViolated(_) => "precondition_violated",
            Error::Inexact(_) => "inexact",
            Error::Domain(_) => "domain",
            Error::InvalidExponent(_) => "invalid_exponent",
            Error::InvalidLiteral(_) => "invalid_literal",
            Error::InvalidProfile(_) => "invalid_profile",
            Error::InvalidWeight(_) => "invalid_weight",
            Error::InvalidConfig(_) => "invalid_config",
            Error::InfeasibleProblem(_) => "infeasible_problem",
            Error::TooManyFreeParameters(_) => "too_many_free_parameters",
            Error::KernelTooLarge(_) => "kernel_too_large",
            Error::Malformed(_) => "malformed",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
