//! Positive-interior cubature rules for cubes, simplices and their Cartesian
//! products.
//!
//! Rules are built in two phases. A seed rule of the requested degree is
//! assembled from one-dimensional Gauss rules by tensor products and Duffy
//! lifting ([`seeds`]). Nodes are then removed one at a time by a
//! predictor-corrector iteration on the moment equations ([`eliminator`]),
//! where the corrector is a least-squares Newton method steered away from the
//! domain boundary by a logarithmic barrier ([`corrector`], [`tline`]).
//!
//! ```no_run
//! use nodelim::{Domain, generate, GenerateOptions};
//!
//! let domain: Domain = "T2".parse().unwrap();
//! let out = generate(&domain, 5, &GenerateOptions::default()).unwrap();
//! assert_eq!(out.rule.num_nodes(), 7);
//! ```

pub mod cli;
pub mod corrector;
pub mod eliminator;
pub mod geometry;
pub mod momentsys;
pub mod orthobasis;
pub mod rules;
pub mod seeds;
pub mod tline;
pub mod univariate;

mod dual;

pub use corrector::{CorrectorConfig, CorrectorOutcome, CorrectorStatus};
pub use eliminator::{EliminationReport, EliminatorConfig, StopReason};
pub use geometry::{Domain, Factor, LinearConstraints, PackedVector};
pub use orthobasis::Basis;
pub use rules::CubatureRule;
pub use seeds::{generate, GenerateOptions, Generated};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid domain label `{0}`")]
    InvalidDomain(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("node {node} touches the boundary (slack {slack:e})")]
    BoundaryContact { node: usize, slack: f64 },
    #[error("Jacobian is numerically rank deficient (|L_ii| = {pivot:e}, max {max:e})")]
    RankDeficient { pivot: f64, max: f64 },
    #[error("weight exponent mismatch: expected {expected}, got {got}")]
    WeightExponentMismatch { expected: u32, got: u32 },
    #[error("eigenvalue iteration failed to converge")]
    ConvergenceFailure,
    #[error("line family is unbounded below")]
    Unbounded,
    #[error("weight {node} cannot be controlled in the tangent space")]
    DegenerateDirection { node: usize },
    #[error("reference value did not converge by degree {degree}")]
    NoConvergence { degree: usize },
    #[error("{0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
