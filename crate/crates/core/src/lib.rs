//! Polynomial frame approximation on irregular domains.
//!
//! A function on a domain `Omega` inside a bounding box `D` is fitted by
//! regularized least squares in the restriction to `Omega` of an orthonormal
//! tensor basis of `D`. The crate provides index sets, bases, domain samplers,
//! the truncated-SVD solver, conditioning diagnostics and experiment drivers.

pub mod diagnostics;
pub mod domains;
pub mod error;
pub mod experiments;
pub mod framesolver;
pub mod indexsets;
pub mod polybasis;
pub mod quadrature;
pub mod rng;
pub mod targets;

pub use domains::{DomainKind, DomainSpec, SampleSet, SamplingMeasure};
pub use error::{Error, Result};
pub use framesolver::{DesignMatrix, TruncatedSvdSolution};
pub use indexsets::{IndexFamily, MultiIndex, MultiIndexSet, OversamplingRule};
pub use polybasis::BasisKind;
pub use targets::TargetFunction;
