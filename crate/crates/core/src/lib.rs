//! Homogeneous distances on simply connected nilpotent Lie groups.
//!
//! The group is modelled in exponential coordinates of the first kind, so a
//! group element is a vector of the Lie algebra and the product is the
//! truncated Baker-Campbell-Hausdorff series. Everything here is `no_std`
//! with `alloc`; file formats and the command line live in the `nilhom`
//! crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod algebra;
pub mod decompose;
pub mod grading;
pub mod group;
pub mod linalg;
pub mod matrix;
pub mod metric;
pub mod scalar;
pub mod spectral;

pub use matrix::{Matrix, RationalMatrix, RealMatrix};
pub use num_complex::Complex64;
pub use scalar::{ratio, Rational, Scalar};

/// Any error raised by this crate.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Algebra(#[from] algebra::AlgebraError),
    #[error(transparent)]
    Group(#[from] group::GroupError),
    #[error(transparent)]
    Grading(#[from] grading::GradingError),
    #[error(transparent)]
    Spectral(#[from] spectral::SpectralError),
    #[error(transparent)]
    Metric(#[from] metric::MetricError),
    #[error(transparent)]
    Decompose(#[from] decompose::DecomposeError),
}
