//! Homogeneous unit balls, their gauges and the verification harness.
//!
//! A ball is built in a tuned frame where every layer of the grading carries
//! a Euclidean norm contracted by the dilations. Layers are capped from the
//! top down: the top layer of the current quotient gets a norm bound `C` and
//! the rest is handled recursively.

use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::grading::{GradingError, Reason};
use crate::group::{GroupError, NilpotentGroup};
use crate::spectral::SpectralError;

mod ball;
mod build;
pub mod certificate;
mod distance;
mod harness;
mod tuned;

pub use ball::{HomogeneousBall, LayeredBall};
pub use build::{build_ball, build_distance, default_theta, BallConstruction, CapMethod, CapRecord};
pub use certificate::{box_ball_certificate, find_chi_constant, BoxCertificate};
pub use distance::{
    averaged_distance, bilipschitz_constants, sup_distance, Averaged, Bilipschitz, HomogeneousDistance, SupDistance,
};
pub use harness::{
    sample_in_ball, verify_a_convexity, verify_axioms, verify_axioms_range, verify_convexity_with, AmbientModel,
    AxiomReport, ConvexityModel, ConvexityReport, Violation,
};
pub use tuned::{tuned_frame, FrameLayer, TunedFrame};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricError {
    #[error("no homogeneous distance exists: {}", reasons_text(.0))]
    NoDistance(Vec<Reason>),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("generator is not a derivation")]
    NotDerivation,
    #[error("tuned norm not found for layer of weight {weight} (contraction ratio {ratio})")]
    Tuning { weight: f64, ratio: f64 },
    #[error("brackets leave the capped layer (residual {0:e})")]
    CapStructure(f64),
    #[error("search budget exhausted: {0}")]
    BudgetExhausted(&'static str),
    #[error("gauge root not bracketed within |log μ| ≤ {0}")]
    GaugeRange(f64),
    #[error("scale factor must be positive and different from 1, got {0}")]
    InvalidScale(f64),
    #[error("rejection sampling accepted no points")]
    EmptySample,
    #[error(transparent)]
    Grading(#[from] GradingError),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

fn reasons_text(reasons: &[Reason]) -> alloc::string::String {
    use core::fmt::Write;
    let mut s = alloc::string::String::new();
    for (i, r) in reasons.iter().enumerate() {
        if i > 0 {
            s.push_str("; ");
        }
        let _ = write!(s, "{r}");
    }
    s
}

/// A left-invariant distance on a nilpotent group in exponential coordinates.
pub trait Distance {
    fn group(&self) -> &NilpotentGroup;

    fn dimension(&self) -> usize {
        self.group().dimension()
    }

    fn distance(&self, p: &[f64], q: &[f64]) -> Result<f64, MetricError>;
}

impl<D: Distance + ?Sized> Distance for &D {
    fn group(&self) -> &NilpotentGroup {
        (**self).group()
    }

    fn distance(&self, p: &[f64], q: &[f64]) -> Result<f64, MetricError> {
        (**self).distance(p, q)
    }
}

/// Generator for sample `index` of a seeded run; independent of how samples
/// are split across workers.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn check_dimension(expected: usize, got: usize) -> Result<(), MetricError> {
    if expected == got {
        Ok(())
    } else {
        Err(MetricError::Dimension { expected, got })
    }
}
