//! Sampled checks of the metric axioms and of `A`-convexity.

use alloc::vec::Vec;
use core::ops::Range;

#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;

use super::{sample_rng, Distance, HomogeneousBall, MetricError};
use crate::group::NilpotentGroup;
use crate::matrix::RealMatrix;
use crate::spectral::{DilationFlow, SpectralTolerance};

/// Group law and dilations in whatever coordinates a ball is expressed in.
pub trait ConvexityModel {
    fn dimension(&self) -> usize;
    fn product(&self, x: &[f64], y: &[f64]) -> Vec<f64>;
    fn dilate(&self, lambda: f64, x: &[f64]) -> Vec<f64>;
}

/// The group in its own exponential coordinates with `δ_λ = λ^A`.
#[derive(Debug, Clone)]
pub struct AmbientModel<'a> {
    pub group: &'a NilpotentGroup,
    pub flow: DilationFlow,
}

impl<'a> AmbientModel<'a> {
    pub fn new(group: &'a NilpotentGroup, a: &RealMatrix) -> Result<Self, MetricError> {
        super::check_dimension(group.dimension(), a.rows())?;
        Ok(Self { group, flow: DilationFlow::new(a, SpectralTolerance::default())? })
    }
}

impl ConvexityModel for AmbientModel<'_> {
    fn dimension(&self) -> usize {
        self.group.dimension()
    }

    fn product(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        self.group.product(x, y)
    }

    fn dilate(&self, lambda: f64, x: &[f64]) -> Vec<f64> {
        self.flow.dilate(lambda, x)
    }
}

/// Uniform point of the ball by rejection from its bounding box.
pub fn sample_in_ball<R: Rng>(ball: &HomogeneousBall, bbox: &[f64], rng: &mut R, tries: usize) -> Option<Vec<f64>> {
    for _ in 0..tries {
        let x: Vec<f64> = bbox.iter().map(|&w| if w > 0.0 { rng.gen_range(-w..=w) } else { 0.0 }).collect();
        if ball.contains(&x) {
            return Some(x);
        }
    }
    None
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub lambda: f64,
    pub excess: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvexityReport {
    pub samples: usize,
    /// Samples abandoned because rejection sampling found no point.
    pub skipped: usize,
    pub violations: usize,
    /// Largest `excess((λ^A x)((1−λ)^A y))` seen.
    pub worst_excess: f64,
    /// The first few violating triples.
    pub examples: Vec<Violation>,
}

/// Checks `(λ^A x)·((1−λ)^A y) ∈ B` for sampled `x, y ∈ B`, `λ ∈ (0, 1)`.
pub fn verify_convexity_with<M: ConvexityModel + ?Sized>(
    model: &M,
    ball: &HomogeneousBall,
    samples: usize,
    seed: u64,
    margin: f64,
) -> ConvexityReport {
    let bbox = ball.bounding_box();
    let mut report =
        ConvexityReport { samples, skipped: 0, violations: 0, worst_excess: f64::NEG_INFINITY, examples: Vec::new() };
    for i in 0..samples {
        let mut rng = sample_rng(seed, i as u64);
        let (Some(x), Some(y)) =
            (sample_in_ball(ball, &bbox, &mut rng, 10_000), sample_in_ball(ball, &bbox, &mut rng, 10_000))
        else {
            report.skipped += 1;
            continue;
        };
        let lambda: f64 = rng.gen_range(0.0..1.0);
        if lambda == 0.0 {
            continue;
        }
        let z = model.product(&model.dilate(lambda, &x), &model.dilate(1.0 - lambda, &y));
        let e = ball.excess(&z);
        report.worst_excess = report.worst_excess.max(e);
        if e > margin {
            report.violations += 1;
            if report.examples.len() < 5 {
                report.examples.push(Violation { x, y, lambda, excess: e });
            }
        }
    }
    report
}

/// [`verify_convexity_with`] for the group in its exponential coordinates.
pub fn verify_a_convexity(
    ball: &HomogeneousBall,
    group: &NilpotentGroup,
    a: &RealMatrix,
    samples: usize,
    seed: u64,
    margin: f64,
) -> Result<ConvexityReport, MetricError> {
    super::check_dimension(group.dimension(), ball.dimension())?;
    let model = AmbientModel::new(group, a)?;
    Ok(verify_convexity_with(&model, ball, samples, seed, margin))
}

/// Worst residuals of the metric axioms over the sampled points.
#[derive(Debug, Clone, PartialEq)]
pub struct AxiomReport {
    pub samples: usize,
    /// `max |d(x,y) − d(y,x)|`.
    pub symmetry: f64,
    /// `max d(x,x)`.
    pub identity: f64,
    /// `min d(x,y)` over pairs with `‖x − y‖∞ ≥ 10⁻³`.
    pub min_separated: f64,
    /// `max d(x,z) − d(x,y) − d(y,z)`.
    pub triangle: f64,
    /// `max |d(gx,gy) − d(x,y)|`.
    pub left_invariance: f64,
    /// `max |d(δx,δy) − λ d(x,y)| / max(1, λ d(x,y))` for `λ ∈ [0.1, 10]`.
    pub homogeneity: Option<f64>,
}

impl AxiomReport {
    fn empty(with_homogeneity: bool) -> Self {
        Self {
            samples: 0,
            symmetry: 0.0,
            identity: 0.0,
            min_separated: f64::INFINITY,
            triangle: f64::NEG_INFINITY,
            left_invariance: 0.0,
            homogeneity: with_homogeneity.then_some(0.0),
        }
    }

    pub fn merge(mut self, other: &AxiomReport) -> Self {
        self.samples += other.samples;
        self.symmetry = self.symmetry.max(other.symmetry);
        self.identity = self.identity.max(other.identity);
        self.min_separated = self.min_separated.min(other.min_separated);
        self.triangle = self.triangle.max(other.triangle);
        self.left_invariance = self.left_invariance.max(other.left_invariance);
        self.homogeneity = match (self.homogeneity, other.homogeneity) {
            (Some(a), Some(b)) => Some(a.max(b)),
            (a, b) => a.or(b),
        };
        self
    }

    /// Every residual within `tol` and every separated pair at positive distance.
    pub fn passes(&self, tol: f64) -> bool {
        self.symmetry <= tol
            && self.identity <= tol
            && self.min_separated > 0.0
            && self.triangle <= tol
            && self.left_invariance <= tol
            && self.homogeneity.map_or(true, |h| h <= tol)
    }
}

fn uniform_point<R: Rng>(rng: &mut R, n: usize, radius: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-radius..=radius)).collect()
}

/// Samples `range` of a seeded run; runs over disjoint ranges merge into
/// the report of the whole run.
pub fn verify_axioms_range<D: Distance + ?Sized>(
    d: &D,
    flow: Option<&DilationFlow>,
    range: Range<usize>,
    seed: u64,
    radius: f64,
) -> Result<AxiomReport, MetricError> {
    let n = d.dimension();
    let group = d.group();
    let mut r = AxiomReport::empty(flow.is_some());
    for i in range {
        let mut rng = sample_rng(seed, i as u64);
        let x = uniform_point(&mut rng, n, radius);
        let y = uniform_point(&mut rng, n, radius);
        let z = uniform_point(&mut rng, n, radius);
        let g = uniform_point(&mut rng, n, radius);
        let dxy = d.distance(&x, &y)?;
        let dyx = d.distance(&y, &x)?;
        r.symmetry = r.symmetry.max((dxy - dyx).abs());
        r.identity = r.identity.max(d.distance(&x, &x)?);
        let sep = x.iter().zip(&y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        if sep >= 1e-3 {
            r.min_separated = r.min_separated.min(dxy);
        }
        let dxz = d.distance(&x, &z)?;
        let dyz = d.distance(&y, &z)?;
        r.triangle = r.triangle.max(dxz - dxy - dyz);
        let gx = group.product(&g, &x);
        let gy = group.product(&g, &y);
        r.left_invariance = r.left_invariance.max((d.distance(&gx, &gy)? - dxy).abs());
        if let Some(flow) = flow {
            let lambda = 10f64.powf(rng.gen_range(-1.0..=1.0));
            let scaled = d.distance(&flow.dilate(lambda, &x), &flow.dilate(lambda, &y))?;
            let target = lambda * dxy;
            let rel = (scaled - target).abs() / target.max(1.0);
            r.homogeneity = r.homogeneity.map(|h| h.max(rel));
        }
        r.samples += 1;
    }
    Ok(r)
}

/// Symmetry, positivity, triangle inequality, left-invariance and, when a
/// dilation flow is given, homogeneity over `samples` seeded points drawn
/// uniformly from `[−radius, radius]ⁿ`.
pub fn verify_axioms<D: Distance + ?Sized>(
    d: &D,
    flow: Option<&DilationFlow>,
    samples: usize,
    seed: u64,
    radius: f64,
) -> Result<AxiomReport, MetricError> {
    verify_axioms_range(d, flow, 0..samples, seed, radius)
}
