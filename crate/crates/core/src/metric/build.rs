//! Unit balls for `A`-homogeneous distances.
//!
//! Work happens in the tuned frame. A sub-problem is a set of active frame
//! coordinates whose complement spans an `A`-invariant ideal, so the group
//! law and the dilations pass to the active coordinates.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use super::harness::{sample_in_ball, verify_convexity_with, ConvexityModel};
use super::tuned::{tuned_frame, TunedFrame};
use super::{certificate, sample_rng, HomogeneousBall, HomogeneousDistance, LayeredBall, MetricError};
use crate::grading::{classify_derivation, split_derivation, Grading, WEIGHT_TOLERANCE};
use crate::group::NilpotentGroup;
use crate::matrix::{norm2, RealMatrix};
use crate::spectral::{self, DilationFlow, SpectralTolerance};

const SAMPLING_SEED: u64 = 0x6e69_6c68_6f6d;

/// How the norm bound of a capped layer was obtained.
#[derive(Debug, Clone, PartialEq)]
pub enum CapMethod {
    /// Top weight 2: `C = (m κ C_χ + β/2) / 2` with `β` the bracket bound.
    TwoLayer { beta: f64, kappa: f64, chi: f64 },
    /// Top weight above 2: `C` from the sampled sup of `‖P_top(x̄, ȳ)‖ / ‖x̄‖‖ȳ‖`,
    /// doubled until sampled `A`-convexity holds.
    Sampled { sup_ratio: f64, doublings: u32 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CapRecord {
    pub weight: f64,
    pub dimension: usize,
    pub constant: f64,
    /// Factor `μ` applied to the complement before capping.
    pub rescale: f64,
    pub method: CapMethod,
}

#[derive(Debug, Clone)]
pub struct BallConstruction {
    /// The ball in the original coordinates.
    pub ball: HomogeneousBall,
    pub frame: TunedFrame,
    pub grading: Grading,
    pub caps: Vec<CapRecord>,
}

/// `θ = min(1/2, gap₁/2, gap₂/2)` with `gap_k` the distance from `k` to the
/// smallest weight above it.
pub fn default_theta(weights: &[f64]) -> f64 {
    let mut theta: f64 = 0.5;
    for k in [1.0, 2.0] {
        let gap = weights.iter().map(|w| w - k).filter(|&g| g > WEIGHT_TOLERANCE * 10.0).fold(f64::INFINITY, f64::min);
        if gap.is_finite() {
            theta = theta.min(gap / 2.0);
        }
    }
    theta
}

enum Step {
    /// A contraction bound failed in this frame; retry with a smaller `ε`.
    Retry,
    Fail(MetricError),
}

impl<E: Into<MetricError>> From<E> for Step {
    fn from(e: E) -> Self {
        Step::Fail(e.into())
    }
}

#[derive(Debug, Clone)]
struct Piece {
    weight: f64,
    coords: Vec<usize>,
    core: Vec<usize>,
}

struct Ctx<'a> {
    group: &'a NilpotentGroup,
    frame: &'a TunedFrame,
    /// `brackets[i][j]` are the frame coordinates of `[t_i, t_j]`.
    brackets: Vec<Vec<Vec<f64>>>,
    nilpotent: RealMatrix,
    tol: f64,
}

impl Ctx<'_> {
    fn contracts(&self, active: &[usize]) -> Result<bool, MetricError> {
        if active.is_empty() {
            return Ok(true);
        }
        let a = self.frame.generator.select(active, active);
        for i in 1..=1000 {
            let lambda = i as f64 / 1000.0;
            if spectral::expm(&a.scale(&lambda.ln()))?.operator_norm() > lambda * (1.0 + 1e-12) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Largest `|[t_i, t_j]_k|` over `i ∈ left`, `j ∈ right`, `k ∈ target`.
    fn bracket_leak(&self, left: &[usize], right: &[usize], target: &[usize]) -> f64 {
        let mut worst: f64 = 0.0;
        for &i in left {
            for &j in right {
                for &k in target {
                    worst = worst.max(self.brackets[i][j][k].abs());
                }
            }
        }
        worst
    }
}

fn selection(rows: &[usize], active: &[usize]) -> RealMatrix {
    RealMatrix::from_fn(rows.len(), active.len(), |r, c| if rows[r] == active[c] { 1.0 } else { 0.0 })
}

fn active_of(pieces: &[Piece]) -> Vec<usize> {
    pieces.iter().flat_map(|p| p.coords.iter().copied()).collect()
}

struct SubModel<'a> {
    ctx: &'a Ctx<'a>,
    active: Vec<usize>,
    flow: DilationFlow,
}

impl<'a> SubModel<'a> {
    fn new(ctx: &'a Ctx<'a>, active: Vec<usize>) -> Result<Self, MetricError> {
        let a = ctx.frame.generator.select(&active, &active);
        let flow = DilationFlow::new(&a, SpectralTolerance::default())?;
        Ok(Self { ctx, active, flow })
    }

    fn embed(&self, x: &[f64]) -> Vec<f64> {
        let mut full = vec![0.0; self.ctx.frame.dimension()];
        for (p, &k) in self.active.iter().enumerate() {
            full[k] = x[p];
        }
        self.ctx.frame.frame.mul_vec(&full)
    }
}

impl ConvexityModel for SubModel<'_> {
    fn dimension(&self) -> usize {
        self.active.len()
    }

    fn product(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let z = self.ctx.group.product(&self.embed(x), &self.embed(y));
        let back = self.ctx.frame.frame_inverse.mul_vec(&z);
        self.active.iter().map(|&k| back[k]).collect()
    }

    fn dilate(&self, lambda: f64, x: &[f64]) -> Vec<f64> {
        self.flow.dilate(lambda, x)
    }
}

/// Ball on the active coordinates of `pieces` and a bound `R ≥ Σ ‖x_piece‖`
/// valid on it.
fn build_sub(ctx: &Ctx<'_>, pieces: &[Piece], caps: &mut Vec<CapRecord>) -> Result<(HomogeneousBall, f64), Step> {
    let active = active_of(pieces);
    if ctx.bracket_leak(&active, &active, &active) <= ctx.tol {
        if !ctx.contracts(&active)? {
            return Err(Step::Retry);
        }
        return Ok((HomogeneousBall::euclidean(active.len()), (pieces.len() as f64).sqrt()));
    }
    let (top, rest) = pieces.split_last().expect("non-abelian sub-problem has a layer");
    if top.weight <= 2.0 + 10.0 * WEIGHT_TOLERANCE {
        two_layer(ctx, top, rest, &active, caps)
    } else {
        general(ctx, top, rest, &active, caps)
    }
}

fn two_layer(
    ctx: &Ctx<'_>,
    top: &Piece,
    rest: &[Piece],
    active: &[usize],
    caps: &mut Vec<CapRecord>,
) -> Result<(HomogeneousBall, f64), Step> {
    let cap = &top.core;
    let free: Vec<usize> = top.coords.iter().copied().filter(|k| !cap.contains(k)).collect();
    let mut comp_pieces: Vec<Piece> = rest.to_vec();
    if !free.is_empty() {
        comp_pieces.push(Piece { weight: top.weight, coords: free.clone(), core: Vec::new() });
    }
    let comp = active_of(&comp_pieces);
    let leak = ctx.bracket_leak(&comp, &comp, &comp).max(ctx.bracket_leak(cap, active, active));
    if leak > ctx.tol {
        return Err(Step::Fail(MetricError::CapStructure(leak)));
    }
    if !ctx.contracts(&comp)? {
        return Err(Step::Retry);
    }
    let mut beta_sq = 0.0;
    for &k in cap {
        let c = RealMatrix::from_fn(comp.len(), comp.len(), |a, b| ctx.brackets[comp[a]][comp[b]][k]);
        beta_sq += c.operator_norm().powi(2);
    }
    let beta = beta_sq.sqrt();
    let (kappa, chi, drift) = if free.is_empty() {
        (1.0, 0.0, 0.0)
    } else {
        let m = top.coords.len();
        let nu = ctx.nilpotent.select(&top.coords, &top.coords).operator_norm();
        let kappa = nu.max(1.0).powi(m as i32);
        let chi = certificate::find_chi_constant(m as u32)?;
        (kappa, chi, m as f64 * kappa * chi)
    };
    let mut constant = (drift + beta / 2.0) / 2.0;
    if constant <= 0.0 {
        constant = 1.0;
    }
    let node = LayeredBall::new(
        selection(cap, active),
        constant,
        selection(&comp, active),
        HomogeneousBall::euclidean(comp.len()),
    )
    .ok_or(Step::Fail(MetricError::CapStructure(f64::NAN)))?;
    caps.push(CapRecord {
        weight: top.weight,
        dimension: cap.len(),
        constant,
        rescale: 1.0,
        method: CapMethod::TwoLayer { beta, kappa, chi },
    });
    Ok((HomogeneousBall::Layered(node), (comp_pieces.len() as f64).sqrt() + constant))
}

fn general(
    ctx: &Ctx<'_>,
    top: &Piece,
    rest: &[Piece],
    active: &[usize],
    caps: &mut Vec<CapRecord>,
) -> Result<(HomogeneousBall, f64), Step> {
    let cap = &top.coords;
    let comp = active_of(rest);
    let leak = ctx.bracket_leak(cap, active, active);
    if leak > ctx.tol {
        return Err(Step::Fail(MetricError::CapStructure(leak)));
    }
    let (inner, inner_bound) = build_sub(ctx, rest, caps)?;
    let mu = (1.0 / inner_bound).min(1.0);
    let a_comp = ctx.frame.generator.select(&comp, &comp);
    let rescale = spectral::expm(&a_comp.scale(&(-mu.ln())))?;
    let shrunk = inner.pull_back(&rescale).ok_or(Step::Fail(MetricError::CapStructure(f64::NAN)))?;
    let bbox = shrunk.bounding_box();
    let model = SubModel::new(ctx, active.to_vec())?;
    let top_pos: Vec<usize> = cap.iter().map(|k| active.iter().position(|a| a == k).expect("cap is active")).collect();
    let lift = |x: &[f64]| {
        let mut v = vec![0.0; active.len()];
        for (p, &k) in comp.iter().enumerate() {
            v[active.iter().position(|a| *a == k).expect("complement is active")] = x[p];
        }
        v
    };
    let mut sup_ratio: f64 = 0.0;
    for i in 0..10_000u64 {
        let mut rng = sample_rng(SAMPLING_SEED, i);
        let (Some(x), Some(y)) =
            (sample_in_ball(&shrunk, &bbox, &mut rng, 10_000), sample_in_ball(&shrunk, &bbox, &mut rng, 10_000))
        else {
            continue;
        };
        let denom = norm2(&x) * norm2(&y);
        if denom == 0.0 {
            continue;
        }
        let z = model.product(&lift(&x), &lift(&y));
        let p: Vec<f64> = top_pos.iter().map(|&k| z[k]).collect();
        sup_ratio = sup_ratio.max(norm2(&p) / denom);
    }
    let mut constant = if sup_ratio < 1e-14 { 1.0 } else { 0.75 * sup_ratio };
    let projection = rescale.mul(&selection(&comp, active));
    for doublings in 0..20u32 {
        let node = LayeredBall::new(selection(cap, active), constant, projection.clone(), inner.clone())
            .ok_or(Step::Fail(MetricError::CapStructure(f64::NAN)))?;
        let ball = HomogeneousBall::Layered(node);
        let report = verify_convexity_with(&model, &ball, 2000, SAMPLING_SEED + 1, 1e-9);
        if report.violations == 0 {
            caps.push(CapRecord {
                weight: top.weight,
                dimension: cap.len(),
                constant,
                rescale: mu,
                method: CapMethod::Sampled { sup_ratio, doublings },
            });
            return Ok((ball, mu * inner_bound + constant));
        }
        constant *= 2.0;
    }
    Err(Step::Fail(MetricError::BudgetExhausted("cap constant")))
}

/// Unit ball of an `A`-homogeneous distance on `G`.
///
/// Fails with [`MetricError::NoDistance`] when the existence test says no.
pub fn build_ball(group: &NilpotentGroup, a: &RealMatrix) -> Result<BallConstruction, MetricError> {
    let g = group.algebra();
    let verdict = classify_derivation(g, a)?;
    if !verdict.answer {
        return Err(MetricError::NoDistance(verdict.reasons));
    }
    let grading = verdict.grading;
    let weights: Vec<f64> = grading.weights().collect();
    let theta = default_theta(&weights);
    let split = split_derivation(g, a, &grading.spectral)?;
    let n = a.rows();
    let mut epsilon = 1.0;
    for _ in 0..60 {
        let frame = tuned_frame(&grading, a, theta, epsilon)?;
        let cols: Vec<Vec<f64>> = (0..n).map(|j| frame.frame.column(j)).collect();
        let brackets: Vec<Vec<Vec<f64>>> = (0..n)
            .map(|i| (0..n).map(|j| frame.frame_inverse.mul_vec(&g.bracket_f64(&cols[i], &cols[j]))).collect())
            .collect();
        let scale = brackets.iter().flatten().flatten().fold(1.0f64, |m, v| m.max(v.abs()));
        let nilpotent = frame.frame_inverse.mul(&split.nilpotent).mul(&frame.frame);
        let ctx = Ctx { group, frame: &frame, brackets, nilpotent, tol: 1e-9 * scale };
        let pieces: Vec<Piece> = frame
            .layers
            .iter()
            .map(|l| Piece {
                weight: l.weight,
                coords: l.coordinates().collect(),
                core: l.core_coordinates().collect(),
            })
            .collect();
        let mut caps = Vec::new();
        match build_sub(&ctx, &pieces, &mut caps) {
            Ok((ball, _)) => {
                let ball = ball.pull_back(&frame.frame_inverse).ok_or(MetricError::CapStructure(f64::NAN))?;
                caps.reverse();
                return Ok(BallConstruction { ball, frame, grading, caps });
            }
            Err(Step::Retry) => epsilon = frame.epsilon * 0.5,
            Err(Step::Fail(e)) => return Err(e),
        }
    }
    Err(MetricError::BudgetExhausted("tuned frame"))
}

/// [`build_ball`] wrapped into the distance it defines.
pub fn build_distance(
    group: &NilpotentGroup,
    a: &RealMatrix,
) -> Result<(HomogeneousDistance, BallConstruction), MetricError> {
    let built = build_ball(group, a)?;
    let d = HomogeneousDistance::new(group.clone(), a.clone(), built.ball.clone())?;
    Ok((d, built))
}
