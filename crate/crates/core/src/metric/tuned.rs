//! Frames in which `λ^A` contracts every layer at nearly its weight.
//!
//! Inside a generalized eigenspace `E_α` the nilpotent part is written in an
//! orthonormal basis adapted to the flag `ker N ⊂ ker N² ⊂ …`; vectors of
//! level `k` are scaled by `ε^{k−1}`, which shrinks the nilpotent part to
//! `O(ε)` without touching the semisimple part.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use super::MetricError;
use crate::grading::{real_basis, Grading};
use crate::matrix::{Matrix, RealMatrix};
use crate::spectral::{self, Cluster};

/// Position of one layer in the frame.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameLayer {
    pub weight: f64,
    pub start: usize,
    pub dimension: usize,
    /// The first `core` coordinates of the layer span `ker A_N ∩ V_t`.
    pub core: usize,
}

impl FrameLayer {
    pub fn coordinates(&self) -> core::ops::Range<usize> {
        self.start..self.start + self.dimension
    }

    pub fn core_coordinates(&self) -> core::ops::Range<usize> {
        self.start..self.start + self.core
    }
}

#[derive(Debug, Clone)]
pub struct TunedFrame {
    pub epsilon: f64,
    pub theta: f64,
    /// Columns are the frame vectors.
    pub frame: RealMatrix,
    pub frame_inverse: RealMatrix,
    /// `T⁻¹ A T`.
    pub generator: RealMatrix,
    pub layers: Vec<FrameLayer>,
}

impl TunedFrame {
    pub fn dimension(&self) -> usize {
        self.frame.rows()
    }

    /// Gram matrix `T⁻ᵀ T⁻¹` of the tuned inner product in the original basis.
    pub fn gram(&self) -> RealMatrix {
        self.frame_inverse.transpose().mul(&self.frame_inverse)
    }

    /// Worst ratio `‖λ^{A_L}‖ / λ^{t−θ}` over layers and `λ = i/1000`, and
    /// the same on the cores against `λ^t`.
    pub fn contraction_ratios(&self) -> Result<(f64, f64), MetricError> {
        let mut layer_worst: f64 = 0.0;
        let mut core_worst: f64 = 0.0;
        for l in &self.layers {
            let idx: Vec<usize> = l.coordinates().collect();
            let block = self.generator.select(&idx, &idx);
            let cidx: Vec<usize> = l.core_coordinates().collect();
            let core = self.generator.select(&cidx, &cidx);
            for i in 1..=1000 {
                let lambda = i as f64 / 1000.0;
                let s = lambda.ln();
                let n = spectral::expm(&block.scale(&s))?.operator_norm();
                layer_worst = layer_worst.max(n / lambda.powf(l.weight - self.theta));
                if !cidx.is_empty() {
                    let c = spectral::expm(&core.scale(&s))?.operator_norm();
                    core_worst = core_worst.max(c / lambda.powf(l.weight));
                }
            }
        }
        Ok((layer_worst, core_worst))
    }
}

/// Orthonormal bases of the successive quotients `ker Nᵏ ⊖ ker Nᵏ⁻¹`.
fn flag_levels<T>(n: &DMatrix<T>, diagonalizable: bool) -> Vec<DMatrix<T>>
where
    T: nalgebra::ComplexField<RealField = f64> + Copy,
{
    let m = n.nrows();
    if diagonalizable || m == 0 {
        return vec![DMatrix::identity(m, m)];
    }
    let scale = n.norm().max(1.0);
    let mut levels = Vec::new();
    let mut previous: DMatrix<T> = DMatrix::zeros(m, 0);
    let mut power: DMatrix<T> = DMatrix::identity(m, m);
    for k in 1..=m {
        power = &power * n;
        let kernel = if k == m {
            DMatrix::identity(m, m)
        } else {
            let tol = 1e-7 * scale.powi(k as i32);
            let svd = power.clone().svd(false, true);
            let v_t = svd.v_t.expect("requested");
            let cols: Vec<_> = (0..m)
                .filter(|&i| i >= svd.singular_values.len() || svd.singular_values[i] <= tol)
                .map(|i| v_t.row(i).adjoint())
                .collect();
            if cols.is_empty() {
                DMatrix::zeros(m, 0)
            } else {
                DMatrix::from_columns(&cols)
            }
        };
        let new_dim = kernel.ncols().max(previous.ncols());
        if new_dim > previous.ncols() {
            let projector = DMatrix::<T>::identity(m, m) - &previous * previous.adjoint();
            let fresh = &projector * &kernel;
            let svd = fresh.svd(true, false);
            let u = svd.u.expect("requested");
            let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
            order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
            let take = new_dim - previous.ncols();
            let cols: Vec<_> = order[..take].iter().map(|&i| u.column(i).into_owned()).collect();
            let level = DMatrix::from_columns(&cols);
            previous = DMatrix::from_columns(
                &previous.column_iter().map(|c| c.into_owned()).chain(cols.iter().cloned()).collect::<Vec<_>>(),
            );
            levels.push(level);
        }
        if previous.ncols() == m {
            break;
        }
    }
    levels
}

/// Level vectors of one cluster as real frame vectors (unscaled).
fn cluster_levels(a: &RealMatrix, cluster: &Cluster) -> Vec<Vec<Vec<f64>>> {
    let n = a.rows();
    let m = cluster.multiplicity;
    let b = DMatrix::from_fn(n, m, |i, j| cluster.basis[j][i]);
    let ac = DMatrix::from_fn(n, n, |i, j| Complex64::new(a[(i, j)], 0.0));
    let mut local = b.adjoint() * ac * &b;
    for i in 0..m {
        local[(i, i)] -= cluster.eigenvalue;
    }
    let complex_levels: Vec<DMatrix<Complex64>> = if cluster.is_real() {
        let real = local.map(|z| z.re);
        flag_levels(&real, cluster.diagonalizable).into_iter().map(|l| l.map(|x| Complex64::new(x, 0.0))).collect()
    } else {
        flag_levels(&local, cluster.diagonalizable)
    };
    complex_levels
        .iter()
        .map(|w| {
            let v = &b * w;
            let vectors: Vec<Vec<Complex64>> = (0..v.ncols()).map(|j| (0..n).map(|i| v[(i, j)]).collect()).collect();
            real_basis(&vectors, cluster.is_real())
        })
        .collect()
}

fn assemble(flags: &[(f64, Vec<Vec<Vec<Vec<f64>>>>)], n: usize, epsilon: f64) -> (RealMatrix, Vec<FrameLayer>) {
    let mut cols = Vec::with_capacity(n);
    let mut layers = Vec::new();
    for (weight, clusters) in flags {
        let start = cols.len();
        let depth = clusters.iter().map(|c| c.len()).max().unwrap_or(0);
        let mut core = 0;
        for level in 0..depth {
            let factor = epsilon.powi(level as i32);
            for c in clusters {
                if let Some(vs) = c.get(level) {
                    for v in vs {
                        cols.push(v.iter().map(|x| x * factor).collect::<Vec<f64>>());
                        if level == 0 {
                            core += 1;
                        }
                    }
                }
            }
        }
        layers.push(FrameLayer { weight: *weight, start, dimension: cols.len() - start, core });
    }
    (Matrix::from_columns(&cols, n), layers)
}

/// Tuned frame for `A` with slack `θ`, halving `ε` from `epsilon_start`
/// until every layer satisfies `‖λ^{A_L}‖ ≤ λ^{t−θ}` and every core
/// `‖λ^{A_core}‖ ≤ λ^t` on the grid `λ = i/1000`.
pub fn tuned_frame(
    grading: &Grading,
    a: &RealMatrix,
    theta: f64,
    epsilon_start: f64,
) -> Result<TunedFrame, MetricError> {
    let n = a.rows();
    let spec = &grading.spectral;
    let flags: Vec<(f64, Vec<Vec<Vec<Vec<f64>>>>)> = grading
        .layers
        .iter()
        .map(|l| {
            let clusters = l
                .clusters
                .iter()
                .map(|&c| &spec.clusters[c])
                .filter(|c| c.eigenvalue.im >= 0.0)
                .map(|c| cluster_levels(a, c))
                .collect();
            (l.weight, clusters)
        })
        .collect();
    let mut epsilon = epsilon_start;
    let mut last = (0.0, 0.0);
    for _ in 0..60 {
        let (frame, layers) = assemble(&flags, n, epsilon);
        let frame_inverse = frame.inverse().ok_or(MetricError::Tuning { weight: f64::NAN, ratio: f64::INFINITY })?;
        let generator = frame_inverse.mul(a).mul(&frame);
        let tuned = TunedFrame { epsilon, theta, frame, frame_inverse, generator, layers };
        let (layer_ratio, core_ratio) = tuned.contraction_ratios()?;
        if layer_ratio <= 1.0 + 1e-12 && core_ratio <= 1.0 + 1e-9 {
            return Ok(tuned);
        }
        last = (layer_ratio, core_ratio);
        epsilon *= 0.5;
    }
    let weight = grading.layers.last().map_or(f64::NAN, |l| l.weight);
    Err(MetricError::Tuning { weight, ratio: last.0.max(last.1) })
}
