use alloc::boxed::Box as Boxed;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::matrix::{norm2, RealMatrix};

/// A compact, symmetric unit ball in exponential coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum HomogeneousBall {
    /// `{x : xᵀ G x ≤ 1}`.
    Norm {
        gram: RealMatrix,
    },
    /// `{x : |x_i| ≤ w_i}`.
    Box {
        widths: Vec<f64>,
    },
    Layered(LayeredBall),
}

/// `{x : ‖P_c x‖ ≤ C, P x ∈ B'}` where `x ↦ (P_c x, P x)` is invertible.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayeredBall {
    pub cap_projection: RealMatrix,
    pub cap: f64,
    pub projection: RealMatrix,
    pub complement: Boxed<HomogeneousBall>,
    /// Inverse of the stacked map `[P_c; P]`.
    pub lift: RealMatrix,
}

impl LayeredBall {
    pub fn new(
        cap_projection: RealMatrix,
        cap: f64,
        projection: RealMatrix,
        complement: HomogeneousBall,
    ) -> Option<Self> {
        let n = cap_projection.cols();
        let k = cap_projection.rows();
        let stacked =
            RealMatrix::from_fn(n, n, |i, j| if i < k { cap_projection[(i, j)] } else { projection[(i - k, j)] });
        let lift = stacked.inverse()?;
        Some(Self { cap_projection, cap, projection, complement: Boxed::new(complement), lift })
    }
}

impl HomogeneousBall {
    pub fn euclidean(n: usize) -> Self {
        HomogeneousBall::Norm { gram: RealMatrix::identity(n) }
    }

    /// The sup-norm ball `[−1, 1]ⁿ`.
    pub fn unit_box(n: usize) -> Self {
        HomogeneousBall::Box { widths: alloc::vec![1.0; n] }
    }

    pub fn dimension(&self) -> usize {
        match self {
            HomogeneousBall::Norm { gram } => gram.rows(),
            HomogeneousBall::Box { widths } => widths.len(),
            HomogeneousBall::Layered(l) => l.lift.rows(),
        }
    }

    /// Signed membership defect: `≤ 0` exactly on the ball, and continuous.
    pub fn excess(&self, x: &[f64]) -> f64 {
        match self {
            HomogeneousBall::Norm { gram } => {
                let gx = gram.mul_vec(x);
                let q: f64 = x.iter().zip(&gx).map(|(a, b)| a * b).sum();
                q.max(0.0).sqrt() - 1.0
            }
            HomogeneousBall::Box { widths } => x.iter().zip(widths).map(|(v, w)| v.abs() / w).fold(0.0, f64::max) - 1.0,
            HomogeneousBall::Layered(l) => {
                let cap = norm2(&l.cap_projection.mul_vec(x)) / l.cap - 1.0;
                cap.max(l.complement.excess(&l.projection.mul_vec(x)))
            }
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.excess(x) <= 0.0
    }

    /// Half-widths of an axis-aligned box containing the ball.
    pub fn bounding_box(&self) -> Vec<f64> {
        match self {
            HomogeneousBall::Norm { gram } => {
                let inv = gram.inverse().expect("gram matrix is positive definite");
                (0..gram.rows()).map(|i| inv[(i, i)].max(0.0).sqrt()).collect()
            }
            HomogeneousBall::Box { widths } => widths.clone(),
            HomogeneousBall::Layered(l) => {
                let k = l.cap_projection.rows();
                let inner = l.complement.bounding_box();
                (0..l.lift.rows())
                    .map(|i| {
                        let row = l.lift.row(i);
                        let cap_part = norm2(&row[..k]) * l.cap;
                        let rest: f64 = row[k..].iter().zip(&inner).map(|(a, b)| a.abs() * b).sum();
                        cap_part + rest
                    })
                    .collect()
            }
        }
    }

    /// The ball `{x : M x ∈ B}` for an invertible `M`.
    pub fn pull_back(&self, m: &RealMatrix) -> Option<Self> {
        let m_inv = m.inverse()?;
        Some(match self {
            HomogeneousBall::Norm { gram } => HomogeneousBall::Norm { gram: m.transpose().mul(gram).mul(m) },
            HomogeneousBall::Box { .. } => return None,
            HomogeneousBall::Layered(l) => HomogeneousBall::Layered(LayeredBall {
                cap_projection: l.cap_projection.mul(m),
                cap: l.cap,
                projection: l.projection.mul(m),
                complement: l.complement.clone(),
                lift: m_inv.mul(&l.lift),
            }),
        })
    }

    /// The same ball with every cap constant multiplied by `factor`.
    pub fn scale_caps(&self, factor: f64) -> Self {
        match self {
            HomogeneousBall::Layered(l) => {
                let mut l = l.clone();
                l.cap *= factor;
                l.complement = Boxed::new(l.complement.scale_caps(factor));
                HomogeneousBall::Layered(l)
            }
            other => other.clone(),
        }
    }

    /// Number of nested cap levels.
    pub fn depth(&self) -> usize {
        match self {
            HomogeneousBall::Layered(l) => 1 + l.complement.depth(),
            _ => 0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::Matrix;

    fn heisenberg_ball() -> HomogeneousBall {
        let cap = Matrix::from_row_slice(1, 3, &[0.0, 0.0, 1.0]);
        let proj = Matrix::from_row_slice(2, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        HomogeneousBall::Layered(LayeredBall::new(cap, 0.25, proj, HomogeneousBall::euclidean(2)).unwrap())
    }

    #[test]
    fn layered_membership() {
        let b = heisenberg_ball();
        assert!(b.contains(&[0.6, 0.8, 0.25]));
        assert!(!b.contains(&[0.6, 0.8, 0.26]));
        assert!(!b.contains(&[0.7, 0.8, 0.0]));
        assert_eq!(b.bounding_box(), alloc::vec![1.0, 1.0, 0.25]);
    }

    #[test]
    fn pull_back_moves_membership() {
        let b = heisenberg_ball();
        let m = Matrix::diagonal(&[2.0, 2.0, 4.0]);
        let p = b.pull_back(&m).unwrap();
        assert!(p.contains(&[0.3, 0.4, 0.0625]));
        assert!(!p.contains(&[0.3, 0.4, 0.07]));
        let bb = p.bounding_box();
        assert!((bb[2] - 0.0625).abs() < 1e-15);
    }

    #[test]
    fn serde_round_trip() {
        let b = heisenberg_ball();
        let json = serde_json::to_string(&b).unwrap();
        let back: HomogeneousBall = serde_json::from_str(&json).unwrap();
        assert_eq!(b, back);
    }
}
