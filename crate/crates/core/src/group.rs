//! Simply connected nilpotent groups in exponential coordinates.
//!
//! An element is its logarithm in the Lie algebra. The product is the
//! Baker-Campbell-Hausdorff series, which terminates at the nilpotency step.
//! Its homogeneous components follow the Varadarajan recursion
//!
//! ```text
//! Z_1 = X + Y
//! (n+1) Z_{n+1} = ½[X − Y, Z_n] + Σ_{p≥1} B_{2p}/(2p)! Σ_{k_1+…+k_{2p}=n} [Z_{k_1},[…,[Z_{k_{2p}}, X + Y]…]]
//! ```

use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::algebra::{CheckFailure, LieAlgebra};
use crate::matrix::{add_vec, sub_vec, Matrix, RealMatrix};
use crate::scalar::{ratio, Scalar};
use crate::spectral::{self, DilationFlow, SpectralError, SpectralTolerance};

/// Largest nilpotency step handled by the product.
pub const MAX_STEP: usize = 6;

/// Exponential coordinates of a group element.
pub type GroupElement<T> = Vec<T>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GroupError {
    #[error("algebra is not nilpotent")]
    NotNilpotent,
    #[error("nilpotency step {0} exceeds the supported maximum {MAX_STEP}")]
    StepTooLarge(usize),
    #[error("dilation generator is not a derivation: {0}")]
    NotDerivation(CheckFailure),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct NilpotentGroup {
    algebra: LieAlgebra,
    step: usize,
}

impl NilpotentGroup {
    pub fn new(algebra: LieAlgebra) -> Result<Self, GroupError> {
        let step = algebra.nilpotency_step().ok_or(GroupError::NotNilpotent)?;
        if step > MAX_STEP {
            return Err(GroupError::StepTooLarge(step));
        }
        Ok(Self { algebra, step })
    }

    pub fn algebra(&self) -> &LieAlgebra {
        &self.algebra
    }

    pub fn dimension(&self) -> usize {
        self.algebra.dimension()
    }

    pub fn step(&self) -> usize {
        self.step
    }

    pub fn identity<T: Scalar>(&self) -> GroupElement<T> {
        vec![T::zero(); self.dimension()]
    }

    pub fn inverse<T: Scalar>(&self, x: &[T]) -> GroupElement<T> {
        x.iter().map(|v| -v.clone()).collect()
    }

    /// `log(exp(x)·exp(y))`.
    pub fn product<T: Scalar>(&self, x: &[T], y: &[T]) -> GroupElement<T> {
        let g = &self.algebra;
        if self.step <= 1 {
            return add_vec(x, y);
        }
        let half = T::from_rational(&ratio(1, 2));
        let diff = sub_vec(x, y);
        let bernoulli = [ratio(1, 12), ratio(-1, 720), ratio(1, 30240)].map(|b| T::from_rational(&b));

        // z[n] is the degree-(n) part; s[q][r] sums q nested ad_{Z_k} over compositions of r.
        let depth = self.step;
        let mut z: Vec<Vec<T>> = vec![Vec::new(); depth + 1];
        z[1] = add_vec(x, y);
        let zero = vec![T::zero(); self.dimension()];
        let mut s: Vec<Vec<Vec<T>>> = vec![vec![zero.clone(); depth + 1]; depth + 1];
        s[0][0] = z[1].clone();
        for n in 1..depth {
            // s[q][n] only involves Z_1..Z_n
            for q in 1..=n {
                let mut acc = zero.clone();
                for k in 1..=(n + 1 - q) {
                    if n < k {
                        break;
                    }
                    let inner = &s[q - 1][n - k];
                    acc = add_vec(&acc, &g.bracket(&z[k], inner));
                }
                s[q][n] = acc;
            }
            let mut next: Vec<T> = g.bracket(&diff, &z[n]).into_iter().map(|v| v * half.clone()).collect();
            for (p, b) in bernoulli.iter().enumerate() {
                let q = 2 * (p + 1);
                if q > n {
                    break;
                }
                next = add_vec(&next, &s[q][n].iter().map(|v| v.clone() * b.clone()).collect::<Vec<_>>());
            }
            let inv = T::one() / T::from_i64(n as i64 + 1);
            z[n + 1] = next.into_iter().map(|v| v * inv.clone()).collect();
        }
        z.into_iter().skip(1).fold(zero, |acc, v| add_vec(&acc, &v))
    }

    /// `x⁻¹·y`.
    pub fn difference<T: Scalar>(&self, x: &[T], y: &[T]) -> GroupElement<T> {
        self.product(&self.inverse(x), y)
    }

    /// `exp(t·A)` for a nilpotent derivation `A` and rational `t`, exactly.
    pub fn unipotent_action<T: Scalar>(&self, a: &Matrix<T>, t: &T, x: &[T]) -> Result<GroupElement<T>, GroupError> {
        self.algebra.check_derivation(a, 1e-12).map_err(GroupError::NotDerivation)?;
        let flow = spectral::exp_nilpotent(&a.scale(t), 1e-12)?;
        Ok(flow.mul_vec(x))
    }
}

/// The dilations `δ_λ = λ^A` generated by a verified derivation.
#[derive(Debug, Clone)]
pub struct Dilation {
    generator: RealMatrix,
    flow: DilationFlow,
}

impl Dilation {
    pub fn new(group: &NilpotentGroup, a: &RealMatrix) -> Result<Self, GroupError> {
        group.algebra().check_derivation(a, 1e-9).map_err(GroupError::NotDerivation)?;
        let flow = DilationFlow::new(a, SpectralTolerance::default())?;
        Ok(Self { generator: a.clone(), flow })
    }

    pub fn generator(&self) -> &RealMatrix {
        &self.generator
    }

    pub fn flow(&self) -> &DilationFlow {
        &self.flow
    }

    pub fn apply(&self, lambda: f64, x: &[f64]) -> GroupElement<f64> {
        self.flow.dilate(lambda, x)
    }

    pub fn matrix(&self, lambda: f64) -> Result<RealMatrix, SpectralError> {
        spectral::lambda_pow(&self.generator, lambda)
    }
}

/// `λ^A x` after checking that `A` is a derivation.
pub fn dilate(group: &NilpotentGroup, a: &RealMatrix, lambda: f64, x: &[f64]) -> Result<GroupElement<f64>, GroupError> {
    group.algebra().check_derivation(a, 1e-9).map_err(GroupError::NotDerivation)?;
    Ok(spectral::lambda_pow(a, lambda)?.mul_vec(x))
}
