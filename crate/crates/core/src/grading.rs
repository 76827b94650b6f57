//! Real gradings induced by derivations and automorphisms, and the
//! existence tests for homogeneous distances.

use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;
use thiserror::Error;

use crate::algebra::{CheckFailure, LieAlgebra};
use crate::matrix::{Matrix, RealMatrix};
use crate::spectral::{self, SpectralData, SpectralError, SpectralTolerance};

/// Weights closer than this are merged into one layer.
pub const WEIGHT_TOLERANCE: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GradingError {
    #[error("not a derivation: {0}")]
    NotDerivation(CheckFailure),
    #[error("not an automorphism: {0}")]
    NotAutomorphism(CheckFailure),
    #[error("scale factor must be positive and different from 1, got {0}")]
    InvalidScale(f64),
    #[error("layers are not closed under the bracket (residual {residual:e})")]
    BracketClosure { residual: f64 },
    #[error("{what} residual {residual:e} exceeds tolerance")]
    Numeric { what: &'static str, residual: f64 },
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

#[derive(Debug, Clone, PartialEq)]
pub enum GradingSource {
    Derivation(RealMatrix),
    Automorphism { phi: RealMatrix, lambda: f64 },
}

/// One layer `V_t`.
#[derive(Debug, Clone)]
pub struct Layer {
    pub weight: f64,
    /// Real basis of `V_t`.
    pub basis: Vec<Vec<f64>>,
    /// Indices of the spectral clusters making up `V_t ⊗ ℂ`.
    pub clusters: Vec<usize>,
}

impl Layer {
    pub fn dimension(&self) -> usize {
        self.basis.len()
    }
}

#[derive(Debug, Clone)]
pub struct Grading {
    pub layers: Vec<Layer>,
    pub source: GradingSource,
    pub spectral: SpectralData,
    /// Largest bracket component leaving `V_{t+s}` over basis pairs.
    pub closure_residual: f64,
    /// Relative residual of `|det φ| = λ^{Σ t·dim V_t}` for automorphism gradings.
    pub determinant_residual: Option<f64>,
}

impl Grading {
    pub fn weights(&self) -> impl Iterator<Item = f64> + '_ {
        self.layers.iter().map(|l| l.weight)
    }

    /// `Q = Σ t·dim V_t`. Only a Hausdorff dimension when every weight is at
    /// least 1; see [`Grading::min_weight`].
    pub fn hausdorff_dimension(&self) -> f64 {
        self.layers.iter().map(|l| l.weight * l.dimension() as f64).sum()
    }

    pub fn min_weight(&self) -> Option<f64> {
        self.layers.first().map(|l| l.weight)
    }

    pub fn layer(&self, weight: f64) -> Option<&Layer> {
        self.layers.iter().find(|l| (l.weight - weight).abs() <= WEIGHT_TOLERANCE * weight.abs().max(1.0))
    }

    /// Columns are the layer bases in increasing weight.
    pub fn adapted_basis(&self) -> RealMatrix {
        let cols: Vec<Vec<f64>> = self.layers.iter().flat_map(|l| l.basis.iter().cloned()).collect();
        let n = self.spectral.dimension;
        Matrix::from_columns(&cols, n)
    }
}

/// Real basis of `(E_α ⊕ E_ᾱ) ∩ ℝⁿ` from the basis of `E_α`.
pub fn real_basis(basis: &[Vec<Complex64>], real_cluster: bool) -> Vec<Vec<f64>> {
    let sqrt2 = core::f64::consts::SQRT_2;
    let mut out = Vec::new();
    for w in basis {
        if real_cluster {
            out.push(w.iter().map(|z| z.re).collect());
        } else {
            out.push(w.iter().map(|z| sqrt2 * z.re).collect());
            out.push(w.iter().map(|z| sqrt2 * z.im).collect());
        }
    }
    out
}

fn group_weights(weights: &[f64]) -> Vec<(f64, Vec<usize>)> {
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| weights[a].total_cmp(&weights[b]));
    let mut groups: Vec<(f64, Vec<usize>)> = Vec::new();
    let mut last = f64::NEG_INFINITY;
    for i in order {
        let w = weights[i];
        match groups.last_mut() {
            Some((_, g)) if w - last <= WEIGHT_TOLERANCE * w.abs().max(1.0) => g.push(i),
            _ => groups.push((0.0, alloc::vec![i])),
        }
        last = w;
    }
    for (mean, g) in &mut groups {
        *mean = snap_weight(g.iter().map(|&i| weights[i]).sum::<f64>() / g.len() as f64);
    }
    groups
}

/// Replaces `w` by `p/q` with `q ≤ 12` when they agree to `10⁻⁹` relative.
fn snap_weight(w: f64) -> f64 {
    for q in 1..=12 {
        let p = (w * q as f64).round();
        let r = p / q as f64;
        if (w - r).abs() <= 1e-9 * w.abs().max(1.0) {
            return r;
        }
    }
    w
}

fn assemble(
    g: &LieAlgebra,
    spec: SpectralData,
    weight_of: impl Fn(Complex64) -> f64,
    source: GradingSource,
) -> Result<Grading, GradingError> {
    // only upper half-plane representatives; conjugates come along
    let reps: Vec<usize> = (0..spec.clusters.len()).filter(|&i| spec.clusters[i].eigenvalue.im >= 0.0).collect();
    let weights: Vec<f64> = reps.iter().map(|&i| weight_of(spec.clusters[i].eigenvalue)).collect();
    let mut layers = Vec::new();
    for (weight, members) in group_weights(&weights) {
        let mut basis = Vec::new();
        let mut clusters = Vec::new();
        for m in members {
            let c = &spec.clusters[reps[m]];
            basis.extend(real_basis(&c.basis, c.is_real()));
            clusters.push(reps[m]);
            if !c.is_real() {
                clusters.push(c.conjugate);
            }
        }
        layers.push(Layer { weight, basis, clusters });
    }
    let mut grading = Grading { layers, source, spectral: spec, closure_residual: 0.0, determinant_residual: None };
    grading.closure_residual = closure_residual(g, &grading)?;
    if grading.closure_residual > 1e-8 {
        return Err(GradingError::BracketClosure { residual: grading.closure_residual });
    }
    Ok(grading)
}

/// Largest component of `[V_t, V_s]` outside `V_{t+s}`, relative to the
/// size of the bracket.
fn closure_residual(g: &LieAlgebra, grading: &Grading) -> Result<f64, GradingError> {
    let t = grading.adapted_basis();
    let t_inv = t.inverse().ok_or(GradingError::Numeric { what: "layer independence", residual: f64::INFINITY })?;
    let mut offsets = Vec::new();
    let mut start = 0;
    for l in &grading.layers {
        offsets.push(start);
        start += l.dimension();
    }
    let mut worst: f64 = 0.0;
    for (a, la) in grading.layers.iter().enumerate() {
        for lb in grading.layers.iter().skip(a) {
            let target = grading.layers.iter().position(|l| {
                (l.weight - la.weight - lb.weight).abs() <= WEIGHT_TOLERANCE * (la.weight + lb.weight).abs().max(1.0)
            });
            for u in &la.basis {
                for v in &lb.basis {
                    let w = g.bracket_f64(u, v);
                    let coords = t_inv.mul_vec(&w);
                    let scale = crate::matrix::norm2(u) * crate::matrix::norm2(v) * g_scale(g);
                    for (k, c) in coords.iter().enumerate() {
                        let layer = offsets.iter().rposition(|&o| o <= k).unwrap_or(0);
                        if Some(layer) != target {
                            worst = worst.max(c.abs() / scale.max(f64::MIN_POSITIVE));
                        }
                    }
                }
            }
        }
    }
    Ok(worst)
}

fn g_scale(g: &LieAlgebra) -> f64 {
    g.structure_constants().map(|(_, _, _, c)| crate::scalar::Scalar::magnitude(c)).fold(1.0, f64::max)
}

/// `V_t(A) = g ∩ ⊕_s E^A_{t+is}`.
pub fn grading_from_derivation(g: &LieAlgebra, a: &RealMatrix) -> Result<Grading, GradingError> {
    grading_from_derivation_with(g, a, SpectralTolerance::default())
}

pub fn grading_from_derivation_with(
    g: &LieAlgebra,
    a: &RealMatrix,
    tol: SpectralTolerance,
) -> Result<Grading, GradingError> {
    g.check_derivation(a, 1e-9).map_err(GradingError::NotDerivation)?;
    let spec = spectral::generalized_eigenspaces(a, tol)?;
    assemble(g, spec, |z| z.re, GradingSource::Derivation(a.clone()))
}

/// `V_t = g ∩ ⊕_{|α| = λ^t} E^φ_α`, together with the determinant identity.
pub fn grading_from_automorphism(g: &LieAlgebra, phi: &RealMatrix, lambda: f64) -> Result<Grading, GradingError> {
    grading_from_automorphism_with(g, phi, lambda, SpectralTolerance::default())
}

pub fn grading_from_automorphism_with(
    g: &LieAlgebra,
    phi: &RealMatrix,
    lambda: f64,
    tol: SpectralTolerance,
) -> Result<Grading, GradingError> {
    if !(lambda > 0.0) || lambda == 1.0 {
        return Err(GradingError::InvalidScale(lambda));
    }
    g.check_automorphism(phi, 1e-9).map_err(GradingError::NotAutomorphism)?;
    let spec = spectral::generalized_eigenspaces(phi, tol)?;
    let log_lambda = lambda.ln();
    let mut grading =
        assemble(g, spec, |z| z.norm().ln() / log_lambda, GradingSource::Automorphism { phi: phi.clone(), lambda })?;
    let det = phi.determinant().abs();
    let predicted = lambda.powf(grading.hausdorff_dimension());
    grading.determinant_residual = Some((det - predicted).abs() / det);
    Ok(grading)
}

/// Why no homogeneous distance exists.
#[derive(Debug, Clone, PartialEq)]
pub enum Reason {
    NotNilpotent,
    /// `V_t ≠ {0}` for some `t < 1`.
    WeightBelowOne {
        weight: f64,
        dimension: usize,
    },
    /// The generator is not diagonalizable on this eigenvalue of the
    /// weight-1 layer.
    NotDiagonalizable {
        eigenvalue: Complex64,
    },
}

impl fmt::Display for Reason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Reason::NotNilpotent => write!(f, "algebra not nilpotent"),
            Reason::WeightBelowOne { weight, dimension } => {
                write!(f, "V_t != {{0}} for t = {weight} < 1 (dim {dimension})")
            }
            Reason::NotDiagonalizable { eigenvalue } => {
                write!(f, "not diagonalizable on V_1 (eigenvalue {}{:+}i)", eigenvalue.re, eigenvalue.im)
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExistenceVerdict {
    pub answer: bool,
    pub reasons: Vec<Reason>,
    pub grading: Grading,
}

fn verdict(g: &LieAlgebra, grading: Grading) -> ExistenceVerdict {
    let mut reasons = Vec::new();
    if !g.is_nilpotent() {
        reasons.push(Reason::NotNilpotent);
    }
    for l in &grading.layers {
        if l.weight < 1.0 - WEIGHT_TOLERANCE {
            reasons.push(Reason::WeightBelowOne { weight: l.weight, dimension: l.dimension() });
        }
    }
    if let Some(first) = grading.layer(1.0) {
        for &c in &first.clusters {
            let cluster = &grading.spectral.clusters[c];
            if !cluster.diagonalizable && cluster.eigenvalue.im >= 0.0 {
                reasons.push(Reason::NotDiagonalizable { eigenvalue: cluster.eigenvalue });
            }
        }
    }
    ExistenceVerdict { answer: reasons.is_empty(), reasons, grading }
}

/// Whether an `A`-homogeneous distance exists on the simply connected group.
pub fn classify_derivation(g: &LieAlgebra, a: &RealMatrix) -> Result<ExistenceVerdict, GradingError> {
    Ok(verdict(g, grading_from_derivation(g, a)?))
}

/// Whether a distance exists for which `δ` is a dilation of factor `λ`.
pub fn classify_automorphism(
    g: &LieAlgebra,
    delta: &RealMatrix,
    lambda: f64,
) -> Result<ExistenceVerdict, GradingError> {
    Ok(verdict(g, grading_from_automorphism(g, delta, lambda)?))
}

/// Semisimple real part, imaginary part and nilpotent part of a derivation.
#[derive(Debug, Clone)]
pub struct DerivationSplit {
    pub real: RealMatrix,
    pub imaginary: RealMatrix,
    pub nilpotent: RealMatrix,
}

pub fn split_derivation(g: &LieAlgebra, a: &RealMatrix, spec: &SpectralData) -> Result<DerivationSplit, GradingError> {
    g.check_derivation(a, 1e-9).map_err(GradingError::NotDerivation)?;
    let real = spectral::spectral_map(a, spec, |z| Complex64::new(z.re, 0.0))?;
    let imaginary = spectral::spectral_map(a, spec, |z| Complex64::new(0.0, z.im))?;
    let nilpotent = a.sub(&real).sub(&imaginary);
    let scale = a.frobenius_norm().max(1.0);
    for (what, m) in [("A_R", &real), ("A_I", &imaginary), ("A_N", &nilpotent)] {
        g.check_derivation(m, 1e-8).map_err(|_| GradingError::Numeric { what, residual: f64::NAN })?;
    }
    let parts = [a, &real, &imaginary, &nilpotent];
    for i in 0..parts.len() {
        for j in i + 1..parts.len() {
            let residual = parts[i].commutator(parts[j]).frobenius_norm();
            if residual > 1e-9 * scale * scale {
                return Err(GradingError::Numeric { what: "commutator", residual });
            }
        }
    }
    Ok(DerivationSplit { real, imaginary, nilpotent })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::examples::*;
    use alloc::vec;
    use alloc::vec::Vec;
    use proptest::prelude::*;

    fn m2(a: f64, b: f64, c: f64, d: f64) -> RealMatrix {
        Matrix::from_row_slice(2, 2, &[a, b, c, d])
    }

    fn dims(gr: &Grading) -> Vec<(f64, usize)> {
        gr.layers.iter().map(|l| (l.weight, l.dimension())).collect()
    }

    fn span_gap(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
        let c = |v: &[Vec<f64>]| -> Vec<Vec<Complex64>> {
            v.iter().map(|x| x.iter().map(|&r| Complex64::new(r, 0.0)).collect()).collect()
        };
        spectral::subspace_gap(&c(a), &c(b))
    }

    #[test]
    fn weights_snap_to_small_rationals() {
        assert_eq!(snap_weight(0.999999999999999), 1.0);
        assert_eq!(snap_weight(1.5 + 1e-12), 1.5);
        assert_eq!(snap_weight(7.0 / 12.0 + 1e-13), 7.0 / 12.0);
        assert_eq!(snap_weight(core::f64::consts::SQRT_2), core::f64::consts::SQRT_2);
        let phi = lambda_pow_engel();
        let gr = grading_from_automorphism(&engel(), &phi, 0.5).unwrap();
        assert_eq!(gr.hausdorff_dimension(), 7.0);
    }

    fn lambda_pow_engel() -> RealMatrix {
        spectral::lambda_pow(&Matrix::diagonal(&[1.0, 1.0, 2.0, 3.0]), 0.5).unwrap()
    }

    #[test]
    fn derivation_gradings() {
        let r2 = LieAlgebra::abelian(2);
        let gr = grading_from_derivation(&r2, &m2(2.0, -1.0, 1.0, 2.0)).unwrap();
        assert_eq!(gr.layers.len(), 1);
        assert!((gr.layers[0].weight - 2.0).abs() < 1e-12);
        assert_eq!(gr.layers[0].dimension(), 2);

        let h = heisenberg();
        let gr = grading_from_derivation(&h, &Matrix::diagonal(&[1.0, 1.0, 2.0])).unwrap();
        assert_eq!(dims(&gr), vec![(1.0, 2), (2.0, 1)]);
        assert!(span_gap(&gr.layers[1].basis, &[vec![0.0, 0.0, 1.0]]) < 1e-12);

        let gr = grading_from_derivation(&r2, &m2(1.5, 1.0, 0.0, 1.5)).unwrap();
        assert_eq!(dims(&gr), vec![(1.5, 2)]);
    }

    #[test]
    fn automorphism_gradings() {
        let r2 = LieAlgebra::abelian(2);
        let gr = grading_from_automorphism(&r2, &Matrix::diagonal(&[2.0, 4.0]), 2.0).unwrap();
        assert_eq!(dims(&gr), vec![(1.0, 1), (2.0, 1)]);
        assert!(gr.determinant_residual.unwrap() < 1e-14);

        let theta: f64 = 0.7;
        let rot = m2(2.0 * theta.cos(), -2.0 * theta.sin(), 2.0 * theta.sin(), 2.0 * theta.cos());
        let gr = grading_from_automorphism(&r2, &rot, 2.0).unwrap();
        assert_eq!(gr.layers.len(), 1);
        assert!((gr.layers[0].weight - 1.0).abs() < 1e-12);

        let gr = grading_from_automorphism(&heisenberg(), &Matrix::diagonal(&[2.0, 2.0, 4.0]), 2.0).unwrap();
        assert_eq!(dims(&gr), vec![(1.0, 2), (2.0, 1)]);
        assert_eq!(gr.hausdorff_dimension(), 4.0);
        assert!(gr.determinant_residual.unwrap() < 1e-14);

        assert_eq!(
            grading_from_automorphism(&r2, &RealMatrix::identity(2), 1.0).unwrap_err(),
            GradingError::InvalidScale(1.0)
        );
    }

    #[test]
    fn hausdorff_dimensions() {
        let h = grading_from_derivation(&heisenberg(), &Matrix::diagonal(&[1.0, 1.0, 2.0])).unwrap();
        assert_eq!(h.hausdorff_dimension(), 4.0);
        let e = grading_from_derivation(&engel(), &Matrix::diagonal(&[1.0, 1.0, 2.0, 3.0])).unwrap();
        assert_eq!(e.hausdorff_dimension(), 7.0);
        for n in 1..6 {
            let a = grading_from_derivation(&LieAlgebra::abelian(n), &RealMatrix::identity(n)).unwrap();
            assert_eq!(a.hausdorff_dimension(), n as f64);
        }
    }

    #[test]
    fn derivation_classifier() {
        let r2 = LieAlgebra::abelian(2);
        let v = classify_derivation(&r2, &m2(1.0, 1.0, 0.0, 1.0)).unwrap();
        assert!(!v.answer);
        assert!(matches!(v.reasons[..], [Reason::NotDiagonalizable { .. }]));

        assert!(classify_derivation(&heisenberg(), &Matrix::diagonal(&[1.0, 1.0, 2.0])).unwrap().answer);

        let v = classify_derivation(&rototranslation(), &Matrix::diagonal(&[1.0, 1.0, 0.0])).unwrap();
        assert!(!v.answer);
        assert!(v.reasons.contains(&Reason::NotNilpotent));
        assert!(v.reasons.contains(&Reason::WeightBelowOne { weight: 0.0, dimension: 1 }));
    }

    #[test]
    fn automorphism_classifier() {
        let r2 = LieAlgebra::abelian(2);
        let half: f64 = 0.5;
        let shear = m2(half, half * half.ln(), 0.0, half);
        let v = classify_automorphism(&r2, &shear, half).unwrap();
        assert!(!v.answer);
        assert!(matches!(v.reasons[..], [Reason::NotDiagonalizable { .. }]));

        let d = Matrix::diagonal(&[half.powf(1.5), half * half]);
        assert!(classify_automorphism(&r2, &d, half).unwrap().answer);

        let c = core::f64::consts::FRAC_PI_4.cos();
        let rot = m2(2.0 * c, -2.0 * c, 2.0 * c, 2.0 * c);
        assert!(classify_automorphism(&r2, &rot, 2.0).unwrap().answer);

        let contracting = Matrix::diagonal(&[0.25, 0.25]);
        let v = classify_automorphism(&r2, &contracting, 2.0).unwrap();
        assert!(!v.answer);
    }

    #[test]
    fn split_examples() {
        let r2 = LieAlgebra::abelian(2);
        let a = m2(2.0, -1.0, 1.0, 2.0);
        let spec = spectral::generalized_eigenspaces(&a, SpectralTolerance::default()).unwrap();
        let s = split_derivation(&r2, &a, &spec).unwrap();
        assert!(s.real.distance_to(&RealMatrix::identity(2).scale(&2.0)) < 1e-12);
        assert!(s.imaginary.distance_to(&m2(0.0, -1.0, 1.0, 0.0)) < 1e-12);
        assert!(s.nilpotent.frobenius_norm() < 1e-12);

        let a = Matrix::diagonal(&[1.0, 3.0]);
        let spec = spectral::generalized_eigenspaces(&a, SpectralTolerance::default()).unwrap();
        let s = split_derivation(&r2, &a, &spec).unwrap();
        assert!(s.real.distance_to(&a) < 1e-14);
        assert!(s.imaginary.frobenius_norm() < 1e-14 && s.nilpotent.frobenius_norm() < 1e-14);

        let a = m2(1.5, 1.0, 0.0, 1.5);
        let spec = spectral::generalized_eigenspaces(&a, SpectralTolerance::default()).unwrap();
        let s = split_derivation(&r2, &a, &spec).unwrap();
        assert!(s.real.distance_to(&RealMatrix::identity(2).scale(&1.5)) < 1e-10);
        assert!(s.imaginary.frobenius_norm() < 1e-10);
        assert!(s.nilpotent.distance_to(&m2(0.0, 1.0, 0.0, 0.0)) < 1e-10);
    }

    /// Derivation of Heisenberg: `[[M, 0], [u, tr M]]`.
    fn heisenberg_derivation(m: [f64; 4], u: [f64; 2]) -> RealMatrix {
        Matrix::from_row_slice(3, 3, &[m[0], m[1], 0.0, m[2], m[3], 0.0, u[0], u[1], m[0] + m[3]])
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn derivation_and_exponential_gradings_agree(
            m in proptest::array::uniform4(-2.0f64..2.0),
            u in proptest::array::uniform2(-2.0f64..2.0),
        ) {
            let h = heisenberg();
            let a = heisenberg_derivation(m, u);
            let by_a = grading_from_derivation(&h, &a);
            let by_exp = grading_from_automorphism(&h, &spectral::expm(&a).unwrap(), core::f64::consts::E);
            {
                let (x, y) = (by_a.unwrap(), by_exp.unwrap());
                prop_assert_eq!(x.layers.len(), y.layers.len());
                for (lx, ly) in x.layers.iter().zip(&y.layers) {
                    prop_assert!((lx.weight - ly.weight).abs() < 1e-7);
                    prop_assert!(span_gap(&lx.basis, &ly.basis) < 1e-7);
                }
                prop_assert!(y.determinant_residual.unwrap() < 1e-10);
            }
        }

        #[test]
        fn brackets_of_eigenvectors_add_eigenvalues(
            m in proptest::array::uniform4(-2.0f64..2.0),
            u in proptest::array::uniform2(-2.0f64..2.0),
        ) {
            let h = heisenberg();
            let a = heisenberg_derivation(m, u);
            let spec = spectral::generalized_eigenspaces(&a, SpectralTolerance::default()).unwrap();
            for ca in &spec.clusters {
                for cb in &spec.clusters {
                    let target = ca.eigenvalue + cb.eigenvalue;
                    for x in &ca.basis {
                        for y in &cb.basis {
                            let w = complex_bracket(&h, x, y);
                            let norm = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                            if norm < 1e-12 {
                                continue;
                            }
                            let residual = match spec.nearest(target) {
                                Some(c) if (c.eigenvalue - target).norm() < 1e-6 => residual_outside(&w, &c.basis),
                                _ => norm,
                            };
                            prop_assert!(residual < 1e-8, "residual {}", residual);
                        }
                    }
                }
            }
        }
    }

    fn complex_bracket(g: &LieAlgebra, x: &[Complex64], y: &[Complex64]) -> Vec<Complex64> {
        let re = |v: &[Complex64]| v.iter().map(|z| z.re).collect::<Vec<_>>();
        let im = |v: &[Complex64]| v.iter().map(|z| z.im).collect::<Vec<_>>();
        let rr = g.bracket_f64(&re(x), &re(y));
        let ii = g.bracket_f64(&im(x), &im(y));
        let ri = g.bracket_f64(&re(x), &im(y));
        let ir = g.bracket_f64(&im(x), &re(y));
        (0..x.len()).map(|k| Complex64::new(rr[k] - ii[k], ri[k] + ir[k])).collect()
    }

    /// Distance from `w` to `span(basis)` (orthonormal basis).
    fn residual_outside(w: &[Complex64], basis: &[Vec<Complex64>]) -> f64 {
        let mut r = w.to_vec();
        for b in basis {
            let coeff: Complex64 = b.iter().zip(w).map(|(x, y)| x.conj() * y).sum();
            for (ri, bi) in r.iter_mut().zip(b) {
                *ri -= coeff * bi;
            }
        }
        r.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}
