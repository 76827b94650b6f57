//! Complex spectral analysis of real matrices.
//!
//! Eigenvalues come from a Schur decomposition after isolating eigenvalues
//! that a symmetric permutation already exposes (triangular-permutable rows
//! and columns are read off exactly). Eigenvalues closer than the cluster
//! tolerance are merged by transitive closure, and each cluster's generalized
//! eigenspace is the kernel of `(M - αI)^m`, `m` the cluster size.
//!
//! No Jordan chains are exposed: callers get generalized eigenspaces and a
//! diagonalizability flag per cluster.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector, Schur};
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;
use thiserror::Error;

use crate::matrix::{Matrix, RealMatrix};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectralError {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("eigenvalue iteration did not converge")]
    NoConvergence,
    #[error("eigenvalue cluster near {eigenvalue} is inconsistent (kernel residual {residual:e}); try a different tolerance")]
    InconsistentCluster { eigenvalue: Complex64, residual: f64 },
    #[error("generalized eigenspaces are not independent (smallest singular value {sigma:e}); eigenvalues were not clustered correctly, try a larger tolerance")]
    DependentEigenspaces { sigma: f64 },
    #[error("function is not conjugation-symmetric at eigenvalue {eigenvalue}")]
    NotConjugateSymmetric { eigenvalue: Complex64 },
    #[error("spectral map has an imaginary residual {residual:e}")]
    ImaginaryResidual { residual: f64 },
    #[error("(N - I)^{power} does not vanish: N is not unipotent")]
    NotUnipotent { power: usize },
    #[error("matrix is not nilpotent: M^{power} does not vanish")]
    NotNilpotent { power: usize },
    #[error("scale factor must be positive, got {0}")]
    NonPositiveScale(f64),
    #[error("matrix exponential overflowed")]
    Overflow,
}

/// Tolerances of the eigen-analysis, both relative to the Frobenius norm of
/// the analysed matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralTolerance {
    /// Eigenvalues closer than `cluster * ‖M‖` share a cluster.
    pub cluster: f64,
    /// Threshold for numerical rank decisions (kernels, diagonalizability).
    pub rank: f64,
}

impl Default for SpectralTolerance {
    fn default() -> Self {
        Self { cluster: 1e-8, rank: 1e-6 }
    }
}

impl SpectralTolerance {
    pub fn with_cluster(cluster: f64) -> Self {
        Self { cluster, ..Self::default() }
    }
}

/// One generalized eigenspace `E_α`.
#[derive(Debug, Clone)]
pub struct Cluster {
    pub eigenvalue: Complex64,
    pub multiplicity: usize,
    /// Orthonormal basis of `E_α` in `ℂⁿ`.
    pub basis: Vec<Vec<Complex64>>,
    pub diagonalizable: bool,
    /// Index of the cluster of the conjugate eigenvalue (itself when real).
    pub conjugate: usize,
}

impl Cluster {
    pub fn is_real(&self) -> bool {
        self.eigenvalue.im == 0.0
    }
}

#[derive(Debug, Clone)]
pub struct SpectralData {
    pub dimension: usize,
    pub clusters: Vec<Cluster>,
    /// Absolute clustering tolerance that was applied.
    pub tolerance: f64,
    /// Absolute rank tolerance that was applied.
    pub rank_tolerance: f64,
}

impl SpectralData {
    /// Concatenated cluster bases as columns.
    pub fn eigenbasis(&self) -> DMatrix<Complex64> {
        let n = self.dimension;
        let mut p = DMatrix::zeros(n, n);
        let mut col = 0;
        for c in &self.clusters {
            for v in &c.basis {
                for i in 0..n {
                    p[(i, col)] = v[i];
                }
                col += 1;
            }
        }
        p
    }

    pub fn eigenvalues(&self) -> impl Iterator<Item = Complex64> + '_ {
        self.clusters.iter().map(|c| c.eigenvalue)
    }

    /// Cluster whose eigenvalue is closest to `z`.
    pub fn nearest(&self, z: Complex64) -> Option<&Cluster> {
        self.clusters.iter().min_by(|a, b| (a.eigenvalue - z).norm().total_cmp(&(b.eigenvalue - z).norm()))
    }

    pub fn is_diagonalizable(&self) -> bool {
        self.clusters.iter().all(|c| c.diagonalizable)
    }
}

fn to_complex(m: &RealMatrix) -> DMatrix<Complex64> {
    DMatrix::from_fn(m.rows(), m.cols(), |i, j| Complex64::new(m[(i, j)], 0.0))
}

/// Eigenvalues with multiplicity.
pub fn eigenvalues(m: &RealMatrix) -> Result<Vec<Complex64>, SpectralError> {
    if !m.is_square() {
        return Err(SpectralError::NotSquare { rows: m.rows(), cols: m.cols() });
    }
    let mut active: Vec<usize> = (0..m.rows()).collect();
    let mut found = Vec::new();
    // Peel off rows/columns whose off-diagonal part (inside the active block) is zero.
    loop {
        let isolated = active
            .iter()
            .position(|&i| active.iter().all(|&j| j == i || m[(i, j)] == 0.0))
            .or_else(|| active.iter().position(|&j| active.iter().all(|&i| i == j || m[(i, j)] == 0.0)));
        match isolated {
            Some(pos) => {
                let i = active.remove(pos);
                found.push(Complex64::new(m[(i, i)], 0.0));
            }
            None => break,
        }
    }
    if !active.is_empty() {
        let core = m.select(&active, &active).to_dmatrix();
        let schur = Schur::try_new(core, f64::EPSILON, 100_000).ok_or(SpectralError::NoConvergence)?;
        found.extend(schur.complex_eigenvalues().iter().copied());
    }
    Ok(found)
}

/// Orthonormal kernel of dimension `dim` from the smallest singular values.
/// Returns the basis, the largest discarded-as-zero singular value and the
/// largest singular value.
fn kernel<T>(p: DMatrix<T>, dim: usize) -> (Vec<DVector<T>>, f64, f64)
where
    T: nalgebra::ComplexField<RealField = f64>,
{
    let n = p.ncols();
    if dim == n {
        let basis = (0..n).map(|k| DVector::from_fn(n, |i, _| if i == k { T::one() } else { T::zero() })).collect();
        return (basis, 0.0, 0.0);
    }
    let svd = p.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let sv = &svd.singular_values;
    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&a, &b| sv[a].total_cmp(&sv[b]));
    let largest = sv.iter().copied().fold(0.0, f64::max);
    let residual = if dim == 0 { 0.0 } else { sv[order[dim - 1]] };
    let basis = order[..dim].iter().map(|&k| v_t.row(k).adjoint()).collect();
    (basis, residual, largest)
}

fn union_find_clusters(values: &[Complex64], tol: f64) -> Vec<Vec<usize>> {
    let n = values.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while parent[r] != r {
            r = parent[r];
        }
        parent[i] = r;
        r
    }
    for i in 0..n {
        for j in i + 1..n {
            if (values[i] - values[j]).norm() <= tol {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: Vec<(usize, Vec<usize>)> = Vec::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        match groups.iter_mut().find(|(root, _)| *root == r) {
            Some((_, g)) => g.push(i),
            None => groups.push((r, vec![i])),
        }
    }
    groups.into_iter().map(|(_, g)| g).collect()
}

/// Clusters the spectrum of `m` and computes every generalized eigenspace.
pub fn generalized_eigenspaces(m: &RealMatrix, tol: SpectralTolerance) -> Result<SpectralData, SpectralError> {
    let n = m.rows();
    let eig = eigenvalues(m)?;
    let scale = m.frobenius_norm().max(f64::MIN_POSITIVE);
    let ctol = tol.cluster * scale;
    let rtol = tol.rank * scale;

    let groups = union_find_clusters(&eig, ctol);
    let mut raw: Vec<(Complex64, usize)> = groups
        .iter()
        .map(|g| {
            let mean = g.iter().map(|&i| eig[i]).sum::<Complex64>() / g.len() as f64;
            let mean = if mean.im.abs() <= ctol { Complex64::new(mean.re, 0.0) } else { mean };
            (mean, g.len())
        })
        .collect();
    // Deterministic order: by real part, then imaginary part.
    raw.sort_by(|a, b| a.0.re.total_cmp(&b.0.re).then(a.0.im.total_cmp(&b.0.im)));

    let mc = to_complex(m);
    let mut clusters: Vec<Cluster> = Vec::with_capacity(raw.len());
    for (idx, &(alpha, mult)) in raw.iter().enumerate() {
        if alpha.im < 0.0 {
            // filled from its conjugate below
            clusters.push(Cluster {
                eigenvalue: alpha,
                multiplicity: mult,
                basis: Vec::new(),
                diagonalizable: false,
                conjugate: idx,
            });
            continue;
        }
        let (basis, residual, largest) = if alpha.im == 0.0 {
            let shifted = m.to_dmatrix() - DMatrix::identity(n, n) * alpha.re;
            let p = (0..mult).fold(DMatrix::identity(n, n), |acc, _| acc * &shifted);
            let (b, r, l) = kernel(p, mult);
            (
                b.into_iter()
                    .map(|v| v.iter().map(|&x| Complex64::new(x, 0.0)).collect::<Vec<_>>())
                    .collect::<Vec<_>>(),
                r,
                l,
            )
        } else {
            let shifted = &mc - DMatrix::identity(n, n) * alpha;
            let p = (0..mult).fold(DMatrix::identity(n, n), |acc, _| acc * &shifted);
            let (b, r, l) = kernel(p, mult);
            (b.into_iter().map(|v| v.iter().copied().collect::<Vec<_>>()).collect::<Vec<_>>(), r, l)
        };
        if mult < n && residual > tol.rank * largest.max(f64::MIN_POSITIVE) && residual > rtol.powi(mult as i32) {
            return Err(SpectralError::InconsistentCluster { eigenvalue: alpha, residual });
        }
        let b = DMatrix::from_fn(n, mult, |i, j| basis[j][i]);
        let image = (&mc - DMatrix::identity(n, n) * alpha) * &b;
        let diagonalizable = image.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt() <= rtol;
        clusters.push(Cluster { eigenvalue: alpha, multiplicity: mult, basis, diagonalizable, conjugate: idx });
    }

    // Conjugate partners: lower half-plane clusters mirror upper ones exactly.
    for idx in 0..clusters.len() {
        if clusters[idx].eigenvalue.im >= 0.0 {
            continue;
        }
        let target = clusters[idx].eigenvalue.conj();
        let partner = (0..clusters.len())
            .filter(|&j| clusters[j].eigenvalue.im > 0.0)
            .min_by(|&a, &b| {
                (clusters[a].eigenvalue - target).norm().total_cmp(&(clusters[b].eigenvalue - target).norm())
            })
            .ok_or(SpectralError::InconsistentCluster {
                eigenvalue: clusters[idx].eigenvalue,
                residual: f64::INFINITY,
            })?;
        if clusters[partner].multiplicity != clusters[idx].multiplicity
            || (clusters[partner].eigenvalue - target).norm() > 10.0 * ctol.max(f64::EPSILON * scale)
        {
            return Err(SpectralError::InconsistentCluster {
                eigenvalue: clusters[idx].eigenvalue,
                residual: f64::INFINITY,
            });
        }
        let upper = clusters[partner].clone();
        let c = &mut clusters[idx];
        c.eigenvalue = upper.eigenvalue.conj();
        c.basis = upper.basis.iter().map(|v| v.iter().map(|z| z.conj()).collect()).collect();
        c.diagonalizable = upper.diagonalizable;
        c.conjugate = partner;
        clusters[partner].conjugate = idx;
    }

    let data = SpectralData { dimension: n, clusters, tolerance: ctol, rank_tolerance: rtol };
    if n > 0 {
        let sigma = data.eigenbasis().singular_values().iter().copied().fold(f64::INFINITY, f64::min);
        if sigma < tol.rank.max(1e-12) {
            return Err(SpectralError::DependentEigenspaces { sigma });
        }
    }
    Ok(data)
}

/// The operator acting as `f(α)·Id` on every generalized eigenspace `E_α`.
///
/// `f` must commute with complex conjugation on the spectrum so that the
/// result is real.
pub fn spectral_map(
    m: &RealMatrix,
    spec: &SpectralData,
    f: impl Fn(Complex64) -> Complex64,
) -> Result<RealMatrix, SpectralError> {
    let n = spec.dimension;
    assert_eq!(m.rows(), n, "spectral data belongs to a different matrix");
    let values: Vec<Complex64> = spec.clusters.iter().map(|c| f(c.eigenvalue)).collect();
    for (i, c) in spec.clusters.iter().enumerate() {
        let fv = values[i];
        let fc = values[c.conjugate];
        let slack = 1e-10 * fv.norm().max(1.0);
        if (fc - fv.conj()).norm() > slack {
            return Err(SpectralError::NotConjugateSymmetric { eigenvalue: c.eigenvalue });
        }
    }
    let p = spec.eigenbasis();
    let p_inv = p.clone().try_inverse().ok_or(SpectralError::DependentEigenspaces { sigma: 0.0 })?;
    let mut d = DMatrix::<Complex64>::zeros(n, n);
    let mut col = 0;
    for (c, v) in spec.clusters.iter().zip(&values) {
        for _ in 0..c.multiplicity {
            d[(col, col)] = *v;
            col += 1;
        }
    }
    let out = p * d * p_inv;
    let scale = out.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let imag = out.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    if imag > 1e-8 * scale {
        return Err(SpectralError::ImaginaryResidual { residual: imag });
    }
    Ok(Matrix::from_fn(n, n, |i, j| out[(i, j)].re))
}

fn norm_one(m: &RealMatrix) -> f64 {
    (0..m.cols()).map(|j| (0..m.rows()).map(|i| m[(i, j)].abs()).sum::<f64>()).fold(0.0, f64::max)
}

/// Matrix exponential by scaling and squaring with a Taylor kernel.
pub fn expm(m: &RealMatrix) -> Result<RealMatrix, SpectralError> {
    if !m.is_square() {
        return Err(SpectralError::NotSquare { rows: m.rows(), cols: m.cols() });
    }
    let n = m.rows();
    let norm = norm_one(m);
    if !norm.is_finite() {
        return Err(SpectralError::Overflow);
    }
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as u32 } else { 0 };
    let scaled = m.scale(&(0.5f64).powi(squarings as i32));
    let mut term = RealMatrix::identity(n);
    let mut sum = RealMatrix::identity(n);
    for k in 1..=24 {
        term = term.mul(&scaled).scale(&(1.0 / k as f64));
        sum = sum.add(&term);
        if term.max_abs() <= f64::EPSILON * 1e-3 * sum.max_abs() {
            break;
        }
    }
    for _ in 0..squarings {
        sum = sum.mul(&sum);
    }
    if sum.as_slice().iter().any(|x| !x.is_finite()) {
        return Err(SpectralError::Overflow);
    }
    Ok(sum)
}

/// `λ^A = exp(log(λ)·A)`.
pub fn lambda_pow(a: &RealMatrix, lambda: f64) -> Result<RealMatrix, SpectralError> {
    if !(lambda > 0.0) {
        return Err(SpectralError::NonPositiveScale(lambda));
    }
    expm(&a.scale(&lambda.ln()))
}

fn negligible_relative<T: Scalar>(m: &Matrix<T>, tol: f64, scale: f64) -> bool {
    m.is_negligible(tol * scale.max(1.0))
}

/// Exact exponential of a nilpotent matrix by its terminating series.
pub fn exp_nilpotent<T: Scalar>(m: &Matrix<T>, tol: f64) -> Result<Matrix<T>, SpectralError> {
    if !m.is_square() {
        return Err(SpectralError::NotSquare { rows: m.rows(), cols: m.cols() });
    }
    let n = m.rows();
    let base = m.max_abs().max(1.0);
    if !negligible_relative(&m.pow(n as u32), tol, base.powi(n as i32)) {
        return Err(SpectralError::NotNilpotent { power: n });
    }
    let mut term = Matrix::identity(n);
    let mut sum = Matrix::identity(n);
    for k in 1..n {
        term = term.mul(m).scale(&(T::one() / T::from_i64(k as i64)));
        sum = sum.add(&term);
    }
    Ok(sum)
}

/// Logarithm of a unipotent matrix by the terminating series of `log(Id + ψ)`.
pub fn log_unipotent<T: Scalar>(n_mat: &Matrix<T>, tol: f64) -> Result<Matrix<T>, SpectralError> {
    if !n_mat.is_square() {
        return Err(SpectralError::NotSquare { rows: n_mat.rows(), cols: n_mat.cols() });
    }
    let n = n_mat.rows();
    let psi = n_mat.sub(&Matrix::identity(n));
    let base = psi.max_abs().max(1.0);
    let mut power = Matrix::identity(n);
    let mut powers = Vec::with_capacity(n);
    let mut vanished_at = None;
    for k in 1..=n.max(1) {
        power = power.mul(&psi);
        if negligible_relative(&power, tol, base.powi(k as i32)) {
            vanished_at = Some(k);
            break;
        }
        powers.push(power.clone());
    }
    if vanished_at.is_none() {
        return Err(SpectralError::NotUnipotent { power: n });
    }
    let mut log = Matrix::zeros(n, n);
    for (idx, p) in powers.iter().enumerate() {
        let k = idx as i64 + 1;
        let coeff = if k % 2 == 1 { T::one() } else { -T::one() } / T::from_i64(k);
        log = log.add(&p.scale(&coeff));
    }
    Ok(log)
}

/// Precomputed evaluator of `s ↦ exp(s·A)` applied to vectors.
///
/// In the generalized eigenbasis `A` is block diagonal with blocks `αI + N`,
/// so `exp(sA)` is `e^{sα}` times a terminating polynomial in `sN` per block.
#[derive(Debug, Clone)]
pub struct DilationFlow {
    generator: RealMatrix,
    basis: DMatrix<Complex64>,
    basis_inv: DMatrix<Complex64>,
    blocks: Vec<FlowBlock>,
}

#[derive(Debug, Clone)]
struct FlowBlock {
    start: usize,
    eigenvalue: Complex64,
    nilpotent: DMatrix<Complex64>,
}

impl DilationFlow {
    pub fn new(a: &RealMatrix, tol: SpectralTolerance) -> Result<Self, SpectralError> {
        let spec = generalized_eigenspaces(a, tol)?;
        Self::from_spectral(a, &spec)
    }

    pub fn from_spectral(a: &RealMatrix, spec: &SpectralData) -> Result<Self, SpectralError> {
        let basis = spec.eigenbasis();
        let basis_inv = basis.clone().try_inverse().ok_or(SpectralError::DependentEigenspaces { sigma: 0.0 })?;
        let local = &basis_inv * to_complex(a) * &basis;
        let mut blocks = Vec::new();
        let mut start = 0;
        for c in &spec.clusters {
            let m = c.multiplicity;
            let mut nilpotent = local.view((start, start), (m, m)).into_owned();
            for i in 0..m {
                nilpotent[(i, i)] -= c.eigenvalue;
            }
            if c.diagonalizable {
                nilpotent.fill(Complex64::new(0.0, 0.0));
            }
            blocks.push(FlowBlock { start, eigenvalue: c.eigenvalue, nilpotent });
            start += m;
        }
        Ok(Self { generator: a.clone(), basis, basis_inv, blocks })
    }

    pub fn generator(&self) -> &RealMatrix {
        &self.generator
    }

    pub fn dimension(&self) -> usize {
        self.generator.rows()
    }

    /// Coordinates of `x` in the generalized eigenbasis.
    pub fn coordinates(&self, x: &[f64]) -> DVector<Complex64> {
        let v = DVector::from_iterator(x.len(), x.iter().map(|&r| Complex64::new(r, 0.0)));
        &self.basis_inv * v
    }

    /// `exp(s·A)` applied to a vector given by its eigenbasis coordinates.
    pub fn apply_coordinates(&self, s: f64, y: &DVector<Complex64>) -> Vec<f64> {
        let mut z = DVector::<Complex64>::zeros(y.len());
        for b in &self.blocks {
            let m = b.nilpotent.nrows();
            let scale = (b.eigenvalue * s).exp();
            let mut term: DVector<Complex64> = y.rows(b.start, m).into_owned();
            let mut acc = term.clone();
            for k in 1..m {
                term = &b.nilpotent * term * Complex64::new(s / k as f64, 0.0);
                acc += &term;
            }
            z.rows_mut(b.start, m).copy_from(&(acc * scale));
        }
        (&self.basis * z).iter().map(|c| c.re).collect()
    }

    /// `exp(s·A) x`.
    pub fn apply(&self, s: f64, x: &[f64]) -> Vec<f64> {
        self.apply_coordinates(s, &self.coordinates(x))
    }

    /// `λ^A x`.
    pub fn dilate(&self, lambda: f64, x: &[f64]) -> Vec<f64> {
        self.apply(lambda.ln(), x)
    }

    /// `exp(s·A)` as a matrix.
    pub fn matrix(&self, s: f64) -> RealMatrix {
        let n = self.dimension();
        let cols: Vec<Vec<f64>> = (0..n).map(|j| self.apply(s, &crate::matrix::basis_vector(n, j))).collect();
        Matrix::from_columns(&cols, n)
    }
}

/// Sine of the largest principal angle between two complex subspaces of equal
/// dimension, each given by a spanning family.
pub fn subspace_gap(u: &[Vec<Complex64>], v: &[Vec<Complex64>]) -> f64 {
    if u.is_empty() && v.is_empty() {
        return 0.0;
    }
    if u.len() != v.len() || u.is_empty() || v.is_empty() {
        return 1.0;
    }
    let n = u[0].len();
    let orth = |family: &[Vec<Complex64>]| {
        let m = DMatrix::from_fn(n, family.len(), |i, j| family[j][i]);
        m.qr().q()
    };
    let qu = orth(u);
    let qv = orth(v);
    let residual = &qv - &qu * (qu.adjoint() * &qv);
    residual.singular_values().iter().copied().fold(0.0, f64::max).min(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{ratio, Rational};

    fn m2(a: f64, b: f64, c: f64, d: f64) -> RealMatrix {
        Matrix::from_row_slice(2, 2, &[a, b, c, d])
    }

    #[test]
    fn rotation_spectrum() {
        let spec = generalized_eigenspaces(&m2(2.0, -1.0, 1.0, 2.0), SpectralTolerance::default()).unwrap();
        assert_eq!(spec.clusters.len(), 2);
        for c in &spec.clusters {
            assert_eq!(c.multiplicity, 1);
            assert!(c.diagonalizable);
            assert!((c.eigenvalue.re - 2.0).abs() < 1e-12);
            assert!((c.eigenvalue.im.abs() - 1.0).abs() < 1e-12);
        }
        let (a, b) = (&spec.clusters[0], &spec.clusters[1]);
        assert_eq!(a.conjugate, 1);
        assert_eq!(b.conjugate, 0);
        for (x, y) in a.basis[0].iter().zip(&b.basis[0]) {
            assert_eq!(*x, y.conj());
        }
    }

    #[test]
    fn identity_is_one_cluster() {
        let spec = generalized_eigenspaces(&RealMatrix::identity(3), SpectralTolerance::default()).unwrap();
        assert_eq!(spec.clusters.len(), 1);
        let c = &spec.clusters[0];
        assert_eq!(c.multiplicity, 3);
        assert_eq!(c.eigenvalue, Complex64::new(1.0, 0.0));
        assert!(c.diagonalizable);
    }

    #[test]
    fn jordan_block_is_not_diagonalizable() {
        let spec = generalized_eigenspaces(&m2(1.0, 1.0, 0.0, 1.0), SpectralTolerance::default()).unwrap();
        assert_eq!(spec.clusters.len(), 1);
        assert_eq!(spec.clusters[0].multiplicity, 2);
        assert!(!spec.clusters[0].diagonalizable);
    }

    #[test]
    fn spectral_map_examples() {
        let m = m2(2.0, -1.0, 1.0, 2.0);
        let spec = generalized_eigenspaces(&m, SpectralTolerance::default()).unwrap();
        let unit = spectral_map(&m, &spec, |z| z / z.norm()).unwrap();
        let expected = m.scale(&(1.0 / 5f64.sqrt()));
        assert!(unit.distance_to(&expected) < 1e-12);
        let same = spectral_map(&m, &spec, |z| z).unwrap();
        assert!(same.distance_to(&m) < 1e-12);

        let d = RealMatrix::diagonal(&[2.0, 4.0]);
        let spec = generalized_eigenspaces(&d, SpectralTolerance::default()).unwrap();
        let log = spectral_map(&d, &spec, |z| Complex64::new(z.norm().ln(), 0.0)).unwrap();
        assert!(log.distance_to(&RealMatrix::diagonal(&[2f64.ln(), 4f64.ln()])) < 1e-14);
    }

    #[test]
    fn spectral_map_rejects_asymmetric_functions() {
        let m = m2(2.0, -1.0, 1.0, 2.0);
        let spec = generalized_eigenspaces(&m, SpectralTolerance::default()).unwrap();
        let err = spectral_map(&m, &spec, |z| z * Complex64::new(0.0, 1.0)).unwrap_err();
        assert!(matches!(err, SpectralError::NotConjugateSymmetric { .. }));
    }

    #[test]
    fn lambda_pow_examples() {
        let a = m2(2.0, 1.0, 0.0, 2.0);
        let p = lambda_pow(&a, 3.0).unwrap();
        let expected = m2(9.0, 9.0 * 3f64.ln(), 0.0, 9.0);
        assert!(p.distance_to(&expected) < 1e-12);
        let id = lambda_pow(&m2(0.3, -7.0, 2.0, 1.5), 1.0).unwrap();
        assert!(id.distance_to(&RealMatrix::identity(2)) < 1e-15);
        let e = lambda_pow(&m2(0.0, 1.0, 0.0, 0.0), core::f64::consts::E).unwrap();
        assert!(e.distance_to(&m2(1.0, 1.0, 0.0, 1.0)) < 1e-14);
        assert!(matches!(lambda_pow(&a, 0.0), Err(SpectralError::NonPositiveScale(_))));
    }

    #[test]
    fn log_unipotent_examples() {
        let n: Matrix<Rational> = Matrix::from_row_slice(2, 2, &[ratio(1, 1), ratio(1, 1), ratio(0, 1), ratio(1, 1)]);
        let d = log_unipotent(&n, 0.0).unwrap();
        assert_eq!(d, Matrix::from_row_slice(2, 2, &[ratio(0, 1), ratio(1, 1), ratio(0, 1), ratio(0, 1)]));
        let zero = log_unipotent(&Matrix::<Rational>::identity(3), 0.0).unwrap();
        assert_eq!(zero, Matrix::zeros(3, 3));
        let bad = log_unipotent(&m2(2.0, 0.0, 0.0, 1.0), 1e-12).unwrap_err();
        assert_eq!(bad, SpectralError::NotUnipotent { power: 2 });
    }

    #[test]
    fn flow_matches_expm() {
        let a = Matrix::from_row_slice(3, 3, &[1.5, 1.0, 0.0, 0.0, 1.5, 0.0, 0.2, -0.3, 2.0]);
        let flow = DilationFlow::new(&a, SpectralTolerance::default()).unwrap();
        for s in [-2.0, -0.3, 0.0, 0.7, 1.9] {
            let direct = expm(&a.scale(&s)).unwrap();
            assert!(flow.matrix(s).distance_to(&direct) < 1e-10 * direct.frobenius_norm());
        }
    }
}
