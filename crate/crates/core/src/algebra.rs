//! Finite-dimensional real Lie algebras given by rational structure constants.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::linalg;
use crate::matrix::{Matrix, RationalMatrix};
use crate::scalar::{Rational, Scalar};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AlgebraError {
    #[error("basis index {index} out of range for dimension {dimension}")]
    IndexOutOfRange { index: usize, dimension: usize },
    #[error("bracket [e{i}, e{i}] must vanish")]
    SelfBracket { i: usize },
    #[error("Jacobi identity fails on (e{i}, e{j}, e{k})")]
    Jacobi { i: usize, j: usize, k: usize },
    #[error("span is not an ideal: [e{generator}, h{element}] leaves it")]
    NotIdeal { generator: usize, element: usize },
    #[error("subspace is not invariant under the given map (basis vector {element})")]
    NotInvariant { element: usize },
    #[error("dimension mismatch: expected {expected}, got {found}")]
    Dimension { expected: usize, found: usize },
}

/// Failed Leibniz or homomorphism identity on a pair of basis vectors.
#[derive(Debug, Clone, PartialEq)]
pub enum CheckFailure {
    Singular,
    Bracket { i: usize, j: usize, residual: f64 },
}

impl core::fmt::Display for CheckFailure {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            CheckFailure::Singular => write!(f, "map is singular"),
            CheckFailure::Bracket { i, j, residual } => {
                write!(f, "identity fails on (e{}, e{}) with residual {:e}", i + 1, j + 1, residual)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Term {
    i: usize,
    j: usize,
    k: usize,
    coeff: Rational,
    approx: f64,
}

/// Lie algebra on `ℝⁿ` with bracket `[e_i, e_j] = Σ_k c^k_{ij} e_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct LieAlgebra {
    name: String,
    dim: usize,
    /// Nonzero constants with `i < j`, sorted.
    terms: Vec<Term>,
}

impl LieAlgebra {
    /// Builds the algebra from `(i, j, k, c^k_{ij})` with 0-based indices.
    ///
    /// Entries with `i > j` are folded in by antisymmetry and repeated entries
    /// are summed. The Jacobi identity is verified exactly.
    pub fn new(
        name: impl Into<String>,
        dim: usize,
        constants: impl IntoIterator<Item = (usize, usize, usize, Rational)>,
    ) -> Result<Self, AlgebraError> {
        let mut table: Vec<(usize, usize, usize, Rational)> = Vec::new();
        for (i, j, k, c) in constants {
            for index in [i, j, k] {
                if index >= dim {
                    return Err(AlgebraError::IndexOutOfRange { index, dimension: dim });
                }
            }
            if c.is_zero() {
                continue;
            }
            if i == j {
                return Err(AlgebraError::SelfBracket { i });
            }
            let (a, b, c) = if i < j { (i, j, c) } else { (j, i, -c) };
            match table.iter_mut().find(|t| t.0 == a && t.1 == b && t.2 == k) {
                Some(t) => t.3 += c,
                None => table.push((a, b, k, c)),
            }
        }
        table.retain(|t| !t.3.is_zero());
        table.sort_by(|x, y| (x.0, x.1, x.2).cmp(&(y.0, y.1, y.2)));
        let terms = table
            .into_iter()
            .map(|(i, j, k, coeff)| {
                let approx = coeff.to_f64();
                Term { i, j, k, coeff, approx }
            })
            .collect();
        let g = Self { name: name.into(), dim, terms };
        g.check_jacobi()?;
        Ok(g)
    }

    pub fn abelian(dim: usize) -> Self {
        Self { name: alloc::format!("abelian-{dim}"), dim, terms: Vec::new() }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    pub fn is_abelian(&self) -> bool {
        self.terms.is_empty()
    }

    /// Nonzero structure constants `(i, j, k, c^k_{ij})` with `i < j`.
    pub fn structure_constants(&self) -> impl Iterator<Item = (usize, usize, usize, &Rational)> {
        self.terms.iter().map(|t| (t.i, t.j, t.k, &t.coeff))
    }

    pub fn structure_constant(&self, i: usize, j: usize, k: usize) -> Rational {
        let (a, b, sign) = if i <= j { (i, j, Rational::one()) } else { (j, i, -Rational::one()) };
        self.terms
            .iter()
            .find(|t| t.i == a && t.j == b && t.k == k)
            .map_or_else(Rational::zero, |t| t.coeff.clone() * sign)
    }

    /// `[x, y]`.
    pub fn bracket<T: Scalar>(&self, x: &[T], y: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.dim, "bracket argument has the wrong dimension");
        assert_eq!(y.len(), self.dim, "bracket argument has the wrong dimension");
        let mut out = vec![T::zero(); self.dim];
        for t in &self.terms {
            let w = x[t.i].clone() * y[t.j].clone() - x[t.j].clone() * y[t.i].clone();
            if w.is_zero() {
                continue;
            }
            out[t.k] = out[t.k].clone() + w * T::from_cached(&t.coeff, t.approx);
        }
        out
    }

    /// Float bracket without the generic dispatch, for inner loops.
    pub fn bracket_f64(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for t in &self.terms {
            out[t.k] += (x[t.i] * y[t.j] - x[t.j] * y[t.i]) * t.approx;
        }
        out
    }

    pub fn basis_bracket<T: Scalar>(&self, i: usize, j: usize) -> Vec<T> {
        let e = |a| crate::matrix::basis_vector::<T>(self.dim, a);
        self.bracket(&e(i), &e(j))
    }

    /// Matrix of `ad(x) = [x, ·]`.
    pub fn ad<T: Scalar>(&self, x: &[T]) -> Matrix<T> {
        let cols: Vec<Vec<T>> =
            (0..self.dim).map(|j| self.bracket(x, &crate::matrix::basis_vector(self.dim, j))).collect();
        Matrix::from_columns(&cols, self.dim)
    }

    fn check_jacobi(&self) -> Result<(), AlgebraError> {
        let n = self.dim;
        let e = |a| crate::matrix::basis_vector::<Rational>(n, a);
        for i in 0..n {
            for j in i + 1..n {
                for k in j + 1..n {
                    let (x, y, z) = (e(i), e(j), e(k));
                    let a = self.bracket(&x, &self.bracket(&y, &z));
                    let b = self.bracket(&y, &self.bracket(&z, &x));
                    let c = self.bracket(&z, &self.bracket(&x, &y));
                    if (0..n).any(|l| !(a[l].clone() + b[l].clone() + c[l].clone()).is_zero()) {
                        return Err(AlgebraError::Jacobi { i, j, k });
                    }
                }
            }
        }
        Ok(())
    }

    /// `[U, V]` spanned by brackets of basis vectors, as an independent family.
    pub fn bracket_span(&self, u: &[Vec<Rational>], v: &[Vec<Rational>]) -> Vec<Vec<Rational>> {
        let mut all = Vec::new();
        for a in u {
            for b in v {
                all.push(self.bracket(a, b));
            }
        }
        linalg::independent_subset(&all, 0.0)
    }

    fn standard_basis(&self) -> Vec<Vec<Rational>> {
        (0..self.dim).map(|i| crate::matrix::basis_vector(self.dim, i)).collect()
    }

    /// `[g, g]`.
    pub fn derived_algebra(&self) -> Vec<Vec<Rational>> {
        let e = self.standard_basis();
        self.bracket_span(&e, &e)
    }

    /// Bases of `g = g¹ ⊇ g² ⊇ …` until the series stabilizes.
    pub fn lower_central_series(&self) -> Vec<Vec<Vec<Rational>>> {
        let e = self.standard_basis();
        let mut series = vec![e.clone()];
        loop {
            let last = series.last().expect("series starts nonempty");
            let next = self.bracket_span(&e, last);
            let stalled = next.len() == last.len();
            if stalled {
                break;
            }
            let empty = next.is_empty();
            series.push(next);
            if empty {
                break;
            }
        }
        series
    }

    /// Smallest `s` with `g^{s+1} = 0`, or `None` when not nilpotent.
    pub fn nilpotency_step(&self) -> Option<usize> {
        let series = self.lower_central_series();
        let last = series.last().expect("series starts nonempty");
        if !last.is_empty() {
            return if self.dim == 0 { Some(0) } else { None };
        }
        Some(series.len() - 1)
    }

    pub fn is_nilpotent(&self) -> bool {
        self.nilpotency_step().is_some()
    }

    /// Leibniz rule `A[e_i, e_j] = [Ae_i, e_j] + [e_i, Ae_j]` on all basis pairs.
    ///
    /// Exact on rationals; on floats the residual must stay below
    /// `tol·max(1, max|A|)`.
    pub fn check_derivation<T: Scalar>(&self, a: &Matrix<T>, tol: f64) -> Result<(), CheckFailure> {
        self.assert_square(a);
        let cols: Vec<Vec<T>> = (0..self.dim).map(|i| a.column(i)).collect();
        let slack = tol * a.max_abs().max(1.0);
        for i in 0..self.dim {
            for j in i + 1..self.dim {
                let lhs = a.mul_vec(&self.basis_bracket(i, j));
                let e = |k| crate::matrix::basis_vector::<T>(self.dim, k);
                let rhs = crate::matrix::add_vec(&self.bracket(&cols[i], &e(j)), &self.bracket(&e(i), &cols[j]));
                let residual = max_residual(&lhs, &rhs);
                if !residual_ok::<T>(&lhs, &rhs, slack) {
                    return Err(CheckFailure::Bracket { i, j, residual });
                }
            }
        }
        Ok(())
    }

    /// Homomorphism identity `φ[e_i, e_j] = [φe_i, φe_j]` and invertibility.
    pub fn check_automorphism<T: Scalar>(&self, phi: &Matrix<T>, tol: f64) -> Result<(), CheckFailure> {
        self.assert_square(phi);
        let scale = phi.max_abs().max(1.0);
        if linalg::rank(phi, tol * scale) < self.dim {
            return Err(CheckFailure::Singular);
        }
        let cols: Vec<Vec<T>> = (0..self.dim).map(|i| phi.column(i)).collect();
        let slack = tol * scale * scale;
        for i in 0..self.dim {
            for j in i + 1..self.dim {
                let lhs = phi.mul_vec(&self.basis_bracket(i, j));
                let rhs = self.bracket(&cols[i], &cols[j]);
                let residual = max_residual(&lhs, &rhs);
                if !residual_ok::<T>(&lhs, &rhs, slack) {
                    return Err(CheckFailure::Bracket { i, j, residual });
                }
            }
        }
        Ok(())
    }

    fn assert_square<T: Scalar>(&self, m: &Matrix<T>) {
        assert!(m.rows() == self.dim && m.cols() == self.dim, "map has the wrong shape");
    }

    /// Basis of the derivation algebra `Der(g)`, exactly.
    pub fn derivation_basis(&self) -> Vec<RationalMatrix> {
        let n = self.dim;
        // unknown A_{ab} sits at column a*n + b
        let var = |a: usize, b: usize| a * n + b;
        let mut rows: Vec<Vec<Rational>> = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                for k in 0..n {
                    let mut row = vec![Rational::zero(); n * n];
                    for l in 0..n {
                        let c = self.structure_constant(i, j, l);
                        if !c.is_zero() {
                            row[var(k, l)] += c;
                        }
                    }
                    for m in 0..n {
                        let c = self.structure_constant(m, j, k);
                        if !c.is_zero() {
                            row[var(m, i)] -= c;
                        }
                        let c = self.structure_constant(i, m, k);
                        if !c.is_zero() {
                            row[var(m, j)] -= c;
                        }
                    }
                    if row.iter().any(|x| !x.is_zero()) {
                        rows.push(row);
                    }
                }
            }
        }
        let system = if rows.is_empty() {
            Matrix::zeros(1, n * n)
        } else {
            Matrix::from_rows(&rows).expect("rows have equal length")
        };
        linalg::nullspace(&system, 0.0)
            .into_iter()
            .map(|v| Matrix::from_fn(n, n, |a, b| v[var(a, b)].clone()))
            .collect()
    }
}

fn max_residual<T: Scalar>(a: &[T], b: &[T]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x.clone() - y.clone()).magnitude()).fold(0.0, f64::max)
}

fn residual_ok<T: Scalar>(a: &[T], b: &[T], slack: f64) -> bool {
    a.iter().zip(b).all(|(x, y)| (x.clone() - y.clone()).is_negligible(slack))
}

/// An ideal `h ⊲ g`, stored by an independent rational basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Ideal {
    basis: Vec<Vec<Rational>>,
}

impl Ideal {
    /// Verifies `[g, h] ⊆ h` exactly.
    pub fn new(g: &LieAlgebra, spanning: Vec<Vec<Rational>>) -> Result<Self, AlgebraError> {
        for v in &spanning {
            if v.len() != g.dimension() {
                return Err(AlgebraError::Dimension { expected: g.dimension(), found: v.len() });
            }
        }
        let basis = linalg::independent_subset(&spanning, 0.0);
        for i in 0..g.dimension() {
            let e = crate::matrix::basis_vector::<Rational>(g.dimension(), i);
            for (idx, h) in basis.iter().enumerate() {
                if !linalg::in_span(&basis, &g.bracket(&e, h), 0.0) {
                    return Err(AlgebraError::NotIdeal { generator: i, element: idx });
                }
            }
        }
        Ok(Self { basis })
    }

    pub fn zero() -> Self {
        Self { basis: Vec::new() }
    }

    pub fn basis(&self) -> &[Vec<Rational>] {
        &self.basis
    }

    pub fn dimension(&self) -> usize {
        self.basis.len()
    }

    pub fn contains(&self, v: &[Rational]) -> bool {
        linalg::in_span(&self.basis, v, 0.0)
    }
}

/// `g/h` on a complement of `h` spanned by standard basis vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Quotient {
    pub algebra: LieAlgebra,
    /// `π : g → g/h`, an `(n−k)×n` matrix.
    pub projection: RationalMatrix,
    /// Columns are the complement vectors, a linear section of `π`.
    pub section: RationalMatrix,
}

impl Quotient {
    /// The map `Â` induced on `g/h` by `A` with `A(h) ⊆ h`.
    pub fn induced(&self, ideal: &Ideal, a: &RationalMatrix) -> Result<RationalMatrix, AlgebraError> {
        for (idx, h) in ideal.basis().iter().enumerate() {
            if !ideal.contains(&a.mul_vec(h)) {
                return Err(AlgebraError::NotInvariant { element: idx });
            }
        }
        Ok(self.projection.mul(a).mul(&self.section))
    }
}

pub fn quotient(g: &LieAlgebra, h: &Ideal) -> Quotient {
    let n = g.dimension();
    let mut complement: Vec<Vec<Rational>> = Vec::new();
    let mut spanned: Vec<Vec<Rational>> = h.basis().to_vec();
    for i in 0..n {
        let e = crate::matrix::basis_vector::<Rational>(n, i);
        if !linalg::in_span(&spanned, &e, 0.0) {
            spanned.push(e.clone());
            complement.push(e);
        }
    }
    let m = complement.len();
    let mut columns = complement.clone();
    columns.extend(h.basis().iter().cloned());
    let full = Matrix::from_columns(&columns, n);
    let inv = linalg::inverse(&full, 0.0).expect("complement and ideal span the algebra");
    let projection = Matrix::from_fn(m, n, |a, b| inv[(a, b)].clone());
    let section = Matrix::from_columns(&complement, n);
    let mut constants = Vec::new();
    for a in 0..m {
        for b in a + 1..m {
            let image = projection.mul_vec(&g.bracket(&complement[a], &complement[b]));
            for (k, c) in image.into_iter().enumerate() {
                if !c.is_zero() {
                    constants.push((a, b, k, c));
                }
            }
        }
    }
    let algebra = LieAlgebra::new(alloc::format!("{}/h", g.name()), m, constants)
        .expect("quotient of a Lie algebra by an ideal is a Lie algebra");
    Quotient { algebra, projection, section }
}

/// Standard examples used throughout the tests and the catalog.
pub mod examples {
    use super::*;
    use crate::scalar::ratio;

    /// `[e1, e2] = e3`.
    pub fn heisenberg() -> LieAlgebra {
        LieAlgebra::new("heisenberg", 3, [(0, 1, 2, ratio(1, 1))]).expect("valid")
    }

    /// `[e1, e2] = e3`, `[e1, e3] = e4`.
    pub fn engel() -> LieAlgebra {
        LieAlgebra::new("engel", 4, [(0, 1, 2, ratio(1, 1)), (0, 2, 3, ratio(1, 1))]).expect("valid")
    }

    /// Basis `(X, Y, Z)` with `[Z, X] = Y`, `[Z, Y] = −X`.
    pub fn rototranslation() -> LieAlgebra {
        LieAlgebra::new("rototranslation", 3, [(2, 0, 1, ratio(1, 1)), (2, 1, 0, ratio(-1, 1))]).expect("valid")
    }
}

#[cfg(test)]
mod tests {
    use super::examples::*;
    use super::*;
    use crate::scalar::ratio;
    use proptest::prelude::*;

    fn q(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&x| ratio(x, 1)).collect()
    }

    fn rdiag(v: &[i64]) -> RationalMatrix {
        Matrix::diagonal(&q(v))
    }

    #[test]
    fn brackets_of_examples() {
        assert_eq!(heisenberg().bracket(&q(&[1, 0, 0]), &q(&[0, 1, 0])), q(&[0, 0, 1]));
        assert_eq!(engel().bracket(&q(&[1, 0, 0, 0]), &q(&[0, 0, 1, 0])), q(&[0, 0, 0, 1]));
        let r = rototranslation();
        assert_eq!(r.bracket(&q(&[0, 0, 1]), &q(&[1, 0, 0])), q(&[0, 1, 0]));
        assert_eq!(r.bracket(&q(&[0, 0, 1]), &q(&[0, 1, 0])), q(&[-1, 0, 0]));
    }

    #[test]
    fn jacobi_violation_is_rejected() {
        // [e1,e2]=e3, [e2,e3]=e1, [e1,e3]=e1 breaks Jacobi
        let bad = LieAlgebra::new("bad", 3, [(0, 1, 2, ratio(1, 1)), (1, 2, 0, ratio(1, 1)), (0, 2, 0, ratio(1, 1))]);
        assert!(matches!(bad, Err(AlgebraError::Jacobi { .. })));
        assert!(matches!(LieAlgebra::new("x", 2, [(0, 0, 1, ratio(1, 1))]), Err(AlgebraError::SelfBracket { i: 0 })));
    }

    #[test]
    fn derivation_examples() {
        let h = heisenberg();
        assert_eq!(h.check_derivation(&rdiag(&[1, 1, 2]), 0.0), Ok(()));
        assert_eq!(
            h.check_derivation(&RationalMatrix::identity(3), 0.0),
            Err(CheckFailure::Bracket { i: 0, j: 1, residual: 1.0 })
        );
        assert_eq!(rototranslation().check_derivation(&rdiag(&[1, 1, 0]), 0.0), Ok(()));
        assert_eq!(h.check_derivation(&Matrix::diagonal(&[1.0, 1.0, 2.0]), 1e-12), Ok(()));
    }

    #[test]
    fn automorphism_examples() {
        let h = heisenberg();
        assert_eq!(h.check_automorphism(&rdiag(&[2, 2, 4]), 0.0), Ok(()));
        assert_eq!(h.check_automorphism(&RationalMatrix::identity(3), 0.0), Ok(()));
        assert!(matches!(h.check_automorphism(&rdiag(&[2, 2, 2]), 0.0), Err(CheckFailure::Bracket { i: 0, j: 1, .. })));
        assert_eq!(h.check_automorphism(&rdiag(&[1, 0, 1]), 0.0), Err(CheckFailure::Singular));
    }

    #[test]
    fn nilpotency_steps() {
        assert_eq!(LieAlgebra::abelian(4).nilpotency_step(), Some(1));
        assert_eq!(LieAlgebra::abelian(0).nilpotency_step(), Some(0));
        assert_eq!(heisenberg().nilpotency_step(), Some(2));
        assert_eq!(engel().nilpotency_step(), Some(3));
        assert_eq!(rototranslation().nilpotency_step(), None);
    }

    #[test]
    fn quotients() {
        let h = heisenberg();
        let center = Ideal::new(&h, vec![q(&[0, 0, 1])]).unwrap();
        let quo = quotient(&h, &center);
        assert!(quo.algebra.is_abelian());
        assert_eq!(quo.algebra.dimension(), 2);

        let trivial = quotient(&h, &Ideal::zero());
        assert_eq!(trivial.algebra.structure_constants().count(), 1);
        assert_eq!(trivial.projection, RationalMatrix::identity(3));

        let e = engel();
        let top = Ideal::new(&e, vec![q(&[0, 0, 0, 1])]).unwrap();
        let quo = quotient(&e, &top);
        let consts: Vec<_> = quo.algebra.structure_constants().map(|(i, j, k, c)| (i, j, k, c.clone())).collect();
        assert_eq!(consts, vec![(0, 1, 2, ratio(1, 1))]);

        let induced = quo.induced(&top, &rdiag(&[1, 1, 2, 3])).unwrap();
        assert_eq!(induced, rdiag(&[1, 1, 2]));
    }

    #[test]
    fn non_ideal_is_rejected() {
        let err = Ideal::new(&heisenberg(), vec![q(&[1, 0, 0])]).unwrap_err();
        assert_eq!(err, AlgebraError::NotIdeal { generator: 1, element: 0 });
    }

    #[test]
    fn derivation_algebra_of_heisenberg() {
        // Der(h3) has dimension 6: gl(2) on V1 plus the maps V1 → V2.
        let der = heisenberg().derivation_basis();
        assert_eq!(der.len(), 6);
        for d in &der {
            assert_eq!(heisenberg().check_derivation(d, 0.0), Ok(()));
        }
    }

    fn small_vec(n: usize) -> impl Strategy<Value = Vec<i64>> {
        proptest::collection::vec(-5i64..=5, n)
    }

    proptest! {
        #[test]
        fn bracket_is_antisymmetric(x in small_vec(4), y in small_vec(4)) {
            let g = engel();
            let (x, y) = (q(&x), q(&y));
            let xy = g.bracket(&x, &y);
            let yx = g.bracket(&y, &x);
            prop_assert!(xy.iter().zip(&yx).all(|(a, b)| (a + b).is_zero()));
            prop_assert!(g.bracket(&x, &x).iter().all(Zero::is_zero));
        }

        #[test]
        fn projection_is_a_homomorphism(x in small_vec(4), y in small_vec(4)) {
            let g = engel();
            let top = Ideal::new(&g, vec![q(&[0, 0, 0, 1])]).unwrap();
            let quo = quotient(&g, &top);
            let (x, y) = (q(&x), q(&y));
            let lhs = quo.projection.mul_vec(&g.bracket(&x, &y));
            let rhs = quo.algebra.bracket(&quo.projection.mul_vec(&x), &quo.projection.mul_vec(&y));
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn derivations_close_under_commutator(
            a in proptest::collection::vec(-3i64..=3, 10),
            b in proptest::collection::vec(-3i64..=3, 10),
        ) {
            for g in [heisenberg(), engel()] {
                let basis = g.derivation_basis();
                let combo = |c: &[i64]| basis.iter().zip(c).fold(
                    Matrix::zeros(g.dimension(), g.dimension()),
                    |acc: RationalMatrix, (d, &s)| acc.add(&d.scale(&ratio(s, 1))),
                );
                let (da, db) = (combo(&a), combo(&b));
                prop_assert_eq!(g.check_derivation(&da.commutator(&db), 0.0), Ok(()));
            }
        }
    }
}
