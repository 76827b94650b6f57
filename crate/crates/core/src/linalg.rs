//! Gaussian elimination kernels shared by both backends.
//!
//! On rationals every zero test is exact. On floats the pivot is the entry of
//! largest magnitude and entries below `tol` count as zero.

use alloc::vec::Vec;

use crate::matrix::Matrix;
use crate::scalar::Scalar;

/// Reduced row echelon form and the pivot columns.
pub fn rref<T: Scalar>(m: &Matrix<T>, tol: f64) -> (Matrix<T>, Vec<usize>) {
    let mut a = m.clone();
    let (rows, cols) = (a.rows(), a.cols());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let best = (r..rows).filter(|&i| !a[(i, c)].is_negligible(tol)).max_by(|&i, &j| {
            if T::EXACT {
                // first nonzero row wins; keeps rational entries small
                j.cmp(&i)
            } else {
                a[(i, c)].magnitude().total_cmp(&a[(j, c)].magnitude())
            }
        });
        let Some(p) = best else { continue };
        for j in 0..cols {
            let tmp = a[(r, j)].clone();
            a[(r, j)] = a[(p, j)].clone();
            a[(p, j)] = tmp;
        }
        let inv = T::one() / a[(r, c)].clone();
        for j in 0..cols {
            a[(r, j)] = a[(r, j)].clone() * inv.clone();
        }
        for i in 0..rows {
            if i == r || a[(i, c)].is_zero() {
                continue;
            }
            let f = a[(i, c)].clone();
            for j in 0..cols {
                let v = a[(i, j)].clone() - f.clone() * a[(r, j)].clone();
                a[(i, j)] = v;
            }
        }
        pivots.push(c);
        r += 1;
    }
    (a, pivots)
}

pub fn rank<T: Scalar>(m: &Matrix<T>, tol: f64) -> usize {
    rref(m, tol).1.len()
}

/// Basis of the right null space `{x : m x = 0}`.
pub fn nullspace<T: Scalar>(m: &Matrix<T>, tol: f64) -> Vec<Vec<T>> {
    let (r, pivots) = rref(m, tol);
    let cols = m.cols();
    (0..cols)
        .filter(|c| !pivots.contains(c))
        .map(|free| {
            let mut v = alloc::vec![T::zero(); cols];
            v[free] = T::one();
            for (row, &p) in pivots.iter().enumerate() {
                v[p] = -r[(row, free)].clone();
            }
            v
        })
        .collect()
}

/// Rank of a family of vectors.
pub fn rank_of<T: Scalar>(vectors: &[Vec<T>], dim: usize, tol: f64) -> usize {
    if vectors.is_empty() {
        return 0;
    }
    rank(&Matrix::from_fn(vectors.len(), dim, |i, j| vectors[i][j].clone()), tol)
}

/// Whether `v` lies in the span of `basis`.
pub fn in_span<T: Scalar>(basis: &[Vec<T>], v: &[T], tol: f64) -> bool {
    let dim = v.len();
    let mut all: Vec<Vec<T>> = basis.to_vec();
    let before = rank_of(&all, dim, tol);
    all.push(v.to_vec());
    rank_of(&all, dim, tol) == before
}

/// Extracts a maximal independent subfamily, preserving order.
pub fn independent_subset<T: Scalar>(vectors: &[Vec<T>], tol: f64) -> Vec<Vec<T>> {
    let mut chosen: Vec<Vec<T>> = Vec::new();
    for v in vectors {
        if !in_span(&chosen, v, tol) {
            chosen.push(v.clone());
        }
    }
    chosen
}

/// Inverse by Gauss-Jordan; `None` when singular.
pub fn inverse<T: Scalar>(m: &Matrix<T>, tol: f64) -> Option<Matrix<T>> {
    assert!(m.is_square());
    let n = m.rows();
    let aug = Matrix::from_fn(n, 2 * n, |i, j| {
        if j < n {
            m[(i, j)].clone()
        } else if j - n == i {
            T::one()
        } else {
            T::zero()
        }
    });
    let (r, pivots) = rref(&aug, tol);
    if pivots.len() < n || pivots[n - 1] != n - 1 {
        return None;
    }
    Some(Matrix::from_fn(n, n, |i, j| r[(i, j + n)].clone()))
}

/// Coordinates of `v` in the basis given by the columns of `basis` (square, invertible).
pub fn solve<T: Scalar>(basis: &Matrix<T>, v: &[T], tol: f64) -> Option<Vec<T>> {
    inverse(basis, tol).map(|inv| inv.mul_vec(v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{ratio, Rational};

    #[test]
    fn rational_nullspace_is_exact() {
        let m: Matrix<Rational> = Matrix::from_fn(2, 3, |i, j| ratio((i * 3 + j + 1) as i64, 1));
        let ns = nullspace(&m, 0.0);
        assert_eq!(ns.len(), 1);
        let image = m.mul_vec(&ns[0]);
        assert!(image.iter().all(|x| x == &ratio(0, 1)));
    }

    #[test]
    fn singular_matrix_has_no_inverse() {
        let m = Matrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        assert!(inverse(&m, 1e-12).is_none());
        let q: Matrix<Rational> = Matrix::from_fn(2, 2, |i, j| ratio((i + 2 * j + 1) as i64, 3));
        let inv = inverse(&q, 0.0).unwrap();
        assert_eq!(q.mul(&inv), Matrix::identity(2));
    }
}
