//! Dense Gaussian elimination over any [`Scalar`].
//!
//! Over [`crate::Rat`] the result is exact; over floats it is ordinary
//! partial-pivoting elimination.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Square matrix stored row-major.
pub type Matrix<F> = Vec<Vec<F>>;

/// Solve `a * X = B` for every column of `rhs` at once.
///
/// `rhs[k]` is the k-th right-hand side; the returned `Vec` holds the k-th
/// solution at index k.
pub fn solve_many<F: Scalar>(a: &Matrix<F>, rhs: &[Vec<F>]) -> Result<Vec<Vec<F>>> {
    let n = a.len();
    if a.iter().any(|row| row.len() != n) || rhs.iter().any(|b| b.len() != n) {
        return Err(Error::Input("dimension mismatch in linear solve".into()));
    }
    let k = rhs.len();
    // Augmented rows [a | b_0 .. b_{k-1}].
    let mut m: Vec<Vec<F>> = (0..n)
        .map(|i| {
            let mut row = a[i].clone();
            row.extend(rhs.iter().map(|b| b[i].clone()));
            row
        })
        .collect();
    for col in 0..n {
        let mut pivot = None;
        let mut best = F::zero();
        for (r, row) in m.iter().enumerate().skip(col) {
            let mag = row[col].abs_val();
            if !row[col].is_zero() && (pivot.is_none() || mag > best) {
                pivot = Some(r);
                best = mag;
            }
        }
        let p = pivot.ok_or(Error::Singular)?;
        m.swap(col, p);
        let inv = F::one() / m[col][col].clone();
        for c in col..n + k {
            m[col][c] = m[col][c].mul_ref(&inv);
        }
        for r in 0..n {
            if r == col || m[r][col].is_zero() {
                continue;
            }
            let factor = m[r][col].clone();
            for c in col..n + k {
                let delta = factor.mul_ref(&m[col][c]);
                m[r][c] = m[r][c].sub_ref(&delta);
            }
        }
    }
    Ok((0..k)
        .map(|j| (0..n).map(|i| m[i][n + j].clone()).collect())
        .collect())
}

pub fn solve<F: Scalar>(a: &Matrix<F>, b: &[F]) -> Result<Vec<F>> {
    Ok(solve_many(a, &[b.to_vec()])?.remove(0))
}

pub fn mat_vec<F: Scalar>(a: &Matrix<F>, v: &[F]) -> Vec<F> {
    a.iter()
        .map(|row| {
            row.iter()
                .zip(v)
                .fold(F::zero(), |acc, (x, y)| acc.add_ref(&x.mul_ref(y)))
        })
        .collect()
}

/// `u^T a v`.
pub fn bilinear<F: Scalar>(u: &[F], a: &Matrix<F>, v: &[F]) -> F {
    mat_vec(a, v)
        .iter()
        .zip(u)
        .fold(F::zero(), |acc, (x, y)| acc.add_ref(&x.mul_ref(y)))
}
