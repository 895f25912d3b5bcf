//! Dense exact linear algebra over a [`Field`].

use crate::error::{Error, Result};
use crate::scalars::Field;

pub type Matrix<F> = Vec<Vec<F>>;

pub fn identity<F: Field>(spec: &F::Spec, n: usize) -> Matrix<F> {
    (0..n).map(|i| (0..n).map(|j| if i == j { F::one(spec) } else { F::zero(spec) }).collect()).collect()
}

pub fn mat_mul<F: Field>(a: &Matrix<F>, b: &Matrix<F>, spec: &F::Spec) -> Matrix<F> {
    let n = a.len();
    let m = b.first().map_or(0, |r| r.len());
    let inner = b.len();
    (0..n)
        .map(|i| {
            (0..m)
                .map(|j| {
                    let mut s = F::zero(spec);
                    for k in 0..inner {
                        s = s.add(&a[i][k].mul(&b[k][j]));
                    }
                    s
                })
                .collect()
        })
        .collect()
}

pub fn transpose<F: Field>(a: &Matrix<F>) -> Matrix<F> {
    let rows = a.len();
    let cols = a.first().map_or(0, |r| r.len());
    (0..cols).map(|j| (0..rows).map(|i| a[i][j].clone()).collect()).collect()
}

/// Inverse by Gauss–Jordan elimination.
pub fn mat_inv<F: Field>(a: &Matrix<F>, spec: &F::Spec) -> Result<Matrix<F>> {
    let n = a.len();
    let mut m: Vec<Vec<F>> = a.clone();
    let mut inv = identity::<F>(spec, n);
    for col in 0..n {
        let pivot = (col..n).find(|&r| !m[r][col].is_zero()).ok_or(Error::SingularLinearPart)?;
        m.swap(col, pivot);
        inv.swap(col, pivot);
        let pinv = m[col][col].inv()?;
        for j in 0..n {
            m[col][j] = m[col][j].mul(&pinv);
            inv[col][j] = inv[col][j].mul(&pinv);
        }
        for r in 0..n {
            if r == col || m[r][col].is_zero() {
                continue;
            }
            let f = m[r][col].clone();
            for j in 0..n {
                let a = m[col][j].mul(&f);
                m[r][j] = m[r][j].sub(&a);
                let b = inv[col][j].mul(&f);
                inv[r][j] = inv[r][j].sub(&b);
            }
        }
    }
    Ok(inv)
}

/// Solution set of A·y = b: a particular solution and a nullspace basis,
/// or None when inconsistent.
pub fn solve_affine<F: Field>(a: &Matrix<F>, b: &[F], spec: &F::Spec) -> Option<(Vec<F>, Vec<Vec<F>>)> {
    let rows = a.len();
    let cols = a.first().map_or(0, |r| r.len());
    let mut m: Vec<Vec<F>> = a.iter().zip(b).map(|(r, v)| r.iter().cloned().chain(std::iter::once(v.clone())).collect()).collect();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..cols {
        let Some(p) = (row..rows).find(|&r| !m[r][col].is_zero()) else { continue };
        m.swap(row, p);
        let pinv = m[row][col].inv().ok()?;
        for j in 0..=cols {
            m[row][j] = m[row][j].mul(&pinv);
        }
        for r in 0..rows {
            if r == row || m[r][col].is_zero() {
                continue;
            }
            let f = m[r][col].clone();
            for j in 0..=cols {
                let t = m[row][j].mul(&f);
                m[r][j] = m[r][j].sub(&t);
            }
        }
        pivots.push(col);
        row += 1;
        if row == rows {
            break;
        }
    }
    if m[row..].iter().any(|r| !r[cols].is_zero()) {
        return None;
    }
    let mut x = vec![F::zero(spec); cols];
    for (r, &c) in pivots.iter().enumerate() {
        x[c] = m[r][cols].clone();
    }
    let mut null = Vec::new();
    for free in (0..cols).filter(|c| !pivots.contains(c)) {
        let mut v = vec![F::zero(spec); cols];
        v[free] = F::one(spec);
        for (r, &c) in pivots.iter().enumerate() {
            v[c] = m[r][free].neg();
        }
        null.push(v);
    }
    Some((x, null))
}

/// The standard symplectic form J with J_ij = ω_ij = δ_{i,n+j} − δ_{i+n,j}.
pub fn symplectic_form<F: Field>(spec: &F::Spec, n: usize) -> Matrix<F> {
    let mut j = vec![vec![F::zero(spec); 2 * n]; 2 * n];
    for i in 0..n {
        j[n + i][i] = F::one(spec);
        j[i][n + i] = F::from_i64(spec, -1);
    }
    j
}

/// Aᵀ J A = J.
pub fn is_symplectic<F: Field>(a: &Matrix<F>, spec: &F::Spec) -> bool {
    let m = a.len();
    if m % 2 != 0 || a.iter().any(|r| r.len() != m) {
        return false;
    }
    let j = symplectic_form::<F>(spec, m / 2);
    mat_mul(&mat_mul(&transpose(a), &j, spec), a, spec) == j
}
