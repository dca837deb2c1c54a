//! One-sided (Hestenes) Jacobi singular value decomposition.
//!
//! Columns of the working matrix are rotated pairwise until every pair is
//! orthogonal to machine precision. The column norms are then the singular
//! values, the normalized columns the left singular vectors, and the
//! accumulated rotations the right singular vectors. Sweeps run in a fixed
//! cyclic order, so the result is a deterministic function of the input.

use crate::error::{Error, Result};
use crate::linalg::{dot, norm, Matrix};

/// Singular values at or below this are treated as zero when counting rank.
pub const RANK_THRESHOLD: f64 = 1e-10;

const MAX_SWEEPS: usize = 100;

/// Full decomposition `A = U diag(sigma) V^T` with square orthogonal `U` and `V`.
#[derive(Debug, Clone, PartialEq)]
pub struct SvdResult {
    /// `m x m`
    pub u: Matrix,
    /// `min(m, n)` values, non-increasing.
    pub singular_values: Vec<f64>,
    /// `n x n`
    pub v: Matrix,
}

impl SvdResult {
    /// Number of singular values above [`RANK_THRESHOLD`].
    pub fn numerical_rank(&self) -> usize {
        self.singular_values
            .iter()
            .take_while(|&&s| s > RANK_THRESHOLD)
            .count()
    }

    /// `U diag(sigma) V^T`
    pub fn reconstruct(&self) -> Matrix {
        let (m, n) = (self.u.rows(), self.v.rows());
        let mut out = Matrix::zeros(m, n);
        for (l, &s) in self.singular_values.iter().enumerate() {
            if s == 0.0 {
                continue;
            }
            for i in 0..m {
                let us = self.u[(i, l)] * s;
                for j in 0..n {
                    out[(i, j)] += us * self.v[(j, l)];
                }
            }
        }
        out
    }

    /// `||A - U diag(sigma) V^T||_F`
    pub fn reconstruction_error(&self, a: &Matrix) -> f64 {
        let r = self.reconstruct();
        a.as_slice()
            .iter()
            .zip(r.as_slice())
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt()
    }
}

pub fn svd(a: &Matrix) -> Result<SvdResult> {
    let (m, n) = (a.rows(), a.cols());
    if m == 0 || n == 0 {
        return Err(Error::dim("SVD needs at least one row and one column"));
    }
    if !a.is_finite() {
        return Err(Error::Numerical("matrix has non-finite entries".into()));
    }
    if m >= n {
        let (u, s, v) = tall_svd(a)?;
        Ok(SvdResult {
            u,
            singular_values: s,
            v,
        })
    } else {
        // A^T = U' S V'^T  =>  A = V' S U'^T
        let (u_t, s, v_t) = tall_svd(&a.transpose())?;
        Ok(SvdResult {
            u: v_t,
            singular_values: s,
            v: u_t,
        })
    }
}

/// SVD of an `m x n` matrix with `m >= n`; returns `(U m x m, sigma n, V n x n)`.
fn tall_svd(a: &Matrix) -> Result<(Matrix, Vec<f64>, Matrix)> {
    let (m, n) = (a.rows(), a.cols());
    let mut work: Vec<Vec<f64>> = (0..n).map(|j| a.column(j)).collect();
    let mut rot: Vec<Vec<f64>> = (0..n)
        .map(|j| {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            e
        })
        .collect();

    let mut converged = n < 2;
    for _ in 0..MAX_SWEEPS {
        if converged {
            break;
        }
        let mut rotated = false;
        for p in 0..n - 1 {
            for q in p + 1..n {
                let alpha = dot(&work[p], &work[p]);
                let beta = dot(&work[q], &work[q]);
                let gamma = dot(&work[p], &work[q]);
                if gamma == 0.0 || gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate_pair(&mut work, p, q, c, s);
                rotate_pair(&mut rot, p, q, c, s);
            }
        }
        converged = !rotated;
    }
    if !converged {
        return Err(Error::Numerical(format!(
            "Jacobi SVD did not converge in {MAX_SWEEPS} sweeps"
        )));
    }

    let norms: Vec<f64> = work.iter().map(|c| norm(c)).collect();
    let mut order: Vec<usize> = (0..n).collect();
    // Stable sort keeps ties in column order.
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));

    let sigma: Vec<f64> = order.iter().map(|&j| norms[j]).collect();
    let v_cols: Vec<Vec<f64>> = order.iter().map(|&j| rot[j].clone()).collect();

    let sigma_max = sigma.first().copied().unwrap_or(0.0);
    let null_cutoff = sigma_max * (m.max(n) as f64) * f64::EPSILON;
    let mut u_cols: Vec<Vec<f64>> = Vec::with_capacity(m);
    for (pos, &j) in order.iter().enumerate() {
        if sigma[pos] <= null_cutoff || sigma[pos] == 0.0 {
            break;
        }
        u_cols.push(work[j].iter().map(|x| x / sigma[pos]).collect());
    }
    complete_basis(&mut u_cols, m);

    Ok((
        Matrix::from_columns(m, &u_cols)?,
        sigma,
        Matrix::from_columns(n, &v_cols)?,
    ))
}

fn rotate_pair(cols: &mut [Vec<f64>], p: usize, q: usize, c: f64, s: f64) {
    let (head, tail) = cols.split_at_mut(q);
    let (cp, cq) = (&mut head[p], &mut tail[0]);
    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
        let (xp, xq) = (*x, *y);
        *x = c * xp - s * xq;
        *y = s * xp + c * xq;
    }
}

/// Extends an orthonormal list to a basis of `R^dim`, each time adding the
/// coordinate vector with the largest component outside the current span.
fn complete_basis(cols: &mut Vec<Vec<f64>>, dim: usize) {
    while cols.len() < dim {
        let mut best: Option<(f64, Vec<f64>)> = None;
        for e in 0..dim {
            let mut r = vec![0.0; dim];
            r[e] = 1.0;
            // Two Gram-Schmidt passes.
            for _ in 0..2 {
                for c in cols.iter() {
                    let proj = dot(c, &r);
                    for (ri, ci) in r.iter_mut().zip(c) {
                        *ri -= proj * ci;
                    }
                }
            }
            let len = norm(&r);
            if best.as_ref().is_none_or(|(b, _)| len > *b) {
                best = Some((len, r));
            }
        }
        let (len, mut r) = best.expect("dim > 0");
        r.iter_mut().for_each(|x| *x /= len);
        cols.push(r);
    }
}
