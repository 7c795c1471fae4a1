//! Linear solvers: Jacobi-preconditioned conjugate gradients for the IMEX
//! systems, and a banded Cholesky factorisation (optionally bordered by one
//! periodic node) for the one dimensional dual problems.

use nalgebra_sparse::CsrMatrix;

use crate::{Error, Result};

/// `y = A x` for a CSR matrix, accumulated row by row in fixed order.
pub fn spmv(a: &CsrMatrix<f64>, x: &[f64], y: &mut [f64]) {
    for (i, row) in a.row_iter().enumerate() {
        let mut s = 0.0;
        for (&j, &v) in row.col_indices().iter().zip(row.values()) {
            s += v * x[j];
        }
        y[i] = s;
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solve the SPD system `A x = b` with Jacobi-preconditioned CG, starting
/// from `x`. Converges when `|r| <= rel_tol * |b|`.
pub fn pcg(a: &CsrMatrix<f64>, b: &[f64], x: &mut [f64], rel_tol: f64, max_iter: usize) -> Result<usize> {
    let n = b.len();
    let mut diag = vec![1.0; n];
    for (i, row) in a.row_iter().enumerate() {
        for (&j, &v) in row.col_indices().iter().zip(row.values()) {
            if j == i {
                diag[i] = v;
            }
        }
    }
    if diag.iter().any(|&d| !(d > 0.0)) {
        return Err(Error::SingularOperator("non-positive diagonal entry".into()));
    }
    let bnorm = dot(b, b).sqrt();
    if bnorm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(0);
    }
    let mut r = vec![0.0; n];
    spmv(a, x, &mut r);
    for i in 0..n {
        r[i] = b[i] - r[i];
    }
    let mut z: Vec<f64> = r.iter().zip(&diag).map(|(r, d)| r / d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    for it in 0..max_iter {
        if dot(&r, &r).sqrt() <= rel_tol * bnorm {
            return Ok(it);
        }
        spmv(a, &p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::SingularOperator(format!(
                "operator not positive definite (p'Ap = {pap:e})"
            )));
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        for i in 0..n {
            z[i] = r[i] / diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    if dot(&r, &r).sqrt() <= rel_tol * bnorm {
        return Ok(max_iter);
    }
    Err(Error::SingularOperator(format!(
        "conjugate gradients did not converge in {max_iter} iterations"
    )))
}

/// Cholesky factor of a symmetric positive definite banded matrix with
/// `bw` sub-diagonals, stored row-wise as `l[i][bw - (i - j)]` for
/// `i - bw <= j <= i`.
#[derive(Clone, Debug)]
pub struct BandedCholesky {
    n: usize,
    bw: usize,
    l: Vec<f64>,
}

impl BandedCholesky {
    /// `entry(i, j)` must return `A[i][j]` for `j <= i`, `i - j <= bw`.
    pub fn factor(n: usize, bw: usize, entry: impl Fn(usize, usize) -> f64) -> Result<Self> {
        let w = bw + 1;
        let mut l = vec![0.0; n * w];
        for i in 0..n {
            let j0 = i.saturating_sub(bw);
            for j in j0..=i {
                let mut s = entry(i, j);
                let k0 = i.saturating_sub(bw).max(j.saturating_sub(bw));
                for k in k0..j {
                    s -= l[i * w + bw - (i - k)] * l[j * w + bw - (j - k)];
                }
                if i == j {
                    if !(s > 0.0) {
                        return Err(Error::SingularOperator(format!(
                            "banded matrix not positive definite at row {i}"
                        )));
                    }
                    l[i * w + bw] = s.sqrt();
                } else {
                    l[i * w + bw - (i - j)] = s / l[j * w + bw];
                }
            }
        }
        Ok(Self { n, bw, l })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let (n, bw, w) = (self.n, self.bw, self.bw + 1);
        let mut y = b.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for k in i.saturating_sub(bw)..i {
                s -= self.l[i * w + bw - (i - k)] * y[k];
            }
            y[i] = s / self.l[i * w + bw];
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in (i + 1)..(i + bw + 1).min(n) {
                s -= self.l[k * w + bw - (k - i)] * y[k];
            }
            y[i] = s / self.l[i * w + bw];
        }
        y
    }
}

/// SPD matrix that is banded except for one extra node (the last unknown)
/// coupled arbitrarily, solved through the Schur complement of that node.
#[derive(Clone, Debug)]
pub struct BorderedBanded {
    band: BandedCholesky,
    border: Vec<f64>,
    z: Vec<f64>,
    schur: f64,
}

impl BorderedBanded {
    /// `band_entry` describes the leading `n - 1` block; `border[i] = A[i][n-1]`
    /// for `i < n - 1`, `corner = A[n-1][n-1]`.
    pub fn factor(
        n: usize,
        bw: usize,
        band_entry: impl Fn(usize, usize) -> f64,
        border: Vec<f64>,
        corner: f64,
    ) -> Result<Self> {
        let band = BandedCholesky::factor(n - 1, bw, band_entry)?;
        let z = band.solve(&border);
        let schur = corner - dot(&border, &z);
        if !(schur > 0.0) {
            return Err(Error::SingularOperator("bordered Schur complement not positive".into()));
        }
        Ok(Self {
            band,
            border,
            z,
            schur,
        })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = b.len();
        let y = self.band.solve(&b[..n - 1]);
        let last = (b[n - 1] - dot(&self.border, &y)) / self.schur;
        let mut x: Vec<f64> = y.iter().zip(&self.z).map(|(y, z)| y - z * last).collect();
        x.push(last);
        x
    }
}
