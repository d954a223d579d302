//! Dense two-level oracle.
//!
//! With `T = A^{-1} - P A_c^{-1} P^T`, the approximation constant is
//! `C = lambda_max(M^{1/2} T A T M^{1/2})`, i.e. the smallest `C` with
//! `||(I - Pi) v||_M^2 <= C ||v||_A^2`. The smoothing factor `gamma` of the
//! smoother polynomial then bounds the two-grid error propagator
//! `E = G (I - Pi) G`, `G = p(M^{-1} A)`, by `||E||_A <= C / (C + 1/gamma)`.

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::minimax::{evaluate_gamma_numeric, poly::GAMMA_GRID};
use crate::smoothers::{smoother_error_oracle, L1JacobiData, PolySmootherConfig};
use crate::sparse::{cholesky_substitute, CsrMatrix, DenseMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoLevelReport {
    pub c: f64,
    pub gamma: f64,
    pub bound: f64,
    /// `||E||_A`
    pub e_norm: f64,
    pub e_norm_sq: f64,
}

impl TwoLevelReport {
    /// `bound - ||E||_A^2`; nonnegative when the squared check holds.
    pub fn margin_sq(&self) -> f64 {
        self.bound - self.e_norm_sq
    }

    pub fn margin(&self) -> f64 {
        self.bound - self.e_norm
    }
}

fn dense_inverse_spd(a: &DenseMatrix) -> Result<DenseMatrix> {
    let n = a.nrows();
    let l = a.cholesky()?;
    let mut inv = DenseMatrix::zeros(n, n);
    let mut e = vec![0.0; n];
    for j in 0..n {
        e.iter_mut().for_each(|v| *v = 0.0);
        e[j] = 1.0;
        inv.set_column(j, &cholesky_substitute(&l, &e));
    }
    inv.symmetrize();
    Ok(inv)
}

/// Computes `C`, `gamma`, the bound, and the measured `||E||_A` densely.
/// Intended for `n <= 2000`.
pub fn two_level_constants(
    a: &CsrMatrix,
    p: &CsrMatrix,
    m: &L1JacobiData,
    smoother: &PolySmootherConfig,
) -> Result<TwoLevelReport> {
    let n = a.nrows();
    check_len(n, p.nrows())?;
    check_len(n, m.len())?;
    if n > 2000 {
        return Err(Error::InvalidParameter(format!("dense two-level oracle limited to n <= 2000, got {n}")));
    }
    let ad = a.to_dense();
    if !ad.is_symmetric() {
        return Err(Error::NotSymmetric(ad.max_asymmetry()));
    }
    let pd = p.to_dense();
    let pt = pd.transpose();
    let mut ac = pt.matmul(&ad).matmul(&pd);
    ac.symmetrize();

    let a_inv = dense_inverse_spd(&ad)?;
    let coarse = pd.matmul(&dense_inverse_spd(&ac)?).matmul(&pt);
    let t = a_inv.sub(&coarse);

    // M^{1/2} T A T M^{1/2}
    let mut s = t.matmul(&ad).matmul(&t);
    let sq: Vec<f64> = m.m_diag.iter().map(|v| v.sqrt()).collect();
    for i in 0..n {
        for j in 0..n {
            s[(i, j)] *= sq[i] * sq[j];
        }
    }
    s.symmetrize();
    let c = s.sym_eigenvalues()?.last().copied().unwrap_or(0.0).max(0.0);

    let gamma = evaluate_gamma_numeric(&smoother.error_polynomial()?, GAMMA_GRID)?;
    let bound = if c == 0.0 { 0.0 } else { c / (c + 1.0 / gamma) };

    // G column by column, then E = G (I - P A_c^{-1} P^T A) G
    let mut g = DenseMatrix::zeros(n, n);
    let mut e = vec![0.0; n];
    for j in 0..n {
        e.iter_mut().for_each(|v| *v = 0.0);
        e[j] = 1.0;
        g.set_column(j, &smoother_error_oracle(a, m, smoother, &e)?);
    }
    let proj = DenseMatrix::identity(n).sub(&coarse.matmul(&ad));
    let big_e = g.matmul(&proj).matmul(&g);

    // ||E||_A = rho(L^{-1} (A E) L^{-T}) with A = L L^T
    let l = ad.cholesky()?;
    let ae = ad.matmul(&big_e);
    let mut w = DenseMatrix::zeros(n, n);
    for j in 0..n {
        w.set_column(j, &forward(&l, &ae.column(j)));
    }
    let wt = w.transpose();
    let mut z = DenseMatrix::zeros(n, n);
    for j in 0..n {
        z.set_column(j, &forward(&l, &wt.column(j)));
    }
    z.symmetrize();
    let eig = z.sym_eigenvalues()?;
    let e_norm = eig.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    Ok(TwoLevelReport { c, gamma, bound, e_norm, e_norm_sq: e_norm * e_norm })
}

fn forward(l: &DenseMatrix, b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut y = b.to_vec();
    for i in 0..n {
        let mut s = y[i];
        for k in 0..i {
            s -= l[(i, k)] * y[k];
        }
        y[i] = s / l[(i, i)];
    }
    y
}

/// Linear interpolation on a 1D grid of `n` points: coarse node `c` sits at
/// fine index `2c + 1` and spreads weight `1/2` to its two fine neighbours.
pub fn linear_interpolation_1d(n: usize) -> CsrMatrix {
    let nc = n / 2;
    let mut t = Vec::with_capacity(3 * nc);
    for c in 0..nc {
        let f = 2 * c + 1;
        t.push((f - 1, c, 0.5));
        t.push((f, c, 1.0));
        if f + 1 < n {
            t.push((f + 1, c, 0.5));
        }
    }
    CsrMatrix::from_triplets(n, nc, &t).expect("valid interpolation")
}

/// Kronecker product `P ⊗ P`, matching x-fastest ordering on tensor grids.
pub fn kron_self(p: &CsrMatrix) -> CsrMatrix {
    let (n, nc) = (p.nrows(), p.ncols());
    let mut t = Vec::new();
    for iy in 0..n {
        let (cy, vy) = p.row(iy);
        for ix in 0..n {
            let (cx, vx) = p.row(ix);
            for (&jy, &wy) in cy.iter().zip(vy) {
                for (&jx, &wx) in cx.iter().zip(vx) {
                    t.push((ix + n * iy, jx + nc * jy, wx * wy));
                }
            }
        }
    }
    CsrMatrix::from_triplets(n * n, nc * nc, &t).expect("valid product")
}
