//! Benchmark matrices and right-hand sides.
//!
//! Stencils are unscaled (no `1/h^2`); grids use x-fastest lexicographic
//! ordering.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sparse::{CsrMatrix, DenseMatrix, LinearOperator};

/// `tridiag(-1, 2, -1)` of size `n`.
pub fn poisson1d(n: usize) -> CsrMatrix {
    let mut t = Vec::with_capacity(3 * n);
    for i in 0..n {
        if i > 0 {
            t.push((i, i - 1, -1.0));
        }
        t.push((i, i, 2.0));
        if i + 1 < n {
            t.push((i, i + 1, -1.0));
        }
    }
    CsrMatrix::from_triplets(n, n, &t).expect("valid stencil")
}

/// 5-point Laplacian on an `m x m` interior grid.
pub fn poisson2d(m: usize) -> CsrMatrix {
    let n = m * m;
    let idx = |i: usize, j: usize| i + m * j;
    let mut t = Vec::with_capacity(5 * n);
    for j in 0..m {
        for i in 0..m {
            let r = idx(i, j);
            t.push((r, r, 4.0));
            if i > 0 {
                t.push((r, idx(i - 1, j), -1.0));
            }
            if i + 1 < m {
                t.push((r, idx(i + 1, j), -1.0));
            }
            if j > 0 {
                t.push((r, idx(i, j - 1), -1.0));
            }
            if j + 1 < m {
                t.push((r, idx(i, j + 1), -1.0));
            }
        }
    }
    CsrMatrix::from_triplets(n, n, &t).expect("valid stencil")
}

/// 7-point Laplacian on an `m^3` interior grid with `b = 1`.
pub fn poisson3d(m: usize) -> Result<(CsrMatrix, Vec<f64>)> {
    if m < 2 {
        return Err(Error::InvalidParameter(format!("poisson3d needs m >= 2, got {m}")));
    }
    let n = m * m * m;
    let idx = |i: usize, j: usize, k: usize| i + m * (j + m * k);
    let mut row_ptr = Vec::with_capacity(n + 1);
    let mut cols = Vec::with_capacity(7 * n);
    let mut vals = Vec::with_capacity(7 * n);
    row_ptr.push(0);
    for k in 0..m {
        for j in 0..m {
            for i in 0..m {
                // ascending column order
                let mut push = |c: usize, v: f64| {
                    cols.push(c);
                    vals.push(v);
                };
                if k > 0 {
                    push(idx(i, j, k - 1), -1.0);
                }
                if j > 0 {
                    push(idx(i, j - 1, k), -1.0);
                }
                if i > 0 {
                    push(idx(i - 1, j, k), -1.0);
                }
                push(idx(i, j, k), 6.0);
                if i + 1 < m {
                    push(idx(i + 1, j, k), -1.0);
                }
                if j + 1 < m {
                    push(idx(i, j + 1, k), -1.0);
                }
                if k + 1 < m {
                    push(idx(i, j, k + 1), -1.0);
                }
                row_ptr.push(cols.len());
            }
        }
    }
    let a = CsrMatrix::new(n, n, row_ptr, cols, vals)?;
    Ok((a, vec![1.0; n]))
}

/// Q1 stiffness of one square element for the constant tensor `k`, local
/// nodes ordered (0,0), (1,0), (0,1), (1,1). Independent of the element size.
fn q1_element(k: [[f64; 2]; 2]) -> [[f64; 4]; 4] {
    let g = 0.5 / 3f64.sqrt();
    let pts = [0.5 - g, 0.5 + g];
    let mut ke = [[0.0; 4]; 4];
    for &x in &pts {
        for &y in &pts {
            let grads = [[-(1.0 - y), -(1.0 - x)], [1.0 - y, -x], [-y, 1.0 - x], [y, x]];
            for a in 0..4 {
                let kg = [
                    k[0][0] * grads[a][0] + k[0][1] * grads[a][1],
                    k[1][0] * grads[a][0] + k[1][1] * grads[a][1],
                ];
                for b in 0..4 {
                    ke[a][b] += 0.25 * (kg[0] * grads[b][0] + kg[1] * grads[b][1]);
                }
            }
        }
    }
    ke
}

/// Rotated diffusion tensor `R diag(1, epsilon) R^T`.
pub fn aniso_tensor(epsilon: f64, angle: f64) -> [[f64; 2]; 2] {
    let (s, c) = angle.sin_cos();
    [[c * c + epsilon * s * s, (1.0 - epsilon) * c * s], [(1.0 - epsilon) * c * s, s * s + epsilon * c * c]]
}

/// Bilinear finite elements for `-div(K grad u) = exp(-100(x^2 + y^2))` on
/// `[-1, 1]^2` with `m x m` cells and homogeneous Dirichlet data on `y = -1`
/// (those rows are eliminated). The load uses centroid quadrature.
pub fn aniso2d_q1(m: usize, epsilon: f64, angle: f64) -> Result<(CsrMatrix, Vec<f64>)> {
    if m < 2 {
        return Err(Error::InvalidParameter(format!("aniso2d_q1 needs m >= 2, got {m}")));
    }
    if !(epsilon > 0.0) {
        return Err(Error::InvalidParameter(format!("epsilon must be positive, got {epsilon}")));
    }
    let ke = q1_element(aniso_tensor(epsilon, angle));
    let h = 2.0 / m as f64;
    let nx = m + 1;
    // unknowns are the nodes with iy >= 1
    let unknown = |ix: usize, iy: usize| -> Option<usize> { (iy >= 1).then(|| ix + nx * (iy - 1)) };
    let n = nx * m;
    let mut trip = Vec::with_capacity(16 * m * m);
    let mut b = vec![0.0; n];
    for ey in 0..m {
        for ex in 0..m {
            let nodes = [unknown(ex, ey), unknown(ex + 1, ey), unknown(ex, ey + 1), unknown(ex + 1, ey + 1)];
            let cx = -1.0 + (ex as f64 + 0.5) * h;
            let cy = -1.0 + (ey as f64 + 0.5) * h;
            let load = (-100.0 * (cx * cx + cy * cy)).exp() * h * h / 4.0;
            for a in 0..4 {
                let Some(ra) = nodes[a] else { continue };
                b[ra] += load;
                for bb in 0..4 {
                    if let Some(rb) = nodes[bb] {
                        trip.push((ra, rb, ke[a][bb]));
                    }
                }
            }
        }
    }
    Ok((CsrMatrix::from_triplets(n, n, &trip)?, b))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpectralDistribution {
    /// `linspace(1/N, 1, N)`
    #[serde(rename = "a")]
    Equispaced,
    /// `[1 - logspace(-8, -1, N/2), logspace(-8, -1, N/2)]`
    #[serde(rename = "b")]
    BoundaryAccumulating,
    /// `[logspace(-8, -1, N/2), logspace(1, pi, N/2)]`
    #[serde(rename = "c")]
    Gapped,
}

impl SpectralDistribution {
    pub const ALL: [Self; 3] = [Self::Equispaced, Self::BoundaryAccumulating, Self::Gapped];

    pub fn label(self) -> &'static str {
        match self {
            Self::Equispaced => "a",
            Self::BoundaryAccumulating => "b",
            Self::Gapped => "c",
        }
    }
}

/// `n` values from `10^p` to `10^q`, logarithmically spaced, endpoints
/// included.
pub fn logspace(p: f64, q: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![10f64.powf(q)],
        _ => (0..n).map(|i| 10f64.powf(p + (q - p) * i as f64 / (n - 1) as f64)).collect(),
    }
}

pub fn linspace(p: f64, q: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![q],
        _ => (0..n).map(|i| p + (q - p) * i as f64 / (n - 1) as f64).collect(),
    }
}

pub fn spectral_eigenvalues(n: usize, dist: SpectralDistribution) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::InvalidParameter("spectral size must be positive".into()));
    }
    if dist != SpectralDistribution::Equispaced && n % 2 != 0 {
        return Err(Error::InvalidParameter(format!("split distributions need even N, got {n}")));
    }
    let h = n / 2;
    Ok(match dist {
        SpectralDistribution::Equispaced => linspace(1.0 / n as f64, 1.0, n),
        SpectralDistribution::BoundaryAccumulating => {
            let l = logspace(-8.0, -1.0, h);
            l.iter().map(|v| 1.0 - v).chain(l.iter().copied()).collect()
        }
        SpectralDistribution::Gapped => {
            let mut d = logspace(-8.0, -1.0, h);
            d.extend(logspace(1.0, std::f64::consts::PI, h));
            d
        }
    })
}

/// Discrete sine basis `Q_ij = sqrt(2/(N+1)) sin(i j pi / (N+1))`.
pub fn sine_basis(n: usize) -> DenseMatrix {
    let s = (2.0 / (n + 1) as f64).sqrt();
    let w = std::f64::consts::PI / (n + 1) as f64;
    let data = (1..=n).flat_map(|i| (1..=n).map(move |j| s * ((i * j) as f64 * w).sin())).collect();
    DenseMatrix::from_row_major(n, n, data).expect("square")
}

/// `A = Q D Q^T`. Formed explicitly for `N <= 512`; larger sizes apply the
/// factors.
pub struct SpectralOperator {
    q: DenseMatrix,
    d: Vec<f64>,
    dense: Option<DenseMatrix>,
}

impl SpectralOperator {
    pub fn new(q: DenseMatrix, d: Vec<f64>) -> Self {
        let dense = (d.len() <= 512).then(|| form_qdqt(&q, &d));
        Self { q, d, dense }
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.d
    }

    pub fn to_dense(&self) -> DenseMatrix {
        self.dense.clone().unwrap_or_else(|| form_qdqt(&self.q, &self.d))
    }

    /// Row sums of absolute values, the ℓ1-Jacobi diagonal of `A`.
    pub fn l1_row_sums(&self) -> Vec<f64> {
        let n = self.d.len();
        let row = |i: usize, a: &DenseMatrix| a.row(i).iter().map(|v| v.abs()).sum::<f64>();
        match &self.dense {
            Some(a) => (0..n).map(|i| row(i, a)).collect(),
            None => {
                let a = form_qdqt(&self.q, &self.d);
                (0..n).map(|i| row(i, &a)).collect()
            }
        }
    }
}

fn form_qdqt(q: &DenseMatrix, d: &[f64]) -> DenseMatrix {
    let n = d.len();
    let mut qd = q.clone();
    for i in 0..n {
        for j in 0..n {
            qd[(i, j)] *= d[j];
        }
    }
    let mut a = qd.matmul(&q.transpose());
    a.symmetrize();
    a
}

impl LinearOperator for SpectralOperator {
    fn nrows(&self) -> usize {
        self.d.len()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        if let Some(a) = &self.dense {
            return a.apply(x, y);
        }
        let n = self.d.len();
        let mut t = vec![0.0; n];
        for i in 0..n {
            let mut s = 0.0;
            for j in 0..n {
                s += self.q[(j, i)] * x[j];
            }
            t[i] = s * self.d[i];
        }
        for i in 0..n {
            y[i] = self.q.row(i).iter().zip(&t).map(|(a, b)| a * b).sum();
        }
    }
}

/// Synthetic operator with prescribed spectrum and `b = A 1`.
pub fn spectral_synthetic(n: usize, dist: SpectralDistribution) -> Result<(SpectralOperator, Vec<f64>)> {
    if n > 2048 {
        return Err(Error::InvalidParameter(format!("spectral size limited to 2048, got {n}")));
    }
    let d = spectral_eigenvalues(n, dist)?;
    let op = SpectralOperator::new(sine_basis(n), d);
    let mut b = vec![0.0; n];
    op.apply(&vec![1.0; n], &mut b);
    Ok((op, b))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ProblemSpec {
    Poisson3d { m: usize },
    Aniso2d { m: usize, epsilon: f64, angle: f64 },
    Spectral { n: usize, distribution: SpectralDistribution },
}

impl ProblemSpec {
    /// Sparse matrix and right-hand side. Spectral problems are returned in
    /// dense-as-sparse form.
    pub fn build(&self) -> Result<(CsrMatrix, Vec<f64>)> {
        match *self {
            Self::Poisson3d { m } => poisson3d(m),
            Self::Aniso2d { m, epsilon, angle } => aniso2d_q1(m, epsilon, angle),
            Self::Spectral { n, distribution } => {
                let (op, b) = spectral_synthetic(n, distribution)?;
                Ok((CsrMatrix::from_dense(&op.to_dense()), b))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn poisson3d_smallest() {
        let (a, b) = poisson3d(2).unwrap();
        assert_eq!(a.nrows(), 8);
        assert_eq!(b, vec![1.0; 8]);
        for i in 0..8 {
            let (c, v) = a.row(i);
            assert_eq!(c.len(), 4);
            assert_eq!(a.get(i, i), 6.0);
            assert_eq!(v.iter().filter(|&&x| x == -1.0).count(), 3);
        }
    }

    #[test]
    fn poisson3d_structure() {
        for m in 2..=6 {
            let (a, _) = poisson3d(m).unwrap();
            assert_eq!(a.nnz(), 7 * m * m * m - 6 * m * m);
            assert!(a.is_symmetric(0.0));
            let y = a.spmv(&vec![1.0; a.nrows()]).unwrap();
            for (i, &s) in y.iter().enumerate() {
                let neighbors = a.row(i).0.len() - 1;
                assert_eq!(s, 6.0 - neighbors as f64);
            }
        }
        let (a, _) = poisson3d(4).unwrap();
        assert!(a.to_dense().sym_eigenvalues().unwrap()[0] > 0.0);
        assert!(poisson3d(1).is_err());
    }

    #[test]
    fn poisson3d_unit_vector_gives_column() {
        let (a, _) = poisson3d(2).unwrap();
        let mut e = vec![0.0; 8];
        e[1] = 1.0;
        let y = a.spmv(&e).unwrap();
        assert_eq!(y, vec![-1.0, 6.0, 0.0, -1.0, 0.0, -1.0, 0.0, 0.0]);
    }

    #[test]
    fn poisson_1d_2d() {
        let a = poisson1d(3);
        assert_eq!(a.spmv(&[1.0, 1.0, 1.0]).unwrap(), vec![1.0, 0.0, 1.0]);
        let a = poisson2d(4);
        assert_eq!(a.nnz(), 5 * 16 - 4 * 4);
        assert!(a.is_symmetric(0.0));
    }

    #[test]
    fn isotropic_q1_interior_stencil() {
        let m = 6;
        let (a, _) = aniso2d_q1(m, 1.0, 0.0).unwrap();
        let nx = m + 1;
        let node = |ix: usize, iy: usize| ix + nx * (iy - 1);
        let c = node(3, 3);
        assert!((a.get(c, c) - 8.0 / 3.0).abs() < 1e-14);
        for dy in -1i64..=1 {
            for dx in -1i64..=1 {
                if dx == 0 && dy == 0 {
                    continue;
                }
                let j = node((3 + dx) as usize, (3 + dy) as usize);
                assert!((a.get(c, j) + 1.0 / 3.0).abs() < 1e-14);
            }
        }
        assert_eq!(a.row(c).0.len(), 9);
    }

    #[test]
    fn rotation_invariances() {
        let (a0, b0) = aniso2d_q1(5, 100.0, 0.0).unwrap();
        let (api, bpi) = aniso2d_q1(5, 100.0, std::f64::consts::PI).unwrap();
        assert!(a0.add_scaled(-1.0, &api).unwrap().frobenius_norm() <= 1e-12 * a0.frobenius_norm());
        assert_eq!(b0, bpi);
        let (i0, _) = aniso2d_q1(5, 1.0, 0.0).unwrap();
        let (i4, _) = aniso2d_q1(5, 1.0, std::f64::consts::FRAC_PI_4).unwrap();
        assert!(i0.add_scaled(-1.0, &i4).unwrap().frobenius_norm() <= 1e-12);
    }

    #[test]
    fn anisotropic_is_spd() {
        let (a, b) = aniso2d_q1(8, 100.0, std::f64::consts::PI / 6.0).unwrap();
        assert_eq!(a.nrows(), 9 * 8);
        assert!(a.max_asymmetry() < 1e-12);
        assert!(a.to_dense().sym_eigenvalues().unwrap()[0] > 0.0);
        assert!(b.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn spectral_distributions() {
        assert_eq!(spectral_eigenvalues(4, SpectralDistribution::Equispaced).unwrap(), vec![0.25, 0.5, 0.75, 1.0]);
        let d = spectral_eigenvalues(4, SpectralDistribution::BoundaryAccumulating).unwrap();
        let want = [1.0 - 1e-8, 1.0 - 1e-1, 1e-8, 1e-1];
        for (u, v) in d.iter().zip(&want) {
            assert!((u - v).abs() < 1e-16);
        }
        let d = spectral_eigenvalues(4, SpectralDistribution::Gapped).unwrap();
        assert!((d[3] - 10f64.powf(std::f64::consts::PI)).abs() < 1e-10);
        assert!(spectral_eigenvalues(5, SpectralDistribution::Gapped).is_err());
    }

    #[test]
    fn sine_basis_is_orthogonal() {
        let q = sine_basis(64);
        let err = q.transpose().matmul(&q).sub(&DenseMatrix::identity(64)).frobenius_norm();
        assert!(err <= 1e-10);
    }

    #[test]
    fn spectral_operator_paths_agree() {
        let d = spectral_eigenvalues(16, SpectralDistribution::BoundaryAccumulating).unwrap();
        let q = sine_basis(16);
        let op = SpectralOperator::new(q.clone(), d.clone());
        let factored = SpectralOperator { q, d, dense: None };
        let x: Vec<f64> = (0..16).map(|i| (i as f64).cos()).collect();
        let (mut y1, mut y2) = (vec![0.0; 16], vec![0.0; 16]);
        op.apply(&x, &mut y1);
        factored.apply(&x, &mut y2);
        for (u, v) in y1.iter().zip(&y2) {
            assert!((u - v).abs() < 1e-13);
        }
        let (_, b) = spectral_synthetic(16, SpectralDistribution::Equispaced).unwrap();
        assert_eq!(b.len(), 16);
    }
}
