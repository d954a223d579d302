//! Preconditioned conjugate gradients: the classical recurrence and the
//! flexible variant that orthogonalizes each direction against the previous
//! one.

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::sparse::{axpy, dot, norm2, LinearOperator};

/// `z = B r` for a symmetric positive definite `B`.
pub trait Preconditioner {
    fn apply(&mut self, r: &[f64], z: &mut [f64]);
}

pub struct IdentityPreconditioner;

impl Preconditioner for IdentityPreconditioner {
    fn apply(&mut self, r: &[f64], z: &mut [f64]) {
        z.copy_from_slice(r);
    }
}

impl<P: Preconditioner + ?Sized> Preconditioner for &mut P {
    fn apply(&mut self, r: &[f64], z: &mut [f64]) {
        (**self).apply(r, z)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KrylovVariant {
    #[serde(rename = "pcg")]
    Pcg,
    #[serde(rename = "fcg")]
    Fcg,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KrylovConfig {
    pub variant: KrylovVariant,
    pub tol: f64,
    pub itmax: usize,
    pub record_history: bool,
}

impl Default for KrylovConfig {
    fn default() -> Self {
        Self { variant: KrylovVariant::Fcg, tol: 1e-7, itmax: 1000, record_history: true }
    }
}

impl KrylovConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::InvalidParameter(format!("tol must be positive, got {}", self.tol)));
        }
        if self.itmax == 0 {
            return Err(Error::InvalidParameter("itmax must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub iterations: usize,
    pub converged: bool,
    pub final_relres: f64,
    /// Relative residuals, starting with the initial one.
    pub residual_history: Vec<f64>,
    pub spmv_count: usize,
    pub precond_count: usize,
    /// Set when `p^T A p <= 0` or `r^T z < 0` was encountered.
    pub breakdown: bool,
}

/// Solves `A x = b` from `x0`. Stops when `||b - A x|| / ||b|| <= tol`
/// (measured on the recursively updated residual) or after `itmax`
/// iterations. Breakdown ends the iteration and is flagged in the report.
pub fn solve<A, P>(a: &A, b: &[f64], precond: &mut P, cfg: &KrylovConfig, x0: &[f64]) -> Result<(Vec<f64>, SolveReport)>
where
    A: LinearOperator + ?Sized,
    P: Preconditioner + ?Sized,
{
    cfg.validate()?;
    let n = a.nrows();
    check_len(n, b.len())?;
    check_len(n, x0.len())?;

    let mut x = x0.to_vec();
    let mut r = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut q = vec![0.0; n];

    a.apply(&x, &mut r);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    let mut report = SolveReport {
        iterations: 0,
        converged: false,
        final_relres: 0.0,
        residual_history: Vec::new(),
        spmv_count: 1,
        precond_count: 0,
        breakdown: false,
    };
    let bnorm = norm2(b);
    if bnorm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        report.converged = true;
        return Ok((x, report));
    }
    let mut relres = norm2(&r) / bnorm;
    report.final_relres = relres;
    if cfg.record_history {
        report.residual_history.push(relres);
    }
    if relres <= cfg.tol {
        report.converged = true;
        return Ok((x, report));
    }

    let mut rho = 0.0;
    let mut pq_prev = 0.0;
    for it in 1..=cfg.itmax {
        precond.apply(&r, &mut z);
        report.precond_count += 1;
        match cfg.variant {
            KrylovVariant::Pcg => {
                let rho_new = dot(&r, &z);
                if !(rho_new >= 0.0) {
                    report.breakdown = true;
                    break;
                }
                if it == 1 {
                    p.copy_from_slice(&z);
                } else {
                    let beta = rho_new / rho;
                    for (pi, zi) in p.iter_mut().zip(&z) {
                        *pi = zi + beta * *pi;
                    }
                }
                rho = rho_new;
            }
            KrylovVariant::Fcg => {
                if it == 1 {
                    p.copy_from_slice(&z);
                } else {
                    // q still holds A p_prev
                    let beta = -dot(&z, &q) / pq_prev;
                    for (pi, zi) in p.iter_mut().zip(&z) {
                        *pi = zi + beta * *pi;
                    }
                }
            }
        }
        a.apply(&p, &mut q);
        report.spmv_count += 1;
        let pq = dot(&p, &q);
        if !(pq > 0.0) {
            report.breakdown = true;
            break;
        }
        let alpha = match cfg.variant {
            KrylovVariant::Pcg => rho / pq,
            KrylovVariant::Fcg => dot(&p, &r) / pq,
        };
        pq_prev = pq;
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &q, &mut r);
        report.iterations = it;
        relres = norm2(&r) / bnorm;
        report.final_relres = relres;
        if cfg.record_history {
            report.residual_history.push(relres);
        }
        if relres <= cfg.tol {
            report.converged = true;
            break;
        }
    }
    Ok((x, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::{CsrMatrix, DenseMatrix};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_spd(n: usize, seed: u64) -> DenseMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = DenseMatrix::from_row_major(n, n, (0..n * n).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
        let mut s = g.transpose().matmul(&g);
        for i in 0..n {
            s[(i, i)] += 0.1;
        }
        s
    }

    #[test]
    fn identity_converges_in_one_step() {
        let a = CsrMatrix::identity(5);
        let b = vec![1.0, -2.0, 3.0, 0.5, 4.0];
        for variant in [KrylovVariant::Pcg, KrylovVariant::Fcg] {
            let cfg = KrylovConfig { variant, tol: 1e-12, itmax: 10, record_history: true };
            let (x, rep) = solve(&a, &b, &mut IdentityPreconditioner, &cfg, &[0.0; 5]).unwrap();
            assert!(rep.converged);
            assert_eq!(rep.iterations, 1);
            assert_eq!(x, b);
            assert_eq!(rep.residual_history.len(), 2);
        }
    }

    #[test]
    fn finite_termination() {
        let s = random_spd(20, 3);
        let b: Vec<f64> = (0..20).map(|i| (i as f64).sin()).collect();
        let cfg = KrylovConfig { variant: KrylovVariant::Pcg, tol: 1e-12, itmax: 100, record_history: false };
        let (x, rep) = solve(&s, &b, &mut IdentityPreconditioner, &cfg, &[0.0; 20]).unwrap();
        assert!(rep.converged, "{rep:?}");
        assert!(rep.iterations <= 20 + 5, "{}", rep.iterations);
        let exact = s.cholesky_solve(&b).unwrap();
        let err: f64 = x.iter().zip(&exact).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        assert!(err < 1e-6 * norm2(&exact));
    }

    #[test]
    fn energy_error_decreases_monotonically() {
        let s = random_spd(30, 9);
        let b: Vec<f64> = (0..30).map(|i| 1.0 + (i % 3) as f64).collect();
        let exact = s.cholesky_solve(&b).unwrap();
        let mut prev = f64::INFINITY;
        for it in 1..=15 {
            let cfg = KrylovConfig { variant: KrylovVariant::Pcg, tol: 1e-300, itmax: it, record_history: false };
            let (x, _) = solve(&s, &b, &mut IdentityPreconditioner, &cfg, &[0.0; 30]).unwrap();
            let e: Vec<f64> = x.iter().zip(&exact).map(|(a, b)| a - b).collect();
            let ea = dot(&e, &s.matvec(&e)).sqrt();
            assert!(ea < prev);
            prev = ea;
        }
    }

    #[test]
    fn itmax_one_reports_not_converged() {
        let s = random_spd(10, 1);
        let cfg = KrylovConfig { variant: KrylovVariant::Fcg, tol: 1e-14, itmax: 1, record_history: true };
        let (_, rep) = solve(&s, &[1.0; 10], &mut IdentityPreconditioner, &cfg, &[0.0; 10]).unwrap();
        assert!(!rep.converged);
        assert_eq!(rep.iterations, 1);
        assert_eq!(rep.spmv_count, 2);
        assert_eq!(rep.precond_count, 1);
    }

    #[test]
    fn indefinite_matrix_breaks_down() {
        let a = CsrMatrix::from_diagonal(&[1.0, -1.0]);
        let cfg = KrylovConfig { variant: KrylovVariant::Pcg, tol: 1e-12, itmax: 10, record_history: false };
        let (_, rep) = solve(&a, &[1.0, 1.0], &mut IdentityPreconditioner, &cfg, &[0.0; 2]).unwrap();
        assert!(rep.breakdown);
        assert!(!rep.converged);
    }

    #[test]
    fn zero_rhs_gives_zero() {
        let a = CsrMatrix::identity(3);
        let (x, rep) =
            solve(&a, &[0.0; 3], &mut IdentityPreconditioner, &KrylovConfig::default(), &[1.0, 2.0, 3.0]).unwrap();
        assert!(rep.converged);
        assert_eq!(x, vec![0.0; 3]);
    }

    #[test]
    fn rejects_bad_config() {
        let a = CsrMatrix::identity(2);
        let cfg = KrylovConfig { tol: 0.0, ..KrylovConfig::default() };
        assert!(solve(&a, &[1.0; 2], &mut IdentityPreconditioner, &cfg, &[0.0; 2]).is_err());
        assert!(solve(&a, &[1.0; 3], &mut IdentityPreconditioner, &KrylovConfig::default(), &[0.0; 2]).is_err());
    }
}
