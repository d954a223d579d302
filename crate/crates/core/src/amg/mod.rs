//! Aggregation AMG: coarsening, smoothed prolongators, Galerkin operators,
//! the symmetric V-cycle, and a dense two-level bound oracle.

pub mod aggregate;
pub mod twolevel;

use serde::{Deserialize, Serialize};

pub use aggregate::{matching_aggregate, sa_aggregate};
pub use twolevel::{two_level_constants, TwoLevelReport};

use crate::error::{check_len, Error, Result};
use crate::krylov::Preconditioner;
use crate::smoothers::{l1_jacobi_diag, smoother_apply_into, L1JacobiData, PolySmootherConfig, SmootherScratch};
use crate::sparse::{cholesky_substitute, CsrMatrix, DenseMatrix, LinearOperator};

/// Power iterations used for the prolongator damping estimate.
pub const LAMBDA_ITERATIONS: usize = 25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CoarseningKind {
    #[serde(rename = "sa")]
    SmoothedAggregation,
    #[serde(rename = "matching")]
    PairwiseMatching,
}

impl std::str::FromStr for CoarseningKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sa" | "smoothed_aggregation" => Ok(Self::SmoothedAggregation),
            "matching" | "pairwise_matching" => Ok(Self::PairwiseMatching),
            _ => Err(Error::InvalidParameter(format!("unknown coarsening '{s}' (sa, matching)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoarseningConfig {
    pub kind: CoarseningKind,
    pub strength_theta: f64,
    pub matching_sweeps: usize,
    pub prolongator_smoothing: bool,
}

impl CoarseningConfig {
    pub fn smoothed_aggregation() -> Self {
        Self { kind: CoarseningKind::SmoothedAggregation, strength_theta: 0.01, matching_sweeps: 3, prolongator_smoothing: true }
    }

    pub fn matching() -> Self {
        Self { kind: CoarseningKind::PairwiseMatching, ..Self::smoothed_aggregation() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.strength_theta) {
            return Err(Error::InvalidParameter(format!("strength_theta must be in [0, 1), got {}", self.strength_theta)));
        }
        if self.matching_sweeps == 0 {
            return Err(Error::InvalidParameter("matching_sweeps must be at least 1".into()));
        }
        Ok(())
    }

    /// Tentative (piecewise-constant) prolongator for `a`.
    pub fn tentative(&self, a: &CsrMatrix) -> Result<CsrMatrix> {
        match self.kind {
            CoarseningKind::SmoothedAggregation => Ok(sa_aggregate(a, self.strength_theta)),
            CoarseningKind::PairwiseMatching => matching_aggregate(a, self.matching_sweeps),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CoarseSolver {
    L1JacobiFixedSweeps { sweeps: usize },
    DenseDirect,
}

impl Default for CoarseSolver {
    fn default() -> Self {
        Self::L1JacobiFixedSweeps { sweeps: 30 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HierarchyLimits {
    pub max_levels: usize,
    pub min_coarse_size: usize,
}

impl Default for HierarchyLimits {
    fn default() -> Self {
        Self { max_levels: 10, min_coarse_size: 200 }
    }
}

/// `25` power iterations on `D^{-1} A`; returns the final `D`-weighted
/// Rayleigh quotient. The start vector is a fixed perturbation of all-ones:
/// on even-sized tensor grids all-ones has no component along the dominant
/// eigenvector.
pub fn estimate_lambda_max(a: &CsrMatrix, d: &[f64]) -> Result<f64> {
    let n = a.nrows();
    check_len(n, d.len())?;
    if let Some((row, &value)) = d.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
        return Err(Error::NonPositiveDiagonal { row, value });
    }
    let mut v = power_start(n);
    let mut w = vec![0.0; n];
    let mut est = 0.0;
    for _ in 0..LAMBDA_ITERATIONS {
        a.apply(&v, &mut w);
        let num: f64 = v.iter().zip(&w).map(|(x, y)| x * y).sum();
        let den: f64 = v.iter().zip(d).map(|(x, y)| x * x * y).sum();
        if den == 0.0 {
            break;
        }
        est = num / den;
        for i in 0..n {
            w[i] /= d[i];
        }
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            break;
        }
        for i in 0..n {
            v[i] = w[i] / norm;
        }
    }
    Ok(est)
}

/// Deterministic start vector for power iterations.
pub fn power_start(n: usize) -> Vec<f64> {
    (0..n).map(|i| 1.0 + 0.5 * (1.7 * i as f64 + 0.3).sin()).collect()
}

/// `(I - omega D^{-1} A) P_hat` with `D = diag(A)`.
pub fn smooth_prolongator(a: &CsrMatrix, p_hat: &CsrMatrix, omega: f64) -> Result<CsrMatrix> {
    let d = a.diagonal();
    if let Some((row, &value)) = d.iter().enumerate().find(|(_, v)| **v == 0.0) {
        return Err(Error::NonPositiveDiagonal { row, value });
    }
    if omega == 0.0 {
        return Ok(p_hat.clone());
    }
    let mut ap = a.matmul(p_hat)?;
    let scale: Vec<f64> = d.iter().map(|v| omega / v).collect();
    ap.scale_rows(&scale)?;
    p_hat.add_scaled(-1.0, &ap)
}

/// `P^T A P`.
pub fn galerkin_rap(a: &CsrMatrix, p: &CsrMatrix) -> Result<CsrMatrix> {
    check_len(a.ncols(), p.nrows())?;
    let ap = a.matmul(p)?;
    p.transpose().matmul(&ap)
}

#[derive(Debug, Clone)]
pub struct Level {
    pub a: CsrMatrix,
    /// Prolongator from this level to the next finer one; `None` on the finest.
    pub p: Option<CsrMatrix>,
    pub smoother: PolySmootherConfig,
    pub m: L1JacobiData,
    /// Number of aggregates formed when this level was coarsened from its
    /// parent (its own size); `None` on the finest.
    pub aggregates: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct AmgHierarchy {
    pub levels: Vec<Level>,
    pub coarse_solver: CoarseSolver,
    pub limits: HierarchyLimits,
    /// Coarsening stopped because the size stopped shrinking.
    pub stagnated: bool,
    coarse_factor: Option<DenseMatrix>,
}

impl AmgHierarchy {
    pub fn num_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn operator_complexity(&self) -> f64 {
        let fine = self.levels[0].a.nnz() as f64;
        self.levels.iter().map(|l| l.a.nnz() as f64).sum::<f64>() / fine
    }

    pub fn summary(&self) -> HierarchySummary {
        HierarchySummary {
            levels: self
                .levels
                .iter()
                .map(|l| LevelSummary {
                    size: l.a.nrows(),
                    nnz: l.a.nnz(),
                    aggregates: l.aggregates,
                    family: l.smoother.family.name().to_string(),
                    degree: l.smoother.degree,
                })
                .collect(),
            operator_complexity: self.operator_complexity(),
            coarse_solver: self.coarse_solver,
            stagnated: self.stagnated,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelSummary {
    pub size: usize,
    pub nnz: usize,
    pub aggregates: Option<usize>,
    pub family: String,
    pub degree: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HierarchySummary {
    pub levels: Vec<LevelSummary>,
    pub operator_complexity: f64,
    pub coarse_solver: CoarseSolver,
    pub stagnated: bool,
}

/// Builds levels until the coarse size is at most `min_coarse_size` or
/// `max_levels` is reached. Coarsening that leaves at least 95% of the rows
/// on two consecutive levels (or none at all) stops the build and sets
/// `stagnated`.
pub fn build_hierarchy(
    a: &CsrMatrix,
    coarsening: &CoarseningConfig,
    smoother: &PolySmootherConfig,
    limits: HierarchyLimits,
    coarse_solver: CoarseSolver,
) -> Result<AmgHierarchy> {
    coarsening.validate()?;
    smoother.validate()?;
    if a.nrows() != a.ncols() || a.nrows() == 0 {
        return Err(Error::DimensionMismatch { expected: a.nrows(), found: a.ncols() });
    }
    if limits.max_levels == 0 {
        return Err(Error::InvalidParameter("max_levels must be at least 1".into()));
    }
    let mut levels =
        vec![Level { a: a.clone(), p: None, smoother: smoother.clone(), m: l1_jacobi_diag(a)?, aggregates: None }];
    let mut stagnated = false;
    let mut slow = 0;
    while levels.len() < limits.max_levels {
        let fine = &levels.last().unwrap().a;
        let n = fine.nrows();
        if n <= limits.min_coarse_size {
            break;
        }
        let p_hat = coarsening.tentative(fine)?;
        let nc = p_hat.ncols();
        if nc == n || nc == 0 {
            stagnated = true;
            break;
        }
        if nc as f64 >= 0.95 * n as f64 {
            slow += 1;
        } else {
            slow = 0;
        }
        let p = if coarsening.prolongator_smoothing {
            let d = fine.diagonal();
            let lambda = estimate_lambda_max(fine, &d)?;
            smooth_prolongator(fine, &p_hat, 4.0 / (3.0 * lambda))?
        } else {
            p_hat
        };
        let ac = galerkin_rap(fine, &p)?;
        let m = l1_jacobi_diag(&ac)?;
        log::debug!("level {}: {} -> {} rows, nnz {}", levels.len(), n, nc, ac.nnz());
        levels.push(Level { a: ac, p: Some(p), smoother: smoother.clone(), m, aggregates: Some(nc) });
        if slow >= 2 {
            stagnated = true;
            break;
        }
    }
    let coarse_factor = match coarse_solver {
        CoarseSolver::DenseDirect => Some(levels.last().unwrap().a.to_dense().cholesky()?),
        CoarseSolver::L1JacobiFixedSweeps { sweeps } => {
            if sweeps == 0 {
                return Err(Error::InvalidParameter("coarse sweeps must be at least 1".into()));
            }
            None
        }
    };
    Ok(AmgHierarchy { levels, coarse_solver, limits, stagnated, coarse_factor })
}

fn coarse_solve(h: &AmgHierarchy, b: &[f64], x: &mut [f64]) {
    let level = h.levels.last().unwrap();
    match (&h.coarse_solver, &h.coarse_factor) {
        (CoarseSolver::DenseDirect, Some(l)) => x.copy_from_slice(&cholesky_substitute(l, b)),
        (CoarseSolver::L1JacobiFixedSweeps { sweeps }, _) => {
            let minv = level.m.inverse();
            let mut r = vec![0.0; b.len()];
            x.iter_mut().for_each(|v| *v = 0.0);
            for _ in 0..*sweeps {
                level.a.apply(x, &mut r);
                for i in 0..b.len() {
                    x[i] += minv[i] * (b[i] - r[i]);
                }
            }
        }
        _ => unreachable!("dense coarse factor is built with the hierarchy"),
    }
}

fn vcycle_level(h: &AmgHierarchy, l: usize, b: &[f64], x: &mut [f64]) {
    if l + 1 == h.levels.len() {
        coarse_solve(h, b, x);
        return;
    }
    let level = &h.levels[l];
    let n = b.len();
    let mut scratch = SmootherScratch::new(n);
    x.iter_mut().for_each(|v| *v = 0.0);
    smoother_apply_into(&level.smoother, &level.a, &level.m, b, x, &mut scratch).expect("validated smoother");
    let mut r = vec![0.0; n];
    level.a.apply(x, &mut r);
    for i in 0..n {
        r[i] = b[i] - r[i];
    }
    let p = h.levels[l + 1].p.as_ref().expect("coarse level has a prolongator");
    let rc = p.spmv_transpose(&r).expect("consistent prolongator");
    let mut xc = vec![0.0; rc.len()];
    vcycle_level(h, l + 1, &rc, &mut xc);
    p.apply(&xc, &mut r);
    for i in 0..n {
        x[i] += r[i];
    }
    smoother_apply_into(&level.smoother, &level.a, &level.m, b, x, &mut scratch).expect("validated smoother");
}

/// One symmetric V-cycle applied to `r` from a zero initial guess.
pub fn vcycle_apply(h: &AmgHierarchy, r: &[f64]) -> Result<Vec<f64>> {
    check_len(h.levels[0].a.nrows(), r.len())?;
    let mut x = vec![0.0; r.len()];
    vcycle_level(h, 0, r, &mut x);
    Ok(x)
}

impl Preconditioner for AmgHierarchy {
    fn apply(&mut self, r: &[f64], z: &mut [f64]) {
        vcycle_level(self, 0, r, z);
    }
}

impl Preconditioner for &AmgHierarchy {
    fn apply(&mut self, r: &[f64], z: &mut [f64]) {
        vcycle_level(self, 0, r, z);
    }
}
