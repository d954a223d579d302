//! Optimized 4th-kind coefficients.
//!
//! For a fixed target `gamma`, the constraint `t p(t)^2 / (1 - p(t)^2) <= gamma`
//! is equivalent to `|p(t)| <= s(t)` with `s = (1 + t/gamma)^{-1/2}`. Writing
//! `p(t) = 1 - t v(t)` with `v` of degree `k - 1` turns this into a band
//! `lo(t) <= v(t) <= hi(t)`. A discrete Remez exchange minimizes the weighted
//! band violation over the evaluation grid, and an outer bracketed root
//! search finds the smallest `gamma` whose violation is zero. The result is
//! finally re-expanded in the `W_j(1 - 2t) / (2j + 1)` basis.

use serde::{Deserialize, Serialize};

use super::poly::{evaluate_gamma_numeric, log_grid, ErrorPolynomial};
use super::{gamma_cheb4, root};
use crate::error::{Error, Result};
use crate::sparse::{lu_solve, DenseMatrix};

/// Grid size used for the optimization and for the reported `gamma_value`.
pub const BETA_GRID: usize = 20001;

const MAX_EXCHANGES: usize = 500;

/// Coefficients `beta_1..=beta_k` of the optimized 4th-kind smoother.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetaTable {
    pub k: usize,
    pub beta: Vec<f64>,
    pub gamma_value: f64,
    /// False when the exchange iteration hit its budget; `beta` is then the
    /// best iterate found.
    #[serde(default = "default_true")]
    pub converged: bool,
}

fn default_true() -> bool {
    true
}

impl BetaTable {
    pub fn polynomial(&self) -> ErrorPolynomial {
        ErrorPolynomial::OptCheb4(self.beta.clone())
    }
}

/// Basis `T_j(2t - 1)`, `j = 0..n`, evaluated at `t`.
fn shifted_cheb_row(n: usize, t: f64, out: &mut [f64]) {
    let x = 2.0 * t - 1.0;
    out[0] = 1.0;
    if n > 1 {
        out[1] = x;
    }
    for j in 2..n {
        out[j] = 2.0 * x * out[j - 1] - out[j - 2];
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Touch {
    Lower,
    Upper,
}

struct Band {
    lo: Vec<f64>,
    hi: Vec<f64>,
    weight: Vec<f64>,
}

fn band(gamma: f64, grid: &[f64]) -> Band {
    let n = grid.len();
    let (mut lo, mut hi, mut weight) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    for &t in grid {
        let y = t / gamma;
        let sq = (1.0 + y).sqrt();
        // (1 - s)/t without cancellation
        let l = 1.0 / (gamma * sq * (1.0 + sq));
        lo.push(l);
        if t > 0.0 {
            let s = 1.0 / sq;
            hi.push((1.0 + s) / t);
            weight.push(l.min(s / t));
        } else {
            hi.push(f64::INFINITY);
            weight.push(l);
        }
    }
    Band { lo, hi, weight }
}

struct Exchange {
    emax: f64,
    coeffs: Vec<f64>,
    reference: Vec<(usize, Touch)>,
    converged: bool,
}

fn initial_reference(k: usize, grid: &[f64]) -> Vec<(usize, Touch)> {
    let mut r = vec![(0, Touch::Lower)];
    for j in 1..=k {
        let target = 0.5 * (1.0 - (j as f64 * std::f64::consts::PI / k as f64).cos());
        let idx = (0..grid.len())
            .min_by(|&a, &b| (grid[a] - target).abs().total_cmp(&(grid[b] - target).abs()))
            .unwrap();
        r.push((idx, if j % 2 == 0 { Touch::Lower } else { Touch::Upper }));
    }
    r
}

fn remez(k: usize, gamma: f64, grid: &[f64], basis: &[f64], start: Vec<(usize, Touch)>) -> Result<Exchange> {
    let n = grid.len();
    let b = band(gamma, grid);
    let mut reference = start;
    let mut v = vec![0.0; n];
    let mut err = vec![0.0; n];
    let mut kind = vec![Touch::Lower; n];
    let mut best: Option<Exchange> = None;

    for _ in 0..MAX_EXCHANGES {
        let mut sys = DenseMatrix::zeros(k + 1, k + 1);
        let mut rhs = vec![0.0; k + 1];
        for (row, &(i, touch)) in reference.iter().enumerate() {
            for j in 0..k {
                sys[(row, j)] = basis[i * k + j];
            }
            match touch {
                Touch::Lower => {
                    sys[(row, k)] = b.weight[i];
                    rhs[row] = b.lo[i];
                }
                Touch::Upper => {
                    sys[(row, k)] = -b.weight[i];
                    rhs[row] = b.hi[i];
                }
            }
        }
        let sol = lu_solve(&sys, &rhs)?;
        let (coeffs, level) = (sol[..k].to_vec(), sol[k]);

        let mut emax = f64::NEG_INFINITY;
        for i in 0..n {
            v[i] = basis[i * k..(i + 1) * k].iter().zip(&coeffs).map(|(a, c)| a * c).sum();
            let dl = (b.lo[i] - v[i]) / b.weight[i];
            let du = (v[i] - b.hi[i]) / b.weight[i];
            if dl >= du {
                kind[i] = Touch::Lower;
                err[i] = dl;
            } else {
                kind[i] = Touch::Upper;
                err[i] = du;
            }
            emax = emax.max(err[i]);
        }

        // one candidate per run of constant touch type
        let mut cand: Vec<(usize, Touch)> = Vec::new();
        let mut start = 0;
        for i in 1..=n {
            if i == n || kind[i] != kind[start] {
                let j = (start..i).max_by(|&a, &c| err[a].total_cmp(&err[c])).unwrap();
                cand.push((j, kind[start]));
                start = i;
            }
        }
        while cand.len() > k + 1 {
            let first = err[cand[0].0];
            let last = err[cand[cand.len() - 1].0];
            let first_is_max = first >= emax;
            let last_is_max = last >= emax;
            if !first_is_max && (first < last || last_is_max) {
                cand.remove(0);
            } else {
                cand.pop();
            }
        }

        let improved = best.as_ref().map_or(true, |e| emax < e.emax);
        let done = emax - level <= 1e-12 * level.abs().max(1.0);
        let exhausted = cand.len() < k + 1;
        let state = Exchange {
            emax,
            coeffs,
            reference: if exhausted { reference.clone() } else { cand.clone() },
            converged: done,
        };
        if done || exhausted {
            return Ok(state);
        }
        if improved {
            best = Some(state);
        }
        reference = cand;
    }
    Ok(best.expect("at least one exchange"))
}

/// Finds `beta_1..=beta_k` minimizing the smoothing factor of the optimized
/// 4th-kind polynomial on a `BETA_GRID`-point log-uniform grid of `(1e-8, 1]`.
pub fn optimize_beta(k: usize) -> Result<BetaTable> {
    if !(1..=12).contains(&k) {
        return Err(Error::InvalidParameter(format!("optimize_beta supports 1 <= k <= 12, got {k}")));
    }
    let mut grid = vec![0.0];
    grid.extend(log_grid(BETA_GRID));
    let mut basis = vec![0.0; grid.len() * k];
    for (i, &t) in grid.iter().enumerate() {
        shifted_cheb_row(k, t, &mut basis[i * k..(i + 1) * k]);
    }

    let hi = gamma_cheb4(k);
    let lo = 0.25 * hi;
    let mut warm = initial_reference(k, &grid);
    let mut failure: Option<Error> = None;
    let objective = |g: f64, warm: &mut Vec<(usize, Touch)>, failure: &mut Option<Error>| -> f64 {
        match remez(k, g, &grid, &basis, warm.clone()) {
            Ok(ex) => {
                *warm = ex.reference.clone();
                ex.emax
            }
            Err(e) => {
                *failure = Some(e);
                f64::NAN
            }
        }
    };
    let gamma = root::brent(|g| objective(g, &mut warm, &mut failure), lo, hi, 1e-15 * hi);
    if let Some(e) = failure {
        return Err(e);
    }
    let gamma = gamma?;
    let ex = remez(k, gamma, &grid, &basis, initial_reference(k, &grid))?;

    // re-expand p(t) = 1 - t v(t) in q_j = W_j(1 - 2t)/(2j + 1) by collocation
    let nodes: Vec<f64> = (0..=k)
        .map(|i| 0.5 * (1.0 - ((2 * i + 1) as f64 * std::f64::consts::PI / (2 * (k + 1)) as f64).cos()))
        .collect();
    let mut sys = DenseMatrix::zeros(k + 1, k + 1);
    let mut rhs = vec![0.0; k + 1];
    let mut row = vec![0.0; k];
    for (i, &t) in nodes.iter().enumerate() {
        shifted_cheb_row(k, t, &mut row);
        let v: f64 = row.iter().zip(&ex.coeffs).map(|(a, c)| a * c).sum();
        rhs[i] = 1.0 - t * v;
        for j in 0..=k {
            sys[(i, j)] = crate::cheb::cheb4_smoother_poly(j, t);
        }
    }
    let alpha = lu_solve(&sys, &rhs)?;
    let beta: Vec<f64> = (1..=k).map(|j| alpha[j..].iter().sum()).collect();

    let gamma_value = evaluate_gamma_numeric(&ErrorPolynomial::OptCheb4(beta.clone()), BETA_GRID)?;
    if !ex.converged {
        log::warn!("optimize_beta(k={k}): exchange did not reach tolerance; reporting best iterate");
    }
    Ok(BetaTable { k, beta, gamma_value, converged: ex.converged })
}
