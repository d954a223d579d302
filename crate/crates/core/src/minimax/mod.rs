//! Offline optimization of smoother parameters: the optimal interval endpoint
//! `a*_k` of the scaled 1st-kind polynomial, its smoothing factor `Lambda_k`,
//! the closed-form bounds on both, the 4th-kind baseline, and the optimized
//! 4th-kind coefficients.

pub mod beta;
pub mod poly;
pub mod root;
pub mod table;

use std::io::Write;

use serde::{Deserialize, Serialize};

pub use beta::{optimize_beta, BetaTable};
pub use poly::{evaluate_gamma_numeric, ErrorPolynomial, FnPolynomial, SmoothingPolynomial};

use crate::cheb::half_inverse_slope;
use crate::error::{Error, Result};

/// `8k(1-x^2)^{2k} + x[(1-x)^{4k} - (1+x)^{4k}]` divided by `(1+x)^{4k}`.
/// Same sign as the unscaled expression, free of underflow for large `k`.
pub fn phi(k: usize, x: f64) -> f64 {
    let r = (1.0 - x) / (1.0 + x);
    let r2k = r.powi(2 * k as i32);
    8.0 * k as f64 * r2k + x * (r2k * r2k - 1.0)
}

/// The unscaled expression, for comparison at small `k`.
pub fn phi_literal(k: usize, x: f64) -> f64 {
    let k = k as i32;
    8.0 * k as f64 * (1.0 - x * x).powi(2 * k) + x * ((1.0 - x).powi(4 * k) - (1.0 + x).powi(4 * k))
}

/// Optimal interval endpoint `a*_k`: the square of the unique root of
/// [`phi`] in `(0, 1)`.
pub fn solve_a_star(k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::InvalidParameter("degree must be at least 1".into()));
    }
    let x = root::brent(|x| phi(k, x), 1e-8, 1.0 - 1e-8, 1e-15)?;
    Ok(x * x)
}

/// Value of the right branch, `tau(1)^2 / (1 - tau(1)^2) = 1 / (sigma_k^2 - 1)`,
/// written as `1 / sinh^2(k L)` with `L = 2 atanh(sqrt(a))`.
pub fn right_branch(k: usize, a: f64) -> f64 {
    let s = (k as f64 * 2.0 * a.sqrt().atanh()).sinh();
    1.0 / (s * s)
}

/// Smoothing factor of `tau_k^{[a,1]}`: the larger of the `x -> 0+` limit
/// `1/(2|c_1|)` and the value at `x = 1`.
pub fn lambda_of(k: usize, a: f64) -> Result<f64> {
    if !(a > 0.0 && a < 1.0) || k == 0 {
        return Err(Error::InvalidParameter(format!("lambda_of needs k >= 1 and a in (0, 1), got k={k}, a={a}")));
    }
    Ok(half_inverse_slope(k, a).max(right_branch(k, a)))
}

/// Closed-form bounds `(a_lower, a_upper, lam_lower, lam_upper)` for `k >= 3`.
pub fn theorem_bounds(k: usize) -> Result<(f64, f64, f64, f64)> {
    if k < 3 {
        return Err(Error::InvalidParameter(format!("bounds hold for k >= 3, got {k}")));
    }
    let kf = k as f64;
    let l = kf.ln();
    let k2 = kf * kf;
    Ok((l * l / (9.0 * k2), l * l / k2, l / (6.0 * k2), 1.03 * l / (2.0 * k2)))
}

/// Smoothing factor of the plain 4th-kind smoother, `3 / (4k(k+1))`.
pub fn gamma_cheb4(k: usize) -> f64 {
    3.0 / (4.0 * (k * (k + 1)) as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimalParams {
    pub k: usize,
    pub a_star: f64,
    pub lambda_k: f64,
    pub a_lower: Option<f64>,
    pub a_upper: Option<f64>,
    pub lam_lower: Option<f64>,
    pub lam_upper: Option<f64>,
}

impl OptimalParams {
    /// Solves for `a*_k` and evaluates everything derived from it.
    pub fn compute(k: usize) -> Result<Self> {
        let a_star = solve_a_star(k)?;
        let lambda_k = lambda_of(k, a_star)?;
        let b = theorem_bounds(k).ok();
        Ok(Self {
            k,
            a_star,
            lambda_k,
            a_lower: b.map(|b| b.0),
            a_upper: b.map(|b| b.1),
            lam_lower: b.map(|b| b.2),
            lam_upper: b.map(|b| b.3),
        })
    }
}

pub const EXPORT_HEADER: &str = "k,a_star,lambda_k,gamma_cheb4,gamma_opt4,a_lower,a_upper,lam_lower,lam_upper";

fn opt_cell(v: Option<f64>) -> String {
    v.map(|v| format!("{v:.16e}")).unwrap_or_default()
}

/// Writes the parameter table for `k = 1..=kmax`. `gamma_opt4` comes from
/// the shipped coefficient tables and is empty where none exists.
pub fn export_csv<W: Write>(kmax: usize, mut w: W) -> Result<()> {
    writeln!(w, "{EXPORT_HEADER}")?;
    for k in 1..=kmax {
        let p = OptimalParams::compute(k)?;
        let g4 = table::beta_table(k).map(|t| t.gamma_value);
        writeln!(
            w,
            "{},{:.16e},{:.16e},{:.16e},{},{},{},{},{}",
            k,
            p.a_star,
            p.lambda_k,
            gamma_cheb4(k),
            opt_cell(g4),
            opt_cell(p.a_lower),
            opt_cell(p.a_upper),
            opt_cell(p.lam_lower),
            opt_cell(p.lam_upper)
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cheb::{scaled_cheb_eval, ScaledChebParams};

    #[test]
    fn phi_examples() {
        assert!(phi(1, 1.0 / 3f64.sqrt()).abs() <= 1e-12);
        assert!(phi(1, 0.1) > 0.0);
        assert!(phi(1, 0.9) < 0.0);
    }

    #[test]
    fn phi_scaling_preserves_sign() {
        for k in 1..=12 {
            for i in 1..100 {
                let x = i as f64 / 100.0;
                let (s, l) = (phi(k, x), phi_literal(k, x));
                assert!(s == 0.0 || l == 0.0 || s.signum() == l.signum(), "k={k} x={x}");
            }
        }
    }

    #[test]
    fn a_star_small_degrees() {
        assert!((solve_a_star(1).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!((solve_a_star(4).unwrap() - 0.0820780659590383).abs() < 1e-12);
        assert!((solve_a_star(8).unwrap() - 0.0328701017544880).abs() < 1e-12);
        assert!(solve_a_star(30).is_ok());
    }

    #[test]
    fn lambda_degree_one_is_analytic() {
        assert!((lambda_of(1, 1.0 / 3.0).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        // left branch (1 + a)/4, right ((1-a)/(1+a))^2 / (1 - ...)
        let a: f64 = 0.2;
        let r = ((1.0f64 - a) / (1.0 + a)).powi(2);
        assert!((half_inverse_slope(1, a) - (1.0 + a) / 4.0).abs() < 1e-15);
        assert!((right_branch(1, a) - r / (1.0 - r)).abs() < 1e-14);
    }

    #[test]
    fn right_branch_matches_polynomial_at_one() {
        for k in 1..=10 {
            let a = solve_a_star(k).unwrap();
            let t = scaled_cheb_eval(&ScaledChebParams::new(a, k).unwrap(), 1.0);
            let lit = t * t / (1.0 - t * t);
            assert!((right_branch(k, a) / lit - 1.0).abs() < 1e-10, "k={k}");
        }
    }

    #[test]
    fn branches_equioscillate_at_optimum() {
        for k in 1..=20 {
            let a = solve_a_star(k).unwrap();
            let (l, r) = (half_inverse_slope(k, a), right_branch(k, a));
            assert!((l - r).abs() <= 1e-9 * l, "k={k}: {l} vs {r}");
        }
    }

    #[test]
    fn optimum_is_local_minimum_and_decreasing() {
        let mut prev = f64::INFINITY;
        for k in 1..=20 {
            let a = solve_a_star(k).unwrap();
            let lam = lambda_of(k, a).unwrap();
            assert!(lambda_of(k, 0.99 * a).unwrap() > lam);
            assert!(lambda_of(k, 1.01 * a).unwrap() > lam);
            assert!(lam < prev);
            prev = lam;
        }
    }

    #[test]
    fn first_kind_beats_baseline_at_low_degree() {
        for k in 1..=4 {
            let lam = lambda_of(k, solve_a_star(k).unwrap()).unwrap();
            assert!(lam < gamma_cheb4(k));
        }
        // the crossover sits between 4 and 5
        for k in 5..=12 {
            assert!(lambda_of(k, solve_a_star(k).unwrap()).unwrap() > gamma_cheb4(k));
        }
    }

    #[test]
    fn bound_examples() {
        let (al, au, _, _) = theorem_bounds(3).unwrap();
        assert!((al - 0.0149006044544763).abs() < 1e-15);
        assert!((au - 0.134105440090287).abs() < 1e-14);
        assert!((theorem_bounds(4).unwrap().3 - 0.0446213497485465).abs() < 1e-15);
        assert!((theorem_bounds(10).unwrap().2 - 0.00383764182165674).abs() < 1e-16);
        assert!(theorem_bounds(2).is_err());
    }

    #[test]
    fn baseline_values() {
        assert_eq!(gamma_cheb4(1), 0.375);
        assert_eq!(gamma_cheb4(2), 0.125);
        assert_eq!(gamma_cheb4(5), 0.025);
    }

    #[test]
    fn numeric_gamma_agrees_with_lambda() {
        for k in 1..=8 {
            let a = solve_a_star(k).unwrap();
            let p = ErrorPolynomial::ScaledCheb(ScaledChebParams::new(a, k).unwrap());
            let g = evaluate_gamma_numeric(&p, 20001).unwrap();
            let lam = lambda_of(k, a).unwrap();
            assert!((g - lam).abs() <= 1e-6 * lam, "k={k}: {g} vs {lam}");
        }
    }

    #[test]
    fn export_schema() {
        let mut buf = Vec::new();
        export_csv(0, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), format!("{EXPORT_HEADER}\n"));
        let mut buf = Vec::new();
        export_csv(3, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let rows: Vec<&str> = text.lines().collect();
        assert_eq!(rows.len(), 4);
        let first: Vec<&str> = rows[1].split(',').collect();
        assert_eq!(first.len(), 9);
        assert_eq!(first[5], "");
        let a: f64 = first[1].parse().unwrap();
        assert!((a - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(rows[3].split(',').filter(|c| c.is_empty()).count(), 0);
    }
}
