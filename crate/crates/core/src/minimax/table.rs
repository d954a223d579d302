//! Precomputed parameter tables shipped with the crate.
//!
//! `data/optimal_params.csv` holds `a*_k` and `Lambda_k` for `k = 1..=20`;
//! `data/beta_tables.csv` holds the optimized 4th-kind coefficients for
//! `k = 1..=12`. Both are regenerated by `amgpoly optimize --write-tables`
//! and checked against fresh computations in the test suite.

use std::io::Write;
use std::sync::OnceLock;

use super::{BetaTable, OptimalParams};
use crate::error::{Error, Result};

const PARAMS_CSV: &str = include_str!("../../data/optimal_params.csv");
const BETA_CSV: &str = include_str!("../../data/beta_tables.csv");

pub const PARAMS_KMAX: usize = 20;
pub const BETA_KMAX: usize = 12;

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn rows(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines()
        .enumerate()
        .skip(1)
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| (i + 1, l.split(',').map(str::trim).collect()))
}

fn num<T: std::str::FromStr>(line: usize, s: &str) -> Result<T> {
    s.parse().map_err(|_| parse_err(line, format!("bad number '{s}'")))
}

/// Parses `k,a_star,lambda_k` rows.
pub fn parse_params(text: &str) -> Result<Vec<(usize, f64, f64)>> {
    rows(text)
        .map(|(line, f)| {
            if f.len() != 3 {
                return Err(parse_err(line, "expected k,a_star,lambda_k"));
            }
            Ok((num(line, f[0])?, num(line, f[1])?, num(line, f[2])?))
        })
        .collect()
}

/// Parses `k,gamma_value,converged,beta_1,...,beta_k` rows.
pub fn parse_betas(text: &str) -> Result<Vec<BetaTable>> {
    rows(text)
        .map(|(line, f)| {
            if f.len() < 4 {
                return Err(parse_err(line, "expected k,gamma_value,converged,beta..."));
            }
            let k: usize = num(line, f[0])?;
            if f.len() != 3 + k {
                return Err(parse_err(line, format!("degree {k} needs {k} coefficients")));
            }
            let beta = f[3..].iter().map(|s| num(line, s)).collect::<Result<Vec<f64>>>()?;
            Ok(BetaTable { k, gamma_value: num(line, f[1])?, converged: num(line, f[2])?, beta })
        })
        .collect()
}

fn params() -> &'static [(usize, f64, f64)] {
    static CELL: OnceLock<Vec<(usize, f64, f64)>> = OnceLock::new();
    CELL.get_or_init(|| parse_params(PARAMS_CSV).expect("shipped optimal_params.csv is well formed"))
}

fn betas() -> &'static [BetaTable] {
    static CELL: OnceLock<Vec<BetaTable>> = OnceLock::new();
    CELL.get_or_init(|| parse_betas(BETA_CSV).expect("shipped beta_tables.csv is well formed"))
}

/// Tabulated `a*_k`, if `k` is covered.
pub fn a_star(k: usize) -> Option<f64> {
    params().iter().find(|r| r.0 == k).map(|r| r.1)
}

/// Tabulated `Lambda_k`, if `k` is covered.
pub fn lambda(k: usize) -> Option<f64> {
    params().iter().find(|r| r.0 == k).map(|r| r.2)
}

/// `a*_k` from the table, solved on the fly for uncovered degrees.
pub fn a_star_or_solve(k: usize) -> Result<f64> {
    match a_star(k) {
        Some(a) => Ok(a),
        None => super::solve_a_star(k),
    }
}

pub fn beta_table(k: usize) -> Option<&'static BetaTable> {
    betas().iter().find(|t| t.k == k)
}

pub fn write_params<W: Write>(kmax: usize, mut w: W) -> Result<()> {
    writeln!(w, "k,a_star,lambda_k")?;
    for k in 1..=kmax {
        let p = OptimalParams::compute(k)?;
        writeln!(w, "{},{:.16e},{:.16e}", k, p.a_star, p.lambda_k)?;
    }
    Ok(())
}

pub fn write_betas<W: Write>(tables: &[BetaTable], mut w: W) -> Result<()> {
    writeln!(w, "k,gamma_value,converged,beta")?;
    for t in tables {
        write!(w, "{},{:.16e},{}", t.k, t.gamma_value, t.converged)?;
        for b in &t.beta {
            write!(w, ",{b:.16e}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::minimax::{evaluate_gamma_numeric, solve_a_star, ErrorPolynomial, SmoothingPolynomial};

    #[test]
    fn params_table_matches_fresh_solve() {
        assert_eq!(params().len(), PARAMS_KMAX);
        let mut buf = Vec::new();
        write_params(PARAMS_KMAX, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), PARAMS_CSV, "regenerate data/optimal_params.csv");
        for k in 1..=PARAMS_KMAX {
            assert_eq!(a_star(k).unwrap(), solve_a_star(k).unwrap());
        }
        assert!(a_star(21).is_none());
        assert!(a_star_or_solve(21).is_ok());
    }

    #[test]
    fn beta_tables_are_consistent() {
        assert_eq!(betas().len(), BETA_KMAX);
        for k in 1..=BETA_KMAX {
            let t = beta_table(k).unwrap();
            assert_eq!(t.beta.len(), k);
            assert!(t.converged);
            let p = ErrorPolynomial::OptCheb4(t.beta.clone());
            assert!((p.eval(0.0) - 1.0).abs() < 1e-10);
            let g = evaluate_gamma_numeric(&p, 20001).unwrap();
            assert!((g - t.gamma_value).abs() <= 1e-12 * g);
            assert!(g < crate::minimax::gamma_cheb4(k));
        }
    }

    #[test]
    fn parse_rejects_ragged_rows() {
        assert!(parse_betas("h\n2,0.1,true,1.0\n").is_err());
        assert!(parse_params("h\n1,0.3\n").is_err());
        let t = parse_betas("h\n1,0.3,true,1.3\n").unwrap();
        assert_eq!(t[0].beta, vec![1.3]);
    }
}
