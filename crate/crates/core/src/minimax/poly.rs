//! Error polynomials of the smoother families and the numeric smoothing
//! factor `sup_{0 < t <= 1} t p(t)^2 / (1 - p(t)^2)`.

use crate::cheb::{self, ScaledChebParams};
use crate::error::{Error, Result};

/// A polynomial with `p(0) = 1`, evaluated on `[0, 1]`.
pub trait SmoothingPolynomial {
    fn eval(&self, t: f64) -> f64;

    /// `p'(0)`, when available. Used for the `t -> 0+` limit `1 / (2 |p'(0)|)`.
    fn slope_at_zero(&self) -> Option<f64> {
        None
    }
}

/// Adapts a closure to [`SmoothingPolynomial`].
pub struct FnPolynomial<F>(pub F);

impl<F: Fn(f64) -> f64> SmoothingPolynomial for FnPolynomial<F> {
    fn eval(&self, t: f64) -> f64 {
        (self.0)(t)
    }
}

/// The error polynomial `p_k` realized by each smoother family.
#[derive(Debug, Clone, PartialEq)]
pub enum ErrorPolynomial {
    /// `(1 - t)^k`
    JacobiPower(usize),
    /// `W_k(1 - 2t) / (2k + 1)`
    Cheb4(usize),
    /// `sum_j (beta_j - beta_{j+1}) / (2j + 1) W_j(1 - 2t)` with `beta_0 = 1`,
    /// `beta_{k+1} = 0`; the vector holds `beta_1..=beta_k`.
    OptCheb4(Vec<f64>),
    /// `tau_k^{[a,1]}(t)`
    ScaledCheb(ScaledChebParams),
}

impl ErrorPolynomial {
    pub fn degree(&self) -> usize {
        match self {
            Self::JacobiPower(k) | Self::Cheb4(k) => *k,
            Self::OptCheb4(beta) => beta.len(),
            Self::ScaledCheb(p) => p.k,
        }
    }

    /// Coefficients `c_j` of `p = sum_j c_j W_j(1 - 2t)` for the 4th-kind
    /// based families.
    pub fn cheb4_coefficients(&self) -> Option<Vec<f64>> {
        match self {
            Self::Cheb4(k) => {
                let mut c = vec![0.0; k + 1];
                c[*k] = 1.0 / (2 * k + 1) as f64;
                Some(c)
            }
            Self::OptCheb4(beta) => Some(opt_cheb4_coefficients(beta)),
            _ => None,
        }
    }
}

/// `c_j = (beta_j - beta_{j+1}) / (2j + 1)`, `j = 0..=k`.
pub fn opt_cheb4_coefficients(beta: &[f64]) -> Vec<f64> {
    let k = beta.len();
    let b = |j: usize| -> f64 {
        if j == 0 {
            1.0
        } else if j <= k {
            beta[j - 1]
        } else {
            0.0
        }
    };
    (0..=k).map(|j| (b(j) - b(j + 1)) / (2 * j + 1) as f64).collect()
}

/// Values `W_j(x)` and derivatives `W_j'(x)` for `j = 0..=k`.
fn cheb4_with_derivatives(k: usize, x: f64) -> (Vec<f64>, Vec<f64>) {
    let mut w = Vec::with_capacity(k + 1);
    let mut dw = Vec::with_capacity(k + 1);
    w.push(1.0);
    dw.push(0.0);
    if k >= 1 {
        w.push(2.0 * x + 1.0);
        dw.push(2.0);
    }
    for j in 1..k {
        w.push(2.0 * x * w[j] - w[j - 1]);
        dw.push(2.0 * w[j] + 2.0 * x * dw[j] - dw[j - 1]);
    }
    (w, dw)
}

impl SmoothingPolynomial for ErrorPolynomial {
    fn eval(&self, t: f64) -> f64 {
        match self {
            Self::JacobiPower(k) => (1.0 - t).powi(*k as i32),
            Self::ScaledCheb(p) => cheb::scaled_cheb_eval(p, t),
            Self::Cheb4(_) | Self::OptCheb4(_) => {
                let c = self.cheb4_coefficients().expect("4th-kind family");
                let (w, _) = cheb4_with_derivatives(c.len() - 1, 1.0 - 2.0 * t);
                c.iter().zip(&w).map(|(a, b)| a * b).sum()
            }
        }
    }

    fn slope_at_zero(&self) -> Option<f64> {
        Some(match self {
            Self::JacobiPower(k) => -(*k as f64),
            Self::ScaledCheb(p) => {
                if p.k == 0 {
                    0.0
                } else {
                    cheb::c1_coefficient(p.a, p.k)
                }
            }
            Self::Cheb4(_) | Self::OptCheb4(_) => {
                let c = self.cheb4_coefficients().expect("4th-kind family");
                let (_, dw) = cheb4_with_derivatives(c.len() - 1, 1.0);
                -2.0 * c.iter().zip(&dw).map(|(a, b)| a * b).sum::<f64>()
            }
        })
    }
}

/// Default grid size for [`evaluate_gamma_numeric`].
pub const GAMMA_GRID: usize = 20001;

/// Log-uniform grid of `n` points from `1e-8` to `1` inclusive.
pub fn log_grid(n: usize) -> Vec<f64> {
    assert!(n >= 2);
    let (lo, hi) = (-8.0f64, 0.0f64);
    (0..n).map(|i| 10f64.powf(lo + (hi - lo) * i as f64 / (n - 1) as f64)).collect()
}

/// Numeric smoothing factor of `p`: the maximum of `t p^2 / (1 - p^2)` over a
/// log-uniform grid of `(1e-8, 1]`, together with the `t -> 0+` limit when
/// the slope at zero is known.
pub fn evaluate_gamma_numeric<P: SmoothingPolynomial + ?Sized>(p: &P, grid_size: usize) -> Result<f64> {
    let mut best = 0.0f64;
    for t in log_grid(grid_size) {
        let v = p.eval(t);
        if v.abs() >= 1.0 {
            return Err(Error::OutsideUnitBand { x: t, value: v.abs() });
        }
        let v2 = v * v;
        best = best.max(t * v2 / (1.0 - v2));
    }
    if let Some(s) = p.slope_at_zero() {
        if s >= 0.0 {
            return Err(Error::OutsideUnitBand { x: 0.0, value: 1.0 });
        }
        best = best.max(1.0 / (2.0 * s.abs()));
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn richardson_step_has_factor_one_half() {
        let g = evaluate_gamma_numeric(&FnPolynomial(|t: f64| 1.0 - t), 20001).unwrap();
        assert!((g - 0.5).abs() < 1e-7);
        let g = evaluate_gamma_numeric(&ErrorPolynomial::JacobiPower(1), 2001).unwrap();
        assert_eq!(g, 0.5);
    }

    #[test]
    fn cheb4_factor_matches_closed_form() {
        for k in 1..=8 {
            let g = evaluate_gamma_numeric(&ErrorPolynomial::Cheb4(k), 20001).unwrap();
            let exact = 3.0 / (4.0 * (k * (k + 1)) as f64);
            assert!((g - exact).abs() <= 1e-6 * exact, "k={k}: {g} vs {exact}");
        }
    }

    #[test]
    fn slope_matches_finite_difference() {
        let polys = [
            ErrorPolynomial::JacobiPower(3),
            ErrorPolynomial::Cheb4(4),
            ErrorPolynomial::OptCheb4(vec![1.2, 0.9, 0.4]),
            ErrorPolynomial::ScaledCheb(ScaledChebParams::new(0.1, 5).unwrap()),
        ];
        for p in &polys {
            let h = 1e-6;
            let fd = (p.eval(h) - p.eval(-h)) / (2.0 * h);
            let s = p.slope_at_zero().unwrap();
            assert!((fd - s).abs() <= 1e-6 * s.abs(), "{p:?}");
            assert!((p.eval(0.0) - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn opt_cheb4_with_unit_betas_is_cheb4() {
        let k = 5;
        let p = ErrorPolynomial::OptCheb4(vec![1.0; k]);
        for i in 0..=10 {
            let t = i as f64 / 10.0;
            assert!((p.eval(t) - ErrorPolynomial::Cheb4(k).eval(t)).abs() < 1e-14);
        }
    }

    #[test]
    fn detects_leaving_the_band() {
        let r = evaluate_gamma_numeric(&FnPolynomial(|t: f64| 1.0 - 3.0 * t), 101);
        assert!(matches!(r, Err(Error::OutsideUnitBand { .. })));
    }
}
