//! Runtime smoothers: ℓ1-Jacobi sweeps and three polynomial accelerations of
//! ℓ1-Jacobi, plus a direct evaluation of each family's error polynomial used
//! as a test oracle.
//!
//! Every family performs exactly `k` operator applications per call,
//! including the initial residual `b - A x0`.

use serde::{Deserialize, Serialize};

use crate::cheb::ScaledChebParams;
use crate::error::{check_len, Error, Result};
use crate::krylov::Preconditioner;
use crate::minimax::{table, ErrorPolynomial};
use crate::sparse::{fused_update, CsrMatrix, LinearOperator};

/// ℓ1-Jacobi diagonal `M_i = a_ii + sum_{j != i} |a_ij|`.
#[derive(Debug, Clone, PartialEq)]
pub struct L1JacobiData {
    pub m_diag: Vec<f64>,
    inv: Vec<f64>,
}

impl L1JacobiData {
    pub fn from_diag(m_diag: Vec<f64>) -> Result<Self> {
        if let Some((row, &value)) = m_diag.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
            return Err(Error::NonPositiveDiagonal { row, value });
        }
        let inv = m_diag.iter().map(|m| 1.0 / m).collect();
        Ok(Self { m_diag, inv })
    }

    pub fn len(&self) -> usize {
        self.m_diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.m_diag.is_empty()
    }

    pub fn inverse(&self) -> &[f64] {
        &self.inv
    }
}

pub fn l1_jacobi_diag(a: &CsrMatrix) -> Result<L1JacobiData> {
    if a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch { expected: a.nrows(), found: a.ncols() });
    }
    let mut m = Vec::with_capacity(a.nrows());
    for i in 0..a.nrows() {
        let (cols, vals) = a.row(i);
        let mut diag = 0.0;
        let mut off = 0.0;
        for (&j, &v) in cols.iter().zip(vals) {
            if j == i {
                diag = v;
            } else {
                off += v.abs();
            }
        }
        if !(diag > 0.0) {
            return Err(Error::NonPositiveDiagonal { row: i, value: diag });
        }
        m.push(diag + off);
    }
    L1JacobiData::from_diag(m)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SmootherFamily {
    #[serde(rename = "l1jacobi")]
    L1JacobiSweeps,
    #[serde(rename = "cheb4")]
    Cheb4,
    #[serde(rename = "optcheb4")]
    OptCheb4,
    #[serde(rename = "optcheb1")]
    OptCheb1,
}

impl SmootherFamily {
    pub const ALL: [SmootherFamily; 4] = [Self::L1JacobiSweeps, Self::Cheb4, Self::OptCheb4, Self::OptCheb1];

    pub fn name(self) -> &'static str {
        match self {
            Self::L1JacobiSweeps => "l1jacobi",
            Self::Cheb4 => "cheb4",
            Self::OptCheb4 => "optcheb4",
            Self::OptCheb1 => "optcheb1",
        }
    }
}

impl std::str::FromStr for SmootherFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|f| f.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidParameter(format!("unknown smoother '{s}' (l1jacobi, cheb4, optcheb4, optcheb1)")))
    }
}

impl std::fmt::Display for SmootherFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolySmootherConfig {
    pub family: SmootherFamily,
    pub degree: usize,
    /// Interval endpoint (OptCheb1 only).
    pub a: Option<f64>,
    /// `beta_1..=beta_k` (OptCheb4 only).
    pub beta: Option<Vec<f64>>,
    /// Divisor applied to `M^{-1} A`; 1 for the ℓ1-Jacobi base.
    pub rho_scale: f64,
}

impl PolySmootherConfig {
    /// Configuration with parameters from the shipped tables. OptCheb4 at a
    /// degree without a table falls back to Cheb4.
    pub fn new(family: SmootherFamily, degree: usize) -> Result<Self> {
        if degree == 0 {
            return Err(Error::InvalidParameter("smoother degree must be at least 1".into()));
        }
        let mut cfg = Self { family, degree, a: None, beta: None, rho_scale: 1.0 };
        match family {
            SmootherFamily::OptCheb1 => cfg.a = Some(table::a_star_or_solve(degree)?),
            SmootherFamily::OptCheb4 => match table::beta_table(degree) {
                Some(t) => cfg.beta = Some(t.beta.clone()),
                None => {
                    log::warn!("no optimized 4th-kind coefficients for degree {degree}; using cheb4");
                    cfg.family = SmootherFamily::Cheb4;
                }
            },
            _ => {}
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.degree == 0 {
            return Err(Error::InvalidParameter("smoother degree must be at least 1".into()));
        }
        if !(self.rho_scale > 0.0) {
            return Err(Error::InvalidParameter(format!("rho_scale must be positive, got {}", self.rho_scale)));
        }
        match self.family {
            SmootherFamily::OptCheb1 => match self.a {
                Some(a) if a > 0.0 && a < 1.0 => {}
                other => return Err(Error::InvalidParameter(format!("optcheb1 needs a in (0, 1), got {other:?}"))),
            },
            SmootherFamily::OptCheb4 => match &self.beta {
                Some(b) if b.len() == self.degree => {}
                Some(b) => {
                    return Err(Error::InvalidParameter(format!(
                        "optcheb4 of degree {} needs {} coefficients, got {}",
                        self.degree,
                        self.degree,
                        b.len()
                    )))
                }
                None => return Err(Error::InvalidParameter("optcheb4 needs beta coefficients".into())),
            },
            _ => {}
        }
        Ok(())
    }

    /// The polynomial `p_k` with `e_k = p_k(M^{-1} A / rho_scale) e_0`.
    pub fn error_polynomial(&self) -> Result<ErrorPolynomial> {
        self.validate()?;
        Ok(match self.family {
            SmootherFamily::L1JacobiSweeps => ErrorPolynomial::JacobiPower(self.degree),
            SmootherFamily::Cheb4 => ErrorPolynomial::Cheb4(self.degree),
            SmootherFamily::OptCheb4 => ErrorPolynomial::OptCheb4(self.beta.clone().unwrap()),
            SmootherFamily::OptCheb1 => ErrorPolynomial::ScaledCheb(ScaledChebParams::new(self.a.unwrap(), self.degree)?),
        })
    }
}

/// Work vectors for [`smoother_apply_into`]. Contents are undefined between
/// calls.
#[derive(Debug, Clone, Default)]
pub struct SmootherScratch {
    r: Vec<f64>,
    z: Vec<f64>,
    d: Vec<f64>,
    s: Vec<f64>,
}

impl SmootherScratch {
    pub fn new(n: usize) -> Self {
        Self { r: vec![0.0; n], z: vec![0.0; n], d: vec![0.0; n], s: vec![0.0; n] }
    }

    fn ensure(&mut self, n: usize) {
        for v in [&mut self.r, &mut self.z, &mut self.d, &mut self.s] {
            v.resize(n, 0.0);
        }
    }
}

/// Applies one smoother step to `x` in place (`x` holds `x0` on entry).
pub fn smoother_apply_into<A: LinearOperator + ?Sized>(
    cfg: &PolySmootherConfig,
    a: &A,
    m: &L1JacobiData,
    b: &[f64],
    x: &mut [f64],
    scratch: &mut SmootherScratch,
) -> Result<()> {
    cfg.validate()?;
    let n = a.nrows();
    check_len(n, m.len())?;
    check_len(n, b.len())?;
    check_len(n, x.len())?;
    scratch.ensure(n);
    let SmootherScratch { r, z, d, s } = scratch;
    let minv = m.inverse();
    let scale = 1.0 / cfg.rho_scale;
    let k = cfg.degree;

    let residual = |x: &[f64], r: &mut [f64]| {
        a.apply(x, r);
        for (ri, bi) in r.iter_mut().zip(b) {
            *ri = bi - *ri;
        }
    };

    match cfg.family {
        SmootherFamily::L1JacobiSweeps => {
            for _ in 0..k {
                residual(x, r);
                for i in 0..n {
                    x[i] += scale * minv[i] * r[i];
                }
            }
        }
        SmootherFamily::Cheb4 | SmootherFamily::OptCheb4 => {
            let beta = cfg.beta.as_deref().filter(|_| cfg.family == SmootherFamily::OptCheb4);
            residual(x, r);
            z.iter_mut().for_each(|v| *v = 0.0);
            for i in 1..=k {
                let den = (2 * i + 1) as f64;
                let cz = (2.0 * i as f64 - 3.0) / den;
                let cr = (8.0 * i as f64 - 4.0) / den * scale;
                for j in 0..n {
                    z[j] = cz * z[j] + cr * minv[j] * r[j];
                }
                match beta {
                    Some(beta) => {
                        let bi = beta[i - 1];
                        for j in 0..n {
                            x[j] += bi * z[j];
                        }
                    }
                    None => {
                        for j in 0..n {
                            x[j] += z[j];
                        }
                    }
                }
                if i < k {
                    a.apply(z, s);
                    for j in 0..n {
                        r[j] -= s[j];
                    }
                }
            }
        }
        SmootherFamily::OptCheb1 => {
            let p = ScaledChebParams::new(cfg.a.unwrap(), k)?;
            let (theta, delta) = (p.theta, p.delta);
            let sigma1 = theta / delta;
            residual(x, r);
            for j in 0..n {
                r[j] *= scale * minv[j];
                d[j] = r[j] / theta;
                x[j] += d[j];
            }
            let mut rho_prev = 1.0 / sigma1;
            for _ in 1..k {
                a.apply(d, s);
                for j in 0..n {
                    s[j] *= scale * minv[j];
                }
                let rho = 1.0 / (2.0 * sigma1 - rho_prev);
                fused_update(rho, rho_prev, 2.0 * rho / delta, s, r, d, x)?;
                rho_prev = rho;
            }
        }
    }
    Ok(())
}

/// Allocating convenience wrapper: returns the smoothed iterate.
pub fn smoother_apply<A: LinearOperator + ?Sized>(
    cfg: &PolySmootherConfig,
    a: &A,
    m: &L1JacobiData,
    b: &[f64],
    x0: &[f64],
) -> Result<Vec<f64>> {
    let mut x = x0.to_vec();
    smoother_apply_into(cfg, a, m, b, &mut x, &mut SmootherScratch::new(a.nrows()))?;
    Ok(x)
}

/// `y = X v` with `X = alpha I + beta M^{-1} A`.
fn affine_apply<A: LinearOperator + ?Sized>(a: &A, minv: &[f64], alpha: f64, beta: f64, v: &[f64], y: &mut [f64]) {
    a.apply(v, y);
    for i in 0..v.len() {
        y[i] = alpha * v[i] + beta * minv[i] * y[i];
    }
}

/// Clenshaw summation of `sum_j c_j P_j(X) e0` for a basis with
/// `P_{j+1} = 2X P_j - P_{j-1}`, `P_0 = 1`; `first` selects `P_1 = X` (1st
/// kind) or `P_1 = 2X + 1` (4th kind).
fn clenshaw<A: LinearOperator + ?Sized>(
    a: &A,
    minv: &[f64],
    alpha: f64,
    beta: f64,
    coeffs: &[f64],
    fourth_kind: bool,
    e0: &[f64],
) -> Vec<f64> {
    let n = e0.len();
    let mut b1 = vec![0.0; n];
    let mut b2 = vec![0.0; n];
    let mut xb = vec![0.0; n];
    for j in (1..coeffs.len()).rev() {
        affine_apply(a, minv, alpha, beta, &b1, &mut xb);
        let next: Vec<f64> = (0..n).map(|i| coeffs[j] * e0[i] + 2.0 * xb[i] - b2[i]).collect();
        b2 = std::mem::replace(&mut b1, next);
    }
    affine_apply(a, minv, alpha, beta, &b1, &mut xb);
    (0..n)
        .map(|i| {
            if fourth_kind {
                coeffs[0] * e0[i] + 2.0 * xb[i] + b1[i] - b2[i]
            } else {
                coeffs[0] * e0[i] + xb[i] - b2[i]
            }
        })
        .collect()
}

/// Evaluates `p_k(M^{-1} A) e0` directly from the family's polynomial
/// coefficients. Reference for [`smoother_apply`].
pub fn smoother_error_oracle<A: LinearOperator + ?Sized>(
    a: &A,
    m: &L1JacobiData,
    cfg: &PolySmootherConfig,
    e0: &[f64],
) -> Result<Vec<f64>> {
    let n = a.nrows();
    check_len(n, e0.len())?;
    check_len(n, m.len())?;
    let poly = cfg.error_polynomial()?;
    let scale = 1.0 / cfg.rho_scale;
    let minv = m.inverse();
    Ok(match poly {
        ErrorPolynomial::JacobiPower(k) => {
            let mut e = e0.to_vec();
            let mut y = vec![0.0; n];
            for _ in 0..k {
                affine_apply(a, minv, 1.0, -scale, &e, &mut y);
                std::mem::swap(&mut e, &mut y);
            }
            e
        }
        ErrorPolynomial::Cheb4(_) | ErrorPolynomial::OptCheb4(_) => {
            // W_j(1 - 2T)
            let c = poly.cheb4_coefficients().unwrap();
            clenshaw(a, minv, 1.0, -2.0 * scale, &c, true, e0)
        }
        ErrorPolynomial::ScaledCheb(p) => {
            // T_k((theta - T)/delta) / sigma_k
            let sigma_k = p.sigmas()[p.k];
            let mut c = vec![0.0; p.k + 1];
            c[p.k] = 1.0 / sigma_k;
            clenshaw(a, minv, p.theta / p.delta, -scale / p.delta, &c, false, e0)
        }
    })
}

/// Power-iteration estimate of `rho(M^{-1} A)` using the `M`-weighted
/// Rayleigh quotient.
pub fn estimate_rho<A: LinearOperator + ?Sized>(a: &A, m: &L1JacobiData, iterations: usize) -> f64 {
    let n = a.nrows();
    let minv = m.inverse();
    let mut v = crate::amg::power_start(n);
    let mut w = vec![0.0; n];
    let mut est = 0.0;
    for _ in 0..iterations.max(1) {
        a.apply(&v, &mut w);
        // <v, A v> / <v, M v>
        let num: f64 = v.iter().zip(&w).map(|(a, b)| a * b).sum();
        let den: f64 = v.iter().zip(&m.m_diag).map(|(a, b)| a * a * b).sum();
        est = num / den;
        for i in 0..n {
            w[i] *= minv[i];
        }
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            break;
        }
        for i in 0..n {
            v[i] = w[i] / norm;
        }
    }
    est
}

/// A smoother used on its own as a preconditioner: `z = S(r)` from a zero
/// initial guess.
pub struct SmootherPreconditioner<'a, A: LinearOperator + ?Sized> {
    pub cfg: PolySmootherConfig,
    pub a: &'a A,
    pub m: L1JacobiData,
    scratch: SmootherScratch,
}

impl<'a, A: LinearOperator + ?Sized> SmootherPreconditioner<'a, A> {
    pub fn new(cfg: PolySmootherConfig, a: &'a A, m: L1JacobiData) -> Result<Self> {
        cfg.validate()?;
        check_len(a.nrows(), m.len())?;
        let scratch = SmootherScratch::new(a.nrows());
        Ok(Self { cfg, a, m, scratch })
    }
}

impl<A: LinearOperator + ?Sized> Preconditioner for SmootherPreconditioner<'_, A> {
    fn apply(&mut self, r: &[f64], z: &mut [f64]) {
        z.iter_mut().for_each(|v| *v = 0.0);
        smoother_apply_into(&self.cfg, self.a, &self.m, r, z, &mut self.scratch)
            .expect("configuration validated at construction");
    }
}
