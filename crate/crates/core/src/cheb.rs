//! Chebyshev polynomial families and the smoothing objective.
//!
//! Conventions: `T_k` (1st kind) with `T_1(x) = x`, `U_k` (2nd kind) with
//! `U_1(x) = 2x`, and the 4th-kind `W_k(cos t) = sin((k + 1/2) t) / sin(t/2)`
//! with `W_1(x) = 2x + 1`, so that `W_k(1) = 2k + 1`.
//! The scaled family `tau_k^{[a,1]}(x) = T_k((theta - x)/delta) / T_k(theta/delta)`
//! with `theta = (1 + a)/2`, `delta = (1 - a)/2` satisfies `tau(0) = 1` and is
//! bounded by one on `[a, 1]`.

use crate::error::{Error, Result};

/// 1st-kind Chebyshev polynomial `T_k(x)` for any real `x`.
pub fn cheb1_eval(k: usize, x: f64) -> f64 {
    if x.abs() <= 1.0 {
        let (mut prev, mut cur) = (1.0, x);
        if k == 0 {
            return 1.0;
        }
        for _ in 1..k {
            let next = 2.0 * x * cur - prev;
            prev = cur;
            cur = next;
        }
        cur
    } else {
        // T_k(x) = [(x + sqrt(x^2-1))^k + (x - sqrt(x^2-1))^k] / 2, written with
        // the product form of the small root to avoid cancellation.
        let ax = x.abs();
        let big = ax + (ax * ax - 1.0).sqrt();
        let small = 1.0 / big;
        let v = 0.5 * (big.powi(k as i32) + small.powi(k as i32));
        if x < 0.0 && k % 2 == 1 {
            -v
        } else {
            v
        }
    }
}

/// 2nd-kind Chebyshev polynomial `U_k(x)` by the three-term recurrence.
pub fn cheb2_eval(k: usize, x: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, 2.0 * x);
    if k == 0 {
        return 1.0;
    }
    for _ in 1..k {
        let next = 2.0 * x * cur - prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// 4th-kind Chebyshev polynomial `W_k(x)` on `[-1, 1]`.
pub fn cheb4_eval(k: usize, x: f64) -> Result<f64> {
    if !(x.abs() <= 1.0) {
        return Err(Error::InvalidParameter(format!("W_k is evaluated on [-1, 1], got x = {x}")));
    }
    Ok(cheb4_unchecked(k, x))
}

pub(crate) fn cheb4_unchecked(k: usize, x: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, 2.0 * x + 1.0);
    if k == 0 {
        return 1.0;
    }
    for _ in 1..k {
        let next = 2.0 * x * cur - prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// `W_k(1 - 2t) / (2k + 1)`: the 4th-kind smoothing polynomial, equal to one
/// at `t = 0`.
pub fn cheb4_smoother_poly(k: usize, t: f64) -> f64 {
    cheb4_unchecked(k, 1.0 - 2.0 * t) / (2 * k + 1) as f64
}

/// Parameters of the shifted and scaled polynomial `tau_k^{[a,1]}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledChebParams {
    pub a: f64,
    pub k: usize,
    pub theta: f64,
    pub delta: f64,
}

impl ScaledChebParams {
    pub fn new(a: f64, k: usize) -> Result<Self> {
        if !(0.0..1.0).contains(&a) {
            return Err(Error::InvalidParameter(format!("interval endpoint a = {a} outside [0, 1)")));
        }
        Ok(Self { a, k, theta: 0.5 * (1.0 + a), delta: 0.5 * (1.0 - a) })
    }

    /// Normalization constants `sigma_0..=sigma_k`, `sigma_j = T_j(theta/delta)`.
    pub fn sigmas(&self) -> Vec<f64> {
        let ratio = self.theta / self.delta;
        let mut s = Vec::with_capacity(self.k + 1);
        s.push(1.0);
        if self.k >= 1 {
            s.push(ratio);
        }
        for j in 1..self.k {
            let next = 2.0 * ratio * s[j] - s[j - 1];
            s.push(next);
        }
        s
    }
}

/// `tau_k^{[a,1]}(x)` by the centered three-term recurrence with sigma ratios.
pub fn scaled_cheb_eval(p: &ScaledChebParams, x: f64) -> f64 {
    if p.k == 0 {
        return 1.0;
    }
    let sig = p.sigmas();
    let y = (p.theta - x) / p.delta;
    let mut prev = 1.0;
    let mut cur = 1.0 - x / p.theta;
    for j in 1..p.k {
        let next = (sig[j] / sig[j + 1]) * (2.0 * y * cur - (sig[j - 1] / sig[j]) * prev);
        prev = cur;
        cur = next;
    }
    cur
}

/// Floating-point binomial coefficient by the multiplicative recurrence.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut c = 1.0;
    for i in 0..k {
        c = c * (n - i) as f64 / (i + 1) as f64;
    }
    c
}

/// `sum_{j=0}^{k} C(2k, 2j) x^j`
pub fn even_binomial_poly(k: usize, x: f64) -> f64 {
    (0..=k).rev().fold(0.0, |acc, j| acc * x + binomial(2 * k, 2 * j))
}

/// `sum_{j=0}^{k-1} C(2k, 2j+1) x^j`
pub fn odd_binomial_poly(k: usize, x: f64) -> f64 {
    (0..k).rev().fold(0.0, |acc, j| acc * x + binomial(2 * k, 2 * j + 1))
}

/// Linear coefficient `c_1 = d/dx tau_k^{[a,1]}(0)` in binomial form.
pub fn c1_coefficient(a: f64, k: usize) -> f64 {
    -(k as f64) * odd_binomial_poly(k, a) / even_binomial_poly(k, a)
}

/// The ratio `g(x) = even(x) / (2k odd(x))`, which equals `1 / (2|c_1|)` at `x = a`.
pub fn half_inverse_slope(k: usize, x: f64) -> f64 {
    even_binomial_poly(k, x) / (2.0 * k as f64 * odd_binomial_poly(k, x))
}

const POLE_GUARD: f64 = 1e-14;

/// Smoothing objective `x tau^2 / (1 - tau^2)` for `x` in `(0, 1]`.
pub fn smoothing_objective(p: &ScaledChebParams, x: f64) -> Result<f64> {
    if !(x > 0.0 && x <= 1.0) {
        return Err(Error::InvalidParameter(format!("objective is defined on (0, 1], got x = {x}")));
    }
    let t = scaled_cheb_eval(p, x);
    let den = 1.0 - t * t;
    if den.abs() <= POLE_GUARD {
        // Near zero, 1 - tau^2 ~ 2|c_1| x; the closeness is the expansion, not a pole.
        if p.k >= 1 && p.a > 0.0 && 2.0 * c1_coefficient(p.a, p.k).abs() * x <= 10.0 * POLE_GUARD {
            return Ok(limit_at_zero(p));
        }
        return Err(Error::Pole(x));
    }
    Ok(x * t * t / den)
}

/// `lim_{x -> 0+} x tau^2 / (1 - tau^2) = 1 / (2 |c_1|)`.
pub fn limit_at_zero(p: &ScaledChebParams) -> f64 {
    1.0 / (2.0 * c1_coefficient(p.a, p.k).abs())
}

/// Closed-form roots of the even and odd binomial polynomials:
/// `alpha_j = -tan^2((2j+1) pi / 4k)` for `j = 0..k` and
/// `delta_j = -tan^2(j pi / 2k)` for `j = 1..k`.
pub fn coefficient_roots(k: usize) -> (Vec<f64>, Vec<f64>) {
    use std::f64::consts::PI;
    let kf = k as f64;
    let alpha = (0..k).map(|j| -((2 * j + 1) as f64 * PI / (4.0 * kf)).tan().powi(2)).collect();
    let delta = (1..k).map(|j| -(j as f64 * PI / (2.0 * kf)).tan().powi(2)).collect();
    (alpha, delta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs().max(1e-300)
    }

    #[test]
    fn cheb1_examples() {
        assert_eq!(cheb1_eval(0, 3.7), 1.0);
        assert!((cheb1_eval(2, 0.5) + 0.5).abs() < 1e-15);
        assert!(close(cheb1_eval(3, 2.0), 26.0, 1e-14));
        assert!(close(cheb1_eval(3, -2.0), -26.0, 1e-14));
    }

    #[test]
    fn cheb1_matches_closed_form() {
        for k in 0..12 {
            for &x in &[-0.9, -0.3, 0.0, 0.42, 1.0] {
                let exact = (k as f64 * f64::acos(x)).cos();
                assert!((cheb1_eval(k, x) - exact).abs() <= 1e-13, "k={k} x={x}");
            }
            for &x in &[1.5, 7.0, 999.0] {
                let s = (x * x - 1.0f64).sqrt();
                let exact = 0.5 * ((x + s).powi(k as i32) + (x - s).powi(k as i32));
                assert!(close(cheb1_eval(k, x), exact, 1e-13), "k={k} x={x}");
            }
        }
    }

    #[test]
    fn cheb2_examples() {
        assert_eq!(cheb2_eval(0, 0.4), 1.0);
        assert!((cheb2_eval(1, 0.3) - 0.6).abs() < 1e-15);
        assert_eq!(cheb2_eval(2, 2.0), 15.0);
        let x: f64 = 3.0;
        let s = (x * x - 1.0).sqrt();
        for k in 0..8 {
            let exact = ((x + s).powi(k + 1) - (x - s).powi(k + 1)) / (2.0 * s);
            assert!(close(cheb2_eval(k as usize, x), exact, 1e-13));
        }
    }

    #[test]
    fn cheb4_examples_and_trigonometric_form() {
        assert_eq!(cheb4_eval(0, 0.2).unwrap(), 1.0);
        assert_eq!(cheb4_eval(1, 0.0).unwrap(), 1.0);
        assert_eq!(cheb4_eval(2, -1.0).unwrap(), 1.0);
        for k in 0..10 {
            assert_eq!(cheb4_eval(k, 1.0).unwrap(), (2 * k + 1) as f64);
            for &t in &[0.3, 1.1, 2.0, 2.9] {
                let exact = ((k as f64 + 0.5) * t).sin() / (t / 2.0).sin();
                assert!((cheb4_eval(k, t.cos()).unwrap() - exact).abs() <= 1e-12);
            }
        }
        assert!(cheb4_eval(2, 1.01).is_err());
    }

    #[test]
    fn params_validation_and_sigma_growth() {
        assert!(ScaledChebParams::new(1.0, 3).is_err());
        assert!(ScaledChebParams::new(-0.1, 3).is_err());
        let p = ScaledChebParams::new(0.2, 8).unwrap();
        assert!((p.theta + p.delta - 1.0).abs() < 1e-15);
        assert!((p.theta - p.delta - p.a).abs() < 1e-15);
        let s = p.sigmas();
        assert!(s.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn scaled_cheb_examples() {
        for &a in &[0.0, 0.05, 0.5] {
            for k in 0..8 {
                let p = ScaledChebParams::new(a, k).unwrap();
                assert!((scaled_cheb_eval(&p, 0.0) - 1.0).abs() <= 1e-12);
            }
        }
        let p = ScaledChebParams::new(1.0 / 3.0, 1).unwrap();
        assert!(scaled_cheb_eval(&p, 2.0 / 3.0).abs() < 1e-15);

        let p = ScaledChebParams::new(0.1805359927403007, 2).unwrap();
        let t = scaled_cheb_eval(&p, 1.0);
        let expect = 1.0 / cheb1_eval(2, (1.0 + p.a) / (1.0 - p.a));
        assert!(close(t, expect, 1e-13));
        assert!(close(smoothing_objective(&p, 1.0).unwrap(), 0.112015284483472, 1e-9));
    }

    #[test]
    fn scaled_cheb_matches_direct_definition() {
        for &a in &[0.01, 0.2, 0.7] {
            for k in 1..12 {
                let p = ScaledChebParams::new(a, k).unwrap();
                let norm = cheb1_eval(k, p.theta / p.delta);
                for i in 0..=20 {
                    let x = i as f64 / 20.0;
                    let direct = cheb1_eval(k, (p.theta - x) / p.delta) / norm;
                    assert!((scaled_cheb_eval(&p, x) - direct).abs() < 1e-12, "a={a} k={k} x={x}");
                }
            }
        }
    }

    #[test]
    fn c1_examples() {
        assert!((c1_coefficient(1.0 / 3.0, 1) + 1.5).abs() < 1e-15);
        assert!((c1_coefficient(0.0, 2) + 8.0).abs() < 1e-15);
        let c1 = c1_coefficient(0.1159278464862213, 3);
        assert!(close(1.0 / (2.0 * c1.abs()), 0.0583799108887474, 1e-9));
    }

    #[test]
    fn c1_matches_finite_difference() {
        for &a in &[0.02, 0.1159278464862213, 0.4] {
            for k in 1..=12 {
                let p = ScaledChebParams::new(a, k).unwrap();
                let h = 1e-6;
                let fd = (scaled_cheb_eval(&p, h) - scaled_cheb_eval(&p, -h)) / (2.0 * h);
                assert!(close(fd, c1_coefficient(a, k), 1e-7), "a={a} k={k}");
            }
        }
    }

    #[test]
    fn objective_examples() {
        let p = ScaledChebParams::new(0.0820780659590383, 4).unwrap();
        let at_one = smoothing_objective(&p, 1.0).unwrap();
        assert!(close(at_one, 0.0364585625794908, 1e-9));
        assert!(close(limit_at_zero(&p), at_one, 1e-9));

        // at a root of tau the objective vanishes
        let root = p.theta - p.delta * (PI / 8.0).cos();
        assert!(smoothing_objective(&p, root).unwrap() < 1e-28);

        assert!(smoothing_objective(&p, 0.0).is_err());
        assert!(smoothing_objective(&p, 1.5).is_err());
    }

    #[test]
    fn objective_pole_at_unit_endpoint_when_a_is_zero() {
        let p = ScaledChebParams::new(0.0, 3).unwrap();
        assert!(matches!(smoothing_objective(&p, 1.0), Err(Error::Pole(_))));
    }

    #[test]
    fn roots_closed_forms() {
        let (alpha, delta) = coefficient_roots(1);
        assert!((alpha[0] + 1.0).abs() < 1e-15);
        assert!(delta.is_empty());
        let (alpha, delta) = coefficient_roots(2);
        assert!((alpha[0] + (PI / 8.0).tan().powi(2)).abs() < 1e-15);
        assert!((alpha[1] + (3.0 * PI / 8.0).tan().powi(2)).abs() < 1e-14);
        assert!((delta[0] + 1.0).abs() < 1e-15);
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(10, 3), 120.0);
        assert_eq!(binomial(40, 20), 137846528820.0);
        assert_eq!(binomial(3, 5), 0.0);
    }
}
