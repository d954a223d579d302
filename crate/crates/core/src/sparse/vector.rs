use crate::error::{check_len, Result};

/// Sequential left-to-right dot product.
pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    let mut s = 0.0;
    for (a, b) in x.iter().zip(y) {
        s += a * b;
    }
    s
}

pub fn norm2(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

/// `y += alpha * x`
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Single-pass update of the Chebyshev iteration vectors:
///
/// ```text
/// r_i <- r_i - s_i
/// d_i <- rho * rho_prev * d_i + two_rho_over_delta * r_i
/// x_i <- x_i + d_i
/// ```
///
/// Each element is read and written once. The result is bitwise identical to
/// [`unfused_update`].
pub fn fused_update(
    rho: f64,
    rho_prev: f64,
    two_rho_over_delta: f64,
    s: &[f64],
    r: &mut [f64],
    d: &mut [f64],
    x: &mut [f64],
) -> Result<()> {
    let n = s.len();
    check_len(n, r.len())?;
    check_len(n, d.len())?;
    check_len(n, x.len())?;
    let rr = rho * rho_prev;
    for i in 0..n {
        let ri = r[i] - s[i];
        let di = rr * d[i] + two_rho_over_delta * ri;
        r[i] = ri;
        d[i] = di;
        x[i] += di;
    }
    Ok(())
}

/// Reference for [`fused_update`]: the same three updates as separate sweeps.
pub fn unfused_update(
    rho: f64,
    rho_prev: f64,
    two_rho_over_delta: f64,
    s: &[f64],
    r: &mut [f64],
    d: &mut [f64],
    x: &mut [f64],
) -> Result<()> {
    let n = s.len();
    check_len(n, r.len())?;
    check_len(n, d.len())?;
    check_len(n, x.len())?;
    for (ri, si) in r.iter_mut().zip(s) {
        *ri -= si;
    }
    let rr = rho * rho_prev;
    for (di, ri) in d.iter_mut().zip(r.iter()) {
        *di = rr * *di + two_rho_over_delta * ri;
    }
    for (xi, di) in x.iter_mut().zip(d.iter()) {
        *xi += di;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fused_update_zero_coefficients() {
        let s = [1.0, -2.0];
        let mut r = [3.0, 4.0];
        let mut d = [7.0, 8.0];
        let mut x = [5.0, 6.0];
        fused_update(0.0, 0.0, 0.0, &s, &mut r, &mut d, &mut x).unwrap();
        assert_eq!(r, [2.0, 6.0]);
        assert_eq!(d, [0.0, 0.0]);
        assert_eq!(x, [5.0, 6.0]);
    }

    #[test]
    fn fused_update_scalar_hand_values() {
        let mut r = [3.0];
        let mut d = [2.0];
        let mut x = [5.0];
        fused_update(0.5, 0.4, 2.0, &[1.0], &mut r, &mut d, &mut x).unwrap();
        assert_eq!(r[0], 2.0);
        assert!((d[0] - 4.4).abs() < 1e-15);
        assert!((x[0] - 9.4).abs() < 1e-15);
    }

    #[test]
    fn fused_update_rejects_mismatch() {
        let mut r = [0.0; 2];
        let mut d = [0.0; 3];
        let mut x = [0.0; 2];
        assert!(fused_update(1.0, 1.0, 1.0, &[0.0; 2], &mut r, &mut d, &mut x).is_err());
    }

    #[test]
    fn dot_is_left_to_right() {
        let x = [1e16, 1.0, -1e16];
        let y = [1.0, 1.0, 1.0];
        // (1e16 + 1) rounds to 1e16, so the sequential sum is 0.
        assert_eq!(dot(&x, &y), 0.0);
    }
}
