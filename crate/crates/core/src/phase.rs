//! Phase reduction helpers. `e(x) = exp(2πix)` is only ever evaluated on
//! arguments already reduced mod 1, so large integer multipliers (`ξ·n³` at
//! `n = 10^6`) keep their fractional part.

use num_complex::Complex64;
use std::f64::consts::TAU;

/// `e(x) = exp(2πix)` after reducing `x` to `[-1/2, 1/2]`.
#[inline]
pub fn e(x: f64) -> Complex64 {
    let r = x - x.round();
    let (s, c) = (TAU * r).sin_cos();
    Complex64::new(c, s)
}

/// `e(k/q)` for integers, reduced exactly before the division.
#[inline]
pub fn e_rational(k: i128, q: u64) -> Complex64 {
    let r = k.rem_euclid(q as i128) as f64 / q as f64;
    e(r)
}

const CHUNK_BITS: u32 = 21;
const CHUNK_MASK: u128 = (1 << CHUNK_BITS) - 1;

/// Fractional part in `[0, 1)` of `x · m`, treating `x` as the exact binary
/// value it holds. Splits `m` into 21-bit chunks so every partial product is
/// captured with its rounding error.
pub fn frac_mul(x: f64, m: i128) -> f64 {
    if m == 0 || x == 0.0 {
        return 0.0;
    }
    let sign = if m < 0 { -1.0 } else { 1.0 };
    let mut a = m.unsigned_abs();
    let mut scaled = x;
    let mut acc = 0.0f64;
    while a != 0 {
        let c = (a & CHUNK_MASK) as f64;
        if c != 0.0 && scaled.is_finite() {
            let p = scaled * c;
            let err = scaled.mul_add(c, -p);
            acc += (p - p.floor()) + err;
            acc -= acc.floor();
        }
        a >>= CHUNK_BITS;
        // once x·2^{21k} has no fractional bits left, higher chunks contribute integers
        scaled *= (1u64 << CHUNK_BITS) as f64;
        if scaled.abs() >= 2f64.powi(53) && scaled.fract() == 0.0 {
            break;
        }
    }
    let r = sign * acc;
    r - r.floor()
}

/// `Σ_j coeffs[j] · n^j mod 1` with each term reduced separately.
pub fn real_poly_frac(coeffs: &[f64], n: i64) -> f64 {
    let mut acc = 0.0;
    let mut pow: i128 = 1;
    for (j, &c) in coeffs.iter().enumerate() {
        if j > 0 {
            pow = pow.checked_mul(n as i128).expect("phase polynomial power overflows i128");
        }
        acc += frac_mul(c, pow);
    }
    acc - acc.floor()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn e_basic() {
        let z = e(0.25);
        assert!((z - Complex64::new(0.0, 1.0)).norm() < 1e-15);
        assert!((e(7.5) - Complex64::new(-1.0, 0.0)).norm() < 1e-15);
        assert!((e_rational(-1, 4) - Complex64::new(0.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn frac_mul_exact_on_dyadics() {
        // 0.375 * 10^18 = 375 * 10^15, an integer
        assert_eq!(frac_mul(0.375, 1_000_000_000_000_000_000), 0.0);
        assert!((frac_mul(0.5, 3) - 0.5).abs() < 1e-15);
        assert!((frac_mul(0.5, -3) - 0.5).abs() < 1e-15);
        assert!((frac_mul(0.25, -1) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn frac_mul_beats_naive_product() {
        // x = 1/3 rounded; x*m computed in exact rational arithmetic via i128
        let x = 1.0f64 / 3.0;
        let (mant, exp) = {
            let bits = x.to_bits();
            let e = ((bits >> 52) & 0x7ff) as i32 - 1075;
            ((bits & ((1 << 52) - 1)) | (1 << 52), e)
        };
        let m: i128 = 999_999_999_937;
        // x = mant * 2^exp with exp < 0
        let num = mant as i128 * m;
        let den = 1i128 << (-exp);
        let exact = (num % den) as f64 / den as f64;
        assert!((frac_mul(x, m) - exact).abs() < 1e-12);
    }

    #[test]
    fn poly_frac_periodic_for_integer_coeffs() {
        assert_eq!(real_poly_frac(&[0.0, 1.0, 3.0], 12345), 0.0);
        let v = real_poly_frac(&[0.0, 0.0, 0.5], 3);
        assert!((v - 0.5).abs() < 1e-15);
    }
}
