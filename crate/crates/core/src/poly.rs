//! Integer polynomials driving the averaging operators, and the real and
//! rational phase polynomials used by the norms and symbols.

use crate::error::{MlabError, Result};
use crate::phase;
use num_complex::Complex64;

/// `P(n) = Σ c_j n^j` with integer coefficients, `c_d != 0`, `d >= 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntPolynomial {
    coeffs: Vec<i64>,
}

impl IntPolynomial {
    /// Coefficients in increasing degree; trailing zeros are trimmed.
    pub fn new(mut coeffs: Vec<i64>) -> Result<Self> {
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        if coeffs.len() < 2 {
            return Err(MlabError::invalid("IntPolynomial needs degree >= 1"));
        }
        Ok(Self { coeffs })
    }

    /// `n^d`.
    pub fn monomial(d: usize) -> Result<Self> {
        let mut c = vec![0; d + 1];
        c[d] = 1;
        Self::new(c)
    }

    pub fn coeffs(&self) -> &[i64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Exact value; `None` on i128 overflow.
    pub fn checked_eval(&self, n: i64) -> Option<i128> {
        let mut acc: i128 = 0;
        for &c in self.coeffs.iter().rev() {
            acc = acc.checked_mul(n as i128)?.checked_add(c as i128)?;
        }
        Some(acc)
    }

    /// Exact value. Panics on overflow, which cannot happen for `|n| <= 10^6`
    /// and coefficients below 10^12 at degree <= 3.
    pub fn eval(&self, n: i64) -> i128 {
        self.checked_eval(n).expect("IntPolynomial evaluation overflowed i128")
    }

    /// `P(n) mod q` in `[0, q)`.
    pub fn eval_mod(&self, n: i64, q: u64) -> u64 {
        let q = q as i128;
        let x = (n as i128).rem_euclid(q);
        let mut acc: i128 = 0;
        for &c in self.coeffs.iter().rev() {
            acc = (acc * x + c as i128).rem_euclid(q);
        }
        acc as u64
    }

    /// `P(x)` at a real point.
    pub fn eval_f64(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c as f64)
    }

    /// Derivative at a real point.
    pub fn deriv_f64(&self, x: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(0.0, |acc, (j, &c)| acc * x + j as f64 * c as f64)
    }
}

/// Real polynomial phase `Q(n) = Σ α_j n^j`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialPhase {
    pub coeffs: Vec<f64>,
}

impl PolynomialPhase {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Self { coeffs }
    }

    pub fn zero(degree: usize) -> Self {
        Self { coeffs: vec![0.0; degree + 1] }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    /// `Q(n) mod 1`.
    pub fn frac_at(&self, n: i64) -> f64 {
        phase::real_poly_frac(&self.coeffs, n)
    }

    /// `e(Q(n))`.
    pub fn e_at(&self, n: i64) -> Complex64 {
        phase::e(self.frac_at(n))
    }
}

/// Polynomial phase with rational coefficients over a common denominator:
/// `R(n) = (Σ a_j n^j) / D`. Values are reduced exactly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalPhase {
    pub numerators: Vec<i64>,
    pub denominator: u64,
}

impl RationalPhase {
    pub fn new(numerators: Vec<i64>, denominator: u64) -> Result<Self> {
        if denominator == 0 {
            return Err(MlabError::invalid("RationalPhase denominator must be positive"));
        }
        Ok(Self { numerators, denominator })
    }

    /// Numerator of `R(n) mod 1` over the denominator, in `[0, D)`.
    pub fn residue_at(&self, n: i64) -> u64 {
        let d = self.denominator as i128;
        let x = (n as i128).rem_euclid(d);
        let mut acc: i128 = 0;
        for &a in self.numerators.iter().rev() {
            acc = (acc * x + a as i128).rem_euclid(d);
        }
        acc as u64
    }

    pub fn e_at(&self, n: i64) -> Complex64 {
        phase::e_rational(self.residue_at(n) as i128, self.denominator)
    }

    /// True when `R(n + q) - R(n)` is an integer for every `n`. A polynomial of
    /// degree `k` that is integer-valued on `k + 1` consecutive integers is
    /// integer-valued everywhere, so checking `n = 0..=k` suffices.
    pub fn is_periodic(&self, q: u64) -> bool {
        let k = self.numerators.len().max(1) as i64;
        let d = self.denominator as i128;
        (0..k).all(|n| {
            let mut diff: i128 = 0;
            for (j, &a) in self.numerators.iter().enumerate() {
                let pow_hi = pow_mod((n + q as i64) as i128, j as u32, d);
                let pow_lo = pow_mod(n as i128, j as u32, d);
                diff = (diff + (a as i128).rem_euclid(d) * (pow_hi - pow_lo)).rem_euclid(d);
            }
            diff == 0
        })
    }
}

fn pow_mod(base: i128, exp: u32, m: i128) -> i128 {
    let b = base.rem_euclid(m);
    let mut acc = 1i128.rem_euclid(m);
    for _ in 0..exp {
        acc = (acc * b).rem_euclid(m);
    }
    acc
}
