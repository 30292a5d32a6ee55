//! Exponential-sum symbols: arithmetic symbols over residues, the continuous
//! oscillatory symbol, the major-arc error `M₀`, prime Weyl sums and the
//! periodic Plancherel bound.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::approximants::MangoldtApproximant;
use crate::arith::{gcd, lcm, mod_inverse, trial_factorize, SieveTable};
use crate::error::{MlabError, Result};
use crate::gowers::{forward_plan, ordered_sum};
use crate::phase::{e, e_rational, frac_mul};
use crate::poly::{IntPolynomial, RationalPhase};
use crate::tolerances::{EXP_SUM_N_MAX, PLANCHEREL_Q_MAX, QUADRATURE_MAX_DOUBLINGS, QUADRATURE_MIN_TOL, SYMBOL_Q_MAX};

/// `a/q mod 1` in lowest terms with `0 ≤ a < q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ReducedRational {
    a: u64,
    q: u64,
}

impl ReducedRational {
    pub fn new(a: i64, q: u64) -> Result<Self> {
        if q == 0 {
            return Err(MlabError::invalid("denominator must be positive"));
        }
        let a = (a as i128).rem_euclid(q as i128) as u64;
        let g = gcd(a, q);
        Ok(Self { a: a / g, q: q / g })
    }

    pub fn zero() -> Self {
        Self { a: 0, q: 1 }
    }

    pub fn numerator(&self) -> u64 {
        self.a
    }

    pub fn denominator(&self) -> u64 {
        self.q
    }

    pub fn to_f64(&self) -> f64 {
        self.a as f64 / self.q as f64
    }
}

fn residue_phase(a1: i64, a2: i64, q: u64, p: &IntPolynomial, n: u64) -> Complex64 {
    let qi = q as i128;
    let lin = (a1 as i128).rem_euclid(qi) * n as i128 % qi;
    let quad = (a2 as i128).rem_euclid(qi) * p.eval_mod(n as i64, q) as i128 % qi;
    e_rational(lin + quad, q)
}

/// `E_{n ∈ (Z/qZ)^×} e((a₁n + a₂P(n))/q)`, or the mean over all of `Z/qZ`
/// when `units_only` is false.
pub fn arithmetic_symbol(a1: i64, a2: i64, q: u64, p: &IntPolynomial, units_only: bool) -> Result<Complex64> {
    if q == 0 {
        return Err(MlabError::invalid("modulus q must be positive"));
    }
    if q > SYMBOL_Q_MAX {
        return Err(MlabError::scale("symbol modulus", format!("{q} exceeds {SYMBOL_Q_MAX}")));
    }
    if q == 1 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let primes: Vec<u64> = trial_factorize(q).primes().collect();
    let is_unit = |n: u64| primes.iter().all(|&r| n % r != 0);
    let sum = ordered_sum(q as usize, |i| {
        let n = i as u64;
        if units_only && !is_unit(n) {
            Complex64::new(0.0, 0.0)
        } else {
            residue_phase(a1, a2, q, p, n)
        }
    });
    let count = if units_only {
        primes.iter().fold(q, |acc, &r| acc / r * (r - 1))
    } else {
        q
    };
    Ok(sum / count as f64)
}

/// Both sides of the CRT factorization
/// `m(a/(q₁q₂)) = m(a·ū/q₁) · m(a·v̄/q₂)` with `ū = q₂⁻¹ mod q₁`, `v̄ = q₁⁻¹ mod q₂`.
pub fn symbol_crt_factor(a1: i64, a2: i64, q1: u64, q2: u64, p: &IntPolynomial) -> Result<(Complex64, Complex64)> {
    if q1 == 0 || q2 == 0 || gcd(q1, q2) != 1 {
        return Err(MlabError::invalid(format!("moduli {q1} and {q2} must be coprime and positive")));
    }
    let q = q1.checked_mul(q2).ok_or_else(|| MlabError::invalid("q₁q₂ overflows"))?;
    let lhs = arithmetic_symbol(a1, a2, q, p, true)?;
    let u = mod_inverse(q2 as i64, q1).unwrap_or(0) as i128;
    let v = mod_inverse(q1 as i64, q2).unwrap_or(0) as i128;
    let t = |a: i64, m: i128, modulus: u64| ((a as i128 * m).rem_euclid(modulus as i128)) as i64;
    let r1 = arithmetic_symbol(t(a1, u, q1), t(a2, u, q1), q1, p, true)?;
    let r2 = arithmetic_symbol(t(a1, v, q2), t(a2, v, q2), q2, p, true)?;
    Ok((lhs, r1 * r2))
}

const GL_ORDER: usize = 16;

/// Gauss–Legendre nodes and weights on `[-1, 1]` by Newton iteration.
fn gauss_legendre(m: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(m);
    for i in 1..=m {
        let mut x = (PI * (i as f64 - 0.25) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=m {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = m as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

/// `∫_{1/2}^{1} e(ξ₁Nt + ξ₂P(Nt)) dt` by composite Gauss–Legendre with panel doubling.
pub fn continuous_symbol(xi1: f64, xi2: f64, n: f64, p: &IntPolynomial, tol: f64) -> Result<Complex64> {
    if !(tol >= QUADRATURE_MIN_TOL) {
        return Err(MlabError::invalid(format!("tolerance must be ≥ {QUADRATURE_MIN_TOL:e}, got {tol}")));
    }
    if !(n > 0.0) || !n.is_finite() || !xi1.is_finite() || !xi2.is_finite() {
        return Err(MlabError::invalid("N must be positive and ξ finite"));
    }
    // phase as a polynomial in t
    let mut b: Vec<f64> = p
        .coeffs()
        .iter()
        .enumerate()
        .map(|(j, &c)| xi2 * c as f64 * n.powi(j as i32))
        .collect();
    b[1] += xi1 * n;
    let slope: f64 = b.iter().enumerate().skip(1).map(|(j, v)| j as f64 * v.abs()).sum();
    let phase = |t: f64| {
        let mut acc = 0.0;
        let mut pw = 1.0;
        for &c in &b {
            let term = c * pw;
            acc += term - term.round();
            pw *= t;
        }
        acc
    };
    let nodes = gauss_legendre(GL_ORDER);
    let integrate = |panels: usize| -> Complex64 {
        let h = 0.5 / panels as f64;
        let mut sum = Complex64::new(0.0, 0.0);
        for k in 0..panels {
            let mid = 0.5 + (k as f64 + 0.5) * h;
            let mut ps = Complex64::new(0.0, 0.0);
            for &(x, w) in &nodes {
                ps += e(phase(mid + 0.5 * h * x)) * w;
            }
            sum += ps * (0.5 * h);
        }
        sum
    };
    let mut panels = (1.0 + slope / (2.0 * PI)).ceil().max(1.0) as usize;
    let mut prev = integrate(panels);
    for _ in 0..QUADRATURE_MAX_DOUBLINGS {
        panels *= 2;
        let next = integrate(panels);
        if (next - prev).norm() <= tol {
            return Ok(next);
        }
        prev = next;
    }
    Err(MlabError::NumericFailure(format!(
        "continuous_symbol did not reach tol {tol:e} after {QUADRATURE_MAX_DOUBLINGS} doublings"
    )))
}

fn check_exp_n(n: u64) -> Result<()> {
    if n == 0 {
        return Err(MlabError::invalid("N must be positive"));
    }
    if n > EXP_SUM_N_MAX {
        return Err(MlabError::scale("exponential sum N", format!("{n} exceeds {EXP_SUM_N_MAX}")));
    }
    Ok(())
}

/// `E_{n∈[N]} w(n) e(α₁n + α₂P(n)) e(ξ₁n + ξ₂P(n)) 1_{n > N/2}`.
pub fn weighted_exp_sum(
    n: u64,
    weight: impl Fn(u64) -> f64 + Sync,
    alpha1: ReducedRational,
    alpha2: ReducedRational,
    xi1: f64,
    xi2: f64,
    p: &IntPolynomial,
) -> Result<Complex64> {
    check_exp_n(n)?;
    let lo = n / 2 + 1;
    let count = (n - lo + 1) as usize;
    let (q1, q2) = (alpha1.q as i128, alpha2.q as i128);
    let sum = ordered_sum(count, |i| {
        let m = lo + i as u64;
        let w = weight(m);
        if w == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let pm = p.eval(m as i64);
        let r1 = (alpha1.a as i128 * m as i128 % q1) as f64 / q1 as f64;
        let r2 = (alpha2.a as i128 * pm.rem_euclid(q2) % q2) as f64 / q2 as f64;
        let x = r1 + r2 + frac_mul(xi1, m as i128) + frac_mul(xi2, pm);
        e(x) * w
    });
    Ok(sum / n as f64)
}

/// One evaluation of the major-arc error.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolError {
    pub n: u64,
    pub alpha1: ReducedRational,
    pub alpha2: ReducedRational,
    pub xi1: f64,
    pub xi2: f64,
    pub value: Complex64,
    /// False when the common denominator has a prime factor above the sieve level.
    pub precondition_ok: bool,
}

/// Common-denominator numerators of `(α₁, α₂)`.
fn common_form(alpha1: ReducedRational, alpha2: ReducedRational) -> (i64, i64, u64) {
    let q = lcm(alpha1.q, alpha2.q);
    ((alpha1.a * (q / alpha1.q)) as i64, (alpha2.a * (q / alpha2.q)) as i64, q)
}

/// `weighted_exp_sum − m(α₁,α₂)·m̃_N(ξ₁,ξ₂)` for an arbitrary weight.
#[allow(clippy::too_many_arguments)]
pub fn m0_value(
    n: u64,
    weight: impl Fn(u64) -> f64 + Sync,
    units_only: bool,
    alpha1: ReducedRational,
    alpha2: ReducedRational,
    xi1: f64,
    xi2: f64,
    p: &IntPolynomial,
) -> Result<Complex64> {
    let s = weighted_exp_sum(n, weight, alpha1, alpha2, xi1, xi2, p)?;
    let (a1, a2, q) = common_form(alpha1, alpha2);
    let m = arithmetic_symbol(a1, a2, q, p, units_only)?;
    let c = continuous_symbol(xi1, xi2, n as f64, p, QUADRATURE_MIN_TOL.max(1e-11))?;
    Ok(s - m * c)
}

/// Range limits on the frequencies, `|ξ₁| ≤ 2^s/N`, `|ξ₂| ≤ 2^{ds}/N^d`.
fn xi_in_range(n: u64, s: u32, d: usize, xi1: f64, xi2: f64) -> bool {
    let nf = n as f64;
    let two_s = 2f64.powi(s as i32);
    xi1.abs() <= two_s / nf && xi2.abs() <= two_s.powi(d as i32) / nf.powi(d as i32)
}

/// `M₀` with weight `Λ_N`. Returns a precondition violation when the
/// common denominator has a prime factor above `w(N, C0)` or `ξ` falls
/// outside the `s`-box, unless `force` is set.
#[allow(clippy::too_many_arguments)]
pub fn m0_error(
    n: u64,
    c0: u32,
    alpha1: ReducedRational,
    alpha2: ReducedRational,
    xi1: f64,
    xi2: f64,
    p: &IntPolynomial,
    s: Option<u32>,
    force: bool,
    sieve: &SieveTable,
) -> Result<SymbolError> {
    check_exp_n(n)?;
    let approx = MangoldtApproximant::new(n as f64, c0, sieve)?;
    let (_, _, q) = common_form(alpha1, alpha2);
    let w = approx.level();
    let mut ok = trial_factorize(q).primes().all(|r| (r as f64) <= w);
    if let Some(s) = s {
        ok &= xi_in_range(n, s, p.degree(), xi1, xi2);
    }
    if !ok && !force {
        return Err(MlabError::PreconditionViolation(format!(
            "denominator {q} or frequencies ({xi1}, {xi2}) outside the major arc at level w = {w:.3}"
        )));
    }
    let lo = n / 2 + 1;
    let vals = approx.cramer().eval_range(lo as i64, (n - lo + 1) as usize);
    let value = m0_value(
        n,
        |m| vals[(m - lo) as usize],
        true,
        alpha1,
        alpha2,
        xi1,
        xi2,
        p,
    )?;
    Ok(SymbolError { n, alpha1, alpha2, xi1, xi2, value, precondition_ok: ok })
}

/// `|Σ_{n∈I} 1_{n≡a (q)} Λ_N(n) − 1_{(a,q)=1}|I|/φ(q)| / |I|` for `I = [lo, hi]`.
pub fn progression_mean_error(
    n: u64,
    c0: u32,
    q: u64,
    a: i64,
    interval: (u64, u64),
    sieve: &SieveTable,
) -> Result<f64> {
    let (lo, hi) = interval;
    if q == 0 || lo == 0 || lo > hi || hi > n {
        return Err(MlabError::invalid(format!("need q ≥ 1 and 1 ≤ lo ≤ hi ≤ N, got q={q}, I=[{lo},{hi}]")));
    }
    let approx = MangoldtApproximant::new(n as f64, c0, sieve)?;
    let vals = approx.cramer().eval_range(lo as i64, (hi - lo + 1) as usize);
    let r = (a as i128).rem_euclid(q as i128) as u64;
    let sum: f64 = (lo..=hi).filter(|m| m % q == r).map(|m| vals[(m - lo) as usize]).sum();
    let len = (hi - lo + 1) as f64;
    let expected = if gcd(r, q) == 1 {
        let phi = trial_factorize(q).primes().fold(q, |acc, p| acc / p * (p - 1));
        len / phi as f64
    } else {
        0.0
    };
    Ok((sum - expected).abs() / len)
}

/// `E_{n∈[N]} Λ(n) e(α P(n))`.
pub fn weyl_sum_primes(n: u64, alpha: f64, p: &IntPolynomial, sieve: &SieveTable) -> Result<Complex64> {
    check_exp_n(n)?;
    let lam = sieve.mangoldt_values(n)?;
    let sum = ordered_sum(n as usize, |i| {
        let m = i + 1;
        let l = lam[m];
        if l == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            e(frac_mul(alpha, p.eval(m as i64))) * l
        }
    });
    Ok(sum / n as f64)
}

/// `Σ_{r∈(Z/dZ)^×} |E_{n∈Z/qZ} e(R₀(n) − rn/d)|²`.
pub fn plancherel_check(q: u64, d: u64, r0: &RationalPhase) -> Result<f64> {
    if q == 0 || d == 0 || q % d != 0 {
        return Err(MlabError::invalid(format!("d = {d} must divide q = {q}")));
    }
    if q > PLANCHEREL_Q_MAX {
        return Err(MlabError::scale("plancherel modulus", format!("{q} exceeds {PLANCHEREL_Q_MAX}")));
    }
    if !r0.is_periodic(q) {
        return Err(MlabError::invalid(format!("R₀ is not periodic mod {q}")));
    }
    let mut buf = vec![Complex64::new(0.0, 0.0); d as usize];
    for m in 0..q {
        buf[(m % d) as usize] += r0.e_at(m as i64);
    }
    forward_plan(d as usize).process(&mut buf);
    let qf = q as f64;
    Ok((0..d)
        .filter(|&r| gcd(r, d) == 1)
        .map(|r| (buf[r as usize] / qf).norm_sqr())
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::build_sieve;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sq() -> IntPolynomial {
        IntPolynomial::monomial(2).unwrap()
    }

    #[test]
    fn reduced_rational_normalizes() {
        let r = ReducedRational::new(-4, 6).unwrap();
        assert_eq!((r.numerator(), r.denominator()), (1, 3));
        assert_eq!(ReducedRational::new(5, 1).unwrap(), ReducedRational::zero());
        assert!(ReducedRational::new(1, 0).is_err());
    }

    #[test]
    fn symbol_examples() {
        assert_eq!(arithmetic_symbol(3, 7, 1, &sq(), true).unwrap(), Complex64::new(1.0, 0.0));
        let v = arithmetic_symbol(0, 1, 3, &sq(), true).unwrap();
        assert!((v - Complex64::new(-0.5, 0.8660254037844386)).norm() < 1e-12);
        assert!(arithmetic_symbol(0, 1, 0, &sq(), true).is_err());
        // full-residue Gauss sum at an odd prime has modulus sqrt(q)/q
        let g = arithmetic_symbol(0, 1, 7, &sq(), false).unwrap();
        assert!((g.norm() - 7f64.sqrt() / 7.0).abs() < 1e-12);
    }

    #[test]
    fn symbol_scaling_and_crt() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let cube = IntPolynomial::new(vec![0, 1, 0, 2]).unwrap();
        for _ in 0..30 {
            let q = rng.gen_range(2..40u64);
            let (a1, a2) = (rng.gen_range(-50..50), rng.gen_range(-50..50));
            let k = rng.gen_range(1..=20i64);
            let base = arithmetic_symbol(a1, a2, q, &cube, true).unwrap();
            let scaled = arithmetic_symbol(k * a1, k * a2, k as u64 * q, &cube, true).unwrap();
            assert!((base - scaled).norm() < 1e-12);
        }
        let (l, r) = symbol_crt_factor(1, 1, 3, 4, &sq()).unwrap();
        assert!((l - r).norm() < 1e-10);
        let (l, r) = symbol_crt_factor(2, 5, 7, 1, &sq()).unwrap();
        assert_eq!(l, r);
        for _ in 0..20 {
            let (a1, a2) = (rng.gen_range(0..35), rng.gen_range(0..35));
            let (l, r) = symbol_crt_factor(a1, a2, 5, 7, &cube).unwrap();
            assert!((l - r).norm() < 1e-10);
        }
        assert!(symbol_crt_factor(1, 1, 4, 6, &sq()).is_err());
    }

    #[test]
    fn continuous_symbol_closed_forms() {
        let v = continuous_symbol(0.0, 0.0, 100.0, &sq(), 1e-12).unwrap();
        assert!((v - Complex64::new(0.5, 0.0)).norm() < 1e-14);
        // ∫_{1/2}^1 e(t) dt = (e(1) − e(1/2))/(2πi) = −i/π
        let v = continuous_symbol(0.01, 0.0, 100.0, &sq(), 1e-12).unwrap();
        assert!((v - Complex64::new(0.0, -1.0 / PI)).norm() < 1e-12);
        let v = continuous_symbol(0.3, 1e-3, 1e4, &sq(), 1e-10).unwrap();
        assert!(v.norm() <= 0.5 + 1e-12);
        assert!(continuous_symbol(0.0, 0.0, 1.0, &sq(), 1e-14).is_err());
    }

    #[test]
    fn exp_sum_counting_and_alternation() {
        let z = ReducedRational::zero();
        let v = weighted_exp_sum(101, |_| 1.0, z, z, 0.0, 0.0, &sq()).unwrap();
        // n in (50.5, 101] has 51 terms
        assert!((v.re - 51.0 / 101.0).abs() < 1e-15);
        // e(n/2) = (-1)^n over n in 51..=100: 25 even, 25 odd
        let half = ReducedRational::new(1, 2).unwrap();
        let v = weighted_exp_sum(100, |_| 1.0, half, z, 0.0, 0.0, &sq()).unwrap();
        assert!(v.norm() < 1e-14);
        let v = weighted_exp_sum(101, |_| 1.0, half, z, 0.0, 0.0, &sq()).unwrap();
        // terms 51..=101: 26 odd, 25 even
        assert!((v.re + 1.0 / 101.0).abs() < 1e-14);
    }

    #[test]
    fn m0_constant_weight_is_riemann_error() {
        let z = ReducedRational::zero();
        for n in [1000u64, 10_000] {
            let v = m0_value(n, |_| 1.0, false, z, z, 1.0 / n as f64, 0.0, &sq()).unwrap();
            assert!(v.norm() < 2.0 / n as f64, "n={n} |M0|={}", v.norm());
        }
    }

    #[test]
    fn m0_precondition() {
        let sieve = build_sieve(10_000).unwrap();
        let z = ReducedRational::zero();
        let big = ReducedRational::new(1, 1009).unwrap();
        assert!(matches!(
            m0_error(10_000, 2, big, z, 0.0, 0.0, &sq(), None, false, &sieve),
            Err(MlabError::PreconditionViolation(_))
        ));
        let forced = m0_error(10_000, 2, big, z, 0.0, 0.0, &sq(), None, true, &sieve).unwrap();
        assert!(!forced.precondition_ok);
        let ok = m0_error(10_000, 2, z, z, 0.0, 0.0, &sq(), Some(1), false, &sieve).unwrap();
        assert!(ok.precondition_ok);
        assert!(ok.value.norm() <= 0.5 + 1.0);
        assert!(m0_error(10_000, 2, z, z, 1.0, 0.0, &sq(), Some(1), false, &sieve).is_err());
    }

    #[test]
    fn progression_errors() {
        let sieve = build_sieve(100_000).unwrap();
        let e1 = progression_mean_error(100_000, 2, 1, 0, (50_001, 100_000), &sieve).unwrap();
        assert!(e1 <= 0.05, "{e1}");
        let e0 = progression_mean_error(100_000, 2, 6, 2, (1, 100_000), &sieve).unwrap();
        assert_eq!(e0, 0.0);
    }

    #[test]
    fn weyl_periodicity() {
        let sieve = build_sieve(10_000).unwrap();
        let a = weyl_sum_primes(10_000, 0.0, &sq(), &sieve).unwrap();
        let b = weyl_sum_primes(10_000, 1.0, &sq(), &sieve).unwrap();
        assert!((a - b).norm() < 1e-12);
        assert!((a.re - 1.0).abs() < 0.05);
    }

    #[test]
    fn plancherel_examples() {
        let zero = RationalPhase::new(vec![0], 1).unwrap();
        assert!(plancherel_check(12, 12, &zero).unwrap() < 1e-28);
        let r = RationalPhase::new(vec![0, 1, 5], 60).unwrap();
        let s1 = plancherel_check(60, 1, &r).unwrap();
        let direct = (0..60).map(|n| r.e_at(n)).sum::<Complex64>() / 60.0;
        assert!((s1 - direct.norm_sqr()).abs() < 1e-12);
        assert!(plancherel_check(60, 12, &r).unwrap() <= 0.2 + 1e-9);
        assert!(plancherel_check(60, 7, &r).is_err());
        let bad = RationalPhase::new(vec![0, 1], 7).unwrap();
        assert!(plancherel_check(60, 12, &bad).is_err());
    }
}
