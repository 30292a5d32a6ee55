//! Approximants to the von Mangoldt function: the Cramér model, the
//! Heath-Brown Type I approximant, the scale-dependent `Λ_N`, and the
//! β-sieve weights of the fundamental lemma, together with local factors and
//! linear-equation counts in the Cramér model.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::arith::{self, gcd, log_scale, Factorization, SieveTable};
use crate::error::{MlabError, Result};
use crate::tolerances::{BETA_ENUM_MAX, CRAMER_EXPANSION_MAX_W, LINEAR_COUNT_MAX};

/// `Λ_{Cramér,w}(n) = (W/φ(W)) 1_{(n,W)=1}` with `W = ∏_{p<=w} p`.
///
/// `W` is never formed; coprimality is tested against the stored primes.
#[derive(Debug, Clone, PartialEq)]
pub struct CramerWeight {
    w: f64,
    primes: Vec<u64>,
    normalization: f64,
}

impl CramerWeight {
    pub fn new(w: f64, sieve: &SieveTable) -> Result<Self> {
        if !(w >= 1.0) || !w.is_finite() {
            return Err(MlabError::invalid(format!("Cramér level must be >= 1, got {w}")));
        }
        if w > sieve.limit() as f64 {
            return Err(MlabError::OutOfRange(format!(
                "Cramér level {w} exceeds sieve limit {}",
                sieve.limit()
            )));
        }
        let primes = sieve.primes_up_to(w);
        let normalization = primes.iter().map(|&p| p as f64 / (p - 1) as f64).product();
        Ok(Self { w, primes, normalization })
    }

    pub fn level(&self) -> f64 {
        self.w
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    /// `W/φ(W)`.
    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    pub fn is_coprime(&self, n: i64) -> bool {
        let m = n.unsigned_abs();
        self.primes.iter().all(|&p| m % p != 0)
    }

    pub fn eval(&self, n: i64) -> f64 {
        if self.is_coprime(n) {
            self.normalization
        } else {
            0.0
        }
    }

    /// Values on `lo..lo+len`, sieving out multiples instead of trial division.
    pub fn eval_range(&self, lo: i64, len: usize) -> Vec<f64> {
        let mut out = vec![self.normalization; len];
        for &p in &self.primes {
            let p_i = p as i64;
            let first = lo.rem_euclid(p_i);
            let mut i = if first == 0 { 0 } else { (p_i - first) as usize };
            while i < len {
                out[i] = 0.0;
                i += p as usize;
            }
        }
        out
    }
}

/// Convenience wrapper around [`CramerWeight::eval`].
pub fn cramer_eval(cw: &CramerWeight, n: i64) -> f64 {
    cw.eval(n)
}

/// Heath-Brown approximant in Type I form: `Λ_{HB,Q}(n) = Σ_{d|n, d<Q} λ_d`.
#[derive(Debug, Clone, PartialEq)]
pub struct HeathBrownWeight {
    q: u64,
    /// `lambda[d]` for `1 <= d < Q`; index 0 unused.
    lambda: Vec<f64>,
}

impl HeathBrownWeight {
    pub fn cutoff(&self) -> u64 {
        self.q
    }

    /// `λ_d`, zero outside `1 <= d < Q`.
    pub fn lambda(&self, d: u64) -> f64 {
        if d == 0 || d >= self.q {
            0.0
        } else {
            self.lambda[d as usize]
        }
    }

    pub fn max_abs_lambda(&self) -> f64 {
        self.lambda.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }

    /// `Σ_{d | n, d < Q} λ_d`, enumerating the divisors of `n`.
    pub fn eval_type1(&self, n: u64, sieve: &SieveTable) -> Result<f64> {
        if n == 0 {
            return Err(MlabError::invalid("Heath-Brown weight is evaluated at n >= 1"));
        }
        let f = sieve.factorize(n)?;
        Ok(squarefree_divisors(&f)
            .into_iter()
            .filter(|&d| d < self.q)
            .map(|d| self.lambda[d as usize])
            .sum())
    }

    /// Values at `1..=n_max` (index 0 unused), by adding `λ_d` along multiples.
    pub fn eval_range(&self, n_max: u64) -> Vec<f64> {
        let mut out = vec![0.0; n_max as usize + 1];
        for d in 1..self.q.min(n_max + 1) {
            let l = self.lambda[d as usize];
            if l == 0.0 {
                continue;
            }
            let mut m = d as usize;
            while m <= n_max as usize {
                out[m] += l;
                m += d as usize;
            }
        }
        out
    }
}

/// `λ_d = (μ(d) d/φ(d)) Σ_{r < Q/d, (d,r)=1} μ²(r)/φ(r)` for `1 <= d < Q`.
pub fn hb_weights(q: u64, sieve: &SieveTable) -> Result<HeathBrownWeight> {
    if q == 0 {
        return Err(MlabError::invalid("Heath-Brown cutoff Q must be >= 1"));
    }
    if q > 1 && q - 1 > sieve.limit() {
        return Err(MlabError::OutOfRange(format!("Q={q} exceeds sieve limit")));
    }
    if q == 1 {
        return Ok(HeathBrownWeight { q, lambda: vec![0.0] });
    }
    let mu = sieve.mobius_values(q - 1)?;
    let phi = sieve.phi_values(q - 1)?;
    let mu2_over_phi: Vec<f64> = (0..q as usize)
        .map(|r| if r == 0 || mu[r] == 0 { 0.0 } else { 1.0 / phi[r] as f64 })
        .collect();
    let lambda: Vec<f64> = (0..q as usize)
        .into_par_iter()
        .map(|d| {
            if d == 0 || mu[d] == 0 {
                return 0.0;
            }
            // r < Q/d  <=>  r*d < Q
            let r_max = (q as usize - 1) / d;
            let inner: f64 = (1..=r_max)
                .filter(|&r| gcd(r as u64, d as u64) == 1)
                .map(|r| mu2_over_phi[r])
                .sum();
            mu[d] as f64 * d as f64 / phi[d] as f64 * inner
        })
        .collect();
    Ok(HeathBrownWeight { q, lambda })
}

/// `Σ_{q<Q} (μ(q)/φ(q)) c_q(n)` with each Ramanujan sum from the divisor
/// identity.
pub fn hb_eval_direct(q: u64, n: u64, sieve: &SieveTable) -> Result<f64> {
    if n == 0 {
        return Err(MlabError::invalid("Heath-Brown weight is evaluated at n >= 1"));
    }
    let mut total = 0.0;
    for m in 1..q {
        let f = sieve.factorize(m)?;
        if !f.is_squarefree() {
            continue;
        }
        let mu = arith::mobius_of(&f) as f64;
        let phi = arith::phi_of(&f) as f64;
        total += mu / phi * arith::ramanujan_from_factorization(&f, n as i64) as f64;
    }
    Ok(total)
}

pub fn hb_eval_type1(hw: &HeathBrownWeight, n: u64, sieve: &SieveTable) -> Result<f64> {
    hw.eval_type1(n, sieve)
}

fn squarefree_divisors(f: &Factorization) -> Vec<u64> {
    let mut out = vec![1u64];
    for p in f.primes() {
        let base = out.len();
        for i in 0..base {
            out.push(out[i] * p);
        }
    }
    out
}

/// Sieve level of `Λ_N`: `w = exp((Log N)^{1/C0})`.
pub fn lambda_n_level(n_scale: f64, c0: u32) -> Result<f64> {
    if !(n_scale >= 2.0) {
        return Err(MlabError::invalid(format!("Λ_N needs N >= 2, got {n_scale}")));
    }
    if c0 == 0 {
        return Err(MlabError::invalid("C0 must be a positive integer"));
    }
    let k = log_scale(n_scale)? as f64;
    Ok(k.powf(1.0 / c0 as f64).exp())
}

/// `Λ_N = Λ_{Cramér, exp(Log^{1/C0} N)}`.
#[derive(Debug, Clone, PartialEq)]
pub struct MangoldtApproximant {
    n_scale: f64,
    c0: u32,
    inner: CramerWeight,
}

impl MangoldtApproximant {
    pub fn new(n_scale: f64, c0: u32, sieve: &SieveTable) -> Result<Self> {
        let w = lambda_n_level(n_scale, c0)?;
        Ok(Self {
            n_scale,
            c0,
            inner: CramerWeight::new(w, sieve)?,
        })
    }

    pub fn scale(&self) -> f64 {
        self.n_scale
    }

    pub fn c0(&self) -> u32 {
        self.c0
    }

    pub fn level(&self) -> f64 {
        self.inner.level()
    }

    pub fn cramer(&self) -> &CramerWeight {
        &self.inner
    }

    pub fn eval(&self, n: i64) -> f64 {
        self.inner.eval(n)
    }
}

pub fn lambda_n_eval(n_scale: f64, c0: u32, n: i64, sieve: &SieveTable) -> Result<f64> {
    Ok(MangoldtApproximant::new(n_scale, c0, sieve)?.eval(n))
}

/// `Σ_{d|W} (μ(d)/φ(d)) c_d(n)`, enumerating every squarefree `d | W`.
/// Must equal `Λ_{Cramér,w}(n)`.
pub fn cramer_via_ramanujan_check(w: f64, n: i64, sieve: &SieveTable) -> Result<f64> {
    if w > CRAMER_EXPANSION_MAX_W {
        return Err(MlabError::scale(
            "w",
            format!("Ramanujan expansion enumerates divisors of W; w={w} exceeds {CRAMER_EXPANSION_MAX_W}"),
        ));
    }
    let primes = if w >= 2.0 { sieve.primes_up_to(w) } else { Vec::new() };
    let mut total = 0.0;
    for mask in 0u32..(1 << primes.len()) {
        let f = Factorization(
            primes
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, &p)| (p, 1))
                .collect(),
        );
        let mu = arith::mobius_of(&f) as f64;
        let phi = arith::phi_of(&f) as f64;
        total += mu / phi * arith::ramanujan_from_factorization(&f, n) as f64;
    }
    Ok(total)
}

/// Affine form `ψ(n⃗) = n⃗·coeffs + constant` on `Z^m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffineForm {
    pub coeffs: Vec<i64>,
    pub constant: i64,
}

impl AffineForm {
    pub fn new(coeffs: Vec<i64>, constant: i64) -> Self {
        Self { coeffs, constant }
    }

    pub fn eval(&self, n: &[i64]) -> i64 {
        self.constant + self.coeffs.iter().zip(n).map(|(a, b)| a * b).sum::<i64>()
    }

    fn eval_mod(&self, n: &[u64], p: u64) -> u64 {
        let p_i = p as i64;
        let mut acc = self.constant.rem_euclid(p_i);
        for (a, &x) in self.coeffs.iter().zip(n) {
            acc = (acc + a.rem_euclid(p_i) * x as i64) % p_i;
        }
        acc as u64
    }
}

fn check_forms(forms: &[AffineForm], z_list: &[f64]) -> Result<usize> {
    let m = forms.first().map(|f| f.coeffs.len()).unwrap_or(0);
    if forms.is_empty() || m == 0 {
        return Err(MlabError::invalid("need at least one form in at least one variable"));
    }
    if forms.iter().any(|f| f.coeffs.len() != m) {
        return Err(MlabError::invalid("all forms must have the same number of variables"));
    }
    if z_list.len() != forms.len() {
        return Err(MlabError::invalid("z_list must have one level per form"));
    }
    if z_list.iter().any(|&z| !(z >= 1.0)) {
        return Err(MlabError::invalid("sieve levels z_i must be >= 1"));
    }
    Ok(m)
}

/// `β_p = E_{n⃗ ∈ (Z/pZ)^m} ∏_{i: p <= z_i} (p/(p-1)) 1{ψ_i(n⃗) != 0}`.
pub fn local_factor_beta(p: u64, forms: &[AffineForm], z_list: &[f64]) -> Result<f64> {
    let m = check_forms(forms, z_list)?;
    if m > 4 {
        return Err(MlabError::scale("forms", format!("{m} variables exceeds 4")));
    }
    let total = (p as f64).powi(m as i32);
    if total > BETA_ENUM_MAX as f64 {
        return Err(MlabError::scale("p", format!("p^m = {total} exceeds {BETA_ENUM_MAX}")));
    }
    let active: Vec<&AffineForm> = forms
        .iter()
        .zip(z_list)
        .filter(|(_, &z)| p as f64 <= z)
        .map(|(f, _)| f)
        .collect();
    if active.is_empty() {
        return Ok(1.0);
    }
    let mut n = vec![0u64; m];
    let mut surviving: u64 = 0;
    loop {
        if active.iter().all(|f| f.eval_mod(&n, p) != 0) {
            surviving += 1;
        }
        let mut i = 0;
        while i < m {
            n[i] += 1;
            if n[i] < p {
                break;
            }
            n[i] = 0;
            i += 1;
        }
        if i == m {
            break;
        }
    }
    let factor = (p as f64 / (p - 1) as f64).powi(active.len() as i32);
    Ok(surviving as f64 / total * factor)
}

/// Integer box `∏ [lo_i, hi_i]` (inclusive). Its volume is the number of
/// lattice points, i.e. the box is read as the union of unit cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntegerBox {
    pub lo: Vec<i64>,
    pub hi: Vec<i64>,
}

impl IntegerBox {
    pub fn new(lo: Vec<i64>, hi: Vec<i64>) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(MlabError::invalid("box bounds must have equal, positive dimension"));
        }
        if lo.iter().zip(&hi).any(|(a, b)| a > b) {
            return Err(MlabError::invalid("box needs lo <= hi in every coordinate"));
        }
        Ok(Self { lo, hi })
    }

    pub fn interval(lo: i64, hi: i64) -> Result<Self> {
        Self::new(vec![lo], vec![hi])
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lattice_count(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(a, b)| (b - a + 1) as f64).product()
    }

    pub fn volume(&self) -> f64 {
        self.lattice_count()
    }
}

/// Rejects constant forms and pairs that are proportional as affine forms
/// (linear part and constant scaled by the same ratio). Forms sharing a linear
/// part with different constants, like `n` and `n + 2`, are accepted: the
/// Cramér product is periodic, so the local-factor prediction still applies.
fn degenerate_forms(forms: &[AffineForm]) -> bool {
    if forms.iter().any(|f| f.coeffs.iter().all(|&c| c == 0)) {
        return true;
    }
    let full = |f: &AffineForm| {
        let mut v: Vec<i128> = f.coeffs.iter().map(|&c| c as i128).collect();
        v.push(f.constant as i128);
        v
    };
    for (i, a) in forms.iter().enumerate() {
        let va = full(a);
        for b in &forms[i + 1..] {
            let vb = full(b);
            let k = va.len();
            // proportional iff every 2x2 minor vanishes
            let proportional = (0..k).all(|r| (r + 1..k).all(|s| va[r] * vb[s] == va[s] * vb[r]));
            if proportional {
                return true;
            }
        }
    }
    false
}

/// Weighted count `Σ_{n⃗ ∈ Ω} ∏_i Λ_{Cramér,z_i}(ψ_i(n⃗))` and its local-factor
/// prediction `vol(Ω) ∏_{p <= max z_i} β_p`.
pub fn cramer_linear_count(
    forms: &[AffineForm],
    omega: &IntegerBox,
    z_list: &[f64],
    sieve: &SieveTable,
) -> Result<(f64, f64)> {
    let m = check_forms(forms, z_list)?;
    if omega.dim() != m {
        return Err(MlabError::invalid("box dimension must match the number of variables"));
    }
    if degenerate_forms(forms) {
        return Err(MlabError::invalid("forms must be non-constant and pairwise non-proportional"));
    }
    let points = omega.lattice_count();
    if points > LINEAR_COUNT_MAX as f64 {
        return Err(MlabError::scale("box", format!("{points} lattice points exceeds {LINEAR_COUNT_MAX}")));
    }
    let weights: Vec<CramerWeight> = z_list
        .iter()
        .map(|&z| CramerWeight::new(z, sieve))
        .collect::<Result<_>>()?;
    let norm_product: f64 = weights.iter().map(|w| w.normalization()).product();

    // integer count of surviving points, split on the first coordinate
    let first: Vec<i64> = (omega.lo[0]..=omega.hi[0]).collect();
    let survivors: u64 = first
        .par_iter()
        .map(|&x0| {
            let mut n = omega.lo.clone();
            n[0] = x0;
            let mut count = 0u64;
            loop {
                if forms.iter().zip(&weights).all(|(f, w)| w.is_coprime(f.eval(&n))) {
                    count += 1;
                }
                let mut i = 1;
                while i < m {
                    n[i] += 1;
                    if n[i] <= omega.hi[i] {
                        break;
                    }
                    n[i] = omega.lo[i];
                    i += 1;
                }
                if i >= m {
                    break;
                }
            }
            count
        })
        .sum();
    let lhs = survivors as f64 * norm_product;

    let z_max = z_list.iter().cloned().fold(1.0, f64::max);
    let mut prediction = omega.volume();
    if z_max >= 2.0 {
        for p in sieve.primes_up_to(z_max) {
            prediction *= local_factor_beta(p, forms, z_list)?;
        }
    }
    Ok((lhs, prediction))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SieveSign {
    Upper,
    Lower,
}

/// β-sieve weights `λ^±_d = μ(d) 1{d ∈ D^±}` over squarefree `d` built from
/// primes `p <= w`.
#[derive(Debug, Clone, PartialEq)]
pub struct SieveWeights {
    pub sign: SieveSign,
    pub w: f64,
    pub y: f64,
    weights: Vec<(u64, i8)>,
    lookup: HashMap<u64, i8>,
    primes: Vec<u64>,
}

impl SieveWeights {
    /// `(d, λ_d)` sorted by `d`.
    pub fn weights(&self) -> &[(u64, i8)] {
        &self.weights
    }

    pub fn weight(&self, d: u64) -> i8 {
        self.lookup.get(&d).copied().unwrap_or(0)
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    /// `Σ_{d|n} λ_d`.
    pub fn divisor_sum(&self, n: u64) -> i64 {
        let sieve_part: Vec<u64> = self.primes.iter().copied().filter(|&p| n % p == 0).collect();
        let mut total = 0i64;
        for mask in 0u64..(1 << sieve_part.len()) {
            let mut d = 1u64;
            for (i, &p) in sieve_part.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    d = d.saturating_mul(p);
                }
            }
            total += self.weight(d) as i64;
        }
        total
    }

    /// `Σ_{d|n} λ_d` for `n` in `0..=n_max` (index 0 unused).
    pub fn divisor_sum_range(&self, n_max: u64) -> Vec<i64> {
        let mut out = vec![0i64; n_max as usize + 1];
        for &(d, l) in &self.weights {
            let mut k = d as usize;
            while k <= n_max as usize {
                out[k] += l as i64;
                k += d as usize;
            }
        }
        out
    }
}

/// Rosser–Iwaniec β-sieve with β = 2. With `d = p_1 ⋯ p_r`,
/// `p_1 > ⋯ > p_r`, the upper set keeps `d` when `p_1⋯p_{m-1} p_m³ <= y` for
/// every odd `m <= r`; the lower set imposes the same at even `m`.
pub fn beta_sieve_weights(w: f64, y: f64, sieve: &SieveTable) -> Result<(SieveWeights, SieveWeights)> {
    if !(w >= 2.0) {
        return Err(MlabError::invalid(format!("sieve level w must be >= 2, got {w}")));
    }
    if w > y {
        return Err(MlabError::invalid(format!("need w <= y, got w={w} y={y}")));
    }
    let mut primes = CramerWeight::new(w, sieve)?.primes;
    primes.sort_unstable_by(|a, b| b.cmp(a));
    let build = |sign: SieveSign| {
        let mut out: Vec<(u64, i8)> = Vec::new();
        // (start index into descending primes, product, number of primes)
        fn dfs(
            primes: &[u64],
            start: usize,
            prod: u64,
            r: usize,
            y: f64,
            sign: SieveSign,
            out: &mut Vec<(u64, i8)>,
        ) {
            out.push((prod, if r % 2 == 0 { 1 } else { -1 }));
            for i in start..primes.len() {
                let p = primes[i];
                let m = r + 1;
                let checked = match sign {
                    SieveSign::Upper => m % 2 == 1,
                    SieveSign::Lower => m % 2 == 0,
                };
                if checked && (prod as f64) * (p as f64).powi(3) > y {
                    continue;
                }
                let next = prod.saturating_mul(p);
                if next as f64 > y {
                    continue;
                }
                dfs(primes, i + 1, next, m, y, sign, out);
            }
        }
        dfs(&primes, 0, 1, 0, y, sign, &mut out);
        out.sort_unstable();
        let lookup = out.iter().copied().collect();
        let mut ascending = primes.clone();
        ascending.sort_unstable();
        SieveWeights { sign, w, y, weights: out, lookup, primes: ascending }
    };
    Ok((build(SieveSign::Upper), build(SieveSign::Lower)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::build_sieve;
    use crate::tolerances::{CRAMER_RAMANUJAN_ABS, HB_TYPE1_REL};

    fn sieve() -> SieveTable {
        build_sieve(1_000_000).unwrap()
    }

    #[test]
    fn cramer_examples() {
        let t = build_sieve(100).unwrap();
        let cw = CramerWeight::new(3.0, &t).unwrap();
        assert_eq!(cw.normalization(), 3.0);
        assert_eq!(cramer_eval(&cw, 5), 3.0);
        assert_eq!(cramer_eval(&cw, 4), 0.0);
        let one = CramerWeight::new(1.0, &t).unwrap();
        assert!((1..50).all(|n| one.eval(n) == 1.0));
        assert_eq!(one.eval(0), 1.0);
        assert!(CramerWeight::new(0.5, &t).is_err());
        let r = cw.eval_range(-3, 10);
        for (i, v) in r.iter().enumerate() {
            assert_eq!(*v, cw.eval(-3 + i as i64));
        }
    }

    #[test]
    fn cramer_mean_near_one() {
        let t = sieve();
        for z in [5.0, 10.0, 20.0] {
            let cw = CramerWeight::new(z, &t).unwrap();
            let mean = cw.eval_range(1, 1_000_000).iter().sum::<f64>() / 1e6;
            assert!((mean - 1.0).abs() <= 0.01, "z={z} mean={mean}");
        }
    }

    #[test]
    fn cramer_progression_means() {
        let t = sieve();
        let cw = CramerWeight::new(20.0, &t).unwrap();
        let vals = cw.eval_range(1, 1_000_000);
        for q in 1..=20u64 {
            let phi = t.euler_phi(q).unwrap() as f64;
            for a in 0..q {
                if gcd(a, q) != 1 {
                    continue;
                }
                let s: f64 = vals
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| (*i as u64 + 1) % q == a)
                    .map(|(_, v)| v)
                    .sum();
                let mean = s / 1e6;
                assert!((mean - 1.0 / phi).abs() <= 0.05 / phi, "q={q} a={a}");
            }
        }
    }

    #[test]
    fn cramer_uniform_bound() {
        let t = sieve();
        // constant fitted once over w in 2..=50 and frozen
        const C: f64 = 2.5;
        for w in 2..=50 {
            let cw = CramerWeight::new(w as f64, &t).unwrap();
            let bracket = arith::log_bracket(w as f64).unwrap();
            assert!(cw.normalization() / bracket <= C, "w={w}");
            assert!(cw.normalization() >= 1.0);
        }
    }

    #[test]
    fn hb_small_cases() {
        let t = build_sieve(1000).unwrap();
        let hw = hb_weights(3, &t).unwrap();
        assert!((hw.lambda(1) - 2.0).abs() < 1e-15);
        assert!((hw.lambda(2) + 2.0).abs() < 1e-15);
        for n in 1..40u64 {
            let expect = if n % 2 == 1 { 2.0 } else { 0.0 };
            assert!((hb_eval_direct(3, n, &t).unwrap() - expect).abs() < 1e-12);
            assert!((hw.eval_type1(n, &t).unwrap() - expect).abs() < 1e-12);
            assert!((hb_eval_direct(2, n, &t).unwrap() - 1.0).abs() < 1e-12);
        }
        let empty = hb_weights(1, &t).unwrap();
        assert_eq!(empty.eval_type1(17, &t).unwrap(), 0.0);
        assert_eq!(hb_eval_direct(1, 17, &t).unwrap(), 0.0);
    }

    #[test]
    fn hb_lambda_bound() {
        let t = build_sieve(1000).unwrap();
        let hw = hb_weights(100, &t).unwrap();
        let bracket = arith::log_bracket(100.0).unwrap();
        assert!(hw.max_abs_lambda() <= 10.0 * bracket);
    }

    #[test]
    fn hb_routes_agree_at_large_n() {
        let t = sieve();
        let hw = hb_weights(1000, &t).unwrap();
        let a = hb_eval_direct(1000, 720720, &t).unwrap();
        let b = hw.eval_type1(720720, &t).unwrap();
        assert!((a - b).abs() <= HB_TYPE1_REL * a.abs().max(b.abs()).max(1.0));
        let range = hw.eval_range(2000);
        for n in 1..=2000u64 {
            assert!((range[n as usize] - hw.eval_type1(n, &t).unwrap()).abs() < 1e-9);
        }
    }

    #[test]
    fn lambda_n_levels() {
        let w = lambda_n_level(1e6, 10).unwrap();
        assert!((w - 19f64.powf(0.1).exp()).abs() < 1e-12);
        assert!((w - 3.83).abs() < 0.01);
        let w2 = lambda_n_level(1e6, 2).unwrap();
        assert!((w2 - 19f64.sqrt().exp()).abs() < 1e-12 && (w2 - 78.3).abs() < 0.2);
        // large C0 tends to e
        let w_big = lambda_n_level(1e6, 10_000).unwrap();
        assert!((w_big - std::f64::consts::E).abs() < 0.01);
        let t = build_sieve(1000).unwrap();
        let a = MangoldtApproximant::new(1e6, 10, &t).unwrap();
        assert_eq!(a.cramer().primes(), &[2, 3]);
        assert_eq!(a.eval(5), 3.0);
        let big = MangoldtApproximant::new(1e6, 10_000, &t).unwrap();
        assert_eq!(big.cramer().primes(), &[2]);
        assert!(lambda_n_level(1.5, 2).is_err());
    }

    #[test]
    fn ramanujan_expansion_examples() {
        let t = build_sieve(1000).unwrap();
        assert!((cramer_via_ramanujan_check(3.0, 5, &t).unwrap() - 3.0).abs() < 1e-12);
        assert!(cramer_via_ramanujan_check(3.0, 6, &t).unwrap().abs() < 1e-12);
        assert!((cramer_via_ramanujan_check(1.0, 11, &t).unwrap() - 1.0).abs() < 1e-12);
        assert!(cramer_via_ramanujan_check(37.0, 1, &t).is_err());
        let cw = CramerWeight::new(31.0, &t).unwrap();
        for n in [1i64, 2, 37, 41 * 43, 2 * 3 * 5 * 7 * 11] {
            let v = cramer_via_ramanujan_check(31.0, n, &t).unwrap();
            assert!((v - cw.eval(n)).abs() < CRAMER_RAMANUJAN_ABS * 10.0, "n={n}");
        }
    }

    fn brute_beta(p: u64, forms: &[AffineForm], z: &[f64]) -> f64 {
        // independent route: recursive enumeration over all residue tuples
        let m = forms[0].coeffs.len();
        fn rec(p: u64, m: usize, acc: &mut Vec<i64>, forms: &[AffineForm], z: &[f64], out: &mut f64) {
            if acc.len() == m {
                let mut prod = 1.0;
                for (f, &zi) in forms.iter().zip(z) {
                    if p as f64 <= zi {
                        let v = f.eval(acc).rem_euclid(p as i64);
                        prod *= if v != 0 { p as f64 / (p as f64 - 1.0) } else { 0.0 };
                    }
                }
                *out += prod;
                return;
            }
            for x in 0..p as i64 {
                acc.push(x);
                rec(p, m, acc, forms, z, out);
                acc.pop();
            }
        }
        let mut out = 0.0;
        rec(p, m, &mut Vec::new(), forms, z, &mut out);
        out / (p as f64).powi(m as i32)
    }

    #[test]
    fn local_factor_examples() {
        let id = vec![AffineForm::new(vec![1], 0)];
        for p in [2u64, 3, 5, 7] {
            assert!((local_factor_beta(p, &id, &[10.0]).unwrap() - 1.0).abs() < 1e-15);
        }
        let twice = vec![AffineForm::new(vec![2], 0)];
        assert_eq!(local_factor_beta(2, &twice, &[2.0]).unwrap(), 0.0);
        // p > max z
        assert_eq!(local_factor_beta(11, &twice, &[5.0]).unwrap(), 1.0);
        // U^2 configuration in variables (n, h1, h2)
        let u2 = vec![
            AffineForm::new(vec![1, 0, 0], 0),
            AffineForm::new(vec![1, 1, 0], 0),
            AffineForm::new(vec![1, 0, 1], 0),
            AffineForm::new(vec![1, 1, 1], 0),
        ];
        let z = [5.0; 4];
        for p in [2u64, 3, 5] {
            let a = local_factor_beta(p, &u2, &z).unwrap();
            let b = brute_beta(p, &u2, &z);
            assert!((a - b).abs() < 1e-12, "p={p}");
        }
        // twin forms: β_2 = 2, β_3 = 3/4, β_5 = 15/16
        let twin = vec![AffineForm::new(vec![1], 0), AffineForm::new(vec![1], 2)];
        let zz = [5.0, 5.0];
        assert!((local_factor_beta(2, &twin, &zz).unwrap() - 2.0).abs() < 1e-15);
        assert!((local_factor_beta(3, &twin, &zz).unwrap() - 0.75).abs() < 1e-15);
        assert!((local_factor_beta(5, &twin, &zz).unwrap() - 15.0 / 16.0).abs() < 1e-15);
    }

    #[test]
    fn linear_count_examples() {
        let t = sieve();
        let omega = IntegerBox::interval(1, 1_000_000).unwrap();
        let id = vec![AffineForm::new(vec![1], 0)];
        let (lhs, pred) = cramer_linear_count(&id, &omega, &[10.0], &t).unwrap();
        assert!((lhs / pred - 1.0).abs() <= 0.01);

        let twin = vec![AffineForm::new(vec![1], 0), AffineForm::new(vec![1], 2)];
        let (lhs, pred) = cramer_linear_count(&twin, &omega, &[5.0, 5.0], &t).unwrap();
        assert!((lhs / pred - 1.0).abs() <= 0.02);

        let small = IntegerBox::new(vec![-3, 0], vec![4, 9]).unwrap();
        let forms = vec![AffineForm::new(vec![1, 0], 1), AffineForm::new(vec![1, 1], 0)];
        let (lhs, pred) = cramer_linear_count(&forms, &small, &[1.0, 1.0], &t).unwrap();
        assert_eq!(lhs, 80.0);
        assert_eq!(pred, 80.0);

        let dependent = vec![AffineForm::new(vec![1, 2], 1), AffineForm::new(vec![2, 4], 2)];
        assert!(matches!(
            cramer_linear_count(&dependent, &small, &[5.0, 5.0], &t),
            Err(MlabError::InvalidArgument(_))
        ));
    }

    #[test]
    fn beta_sieve_sandwich_and_mean() {
        let t = sieve();
        let (plus, minus) = beta_sieve_weights(10.0, 1000.0, &t).unwrap();
        assert_eq!(plus.weight(1), 1);
        assert_eq!(minus.weight(1), 1);
        for sw in [&plus, &minus] {
            for &(d, l) in sw.weights() {
                assert!(d as f64 <= 1000.0);
                assert!((-1..=1).contains(&l));
                assert!(sw.primes().iter().all(|&p| p <= 10));
            }
        }
        let cw = CramerWeight::new(10.0, &t).unwrap();
        let up = plus.divisor_sum_range(100_000);
        let lo = minus.divisor_sum_range(100_000);
        for n in 1..=100_000u64 {
            let ind = cw.is_coprime(n as i64) as i64;
            assert!(lo[n as usize] <= ind && ind <= up[n as usize], "n={n}");
        }
        assert_eq!(up[210], plus.divisor_sum(210));
        assert!(matches!(beta_sieve_weights(20.0, 10.0, &t), Err(MlabError::InvalidArgument(_))));
    }

    #[test]
    fn beta_sieve_degenerates_to_legendre() {
        // y >= W·w² admits every d | W on both sides
        let t = build_sieve(1000).unwrap();
        let (plus, minus) = beta_sieve_weights(7.0, 210.0 * 49.0, &t).unwrap();
        assert_eq!(plus.weights().len(), 16);
        assert_eq!(minus.weights().len(), 16);
        let cw = CramerWeight::new(7.0, &t).unwrap();
        for n in 1..=2000u64 {
            let ind = cw.is_coprime(n as i64) as i64;
            assert_eq!(plus.divisor_sum(n), ind);
            assert_eq!(minus.divisor_sum(n), ind);
        }
    }
}
