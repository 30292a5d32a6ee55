//! Sieve construction and the multiplicative primitives built on it.

use crate::error::{MlabError, Result};
use crate::tolerances::SIEVE_MAX;

/// Smallest-prime-factor table on `0..=limit` plus the primes up to `limit`.
///
/// Immutable once built; share it freely across threads.
#[derive(Debug, Clone)]
pub struct SieveTable {
    limit: u64,
    spf: Vec<u32>,
    primes: Vec<u32>,
}

/// Prime-power factorization with strictly increasing primes.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Factorization(pub Vec<(u64, u32)>);

impl Factorization {
    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.0.iter().map(|&(p, _)| p)
    }

    pub fn value(&self) -> u64 {
        self.0.iter().map(|&(p, e)| p.pow(e)).product()
    }

    pub fn is_squarefree(&self) -> bool {
        self.0.iter().all(|&(_, e)| e == 1)
    }

    /// All positive divisors, unsorted.
    pub fn divisors(&self) -> Vec<u64> {
        let mut out = vec![1u64];
        for &(p, e) in &self.0 {
            let base = out.len();
            let mut pk = 1u64;
            for _ in 0..e {
                pk *= p;
                for i in 0..base {
                    out.push(out[i] * pk);
                }
            }
        }
        out
    }
}

/// Linear sieve of the smallest prime factor.
pub fn build_sieve(limit: u64) -> Result<SieveTable> {
    if limit < 2 {
        return Err(MlabError::invalid(format!("sieve limit must be >= 2, got {limit}")));
    }
    if limit > SIEVE_MAX {
        return Err(MlabError::scale("limit", format!("{limit} exceeds {SIEVE_MAX}")));
    }
    let n = limit as usize;
    let mut spf = vec![0u32; n + 1];
    let mut primes: Vec<u32> = Vec::new();
    for i in 2..=n {
        if spf[i] == 0 {
            spf[i] = i as u32;
            primes.push(i as u32);
        }
        let si = spf[i];
        for &p in &primes {
            let ip = i * p as usize;
            if p > si || ip > n {
                break;
            }
            spf[ip] = p;
        }
    }
    Ok(SieveTable { limit, spf, primes })
}

impl SieveTable {
    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn primes(&self) -> &[u32] {
        &self.primes
    }

    /// Primes `p <= x`.
    pub fn primes_up_to(&self, x: f64) -> Vec<u64> {
        self.primes
            .iter()
            .take_while(|&&p| (p as f64) <= x)
            .map(|&p| p as u64)
            .collect()
    }

    /// Smallest prime factor of `n >= 2`.
    pub fn spf(&self, n: u64) -> Result<u64> {
        self.check(n)?;
        if n < 2 {
            return Err(MlabError::invalid("spf is defined for n >= 2"));
        }
        Ok(self.spf[n as usize] as u64)
    }

    pub fn is_prime(&self, n: u64) -> Result<bool> {
        self.check(n)?;
        Ok(n >= 2 && self.spf[n as usize] as u64 == n)
    }

    fn check(&self, n: u64) -> Result<()> {
        if n > self.limit {
            return Err(MlabError::OutOfRange(format!(
                "{n} exceeds sieve limit {}",
                self.limit
            )));
        }
        Ok(())
    }

    pub fn factorize(&self, n: u64) -> Result<Factorization> {
        self.check(n)?;
        if n == 0 {
            return Err(MlabError::invalid("cannot factorize 0"));
        }
        let mut out: Vec<(u64, u32)> = Vec::new();
        let mut m = n as usize;
        while m > 1 {
            let p = self.spf[m] as usize;
            let mut e = 0;
            while m % p == 0 {
                m /= p;
                e += 1;
            }
            out.push((p as u64, e));
        }
        Ok(Factorization(out))
    }

    pub fn mobius(&self, n: u64) -> Result<i8> {
        let f = self.factorize(n)?;
        Ok(mobius_of(&f))
    }

    pub fn euler_phi(&self, n: u64) -> Result<u64> {
        let f = self.factorize(n)?;
        Ok(phi_of(&f))
    }

    pub fn von_mangoldt(&self, n: u64) -> Result<f64> {
        let f = self.factorize(n)?;
        Ok(match f.0.as_slice() {
            [(p, _)] => (*p as f64).ln(),
            _ => 0.0,
        })
    }

    /// `#{d | n : d < q}`.
    pub fn truncated_tau(&self, n: u64, q: u64) -> Result<u64> {
        let f = self.factorize(n)?;
        Ok(f.divisors().into_iter().filter(|&d| d < q).count() as u64)
    }

    /// Ramanujan sum through the divisor identity, with both factorizations
    /// read from the sieve.
    pub fn ramanujan_sum(&self, q: u64, n: i64) -> Result<i64> {
        let fq = self.factorize(q)?;
        Ok(ramanujan_from_factorization(&fq, n))
    }

    /// `Λ(n)` for `n` in `0..=n_max`, index 0 set to 0.
    pub fn mangoldt_values(&self, n_max: u64) -> Result<Vec<f64>> {
        self.check(n_max)?;
        let mut out = vec![0.0; n_max as usize + 1];
        for (n, slot) in out.iter_mut().enumerate().skip(2) {
            let p = self.spf[n] as usize;
            let mut m = n;
            while m % p == 0 {
                m /= p;
            }
            if m == 1 {
                *slot = (p as f64).ln();
            }
        }
        Ok(out)
    }

    /// `μ(n)` for `n` in `0..=n_max`, index 0 set to 0.
    pub fn mobius_values(&self, n_max: u64) -> Result<Vec<i8>> {
        self.check(n_max)?;
        let mut out = vec![0i8; n_max as usize + 1];
        if n_max >= 1 {
            out[1] = 1;
        }
        for n in 2..=n_max as usize {
            let p = self.spf[n] as usize;
            let m = n / p;
            out[n] = if m % p == 0 { 0 } else { -out[m] };
        }
        Ok(out)
    }

    /// `φ(n)` for `n` in `0..=n_max`, index 0 set to 0.
    pub fn phi_values(&self, n_max: u64) -> Result<Vec<u64>> {
        self.check(n_max)?;
        let mut out = vec![0u64; n_max as usize + 1];
        if n_max >= 1 {
            out[1] = 1;
        }
        for n in 2..=n_max as usize {
            let p = self.spf[n] as usize;
            let m = n / p;
            out[n] = out[m] * if m % p == 0 { p as u64 } else { p as u64 - 1 };
        }
        Ok(out)
    }
}

pub(crate) fn mobius_of(f: &Factorization) -> i8 {
    if !f.is_squarefree() {
        0
    } else if f.0.len() % 2 == 0 {
        1
    } else {
        -1
    }
}

pub(crate) fn phi_of(f: &Factorization) -> u64 {
    f.0.iter().map(|&(p, e)| (p - 1) * p.pow(e - 1)).product()
}

/// `c_q(n) = Σ_{d | (q,n)} d μ(q/d)`, enumerating the divisors of the gcd.
pub(crate) fn ramanujan_from_factorization(fq: &Factorization, n: i64) -> i64 {
    let n = n.unsigned_abs();
    // exponent of each prime of q in gcd(q, n)
    let gcd_exps: Vec<u32> = fq
        .0
        .iter()
        .map(|&(p, e)| {
            if n == 0 {
                return e;
            }
            let mut k = 0;
            let mut m = n;
            while k < e && m % p == 0 {
                m /= p;
                k += 1;
            }
            k
        })
        .collect();
    let mut total = 0i64;
    let mut idx = vec![0u32; fq.0.len()];
    loop {
        let mut d = 1i64;
        let mut mu = 1i64;
        for (i, &(p, e)) in fq.0.iter().enumerate() {
            d *= (p as i64).pow(idx[i]);
            match e - idx[i] {
                0 => {}
                1 => mu = -mu,
                _ => mu = 0,
            }
        }
        total += d * mu;
        // odometer over the divisor exponents
        let mut i = 0;
        loop {
            if i == idx.len() {
                return total;
            }
            if idx[i] < gcd_exps[i] {
                idx[i] += 1;
                break;
            }
            idx[i] = 0;
            i += 1;
        }
    }
}

/// Trial-division factorization, for callers without a sieve at hand.
pub fn trial_factorize(mut n: u64) -> Factorization {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    Factorization(out)
}

/// Ramanujan sum `c_q(n)` by the divisor identity, factoring `q` by trial
/// division.
pub fn ramanujan_sum(q: u64, n: i64) -> Result<i64> {
    if q == 0 {
        return Err(MlabError::invalid("ramanujan_sum needs q >= 1"));
    }
    Ok(ramanujan_from_factorization(&trial_factorize(q), n))
}

/// `Log N = ⌊log₂ N⌋`, the unique `k` with `2^k <= N < 2^{k+1}`.
pub fn log_scale(n: f64) -> Result<u32> {
    if !(n >= 1.0) || !n.is_finite() {
        return Err(MlabError::invalid(format!("log_scale needs N >= 1, got {n}")));
    }
    // exact for normal floats: the unbiased binary exponent
    Ok((((n.to_bits() >> 52) & 0x7ff) as i64 - 1023) as u32)
}

/// Japanese bracket of the logarithmic scale, `(1 + Log² N)^{1/2}`.
pub fn log_bracket(n: f64) -> Result<f64> {
    let k = log_scale(n)? as f64;
    Ok((1.0 + k * k).sqrt())
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

pub fn lcm(a: u64, b: u64) -> u64 {
    if a == 0 || b == 0 {
        0
    } else {
        a / gcd(a, b) * b
    }
}

/// Inverse of `a` modulo `m` (`gcd(a, m) = 1`, `m >= 1`).
pub fn mod_inverse(a: i64, m: u64) -> Option<u64> {
    let m_i = m as i128;
    let (mut old_r, mut r) = ((a as i128).rem_euclid(m_i), m_i);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    if old_r != 1 && m != 1 {
        return None;
    }
    Some(old_s.rem_euclid(m_i) as u64)
}
