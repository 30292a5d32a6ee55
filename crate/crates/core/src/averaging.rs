//! Bilinear polynomial averages on `Z`, their adjoints, trilinear forms and
//! exact r-variation norms.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::approximants::MangoldtApproximant;
use crate::arith::SieveTable;
use crate::error::{MlabError, Result};
use crate::poly::IntPolynomial;
use crate::series::WindowedSeries;
use crate::tolerances::{DENSE_LEN_MAX, IMPROVING_N_MAX, VARIATION_BRUTE_MAX, VARIATION_DP_MAX};

const X_CHUNK: usize = 4096;

/// Scales `N_1 < N_2 < ...` with `N_{j+1} / N_j > λ`.
#[derive(Debug, Clone, PartialEq)]
pub struct LacunarySet {
    lambda: f64,
    scales: Vec<f64>,
}

impl LacunarySet {
    pub fn new(lambda: f64, mut scales: Vec<f64>) -> Result<Self> {
        if !(lambda > 1.0) || !lambda.is_finite() {
            return Err(MlabError::invalid(format!("lacunarity λ must exceed 1, got {lambda}")));
        }
        if scales.iter().any(|&s| !(s >= 1.0) || !s.is_finite()) {
            return Err(MlabError::invalid("lacunary scales must be finite reals ≥ 1"));
        }
        scales.sort_by(f64::total_cmp);
        for w in scales.windows(2) {
            if !(w[1] / w[0] > lambda) {
                return Err(MlabError::invalid(format!(
                    "scales {} and {} have ratio ≤ λ = {lambda}",
                    w[0], w[1]
                )));
            }
        }
        Ok(Self { lambda, scales })
    }

    /// Greedy λ-lacunary subsequence of `⌈2^{j/2}⌉`, `j = 0, 1, ...`, capped at `max`.
    pub fn half_dyadic(max: f64, lambda: f64) -> Result<Self> {
        let mut scales: Vec<f64> = Vec::new();
        let mut j = 0i32;
        loop {
            let s = 2f64.powf(j as f64 / 2.0).ceil();
            if s > max {
                break;
            }
            if scales.last().is_none_or(|&l| s / l > lambda) {
                scales.push(s);
            }
            j += 1;
        }
        Self::new(lambda, scales)
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn scales(&self) -> &[f64] {
        &self.scales
    }
}

struct Term {
    sa: i64,
    sb: i64,
    w: f64,
}

fn poly_shift(p: &IntPolynomial, n: i64) -> Result<i64> {
    p.checked_eval(n)
        .and_then(|v| i64::try_from(v).ok())
        .ok_or_else(|| MlabError::OutOfRange(format!("P({n}) does not fit in i64")))
}

/// `out(x) = scale · Σ_t w_t a(x + sa_t) b(x + sb_t)` on the smallest window
/// where it can be nonzero.
fn shifted_bilinear(terms: &[Term], a: &WindowedSeries, b: &WindowedSeries, scale: f64) -> Result<WindowedSeries> {
    if terms.is_empty() {
        return Ok(WindowedSeries::zeros(0, 1));
    }
    let (mut sa_min, mut sa_max, mut sb_min, mut sb_max) = (i64::MAX, i64::MIN, i64::MAX, i64::MIN);
    for t in terms {
        sa_min = sa_min.min(t.sa);
        sa_max = sa_max.max(t.sa);
        sb_min = sb_min.min(t.sb);
        sb_max = sb_max.max(t.sb);
    }
    let lo = (a.offset() - sa_max).max(b.offset() - sb_max);
    let hi = (a.end() - 1 - sa_min).min(b.end() - 1 - sb_min);
    if lo > hi {
        return Ok(WindowedSeries::zeros(0, 1));
    }
    let len = (hi - lo + 1) as u64;
    if len > DENSE_LEN_MAX {
        return Err(MlabError::scale("output window", format!("{len} points exceeds {DENSE_LEN_MAX}")));
    }
    let mut out = vec![Complex64::new(0.0, 0.0); len as usize];
    let (av, bv) = (a.values(), b.values());
    let (ao, bo) = (a.offset(), b.offset());
    let (al, bl) = (av.len() as i64, bv.len() as i64);
    out.par_chunks_mut(X_CHUNK).enumerate().for_each(|(ci, chunk)| {
        let x0 = lo + (ci * X_CHUNK) as i64;
        let clen = chunk.len() as i64;
        for t in terms {
            // indices i in [0, clen) with 0 ≤ x0+i+sa-ao < al and likewise for b
            let ia = x0 + t.sa - ao;
            let ib = x0 + t.sb - bo;
            let start = 0.max(-ia).max(-ib);
            let stop = clen.min(al - ia).min(bl - ib);
            if start >= stop {
                continue;
            }
            let wa = &av[(ia + start) as usize..(ia + stop) as usize];
            let wb = &bv[(ib + start) as usize..(ib + stop) as usize];
            let dst = &mut chunk[start as usize..stop as usize];
            for ((o, &x), &y) in dst.iter_mut().zip(wa).zip(wb) {
                *o += x * y * t.w;
            }
        }
        for o in chunk.iter_mut() {
            *o *= scale;
        }
    });
    WindowedSeries::new(lo, out)
}

fn check_scale(n: u64) -> Result<()> {
    if n == 0 {
        return Err(MlabError::invalid("scale N must be positive"));
    }
    Ok(())
}

fn build_terms(
    n: u64,
    upper_only: bool,
    weight: &(impl Fn(u64) -> f64 + ?Sized),
    shifts: impl Fn(i64) -> Result<(i64, i64)>,
) -> Result<Vec<Term>> {
    check_scale(n)?;
    let start = if upper_only { n / 2 + 1 } else { 1 };
    let mut terms = Vec::new();
    for m in start..=n {
        let w = weight(m);
        if w == 0.0 {
            continue;
        }
        let (sa, sb) = shifts(m as i64)?;
        terms.push(Term { sa, sb, w });
    }
    Ok(terms)
}

/// `Ã_{N,w}(f,g)(x) = (1/N) Σ_{N/2 < n ≤ N} w(n) f(x+n) g(x+P(n))`.
pub fn avg_upper(
    n: u64,
    weight: impl Fn(u64) -> f64,
    f: &WindowedSeries,
    g: &WindowedSeries,
    p: &IntPolynomial,
) -> Result<WindowedSeries> {
    let terms = build_terms(n, true, &weight, |m| Ok((m, poly_shift(p, m)?)))?;
    shifted_bilinear(&terms, f, g, 1.0 / n as f64)
}

/// `A_{N,w}(f,g)(x) = (1/N) Σ_{1 ≤ n ≤ N} w(n) f(x+n) g(x+P(n))`.
pub fn avg_full(
    n: u64,
    weight: impl Fn(u64) -> f64,
    f: &WindowedSeries,
    g: &WindowedSeries,
    p: &IntPolynomial,
) -> Result<WindowedSeries> {
    let terms = build_terms(n, false, &weight, |m| Ok((m, poly_shift(p, m)?)))?;
    shifted_bilinear(&terms, f, g, 1.0 / n as f64)
}

/// Adjoint of [`avg_upper`] in its first slot under `Σ_x u(x) v(x)`:
/// `(1/N) Σ_{N/2 < n ≤ N} w(n) h(x−n) g(x−n+P(n))`.
pub fn avg_adjoint(
    n: u64,
    weight: impl Fn(u64) -> f64,
    h: &WindowedSeries,
    g: &WindowedSeries,
    p: &IntPolynomial,
) -> Result<WindowedSeries> {
    let terms = build_terms(n, true, &weight, |m| Ok((-m, poly_shift(p, m)? - m)))?;
    shifted_bilinear(&terms, h, g, 1.0 / n as f64)
}

/// `Σ_x h(x) · Ã_{N,w}(f,g)(x)` (bilinear pairing, no conjugation).
pub fn trilinear_form(
    n: u64,
    weight: impl Fn(u64) -> f64,
    f: &WindowedSeries,
    g: &WindowedSeries,
    h: &WindowedSeries,
    p: &IntPolynomial,
) -> Result<Complex64> {
    let a = avg_upper(n, weight, f, g, p)?;
    Ok(pair(h, &a))
}

/// `Σ_x u(x) v(x)` over the overlap of the two windows.
pub fn pair(u: &WindowedSeries, v: &WindowedSeries) -> Complex64 {
    let lo = u.offset().max(v.offset());
    let hi = u.end().min(v.end());
    (lo..hi).map(|x| u.get(x) * v.get(x)).sum()
}

fn check_r(r: f64) -> Result<()> {
    if !(r >= 1.0) || !r.is_finite() {
        return Err(MlabError::invalid(format!("variation exponent r must be a finite real ≥ 1, got {r}")));
    }
    Ok(())
}

/// Largest `Σ |a_{t_{j+1}} − a_{t_j}|^r` over increasing index paths.
fn variation_power<T: Copy>(values: &[T], r: f64, dist: impl Fn(T, T) -> f64) -> Result<f64> {
    check_r(r)?;
    if values.len() > VARIATION_DP_MAX {
        return Err(MlabError::scale("variation length", format!("{} exceeds {VARIATION_DP_MAX}", values.len())));
    }
    let mut best = vec![0.0f64; values.len()];
    for t in 1..values.len() {
        let mut b = 0.0f64;
        for s in 0..t {
            let c = best[s] + dist(values[s], values[t]).powf(r);
            if c > b {
                b = c;
            }
        }
        best[t] = b;
    }
    Ok(best.into_iter().fold(0.0, f64::max))
}

pub fn variation_seminorm(values: &[f64], r: f64) -> Result<f64> {
    Ok(variation_power(values, r, |a, b| (b - a).abs())?.powf(1.0 / r))
}

pub fn variation_seminorm_complex(values: &[Complex64], r: f64) -> Result<f64> {
    Ok(variation_power(values, r, |a, b| (b - a).norm())?.powf(1.0 / r))
}

/// `sup_t |a_t| + V^r(a)`.
pub fn variation_norm(values: &[f64], r: f64) -> Result<f64> {
    let sup = values.iter().map(|v| v.abs()).fold(0.0, f64::max);
    Ok(sup + variation_seminorm(values, r)?)
}

pub fn variation_norm_complex(values: &[Complex64], r: f64) -> Result<f64> {
    let sup = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    Ok(sup + variation_seminorm_complex(values, r)?)
}

/// Exhaustive maximum over all index subsequences. Test oracle.
pub fn variation_bruteforce(values: &[f64], r: f64) -> Result<f64> {
    check_r(r)?;
    if values.len() > VARIATION_BRUTE_MAX {
        return Err(MlabError::scale(
            "variation_bruteforce length",
            format!("{} exceeds {VARIATION_BRUTE_MAX}", values.len()),
        ));
    }
    let n = values.len();
    let mut best = 0.0f64;
    for mask in 0u32..(1u32 << n) {
        let mut prev: Option<f64> = None;
        let mut acc = 0.0f64;
        for (i, &v) in values.iter().enumerate() {
            if mask >> i & 1 == 1 {
                if let Some(p) = prev {
                    acc += (v - p).abs().powf(r);
                }
                prev = Some(v);
            }
        }
        if acc > best {
            best = acc;
        }
    }
    Ok(best.powf(1.0 / r))
}

/// `(Λ + Λ_N)(n)` for `n = 1..=N`, index `n - 1`.
pub fn mangoldt_plus_approximant(n: u64, c0: u32, sieve: &SieveTable) -> Result<Vec<f64>> {
    let lam = sieve.mangoldt_values(n)?;
    let approx = MangoldtApproximant::new(n as f64, c0, sieve)?;
    Ok((1..=n).map(|m| lam[m as usize] + approx.eval(m as i64)).collect())
}

fn check_improving(n: u64, p: f64) -> Result<f64> {
    check_scale(n)?;
    if n > IMPROVING_N_MAX {
        return Err(MlabError::scale("improving_ratio N", format!("{n} exceeds {IMPROVING_N_MAX}")));
    }
    if !(p > 1.0 && p <= 2.0) {
        return Err(MlabError::invalid(format!("exponent p must lie in (1, 2], got {p}")));
    }
    Ok(p / (p - 1.0))
}

/// `‖E_{n∈[N]} (Λ+Λ_N)(n) f(·+Q(n))‖_{p'} / (N^{d/p'−d/p} ‖f‖_p)`.
pub fn improving_ratio(
    n: u64,
    q: &IntPolynomial,
    f: &WindowedSeries,
    p: f64,
    c0: u32,
    sieve: &SieveTable,
) -> Result<f64> {
    let pp = check_improving(n, p)?;
    let fnorm = f.lp_norm(p);
    if fnorm == 0.0 {
        return Err(MlabError::invalid("‖f‖_p = 0"));
    }
    let w = mangoldt_plus_approximant(n, c0, sieve)?;
    let mut terms = Vec::new();
    for m in 1..=n {
        let wm = w[(m - 1) as usize];
        if wm != 0.0 {
            terms.push(Term { sa: poly_shift(q, m as i64)?, sb: 0, w: wm });
        }
    }
    // second factor is the constant 1 on the needed window
    let lo = f.offset() - terms.iter().map(|t| t.sa).max().unwrap_or(0);
    let hi = f.end() - terms.iter().map(|t| t.sa).min().unwrap_or(0);
    let len = (hi - lo).max(1) as u64;
    if len > DENSE_LEN_MAX {
        return Err(MlabError::scale("output window", format!("{len} points exceeds {DENSE_LEN_MAX}")));
    }
    let one = WindowedSeries::ones(lo, len as usize)?;
    let out = shifted_bilinear(&terms, f, &one, 1.0 / n as f64)?;
    let d = q.degree() as f64;
    let nf = n as f64;
    Ok(out.lp_norm(pp) / (nf.powf(d / pp - d / p) * fnorm))
}

/// [`improving_ratio`] at `p = 2` for `f = 1_{[lo, lo+len)}` via the Gram
/// sum `N^{-2} Σ_{n,m} w(n) w(m) max(0, len − |Q(n) − Q(m)|)`.
pub fn improving_ratio_interval_l2(n: u64, q: &IntPolynomial, len: u64, c0: u32, sieve: &SieveTable) -> Result<f64> {
    check_improving(n, 2.0)?;
    if len == 0 {
        return Err(MlabError::invalid("‖f‖_p = 0"));
    }
    let w = mangoldt_plus_approximant(n, c0, sieve)?;
    let mut pts = Vec::new();
    for m in 1..=n {
        let wm = w[(m - 1) as usize];
        if wm != 0.0 {
            pts.push((poly_shift(q, m as i64)?, wm));
        }
    }
    let l = len as i64;
    let rows: Vec<f64> = pts
        .par_iter()
        .map(|&(qa, wa)| {
            pts.iter()
                .map(|&(qb, wb)| {
                    let ov = l - (qa - qb).abs();
                    if ov > 0 { wb * ov as f64 } else { 0.0 }
                })
                .sum::<f64>()
                * wa
        })
        .collect();
    let gram: f64 = rows.iter().sum();
    let nf = n as f64;
    Ok((gram.max(0.0)).sqrt() / nf / (len as f64).sqrt())
}
