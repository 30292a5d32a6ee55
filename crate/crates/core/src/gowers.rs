//! Full Gowers norms `U^{d+1}[N]` and certified lower bounds for the little
//! norms `u^{d+1}[N]`.
//!
//! The full norm is computed by the differencing recursion
//! `‖g‖_{U^{k+1}}^{2^{k+1}} = Σ_h ‖Δ_h g‖_{U^k}^{2^k}`, bottoming out at `U²`,
//! which is the normalized `ℓ⁴` norm of a zero-padded DFT.
//!
//! The little norm is a supremum over real polynomial phases, which is a
//! nonconvex problem. [`little_u_lower`] never claims the supremum: it returns
//! the exact correlation at the best phase it found, so the value is always a
//! valid lower bound and nothing more.

use std::cell::RefCell;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::arith::gcd;
use crate::error::{MlabError, Result};
use crate::phase;
pub use crate::poly::PolynomialPhase;
pub use crate::series::WindowedSeries;
use crate::tolerances::GOWERS_BRUTE_MAX;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

pub(crate) fn forward_plan(len: usize) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_forward(len))
}

const CHUNK: usize = 1 << 14;

/// Sum in fixed-size chunks, reduced in index order, so results do not depend
/// on the thread schedule.
pub(crate) fn ordered_sum<F>(len: usize, f: F) -> Complex64
where
    F: Fn(usize) -> Complex64 + Sync,
{
    let chunks: Vec<Complex64> = (0..len.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let lo = c * CHUNK;
            let hi = (lo + CHUNK).min(len);
            (lo..hi).map(&f).sum()
        })
        .collect();
    chunks.into_iter().sum()
}

/// `‖g‖_{U²(Z)}⁴` for `g` supported on `0..g.len()`.
fn u2_power(g: &[Complex64]) -> f64 {
    let m = (2 * g.len()).next_power_of_two().max(2);
    let mut buf = vec![Complex64::new(0.0, 0.0); m];
    buf[..g.len()].copy_from_slice(g);
    forward_plan(m).process(&mut buf);
    buf.iter().map(|z| z.norm_sqr().powi(2)).sum::<f64>() / m as f64
}

/// `‖g‖_{U^k(Z)}^{2^k}`, `k >= 1`.
fn uk_power(g: &[Complex64], k: u32, parallel: bool) -> f64 {
    match k {
        1 => g.iter().sum::<Complex64>().norm_sqr(),
        2 => u2_power(g),
        _ => {
            let len = g.len();
            let term = |h: usize| -> f64 {
                let diff: Vec<Complex64> = (0..len - h).map(|x| g[x + h] * g[x].conj()).collect();
                let v = uk_power(&diff, k - 1, false);
                if h == 0 {
                    v
                } else {
                    // Δ_{-h} g is a shifted conjugate of Δ_h g
                    2.0 * v
                }
            };
            let terms: Vec<f64> = if parallel {
                (0..len).into_par_iter().map(term).collect()
            } else {
                (0..len).map(term).collect()
            };
            terms.into_iter().sum()
        }
    }
}

fn check_full_scale(n: usize, d: u32) -> Result<()> {
    let k = d + 1;
    let limit: usize = match k {
        1 | 2 => 10_000_000,
        3 => 1_000_000,
        4 => 2_000,
        _ => 64,
    };
    if n > limit {
        return Err(MlabError::scale(
            "N",
            format!("U^{k}[N] recursion limited to N <= {limit}, got {n}"),
        ));
    }
    Ok(())
}

fn interval_values(f: &WindowedSeries, n: usize) -> Vec<Complex64> {
    f.dense(1, n)
}

/// `‖f‖_{U^{d+1}[N]} = ‖f 1_{[N]}‖_{U^{d+1}(Z)} / ‖1_{[N]}‖_{U^{d+1}(Z)}` with
/// `[N] = {1, …, N}`.
pub fn u_full_norm(f: &WindowedSeries, n: usize, d: u32) -> Result<f64> {
    if n == 0 {
        return Err(MlabError::invalid("N must be positive"));
    }
    check_full_scale(n, d)?;
    let g = interval_values(f, n);
    let ones = vec![Complex64::new(1.0, 0.0); n];
    let k = d + 1;
    let num = uk_power(&g, k, true).max(0.0);
    let den = uk_power(&ones, k, true);
    Ok((num / den).powf(1.0 / 2f64.powi(k as i32)))
}

/// Definitional sum over `(x, h_1, …, h_{d+1})`; test oracle for
/// [`u_full_norm`].
pub fn u_full_norm_bruteforce(f: &WindowedSeries, n: usize, d: u32) -> Result<f64> {
    if n == 0 {
        return Err(MlabError::invalid("N must be positive"));
    }
    if (n as f64).powi(d as i32 + 2) > GOWERS_BRUTE_MAX {
        return Err(MlabError::scale("N", format!("N^(d+2) exceeds {GOWERS_BRUTE_MAX}")));
    }
    let g = interval_values(f, n);
    let ones = vec![Complex64::new(1.0, 0.0); n];
    let k = d as usize + 1;
    let num = brute_power(&g, k).max(0.0);
    let den = brute_power(&ones, k);
    Ok((num / den).powf(1.0 / 2f64.powi(k as i32)))
}

fn brute_power(g: &[Complex64], k: usize) -> f64 {
    let len = g.len() as i64;
    let mut h = vec![-(len - 1); k];
    let mut total = Complex64::new(0.0, 0.0);
    loop {
        for x in 0..len {
            let mut prod = Complex64::new(1.0, 0.0);
            let mut inside = true;
            for omega in 0u32..(1 << k) {
                let mut y = x;
                for (j, hj) in h.iter().enumerate() {
                    if omega >> j & 1 == 1 {
                        y += hj;
                    }
                }
                if y < 0 || y >= len {
                    inside = false;
                    break;
                }
                let v = g[y as usize];
                prod *= if omega.count_ones() % 2 == 1 { v.conj() } else { v };
            }
            if inside {
                total += prod;
            }
        }
        let mut j = 0;
        while j < k {
            h[j] += 1;
            if h[j] < len {
                break;
            }
            h[j] = -(len - 1);
            j += 1;
        }
        if j == k {
            break;
        }
    }
    total.re
}

/// `E_{n∈[N]} f(n) e(-Q(n))`.
pub fn phase_correlation(f: &WindowedSeries, n: usize, phase: &PolynomialPhase) -> Complex64 {
    if n == 0 {
        return Complex64::new(0.0, 0.0);
    }
    let s = ordered_sum(n, |i| {
        let x = i as i64 + 1;
        let v = f.get(x);
        if v == Complex64::new(0.0, 0.0) {
            v
        } else {
            v * phase::e(-phase.frac_at(x))
        }
    });
    s / n as f64
}

/// Options for [`little_u_lower`]. `q_max`, `grid` and `refine_steps` are the
/// search knobs; `keep` is how many of the best grid candidates are refined.
#[derive(Debug, Clone, Copy)]
pub struct LittleSearch {
    pub q_max: u64,
    pub grid: usize,
    pub refine_steps: usize,
    pub keep: usize,
}

impl Default for LittleSearch {
    fn default() -> Self {
        Self { q_max: 12, grid: 5, refine_steps: 40, keep: 4 }
    }
}

/// Candidate values for a coefficient of degree `j`: every reduced `a/q` with
/// `q <= q_max`, shifted by `grid` offsets of size at most `q_max / N^j`.
fn coefficient_grid(q_max: u64, grid: usize, n: usize, j: u32) -> Vec<f64> {
    let span = q_max as f64 / (n as f64).powi(j as i32);
    let offsets: Vec<f64> = if grid <= 1 {
        vec![0.0]
    } else {
        (0..grid)
            .map(|k| -span + 2.0 * span * k as f64 / (grid - 1) as f64)
            .collect()
    };
    let mut out = Vec::new();
    for q in 1..=q_max.max(1) {
        for a in 0..q {
            if gcd(a, q) != 1 {
                continue;
            }
            for &o in &offsets {
                out.push(a as f64 / q as f64 + o);
            }
        }
    }
    out
}

/// Certified lower bound for `‖f‖_{u^{d+1}[N]}` with the phase that attains
/// it. Degree-≥2 coefficients come from the rational grid; the linear
/// coefficient from the same grid plus a 4x oversampled FFT scan; then the
/// best few candidates are refined by coordinate ascent with geometrically
/// shrinking steps.
pub fn little_u_lower(
    f: &WindowedSeries,
    n: usize,
    d: u32,
    q_max: u64,
    grid: usize,
    refine_steps: usize,
) -> Result<(f64, PolynomialPhase)> {
    little_u_lower_with(f, n, d, LittleSearch { q_max, grid, refine_steps, ..Default::default() })
}

pub fn little_u_lower_with(
    f: &WindowedSeries,
    n: usize,
    d: u32,
    opts: LittleSearch,
) -> Result<(f64, PolynomialPhase)> {
    if n == 0 {
        return Err(MlabError::invalid("N must be positive"));
    }
    let g = interval_values(f, n);
    let zero = PolynomialPhase::zero(d as usize);
    let mut candidates: Vec<(f64, PolynomialPhase)> = vec![(phase_correlation(f, n, &zero).norm(), zero)];
    if d == 0 {
        let best = candidates.pop().unwrap();
        return Ok(best);
    }

    // every combination of coefficients of degree 2..=d
    let mut tops: Vec<Vec<f64>> = vec![vec![]];
    for j in 2..=d {
        let grid_j = coefficient_grid(opts.q_max, opts.grid, n, j);
        tops = tops
            .into_iter()
            .flat_map(|t| {
                grid_j.iter().map(move |&c| {
                    let mut t2 = t.clone();
                    t2.push(c);
                    t2
                })
            })
            .collect();
    }
    let linear_grid = coefficient_grid(opts.q_max, opts.grid, n, 1);
    let m = (4 * n).next_power_of_two();

    let found: Vec<Vec<(f64, PolynomialPhase)>> = tops
        .par_iter()
        .map(|top| {
            let mut coeffs = vec![0.0, 0.0];
            coeffs.extend_from_slice(top);
            let demod: Vec<Complex64> = g
                .iter()
                .enumerate()
                .map(|(i, &v)| v * phase::e(-phase::real_poly_frac(&coeffs, i as i64 + 1)))
                .collect();
            let mut local = Vec::new();
            // FFT scan: Σ_i demod[i] e(-θ i) at θ = k/m
            let mut buf = vec![Complex64::new(0.0, 0.0); m];
            buf[..n].copy_from_slice(&demod);
            forward_plan(m).process(&mut buf);
            let (k_best, v_best) = buf
                .iter()
                .enumerate()
                .map(|(k, z)| (k, z.norm()))
                .fold((0, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            let mut c = coeffs.clone();
            c[1] = k_best as f64 / m as f64;
            local.push((v_best / n as f64, PolynomialPhase::new(c)));
            // rational linear candidates, evaluated exactly
            for &a1 in &linear_grid {
                let s: Complex64 = demod
                    .iter()
                    .enumerate()
                    .map(|(i, &v)| v * phase::e(-phase::frac_mul(a1, i as i128 + 1)))
                    .sum();
                let mut c = coeffs.clone();
                c[1] = a1;
                local.push((s.norm() / n as f64, PolynomialPhase::new(c)));
            }
            local
        })
        .collect();
    candidates.extend(found.into_iter().flatten());
    candidates.sort_by(|a, b| b.0.total_cmp(&a.0));
    candidates.truncate(opts.keep.max(1));

    let mut best: Option<(f64, PolynomialPhase)> = None;
    for (_, start) in candidates {
        let refined = refine(f, n, d, start, opts);
        if best.as_ref().map_or(true, |b| refined.0 > b.0) {
            best = Some(refined);
        }
    }
    Ok(best.unwrap())
}

fn refine(f: &WindowedSeries, n: usize, d: u32, start: PolynomialPhase, opts: LittleSearch) -> (f64, PolynomialPhase) {
    let mut cur = start;
    let mut val = phase_correlation(f, n, &cur).norm();
    let mut steps: Vec<f64> = (0..=d)
        .map(|j| 1.0 / ((opts.grid.max(1) as f64) * 4.0 * (n as f64).powi(j as i32)))
        .collect();
    for _ in 0..opts.refine_steps {
        let mut improved = false;
        for j in 1..=d as usize {
            for dir in [1.0, -1.0] {
                let mut trial = cur.clone();
                trial.coeffs[j] += dir * steps[j];
                let v = phase_correlation(f, n, &trial).norm();
                if v > val {
                    val = v;
                    cur = trial;
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            for s in steps.iter_mut() {
                *s *= 0.5;
            }
        }
    }
    // report the exact value at the returned phase
    (phase_correlation(f, n, &cur).norm(), cur)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::build_sieve;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_pm1(n: usize, seed: u64) -> WindowedSeries {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let vals: Vec<f64> = (0..n).map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 }).collect();
        WindowedSeries::from_real(1, &vals).unwrap()
    }

    fn random_complex(n: usize, seed: u64) -> WindowedSeries {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let vals: Vec<Complex64> = (0..n).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        WindowedSeries::new(1, vals).unwrap()
    }

    #[test]
    fn constant_has_norm_one() {
        for d in 0..3 {
            let f = WindowedSeries::ones(1, 40).unwrap();
            assert!((u_full_norm(&f, 40, d).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn polynomial_phase_has_norm_one() {
        let q = PolynomialPhase::new(vec![0.3, 0.1234, 0.0177]);
        let f = WindowedSeries::from_fn(1, 50, |n| q.e_at(n)).unwrap();
        assert!((u_full_norm(&f, 50, 2).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn recursion_matches_bruteforce() {
        for (i, n) in [8usize, 16].into_iter().enumerate() {
            for d in [1u32, 2] {
                let f = random_complex(n, 10 + i as u64 * 7 + d as u64);
                let a = u_full_norm(&f, n, d).unwrap();
                let b = u_full_norm_bruteforce(&f, n, d).unwrap();
                assert!((a - b).abs() <= 1e-9 * b, "n={n} d={d} {a} {b}");
            }
        }
        let f = random_pm1(16, 3);
        let a = u_full_norm(&f, 16, 1).unwrap();
        let b = u_full_norm_bruteforce(&f, 16, 1).unwrap();
        assert!((a - b).abs() <= 1e-9 * b);
    }

    #[test]
    fn phase_invariance_and_homogeneity() {
        let f = random_complex(64, 5);
        let coeffs = [0.2, 0.731, 0.0123];
        for d in [1u32, 2] {
            let q = PolynomialPhase::new(coeffs[..=d as usize].to_vec());
            let g = f.map(|x, v| v * q.e_at(x));
            let a = u_full_norm(&f, 64, d).unwrap();
            let b = u_full_norm(&g, 64, d).unwrap();
            assert!((a - b).abs() < 1e-9, "d={d}");
            let c = u_full_norm(&f.scale(Complex64::new(0.0, 2.5)), 64, d).unwrap();
            assert!((c - 2.5 * a).abs() < 1e-9 * c);
        }
    }

    #[test]
    fn translation_invariance() {
        let f = random_complex(30, 9);
        let shifted = WindowedSeries::new(101, f.values().to_vec()).unwrap();
        let a = u_full_norm(&f, 30, 1).unwrap();
        let direct = u_full_norm(&WindowedSeries::new(1, shifted.dense(101, 30)).unwrap(), 30, 1).unwrap();
        assert!((a - direct).abs() < 1e-12);
    }

    #[test]
    fn scale_guard() {
        let f = WindowedSeries::ones(1, 10).unwrap();
        assert!(matches!(u_full_norm(&f, 3000, 3), Err(MlabError::UnsupportedScale { .. })));
        assert!(matches!(u_full_norm_bruteforce(&f, 200, 2), Err(MlabError::UnsupportedScale { .. })));
    }

    #[test]
    fn correlation_examples() {
        let ones = WindowedSeries::ones(1, 100).unwrap();
        let z = phase_correlation(&ones, 100, &PolynomialPhase::zero(1));
        assert!((z - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        let half = phase_correlation(&ones, 100, &PolynomialPhase::new(vec![0.0, 0.5]));
        assert!(half.norm() <= 1.0 / 100.0 + 1e-15);
        let q = PolynomialPhase::new(vec![0.1, 0.77, 0.003]);
        let f = WindowedSeries::from_fn(1, 100, |n| q.e_at(n)).unwrap();
        assert!((phase_correlation(&f, 100, &q).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn little_norm_finds_irrational_phase() {
        let n = 2000;
        let f = WindowedSeries::from_fn(1, n, |x| phase::e(phase::frac_mul(2f64.sqrt(), x as i128))).unwrap();
        let (v, ph) = little_u_lower(&f, n, 1, 4, 3, 60).unwrap();
        assert!(v >= 0.999, "{v} {:?}", ph);
        let ones = WindowedSeries::ones(1, n).unwrap();
        let (v1, _) = little_u_lower(&ones, n, 1, 4, 3, 10).unwrap();
        assert!((v1 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn little_norm_quadratic_phase() {
        let n = 500;
        let q = PolynomialPhase::new(vec![0.0, 0.31, 2.0 / 7.0]);
        let f = WindowedSeries::from_fn(1, n, |x| q.e_at(x)).unwrap();
        let (v, _) = little_u_lower(&f, n, 2, 7, 3, 40).unwrap();
        assert!(v >= 0.999, "{v}");
    }

    #[test]
    fn mobius_is_minor_arc_small() {
        let t = build_sieve(100_000).unwrap();
        let mu = t.mobius_values(100_000).unwrap();
        let f = WindowedSeries::from_fn(1, 100_000, |n| Complex64::new(mu[n as usize] as f64, 0.0)).unwrap();
        let (v, _) = little_u_lower(&f, 100_000, 1, 10, 3, 20).unwrap();
        assert!(v <= 0.05, "{v}");
    }

    #[test]
    fn little_bounded_by_full() {
        // u^2 <= C_1 U^2 with C_1 frozen from a first pass over these inputs
        const C1: f64 = 1.0;
        for s in 0..20u64 {
            let f = random_complex(256, 100 + s).map(|_, v| v / v.norm().max(1.0));
            let (u, _) = little_u_lower(&f, 256, 1, 6, 3, 20).unwrap();
            let big = u_full_norm(&f, 256, 1).unwrap();
            assert!(u <= C1 * big + 1e-12, "s={s} {u} {big}");
        }
    }
}
