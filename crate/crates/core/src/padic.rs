//! Finite-level models of the p-adic bilinear averages on `Z/p^jZ`.
//! Norms use the probability (Haar) normalization `‖f‖_q^q = E_x |f(x)|^q`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::arith::trial_factorize;
use crate::error::{MlabError, Result};
use crate::poly::IntPolynomial;
use crate::tolerances::{PADIC_MEAN_ZERO, PADIC_SEARCH_MAX, SEARCH_STAGNATION_REL, SEARCH_STAGNATION_WINDOW};

/// A function on `Z/p^jZ`.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteLevelFn {
    p: u64,
    j: u32,
    values: Vec<Complex64>,
}

fn ring_size(p: u64, j: u32) -> Result<u64> {
    let f = trial_factorize(p);
    if p < 2 || f.0.len() != 1 || f.0[0].1 != 1 {
        return Err(MlabError::invalid(format!("{p} is not prime")));
    }
    if j == 0 {
        return Err(MlabError::invalid("level j must be positive"));
    }
    p.checked_pow(j)
        .filter(|&m| m <= PADIC_SEARCH_MAX)
        .ok_or_else(|| MlabError::scale("p^j", format!("{p}^{j} exceeds {PADIC_SEARCH_MAX}")))
}

impl FiniteLevelFn {
    pub fn new(p: u64, j: u32, values: Vec<Complex64>) -> Result<Self> {
        let m = ring_size(p, j)?;
        if values.len() as u64 != m {
            return Err(MlabError::invalid(format!("expected {m} values, got {}", values.len())));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(MlabError::invalid("values must be finite"));
        }
        Ok(Self { p, j, values })
    }

    pub fn from_real(p: u64, j: u32, values: &[f64]) -> Result<Self> {
        Self::new(p, j, values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    pub fn constant(p: u64, j: u32, c: Complex64) -> Result<Self> {
        let m = ring_size(p, j)?;
        Self::new(p, j, vec![c; m as usize])
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn level(&self) -> u32 {
        self.j
    }

    pub fn modulus(&self) -> u64 {
        self.values.len() as u64
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn mean(&self) -> Complex64 {
        self.values.iter().sum::<Complex64>() / self.values.len() as f64
    }

    pub fn abs(&self) -> Self {
        self.map(|v| Complex64::new(v.norm(), 0.0))
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self { p: self.p, j: self.j, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    /// Block-constant extension to level `j + 1`: `x ↦ f(x mod p^j)`.
    pub fn lift(&self) -> Result<Self> {
        let m = ring_size(self.p, self.j + 1)?;
        let k = self.values.len() as u64;
        Self::new(self.p, self.j + 1, (0..m).map(|x| self.values[(x % k) as usize]).collect())
    }

    fn same_ring(&self, other: &Self) -> Result<()> {
        if self.p != other.p || self.j != other.j {
            return Err(MlabError::invalid(format!(
                "functions live on Z/{}^{} and Z/{}^{}",
                self.p, self.j, other.p, other.j
            )));
        }
        Ok(())
    }
}

/// `f = a + f₀` with `E f₀ = 0` and energy `E_f = ‖f₀‖₂²`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanEnergySplit {
    pub a: Complex64,
    pub f0: FiniteLevelFn,
    pub energy: f64,
}

fn shift_table(p: &IntPolynomial, m: u64) -> Vec<u64> {
    (0..m).map(|n| p.eval_mod(n as i64, m)).collect()
}

fn averaging_set(pr: u64, m: u64, units_only: bool) -> Vec<u64> {
    (0..m).filter(|n| !units_only || n % pr != 0).collect()
}

/// `Avg(f,g)(x) = E_n f(x+n) g(x+P(n))` over units of `Z/p^jZ` (or all residues).
pub fn avg_finite(f: &FiniteLevelFn, g: &FiniteLevelFn, p: &IntPolynomial, units_only: bool) -> Result<FiniteLevelFn> {
    f.same_ring(g)?;
    let m = f.modulus();
    let shifts = shift_table(p, m);
    let ns = averaging_set(f.p, m, units_only);
    let inv = 1.0 / ns.len() as f64;
    let values = (0..m)
        .map(|x| {
            ns.iter()
                .map(|&n| f.values[((x + n) % m) as usize] * g.values[((x + shifts[n as usize]) % m) as usize])
                .sum::<Complex64>()
                * inv
        })
        .collect();
    FiniteLevelFn::new(f.p, f.j, values)
}

pub fn decompose_mean(f: &FiniteLevelFn) -> MeanEnergySplit {
    let a = f.mean();
    let f0 = f.map(|v| v - a);
    let energy = f0.values.iter().map(|v| v.norm_sqr()).sum::<f64>() / f0.values.len() as f64;
    MeanEnergySplit { a, f0, energy }
}

/// `h(x) = E_{n∈Z/p^jZ} f₀(x+n) 1_{p|n}`.
pub fn h_function(f0: &FiniteLevelFn) -> Result<FiniteLevelFn> {
    let mean = f0.mean();
    let scale = f0.values.iter().map(|v| v.norm()).fold(1.0, f64::max);
    if mean.norm() > PADIC_MEAN_ZERO * scale {
        return Err(MlabError::invalid(format!("h_function needs mean zero, got |mean| = {:e}", mean.norm())));
    }
    let m = f0.modulus();
    let values = (0..m)
        .map(|x| (0..m).step_by(f0.p as usize).map(|n| f0.values[((x + n) % m) as usize]).sum::<Complex64>() / m as f64)
        .collect();
    FiniteLevelFn::new(f0.p, f0.j, values)
}

/// `(E_x |f(x)|^q)^{1/q}`.
pub fn lq_norm(f: &FiniteLevelFn, q: f64) -> Result<f64> {
    if !(q >= 1.0) {
        return Err(MlabError::invalid(format!("exponent q must be ≥ 1, got {q}")));
    }
    Ok(real_lq(f.values.iter().map(|v| v.norm()), f.values.len(), q))
}

fn real_lq(vals: impl Iterator<Item = f64>, len: usize, q: f64) -> f64 {
    if q.is_infinite() {
        return vals.fold(0.0, f64::max);
    }
    (vals.map(|v| v.powf(q)).sum::<f64>() / len as f64).powf(1.0 / q)
}

/// Result of [`bilinear_norm_search`].
#[derive(Debug, Clone, PartialEq)]
pub struct NormSearch {
    pub bound: f64,
    pub f: FiniteLevelFn,
    pub g: FiniteLevelFn,
    /// Restart that produced the witness; `None` for the constants.
    pub restart: Option<usize>,
}

/// Real nonnegative model of the unit average used by the search.
struct Model {
    m: usize,
    ns: Vec<usize>,
    shifts: Vec<usize>,
    q: f64,
}

impl Model {
    fn avg(&self, f: &[f64], g: &[f64]) -> Vec<f64> {
        let inv = 1.0 / self.ns.len() as f64;
        (0..self.m)
            .map(|x| self.ns.iter().map(|&n| f[(x + n) % self.m] * g[(x + self.shifts[n]) % self.m]).sum::<f64>() * inv)
            .collect()
    }

    fn value(&self, f: &[f64], g: &[f64]) -> f64 {
        real_lq(self.avg(f, g).into_iter(), self.m, self.q)
    }

    /// Gradient of `E_x A(x)^q` in `f` (when `first`) or in `g`.
    fn grad(&self, f: &[f64], g: &[f64], first: bool) -> Vec<f64> {
        let a = self.avg(f, g);
        let m = self.m;
        let c = self.q / (m as f64 * self.ns.len() as f64);
        let mut out = vec![0.0; m];
        for x in 0..m {
            let ax = a[x].powf(self.q - 1.0) * c;
            if ax == 0.0 {
                continue;
            }
            for &n in &self.ns {
                let (yf, yg) = ((x + n) % m, (x + self.shifts[n]) % m);
                if first {
                    out[yf] += ax * g[yg];
                } else {
                    out[yg] += ax * f[yf];
                }
            }
        }
        out
    }
}

fn normalize(v: &mut [f64]) -> bool {
    let n = (v.iter().map(|x| x * x).sum::<f64>() / v.len() as f64).sqrt();
    if !(n > 0.0) || !n.is_finite() {
        return false;
    }
    v.iter_mut().for_each(|x| *x /= n);
    true
}

const MAX_ITERS: usize = 5000;
const MIN_STEP: f64 = 1e-14;

/// Projected gradient step on one factor with backtracking halving.
fn ascend(model: &Model, f: &mut Vec<f64>, g: &mut Vec<f64>, first: bool, step: &mut f64, current: f64) -> f64 {
    let grad = model.grad(f, g, first);
    let gn = (grad.iter().map(|x| x * x).sum::<f64>() / grad.len() as f64).sqrt();
    if !(gn > 0.0) {
        return current;
    }
    let base = if first { &*f } else { &*g };
    let mut t = *step;
    while t >= MIN_STEP {
        let mut cand: Vec<f64> = base.iter().zip(&grad).map(|(x, d)| (x + t * d / gn).max(0.0)).collect();
        if normalize(&mut cand) {
            let v = if first { model.value(&cand, g) } else { model.value(f, &cand) };
            if v > current {
                if first {
                    *f = cand;
                } else {
                    *g = cand;
                }
                *step = (t * 2.0).min(1.0);
                return v;
            }
        }
        t *= 0.5;
    }
    *step = MIN_STEP;
    current
}

fn run_restart(model: &Model, seed: u64, restart: usize) -> (f64, Vec<f64>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(restart as u64);
    let mut draw = || {
        let mut v: Vec<f64> = (0..model.m).map(|_| rng.gen::<f64>()).collect();
        normalize(&mut v);
        v
    };
    let (mut f, mut g) = (draw(), draw());
    let mut value = model.value(&f, &g);
    let (mut sf, mut sg) = (0.5, 0.5);
    let mut history = vec![value];
    for _ in 0..MAX_ITERS {
        value = ascend(model, &mut f, &mut g, true, &mut sf, value);
        value = ascend(model, &mut f, &mut g, false, &mut sg, value);
        history.push(value);
        if history.len() > SEARCH_STAGNATION_WINDOW {
            let old = history[history.len() - 1 - SEARCH_STAGNATION_WINDOW];
            if value - old <= SEARCH_STAGNATION_REL * old.abs() {
                break;
            }
        }
    }
    (value, f, g)
}

/// Lower bound for `‖Avg_{units}‖_{L²×L²→L^q}` on `Z/p^jZ`: maximum of `‖Avg(f,g)‖_q`
/// over the constants and `restarts` alternating-ascent runs from random
/// nonnegative unit vectors. Nonnegative inputs suffice since
/// `|Avg(f,g)| ≤ Avg(|f|,|g|)`.
pub fn bilinear_norm_search(
    p: u64,
    j: u32,
    q: f64,
    poly: &IntPolynomial,
    restarts: usize,
    seed: u64,
) -> Result<NormSearch> {
    if !(q >= 1.0) || !q.is_finite() {
        return Err(MlabError::invalid(format!("exponent q must be a finite real ≥ 1, got {q}")));
    }
    let m = ring_size(p, j)?;
    let model = Model {
        m: m as usize,
        ns: averaging_set(p, m, true).into_iter().map(|n| n as usize).collect(),
        shifts: shift_table(poly, m).into_iter().map(|s| s as usize).collect(),
        q,
    };
    let ones = vec![1.0; m as usize];
    let base = model.value(&ones, &ones);
    let runs: Vec<(f64, Vec<f64>, Vec<f64>)> = (0..restarts).into_par_iter().map(|r| run_restart(&model, seed, r)).collect();
    let mut best = (base, ones.clone(), ones, None);
    for (r, (v, f, g)) in runs.into_iter().enumerate() {
        if v > best.0 {
            best = (v, f, g, Some(r));
        }
    }
    Ok(NormSearch {
        bound: best.0,
        f: FiniteLevelFn::from_real(p, j, &best.1)?,
        g: FiniteLevelFn::from_real(p, j, &best.2)?,
        restart: best.3,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn sq() -> IntPolynomial {
        IntPolynomial::monomial(2).unwrap()
    }

    fn random_fn(rng: &mut ChaCha8Rng, p: u64, j: u32) -> FiniteLevelFn {
        let m = p.pow(j) as usize;
        FiniteLevelFn::new(p, j, (0..m).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect())
            .unwrap()
    }

    #[test]
    fn constructor_checks() {
        assert!(FiniteLevelFn::constant(4, 1, c(1.0)).is_err());
        assert!(FiniteLevelFn::constant(3, 0, c(1.0)).is_err());
        assert!(FiniteLevelFn::from_real(3, 1, &[1.0, 2.0]).is_err());
        assert!(FiniteLevelFn::constant(3, 20, c(1.0)).is_err());
    }

    #[test]
    fn constants_and_hand_expansion() {
        let one = FiniteLevelFn::constant(5, 2, c(1.0)).unwrap();
        let a = avg_finite(&one, &one, &sq(), true).unwrap();
        assert!(a.values().iter().all(|v| (v - c(1.0)).norm() < 1e-15));
        // p=3, j=1: units {1,2}, P(1)=1, P(2)=4≡1
        let f = FiniteLevelFn::from_real(3, 1, &[1.0, 2.0, 5.0]).unwrap();
        let g = FiniteLevelFn::from_real(3, 1, &[-1.0, 3.0, 0.5]).unwrap();
        let a = avg_finite(&f, &g, &sq(), true).unwrap();
        let fv = [1.0, 2.0, 5.0];
        let gv = [-1.0, 3.0, 0.5];
        for x in 0..3 {
            let want = 0.5 * (fv[(x + 1) % 3] * gv[(x + 1) % 3] + fv[(x + 2) % 3] * gv[(x + 1) % 3]);
            assert!((a.values()[x] - c(want)).norm() < 1e-15);
        }
        let other = FiniteLevelFn::constant(3, 2, c(1.0)).unwrap();
        assert!(avg_finite(&f, &other, &sq(), true).is_err());
    }

    #[test]
    fn decomposition_and_h_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for &(p, j) in &[(3u64, 2u32), (5, 2), (7, 1)] {
            let f = random_fn(&mut rng, p, j);
            let s = decompose_mean(&f);
            assert!(s.f0.mean().norm() < 1e-12);
            for (x, v) in f.values().iter().enumerate() {
                assert!((s.a + s.f0.values()[x] - v).norm() < 1e-12);
            }
            let h = h_function(&s.f0).unwrap();
            assert!(h.mean().norm() < 1e-12);
            let b = c(0.7);
            let bf = FiniteLevelFn::constant(p, j, b).unwrap();
            let avg = avg_finite(&s.f0, &bf, &sq(), true).unwrap();
            let k = p as f64 / (p as f64 - 1.0);
            for x in 0..avg.values().len() {
                assert!((avg.values()[x] + h.values()[x] * b * k).norm() < 1e-12);
            }
            let e = s.energy.sqrt();
            assert!(lq_norm(&h, 2.0).unwrap() <= e / p as f64 + 1e-12);
            assert!(lq_norm(&h, 3.0).unwrap() <= (p as f64).powf(-0.5 - 1.0 / 3.0) * e + 1e-12);
        }
        assert!(h_function(&FiniteLevelFn::constant(3, 1, c(1.0)).unwrap()).is_err());
        let zero = FiniteLevelFn::constant(3, 1, c(0.0)).unwrap();
        assert_eq!(h_function(&zero).unwrap(), zero);
    }

    #[test]
    fn lq_examples() {
        let f = FiniteLevelFn::constant(5, 1, c(-2.0)).unwrap();
        assert!((lq_norm(&f, 3.0).unwrap() - 2.0).abs() < 1e-15);
        let d = FiniteLevelFn::from_real(5, 1, &[0.0, 3.0, 0.0, 0.0, 0.0]).unwrap();
        assert!((lq_norm(&d, 2.0).unwrap() - 3.0 * 5f64.powf(-0.5)).abs() < 1e-15);
        assert!(lq_norm(&d, 0.5).is_err());
    }

    #[test]
    fn lifting_commutes_with_average() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let f = random_fn(&mut rng, 3, 1);
        let g = random_fn(&mut rng, 3, 1);
        let a = avg_finite(&f, &g, &sq(), true).unwrap();
        let al = avg_finite(&f.lift().unwrap(), &g.lift().unwrap(), &sq(), true).unwrap();
        assert_eq!(al.values().len(), 9);
        for x in 0..9 {
            assert!((al.values()[x] - a.values()[x % 3]).norm() < 1e-12);
        }
        assert!((lq_norm(&f.lift().unwrap(), 2.5).unwrap() - lq_norm(&f, 2.5).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn search_matches_grid_oracle() {
        // p=2, j=1: single unit n=1, P(1)=1, so Avg(f,g)(x) = f(x+1) g(x+1)
        let found = bilinear_norm_search(2, 1, 3.0, &sq(), 8, 1).unwrap();
        let steps = 400;
        let mut best = 0.0f64;
        for i in 0..=steps {
            let s = std::f64::consts::FRAC_PI_2 * i as f64 / steps as f64;
            for k in 0..=steps {
                let t = std::f64::consts::FRAC_PI_2 * k as f64 / steps as f64;
                let r2 = 2f64.sqrt();
                let (f0, f1) = (r2 * s.cos(), r2 * s.sin());
                let (g0, g1) = (r2 * t.cos(), r2 * t.sin());
                let v = ((f0 * g0).powi(3) + (f1 * g1).powi(3)) / 2.0;
                best = best.max(v.cbrt());
            }
        }
        assert!(found.bound >= best - 1e-9, "{} vs grid {best}", found.bound);
        assert!(found.bound <= 4f64.cbrt() + 1e-12);
    }

    #[test]
    fn search_never_below_constants_and_monotone() {
        let a = bilinear_norm_search(5, 1, 2.2, &sq(), 2, 3).unwrap();
        let b = bilinear_norm_search(5, 1, 2.2, &sq(), 6, 3).unwrap();
        assert!(a.bound >= 1.0 - 1e-15);
        assert!(b.bound >= a.bound);
    }
}
