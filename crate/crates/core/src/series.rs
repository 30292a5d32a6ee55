use crate::error::{MlabError, Result};
use num_complex::Complex64;

/// A complex function on `Z` supported on `[offset, offset + len)`.
/// Reads outside the window return zero.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowedSeries {
    offset: i64,
    values: Vec<Complex64>,
}

impl WindowedSeries {
    pub fn new(offset: i64, values: Vec<Complex64>) -> Result<Self> {
        if values.is_empty() {
            return Err(MlabError::invalid("WindowedSeries needs at least one value"));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(MlabError::invalid("WindowedSeries values must be finite"));
        }
        Ok(Self { offset, values })
    }

    pub fn from_real(offset: i64, values: &[f64]) -> Result<Self> {
        Self::new(offset, values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    /// `n ↦ f(n)` on `[lo, lo + len)`.
    pub fn from_fn(lo: i64, len: usize, f: impl Fn(i64) -> Complex64) -> Result<Self> {
        Self::new(lo, (0..len as i64).map(|i| f(lo + i)).collect())
    }

    /// Indicator of `[lo, lo + len)`.
    pub fn ones(lo: i64, len: usize) -> Result<Self> {
        Self::new(lo, vec![Complex64::new(1.0, 0.0); len])
    }

    pub(crate) fn zeros(lo: i64, len: usize) -> Self {
        Self {
            offset: lo,
            values: vec![Complex64::new(0.0, 0.0); len.max(1)],
        }
    }

    pub fn offset(&self) -> i64 {
        self.offset
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// One past the last index.
    pub fn end(&self) -> i64 {
        self.offset + self.values.len() as i64
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    #[inline]
    pub fn get(&self, x: i64) -> Complex64 {
        let i = x - self.offset;
        if i < 0 || i >= self.values.len() as i64 {
            Complex64::new(0.0, 0.0)
        } else {
            self.values[i as usize]
        }
    }

    /// Values at `lo..lo+len` as a dense vector (zero-padded outside).
    pub fn dense(&self, lo: i64, len: usize) -> Vec<Complex64> {
        (0..len as i64).map(|i| self.get(lo + i)).collect()
    }

    /// `f · 1_{[lo, lo+len)}` re-based to offset 0.
    pub fn restrict_to_origin(&self, lo: i64, len: usize) -> Self {
        let mut r = Self::zeros(0, len);
        for (i, v) in r.values.iter_mut().enumerate().take(len) {
            *v = self.get(lo + i as i64);
        }
        r
    }

    pub fn map(&self, f: impl Fn(i64, Complex64) -> Complex64) -> Self {
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(i, &v)| f(self.offset + i as i64, v))
            .collect();
        Self { offset: self.offset, values }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        self.map(|_, v| v * c)
    }

    /// Pointwise sum on the union window.
    pub fn add(&self, other: &Self) -> Self {
        let lo = self.offset.min(other.offset);
        let hi = self.end().max(other.end());
        let values = (lo..hi).map(|x| self.get(x) + other.get(x)).collect();
        Self { offset: lo, values }
    }

    pub fn lp_norm(&self, p: f64) -> f64 {
        if p.is_infinite() {
            return self.sup_norm();
        }
        self.values.iter().map(|v| v.norm().powf(p)).sum::<f64>().powf(1.0 / p)
    }

    pub fn l1_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).sum()
    }

    pub fn l2_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn window_reads() {
        let f = WindowedSeries::from_real(-2, &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(f.get(-3), Complex64::new(0.0, 0.0));
        assert_eq!(f.get(-2), Complex64::new(1.0, 0.0));
        assert_eq!(f.get(0), Complex64::new(3.0, 0.0));
        assert_eq!(f.get(1), Complex64::new(0.0, 0.0));
        assert_eq!(f.end(), 1);
        assert!(WindowedSeries::new(0, vec![]).is_err());
        assert!(WindowedSeries::from_real(0, &[f64::NAN]).is_err());
    }

    #[test]
    fn add_and_norms() {
        let f = WindowedSeries::from_real(0, &[3.0, 4.0]).unwrap();
        let g = WindowedSeries::from_real(1, &[1.0, 1.0]).unwrap();
        let h = f.add(&g);
        assert_eq!(h.offset(), 0);
        assert_eq!(h.len(), 3);
        assert_eq!(h.get(1), Complex64::new(5.0, 0.0));
        assert_eq!(f.l2_norm(), 5.0);
        assert_eq!(f.l1_norm(), 7.0);
        assert!((f.lp_norm(2.0) - 5.0).abs() < 1e-12);
        let r = f.restrict_to_origin(1, 3);
        assert_eq!(r.values()[0], Complex64::new(4.0, 0.0));
        assert_eq!(r.values()[1], Complex64::new(0.0, 0.0));
    }
}
