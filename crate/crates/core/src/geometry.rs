//! Axis-aligned boxes used for input bounds and specification sets.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AaBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl AaBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "box bounds must be nonempty and equal length (got {} and {})",
                lo.len(),
                hi.len()
            )));
        }
        if lo.iter().zip(&hi).any(|(l, h)| !(l <= h) || !l.is_finite() || !h.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "box bounds must be finite with lo <= hi: {lo:?} / {hi:?}"
            )));
        }
        Ok(Self { lo, hi })
    }

    /// Symmetric box `[-r, r]^dim`.
    pub fn symmetric(dim: usize, r: f64) -> Self {
        Self {
            lo: vec![-r; dim],
            hi: vec![r; dim],
        }
    }

    pub fn from_pairs(pairs: &[(f64, f64)]) -> Self {
        Self {
            lo: pairs.iter().map(|p| p.0).collect(),
            hi: pairs.iter().map(|p| p.1).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn center(&self) -> Vec<f64> {
        self.lo.iter().zip(&self.hi).map(|(l, h)| 0.5 * (l + h)).collect()
    }

    pub fn half_widths(&self) -> Vec<f64> {
        self.lo.iter().zip(&self.hi).map(|(l, h)| 0.5 * (h - l)).collect()
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        p.len() == self.dim()
            && p.iter()
                .zip(self.lo.iter().zip(&self.hi))
                .all(|(v, (l, h))| *l <= *v && *v <= *h)
    }

    /// Grow (positive `margin`) or shrink (negative) every side.
    pub fn inflate(&self, margin: f64) -> Self {
        Self {
            lo: self.lo.iter().map(|l| l - margin).collect(),
            hi: self.hi.iter().map(|h| h + margin).collect(),
        }
    }

    /// Shrink by `margin`; `None` when a side collapses.
    pub fn shrink(&self, margin: f64) -> Option<Self> {
        let b = self.inflate(-margin);
        b.lo.iter().zip(&b.hi).all(|(l, h)| l <= h).then_some(b)
    }

    pub fn clamp(&self, p: &mut [f64]) {
        for (v, (l, h)) in p.iter_mut().zip(self.lo.iter().zip(&self.hi)) {
            *v = v.clamp(*l, *h);
        }
    }

    /// Largest Euclidean norm attained on the box.
    pub fn max_norm(&self) -> f64 {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(l, h)| l.abs().max(h.abs()).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    pub fn intersects(&self, other: &AaBox) -> bool {
        self.lo
            .iter()
            .zip(&self.hi)
            .zip(other.lo.iter().zip(&other.hi))
            .all(|((l1, h1), (l2, h2))| l1 <= h2 && l2 <= h1)
    }

    /// Whether the segment `a -> b` meets the box (slab test).
    pub fn segment_intersects(&self, a: &[f64], b: &[f64]) -> bool {
        let mut t0 = 0.0_f64;
        let mut t1 = 1.0_f64;
        for i in 0..self.dim() {
            let d = b[i] - a[i];
            if d.abs() < 1e-15 {
                if a[i] < self.lo[i] || a[i] > self.hi[i] {
                    return false;
                }
                continue;
            }
            let mut ta = (self.lo[i] - a[i]) / d;
            let mut tb = (self.hi[i] - a[i]) / d;
            if ta > tb {
                std::mem::swap(&mut ta, &mut tb);
            }
            t0 = t0.max(ta);
            t1 = t1.min(tb);
            if t0 > t1 {
                return false;
            }
        }
        true
    }

    pub fn sample<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(l, h)| if l < h { rng.random_range(*l..=*h) } else { *l })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shrink_and_contains() {
        let b = AaBox::from_pairs(&[(0.0, 1.0), (2.0, 4.0)]);
        assert!(b.contains(&[0.5, 3.0]));
        let s = b.shrink(0.25).unwrap();
        assert_eq!(s.lo, vec![0.25, 2.25]);
        assert!(b.shrink(0.6).is_none());
    }

    #[test]
    fn segment_test() {
        let b = AaBox::from_pairs(&[(1.0, 2.0), (1.0, 2.0)]);
        assert!(b.segment_intersects(&[0.0, 0.0], &[3.0, 3.0]));
        assert!(!b.segment_intersects(&[0.0, 0.0], &[3.0, 0.5]));
        assert!(!b.segment_intersects(&[0.0, 3.0], &[3.0, 2.5]));
        assert!(b.segment_intersects(&[1.5, 0.0], &[1.5, 3.0]));
    }

    #[test]
    fn rejects_inverted_bounds() {
        assert!(AaBox::new(vec![1.0], vec![0.0]).is_err());
    }
}
