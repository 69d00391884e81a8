use std::ops::Deref;

use crate::error::{KdeError, Result};
use crate::scalar::{from_usize, lit, Scalar};

/// Validated observations, sorted ascending.
#[derive(Clone, Debug, PartialEq)]
pub struct Sample<T> {
    values: Vec<T>,
}

impl<T: Scalar> Sample<T> {
    pub fn new(mut values: Vec<T>) -> Result<Self> {
        if values.is_empty() {
            return Err(KdeError::InvalidArgument("sample is empty".into()));
        }
        if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
            return Err(KdeError::InvalidArgument(format!(
                "observation {bad} is not finite ({})",
                values[bad]
            )));
        }
        values.sort_by(|a, b| a.partial_cmp(b).expect("finite values are ordered"));
        Ok(Self { values })
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub(crate) fn n_scalar(&self) -> T {
        from_usize(self.values.len())
    }

    pub fn min(&self) -> T {
        self.values[0]
    }

    pub fn max(&self) -> T {
        self.values[self.values.len() - 1]
    }

    pub fn range(&self) -> T {
        self.max() - self.min()
    }

    pub fn mean(&self) -> T {
        self.values.iter().copied().sum::<T>() / self.n_scalar()
    }

    /// Sample standard deviation with divisor n − 1 (zero when n = 1).
    pub fn std_dev(&self) -> T {
        let n = self.n();
        if n < 2 {
            return T::zero();
        }
        let mean = self.mean();
        let ss: T = self.values.iter().map(|&v| (v - mean) * (v - mean)).sum();
        (ss / from_usize(n - 1)).sqrt()
    }

    /// Quantile by linear interpolation between order statistics
    /// (Hyndman–Fan type 7).
    pub fn quantile(&self, p: T) -> T {
        let n = self.n();
        let p = p.max(T::zero()).min(T::one());
        let pos = p * from_usize(n - 1);
        let lo = pos.floor();
        let idx = lo.to_usize().unwrap_or(0).min(n - 1);
        if idx + 1 >= n {
            return self.values[n - 1];
        }
        let frac = pos - lo;
        self.values[idx] + frac * (self.values[idx + 1] - self.values[idx])
    }

    pub fn iqr(&self) -> T {
        self.quantile(lit(0.75)) - self.quantile(lit(0.25))
    }

    /// Median of the strictly positive gaps between consecutive order
    /// statistics, `None` when all observations coincide.
    pub fn median_gap(&self) -> Option<T> {
        let mut gaps: Vec<T> = self
            .values
            .windows(2)
            .map(|w| w[1] - w[0])
            .filter(|g| *g > T::zero())
            .collect();
        if gaps.is_empty() {
            return None;
        }
        gaps.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let m = gaps.len();
        Some(if m % 2 == 1 {
            gaps[m / 2]
        } else {
            (gaps[m / 2 - 1] + gaps[m / 2]) * lit(0.5)
        })
    }

    /// Index range of observations lying in the closed interval `[lo, hi]`.
    pub(crate) fn window(&self, lo: T, hi: T) -> std::ops::Range<usize> {
        let start = self.values.partition_point(|&v| v < lo);
        let end = self.values.partition_point(|&v| v <= hi);
        start..end.max(start)
    }

    /// Average rank (1-based, ties averaged) of each observation.
    pub(crate) fn average_ranks(&self) -> Vec<T> {
        let n = self.n();
        let mut ranks = vec![T::zero(); n];
        let mut i = 0;
        while i < n {
            let mut j = i;
            while j + 1 < n && self.values[j + 1] == self.values[i] {
                j += 1;
            }
            // positions i..=j share ranks i+1..=j+1
            let avg = lit::<T>((i + j + 2) as f64 / 2.0);
            ranks[i..=j].iter_mut().for_each(|r| *r = avg);
            i = j + 1;
        }
        ranks
    }

    /// Sample of `a·x + b` for every observation.
    pub fn affine(&self, a: T, b: T) -> Result<Self> {
        Sample::new(self.values.iter().map(|&v| a * v + b).collect())
    }
}

impl<T> Deref for Sample<T> {
    type Target = [T];

    fn deref(&self) -> &[T] {
        &self.values
    }
}

impl<T: Scalar> TryFrom<Vec<T>> for Sample<T> {
    type Error = KdeError;

    fn try_from(values: Vec<T>) -> Result<Self> {
        Sample::new(values)
    }
}
