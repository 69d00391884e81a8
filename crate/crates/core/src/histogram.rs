//! Fixed-width histogram density estimates.

use crate::error::{KdeError, Result};
use crate::sample::Sample;
use crate::scalar::{from_usize, lit, to_f64, Scalar};

/// Sturges' bin count ⌈1 + log₂ n⌉.
pub fn sturges(n: usize) -> Result<usize> {
    if n < 1 {
        return Err(KdeError::InvalidArgument("Sturges' rule needs n >= 1".into()));
    }
    // ⌈log₂ n⌉ computed exactly on integers
    let ceil_log2 = (usize::BITS - (n - 1).leading_zeros()) as usize;
    Ok(1 + ceil_log2)
}

/// Bins `[origin + j·h, origin + (j+1)·h)` for `j = 0..bin_count`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HistogramSpec<T> {
    pub origin: T,
    pub bin_width: T,
    pub bin_count: usize,
}

impl<T: Scalar> HistogramSpec<T> {
    pub fn new(origin: T, bin_width: T, bin_count: usize) -> Result<Self> {
        if !origin.is_finite() {
            return Err(KdeError::InvalidArgument("histogram origin must be finite".into()));
        }
        if !(bin_width.is_finite() && bin_width > T::zero()) {
            return Err(KdeError::InvalidBandwidth(to_f64(bin_width)));
        }
        if bin_count < 1 {
            return Err(KdeError::InvalidArgument("bin count must be at least 1".into()));
        }
        Ok(Self { origin, bin_width, bin_count })
    }

    /// Origin at the sample minimum, Sturges bin count, width stretched by a
    /// relative 1e-9 so the maximum falls inside the last bin.
    pub fn from_sample(sample: &Sample<T>) -> Result<Self> {
        Self::with_bin_count(sample, sturges(sample.n())?)
    }

    pub fn with_bin_count(sample: &Sample<T>, bin_count: usize) -> Result<Self> {
        if bin_count < 1 {
            return Err(KdeError::InvalidArgument("bin count must be at least 1".into()));
        }
        let range = sample.range();
        let width = if range > T::zero() {
            range / from_usize(bin_count) * (T::one() + lit(1e-9))
        } else {
            // all observations coincide
            T::one()
        };
        Self::new(sample.min(), width, bin_count)
    }

    pub fn right_edge(&self) -> T {
        self.origin + from_usize::<T>(self.bin_count) * self.bin_width
    }

    pub fn bin_left(&self, j: usize) -> T {
        self.origin + from_usize::<T>(j) * self.bin_width
    }

    pub fn bin_center(&self, j: usize) -> T {
        self.origin + (from_usize::<T>(j) + lit(0.5)) * self.bin_width
    }

    /// Bin index of `x`; the global right edge belongs to the last bin.
    pub fn bin_index(&self, x: T) -> Option<usize> {
        if x < self.origin || x > self.right_edge() {
            return None;
        }
        let j = ((x - self.origin) / self.bin_width).floor().to_usize()?;
        Some(j.min(self.bin_count - 1))
    }

    /// Observation counts per bin.
    pub fn counts(&self, sample: &Sample<T>) -> Result<Vec<usize>> {
        let mut counts = vec![0usize; self.bin_count];
        let mut outside = Vec::new();
        for &x in sample.values() {
            match self.bin_index(x) {
                Some(j) => counts[j] += 1,
                None => outside.push(to_f64(x)),
            }
        }
        if !outside.is_empty() {
            return Err(KdeError::OutOfRange { values: outside });
        }
        Ok(counts)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Histogram<T> {
    pub spec: HistogramSpec<T>,
    /// count_j / (n·h)
    pub heights: Vec<T>,
}

impl<T: Scalar> Histogram<T> {
    /// Height of the bin containing `x`, zero outside the bins.
    pub fn evaluate(&self, x: T) -> T {
        self.spec
            .bin_index(x)
            .map_or(T::zero(), |j| self.heights[j])
    }

    pub fn total_mass(&self) -> T {
        self.heights.iter().copied().sum::<T>() * self.spec.bin_width
    }
}

pub fn build_histogram<T: Scalar>(sample: &Sample<T>, spec: HistogramSpec<T>) -> Result<Histogram<T>> {
    let counts = spec.counts(sample)?;
    let scale = sample.n_scalar() * spec.bin_width;
    let heights = counts.into_iter().map(|c| from_usize::<T>(c) / scale).collect();
    Ok(Histogram { spec, heights })
}
