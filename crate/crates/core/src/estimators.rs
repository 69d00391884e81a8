//! Density and distribution-function estimators.
//!
//! Everything here evaluates pointwise over an immutable [`Sample`]. Compact
//! kernels only visit the observations inside `[x − h, x + h]`, found by
//! binary search on the sorted sample; the result is identical to the full sum.

use std::fmt;

use rayon::prelude::*;

use crate::bandwidth::reference::rule_of_thumb;
use crate::error::{KdeError, Result};
use crate::histogram::HistogramSpec;
use crate::kernels::{gamma_kernel, Kernel};
use crate::sample::Sample;
use crate::scalar::{from_usize, linspace, lit, to_f64, Scalar};

/// Number of points in the default evaluation grid.
pub const DEFAULT_GRID_POINTS: usize = 401;

pub fn check_bandwidth<T: Scalar>(h: T) -> Result<()> {
    if h.is_finite() && h > T::zero() {
        Ok(())
    } else {
        Err(KdeError::InvalidBandwidth(to_f64(h)))
    }
}

/// Σᵢ K((x − Xᵢ)/h) over the sample, without normalisation.
pub(crate) fn kernel_sum<T: Scalar>(sample: &Sample<T>, kernel: Kernel, h: T, x: T) -> T {
    let values = match kernel.support_radius() {
        Some(r) => {
            let reach = h * lit(r);
            &sample.values()[sample.window(x - reach, x + reach)]
        }
        None => sample.values(),
    };
    values.iter().map(|&xi| kernel.evaluate((x - xi) / h)).sum()
}

/// Fixed-bandwidth kernel estimate (1/(nh)) Σᵢ K((x − Xᵢ)/h).
pub fn kde_at<T: Scalar>(sample: &Sample<T>, kernel: Kernel, h: T, x: T) -> Result<T> {
    check_bandwidth(h)?;
    Ok(kernel_sum(sample, kernel, h, x) / (sample.n_scalar() * h))
}

/// Bandwidth attached to a [`DensityEstimate`].
#[derive(Clone, Debug, PartialEq)]
pub enum EstimateBandwidth<T> {
    Global(T),
    /// One bandwidth per grid point (balloon) or per datum/bin.
    Varying(Vec<T>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct DensityEstimate<T> {
    pub grid: Vec<T>,
    pub values: Vec<T>,
    pub bandwidth: EstimateBandwidth<T>,
    pub kernel: Kernel,
}

impl<T: Scalar> DensityEstimate<T> {
    /// Trapezoid integral of the values over the grid.
    pub fn trapezoid_mass(&self) -> T {
        trapezoid(&self.grid, &self.values)
    }

    pub fn max_value(&self) -> T {
        self.values.iter().copied().fold(T::neg_infinity(), T::max)
    }
}

pub(crate) fn trapezoid<T: Scalar>(grid: &[T], values: &[T]) -> T {
    grid.windows(2)
        .zip(values.windows(2))
        .map(|(x, y)| (x[1] - x[0]) * (y[0] + y[1]) * lit(0.5))
        .sum()
}

/// 401 equispaced points over `[min − 3h, max + 3h]`.
pub fn default_grid<T: Scalar>(sample: &Sample<T>, h: T) -> Vec<T> {
    let pad = h * lit(3.0);
    linspace(sample.min() - pad, sample.max() + pad, DEFAULT_GRID_POINTS)
}

fn check_grid<T: Scalar>(grid: &[T]) -> Result<()> {
    if grid.iter().any(|g| !g.is_finite()) {
        return Err(KdeError::InvalidArgument("evaluation grid has non-finite points".into()));
    }
    if grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(KdeError::InvalidArgument("evaluation grid must be ascending".into()));
    }
    Ok(())
}

pub fn kde_grid<T: Scalar>(
    sample: &Sample<T>,
    kernel: Kernel,
    h: T,
    grid: &[T],
) -> Result<DensityEstimate<T>> {
    check_bandwidth(h)?;
    check_grid(grid)?;
    let norm = sample.n_scalar() * h;
    let values = grid
        .par_iter()
        .map(|&x| kernel_sum(sample, kernel, h, x) / norm)
        .collect();
    Ok(DensityEstimate {
        grid: grid.to_vec(),
        values,
        bandwidth: EstimateBandwidth::Global(h),
        kernel,
    })
}

/// Bandwidth rule for the balloon estimator.
pub enum BandwidthFunction<T> {
    Constant(T),
    /// h(x) is the distance from x to its k-th nearest observation.
    KNearest(usize),
    Explicit(Box<dyn Fn(T) -> T + Send + Sync>),
}

impl<T: fmt::Debug> fmt::Debug for BandwidthFunction<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BandwidthFunction::Constant(h) => f.debug_tuple("Constant").field(h).finish(),
            BandwidthFunction::KNearest(k) => f.debug_tuple("KNearest").field(k).finish(),
            BandwidthFunction::Explicit(_) => f.write_str("Explicit(..)"),
        }
    }
}

impl<T: Scalar> BandwidthFunction<T> {
    pub fn at(&self, sample: &Sample<T>, x: T) -> Result<T> {
        let h = match self {
            BandwidthFunction::Constant(h) => *h,
            BandwidthFunction::KNearest(k) => kth_nearest_distance(sample, *k, x)?,
            BandwidthFunction::Explicit(f) => f(x),
        };
        if h == T::zero() {
            return Err(KdeError::DegenerateBandwidth {
                x: to_f64(x),
                reason: "bandwidth is zero (tied observations at x?)".into(),
            });
        }
        check_bandwidth(h)?;
        Ok(h)
    }
}

/// Distance from `x` to its k-th nearest observation (k is 1-based).
pub fn kth_nearest_distance<T: Scalar>(sample: &Sample<T>, k: usize, x: T) -> Result<T> {
    let v = sample.values();
    if k < 1 || k > v.len() {
        return Err(KdeError::InvalidArgument(format!(
            "nearest-neighbour count {k} outside 1..={}",
            v.len()
        )));
    }
    // merge outward from the insertion point
    let mut right = v.partition_point(|&xi| xi < x);
    let mut left = right;
    let mut dist = T::zero();
    for _ in 0..k {
        let dl = if left > 0 { Some(x - v[left - 1]) } else { None };
        let dr = if right < v.len() { Some(v[right] - x) } else { None };
        dist = match (dl, dr) {
            (Some(a), Some(b)) if a <= b => {
                left -= 1;
                a
            }
            (Some(a), None) => {
                left -= 1;
                a
            }
            (_, Some(b)) => {
                right += 1;
                b
            }
            (None, None) => unreachable!("k <= n"),
        };
    }
    Ok(dist)
}

/// Balloon estimator (1/(n·h(x))) Σᵢ K((x − Xᵢ)/h(x)).
pub fn balloon_at<T: Scalar>(
    sample: &Sample<T>,
    kernel: Kernel,
    bw: &BandwidthFunction<T>,
    x: T,
) -> Result<T> {
    let h = bw.at(sample, x)?;
    kde_at(sample, kernel, h, x)
}

pub fn balloon_grid<T: Scalar>(
    sample: &Sample<T>,
    kernel: Kernel,
    bw: &BandwidthFunction<T>,
    grid: &[T],
) -> Result<DensityEstimate<T>> {
    check_grid(grid)?;
    let pairs = grid
        .iter()
        .map(|&x| {
            let h = bw.at(sample, x)?;
            Ok((h, kde_at(sample, kernel, h, x)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let (hs, values) = pairs.into_iter().unzip();
    Ok(DensityEstimate {
        grid: grid.to_vec(),
        values,
        bandwidth: EstimateBandwidth::Varying(hs),
        kernel,
    })
}

/// Pointwise AMSE-optimal bandwidth
/// (R(K) f(x) / (μ₂²(K) f''(x)²))^{1/5} n^{-1/5}, from known or pilot values
/// of f(x) and f''(x).
pub fn amse_bandwidth<T: Scalar>(kernel: Kernel, f_x: T, fpp_x: T, n: usize) -> Result<T> {
    if !(f_x > T::zero()) || fpp_x == T::zero() || !fpp_x.is_finite() {
        return Err(KdeError::InvalidArgument(
            "pointwise AMSE bandwidth needs f(x) > 0 and f''(x) != 0".into(),
        ));
    }
    let m = kernel.moments::<T>();
    let ratio = m.roughness * f_x / (m.mu2 * m.mu2 * fpp_x * fpp_x);
    Ok(ratio.powf(lit(0.2)) * from_usize::<T>(n).powf(lit(-0.2)))
}

fn check_per_datum<T: Scalar>(sample: &Sample<T>, per_datum_h: &[T]) -> Result<()> {
    if per_datum_h.len() != sample.n() {
        return Err(KdeError::InvalidArgument(format!(
            "{} per-datum bandwidths for {} observations",
            per_datum_h.len(),
            sample.n()
        )));
    }
    per_datum_h.iter().try_for_each(|&h| check_bandwidth(h))
}

/// Sample-point estimator (1/n) Σᵢ K((x − Xᵢ)/hᵢ)/hᵢ; `per_datum_h[i]`
/// belongs to the i-th smallest observation.
pub fn sample_point_kde_at<T: Scalar>(
    sample: &Sample<T>,
    kernel: Kernel,
    per_datum_h: &[T],
    x: T,
) -> Result<T> {
    check_per_datum(sample, per_datum_h)?;
    Ok(sample_point_unchecked(sample, kernel, per_datum_h, x))
}

fn sample_point_unchecked<T: Scalar>(sample: &Sample<T>, kernel: Kernel, hs: &[T], x: T) -> T {
    let sum: T = sample
        .values()
        .iter()
        .zip(hs)
        .map(|(&xi, &h)| kernel.evaluate((x - xi) / h) / h)
        .sum();
    sum / sample.n_scalar()
}

pub fn sample_point_grid<T: Scalar>(
    sample: &Sample<T>,
    kernel: Kernel,
    per_datum_h: &[T],
    grid: &[T],
) -> Result<DensityEstimate<T>> {
    check_per_datum(sample, per_datum_h)?;
    check_grid(grid)?;
    let values = grid
        .par_iter()
        .map(|&x| sample_point_unchecked(sample, kernel, per_datum_h, x))
        .collect();
    Ok(DensityEstimate {
        grid: grid.to_vec(),
        values,
        bandwidth: EstimateBandwidth::Varying(per_datum_h.to_vec()),
        kernel,
    })
}

/// Square-root law hᵢ = h₀ (f̃(Xᵢ)/g)^{-1/2}, with h₀ the rule-of-thumb
/// bandwidth, f̃ the fixed-h₀ pilot estimate and g the geometric mean of the
/// pilot values at the observations.
pub fn default_sample_point_bandwidths<T: Scalar>(
    sample: &Sample<T>,
    kernel: Kernel,
) -> Result<Vec<T>> {
    let h0 = rule_of_thumb(sample)?.h;
    let pilot = sample
        .values()
        .iter()
        .map(|&xi| kde_at(sample, kernel, h0, xi))
        .collect::<Result<Vec<T>>>()?;
    let log_g = pilot.iter().map(|p| p.ln()).sum::<T>() / sample.n_scalar();
    let g = log_g.exp();
    Ok(pilot.into_iter().map(|p| h0 * (p / g).powf(lit(-0.5))).collect())
}

/// Bandwidth of the binned estimator: global, or one per bin evaluated at the
/// bin centre.
#[derive(Clone, Debug, PartialEq)]
pub enum BinnedBandwidth<T> {
    Global(T),
    PerBin(Vec<T>),
}

/// Binned estimator (1/n) Σⱼ nⱼ K((x − tⱼ)/hⱼ)/hⱼ over the non-empty bins
/// with centres tⱼ.
pub fn binned_kde<T: Scalar>(
    sample: &Sample<T>,
    kernel: Kernel,
    h: &BinnedBandwidth<T>,
    bins: HistogramSpec<T>,
    grid: &[T],
) -> Result<DensityEstimate<T>> {
    check_grid(grid)?;
    let per_bin: Vec<T> = match h {
        BinnedBandwidth::Global(h) => vec![*h; bins.bin_count],
        BinnedBandwidth::PerBin(hs) => {
            if hs.len() != bins.bin_count {
                return Err(KdeError::InvalidArgument(format!(
                    "{} per-bin bandwidths for {} bins",
                    hs.len(),
                    bins.bin_count
                )));
            }
            hs.clone()
        }
    };
    per_bin.iter().try_for_each(|&h| check_bandwidth(h))?;
    let counts = bins.counts(sample)?;
    let occupied: Vec<(T, T, T)> = counts
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(j, &c)| (bins.bin_center(j), from_usize::<T>(c), per_bin[j]))
        .collect();
    let n = sample.n_scalar();
    let values = grid
        .par_iter()
        .map(|&x| {
            occupied
                .iter()
                .map(|&(t, c, h)| c * kernel.evaluate((x - t) / h) / h)
                .sum::<T>()
                / n
        })
        .collect();
    let bandwidth = match h {
        BinnedBandwidth::Global(h) => EstimateBandwidth::Global(*h),
        BinnedBandwidth::PerBin(hs) => EstimateBandwidth::Varying(hs.clone()),
    };
    Ok(DensityEstimate { grid: grid.to_vec(), values, bandwidth, kernel })
}

fn check_positive_sample<T: Scalar>(sample: &Sample<T>) -> Result<()> {
    if sample.min() <= T::zero() {
        return Err(KdeError::DomainViolation(format!(
            "gamma kernel estimation needs positive observations, smallest is {}",
            sample.min()
        )));
    }
    Ok(())
}

/// Gamma-kernel estimate (1/n) Σᵢ K_{x/b+1, b}(Xᵢ) for data on ℝ₊.
pub fn gamma_kde_at<T: Scalar>(sample: &Sample<T>, b: T, x: T) -> Result<T> {
    check_positive_sample(sample)?;
    gamma_kde_unchecked(sample, b, x)
}

fn gamma_kde_unchecked<T: Scalar>(sample: &Sample<T>, b: T, x: T) -> Result<T> {
    check_bandwidth(b)?;
    let mut acc = T::zero();
    for &xi in sample.values() {
        acc += gamma_kernel(x, b, xi)?;
    }
    Ok(acc / sample.n_scalar())
}

pub fn gamma_kde_grid<T: Scalar>(sample: &Sample<T>, b: T, grid: &[T]) -> Result<DensityEstimate<T>> {
    check_positive_sample(sample)?;
    check_bandwidth(b)?;
    check_grid(grid)?;
    let values = grid
        .par_iter()
        .map(|&x| gamma_kde_unchecked(sample, b, x))
        .collect::<Result<Vec<T>>>()?;
    Ok(DensityEstimate {
        grid: grid.to_vec(),
        values,
        bandwidth: EstimateBandwidth::Global(b),
        // the gamma kernel is not one of the symmetric families; record the
        // closest analogue for provenance
        kernel: Kernel::Gaussian,
    })
}

/// Kernel distribution function estimate (1/n) Σᵢ 𝒦((x − Xᵢ)/h), with 𝒦 the
/// antiderivative of the kernel.
pub fn kdfe_at<T: Scalar>(sample: &Sample<T>, kernel: Kernel, h: T, x: T) -> Result<T> {
    check_bandwidth(h)?;
    Ok(kdfe_unchecked(sample, kernel, h, x))
}

fn kdfe_unchecked<T: Scalar>(sample: &Sample<T>, kernel: Kernel, h: T, x: T) -> T {
    let v = sample.values();
    let (sum, full) = match kernel.support_radius() {
        Some(r) => {
            let reach = h * lit(r);
            // observations below x − h contribute exactly 1
            let w = sample.window(x - reach, x + reach);
            let partial: T = v[w.clone()]
                .iter()
                .map(|&xi| kernel.antiderivative((x - xi) / h))
                .sum();
            (partial, w.start)
        }
        None => (v.iter().map(|&xi| kernel.antiderivative((x - xi) / h)).sum(), 0),
    };
    (sum + from_usize::<T>(full)) / sample.n_scalar()
}

pub fn kdfe_grid<T: Scalar>(
    sample: &Sample<T>,
    kernel: Kernel,
    h: T,
    grid: &[T],
) -> Result<DensityEstimate<T>> {
    check_bandwidth(h)?;
    check_grid(grid)?;
    let values = grid
        .par_iter()
        .map(|&x| kdfe_unchecked(sample, kernel, h, x))
        .collect();
    Ok(DensityEstimate {
        grid: grid.to_vec(),
        values,
        bandwidth: EstimateBandwidth::Global(h),
        kernel,
    })
}
