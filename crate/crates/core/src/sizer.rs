//! SiZer: significance of zero crossings of the derivative across a
//! bandwidth ladder, drawn as a four-colour (x, h) map.
//!
//! All smoothing here uses the Gaussian kernel, whose derivatives of every
//! order exist and for which the number of modes is non-increasing in h.

use std::fmt;
use std::io::{self, Write};

use rayon::prelude::*;

use crate::error::{KdeError, Result};
use crate::estimators::check_bandwidth;
use crate::kernels::gaussian_derivative;
use crate::sample::Sample;
use crate::scalar::{from_usize, linspace, lit, log_space, std_normal_upper_quantile, Scalar};

/// Effective sample size below which a pixel is marked as data-starved.
pub const MIN_ESS: f64 = 5.0;
pub const DEFAULT_X_POINTS: usize = 101;
pub const DEFAULT_H_POINTS: usize = 21;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Pixel {
    Increasing,
    Decreasing,
    Indeterminate,
    InsufficientData,
}

impl Pixel {
    pub fn name(self) -> &'static str {
        match self {
            Pixel::Increasing => "increasing",
            Pixel::Decreasing => "decreasing",
            Pixel::Indeterminate => "indeterminate",
            Pixel::InsufficientData => "insufficient",
        }
    }

    /// Map colour: blue, red, purple, gray.
    pub fn rgb(self) -> [u8; 3] {
        match self {
            Pixel::Increasing => [0, 0, 255],
            Pixel::Decreasing => [255, 0, 0],
            Pixel::Indeterminate => [160, 32, 240],
            Pixel::InsufficientData => [128, 128, 128],
        }
    }
}

impl fmt::Display for Pixel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn check_order(m: usize) -> Result<()> {
    if m == 0 {
        return Err(KdeError::InvalidArgument("derivative order must be at least 1".into()));
    }
    Ok(())
}

/// Summand i of the m-th derivative estimate: φ⁽ᵐ⁾((x − Xᵢ)/h) / h^{m+1}.
fn summands<T: Scalar>(sample: &Sample<T>, h: T, x: T, m: usize) -> impl Iterator<Item = T> + '_ {
    let scale = h.powi(m as i32 + 1);
    sample.values().iter().map(move |&xi| gaussian_derivative((x - xi) / h, m) / scale)
}

/// ∂ᵐf̂_h(x)/∂xᵐ = (1/(n h^{m+1})) Σᵢ φ⁽ᵐ⁾((x − Xᵢ)/h).
pub fn derivative_estimate<T: Scalar>(sample: &Sample<T>, h: T, x: T, m: usize) -> Result<T> {
    check_bandwidth(h)?;
    check_order(m)?;
    Ok(summands(sample, h, x, m).sum::<T>() / sample.n_scalar())
}

fn mean_and_se<T: Scalar>(sample: &Sample<T>, h: T, x: T, m: usize) -> (T, T) {
    let n = sample.n_scalar();
    let mean = summands(sample, h, x, m).sum::<T>() / n;
    // deviations from the first summand keep equal summands at exactly 0
    let first = summands(sample, h, x, m).next().unwrap_or_else(T::zero);
    let shift = summands(sample, h, x, m).map(|s| s - first).sum::<T>() / n;
    let ss: T = summands(sample, h, x, m).map(|s| (s - first - shift) * (s - first - shift)).sum();
    let sd = (ss / (n - T::one())).sqrt();
    (mean, sd / n.sqrt())
}

/// Standard deviation of the summands of [`derivative_estimate`] over √n.
pub fn derivative_se<T: Scalar>(sample: &Sample<T>, h: T, x: T, m: usize) -> Result<T> {
    check_bandwidth(h)?;
    check_order(m)?;
    if sample.n() < 2 {
        return Err(KdeError::InvalidArgument("standard error needs at least 2 observations".into()));
    }
    Ok(mean_and_se(sample, h, x, m).1)
}

/// Σᵢ K_h(x − Xᵢ)/K_h(0) with K Gaussian: the number of observations
/// carrying full weight at x.
pub fn effective_sample_size<T: Scalar>(sample: &Sample<T>, h: T, x: T) -> Result<T> {
    check_bandwidth(h)?;
    let half: T = lit(0.5);
    Ok(sample
        .values()
        .iter()
        .map(|&xi| {
            let u = (x - xi) / h;
            (-half * u * u).exp()
        })
        .sum())
}

/// Four-way decision from an interval estimate ± q·se.
pub fn classify<T: Scalar>(estimate: T, se: T, ess: T, q: T) -> Pixel {
    if ess < lit(MIN_ESS) {
        Pixel::InsufficientData
    } else if estimate - q * se > T::zero() {
        Pixel::Increasing
    } else if estimate + q * se < T::zero() {
        Pixel::Decreasing
    } else {
        Pixel::Indeterminate
    }
}

/// Classifies one (x, h) cell with critical value `q`.
pub fn classify_pixel<T: Scalar>(sample: &Sample<T>, h: T, x: T, m: usize, q: T) -> Result<Pixel> {
    let se = derivative_se(sample, h, x, m)?;
    let est = derivative_estimate(sample, h, x, m)?;
    let ess = effective_sample_size(sample, h, x)?;
    Ok(classify(est, se, ess, q))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScaleSpaceGrid<T> {
    x_grid: Vec<T>,
    h_grid: Vec<T>,
}

impl<T: Scalar> ScaleSpaceGrid<T> {
    /// `x_grid` non-decreasing and finite; `h_grid` strictly increasing and
    /// positive.
    pub fn new(x_grid: Vec<T>, h_grid: Vec<T>) -> Result<Self> {
        if x_grid.is_empty() || h_grid.is_empty() {
            return Err(KdeError::InvalidArgument("scale-space grid axes must be non-empty".into()));
        }
        if x_grid.iter().any(|x| !x.is_finite()) || x_grid.windows(2).any(|w| w[1] < w[0]) {
            return Err(KdeError::InvalidArgument("x grid must be finite and ascending".into()));
        }
        if h_grid.iter().any(|h| !(h.is_finite() && *h > T::zero())) || h_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(KdeError::InvalidArgument("h grid must be positive and strictly ascending".into()));
        }
        Ok(Self { x_grid, h_grid })
    }

    /// 101 x points over the data range padded by 10% on each side; 21
    /// log-spaced h from twice the x spacing to the data range.
    ///
    /// Tying the smallest h to the x resolution keeps the middle rows at a
    /// scale the map can show, whatever the sample size.
    pub fn default_for(sample: &Sample<T>) -> Result<Self> {
        let range = sample.range();
        if !(range > T::zero()) {
            return Err(KdeError::DegenerateSample("all observations coincide".into()));
        }
        let pad = range * lit(0.1);
        let x_grid = linspace(sample.min() - pad, sample.max() + pad, DEFAULT_X_POINTS);
        let lo = (x_grid[1] - x_grid[0]) * lit(2.0);
        Self::new(x_grid, log_space(lo, range, DEFAULT_H_POINTS))
    }

    pub fn x_grid(&self) -> &[T] {
        &self.x_grid
    }

    pub fn h_grid(&self) -> &[T] {
        &self.h_grid
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SizerMap<T> {
    pub grid: ScaleSpaceGrid<T>,
    /// Row-major, one row per h in ascending order.
    pub pixels: Vec<Pixel>,
    pub alpha: T,
    pub derivative_order: usize,
}

impl<T: Scalar> SizerMap<T> {
    pub fn width(&self) -> usize {
        self.grid.x_grid.len()
    }

    pub fn height(&self) -> usize {
        self.grid.h_grid.len()
    }

    /// Pixels of the row for `h_grid[row]`.
    pub fn row(&self, row: usize) -> &[Pixel] {
        let w = self.width();
        &self.pixels[row * w..(row + 1) * w]
    }

    /// Number of Increasing→Decreasing transitions along a row, ignoring
    /// indeterminate and data-starved pixels in between.
    pub fn significant_peaks(&self, row: usize) -> usize {
        let mut last = None;
        let mut peaks = 0;
        for &p in self.row(row) {
            if matches!(p, Pixel::Increasing | Pixel::Decreasing) {
                if last == Some(Pixel::Increasing) && p == Pixel::Decreasing {
                    peaks += 1;
                }
                last = Some(p);
            }
        }
        peaks
    }

    /// Binary PPM, one pixel per cell, largest h in the top row.
    pub fn write_ppm<W: Write>(&self, mut out: W) -> io::Result<()> {
        write!(out, "P6\n{} {}\n255\n", self.width(), self.height())?;
        let mut buf = Vec::with_capacity(self.pixels.len() * 3);
        for row in (0..self.height()).rev() {
            for p in self.row(row) {
                buf.extend_from_slice(&p.rgb());
            }
        }
        out.write_all(&buf)
    }
}

/// Greedy count of x points with ESS ≥ 5 that are at least h apart,
/// clamped to [1, |x_grid|].
fn independent_blocks<T: Scalar>(x_grid: &[T], ess: &[T], h: T) -> usize {
    let mut count = 0;
    let mut last: Option<T> = None;
    for (&x, &e) in x_grid.iter().zip(ess) {
        if e >= lit(MIN_ESS) && last.is_none_or(|l| x - l >= h) {
            count += 1;
            last = Some(x);
        }
    }
    count.clamp(1, x_grid.len())
}

/// Classifies every cell of `grid`. Row h uses the critical value
/// z_{1 − α/(2ℓ)} with ℓ the number of roughly independent blocks of
/// adequately sampled x points at that h.
pub fn sizer_map<T: Scalar>(sample: &Sample<T>, grid: ScaleSpaceGrid<T>, m: usize, alpha: T) -> Result<SizerMap<T>> {
    check_order(m)?;
    if !(alpha > T::zero() && alpha < T::one()) {
        return Err(KdeError::InvalidArgument(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    if sample.n() < 2 {
        return Err(KdeError::InvalidArgument("SiZer needs at least 2 observations".into()));
    }
    let rows: Vec<Vec<Pixel>> = grid
        .h_grid
        .par_iter()
        .map(|&h| {
            let stats: Vec<(T, T, T)> = grid
                .x_grid
                .iter()
                .map(|&x| {
                    let (est, se) = mean_and_se(sample, h, x, m);
                    let ess = effective_sample_size(sample, h, x).expect("validated bandwidth");
                    (est, se, ess)
                })
                .collect();
            let ess: Vec<T> = stats.iter().map(|s| s.2).collect();
            let l = independent_blocks(&grid.x_grid, &ess, h);
            let q = std_normal_upper_quantile(alpha / (lit::<T>(2.0) * from_usize::<T>(l)));
            stats.iter().map(|&(e, s, n)| classify(e, s, n, q)).collect()
        })
        .collect();
    Ok(SizerMap { grid, pixels: rows.concat(), alpha, derivative_order: m })
}

/// Sign changes of the m-th derivative estimate along `x_grid`, skipping
/// exact zeros.
pub fn sign_change_count<T: Scalar>(sample: &Sample<T>, h: T, x_grid: &[T], m: usize) -> Result<usize> {
    let mut last_positive: Option<bool> = None;
    let mut changes = 0;
    for &x in x_grid {
        let d = derivative_estimate(sample, h, x, m)?;
        if d == T::zero() {
            continue;
        }
        let positive = d > T::zero();
        if last_positive.is_some_and(|p| p != positive) {
            changes += 1;
        }
        last_positive = Some(positive);
    }
    Ok(changes)
}
