//! Kernel density estimation: histograms, fixed and variable bandwidth
//! kernel estimators, boundary-corrected gamma kernels, kernel distribution
//! function estimates, a family of bandwidth selectors, and SiZer
//! scale-space maps.
//!
//! Everything is generic over [`Scalar`] (`f32` or `f64`). The `*64` and
//! `*32` aliases below name the concrete instantiations.
//!
//! ```
//! use kdekit::{bandwidth, estimators, Kernel, Sample64};
//!
//! let sample = Sample64::new(vec![-1.2, -0.3, 0.1, 0.4, 1.9]).unwrap();
//! let h = bandwidth::rule_of_thumb(&sample).unwrap().h;
//! let f = estimators::kde_at(&sample, Kernel::Gaussian, h, 0.0).unwrap();
//! assert!(f > 0.0);
//! ```

// `!(x > 0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bandwidth;
pub mod error;
pub mod estimators;
pub mod histogram;
pub mod kernels;
mod sample;
mod scalar;
pub mod sizer;

#[cfg(test)]
mod testutil;

pub use bandwidth::{ReportFlag, SearchInterval, SelectorReport};
pub use error::{KdeError, Result};
pub use estimators::{DensityEstimate, EstimateBandwidth};
pub use histogram::{Histogram, HistogramSpec};
pub use kernels::{IcvKernel, Kernel, KernelMoments};
pub use sample::Sample;
pub use scalar::{linspace, log_space, Scalar};
pub use sizer::{Pixel, ScaleSpaceGrid, SizerMap};

pub type Sample64 = Sample<f64>;
pub type Sample32 = Sample<f32>;
pub type DensityEstimate64 = DensityEstimate<f64>;
pub type DensityEstimate32 = DensityEstimate<f32>;
pub type SelectorReport64 = SelectorReport<f64>;
pub type SelectorReport32 = SelectorReport<f32>;
pub type Histogram64 = Histogram<f64>;
pub type Histogram32 = Histogram<f32>;
pub type SizerMap64 = SizerMap<f64>;
pub type SizerMap32 = SizerMap<f32>;
pub type IcvKernel64 = IcvKernel<f64>;
pub type IcvKernel32 = IcvKernel<f32>;
