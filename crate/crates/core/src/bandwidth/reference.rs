//! Closed-form bandwidths: the MISE-optimal formula for a known R(f'') and
//! the Gaussian reference rules built on it.

use crate::error::{KdeError, Result};
use crate::kernels::Kernel;
use crate::sample::Sample;
use crate::scalar::{from_usize, lit, Scalar};

use super::SelectorReport;

/// Coefficient of the Gaussian reference rule h = 1.06 σ n^{-1/5}.
pub const REFERENCE_COEFFICIENT: f64 = 1.06;

/// Asymptotic MISE R(K)/(nh) + h⁴ μ₂²(K) R(f'') / 4.
pub fn amise<T: Scalar>(kernel: Kernel, r_fpp: T, n: usize, h: T) -> T {
    let m = kernel.moments::<T>();
    m.roughness / (from_usize::<T>(n) * h) + h.powi(4) * m.mu2 * m.mu2 * r_fpp / lit(4.0)
}

/// h_MISE = (R(K) / (μ₂²(K) R(f'')))^{1/5} n^{-1/5}.
pub fn h_mise_oracle<T: Scalar>(kernel: Kernel, r_fpp: T, n: usize) -> Result<T> {
    if !(r_fpp.is_finite() && r_fpp > T::zero()) {
        return Err(KdeError::InvalidArgument(format!(
            "R(f'') must be finite and positive, got {r_fpp}"
        )));
    }
    if n < 1 {
        return Err(KdeError::InvalidArgument("sample size must be at least 1".into()));
    }
    let m = kernel.moments::<T>();
    let fifth: T = lit(0.2);
    Ok((m.roughness / (m.mu2 * m.mu2 * r_fpp)).powf(fifth) * from_usize::<T>(n).powf(-fifth))
}

fn reference_bandwidth<T: Scalar>(spread: T, n: usize) -> T {
    lit::<T>(REFERENCE_COEFFICIENT) * spread * from_usize::<T>(n).powf(lit(-0.2))
}

/// 1.06 σ̂ n^{-1/5}, σ̂ with divisor n − 1.
pub fn rule_of_thumb<T: Scalar>(sample: &Sample<T>) -> Result<SelectorReport<T>> {
    if sample.n() < 2 {
        return Err(KdeError::InvalidArgument(
            "rule of thumb needs at least 2 observations".into(),
        ));
    }
    let sd = sample.std_dev();
    if !(sd > T::zero()) {
        return Err(KdeError::DegenerateSample("zero sample variance".into()));
    }
    Ok(SelectorReport::closed_form(reference_bandwidth(sd, sample.n())))
}

/// 1.06 min(σ̂, IQR/1.34) n^{-1/5}.
pub fn robust_rule<T: Scalar>(sample: &Sample<T>) -> Result<SelectorReport<T>> {
    if sample.n() < 4 {
        return Err(KdeError::InvalidArgument(
            "robust rule needs at least 4 observations".into(),
        ));
    }
    let spread = sample.std_dev().min(sample.iqr() / lit(1.34));
    if !(spread > T::zero()) {
        return Err(KdeError::DegenerateSample(
            "zero spread (standard deviation or interquartile range)".into(),
        ));
    }
    Ok(SelectorReport::closed_form(reference_bandwidth(spread, sample.n())))
}
