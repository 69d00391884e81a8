//! Local bandwidth from a threshold test between two kernel estimates.

use crate::error::{KdeError, Result};
use crate::estimators::kernel_sum;
use crate::kernels::Kernel;
use crate::sample::Sample;
use crate::scalar::{from_usize, lit, log_space, std_normal_pdf, std_normal_upper_quantile, Scalar};

use super::{ReportFlag, SelectorReport};

const GRID_SIZE: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChanParams<T> {
    /// Lower end of the scan is c·n^{-1/5}.
    pub c: T,
    /// Upper end of the scan is n^{-eps}.
    pub eps: T,
    /// Two-sided test level.
    pub alpha: T,
}

impl<T: Scalar> Default for ChanParams<T> {
    fn default() -> Self {
        Self { c: lit(0.5), eps: lit(0.1), alpha: lit(0.05) }
    }
}

/// ∫(φ − K_E)² = R(φ) + R(K_E) − 2∫φK_E with K_E the Epanechnikov kernel.
fn contrast_norm<T: Scalar>() -> T {
    // ∫₋₁¹ φ(u)·0.75(1 − u²)du = 0.75[(2Φ(1) − 1) − (2Φ(1) − 1 − 2φ(1))] = 1.5φ(1)
    let r_phi = T::one() / (lit::<T>(2.0) * T::PI().sqrt());
    let r_epa: T = lit(0.6);
    let cross = lit::<T>(1.5) * std_normal_pdf(T::one());
    r_phi + r_epa - lit::<T>(2.0) * cross
}

/// Test statistic Δ_n(x; h) = √(nh)(f̂ − f̄) / (f̂^{1/2} ‖K − K̄‖) with f̂ the
/// Gaussian and f̄ the Epanechnikov estimate at `x`.
pub fn chan_statistic<T: Scalar>(sample: &Sample<T>, x: T, h: T) -> Result<T> {
    crate::estimators::check_bandwidth(h)?;
    let n = sample.n_scalar();
    let f_hat = kernel_sum(sample, Kernel::Gaussian, h, x) / (n * h);
    if !(f_hat > T::zero()) {
        return Err(KdeError::DegenerateBandwidth {
            x: crate::scalar::to_f64(x),
            reason: format!("gaussian estimate vanishes at h = {h}"),
        });
    }
    let f_bar = kernel_sum(sample, Kernel::Epanechnikov, h, x) / (n * h);
    Ok((n * h).sqrt() * (f_hat - f_bar) / (f_hat.sqrt() * contrast_norm::<T>().sqrt()))
}

/// Scans 64 log-spaced r over [c·n^{-1/5}, n^{-eps}] from the largest down
/// and returns the smallest r such that |Δ_n| exceeds the two-sided normal
/// critical value at r and at every larger candidate. When even the largest
/// candidate does not exceed it the largest is returned, flagged.
///
/// The trace holds (r, |Δ_n(x; r)|) in ascending r.
pub fn chan_local<T: Scalar>(sample: &Sample<T>, x: T, params: ChanParams<T>) -> Result<SelectorReport<T>> {
    let ChanParams { c, eps, alpha } = params;
    if !(c > T::zero() && c.is_finite()) {
        return Err(KdeError::InvalidArgument(format!("c must be positive, got {c}")));
    }
    if !(eps > T::zero() && eps < lit(0.2)) {
        return Err(KdeError::InvalidArgument(format!("eps must lie in (0, 1/5), got {eps}")));
    }
    if !(alpha > T::zero() && alpha < T::one()) {
        return Err(KdeError::InvalidArgument(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    let n = from_usize::<T>(sample.n());
    let lo = c * n.powf(lit(-0.2));
    let hi = n.powf(-eps);
    if !(lo < hi) {
        return Err(KdeError::InvalidArgument(format!(
            "empty scan interval [{lo}, {hi}]; lower c or eps, or add data"
        )));
    }
    let z = std_normal_upper_quantile(alpha / lit(2.0));
    let grid = log_space(lo, hi, GRID_SIZE);
    let trace = grid
        .iter()
        .map(|&r| Ok((r, chan_statistic(sample, x, r)?.abs())))
        .collect::<Result<Vec<_>>>()?;
    let run = trace.iter().rev().take_while(|(_, d)| *d > z).count();
    if run == 0 {
        return Ok(SelectorReport {
            h: hi,
            criterion_trace: trace,
            iterations: GRID_SIZE,
            converged: false,
            flag: Some(ReportFlag::EmptyAdmissibleSet),
        });
    }
    Ok(SelectorReport {
        h: grid[GRID_SIZE - run],
        criterion_trace: trace,
        iterations: run,
        converged: true,
        flag: None,
    })
}
