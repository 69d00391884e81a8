//! Cross-validation criteria and their selectors: least squares (LSCV),
//! biased (BCV), likelihood, indirect (ICV), and Sarda's leave-one-out
//! criterion for the kernel distribution function estimator.

use crate::error::{KdeError, Result};
use crate::estimators::check_bandwidth;
use crate::kernels::{gaussian_derivative, ConvolutionKernel, IcvKernel, Kernel};
use crate::sample::Sample;
use crate::scalar::{from_usize, lit, Scalar};

use super::search::{minimize_scalar, SearchInterval};
use super::SelectorReport;

fn require_pairs<T: Scalar>(sample: &Sample<T>) -> Result<()> {
    if sample.n() < 2 {
        return Err(KdeError::InvalidArgument(
            "cross-validation needs at least 2 observations".into(),
        ));
    }
    Ok(())
}

/// Visits every unordered pair i < j whose distance is at most `reach`
/// (all pairs when `reach` is `None`), passing Xⱼ − Xᵢ ≥ 0.
fn for_each_pair<T: Scalar>(values: &[T], reach: Option<T>, mut f: impl FnMut(T)) {
    for i in 0..values.len() {
        for &xj in &values[i + 1..] {
            let d = xj - values[i];
            if reach.is_some_and(|r| d > r) {
                break;
            }
            f(d);
        }
    }
}

/// CV_LS(h) = ∫f̂²  − (2/n) Σᵢ f̂_{h,−i}(Xᵢ).
///
/// ∫f̂² = (1/(n²h)) Σᵢ Σⱼ (K∗K)((Xᵢ − Xⱼ)/h) is exact through the kernel's
/// closed-form self-convolution; the leave-one-out estimates use divisor
/// (n − 1)h. The kernel may be signed.
pub fn lscv_score<T, K>(sample: &Sample<T>, kernel: &K, h: T) -> Result<T>
where
    T: Scalar,
    K: ConvolutionKernel<T> + ?Sized,
{
    require_pairs(sample)?;
    check_bandwidth(h)?;
    let n = sample.n_scalar();
    let mut conv_sum = T::zero();
    let mut kern_sum = T::zero();
    let reach = kernel.support_radius().map(|r| lit::<T>(2.0) * r * h);
    for_each_pair(sample.values(), reach, |d| {
        let u = d / h;
        conv_sum += kernel.self_convolution(u);
        kern_sum += kernel.value(u);
    });
    let two: T = lit(2.0);
    let integral = (n * kernel.self_convolution(T::zero()) + two * conv_sum) / (n * n * h);
    // (2/n) Σᵢ (1/((n−1)h)) Σ_{j≠i} K = (4/(n(n−1)h)) Σ_{i<j} K
    let loo = two * two * kern_sum / (n * (n - T::one()) * h);
    Ok(integral - loo)
}

pub fn select_lscv<T, K>(
    sample: &Sample<T>,
    kernel: &K,
    interval: SearchInterval<T>,
) -> Result<SelectorReport<T>>
where
    T: Scalar,
    K: ConvolutionKernel<T> + ?Sized,
{
    require_pairs(sample)?;
    minimize_scalar(|h| lscv_score(sample, kernel, h).unwrap_or(T::nan()), interval)
}

/// BCV(h) = R(K)/(nh) + (h⁴/4) μ₂²(K) R̃(f''), Gaussian kernel, with
/// R̃(f'') = n⁻² Σ_{i≠j} (K_h''∗K_h'')(Xᵢ − Xⱼ) = n⁻² h⁻⁵ Σ_{i≠j} ψ⁽⁴⁾((Xᵢ − Xⱼ)/h)
/// and ψ the N(0, 2) density.
pub fn bcv_score<T: Scalar>(sample: &Sample<T>, h: T) -> Result<T> {
    require_pairs(sample)?;
    check_bandwidth(h)?;
    let n = sample.n_scalar();
    let sqrt2 = T::SQRT_2();
    // ψ⁽⁴⁾(d) = 2^{-5/2} φ⁽⁴⁾(d/√2)
    let scale = sqrt2.powi(-5);
    let mut sum = T::zero();
    for_each_pair(sample.values(), None, |d| {
        sum += scale * gaussian_derivative(d / h / sqrt2, 4);
    });
    let r_tilde = lit::<T>(2.0) * sum / (n * n * h.powi(5));
    let m = Kernel::Gaussian.moments::<T>();
    Ok(m.roughness / (n * h) + h.powi(4) / lit(4.0) * m.mu2 * m.mu2 * r_tilde)
}

pub fn select_bcv<T: Scalar>(sample: &Sample<T>, interval: SearchInterval<T>) -> Result<SelectorReport<T>> {
    require_pairs(sample)?;
    minimize_scalar(|h| bcv_score(sample, h).unwrap_or(T::nan()), interval)
}

/// Mean leave-one-out log density n⁻¹ Σᵢ log f̂_{h,−i}(Xᵢ); −∞ when some
/// leave-one-out estimate vanishes.
pub fn likelihood_cv_score<T: Scalar>(sample: &Sample<T>, kernel: Kernel, h: T) -> Result<T> {
    require_pairs(sample)?;
    check_bandwidth(h)?;
    let v = sample.values();
    let n = v.len();
    let mut loo = vec![T::zero(); n];
    let reach = kernel.support_radius().map(|r| lit::<T>(r) * h);
    for i in 0..n {
        for j in (i + 1)..n {
            let d = v[j] - v[i];
            if reach.is_some_and(|r| d > r) {
                break;
            }
            let k = kernel.evaluate(d / h);
            loo[i] += k;
            loo[j] += k;
        }
    }
    let denom = from_usize::<T>(n - 1) * h;
    let mut total = T::zero();
    for s in loo {
        if s <= T::zero() {
            return Ok(T::neg_infinity());
        }
        total += (s / denom).ln();
    }
    Ok(total / from_usize(n))
}

/// Maximises the likelihood score (the average log-likelihood, i.e. the
/// Kullback–Leibler-minimising choice). The report trace holds the score
/// itself, not its negation.
pub fn select_likelihood_cv<T: Scalar>(
    sample: &Sample<T>,
    kernel: Kernel,
    interval: SearchInterval<T>,
) -> Result<SelectorReport<T>> {
    require_pairs(sample)?;
    let mut report = minimize_scalar(
        |h| -likelihood_cv_score(sample, kernel, h).unwrap_or(T::nan()),
        interval,
    )?;
    report.criterion_trace.iter_mut().for_each(|(_, v)| *v = -*v);
    Ok(report)
}

/// Indirect cross-validation: LSCV with the signed kernel L(·; α, σ) picks
/// b̂, which is rescaled to the Gaussian-kernel bandwidth C·b̂. `interval`
/// bounds b̂; the trace is the L-kernel LSCV trace over b.
pub fn select_icv<T: Scalar>(
    sample: &Sample<T>,
    params: &IcvKernel<T>,
    interval: SearchInterval<T>,
) -> Result<SelectorReport<T>> {
    let c = params.bandwidth_ratio()?;
    let mut report = select_lscv(sample, params, interval)?;
    report.h *= c;
    Ok(report)
}

/// Sarda's criterion n⁻¹ Σᵢ [F̂_{h,−i}(Xᵢ) − F_n(Xᵢ)]² with unit weight and
/// F_n(Xᵢ) = (average rank of Xᵢ)/n.
pub fn sarda_cv_kdfe<T: Scalar>(sample: &Sample<T>, kernel: Kernel, h: T) -> Result<T> {
    require_pairs(sample)?;
    check_bandwidth(h)?;
    let v = sample.values();
    let n = v.len();
    let nf = from_usize::<T>(n);
    let ranks = sample.average_ranks();
    let mut total = T::zero();
    for i in 0..n {
        let mut acc = T::zero();
        for (j, &xj) in v.iter().enumerate() {
            if j != i {
                acc += kernel.antiderivative((v[i] - xj) / h);
            }
        }
        let loo = acc / from_usize(n - 1);
        let diff = loo - ranks[i] / nf;
        total += diff * diff;
    }
    Ok(total / nf)
}

pub fn select_sarda<T: Scalar>(
    sample: &Sample<T>,
    kernel: Kernel,
    interval: SearchInterval<T>,
) -> Result<SelectorReport<T>> {
    require_pairs(sample)?;
    minimize_scalar(|h| sarda_cv_kdfe(sample, kernel, h).unwrap_or(T::nan()), interval)
}
