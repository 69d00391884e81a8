//! Kernel weight functions.
//!
//! | Kernel       | K(u)                        | Support   | μ₂(K) | R(K)      | R(K'')   |
//! |--------------|-----------------------------|-----------|-------|-----------|----------|
//! | Uniform      | 1/2                         | \|u\| < 1 | 1/3   | 1/2       | -        |
//! | Gaussian     | exp(-u²/2)/√(2π)            | ℝ         | 1     | 1/(2√π)   | 3/(8√π)  |
//! | Epanechnikov | 3/4 (1-u²)                  | \|u\| ≤ 1 | 1/5   | 3/5       | 9/2      |
//! | Biweight     | 15/16 (1-u²)²               | \|u\| ≤ 1 | 1/7   | 5/7       | 45/2     |
//! | Triweight    | 35/32 (1-u²)³               | \|u\| ≤ 1 | 1/9   | 350/429   | 35       |
//!
//! Besides the five symmetric kernels this module hosts the two parametric
//! families used by specific estimators: the signed two-Gaussian kernel used
//! by indirect cross-validation and the gamma kernel for data on ℝ₊.

use std::fmt;
use std::str::FromStr;

use crate::error::{KdeError, Result};
use crate::scalar::{from_usize, lit, std_normal_cdf, std_normal_pdf, to_f64, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Kernel {
    Uniform,
    Gaussian,
    Epanechnikov,
    Biweight,
    Triweight,
}

impl Kernel {
    pub const ALL: [Kernel; 5] = [
        Kernel::Uniform,
        Kernel::Gaussian,
        Kernel::Epanechnikov,
        Kernel::Biweight,
        Kernel::Triweight,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Kernel::Uniform => "uniform",
            Kernel::Gaussian => "gaussian",
            Kernel::Epanechnikov => "epanechnikov",
            Kernel::Biweight => "biweight",
            Kernel::Triweight => "triweight",
        }
    }

    /// Half-width of the support, `None` for the Gaussian.
    pub fn support_radius(self) -> Option<f64> {
        match self {
            Kernel::Gaussian => None,
            _ => Some(1.0),
        }
    }

    /// Polynomial coefficients (ascending powers) of the kernel on its support.
    fn coefficients(self) -> &'static [f64] {
        match self {
            Kernel::Uniform => &[0.5],
            Kernel::Epanechnikov => &[0.75, 0.0, -0.75],
            Kernel::Biweight => &[15.0 / 16.0, 0.0, -30.0 / 16.0, 0.0, 15.0 / 16.0],
            Kernel::Triweight => &[
                35.0 / 32.0,
                0.0,
                -105.0 / 32.0,
                0.0,
                105.0 / 32.0,
                0.0,
                -35.0 / 32.0,
            ],
            Kernel::Gaussian => &[],
        }
    }

    pub fn evaluate<T: Scalar>(self, u: T) -> T {
        let a = u.abs();
        match self {
            Kernel::Gaussian => std_normal_pdf(u),
            Kernel::Uniform => {
                if a < T::one() {
                    lit(0.5)
                } else {
                    T::zero()
                }
            }
            _ => {
                if a <= T::one() {
                    let w = T::one() - u * u;
                    match self {
                        Kernel::Epanechnikov => lit::<T>(0.75) * w,
                        Kernel::Biweight => lit::<T>(15.0 / 16.0) * w * w,
                        _ => lit::<T>(35.0 / 32.0) * w * w * w,
                    }
                } else {
                    T::zero()
                }
            }
        }
    }

    pub fn moments<T: Scalar>(self) -> KernelMoments<T> {
        let (mu2, mu4, roughness, d2) = match self {
            Kernel::Uniform => (1.0 / 3.0, 1.0 / 5.0, 0.5, None),
            Kernel::Gaussian => {
                let sqrt_pi = std::f64::consts::PI.sqrt();
                (1.0, 3.0, 1.0 / (2.0 * sqrt_pi), Some(3.0 / (8.0 * sqrt_pi)))
            }
            Kernel::Epanechnikov => (1.0 / 5.0, 3.0 / 35.0, 3.0 / 5.0, Some(4.5)),
            Kernel::Biweight => (1.0 / 7.0, 1.0 / 21.0, 5.0 / 7.0, Some(22.5)),
            Kernel::Triweight => (1.0 / 9.0, 1.0 / 33.0, 350.0 / 429.0, Some(35.0)),
        };
        KernelMoments {
            kernel: self,
            mu2: lit(mu2),
            mu4: lit(mu4),
            roughness: lit(roughness),
            d2_roughness: d2.map(lit),
        }
    }

    /// Derivative of order `order` at `u`.
    ///
    /// Any order is available for the Gaussian. The polynomial kernels only
    /// expose their almost-everywhere first derivative.
    pub fn derivative<T: Scalar>(self, u: T, order: usize) -> Result<T> {
        match (self, order) {
            (_, 0) => Ok(self.evaluate(u)),
            (Kernel::Gaussian, m) => Ok(gaussian_derivative(u, m)),
            (_, 1) => {
                if u.abs() >= T::one() {
                    return Ok(T::zero());
                }
                let w = T::one() - u * u;
                Ok(match self {
                    Kernel::Uniform => T::zero(),
                    Kernel::Epanechnikov => -lit::<T>(1.5) * u,
                    Kernel::Biweight => -lit::<T>(3.75) * u * w,
                    _ => -lit::<T>(105.0 / 16.0) * u * w * w,
                })
            }
            (k, m) => Err(KdeError::Unsupported(format!(
                "derivative of order {m} for the {} kernel",
                k.name()
            ))),
        }
    }

    /// ∫_{-∞}^{u} K(t) dt.
    pub fn antiderivative<T: Scalar>(self, u: T) -> T {
        if self == Kernel::Gaussian {
            return std_normal_cdf(u);
        }
        if u <= -T::one() {
            return T::zero();
        }
        if u >= T::one() {
            return T::one();
        }
        let half: T = lit(0.5);
        let u2 = u * u;
        match self {
            Kernel::Uniform => half * (u + T::one()),
            Kernel::Epanechnikov => half + lit::<T>(0.75) * (u - u * u2 / lit(3.0)),
            Kernel::Biweight => {
                half + lit::<T>(15.0 / 16.0)
                    * (u - lit::<T>(2.0 / 3.0) * u * u2 + u * u2 * u2 / lit(5.0))
            }
            _ => {
                let u3 = u * u2;
                half + lit::<T>(35.0 / 32.0)
                    * (u - u3 + lit::<T>(0.6) * u3 * u2 - u3 * u2 * u2 / lit(7.0))
            }
        }
    }

    /// The self-convolution (K∗K)(d) = ∫K(t)K(d−t)dt, in closed form.
    pub fn self_convolution<T: Scalar>(self, d: T) -> T {
        if self == Kernel::Gaussian {
            // φ∗φ is the N(0, 2) density.
            let s = T::SQRT_2();
            return std_normal_pdf(d / s) / s;
        }
        let d = d.abs();
        let two: T = lit(2.0);
        if d >= two {
            return T::zero();
        }
        // For d in [0, 2] the overlap of the two supports is [d-1, 1].
        let p: Vec<T> = self.coefficients().iter().map(|&c| lit(c)).collect();
        let shifted = poly_reflect_shift(&p, d);
        let prod = poly_mul(&p, &shifted);
        poly_integrate(&prod, d - T::one(), T::one())
    }
}

impl fmt::Display for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Kernel {
    type Err = KdeError;

    fn from_str(s: &str) -> Result<Self> {
        Kernel::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                KdeError::InvalidArgument(format!(
                    "unknown kernel '{s}' (expected one of uniform, gaussian, epanechnikov, biweight, triweight)"
                ))
            })
    }
}

/// Coefficients of p(d − t) as a polynomial in t.
fn poly_reflect_shift<T: Scalar>(p: &[T], d: T) -> Vec<T> {
    let mut out = vec![T::zero(); p.len()];
    for (k, &c) in p.iter().enumerate() {
        // (d - t)^k = Σ_j C(k, j) d^(k-j) (-t)^j
        let mut binom = T::one();
        for (j, slot) in out.iter_mut().enumerate().take(k + 1) {
            let sign = if j % 2 == 0 { T::one() } else { -T::one() };
            *slot += c * binom * d.powi((k - j) as i32) * sign;
            binom = binom * from_usize::<T>(k - j) / from_usize::<T>(j + 1);
        }
    }
    out
}

fn poly_mul<T: Scalar>(a: &[T], b: &[T]) -> Vec<T> {
    let mut out = vec![T::zero(); a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn poly_integrate<T: Scalar>(p: &[T], lo: T, hi: T) -> T {
    let prim = |x: T| {
        p.iter()
            .enumerate()
            .rev()
            .fold(T::zero(), |acc, (k, &c)| acc * x + c / from_usize::<T>(k + 1))
            * x
    };
    prim(hi) - prim(lo)
}

/// m-th derivative of the standard normal density, φ⁽ᵐ⁾(u) = (−1)ᵐ Heₘ(u) φ(u)
/// with Heₘ the probabilists' Hermite polynomial.
pub fn gaussian_derivative<T: Scalar>(u: T, m: usize) -> T {
    let mut prev = T::one();
    let mut cur = u;
    let he = match m {
        0 => prev,
        1 => cur,
        _ => {
            for k in 1..m {
                let next = u * cur - from_usize::<T>(k) * prev;
                prev = cur;
                cur = next;
            }
            cur
        }
    };
    let sign = if m.is_multiple_of(2) { T::one() } else { -T::one() };
    sign * he * std_normal_pdf(u)
}

/// R(φ⁽ᵖ⁾) = ∫(φ⁽ᵖ⁾)² = (2p)! / (2^(2p+1) p! √π).
pub fn gaussian_derivative_roughness<T: Scalar>(p: usize) -> T {
    // (2p)!/p! = (p+1)(p+2)...(2p)
    let ratio: f64 = ((p + 1)..=(2 * p)).map(|k| k as f64).product();
    lit(ratio / (2f64.powi(2 * p as i32 + 1) * std::f64::consts::PI.sqrt()))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelMoments<T> {
    kernel: Kernel,
    /// ∫u²K(u)du
    pub mu2: T,
    /// ∫u⁴K(u)du
    pub mu4: T,
    /// R(K) = ∫K²
    pub roughness: T,
    d2_roughness: Option<T>,
}

impl<T: Scalar> KernelMoments<T> {
    /// R(K'') = ∫(K'')², undefined for the uniform kernel.
    pub fn d2_roughness(&self) -> Result<T> {
        self.d2_roughness.ok_or_else(|| {
            KdeError::Unsupported(format!(
                "R(K'') is undefined for the {} kernel",
                self.kernel.name()
            ))
        })
    }

    /// μ₂²(K)·R⁴(K), the kernel-dependent factor of the optimal AMISE.
    pub fn efficiency_factor(&self) -> T {
        self.mu2 * self.mu2 * self.roughness.powi(4)
    }
}

/// Kernel shape shared by the least-squares cross-validation machinery: a
/// symmetric (possibly signed) kernel with a closed-form self-convolution.
pub trait ConvolutionKernel<T: Scalar>: Sync {
    fn value(&self, u: T) -> T;
    fn self_convolution(&self, d: T) -> T;
    /// Half-width of the support of K, `None` when unbounded.
    fn support_radius(&self) -> Option<T>;
}

impl<T: Scalar> ConvolutionKernel<T> for Kernel {
    fn value(&self, u: T) -> T {
        self.evaluate(u)
    }

    fn self_convolution(&self, d: T) -> T {
        Kernel::self_convolution(*self, d)
    }

    fn support_radius(&self) -> Option<T> {
        Kernel::support_radius(*self).map(lit)
    }
}

/// Member of the kernel family L(u; α, σ) = (1+α)φ(u) − (α/σ)φ(u/σ) used by
/// indirect cross-validation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IcvKernel<T> {
    alpha: T,
    sigma: T,
}

impl<T: Scalar> IcvKernel<T> {
    pub fn new(alpha: T, sigma: T) -> Result<Self> {
        if !(alpha.is_finite() && alpha >= T::zero()) {
            return Err(KdeError::InvalidIcvParams(format!(
                "alpha must be finite and non-negative, got {alpha}"
            )));
        }
        if !(sigma.is_finite() && sigma > T::zero()) {
            return Err(KdeError::InvalidIcvParams(format!(
                "sigma must be finite and positive, got {sigma}"
            )));
        }
        Ok(Self { alpha, sigma })
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    pub fn sigma(&self) -> T {
        self.sigma
    }

    pub fn evaluate(&self, u: T) -> T {
        (T::one() + self.alpha) * std_normal_pdf(u)
            - self.alpha / self.sigma * std_normal_pdf(u / self.sigma)
    }

    /// μ₂(L) = (1+α) − ασ²
    pub fn mu2(&self) -> T {
        T::one() + self.alpha - self.alpha * self.sigma * self.sigma
    }

    /// R(L) from the Gaussian product integral ∫φ_a φ_b = φ_{√(a²+b²)}(0).
    pub fn roughness(&self) -> T {
        let a1 = T::one() + self.alpha;
        let a2 = self.alpha;
        let s = self.sigma;
        let two_sqrt_pi = lit::<T>(2.0) * T::PI().sqrt();
        let cross = T::one() / (T::TAU() * (T::one() + s * s)).sqrt();
        a1 * a1 / two_sqrt_pi - lit::<T>(2.0) * a1 * a2 * cross + a2 * a2 / (two_sqrt_pi * s)
    }

    /// Ratio C = (R(φ)μ₂²(L) / (R(L)μ₂²(φ)))^{1/5} between the MISE-optimal
    /// bandwidths of the Gaussian and the L-kernel estimators.
    pub fn bandwidth_ratio(&self) -> Result<T> {
        let mu2 = self.mu2();
        if mu2.abs() <= T::epsilon() * (T::one() + self.alpha * self.sigma * self.sigma) {
            return Err(KdeError::InvalidIcvParams(format!(
                "second moment of L vanishes for alpha = {}, sigma = {}",
                self.alpha, self.sigma
            )));
        }
        let r_phi = T::one() / (lit::<T>(2.0) * T::PI().sqrt());
        Ok((r_phi * mu2 * mu2 / self.roughness()).powf(lit(0.2)))
    }
}

impl<T: Scalar> ConvolutionKernel<T> for IcvKernel<T> {
    fn value(&self, u: T) -> T {
        self.evaluate(u)
    }

    fn self_convolution(&self, d: T) -> T {
        let scaled_pdf = |s: T| std_normal_pdf(d / s) / s;
        let a1 = T::one() + self.alpha;
        let a2 = self.alpha;
        let s = self.sigma;
        a1 * a1 * scaled_pdf(T::SQRT_2())
            - lit::<T>(2.0) * a1 * a2 * scaled_pdf((T::one() + s * s).sqrt())
            + a2 * a2 * scaled_pdf(s * T::SQRT_2())
    }

    fn support_radius(&self) -> Option<T> {
        None
    }
}

/// Density of Gamma(shape = x/b + 1, scale = b) at `t`, evaluated in log space.
pub fn gamma_kernel<T: Scalar>(x: T, b: T, t: T) -> Result<T> {
    if !(x.is_finite() && x >= T::zero()) {
        return Err(KdeError::DomainViolation(format!(
            "gamma kernel location must be finite and non-negative, got {x}"
        )));
    }
    if !(b.is_finite() && b > T::zero()) {
        return Err(KdeError::InvalidBandwidth(to_f64(b)));
    }
    if !(t.is_finite() && t > T::zero()) {
        return Err(KdeError::DomainViolation(format!(
            "gamma kernel argument must be positive, got {t}"
        )));
    }
    let (x, b, t) = (to_f64(x), to_f64(b), to_f64(t));
    let shape = x / b + 1.0;
    let log_density =
        (shape - 1.0) * t.ln() - t / b - shape * b.ln() - statrs::function::gamma::ln_gamma(shape);
    let value = log_density.exp();
    if !value.is_finite() {
        return Err(KdeError::NumericOverflow(format!(
            "gamma kernel at x = {x}, b = {b}, t = {t}"
        )));
    }
    T::from_f64(value)
        .filter(|v| v.is_finite())
        .ok_or_else(|| KdeError::NumericOverflow(format!("gamma kernel value {value}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{central_diff, simpson, simpson_pieces};

    const BREAKS: [f64; 3] = [-1.0, 0.0, 1.0];

    fn integrate_kernel<F: Fn(f64) -> f64>(k: Kernel, f: F) -> f64 {
        match k {
            Kernel::Gaussian => simpson(f, -12.0, 12.0, 20_000),
            _ => simpson_pieces(f, &BREAKS, 4000),
        }
    }

    #[test]
    fn table_values() {
        assert!((Kernel::Gaussian.evaluate(0.0_f64) - 0.398_942_280_401_432_7).abs() < 1e-15);
        assert_eq!(Kernel::Epanechnikov.evaluate(0.0_f64), 0.75);
        assert_eq!(Kernel::Uniform.evaluate(2.0_f64), 0.0);
        assert_eq!(Kernel::Uniform.evaluate(1.0_f64), 0.0);
        assert_eq!(Kernel::Epanechnikov.evaluate(1.0_f64), 0.0);
        assert_eq!(Kernel::Biweight.evaluate(0.0_f64), 15.0 / 16.0);
        assert_eq!(Kernel::Triweight.evaluate(0.0_f64), 35.0 / 32.0);
    }

    #[test]
    fn unit_mass_and_symmetry() {
        for k in Kernel::ALL {
            let mass = integrate_kernel(k, |u| k.evaluate(u));
            assert!((mass - 1.0).abs() < 1e-9, "{k}: {mass}");
            for i in 0..50 {
                let u = -1.7 + 0.07 * i as f64;
                assert_eq!(k.evaluate(u), k.evaluate(-u));
                assert!(k.evaluate(u) >= 0.0);
                assert!(k.evaluate(u.abs()) <= k.evaluate(0.0));
            }
        }
    }

    #[test]
    fn moments_match_quadrature() {
        for k in Kernel::ALL {
            let m: KernelMoments<f64> = k.moments();
            let mu2 = integrate_kernel(k, |u| u * u * k.evaluate(u));
            let mu4 = integrate_kernel(k, |u| u.powi(4) * k.evaluate(u));
            let r = integrate_kernel(k, |u| k.evaluate(u).powi(2));
            assert!((m.mu2 - mu2).abs() < 1e-9, "{k} mu2 {} vs {mu2}", m.mu2);
            assert!((m.mu4 - mu4).abs() < 1e-9, "{k} mu4 {} vs {mu4}", m.mu4);
            assert!((m.roughness - r).abs() < 1e-9, "{k} R {} vs {r}", m.roughness);
            assert!(m.mu2 > 0.0 && m.roughness > 0.0);
        }
    }

    #[test]
    fn d2_roughness_by_quadrature() {
        // K'' from finite differences of the analytic first derivative.
        for k in [Kernel::Gaussian, Kernel::Epanechnikov, Kernel::Biweight, Kernel::Triweight] {
            let d2 = |u: f64| match k {
                Kernel::Gaussian => k.derivative(u, 2).unwrap(),
                _ => central_diff(|v| k.derivative(v, 1).unwrap(), u, 1e-6),
            };
            let quad = match k {
                Kernel::Gaussian => simpson(|u| d2(u).powi(2), -12.0, 12.0, 20_000),
                // stay inside the open support so the difference stencil never straddles an edge
                _ => simpson(|u| d2(u).powi(2), -1.0 + 1e-5, 1.0 - 1e-5, 4000),
            };
            let exact = k.moments::<f64>().d2_roughness().unwrap();
            assert!((quad - exact).abs() < 1e-4 * exact, "{k}: {quad} vs {exact}");
        }
        let err = Kernel::Uniform.moments::<f64>().d2_roughness().unwrap_err();
        assert_eq!(err.kind(), "unsupported-operation");
    }

    #[test]
    fn epanechnikov_moment_examples() {
        let m: KernelMoments<f64> = Kernel::Epanechnikov.moments();
        assert!((m.mu2 - 0.2).abs() < 1e-15);
        assert!((m.roughness - 0.6).abs() < 1e-15);
        assert!((m.efficiency_factor() - 81.0 / 15625.0).abs() < 1e-15);
        let g: KernelMoments<f64> = Kernel::Gaussian.moments();
        assert!((g.roughness - 1.0 / (2.0 * std::f64::consts::PI.sqrt())).abs() < 1e-15);
        let u: KernelMoments<f64> = Kernel::Uniform.moments();
        assert!((u.mu2 - 1.0 / 3.0).abs() < 1e-15 && (u.roughness - 0.5).abs() < 1e-15);
    }

    #[test]
    fn gaussian_derivative_examples() {
        let phi1 = 0.241_970_724_519_143_37;
        assert_eq!(Kernel::Gaussian.derivative(0.0_f64, 1).unwrap(), 0.0);
        assert!((Kernel::Gaussian.derivative(1.0_f64, 1).unwrap() + phi1).abs() < 1e-15);
        let fd = central_diff(|u| Kernel::Gaussian.evaluate(u), 1.0, 1e-5);
        assert!((fd + phi1).abs() < 1e-9);
        let second = Kernel::Gaussian.derivative(0.0_f64, 2).unwrap();
        assert!((second + 1.0 / (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-15);
        let fd2 = central_diff(|u| Kernel::Gaussian.derivative(u, 1).unwrap(), 0.0, 1e-5);
        assert!((fd2 - second).abs() < 1e-9);
    }

    #[test]
    fn non_gaussian_high_order_rejected() {
        for k in [Kernel::Uniform, Kernel::Epanechnikov, Kernel::Biweight, Kernel::Triweight] {
            assert!(k.derivative(0.3_f64, 1).is_ok());
            assert_eq!(k.derivative(0.3_f64, 2).unwrap_err().kind(), "unsupported-operation");
        }
    }

    #[test]
    fn gaussian_derivative_roughness_closed_form() {
        for p in 0..5 {
            let quad = simpson(|u| gaussian_derivative(u, p).powi(2), -14.0, 14.0, 40_000);
            let exact: f64 = gaussian_derivative_roughness(p);
            assert!((quad - exact).abs() < 1e-10, "p={p}: {quad} vs {exact}");
        }
    }

    #[test]
    fn antiderivative_examples() {
        assert_eq!(Kernel::Uniform.antiderivative(0.0_f64), 0.5);
        assert_eq!(Kernel::Epanechnikov.antiderivative(1.0_f64), 1.0);
        let quad = simpson(|u| Kernel::Epanechnikov.evaluate(u), -1.0, 0.5, 2000);
        assert!((quad - 0.84375).abs() < 1e-12);
        assert!((Kernel::Epanechnikov.antiderivative(0.5_f64) - 0.84375).abs() < 1e-15);
    }

    #[test]
    fn antiderivative_matches_quadrature() {
        for k in Kernel::ALL {
            let lo = if k == Kernel::Gaussian { -12.0 } else { -1.0 };
            let mut prev = 0.0;
            for i in 0..=40 {
                let u = -2.0 + 0.1 * i as f64;
                let a = k.antiderivative(u);
                assert!(a >= prev - 1e-15, "{k} not monotone at {u}");
                prev = a;
                let quad = if u <= lo {
                    0.0
                } else {
                    let mut breaks = vec![lo];
                    if k != Kernel::Gaussian && u > 0.0 {
                        breaks.push(0.0);
                    }
                    breaks.push(if k == Kernel::Gaussian { u } else { u.min(1.0) });
                    simpson_pieces(|t| k.evaluate(t), &breaks, 6000)
                };
                assert!((a - quad).abs() < 1e-9, "{k} at {u}: {a} vs {quad}");
            }
        }
    }

    #[test]
    fn self_convolution_matches_quadrature() {
        for k in Kernel::ALL {
            for i in 0..=25 {
                let d = -2.5 + 0.2 * i as f64;
                let conv = k.self_convolution(d);
                let quad = match k {
                    Kernel::Gaussian => {
                        simpson(|t| k.evaluate(t) * k.evaluate(d - t), -14.0, 14.0, 20_000)
                    }
                    _ => {
                        let mut breaks = vec![-1.0, d - 1.0, 0.0, d, 1.0, d + 1.0];
                        breaks.sort_by(f64::total_cmp);
                        simpson_pieces(|t| k.evaluate(t) * k.evaluate(d - t), &breaks, 2000)
                    }
                };
                assert!((conv - quad).abs() < 1e-9, "{k} at d={d}: {conv} vs {quad}");
            }
            let r: f64 = k.moments().roughness;
            assert!((k.self_convolution(0.0) - r).abs() < 1e-12);
        }
    }

    #[test]
    fn icv_kernel_examples() {
        let plain = IcvKernel::new(0.0f64, 1.0).unwrap();
        assert!((plain.evaluate(0.0) - 0.398_942_280_401_432_7).abs() < 1e-15);
        let k = IcvKernel::new(1.0f64, 2.0).unwrap();
        assert!((k.evaluate(0.0) - 1.5 * 0.398_942_280_401_432_7).abs() < 1e-15);
        assert!(IcvKernel::new(-1.0, 1.0).is_err());
        assert!(IcvKernel::new(1.0, 0.0).is_err());
    }

    #[test]
    fn icv_kernel_moments_match_quadrature() {
        for &(a, s) in &[(0.0, 1.0), (1.0, 2.0), (4.0, 6.0), (2.42, 5.06)] {
            let k = IcvKernel::new(a, s).unwrap();
            let lim = 14.0 * s;
            let mass = simpson(|u| k.evaluate(u), -lim, lim, 60_000);
            let mu2 = simpson(|u| u * u * k.evaluate(u), -lim, lim, 60_000);
            let r = simpson(|u| k.evaluate(u).powi(2), -lim, lim, 60_000);
            assert!((mass - 1.0).abs() < 1e-9);
            assert!((mu2 - k.mu2()).abs() < 1e-8 * (1.0 + k.mu2().abs()));
            assert!((r - k.roughness()).abs() < 1e-9);
            let conv = ConvolutionKernel::self_convolution(&k, 0.7);
            let quad = simpson(|t| k.evaluate(t) * k.evaluate(0.7 - t), -lim, lim, 60_000);
            assert!((conv - quad).abs() < 1e-9);
        }
    }

    #[test]
    fn icv_ratio_degenerate_when_second_moment_vanishes() {
        // 1 + α − ασ² = 0 at σ² = (1+α)/α
        let k = IcvKernel::new(1.0, 2f64.sqrt()).unwrap();
        assert_eq!(k.bandwidth_ratio().unwrap_err().kind(), "invalid-icv-params");
        let plain = IcvKernel::new(0.0f64, 3.0).unwrap();
        assert!((plain.bandwidth_ratio().unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn gamma_kernel_moments() {
        for &(x, b) in &[(0.0, 1.0), (0.5, 0.2), (3.0, 0.1), (10.0, 0.5)] {
            let f = |t: f64| if t <= 0.0 { 0.0 } else { gamma_kernel(x, b, t).unwrap() };
            let hi = x + b + 40.0 * (x * b + b * b).sqrt() + 40.0 * b;
            let mass = simpson(f, 1e-300, hi, 200_000);
            let mean = simpson(|t| t * f(t), 1e-300, hi, 200_000);
            let var = simpson(|t| (t - x - b).powi(2) * f(t), 1e-300, hi, 200_000);
            assert!((mass - 1.0).abs() < 1e-7, "mass {mass} at x={x}, b={b}");
            assert!((mean - (x + b)).abs() < 1e-6);
            assert!((var - (x * b + b * b)).abs() < 1e-6);
        }
    }

    #[test]
    fn gamma_kernel_errors_and_large_shape() {
        assert!((gamma_kernel(0.0, 1.0, 1.0).unwrap() - (-1.0f64).exp()).abs() < 1e-15);
        assert!(gamma_kernel(-1.0, 1.0, 1.0).is_err());
        assert!(gamma_kernel(1.0, 0.0, 1.0).is_err());
        assert!(gamma_kernel(1.0, 1.0, 0.0).is_err());
        // shape 1e5 would overflow Γ directly
        let v: f64 = gamma_kernel(1e4, 0.1, 1e4).unwrap();
        assert!(v.is_finite() && v > 0.0);
    }

    #[test]
    fn f32_kernels() {
        let v: f32 = Kernel::Biweight.evaluate(0.5);
        assert!((v - 15.0 / 16.0 * 0.5625).abs() < 1e-6);
        let m: KernelMoments<f32> = Kernel::Triweight.moments();
        assert!((m.mu2 - 1.0 / 9.0).abs() < 1e-7);
    }
}
