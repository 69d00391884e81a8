//! Quadrature and finite-difference oracles for unit tests. Deliberately
//! independent of the closed forms used by the library.

/// Composite Simpson rule on `[a, b]` with `n` (rounded up to even) panels.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let n = if n % 2 == 1 { n + 1 } else { n };
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let x = a + h * i as f64;
        s += if i % 2 == 1 { 4.0 * f(x) } else { 2.0 * f(x) };
    }
    s * h / 3.0
}

/// Simpson over a list of breakpoints, so kinks and support edges land on
/// panel boundaries.
/// Each piece is integrated over its interior, so a jump at a breakpoint
/// contributes its one-sided limits rather than the value at the jump.
pub fn simpson_pieces<F: Fn(f64) -> f64>(f: F, breaks: &[f64], n: usize) -> f64 {
    breaks
        .windows(2)
        .map(|w| {
            let (a, b) = (w[0], w[1]);
            let nudge = 1e-13 * (1.0 + a.abs().max(b.abs()));
            if b - a <= 2.0 * nudge {
                0.0
            } else {
                simpson(&f, a + nudge, b - nudge, n)
            }
        })
        .sum()
}

pub fn central_diff<F: Fn(f64) -> f64>(f: F, x: f64, eps: f64) -> f64 {
    (f(x + eps) - f(x - eps)) / (2.0 * eps)
}
