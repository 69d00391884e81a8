use crate::error::{KdeError, Result};
use crate::scalar::{log_space, lit, Scalar};

use super::{ReportFlag, SelectorReport};

const MIN_GRID: usize = 16;
const REL_TOL: f64 = 1e-5;
const MAX_GOLDEN_STEPS: usize = 200;

/// Bracket `[lo, hi]` scanned on a log-spaced grid of `grid_size` candidates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SearchInterval<T> {
    pub lo: T,
    pub hi: T,
    pub grid_size: usize,
}

impl<T: Scalar> SearchInterval<T> {
    pub fn new(lo: T, hi: T, grid_size: usize) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo > T::zero() && hi > lo) {
            return Err(KdeError::InvalidArgument(format!(
                "search interval needs 0 < lo < hi, got [{lo}, {hi}]"
            )));
        }
        if grid_size < MIN_GRID {
            return Err(KdeError::InvalidArgument(format!(
                "search grid needs at least {MIN_GRID} candidates, got {grid_size}"
            )));
        }
        Ok(Self { lo, hi, grid_size })
    }

    /// `[0.05, 3]·h_ref` with 64 candidates.
    pub fn around(h_ref: T) -> Result<Self> {
        Self::new(h_ref * lit(0.05), h_ref * lit(3.0), 64)
    }

    pub fn scaled(&self, c: T) -> Result<Self> {
        Self::new(self.lo * c, self.hi * c, self.grid_size)
    }

    pub fn candidates(&self) -> Vec<T> {
        log_space(self.lo, self.hi, self.grid_size)
    }
}

fn score<T: Scalar>(v: T) -> T {
    if v.is_finite() {
        v
    } else {
        T::infinity()
    }
}

/// Minimises `criterion` over `interval`: a log-grid scan picks the best
/// candidate (so multimodal criteria resolve to the global grid minimum),
/// then golden-section search refines inside the neighbouring grid cells to
/// a relative tolerance of 1e-5. Non-finite criterion values count as +∞.
pub fn minimize_scalar<T, F>(criterion: F, interval: SearchInterval<T>) -> Result<SelectorReport<T>>
where
    T: Scalar,
    F: Fn(T) -> T,
{
    let grid = interval.candidates();
    let mut trace: Vec<(T, T)> = grid.iter().map(|&h| (h, criterion(h))).collect();
    let (best, best_val) = trace
        .iter()
        .enumerate()
        .map(|(i, &(_, v))| (i, score(v)))
        .fold((0, T::infinity()), |acc, (i, v)| if v < acc.1 { (i, v) } else { acc });
    if !best_val.is_finite() {
        return Err(KdeError::CriterionFailure);
    }
    let last = grid.len() - 1;
    if best == 0 || best == last {
        return Ok(SelectorReport {
            h: grid[best],
            criterion_trace: trace,
            iterations: 0,
            converged: false,
            flag: Some(ReportFlag::BoundarySolution),
        });
    }

    let inv_phi: T = lit((5f64.sqrt() - 1.0) / 2.0);
    let tol: T = lit(REL_TOL);
    let (mut a, mut b) = (grid[best - 1], grid[best + 1]);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = score(criterion(c));
    let mut fd = score(criterion(d));
    trace.push((c, fc));
    trace.push((d, fd));
    let mut iterations = 0;
    while (b - a) > tol * (c.abs() + d.abs()) * lit(0.5) && iterations < MAX_GOLDEN_STEPS {
        iterations += 1;
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = score(criterion(c));
            trace.push((c, fc));
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = score(criterion(d));
            trace.push((d, fd));
        }
    }
    let (mut h, val) = if fc < fd { (c, fc) } else { (d, fd) };
    // the grid point itself may still beat the refined interior point on
    // flat or noisy criteria
    if best_val < val {
        h = grid[best];
    }
    Ok(SelectorReport {
        h,
        criterion_trace: trace,
        iterations,
        converged: iterations < MAX_GOLDEN_STEPS,
        flag: (iterations >= MAX_GOLDEN_STEPS).then_some(ReportFlag::IterationLimit),
    })
}
