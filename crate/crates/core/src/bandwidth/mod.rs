//! Bandwidth selectors.
//!
//! Every selector returns a [`SelectorReport`]: the chosen bandwidth plus the
//! criterion values it looked at. A report with `converged == false` always
//! carries a [`ReportFlag`] explaining why.

pub mod bootstrap;
pub mod chan;
pub mod cv;
pub mod plugin;
pub mod reference;
mod search;

pub use bootstrap::bootstrap_ziegler;
pub use chan::{chan_local, chan_statistic, ChanParams};
pub use cv::{
    bcv_score, likelihood_cv_score, lscv_score, sarda_cv_kdfe, select_bcv, select_icv,
    select_likelihood_cv, select_lscv, select_sarda,
};
pub use plugin::{hsjm, hsjm_from_roughness, hsjm_with_pilot, plugin_iterative, roughness_hall_marron};
pub use reference::{amise, h_mise_oracle, robust_rule, rule_of_thumb};
pub use search::{minimize_scalar, SearchInterval};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFlag {
    /// The best candidate sits on the edge of the search interval.
    BoundarySolution,
    /// The iteration limit was hit before the convergence tolerance.
    IterationLimit,
    /// A roughness estimate came out non-positive and was replaced.
    NonPositiveRoughness,
    /// No candidate satisfied the admissibility rule.
    EmptyAdmissibleSet,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SelectorReport<T> {
    pub h: T,
    /// (candidate bandwidth, criterion value) in evaluation order.
    pub criterion_trace: Vec<(T, T)>,
    pub iterations: usize,
    pub converged: bool,
    pub flag: Option<ReportFlag>,
}

impl<T> SelectorReport<T> {
    /// A closed-form rule: no search, no trace.
    pub(crate) fn closed_form(h: T) -> Self {
        Self {
            h,
            criterion_trace: Vec::new(),
            iterations: 0,
            converged: true,
            flag: None,
        }
    }
}
