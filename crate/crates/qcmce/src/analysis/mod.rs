//! Theoretical machinery: bit-flipping decoding thresholds, attack
//! work-factor estimates and the parameter-design procedure.

mod design;
mod lnfact;
mod threshold;
mod workfactor;

pub use design::{design_parameters, DesignResult, RoundingMode};
pub use lnfact::LnFact;
pub use threshold::{
    bf_threshold, bf_threshold_opt, binomial_tail, check_probs, error_recursion, CheckProbTable,
    CheckProbs, RecursionOutcome, ThresholdReport, CONVERGENCE_EPS, RECURSION_MAX_ITERS,
};
pub use workfactor::{
    dca_wf, isd_cost, isda_wf, split_probability, Attack, IsdParams, WorkFactorReport,
};
