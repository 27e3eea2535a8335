//! Bit-flipping decoding threshold computation.
//!
//! For a code with `t` residual errors, one decoder iteration corrects an
//! error bit with a binomial-tail probability driven by the chance that an
//! extrinsic check message is correct, and miscorrects a clean bit with the
//! complementary tail. Tracking the expected error count `q_l` iteration by
//! iteration yields a recursion whose convergence to zero defines the
//! waterfall threshold: the largest initial `t` that still converges.
//!
//! The check-message probabilities are hypergeometric parity sums over the
//! placements of the other errors. They are exact at integer error counts;
//! the recursion produces real-valued counts, which are handled by linear
//! interpolation between the two adjacent integer evaluations.

use rayon::prelude::*;

use super::lnfact::LnFact;
use crate::error::{Error, Result};
use crate::profile::DegreeProfile;

/// Residual error level treated as fully corrected.
pub const CONVERGENCE_EPS: f64 = 1e-2;
/// Relative change under which a non-decreasing sequence counts as stuck.
const STAGNATION_REL: f64 = 1e-6;
/// Iteration cap for the error-count recursion.
pub const RECURSION_MAX_ITERS: usize = 10_000;

/// The four check-to-variable message probabilities at error count `q`:
/// conditioned on the reference bit being correct (`cc`, `ci`) or in error
/// (`ic`, `ii`), the message agrees (`*c`) or disagrees (`*i`) with the
/// bit's true value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckProbs {
    pub p_cc: f64,
    pub p_ci: f64,
    pub p_ic: f64,
    pub p_ii: f64,
}

/// Precomputed parity probabilities for one `(n, d_c)` pair.
///
/// `even[q]` is the probability that a fixed set of `d_c - 1` positions
/// holds an even number of errors when `q` errors are placed uniformly among
/// `n - 1` positions. All four entries of [`CheckProbs`] reduce to this
/// table: conditioning on an erroneous reference bit just shifts the
/// remaining error count down by one.
pub struct CheckProbTable {
    n: usize,
    dc: usize,
    even: Vec<f64>,
}

impl CheckProbTable {
    pub fn new(n: usize, dc: usize) -> Result<Self> {
        if dc < 1 || dc > n {
            return Err(Error::DomainError(format!(
                "check degree {dc} outside [1, {n}]"
            )));
        }
        let lf = LnFact::new(n);
        let even = (0..n)
            .map(|q| even_parity_prob(&lf, n, dc, q))
            .collect();
        Ok(CheckProbTable { n, dc, even })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dc(&self) -> usize {
        self.dc
    }

    /// Linear interpolation of the even-parity probability at a real error
    /// count, clamped into `[0, n-1]`.
    fn even_at(&self, q: f64) -> f64 {
        let q = q.clamp(0.0, (self.n - 1) as f64);
        let lo = q.floor() as usize;
        if lo as f64 == q || lo + 1 >= self.even.len() {
            return self.even[lo.min(self.even.len() - 1)];
        }
        let frac = q - lo as f64;
        self.even[lo] * (1.0 - frac) + self.even[lo + 1] * frac
    }

    /// Check-message probabilities at (real) error count `q`.
    pub fn probs(&self, q: f64) -> CheckProbs {
        let e_cur = self.even_at(q);
        let e_prev = self.even_at(q - 1.0); // clamp at 0 gives p_ic = 1 for q <= 1
        CheckProbs {
            p_cc: e_cur,
            p_ci: 1.0 - e_cur,
            p_ic: e_prev,
            p_ii: 1.0 - e_prev,
        }
    }
}

/// Probability of an even error count in a fixed `dc - 1`-subset when `q`
/// errors sit uniformly among `n - 1` positions.
fn even_parity_prob(lf: &LnFact, n: usize, dc: usize, q: usize) -> f64 {
    debug_assert!(q <= n - 1);
    let inside = dc - 1;
    let outside = n - dc;
    let denom = lf.ln_binomial(n - 1, q);
    let j_min = q.saturating_sub(outside);
    let j_max = inside.min(q);
    let mut sum = 0.0;
    let mut j = j_min + (j_min % 2); // first even j
    while j <= j_max {
        sum += (lf.ln_binomial(inside, j) + lf.ln_binomial(outside, q - j) - denom).exp();
        j += 2;
    }
    sum
}

/// The four message probabilities for a single real error count.
///
/// For repeated evaluation at one `(n, d_c)` build a [`CheckProbTable`].
pub fn check_probs(q: f64, dc: usize, n: usize) -> Result<CheckProbs> {
    if !(0.0..=(n - 1) as f64).contains(&q) {
        return Err(Error::DomainError(format!(
            "error count {q} outside [0, {}]",
            n - 1
        )));
    }
    let table = CheckProbTable::new(n, dc)?;
    Ok(table.probs(q))
}

/// Upper binomial tail: `sum_{z=from}^{trials} C(trials, z) p^z q^(trials-z)`.
///
/// `p` and `q` are passed separately to mirror the two probability pairs
/// they come from; callers keep `p + q = 1`.
pub fn binomial_tail(trials: usize, from: usize, p: f64, q: f64) -> f64 {
    let mut sum = 0.0;
    for z in from..=trials {
        let mut term = small_binomial(trials, z);
        term *= p.powi(z as i32) * q.powi((trials - z) as i32);
        sum += term;
    }
    sum
}

fn small_binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    let mut c = 1.0f64;
    for i in 0..k {
        c = c * (n - i) as f64 / (i + 1) as f64;
    }
    c
}

/// Outcome of the error-count recursion.
#[derive(Debug, Clone)]
pub struct RecursionOutcome {
    pub converged: bool,
    pub iterations: usize,
    pub trajectory: Option<Vec<f64>>,
}

/// Iterate the expected-error recursion from `q_0 = t` (worst case) until it
/// drops under [`CONVERGENCE_EPS`], stagnates without decreasing, or runs out
/// of iterations.
pub fn error_recursion(
    t: usize,
    n: usize,
    profile: &DegreeProfile,
    b: &[usize],
    max_iters: usize,
) -> Result<RecursionOutcome> {
    if t > n {
        return Err(Error::DomainError(format!("t = {t} exceeds n = {n}")));
    }
    let table = CheckProbTable::new(n, profile.dc())?;
    Ok(recursion_with_table(
        t, &table, profile, b, max_iters, true,
    ))
}

pub(crate) fn recursion_with_table(
    t: usize,
    table: &CheckProbTable,
    profile: &DegreeProfile,
    b: &[usize],
    max_iters: usize,
    want_trajectory: bool,
) -> RecursionOutcome {
    let n = table.n();
    let tf = t as f64;
    let mut q = tf;
    let mut trajectory = if want_trajectory {
        Some(vec![q])
    } else {
        None
    };
    if t == 0 {
        return RecursionOutcome {
            converged: true,
            iterations: 0,
            trajectory,
        };
    }
    for l in 1..=max_iters {
        let probs = table.probs(q.clamp(0.0, (n - 1) as f64));
        let mut shrink = 0.0;
        for (j, &dv) in profile.dv_per_block().iter().enumerate() {
            let lam = profile.edge_fraction(j);
            let f = binomial_tail(dv - 1, b[j], probs.p_ic, probs.p_ii);
            let g = binomial_tail(dv - 1, b[j], probs.p_ci, probs.p_cc);
            shrink += lam * (tf * f - (n as f64 - tf) * g);
        }
        let q_next = tf - shrink;
        if let Some(traj) = trajectory.as_mut() {
            traj.push(q_next);
        }
        if q_next < CONVERGENCE_EPS {
            return RecursionOutcome {
                converged: true,
                iterations: l,
                trajectory,
            };
        }
        if q_next >= q && (q_next - q).abs() < STAGNATION_REL * q.max(1.0) {
            return RecursionOutcome {
                converged: false,
                iterations: l,
                trajectory,
            };
        }
        q = q_next;
    }
    RecursionOutcome {
        converged: false,
        iterations: max_iters,
        trajectory,
    }
}

/// Largest `t` whose recursion converges for a fixed set of decision
/// thresholds: exponential bracket, binary refinement, then an exact
/// boundary fix-up so that `t_th` converges and `t_th + 1` does not.
pub fn bf_threshold(n: usize, profile: &DegreeProfile, b: &[usize]) -> Result<usize> {
    let table = CheckProbTable::new(n, profile.dc())?;
    Ok(threshold_with_table(&table, profile, b))
}

pub(crate) fn threshold_with_table(
    table: &CheckProbTable,
    profile: &DegreeProfile,
    b: &[usize],
) -> usize {
    let n = table.n();
    let conv =
        |t: usize| recursion_with_table(t, table, profile, b, RECURSION_MAX_ITERS, false).converged;
    if !conv(1) {
        return 0;
    }
    let mut lo = 1usize;
    let mut hi = 2usize;
    while hi <= n && conv(hi) {
        lo = hi;
        hi *= 2;
    }
    let mut hi = hi.min(n + 1);
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if conv(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // Convergence is not guaranteed monotone in t; pin the exact boundary.
    while lo + 1 <= n && conv(lo + 1) {
        lo += 1;
    }
    lo
}

/// Optimized thresholds and the resulting waterfall threshold.
#[derive(Debug, Clone)]
pub struct ThresholdReport {
    pub n: usize,
    pub n0: usize,
    pub dv_per_block: Vec<usize>,
    /// Optimizing decision threshold per block.
    pub best_b: Vec<usize>,
    /// Waterfall threshold: maximum correctable error count predicted.
    pub t_th: usize,
    /// Error-count trajectory of the winning configuration at `t_th`.
    pub trajectory: Option<Vec<f64>>,
}

/// Exhaustive search of the per-block decision thresholds
/// `b^(j)` in `{ceil(d_v^(j)/2), ..., d_v^(j) - 1}`, maximizing the
/// waterfall threshold; ties resolve to the lexicographically smallest `b`.
///
/// Blocks of equal degree are interchangeable, so the grid is deduplicated
/// to non-decreasing `b` runs within equal-degree groups.
pub fn bf_threshold_opt(n: usize, profile: &DegreeProfile) -> Result<ThresholdReport> {
    let table = CheckProbTable::new(n, profile.dc())?;
    let combos = threshold_combinations(profile);
    let best = combos
        .par_iter()
        .map(|b| (threshold_with_table(&table, profile, b), b.clone()))
        .reduce(
            || (0, vec![usize::MAX; profile.n0()]),
            |acc, cur| better_threshold(acc, cur),
        );
    let (t_th, best_b) = best;
    let trajectory = recursion_with_table(
        t_th,
        &table,
        profile,
        &best_b,
        RECURSION_MAX_ITERS,
        true,
    )
    .trajectory;
    Ok(ThresholdReport {
        n,
        n0: profile.n0(),
        dv_per_block: profile.dv_per_block().to_vec(),
        best_b,
        t_th,
        trajectory,
    })
}

fn better_threshold(a: (usize, Vec<usize>), b: (usize, Vec<usize>)) -> (usize, Vec<usize>) {
    match a.0.cmp(&b.0) {
        std::cmp::Ordering::Greater => a,
        std::cmp::Ordering::Less => b,
        std::cmp::Ordering::Equal => {
            if a.1 <= b.1 {
                a
            } else {
                b
            }
        }
    }
}

/// All decision-threshold combinations. The threshold is a function of the
/// node degree, so blocks sharing a degree share one `b`; a regular profile
/// collapses to a single scan.
pub(crate) fn threshold_combinations(profile: &DegreeProfile) -> Vec<Vec<usize>> {
    let n0 = profile.n0();
    let mut degrees: Vec<usize> = profile.dv_per_block().to_vec();
    degrees.sort_unstable();
    degrees.dedup();

    let mut combos = Vec::new();
    let mut choice = vec![0usize; degrees.len()];
    fn rec(
        degrees: &[usize],
        d: usize,
        choice: &mut Vec<usize>,
        profile: &DegreeProfile,
        n0: usize,
        combos: &mut Vec<Vec<usize>>,
    ) {
        if d == degrees.len() {
            let b: Vec<usize> = (0..n0)
                .map(|j| {
                    let pos = degrees.iter().position(|&x| x == profile.dv(j)).unwrap();
                    choice[pos]
                })
                .collect();
            combos.push(b);
            return;
        }
        let dv = degrees[d];
        for b in dv.div_ceil(2)..=dv - 1 {
            choice[d] = b;
            rec(degrees, d + 1, choice, profile, n0, combos);
        }
    }
    rec(&degrees, 0, &mut choice, profile, n0, &mut combos);
    combos
}
