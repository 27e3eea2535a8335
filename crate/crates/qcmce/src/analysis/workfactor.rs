//! Attack work-factor estimation.
//!
//! Both relevant attacks reduce to finding a low-weight word with generic
//! information-set decoding: the dual-code attack searches for the sparse
//! rows of the public parity-check matrix among the dual codewords, and the
//! decoding attack searches for the intentional error vector. Costs follow a
//! Stern-style collision-ISD model: expected iterations are the inverse of a
//! hypergeometric success probability, each iteration pays for Gaussian
//! elimination plus the collision search, and the quasi-cyclic structure
//! feeds in as extra usable targets (shifted rows / shifted ciphertexts).

use super::lnfact::LnFact;
use crate::error::{Error, Result};

const LOG2_E: f64 = std::f64::consts::LOG2_E;

/// Internal Stern parameters at the optimum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IsdParams {
    /// Collision weight per information-set half.
    pub collision_weight: usize,
    /// Window length of positions forced error-free outside the set.
    pub window: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Attack {
    /// Low-weight rows of the public dual matrix.
    Dca,
    /// Intentional error vector of a ciphertext.
    Isda,
}

impl std::fmt::Display for Attack {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Attack::Dca => write!(f, "dca"),
            Attack::Isda => write!(f, "isda"),
        }
    }
}

/// Work-factor estimate for one attack instance.
#[derive(Debug, Clone)]
pub struct WorkFactorReport {
    pub attack: Attack,
    /// Calibrated log2 bit-operation count (the security level).
    pub log2_wf: f64,
    /// Optimizing internal ISD parameters.
    pub isd_params: IsdParams,
    /// log2 of the quasi-cyclic target-count speedup applied.
    pub speedup_log2: f64,
    /// Calibration adjustment included in `log2_wf`.
    pub calibration_log2: f64,
}

/// Probability that a random information-set split isolates the target word
/// as `p2` errors in each half of the set, none in the window, and the rest
/// outside: `C(k1,p2) C(k2,p2) C(n-k-l, w-2p2) / C(n, w)`.
pub fn split_probability(n: usize, k: usize, w: usize, p2: usize, l: usize) -> f64 {
    log2_split_probability(&LnFact::new(n), n, k, w, p2, l).exp2()
}

fn log2_split_probability(lf: &LnFact, n: usize, k: usize, w: usize, p2: usize, l: usize) -> f64 {
    let k1 = k / 2;
    let k2 = k - k1;
    if 2 * p2 > w || n < k + l || w - 2 * p2 > n - k - l {
        return f64::NEG_INFINITY;
    }
    lf.log2_binomial(k1, p2) + lf.log2_binomial(k2, p2) + lf.log2_binomial(n - k - l, w - 2 * p2)
        - lf.log2_binomial(n, w)
}

/// log2 of the per-iteration cost in bit operations: Gaussian elimination
/// (amortized by reusing the previous iteration's pivots and swapping a few
/// columns), sorted-list construction over both halves, expected collision
/// checks.
fn log2_iteration_cost(n: usize, k: usize, p2: usize, l: usize, lf: &LnFact) -> f64 {
    let nf = n as f64;
    let kf = k as f64;
    let r = nf - kf;
    let gauss = r * r;
    let log2_list = lf.log2_binomial(k / 2, p2);
    let list_build = (2.0 * (p2.max(1) * l.max(1)) as f64).log2() + log2_list;
    let collisions =
        2.0 * log2_list - l as f64 + (2.0 * p2.max(1) as f64 * (r - l as f64).max(1.0)).log2();
    log2_sum(gauss.log2(), log2_sum(list_build, collisions))
}

/// log2(2^a + 2^b) without leaving log space.
fn log2_sum(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        return hi;
    }
    hi + (1.0 + (lo - hi).exp2()).ln() * LOG2_E
}

/// Minimum Stern-model cost (log2 bit operations) of finding one weight-`w`
/// word in an `[n, k]` code, given `multiplicity` interchangeable target
/// words and `instances` shifted problem instances; either count scales the
/// per-iteration success probability (capped at certainty).
///
/// Returns `(log2 cost, optimizing parameters, applied speedup log2)`.
pub fn isd_cost(
    n: usize,
    k: usize,
    w: usize,
    multiplicity: usize,
    instances: usize,
) -> Result<(f64, IsdParams, f64)> {
    if k == 0 || k >= n {
        return Err(Error::DomainError(format!("bad code dimensions [{n}, {k}]")));
    }
    if w >= n - k {
        return Err(Error::DomainError(format!(
            "weight {w} not below the redundancy {}",
            n - k
        )));
    }
    let lf = LnFact::new(n);
    let speedup_log2 = ((multiplicity * instances).max(1) as f64).log2();
    if w == 0 {
        let cost = log2_iteration_cost(n, k, 0, 0, &lf);
        return Ok((
            cost,
            IsdParams {
                collision_weight: 0,
                window: 0,
            },
            speedup_log2,
        ));
    }

    let mut best: Option<(f64, IsdParams)> = None;
    let p2_max = (w / 2).min(k / 2).min(12);
    for p2 in 0..=p2_max {
        let l_max = (n - k).saturating_sub(w - 2 * p2).min(120);
        for l in 0..=l_max {
            let log2_p = log2_split_probability(&lf, n, k, w, p2, l);
            if log2_p == f64::NEG_INFINITY {
                continue;
            }
            // expected iterations, at least one
            let log2_iters = (-(log2_p + speedup_log2)).max(0.0);
            let total = log2_iters + log2_iteration_cost(n, k, p2, l, &lf);
            if best.map_or(true, |(b, _)| total < b) {
                best = Some((
                    total,
                    IsdParams {
                        collision_weight: p2,
                        window: l,
                    },
                ));
            }
        }
    }
    let (log2_wf, params) = best.ok_or_else(|| {
        Error::DomainError(format!("no feasible ISD split for [{n}, {k}], w = {w}"))
    })?;
    Ok((log2_wf, params, speedup_log2))
}

// The raw Stern model fixes per-iteration cost conventions only up to
// constants, and the quasi-cyclic speedup exponent is a convention choice;
// both are absorbed by one affine map per attack, pinned so the dual-code
// estimate reads 100 bits at d_v' = 59 and 160 bits at d_v' = 97, and the
// error-search estimate reads 100 bits at t' = 47 and 160 bits at t' = 79
// (n0 = 4, p = 4096 reference geometry). The first pair entry is the raw
// model output at the pinned point, the second the pinned security level;
// the implied slope corrections are about 3.5% and 2.9%.
const DCA_CAL: [(f64, f64); 2] = [(97.171642844379, 100.0), (159.327349762414, 160.0)];
const ISDA_CAL: [(f64, f64); 2] = [(91.786884013975, 100.0), (153.602148973514, 160.0)];

fn calibrate(raw: f64, anchors: &[(f64, f64); 2]) -> f64 {
    let slope = (anchors[1].1 - anchors[0].1) / (anchors[1].0 - anchors[0].0);
    anchors[0].1 + (raw - anchors[0].0) * slope
}

/// Dual-code attack work factor: search for one of the `p` shifted rows of
/// the public dual matrix (row weight `n0 * dv_prime`) in the `[n0*p, p]`
/// dual code.
pub fn dca_wf(n0: usize, p: usize, dv_prime: usize) -> Result<WorkFactorReport> {
    let n = n0 * p;
    let w = n0 * dv_prime;
    let (raw, isd_params, speedup_log2) = isd_cost(n, p, w, p, 1)?;
    let log2_wf = calibrate(raw, &DCA_CAL);
    Ok(WorkFactorReport {
        attack: Attack::Dca,
        log2_wf,
        isd_params,
        speedup_log2,
        calibration_log2: log2_wf - raw,
    })
}

/// Decoding attack work factor: recover the weight-`t_prime` error vector of
/// one among `p` block-shifted ciphertexts of the `[n0*p, (n0-1)*p]` public
/// code.
pub fn isda_wf(n0: usize, p: usize, t_prime: usize) -> Result<WorkFactorReport> {
    let n = n0 * p;
    let k = (n0 - 1) * p;
    let (raw, isd_params, speedup_log2) = isd_cost(n, k, t_prime, 1, p)?;
    let log2_wf = calibrate(raw, &ISDA_CAL);
    Ok(WorkFactorReport {
        attack: Attack::Isda,
        log2_wf,
        isd_params,
        speedup_log2,
        calibration_log2: log2_wf - raw,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_weight_costs_one_elimination() {
        let (wf, params, _) = isd_cost(64, 32, 0, 1, 1).unwrap();
        let lf = LnFact::new(64);
        assert!((wf - log2_iteration_cost(64, 32, 0, 0, &lf)).abs() < 1e-9);
        assert_eq!(params.collision_weight, 0);
    }

    #[test]
    fn weight_domain_enforced() {
        assert!(isd_cost(64, 32, 32, 1, 1).is_err());
        assert!(isd_cost(64, 0, 3, 1, 1).is_err());
    }

    #[test]
    fn multiplicity_discount_is_bounded() {
        let (base, _, _) = isd_cost(256, 128, 20, 1, 1).unwrap();
        let (twice, _, _) = isd_cost(256, 128, 20, 2, 1).unwrap();
        let drop = base - twice;
        assert!(drop >= 0.0, "doubling targets cannot raise the cost");
        assert!(drop <= 1.0 + 1e-9, "one extra target is worth at most one bit");
    }

    #[test]
    fn cost_is_monotone_in_weight() {
        let mut last = 0.0;
        for w in [4usize, 8, 12, 16, 24, 32] {
            let (wf, _, _) = isd_cost(512, 256, w, 1, 1).unwrap();
            assert!(wf > last, "w={w}: {wf} <= {last}");
            last = wf;
        }
    }

    #[test]
    fn log2_sum_is_accurate() {
        assert!((log2_sum(3.0, 3.0) - 4.0).abs() < 1e-12);
        assert!((log2_sum(10.0, f64::NEG_INFINITY) - 10.0).abs() < 1e-12);
        let got = log2_sum(8.0, 2.0);
        let expect = (256.0f64 + 4.0).log2();
        assert!((got - expect).abs() < 1e-12);
    }
}
