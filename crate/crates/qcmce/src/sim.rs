//! Monte-Carlo decoding experiments.
//!
//! Trials run over the all-zero codeword with fresh weight-`t` error
//! patterns (the code is linear and both decoders are symmetric, so this
//! loses no generality). Each trial derives its own stream from the base
//! seed and the trial index, so results are byte-identical regardless of
//! how rayon schedules them.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;

use crate::bits::BitVec;
use crate::construction::sample_distinct;
use crate::decoder::{bf_decode, spa_decode, BfConfig, TannerGraph};
use crate::error::Result;
use crate::qc::QcMatrix;

/// Decoder selection for experiments.
#[derive(Debug, Clone)]
pub enum SimDecoder {
    Bf { b_per_block: Vec<usize>, max_iters: usize },
    /// Crossover is taken as `t / n` per point.
    Spa { max_iters: usize },
}

/// Aggregated counts for one (code, decoder, error-weight) point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialStats {
    pub frames: u64,
    pub frame_errors: u64,
    pub bit_errors: u64,
}

impl TrialStats {
    pub fn frame_error_rate(&self) -> f64 {
        self.frame_errors as f64 / self.frames as f64
    }
}

/// Decode `trials` random weight-`t` error patterns and count failures.
///
/// A frame error is any outcome other than exact recovery of the
/// transmitted word; bit errors count the residual wrong positions.
pub fn run_trials(
    h: &QcMatrix,
    t: usize,
    trials: u64,
    decoder: &SimDecoder,
    seed: u64,
) -> Result<TrialStats> {
    let graph = TannerGraph::new(h);
    let n = graph.n();
    let cfg = match decoder {
        SimDecoder::Bf {
            b_per_block,
            max_iters,
        } => Some(BfConfig {
            b_per_block: b_per_block.clone(),
            max_iters: *max_iters,
        }),
        SimDecoder::Spa { .. } => None,
    };

    let counts = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = ChaCha12Rng::seed_from_u64(seed ^ (0x9e37_79b9_7f4a_7c15u64.wrapping_mul(trial + 1)));
            let rx = BitVec::from_indices(n, &sample_distinct(n, t, &mut rng));
            let outcome = match decoder {
                SimDecoder::Bf { .. } => bf_decode(&graph, &rx, cfg.as_ref().unwrap()),
                SimDecoder::Spa { max_iters } => {
                    let crossover = (t as f64 / n as f64).clamp(1e-9, 0.5 - 1e-9);
                    spa_decode(&graph, &rx, crossover, *max_iters)
                }
            }
            .expect("dimensions fixed by construction");
            let residual = outcome.word.weight() as u64;
            ((residual > 0) as u64, residual)
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));

    Ok(TrialStats {
        frames: trials,
        frame_errors: counts.0,
        bit_errors: counts.1,
    })
}

/// Measured correction capability: the largest error weight for which all
/// `trials` seeded decodings succeed. Sweeps upward and stops at the first
/// weight with a failure.
pub fn measure_bf_capability(
    h: &QcMatrix,
    b_per_block: &[usize],
    max_iters: usize,
    trials: u64,
    seed: u64,
) -> Result<usize> {
    let decoder = SimDecoder::Bf {
        b_per_block: b_per_block.to_vec(),
        max_iters,
    };
    let mut cap = 0;
    for t in 1..=h.scalar_cols() / 2 {
        let stats = run_trials(h, t, trials, &decoder, seed.wrapping_add(t as u64))?;
        if stats.frame_errors > 0 {
            break;
        }
        cap = t;
    }
    Ok(cap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construction::generate_h;
    use crate::profile::DegreeProfile;
    use rand::rngs::StdRng;
    use rand::SeedableRng as _;

    #[test]
    fn zero_errors_never_fail() {
        let mut rng = StdRng::seed_from_u64(31);
        let profile = DegreeProfile::new(2, 64, vec![4, 5], 0.0).unwrap();
        let h = generate_h(&profile, &mut rng).unwrap();
        let stats = run_trials(
            &h,
            0,
            20,
            &SimDecoder::Bf {
                b_per_block: vec![3, 4],
                max_iters: 30,
            },
            7,
        )
        .unwrap();
        assert_eq!(stats.frame_errors, 0);
        assert_eq!(stats.bit_errors, 0);
    }

    #[test]
    fn reruns_are_deterministic() {
        let mut rng = StdRng::seed_from_u64(32);
        let profile = DegreeProfile::new(2, 64, vec![4, 5], 0.0).unwrap();
        let h = generate_h(&profile, &mut rng).unwrap();
        let dec = SimDecoder::Bf {
            b_per_block: vec![3, 4],
            max_iters: 30,
        };
        let a = run_trials(&h, 6, 200, &dec, 99).unwrap();
        let b = run_trials(&h, 6, 200, &dec, 99).unwrap();
        assert_eq!(a, b);
        let c = run_trials(&h, 6, 200, &dec, 100).unwrap();
        assert!(a != c || a.frame_errors == 0);
    }

    #[test]
    fn capability_is_positive_on_a_sane_code() {
        let mut rng = StdRng::seed_from_u64(33);
        let profile = DegreeProfile::new(2, 128, vec![4, 5], 0.0).unwrap();
        let h = generate_h(&profile, &mut rng).unwrap();
        let cap = measure_bf_capability(&h, &[3, 4], 50, 20, 1).unwrap();
        assert!(cap >= 1, "capability {cap}");
    }
}
