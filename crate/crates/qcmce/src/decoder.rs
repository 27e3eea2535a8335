//! Hard- and soft-decision iterative decoders over the Tanner graph.
//!
//! Both decoders run a fully parallel (flooding) schedule and stop on a zero
//! syndrome of the tentative word or after `max_iters` iterations. Adjacency
//! is built in per-block support order, so cyclically shifting the input by
//! one position inside every block permutes the message arrays without
//! changing any accumulation order: decoding commutes with block shifts
//! bit-exactly, including the floating-point path.

use crate::bits::BitVec;
use crate::error::{Error, Result};
use crate::qc::QcMatrix;

/// Sparse bipartite adjacency of a QC parity-check matrix.
///
/// Edges are numbered variable-major; each check slot stores the matching
/// variable-major edge id so the two passes share one message array.
pub struct TannerGraph {
    n: usize,
    r: usize,
    p: usize,
    var_off: Vec<usize>,
    var_checks: Vec<u32>,
    check_off: Vec<usize>,
    check_vars: Vec<u32>,
    check_edges: Vec<u32>,
}

impl TannerGraph {
    pub fn new(h: &QcMatrix) -> Self {
        let p = h.p();
        let rows0 = h.rows0();
        let cols0 = h.cols0();
        let n = cols0 * p;
        let r = rows0 * p;

        let supports: Vec<Vec<Vec<usize>>> = (0..rows0)
            .map(|i| (0..cols0).map(|j| h.block(i, j).support()).collect())
            .collect();

        // variable-major: var (j, o) connects to check (i, (o - s) mod p)
        let mut var_off = Vec::with_capacity(n + 1);
        var_off.push(0usize);
        let mut var_checks = Vec::new();
        for j in 0..cols0 {
            for o in 0..p {
                for (i, row_supports) in supports.iter().enumerate() {
                    for &s in &row_supports[j] {
                        let check = i * p + (o + p - s) % p;
                        var_checks.push(check as u32);
                    }
                }
                var_off.push(var_checks.len());
            }
        }

        // check-major: check (i, s) connects to var (j, (idx + s) mod p);
        // the var-side slot of that edge is the rank of idx in the support,
        // offset by the var's earlier block rows.
        let mut check_off = Vec::with_capacity(r + 1);
        check_off.push(0usize);
        let mut check_vars = Vec::new();
        let mut check_edges = Vec::new();
        let row_rank_offset: Vec<Vec<usize>> = (0..cols0)
            .map(|j| {
                let mut acc = 0;
                (0..rows0)
                    .map(|i| {
                        let off = acc;
                        acc += supports[i][j].len();
                        off
                    })
                    .collect()
            })
            .collect();
        for (i, row_supports) in supports.iter().enumerate() {
            for s in 0..p {
                for (j, sup) in row_supports.iter().enumerate() {
                    for (rank, &idx) in sup.iter().enumerate() {
                        let o = (idx + s) % p;
                        let var = j * p + o;
                        check_vars.push(var as u32);
                        let edge = var_off[var] + row_rank_offset[j][i] + rank;
                        check_edges.push(edge as u32);
                    }
                }
                check_off.push(check_vars.len());
            }
        }

        TannerGraph {
            n,
            r,
            p,
            var_off,
            var_checks,
            check_off,
            check_vars,
            check_edges,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn var_degree(&self, v: usize) -> usize {
        self.var_off[v + 1] - self.var_off[v]
    }

    /// H * word^T == 0
    pub fn syndrome_is_zero(&self, word: &BitVec) -> bool {
        for c in 0..self.r {
            let mut parity = false;
            for slot in self.check_off[c]..self.check_off[c + 1] {
                parity ^= word.get(self.check_vars[slot] as usize);
            }
            if parity {
                return false;
            }
        }
        true
    }
}

/// Fixed per-block decision thresholds for the bit-flipping decoder.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BfConfig {
    pub b_per_block: Vec<usize>,
    pub max_iters: usize,
}

pub const BF_DEFAULT_MAX_ITERS: usize = 300;
pub const SPA_DEFAULT_MAX_ITERS: usize = 100;

impl BfConfig {
    /// Validate thresholds against the block column weights:
    /// `ceil(d_v/2) <= b <= d_v - 1` per block.
    pub fn new(b_per_block: Vec<usize>, dv_per_block: &[usize], max_iters: usize) -> Result<Self> {
        if b_per_block.len() != dv_per_block.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} thresholds for {} blocks",
                b_per_block.len(),
                dv_per_block.len()
            )));
        }
        for (j, (&b, &dv)) in b_per_block.iter().zip(dv_per_block).enumerate() {
            if b < dv.div_ceil(2) || b > dv - 1 {
                return Err(Error::DomainError(format!(
                    "block {j}: threshold {b} outside [{}, {}]",
                    dv.div_ceil(2),
                    dv - 1
                )));
            }
        }
        Ok(BfConfig {
            b_per_block,
            max_iters,
        })
    }
}

/// Decoder result; `converged` means the returned word has zero syndrome.
#[derive(Debug, Clone)]
pub struct DecodeOutcome {
    pub word: BitVec,
    pub iterations_used: usize,
    pub converged: bool,
}

/// Gallager-style bit flipping with per-block decision thresholds.
///
/// Check nodes send extrinsic parities; a variable's outgoing message flips
/// its received value when at least `b` of the other check messages
/// disagree with it (inclusive rule), and the tentative decision applies
/// the same threshold over all incident checks.
pub fn bf_decode(graph: &TannerGraph, received: &BitVec, cfg: &BfConfig) -> Result<DecodeOutcome> {
    if received.len() != graph.n {
        return Err(Error::DimensionMismatch(format!(
            "received length {} vs code length {}",
            received.len(),
            graph.n
        )));
    }
    if cfg.b_per_block.len() * graph.p != graph.n {
        return Err(Error::DimensionMismatch(format!(
            "{} thresholds for {} blocks",
            cfg.b_per_block.len(),
            graph.n / graph.p
        )));
    }
    if graph.syndrome_is_zero(received) {
        return Ok(DecodeOutcome {
            word: received.clone(),
            iterations_used: 0,
            converged: true,
        });
    }

    let edges = graph.var_checks.len();
    let mut msg_vc: Vec<u8> = Vec::with_capacity(edges);
    for v in 0..graph.n {
        let y = received.get(v) as u8;
        for _ in graph.var_off[v]..graph.var_off[v + 1] {
            msg_vc.push(y);
        }
    }
    let mut msg_cv: Vec<u8> = vec![0; edges];
    let mut tentative = BitVec::zeros(graph.n);

    for iter in 1..=cfg.max_iters {
        // check pass: extrinsic parity per edge
        for c in 0..graph.r {
            let (lo, hi) = (graph.check_off[c], graph.check_off[c + 1]);
            let mut total = 0u8;
            for slot in lo..hi {
                total ^= msg_vc[graph.check_edges[slot] as usize];
            }
            for slot in lo..hi {
                let e = graph.check_edges[slot] as usize;
                msg_cv[e] = total ^ msg_vc[e];
            }
        }
        // variable pass: count disagreements with the received value
        for v in 0..graph.n {
            let y = received.get(v) as u8;
            let b = cfg.b_per_block[v / graph.p];
            let (lo, hi) = (graph.var_off[v], graph.var_off[v + 1]);
            let mut unsatisfied = 0usize;
            for e in lo..hi {
                unsatisfied += (msg_cv[e] != y) as usize;
            }
            for e in lo..hi {
                let extrinsic = unsatisfied - (msg_cv[e] != y) as usize;
                msg_vc[e] = y ^ (extrinsic >= b) as u8;
            }
            tentative.set(v, (y ^ (unsatisfied >= b) as u8) == 1);
        }
        if graph.syndrome_is_zero(&tentative) {
            return Ok(DecodeOutcome {
                word: tentative,
                iterations_used: iter,
                converged: true,
            });
        }
    }
    Ok(DecodeOutcome {
        word: tentative,
        iterations_used: cfg.max_iters,
        converged: false,
    })
}

/// Log-domain sum-product decoding with channel log-likelihood ratios from a
/// binary symmetric channel of the given crossover probability.
pub fn spa_decode(
    graph: &TannerGraph,
    received: &BitVec,
    crossover: f64,
    max_iters: usize,
) -> Result<DecodeOutcome> {
    if received.len() != graph.n {
        return Err(Error::DimensionMismatch(format!(
            "received length {} vs code length {}",
            received.len(),
            graph.n
        )));
    }
    if !(crossover > 0.0 && crossover < 0.5) {
        return Err(Error::DomainError(format!(
            "crossover {crossover} outside (0, 1/2)"
        )));
    }
    if graph.syndrome_is_zero(received) {
        return Ok(DecodeOutcome {
            word: received.clone(),
            iterations_used: 0,
            converged: true,
        });
    }

    let l0 = ((1.0 - crossover) / crossover).ln();
    let channel: Vec<f64> = (0..graph.n)
        .map(|v| if received.get(v) { -l0 } else { l0 })
        .collect();

    let edges = graph.var_checks.len();
    let mut msg_vc: Vec<f64> = Vec::with_capacity(edges);
    for v in 0..graph.n {
        for _ in graph.var_off[v]..graph.var_off[v + 1] {
            msg_vc.push(channel[v]);
        }
    }
    let mut msg_cv: Vec<f64> = vec![0.0; edges];
    let mut hard = BitVec::zeros(graph.n);
    let max_dc = (0..graph.r)
        .map(|c| graph.check_off[c + 1] - graph.check_off[c])
        .max()
        .unwrap_or(0);
    let mut fwd = vec![0.0f64; max_dc + 1];
    let mut bwd = vec![0.0f64; max_dc + 1];

    const ATANH_CLAMP: f64 = 1.0 - 1e-12;
    for iter in 1..=max_iters {
        // check pass: leave-one-out tanh products via prefix/suffix arrays
        for c in 0..graph.r {
            let (lo, hi) = (graph.check_off[c], graph.check_off[c + 1]);
            let deg = hi - lo;
            fwd[0] = 1.0;
            for (i, slot) in (lo..hi).enumerate() {
                let t = (msg_vc[graph.check_edges[slot] as usize] * 0.5).tanh();
                fwd[i + 1] = fwd[i] * t;
            }
            bwd[deg] = 1.0;
            for (i, slot) in (lo..hi).enumerate().rev() {
                let t = (msg_vc[graph.check_edges[slot] as usize] * 0.5).tanh();
                bwd[i] = bwd[i + 1] * t;
            }
            for (i, slot) in (lo..hi).enumerate() {
                let prod = (fwd[i] * bwd[i + 1]).clamp(-ATANH_CLAMP, ATANH_CLAMP);
                msg_cv[graph.check_edges[slot] as usize] = 2.0 * prod.atanh();
            }
        }
        // variable pass and posterior decisions
        for v in 0..graph.n {
            let (lo, hi) = (graph.var_off[v], graph.var_off[v + 1]);
            let mut total = channel[v];
            for e in lo..hi {
                total += msg_cv[e];
            }
            for e in lo..hi {
                msg_vc[e] = total - msg_cv[e];
            }
            hard.set(v, total < 0.0);
        }
        if graph.syndrome_is_zero(&hard) {
            return Ok(DecodeOutcome {
                word: hard,
                iterations_used: iter,
                converged: true,
            });
        }
    }
    Ok(DecodeOutcome {
        word: hard,
        iterations_used: max_iters,
        converged: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circulant::Circulant;
    use crate::construction::generate_h;
    use crate::profile::DegreeProfile;
    use rand::rngs::StdRng;
    use rand::SeedableRng;

    fn toy_code() -> (QcMatrix, DegreeProfile) {
        let mut rng = StdRng::seed_from_u64(77);
        let profile = DegreeProfile::new(2, 64, vec![4, 5], 0.0).unwrap();
        let h = generate_h(&profile, &mut rng).unwrap();
        (h, profile)
    }

    /// A codeword of the toy code: [w | w * (H1^-1 H0)^T] is in the kernel.
    fn toy_codeword(h: &QcMatrix, seed: u64) -> BitVec {
        let mut rng = StdRng::seed_from_u64(seed);
        let p = h.p();
        let mut info = BitVec::zeros(p);
        for i in 0..p {
            if rand::Rng::gen_bool(&mut rng, 0.5) {
                info.set(i, true);
            }
        }
        let w = h
            .block(0, 1)
            .inverse()
            .unwrap()
            .mul(h.block(0, 0))
            .unwrap()
            .transpose();
        let parity = crate::circulant::cyclic_mul(&info, w.row());
        let mut word = BitVec::zeros(2 * p);
        word.xor_range_from(0, &info);
        word.xor_range_from(p, &parity);
        word
    }

    #[test]
    fn graph_shape_and_syndrome() {
        let (h, profile) = toy_code();
        let graph = TannerGraph::new(&h);
        assert_eq!(graph.n(), 128);
        assert_eq!(graph.r(), 64);
        for v in 0..graph.n() {
            assert_eq!(graph.var_degree(v), profile.dv(v / 64));
        }
        let word = toy_codeword(&h, 3);
        assert!(graph.syndrome_is_zero(&word));
        let mut broken = word.clone();
        broken.flip(17);
        assert!(!graph.syndrome_is_zero(&broken));
    }

    #[test]
    fn codeword_is_fixed_point_of_both_decoders() {
        let (h, _) = toy_code();
        let graph = TannerGraph::new(&h);
        let word = toy_codeword(&h, 4);
        let cfg = BfConfig::new(vec![3, 4], &[4, 5], 50).unwrap();
        let out = bf_decode(&graph, &word, &cfg).unwrap();
        assert!(out.converged);
        assert_eq!(out.iterations_used, 0);
        assert_eq!(out.word, word);

        let out = spa_decode(&graph, &word, 0.05, 50).unwrap();
        assert!(out.converged);
        assert_eq!(out.iterations_used, 0);
        assert_eq!(out.word, word);
    }

    #[test]
    fn single_error_corrected() {
        let (h, _) = toy_code();
        let graph = TannerGraph::new(&h);
        let cfg = BfConfig::new(vec![3, 4], &[4, 5], 50).unwrap();
        for seed in 0..10u64 {
            let word = toy_codeword(&h, seed);
            let mut rx = word.clone();
            rx.flip((seed as usize * 29) % 128);
            let out = bf_decode(&graph, &rx, &cfg).unwrap();
            assert!(out.converged, "seed {seed}");
            assert_eq!(out.word, word, "seed {seed}");

            let out = spa_decode(&graph, &rx, 1.0 / 128.0, 50).unwrap();
            assert!(out.converged, "spa seed {seed}");
            assert_eq!(out.word, word, "spa seed {seed}");
        }
    }

    #[test]
    fn nonconvergence_is_reported_not_lied_about() {
        let (h, _) = toy_code();
        let graph = TannerGraph::new(&h);
        let cfg = BfConfig::new(vec![3, 4], &[4, 5], 30).unwrap();
        let mut rng = StdRng::seed_from_u64(5);
        let mut failures = 0;
        for _ in 0..100 {
            // way beyond capability: 40 random errors on the zero codeword
            let errs = crate::construction::sample_distinct(128, 40, &mut rng);
            let rx = BitVec::from_indices(128, &errs);
            let out = bf_decode(&graph, &rx, &cfg).unwrap();
            if !out.converged {
                failures += 1;
            } else {
                assert!(graph.syndrome_is_zero(&out.word));
            }
        }
        assert!(failures > 50, "only {failures} failures out of 100");
    }

    #[test]
    fn bf_config_validation() {
        assert!(BfConfig::new(vec![3, 4], &[4, 5], 10).is_ok());
        assert!(BfConfig::new(vec![1, 4], &[4, 5], 10).is_err()); // below ceil(4/2)
        assert!(BfConfig::new(vec![3, 5], &[4, 5], 10).is_err()); // above dv-1
        assert!(BfConfig::new(vec![3], &[4, 5], 10).is_err());
    }

    #[test]
    fn spa_crossover_domain() {
        let (h, _) = toy_code();
        let graph = TannerGraph::new(&h);
        let rx = BitVec::zeros(128);
        assert!(spa_decode(&graph, &rx, 0.0, 10).is_err());
        assert!(spa_decode(&graph, &rx, 0.5, 10).is_err());
    }

    #[test]
    fn block_shift_equivariance() {
        let (h, _) = toy_code();
        let graph = TannerGraph::new(&h);
        let p = 64;
        let mut rng = StdRng::seed_from_u64(9);
        let cfg = BfConfig::new(vec![3, 4], &[4, 5], 50).unwrap();
        for trial in 0..5 {
            let word = toy_codeword(&h, 100 + trial);
            let mut rx = word.clone();
            for e in crate::construction::sample_distinct(128, 5, &mut rng) {
                rx.flip(e);
            }
            // shift each length-p block cyclically by one
            let shift = |v: &BitVec| {
                let mut out = BitVec::zeros(v.len());
                for b in 0..v.len() / p {
                    let blk = v.extract(b * p, p);
                    out.xor_range_from(b * p, &blk.rotated(1));
                }
                out
            };
            let rx_shifted = shift(&rx);
            for (a, b) in [
                (
                    bf_decode(&graph, &rx, &cfg).unwrap(),
                    bf_decode(&graph, &rx_shifted, &cfg).unwrap(),
                ),
                (
                    spa_decode(&graph, &rx, 0.04, 50).unwrap(),
                    spa_decode(&graph, &rx_shifted, 0.04, 50).unwrap(),
                ),
            ] {
                assert_eq!(a.converged, b.converged);
                assert_eq!(shift(&a.word), b.word);
                assert_eq!(a.iterations_used, b.iterations_used);
            }
        }
    }

    #[test]
    fn identity_support_helper() {
        // guards the circulant row/column convention the graph relies on
        let c = Circulant::from_support(5, &[2]).unwrap();
        let h = QcMatrix::from_blocks(1, 1, vec![c]).unwrap();
        let graph = TannerGraph::new(&h);
        // var at offset o participates in check (o - 2) mod 5
        assert_eq!(graph.var_checks[graph.var_off[0]], 3);
        assert_eq!(graph.var_checks[graph.var_off[1]], 4);
    }
}
