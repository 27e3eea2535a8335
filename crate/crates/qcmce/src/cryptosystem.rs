//! Key generation, encryption and decryption.
//!
//! The private key is the sparse parity-check row H, the sparse
//! transformation Q and the dense scrambler S; the public key is the
//! redundancy column of the systematic `G' = S^-1 G Q^-1`. S is not drawn
//! independently: it is defined as the leftmost `k0 x k0` block of
//! `G Q^-1`, which makes `G'` systematic by construction (an independent S
//! would generically destroy the systematic form the compact key relies
//! on). Decryption undoes Q, corrects the propagated errors with the secret
//! code, and undoes S.

use rand::Rng;

use crate::analysis::{bf_threshold_opt, ThresholdReport};
use crate::bits::BitVec;
use crate::circulant::cyclic_mul;
use crate::construction::{generate_h, generate_q, sample_distinct};
use crate::decoder::{bf_decode, spa_decode, BfConfig, TannerGraph};
use crate::error::{Error, Result};
use crate::profile::{DegreeProfile, QProfile, Rational};
use crate::qc::QcMatrix;

/// Attempt budget for redrawing Q until the derived S is invertible.
const KEYGEN_ATTEMPTS: u64 = 200;
/// Fraction of the predicted threshold kept as safety margin by default.
pub const DEFAULT_THRESHOLD_MARGIN: f64 = 0.05;

/// Which decoder decryption uses.
#[derive(Debug, Clone, PartialEq)]
pub enum DecoderConfig {
    /// Bit flipping; `b_per_block = None` resolves to the optimized
    /// thresholds from the analysis module.
    Bf {
        b_per_block: Option<Vec<usize>>,
        max_iters: usize,
    },
    /// Sum-product; `crossover = None` resolves to `t / n`.
    Spa {
        crossover: Option<f64>,
        max_iters: usize,
    },
}

/// Validated system parameters plus the threshold report backing them.
#[derive(Debug, Clone)]
pub struct SystemParams {
    profile: DegreeProfile,
    qprofile: QProfile,
    t_prime: usize,
    decoder: DecoderConfig,
    security_bits: f64,
    t: usize,
    threshold: ThresholdReport,
}

impl SystemParams {
    /// Validate with the default 5% threshold margin.
    pub fn new(
        profile: DegreeProfile,
        qprofile: QProfile,
        t_prime: usize,
        decoder: DecoderConfig,
        security_bits: f64,
    ) -> Result<Self> {
        Self::with_margin(
            profile,
            qprofile,
            t_prime,
            decoder,
            security_bits,
            DEFAULT_THRESHOLD_MARGIN,
        )
    }

    /// Validate requiring `ceil(t' m) <= (1 - margin) * t_th`.
    pub fn with_margin(
        profile: DegreeProfile,
        qprofile: QProfile,
        t_prime: usize,
        decoder: DecoderConfig,
        security_bits: f64,
        margin: f64,
    ) -> Result<Self> {
        if profile.n0() != qprofile.n0() || profile.p() != qprofile.p() {
            return Err(Error::DimensionMismatch(format!(
                "profile grid {}x(p={}) vs Q grid {}x(p={})",
                profile.n0(),
                profile.p(),
                qprofile.n0(),
                qprofile.p()
            )));
        }
        if profile.n0() < 2 {
            return Err(Error::InvalidProfile(
                "the cryptosystem needs at least two blocks".into(),
            ));
        }
        if t_prime == 0 {
            return Err(Error::InvalidProfile("t' must be positive".into()));
        }
        let t_exact = qprofile.m_target() * Rational::from_integer(t_prime as i64);
        let t = t_exact.ceil().to_integer() as usize;
        let threshold = bf_threshold_opt(profile.n(), &profile)?;
        let cap = ((1.0 - margin) * threshold.t_th as f64).floor() as usize;
        if t > cap {
            return Err(Error::InvalidProfile(format!(
                "t = ceil(t' m) = {t} exceeds the usable threshold {cap} \
                 (t_th = {} with {margin:.0}% margin)",
                threshold.t_th,
                margin = margin * 100.0
            )));
        }
        if let DecoderConfig::Bf {
            b_per_block: Some(b),
            max_iters,
        } = &decoder
        {
            BfConfig::new(b.clone(), profile.dv_per_block(), *max_iters)?;
        }
        Ok(SystemParams {
            profile,
            qprofile,
            t_prime,
            decoder,
            security_bits,
            t,
            threshold,
        })
    }

    pub fn profile(&self) -> &DegreeProfile {
        &self.profile
    }

    pub fn qprofile(&self) -> &QProfile {
        &self.qprofile
    }

    pub fn n0(&self) -> usize {
        self.profile.n0()
    }

    pub fn p(&self) -> usize {
        self.profile.p()
    }

    pub fn n(&self) -> usize {
        self.profile.n()
    }

    pub fn k(&self) -> usize {
        (self.n0() - 1) * self.p()
    }

    pub fn k0(&self) -> usize {
        self.n0() - 1
    }

    pub fn t_prime(&self) -> usize {
        self.t_prime
    }

    /// Errors the secret decoder must handle: `ceil(t' m)`.
    pub fn t(&self) -> usize {
        self.t
    }

    pub fn decoder(&self) -> &DecoderConfig {
        &self.decoder
    }

    pub fn security_bits(&self) -> f64 {
        self.security_bits
    }

    pub fn threshold(&self) -> &ThresholdReport {
        &self.threshold
    }

    /// The bit-flipping configuration decryption will use.
    pub fn resolved_bf(&self) -> Result<BfConfig> {
        match &self.decoder {
            DecoderConfig::Bf {
                b_per_block: Some(b),
                max_iters,
            } => BfConfig::new(b.clone(), self.profile.dv_per_block(), *max_iters),
            DecoderConfig::Bf {
                b_per_block: None,
                max_iters,
            } => BfConfig::new(
                self.threshold.best_b.clone(),
                self.profile.dv_per_block(),
                *max_iters,
            ),
            DecoderConfig::Spa { .. } => Err(Error::InvalidProfile(
                "decoder configured as sum-product".into(),
            )),
        }
    }
}

/// The systematic public key: the `k0` circulants of the redundancy column.
#[derive(Debug, Clone, PartialEq)]
pub struct PublicKey {
    pub n0: usize,
    pub p: usize,
    pub t_prime: usize,
    /// Block `i` of the last block-column of `G'`.
    pub right_column: Vec<crate::circulant::Circulant>,
}

impl PublicKey {
    pub fn n(&self) -> usize {
        self.n0 * self.p
    }

    pub fn k(&self) -> usize {
        (self.n0 - 1) * self.p
    }

    /// Serialized payload size in bits: `(n0 - 1) * p`.
    pub fn payload_bits(&self) -> usize {
        (self.n0 - 1) * self.p
    }
}

/// Private key: the sparse code plus both secret transformations.
#[derive(Debug, Clone)]
pub struct PrivateKey {
    pub h: QcMatrix,
    pub q: QcMatrix,
    pub s: QcMatrix,
    pub params: SystemParams,
}

#[derive(Debug, Clone)]
pub struct KeyPair {
    pub public: PublicKey,
    pub private: PrivateKey,
}

/// Generate a key pair.
///
/// H comes from the difference-family sampler; the systematic secret
/// generator is `G = [I | (H_last^-1 [H_0 .. H_{n0-2}])^T]`; Q is drawn
/// until the leftmost block of `G Q^-1` (the derived S) is invertible.
pub fn keygen<R: Rng>(params: &SystemParams, rng: &mut R) -> Result<KeyPair> {
    let h = generate_h(params.profile(), rng)?;
    keygen_with_h(params, h, None, rng)
}

/// Key generation with externally supplied H (and optionally Q) blocks,
/// used by tests exercising degenerate transformations.
pub fn keygen_with_h<R: Rng>(
    params: &SystemParams,
    h: QcMatrix,
    fixed_q: Option<QcMatrix>,
    rng: &mut R,
) -> Result<KeyPair> {
    let n0 = params.n0();
    let k0 = params.k0();
    let p = params.p();
    if h.rows0() != 1 || h.cols0() != n0 || h.p() != p {
        return Err(Error::DimensionMismatch(format!(
            "H is {}x{} blocks at p={}, expected 1x{n0} at p={p}",
            h.rows0(),
            h.cols0(),
            h.p()
        )));
    }

    let h_last_inv = h.block(0, n0 - 1).inverse()?;
    let mut g = QcMatrix::zero(k0, n0, p);
    for i in 0..k0 {
        g.set_block(i, i, crate::circulant::Circulant::identity(p));
        let w = h_last_inv.mul(h.block(0, i))?;
        g.set_block(i, n0 - 1, w.transpose());
    }

    let mut attempts = 0u64;
    let (q, s, s_inv, g_qinv) = loop {
        attempts += 1;
        if attempts > KEYGEN_ATTEMPTS {
            return Err(Error::GenerationExhausted {
                what: "Q with invertible derived S",
                attempts,
            });
        }
        let q = match &fixed_q {
            Some(q) => q.clone(),
            None => generate_q(params.qprofile(), rng)?,
        };
        let q_inv = q.inverse()?;
        let g_qinv = g.mul(&q_inv)?;
        let mut s = QcMatrix::zero(k0, k0, p);
        for i in 0..k0 {
            for j in 0..k0 {
                s.set_block(i, j, g_qinv.block(i, j).clone());
            }
        }
        match s.inverse() {
            Ok(s_inv) => break (q, s, s_inv, g_qinv),
            Err(Error::Singular) if fixed_q.is_none() => continue,
            Err(e) => return Err(e),
        }
    };
    let _ = &s_inv;

    let g_prime = s_inv.mul(&g_qinv)?;
    for i in 0..k0 {
        for j in 0..k0 {
            let blk = g_prime.block(i, j);
            let ok = if i == j {
                blk.is_identity()
            } else {
                blk.is_zero()
            };
            if !ok {
                return Err(Error::DimensionMismatch(
                    "derived public generator is not systematic".into(),
                ));
            }
        }
    }
    let right_column = (0..k0).map(|i| g_prime.block(i, n0 - 1).clone()).collect();

    Ok(KeyPair {
        public: PublicKey {
            n0,
            p,
            t_prime: params.t_prime(),
            right_column,
        },
        private: PrivateKey {
            h,
            q,
            s,
            params: params.clone(),
        },
    })
}

/// Draw a uniform weight-`t_prime` error vector.
pub fn sample_error<R: Rng>(n: usize, t_prime: usize, rng: &mut R) -> BitVec {
    BitVec::from_indices(n, &sample_distinct(n, t_prime, rng))
}

/// Encrypt a `k`-bit block: `x = u G' + e` with a fresh weight-`t'` error.
pub fn encrypt<R: Rng>(pk: &PublicKey, u: &BitVec, rng: &mut R) -> Result<BitVec> {
    let e = sample_error(pk.n(), pk.t_prime, rng);
    encrypt_with_error(pk, u, &e)
}

/// Encryption with a caller-chosen error vector (test hook; weight is the
/// caller's business). Because `G'` is systematic the first `k` bits of the
/// ciphertext are `u + e_left`.
pub fn encrypt_with_error(pk: &PublicKey, u: &BitVec, e: &BitVec) -> Result<BitVec> {
    if u.len() != pk.k() {
        return Err(Error::DimensionMismatch(format!(
            "message length {} vs k = {}",
            u.len(),
            pk.k()
        )));
    }
    if e.len() != pk.n() {
        return Err(Error::DimensionMismatch(format!(
            "error length {} vs n = {}",
            e.len(),
            pk.n()
        )));
    }
    let p = pk.p;
    let mut x = BitVec::zeros(pk.n());
    x.xor_range_from(0, u);
    for i in 0..pk.n0 - 1 {
        let ui = u.extract(i * p, p);
        if ui.is_zero() {
            continue;
        }
        let prod = cyclic_mul(&ui, pk.right_column[i].row());
        x.xor_range_from((pk.n0 - 1) * p, &prod);
    }
    x.xor_assign(e);
    Ok(x)
}

/// Decrypt one ciphertext block.
///
/// `x Q` moves the intentional errors into the secret code's domain (weight
/// at most `t' * ceil(m)`); the configured decoder strips them; the first
/// `k` bits of the corrected codeword are `u S^-1`, fixed by one more
/// product. Fails with [`Error::DecodingFailure`] when the decoder does not
/// reach a zero syndrome, never returning a silently wrong block.
pub fn decrypt(sk: &PrivateKey, x: &BitVec) -> Result<BitVec> {
    let graph = TannerGraph::new(&sk.h);
    decrypt_with_graph(sk, &graph, x)
}

/// Decryption with a prebuilt Tanner graph (amortizes repeated calls).
pub fn decrypt_with_graph(sk: &PrivateKey, graph: &TannerGraph, x: &BitVec) -> Result<BitVec> {
    if x.len() != sk.params.n() {
        return Err(Error::DimensionMismatch(format!(
            "ciphertext length {} vs n = {}",
            x.len(),
            sk.params.n()
        )));
    }
    let x_prime = sk.q.vec_mul(x)?;
    let outcome = match sk.params.decoder() {
        DecoderConfig::Bf { .. } => {
            let cfg = sk.params.resolved_bf()?;
            bf_decode(graph, &x_prime, &cfg)?
        }
        DecoderConfig::Spa {
            crossover,
            max_iters,
        } => {
            let x0 = crossover.unwrap_or(sk.params.t() as f64 / sk.params.n() as f64);
            spa_decode(graph, &x_prime, x0, *max_iters)?
        }
    };
    if !outcome.converged || !graph.syndrome_is_zero(&outcome.word) {
        return Err(Error::DecodingFailure);
    }
    let u_scrambled = outcome.word.extract(0, sk.params.k());
    sk.s.vec_mul(&u_scrambled)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Ratio;
    use rand::rngs::StdRng;
    use rand::SeedableRng;

    fn toy_params(m: Rational, t_prime: usize) -> SystemParams {
        let profile = DegreeProfile::new(4, 128, vec![3, 4, 4, 5], 0.0).unwrap();
        let qprofile = QProfile::new(4, 128, m).unwrap();
        SystemParams::new(
            profile,
            qprofile,
            t_prime,
            DecoderConfig::Bf {
                b_per_block: None,
                max_iters: 100,
            },
            0.0,
        )
        .unwrap()
    }

    #[test]
    fn params_reject_overloaded_t() {
        let profile = DegreeProfile::new(4, 128, vec![3, 4, 4, 5], 0.0).unwrap();
        let qprofile = QProfile::new(4, 128, Ratio::from_integer(2)).unwrap();
        let err = SystemParams::new(
            profile,
            qprofile,
            200,
            DecoderConfig::Bf {
                b_per_block: None,
                max_iters: 100,
            },
            0.0,
        );
        assert!(err.is_err());
    }

    #[test]
    fn degenerate_q_identity_roundtrips() {
        // m = 1 with Q forced to the block identity: decryption reduces to
        // undoing S only.
        let params = toy_params(Ratio::from_integer(1), 3);
        let mut rng = StdRng::seed_from_u64(11);
        let h = generate_h(params.profile(), &mut rng).unwrap();
        let q = QcMatrix::identity(4, 128);
        let kp = keygen_with_h(&params, h, Some(q), &mut rng).unwrap();
        assert_eq!(kp.public.payload_bits(), 3 * 128);

        let mut u = BitVec::zeros(kp.public.k());
        for i in [0usize, 5, 120, 200, 383] {
            u.set(i, true);
        }
        let e = BitVec::zeros(kp.public.n());
        let x = encrypt_with_error(&kp.public, &u, &e).unwrap();
        // systematic with e = 0: prefix is exactly u
        assert_eq!(x.extract(0, kp.public.k()), u);
        let back = decrypt(&kp.private, &x).unwrap();
        assert_eq!(back, u);
    }

    #[test]
    fn roundtrip_with_errors() {
        let params = toy_params(Ratio::from_integer(2), 3);
        let mut rng = StdRng::seed_from_u64(12);
        let kp = keygen(&params, &mut rng).unwrap();
        let graph = TannerGraph::new(&kp.private.h);
        let mut ok = 0;
        for trial in 0..50u64 {
            let mut u = BitVec::zeros(kp.public.k());
            for i in 0..u.len() {
                if rand::Rng::gen_bool(&mut rng, 0.5) {
                    u.set(i, true);
                }
            }
            let x = encrypt(&kp.public, &u, &mut rng).unwrap();
            match decrypt_with_graph(&kp.private, &graph, &x) {
                Ok(back) => {
                    assert_eq!(back, u, "wrong plaintext accepted at trial {trial}");
                    ok += 1;
                }
                Err(Error::DecodingFailure) => {}
                Err(e) => panic!("unexpected error {e}"),
            }
        }
        assert!(ok >= 45, "only {ok}/50 round trips succeeded");
    }

    #[test]
    fn ciphertext_differs_from_clean_encoding_in_t_prime_positions() {
        let params = toy_params(Ratio::from_integer(2), 3);
        let mut rng = StdRng::seed_from_u64(13);
        let kp = keygen(&params, &mut rng).unwrap();
        let mut u = BitVec::zeros(kp.public.k());
        u.set(7, true);
        u.set(100, true);
        let clean = encrypt_with_error(&kp.public, &u, &BitVec::zeros(kp.public.n())).unwrap();
        let x = encrypt(&kp.public, &u, &mut rng).unwrap();
        let mut diff = x.clone();
        diff.xor_assign(&clean);
        assert_eq!(diff.weight(), params.t_prime());
    }

    #[test]
    fn propagated_error_weight_is_bounded() {
        let params = toy_params(Ratio::new(5, 2), 4); // m = 2.5
        let mut rng = StdRng::seed_from_u64(14);
        let kp = keygen(&params, &mut rng).unwrap();
        let m_ceil = params.qprofile().m_ceil();
        for _ in 0..50 {
            let e = sample_error(params.n(), params.t_prime(), &mut rng);
            let eq = kp.private.q.vec_mul(&e).unwrap();
            assert!(eq.weight() <= params.t_prime() * m_ceil);
        }
    }

    #[test]
    fn oversized_errors_fail_loudly() {
        let params = toy_params(Ratio::from_integer(2), 3);
        let mut rng = StdRng::seed_from_u64(15);
        let kp = keygen(&params, &mut rng).unwrap();
        let graph = TannerGraph::new(&kp.private.h);
        let mut failures = 0;
        for _ in 0..20 {
            let u = BitVec::zeros(kp.public.k());
            let e = sample_error(kp.public.n(), 120, &mut rng);
            let x = encrypt_with_error(&kp.public, &u, &e).unwrap();
            match decrypt_with_graph(&kp.private, &graph, &x) {
                Err(Error::DecodingFailure) => failures += 1,
                Ok(back) => assert_eq!(back, u), // decoder genuinely recovered
                Err(e) => panic!("unexpected error {e}"),
            }
        }
        assert!(failures >= 15, "only {failures}/20 reported failure");
    }
}
