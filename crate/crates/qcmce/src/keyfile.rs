//! Binary key and ciphertext file formats.
//!
//! Key files open with the magic `QCMCE1`, one version byte and one kind
//! byte (0 public, 1 private), followed by little-endian metadata: `n0`,
//! `p`, `k0` (u32 each), the per-block column weights (u32 each), `m` as a
//! u32 numerator/denominator pair, `t_prime` (u32), the decoder selection
//! (kind byte, max_iters u32, explicit thresholds or crossover), the
//! profile security floor and validation margin (f64 bits).
//!
//! The public payload is the redundancy column of `G'`: exactly
//! `(n0 - 1) * p` bits, packed little-endian within bytes, zero padding in
//! the final byte. A private file carries the same public payload followed
//! by the H, Q and S blocks, each as a u32 weight header plus its packed
//! first row.
//!
//! Ciphertext files open with `QCMCT1`, carry `n0`, `p`, the plaintext byte
//! length (u64) and the concatenated n-bit ciphertext blocks.

use crate::bits::BitVec;
use crate::circulant::Circulant;
use crate::cryptosystem::{DecoderConfig, KeyPair, PrivateKey, PublicKey, SystemParams};
use crate::error::{Error, Result};
use crate::profile::{DegreeProfile, QProfile, Rational};
use crate::qc::QcMatrix;

pub const KEY_MAGIC: &[u8; 6] = b"QCMCE1";
pub const CT_MAGIC: &[u8; 6] = b"QCMCT1";
const VERSION: u8 = 1;

const KIND_PUBLIC: u8 = 0;
const KIND_PRIVATE: u8 = 1;

const DECODER_BF: u8 = 0;
const DECODER_SPA: u8 = 1;

struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    fn new() -> Self {
        Writer { buf: Vec::new() }
    }

    fn bytes(&mut self, b: &[u8]) {
        self.buf.extend_from_slice(b);
    }

    fn u8(&mut self, v: u8) {
        self.buf.push(v);
    }

    fn u32(&mut self, v: u32) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    fn u64(&mut self, v: u64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    fn f64(&mut self, v: f64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn new(buf: &'a [u8]) -> Self {
        Reader { buf, pos: 0 }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.buf.len() {
            return Err(Error::Format(format!(
                "truncated file: wanted {n} bytes at offset {}",
                self.pos
            )));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn done(&self) -> bool {
        self.pos == self.buf.len()
    }
}

fn write_header(w: &mut Writer, kind: u8, params: &SystemParams) {
    w.bytes(KEY_MAGIC);
    w.u8(VERSION);
    w.u8(kind);
    w.u32(params.n0() as u32);
    w.u32(params.p() as u32);
    w.u32(params.k0() as u32);
    for &dv in params.profile().dv_per_block() {
        w.u32(dv as u32);
    }
    let m = params.qprofile().m_target();
    w.u32(*m.numer() as u32);
    w.u32(*m.denom() as u32);
    w.u32(params.t_prime() as u32);
    match params.decoder() {
        DecoderConfig::Bf {
            b_per_block,
            max_iters,
        } => {
            w.u8(DECODER_BF);
            w.u32(*max_iters as u32);
            // zero means "optimize at load time"
            for j in 0..params.n0() {
                w.u32(b_per_block.as_ref().map_or(0, |b| b[j] as u32));
            }
        }
        DecoderConfig::Spa {
            crossover,
            max_iters,
        } => {
            w.u8(DECODER_SPA);
            w.u32(*max_iters as u32);
            w.f64(crossover.unwrap_or(0.0));
        }
    }
    w.f64(params.security_bits());
}

fn read_header(r: &mut Reader, expect_kind: u8) -> Result<SystemParams> {
    let magic = r.take(6)?;
    if magic != KEY_MAGIC {
        return Err(Error::Format("bad magic, not a key file".into()));
    }
    let version = r.u8()?;
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let kind = r.u8()?;
    if kind != expect_kind {
        return Err(Error::Format(format!(
            "wrong key kind: expected {expect_kind}, found {kind}"
        )));
    }
    let n0 = r.u32()? as usize;
    let p = r.u32()? as usize;
    let k0 = r.u32()? as usize;
    if n0 == 0 || n0 > 64 || k0 + 1 != n0 {
        return Err(Error::Format(format!("implausible block counts n0={n0} k0={k0}")));
    }
    let mut dv = Vec::with_capacity(n0);
    for _ in 0..n0 {
        dv.push(r.u32()? as usize);
    }
    let m_num = r.u32()? as i64;
    let m_den = r.u32()? as i64;
    if m_den == 0 {
        return Err(Error::Format("zero denominator in m".into()));
    }
    let t_prime = r.u32()? as usize;
    let decoder = match r.u8()? {
        DECODER_BF => {
            let max_iters = r.u32()? as usize;
            let mut b = Vec::with_capacity(n0);
            for _ in 0..n0 {
                b.push(r.u32()? as usize);
            }
            let b_per_block = if b.iter().all(|&x| x == 0) {
                None
            } else {
                Some(b)
            };
            DecoderConfig::Bf {
                b_per_block,
                max_iters,
            }
        }
        DECODER_SPA => {
            let max_iters = r.u32()? as usize;
            let x = r.f64()?;
            DecoderConfig::Spa {
                crossover: if x == 0.0 { None } else { Some(x) },
                max_iters,
            }
        }
        other => return Err(Error::Format(format!("unknown decoder kind {other}"))),
    };
    let security_bits = r.f64()?;
    let profile = DegreeProfile::new(n0, p, dv, security_bits)?;
    let qprofile = QProfile::new(n0, p, Rational::new(m_num, m_den))?;
    SystemParams::new(profile, qprofile, t_prime, decoder, security_bits)
}

/// Serialize the public key. The payload is exactly `(n0 - 1) * p` bits.
pub fn write_public_key(params: &SystemParams, pk: &PublicKey) -> Vec<u8> {
    let mut w = Writer::new();
    write_header(&mut w, KIND_PUBLIC, params);
    w.bytes(&public_payload(pk));
    w.buf
}

fn public_payload(pk: &PublicKey) -> Vec<u8> {
    let p = pk.p;
    let mut bits = BitVec::zeros(pk.payload_bits());
    for (i, c) in pk.right_column.iter().enumerate() {
        bits.xor_range_from(i * p, c.row());
    }
    bits.to_bytes()
}

pub fn read_public_key(bytes: &[u8]) -> Result<(SystemParams, PublicKey)> {
    let mut r = Reader::new(bytes);
    let params = read_header(&mut r, KIND_PUBLIC)?;
    let pk = read_public_body(&mut r, &params)?;
    if !r.done() {
        return Err(Error::Format("trailing bytes after public payload".into()));
    }
    Ok((params, pk))
}

fn read_public_body(r: &mut Reader, params: &SystemParams) -> Result<PublicKey> {
    let p = params.p();
    let k0 = params.k0();
    let payload_bits = k0 * p;
    let payload = r.take(payload_bits.div_ceil(8))?;
    let bits = BitVec::from_bytes(payload_bits, payload);
    // reject nonzero padding
    let used = payload_bits % 8;
    if used != 0 && payload.last().map_or(false, |b| b >> used != 0) {
        return Err(Error::Format("nonzero padding bits in public payload".into()));
    }
    let right_column = (0..k0)
        .map(|i| Circulant::from_row(bits.extract(i * p, p)))
        .collect();
    Ok(PublicKey {
        n0: params.n0(),
        p,
        t_prime: params.t_prime(),
        right_column,
    })
}

fn write_blocks(w: &mut Writer, m: &QcMatrix) {
    for i in 0..m.rows0() {
        for j in 0..m.cols0() {
            let b = m.block(i, j);
            w.u32(b.weight() as u32);
            w.bytes(&b.row().to_bytes());
        }
    }
}

fn read_blocks(r: &mut Reader, rows0: usize, cols0: usize, p: usize) -> Result<QcMatrix> {
    let mut blocks = Vec::with_capacity(rows0 * cols0);
    for _ in 0..rows0 * cols0 {
        let weight = r.u32()? as usize;
        let raw = r.take(p.div_ceil(8))?;
        let row = BitVec::from_bytes(p, raw);
        if row.weight() != weight {
            return Err(Error::Format(format!(
                "block weight header {weight} does not match row weight {}",
                row.weight()
            )));
        }
        blocks.push(Circulant::from_row(row));
    }
    QcMatrix::from_blocks(rows0, cols0, blocks)
}

/// Serialize the full key pair (private file embeds the public payload).
pub fn write_private_key(kp: &KeyPair) -> Vec<u8> {
    let params = &kp.private.params;
    let mut w = Writer::new();
    write_header(&mut w, KIND_PRIVATE, params);
    w.bytes(&public_payload(&kp.public));
    write_blocks(&mut w, &kp.private.h);
    write_blocks(&mut w, &kp.private.q);
    write_blocks(&mut w, &kp.private.s);
    w.buf
}

pub fn read_private_key(bytes: &[u8]) -> Result<KeyPair> {
    let mut r = Reader::new(bytes);
    let params = read_header(&mut r, KIND_PRIVATE)?;
    let public = read_public_body(&mut r, &params)?;
    let n0 = params.n0();
    let k0 = params.k0();
    let p = params.p();
    let h = read_blocks(&mut r, 1, n0, p)?;
    let q = read_blocks(&mut r, n0, n0, p)?;
    let s = read_blocks(&mut r, k0, k0, p)?;
    if !r.done() {
        return Err(Error::Format("trailing bytes after private blocks".into()));
    }
    Ok(KeyPair {
        public,
        private: PrivateKey { h, q, s, params },
    })
}

/// Frame a ciphertext stream: block count is implied by length.
pub fn write_ciphertext(n0: usize, p: usize, plaintext_len: u64, blocks: &[BitVec]) -> Vec<u8> {
    let n = n0 * p;
    let mut w = Writer::new();
    w.bytes(CT_MAGIC);
    w.u8(VERSION);
    w.u32(n0 as u32);
    w.u32(p as u32);
    w.u64(plaintext_len);
    let mut all = BitVec::zeros(blocks.len() * n);
    for (i, b) in blocks.iter().enumerate() {
        all.xor_range_from(i * n, b);
    }
    w.bytes(&all.to_bytes());
    w.buf
}

pub fn read_ciphertext(bytes: &[u8]) -> Result<(usize, usize, u64, Vec<BitVec>)> {
    let mut r = Reader::new(bytes);
    if r.take(6)? != CT_MAGIC {
        return Err(Error::Format("bad magic, not a ciphertext file".into()));
    }
    if r.u8()? != VERSION {
        return Err(Error::Format("unsupported ciphertext version".into()));
    }
    let n0 = r.u32()? as usize;
    let p = r.u32()? as usize;
    let plaintext_len = r.u64()?;
    let n = n0 * p;
    if n == 0 {
        return Err(Error::Format("empty geometry".into()));
    }
    let rest = r.take(bytes.len() - r.pos)?;
    let total_bits = rest.len() * 8;
    let nblocks = total_bits / n;
    if rest.len() != (nblocks * n).div_ceil(8) {
        return Err(Error::Format(format!(
            "ciphertext body of {} bytes is not {nblocks} blocks of {n} bits",
            rest.len()
        )));
    }
    let all = BitVec::from_bytes(nblocks * n, rest);
    let blocks = (0..nblocks).map(|i| all.extract(i * n, n)).collect();
    Ok((n0, p, plaintext_len, blocks))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cryptosystem::keygen;
    use num_rational::Ratio;
    use rand::rngs::StdRng;
    use rand::SeedableRng;

    fn toy_keypair() -> KeyPair {
        let profile = DegreeProfile::new(4, 64, vec![3, 4, 4, 5], 0.0).unwrap();
        let qprofile = QProfile::new(4, 64, Ratio::from_integer(2)).unwrap();
        let params = SystemParams::new(
            profile,
            qprofile,
            2,
            DecoderConfig::Bf {
                b_per_block: None,
                max_iters: 60,
            },
            0.0,
        )
        .unwrap();
        let mut rng = StdRng::seed_from_u64(21);
        keygen(&params, &mut rng).unwrap()
    }

    #[test]
    fn public_key_roundtrip_and_size() {
        let kp = toy_keypair();
        let bytes = write_public_key(&kp.private.params, &kp.public);
        let (params2, pk2) = read_public_key(&bytes).unwrap();
        assert_eq!(pk2, kp.public);
        assert_eq!(params2.t_prime(), 2);
        // header + exactly ceil((n0-1)p/8) payload bytes
        let header_len = bytes.len() - (3 * 64usize).div_ceil(8);
        assert_eq!(&bytes[..6], KEY_MAGIC);
        assert!(header_len > 0);
    }

    #[test]
    fn private_key_roundtrip() {
        let kp = toy_keypair();
        let bytes = write_private_key(&kp);
        let kp2 = read_private_key(&bytes).unwrap();
        assert_eq!(kp2.public, kp.public);
        assert_eq!(kp2.private.h, kp.private.h);
        assert_eq!(kp2.private.q, kp.private.q);
        assert_eq!(kp2.private.s, kp.private.s);
        assert_eq!(kp2.private.params.t(), kp.private.params.t());
    }

    #[test]
    fn serialization_is_deterministic() {
        let kp = toy_keypair();
        assert_eq!(write_private_key(&kp), write_private_key(&kp));
        assert_eq!(
            write_public_key(&kp.private.params, &kp.public),
            write_public_key(&kp.private.params, &kp.public)
        );
    }

    #[test]
    fn corrupted_files_are_rejected() {
        let kp = toy_keypair();
        let mut bytes = write_public_key(&kp.private.params, &kp.public);
        bytes[0] ^= 1;
        assert!(read_public_key(&bytes).is_err());

        let bytes = write_public_key(&kp.private.params, &kp.public);
        assert!(read_public_key(&bytes[..bytes.len() - 1]).is_err());

        // private parsed as public
        let bytes = write_private_key(&kp);
        assert!(read_public_key(&bytes).is_err());
    }

    #[test]
    fn ciphertext_roundtrip() {
        let blocks: Vec<BitVec> = (0..3)
            .map(|i| BitVec::from_indices(256, &[i, 10 * i + 1, 255]))
            .collect();
        let bytes = write_ciphertext(4, 64, 77, &blocks);
        let (n0, p, len, blocks2) = read_ciphertext(&bytes).unwrap();
        assert_eq!((n0, p, len), (4, 64, 77));
        assert_eq!(blocks2, blocks);
    }
}
