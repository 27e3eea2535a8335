//! Bit-packed binary vectors.
//!
//! All key material and codewords live in `BitVec`: a length in bits plus a
//! `u64` word buffer, little-endian within and across words (global bit `i`
//! is word `i / 64`, bit `i % 64`). Unused high bits of the last word are
//! kept zero so equality and weight work on the raw words.

/// A fixed-length vector over GF(2).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitVec {
    nbits: usize,
    words: Vec<u64>,
}

#[inline]
fn words_for(nbits: usize) -> usize {
    nbits.div_ceil(64)
}

#[inline]
fn low_mask(bits: usize) -> u64 {
    if bits >= 64 {
        !0
    } else {
        (1u64 << bits) - 1
    }
}

impl BitVec {
    pub fn zeros(nbits: usize) -> Self {
        BitVec {
            nbits,
            words: vec![0; words_for(nbits)],
        }
    }

    pub fn from_indices(nbits: usize, ones: &[usize]) -> Self {
        let mut v = Self::zeros(nbits);
        for &i in ones {
            v.set(i, true);
        }
        v
    }

    /// Parse from bytes, bit `i` of the vector taken from bit `i % 8` of byte `i / 8`.
    pub fn from_bytes(nbits: usize, bytes: &[u8]) -> Self {
        let mut v = Self::zeros(nbits);
        for i in 0..nbits {
            if (bytes[i / 8] >> (i % 8)) & 1 == 1 {
                v.set(i, true);
            }
        }
        v
    }

    /// Serialize to `ceil(nbits / 8)` bytes; padding bits are zero.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = vec![0u8; self.nbits.div_ceil(8)];
        for (w, word) in self.words.iter().enumerate() {
            for b in 0..8 {
                let byte_idx = w * 8 + b;
                if byte_idx < out.len() {
                    out[byte_idx] = (word >> (b * 8)) as u8;
                }
            }
        }
        out
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.nbits
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.nbits == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.nbits);
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        debug_assert!(i < self.nbits);
        let mask = 1u64 << (i % 64);
        if value {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        debug_assert!(i < self.nbits);
        self.words[i / 64] ^= 1u64 << (i % 64);
    }

    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn clear(&mut self) {
        self.words.fill(0);
    }

    /// Indices of the set bits, ascending.
    pub fn support(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.weight());
        for (w, &word) in self.words.iter().enumerate() {
            let mut word = word;
            while word != 0 {
                let b = word.trailing_zeros() as usize;
                out.push(w * 64 + b);
                word &= word - 1;
            }
        }
        out
    }

    pub fn xor_assign(&mut self, other: &BitVec) {
        assert_eq!(self.nbits, other.nbits, "length mismatch in xor");
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    /// XOR `src` cyclically shifted by `k` into `self`: bit `i` of `src`
    /// lands on bit `(i + k) mod len` of `self`.
    pub fn xor_rotated(&mut self, src: &BitVec, k: usize) {
        assert_eq!(self.nbits, src.nbits, "length mismatch in rotation");
        let n = self.nbits;
        if n == 0 {
            return;
        }
        let k = k % n;
        if k == 0 {
            self.xor_assign(src);
            return;
        }
        // src[0 .. n-k) -> self[k .. n), src[n-k .. n) -> self[0 .. k)
        xor_bit_range(&mut self.words, k, &src.words, 0, n - k);
        xor_bit_range(&mut self.words, 0, &src.words, n - k, k);
    }

    /// `src` cyclically shifted by `k` (see [`BitVec::xor_rotated`]).
    pub fn rotated(&self, k: usize) -> BitVec {
        let mut out = BitVec::zeros(self.nbits);
        out.xor_rotated(self, k);
        out
    }

    /// Copy a bit range out as a fresh vector.
    pub fn extract(&self, start: usize, len: usize) -> BitVec {
        assert!(start + len <= self.nbits);
        let mut out = BitVec::zeros(len);
        xor_bit_range(&mut out.words, 0, &self.words, start, len);
        out
    }

    /// XOR `src` into `self` starting at bit `start`.
    pub fn xor_range_from(&mut self, start: usize, src: &BitVec) {
        assert!(start + src.nbits <= self.nbits);
        xor_bit_range(&mut self.words, start, &src.words, 0, src.nbits);
    }

    pub(crate) fn words(&self) -> &[u64] {
        &self.words
    }
}

impl std::fmt::Debug for BitVec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "BitVec[{}; w={}]", self.nbits, self.weight())
    }
}

/// XOR `len` bits of `src` starting at bit `src_off` into `dst` starting at
/// bit `dst_off`. Ranges must fit inside the respective buffers.
pub(crate) fn xor_bit_range(
    dst: &mut [u64],
    dst_off: usize,
    src: &[u64],
    src_off: usize,
    len: usize,
) {
    let mut done = 0;
    while done < len {
        let take = (len - done).min(64);
        let chunk = read64(src, src_off + done) & low_mask(take);
        xor64(dst, dst_off + done, chunk);
        done += take;
    }
}

/// Read up to 64 bits starting at `bitpos` (zero-extended past the buffer end).
#[inline]
fn read64(words: &[u64], bitpos: usize) -> u64 {
    let w = bitpos / 64;
    let b = bitpos % 64;
    if w >= words.len() {
        return 0;
    }
    let lo = words[w] >> b;
    if b == 0 || w + 1 >= words.len() {
        lo
    } else {
        lo | (words[w + 1] << (64 - b))
    }
}

/// XOR up to 64 bits at `bitpos`.
#[inline]
fn xor64(words: &mut [u64], bitpos: usize, chunk: u64) {
    if chunk == 0 {
        return;
    }
    let w = bitpos / 64;
    let b = bitpos % 64;
    words[w] ^= chunk << b;
    if b != 0 {
        let spill = chunk >> (64 - b);
        if spill != 0 {
            words[w + 1] ^= spill;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn random_vec(rng: &mut StdRng, n: usize) -> BitVec {
        let mut v = BitVec::zeros(n);
        for i in 0..n {
            if rng.gen_bool(0.5) {
                v.set(i, true);
            }
        }
        v
    }

    #[test]
    fn set_get_weight() {
        let mut v = BitVec::zeros(130);
        assert!(v.is_zero());
        v.set(0, true);
        v.set(64, true);
        v.set(129, true);
        assert_eq!(v.weight(), 3);
        assert_eq!(v.support(), vec![0, 64, 129]);
        v.flip(64);
        assert_eq!(v.support(), vec![0, 129]);
    }

    #[test]
    fn rotation_matches_naive() {
        let mut rng = StdRng::seed_from_u64(7);
        for &n in &[1usize, 5, 63, 64, 65, 127, 130, 300] {
            let v = random_vec(&mut rng, n);
            for _ in 0..8 {
                let k = rng.gen_range(0..2 * n);
                let rot = v.rotated(k);
                for i in 0..n {
                    assert_eq!(rot.get((i + k) % n), v.get(i), "n={n} k={k} i={i}");
                }
            }
        }
    }

    #[test]
    fn extract_and_splice_roundtrip() {
        let mut rng = StdRng::seed_from_u64(9);
        for _ in 0..20 {
            let n = rng.gen_range(10..400);
            let v = random_vec(&mut rng, n);
            let start = rng.gen_range(0..n);
            let len = rng.gen_range(0..=(n - start));
            let piece = v.extract(start, len);
            for i in 0..len {
                assert_eq!(piece.get(i), v.get(start + i));
            }
            let mut w = BitVec::zeros(n);
            w.xor_range_from(start, &piece);
            for i in 0..len {
                assert_eq!(w.get(start + i), piece.get(i));
            }
        }
    }

    #[test]
    fn byte_roundtrip_is_little_endian_in_bytes() {
        let v = BitVec::from_indices(12, &[0, 3, 8, 11]);
        let bytes = v.to_bytes();
        assert_eq!(bytes, vec![0b0000_1001, 0b0000_1001]);
        assert_eq!(BitVec::from_bytes(12, &bytes), v);
    }

    #[test]
    fn byte_roundtrip_random() {
        let mut rng = StdRng::seed_from_u64(3);
        for _ in 0..20 {
            let n = rng.gen_range(1..300);
            let v = random_vec(&mut rng, n);
            assert_eq!(BitVec::from_bytes(n, &v.to_bytes()), v);
        }
    }
}
