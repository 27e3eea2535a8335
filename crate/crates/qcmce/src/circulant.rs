//! Binary circulant matrices.
//!
//! A `p x p` circulant over GF(2) is fully described by its first row; row
//! `j` is the first row cyclically shifted right by `j`. The map
//! `first_row -> polynomial mod x^p - 1` is a ring isomorphism, so products
//! are cyclic convolutions and inverses come from the extended Euclidean
//! algorithm on GF(2)[x]. Nothing here ever materializes the dense matrix.

use crate::bits::{xor_bit_range, BitVec};
use crate::error::{Error, Result};

/// Entry (j, k) of the represented matrix is `first_row[(k - j) mod p]`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Circulant {
    row: BitVec,
}

impl Circulant {
    pub fn zero(p: usize) -> Self {
        assert!(p > 0, "block size must be positive");
        Circulant {
            row: BitVec::zeros(p),
        }
    }

    pub fn identity(p: usize) -> Self {
        let mut c = Self::zero(p);
        c.row.set(0, true);
        c
    }

    /// Build from the set of nonzero first-row positions.
    pub fn from_support(p: usize, support: &[usize]) -> Result<Self> {
        let mut c = Self::zero(p);
        for &i in support {
            if i >= p {
                return Err(Error::IndexOutOfRange { index: i, p });
            }
            if c.row.get(i) {
                return Err(Error::DomainError(format!(
                    "duplicate support index {i} in circulant"
                )));
            }
            c.row.set(i, true);
        }
        Ok(c)
    }

    pub fn from_row(row: BitVec) -> Self {
        assert!(row.len() > 0, "block size must be positive");
        Circulant { row }
    }

    #[inline]
    pub fn p(&self) -> usize {
        self.row.len()
    }

    #[inline]
    pub fn row(&self) -> &BitVec {
        &self.row
    }

    pub fn weight(&self) -> usize {
        self.row.weight()
    }

    pub fn support(&self) -> Vec<usize> {
        self.row.support()
    }

    pub fn is_zero(&self) -> bool {
        self.row.is_zero()
    }

    pub fn is_identity(&self) -> bool {
        self.weight() == 1 && self.row.get(0)
    }

    pub fn add_assign(&mut self, other: &Circulant) {
        self.row.xor_assign(&other.row);
    }

    pub fn add(&self, other: &Circulant) -> Circulant {
        let mut out = self.clone();
        out.add_assign(other);
        out
    }

    /// Matrix product (equivalently polynomial product mod `x^p - 1`).
    pub fn mul(&self, other: &Circulant) -> Result<Circulant> {
        if self.p() != other.p() {
            return Err(Error::BlockSizeMismatch {
                left: self.p(),
                right: other.p(),
            });
        }
        Ok(Circulant {
            row: cyclic_mul(&self.row, &other.row),
        })
    }

    /// Multiplicative inverse, if `gcd(row(x), x^p - 1) = 1`.
    ///
    /// Every even-weight circulant is singular: `x = 1` is then a shared root
    /// with `x^p - 1`.
    pub fn inverse(&self) -> Result<Circulant> {
        let p = self.p();
        if self.weight() % 2 == 0 {
            return Err(Error::Singular);
        }
        let row = poly_inverse_mod(self.row.words(), p).ok_or(Error::Singular)?;
        Ok(Circulant { row })
    }

    /// Transpose: first row reversed modulo `p` (`c'[i] = c[(p - i) mod p]`).
    pub fn transpose(&self) -> Circulant {
        let p = self.p();
        let mut row = BitVec::zeros(p);
        for i in self.row.support() {
            row.set((p - i) % p, true);
        }
        Circulant { row }
    }
}

impl std::fmt::Debug for Circulant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Circulant[p={}; w={}]", self.p(), self.weight())
    }
}

/// Cyclic convolution of two equal-length bit vectors.
///
/// Sparse operands use schoolbook support convolution; otherwise the sparser
/// operand's support drives word-level shift-XOR accumulation over the other.
pub(crate) fn cyclic_mul(a: &BitVec, b: &BitVec) -> BitVec {
    let p = a.len();
    debug_assert_eq!(p, b.len());
    let (wa, wb) = (a.weight(), b.weight());
    let (sparse, dense) = if wa <= wb { (a, b) } else { (b, a) };
    let mut out = BitVec::zeros(p);
    if sparse.weight().min(dense.weight()) <= 64 && sparse.weight() * dense.weight() <= 4 * p {
        for i in sparse.support() {
            for j in dense.support() {
                let k = i + j;
                out.flip(if k >= p { k - p } else { k });
            }
        }
    } else {
        for i in sparse.support() {
            out.xor_rotated(dense, i);
        }
    }
    out
}

// --- GF(2)[x] scratch polynomials for the extended Euclidean inverse ---

struct Poly {
    words: Vec<u64>,
}

impl Poly {
    fn zero(capacity_bits: usize) -> Self {
        Poly {
            words: vec![0; capacity_bits.div_ceil(64)],
        }
    }

    fn degree(&self) -> Option<usize> {
        for (w, &word) in self.words.iter().enumerate().rev() {
            if word != 0 {
                return Some(w * 64 + 63 - word.leading_zeros() as usize);
            }
        }
        None
    }

    /// self ^= other << shift
    fn xor_shl(&mut self, other: &Poly, shift: usize, other_deg: usize) {
        xor_bit_range(&mut self.words, shift, &other.words, 0, other_deg + 1);
    }
}

/// Inverse of `a(x)` modulo `x^p - 1` over GF(2), or `None` when the gcd is
/// not 1. Iterative extended Euclid; both remainder and Bezout tracks stay
/// within `p + 1` bits.
fn poly_inverse_mod(a_words: &[u64], p: usize) -> Option<BitVec> {
    let cap = p + 1;
    // r0 = x^p + 1, r1 = a, with u_i * a = r_i (mod x^p + 1)
    let mut r0 = Poly::zero(cap);
    r0.words[0] |= 1;
    r0.words[p / 64] |= 1u64 << (p % 64);
    let mut r1 = Poly::zero(cap);
    let n_words = a_words.len().min(r1.words.len());
    r1.words[..n_words].copy_from_slice(&a_words[..n_words]);
    let mut u0 = Poly::zero(cap);
    let mut u1 = Poly::zero(cap);
    u1.words[0] |= 1;

    loop {
        let Some(mut d0) = r0.degree() else {
            // r0 = 0: gcd is r1 from the previous swap
            break;
        };
        let Some(d1) = r1.degree() else {
            break;
        };
        while d0 >= d1 {
            let s = d0 - d1;
            r0.xor_shl(&r1, s, d1);
            if let Some(du1) = u1.degree() {
                u0.xor_shl(&u1, s, du1);
            }
            match r0.degree() {
                Some(d) => d0 = d,
                None => break,
            }
        }
        std::mem::swap(&mut r0, &mut r1);
        std::mem::swap(&mut u0, &mut u1);
        if r1.degree().is_none() {
            break;
        }
    }

    // gcd sits in r0 when r1 == 0.
    let (gcd, bezout) = if r1.degree().is_none() {
        (&r0, &u0)
    } else {
        (&r1, &u1)
    };
    if gcd.degree() != Some(0) {
        return None;
    }
    let mut row = BitVec::zeros(p);
    for i in 0..p {
        if (bezout.words[i / 64] >> (i % 64)) & 1 == 1 {
            row.set(i, true);
        }
    }
    debug_assert!(bezout.degree().map_or(true, |d| d < p));
    Some(row)
}
