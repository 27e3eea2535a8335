//! Dense bit-packed GF(2) matrices.
//!
//! Only used as the last-resort pivot fallback in block-level QC inversion;
//! the primary representation never leaves first-row form.

/// Row-major dense matrix over GF(2); each row is a slice of `u64` words.
pub(crate) struct DenseGf2 {
    pub rows: usize,
    pub cols: usize,
    wpr: usize,
    bits: Vec<u64>,
}

impl DenseGf2 {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let wpr = cols.div_ceil(64);
        DenseGf2 {
            rows,
            cols,
            wpr,
            bits: vec![0; rows * wpr],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> bool {
        (self.bits[r * self.wpr + c / 64] >> (c % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: bool) {
        let mask = 1u64 << (c % 64);
        let w = &mut self.bits[r * self.wpr + c / 64];
        if v {
            *w |= mask;
        } else {
            *w &= !mask;
        }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        let (a, b) = (a.min(b), a.max(b));
        let (lo, hi) = self.bits.split_at_mut(b * self.wpr);
        lo[a * self.wpr..(a + 1) * self.wpr].swap_with_slice(&mut hi[..self.wpr]);
    }

    /// rows[dst] ^= rows[src]
    fn xor_row(&mut self, dst: usize, src: usize) {
        debug_assert_ne!(dst, src);
        let (a, b) = (dst.min(src), dst.max(src));
        let (lo, hi) = self.bits.split_at_mut(b * self.wpr);
        let row_a = &mut lo[a * self.wpr..(a + 1) * self.wpr];
        let row_b = &mut hi[..self.wpr];
        if dst < src {
            for (x, y) in row_a.iter_mut().zip(row_b.iter()) {
                *x ^= *y;
            }
        } else {
            for (y, x) in row_b.iter_mut().zip(row_a.iter()) {
                *y ^= *x;
            }
        }
    }

    /// Gauss-Jordan inverse; `None` when singular. Destroys `self`.
    pub fn invert(mut self) -> Option<DenseGf2> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut inv = DenseGf2::identity(n);
        for col in 0..n {
            let pivot = (col..n).find(|&r| self.get(r, col))?;
            self.swap_rows(col, pivot);
            inv.swap_rows(col, pivot);
            for r in 0..n {
                if r != col && self.get(r, col) {
                    self.xor_row(r, col);
                    inv.xor_row(r, col);
                }
            }
        }
        Some(inv)
    }
}
