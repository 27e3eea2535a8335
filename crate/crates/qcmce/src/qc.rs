//! Quasi-cyclic block matrices: grids of circulants sharing one block size.
//!
//! The block entries live in the commutative ring GF(2)[x]/(x^p - 1), so a
//! QC matrix is a matrix over that ring. Inversion runs block-level
//! Gauss-Jordan with circulant pivots and falls back to dense GF(2)
//! elimination (refolded to circulant blocks) when no usable pivot exists:
//! the block ring has zero divisors, so an invertible matrix may still lack
//! an invertible entry in some pivot column.

use crate::bits::BitVec;
use crate::circulant::{cyclic_mul, Circulant};
use crate::dense::DenseGf2;
use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq)]
pub struct QcMatrix {
    rows0: usize,
    cols0: usize,
    p: usize,
    /// Row-major block grid.
    blocks: Vec<Circulant>,
}

impl QcMatrix {
    pub fn zero(rows0: usize, cols0: usize, p: usize) -> Self {
        QcMatrix {
            rows0,
            cols0,
            p,
            blocks: vec![Circulant::zero(p); rows0 * cols0],
        }
    }

    pub fn identity(n0: usize, p: usize) -> Self {
        let mut m = Self::zero(n0, n0, p);
        for i in 0..n0 {
            m.blocks[i * n0 + i] = Circulant::identity(p);
        }
        m
    }

    pub fn from_blocks(rows0: usize, cols0: usize, blocks: Vec<Circulant>) -> Result<Self> {
        if blocks.len() != rows0 * cols0 {
            return Err(Error::DimensionMismatch(format!(
                "expected {} blocks, got {}",
                rows0 * cols0,
                blocks.len()
            )));
        }
        let p = blocks
            .first()
            .map(Circulant::p)
            .ok_or_else(|| Error::DimensionMismatch("empty block grid".into()))?;
        for b in &blocks {
            if b.p() != p {
                return Err(Error::BlockSizeMismatch {
                    left: p,
                    right: b.p(),
                });
            }
        }
        Ok(QcMatrix {
            rows0,
            cols0,
            p,
            blocks,
        })
    }

    #[inline]
    pub fn rows0(&self) -> usize {
        self.rows0
    }

    #[inline]
    pub fn cols0(&self) -> usize {
        self.cols0
    }

    #[inline]
    pub fn p(&self) -> usize {
        self.p
    }

    /// Scalar row count `rows0 * p`.
    pub fn scalar_rows(&self) -> usize {
        self.rows0 * self.p
    }

    /// Scalar column count `cols0 * p`.
    pub fn scalar_cols(&self) -> usize {
        self.cols0 * self.p
    }

    #[inline]
    pub fn block(&self, i: usize, j: usize) -> &Circulant {
        &self.blocks[i * self.cols0 + j]
    }

    pub fn set_block(&mut self, i: usize, j: usize, c: Circulant) {
        assert_eq!(c.p(), self.p);
        self.blocks[i * self.cols0 + j] = c;
    }

    /// Scalar row weight, constant over every row in block-row `i`.
    pub fn block_row_weight(&self, i: usize) -> usize {
        (0..self.cols0).map(|j| self.block(i, j).weight()).sum()
    }

    /// Scalar column weight, constant over every column in block-column `j`.
    pub fn block_col_weight(&self, j: usize) -> usize {
        (0..self.rows0).map(|i| self.block(i, j).weight()).sum()
    }

    pub fn is_identity(&self) -> bool {
        self.rows0 == self.cols0
            && (0..self.rows0).all(|i| {
                (0..self.cols0).all(|j| {
                    if i == j {
                        self.block(i, j).is_identity()
                    } else {
                        self.block(i, j).is_zero()
                    }
                })
            })
    }

    /// Block matrix product.
    pub fn mul(&self, other: &QcMatrix) -> Result<QcMatrix> {
        if self.p != other.p {
            return Err(Error::BlockSizeMismatch {
                left: self.p,
                right: other.p,
            });
        }
        if self.cols0 != other.rows0 {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} * {}x{} blocks",
                self.rows0, self.cols0, other.rows0, other.cols0
            )));
        }
        let mut out = QcMatrix::zero(self.rows0, other.cols0, self.p);
        for i in 0..self.rows0 {
            for k in 0..self.cols0 {
                let a = self.block(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols0 {
                    let term = a.mul(other.block(k, j))?;
                    out.blocks[i * other.cols0 + j].add_assign(&term);
                }
            }
        }
        Ok(out)
    }

    /// Row vector times matrix: `v * self`, `|v| = rows0 * p`.
    pub fn vec_mul(&self, v: &BitVec) -> Result<BitVec> {
        if v.len() != self.scalar_rows() {
            return Err(Error::DimensionMismatch(format!(
                "vector length {} vs {} scalar rows",
                v.len(),
                self.scalar_rows()
            )));
        }
        let mut out = BitVec::zeros(self.scalar_cols());
        for i in 0..self.rows0 {
            let vi = v.extract(i * self.p, self.p);
            if vi.is_zero() {
                continue;
            }
            for j in 0..self.cols0 {
                let b = self.block(i, j);
                if b.is_zero() {
                    continue;
                }
                let prod = cyclic_mul(&vi, b.row());
                out.xor_range_from(j * self.p, &prod);
            }
        }
        Ok(out)
    }

    /// Block grid transposed, every circulant transposed.
    pub fn transpose(&self) -> QcMatrix {
        let mut out = QcMatrix::zero(self.cols0, self.rows0, self.p);
        for i in 0..self.rows0 {
            for j in 0..self.cols0 {
                out.blocks[j * self.rows0 + i] = self.block(i, j).transpose();
            }
        }
        out
    }

    /// Inverse over the block ring.
    ///
    /// Pivot search order: circulant pivots down the column, then block-row
    /// sums to synthesize an invertible pivot, then the dense fallback which
    /// settles invertibility exactly.
    pub fn inverse(&self) -> Result<QcMatrix> {
        if self.rows0 != self.cols0 {
            return Err(Error::DimensionMismatch(format!(
                "cannot invert {}x{} block matrix",
                self.rows0, self.cols0
            )));
        }
        let n = self.rows0;
        let mut a = self.blocks.clone();
        let mut inv: Vec<Circulant> = QcMatrix::identity(n, self.p).blocks;

        let idx = |r: usize, c: usize| r * n + c;
        for col in 0..n {
            let mut pivot: Option<(usize, Circulant)> = None;
            for r in col..n {
                if let Ok(pi) = a[idx(r, col)].inverse() {
                    pivot = Some((r, pi));
                    break;
                }
            }
            if pivot.is_none() {
                // Try summing a pair of remaining rows before giving up.
                'search: for r in col..n {
                    for r2 in col..n {
                        if r2 == r {
                            continue;
                        }
                        let cand = a[idx(r, col)].add(&a[idx(r2, col)]);
                        if let Ok(pi) = cand.inverse() {
                            for j in 0..n {
                                let t = a[idx(r2, j)].clone();
                                a[idx(r, j)].add_assign(&t);
                                let t = inv[idx(r2, j)].clone();
                                inv[idx(r, j)].add_assign(&t);
                            }
                            pivot = Some((r, pi));
                            break 'search;
                        }
                    }
                }
            }
            let Some((prow, pinv)) = pivot else {
                return self.dense_inverse();
            };
            if prow != col {
                for j in 0..n {
                    a.swap(idx(prow, j), idx(col, j));
                    inv.swap(idx(prow, j), idx(col, j));
                }
            }
            for j in 0..n {
                a[idx(col, j)] = pinv.mul(&a[idx(col, j)])?;
                inv[idx(col, j)] = pinv.mul(&inv[idx(col, j)])?;
            }
            for r in 0..n {
                if r == col || a[idx(r, col)].is_zero() {
                    continue;
                }
                let f = a[idx(r, col)].clone();
                for j in 0..n {
                    let t = f.mul(&a[idx(col, j)])?;
                    a[idx(r, j)].add_assign(&t);
                    let t = f.mul(&inv[idx(col, j)])?;
                    inv[idx(r, j)].add_assign(&t);
                }
            }
        }
        QcMatrix::from_blocks(n, n, inv)
    }

    fn dense_inverse(&self) -> Result<QcMatrix> {
        let n = self.rows0;
        let p = self.p;
        let size = n * p;
        let mut dense = DenseGf2::zeros(size, size);
        for bi in 0..n {
            for bj in 0..n {
                for s in self.block(bi, bj).support() {
                    for r in 0..p {
                        dense.set(bi * p + r, bj * p + (s + r) % p, true);
                    }
                }
            }
        }
        let inv = dense.invert().ok_or(Error::Singular)?;
        // The inverse of a block-circulant matrix is block-circulant, so the
        // first row of each block determines it.
        let mut blocks = Vec::with_capacity(n * n);
        for bi in 0..n {
            for bj in 0..n {
                let mut row = BitVec::zeros(p);
                for c in 0..p {
                    if inv.get(bi * p, bj * p + c) {
                        row.set(c, true);
                    }
                }
                blocks.push(Circulant::from_row(row));
            }
        }
        QcMatrix::from_blocks(n, n, blocks)
    }
}

impl std::fmt::Debug for QcMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "QcMatrix[{}x{} blocks, p={}]", self.rows0, self.cols0, self.p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn random_qc(rng: &mut StdRng, rows0: usize, cols0: usize, p: usize, density: f64) -> QcMatrix {
        let mut m = QcMatrix::zero(rows0, cols0, p);
        for i in 0..rows0 {
            for j in 0..cols0 {
                let mut row = BitVec::zeros(p);
                for b in 0..p {
                    if rng.gen_bool(density) {
                        row.set(b, true);
                    }
                }
                m.set_block(i, j, Circulant::from_row(row));
            }
        }
        m
    }

    #[test]
    fn identity_is_neutral() {
        let mut rng = StdRng::seed_from_u64(21);
        let m = random_qc(&mut rng, 3, 3, 16, 0.4);
        let id = QcMatrix::identity(3, 16);
        assert_eq!(id.mul(&m).unwrap(), m);
        assert_eq!(m.mul(&id).unwrap(), m);
    }

    #[test]
    fn single_block_reduces_to_circulant_ops() {
        let a = Circulant::from_support(9, &[0, 2, 5]).unwrap();
        let b = Circulant::from_support(9, &[1, 4]).unwrap();
        let qa = QcMatrix::from_blocks(1, 1, vec![a.clone()]).unwrap();
        let qb = QcMatrix::from_blocks(1, 1, vec![b.clone()]).unwrap();
        assert_eq!(*qa.mul(&qb).unwrap().block(0, 0), a.mul(&b).unwrap());
        assert_eq!(*qa.inverse().unwrap().block(0, 0), a.inverse().unwrap());
    }

    #[test]
    fn mul_is_associative() {
        let mut rng = StdRng::seed_from_u64(22);
        for _ in 0..5 {
            let a = random_qc(&mut rng, 2, 3, 8, 0.4);
            let b = random_qc(&mut rng, 3, 2, 8, 0.4);
            let c = random_qc(&mut rng, 2, 2, 8, 0.4);
            let left = a.mul(&b).unwrap().mul(&c).unwrap();
            let right = a.mul(&b.mul(&c).unwrap()).unwrap();
            assert_eq!(left, right);
        }
    }

    #[test]
    fn inverse_times_self_is_identity() {
        let mut rng = StdRng::seed_from_u64(23);
        let mut done = 0;
        while done < 10 {
            let n0 = rng.gen_range(1..4);
            let p = rng.gen_range(2..24);
            let m = random_qc(&mut rng, n0, n0, p, 0.5);
            if let Ok(inv) = m.inverse() {
                assert!(m.mul(&inv).unwrap().is_identity());
                assert!(inv.mul(&m).unwrap().is_identity());
                done += 1;
            }
        }
    }

    #[test]
    fn vec_mul_zero_and_unit_rows() {
        let mut rng = StdRng::seed_from_u64(24);
        let m = random_qc(&mut rng, 2, 3, 8, 0.4);
        let zero = BitVec::zeros(16);
        assert!(m.vec_mul(&zero).unwrap().is_zero());

        // e_j * M is scalar row j of M.
        for j in 0..16 {
            let e = BitVec::from_indices(16, &[j]);
            let row = m.vec_mul(&e).unwrap();
            let (bi, s) = (j / 8, j % 8);
            for c in 0..24 {
                let (bj, t) = (c / 8, c % 8);
                let expect = m.block(bi, bj).row().get((t + 8 - s) % 8);
                assert_eq!(row.get(c), expect, "j={j} c={c}");
            }
        }
    }

    #[test]
    fn transpose_involution_and_shift() {
        let c = Circulant::from_support(5, &[1]).unwrap();
        let m = QcMatrix::from_blocks(1, 1, vec![c]).unwrap();
        assert_eq!(m.transpose().block(0, 0).support(), vec![4]);

        let mut rng = StdRng::seed_from_u64(25);
        let m = random_qc(&mut rng, 2, 4, 8, 0.5);
        assert_eq!(m.transpose().transpose(), m);
        let id = QcMatrix::identity(3, 8);
        assert_eq!(id.transpose(), id);
    }

    #[test]
    fn dense_fallback_matches_on_hostile_pivots() {
        // All-even-weight first column blocks force the fallback path.
        let p = 7;
        let mut m = QcMatrix::zero(2, 2, p);
        m.set_block(0, 0, Circulant::from_support(p, &[0, 1]).unwrap());
        m.set_block(1, 0, Circulant::from_support(p, &[2, 5]).unwrap());
        m.set_block(0, 1, Circulant::from_support(p, &[0, 3]).unwrap());
        m.set_block(1, 1, Circulant::from_support(p, &[0]).unwrap());
        match m.inverse() {
            Ok(inv) => {
                assert!(m.mul(&inv).unwrap().is_identity());
            }
            Err(Error::Singular) => {}
            Err(e) => panic!("unexpected error {e}"),
        }
    }
}
