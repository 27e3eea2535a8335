//! Generation of the private-key objects.
//!
//! `generate_h` draws circulant supports by rejection sampling under a
//! pooled distinct-differences rule (a random difference family), which
//! guarantees the Tanner graph has girth at least 6. `generate_q` realizes a
//! sparse block-weight grid with minimal dispersion around the target
//! average weight `m`, and `generate_s` draws a dense invertible scrambling
//! matrix.

use std::collections::HashSet;

use rand::Rng;

use crate::circulant::Circulant;
use crate::error::{Error, Result};
use crate::profile::{DegreeProfile, QProfile};
use crate::qc::QcMatrix;

/// Rejection-sampling budget for one circulant support.
const SUPPORT_ATTEMPTS: u64 = 100_000;
/// Resampling budget for whole-matrix invertibility.
const MATRIX_ATTEMPTS: u64 = 1_000;

/// Draw `k` distinct values from `0..n`, partial Fisher-Yates over a sparse
/// index map. Deterministic given the rng state.
pub fn sample_distinct<R: Rng>(n: usize, k: usize, rng: &mut R) -> Vec<usize> {
    assert!(k <= n);
    let mut swapped: std::collections::HashMap<usize, usize> = std::collections::HashMap::new();
    let mut out = Vec::with_capacity(k);
    for i in 0..k {
        let j = rng.gen_range(i..n);
        let vj = *swapped.get(&j).unwrap_or(&j);
        let vi = *swapped.get(&i).unwrap_or(&i);
        out.push(vj);
        swapped.insert(j, vi);
    }
    out
}

/// Pooled distinct-differences check over block supports.
///
/// Accepts iff no cyclic difference `(a - b) mod p` (over ordered pairs of
/// distinct elements, within each block) repeats anywhere in the pool. This
/// is exactly the condition for `[C(S_0) | ... | C(S_k)]` to have no
/// length-4 cycles in its Tanner graph.
pub fn difference_family_ok(p: usize, supports: &[Vec<usize>]) -> bool {
    let mut seen = HashSet::new();
    for s in supports {
        if !insert_differences(p, s, &mut seen) {
            return false;
        }
    }
    true
}

fn block_differences(p: usize, support: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(support.len() * support.len().saturating_sub(1));
    for &a in support {
        for &b in support {
            if a != b {
                out.push((a + p - b) % p);
            }
        }
    }
    out
}

fn insert_differences(p: usize, support: &[usize], pool: &mut HashSet<usize>) -> bool {
    let diffs = block_differences(p, support);
    for (i, &d) in diffs.iter().enumerate() {
        if !pool.insert(d) {
            // roll back the partial insert
            for &d2 in &diffs[..i] {
                pool.remove(&d2);
            }
            return false;
        }
    }
    true
}

fn remove_differences(p: usize, support: &[usize], pool: &mut HashSet<usize>) {
    for d in block_differences(p, support) {
        pool.remove(&d);
    }
}

/// Generate the private parity-check matrix `[H_0 | ... | H_{n0-1}]`.
///
/// Block `i` gets column weight `d_v^(i)`; the pooled difference family
/// keeps the girth at 6 or more; the last block is resampled until
/// invertible so a systematic generator exists.
pub fn generate_h<R: Rng>(profile: &DegreeProfile, rng: &mut R) -> Result<QcMatrix> {
    let p = profile.p();
    let n0 = profile.n0();
    let diff_count: usize = profile
        .dv_per_block()
        .iter()
        .map(|&d| d * (d - 1))
        .sum();
    if diff_count > p - 1 {
        return Err(Error::InfeasibleProfile(format!(
            "{diff_count} pairwise differences cannot be distinct modulo {p}"
        )));
    }
    let last_dv = profile.dv(n0 - 1);
    if last_dv % 2 == 0 {
        return Err(Error::InfeasibleProfile(format!(
            "last block weight {last_dv} is even, so the block is always singular; \
             reorder the profile to end on an odd weight"
        )));
    }

    let mut pool = HashSet::new();
    let mut blocks: Vec<Circulant> = Vec::with_capacity(n0);
    for (i, &dv) in profile.dv_per_block().iter().enumerate() {
        let last = i == n0 - 1;
        let mut attempts = 0u64;
        loop {
            attempts += 1;
            if attempts > SUPPORT_ATTEMPTS {
                return Err(Error::GenerationExhausted {
                    what: "parity-check block support",
                    attempts,
                });
            }
            let mut support = sample_distinct(p, dv, rng);
            support.sort_unstable();
            if !insert_differences(p, &support, &mut pool) {
                continue;
            }
            let block = Circulant::from_support(p, &support)?;
            if last && block.inverse().is_err() {
                remove_differences(p, &support, &mut pool);
                continue;
            }
            blocks.push(block);
            break;
        }
    }
    QcMatrix::from_blocks(1, n0, blocks)
}

/// Integer block-weight grid for Q: all cells start at `floor(m / n0)` and
/// the remaining weight is spread along random permutation patterns, so each
/// block-row and block-column sum lands in `{floor(m), ceil(m)}` and the
/// average is exactly `m`.
pub fn q_block_weights<R: Rng>(qprofile: &QProfile, rng: &mut R) -> Vec<Vec<usize>> {
    let n0 = qprofile.n0();
    let total = (qprofile.m_target() * num_rational::Ratio::from_integer(n0 as i64)).to_integer()
        as usize;
    let base = total / (n0 * n0);
    let mut rem = total - base * n0 * n0;
    let mut grid = vec![vec![base; n0]; n0];
    while rem > 0 {
        let perm = sample_distinct(n0, n0, rng);
        if rem >= n0 {
            for (i, &j) in perm.iter().enumerate() {
                grid[i][j] += 1;
            }
            rem -= n0;
        } else {
            let rows = sample_distinct(n0, rem, rng);
            for &i in &rows {
                grid[i][perm[i]] += 1;
            }
            rem = 0;
        }
    }
    grid
}

/// Whether the GF(2) matrix with bitmask rows is invertible (n <= 64).
fn gf2_rows_invertible(rows: &[u64]) -> bool {
    let mut rows = rows.to_vec();
    let n = rows.len();
    for col in 0..n {
        let Some(pivot) = (col..n).find(|&r| rows[r] >> col & 1 == 1) else {
            return false;
        };
        rows.swap(col, pivot);
        for r in 0..n {
            if r != col && rows[r] >> col & 1 == 1 {
                rows[r] ^= rows[col];
            }
        }
    }
    true
}

/// Parity of the block-weight grid as bitmask rows. Evaluation at `x = 1`
/// is a ring homomorphism, so Q can only be invertible when this GF(2)
/// matrix is.
fn grid_parity_rows(grid: &[Vec<usize>]) -> Vec<u64> {
    grid.iter()
        .map(|row| {
            row.iter()
                .enumerate()
                .fold(0u64, |acc, (j, &w)| acc | (((w % 2) as u64) << j))
        })
        .collect()
}

/// Move one unit of weight around a random rectangle:
/// `(i1,j1)-1, (i1,j2)+1, (i2,j1)+1, (i2,j2)-1`. Preserves every row and
/// column sum while toggling four block parities.
fn rectangle_move<R: Rng>(grid: &mut [Vec<usize>], rng: &mut R) {
    let n0 = grid.len();
    if n0 < 2 {
        return;
    }
    for _ in 0..32 {
        let i1 = rng.gen_range(0..n0);
        let i2 = rng.gen_range(0..n0);
        let j1 = rng.gen_range(0..n0);
        let j2 = rng.gen_range(0..n0);
        if i1 == i2 || j1 == j2 {
            continue;
        }
        if grid[i1][j1] > 0 && grid[i2][j2] > 0 {
            grid[i1][j1] -= 1;
            grid[i1][j2] += 1;
            grid[i2][j1] += 1;
            grid[i2][j2] -= 1;
            return;
        }
    }
}

/// Generate the sparse transformation matrix Q: each block a random
/// circulant with the grid weight, resampled until the whole matrix is
/// invertible.
///
/// The permutation-pattern grid can land on weight parities that force
/// singularity for any block choice (two equal parity rows, say), so the
/// grid is stirred with sum-preserving rectangle moves until the parity
/// matrix is invertible before blocks are drawn.
pub fn generate_q<R: Rng>(qprofile: &QProfile, rng: &mut R) -> Result<QcMatrix> {
    let n0 = qprofile.n0();
    let p = qprofile.p();
    if qprofile.m_ceil() > p {
        return Err(Error::InfeasibleProfile(format!(
            "ceil(m) = {} exceeds block size {p}",
            qprofile.m_ceil()
        )));
    }
    let mut attempts = 0u64;
    loop {
        attempts += 1;
        if attempts > MATRIX_ATTEMPTS {
            return Err(Error::GenerationExhausted {
                what: "invertible Q",
                attempts,
            });
        }
        let mut grid = q_block_weights(qprofile, rng);
        let mut stirred = 0;
        while !gf2_rows_invertible(&grid_parity_rows(&grid)) {
            if stirred > 64 * n0 {
                break;
            }
            rectangle_move(&mut grid, rng);
            stirred += 1;
        }
        if !gf2_rows_invertible(&grid_parity_rows(&grid)) {
            continue;
        }
        if grid.iter().flatten().any(|&w| w > p) {
            return Err(Error::InfeasibleProfile(format!(
                "a block weight exceeds block size {p}"
            )));
        }
        let mut q = QcMatrix::zero(n0, n0, p);
        for i in 0..n0 {
            for j in 0..n0 {
                if grid[i][j] > 0 {
                    let mut support = sample_distinct(p, grid[i][j], rng);
                    support.sort_unstable();
                    q.set_block(i, j, Circulant::from_support(p, &support)?);
                }
            }
        }
        if q.inverse().is_ok() {
            return Ok(q);
        }
    }
}

/// Generate a dense random invertible `k0 x k0` QC scrambling matrix; block
/// weights concentrate around `p / 2`.
pub fn generate_s<R: Rng>(k0: usize, p: usize, rng: &mut R) -> Result<QcMatrix> {
    let mut attempts = 0u64;
    loop {
        attempts += 1;
        if attempts > MATRIX_ATTEMPTS {
            return Err(Error::GenerationExhausted {
                what: "invertible S",
                attempts,
            });
        }
        let mut s = QcMatrix::zero(k0, k0, p);
        for i in 0..k0 {
            for j in 0..k0 {
                let mut row = crate::bits::BitVec::zeros(p);
                for b in 0..p {
                    if rng.gen_bool(0.5) {
                        row.set(b, true);
                    }
                }
                s.set_block(i, j, Circulant::from_row(row));
            }
        }
        if s.inverse().is_ok() {
            return Ok(s);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Ratio;
    use rand::rngs::StdRng;
    use rand::SeedableRng;

    #[test]
    fn difference_family_examples() {
        // single block, d_v = 2, p = 5: differences {1, 4}
        assert!(difference_family_ok(5, &[vec![0, 1]]));
        // two blocks at p = 7: pooled {1,6} and {3,4}, all distinct
        assert!(difference_family_ok(7, &[vec![0, 1], vec![0, 3]]));
        // repeated difference across blocks
        assert!(!difference_family_ok(7, &[vec![0, 1], vec![2, 3]]));
        // difference p/2 pairs with itself when p is even
        assert!(!difference_family_ok(8, &[vec![0, 4]]));
    }

    #[test]
    fn sample_distinct_is_distinct_and_in_range() {
        let mut rng = StdRng::seed_from_u64(5);
        for _ in 0..50 {
            let v = sample_distinct(40, 12, &mut rng);
            let set: HashSet<_> = v.iter().collect();
            assert_eq!(set.len(), 12);
            assert!(v.iter().all(|&x| x < 40));
        }
    }

    #[test]
    fn generate_h_obeys_profile() {
        let mut rng = StdRng::seed_from_u64(42);
        let profile = DegreeProfile::new(4, 64, vec![3, 4, 4, 5], 0.0).unwrap();
        let h = generate_h(&profile, &mut rng).unwrap();
        assert_eq!(h.rows0(), 1);
        assert_eq!(h.cols0(), 4);
        for j in 0..4 {
            assert_eq!(h.block(0, j).weight(), profile.dv(j));
        }
        assert_eq!(h.block_row_weight(0), profile.dc());
        // last block invertible by construction
        assert!(h.block(0, 3).inverse().is_ok());
        // supports form a difference family
        let supports: Vec<Vec<usize>> = (0..4).map(|j| h.block(0, j).support()).collect();
        assert!(difference_family_ok(64, &supports));
    }

    #[test]
    fn generate_h_rejects_even_last_block() {
        let mut rng = StdRng::seed_from_u64(1);
        let profile = DegreeProfile::new(2, 64, vec![3, 4], 0.0).unwrap();
        assert!(matches!(
            generate_h(&profile, &mut rng),
            Err(Error::InfeasibleProfile(_))
        ));
    }

    #[test]
    fn generate_h_rejects_infeasible_difference_count() {
        let mut rng = StdRng::seed_from_u64(1);
        let profile = DegreeProfile::new(2, 16, vec![4, 5], 0.0).unwrap();
        // 12 + 20 = 32 > 15 distinct nonzero differences available
        assert!(matches!(
            generate_h(&profile, &mut rng),
            Err(Error::InfeasibleProfile(_))
        ));
    }

    #[test]
    fn q_grid_has_minimal_dispersion() {
        let mut rng = StdRng::seed_from_u64(7);
        let qp = QProfile::new(4, 64, Ratio::new(9, 2)).unwrap(); // m = 4.5
        for _ in 0..20 {
            let grid = q_block_weights(&qp, &mut rng);
            let row_sums: Vec<usize> = grid.iter().map(|r| r.iter().sum()).collect();
            let col_sums: Vec<usize> =
                (0..4).map(|j| grid.iter().map(|r| r[j]).sum()).collect();
            for sums in [&row_sums, &col_sums] {
                assert_eq!(sums.iter().filter(|&&s| s == 4).count(), 2);
                assert_eq!(sums.iter().filter(|&&s| s == 5).count(), 2);
            }
            let total: usize = row_sums.iter().sum();
            assert_eq!(total, 18); // 4 * 4.5
        }
    }

    #[test]
    fn generate_q_realizes_m_and_inverts() {
        let mut rng = StdRng::seed_from_u64(8);
        let qp = QProfile::new(4, 64, Ratio::new(9, 2)).unwrap();
        let q = generate_q(&qp, &mut rng).unwrap();
        for i in 0..4 {
            let w = q.block_row_weight(i);
            assert!(w == 4 || w == 5);
            let w = q.block_col_weight(i);
            assert!(w == 4 || w == 5);
        }
        let total: usize = (0..4).map(|i| q.block_row_weight(i)).sum();
        assert_eq!(total, 18);
        assert!(q.inverse().is_ok());
    }

    #[test]
    fn generate_q_with_m_one_is_a_block_permutation() {
        let mut rng = StdRng::seed_from_u64(9);
        let qp = QProfile::new(4, 32, Ratio::from_integer(1)).unwrap();
        let q = generate_q(&qp, &mut rng).unwrap();
        for i in 0..4 {
            assert_eq!(q.block_row_weight(i), 1);
            assert_eq!(q.block_col_weight(i), 1);
        }
    }

    #[test]
    fn generate_s_is_invertible_and_dense() {
        let mut rng = StdRng::seed_from_u64(10);
        let s = generate_s(3, 32, &mut rng).unwrap();
        assert!(s.inverse().is_ok());
        for i in 0..3 {
            for j in 0..3 {
                let w = s.block(i, j).weight();
                assert!(w > 32 / 4 && w < 32 * 3 / 4, "weight {w} not near p/2");
            }
        }
        // k0 = 1 reduces to one odd-weight circulant
        let s1 = generate_s(1, 33, &mut rng).unwrap();
        assert_eq!(s1.block(0, 0).weight() % 2, 1);
    }
}
