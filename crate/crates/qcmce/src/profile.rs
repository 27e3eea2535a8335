//! Degree profiles of the private code and of the transformation matrix.
//!
//! An irregular QC-LDPC parity-check row `[H_0 | ... | H_{n0-1}]` is
//! described by one column weight per circulant block. The check degree is
//! the sum of the block weights and is the same for every row. Degree
//! distributions are carried both node-perspective (`v`, `c`) and
//! edge-perspective (`lambda`, `rho`).

use num_rational::Ratio;

use crate::error::{Error, Result};

/// Exact rational used for average weights (`m`, `d_v`).
pub type Rational = Ratio<i64>;

/// Per-block column weights of the private parity-check matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegreeProfile {
    n0: usize,
    p: usize,
    dv_per_block: Vec<usize>,
}

impl DegreeProfile {
    /// Validate and build a profile.
    ///
    /// `security_bits` is the enumeration floor: every block must admit at
    /// least `2^security_bits` choices, i.e. `log2 C(p, d_v^(i)) >=
    /// security_bits`. Pass 0 to disable (toy codes).
    pub fn new(n0: usize, p: usize, dv_per_block: Vec<usize>, security_bits: f64) -> Result<Self> {
        if n0 == 0 || dv_per_block.len() != n0 {
            return Err(Error::InvalidProfile(format!(
                "need {} block weights, got {}",
                n0,
                dv_per_block.len()
            )));
        }
        if p < 2 {
            return Err(Error::InvalidProfile("block size must be at least 2".into()));
        }
        for (i, &dv) in dv_per_block.iter().enumerate() {
            if dv < 2 {
                return Err(Error::InvalidProfile(format!(
                    "block {i}: column weight {dv} below 2"
                )));
            }
            if dv >= p {
                return Err(Error::InvalidProfile(format!(
                    "block {i}: column weight {dv} not below block size {p}"
                )));
            }
            let enumeration = log2_binomial(p, dv);
            if enumeration < security_bits {
                return Err(Error::InvalidProfile(format!(
                    "block {i}: log2 C({p}, {dv}) = {enumeration:.1} below the {security_bits} bit floor"
                )));
            }
        }
        Ok(DegreeProfile {
            n0,
            p,
            dv_per_block,
        })
    }

    #[inline]
    pub fn n0(&self) -> usize {
        self.n0
    }

    #[inline]
    pub fn p(&self) -> usize {
        self.p
    }

    pub fn n(&self) -> usize {
        self.n0 * self.p
    }

    pub fn dv_per_block(&self) -> &[usize] {
        &self.dv_per_block
    }

    pub fn dv(&self, block: usize) -> usize {
        self.dv_per_block[block]
    }

    /// Constant check degree `d_c = sum of block weights`.
    pub fn dc(&self) -> usize {
        self.dv_per_block.iter().sum()
    }

    /// Average column weight as an exact rational.
    pub fn dv_avg(&self) -> Rational {
        Rational::new(self.dc() as i64, self.n0 as i64)
    }

    pub fn is_regular(&self) -> bool {
        self.dv_per_block.iter().all(|&d| d == self.dv_per_block[0])
    }

    /// Edge fraction of block `j`: `d_v^(j) / sum_i d_v^(i)`.
    pub fn edge_fraction(&self, block: usize) -> f64 {
        self.dv_per_block[block] as f64 / self.dc() as f64
    }
}

/// `log2 C(n, k)` through the log-gamma function.
pub fn log2_binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    (ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)) / std::f64::consts::LN_2
}

fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|i| (i as f64).ln()).sum()
}

/// Node- and edge-perspective degree distributions.
///
/// Coefficients are keyed by node degree `d`; the conventional polynomials
/// put that mass on `x^{d-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreePolynomials {
    /// Fraction of variable nodes of each degree.
    pub v: Vec<(usize, f64)>,
    /// Fraction of check nodes of each degree.
    pub c: Vec<(usize, f64)>,
    /// Fraction of edges touching variable nodes of each degree.
    pub lambda: Vec<(usize, f64)>,
    /// Fraction of edges touching check nodes of each degree.
    pub rho: Vec<(usize, f64)>,
}

/// Node-perspective distributions straight from the block structure
/// (mass `1/n0` per block, merging equal degrees; checks are a point mass at
/// `d_c`), then translated to edge perspective by `lambda_d ∝ d * v_d`.
pub fn degree_polynomials(profile: &DegreeProfile) -> DegreePolynomials {
    let n0 = profile.n0() as f64;
    let mut v: Vec<(usize, f64)> = Vec::new();
    let mut degrees: Vec<usize> = profile.dv_per_block().to_vec();
    degrees.sort_unstable();
    for d in degrees {
        match v.iter_mut().find(|(deg, _)| *deg == d) {
            Some((_, frac)) => *frac += 1.0 / n0,
            None => v.push((d, 1.0 / n0)),
        }
    }
    let c = vec![(profile.dc(), 1.0)];
    let lambda = node_to_edge(&v);
    let rho = node_to_edge(&c);
    DegreePolynomials { v, c, lambda, rho }
}

/// `edge_d = d * node_d / sum_j j * node_j`.
pub fn node_to_edge(node: &[(usize, f64)]) -> Vec<(usize, f64)> {
    let total: f64 = node.iter().map(|&(d, f)| d as f64 * f).sum();
    node.iter()
        .map(|&(d, f)| (d, d as f64 * f / total))
        .collect()
}

/// Inverse translation: `node_d ∝ edge_d / d`.
pub fn edge_to_node(edge: &[(usize, f64)]) -> Vec<(usize, f64)> {
    let total: f64 = edge.iter().map(|&(d, f)| f / d as f64).sum();
    edge.iter()
        .map(|&(d, f)| (d, f / d as f64 / total))
        .collect()
}

/// Target shape of the sparse transformation matrix Q.
///
/// Q is an `n0 x n0` grid of circulants whose block weights `w_ij` realize
/// an average row/column weight `m` with minimal dispersion: every scalar
/// row and column weight lies in `{floor(m), ceil(m)}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QProfile {
    n0: usize,
    p: usize,
    m_target: Rational,
}

impl QProfile {
    pub fn new(n0: usize, p: usize, m_target: Rational) -> Result<Self> {
        if n0 == 0 || p == 0 {
            return Err(Error::InvalidProfile("empty Q grid".into()));
        }
        if m_target <= Rational::from_integer(0) {
            return Err(Error::InvalidProfile("m must be positive".into()));
        }
        // integer block weights force n0 * m to be an integer
        let total = m_target * Rational::from_integer(n0 as i64);
        if !total.is_integer() {
            return Err(Error::InfeasibleProfile(format!(
                "m = {m_target} is not a multiple of 1/{n0}; no integer block-weight grid realizes it"
            )));
        }
        if m_target > Rational::from_integer(p as i64) {
            return Err(Error::InfeasibleProfile(format!(
                "m = {m_target} exceeds block size {p}"
            )));
        }
        Ok(QProfile { n0, p, m_target })
    }

    #[inline]
    pub fn n0(&self) -> usize {
        self.n0
    }

    #[inline]
    pub fn p(&self) -> usize {
        self.p
    }

    pub fn m_target(&self) -> Rational {
        self.m_target
    }

    pub fn m_floor(&self) -> usize {
        self.m_target.floor().to_integer() as usize
    }

    pub fn m_ceil(&self) -> usize {
        self.m_target.ceil().to_integer() as usize
    }
}
