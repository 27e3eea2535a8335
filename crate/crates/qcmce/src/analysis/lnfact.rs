//! Log-factorial table for binomial coefficients far beyond `u64` range.

/// Cumulative `ln i!` with Kahan compensation, accurate to ~1e-10 absolute
/// over the lengths used here (n below ~10^5).
pub struct LnFact {
    table: Vec<f64>,
}

impl LnFact {
    pub fn new(n_max: usize) -> Self {
        let mut table = Vec::with_capacity(n_max + 1);
        table.push(0.0);
        let mut sum = 0.0f64;
        let mut comp = 0.0f64;
        for i in 1..=n_max {
            let y = (i as f64).ln() - comp;
            let t = sum + y;
            comp = (t - sum) - y;
            sum = t;
            table.push(sum);
        }
        LnFact { table }
    }

    #[inline]
    pub fn ln_factorial(&self, n: usize) -> f64 {
        self.table[n]
    }

    /// `ln C(n, k)`; `-inf` outside the valid range.
    #[inline]
    pub fn ln_binomial(&self, n: usize, k: usize) -> f64 {
        if k > n {
            return f64::NEG_INFINITY;
        }
        self.table[n] - self.table[k] - self.table[n - k]
    }

    #[inline]
    pub fn log2_binomial(&self, n: usize, k: usize) -> f64 {
        self.ln_binomial(n, k) / std::f64::consts::LN_2
    }

    pub fn max_n(&self) -> usize {
        self.table.len() - 1
    }
}
