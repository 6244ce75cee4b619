//! Kahan compensated summation.
//!
//! All reciprocal-of-prime sums and Weyl accumulators in this crate go
//! through [`KahanSum`] so that 1e8-term reductions stay accurate to well
//! below the reporting precision of six decimals.

/// Compensated floating-point accumulator.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct KahanSum {
    sum: f64,
    compensation: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, value: f64) {
        let y = value - self.compensation;
        let t = self.sum + y;
        self.compensation = (t - self.sum) - y;
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum
    }

    /// Folds another accumulator into this one. Merge order matters for
    /// bit reproducibility; callers reduce partial sums in ascending
    /// segment-index order.
    pub fn merge(&mut self, other: KahanSum) {
        self.add(other.sum);
        self.add(-other.compensation);
    }

    pub fn sum_iter<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
        let mut acc = Self::new();
        for v in iter {
            acc.add(v);
        }
        acc.value()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensates_small_terms() {
        // 1 + 1e-16 repeated: naive f64 loses every small term.
        let mut acc = KahanSum::new();
        acc.add(1.0);
        for _ in 0..10_000 {
            acc.add(1e-16);
        }
        assert!((acc.value() - (1.0 + 1e-12)).abs() < 1e-15);
    }

    #[test]
    fn merge_matches_sequential() {
        let xs: Vec<f64> = (1..=1000).map(|k| 1.0 / k as f64).collect();
        let mut whole = KahanSum::new();
        for &x in &xs {
            whole.add(x);
        }
        let mut left = KahanSum::new();
        let mut right = KahanSum::new();
        for &x in &xs[..500] {
            left.add(x);
        }
        for &x in &xs[500..] {
            right.add(x);
        }
        left.merge(right);
        assert!((left.value() - whole.value()).abs() < 1e-13);
    }
}
