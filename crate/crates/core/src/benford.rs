//! Leading-digit (Benford) analysis and Weyl exponential sums for
//! positive-integer streams.
//!
//! Leading-block detection is exact-integer (repeated division): float
//! logs misclassify near block boundaries, and the block definition is
//! digit-exact. Weyl sums v^{iθ} = exp(iθ·ln v) accumulate through
//! compensated real and imaginary parts.

use thiserror::Error;

use crate::kahan::KahanSum;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BenfordError {
    #[error("stream is empty")]
    EmptyStream,
    #[error("stream value 0 rejected: v^(iθ) needs v ≥ 1")]
    ZeroValue,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

/// Number of base-b digits of n ≥ 1.
pub fn digit_length(n: u64, base: u32) -> u32 {
    debug_assert!(n >= 1 && base >= 2);
    let b = base as u64;
    let mut len = 1u32;
    let mut v = n;
    while v >= b {
        v /= b;
        len += 1;
    }
    len
}

/// The leading `len` base-b digits of n as an integer (n must have at
/// least that many digits).
fn leading_block(n: u64, len: u32, base: u32) -> u64 {
    let mut v = n;
    let b = base as u64;
    let mut drop = digit_length(n, base) - len;
    while drop > 0 {
        v /= b;
        drop -= 1;
    }
    v
}

/// True iff the most significant base-b digits of n are the base-b
/// digits of D. Exact integer arithmetic throughout.
pub fn leading_block_match(n: u64, d: u64, base: u32) -> bool {
    assert!(n >= 1 && d >= 1 && base >= 2);
    let want = digit_length(d, base);
    if digit_length(n, base) < want {
        return false;
    }
    leading_block(n, want, base) == d
}

/// Benford probability log(1 + 1/D)/log b.
pub fn benford_expected(d: u64, base: u32) -> f64 {
    assert!(d >= 1 && base >= 2);
    (1.0 + 1.0 / d as f64).ln() / (base as f64).ln()
}

/// θ_k = 2πk / ln b. The base may be any real > 1 (k = 1 with the
/// natural base e gives 2π).
pub fn theta_k(k: u64, base: f64) -> f64 {
    assert!(k >= 1 && base > 1.0);
    2.0 * std::f64::consts::PI * k as f64 / base.ln()
}

/// Empirical leading-block counts for blocks 1..=d_max against the
/// Benford law in base b.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BenfordTable {
    base: u32,
    d_max: u64,
    counts: Vec<u64>,
    total: u64,
}

impl BenfordTable {
    pub fn new(base: u32, d_max: u64) -> Self {
        assert!(base >= 2 && d_max >= 1);
        BenfordTable {
            base,
            d_max,
            counts: vec![0; d_max as usize],
            total: 0,
        }
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn d_max(&self) -> u64 {
        self.d_max
    }

    /// Number of stream values consumed.
    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn count(&self, d: u64) -> u64 {
        self.counts[(d - 1) as usize]
    }

    pub fn push(&mut self, v: u64) -> Result<(), BenfordError> {
        if v == 0 {
            return Err(BenfordError::ZeroValue);
        }
        self.total += 1;
        let digits = digit_length(v, self.base);
        let max_len = digit_length(self.d_max, self.base);
        for len in 1..=digits.min(max_len) {
            let block = leading_block(v, len, self.base);
            if block <= self.d_max {
                self.counts[(block - 1) as usize] += 1;
            }
        }
        Ok(())
    }

    pub fn frequency(&self, d: u64) -> f64 {
        self.count(d) as f64 / self.total as f64
    }

    pub fn expected(&self, d: u64) -> f64 {
        benford_expected(d, self.base)
    }

    /// ½ Σ_{D=1}^{b−1} |freq(D) − log_b(1 + 1/D)| over first digits.
    pub fn first_digit_total_variation(&self) -> f64 {
        assert!(
            self.d_max >= (self.base - 1) as u64,
            "table does not cover all first digits"
        );
        let mut tv = 0.0;
        for d in 1..self.base as u64 {
            tv += (self.frequency(d) - self.expected(d)).abs();
        }
        tv / 2.0
    }

    /// Counts merge additively; order-free.
    pub fn merge(mut self, other: BenfordTable) -> BenfordTable {
        debug_assert_eq!((self.base, self.d_max), (other.base, other.d_max));
        for (c, o) in self.counts.iter_mut().zip(&other.counts) {
            *c += o;
        }
        self.total += other.total;
        self
    }
}

/// Builds the leading-block table for a stream.
pub fn benford_report(
    values: impl IntoIterator<Item = u64>,
    base: u32,
    d_max: u64,
) -> Result<BenfordTable, BenfordError> {
    let mut table = BenfordTable::new(base, d_max);
    for v in values {
        table.push(v)?;
    }
    if table.total() == 0 {
        return Err(BenfordError::EmptyStream);
    }
    Ok(table)
}

/// Compensated accumulator of Σ v^{iθ} = Σ (cos(θ ln v), sin(θ ln v)).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeylAccumulator {
    theta: f64,
    real: KahanSum,
    imag: KahanSum,
    count: u64,
}

impl WeylAccumulator {
    pub fn new(theta: f64) -> Self {
        WeylAccumulator {
            theta,
            real: KahanSum::new(),
            imag: KahanSum::new(),
            count: 0,
        }
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn push(&mut self, v: u64) -> Result<(), BenfordError> {
        if v == 0 {
            return Err(BenfordError::ZeroValue);
        }
        let phase = self.theta * (v as f64).ln();
        self.real.add(phase.cos());
        self.imag.add(phase.sin());
        self.count += 1;
        Ok(())
    }

    /// (Re S, Im S).
    pub fn sums(&self) -> (f64, f64) {
        (self.real.value(), self.imag.value())
    }

    pub fn magnitude(&self) -> f64 {
        let (re, im) = self.sums();
        re.hypot(im)
    }

    /// |S| / count; the Weyl criterion asks this to tend to zero.
    pub fn normalized_magnitude(&self) -> f64 {
        self.magnitude() / self.count as f64
    }

    /// Float merge; callers combine partial accumulators in ascending
    /// segment order.
    pub fn merge(mut self, other: WeylAccumulator) -> WeylAccumulator {
        debug_assert_eq!(self.theta.to_bits(), other.theta.to_bits());
        self.real.merge(other.real);
        self.imag.merge(other.imag);
        self.count += other.count;
        self
    }
}

/// Accumulates Σ v^{iθ} over a stream. θ = 0 is allowed and returns
/// exactly (count, 0).
pub fn weyl_sum(
    values: impl IntoIterator<Item = u64>,
    theta: f64,
) -> Result<WeylAccumulator, BenfordError> {
    let mut acc = WeylAccumulator::new(theta);
    for v in values {
        acc.push(v)?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn leading_block_examples() {
        assert!(leading_block_match(357, 35, 10));
        assert!(leading_block_match(357, 3, 10));
        assert!(!leading_block_match(41, 5, 10));
        assert!(leading_block_match(357, 357, 10));
        assert!(!leading_block_match(357, 3570, 10));
        assert!(leading_block_match(0b1011, 0b101, 2));
    }

    #[test]
    fn one_block_matches_per_digit_length() {
        for base in [2u32, 10] {
            for n in 1..=500u64 {
                for len in 1..=digit_length(n, base) {
                    let lo = (base as u64).pow(len - 1);
                    let hi = (base as u64).pow(len);
                    let matches: Vec<u64> = (lo..hi)
                        .filter(|&d| leading_block_match(n, d, base))
                        .collect();
                    assert_eq!(matches.len(), 1, "n = {n}, base = {base}, len = {len}");
                }
            }
        }
    }

    #[test]
    #[allow(clippy::approx_constant)] // 0.301030 is the frozen 6-decimal value
    fn benford_expected_examples() {
        assert!((benford_expected(1, 10) - 0.301030).abs() < 1e-6);
        assert!((benford_expected(9, 10) - 0.045757).abs() < 1e-6);
        let total: f64 = (1..=9).map(|d| benford_expected(d, 10)).sum();
        assert!((total - 1.0).abs() < 1e-12);
        // Per digit length, expected masses sum to 1.
        let total2: f64 = (10..=99).map(|d| benford_expected(d, 10)).sum();
        assert!((total2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn theta_k_examples() {
        assert!((theta_k(1, std::f64::consts::E) - 2.0 * std::f64::consts::PI).abs() < 1e-12);
        assert!((theta_k(1, 10.0) - 2.72875).abs() < 1e-5);
        assert_eq!(theta_k(2, 10.0), 2.0 * theta_k(1, 10.0));
    }

    /// λ table for n ≤ 20, from the unit-group-exponent oracle used in
    /// the residue tests.
    const LAMBDA_20: [u64; 20] = [
        1, 1, 2, 2, 4, 2, 6, 2, 6, 4, 10, 2, 12, 6, 4, 4, 16, 6, 18, 4,
    ];

    #[test]
    fn benford_report_lambda_20() {
        let t = benford_report(LAMBDA_20.iter().copied(), 10, 9).unwrap();
        assert_eq!(t.total(), 20);
        assert_eq!(
            (1..=9).map(|d| t.count(d)).collect::<Vec<_>>(),
            vec![6, 5, 0, 5, 0, 4, 0, 0, 0]
        );
    }

    #[test]
    fn benford_report_trivial_streams() {
        let ones = benford_report(std::iter::repeat_n(1, 50), 10, 9).unwrap();
        assert_eq!(ones.count(1), 50);
        assert_eq!((2..=9).map(|d| ones.count(d)).sum::<u64>(), 0);

        let digits = benford_report(1..=9u64, 10, 9).unwrap();
        for d in 1..=9 {
            assert_eq!(digits.count(d), 1);
        }

        assert_eq!(
            benford_report(std::iter::empty(), 10, 9),
            Err(BenfordError::EmptyStream)
        );
        assert_eq!(benford_report([0u64], 10, 9), Err(BenfordError::ZeroValue));
    }

    #[test]
    fn benford_multi_digit_blocks() {
        // 357 contributes to D = 3 and D = 35 (and D = 357 if tracked).
        let t = benford_report([357u64], 10, 99).unwrap();
        assert_eq!(t.count(3), 1);
        assert_eq!(t.count(35), 1);
        assert_eq!(t.count(36), 0);
    }

    #[test]
    fn staircase_counts_match_enumeration() {
        // Streams {1, …, b^m − 1} for m ≤ 5: table counts must equal
        // direct per-value enumeration.
        for (base, m) in [(2u32, 5u32), (2, 4), (10, 5), (10, 2)] {
            let n_max = (base as u64).pow(m) - 1;
            let d_max = (base as u64).pow(m.min(2)) - 1;
            let t = benford_report(1..=n_max, base, d_max).unwrap();
            for d in 1..=d_max {
                let direct = (1..=n_max)
                    .filter(|&n| leading_block_match(n, d, base))
                    .count();
                assert_eq!(t.count(d), direct as u64, "base {base}, D = {d}");
            }
        }
    }

    #[test]
    fn weyl_trivial_cases() {
        let ones = weyl_sum(std::iter::repeat_n(1u64, 100), 2.5).unwrap();
        let (re, im) = ones.sums();
        assert_eq!((re, im), (100.0, 0.0));
        assert_eq!(ones.magnitude(), 100.0);

        let single = weyl_sum([7u64], 1.0).unwrap();
        assert!((single.magnitude() - 1.0).abs() < 1e-15);

        let zero_theta = weyl_sum(1..=1000u64, 0.0).unwrap();
        assert_eq!(zero_theta.sums(), (1000.0, 0.0));

        assert_eq!(weyl_sum([0u64], 1.0), Err(BenfordError::ZeroValue));
    }

    #[test]
    fn weyl_lambda_10_matches_direct_sum() {
        // Oracle: direct 10-term summation from the λ table.
        let mut re = 0.0f64;
        let mut im = 0.0f64;
        for &v in &LAMBDA_20[..10] {
            re += (1.0 * (v as f64).ln()).cos();
            im += (1.0 * (v as f64).ln()).sin();
        }
        assert!((re - 5.0055).abs() < 1e-3);
        assert!((im - 6.4733).abs() < 1e-3);
        let acc = weyl_sum(LAMBDA_20[..10].iter().copied(), 1.0).unwrap();
        let (are, aim) = acc.sums();
        assert!((are - re).abs() < 1e-12);
        assert!((aim - im).abs() < 1e-12);
    }

    #[test]
    fn weyl_magnitude_bounded_by_count() {
        let mut state = 0xdeadbeefcafe1234u64;
        for theta in [0.0, 0.3, 1.0, theta_k(1, 10.0)] {
            let mut acc = WeylAccumulator::new(theta);
            for _ in 0..5000 {
                state = state
                    .wrapping_mul(6364136223846793005)
                    .wrapping_add(1442695040888963407);
                acc.push(1 + (state >> 30)).unwrap();
            }
            assert!(acc.magnitude() <= acc.count() as f64 * (1.0 + 1e-12));
        }
    }

    #[test]
    fn weyl_merge_is_ordered_deterministic() {
        let values: Vec<u64> = (1..=10_000).collect();
        let whole = weyl_sum(values.iter().copied(), 1.7).unwrap();
        let left = weyl_sum(values[..4000].iter().copied(), 1.7).unwrap();
        let right = weyl_sum(values[4000..].iter().copied(), 1.7).unwrap();
        let merged = left.merge(right);
        assert_eq!(merged.count(), whole.count());
        assert!((merged.magnitude() - whole.magnitude()).abs() < 1e-9);
    }
}
