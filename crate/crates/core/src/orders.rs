//! Statistics of multiplicative orders ℓ_a(p) and ℓ_a(n): divisibility
//! counts, reciprocal sums, empirical β_a(d) estimates, and the
//! structural rates behind the order near-identities.
//!
//! ℓ_a(p) for sieved primes comes from the factorization of p − 1
//! produced by the segmented sieve (the record immediately before p),
//! followed by standard order reduction: O(log p) modular
//! exponentiations per prime. β_a(d) is always an empirical estimate;
//! no closed form is consulted.

use thiserror::Error;

use crate::arith::gcd;
use crate::kahan::KahanSum;
use crate::residue::{lambda_of_pairs, smooth_part_direct};
use crate::sieve::{for_each_record, primes_up_to, SegmentConfig, SieveError};

/// Ceiling for order streams that keep a smallest-prime-factor table in
/// memory (4 bytes per entry).
pub const ORDER_TABLE_LIMIT: u64 = 1 << 27;
/// Ceiling for prime-order scans (β estimates and reciprocal sums).
pub const PRIME_SCAN_LIMIT: u64 = 100_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OrderError {
    #[error("base a = {0} must satisfy |a| > 1")]
    InvalidBase(i64),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("need at least 2 checkpoints for the slope estimator")]
    TooFewCheckpoints,
    #[error("limit {0} exceeds the in-memory order-table budget")]
    RangeTooLarge(u64),
    #[error("no qualifying values in range: empty sample")]
    EmptySample,
    #[error(transparent)]
    Sieve(#[from] SieveError),
}

impl OrderError {
    pub fn is_resource(&self) -> bool {
        match self {
            OrderError::RangeTooLarge(_) => true,
            OrderError::Sieve(e) => e.is_resource(),
            _ => false,
        }
    }
}

fn require_base(a: i64) -> Result<(), OrderError> {
    if a.unsigned_abs() <= 1 {
        return Err(OrderError::InvalidBase(a));
    }
    Ok(())
}

/// Smallest-prime-factor table for 0..=limit; factors any n ≤ limit by
/// repeated table walks.
pub struct SpfTable {
    spf: Vec<u32>,
}

impl SpfTable {
    pub fn build(limit: u64) -> Result<Self, OrderError> {
        if limit > ORDER_TABLE_LIMIT {
            return Err(OrderError::RangeTooLarge(limit));
        }
        let n = limit as usize;
        let mut spf = vec![0u32; n + 1];
        let mut i = 2usize;
        while i <= n {
            if spf[i] == 0 {
                let mut j = i;
                while j <= n {
                    if spf[j] == 0 {
                        spf[j] = i as u32;
                    }
                    j += i;
                }
            }
            i += 1;
        }
        Ok(SpfTable { spf })
    }

    pub fn limit(&self) -> u64 {
        (self.spf.len() - 1) as u64
    }

    pub fn factor_into(&self, mut n: u64, out: &mut Vec<(u64, u32)>) {
        out.clear();
        debug_assert!(n <= self.limit());
        while n > 1 {
            let p = self.spf[n as usize] as u64;
            let mut k = 0u32;
            while n % p == 0 {
                n /= p;
                k += 1;
            }
            out.push((p, k));
        }
    }
}

/// Streams (p, ℓ_a(p)) for every prime p ≤ x with p ∤ a, ascending.
///
/// The factorization of p − 1 is read off the sieved record preceding p,
/// so no per-prime factorization work is done.
pub fn for_each_prime_order(
    x: u64,
    a: i64,
    mut visit: impl FnMut(u64, u64),
) -> Result<(), OrderError> {
    require_base(a)?;
    if x < 2 {
        return Ok(());
    }
    let cfg = SegmentConfig::new(1, x);
    let mut prev_factors: Vec<(u64, u32)> = Vec::new();
    let mut prev_n = 0u64;
    for_each_record(&cfg, |rec| {
        let is_prime = rec.factors == [(rec.n, 1)];
        if is_prime && a.rem_euclid(rec.n as i64) != 0 {
            debug_assert_eq!(prev_n, rec.n - 1);
            let p = rec.n;
            let a0 = a.rem_euclid(p as i64) as u64;
            let ord = crate::arith::reduce_order(a0, p, p - 1, &prev_factors);
            visit(p, ord);
        }
        prev_n = rec.n;
        prev_factors.clear();
        prev_factors.extend_from_slice(rec.factors);
    })?;
    Ok(())
}

/// Streams (n, ℓ_a(n)) for every n ≤ x with gcd(n, a) = 1, ascending.
/// λ(n) is factored through an in-memory SPF table, so x is bounded by
/// [`ORDER_TABLE_LIMIT`].
pub fn for_each_order(x: u64, a: i64, mut visit: impl FnMut(u64, u64)) -> Result<(), OrderError> {
    require_base(a)?;
    let table = SpfTable::build(x)?;
    let mut n_factors: Vec<(u64, u32)> = Vec::new();
    let mut lam_factors: Vec<(u64, u32)> = Vec::new();
    for n in 1..=x {
        let a0 = a.rem_euclid(n as i64) as u64;
        if n > 1 && gcd(a0, n) != 1 {
            continue;
        }
        if n == 1 {
            visit(1, 1);
            continue;
        }
        table.factor_into(n, &mut n_factors);
        let lam = lambda_of_pairs(&n_factors);
        table.factor_into(lam, &mut lam_factors);
        visit(n, crate::arith::reduce_order(a0, n, lam, &lam_factors));
    }
    Ok(())
}

/// #{p ≤ x : p ∤ a, d | ℓ_a(p)}.
pub fn order_divisibility_count(x: u64, a: i64, d: u64) -> Result<u64, OrderError> {
    require_divisor(d)?;
    let mut count = 0u64;
    for_each_prime_order(x, a, |_, ord| {
        if ord % d == 0 {
            count += 1;
        }
    })?;
    Ok(count)
}

/// Σ 1/p over primes p ≤ x with p ∤ a and d | ℓ_a(p), compensated.
pub fn order_recip_sum(x: u64, a: i64, d: u64) -> Result<f64, OrderError> {
    require_divisor(d)?;
    let mut sum = KahanSum::new();
    for_each_prime_order(x, a, |p, ord| {
        if ord % d == 0 {
            sum.add(1.0 / p as f64);
        }
    })?;
    Ok(sum.value())
}

fn require_divisor(d: u64) -> Result<(), OrderError> {
    if d == 0 {
        return Err(OrderError::InvalidArgument("d must be positive".into()));
    }
    Ok(())
}

/// One checkpoint of the β_a(d) estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaCheckpoint {
    pub x: u64,
    /// #{p ≤ x : p ∤ a, d | ℓ_a(p)}.
    pub count: u64,
    /// π(x).
    pub prime_count: u64,
    /// count / π(x): the density estimate.
    pub beta_hat: f64,
    /// Σ 1/p over the counted primes.
    pub recip_sum: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderDensityReport {
    pub a: i64,
    pub d: u64,
    pub checkpoints: Vec<BetaCheckpoint>,
    /// Least-squares slope of recip_sum against log log x; the
    /// Mertens-type growth predicts slope ≈ β_a(d).
    pub recip_slope: f64,
}

/// β_a(d) estimates at each checkpoint, in one ascending prime scan.
pub fn beta_estimate(
    a: i64,
    d: u64,
    checkpoints: &[u64],
) -> Result<OrderDensityReport, OrderError> {
    require_base(a)?;
    require_divisor(d)?;
    if checkpoints.len() < 2 {
        return Err(OrderError::TooFewCheckpoints);
    }
    if checkpoints.windows(2).any(|w| w[0] >= w[1]) || checkpoints[0] < 3 {
        return Err(OrderError::InvalidArgument(
            "checkpoints must be strictly ascending and start at x ≥ 3".into(),
        ));
    }
    let x = *checkpoints.last().unwrap();
    if x > PRIME_SCAN_LIMIT {
        return Err(OrderError::RangeTooLarge(x));
    }
    let mut rows: Vec<BetaCheckpoint> = Vec::with_capacity(checkpoints.len());
    let mut ci = 0usize;
    let mut count = 0u64;
    let mut primes = 0u64;
    let mut sum = KahanSum::new();
    for_each_prime_order(x, a, |p, ord| {
        while ci < checkpoints.len() && checkpoints[ci] < p {
            rows.push(checkpoint_row(checkpoints[ci], count, primes, &sum));
            ci += 1;
        }
        primes += 1;
        if ord % d == 0 {
            count += 1;
            sum.add(1.0 / p as f64);
        }
    })?;
    // A prime dividing a is skipped by the stream but still counts
    // toward π(x); add those back per checkpoint.
    let skipped: Vec<u64> = crate::arith::factorize(a.unsigned_abs())
        .map(|f| f.pairs().iter().map(|&(p, _)| p).collect())
        .unwrap_or_default();
    while ci < checkpoints.len() {
        rows.push(checkpoint_row(checkpoints[ci], count, primes, &sum));
        ci += 1;
    }
    for row in &mut rows {
        row.prime_count += skipped.iter().filter(|&&p| p <= row.x).count() as u64;
        row.beta_hat = row.count as f64 / row.prime_count as f64;
    }
    let xs: Vec<f64> = rows.iter().map(|r| (r.x as f64).ln().ln()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.recip_sum).collect();
    let recip_slope = least_squares_slope(&xs, &ys);
    Ok(OrderDensityReport {
        a,
        d,
        checkpoints: rows,
        recip_slope,
    })
}

fn checkpoint_row(x: u64, count: u64, primes: u64, sum: &KahanSum) -> BetaCheckpoint {
    BetaCheckpoint {
        x,
        count,
        prime_count: primes,
        beta_hat: if primes > 0 {
            count as f64 / primes as f64
        } else {
            0.0
        },
        recip_sum: sum.value(),
    }
}

fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let sx: f64 = xs.iter().sum();
    let sy: f64 = ys.iter().sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(a, b)| a * b).sum();
    let sxx: f64 = xs.iter().map(|a| a * a).sum();
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-15 {
        return 0.0;
    }
    (n * sxy - sx * sy) / denom
}

/// The two structural rates over single-scheme convenient n = mP ≤ x
/// with gcd(n, a) = 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StructureRates {
    /// Count of convenient coprime n examined.
    pub sample: u64,
    /// How often gcd(ℓ_a(m), ℓ_a(P)) = s_w(ℓ_a(P)).
    pub gcd_identity: u64,
    /// How often (P−1)/ℓ_a(P) is w-smooth.
    pub quotient_smooth: u64,
    pub rate_gcd: f64,
    pub rate_smooth: f64,
}

pub fn order_structure_rates(x: u64, a: i64, w: u64, y: u64) -> Result<StructureRates, OrderError> {
    require_base(a)?;
    if y < 2 || w < 2 {
        return Err(OrderError::InvalidArgument("need y ≥ 2 and w ≥ 2".into()));
    }
    let table = SpfTable::build(x)?;
    let small_primes = primes_up_to(w);
    let mut n_factors: Vec<(u64, u32)> = Vec::new();
    let mut aux_factors: Vec<(u64, u32)> = Vec::new();
    let mut sample = 0u64;
    let mut gcd_identity = 0u64;
    let mut quotient_smooth = 0u64;
    for n in 2..=x {
        let a0 = a.rem_euclid(n as i64) as u64;
        if gcd(a0, n) != 1 {
            continue;
        }
        table.factor_into(n, &mut n_factors);
        let &(p, k) = n_factors.last().expect("n ≥ 2 has a prime factor");
        if k != 1 || p <= y {
            continue;
        }
        sample += 1;
        // ℓ_a(P) from the factors of P − 1.
        table.factor_into(p - 1, &mut aux_factors);
        let ord_p =
            crate::arith::reduce_order(a.rem_euclid(p as i64) as u64, p, p - 1, &aux_factors);
        // ℓ_a(m) from λ(m).
        let m = n / p;
        let ord_m = if m == 1 {
            1
        } else {
            let lam_m = lambda_of_pairs(&n_factors[..n_factors.len() - 1]);
            table.factor_into(lam_m, &mut aux_factors);
            crate::arith::reduce_order(a.rem_euclid(m as i64) as u64, m, lam_m, &aux_factors)
        };
        if gcd(ord_m, ord_p) == smooth_part_direct(ord_p, &small_primes) {
            gcd_identity += 1;
        }
        let quot = (p - 1) / ord_p;
        if smooth_part_direct(quot, &small_primes) == quot {
            quotient_smooth += 1;
        }
    }
    if sample == 0 {
        return Err(OrderError::EmptySample);
    }
    Ok(StructureRates {
        sample,
        gcd_identity,
        quotient_smooth,
        rate_gcd: gcd_identity as f64 / sample as f64,
        rate_smooth: quotient_smooth as f64 / sample as f64,
    })
}
