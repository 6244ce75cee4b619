//! Residue-class statistics of λ(n): histograms mod q, the coprime count
//! N(x, q), Mertens-type prime sums, the mod-3 split, convenient-number
//! classification, the gcd near-identity rate, and the sieve constants
//! W and g(d).

use num::rational::Ratio;
use thiserror::Error;

use crate::arith::{alpha, euler_phi, factorize, gcd, lambda_prime_power, Factorization};
use crate::kahan::KahanSum;
use crate::sieve::{
    for_each_prime, primes_up_to, scan_lambda, scan_records, ScanOptions, SegmentConfig, SieveError,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ResidueError {
    #[error("modulus {0} must be odd: λ(n) is even for all n ≥ 3")]
    EvenModulus(u64),
    #[error("modulus {0} must be a positive multiple of 3")]
    NotMultipleOfThree(u64),
    #[error("residue {a} is not coprime to the modulus {q}")]
    ResidueNotCoprime { a: u64, q: u64 },
    #[error("s = {s} must be coprime to q = {q}")]
    SNotCoprime { s: u64, q: u64 },
    #[error("histogram is empty")]
    EmptyHistogram,
    #[error("no convenient values in range: empty sample")]
    EmptySample,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Sieve(#[from] SieveError),
}

impl ResidueError {
    pub fn is_resource(&self) -> bool {
        matches!(self, ResidueError::Sieve(e) if e.is_resource())
    }
}

/// Per-class counts of λ(n) mod q over n with gcd(λ(n), q) = 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResidueHistogram {
    q: u64,
    counts: Vec<u64>,
    total: u64,
}

impl ResidueHistogram {
    fn new(q: u64) -> Self {
        ResidueHistogram {
            q,
            counts: vec![0; q as usize],
            total: 0,
        }
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn count(&self, a: u64) -> u64 {
        self.counts[(a % self.q) as usize]
    }

    /// N(x, q): total count of contributing n.
    pub fn total(&self) -> u64 {
        self.total
    }

    /// Residue classes a mod q with gcd(a, q) = 1, ascending. For q = 1
    /// this is the single class 0.
    pub fn coprime_classes(&self) -> impl Iterator<Item = u64> + '_ {
        let q = self.q;
        (0..q).filter(move |&a| q == 1 || gcd(a, q) == 1)
    }

    fn add(&mut self, a: u64) {
        self.counts[a as usize] += 1;
        self.total += 1;
    }

    fn merge(mut self, other: ResidueHistogram) -> ResidueHistogram {
        debug_assert_eq!(self.q, other.q);
        for (c, o) in self.counts.iter_mut().zip(&other.counts) {
            *c += o;
        }
        self.total += other.total;
        self
    }
}

fn require_odd(q: u64) -> Result<(), ResidueError> {
    if q == 0 || q % 2 == 0 {
        return Err(ResidueError::EvenModulus(q));
    }
    Ok(())
}

/// Histogram of λ(n) mod q over n ≤ x with gcd(λ(n), q) = 1.
pub fn wud_histogram(x: u64, q: u64, opts: &ScanOptions) -> Result<ResidueHistogram, ResidueError> {
    require_odd(q)?;
    let cfg = SegmentConfig::new(1, x).with_segment_size(opts.segment_size);
    let hist = scan_lambda(
        &cfg,
        opts.workers,
        || ResidueHistogram::new(q),
        |h, e| {
            let r = e.lambda % q;
            if gcd(r, q) == 1 {
                h.add(r);
            }
        },
        ResidueHistogram::merge,
    )?;
    Ok(hist)
}

/// (max relative deviation, total variation) of a histogram from the
/// uniform distribution over the φ(q) coprime classes.
pub fn discrepancy(h: &ResidueHistogram) -> Result<(f64, f64), ResidueError> {
    if h.total() == 0 {
        return Err(ResidueError::EmptyHistogram);
    }
    let phi_q = euler_phi(&factorize(h.q()).expect("q validated")) as f64;
    let total = h.total() as f64;
    let mut max_rel = 0.0f64;
    let mut tv = 0.0f64;
    for a in h.coprime_classes() {
        let freq = h.count(a) as f64 / total;
        max_rel = max_rel.max((freq * phi_q - 1.0).abs());
        tv += (freq - 1.0 / phi_q).abs();
    }
    Ok((max_rel, tv / 2.0))
}

/// One checkpoint of a Mertens-type reciprocal sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MertensCheckpoint {
    pub x: u64,
    /// Σ 1/p over p ≤ x with gcd(p−1, q) = 1 and (for s > 1) s ∤ p−1.
    pub sum: f64,
    /// α(q)·(1 − 1/φ(s))·log log x, with the s-factor dropped at s = 1.
    pub main_term: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MertensReport {
    pub q: u64,
    pub s: u64,
    pub checkpoints: Vec<MertensCheckpoint>,
}

/// Compensated Σ 1/p over p ≤ x with gcd(p−1, q) = 1 and s ∤ p−1,
/// evaluated at each checkpoint.
///
/// `s = 1` means "no s-condition" (the unrestricted sum): taking the
/// exclusion literally at s = 1 would empty the sum, so the s-factor of
/// the main term is dropped there as well.
pub fn mertens_sum(checkpoints: &[u64], q: u64, s: u64) -> Result<MertensReport, ResidueError> {
    if checkpoints.is_empty() || checkpoints.windows(2).any(|w| w[0] >= w[1]) {
        return Err(ResidueError::InvalidArgument(
            "checkpoints must be nonempty and strictly ascending".into(),
        ));
    }
    if checkpoints[0] < 3 {
        return Err(ResidueError::InvalidArgument(
            "checkpoints start below x = 3".into(),
        ));
    }
    if q == 0 || s == 0 {
        return Err(ResidueError::InvalidArgument(
            "q and s must be positive".into(),
        ));
    }
    if gcd(q, s) != 1 {
        return Err(ResidueError::SNotCoprime { s, q });
    }
    let alpha_q = ratio_to_f64(alpha(&factorize(q).expect("q > 0")));
    let s_factor = if s == 1 {
        1.0
    } else {
        1.0 - 1.0 / euler_phi(&factorize(s).expect("s > 0")) as f64
    };
    let x = *checkpoints.last().unwrap();
    let mut sum = KahanSum::new();
    let mut partials = Vec::with_capacity(checkpoints.len());
    let mut ci = 0usize;
    for_each_prime(x, |p| {
        while ci < checkpoints.len() && checkpoints[ci] < p {
            partials.push((checkpoints[ci], sum.value()));
            ci += 1;
        }
        if gcd(p - 1, q) == 1 && (s == 1 || (p - 1) % s != 0) {
            sum.add(1.0 / p as f64);
        }
    });
    while ci < checkpoints.len() {
        partials.push((checkpoints[ci], sum.value()));
        ci += 1;
    }
    let checkpoints = partials
        .into_iter()
        .map(|(x, sum)| {
            let main_term = alpha_q * s_factor * (x as f64).ln().ln();
            MertensCheckpoint {
                x,
                sum,
                main_term,
                residual: sum - main_term,
            }
        })
        .collect();
    Ok(MertensReport { q, s, checkpoints })
}

fn ratio_to_f64(r: Ratio<u64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// N(x, q) at each checkpoint with the normalization N·(log x)^{1−α(q)}/x.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthRow {
    pub x: u64,
    pub count: u64,
    pub normalized: f64,
}

pub fn coprime_growth_report(
    q: u64,
    checkpoints: &[u64],
    opts: &ScanOptions,
) -> Result<Vec<GrowthRow>, ResidueError> {
    require_odd(q)?;
    if checkpoints.is_empty() || checkpoints.windows(2).any(|w| w[0] >= w[1]) {
        return Err(ResidueError::InvalidArgument(
            "checkpoints must be nonempty and strictly ascending".into(),
        ));
    }
    let x = *checkpoints.last().unwrap();
    let cfg = SegmentConfig::new(1, x).with_segment_size(opts.segment_size);
    // Bucket b counts qualifying n in (checkpoint[b−1], checkpoint[b]].
    let buckets = scan_lambda(
        &cfg,
        opts.workers,
        || vec![0u64; checkpoints.len()],
        |acc, e| {
            if gcd(e.lambda % q, q) == 1 {
                let b = checkpoints.partition_point(|&c| c < e.n);
                acc[b] += 1;
            }
        },
        |mut a, b| {
            for (x, y) in a.iter_mut().zip(&b) {
                *x += y;
            }
            a
        },
    )?;
    let exponent = 1.0 - ratio_to_f64(alpha(&factorize(q).expect("q > 0")));
    let mut running = 0u64;
    Ok(checkpoints
        .iter()
        .zip(buckets)
        .map(|(&x, bucket)| {
            running += bucket;
            let normalized = running as f64 * (x as f64).ln().powf(exponent) / x as f64;
            GrowthRow {
                x,
                count: running,
                normalized,
            }
        })
        .collect())
}

/// Counts of λ(n) ≡ 1 and ≡ 2 (mod 3) over n ≤ x with gcd(λ(n), q) = 1.
/// Requires 3 | q (and q odd), which forces 3 ∤ λ(n) on the counted set.
pub fn mod3_split(x: u64, q: u64, opts: &ScanOptions) -> Result<(u64, u64), ResidueError> {
    require_odd(q)?;
    if q % 3 != 0 {
        return Err(ResidueError::NotMultipleOfThree(q));
    }
    let cfg = SegmentConfig::new(1, x).with_segment_size(opts.segment_size);
    let (c1, c2) = scan_lambda(
        &cfg,
        opts.workers,
        || (0u64, 0u64),
        |acc, e| {
            if gcd(e.lambda % q, q) == 1 {
                match e.lambda % 3 {
                    1 => acc.0 += 1,
                    2 => acc.1 += 1,
                    _ => unreachable!("3 | λ(n) excluded by gcd(λ, q) = 1"),
                }
            }
        },
        |a, b| (a.0 + b.0, a.1 + b.1),
    )?;
    Ok((c1, c2))
}

/// Both sides of the mod-q vs mod-3 comparison for a coprime class a.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterludeCounts {
    /// #{n ≤ x : λ(n) ≡ a (mod q)}.
    pub lhs: u64,
    /// #{n ≤ x : gcd(λ(n), q) = 1, λ(n) ≡ a (mod 3)}.
    pub mod3_count: u64,
    /// (2/φ(q)) · mod3_count.
    pub rhs: f64,
    /// lhs / rhs; NaN when both sides are empty.
    pub ratio: f64,
}

pub fn interlude_ratio(
    x: u64,
    q: u64,
    a: u64,
    opts: &ScanOptions,
) -> Result<InterludeCounts, ResidueError> {
    require_odd(q)?;
    if q % 3 != 0 {
        return Err(ResidueError::NotMultipleOfThree(q));
    }
    let a = a % q;
    if gcd(a, q) != 1 {
        return Err(ResidueError::ResidueNotCoprime { a, q });
    }
    let a3 = a % 3;
    let cfg = SegmentConfig::new(1, x).with_segment_size(opts.segment_size);
    let (lhs, mod3_count) = scan_lambda(
        &cfg,
        opts.workers,
        || (0u64, 0u64),
        |acc, e| {
            let r = e.lambda % q;
            if r == a {
                acc.0 += 1;
            }
            if gcd(r, q) == 1 && e.lambda % 3 == a3 {
                acc.1 += 1;
            }
        },
        |a, b| (a.0 + b.0, a.1 + b.1),
    )?;
    let phi_q = euler_phi(&factorize(q).expect("q > 0")) as f64;
    let rhs = 2.0 / phi_q * mod3_count as f64;
    let ratio = if rhs == 0.0 && lhs == 0 {
        f64::NAN
    } else {
        lhs as f64 / rhs
    };
    Ok(InterludeCounts {
        lhs,
        mod3_count,
        rhs,
        ratio,
    })
}

/// Which large-prime decomposition a convenience check uses: the multi
/// scheme splits off the top J primes, the single scheme only P⁺(n).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConvenientScheme {
    Multi { j: u32 },
    Single,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConvenientParams {
    pub scheme: ConvenientScheme,
    /// Threshold the split-off primes must exceed.
    pub y: u64,
    /// Smooth cutoff used by the gcd-identity and order-structure rates.
    pub w: u64,
}

impl ConvenientParams {
    pub fn validate(&self) -> Result<(), ResidueError> {
        if self.y < 2 {
            return Err(ResidueError::InvalidArgument("y must be at least 2".into()));
        }
        if self.w < 2 {
            return Err(ResidueError::InvalidArgument("w must be at least 2".into()));
        }
        if let ConvenientScheme::Multi { j: 0 } = self.scheme {
            return Err(ResidueError::InvalidArgument("J must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Classification {
    /// n = m · P_J ⋯ P_1 with every split-off prime simple and > y.
    Convenient {
        m: u64,
        split_primes: Vec<u64>,
    },
    Inconvenient,
}

impl Classification {
    pub fn is_convenient(&self) -> bool {
        matches!(self, Classification::Convenient { .. })
    }
}

/// Classifies n by the decomposition its factorization admits.
///
/// Multi scheme: convenient iff P_J(n) > y and each of the J largest
/// primes divides n exactly once. Single scheme: P⁺(n) > y and
/// P⁺(n)² ∤ n. Split primes are returned ascending.
pub fn classify_convenient(f: &Factorization, params: &ConvenientParams) -> Classification {
    let j = match params.scheme {
        ConvenientScheme::Multi { j } => j,
        ConvenientScheme::Single => 1,
    };
    classify_from_pairs(f.pairs(), f.value(), j, params.y)
}

fn classify_from_pairs(pairs: &[(u64, u32)], value: u64, j: u32, y: u64) -> Classification {
    let j = j as usize;
    if pairs.len() < j {
        return Classification::Inconvenient;
    }
    let top = &pairs[pairs.len() - j..];
    if top.iter().any(|&(p, k)| k != 1 || p <= y) {
        return Classification::Inconvenient;
    }
    let mut m = value;
    let mut split: Vec<u64> = Vec::with_capacity(j);
    for &(p, _) in top {
        m /= p;
        split.push(p);
    }
    Classification::Convenient {
        m,
        split_primes: split,
    }
}

/// Numerator / denominator / rate triple for the sampled identities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateReport {
    pub numerator: u64,
    pub denominator: u64,
    pub rate: f64,
}

impl RateReport {
    pub(crate) fn from_counts(numerator: u64, denominator: u64) -> Self {
        RateReport {
            numerator,
            denominator,
            rate: numerator as f64 / denominator as f64,
        }
    }
}

/// Largest w-smooth divisor of v by trial division over the primes ≤ w.
pub(crate) fn smooth_part_direct(mut v: u64, small_primes: &[u64]) -> u64 {
    let mut s = 1u64;
    for &p in small_primes {
        if p > v {
            break;
        }
        while v % p == 0 {
            v /= p;
            s *= p;
        }
    }
    s
}

/// Fraction of single-scheme convenient n = mP ≤ x satisfying
/// gcd(λ(m), P−1) = s_w(P−1).
pub fn gcd_identity_rate(
    x: u64,
    y: u64,
    w: u64,
    opts: &ScanOptions,
) -> Result<RateReport, ResidueError> {
    ConvenientParams {
        scheme: ConvenientScheme::Single,
        y,
        w,
    }
    .validate()?;
    let small_primes = primes_up_to(w);
    let cfg = SegmentConfig::new(1, x).with_segment_size(opts.segment_size);
    let (hits, sample) = scan_records(
        &cfg,
        opts.workers,
        || (0u64, 0u64),
        |acc, rec| {
            let Some(&(p, k)) = rec.factors.last() else {
                return;
            };
            if k != 1 || p <= y {
                return;
            }
            acc.1 += 1;
            let lambda_m = lambda_of_pairs(&rec.factors[..rec.factors.len() - 1]);
            if gcd(lambda_m, p - 1) == smooth_part_direct(p - 1, &small_primes) {
                acc.0 += 1;
            }
        },
        |a, b| (a.0 + b.0, a.1 + b.1),
    )?;
    if sample == 0 {
        return Err(ResidueError::EmptySample);
    }
    Ok(RateReport::from_counts(hits, sample))
}

pub(crate) fn lambda_of_pairs(pairs: &[(u64, u32)]) -> u64 {
    let mut lam = 1u64;
    for &(p, k) in pairs {
        lam = crate::arith::checked_lcm(lam, lambda_prime_power(p, k)).expect("lambda overflow");
    }
    lam
}

/// W(w) = ½ Π_{2 < p ≤ w} (p−2)/(p−1).
pub fn sieve_constant_w(w: u64) -> f64 {
    assert!(w >= 3, "W(w) requires w ≥ 3");
    let mut acc = 0.5f64;
    for p in primes_up_to(w) {
        if p > 2 {
            acc *= (p - 2) as f64 / (p - 1) as f64;
        }
    }
    acc
}

/// g(d) = φ(d)² / (d·φ₂(d)) for odd d, as an exact reduced rational.
/// Multiplicative with g(p^k) = (p−1)²/(p(p−2)) independent of k.
pub fn sieve_density_g(d: u64) -> Result<Ratio<u128>, ResidueError> {
    if d == 0 || d % 2 == 0 {
        return Err(ResidueError::EvenModulus(d));
    }
    let mut acc = Ratio::new(1u128, 1u128);
    for &(p, _) in factorize(d).expect("d > 0").pairs() {
        let p = p as u128;
        acc *= Ratio::new((p - 1) * (p - 1), p * (p - 2));
    }
    Ok(acc)
}

/// Parameter presets following the asymptotic choices, clamped so they
/// stay exercisable at reachable x: y ≤ √x, y ≥ 2, J ≥ 1, w ≥ 2.
pub fn multi_scheme_preset(x: u64) -> ConvenientParams {
    let lx = (x.max(3) as f64).ln();
    let j = lx.ln().max(1.0).ln().floor().max(1.0) as u32;
    let y = lx.sqrt().exp().min(x.isqrt() as f64).max(2.0) as u64;
    let w = lx.powf(0.125).exp().max(2.0) as u64;
    ConvenientParams {
        scheme: ConvenientScheme::Multi { j },
        y,
        w,
    }
}

pub fn single_scheme_preset(x: u64) -> ConvenientParams {
    let lx = (x.max(3) as f64).ln();
    let lll = lx.ln().max(1.0).ln();
    let y = if lll > 0.0 {
        (x as f64).powf(1.0 / lll.sqrt())
    } else {
        x as f64
    };
    let y = y.min(x.isqrt() as f64).max(2.0) as u64;
    let w = lx.ln().max(2.0) as u64;
    ConvenientParams {
        scheme: ConvenientScheme::Single,
        y,
        w,
    }
}
