//! Exact counts of residue tuples (a₁, …, a_J) mod q with every
//! a_j(a_j − 1) coprime to q and Π(a_j − 1) ≡ r, two ways: exhaustive
//! enumeration and J-fold convolution over the unit group mod q
//! (exponentiation by squaring of the single-variable distribution).
//!
//! The convolution replaces a Dirichlet-character evaluation (Fourier
//! analysis on the abelian unit group makes the two equivalent) and
//! keeps everything in exact integer arithmetic. Counts grow like
//! φ₂(q)^J, so they are arbitrary-precision.

use num::bigint::ToBigInt;
use num::{BigInt, BigRational, BigUint, One, Signed, Zero};
use thiserror::Error;

use crate::arith::{factorize, gcd, phi2_prime_power, phi_prime_power, Factorization};

/// Enumeration budget for the brute-force oracle: φ₂(q)^J tuples.
pub const BRUTE_FORCE_BUDGET: u64 = 100_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TupleError {
    #[error("modulus {0} must be coprime to 6 (use the exploratory constructor for 3 | q)")]
    NotCoprimeToSix(u64),
    #[error("modulus {0} must be odd")]
    EvenModulus(u64),
    #[error("residue {r} is not coprime to the modulus {q}")]
    ResidueNotCoprime { r: u64, q: u64 },
    #[error("J = {0} out of range (J ≥ {1} required)")]
    JOutOfRange(u32, u32),
    #[error("enumeration budget exceeded: φ₂({q})^{j} > {budget}")]
    BudgetExceeded { q: u64, j: u32, budget: u64 },
    #[error("report requires gcd(q, 6) = 1")]
    ReportNeedsCoprimeToSix,
}

/// A validated tuple-count modulus. The standard constructor enforces
/// gcd(q, 6) = 1; the exploratory one admits 3 | q (still odd) so the
/// counts-vanish-unless-r ≡ 1 (mod 3) obstruction can be exhibited.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TupleModulus {
    q: u64,
    factors: Factorization,
    exploratory: bool,
}

impl TupleModulus {
    pub fn coprime_to_six(q: u64) -> Result<Self, TupleError> {
        if q == 0 || gcd(q, 6) != 1 {
            return Err(TupleError::NotCoprimeToSix(q));
        }
        Ok(TupleModulus {
            factors: factorize(q).expect("q > 0"),
            q,
            exploratory: false,
        })
    }

    pub fn exploratory_odd(q: u64) -> Result<Self, TupleError> {
        if q == 0 || q % 2 == 0 {
            return Err(TupleError::EvenModulus(q));
        }
        Ok(TupleModulus {
            factors: factorize(q).expect("q > 0"),
            q,
            exploratory: true,
        })
    }

    pub fn value(&self) -> u64 {
        self.q
    }

    pub fn is_coprime_to_six(&self) -> bool {
        gcd(self.q, 6) == 1
    }

    /// Units mod q, ascending; the single class 0 for q = 1.
    pub fn units(&self) -> Vec<u64> {
        if self.q == 1 {
            return vec![0];
        }
        (1..self.q).filter(|&r| gcd(r, self.q) == 1).collect()
    }

    fn check_residue(&self, r: u64) -> Result<u64, TupleError> {
        let r = r % self.q;
        if self.q > 1 && gcd(r, self.q) != 1 {
            return Err(TupleError::ResidueNotCoprime { r, q: self.q });
        }
        Ok(r)
    }
}

/// #{a mod q : gcd(a(a−1), q) = 1, a − 1 ≡ t}, as a dense vector over
/// t = 0..q. The entry is 1 exactly when t and t + 1 are both units;
/// total mass is φ₂(q). For q = 1 this is the degenerate {0: 1}.
pub fn admissible_unit_distribution(m: &TupleModulus) -> Vec<u64> {
    let q = m.value();
    if q == 1 {
        return vec![1];
    }
    (0..q)
        .map(|t| u64::from(gcd(t, q) == 1 && gcd((t + 1) % q, q) == 1))
        .collect()
}

/// Multiplicative convolution over indices mod q: out[t·u mod q] +=
/// f[t]·g[u], restricted to the unit support.
fn convolve(q: u64, f: &[BigUint], g: &[BigUint]) -> Vec<BigUint> {
    let mut out = vec![BigUint::zero(); q as usize];
    for (t, ft) in f.iter().enumerate() {
        if ft.is_zero() {
            continue;
        }
        for (u, gu) in g.iter().enumerate() {
            if gu.is_zero() {
                continue;
            }
            let idx = (t as u64 * u as u64 % q) as usize;
            out[idx] += ft * gu;
        }
    }
    out
}

/// Full per-residue tuple counts for exponent J by exponentiation by
/// squaring of the admissible distribution.
pub fn tuple_distribution_convolution(
    m: &TupleModulus,
    j: u32,
) -> Result<Vec<BigUint>, TupleError> {
    if j < 1 {
        return Err(TupleError::JOutOfRange(j, 1));
    }
    let q = m.value();
    let base: Vec<BigUint> = admissible_unit_distribution(m)
        .into_iter()
        .map(BigUint::from)
        .collect();
    // result starts as the convolution identity: delta at 1 mod q.
    let mut result = vec![BigUint::zero(); q as usize];
    result[(1 % q) as usize] = BigUint::one();
    let mut square = base;
    let mut e = j;
    while e > 0 {
        if e & 1 == 1 {
            result = convolve(q, &result, &square);
        }
        e >>= 1;
        if e > 0 {
            square = convolve(q, &square, &square);
        }
    }
    Ok(result)
}

/// Tuple count for a single target residue r via convolution.
pub fn tuple_count_convolution(m: &TupleModulus, j: u32, r: u64) -> Result<BigUint, TupleError> {
    let r = m.check_residue(r)?;
    let dist = tuple_distribution_convolution(m, j)?;
    Ok(dist[r as usize].clone())
}

/// Exhaustive histogram over all φ₂(q)^J tuples (budget-checked).
pub fn tuple_bruteforce_distribution(m: &TupleModulus, j: u32) -> Result<Vec<u64>, TupleError> {
    if j < 1 {
        return Err(TupleError::JOutOfRange(j, 1));
    }
    let q = m.value();
    let admissible: Vec<u64> = admissible_unit_distribution(m)
        .iter()
        .enumerate()
        .filter(|&(_, &w)| w == 1)
        .map(|(t, _)| t as u64)
        .collect();
    let mut budget = 1u64;
    for _ in 0..j {
        budget = budget
            .checked_mul(admissible.len() as u64)
            .filter(|&b| b <= BRUTE_FORCE_BUDGET)
            .ok_or(TupleError::BudgetExceeded {
                q,
                j,
                budget: BRUTE_FORCE_BUDGET,
            })?;
    }
    let mut counts = vec![0u64; q as usize];
    // Depth-first over the J slots with a running product.
    let mut stack: Vec<(u32, u64)> = vec![(0, 1 % q)];
    while let Some((depth, prod)) = stack.pop() {
        if depth == j {
            counts[prod as usize] += 1;
            continue;
        }
        for &t in &admissible {
            stack.push((depth + 1, prod * t % q));
        }
    }
    Ok(counts)
}

/// Tuple count for a single residue by exhaustive enumeration.
pub fn tuple_count_bruteforce(m: &TupleModulus, j: u32, r: u64) -> Result<BigUint, TupleError> {
    let r = m.check_residue(r)?;
    let counts = tuple_bruteforce_distribution(m, j)?;
    Ok(BigUint::from(counts[r as usize]))
}

/// Local behaviour of the tuple count at one prime power p^k ∥ q.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalFactorReport {
    pub prime: u64,
    pub exponent: u32,
    /// φ₂(p^k)^J / φ(p^k).
    pub main_term: BigRational,
    /// (p − 2)·p^{(k−1)J} / φ(p^k): the per-prime-power error budget
    /// (attainable, hence compared non-strictly).
    pub bound: BigRational,
    pub max_abs_deviation: BigRational,
    pub within_bound: bool,
    /// The full local distribution mod p^k (indexed by residue).
    pub counts: Vec<BigUint>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TupleCountReport {
    pub q: u64,
    pub j: u32,
    /// φ₂(q)^J / φ(q).
    pub main_term: BigRational,
    /// (r, exact count) over units r ascending.
    pub counts: Vec<(u64, BigUint)>,
    pub locals: Vec<LocalFactorReport>,
    /// Every local deviation within its bound (non-strict).
    pub all_within_bounds: bool,
}

fn big_ratio(n: BigUint, d: BigUint) -> BigRational {
    BigRational::new(n.to_bigint().unwrap(), d.to_bigint().unwrap())
}

/// Per-r exact counts against the main term φ₂(q)^J/φ(q), with the
/// CRT-local deviation check at every prime power of q.
pub fn tuple_report(m: &TupleModulus, j: u32) -> Result<TupleCountReport, TupleError> {
    if !m.is_coprime_to_six() {
        return Err(TupleError::ReportNeedsCoprimeToSix);
    }
    if j < 2 {
        return Err(TupleError::JOutOfRange(j, 2));
    }
    let q = m.value();
    let dist = tuple_distribution_convolution(m, j)?;
    let counts: Vec<(u64, BigUint)> = m
        .units()
        .into_iter()
        .map(|r| (r, dist[r as usize].clone()))
        .collect();

    let phi2_q: BigUint = m
        .factors
        .pairs()
        .iter()
        .map(|&(p, k)| BigUint::from(phi2_prime_power(p, k)))
        .product();
    let phi_q: BigUint = m
        .factors
        .pairs()
        .iter()
        .map(|&(p, k)| BigUint::from(phi_prime_power(p, k)))
        .product();
    let main_term = big_ratio(phi2_q.pow(j), phi_q.max(BigUint::one()));

    let mut locals = Vec::new();
    let mut all_within = true;
    for &(p, k) in m.factors.pairs() {
        let pk = p.pow(k);
        let local = TupleModulus::coprime_to_six(pk).expect("prime power of q, p ≥ 5");
        let local_dist = tuple_distribution_convolution(&local, j)?;
        let local_main = big_ratio(
            BigUint::from(phi2_prime_power(p, k)).pow(j),
            BigUint::from(phi_prime_power(p, k)),
        );
        let bound = big_ratio(
            BigUint::from(p - 2) * BigUint::from(p).pow((k - 1) * j),
            BigUint::from(phi_prime_power(p, k)),
        );
        let mut max_dev = BigRational::zero();
        for r in local.units() {
            let count = BigRational::from(BigInt::from(local_dist[r as usize].clone()));
            let dev = (count - &local_main).abs();
            if dev > max_dev {
                max_dev = dev;
            }
        }
        let within = max_dev <= bound;
        all_within &= within;
        locals.push(LocalFactorReport {
            prime: p,
            exponent: k,
            main_term: local_main,
            bound,
            max_abs_deviation: max_dev,
            within_bound: within,
            counts: local_dist,
        });
    }
    Ok(TupleCountReport {
        q,
        j,
        main_term,
        counts,
        locals,
        all_within_bounds: all_within,
    })
}

impl TupleCountReport {
    /// True iff every CRT-local deviation at this residue is within its
    /// prime-power bound (non-strict).
    pub fn residue_within_bounds(&self, r: u64) -> bool {
        self.locals.iter().all(|local| {
            let pk = local.prime.pow(local.exponent);
            let count = BigRational::from(BigInt::from(local.counts[(r % pk) as usize].clone()));
            (count - &local.main_term).abs() <= local.bound
        })
    }

    /// Product-envelope half-width implied by the local bounds:
    /// Π(mᵢ + bᵢ) − Π mᵢ. For prime-power q this is the single local
    /// bound.
    pub fn deviation_envelope(&self) -> BigRational {
        let mut upper = BigRational::one();
        let mut main = BigRational::one();
        for local in &self.locals {
            upper *= local.main_term.clone() + &local.bound;
            main *= local.main_term.clone();
        }
        upper - main
    }
}
