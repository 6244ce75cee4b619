//! Exact arithmetic functions on machine-word integers: factorization,
//! Carmichael's λ, Euler's φ, the Schemmel totient φ₂, α(q), smooth parts,
//! k-th largest prime factors, and multiplicative orders.
//!
//! Everything here is pure and reentrant; values are freely shareable
//! across threads.

use num::rational::Ratio;
use thiserror::Error;

/// Largest input accepted by [`factorize`] and the order routines.
pub const MAX_INPUT: u64 = (1 << 63) - 1;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ArithError {
    #[error("n = 0 has no factorization")]
    Zero,
    #[error("{0} exceeds the supported range (2^63 - 1)")]
    OutOfRange(u64),
    #[error("invalid factorization: {0}")]
    InvalidFactorization(String),
    #[error("gcd({a}, {n}) > 1: multiplicative order undefined")]
    NotCoprime { a: u64, n: u64 },
}

/// Canonical factorization of a positive integer: (prime, exponent)
/// pairs in strictly increasing prime order, together with the value
/// they multiply to. `value == 1` iff the pair list is empty.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Factorization {
    value: u64,
    pairs: Vec<(u64, u32)>,
}

impl Factorization {
    pub fn one() -> Self {
        Factorization {
            value: 1,
            pairs: Vec::new(),
        }
    }

    /// Builds a factorization from raw pairs, checking every invariant:
    /// strictly ascending primes, primality, positive exponents, and an
    /// in-range product.
    pub fn from_pairs(pairs: Vec<(u64, u32)>) -> Result<Self, ArithError> {
        let mut value: u64 = 1;
        let mut last = 0u64;
        for &(p, k) in &pairs {
            if p <= last {
                return Err(ArithError::InvalidFactorization(format!(
                    "primes not strictly ascending at {p}"
                )));
            }
            if k == 0 {
                return Err(ArithError::InvalidFactorization(format!(
                    "zero exponent on prime {p}"
                )));
            }
            if !is_prime(p) {
                return Err(ArithError::InvalidFactorization(format!(
                    "{p} is not prime"
                )));
            }
            for _ in 0..k {
                value = value
                    .checked_mul(p)
                    .filter(|&v| v <= MAX_INPUT)
                    .ok_or(ArithError::OutOfRange(p))?;
            }
            last = p;
        }
        Ok(Factorization { value, pairs })
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn pairs(&self) -> &[(u64, u32)] {
        &self.pairs
    }

    /// Number of prime factors with multiplicity (big omega).
    pub fn big_omega(&self) -> u32 {
        self.pairs.iter().map(|&(_, k)| k).sum()
    }

    /// Largest prime factor, with P⁺(1) = 1.
    pub fn largest_prime_factor(&self) -> u64 {
        self.pairs.last().map_or(1, |&(p, _)| p)
    }

    /// Exponent of `p` in the factorization (0 if `p` does not divide).
    pub fn exponent_of(&self, p: u64) -> u32 {
        self.pairs
            .binary_search_by_key(&p, |&(q, _)| q)
            .map_or(0, |i| self.pairs[i].1)
    }
}

/// A value bundled with its λ and φ. λ always divides φ (the exponent
/// of a finite abelian group divides its order), and λ is even for all
/// n ≥ 3.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ArithValue {
    pub n: u64,
    pub lambda: u64,
    pub phi: u64,
}

impl ArithValue {
    pub fn from_factorization(f: &Factorization) -> Self {
        ArithValue {
            n: f.value(),
            lambda: carmichael_lambda(f),
            phi: euler_phi(f),
        }
    }
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// lcm with an explicit overflow check. λ accumulation never overflows
/// for in-range inputs (λ(n) ≤ n), so a hit here means a broken invariant.
pub fn checked_lcm(a: u64, b: u64) -> Option<u64> {
    if a == 0 || b == 0 {
        return Some(0);
    }
    (a / gcd(a, b)).checked_mul(b)
}

#[inline]
pub fn mul_mod(a: u64, b: u64, n: u64) -> u64 {
    ((a as u128 * b as u128) % n as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, n: u64) -> u64 {
    if n == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= n;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, n);
        }
        base = mul_mod(base, base, n);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller–Rabin for u64 (seven-base certificate).
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &[2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    let d = (n - 1) >> (n - 1).trailing_zeros();
    'witness: for &a in &[2u64, 325, 9375, 28178, 450775, 9780504, 1795265022] {
        let a = a % n;
        if a == 0 {
            continue;
        }
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        let mut e = d;
        while e != n - 1 {
            x = mul_mod(x, x, n);
            e <<= 1;
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Brent-cycle Pollard rho; returns a nontrivial factor of an odd
/// composite `n`. Deterministic: the additive constant walks 1, 2, 3, …
fn pollard_rho(n: u64) -> u64 {
    debug_assert!(n > 3 && n % 2 == 1 && !is_prime(n));
    for c in 1u64.. {
        let f = |x: u64| (mul_mod(x, x, n) + c) % n;
        let (mut x, mut y, mut ys) = (2u64, 2u64, 2u64);
        let (mut d, mut r, mut q) = (1u64, 1u64, 1u64);
        while d == 1 {
            x = y;
            for _ in 0..r {
                y = f(y);
            }
            let mut k = 0;
            while k < r && d == 1 {
                ys = y;
                let batch = 128.min(r - k);
                for _ in 0..batch {
                    y = f(y);
                    q = mul_mod(q, x.abs_diff(y), n);
                }
                d = gcd(q, n);
                k += batch;
            }
            r <<= 1;
        }
        if d == n {
            // The batched gcd smeared the factor; backtrack one step at
            // a time from the last checkpoint.
            loop {
                ys = f(ys);
                d = gcd(x.abs_diff(ys), n);
                if d > 1 {
                    break;
                }
            }
        }
        if d != n {
            return d;
        }
    }
    unreachable!("pollard rho exhausted constants")
}

const SMALL_PRIMES: [u64; 25] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97,
];

/// Canonical factorization of `n`, 1 ≤ n ≤ 2⁶³ − 1. Deterministic.
pub fn factorize(n: u64) -> Result<Factorization, ArithError> {
    if n == 0 {
        return Err(ArithError::Zero);
    }
    if n > MAX_INPUT {
        return Err(ArithError::OutOfRange(n));
    }
    let mut pairs: Vec<(u64, u32)> = Vec::new();
    let mut rest = n;
    for &p in &SMALL_PRIMES {
        if p * p > rest {
            break;
        }
        let mut k = 0;
        while rest % p == 0 {
            rest /= p;
            k += 1;
        }
        if k > 0 {
            pairs.push((p, k));
        }
    }
    if rest > 1 {
        if rest < 97 * 97 || is_prime(rest) {
            push_factor(&mut pairs, rest, 1);
        } else {
            let mut stack = vec![rest];
            while let Some(m) = stack.pop() {
                if is_prime(m) {
                    push_factor(&mut pairs, m, 1);
                } else {
                    let d = pollard_rho(m);
                    stack.push(d);
                    stack.push(m / d);
                }
            }
        }
    }
    pairs.sort_unstable_by_key(|&(p, _)| p);
    // Merge duplicates produced by repeated rho splits.
    let mut merged: Vec<(u64, u32)> = Vec::with_capacity(pairs.len());
    for (p, k) in pairs {
        match merged.last_mut() {
            Some(last) if last.0 == p => last.1 += k,
            _ => merged.push((p, k)),
        }
    }
    Ok(Factorization {
        value: n,
        pairs: merged,
    })
}

fn push_factor(pairs: &mut Vec<(u64, u32)>, p: u64, k: u32) {
    pairs.push((p, k));
}

/// λ(p^k): 1, 2, 2^{k−2} for p = 2 and k = 1, 2, ≥ 3; φ(p^k) for odd p.
pub fn lambda_prime_power(p: u64, k: u32) -> u64 {
    if p == 2 {
        match k {
            1 => 1,
            2 => 2,
            _ => 1 << (k - 2),
        }
    } else {
        phi_prime_power(p, k)
    }
}

/// φ(p^k) = p^{k−1}(p − 1).
pub fn phi_prime_power(p: u64, k: u32) -> u64 {
    p.pow(k - 1) * (p - 1)
}

/// φ₂(p^k) = p^{k−1}(p − 2); zero when p = 2.
pub fn phi2_prime_power(p: u64, k: u32) -> u64 {
    p.pow(k - 1) * (p - 2)
}

/// Carmichael's λ: lcm of λ(p^k) over the prime powers of `f`.
pub fn carmichael_lambda(f: &Factorization) -> u64 {
    let mut lam = 1u64;
    for &(p, k) in f.pairs() {
        lam = checked_lcm(lam, lambda_prime_power(p, k))
            .expect("lambda lcm overflowed: factorization invariant violated");
    }
    lam
}

/// Euler's φ, multiplicatively from the factorization.
pub fn euler_phi(f: &Factorization) -> u64 {
    f.pairs()
        .iter()
        .map(|&(p, k)| phi_prime_power(p, k))
        .product()
}

/// Schemmel totient φ₂(n) = n·Π_{p|n}(1 − 2/p), exactly in integers.
/// Counts residues a mod n with a and a − 1 both coprime to n; zero for
/// even n.
pub fn schemmel_phi2(f: &Factorization) -> u64 {
    f.pairs()
        .iter()
        .map(|&(p, k)| phi2_prime_power(p, k))
        .product()
}

/// α(q) = Π_{p|q}(1 − 1/(p − 1)) as an exact reduced rational.
/// Zero for even q; α(1) = 1; strictly inside (0, 1) for odd q > 1.
pub fn alpha(q: &Factorization) -> Ratio<u64> {
    let mut acc = Ratio::new(1u64, 1u64);
    for &(p, _) in q.pairs() {
        acc *= Ratio::new(p - 2, p - 1);
    }
    acc
}

/// Largest y-smooth divisor s_y(n).
pub fn smooth_part(f: &Factorization, y: u64) -> u64 {
    f.pairs()
        .iter()
        .take_while(|&&(p, _)| p <= y)
        .map(|&(p, k)| p.pow(k))
        .product()
}

/// k-th largest prime factor with multiplicity; 1 when k exceeds Ω(n).
pub fn kth_largest_prime_factor(f: &Factorization, k: u32) -> u64 {
    assert!(k >= 1, "k must be at least 1");
    let mut remaining = k;
    for &(p, mult) in f.pairs().iter().rev() {
        if remaining <= mult {
            return p;
        }
        remaining -= mult;
    }
    1
}

/// Multiplicative order ℓ_a(n), given the factorization of λ(n).
///
/// Negative `a` is reduced mod n first. Starts from λ(n) and divides out
/// primes of λ(n) while the congruence a^e ≡ 1 (mod n) persists.
pub fn multiplicative_order(
    a: i64,
    n: u64,
    lambda_fact: &Factorization,
) -> Result<u64, ArithError> {
    if n == 0 {
        return Err(ArithError::Zero);
    }
    if n > MAX_INPUT {
        return Err(ArithError::OutOfRange(n));
    }
    if n == 1 {
        return Ok(1);
    }
    let a0 = a.rem_euclid(n as i64) as u64;
    if gcd(a0, n) != 1 {
        return Err(ArithError::NotCoprime { a: a0, n });
    }
    debug_assert_eq!(pow_mod(a0, lambda_fact.value(), n), 1);
    Ok(reduce_order(
        a0,
        n,
        lambda_fact.value(),
        lambda_fact.pairs(),
    ))
}

/// Order reduction: shrink `e` (a multiple of the order, with factor list
/// `e_factors`) to the exact order of `a` mod `n`.
pub(crate) fn reduce_order(a: u64, n: u64, mut e: u64, e_factors: &[(u64, u32)]) -> u64 {
    for &(p, _) in e_factors {
        while e % p == 0 && pow_mod(a, e / p, n) == 1 {
            e /= p;
        }
    }
    e
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fact(n: u64) -> Factorization {
        factorize(n).unwrap()
    }

    /// Brute-force order of a mod n by iterating powers.
    fn naive_order(a: u64, n: u64) -> u64 {
        let mut x = a % n;
        let mut e = 1u64;
        while x != 1 % n {
            x = mul_mod(x, a, n);
            e += 1;
        }
        e.max(1)
    }

    /// Exponent of (ℤ/nℤ)* by enumerating units and their orders.
    fn unit_group_exponent(n: u64) -> u64 {
        if n == 1 {
            return 1;
        }
        let mut exp = 1u64;
        for a in 1..n {
            if gcd(a, n) == 1 {
                exp = checked_lcm(exp, naive_order(a, n)).unwrap();
            }
        }
        exp
    }

    #[test]
    fn factorize_examples() {
        assert_eq!(fact(1).pairs(), &[]);
        assert_eq!(fact(12).pairs(), &[(2, 2), (3, 1)]);
        assert_eq!(fact(9409).pairs(), &[(97, 2)]);
        assert_eq!(factorize(0), Err(ArithError::Zero));
        assert!(matches!(
            factorize(u64::MAX),
            Err(ArithError::OutOfRange(_))
        ));
    }

    #[test]
    fn factorize_large_semiprime() {
        // 2^61 - 1 is prime; a product of two large primes exercises rho.
        let p = 2_147_483_647u64; // 2^31 - 1
        let q = 2_147_483_629u64;
        let f = fact(p * q);
        assert_eq!(f.pairs(), &[(q, 1), (p, 1)]);
    }

    #[test]
    fn lambda_examples() {
        assert_eq!(carmichael_lambda(&fact(1)), 1);
        assert_eq!(carmichael_lambda(&fact(2)), 1);
        assert_eq!(carmichael_lambda(&fact(4)), 2);
        assert_eq!(carmichael_lambda(&fact(8)), 2);
        assert_eq!(carmichael_lambda(&fact(16)), 4);
        // Oracle: exponent of the unit group mod 12 by enumeration.
        assert_eq!(unit_group_exponent(12), 2);
        assert_eq!(carmichael_lambda(&fact(12)), 2);
    }

    #[test]
    fn lambda_matches_unit_group_exponent_small() {
        for n in 1..=2000 {
            assert_eq!(
                carmichael_lambda(&fact(n)),
                unit_group_exponent(n),
                "λ({n}) mismatch"
            );
        }
    }

    #[test]
    fn phi_examples() {
        assert_eq!(euler_phi(&fact(1)), 1);
        assert_eq!(euler_phi(&fact(9)), 6);
        // Oracle: count units mod 12.
        let units = (1..12).filter(|&a| gcd(a, 12) == 1).count() as u64;
        assert_eq!(units, 4);
        assert_eq!(euler_phi(&fact(12)), 4);
    }

    #[test]
    fn phi2_examples() {
        assert_eq!(schemmel_phi2(&fact(1)), 1);
        // Oracle: count a mod n with gcd(a(a−1), n) = 1.
        let direct = |n: u64| (0..n).filter(|&a| gcd(a * (a + n - 1) % n, n) == 1).count() as u64;
        assert_eq!(direct(5), 3);
        assert_eq!(schemmel_phi2(&fact(5)), 3);
        assert_eq!(direct(15), 3);
        assert_eq!(schemmel_phi2(&fact(15)), 3);
        assert_eq!(schemmel_phi2(&fact(10)), 0);
    }

    #[test]
    fn alpha_examples() {
        assert_eq!(alpha(&fact(1)), Ratio::new(1, 1));
        assert_eq!(alpha(&fact(5)), Ratio::new(3, 4));
        assert_eq!(alpha(&fact(15)), Ratio::new(3, 8));
        assert_eq!(alpha(&fact(6)), Ratio::new(0, 1));
    }

    #[test]
    fn smooth_part_examples() {
        assert_eq!(smooth_part(&fact(20), 3), 4);
        assert_eq!(smooth_part(&fact(72), 5), 72);
        assert_eq!(smooth_part(&fact(7), 2), 1);
        assert_eq!(smooth_part(&fact(96), 2), 32);
    }

    #[test]
    fn kth_largest_examples() {
        let f12 = fact(12);
        assert_eq!(kth_largest_prime_factor(&f12, 1), 3);
        assert_eq!(kth_largest_prime_factor(&f12, 2), 2);
        assert_eq!(kth_largest_prime_factor(&f12, 3), 2);
        assert_eq!(kth_largest_prime_factor(&f12, 4), 1);
        assert_eq!(kth_largest_prime_factor(&fact(1), 1), 1);
    }

    #[test]
    fn order_examples() {
        // Oracles: iterate powers directly.
        assert_eq!(naive_order(2, 7), 3);
        assert_eq!(naive_order(2, 9), 6);
        let ord = |a: i64, n: u64| {
            let lam = factorize(carmichael_lambda(&fact(n))).unwrap();
            multiplicative_order(a, n, &lam).unwrap()
        };
        assert_eq!(ord(2, 7), 3);
        assert_eq!(ord(2, 9), 6);
        assert_eq!(ord(5, 1), 1);
        assert_eq!(ord(-1, 7), 2);
        assert_eq!(ord(8, 7), 1); // 8 ≡ 1 mod 7
        assert!(matches!(
            multiplicative_order(6, 9, &fact(6)),
            Err(ArithError::NotCoprime { .. })
        ));
    }

    #[test]
    fn order_against_naive_random() {
        let mut state = 0x9e3779b97f4a7c15u64;
        for _ in 0..200 {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            let n = 3 + (state >> 33) % 5000;
            let a = 2 + (state >> 7) % (n - 2);
            if gcd(a, n) != 1 {
                continue;
            }
            let lam = factorize(carmichael_lambda(&fact(n))).unwrap();
            assert_eq!(
                multiplicative_order(a as i64, n, &lam).unwrap(),
                naive_order(a, n),
                "order of {a} mod {n}"
            );
        }
    }

    #[test]
    fn lcm_multiplicativity_small() {
        for m in 1..=120u64 {
            for n in 1..=120u64 {
                let l = m / gcd(m, n) * n;
                assert_eq!(
                    carmichael_lambda(&fact(l)),
                    checked_lcm(carmichael_lambda(&fact(m)), carmichael_lambda(&fact(n))).unwrap()
                );
            }
        }
    }

    #[test]
    fn arith_value_invariants() {
        for n in 1..=3000u64 {
            let v = ArithValue::from_factorization(&fact(n));
            assert_eq!(v.n, n);
            assert_eq!(v.phi % v.lambda, 0, "λ({n}) ∤ φ({n})");
            if n >= 3 {
                assert_eq!(v.lambda % 2, 0, "λ({n}) odd");
            }
        }
    }

    #[test]
    fn from_pairs_validates() {
        assert!(Factorization::from_pairs(vec![(2, 1), (3, 2)]).is_ok());
        assert!(Factorization::from_pairs(vec![(3, 1), (2, 1)]).is_err());
        assert!(Factorization::from_pairs(vec![(4, 1)]).is_err());
        assert!(Factorization::from_pairs(vec![(2, 0)]).is_err());
        assert_eq!(Factorization::from_pairs(vec![]).unwrap().value(), 1);
    }
}
