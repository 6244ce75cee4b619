//! Cross-module invariants that need more machinery than a unit test:
//! sieve-vs-trial-division agreement, order statistics against their
//! counting bounds, and the classical Mertens drift.

use lambda_core::arith::{
    carmichael_lambda, euler_phi, factorize, gcd, multiplicative_order, Factorization,
};
use lambda_core::orders::for_each_prime_order;
use lambda_core::residue::mertens_sum;
use lambda_core::sieve::{stream_records, SegmentConfig};

fn splitmix(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Plain trial division, independent of the Pollard-rho path in
/// arith::factorize and of the segment sieve.
fn trial_division(mut n: u64) -> Vec<(u64, u32)> {
    let mut pairs = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        let mut k = 0;
        while n % p == 0 {
            n /= p;
            k += 1;
        }
        if k > 0 {
            pairs.push((p, k));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        pairs.push((n, 1));
    }
    pairs
}

#[test]
fn sieve_records_match_trial_division() {
    let lo = 999_000_000u64;
    let hi = lo + (1 << 15) - 1;
    let cfg = SegmentConfig::new(lo, hi).with_segment_size(1 << 14);
    let records: Vec<_> = stream_records(&cfg).unwrap().collect();
    let mut state = 0x1234_5678_9abc_def0u64;
    for _ in 0..10_000 {
        let n = lo + splitmix(&mut state) % (hi - lo + 1);
        let rec = &records[(n - lo) as usize];
        let pairs = trial_division(n);
        assert_eq!(rec.factorization.pairs(), pairs.as_slice(), "n = {n}");
        let f = Factorization::from_pairs(pairs).unwrap();
        assert_eq!(rec.lambda, carmichael_lambda(&f));
        assert_eq!(rec.phi, euler_phi(&f));
    }
}

#[test]
fn order_counts_bounded_by_progression_counts() {
    let x = 100_000u64;
    // One pass: ℓ_2 divisibility counts for every d ≤ 20 plus the
    // counts of p ≡ 1 (mod d).
    let mut div_counts = [0u64; 21];
    let mut prog_counts = [0u64; 21];
    for_each_prime_order(x, 2, |p, ord| {
        for d in 1..=20u64 {
            if ord % d == 0 {
                div_counts[d as usize] += 1;
            }
            if (p - 1) % d == 0 {
                prog_counts[d as usize] += 1;
            }
        }
    })
    .unwrap();
    for d in 1..=20usize {
        assert!(
            div_counts[d] <= prog_counts[d],
            "d = {d}: {} > {}",
            div_counts[d],
            prog_counts[d]
        );
    }
    // Nonincreasing along divisor chains.
    for d in 1..=10u64 {
        for mult in 2..=(20 / d) {
            let dd = d * mult;
            assert!(div_counts[dd as usize] <= div_counts[d as usize]);
        }
    }
}

#[test]
fn prime_orders_agree_with_generic_order_routine() {
    let mut pairs: Vec<(u64, u64)> = Vec::new();
    for_each_prime_order(200_000, 2, |p, ord| pairs.push((p, ord))).unwrap();
    let mut state = 0xfeed_f00d_dead_beefu64;
    for _ in 0..10_000 {
        let (p, ord) = pairs[(splitmix(&mut state) % pairs.len() as u64) as usize];
        assert_eq!((p - 1) % ord, 0, "ℓ_2({p}) must divide p − 1");
        let a = 2 + splitmix(&mut state) % (p - 2).max(1);
        let lam_fact = factorize(p - 1).unwrap();
        let generic = multiplicative_order(a as i64, p, &lam_fact).unwrap();
        // Independent re-derivation through the arith-core routine.
        let mut check = 1u64;
        let mut x = a % p;
        while x != 1 {
            x = ((x as u128 * a as u128) % p as u128) as u64;
            check += 1;
            assert!(check <= p, "runaway order loop");
        }
        assert_eq!(generic, check, "order of {a} mod {p}");
    }
}

#[test]
fn order_recip_drift_stays_bounded() {
    // recip_sum(x) − beta_hat(x)·log log x moves by < 0.1 between 1e6
    // and 1e7 for a = 2, d ∈ {2, 3}.
    let checkpoints = [1_000_000u64, 10_000_000];
    let mut sums = [[0.0f64; 2]; 2];
    let mut counts = [[0u64; 2]; 2];
    let mut primes = [0u64; 2];
    for_each_prime_order(checkpoints[1], 2, |p, ord| {
        let bucket = usize::from(p > checkpoints[0]);
        primes[bucket] += 1;
        for (i, d) in [2u64, 3].into_iter().enumerate() {
            if ord % d == 0 {
                sums[bucket][i] += 1.0 / p as f64;
                counts[bucket][i] += 1;
            }
        }
    })
    .unwrap();
    for (i, d) in [2u64, 3].into_iter().enumerate() {
        let drift_at = |b: usize| {
            let total_primes: u64 = primes[..=b].iter().sum::<u64>() + 1; // p = 2 skipped
            let count: u64 = (0..=b).map(|k| counts[k][i]).sum();
            let sum: f64 = (0..=b).map(|k| sums[k][i]).sum();
            let beta_hat = count as f64 / total_primes as f64;
            sum - beta_hat * (checkpoints[b] as f64).ln().ln()
        };
        let delta = (drift_at(1) - drift_at(0)).abs();
        assert!(delta < 0.1, "d = {d}: drift delta {delta}");
        println!("order recip drift d = {d}: Δ = {delta:.6}");
    }
}

#[test]
fn classical_mertens_drift() {
    // The q = 1, s = 1 residuals reproduce second-Mertens convergence:
    // residual(1e7) − residual(1e6) within ±0.01.
    let report = mertens_sum(&[1_000_000, 10_000_000], 1, 1).unwrap();
    let delta = report.checkpoints[1].residual - report.checkpoints[0].residual;
    println!("classical Mertens drift: {delta:+.6}");
    assert!(delta.abs() < 0.01);
}

#[test]
fn lcm_law_exhaustive_to_1000() {
    // λ(lcm[m, n]) = lcm[λ(m), λ(n)] on every pair m, n ≤ 1e3.
    let lam: Vec<u64> = stream_records(&SegmentConfig::new(1, 1_000_000))
        .unwrap()
        .map(|r| r.lambda)
        .collect();
    let l = |v: u64| lam[(v - 1) as usize];
    for m in 1..=1000u64 {
        for n in m..=1000u64 {
            let lcm_mn = m / gcd(m, n) * n;
            let expect = {
                let (a, b) = (l(m), l(n));
                a / gcd(a, b) * b
            };
            assert_eq!(l(lcm_mn), expect, "m = {m}, n = {n}");
        }
    }
}

#[test]
fn wud_histograms_match_per_n_factorization_scan() {
    // Totals and per-class counts from the segmented sieve agree with an
    // independent per-n factorization pass (trial division + rho, no
    // shared sieve code) for every odd q ≤ 45 at x = 1e4.
    use lambda_core::residue::wud_histogram;
    use lambda_core::sieve::ScanOptions;
    const X: u64 = 10_000;
    let lam: Vec<u64> = (1..=X)
        .map(|n| carmichael_lambda(&factorize(n).unwrap()))
        .collect();
    for q in (1..=45u64).step_by(2) {
        let hist = wud_histogram(X, q, &ScanOptions::serial()).unwrap();
        let mut counts = vec![0u64; q as usize];
        let mut total = 0u64;
        for &l in &lam {
            if gcd(l % q, q) == 1 {
                counts[(l % q) as usize] += 1;
                total += 1;
            }
        }
        assert_eq!(hist.total(), total, "q = {q}");
        for a in 0..q {
            assert_eq!(hist.count(a), counts[a as usize], "q = {q}, a = {a}");
        }
    }
}

#[test]
fn lambda_phi_share_prime_support() {
    // gcd(λ(n), q) = 1 ⇔ gcd(φ(n), q) = 1 for n ≤ 1e4, q ≤ 50.
    let cfg = SegmentConfig::new(1, 10_000);
    for rec in stream_records(&cfg).unwrap() {
        for q in 1..=50u64 {
            assert_eq!(
                gcd(rec.lambda, q) == 1,
                gcd(rec.phi, q) == 1,
                "n = {}, q = {q}",
                rec.n
            );
        }
    }
}
