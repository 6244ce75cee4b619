//! Exact arithmetic and large-scale statistics for Carmichael's λ function.
//!
//! The crate is organized around a segmented factorization sieve
//! ([`sieve`]) feeding several statistics layers:
//!
//! * [`arith`]: λ, φ, the Schemmel totient φ₂, α(q), smooth parts,
//!   k-th largest prime factors, and multiplicative orders, all exact on
//!   machine words.
//! * [`residue`]: residue-class histograms of λ(n) mod q, Mertens-type
//!   prime sums, the mod-3 split, and convenient-number classification.
//! * [`benford`]: leading-digit statistics and Weyl exponential sums for
//!   arbitrary positive-integer streams.
//! * [`orders`]: statistics of multiplicative orders ℓ_a(p) and ℓ_a(n).
//! * [`tuples`]: exact counts of admissible residue tuples via unit-group
//!   convolution, checked against exhaustive enumeration.

pub mod arith;
pub mod benford;
pub mod kahan;
pub mod orders;
pub mod residue;
pub mod sieve;
pub mod tuples;
