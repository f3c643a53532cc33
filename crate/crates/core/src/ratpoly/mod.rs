//! Exact rationals and bivariate polynomials.
//!
//! [`BivarPoly`] is a sparse map from exponent pairs to nonzero coefficients.
//! Every constructor and ring operation prunes zero coefficients, so two
//! polynomials are equal exactly when their term maps are equal.

mod parse;
mod poly;

pub use parse::{parse_poly, parse_rat};
pub use poly::{BivarPoly, Monomial};

use num_bigint::BigInt;
use num_traits::Signed;

use crate::Rat;

/// Number of decimal digits of `|n|` (at least 1).
pub fn decimal_digits(n: &BigInt) -> u64 {
    let bits = n.abs().bits();
    if bits == 0 {
        return 1;
    }
    // bits * log10(2), rounded up; off by at most one.
    ((bits as f64) * std::f64::consts::LOG10_2).ceil() as u64
}

/// Larger of the numerator and denominator digit counts.
pub fn rat_digits(r: &Rat) -> u64 {
    decimal_digits(r.numer()).max(decimal_digits(r.denom()))
}

/// Format a rational as `num/den`, or `num` when the denominator is one.
pub fn format_rat(r: &Rat) -> String {
    r.to_string()
}
