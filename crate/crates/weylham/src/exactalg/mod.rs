//! Exact rational-number, multivariate-polynomial, and rational-function
//! arithmetic with canonical forms.
//!
//! Everything downstream (flows, Backlund maps, Lax pencils, reductions)
//! is built on the types in this module. Coefficients are exact rationals
//! throughout; floating point only appears in the `numerics` module.

pub mod alphabet;
pub mod gcd;
pub mod laurent;
pub mod parse;
pub mod poly;
pub mod ratfun;
pub mod resultant;

pub use alphabet::Alphabet;
pub use laurent::LaurentSplit;
pub use poly::{Monomial, Polynomial};
pub use ratfun::RationalFunction;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

/// Exact rational coefficient. Invariants (reduced form, positive
/// denominator) are maintained by `num_rational`.
pub type Rat = num_rational::BigRational;

/// Shorthand for an integer rational.
pub fn rat(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Shorthand for the fraction `n/d`.
pub fn ratio(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `"num/den"` or `"num"` (optionally signed) into an exact rational.
pub fn parse_rat(s: &str) -> Result<Rat, ExactError> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: BigInt = num
        .parse()
        .map_err(|_| ExactError::BadRational(s.to_string()))?;
    let d: BigInt = den
        .parse()
        .map_err(|_| ExactError::BadRational(s.to_string()))?;
    if d.is_zero() {
        return Err(ExactError::BadRational(s.to_string()));
    }
    Ok(Rat::new(n, d))
}

/// Renders a rational as `"num/den"`, or just `"num"` when the denominator
/// is one. This is the only serialized form; rationals are never floats.
pub fn rat_to_string(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Best-effort f64 value of an exact rational (used only by `numerics`).
pub fn rat_to_f64(r: &Rat) -> f64 {
    let approx = |x: &BigInt| -> f64 {
        // Stay exact for small ints, fall back to string for big ones.
        match i64::try_from(x.clone()) {
            Ok(v) => v as f64,
            Err(_) => x.to_string().parse().unwrap_or(f64::NAN),
        }
    };
    let sign = if r.numer().is_negative() { -1.0 } else { 1.0 };
    sign * approx(&r.numer().abs()) / approx(r.denom())
}

/// Errors raised by the exact-algebra layer.
#[derive(Debug, Clone, thiserror::Error, PartialEq, Eq)]
pub enum ExactError {
    #[error("malformed rational literal: {0}")]
    BadRational(String),
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("alphabet mismatch: {0}")]
    AlphabetMismatch(String),
    #[error("division by zero polynomial")]
    DivisionByZero,
    #[error("substitution produced an identically zero denominator")]
    ZeroDenominator,
    #[error("denominator is not Laurent in `{0}` (sym-dependent non-monomial factor)")]
    NonLaurent(String),
    #[error("resultant input is constant in `{0}`")]
    ConstantInSym(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("exponent overflow")]
    ExponentOverflow,
}
