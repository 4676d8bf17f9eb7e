//! Rational functions: quotients of multivariate polynomials in lowest
//! terms, with the denominator's graded-lex leading coefficient fixed
//! to +1.

use std::collections::HashMap;
use std::fmt;

use num_traits::One;

use super::gcd::gcd;
use super::poly::Polynomial;
use super::{Alphabet, ExactError, Rat};

#[derive(Clone, PartialEq, Eq)]
pub struct RationalFunction {
    num: Polynomial,
    den: Polynomial,
}

impl RationalFunction {
    /// Builds `num/den` in canonical form. Errors if `den` is zero.
    pub fn new(num: Polynomial, den: Polynomial) -> Result<Self, ExactError> {
        if den.is_zero() {
            return Err(ExactError::DivisionByZero);
        }
        Ok(Self::normalized(num, den))
    }

    fn normalized(num: Polynomial, den: Polynomial) -> Self {
        debug_assert!(!den.is_zero());
        if num.is_zero() {
            return RationalFunction {
                den: Polynomial::one(num.alphabet()),
                num,
            };
        }
        if let Some(c) = den.as_constant() {
            let inv = Rat::one() / c;
            return RationalFunction {
                num: num.scale(&inv),
                den: Polynomial::one(num.alphabet()),
            };
        }
        // Cheap path first: denominator divides numerator exactly.
        if let Some(q) = num.div_exact(&den) {
            return RationalFunction {
                den: Polynomial::one(q.alphabet()),
                num: q,
            };
        }
        let g = gcd(&num, &den);
        let (mut n, mut d) = if g.is_constant() {
            (num, den)
        } else {
            (
                num.div_exact(&g).expect("gcd divides"),
                den.div_exact(&g).expect("gcd divides"),
            )
        };
        // Fix the denominator leading coefficient to +1.
        let lc = d.leading().expect("nonzero").1.clone();
        if !lc.is_one() {
            let inv = Rat::one() / lc;
            n = n.scale(&inv);
            d = d.scale(&inv);
        }
        RationalFunction { num: n, den: d }
    }

    pub fn from_poly(p: Polynomial) -> Self {
        RationalFunction {
            den: Polynomial::one(p.alphabet()),
            num: p,
        }
    }

    pub fn zero(alph: &Alphabet) -> Self {
        Self::from_poly(Polynomial::zero(alph))
    }

    pub fn one(alph: &Alphabet) -> Self {
        Self::from_poly(Polynomial::one(alph))
    }

    pub fn constant(alph: &Alphabet, c: Rat) -> Self {
        Self::from_poly(Polynomial::constant(alph, c))
    }

    pub fn var(alph: &Alphabet, name: &str) -> Result<Self, ExactError> {
        Ok(Self::from_poly(Polynomial::var(alph, name)?))
    }

    pub fn numerator(&self) -> &Polynomial {
        &self.num
    }

    pub fn denominator(&self) -> &Polynomial {
        &self.den
    }

    pub fn alphabet(&self) -> &Alphabet {
        self.num.alphabet()
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_one()
    }

    /// The polynomial content when the denominator is 1.
    pub fn as_polynomial(&self) -> Option<&Polynomial> {
        if self.den.is_one() {
            Some(&self.num)
        } else {
            None
        }
    }

    pub fn as_constant(&self) -> Option<Rat> {
        if self.den.is_one() {
            self.num.as_constant()
        } else {
            None
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self, ExactError> {
        if self.is_zero() {
            return Ok(other.clone());
        }
        if other.is_zero() {
            return Ok(self.clone());
        }
        if self.den == other.den {
            let n = self.num.add(&other.num)?;
            return Self::new(n, self.den.clone());
        }
        // a/b + c/d over b*(d/g) with g = gcd(b, d).
        let g = gcd(&self.den, &other.den);
        let (db, dd) = if g.is_constant() {
            (self.den.clone(), other.den.clone())
        } else {
            (
                self.den.div_exact(&g).expect("gcd divides"),
                other.den.div_exact(&g).expect("gcd divides"),
            )
        };
        let n = self.num.mul(&dd)?.add(&other.num.mul(&db)?)?;
        let d = self.den.mul(&dd)?;
        Ok(Self::normalized(n, d))
    }

    pub fn sub(&self, other: &Self) -> Result<Self, ExactError> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        RationalFunction {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub fn mul(&self, other: &Self) -> Result<Self, ExactError> {
        if self.is_zero() || other.is_zero() {
            return Ok(Self::zero(self.alphabet()));
        }
        // Cross-reduce before multiplying to keep intermediates small.
        let g1 = gcd(&self.num, &other.den);
        let g2 = gcd(&other.num, &self.den);
        let (n1, d2) = if g1.is_constant() {
            (self.num.clone(), other.den.clone())
        } else {
            (
                self.num.div_exact(&g1).expect("gcd divides"),
                other.den.div_exact(&g1).expect("gcd divides"),
            )
        };
        let (n2, d1) = if g2.is_constant() {
            (other.num.clone(), self.den.clone())
        } else {
            (
                other.num.div_exact(&g2).expect("gcd divides"),
                self.den.div_exact(&g2).expect("gcd divides"),
            )
        };
        Self::new(n1.mul(&n2)?, d1.mul(&d2)?)
    }

    pub fn div(&self, other: &Self) -> Result<Self, ExactError> {
        if other.is_zero() {
            return Err(ExactError::DivisionByZero);
        }
        self.mul(&RationalFunction {
            num: other.den.clone(),
            den: other.num.clone(),
        })
    }

    pub fn scale(&self, c: &Rat) -> Self {
        RationalFunction {
            num: self.num.scale(c),
            den: self.den.clone(),
        }
    }

    pub fn pow(&self, n: i32) -> Result<Self, ExactError> {
        if n == 0 {
            return Ok(Self::one(self.alphabet()));
        }
        let base = if n < 0 {
            if self.is_zero() {
                return Err(ExactError::DivisionByZero);
            }
            RationalFunction::new(self.den.clone(), self.num.clone())?
        } else {
            self.clone()
        };
        let k = n.unsigned_abs();
        Ok(RationalFunction {
            num: base.num.pow(k)?,
            den: base.den.pow(k)?,
        })
    }

    /// Equality without normalizing: cross-multiplied zero test.
    pub fn equals(&self, other: &Self) -> Result<bool, ExactError> {
        if !self.alphabet().same_as(other.alphabet()) {
            return self.equals_by_name(other);
        }
        if self.den == other.den {
            return Ok(self.num == other.num);
        }
        let lhs = self.num.mul(&other.den)?;
        let rhs = other.num.mul(&self.den)?;
        Ok(lhs == rhs)
    }

    /// Equality across different (but name-compatible) alphabets.
    pub fn equals_by_name(&self, other: &Self) -> Result<bool, ExactError> {
        let common = self.alphabet().union(other.alphabet());
        let a = self.embed(&common)?;
        let b = other.embed(&common)?;
        if a.den == b.den {
            return Ok(a.num == b.num);
        }
        Ok(a.num.mul(&b.den)? == b.num.mul(&a.den)?)
    }

    /// Quotient-rule partial derivative with respect to a named symbol.
    pub fn partial_derivative(&self, sym: &str) -> Result<Self, ExactError> {
        let idx = self.alphabet().require(sym)?;
        self.derivative_idx(idx)
    }

    pub fn derivative_idx(&self, idx: usize) -> Result<Self, ExactError> {
        let dn = self.num.derivative(idx);
        if self.den.is_one() {
            return Ok(Self::from_poly(dn));
        }
        let dd = self.den.derivative(idx);
        // (n' d - n d') / d^2
        let num = dn.mul(&self.den)?.sub(&self.num.mul(&dd)?)?;
        let den = self.den.mul(&self.den)?;
        Ok(Self::normalized(num, den))
    }

    /// Simultaneous substitution of rational functions for symbols.
    /// Unbound symbols pass through by name into the target alphabet.
    pub fn substitute(
        &self,
        target: &Alphabet,
        bindings: &HashMap<String, RationalFunction>,
    ) -> Result<Self, ExactError> {
        let n_sub = substitute_poly(&self.num, target, bindings)?;
        if self.den.is_one() {
            return Ok(n_sub);
        }
        let d_sub = substitute_poly(&self.den, target, bindings)?;
        if d_sub.is_zero() {
            return Err(ExactError::ZeroDenominator);
        }
        n_sub.div(&d_sub)
    }

    /// Re-expresses over a larger alphabet by symbol name.
    pub fn embed(&self, target: &Alphabet) -> Result<Self, ExactError> {
        Ok(RationalFunction {
            num: self.num.embed(target)?,
            den: self.den.embed(target)?,
        })
    }

    pub fn eval_f64(&self, values: &[f64]) -> f64 {
        self.num.eval_f64(values) / self.den.eval_f64(values)
    }

    pub fn eval_rat(&self, values: &[Rat]) -> Result<Rat, ExactError> {
        let d = self.den.eval_rat(values);
        if num_traits::Zero::is_zero(&d) {
            return Err(ExactError::DivisionByZero);
        }
        Ok(self.num.eval_rat(values) / d)
    }
}

/// Substitutes rational functions into a polynomial, combining over a
/// single common denominator (the product of the distinct binding
/// denominators raised to the needed powers) and normalizing once.
pub fn substitute_poly(
    p: &Polynomial,
    target: &Alphabet,
    bindings: &HashMap<String, RationalFunction>,
) -> Result<RationalFunction, ExactError> {
    let alph = p.alphabet();
    let n = alph.len();

    // Resolve each *used* source variable: a binding or a pass-through.
    let used = {
        let mut f = vec![false; n];
        for i in p.support() {
            f[i] = true;
        }
        f
    };
    let mut binding_for: Vec<Option<&RationalFunction>> = Vec::with_capacity(n);
    let mut passthrough: Vec<Option<usize>> = Vec::with_capacity(n);
    for i in 0..n {
        let name = alph.name(i);
        if !used[i] {
            binding_for.push(None);
            passthrough.push(None);
            continue;
        }
        if let Some(r) = bindings.get(name) {
            if !r.alphabet().same_as(target) {
                return Err(ExactError::AlphabetMismatch(
                    "binding not over target alphabet".into(),
                ));
            }
            binding_for.push(Some(r));
            passthrough.push(None);
        } else {
            binding_for.push(None);
            passthrough.push(Some(target.require(name)?));
        }
    }

    // Maximum power each bound variable appears with.
    let mut max_pow = vec![0u16; n];
    for (m, _) in p.terms() {
        for (i, &e) in m.0.iter().enumerate() {
            if binding_for[i].is_some() && e > max_pow[i] {
                max_pow[i] = e;
            }
        }
    }

    // Memoized powers of numerators and denominators.
    let mut num_pows: HashMap<(usize, u16), Polynomial> = HashMap::new();
    let mut den_pows: HashMap<(usize, u16), Polynomial> = HashMap::new();
    let pow_of = |cache: &mut HashMap<(usize, u16), Polynomial>,
                  base: &Polynomial,
                  i: usize,
                  e: u16|
     -> Result<Polynomial, ExactError> {
        if let Some(p) = cache.get(&(i, e)) {
            return Ok(p.clone());
        }
        let p = base.pow(e as u32)?;
        cache.insert((i, e), p.clone());
        Ok(p)
    };

    // Common denominator: product of den_i^{max_pow_i}.
    let mut common_den = Polynomial::one(target);
    for i in 0..n {
        if let Some(r) = binding_for[i] {
            if max_pow[i] > 0 && !r.denominator().is_one() {
                let dp = pow_of(&mut den_pows, r.denominator(), i, max_pow[i])?;
                common_den = common_den.mul(&dp)?;
            }
        }
    }

    let mut num_acc = Polynomial::zero(target);
    for (m, c) in p.terms() {
        let mut term = Polynomial::constant(target, c.clone());
        for (i, &e) in m.0.iter().enumerate() {
            match (binding_for[i], passthrough[i]) {
                (Some(r), _) => {
                    if e > 0 {
                        let np = pow_of(&mut num_pows, r.numerator(), i, e)?;
                        term = term.mul(&np)?;
                    }
                    // Every term sits over the full common denominator,
                    // so variables the term lacks still contribute their
                    // denominator deficit.
                    let deficit = max_pow[i] - e;
                    if deficit > 0 && !r.denominator().is_one() {
                        let dp = pow_of(&mut den_pows, r.denominator(), i, deficit)?;
                        term = term.mul(&dp)?;
                    }
                }
                (None, Some(j)) => {
                    if e > 0 {
                        term = term.mul_var_pow(j, e)?;
                    }
                }
                (None, None) => debug_assert_eq!(e, 0),
            }
        }
        num_acc = num_acc.add(&term)?;
    }
    RationalFunction::new(num_acc, common_den)
}

impl fmt::Display for RationalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({}) / ({})", self.num, self.den)
        }
    }
}

impl fmt::Debug for RationalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::super::{rat, Alphabet};
    use super::*;

    fn ab() -> Alphabet {
        Alphabet::new(&["x", "p"]).unwrap()
    }

    #[test]
    fn inverse_power_rule() {
        // d/dp (1/p) = -1/p^2
        let a = ab();
        let p = Polynomial::var(&a, "p").unwrap();
        let inv_p = RationalFunction::new(Polynomial::one(&a), p.clone()).unwrap();
        let d = inv_p.partial_derivative("p").unwrap();
        let expect =
            RationalFunction::new(Polynomial::constant(&a, rat(-1)), p.pow(2).unwrap()).unwrap();
        assert_eq!(d, expect);
    }

    #[test]
    fn normalization_cancels() {
        let a = ab();
        let x = Polynomial::var(&a, "x").unwrap();
        let p = Polynomial::var(&a, "p").unwrap();
        let xp = x.mul(&p).unwrap();
        // (x^2 p) / (x p) = x
        let r = RationalFunction::new(x.mul(&xp).unwrap(), xp.clone()).unwrap();
        assert_eq!(r, RationalFunction::from_poly(x));
    }

    #[test]
    fn den_leading_coeff_is_one() {
        let a = ab();
        let x = Polynomial::var(&a, "x").unwrap();
        let den = x.scale(&rat(-2)); // -2x
        let r = RationalFunction::new(Polynomial::one(&a), den).unwrap();
        assert_eq!(r.denominator(), &x);
        assert_eq!(
            r.numerator(),
            &Polynomial::constant(&a, super::super::ratio(-1, 2))
        );
    }

    #[test]
    fn identity_substitution() {
        let a = ab();
        let x = Polynomial::var(&a, "x").unwrap();
        let p = Polynomial::var(&a, "p").unwrap();
        let f = RationalFunction::new(x.clone(), p.clone()).unwrap();
        let out = f.substitute(&a, &HashMap::new()).unwrap();
        assert_eq!(out, f);
    }
}
