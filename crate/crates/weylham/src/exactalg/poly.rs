//! Sparse multivariate polynomials with exact rational coefficients.
//!
//! Terms are kept in a `BTreeMap` keyed by graded-lexicographic monomial
//! order, so two polynomials are equal iff their term maps are identical:
//! the representation is the canonical form.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::{rat_to_string, Alphabet, ExactError, Rat};

/// Exponent vector over a fixed alphabet. Ordered by total degree first,
/// then lexicographically (graded lex), which fixes leading terms for
/// normalization.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Monomial(pub Box<[u16]>);

impl Monomial {
    pub fn constant(n: usize) -> Self {
        Monomial(vec![0u16; n].into_boxed_slice())
    }

    pub fn var(n: usize, idx: usize) -> Self {
        let mut e = vec![0u16; n];
        e[idx] = 1;
        Monomial(e.into_boxed_slice())
    }

    pub fn total_degree(&self) -> u32 {
        self.0.iter().map(|&e| e as u32).sum()
    }

    pub fn is_constant(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn mul(&self, other: &Monomial) -> Result<Monomial, ExactError> {
        debug_assert_eq!(self.0.len(), other.0.len());
        let mut e = Vec::with_capacity(self.0.len());
        for (a, b) in self.0.iter().zip(other.0.iter()) {
            let s = (*a as u32) + (*b as u32);
            if s > u16::MAX as u32 {
                return Err(ExactError::ExponentOverflow);
            }
            e.push(s as u16);
        }
        Ok(Monomial(e.into_boxed_slice()))
    }

    /// Componentwise division; `None` when not divisible.
    pub fn div(&self, other: &Monomial) -> Option<Monomial> {
        let mut e = Vec::with_capacity(self.0.len());
        for (a, b) in self.0.iter().zip(other.0.iter()) {
            if a < b {
                return None;
            }
            e.push(a - b);
        }
        Some(Monomial(e.into_boxed_slice()))
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.total_degree()
            .cmp(&other.total_degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A multivariate polynomial in canonical form: no zero coefficient is
/// stored and exponent vectors all have the alphabet's length.
#[derive(Clone, PartialEq, Eq)]
pub struct Polynomial {
    alph: Alphabet,
    terms: BTreeMap<Monomial, Rat>,
}

impl Polynomial {
    pub fn zero(alph: &Alphabet) -> Self {
        Polynomial {
            alph: alph.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(alph: &Alphabet, c: Rat) -> Self {
        let mut p = Self::zero(alph);
        if !c.is_zero() {
            p.terms.insert(Monomial::constant(alph.len()), c);
        }
        p
    }

    pub fn one(alph: &Alphabet) -> Self {
        Self::constant(alph, Rat::one())
    }

    pub fn var(alph: &Alphabet, name: &str) -> Result<Self, ExactError> {
        let idx = alph.require(name)?;
        let mut p = Self::zero(alph);
        p.terms.insert(Monomial::var(alph.len(), idx), Rat::one());
        Ok(p)
    }

    pub fn from_terms(
        alph: &Alphabet,
        terms: impl IntoIterator<Item = (Monomial, Rat)>,
    ) -> Self {
        let mut p = Self::zero(alph);
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alph
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1
            && self
                .terms
                .iter()
                .next()
                .map(|(m, c)| m.is_constant() && c.is_one())
                .unwrap_or(false)
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|m| m.is_constant())
    }

    /// The constant value when `is_constant()`, else `None`.
    pub fn as_constant(&self) -> Option<Rat> {
        if self.is_zero() {
            return Some(Rat::zero());
        }
        if self.terms.len() == 1 {
            if let Some((m, c)) = self.terms.iter().next() {
                if m.is_constant() {
                    return Some(c.clone());
                }
            }
        }
        None
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rat)> {
        self.terms.iter()
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|m| m.total_degree()).max().unwrap_or(0)
    }

    /// Degree in one variable.
    pub fn degree_in(&self, idx: usize) -> u16 {
        self.terms.keys().map(|m| m.0[idx]).max().unwrap_or(0)
    }

    /// Total degree counting only the listed variables.
    pub fn degree_in_vars(&self, idxs: &[usize]) -> u32 {
        self.terms
            .keys()
            .map(|m| idxs.iter().map(|&i| m.0[i] as u32).sum())
            .max()
            .unwrap_or(0)
    }

    pub fn depends_on(&self, idx: usize) -> bool {
        self.terms.keys().any(|m| m.0[idx] > 0)
    }

    /// Indices of all variables with nonzero exponent somewhere.
    pub fn support(&self) -> Vec<usize> {
        let n = self.alph.len();
        let mut seen = vec![false; n];
        for m in self.terms.keys() {
            for (i, &e) in m.0.iter().enumerate() {
                if e > 0 {
                    seen[i] = true;
                }
            }
        }
        (0..n).filter(|&i| seen[i]).collect()
    }

    /// Leading (monomial, coefficient) under graded lex; `None` for zero.
    pub fn leading(&self) -> Option<(&Monomial, &Rat)> {
        self.terms.iter().next_back()
    }

    pub fn coeff(&self, m: &Monomial) -> Rat {
        self.terms.get(m).cloned().unwrap_or_else(Rat::zero)
    }

    fn add_term(&mut self, m: Monomial, c: Rat) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                let sum = o.get() + &c;
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    fn check_alph(&self, other: &Polynomial) -> Result<(), ExactError> {
        if self.alph.same_as(&other.alph) {
            Ok(())
        } else {
            Err(ExactError::AlphabetMismatch(format!(
                "{:?} vs {:?}",
                self.alph, other.alph
            )))
        }
    }

    pub fn add(&self, other: &Polynomial) -> Result<Polynomial, ExactError> {
        self.check_alph(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Polynomial) -> Result<Polynomial, ExactError> {
        self.check_alph(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c.clone());
        }
        Ok(out)
    }

    pub fn neg(&self) -> Polynomial {
        Polynomial {
            alph: self.alph.clone(),
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), -c.clone()))
                .collect(),
        }
    }

    pub fn mul(&self, other: &Polynomial) -> Result<Polynomial, ExactError> {
        self.check_alph(other)?;
        if self.is_zero() || other.is_zero() {
            return Ok(Self::zero(&self.alph));
        }
        // Accumulate in a hash map, then canonicalize once.
        let mut acc: HashMap<Monomial, Rat> =
            HashMap::with_capacity(self.terms.len() * other.terms.len() / 2 + 1);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                let m = m1.mul(m2)?;
                let c = c1 * c2;
                match acc.entry(m) {
                    std::collections::hash_map::Entry::Vacant(v) => {
                        v.insert(c);
                    }
                    std::collections::hash_map::Entry::Occupied(mut o) => {
                        *o.get_mut() += c;
                    }
                }
            }
        }
        let terms: BTreeMap<Monomial, Rat> =
            acc.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        Ok(Polynomial {
            alph: self.alph.clone(),
            terms,
        })
    }

    pub fn scale(&self, c: &Rat) -> Polynomial {
        if c.is_zero() {
            return Self::zero(&self.alph);
        }
        Polynomial {
            alph: self.alph.clone(),
            terms: self
                .terms
                .iter()
                .map(|(m, k)| (m.clone(), k * c))
                .collect(),
        }
    }

    pub fn pow(&self, n: u32) -> Result<Polynomial, ExactError> {
        let mut out = Self::one(&self.alph);
        let mut base = self.clone();
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                out = out.mul(&base)?;
            }
            n >>= 1;
            if n > 0 {
                base = base.mul(&base)?;
            }
        }
        Ok(out)
    }

    /// Partial derivative with respect to one variable.
    pub fn derivative(&self, idx: usize) -> Polynomial {
        let mut out = Self::zero(&self.alph);
        for (m, c) in &self.terms {
            let e = m.0[idx];
            if e == 0 {
                continue;
            }
            let mut v = m.0.to_vec();
            v[idx] = e - 1;
            out.add_term(Monomial(v.into_boxed_slice()), c * Rat::from_integer(e.into()));
        }
        out
    }

    /// Multiply by `var^k`.
    pub fn mul_var_pow(&self, idx: usize, k: u16) -> Result<Polynomial, ExactError> {
        let mut out = Self::zero(&self.alph);
        for (m, c) in &self.terms {
            let mut v = m.0.to_vec();
            let s = v[idx] as u32 + k as u32;
            if s > u16::MAX as u32 {
                return Err(ExactError::ExponentOverflow);
            }
            v[idx] = s as u16;
            out.terms.insert(Monomial(v.into_boxed_slice()), c.clone());
        }
        Ok(out)
    }

    /// View as univariate in `idx`: coefficients by ascending power.
    /// The coefficient polynomials have `idx`-exponent zeroed out.
    pub fn coeffs_in_var(&self, idx: usize) -> Vec<Polynomial> {
        let d = self.degree_in(idx) as usize;
        let mut out = vec![Self::zero(&self.alph); d + 1];
        for (m, c) in &self.terms {
            let e = m.0[idx] as usize;
            let mut v = m.0.to_vec();
            v[idx] = 0;
            out[e].add_term(Monomial(v.into_boxed_slice()), c.clone());
        }
        out
    }

    /// Rebuild from univariate coefficients in `idx`.
    pub fn from_coeffs_in_var(
        alph: &Alphabet,
        idx: usize,
        coeffs: &[Polynomial],
    ) -> Result<Polynomial, ExactError> {
        let mut out = Self::zero(alph);
        for (k, c) in coeffs.iter().enumerate() {
            let shifted = c.mul_var_pow(idx, k as u16)?;
            out = out.add(&shifted)?;
        }
        Ok(out)
    }

    /// Exact division; `None` when the division leaves a remainder.
    /// Divisor must be nonzero.
    pub fn div_exact(&self, divisor: &Polynomial) -> Option<Polynomial> {
        assert!(!divisor.is_zero(), "division by zero polynomial");
        if self.is_zero() {
            return Some(Self::zero(&self.alph));
        }
        if let Some(c) = divisor.as_constant() {
            return Some(self.scale(&(Rat::one() / c)));
        }
        let (dm, dc) = divisor.leading().unwrap();
        let dm = dm.clone();
        let dc = dc.clone();
        let mut rem = self.clone();
        let mut quo = Self::zero(&self.alph);
        while let Some((rm, rc)) = rem.leading() {
            let q = rm.div(&dm)?;
            let qc = rc / &dc;
            // quo += qc * q ; rem -= (qc*q) * divisor
            let mut t = Self::zero(&self.alph);
            t.terms.insert(q.clone(), qc.clone());
            quo = quo.add(&t).ok()?;
            let sub = t.mul(divisor).ok()?;
            rem = rem.sub(&sub).ok()?;
        }
        Some(quo)
    }

    /// Greatest power of `b` dividing `self` (capped), with the cofactor.
    pub fn extract_power_of(&self, b: &Polynomial, cap: u32) -> (u32, Polynomial) {
        let mut k = 0;
        let mut cur = self.clone();
        while k < cap {
            match cur.div_exact(b) {
                Some(q) => {
                    cur = q;
                    k += 1;
                }
                None => break,
            }
        }
        (k, cur)
    }

    /// Rational content: the positive rational `c` such that `self / c`
    /// has coprime integer coefficients with positive leading coefficient
    /// is `content_signed`. Returns zero for the zero polynomial.
    pub fn content_signed(&self) -> Rat {
        use num_bigint::BigInt;
        use num_integer::Integer;
        if self.is_zero() {
            return Rat::zero();
        }
        let mut num_gcd = BigInt::zero();
        let mut den_lcm = BigInt::one();
        for c in self.terms.values() {
            num_gcd = num_gcd.gcd(&c.numer().abs());
            den_lcm = den_lcm.lcm(c.denom());
        }
        let mut content = Rat::new(num_gcd, den_lcm);
        if self.leading().map(|(_, c)| c.is_negative()).unwrap_or(false) {
            content = -content;
        }
        content
    }

    /// Divides out the signed content: integer coprime coefficients,
    /// positive leading coefficient.
    pub fn primitive_part_signed(&self) -> Polynomial {
        if self.is_zero() {
            return self.clone();
        }
        let c = self.content_signed();
        self.scale(&(Rat::one() / c))
    }

    /// Scales so the graded-lex leading coefficient is +1.
    pub fn monic(&self) -> Polynomial {
        match self.leading() {
            None => self.clone(),
            Some((_, c)) => {
                let inv = Rat::one() / c.clone();
                self.scale(&inv)
            }
        }
    }

    /// Substitutes polynomials for variables (simultaneously). Bindings
    /// give replacement polynomials over the *target* alphabet; variables
    /// without a binding must exist in the target alphabet by name.
    pub fn substitute_poly(
        &self,
        target: &Alphabet,
        bindings: &HashMap<String, Polynomial>,
    ) -> Result<Polynomial, ExactError> {
        let n = self.alph.len();
        let used = {
            let mut f = vec![false; n];
            for i in self.support() {
                f[i] = true;
            }
            f
        };
        // Per-variable replacement polynomial (used variables only).
        let mut repl: Vec<Option<Polynomial>> = Vec::with_capacity(n);
        let mut plain: Vec<Option<usize>> = Vec::with_capacity(n);
        for i in 0..n {
            let name = self.alph.name(i);
            if !used[i] {
                repl.push(None);
                plain.push(None);
                continue;
            }
            if let Some(p) = bindings.get(name) {
                if !p.alphabet().same_as(target) {
                    return Err(ExactError::AlphabetMismatch(
                        "binding not over target alphabet".into(),
                    ));
                }
                repl.push(Some(p.clone()));
                plain.push(None);
            } else {
                repl.push(None);
                plain.push(Some(target.require(name)?));
            }
        }
        // Memoized powers of replaced variables.
        let mut pow_cache: HashMap<(usize, u16), Polynomial> = HashMap::new();
        let mut out = Polynomial::zero(target);
        for (m, c) in &self.terms {
            let mut term = Polynomial::constant(target, c.clone());
            let mut mono = Monomial::constant(target.len());
            for (i, &e) in m.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                match (&repl[i], plain[i]) {
                    (Some(_), _) => {
                        let key = (i, e);
                        if !pow_cache.contains_key(&key) {
                            let p = repl[i].as_ref().unwrap().pow(e as u32)?;
                            pow_cache.insert(key, p);
                        }
                        term = term.mul(&pow_cache[&key])?;
                    }
                    (None, Some(j)) => {
                        let mut v = mono.0.to_vec();
                        let s = v[j] as u32 + e as u32;
                        if s > u16::MAX as u32 {
                            return Err(ExactError::ExponentOverflow);
                        }
                        v[j] = s as u16;
                        mono = Monomial(v.into_boxed_slice());
                    }
                    (None, None) => debug_assert_eq!(e, 0),
                }
            }
            let mono_poly = Polynomial::from_terms(target, [(mono, Rat::one())]);
            out = out.add(&term.mul(&mono_poly)?)?;
        }
        Ok(out)
    }

    /// Re-expresses the polynomial over a larger alphabet (matching by
    /// symbol name). Every symbol actually used must exist in the target.
    pub fn embed(&self, target: &Alphabet) -> Result<Polynomial, ExactError> {
        if self.alph.same_as(target) {
            return Ok(self.clone());
        }
        let n = self.alph.len();
        let mut map = Vec::with_capacity(n);
        for i in 0..n {
            map.push(target.index_of(self.alph.name(i)));
        }
        let mut out = Polynomial::zero(target);
        for (m, c) in &self.terms {
            let mut v = vec![0u16; target.len()];
            for (i, &e) in m.0.iter().enumerate() {
                if e > 0 {
                    match map[i] {
                        Some(j) => v[j] = e,
                        None => {
                            return Err(ExactError::UnknownSymbol(
                                self.alph.name(i).to_string(),
                            ))
                        }
                    }
                }
            }
            out.add_term(Monomial(v.into_boxed_slice()), c.clone());
        }
        Ok(out)
    }

    /// Evaluates at exact rational points (all variables bound).
    pub fn eval_rat(&self, values: &[Rat]) -> Rat {
        assert_eq!(values.len(), self.alph.len());
        let mut acc = Rat::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (i, &e) in m.0.iter().enumerate() {
                for _ in 0..e {
                    t *= &values[i];
                }
            }
            acc += t;
        }
        acc
    }

    /// Evaluates in f64 (used by the numerics layer).
    pub fn eval_f64(&self, values: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (m, c) in &self.terms {
            let mut t = super::rat_to_f64(c);
            for (i, &e) in m.0.iter().enumerate() {
                t *= values[i].powi(e as i32);
            }
            acc += t;
        }
        acc
    }

    pub fn to_json_terms(&self) -> Vec<PolyTermJson> {
        self.terms
            .iter()
            .map(|(m, c)| PolyTermJson {
                exponents: m.0.iter().map(|&e| e as u32).collect(),
                coeff: rat_to_string(c),
            })
            .collect()
    }

    pub fn from_json_terms(
        alph: &Alphabet,
        terms: &[PolyTermJson],
    ) -> Result<Polynomial, ExactError> {
        let mut p = Polynomial::zero(alph);
        for t in terms {
            if t.exponents.len() != alph.len() {
                return Err(ExactError::AlphabetMismatch(
                    "exponent vector length != alphabet size".into(),
                ));
            }
            let mono = Monomial(
                t.exponents
                    .iter()
                    .map(|&e| u16::try_from(e).map_err(|_| ExactError::ExponentOverflow))
                    .collect::<Result<Vec<_>, _>>()?
                    .into_boxed_slice(),
            );
            p.add_term(mono, super::parse_rat(&t.coeff)?);
        }
        Ok(p)
    }
}

/// JSON form of one polynomial term: exponent vector plus an exact
/// `"num/den"` coefficient string (never a float).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolyTermJson {
    pub exponents: Vec<u32>,
    pub coeff: String,
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        // Display from the leading term down.
        for (m, c) in self.terms.iter().rev() {
            let neg = c.is_negative();
            let abs = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
                first = false;
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let mut factors: Vec<String> = Vec::new();
            for (i, &e) in m.0.iter().enumerate() {
                if e == 1 {
                    factors.push(self.alph.name(i).to_string());
                } else if e > 1 {
                    factors.push(format!("{}^{}", self.alph.name(i), e));
                }
            }
            if factors.is_empty() {
                write!(f, "{}", rat_to_string(&abs))?;
            } else {
                if !abs.is_one() {
                    write!(f, "{}*", rat_to_string(&abs))?;
                }
                write!(f, "{}", factors.join("*"))?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::super::{rat, ratio};
    use super::*;

    fn ab() -> Alphabet {
        Alphabet::new(&["x", "y"]).unwrap()
    }

    #[test]
    fn cancellation_is_exact() {
        let a = ab();
        let x = Polynomial::var(&a, "x").unwrap();
        let y = Polynomial::var(&a, "y").unwrap();
        let s = x.add(&y).unwrap().add(&x.sub(&y).unwrap()).unwrap();
        assert_eq!(s, x.scale(&rat(2)));
    }

    #[test]
    fn mul_identity() {
        let a = ab();
        let x = Polynomial::var(&a, "x").unwrap();
        let one = Polynomial::one(&a);
        assert_eq!(x.mul(&one).unwrap(), x);
    }

    #[test]
    fn derivative_of_constant_is_zero() {
        let a = ab();
        let c = Polynomial::constant(&a, rat(7));
        assert!(c.derivative(0).is_zero());
    }

    #[test]
    fn div_exact_roundtrip() {
        let a = ab();
        let x = Polynomial::var(&a, "x").unwrap();
        let y = Polynomial::var(&a, "y").unwrap();
        let p = x.add(&y).unwrap();
        let q = x.sub(&y).unwrap();
        let prod = p.mul(&q).unwrap();
        assert_eq!(prod.div_exact(&p).unwrap(), q);
        assert!(prod.div_exact(&x).is_none());
    }

    #[test]
    fn content_normalization() {
        let a = ab();
        let x = Polynomial::var(&a, "x").unwrap();
        let p = x.scale(&ratio(-4, 6)); // -2/3 x
        let pp = p.primitive_part_signed();
        assert_eq!(pp, x); // sign fixed positive, content removed
    }

    #[test]
    fn grlex_leading_term() {
        let a = ab();
        let x = Polynomial::var(&a, "x").unwrap();
        let y = Polynomial::var(&a, "y").unwrap();
        // x^2 + y^3: grlex leading term is y^3 (higher total degree).
        let p = x.pow(2).unwrap().add(&y.pow(3).unwrap()).unwrap();
        let (m, _) = p.leading().unwrap();
        assert_eq!(m.0[1], 3);
    }
}
