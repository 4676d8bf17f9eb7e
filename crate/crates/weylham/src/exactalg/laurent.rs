//! Laurent decomposition and a fast exact zero test for sums of rational
//! terms whose denominators are powers of one common base polynomial.
//!
//! The zero test never expands high powers of the base: it adjoins a
//! symbol `G` standing for `1/base` and decides membership in the ideal
//! `(G*base - 1)` by eliminating a variable the base is linear in.

use std::collections::HashMap;

use num_traits::{One, Zero};

use super::gcd::gcd;
use super::poly::{Monomial, Polynomial};
use super::ratfun::RationalFunction;
use super::{Alphabet, ExactError, Rat};

/// Result of splitting a rational function into Laurent parts around a
/// symbol: `f = polynomial_part + principal_part`, the principal part
/// holding exactly the negative powers of the symbol.
#[derive(Debug, Clone)]
pub struct LaurentSplit {
    pub polynomial_part: RationalFunction,
    pub principal_part: RationalFunction,
}

/// Splits `f` as a Laurent series in `sym`. The denominator must be a
/// monomial in `sym` times a `sym`-free polynomial; otherwise the input
/// is not Laurent in `sym` and an error is returned.
pub fn laurent_split(f: &RationalFunction, sym: &str) -> Result<LaurentSplit, ExactError> {
    let alph = f.alphabet().clone();
    let idx = alph.require(sym)?;
    let den = f.denominator();
    // Denominator must be sym^k * (sym-free): exactly one sym-degree.
    let den_coeffs = den.coeffs_in_var(idx);
    let nonzero: Vec<usize> = den_coeffs
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .map(|(k, _)| k)
        .collect();
    if nonzero.len() != 1 {
        return Err(ExactError::NonLaurent(sym.to_string()));
    }
    let k = nonzero[0];
    let rest = den_coeffs[k].clone(); // sym-free cofactor

    // num / (rest * sym^k): split num by sym powers. Powers j >= k land
    // in the polynomial part; powers j < k in the principal part over a
    // single denominator sym^max.
    let num_coeffs = f.numerator().coeffs_in_var(idx);
    let mut poly_part = Polynomial::zero(&alph);
    let mut princ_den_pow = 0u16;
    for (j, c) in num_coeffs.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        if j >= k {
            poly_part = poly_part.add(&c.mul_var_pow(idx, (j - k) as u16)?)?;
        } else {
            princ_den_pow = princ_den_pow.max((k - j) as u16);
        }
    }
    let mut princ_num = Polynomial::zero(&alph);
    for (j, c) in num_coeffs.iter().enumerate() {
        if c.is_zero() || j >= k {
            continue;
        }
        let shift = princ_den_pow - (k - j) as u16;
        princ_num = princ_num.add(&c.mul_var_pow(idx, shift)?)?;
    }

    let polynomial_part = RationalFunction::new(poly_part, rest.clone())?;
    let principal_part = if princ_num.is_zero() {
        RationalFunction::zero(&alph)
    } else {
        let sym_pow = Polynomial::var(&alph, sym)?.pow(princ_den_pow as u32)?;
        RationalFunction::new(princ_num, rest.mul(&sym_pow)?)?
    };
    Ok(LaurentSplit {
        polynomial_part,
        principal_part,
    })
}

/// A sum `sum_k coeffs[k] * (1/base)^k` with polynomial digits, used to
/// carry out long rational computations without expanding base powers.
#[derive(Debug, Clone)]
pub struct BasedSum {
    base: Polynomial,
    coeffs: Vec<Polynomial>,
}

impl BasedSum {
    pub fn from_polynomial(base: &Polynomial, p: Polynomial) -> Self {
        BasedSum {
            base: base.clone(),
            coeffs: vec![p],
        }
    }

    pub fn zero(base: &Polynomial) -> Self {
        BasedSum {
            base: base.clone(),
            coeffs: vec![Polynomial::zero(base.alphabet())],
        }
    }

    /// Expresses a rational function whose denominator is `c * base^k`
    /// as a based sum; `None` when the denominator has another factor.
    pub fn from_rational(base: &Polynomial, r: &RationalFunction) -> Option<Self> {
        if r.denominator().is_one() {
            return Some(Self::from_polynomial(base, r.numerator().clone()));
        }
        let (k, rest) = r.denominator().extract_power_of(base, 64);
        let c = rest.as_constant()?;
        let mut coeffs = vec![Polynomial::zero(base.alphabet()); k as usize + 1];
        coeffs[k as usize] = r.numerator().scale(&(Rat::one() / c));
        Some(BasedSum {
            base: base.clone(),
            coeffs,
        })
    }

    pub fn base(&self) -> &Polynomial {
        &self.base
    }

    pub fn digits(&self) -> &[Polynomial] {
        &self.coeffs
    }

    pub fn from_digits(base: &Polynomial, coeffs: Vec<Polynomial>) -> Self {
        let coeffs = if coeffs.is_empty() {
            vec![Polynomial::zero(base.alphabet())]
        } else {
            coeffs
        };
        BasedSum {
            base: base.clone(),
            coeffs,
        }
    }

    /// Multiplies by `(1/base)^k`: prepends `k` zero digits.
    pub fn shift(&self, k: usize) -> Self {
        let mut coeffs = vec![Polynomial::zero(self.alph()); k];
        coeffs.extend(self.coeffs.iter().cloned());
        BasedSum {
            base: self.base.clone(),
            coeffs,
        }
    }

    fn alph(&self) -> &Alphabet {
        self.base.alphabet()
    }

    pub fn add(&self, other: &BasedSum) -> Result<BasedSum, ExactError> {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut coeffs = Vec::with_capacity(n);
        for k in 0..n {
            let a = self
                .coeffs
                .get(k)
                .cloned()
                .unwrap_or_else(|| Polynomial::zero(self.alph()));
            let b = other
                .coeffs
                .get(k)
                .cloned()
                .unwrap_or_else(|| Polynomial::zero(self.alph()));
            coeffs.push(a.add(&b)?);
        }
        Ok(BasedSum {
            base: self.base.clone(),
            coeffs,
        })
    }

    pub fn sub(&self, other: &BasedSum) -> Result<BasedSum, ExactError> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> BasedSum {
        BasedSum {
            base: self.base.clone(),
            coeffs: self.coeffs.iter().map(|c| c.neg()).collect(),
        }
    }

    pub fn mul(&self, other: &BasedSum) -> Result<BasedSum, ExactError> {
        let n = self.coeffs.len() + other.coeffs.len() - 1;
        let mut coeffs = vec![Polynomial::zero(self.alph()); n];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                coeffs[i + j] = coeffs[i + j].add(&a.mul(b)?)?;
            }
        }
        Ok(BasedSum {
            base: self.base.clone(),
            coeffs,
        })
    }

    pub fn mul_poly(&self, p: &Polynomial) -> Result<BasedSum, ExactError> {
        let mut coeffs = Vec::with_capacity(self.coeffs.len());
        for c in &self.coeffs {
            coeffs.push(c.mul(p)?);
        }
        Ok(BasedSum {
            base: self.base.clone(),
            coeffs,
        })
    }

    pub fn scale(&self, c: &Rat) -> BasedSum {
        BasedSum {
            base: self.base.clone(),
            coeffs: self.coeffs.iter().map(|p| p.scale(c)).collect(),
        }
    }

    pub fn pow(&self, n: u32) -> Result<BasedSum, ExactError> {
        let mut out = Self::from_polynomial(&self.base, Polynomial::one(self.alph()));
        for _ in 0..n {
            out = out.mul(self)?;
        }
        Ok(out)
    }

    /// Partial derivative: `d(1/base) = -(d base) / base^2`.
    pub fn derivative_idx(&self, idx: usize) -> Result<BasedSum, ExactError> {
        let dbase = self.base.derivative(idx);
        let mut coeffs = vec![Polynomial::zero(self.alph()); self.coeffs.len() + 1];
        for (k, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            coeffs[k] = coeffs[k].add(&a.derivative(idx))?;
            if k > 0 && !dbase.is_zero() {
                let t = a.mul(&dbase)?.scale(&Rat::from_integer((k as i64).into()));
                coeffs[k + 1] = coeffs[k + 1].sub(&t)?;
            }
        }
        Ok(BasedSum {
            base: self.base.clone(),
            coeffs,
        })
    }

    /// Decides exact vanishing of the represented value.
    pub fn is_zero_value(&self) -> Result<bool, ExactError> {
        if self.coeffs.iter().all(|c| c.is_zero()) {
            return Ok(true);
        }
        if self.coeffs.len() == 1 {
            return Ok(self.coeffs[0].is_zero());
        }
        let alph = self.alph();
        // Monomial base: clearing denominators is cheap.
        if self.base.num_terms() == 1 {
            let top = self.coeffs.len() as u32 - 1;
            let mut acc = Polynomial::zero(alph);
            for (k, c) in self.coeffs.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                acc = acc.add(&c.mul(&self.base.pow(top - k as u32)?)?)?;
            }
            return Ok(acc.is_zero());
        }
        // A variable the base is linear in with constant coefficient lets
        // us eliminate it instead of expanding base powers.
        if let Some((v_idx, c0, b_tilde)) = linear_variable_of(&self.base) {
            return self.is_zero_by_elimination(v_idx, &c0, &b_tilde);
        }
        // Fallback: expand. Fine for small bases.
        let top = self.coeffs.len() as u32 - 1;
        let mut acc = Polynomial::zero(alph);
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            acc = acc.add(&c.mul(&self.base.pow(top - k as u32)?)?)?;
        }
        Ok(acc.is_zero())
    }

    /// Zero test via the substitution `v := (1 - G*b_tilde)/(c0*G)` where
    /// `base = c0*v + b_tilde` and `G` stands for `1/base`: the value
    /// vanishes iff the substituted, cleared polynomial is identically 0.
    fn is_zero_by_elimination(
        &self,
        v_idx: usize,
        c0: &Rat,
        b_tilde: &Polynomial,
    ) -> Result<bool, ExactError> {
        let alph = self.alph();
        let ext = alph.extend(&["__G"]);
        let g_idx = ext.require("__G")?;
        let g = Polynomial::var(&ext, "__G")?;

        // R(x, G) = sum coeffs[k] * G^k, organized by powers of v.
        let mut by_v: Vec<Polynomial> = Vec::new();
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let ce = c.embed(&ext)?.mul(&g.pow(k as u32)?)?;
            let v_coeffs = ce.coeffs_in_var(v_idx);
            if v_coeffs.len() > by_v.len() {
                by_v.resize(v_coeffs.len(), Polynomial::zero(&ext));
            }
            for (e, vc) in v_coeffs.into_iter().enumerate() {
                by_v[e] = by_v[e].add(&vc)?;
            }
        }
        if by_v.is_empty() {
            return Ok(true);
        }
        let d = by_v.len() - 1;
        // (1 - G*b_tilde) and c0*G
        let one = Polynomial::one(&ext);
        let gb = g.mul(&b_tilde.embed(&ext)?)?;
        let lin = one.sub(&gb)?;
        let cg = g.scale(c0);

        let mut acc = Polynomial::zero(&ext);
        let mut lin_pows = vec![Polynomial::one(&ext)];
        for e in 1..=d {
            let prev = lin_pows[e - 1].clone();
            lin_pows.push(prev.mul(&lin)?);
        }
        let mut cg_pows = vec![Polynomial::one(&ext)];
        for e in 1..=d {
            let prev = cg_pows[e - 1].clone();
            cg_pows.push(prev.mul(&cg)?);
        }
        for (e, re) in by_v.iter().enumerate() {
            if re.is_zero() {
                continue;
            }
            let t = re.mul(&lin_pows[e])?.mul(&cg_pows[d - e])?;
            acc = acc.add(&t)?;
        }
        let _ = g_idx;
        Ok(acc.is_zero())
    }

    /// Expands into an ordinary rational function `num / base^K`.
    /// Intended for small digit counts only.
    pub fn to_rational(&self) -> Result<RationalFunction, ExactError> {
        let top = self.coeffs.len() as u32 - 1;
        let mut num = Polynomial::zero(self.alph());
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            num = num.add(&c.mul(&self.base.pow(top - k as u32)?)?)?;
        }
        RationalFunction::new(num, self.base.pow(top)?)
    }
}

/// Finds a variable `v` with `deg_v(base) = 1` whose `v`-coefficient is a
/// nonzero constant: returns `(v_index, c0, base - c0*v)`.
fn linear_variable_of(base: &Polynomial) -> Option<(usize, Rat, Polynomial)> {
    for idx in base.support() {
        if base.degree_in(idx) != 1 {
            continue;
        }
        let coeffs = base.coeffs_in_var(idx);
        if let Some(c0) = coeffs[1].as_constant() {
            if !c0.is_zero() {
                return Some((idx, c0, coeffs[0].clone()));
            }
        }
    }
    None
}

/// Evaluates a polynomial at `BasedSum`-valued points. Variables without
/// a binding pass through by name into the target alphabet.
pub fn poly_at_based(
    p: &Polynomial,
    base: &Polynomial,
    bindings: &HashMap<String, BasedSum>,
) -> Result<BasedSum, ExactError> {
    let target = base.alphabet();
    let alph = p.alphabet();
    let used = {
        let mut f = vec![false; alph.len()];
        for i in p.support() {
            f[i] = true;
        }
        f
    };
    let mut resolved: Vec<Option<&BasedSum>> = Vec::new();
    let mut plain: Vec<Option<usize>> = Vec::new();
    for i in 0..alph.len() {
        let name = alph.name(i);
        if !used[i] {
            resolved.push(None);
            plain.push(None);
            continue;
        }
        if let Some(b) = bindings.get(name) {
            resolved.push(Some(b));
            plain.push(None);
        } else {
            resolved.push(None);
            plain.push(Some(target.require(name)?));
        }
    }
    let mut pow_cache: HashMap<(usize, u16), BasedSum> = HashMap::new();
    let mut acc = BasedSum::zero(base);
    for (m, c) in p.terms() {
        let mut term = BasedSum::from_polynomial(base, Polynomial::constant(target, c.clone()));
        let mut plain_mono = vec![0u16; target.len()];
        for (i, &e) in m.0.iter().enumerate() {
            if e == 0 {
                continue;
            }
            match (resolved[i], plain[i]) {
                (Some(b), _) => {
                    if !pow_cache.contains_key(&(i, e)) {
                        let p = b.pow(e as u32)?;
                        pow_cache.insert((i, e), p);
                    }
                    term = term.mul(&pow_cache[&(i, e)])?;
                }
                (None, Some(j)) => {
                    plain_mono[j] += e;
                }
                (None, None) => debug_assert_eq!(e, 0),
            }
        }
        if plain_mono.iter().any(|&e| e > 0) {
            let mono = Polynomial::from_terms(
                target,
                [(Monomial(plain_mono.into_boxed_slice()), Rat::one())],
            );
            term = term.mul_poly(&mono)?;
        }
        acc = acc.add(&term)?;
    }
    Ok(acc)
}

/// Finds a polynomial `B` such that every listed denominator is a
/// constant times a power of `B`. Constant denominators are ignored.
pub fn find_common_base(dens: &[&Polynomial]) -> Option<Polynomial> {
    let mut cand: Option<Polynomial> = None;
    for d in dens {
        if d.is_constant() {
            continue;
        }
        let dp = d.primitive_part_signed();
        cand = Some(match cand {
            None => dp,
            Some(c) => {
                if c == dp {
                    c
                } else {
                    // Refine: the true base must divide both.
                    let g = gcd(&c, &dp);
                    if g.is_constant() {
                        return None;
                    }
                    g
                }
            }
        });
    }
    let mut base = cand?;
    // Verify every denominator is c * base^k, refining the candidate by
    // gcd with any non-constant leftover (e.g. dens {f^2, f^3} start the
    // candidate at f^2 and refine to f).
    'verify: for _ in 0..16 {
        for d in dens {
            if d.is_constant() {
                continue;
            }
            let (_, rest) = d.extract_power_of(&base, 64);
            if rest.as_constant().is_none() {
                let g = gcd(&base, &rest.primitive_part_signed());
                if g.is_constant() || g == base {
                    return None;
                }
                base = g;
                continue 'verify;
            }
        }
        return Some(base);
    }
    None
}

/// Decides whether a finite sum of rational terms vanishes identically,
/// picking the cheapest exact strategy available.
pub fn rational_sum_is_zero(terms: &[RationalFunction]) -> Result<bool, ExactError> {
    let live: Vec<&RationalFunction> = terms.iter().filter(|t| !t.is_zero()).collect();
    if live.is_empty() {
        return Ok(true);
    }
    if live.len() == 1 {
        return Ok(false);
    }
    let dens: Vec<&Polynomial> = live.iter().map(|t| t.denominator()).collect();
    if let Some(base) = find_common_base(&dens) {
        let mut acc = BasedSum::zero(&base);
        for t in &live {
            let b = BasedSum::from_rational(&base, t)
                .expect("find_common_base guarantees extraction");
            acc = acc.add(&b)?;
        }
        return acc.is_zero_value();
    }
    // Generic fallback.
    let mut acc = live[0].clone();
    for t in &live[1..] {
        acc = acc.add(t)?;
    }
    Ok(acc.is_zero())
}

#[cfg(test)]
mod tests {
    use super::super::{rat, Alphabet};
    use super::*;

    #[test]
    fn split_simple() {
        // (x^2 + 1)/x -> (x, 1/x)
        let a = Alphabet::new(&["x"]).unwrap();
        let x = Polynomial::var(&a, "x").unwrap();
        let num = x.pow(2).unwrap().add(&Polynomial::one(&a)).unwrap();
        let f = RationalFunction::new(num, x.clone()).unwrap();
        let s = laurent_split(&f, "x").unwrap();
        assert_eq!(s.polynomial_part, RationalFunction::from_poly(x.clone()));
        let inv_x = RationalFunction::new(Polynomial::one(&a), x).unwrap();
        assert_eq!(s.principal_part, inv_x);
    }

    #[test]
    fn split_non_laurent() {
        // 1/(x+1) is not Laurent in x.
        let a = Alphabet::new(&["x"]).unwrap();
        let x = Polynomial::var(&a, "x").unwrap();
        let den = x.add(&Polynomial::one(&a)).unwrap();
        let f = RationalFunction::new(Polynomial::one(&a), den).unwrap();
        assert!(matches!(
            laurent_split(&f, "x"),
            Err(ExactError::NonLaurent(_))
        ));
    }

    #[test]
    fn split_reassembles() {
        let a = Alphabet::new(&["x", "y"]).unwrap();
        let x = Polynomial::var(&a, "x").unwrap();
        let y = Polynomial::var(&a, "y").unwrap();
        // (x^3 y + x + y)/x^2
        let num = x
            .pow(3)
            .unwrap()
            .mul(&y)
            .unwrap()
            .add(&x)
            .unwrap()
            .add(&y)
            .unwrap();
        let f = RationalFunction::new(num, x.pow(2).unwrap()).unwrap();
        let s = laurent_split(&f, "x").unwrap();
        let back = s.polynomial_part.add(&s.principal_part).unwrap();
        assert!(back.equals(&f).unwrap());
    }

    #[test]
    fn based_zero_test_detects_identity() {
        // 1/f * f - 1 == 0 for f = p + q^2 - 1.
        let a = Alphabet::new(&["p", "q"]).unwrap();
        let p = Polynomial::var(&a, "p").unwrap();
        let q = Polynomial::var(&a, "q").unwrap();
        let f = p
            .add(&q.pow(2).unwrap())
            .unwrap()
            .sub(&Polynomial::one(&a))
            .unwrap();
        // value = f * (1/f) - 1 represented as digits [.. f at k=1 ..] - 1
        let mut s = BasedSum::zero(&f);
        s = s
            .add(&BasedSum {
                base: f.clone(),
                coeffs: vec![Polynomial::constant(&a, rat(-1)), f.clone()],
            })
            .unwrap();
        assert!(s.is_zero_value().unwrap());
        // and f*(1/f) - 2 is not zero
        let s2 = BasedSum {
            base: f.clone(),
            coeffs: vec![Polynomial::constant(&a, rat(-2)), f.clone()],
        };
        assert!(!s2.is_zero_value().unwrap());
    }

    #[test]
    fn common_base_spotting() {
        let a = Alphabet::new(&["p", "q"]).unwrap();
        let p = Polynomial::var(&a, "p").unwrap();
        let q = Polynomial::var(&a, "q").unwrap();
        let f = p.add(&q.pow(2).unwrap()).unwrap();
        let d1 = f.pow(2).unwrap();
        let d2 = f.pow(3).unwrap().scale(&rat(4));
        let base = find_common_base(&[&d1, &d2]).unwrap();
        assert_eq!(base, f);
    }
}
