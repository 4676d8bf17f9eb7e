//! Multivariate polynomial GCD via recursive content / primitive-part
//! reduction with a primitive pseudo-remainder sequence.
//!
//! This is adequate at the sizes this crate meets (total degree <= 8-ish
//! bases, a dozen variables). The result is normalized to have integer
//! coprime coefficients and positive leading coefficient.

use num_traits::One;

use super::poly::Polynomial;
use super::Rat;

/// Pseudo-remainder of `a` by `b` with respect to variable `idx`
/// (`deg_idx(a) >= deg_idx(b) > 0`), i.e. the remainder of
/// `lc(b)^(da-db+1) * a` under polynomial division in `idx`.
fn pseudo_rem(a: &Polynomial, b: &Polynomial, idx: usize) -> Polynomial {
    let db = b.degree_in(idx) as i64;
    debug_assert!(db > 0);
    let b_coeffs = b.coeffs_in_var(idx);
    let lcb = &b_coeffs[db as usize];
    let mut r = a.clone();
    loop {
        let dr = r.degree_in(idx) as i64;
        if r.is_zero() || dr < db {
            return r;
        }
        let r_coeffs = r.coeffs_in_var(idx);
        let lcr = &r_coeffs[dr as usize];
        // r := lcb * r - lcr * x^(dr-db) * b
        let shifted = b
            .mul_var_pow(idx, (dr - db) as u16)
            .expect("exponent overflow in pseudo_rem");
        let t1 = r.mul(lcb).expect("alphabet");
        let t2 = shifted.mul(lcr).expect("alphabet");
        r = t1.sub(&t2).expect("alphabet");
    }
}

/// Content of `a` with respect to variable `idx`: the gcd of its
/// univariate coefficients (polynomials in the remaining variables).
fn content_wrt(a: &Polynomial, idx: usize) -> Polynomial {
    let coeffs = a.coeffs_in_var(idx);
    let mut g = Polynomial::zero(a.alphabet());
    for c in coeffs.iter().filter(|c| !c.is_zero()) {
        g = gcd(&g, c);
        if g.is_one() {
            break;
        }
    }
    g
}

/// The largest monomial dividing every term of `p`.
pub fn monomial_content(p: &Polynomial) -> Polynomial {
    use crate::exactalg::poly::Monomial;
    let mut mins: Option<Vec<u16>> = None;
    for (m, _) in p.terms() {
        match &mut mins {
            None => mins = Some(m.0.to_vec()),
            Some(v) => {
                for (x, &e) in v.iter_mut().zip(m.0.iter()) {
                    *x = (*x).min(e);
                }
            }
        }
    }
    match mins {
        None => Polynomial::one(p.alphabet()),
        Some(v) => Polynomial::from_terms(
            p.alphabet(),
            [(Monomial(v.into_boxed_slice()), num_traits::One::one())],
        ),
    }
}

/// GCD of two multivariate polynomials over Q, normalized primitive
/// (integer coprime coefficients, positive leading coefficient). The gcd
/// of anything with a nonzero constant is 1; gcd(0, b) = primitive(b).
pub fn gcd(a: &Polynomial, b: &Polynomial) -> Polynomial {
    if a.is_zero() {
        return b.primitive_part_signed();
    }
    if b.is_zero() {
        return a.primitive_part_signed();
    }
    if a.is_constant() || b.is_constant() {
        return Polynomial::one(a.alphabet());
    }
    // Monomial fast path: the gcd with a single term is a monomial.
    if a.num_terms() == 1 || b.num_terms() == 1 {
        let m = monomial_content(a);
        let n = monomial_content(b);
        return gcd_of_monomials(&m, &n);
    }
    // Cheap path: exact divisibility one way or the other.
    if b.div_exact(a).is_some() {
        return a.primitive_part_signed();
    }
    if a.div_exact(b).is_some() {
        return b.primitive_part_signed();
    }
    // Pull out common monomial factors before the recursive descent.
    let ma = monomial_content(a);
    let mb = monomial_content(b);
    if !ma.is_one() || !mb.is_one() {
        let mg = gcd_of_monomials(&ma, &mb);
        let a2 = a.div_exact(&ma).expect("monomial content divides");
        let b2 = b.div_exact(&mb).expect("monomial content divides");
        return gcd(&a2, &b2).mul(&mg).expect("alphabet");
    }

    // Choose a main variable both depend on if possible; otherwise the
    // gcd cannot involve a one-sided variable, so recurse on the content.
    let sup_a = a.support();
    let sup_b = b.support();
    let common: Vec<usize> = sup_a
        .iter()
        .copied()
        .filter(|i| sup_b.contains(i))
        .collect();
    if common.is_empty() {
        // No shared variable: gcd is the gcd of full contents, which for
        // primitive parts over Q is 1.
        return Polynomial::one(a.alphabet());
    }
    // Prefer the variable minimizing the larger degree (smaller PRS).
    let idx = *common
        .iter()
        .min_by_key(|&&i| (a.degree_in(i).max(b.degree_in(i)), i))
        .unwrap();

    let cont_a = content_wrt(a, idx);
    let cont_b = content_wrt(b, idx);
    let pp_a = a
        .div_exact(&cont_a)
        .expect("content divides");
    let pp_b = b
        .div_exact(&cont_b)
        .expect("content divides");

    let cont_gcd = gcd(&cont_a, &cont_b);

    // Primitive PRS on the primitive parts.
    let (mut f, mut g) = if pp_a.degree_in(idx) >= pp_b.degree_in(idx) {
        (pp_a, pp_b)
    } else {
        (pp_b, pp_a)
    };
    loop {
        let r = pseudo_rem(&f, &g, idx);
        if r.is_zero() {
            let pp = g
                .div_exact(&content_wrt(&g, idx))
                .expect("content divides");
            let result = pp.mul(&cont_gcd).expect("alphabet");
            return result.primitive_part_signed();
        }
        if r.degree_in(idx) == 0 {
            // Coprime in the main variable.
            return cont_gcd.primitive_part_signed();
        }
        f = g;
        g = r.div_exact(&content_wrt(&r, idx)).expect("content divides");
    }
}

fn gcd_of_monomials(a: &Polynomial, b: &Polynomial) -> Polynomial {
    use crate::exactalg::poly::Monomial;
    let (ma, _) = a.leading().expect("nonzero");
    let (mb, _) = b.leading().expect("nonzero");
    let mins: Vec<u16> = ma
        .0
        .iter()
        .zip(mb.0.iter())
        .map(|(x, y)| *x.min(y))
        .collect();
    Polynomial::from_terms(
        a.alphabet(),
        [(Monomial(mins.into_boxed_slice()), num_traits::One::one())],
    )
}

/// lcm(a, b) up to sign/content normalization.
pub fn lcm(a: &Polynomial, b: &Polynomial) -> Polynomial {
    if a.is_zero() || b.is_zero() {
        return Polynomial::zero(a.alphabet());
    }
    let g = gcd(a, b);
    let q = a.div_exact(&g).expect("gcd divides");
    q.mul(b).expect("alphabet").primitive_part_signed()
}

/// Rational-coefficient gcd helper used by normalization paths that want
/// a monic result instead of a primitive one.
pub fn gcd_monic(a: &Polynomial, b: &Polynomial) -> Polynomial {
    let g = gcd(a, b);
    if g.is_constant() {
        Polynomial::constant(a.alphabet(), Rat::one())
    } else {
        g
    }
}

#[cfg(test)]
mod tests {
    use super::super::{Alphabet, Polynomial};
    use super::*;

    #[test]
    fn gcd_of_products() {
        let a = Alphabet::new(&["x", "y"]).unwrap();
        let x = Polynomial::var(&a, "x").unwrap();
        let y = Polynomial::var(&a, "y").unwrap();
        let f = x.add(&y).unwrap(); // x+y
        let g = x.sub(&y).unwrap(); // x-y
        let p = f.mul(&g).unwrap(); // x^2-y^2
        let q = f.pow(2).unwrap(); // (x+y)^2
        let d = gcd(&p, &q);
        assert_eq!(d, f);
    }

    #[test]
    fn gcd_coprime_is_one() {
        let a = Alphabet::new(&["x", "y"]).unwrap();
        let x = Polynomial::var(&a, "x").unwrap();
        let y = Polynomial::var(&a, "y").unwrap();
        let d = gcd(&x, &y);
        assert!(d.is_one());
    }

    #[test]
    fn gcd_power_of_linear_base() {
        // gcd(f^3, f^5) = f^3 for a multi-term base.
        let a = Alphabet::new(&["p", "q"]).unwrap();
        let p = Polynomial::var(&a, "p").unwrap();
        let q = Polynomial::var(&a, "q").unwrap();
        let f = p.add(&q.pow(2).unwrap()).unwrap();
        let d = gcd(&f.pow(3).unwrap(), &f.pow(5).unwrap());
        assert_eq!(d, f.pow(3).unwrap());
    }
}
