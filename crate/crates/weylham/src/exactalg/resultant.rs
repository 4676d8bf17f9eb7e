//! Resultants via Sylvester-matrix determinants with polynomial entries.
//!
//! The elimination problems in this crate are tiny (degrees <= 3 in the
//! eliminated variable), so cofactor expansion of the Sylvester matrix is
//! entirely adequate and keeps the arithmetic exact and transparent.

use super::poly::Polynomial;
use super::ExactError;

/// Determinant by cofactor expansion along the first column.
fn det(m: &[Vec<Polynomial>]) -> Result<Polynomial, ExactError> {
    let n = m.len();
    let alph = m[0][0].alphabet().clone();
    if n == 1 {
        return Ok(m[0][0].clone());
    }
    let mut acc = Polynomial::zero(&alph);
    for i in 0..n {
        if m[i][0].is_zero() {
            continue;
        }
        let minor: Vec<Vec<Polynomial>> = (0..n)
            .filter(|&r| r != i)
            .map(|r| m[r][1..].to_vec())
            .collect();
        let sub = det(&minor)?;
        let term = m[i][0].mul(&sub)?;
        acc = if i % 2 == 0 {
            acc.add(&term)?
        } else {
            acc.sub(&term)?
        };
    }
    Ok(acc)
}

/// Resultant of `f` and `g` with respect to the named symbol,
/// content-normalized: integer coprime coefficients, positive leading
/// coefficient under graded lex. Errors when either input is constant in
/// the symbol.
pub fn resultant_eliminate(
    f: &Polynomial,
    g: &Polynomial,
    sym: &str,
) -> Result<Polynomial, ExactError> {
    let alph = f.alphabet().clone();
    let idx = alph.require(sym)?;
    let df = f.degree_in(idx) as usize;
    let dg = g.degree_in(idx) as usize;
    if df == 0 || dg == 0 {
        return Err(ExactError::ConstantInSym(sym.to_string()));
    }
    let fc = f.coeffs_in_var(idx);
    let gc = g.coeffs_in_var(idx);
    let n = df + dg;
    let zero = Polynomial::zero(&alph);
    let mut m = vec![vec![zero.clone(); n]; n];
    // dg rows of f's coefficients (descending), then df rows of g's.
    for r in 0..dg {
        for (k, c) in fc.iter().rev().enumerate() {
            m[r][r + k] = c.clone();
        }
    }
    for r in 0..df {
        for (k, c) in gc.iter().rev().enumerate() {
            m[dg + r][r + k] = c.clone();
        }
    }
    let d = det(&m)?;
    Ok(d.primitive_part_signed())
}

#[cfg(test)]
mod tests {
    use super::super::{parse::parse_poly, Alphabet};
    use super::*;

    #[test]
    fn linear_difference() {
        let al = Alphabet::new(&["x", "a", "b"]).unwrap();
        let f = parse_poly(&al, "x - a").unwrap();
        let g = parse_poly(&al, "x - b").unwrap();
        let r = resultant_eliminate(&f, &g, "x").unwrap();
        // a - b up to the fixed sign normalization.
        let expect = parse_poly(&al, "a - b").unwrap();
        assert!(r == expect || r == expect.neg());
    }

    #[test]
    fn quadratic_elimination() {
        let al = Alphabet::new(&["x", "y"]).unwrap();
        let f = parse_poly(&al, "x^2 - 2").unwrap();
        let g = parse_poly(&al, "x - y").unwrap();
        let r = resultant_eliminate(&f, &g, "x").unwrap();
        let expect = parse_poly(&al, "y^2 - 2").unwrap();
        assert!(r == expect || r == expect.neg());
    }

    #[test]
    fn constant_in_sym_rejected() {
        let al = Alphabet::new(&["x", "y"]).unwrap();
        let f = parse_poly(&al, "y + 1").unwrap();
        let g = parse_poly(&al, "x - y").unwrap();
        assert!(resultant_eliminate(&f, &g, "x").is_err());
    }
}
