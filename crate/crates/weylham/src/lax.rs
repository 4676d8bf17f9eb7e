//! 2x2 spectral pencils: zero-curvature residuals, flow extraction from
//! compatibility, determinant expansion, and spectral invariants.


use crate::dynsys::{DynError, TotalSystem};
use crate::exactalg::laurent::rational_sum_is_zero;
use crate::exactalg::{Alphabet, ExactError, Polynomial, Rat, RationalFunction};

#[derive(Debug, Clone, thiserror::Error)]
pub enum LaxError {
    #[error("linear system for derivatives is inconsistent: {0}")]
    Inconsistent(String),
    #[error("linear system underdetermined: unknown `{0}` not pinned")]
    Underdetermined(String),
    #[error(transparent)]
    Dyn(#[from] DynError),
    #[error(transparent)]
    Exact(#[from] ExactError),
}

/// A 2x2 matrix of polynomials in the spectral symbol `T` with
/// coefficients in the phase variables and parameters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatrixPencil {
    pub entries: [[Polynomial; 2]; 2],
}

impl MatrixPencil {
    pub fn new(entries: [[Polynomial; 2]; 2]) -> Self {
        MatrixPencil { entries }
    }

    pub fn alphabet(&self) -> &Alphabet {
        self.entries[0][0].alphabet()
    }

    pub fn zero(alph: &Alphabet) -> Self {
        let z = Polynomial::zero(alph);
        MatrixPencil::new([[z.clone(), z.clone()], [z.clone(), z]])
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().flatten().all(|e| e.is_zero())
    }

    pub fn neg(&self) -> Self {
        MatrixPencil::new([
            [self.entries[0][0].neg(), self.entries[0][1].neg()],
            [self.entries[1][0].neg(), self.entries[1][1].neg()],
        ])
    }

    pub fn max_t_degree(&self, t_sym: &str) -> Result<u16, ExactError> {
        let idx = self.alphabet().require(t_sym)?;
        Ok(self
            .entries
            .iter()
            .flatten()
            .map(|e| e.degree_in(idx))
            .max()
            .unwrap_or(0))
    }

    pub fn add(&self, other: &Self) -> Result<Self, ExactError> {
        let mut out = self.clone();
        for i in 0..2 {
            for j in 0..2 {
                out.entries[i][j] = self.entries[i][j].add(&other.entries[i][j])?;
            }
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, ExactError> {
        self.add(&other.neg())
    }

    pub fn matmul(&self, other: &Self) -> Result<Self, ExactError> {
        let alph = self.alphabet();
        let mut out = MatrixPencil::zero(alph);
        for i in 0..2 {
            for j in 0..2 {
                let mut acc = Polynomial::zero(alph);
                for k in 0..2 {
                    acc = acc.add(&self.entries[i][k].mul(&other.entries[k][j])?)?;
                }
                out.entries[i][j] = acc;
            }
        }
        Ok(out)
    }

    pub fn commutator(&self, other: &Self) -> Result<Self, ExactError> {
        self.matmul(other)?.sub(&other.matmul(self)?)
    }

    pub fn det(&self) -> Result<Polynomial, ExactError> {
        let a = self.entries[0][0].mul(&self.entries[1][1])?;
        let b = self.entries[0][1].mul(&self.entries[1][0])?;
        a.sub(&b)
    }

    /// Entrywise `T * d/dT`.
    pub fn t_dt(&self, t_sym: &str) -> Result<Self, ExactError> {
        let idx = self.alphabet().require(t_sym)?;
        let mut out = self.clone();
        for e in out.entries.iter_mut().flatten() {
            *e = e.derivative(idx).mul_var_pow(idx, 1)?;
        }
        Ok(out)
    }
}

/// Entrywise total derivative of the pencil along one flow of `sys`
/// (phase chain rule plus the explicit time term). Rational flows are
/// accepted; the result is returned as a rational 2x2 grid.
fn pencil_flow_derivative(
    a: &MatrixPencil,
    sys: &TotalSystem,
    time: &str,
) -> Result<[[RationalFunction; 2]; 2], LaxError> {
    let alph = a.alphabet();
    let t_idx = alph.require(time).map_err(DynError::Exact)?;
    let flow = sys.reduced_flow(time)?;
    let mut out: [[RationalFunction; 2]; 2] = [
        [RationalFunction::zero(alph), RationalFunction::zero(alph)],
        [RationalFunction::zero(alph), RationalFunction::zero(alph)],
    ];
    for i in 0..2 {
        for j in 0..2 {
            let e = &a.entries[i][j];
            let mut acc = RationalFunction::from_poly(e.derivative(t_idx));
            for (k, v) in sys.variables().iter().enumerate() {
                let vi = alph.require(v).map_err(DynError::Exact)?;
                let d = e.derivative(vi);
                if d.is_zero() || flow[k].is_zero() {
                    continue;
                }
                acc = acc.add(
                    &RationalFunction::from_poly(d).mul(&flow[k].embed(alph)?)?,
                )?;
            }
            out[i][j] = acc;
        }
    }
    Ok(out)
}

/// Zero-curvature residual
/// `d_time(A) - delta * T * d_T(B) + A*B - B*A`, reduced modulo the
/// system's parameter constraints. `delta = 1` is the isomonodromic
/// compatibility condition, `delta = 0` the autonomous Lax equation.
pub fn zero_curvature_residual(
    a: &MatrixPencil,
    b: &MatrixPencil,
    sys: &TotalSystem,
    time: &str,
    t_sym: &str,
    delta: &Rat,
) -> Result<[[RationalFunction; 2]; 2], LaxError> {
    let alph = a.alphabet();
    let da = pencil_flow_derivative(a, sys, time)?;
    let tb = b.t_dt(t_sym)?;
    let comm = a.commutator(b)?;
    let mut out: [[RationalFunction; 2]; 2] = [
        [RationalFunction::zero(alph), RationalFunction::zero(alph)],
        [RationalFunction::zero(alph), RationalFunction::zero(alph)],
    ];
    for i in 0..2 {
        for j in 0..2 {
            let terms = vec![
                da[i][j].clone(),
                RationalFunction::from_poly(tb.entries[i][j].scale(delta)).neg(),
                RationalFunction::from_poly(comm.entries[i][j].clone()),
            ];
            let reduced: Result<Vec<_>, DynError> =
                terms.iter().map(|t| sys.reduce(t)).collect();
            let reduced = reduced?;
            if rational_sum_is_zero(&reduced)? {
                out[i][j] = RationalFunction::zero(alph);
            } else {
                let mut acc = RationalFunction::zero(alph);
                for t in &reduced {
                    acc = acc.add(t)?;
                }
                out[i][j] = acc;
            }
        }
    }
    Ok(out)
}

/// Extracts the flow defined by the compatibility condition: writes
/// `d_time(A)` with unknown derivative symbols, collects T-power
/// coefficients of the residual, and solves the affine system exactly.
/// Returns one rational function per phase variable, in order.
pub fn extract_flow(
    a: &MatrixPencil,
    b: &MatrixPencil,
    phase_vars: &[String],
    t_sym: &str,
    delta: &Rat,
    constraints: &[(String, RationalFunction)],
) -> Result<Vec<RationalFunction>, LaxError> {
    let alph = a.alphabet().clone();
    let n = phase_vars.len();
    // Residual = sum_k dA/dx_k * u_k - delta*T*dB/dT + [A, B]; affine in
    // the unknowns u_k, so organize as constant + coefficient matrix.
    let tb = b.t_dt(t_sym)?;
    let comm = a.commutator(b)?;
    let t_idx = alph.require(t_sym).map_err(DynError::Exact)?;

    // Equations indexed by (entry, T-power): const + sum coeff_k u_k = 0.
    #[derive(Clone)]
    struct Eq {
        constant: Polynomial,
        coeffs: Vec<Polynomial>,
    }
    let mut eqs: Vec<Eq> = Vec::new();
    for i in 0..2 {
        for j in 0..2 {
            let constant_part = comm.entries[i][j]
                .sub(&tb.entries[i][j].scale(delta))?;
            let mut coeff_parts = Vec::with_capacity(n);
            for v in phase_vars {
                let vi = alph.require(v).map_err(DynError::Exact)?;
                coeff_parts.push(a.entries[i][j].derivative(vi));
            }
            let deg = constant_part.degree_in(t_idx).max(
                coeff_parts
                    .iter()
                    .map(|c| c.degree_in(t_idx))
                    .max()
                    .unwrap_or(0),
            );
            let const_by_t = constant_part.coeffs_in_var(t_idx);
            let coeffs_by_t: Vec<Vec<Polynomial>> = coeff_parts
                .iter()
                .map(|c| c.coeffs_in_var(t_idx))
                .collect();
            for p in 0..=(deg as usize) {
                let constant = const_by_t
                    .get(p)
                    .cloned()
                    .unwrap_or_else(|| Polynomial::zero(&alph));
                let coeffs: Vec<Polynomial> = coeffs_by_t
                    .iter()
                    .map(|c| {
                        c.get(p)
                            .cloned()
                            .unwrap_or_else(|| Polynomial::zero(&alph))
                    })
                    .collect();
                if constant.is_zero() && coeffs.iter().all(|c| c.is_zero()) {
                    continue;
                }
                eqs.push(Eq { constant, coeffs });
            }
        }
    }

    // Gaussian elimination over the rational-function field.
    let mut solution: Vec<Option<RationalFunction>> = vec![None; n];
    let mut work: Vec<(RationalFunction, Vec<RationalFunction>)> = eqs
        .into_iter()
        .map(|e| {
            (
                RationalFunction::from_poly(e.constant),
                e.coeffs
                    .into_iter()
                    .map(RationalFunction::from_poly)
                    .collect(),
            )
        })
        .collect();
    loop {
        // Find an equation with exactly solvable pivot.
        let mut pivot: Option<(usize, usize)> = None;
        'search: for (ei, (_, coeffs)) in work.iter().enumerate() {
            for (k, c) in coeffs.iter().enumerate() {
                if solution[k].is_none() && !c.is_zero() {
                    pivot = Some((ei, k));
                    break 'search;
                }
            }
        }
        let Some((ei, k)) = pivot else { break };
        let (cst, coeffs) = work.remove(ei);
        // u_k = -(cst + sum_{j!=k} c_j u_j)/c_k; at this point previously
        // solved unknowns are already substituted, and unsolved ones with
        // nonzero coefficients would make the system non-triangular;
        // the catalog pencils always yield a triangular solve.
        for (j, c) in coeffs.iter().enumerate() {
            if j != k && solution[j].is_none() && !c.is_zero() {
                return Err(LaxError::Inconsistent(
                    "non-triangular derivative system".into(),
                ));
            }
        }
        let mut num = cst;
        for (j, c) in coeffs.iter().enumerate() {
            if j == k || c.is_zero() {
                continue;
            }
            let uj = solution[j].as_ref().expect("checked above");
            num = num.add(&c.mul(uj)?)?;
        }
        let uk = num.div(&coeffs[k])?.neg();
        solution[k] = Some(uk.clone());
        // Substitute into the remaining equations.
        for (cst, coeffs) in work.iter_mut() {
            if !coeffs[k].is_zero() {
                *cst = cst.add(&coeffs[k].mul(&uk)?)?;
                coeffs[k] = RationalFunction::zero(&alph);
            }
        }
    }
    // All remaining equations must be identically zero modulo constraints.
    for (cst, coeffs) in &work {
        let mut acc = cst.clone();
        for (j, c) in coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let uj = solution[j]
                .as_ref()
                .ok_or_else(|| LaxError::Underdetermined(phase_vars[j].clone()))?;
            acc = acc.add(&c.mul(uj)?)?;
        }
        let reduced = crate::dynsys::reduce_with(constraints, &alph, &acc)?;
        if !reduced.is_zero() {
            return Err(LaxError::Inconsistent(format!(
                "residual T-coefficient does not vanish: {reduced}"
            )));
        }
    }
    solution
        .into_iter()
        .enumerate()
        .map(|(j, s)| s.ok_or_else(|| LaxError::Underdetermined(phase_vars[j].clone())))
        .collect()
}

/// The coefficients of the `T`-expansion of `det(A)`, lowest power
/// first. Reconstructing the determinant from these is exact.
#[derive(Debug, Clone)]
pub struct SpectralInvariants {
    pub t_sym: String,
    pub t_coeffs: Vec<Polynomial>,
}

pub fn det_expansion(a: &MatrixPencil, t_sym: &str) -> Result<SpectralInvariants, LaxError> {
    let alph = a.alphabet();
    let d = a.det()?;
    let idx = alph.require(t_sym).map_err(DynError::Exact)?;
    Ok(SpectralInvariants {
        t_sym: t_sym.to_string(),
        t_coeffs: d.coeffs_in_var(idx),
    })
}

impl SpectralInvariants {
    pub fn reconstruct(&self, alph: &Alphabet) -> Result<Polynomial, ExactError> {
        let idx = alph.require(&self.t_sym)?;
        Polynomial::from_coeffs_in_var(alph, idx, &self.t_coeffs)
    }
}

/// Finds rationals `(scale, shift)` with `e = scale*k + shift`, if any.
pub fn affine_match(e: &Polynomial, k: &Polynomial) -> Result<Option<(Rat, Rat)>, ExactError> {
    if k.is_constant() {
        return Ok(None);
    }
    let (lead_m, lead_c) = k.leading().expect("nonconstant");
    let e_at = e.coeff(lead_m);
    let scale = e_at / lead_c;
    let diff = e.sub(&k.scale(&scale))?;
    match diff.as_constant() {
        Some(shift) => Ok(Some((scale, shift))),
        None => Ok(None),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::parse::{parse_expr, parse_poly};
    use crate::exactalg::rat;

    /// Pencil alphabet for the section-2 Lax pair.
    fn lax_alph() -> Alphabet {
        Alphabet::new(&[
            "x", "y", "z", "w", "q", "p", "eps1", "eps2", "T", "t", "s",
        ])
        .unwrap()
    }

    fn pencil(alph: &Alphabet, rows: [[&str; 2]; 2]) -> MatrixPencil {
        MatrixPencil::new([
            [
                parse_poly(alph, rows[0][0]).unwrap(),
                parse_poly(alph, rows[0][1]).unwrap(),
            ],
            [
                parse_poly(alph, rows[1][0]).unwrap(),
                parse_poly(alph, rows[1][1]).unwrap(),
            ],
        ])
    }

    /// The matrix A (negated from its printed form) and B1.
    fn matrices() -> (MatrixPencil, MatrixPencil) {
        let al = lax_alph();
        let minus_a = pencil(
            &al,
            [
                ["eps1 + 2*z*T + 8*p*T^2", "y + 4*q*T - 8*T^2"],
                ["-x*T - 4*w*T^2 - 8*T^3", "eps2 - 2*z*T - 8*p*T^2"],
            ],
        );
        let b1 = pencil(&al, [["p", "-1"], ["-T", "-p"]]);
        (minus_a.neg(), b1)
    }

    fn sys_11() -> TotalSystem {
        let al = lax_alph();
        let flows = vec![
            "-2*x*p - 1 + eps1 - eps2",
            "2*y*p + eps1 - eps2",
            "(x + y)/2",
            "-2*w*p + z",
            "2*q*p + z",
            "(w + q)/2",
        ]
        .into_iter()
        .map(|e| parse_expr(&al, e).unwrap())
        .collect();
        TotalSystem::new(
            al,
            ["x", "y", "z", "w", "q", "p"]
                .iter()
                .map(|s| s.to_string())
                .collect(),
            vec!["t".into()],
            vec![flows],
            vec![],
        )
        .unwrap()
    }

    #[test]
    fn zero_curvature_for_section2_pair() {
        let (a, b1) = matrices();
        let sys = sys_11();
        let r = zero_curvature_residual(&a, &b1, &sys, "t", "T", &rat(1)).unwrap();
        for row in &r {
            for e in row {
                assert!(e.is_zero(), "residual entry {e}");
            }
        }
    }

    #[test]
    fn zero_matrices_give_zero() {
        let al = lax_alph();
        let z = MatrixPencil::zero(&al);
        let sys = sys_11();
        let r = zero_curvature_residual(&z, &z, &sys, "t", "T", &rat(1)).unwrap();
        assert!(r.iter().flatten().all(|e| e.is_zero()));
    }

    #[test]
    fn extract_flow_recovers_system() {
        let (a, b1) = matrices();
        let sys = sys_11();
        let vars: Vec<String> = sys.variables().to_vec();
        let flow = extract_flow(&a, &b1, &vars, "T", &rat(1), &[]).unwrap();
        let expected = sys.flow("t").unwrap();
        for (got, want) in flow.iter().zip(expected.iter()) {
            assert!(got.equals(want).unwrap(), "{got} != {want}");
        }
    }

    #[test]
    fn det_leading_coefficient() {
        let (a, _) = matrices();
        let inv = det_expansion(&a, "T").unwrap();
        assert_eq!(inv.t_coeffs.len(), 6); // T^0 .. T^5
        let al = lax_alph();
        assert_eq!(inv.t_coeffs[5], Polynomial::constant(&al, rat(-64)));
        // Reconstruction reproduces det(A) exactly.
        let det = a.det().unwrap();
        assert_eq!(inv.reconstruct(&al).unwrap(), det);
    }

    #[test]
    fn affine_matcher() {
        let al = lax_alph();
        let k = parse_poly(&al, "x*y - 2*z").unwrap();
        let e = parse_poly(&al, "3*x*y - 6*z + 5").unwrap();
        let (sc, sh) = affine_match(&e, &k).unwrap().unwrap();
        assert_eq!(sc, rat(3));
        assert_eq!(sh, rat(5));
        assert!(affine_match(&parse_poly(&al, "x^2").unwrap(), &k)
            .unwrap()
            .is_none());
    }
}
