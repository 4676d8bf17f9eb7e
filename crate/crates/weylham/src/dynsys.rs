//! Total differential systems (multi-time flows), Hamiltonian vector
//! fields, Poisson brackets, first integrals, and flow compatibility.
//!
//! Sign convention: the Poisson bracket follows `{p_i, q_j} = delta_ij`,
//! i.e. `{f, g} = sum_i df/dp_i dg/dq_i - df/dq_i dg/dp_i`. Hamiltonian
//! flows are `dq/dt = dH/dp`, `dp/dt = -dH/dq`.

use std::collections::HashMap;

use crate::exactalg::laurent::rational_sum_is_zero;
use crate::exactalg::{Alphabet, ExactError, Polynomial, Rat, RationalFunction};

/// A multi-time flow: one rational vector field per time symbol over a
/// shared alphabet of phase variables, parameters, and time symbols,
/// plus parameter constraints in eliminated form (`param := expr`).
#[derive(Debug, Clone)]
pub struct TotalSystem {
    alph: Alphabet,
    variables: Vec<String>,
    times: Vec<String>,
    /// flows[time_index][var_index]
    flows: Vec<Vec<RationalFunction>>,
    /// Parameter eliminations applied before any equality test.
    constraints: Vec<(String, RationalFunction)>,
}

#[derive(Debug, Clone, thiserror::Error)]
pub enum DynError {
    #[error("unknown time symbol `{0}`")]
    UnknownTime(String),
    #[error("unknown phase variable `{0}`")]
    UnknownVariable(String),
    #[error("assignment missing phase variable `{0}`")]
    MissingAssignment(String),
    #[error(transparent)]
    Exact(#[from] ExactError),
}

impl TotalSystem {
    pub fn new(
        alph: Alphabet,
        variables: Vec<String>,
        times: Vec<String>,
        flows: Vec<Vec<RationalFunction>>,
        constraints: Vec<(String, RationalFunction)>,
    ) -> Result<Self, DynError> {
        for v in &variables {
            alph.require(v).map_err(DynError::Exact)?;
        }
        for t in &times {
            alph.require(t).map_err(DynError::Exact)?;
        }
        assert_eq!(flows.len(), times.len(), "one flow per time symbol");
        for f in &flows {
            assert_eq!(f.len(), variables.len(), "one component per variable");
        }
        Ok(TotalSystem {
            alph,
            variables,
            times,
            flows,
            constraints,
        })
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alph
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    pub fn times(&self) -> &[String] {
        &self.times
    }

    pub fn constraints(&self) -> &[(String, RationalFunction)] {
        &self.constraints
    }

    pub fn time_index(&self, time: &str) -> Result<usize, DynError> {
        self.times
            .iter()
            .position(|t| t == time)
            .ok_or_else(|| DynError::UnknownTime(time.to_string()))
    }

    pub fn var_index(&self, var: &str) -> Result<usize, DynError> {
        self.variables
            .iter()
            .position(|v| v == var)
            .ok_or_else(|| DynError::UnknownVariable(var.to_string()))
    }

    pub fn flow(&self, time: &str) -> Result<&[RationalFunction], DynError> {
        Ok(&self.flows[self.time_index(time)?])
    }

    pub fn component(&self, time: &str, var: &str) -> Result<&RationalFunction, DynError> {
        Ok(&self.flows[self.time_index(time)?][self.var_index(var)?])
    }

    /// Applies the parameter eliminations to an expression.
    pub fn reduce(&self, f: &RationalFunction) -> Result<RationalFunction, DynError> {
        reduce_with(&self.constraints, &self.alph, f)
    }

    /// The flow with constraints substituted in, for equality testing.
    pub fn reduced_flow(&self, time: &str) -> Result<Vec<RationalFunction>, DynError> {
        self.flow(time)?
            .iter()
            .map(|c| self.reduce(c))
            .collect()
    }

    /// A copy with the constraints dropped (used by negative checks).
    pub fn without_constraints(&self) -> TotalSystem {
        TotalSystem {
            constraints: Vec::new(),
            ..self.clone()
        }
    }

    /// A copy with extra parameter eliminations appended.
    pub fn with_substitution(&self, param: &str, value: RationalFunction) -> TotalSystem {
        let mut s = self.clone();
        s.constraints.push((param.to_string(), value));
        s
    }
}

/// Substitutes eliminations `param := expr` (in order) into `f`,
/// working over `f`'s own alphabet (extended with the replacement's
/// symbols when needed).
pub fn reduce_with(
    constraints: &[(String, RationalFunction)],
    _alph: &Alphabet,
    f: &RationalFunction,
) -> Result<RationalFunction, DynError> {
    let mut out = f.clone();
    for (param, value) in constraints {
        if out.alphabet().index_of(param).is_none() {
            continue;
        }
        let target = out.alphabet().union(value.alphabet());
        let mut bind = HashMap::new();
        bind.insert(param.clone(), value.embed(&target)?);
        out = out.embed(&target)?.substitute(&target, &bind)?;
    }
    Ok(out)
}

/// Canonical pairs plus one polynomial Hamiltonian per time symbol.
#[derive(Debug, Clone)]
pub struct HamiltonianSpec {
    alph: Alphabet,
    pairs: Vec<(String, String)>,
    hamiltonians: Vec<(String, Polynomial)>,
}

impl HamiltonianSpec {
    pub fn new(
        alph: Alphabet,
        pairs: Vec<(String, String)>,
        hamiltonians: Vec<(String, Polynomial)>,
    ) -> Result<Self, DynError> {
        for (q, p) in &pairs {
            alph.require(q).map_err(DynError::Exact)?;
            alph.require(p).map_err(DynError::Exact)?;
        }
        Ok(HamiltonianSpec {
            alph,
            pairs,
            hamiltonians,
        })
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alph
    }

    pub fn pairs(&self) -> &[(String, String)] {
        &self.pairs
    }

    pub fn times(&self) -> Vec<String> {
        self.hamiltonians.iter().map(|(t, _)| t.clone()).collect()
    }

    pub fn hamiltonian(&self, time: &str) -> Result<&Polynomial, DynError> {
        self.hamiltonians
            .iter()
            .find(|(t, _)| t == time)
            .map(|(_, h)| h)
            .ok_or_else(|| DynError::UnknownTime(time.to_string()))
    }

    /// The canonical flow of the Hamiltonian attached to `time`:
    /// components ordered q1, p1, q2, p2, ...
    pub fn flow(&self, time: &str) -> Result<Vec<(String, RationalFunction)>, DynError> {
        let h = self.hamiltonian(time)?;
        let mut out = Vec::with_capacity(2 * self.pairs.len());
        for (q, p) in &self.pairs {
            let qi = self.alph.require(q).map_err(DynError::Exact)?;
            let pi = self.alph.require(p).map_err(DynError::Exact)?;
            out.push((
                q.clone(),
                RationalFunction::from_poly(h.derivative(pi)),
            ));
            out.push((
                p.clone(),
                RationalFunction::from_poly(h.derivative(qi).neg()),
            ));
        }
        Ok(out)
    }

    /// Builds the induced total system over the listed variable order.
    pub fn to_total_system(
        &self,
        constraints: Vec<(String, RationalFunction)>,
    ) -> Result<TotalSystem, DynError> {
        let variables: Vec<String> = self
            .pairs
            .iter()
            .flat_map(|(q, p)| [q.clone(), p.clone()])
            .collect();
        let times = self.times();
        let mut flows = Vec::new();
        for t in &times {
            let named = self.flow(t)?;
            flows.push(named.into_iter().map(|(_, f)| f).collect());
        }
        TotalSystem::new(self.alph.clone(), variables, times, flows, constraints)
    }
}

/// Poisson bracket with the convention `{p_i, q_j} = delta_ij`.
pub fn poisson_bracket(
    f: &Polynomial,
    g: &Polynomial,
    alph: &Alphabet,
    pairs: &[(String, String)],
) -> Result<Polynomial, DynError> {
    let mut acc = Polynomial::zero(alph);
    for (q, p) in pairs {
        let qi = alph.require(q).map_err(DynError::Exact)?;
        let pi = alph.require(p).map_err(DynError::Exact)?;
        let t1 = f.derivative(pi).mul(&g.derivative(qi))?;
        let t2 = f.derivative(qi).mul(&g.derivative(pi))?;
        acc = acc.add(&t1)?.sub(&t2)?;
    }
    Ok(acc)
}

/// Total derivative of `expr` along one flow of the system, including
/// the explicit time term: `d expr/d time + sum_i d expr/d x_i * f_i`,
/// reduced modulo the parameter constraints.
pub fn total_derivative_along_flow(
    expr: &RationalFunction,
    sys: &TotalSystem,
    time: &str,
) -> Result<RationalFunction, DynError> {
    let terms = total_derivative_terms(expr, sys, time)?;
    sum_terms(&terms, sys.alphabet())
}

/// True iff the total derivative vanishes identically (fast path that
/// avoids normalizing the sum).
pub fn is_conserved(
    expr: &RationalFunction,
    sys: &TotalSystem,
    time: &str,
) -> Result<bool, DynError> {
    let terms = total_derivative_terms(expr, sys, time)?;
    Ok(rational_sum_is_zero(&terms)?)
}

fn total_derivative_terms(
    expr: &RationalFunction,
    sys: &TotalSystem,
    time: &str,
) -> Result<Vec<RationalFunction>, DynError> {
    let alph = sys.alphabet();
    let t_idx = alph.require(time).map_err(DynError::Exact)?;
    sys.time_index(time)?;
    let e = sys.reduce(expr)?;
    let flow = sys.reduced_flow(time)?;
    let mut terms = vec![e.derivative_idx(t_idx)?];
    for (i, v) in sys.variables().iter().enumerate() {
        let vi = alph.require(v).map_err(DynError::Exact)?;
        let de = e.derivative_idx(vi)?;
        if de.is_zero() || flow[i].is_zero() {
            continue;
        }
        terms.push(de.mul(&flow[i])?);
    }
    Ok(terms)
}

fn sum_terms(
    terms: &[RationalFunction],
    alph: &Alphabet,
) -> Result<RationalFunction, DynError> {
    if rational_sum_is_zero(terms)? {
        return Ok(RationalFunction::zero(alph));
    }
    let mut acc = RationalFunction::zero(alph);
    for t in terms {
        acc = acc.add(t)?;
    }
    Ok(acc)
}

/// Cross-derivative residual for a pair of time directions: for each
/// variable `x` with `dx = f dta + g dtb`, computes
/// `D_ta(g) - D_tb(f)` where `D` is the total derivative along the
/// respective flow. A compatible pair yields all zeros.
pub fn compatibility_residual(
    sys: &TotalSystem,
    time_a: &str,
    time_b: &str,
) -> Result<Vec<RationalFunction>, DynError> {
    let alph = sys.alphabet();
    let ta = alph.require(time_a).map_err(DynError::Exact)?;
    let tb = alph.require(time_b).map_err(DynError::Exact)?;
    let fa = sys.reduced_flow(time_a)?;
    let fb = sys.reduced_flow(time_b)?;
    let mut out = Vec::with_capacity(sys.variables().len());
    for i in 0..sys.variables().len() {
        let mut terms: Vec<RationalFunction> = Vec::new();
        terms.push(fb[i].derivative_idx(ta)?);
        terms.push(fa[i].derivative_idx(tb)?.neg());
        for (j, v) in sys.variables().iter().enumerate() {
            let vj = alph.require(v).map_err(DynError::Exact)?;
            let dgb = fb[i].derivative_idx(vj)?;
            if !dgb.is_zero() && !fa[j].is_zero() {
                terms.push(dgb.mul(&fa[j])?);
            }
            let dfa = fa[i].derivative_idx(vj)?;
            if !dfa.is_zero() && !fb[j].is_zero() {
                terms.push(dfa.mul(&fb[j])?.neg());
            }
        }
        out.push(sum_terms(&terms, alph)?);
    }
    Ok(out)
}

/// A candidate exact solution: one rational function of the time symbols
/// (and parameters) per phase variable, plus parameter values and
/// optional algebraic reductions for irrational constants (a symbol `r`
/// with `r^power = value`).
#[derive(Debug, Clone, Default)]
pub struct SolutionAssignment {
    pub values: HashMap<String, RationalFunction>,
    pub params: HashMap<String, RationalFunction>,
    pub algebraic: Vec<(String, u16, Rat)>,
}

/// Substitutes a claimed solution into every equation of the system and
/// returns the per-(time, variable) residuals. Exact zero means the
/// assignment solves the system.
pub fn check_solution(
    sys: &TotalSystem,
    assignment: &SolutionAssignment,
) -> Result<Vec<(String, String, RationalFunction)>, DynError> {
    let alph = sys.alphabet();
    let mut bind: HashMap<String, RationalFunction> = HashMap::new();
    for v in sys.variables() {
        let val = assignment
            .values
            .get(v)
            .ok_or_else(|| DynError::MissingAssignment(v.clone()))?;
        bind.insert(v.clone(), val.embed(alph)?);
    }
    for (p, val) in &assignment.params {
        bind.insert(p.clone(), val.embed(alph)?);
    }
    let mut out = Vec::new();
    for time in sys.times() {
        let t_idx = alph.require(time).map_err(DynError::Exact)?;
        for (i, v) in sys.variables().iter().enumerate() {
            let lhs = bind[v].derivative_idx(t_idx)?;
            let rhs_raw = sys.reduce(&sys.flow(time)?[i])?;
            let rhs = rhs_raw.substitute(alph, &bind)?;
            let mut residual = lhs.sub(&rhs)?;
            for (sym, pow, val) in &assignment.algebraic {
                residual = reduce_algebraic(&residual, alph, sym, *pow, val)?;
            }
            out.push((time.clone(), v.clone(), residual));
        }
    }
    Ok(out)
}

/// Rewrites every power `sym^e` with `e >= power` using
/// `sym^power = value`, e.g. `r^2 = 1/2` for `r = 1/sqrt(2)`.
pub fn reduce_algebraic(
    f: &RationalFunction,
    alph: &Alphabet,
    sym: &str,
    power: u16,
    value: &Rat,
) -> Result<RationalFunction, DynError> {
    let idx = match alph.index_of(sym) {
        Some(i) => i,
        None => return Ok(f.clone()),
    };
    let reduce_poly = |p: &Polynomial| -> Result<Polynomial, ExactError> {
        let mut out = Polynomial::zero(alph);
        for (m, c) in p.terms() {
            let e = m.0[idx];
            if e < power {
                out = out.add(&Polynomial::from_terms(alph, [(m.clone(), c.clone())]))?;
                continue;
            }
            let reps = (e / power) as u32;
            let rem = e % power;
            let mut v = m.0.to_vec();
            v[idx] = rem;
            let mut coeff = c.clone();
            for _ in 0..reps {
                coeff *= value;
            }
            out = out.add(&Polynomial::from_terms(
                alph,
                [(crate::exactalg::Monomial(v.into_boxed_slice()), coeff)],
            ))?;
        }
        Ok(out)
    };
    let num = reduce_poly(f.numerator())?;
    let den = reduce_poly(f.denominator())?;
    Ok(RationalFunction::new(num, den)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::parse::{parse_expr, parse_poly};
    use crate::exactalg::{rat, ratio};

    fn alph_29() -> Alphabet {
        Alphabet::new(&["q1", "p1", "q2", "p2", "a0", "a1", "t", "s"]).unwrap()
    }

    /// The autonomous two-Hamiltonian pair used across Section 5.
    fn ham_29() -> HamiltonianSpec {
        let a = alph_29();
        let k1 = parse_poly(
            &a,
            "q1^2*p1 + a0*q1 - q2^2/2 - p2^3 - 3/20*p2 + p1*p2",
        )
        .unwrap();
        let k2 = parse_poly(
            &a,
            "p1^2/2 - 3/20*p1 - a1*q2 - p1*p2^2 + 2*q1^2*p1*p2 + 2*q1*p1*q2 + 2*a0*q1*p2",
        )
        .unwrap();
        HamiltonianSpec::new(
            a,
            vec![("q1".into(), "p1".into()), ("q2".into(), "p2".into())],
            vec![("t".into(), k1), ("s".into(), k2)],
        )
        .unwrap()
    }

    fn sys_29() -> TotalSystem {
        let spec = ham_29();
        let a = spec.alphabet().clone();
        let minus_a0 = parse_expr(&a, "-a0").unwrap();
        spec.to_total_system(vec![("a1".to_string(), minus_a0)])
            .unwrap()
    }

    #[test]
    fn hamiltonian_flow_components() {
        // dq2/dt = dK1/dp2 = -3 p2^2 - 3/20 + p1 ; dp2/dt = -dK1/dq2 = q2
        let spec = ham_29();
        let a = spec.alphabet().clone();
        let flow = spec.flow("t").unwrap();
        let dq2 = &flow[2].1;
        let dp2 = &flow[3].1;
        assert_eq!(dq2, &parse_expr(&a, "-3*p2^2 - 3/20 + p1").unwrap());
        assert_eq!(dp2, &parse_expr(&a, "q2").unwrap());
    }

    #[test]
    fn constant_hamiltonian_zero_flow() {
        let a = Alphabet::new(&["q", "p", "t"]).unwrap();
        let spec = HamiltonianSpec::new(
            a.clone(),
            vec![("q".into(), "p".into())],
            vec![("t".into(), Polynomial::constant(&a, rat(5)))],
        )
        .unwrap();
        for (_, f) in spec.flow("t").unwrap() {
            assert!(f.is_zero());
        }
    }

    #[test]
    fn k1_k2_commute() {
        // {K1, K2} vanishes under the section constraint a0 + a1 = 0.
        let spec = ham_29();
        let a = spec.alphabet().clone();
        let k1 = spec.hamiltonian("t").unwrap().clone();
        let k2 = spec.hamiltonian("s").unwrap().clone();
        let b = poisson_bracket(&k1, &k2, spec.alphabet(), spec.pairs()).unwrap();
        let constraints = vec![("a1".to_string(), parse_expr(&a, "-a0").unwrap())];
        let reduced =
            reduce_with(&constraints, &a, &RationalFunction::from_poly(b.clone())).unwrap();
        assert!(reduced.is_zero(), "reduced bracket {reduced}");
        // Off the constraint surface the bracket is a nonzero multiple of
        // (a0 + a1), so the constraint is genuinely needed.
        assert!(!b.is_zero());
        let factor = parse_poly(&a, "a0 + a1").unwrap();
        assert!(b.div_exact(&factor).is_some());
    }

    #[test]
    fn bracket_antisymmetry_diagonal() {
        let spec = ham_29();
        let k2 = spec.hamiltonian("s").unwrap().clone();
        let b = poisson_bracket(&k2, &k2, spec.alphabet(), spec.pairs()).unwrap();
        assert!(b.is_zero());
    }

    #[test]
    fn sys29_compatible_and_conserves_k1_k2() {
        let sys = sys_29();
        for r in compatibility_residual(&sys, "t", "s").unwrap() {
            assert!(r.is_zero(), "residual {r}");
        }
        let spec = ham_29();
        for h in ["t", "s"] {
            let hpol = RationalFunction::from_poly(spec.hamiltonian(h).unwrap().clone());
            for time in ["t", "s"] {
                assert!(is_conserved(&hpol, &sys, time).unwrap());
            }
        }
    }

    #[test]
    fn trivial_conservation_of_constant() {
        let sys = sys_29();
        let one = RationalFunction::one(sys.alphabet());
        assert!(is_conserved(&one, &sys, "t").unwrap());
    }

    #[test]
    fn rational_fixed_point_of_sys29() {
        // (q1,p1,q2,p2) = (0, 3/20, 0, 0) at a0 = a1 = 0.
        let sys = sys_29();
        let a = sys.alphabet().clone();
        let mut asg = SolutionAssignment::default();
        for (v, val) in [("q1", rat(0)), ("p1", ratio(3, 20)), ("q2", rat(0)), ("p2", rat(0))] {
            asg.values
                .insert(v.to_string(), RationalFunction::constant(&a, val));
        }
        asg.params
            .insert("a0".into(), RationalFunction::zero(&a));
        asg.params
            .insert("a1".into(), RationalFunction::zero(&a));
        for (_, _, r) in check_solution(&sys, &asg).unwrap() {
            assert!(r.is_zero(), "residual {r}");
        }
    }
}
