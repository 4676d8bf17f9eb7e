//! Birational maps, Backlund generators, Weyl-group relation checks,
//! holomorphy-chart machinery, the Poisson-series form of reflections,
//! and holomorphy-based Hamiltonian recovery.

use std::collections::HashMap;

use num_traits::{One, Zero};

use crate::dynsys::{poisson_bracket, reduce_with, DynError, TotalSystem};
use crate::exactalg::laurent::{
    find_common_base, laurent_split, poly_at_based, rational_sum_is_zero, BasedSum,
};
use crate::exactalg::{Alphabet, ExactError, Polynomial, Rat, RationalFunction};
use crate::linalg;

#[derive(Debug, Clone, thiserror::Error)]
pub enum MapError {
    #[error("map has no registered inverse")]
    MissingInverse,
    #[error("composition mismatch: {0}")]
    Composition(String),
    #[error("poisson series did not terminate within depth {0}")]
    SeriesDepth(usize),
    #[error("inconsistent linear system: {0}")]
    Inconsistent(String),
    #[error(transparent)]
    Dyn(#[from] DynError),
    #[error(transparent)]
    Exact(#[from] ExactError),
}

/// Correspondence between one source and one target time symbol, with
/// the exact derivative d(source)/d(target) (e.g. `s = 2S` gives 2).
#[derive(Debug, Clone)]
pub struct TimePair {
    pub src: String,
    pub dst: String,
    pub dsrc_ddst: Rat,
}

impl TimePair {
    pub fn identity(name: &str) -> Self {
        TimePair {
            src: name.to_string(),
            dst: name.to_string(),
            dsrc_ddst: Rat::one(),
        }
    }
}

/// A per-variable rational substitution with an affine parameter map and
/// an optional registered inverse. Components express each *target*
/// variable in *source* symbols; the source and target alphabets may
/// coincide (self-maps such as Backlund generators) or differ
/// (reductions between different systems).
#[derive(Debug, Clone)]
pub struct BirationalMap {
    pub source_alph: Alphabet,
    pub target_alph: Alphabet,
    pub source_vars: Vec<String>,
    pub target_vars: Vec<String>,
    /// One expression per target variable, over `source_alph`.
    pub components: Vec<RationalFunction>,
    /// target parameter := affine expression in source parameters.
    pub param_map: Vec<(String, RationalFunction)>,
    /// Time correspondences; identity pairs for shared names by default.
    pub time_pairs: Vec<TimePair>,
    pub inverse: Option<Box<BirationalMap>>,
}

impl BirationalMap {
    pub fn identity(alph: &Alphabet, vars: &[String], times: &[String]) -> Self {
        let components = vars
            .iter()
            .map(|v| RationalFunction::var(alph, v).expect("var in alphabet"))
            .collect();
        BirationalMap {
            source_alph: alph.clone(),
            target_alph: alph.clone(),
            source_vars: vars.to_vec(),
            target_vars: vars.to_vec(),
            components,
            param_map: Vec::new(),
            time_pairs: times.iter().map(|t| TimePair::identity(t)).collect(),
            inverse: None,
        }
    }

    pub fn component(&self, target_var: &str) -> Option<&RationalFunction> {
        self.target_vars
            .iter()
            .position(|v| v == target_var)
            .map(|i| &self.components[i])
    }

    /// The pullback bindings: target symbol -> source expression.
    /// Includes variables, mapped parameters, and time correspondences.
    fn pullback_bindings(&self) -> Result<HashMap<String, RationalFunction>, MapError> {
        let mut bind = HashMap::new();
        for (v, c) in self.target_vars.iter().zip(self.components.iter()) {
            bind.insert(v.clone(), c.clone());
        }
        for (p, e) in &self.param_map {
            bind.insert(p.clone(), e.clone());
        }
        for tp in &self.time_pairs {
            if tp.dst != tp.src || !tp.dsrc_ddst.is_one() {
                // src = dsrc_ddst * dst  =>  dst pulls back to src/dsrc_ddst
                let src = RationalFunction::var(&self.source_alph, &tp.src)?;
                bind.insert(
                    tp.dst.clone(),
                    src.scale(&(Rat::one() / tp.dsrc_ddst.clone())),
                );
            }
        }
        Ok(bind)
    }

    /// Pullback of an expression over the target space through the map:
    /// `expr ∘ φ`, an expression over the source space.
    pub fn pullback(&self, expr: &RationalFunction) -> Result<RationalFunction, MapError> {
        let bind = self.pullback_bindings()?;
        Ok(expr.substitute(&self.source_alph, &bind)?)
    }

    /// Functional composition `self ∘ other` (apply `other` first).
    pub fn compose(&self, other: &BirationalMap) -> Result<BirationalMap, MapError> {
        if self.source_vars != other.target_vars {
            return Err(MapError::Composition(format!(
                "source vars {:?} != inner target vars {:?}",
                self.source_vars, other.target_vars
            )));
        }
        let mut components = Vec::with_capacity(self.components.len());
        for c in &self.components {
            components.push(other.pullback(c)?);
        }
        // Parameter maps compose: outer target param = outer expr pulled
        // back through the inner map.
        let mut param_map = Vec::new();
        for (p, e) in &self.param_map {
            param_map.push((p.clone(), other.pullback(e)?));
        }
        if self.param_map.is_empty() && !other.param_map.is_empty() {
            param_map = other.param_map.clone();
        }
        // Time pairs chain src <- mid <- dst.
        let mut time_pairs = Vec::new();
        for outer in &self.time_pairs {
            if let Some(inner) = other.time_pairs.iter().find(|tp| tp.dst == outer.src) {
                time_pairs.push(TimePair {
                    src: inner.src.clone(),
                    dst: outer.dst.clone(),
                    dsrc_ddst: inner.dsrc_ddst.clone() * outer.dsrc_ddst.clone(),
                });
            }
        }
        Ok(BirationalMap {
            source_alph: other.source_alph.clone(),
            target_alph: self.target_alph.clone(),
            source_vars: other.source_vars.clone(),
            target_vars: self.target_vars.clone(),
            components,
            param_map,
            time_pairs,
            inverse: None,
        })
    }

    /// Componentwise equality with another map, modulo the listed
    /// parameter eliminations. Compares variable components and the
    /// parameter maps.
    pub fn equals_mod(
        &self,
        other: &BirationalMap,
        constraints: &[(String, RationalFunction)],
    ) -> Result<bool, MapError> {
        if self.target_vars != other.target_vars {
            return Ok(false);
        }
        let alph = &self.source_alph;
        for (a, b) in self.components.iter().zip(other.components.iter()) {
            let ra = reduce_with(constraints, alph, a)?;
            let rb = reduce_with(constraints, alph, b)?;
            if !ra.equals(&rb)? {
                return Ok(false);
            }
        }
        for (p, e) in &self.param_map {
            let oe = other
                .param_map
                .iter()
                .find(|(q, _)| q == p)
                .map(|(_, e)| e.clone())
                .unwrap_or(RationalFunction::var(alph, p)?);
            let ra = reduce_with(constraints, alph, e)?;
            let rb = reduce_with(constraints, alph, &oe)?;
            if !ra.equals(&rb)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Validates a registered inverse by composing both ways, optionally
    /// modulo first-integral substitutions (applied to the source-side
    /// roundtrip only, for projections inverted via integrals).
    pub fn validate_inverse(
        &self,
        mod_subs: &[(String, RationalFunction)],
    ) -> Result<(), MapError> {
        let inv = self.inverse.as_ref().ok_or(MapError::MissingInverse)?;
        // inverse ∘ map = id on source variables, modulo `mod_subs`.
        let roundtrip = inv.compose(self)?;
        for (v, c) in roundtrip
            .target_vars
            .iter()
            .zip(roundtrip.components.iter())
        {
            let reduced = reduce_with(mod_subs, &self.source_alph, c)?;
            let id = RationalFunction::var(&self.source_alph, v)?;
            if !reduced.equals(&id)? {
                return Err(MapError::Composition(format!(
                    "inverse∘map failed on `{v}`: got {reduced}"
                )));
            }
        }
        // map ∘ inverse = id on target variables, exactly.
        let roundtrip = self.compose(inv)?;
        for (v, c) in roundtrip
            .target_vars
            .iter()
            .zip(roundtrip.components.iter())
        {
            let id = RationalFunction::var(&self.target_alph, v)?;
            if !c.equals(&id.embed(&roundtrip.source_alph)?)? {
                return Err(MapError::Composition(format!(
                    "map∘inverse failed on `{v}`: got {c}"
                )));
            }
        }
        Ok(())
    }
}

/// One residual entry of a flow-conjugacy check.
#[derive(Debug, Clone)]
pub struct ConjugacyResidual {
    pub target_var: String,
    pub target_time: String,
    pub zero: bool,
    /// Normalized residual, only assembled when nonzero.
    pub residual: Option<RationalFunction>,
}

/// Checks that the map intertwines the two flows: for every target
/// component `φ_i` and target time `T` with source time `τ`,
/// `(dτ/dT)·(∂φ_i/∂τ + Σ_j ∂φ_i/∂x_j f_j(x)) = g_i(φ(x); mapped params)`
/// modulo the source system's parameter constraints. `is_symmetry` is
/// the special case `src == dst` with the generator's parameter map.
pub fn conjugates_flows(
    map: &BirationalMap,
    src: &TotalSystem,
    dst: &TotalSystem,
) -> Result<Vec<ConjugacyResidual>, MapError> {
    let alph = &map.source_alph;
    let mut out = Vec::new();

    // Gather candidate denominators to pick the common-base fast path.
    let mut dens: Vec<&Polynomial> = Vec::new();
    for c in &map.components {
        dens.push(c.denominator());
    }
    let src_flows_by_time: HashMap<String, Vec<RationalFunction>> = {
        let mut m = HashMap::new();
        for t in src.times() {
            let flow = src
                .reduced_flow(t)?
                .iter()
                .map(|f| f.embed(alph))
                .collect::<Result<Vec<_>, _>>()?;
            m.insert(t.clone(), flow);
        }
        m
    };
    for flow in src_flows_by_time.values() {
        for f in flow {
            dens.push(f.denominator());
        }
    }
    let base = find_common_base(&dens);

    let pull_bind = map.pullback_bindings()?;

    for tp in &map.time_pairs {
        let scale = tp.dsrc_ddst.clone();
        let src_flow = src_flows_by_time
            .get(&tp.src)
            .ok_or_else(|| DynError::UnknownTime(tp.src.clone()))?;
        let dst_flow_raw = dst.flow(&tp.dst)?;
        let tau_idx = alph.require(&tp.src).map_err(DynError::Exact)?;

        for (i, tv) in map.target_vars.iter().enumerate() {
            let phi = &map.components[i];
            let gi = dst
                .reduce(&dst_flow_raw[dst.var_index(tv)?])
                .map_err(MapError::Dyn)?;

            let verdict: bool;
            let mut assembled: Option<RationalFunction> = None;

            let fast = match &base {
                Some(b) => {
                    conjugacy_fast_path(map, src, alph, b, phi, &gi, src_flow, tau_idx, &scale)?
                }
                None => None,
            };
            match fast {
                Some(z) => verdict = z,
                None => {
                    // Generic path: assemble residual terms as rational
                    // functions and zero-test the list.
                    let mut terms: Vec<RationalFunction> = Vec::new();
                    let dphi_tau = phi.derivative_idx(tau_idx)?;
                    if !dphi_tau.is_zero() {
                        terms.push(dphi_tau.scale(&scale));
                    }
                    for (j, v) in src.variables().iter().enumerate() {
                        let vj = alph.require(v).map_err(DynError::Exact)?;
                        let d = phi.derivative_idx(vj)?;
                        if d.is_zero() || src_flow[j].is_zero() {
                            continue;
                        }
                        terms.push(d.mul(&src_flow[j])?.scale(&scale));
                    }
                    let composed = src.reduce(&gi.substitute(alph, &pull_bind)?)?;
                    terms.push(composed.neg());
                    let reduced: Result<Vec<_>, _> =
                        terms.iter().map(|t| src.reduce(t)).collect();
                    let reduced = reduced?;
                    verdict = rational_sum_is_zero(&reduced)?;
                    if !verdict {
                        let mut acc = RationalFunction::zero(alph);
                        for t in &reduced {
                            acc = acc.add(t)?;
                        }
                        assembled = Some(acc);
                    }
                }
            }
            out.push(ConjugacyResidual {
                target_var: tv.clone(),
                target_time: tp.dst.clone(),
                zero: verdict,
                residual: assembled,
            });
        }
    }
    Ok(out)
}

/// Common-base fast path for one conjugacy residual: everything is
/// carried as digits over `1/base`, multiplied through by the composed
/// denominator instead of dividing, and zero-tested without expanding
/// base powers. Returns `None` when the shapes don't fit the fast path.
#[allow(clippy::too_many_arguments)]
fn conjugacy_fast_path(
    map: &BirationalMap,
    src: &TotalSystem,
    alph: &Alphabet,
    base: &Polynomial,
    phi: &RationalFunction,
    gi: &RationalFunction,
    src_flow: &[RationalFunction],
    tau_idx: usize,
    scale: &Rat,
) -> Result<Option<bool>, MapError> {
    // The base must live over the map's source alphabet.
    let base = match base.embed(alph) {
        Ok(b) => b,
        Err(_) => return Ok(None),
    };
    let Some(phi_b) = BasedSum::from_rational(&base, phi) else {
        return Ok(None);
    };
    // Bindings for evaluating dst-space polynomials at φ.
    let mut based_bind: HashMap<String, BasedSum> = HashMap::new();
    for (v, c) in map.target_vars.iter().zip(map.components.iter()) {
        let Some(b) = BasedSum::from_rational(&base, c) else {
            return Ok(None);
        };
        based_bind.insert(v.clone(), b);
    }
    for (p, e) in &map.param_map {
        let reduced = src.reduce(e)?;
        let Some(b) = BasedSum::from_rational(&base, &reduced) else {
            return Ok(None);
        };
        based_bind.insert(p.clone(), b);
    }
    for tp in &map.time_pairs {
        if tp.dst != tp.src || !tp.dsrc_ddst.is_one() {
            let src_t = Polynomial::var(alph, &tp.src)?;
            based_bind.insert(
                tp.dst.clone(),
                BasedSum::from_polynomial(
                    &base,
                    src_t.scale(&(Rat::one() / tp.dsrc_ddst.clone())),
                ),
            );
        }
    }

    // lhs = scale * (∂φ/∂τ + Σ ∂φ/∂x_j f_j)
    let mut lhs = phi_b.derivative_idx(tau_idx)?;
    for (j, v) in src.variables().iter().enumerate() {
        let vj = alph.require(v).map_err(DynError::Exact)?;
        let d = phi_b.derivative_idx(vj)?;
        let Some(fj) = BasedSum::from_rational(&base, &src_flow[j]) else {
            return Ok(None);
        };
        lhs = lhs.add(&d.mul(&fj)?)?;
    }
    lhs = lhs.scale(scale);

    // rhs = g_i(φ) = (n∘φ)/(d∘φ): compare lhs*(d∘φ) - (n∘φ) to zero.
    let gnum = match gi.numerator().embed(alph) {
        Ok(p) => p,
        Err(_) => return Ok(None),
    };
    let n_at = poly_at_based(&gnum, &base, &based_bind)?;
    let diff = if gi.denominator().is_one() {
        lhs.sub(&n_at)?
    } else {
        let gden = match gi.denominator().embed(alph) {
            Ok(p) => p,
            Err(_) => return Ok(None),
        };
        let d_at = poly_at_based(&gden, &base, &based_bind)?;
        lhs.mul(&d_at)?.sub(&n_at)?
    };
    // Constraints are already folded into flows; parameter maps may
    // reintroduce eliminated parameters, so fold them into the digits.
    let diff = reduce_based(&diff, src, &base)?;
    Ok(Some(diff.is_zero_value()?))
}

fn reduce_based(
    b: &BasedSum,
    src: &TotalSystem,
    base: &Polynomial,
) -> Result<BasedSum, MapError> {
    if src.constraints().is_empty() {
        return Ok(b.clone());
    }
    // Substitute constraints digit-by-digit; the base itself must be
    // constraint-free for this to be sound, which holds in the catalog
    // (bases are phase polynomials with explicit parameters reduced).
    let alph = base.alphabet();
    let mut digits = Vec::new();
    for d in b.digits() {
        let r = src.reduce(&RationalFunction::from_poly(d.clone()))?;
        match r.as_polynomial() {
            Some(p) => digits.push(p.clone()),
            None => {
                return Err(MapError::Composition(
                    "constraint substitution left a rational digit".into(),
                ))
            }
        }
    }
    let reduced_base = src.reduce(&RationalFunction::from_poly(base.clone()))?;
    let rb = reduced_base
        .as_polynomial()
        .cloned()
        .unwrap_or_else(|| base.clone());
    let _ = alph;
    Ok(BasedSum::from_digits(&rb, digits))
}

/// `is_symmetry(map, sys)`: residuals of the Backlund condition; the map
/// is a symmetry iff all residuals vanish.
pub fn is_symmetry(
    map: &BirationalMap,
    sys: &TotalSystem,
) -> Result<Vec<ConjugacyResidual>, MapError> {
    conjugates_flows(map, sys, sys)
}

/// Involution check `map ∘ map = id`, without materializing the
/// composition when the common-base fast path applies.
pub fn is_involution(map: &BirationalMap) -> Result<bool, MapError> {
    // Parameter map must be involutive outright.
    let alph = &map.source_alph;
    for (p, e) in &map.param_map {
        let mut bind = HashMap::new();
        for (q, f) in &map.param_map {
            bind.insert(q.clone(), f.clone());
        }
        let twice = e.substitute(alph, &bind)?;
        if !twice.equals(&RationalFunction::var(alph, p)?)? {
            return Ok(false);
        }
    }

    let dens: Vec<&Polynomial> = map
        .components
        .iter()
        .map(|c| c.denominator())
        .collect();
    if let Some(base) = find_common_base(&dens) {
        // Build φ-bindings as based sums.
        let mut bind: HashMap<String, BasedSum> = HashMap::new();
        for (v, c) in map.target_vars.iter().zip(map.components.iter()) {
            let Some(b) = BasedSum::from_rational(&base, c) else {
                return generic_involution(map);
            };
            bind.insert(v.clone(), b);
        }
        for (p, e) in &map.param_map {
            let Some(b) = BasedSum::from_rational(&base, e) else {
                return generic_involution(map);
            };
            bind.insert(p.clone(), b);
        }
        // Check base ∘ φ = base as values; then composition denominators
        // collapse onto powers of the original base.
        let base_at = poly_at_based(&base, &base, &bind)?;
        let base_plain = BasedSum::from_polynomial(&base, base.clone());
        if !base_at.sub(&base_plain)?.is_zero_value()? {
            return generic_involution(map);
        }
        for (v, c) in map.target_vars.iter().zip(map.components.iter()) {
            // φ_v ∘ φ = (num_v ∘ φ) * G^k / c with den_v = c * base^k.
            let (k, rest) = c.denominator().extract_power_of(&base, 64);
            let Some(cst) = rest.as_constant() else {
                return generic_involution(map);
            };
            let n_at = poly_at_based(c.numerator(), &base, &bind)?;
            let shifted = n_at.shift(k as usize).scale(&(Rat::one() / cst));
            let idv = BasedSum::from_polynomial(&base, Polynomial::var(alph, v)?);
            if !shifted.sub(&idv)?.is_zero_value()? {
                return Ok(false);
            }
        }
        return Ok(true);
    }
    generic_involution(map)
}

fn generic_involution(map: &BirationalMap) -> Result<bool, MapError> {
    let twice = map.compose(map)?;
    let id = BirationalMap::identity(
        &map.source_alph,
        &map.source_vars,
        &map
            .time_pairs
            .iter()
            .map(|tp| tp.src.clone())
            .collect::<Vec<_>>(),
    );
    twice.equals_mod(&id, &[])
}

/// Report from checking the extended affine Weyl relations on a
/// generator triple.
#[derive(Debug, Clone)]
pub struct WeylReport {
    pub s0_involution: bool,
    pub s1_involution: bool,
    pub pi_involution: bool,
    /// Whether `π ∘ s0 ∘ π = s1` holds exactly; the paper asserts the
    /// group structure but never states this relation, so a failure is a
    /// reportable finding rather than an error.
    pub pi_s0_pi_equals_s1: bool,
}

pub fn weyl_relations(
    s0: &BirationalMap,
    s1: &BirationalMap,
    pi: &BirationalMap,
    constraints: &[(String, RationalFunction)],
) -> Result<WeylReport, MapError> {
    let conj = pi.compose(s0)?.compose(pi)?;
    Ok(WeylReport {
        s0_involution: is_involution(s0)?,
        s1_involution: is_involution(s1)?,
        pi_involution: is_involution(pi)?,
        pi_s0_pi_equals_s1: conj.equals_mod(s1, constraints)?,
    })
}

/// Pushes a system forward through an invertible map: the induced total
/// system in target coordinates.
pub fn pushforward_system(
    map: &BirationalMap,
    sys: &TotalSystem,
) -> Result<TotalSystem, MapError> {
    let inv = map.inverse.as_ref().ok_or(MapError::MissingInverse)?;
    let alph = &map.source_alph;
    let mut times = Vec::new();
    let mut flows = Vec::new();
    for tp in &map.time_pairs {
        let scale = tp.dsrc_ddst.clone();
        let src_flow = sys.reduced_flow(&tp.src)?;
        let tau_idx = alph.require(&tp.src).map_err(DynError::Exact)?;
        let mut out_flow = Vec::new();
        for phi in &map.components {
            // dφ/dT = scale * (∂φ/∂τ + Σ ∂φ/∂x_j f_j), then rewrite in
            // target coordinates through the inverse.
            let mut acc = phi.derivative_idx(tau_idx)?;
            for (j, v) in sys.variables().iter().enumerate() {
                let vj = alph.require(v).map_err(DynError::Exact)?;
                let d = phi.derivative_idx(vj)?;
                if d.is_zero() || src_flow[j].is_zero() {
                    continue;
                }
                acc = acc.add(&d.mul(&src_flow[j].embed(alph)?)?)?;
            }
            acc = acc.scale(&scale);
            let rewritten = inv.pullback(&acc)?;
            out_flow.push(rewritten);
        }
        times.push(tp.dst.clone());
        flows.push(out_flow);
    }
    // Constraints carry over: parameters are unchanged by pushforward.
    let constraints = sys
        .constraints()
        .iter()
        .map(|(p, e)| Ok((p.clone(), e.embed(&inv.source_alph)?)))
        .collect::<Result<Vec<_>, ExactError>>()?;
    Ok(TotalSystem::new(
        inv.source_alph.clone(),
        map.target_vars.clone(),
        times,
        flows,
        constraints,
    )?)
}

/// The flow of `sys` written in chart coordinates, with each component
/// Laurent-split around `pole_sym` so holomorphy (zero principal part
/// and polynomial part with constant denominator) can be asserted.
pub struct ChartFlowComponent {
    pub time: String,
    pub var: String,
    pub value: RationalFunction,
    pub polynomial: bool,
    pub principal_part: RationalFunction,
}

pub fn chart_induced_flow(
    chart: &BirationalMap,
    sys: &TotalSystem,
    pole_sym: &str,
) -> Result<Vec<ChartFlowComponent>, MapError> {
    let pushed = pushforward_system(chart, sys)?;
    let mut out = Vec::new();
    for time in pushed.times() {
        for var in pushed.variables() {
            let value = pushed.reduce(pushed.component(time, var)?)?;
            let (polynomial, principal_part) = if value.is_polynomial() {
                (true, RationalFunction::zero(value.alphabet()))
            } else {
                let split = laurent_split(&value, pole_sym)?;
                let poly_ok = split.principal_part.is_zero()
                    && split.polynomial_part.is_polynomial();
                (poly_ok, split.principal_part)
            };
            out.push(ChartFlowComponent {
                time: time.clone(),
                var: var.clone(),
                value,
                polynomial,
                principal_part,
            });
        }
    }
    Ok(out)
}

/// Determinant of the Jacobian matrix of a square map.
pub fn jacobian_determinant(map: &BirationalMap) -> Result<RationalFunction, MapError> {
    let alph = &map.source_alph;
    let n = map.source_vars.len();
    assert_eq!(n, map.target_vars.len(), "square map required");
    let mut rows = Vec::with_capacity(n);
    for c in &map.components {
        let mut row = Vec::with_capacity(n);
        for v in &map.source_vars {
            let vi = alph.require(v).map_err(DynError::Exact)?;
            row.push(c.derivative_idx(vi)?);
        }
        rows.push(row);
    }
    Ok(det_rational(&rows)?)
}

fn det_rational(m: &[Vec<RationalFunction>]) -> Result<RationalFunction, ExactError> {
    let n = m.len();
    if n == 1 {
        return Ok(m[0][0].clone());
    }
    let alph = m[0][0].alphabet().clone();
    let mut acc = RationalFunction::zero(&alph);
    for i in 0..n {
        if m[i][0].is_zero() {
            continue;
        }
        let minor: Vec<Vec<RationalFunction>> = (0..n)
            .filter(|&r| r != i)
            .map(|r| m[r][1..].to_vec())
            .collect();
        let sub = det_rational(&minor)?;
        let term = m[i][0].mul(&sub)?;
        acc = if i % 2 == 0 {
            acc.add(&term)?
        } else {
            acc.sub(&term)?
        };
    }
    Ok(acc)
}

/// Result of the universal reflection series
/// `s(g) = g + (α/f){f,g} + (1/2!)(α/f)^2 {f,{f,g}} + ...`.
pub struct SeriesResult {
    pub value: RationalFunction,
    /// Number of nonzero terms (iterated bracket vanished at this index).
    pub depth: usize,
}

pub fn poisson_series_reflection(
    f: &Polynomial,
    alpha: &RationalFunction,
    g: &Polynomial,
    alph: &Alphabet,
    pairs: &[(String, String)],
    max_depth: usize,
) -> Result<SeriesResult, MapError> {
    let mut bracket = g.clone();
    let mut terms: Vec<RationalFunction> = vec![RationalFunction::from_poly(g.clone())];
    let f_rf = RationalFunction::from_poly(f.clone());
    let mut factorial = Rat::one();
    for k in 1..=max_depth {
        bracket = poisson_bracket(f, &bracket, alph, pairs)?;
        if bracket.is_zero() {
            let mut acc = RationalFunction::zero(alph);
            for t in &terms {
                acc = acc.add(t)?;
            }
            return Ok(SeriesResult {
                value: acc,
                depth: terms.len(),
            });
        }
        factorial *= Rat::from_integer((k as i64).into());
        let coeff = alpha.pow(k as i32)?.div(&f_rf.pow(k as i32)?)?;
        let term = coeff
            .mul(&RationalFunction::from_poly(bracket.clone()))?
            .scale(&(Rat::one() / factorial.clone()));
        terms.push(term);
    }
    Err(MapError::SeriesDepth(max_depth))
}

/// Solution family returned by holomorphy-based Hamiltonian recovery.
pub struct RecoveredFamily {
    pub alph: Alphabet,
    /// Monomial basis (phase monomials times parameter powers).
    pub monomials: Vec<Polynomial>,
    /// Nullspace basis: coefficient vectors over `monomials`.
    pub basis: Vec<Vec<Rat>>,
}

impl RecoveredFamily {
    pub fn dimension(&self) -> usize {
        self.basis.len()
    }

    /// Whether `target` lies in the family's span (after expressing it
    /// over the ansatz monomials; fails if it uses other monomials).
    pub fn contains(&self, target: &Polynomial) -> Result<bool, MapError> {
        let mut vec = vec![Rat::zero(); self.monomials.len()];
        let mut rem = target.embed(&self.alph)?;
        for (i, m) in self.monomials.iter().enumerate() {
            // Each ansatz entry is a single monomial polynomial.
            let (mono, _) = m.leading().expect("nonzero monomial");
            let c = rem.coeff(mono);
            if !num_traits::Zero::is_zero(&c) {
                vec[i] = c.clone();
                rem = rem.sub(&m.scale(&c))?;
            }
        }
        if !rem.is_zero() {
            return Ok(false);
        }
        Ok(linalg::in_span(&self.basis, &vec))
    }
}

/// Builds a general Hamiltonian ansatz (total degree <= `degree` in the
/// phase variables, parameter powers up to `param_degree`), imposes that
/// its pullback through every chart inverse has zero principal part in
/// the chart's pole symbol, and solves the linear conditions exactly.
pub fn recover_hamiltonian(
    alph: &Alphabet,
    phase_vars: &[String],
    params: &[String],
    degree: u32,
    param_degree: u32,
    charts: &[(&BirationalMap, String)],
    constraints: &[(String, RationalFunction)],
) -> Result<RecoveredFamily, MapError> {
    // Enumerate ansatz monomials.
    let mut monomials: Vec<Polynomial> = Vec::new();
    let var_idx: Vec<usize> = phase_vars
        .iter()
        .map(|v| alph.require(v).map_err(DynError::Exact))
        .collect::<Result<Vec<_>, _>>()?;
    let par_idx: Vec<usize> = params
        .iter()
        .map(|v| alph.require(v).map_err(DynError::Exact))
        .collect::<Result<Vec<_>, _>>()?;
    let mut stack = vec![(0usize, vec![0u16; var_idx.len()], 0u32)];
    let mut phase_monos: Vec<Vec<u16>> = Vec::new();
    while let Some((i, exps, used)) = stack.pop() {
        if i == var_idx.len() {
            phase_monos.push(exps);
            continue;
        }
        for e in 0..=(degree - used) {
            let mut next = exps.clone();
            next[i] = e as u16;
            stack.push((i + 1, next, used + e));
        }
    }
    phase_monos.sort();
    let mut param_monos: Vec<Vec<u16>> = Vec::new();
    let mut pstack = vec![(0usize, vec![0u16; par_idx.len()], 0u32)];
    while let Some((i, exps, used)) = pstack.pop() {
        if i == par_idx.len() {
            param_monos.push(exps);
            continue;
        }
        for e in 0..=(param_degree - used) {
            let mut next = exps.clone();
            next[i] = e as u16;
            pstack.push((i + 1, next, used + e));
        }
    }
    param_monos.sort();
    for pm in &param_monos {
        for vm in &phase_monos {
            let mut exps = vec![0u16; alph.len()];
            for (k, &i) in var_idx.iter().enumerate() {
                exps[i] = vm[k];
            }
            for (k, &i) in par_idx.iter().enumerate() {
                exps[i] = pm[k];
            }
            monomials.push(Polynomial::from_terms(
                alph,
                [(crate::exactalg::Monomial(exps.into_boxed_slice()), Rat::one())],
            ));
        }
    }

    // Linear conditions: for each chart and each ansatz monomial, the
    // pullback through the inverse is Laurent in the pole symbol; every
    // principal-part coefficient must vanish.
    let mut rows: HashMap<(usize, String, crate::exactalg::Monomial), Vec<Rat>> = HashMap::new();
    for (ci, (chart, pole)) in charts.iter().enumerate() {
        let inv = chart.inverse.as_ref().ok_or(MapError::MissingInverse)?;
        let target_alph = &inv.source_alph;
        let pole_idx = target_alph.require(pole).map_err(DynError::Exact)?;
        for (mi, m) in monomials.iter().enumerate() {
            let m_reduced = reduce_with(constraints, alph, &RationalFunction::from_poly(m.clone()))?;
            let pulled = inv.pullback(&m_reduced)?;
            // Split around the pole: denominator must be pole^k (times
            // constants) for the conditions to be linear; the catalog's
            // charts guarantee this.
            let split = laurent_split(&pulled, pole)?;
            let principal_den_monomial =
                split.principal_part.is_zero() || split.principal_part.denominator().num_terms() == 1;
            if !split.polynomial_part.is_polynomial() || !principal_den_monomial {
                return Err(MapError::Inconsistent(format!(
                    "chart pullback of ansatz monomial is not Laurent in {pole}"
                )));
            }
            if split.principal_part.is_zero() {
                continue;
            }
            let num = split.principal_part.numerator();
            let den_pow = split.principal_part.denominator().degree_in(pole_idx);
            for (mono, coeff) in num.terms() {
                // Key: pole deficit and the remaining monomial.
                let mut key_exps = mono.0.to_vec();
                let pole_surplus = key_exps[pole_idx];
                key_exps[pole_idx] = den_pow - pole_surplus;
                let key = (
                    ci,
                    pole.clone(),
                    crate::exactalg::Monomial(key_exps.into_boxed_slice()),
                );
                let row = rows
                    .entry(key)
                    .or_insert_with(|| vec![Rat::zero(); monomials.len()]);
                row[mi] = &row[mi] + coeff;
            }
        }
    }
    let row_vecs: Vec<Vec<Rat>> = rows.into_values().collect();
    let basis = linalg::nullspace(row_vecs, monomials.len());
    Ok(RecoveredFamily {
        alph: alph.clone(),
        monomials,
        basis,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::parse::{parse_expr, parse_poly};
    use crate::exactalg::rat;

    fn simple_alph() -> Alphabet {
        Alphabet::new(&["q1", "p1", "al", "t", "s"]).unwrap()
    }

    /// Generators of the two-variable autonomous family (f0 = p1,
    /// f1 = p1 + 2 q1^2 - 1).
    fn gens() -> (BirationalMap, BirationalMap, BirationalMap) {
        let a = simple_alph();
        let make = |comps: &[(&str, &str)], pmap: &[(&str, &str)]| BirationalMap {
            source_alph: a.clone(),
            target_alph: a.clone(),
            source_vars: vec!["q1".into(), "p1".into()],
            target_vars: vec!["q1".into(), "p1".into()],
            components: comps
                .iter()
                .map(|(_, e)| parse_expr(&a, e).unwrap())
                .collect(),
            param_map: pmap
                .iter()
                .map(|(p, e)| (p.to_string(), parse_expr(&a, e).unwrap()))
                .collect(),
            time_pairs: vec![TimePair::identity("t"), TimePair::identity("s")],
            inverse: None,
        };
        let s0 = make(
            &[("q1", "q1 + al/p1"), ("p1", "p1")],
            &[("al", "-al")],
        );
        let s1 = make(
            &[
                ("q1", "q1 - al/(p1 + 2*q1^2 - 1)"),
                (
                    "p1",
                    "p1 + 4*al*q1/(p1 + 2*q1^2 - 1) - 2*al^2/(p1 + 2*q1^2 - 1)^2",
                ),
            ],
            &[("al", "-al")],
        );
        let pi = make(
            &[("q1", "-q1"), ("p1", "-(p1 + 2*q1^2 - 1)")],
            &[("al", "-al")],
        );
        (s0, s1, pi)
    }

    fn sys_112() -> TotalSystem {
        let a = simple_alph();
        let f = vec![
            parse_expr(&a, "q1^2 + p1 - 1/2").unwrap(),
            parse_expr(&a, "-2*q1*p1 - al").unwrap(),
        ];
        TotalSystem::new(
            a,
            vec!["q1".into(), "p1".into()],
            vec!["t".into(), "s".into()],
            vec![f.clone(), f],
            vec![],
        )
        .unwrap()
    }

    #[test]
    fn generators_are_symmetries() {
        let sys = sys_112();
        let (s0, s1, pi) = gens();
        for (name, g) in [("s0", &s0), ("s1", &s1), ("pi", &pi)] {
            for r in is_symmetry(g, &sys).unwrap() {
                assert!(
                    r.zero,
                    "{name}: residual for {} along {}: {:?}",
                    r.target_var, r.target_time, r.residual
                );
            }
        }
    }

    #[test]
    fn generators_are_involutions() {
        let (s0, s1, pi) = gens();
        assert!(is_involution(&s0).unwrap());
        assert!(is_involution(&s1).unwrap());
        assert!(is_involution(&pi).unwrap());
    }

    #[test]
    fn weyl_relation_pi_s0_pi() {
        let (s0, s1, pi) = gens();
        let rep = weyl_relations(&s0, &s1, &pi, &[]).unwrap();
        assert!(rep.s0_involution && rep.s1_involution && rep.pi_involution);
        assert!(rep.pi_s0_pi_equals_s1);
    }

    #[test]
    fn identity_map_is_symmetry() {
        let sys = sys_112();
        let a = sys.alphabet().clone();
        let id = BirationalMap::identity(
            &a,
            &["q1".into(), "p1".into()],
            &["t".into(), "s".into()],
        );
        for r in is_symmetry(&id, &sys).unwrap() {
            assert!(r.zero);
        }
    }

    #[test]
    fn series_reproduces_s0_and_depth() {
        let a = simple_alph();
        let f0 = parse_poly(&a, "p1").unwrap();
        let alpha = parse_expr(&a, "al").unwrap();
        let g = parse_poly(&a, "q1").unwrap();
        let pairs = vec![("q1".to_string(), "p1".to_string())];
        let r = poisson_series_reflection(&f0, &alpha, &g, &a, &pairs, 10).unwrap();
        assert_eq!(r.depth, 2);
        assert_eq!(r.value, parse_expr(&a, "q1 + al/p1").unwrap());
    }

    #[test]
    fn series_on_constant() {
        let a = simple_alph();
        let f0 = parse_poly(&a, "p1").unwrap();
        let alpha = parse_expr(&a, "al").unwrap();
        let g = parse_poly(&a, "7").unwrap();
        let pairs = vec![("q1".to_string(), "p1".to_string())];
        let r = poisson_series_reflection(&f0, &alpha, &g, &a, &pairs, 10).unwrap();
        assert_eq!(r.depth, 1);
        assert_eq!(r.value, parse_expr(&a, "7").unwrap());
    }

    #[test]
    fn jacobian_of_scaling() {
        let a = Alphabet::new(&["x", "y"]).unwrap();
        let m = BirationalMap {
            source_alph: a.clone(),
            target_alph: a.clone(),
            source_vars: vec!["x".into(), "y".into()],
            target_vars: vec!["x".into(), "y".into()],
            components: vec![
                parse_expr(&a, "2*x").unwrap(),
                parse_expr(&a, "y").unwrap(),
            ],
            param_map: vec![],
            time_pairs: vec![],
            inverse: None,
        };
        let j = jacobian_determinant(&m).unwrap();
        assert_eq!(j, RationalFunction::constant(&a, rat(2)));
    }

    #[test]
    fn compose_t0_matches_printed_form() {
        // T0 = s0 applied after pi reproduces the printed auto-Backlund
        // transformation (-q1 + al/(p1+2q1^2-1), 1-2q1^2-p1; al).
        let (s0, _, pi) = gens();
        let a = simple_alph();
        let t0 = s0.compose(&pi).unwrap();
        let q1 = t0.component("q1").unwrap();
        let p1 = t0.component("p1").unwrap();
        let want_q1 = parse_expr(&a, "-q1 + al/(p1 + 2*q1^2 - 1)").unwrap();
        let want_p1 = parse_expr(&a, "1 - 2*q1^2 - p1").unwrap();
        assert!(q1.equals(&want_q1).unwrap());
        assert!(p1.equals(&want_p1).unwrap());
        // And the parameter map is the identity.
        let al = t0
            .param_map
            .iter()
            .find(|(p, _)| p == "al")
            .map(|(_, e)| e.clone())
            .unwrap();
        assert!(al.equals(&parse_expr(&a, "al").unwrap()).unwrap());
    }
}
