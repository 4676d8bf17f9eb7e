//! Claim suite: each claim binds one executable check to catalog entry
//! ids and an expected outcome, with provenance to a paper anchor.
//! Failures are report entries, not errors; anything that throws is
//! reported with `Status::Error`.

use std::collections::HashMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::report::{Status, VerificationReport};
use super::{AnchorJson, Catalog, CatalogError, PayloadJson};
use crate::dynsys::{
    check_solution, compatibility_residual, is_conserved, poisson_bracket, reduce_with,
    SolutionAssignment, TotalSystem,
};
use crate::exactalg::parse::{parse_expr, parse_poly};
use crate::exactalg::{parse_rat, rat_to_f64, rat_to_string, Alphabet, Polynomial, RationalFunction};
use crate::lax::{affine_match, det_expansion, extract_flow, zero_curvature_residual};
use crate::maps::{
    chart_induced_flow, conjugates_flows, is_involution, is_symmetry, jacobian_determinant,
    poisson_series_reflection, pushforward_system, recover_hamiltonian, weyl_relations,
};
use crate::numerics::{
    drift_report, fd_first, fd_third, integrate_flow, path_independence, solve_profile_ode,
    CompiledExpr,
};
use crate::reductions::{
    combine_flows, homogeneity_check, jet_reduce, jet_t_derivative, solve_linear,
    traveling_wave_reduce, CombineTerm, ScalarODE, Tower,
};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClaimJson {
    pub id: String,
    #[serde(flatten)]
    pub anchor: AnchorJson,
    /// Acceptance criteria this claim belongs to.
    #[serde(default)]
    pub criteria: Vec<u32>,
    #[serde(flatten)]
    pub check: CheckJson,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "check", rename_all = "snake_case")]
pub enum CheckJson {
    /// All cross-derivative residuals of the system vanish.
    CompatibilityZero { system: String },
    /// With constraints dropped, at least one residual is nonzero; the
    /// failing components are recorded.
    CompatibilityNonzero { system: String },
    /// Poisson bracket of the two Hamiltonians vanishes (after applying
    /// the named system's parameter constraints).
    PoissonZero {
        hamiltonian: String,
        #[serde(default)]
        constraints_from: Option<String>,
    },
    /// Quantities are first integrals along the listed flows.
    /// Quantity refs: "int:<id>", "ham:<id>:<time>", "expr:<id>".
    Conserved {
        system: String,
        quantities: Vec<String>,
        #[serde(default)]
        times: Vec<String>,
    },
    /// The stored flows equal the Hamiltonian-generated ones.
    HamiltonianFlowMatches { hamiltonian: String, system: String },
    /// Componentwise equality of two systems' flows after substitutions
    /// applied to either side (parameter dictionaries, specializations).
    FlowEquals {
        system: String,
        other: String,
        #[serde(default)]
        subs_self: Vec<(String, String)>,
        #[serde(default)]
        subs_other: Vec<(String, String)>,
    },
    /// Backlund condition: the map conjugates the system onto itself at
    /// mapped parameters, and is an involution.
    Symmetry {
        map: String,
        system: String,
        #[serde(default = "default_true")]
        involution: bool,
    },
    /// `pi ∘ s0 ∘ pi` compared against `s1` (reported, not assumed).
    WeylComposite {
        s0: String,
        s1: String,
        pi: String,
        #[serde(default)]
        constraints_from: Option<String>,
    },
    /// outer ∘ inner equals the expected map exactly.
    ComposeEquals {
        outer: String,
        inner: String,
        expect: String,
        #[serde(default)]
        constraints_from: Option<String>,
    },
    /// Every component of the generator is reproduced by the universal
    /// Poisson reflection series at finite depth.
    SeriesMatches {
        generator: String,
        hamiltonian: String,
        f_expr: String,
        alpha_expr: String,
        max_depth: usize,
    },
    /// The map intertwines source and target flows.
    Conjugates {
        map: String,
        source: String,
        target: String,
        #[serde(default)]
        mod_subs: Vec<(String, String)>,
    },
    /// Pushforward through the (invertible) map reproduces the stored
    /// target system exactly, componentwise.
    PushforwardMatches {
        map: String,
        source: String,
        expect: String,
        #[serde(default)]
        expect_polynomial: bool,
    },
    /// Computes the pushforward and reports which of the two stored
    /// variants (verbatim vs oracle-corrected) matches; passes iff the
    /// corrected entry matches everywhere.
    TypoResolution {
        map: String,
        source: String,
        verbatim: String,
        corrected: String,
    },
    /// The chart-transformed flow is polynomial in chart coordinates.
    ChartFlowPolynomial {
        chart: String,
        system: String,
        pole: String,
    },
    /// Pullbacks of expressions through the chart inverse are polynomial
    /// (or are expected to fail, when listed).
    PullbackPolynomial {
        chart: String,
        family: String,
        exprs: Vec<String>,
        pole: String,
        #[serde(default)]
        expect_nonpolynomial: Vec<usize>,
        #[serde(default)]
        constraints: Vec<(String, String)>,
    },
    JacobianIs { map: String, value: String },
    RecoverHamiltonian {
        charts: Vec<(String, String)>,
        family: String,
        phase_vars: Vec<String>,
        params: Vec<String>,
        degree: u32,
        param_degree: u32,
        #[serde(default)]
        constraints: Vec<(String, String)>,
        contains: String,
    },
    /// inverse ∘ map = id modulo the listed first-integral
    /// substitutions, and map ∘ inverse = id exactly.
    RoundTripIdentity { map: String },
    ZeroCurvature {
        a: String,
        b: String,
        system: String,
        time: String,
        delta: String,
    },
    ExtractFlowMatches {
        a: String,
        b: String,
        system: String,
        time: String,
        delta: String,
        #[serde(default)]
        constraints: Vec<(String, String)>,
    },
    /// det(A) equals the stored expansion term by term.
    DetMatches { a: String, expect: String },
    /// Every T-coefficient of det(A) is conserved along both flows.
    DetCoefficientsConserved { a: String, system: String },
    /// Pullbacks through a map equal expected expressions (exactly).
    PullbackValues {
        map: String,
        items: Vec<(String, String)>,
        #[serde(default)]
        subs: Vec<(String, String)>,
    },
    /// Pullback through a map matches `a*K + b` for the referenced
    /// Hamiltonian; the affine pair is an output, recorded as a note.
    PullbackAffine {
        map: String,
        expr: String,
        vs: String,
        #[serde(default)]
        subs: Vec<(String, String)>,
    },
    /// Resultant elimination: degree check, optional comparison with a
    /// stored expansion (typo list attached), and conservation of the
    /// eliminated surface along the flows.
    Surface {
        family: String,
        f1: String,
        f2: String,
        eliminate: String,
        degree_vars: Vec<String>,
        expect_degree: u32,
        compare: String,
        conserved_along: String,
        k_subs: Vec<(String, String)>,
    },
    SolutionZero { solution: String },
    JetReduce {
        system: String,
        t_time: String,
        towers: Vec<(String, Vec<String>)>,
        #[serde(default)]
        params: Vec<String>,
        expect: Vec<String>,
    },
    CombineFlows {
        system: String,
        t_time: String,
        towers: Vec<(String, Vec<String>)>,
        #[serde(default)]
        params: Vec<String>,
        terms: Vec<(usize, String, usize)>,
        expect: String,
    },
    TravelingWave {
        system: String,
        t_time: String,
        towers: Vec<(String, Vec<String>)>,
        #[serde(default)]
        params: Vec<String>,
        ode_index: usize,
        new_unknown: String,
        wave_suffix: String,
        speed: String,
        expect: String,
    },
    /// `d/dT` of the integrated relation recovers the original relation
    /// as a rational identity.
    TwConsistency {
        symbols: Vec<String>,
        unknown: String,
        suffix: String,
        integrated: String,
        integrated_factor: String,
        original: String,
        original_factor: String,
    },
    /// Solves one flow component linearly for a partner variable and
    /// produces the second-order scalar relation.
    EliminateLinear {
        system: String,
        time: String,
        solve_component: String,
        solve_for: String,
        unknown: String,
        suffix: String,
        expect: String,
    },
    Homogeneity {
        system: String,
        t_time: String,
        towers: Vec<(String, Vec<String>)>,
        #[serde(default)]
        params: Vec<String>,
        ode_index: usize,
        weights: Vec<(String, i64)>,
        expect_weight: i64,
    },
    /// Substitutes values into a relation and compares with the target
    /// (up to exact equality after parameter renaming).
    SpecializeMatches {
        symbols: Vec<String>,
        relation: String,
        #[serde(default)]
        subs: Vec<(String, String)>,
        expect: String,
    },
    NumericDrift {
        system: String,
        time: String,
        init: Vec<String>,
        #[serde(default)]
        params: Vec<(String, String)>,
        span: (f64, f64),
        tol: f64,
        quantities: Vec<String>,
        max_rel: f64,
        #[serde(default)]
        convergence_check: bool,
    },
    NumericPathIndependence {
        system: String,
        init: Vec<String>,
        #[serde(default)]
        params: Vec<(String, String)>,
        t_len: f64,
        s_len: f64,
        tol: f64,
        max_disc: f64,
    },
    /// Integrating from the solution point keeps the trajectory on the
    /// formula to within `factor * tol` (constant for fixed points).
    NumericFollowsSolution {
        solution: String,
        time: String,
        span: (f64, f64),
        tol: f64,
        factor: f64,
        #[serde(default)]
        fixed_times: Vec<(String, f64)>,
    },
    /// The tanh kink of the two-variable system: analytic residual on a
    /// grid, double precision.
    NumericTanhKink { grid: usize, half_width: f64, bound: f64 },
    /// Stationary mKdV residual with the elliptic profile from a dense
    /// ODE solve and fourth-order finite differences.
    NumericMkdvProfile {
        tol: f64,
        step: f64,
        half_span: f64,
        bound: f64,
    },
    CoverageAudit { eq_lo: u32, eq_hi: u32 },
    EntryCountAtLeast { min: usize },
}

fn default_true() -> bool {
    true
}

/// Glob matching with `*` and `?`; a pattern without wildcards matches
/// the id itself or any id under `pattern.`.
pub fn matches_filter(id: &str, pattern: &str) -> bool {
    if pattern.is_empty() {
        return true;
    }
    if !pattern.contains('*') && !pattern.contains('?') {
        return id == pattern || id.starts_with(&format!("{pattern}."));
    }
    glob_match(pattern.as_bytes(), id.as_bytes())
}

fn glob_match(pat: &[u8], s: &[u8]) -> bool {
    match (pat.first(), s.first()) {
        (None, None) => true,
        (Some(b'*'), _) => {
            glob_match(&pat[1..], s) || (!s.is_empty() && glob_match(pat, &s[1..]))
        }
        (Some(b'?'), Some(_)) => glob_match(&pat[1..], &s[1..]),
        (Some(a), Some(b)) if a == b => glob_match(&pat[1..], &s[1..]),
        _ => false,
    }
}

/// Checks whether the glob pattern is syntactically acceptable.
pub fn valid_filter(pattern: &str) -> bool {
    pattern
        .bytes()
        .all(|b| b.is_ascii_alphanumeric() || b"*?.-_:".contains(&b))
}

/// Runs all claims matching the filter, optionally across threads.
/// Reports come back sorted by claim id regardless of scheduling.
pub fn run_claims(cat: &Catalog, filter: &str, jobs: usize) -> Vec<VerificationReport> {
    let selected: Vec<&ClaimJson> = cat
        .claims
        .iter()
        .filter(|c| matches_filter(&c.id, filter))
        .collect();
    let jobs = jobs.max(1);
    let mut reports: Vec<VerificationReport> = if jobs == 1 || selected.len() <= 1 {
        selected.iter().map(|c| run_one(cat, c)).collect()
    } else {
        std::thread::scope(|scope| {
            let mut handles = Vec::new();
            for chunk in selected.chunks(selected.len().div_ceil(jobs)) {
                let chunk: Vec<&ClaimJson> = chunk.to_vec();
                handles.push(scope.spawn(move || {
                    chunk
                        .iter()
                        .map(|c| run_one(cat, c))
                        .collect::<Vec<_>>()
                }));
            }
            handles
                .into_iter()
                .flat_map(|h| h.join().expect("claim thread"))
                .collect()
        })
    };
    reports.sort_by(|a, b| a.claim_id.cmp(&b.claim_id));
    reports
}

pub fn run_one(cat: &Catalog, claim: &ClaimJson) -> VerificationReport {
    let start = Instant::now();
    let mut notes = Vec::new();
    let outcome = execute(cat, &claim.check, &mut notes);
    let millis = start.elapsed().as_millis();
    match outcome {
        Ok(Verdict::Pass) => VerificationReport {
            claim_id: claim.id.clone(),
            anchor: claim.anchor.anchor.clone(),
            status: Status::Pass,
            residual_summary: String::new(),
            millis,
            notes,
        },
        Ok(Verdict::Fail(summary)) => VerificationReport {
            claim_id: claim.id.clone(),
            anchor: claim.anchor.anchor.clone(),
            status: Status::Fail,
            residual_summary: summary,
            millis,
            notes,
        },
        Err(e) => VerificationReport {
            claim_id: claim.id.clone(),
            anchor: claim.anchor.anchor.clone(),
            status: Status::Error,
            residual_summary: e.to_string(),
            millis,
            notes,
        },
    }
}

pub enum Verdict {
    Pass,
    Fail(String),
}

fn fail(msg: impl Into<String>) -> Result<Verdict, CatalogError> {
    Ok(Verdict::Fail(msg.into()))
}

fn parse_subs(
    alph: &Alphabet,
    subs: &[(String, String)],
) -> Result<Vec<(String, RationalFunction)>, CatalogError> {
    subs.iter()
        .map(|(p, e)| Ok((p.clone(), parse_expr(alph, e)?)))
        .collect()
}

/// Resolves a quantity reference: "int:<id>", "ham:<id>:<time>",
/// "expr:<id>", or a raw expression over the given alphabet.
fn resolve_quantity(
    cat: &Catalog,
    alph: &Alphabet,
    q: &str,
) -> Result<(String, RationalFunction), CatalogError> {
    if let Some(id) = q.strip_prefix("int:") {
        let (e, _) = cat.integral(id)?;
        return Ok((id.to_string(), e.clone()));
    }
    if let Some(rest) = q.strip_prefix("ham:") {
        let (id, time) = rest
            .rsplit_once(':')
            .ok_or_else(|| CatalogError::Parse(format!("bad quantity ref `{q}`")))?;
        let h = cat.hamiltonian(id)?;
        let p = h
            .hamiltonian(time)
            .map_err(CatalogError::Dyn)?
            .clone();
        return Ok((format!("{id}:{time}"), RationalFunction::from_poly(p)));
    }
    if let Some(id) = q.strip_prefix("expr:") {
        return Ok((id.to_string(), cat.expr(id)?.clone()));
    }
    Ok((q.to_string(), parse_expr(alph, q)?))
}

fn execute(
    cat: &Catalog,
    check: &CheckJson,
    notes: &mut Vec<String>,
) -> Result<Verdict, CatalogError> {
    match check {
        CheckJson::CompatibilityZero { system } => {
            let sys = cat.system(system)?;
            let res = compatibility_residual(sys, sys.times()[0].as_str(), sys.times()[1].as_str())
                .map_err(CatalogError::Dyn)?;
            for (v, r) in sys.variables().iter().zip(res.iter()) {
                if !r.is_zero() {
                    return fail(format!("component {v}: {r}"));
                }
            }
            Ok(Verdict::Pass)
        }
        CheckJson::CompatibilityNonzero { system } => {
            let sys = cat.system(system)?.without_constraints();
            let res = compatibility_residual(&sys, sys.times()[0].as_str(), sys.times()[1].as_str())
                .map_err(CatalogError::Dyn)?;
            let bad: Vec<&str> = sys
                .variables()
                .iter()
                .zip(res.iter())
                .filter(|(_, r)| !r.is_zero())
                .map(|(v, _)| v.as_str())
                .collect();
            if bad.is_empty() {
                return fail("all residuals vanish even without the constraint");
            }
            notes.push(format!(
                "without the parameter constraint, residuals fail for: {}",
                bad.join(", ")
            ));
            Ok(Verdict::Pass)
        }
        CheckJson::PoissonZero {
            hamiltonian,
            constraints_from,
        } => {
            let h = cat.hamiltonian(hamiltonian)?;
            let times = h.times();
            let h1 = h.hamiltonian(&times[0]).map_err(CatalogError::Dyn)?;
            let h2 = h.hamiltonian(&times[1]).map_err(CatalogError::Dyn)?;
            let b = poisson_bracket(h1, h2, h.alphabet(), h.pairs())
                .map_err(CatalogError::Dyn)?;
            let reduced = match constraints_from {
                None => RationalFunction::from_poly(b),
                Some(sid) => {
                    let sys = cat.system(sid)?;
                    sys.reduce(&RationalFunction::from_poly(b))
                        .map_err(CatalogError::Dyn)?
                }
            };
            if reduced.is_zero() {
                Ok(Verdict::Pass)
            } else {
                fail(format!("bracket = {reduced}"))
            }
        }
        CheckJson::Conserved {
            system,
            quantities,
            times,
        } => {
            let sys = cat.system(system)?;
            let times: Vec<String> = if times.is_empty() {
                sys.times().to_vec()
            } else {
                times.clone()
            };
            for q in quantities {
                let (name, expr) = resolve_quantity(cat, sys.alphabet(), q)?;
                let expr = expr.embed(sys.alphabet())?;
                for t in &times {
                    if !is_conserved(&expr, sys, t).map_err(CatalogError::Dyn)? {
                        return fail(format!("{name} not conserved along {t}"));
                    }
                }
            }
            Ok(Verdict::Pass)
        }
        CheckJson::HamiltonianFlowMatches { hamiltonian, system } => {
            let h = cat.hamiltonian(hamiltonian)?;
            let sys = cat.system(system)?;
            for time in h.times() {
                let generated = h.flow(&time).map_err(CatalogError::Dyn)?;
                for (v, g) in generated {
                    let stored = sys.component(&time, &v).map_err(CatalogError::Dyn)?;
                    if !g.equals(stored)? {
                        return fail(format!("d{v}/d{time}: generated {g}, stored {stored}"));
                    }
                }
            }
            Ok(Verdict::Pass)
        }
        CheckJson::FlowEquals {
            system,
            other,
            subs_self,
            subs_other,
        } => {
            let a = cat.system(system)?;
            let b = cat.system(other)?;
            let sub_a = parse_subs(a.alphabet(), subs_self)?;
            let sub_b = parse_subs(b.alphabet(), subs_other)?;
            for time in a.times() {
                for v in a.variables() {
                    let fa = reduce_with(
                        &sub_a,
                        a.alphabet(),
                        a.component(time, v).map_err(CatalogError::Dyn)?,
                    )
                    .map_err(CatalogError::Dyn)?;
                    let fb = reduce_with(
                        &sub_b,
                        b.alphabet(),
                        b.component(time, v).map_err(CatalogError::Dyn)?,
                    )
                    .map_err(CatalogError::Dyn)?;
                    if !fa.equals_by_name(&fb)? {
                        return fail(format!("d{v}/d{time}: {fa} vs {fb}"));
                    }
                }
            }
            Ok(Verdict::Pass)
        }
        CheckJson::Symmetry {
            map,
            system,
            involution,
        } => {
            let m = cat.map(map)?;
            let sys = cat.system(system)?;
            for r in is_symmetry(m, sys)? {
                if !r.zero {
                    return fail(format!(
                        "residual for {} along {}: {}",
                        r.target_var,
                        r.target_time,
                        r.residual
                            .map(|x| x.to_string())
                            .unwrap_or_else(|| "nonzero".into())
                    ));
                }
            }
            if *involution && !is_involution(m)? {
                return fail("map is not an involution");
            }
            Ok(Verdict::Pass)
        }
        CheckJson::WeylComposite {
            s0,
            s1,
            pi,
            constraints_from,
        } => {
            let constraints = match constraints_from {
                None => Vec::new(),
                Some(sid) => cat.system(sid)?.constraints().to_vec(),
            };
            let rep = weyl_relations(cat.map(s0)?, cat.map(s1)?, cat.map(pi)?, &constraints)?;
            if !(rep.s0_involution && rep.s1_involution && rep.pi_involution) {
                return fail(format!(
                    "involutions: s0={} s1={} pi={}",
                    rep.s0_involution, rep.s1_involution, rep.pi_involution
                ));
            }
            notes.push(format!(
                "pi∘s0∘pi {} s1 (relation checked, not assumed)",
                if rep.pi_s0_pi_equals_s1 { "=" } else { "!=" }
            ));
            if rep.pi_s0_pi_equals_s1 {
                Ok(Verdict::Pass)
            } else {
                fail("pi∘s0∘pi differs from s1")
            }
        }
        CheckJson::ComposeEquals {
            outer,
            inner,
            expect,
            constraints_from,
        } => {
            let composed = cat.map(outer)?.compose(cat.map(inner)?)?;
            let expect = cat.map(expect)?;
            let constraints = match constraints_from {
                None => Vec::new(),
                Some(sid) => cat.system(sid)?.constraints().to_vec(),
            };
            if composed.equals_mod(expect, &constraints)? {
                Ok(Verdict::Pass)
            } else {
                fail("composition differs from the expected map")
            }
        }
        CheckJson::SeriesMatches {
            generator,
            hamiltonian,
            f_expr,
            alpha_expr,
            max_depth,
        } => {
            let g = cat.map(generator)?;
            let h = cat.hamiltonian(hamiltonian)?;
            let alph = &g.source_alph;
            let f = parse_poly(alph, f_expr)?;
            let alpha = parse_expr(alph, alpha_expr)?;
            let mut depths = Vec::new();
            for (v, comp) in g.target_vars.iter().zip(g.components.iter()) {
                let gv = Polynomial::var(alph, v)?;
                let res =
                    poisson_series_reflection(&f, &alpha, &gv, alph, h.pairs(), *max_depth)?;
                if !res.value.equals(comp)? {
                    return fail(format!(
                        "series for {v} gives {}, catalog has {comp}",
                        res.value
                    ));
                }
                depths.push(format!("{v}:{}", res.depth));
            }
            notes.push(format!("termination depths {}", depths.join(" ")));
            Ok(Verdict::Pass)
        }
        CheckJson::Conjugates {
            map,
            source,
            target,
            mod_subs,
        } => {
            let m = cat.map(map)?;
            let src = cat.system(source)?;
            let dst = cat.system(target)?;
            let subs = parse_subs(&m.source_alph, mod_subs)?;
            let src_for_check = if subs.is_empty() {
                src.clone()
            } else {
                let mut s = src.clone();
                for (p, e) in subs {
                    s = s.with_substitution(&p, e);
                }
                s
            };
            for r in conjugates_flows(m, &src_for_check, dst)? {
                if !r.zero {
                    return fail(format!(
                        "residual for {} along {}: {}",
                        r.target_var,
                        r.target_time,
                        r.residual
                            .map(|x| x.to_string())
                            .unwrap_or_else(|| "nonzero".into())
                    ));
                }
            }
            Ok(Verdict::Pass)
        }
        CheckJson::PushforwardMatches {
            map,
            source,
            expect,
            expect_polynomial,
        } => {
            let m = cat.map(map)?;
            let src = cat.system(source)?;
            let dst = cat.system(expect)?;
            let pushed = pushforward_system(m, src)?;
            for time in pushed.times() {
                for v in pushed.variables() {
                    let got = pushed.reduce(pushed.component(time, v).map_err(CatalogError::Dyn)?)
                        .map_err(CatalogError::Dyn)?;
                    let want = dst
                        .reduce(dst.component(time, v).map_err(CatalogError::Dyn)?)
                        .map_err(CatalogError::Dyn)?;
                    if !got.equals_by_name(&want)? {
                        return fail(format!("d{v}/d{time}: computed {got}, stored {want}"));
                    }
                    if *expect_polynomial && !got.is_polynomial() {
                        return fail(format!("d{v}/d{time} is not polynomial: {got}"));
                    }
                }
            }
            Ok(Verdict::Pass)
        }
        CheckJson::TypoResolution {
            map,
            source,
            verbatim,
            corrected,
        } => {
            let m = cat.map(map)?;
            let src = cat.system(source)?;
            let pushed = pushforward_system(m, src)?;
            let compare = |dst: &TotalSystem| -> Result<Vec<String>, CatalogError> {
                let mut diffs = Vec::new();
                for time in pushed.times() {
                    for v in pushed.variables() {
                        let got = pushed
                            .reduce(pushed.component(time, v).map_err(CatalogError::Dyn)?)
                            .map_err(CatalogError::Dyn)?;
                        let want = dst
                            .reduce(dst.component(time, v).map_err(CatalogError::Dyn)?)
                            .map_err(CatalogError::Dyn)?;
                        if !got.equals_by_name(&want)? {
                            diffs.push(format!("d{v}/d{time}"));
                        }
                    }
                }
                Ok(diffs)
            };
            let verb_diffs = compare(cat.system(verbatim)?)?;
            let corr_diffs = compare(cat.system(corrected)?)?;
            if verb_diffs.is_empty() {
                notes.push("printed form matches the pushforward oracle".into());
            } else {
                notes.push(format!(
                    "printed form differs from the oracle in: {}",
                    verb_diffs.join(", ")
                ));
            }
            if corr_diffs.is_empty() {
                Ok(Verdict::Pass)
            } else {
                fail(format!(
                    "corrected entry still differs in: {}",
                    corr_diffs.join(", ")
                ))
            }
        }
        CheckJson::ChartFlowPolynomial {
            chart,
            system,
            pole,
        } => {
            let c = cat.map(chart)?;
            let sys = cat.system(system)?;
            for comp in chart_induced_flow(c, sys, pole)? {
                if !comp.polynomial {
                    return fail(format!(
                        "d{}/d{} has principal part {}",
                        comp.var, comp.time, comp.principal_part
                    ));
                }
            }
            Ok(Verdict::Pass)
        }
        CheckJson::PullbackPolynomial {
            chart,
            family,
            exprs,
            pole,
            expect_nonpolynomial,
            constraints,
        } => {
            let c = cat.map(chart)?;
            let inv = c
                .inverse
                .as_ref()
                .ok_or(crate::maps::MapError::MissingInverse)?;
            let alph = cat.family(family)?;
            let subs = parse_subs(&c.source_alph, constraints)?;
            for (i, e) in exprs.iter().enumerate() {
                let expr = parse_expr(alph, e)?;
                let reduced = reduce_with(&subs, alph, &expr).map_err(CatalogError::Dyn)?;
                let pulled = inv.pullback(&reduced)?;
                let split = crate::exactalg::laurent::laurent_split(&pulled, pole)?;
                let poly = split.principal_part.is_zero() && split.polynomial_part.is_polynomial();
                let want_poly = !expect_nonpolynomial.contains(&i);
                if poly != want_poly {
                    return fail(format!(
                        "expr #{i} `{e}`: polynomial={poly}, expected {want_poly} \
                         (principal part {})",
                        split.principal_part,
                    ));
                }
            }
            Ok(Verdict::Pass)
        }
        CheckJson::JacobianIs { map, value } => {
            let m = cat.map(map)?;
            let j = jacobian_determinant(m)?;
            let want = parse_expr(&m.source_alph, value)?;
            if j.equals(&want)? {
                Ok(Verdict::Pass)
            } else {
                fail(format!("jacobian = {j}"))
            }
        }
        CheckJson::RecoverHamiltonian {
            charts,
            family,
            phase_vars,
            params,
            degree,
            param_degree,
            constraints,
            contains,
        } => {
            let alph = cat.family(family)?.clone();
            let chart_refs: Vec<(&crate::maps::BirationalMap, String)> = charts
                .iter()
                .map(|(id, pole)| Ok((cat.map(id)?, pole.clone())))
                .collect::<Result<_, CatalogError>>()?;
            let subs = parse_subs(&chart_refs[0].0.source_alph, constraints)?;
            let fam = recover_hamiltonian(
                &alph,
                phase_vars,
                params,
                *degree,
                *param_degree,
                &chart_refs,
                &subs,
            )?;
            notes.push(format!("solution family dimension {}", fam.dimension()));
            let (name, target) = resolve_quantity(cat, &alph, contains)?;
            let target_poly = target
                .as_polynomial()
                .cloned()
                .ok_or_else(|| CatalogError::Parse("containment target not polynomial".into()))?;
            if fam.contains(&target_poly)? {
                notes.push(format!("family contains {name} (up to additive constant)"));
                Ok(Verdict::Pass)
            } else {
                fail(format!("{name} is not in the recovered family"))
            }
        }
        CheckJson::RoundTripIdentity { map } => {
            // Re-runs the load-time validation explicitly so the claim
            // shows up in reports (projections use integral mod-subs).
            let m = cat.map(map)?;
            let raw = cat.entry(map)?;
            let mod_subs = match &raw.payload {
                PayloadJson::Map(mj) => parse_subs(&m.source_alph, &mj.inverse_mod)?,
                _ => Vec::new(),
            };
            m.validate_inverse(&mod_subs)?;
            Ok(Verdict::Pass)
        }
        CheckJson::ZeroCurvature {
            a,
            b,
            system,
            time,
            delta,
        } => {
            let (pa, t_sym) = cat.pencil(a)?;
            let (pb, _) = cat.pencil(b)?;
            let sys = cat.system(system)?;
            let d = parse_rat(delta)?;
            let res = zero_curvature_residual(pa, pb, sys, time, t_sym, &d)
                .map_err(|e| CatalogError::Parse(e.to_string()))?;
            for (i, row) in res.iter().enumerate() {
                for (j, e) in row.iter().enumerate() {
                    if !e.is_zero() {
                        return fail(format!("entry ({i},{j}): {e}"));
                    }
                }
            }
            Ok(Verdict::Pass)
        }
        CheckJson::ExtractFlowMatches {
            a,
            b,
            system,
            time,
            delta,
            constraints,
        } => {
            let (pa, t_sym) = cat.pencil(a)?;
            let (pb, _) = cat.pencil(b)?;
            let sys = cat.system(system)?;
            let d = parse_rat(delta)?;
            let subs = parse_subs(pa.alphabet(), constraints)?;
            let vars: Vec<String> = sys.variables().to_vec();
            let flow = extract_flow(pa, pb, &vars, t_sym, &d, &subs)
                .map_err(|e| CatalogError::Parse(e.to_string()))?;
            for (v, got) in vars.iter().zip(flow.iter()) {
                let want = sys
                    .reduce(sys.component(time, v).map_err(CatalogError::Dyn)?)
                    .map_err(CatalogError::Dyn)?;
                let got_reduced =
                    reduce_with(&subs, pa.alphabet(), got).map_err(CatalogError::Dyn)?;
                if !got_reduced.equals_by_name(&want)? {
                    return fail(format!("d{v}/d{time}: extracted {got_reduced}, stored {want}"));
                }
            }
            Ok(Verdict::Pass)
        }
        CheckJson::DetMatches { a, expect } => {
            let (pa, t_sym) = cat.pencil(a)?;
            let inv = det_expansion(pa, t_sym).map_err(|e| CatalogError::Parse(e.to_string()))?;
            let det = inv.reconstruct(pa.alphabet())?;
            let want = cat.expr(expect)?;
            let want_p = want
                .as_polynomial()
                .cloned()
                .ok_or_else(|| CatalogError::Parse("det expansion not polynomial".into()))?
                .embed(pa.alphabet())?;
            if det == want_p {
                Ok(Verdict::Pass)
            } else {
                let diff = det.sub(&want_p)?;
                fail(format!("det differs by {diff}"))
            }
        }
        CheckJson::DetCoefficientsConserved { a, system } => {
            let (pa, t_sym) = cat.pencil(a)?;
            let sys = cat.system(system)?;
            let inv = det_expansion(pa, t_sym).map_err(|e| CatalogError::Parse(e.to_string()))?;
            for (k, c) in inv.t_coeffs.iter().enumerate() {
                if c.is_constant() {
                    continue;
                }
                let expr = RationalFunction::from_poly(c.clone()).embed(sys.alphabet())?;
                for t in sys.times() {
                    if !is_conserved(&expr, sys, t).map_err(CatalogError::Dyn)? {
                        return fail(format!("T^{k} coefficient not conserved along {t}"));
                    }
                }
            }
            Ok(Verdict::Pass)
        }
        CheckJson::PullbackValues { map, items, subs } => {
            let m = cat.map(map)?;
            let alph = &m.source_alph;
            let sub_list = parse_subs(alph, subs)?;
            for (expr, want) in items {
                let e = parse_expr(alph, expr)?;
                let pulled = m.pullback(&e)?;
                let reduced =
                    reduce_with(&sub_list, alph, &pulled).map_err(CatalogError::Dyn)?;
                let want_e = parse_expr(alph, want)?;
                if !reduced.equals_by_name(&want_e)? {
                    return fail(format!("pullback of `{expr}` = {reduced}, wanted {want}"));
                }
            }
            Ok(Verdict::Pass)
        }
        CheckJson::PullbackAffine {
            map,
            expr,
            vs,
            subs,
        } => {
            let m = cat.map(map)?;
            let alph = &m.source_alph;
            let sub_list = parse_subs(alph, subs)?;
            let e = parse_expr(alph, expr)?;
            let pulled = reduce_with(&sub_list, alph, &m.pullback(&e)?)
                .map_err(CatalogError::Dyn)?;
            let pulled_p = pulled
                .as_polynomial()
                .cloned()
                .ok_or_else(|| CatalogError::Parse("pullback not polynomial".into()))?;
            let (name, target) = resolve_quantity(cat, alph, vs)?;
            let target_p = reduce_with(&sub_list, alph, &target.embed(alph)?)
                .map_err(CatalogError::Dyn)?
                .as_polynomial()
                .cloned()
                .ok_or_else(|| CatalogError::Parse("target not polynomial".into()))?;
            match affine_match(&pulled_p, &target_p)? {
                Some((scale, shift)) => {
                    notes.push(format!(
                        "affine normalization vs {name}: scale {}, shift {}",
                        rat_to_string(&scale),
                        rat_to_string(&shift)
                    ));
                    Ok(Verdict::Pass)
                }
                None => fail(format!("no affine relation between pullback and {name}")),
            }
        }
        CheckJson::Surface {
            family,
            f1,
            f2,
            eliminate,
            degree_vars,
            expect_degree,
            compare,
            conserved_along,
            k_subs,
        } => {
            let alph = cat.family(family)?.clone();
            let p1 = parse_poly(&alph, f1)?;
            let p2 = parse_poly(&alph, f2)?;
            let surf = crate::exactalg::resultant::resultant_eliminate(&p1, &p2, eliminate)?;
            let idxs: Vec<usize> = degree_vars
                .iter()
                .map(|v| alph.require(v))
                .collect::<Result<_, _>>()?;
            let deg = surf.degree_in_vars(&idxs);
            if deg != *expect_degree {
                return fail(format!("surface degree {deg}, expected {expect_degree}"));
            }
            notes.push(format!("deg(F) = {deg} in ({})", degree_vars.join(", ")));
            // Comparison against the printed expansion, up to an overall
            // constant; mismatches become findings, not failures.
            let printed = cat.expr(compare)?;
            let printed_p = printed
                .as_polynomial()
                .cloned()
                .ok_or_else(|| CatalogError::Parse("printed surface not polynomial".into()))?
                .embed(&alph)?;
            let a = surf.primitive_part_signed();
            let b = printed_p.primitive_part_signed();
            if a == b || a == b.neg() {
                notes.push("printed surface matches the resultant up to constant".into());
            } else {
                let diff = a.sub(&b)?;
                notes.push(format!(
                    "printed surface differs from the resultant oracle; \
                     difference has {} terms: {}",
                    diff.num_terms(),
                    diff
                ));
            }
            // Conservation: substitute the level values and flow it.
            let sys = cat.system(conserved_along)?;
            let subs = parse_subs(&alph, k_subs)?;
            let on_shell = reduce_with(&subs, &alph, &RationalFunction::from_poly(surf.clone()))
                .map_err(CatalogError::Dyn)?;
            let embedded = on_shell.embed(sys.alphabet())?;
            if !embedded.is_zero() {
                for t in sys.times() {
                    if !is_conserved(&embedded, sys, t).map_err(CatalogError::Dyn)? {
                        return fail(format!("surface not conserved along {t}"));
                    }
                }
            } else {
                notes.push(
                    "surface vanishes identically on the level set (conserved trivially)".into(),
                );
            }
            Ok(Verdict::Pass)
        }
        CheckJson::SolutionZero { solution } => {
            let entry = cat.entry(solution)?;
            let PayloadJson::Solution(sol) = &entry.payload else {
                return Err(CatalogError::WrongKind(solution.to_string(), "solution"));
            };
            let sys = cat.system(&sol.system)?;
            let alph = sys.alphabet();
            let mut asg = SolutionAssignment::default();
            for (v, e) in &sol.values {
                asg.values.insert(v.clone(), parse_expr(alph, e)?);
            }
            for (p, e) in &sol.params {
                asg.params.insert(p.clone(), parse_expr(alph, e)?);
            }
            for (sym, pow, val) in &sol.algebraic {
                asg.algebraic.push((sym.clone(), *pow, parse_rat(val)?));
            }
            for (t, v, r) in check_solution(sys, &asg).map_err(CatalogError::Dyn)? {
                if !r.is_zero() {
                    return fail(format!("residual d{v}/d{t} = {r}"));
                }
            }
            Ok(Verdict::Pass)
        }
        CheckJson::JetReduce {
            system,
            t_time,
            towers,
            params,
            expect,
        } => {
            let odes = run_jet_reduce(cat, system, t_time, towers, params)?;
            if odes.len() != expect.len() {
                return fail(format!(
                    "expected {} relations, produced {}",
                    expect.len(),
                    odes.len()
                ));
            }
            for (ode, want) in odes.iter().zip(expect.iter()) {
                let want_p = parse_poly(&ode.alph, want)?;
                if !ode.matches(&want_p).map_err(|e| CatalogError::Parse(e.to_string()))? {
                    return fail(format!(
                        "relation {} differs from expected {want}",
                        ode.relation
                    ));
                }
            }
            Ok(Verdict::Pass)
        }
        CheckJson::CombineFlows {
            system,
            t_time,
            towers,
            params,
            terms,
            expect,
        } => {
            let odes = run_jet_reduce(cat, system, t_time, towers, params)?;
            let combine_terms: Vec<CombineTerm<'_>> = terms
                .iter()
                .map(|(idx, coeff, derivs)| {
                    Ok(CombineTerm {
                        ode: &odes[*idx],
                        coeff: parse_rat(coeff)?,
                        t_derivatives: *derivs,
                    })
                })
                .collect::<Result<_, CatalogError>>()?;
            let combined = combine_flows(&combine_terms, t_time)
                .map_err(|e| CatalogError::Parse(e.to_string()))?;
            let want = parse_poly(combined.alphabet(), expect)?;
            let a = combined.primitive_part_signed();
            let b = want.primitive_part_signed();
            if a == b || a == b.neg() {
                Ok(Verdict::Pass)
            } else {
                fail(format!("combined relation {a}"))
            }
        }
        CheckJson::TravelingWave {
            system,
            t_time,
            towers,
            params,
            ode_index,
            new_unknown,
            wave_suffix,
            speed,
            expect,
        } => {
            let odes = run_jet_reduce(cat, system, t_time, towers, params)?;
            let wave = traveling_wave_reduce(&odes[*ode_index], new_unknown, wave_suffix, speed)
                .map_err(|e| CatalogError::Parse(e.to_string()))?;
            let want = parse_poly(&wave.alph, expect)?;
            if wave
                .matches(&want)
                .map_err(|e| CatalogError::Parse(e.to_string()))?
            {
                Ok(Verdict::Pass)
            } else {
                fail(format!("wave relation {}", wave.relation))
            }
        }
        CheckJson::TwConsistency {
            symbols,
            unknown,
            suffix,
            integrated,
            integrated_factor,
            original,
            original_factor,
        } => {
            let alph = Alphabet::new(symbols)?;
            let r54 = RationalFunction::new(
                parse_poly(&alph, integrated)?,
                parse_poly(&alph, integrated_factor)?,
            )?;
            let r53 = RationalFunction::new(
                parse_poly(&alph, original)?,
                parse_poly(&alph, original_factor)?,
            )?;
            // d/dT of the integrated relation, quotient rule in jets.
            let n = r54.numerator().clone();
            let d = r54.denominator().clone();
            let dn = jet_t_derivative(&n, unknown, suffix)
                .map_err(|e| CatalogError::Parse(e.to_string()))?;
            let dd = jet_t_derivative(&d, unknown, suffix)
                .map_err(|e| CatalogError::Parse(e.to_string()))?;
            let big = dn.alphabet().union(dd.alphabet()).union(r53.alphabet());
            let num = dn
                .embed(&big)?
                .mul(&d.embed(&big)?)?
                .sub(&n.embed(&big)?.mul(&dd.embed(&big)?)?)?;
            let den = d.embed(&big)?.mul(&d.embed(&big)?)?;
            let derived = RationalFunction::new(num, den)?;
            if derived.equals_by_name(&r53)? {
                Ok(Verdict::Pass)
            } else {
                fail(format!("d/dT of integrated relation = {derived}"))
            }
        }
        CheckJson::EliminateLinear {
            system,
            time,
            solve_component,
            solve_for,
            unknown,
            suffix,
            expect,
        } => {
            let sys = cat.system(system)?;
            let alph = sys.alphabet();
            // Jet alphabet: u, u_T, u_TT plus the leftover symbols.
            let mut names = vec![
                crate::reductions::jet_name(unknown, suffix, 0),
                crate::reductions::jet_name(unknown, suffix, 1),
                crate::reductions::jet_name(unknown, suffix, 2),
            ];
            for i in 0..alph.len() {
                let nm = alph.name(i);
                if nm != solve_component && !sys.times().contains(&nm.to_string()) {
                    names.push(nm.to_string());
                }
            }
            let jets = Alphabet::new(&names)?;
            // Solve flow(solve_component) = u_T for solve_for.
            let f = sys
                .component(time, solve_component)
                .map_err(CatalogError::Dyn)?;
            let mut bind = HashMap::new();
            bind.insert(
                solve_component.to_string(),
                RationalFunction::var(&jets, unknown)?,
            );
            let f_jets = f.substitute(&jets, &bind)?;
            let u_t = RationalFunction::var(&jets, &crate::reductions::jet_name(unknown, suffix, 1))?;
            let eqn = f_jets.sub(&u_t)?;
            let partner = solve_linear(&eqn, solve_for)
                .map_err(|e| CatalogError::Parse(e.to_string()))?;
            // Second equation: d/dT(partner) = flow(solve_for)(u, partner).
            let dn = jet_t_derivative(partner.numerator(), unknown, suffix)
                .map_err(|e| CatalogError::Parse(e.to_string()))?;
            let dd = jet_t_derivative(partner.denominator(), unknown, suffix)
                .map_err(|e| CatalogError::Parse(e.to_string()))?;
            let big = dn.alphabet().union(dd.alphabet());
            let lhs = RationalFunction::new(
                dn.embed(&big)?
                    .mul(&partner.denominator().embed(&big)?)?
                    .sub(&partner.numerator().embed(&big)?.mul(&dd.embed(&big)?)?)?,
                partner.denominator().embed(&big)?.pow(2)?,
            )?;
            let g = sys.component(time, solve_for).map_err(CatalogError::Dyn)?;
            let mut bind2 = HashMap::new();
            bind2.insert(
                solve_component.to_string(),
                RationalFunction::var(&big, unknown)?,
            );
            bind2.insert(solve_for.to_string(), partner.embed(&big)?);
            let rhs = g.substitute(&big, &bind2)?;
            let relation = lhs.sub(&rhs)?;
            let want = parse_poly(&big, expect)?;
            let got = relation.numerator().primitive_part_signed();
            let want_n = want.primitive_part_signed();
            if got == want_n || got == want_n.neg() {
                Ok(Verdict::Pass)
            } else {
                fail(format!("eliminated relation {got}"))
            }
        }
        CheckJson::Homogeneity {
            system,
            t_time,
            towers,
            params,
            ode_index,
            weights,
            expect_weight,
        } => {
            let odes = run_jet_reduce(cat, system, t_time, towers, params)?;
            let ode = &odes[*ode_index];
            let wmap: HashMap<String, i64> = weights.iter().cloned().collect();
            // The stored relation is cleared; homogeneity of the cleared
            // form at (expected + factor weight) certifies the uncleared
            // degree claim.
            let rep = homogeneity_check(&ode.relation, &wmap);
            if !rep.homogeneous {
                return fail(format!("monomial weights {:?}", rep.weights));
            }
            let factor_weight = ode
                .cleared_factor
                .as_ref()
                .map(|f| homogeneity_check(f, &wmap))
                .and_then(|r| r.common_weight)
                .unwrap_or(0);
            let effective = rep.common_weight.unwrap_or(0) - factor_weight;
            notes.push(format!(
                "cleared weight {}, denominator weight {factor_weight}, degree {effective}",
                rep.common_weight.unwrap_or(0)
            ));
            if effective == *expect_weight {
                Ok(Verdict::Pass)
            } else {
                fail(format!("degree {effective}, expected {expect_weight}"))
            }
        }
        CheckJson::SpecializeMatches {
            symbols,
            relation,
            subs,
            expect,
        } => {
            let alph = Alphabet::new(symbols)?;
            let rel = parse_expr(&alph, relation)?;
            let sub_list = parse_subs(&alph, subs)?;
            let specialized = reduce_with(&sub_list, &alph, &rel).map_err(CatalogError::Dyn)?;
            let want = parse_expr(&alph, expect)?;
            if specialized.equals_by_name(&want)? {
                Ok(Verdict::Pass)
            } else {
                fail(format!("specialized to {specialized}"))
            }
        }
        CheckJson::NumericDrift {
            system,
            time,
            init,
            params,
            span,
            tol,
            quantities,
            max_rel,
            convergence_check,
        } => {
            let sys = cat.system(system)?;
            let init_f: Vec<f64> = init
                .iter()
                .map(|s| parse_rat(s).map(|r| rat_to_f64(&r)))
                .collect::<Result<_, _>>()?;
            let mut pmap = HashMap::new();
            for (p, v) in params {
                pmap.insert(p.clone(), parse_rat(v)?);
            }
            let run = |tol: f64| -> Result<Vec<(String, f64)>, CatalogError> {
                let traj = integrate_flow(sys, system, time, &init_f, &pmap, *span, tol)
                    .map_err(|e| CatalogError::Parse(e.to_string()))?;
                let mut outs = Vec::new();
                for q in quantities {
                    let (name, expr) = resolve_quantity(cat, sys.alphabet(), q)?;
                    let ce = CompiledExpr::new(sys, time, &expr.embed(sys.alphabet())?, &pmap)
                        .map_err(|e| CatalogError::Parse(e.to_string()))?;
                    let rep = drift_report(&traj, &name, &ce);
                    outs.push((name, rep.max_rel_dev));
                }
                Ok(outs)
            };
            let at_tol = run(*tol)?;
            for (name, drift) in &at_tol {
                notes.push(format!("relative drift of {name}: {drift:.3e}"));
                if *drift > *max_rel {
                    return fail(format!("{name} drift {drift:.3e} > {max_rel:.1e}"));
                }
            }
            if *convergence_check {
                let at_half = run(*tol / 2.0)?;
                for ((name, d1), (_, d2)) in at_tol.iter().zip(at_half.iter()) {
                    // Halving tol never increases drift by more than 2x
                    // (plus floating-point floor).
                    if *d2 > 2.0 * d1 + 1e-14 {
                        return fail(format!(
                            "{name}: drift grew from {d1:.3e} to {d2:.3e} at half tol"
                        ));
                    }
                }
                notes.push("halving tol does not double the drift".into());
            }
            Ok(Verdict::Pass)
        }
        CheckJson::NumericPathIndependence {
            system,
            init,
            params,
            t_len,
            s_len,
            tol,
            max_disc,
        } => {
            let sys = cat.system(system)?;
            let init_f: Vec<f64> = init
                .iter()
                .map(|s| parse_rat(s).map(|r| rat_to_f64(&r)))
                .collect::<Result<_, _>>()?;
            let mut pmap = HashMap::new();
            for (p, v) in params {
                pmap.insert(p.clone(), parse_rat(v)?);
            }
            let disc = path_independence(sys, &init_f, &pmap, *t_len, *s_len, *tol)
                .map_err(|e| CatalogError::Parse(e.to_string()))?;
            notes.push(format!("endpoint discrepancy {disc:.3e}"));
            if disc <= *max_disc {
                Ok(Verdict::Pass)
            } else {
                fail(format!("discrepancy {disc:.3e} > {max_disc:.1e}"))
            }
        }
        CheckJson::NumericFollowsSolution {
            solution,
            time,
            span,
            tol,
            factor,
            fixed_times,
        } => {
            let entry = cat.entry(solution)?;
            let PayloadJson::Solution(sol) = &entry.payload else {
                return Err(CatalogError::WrongKind(solution.to_string(), "solution"));
            };
            let sys = cat.system(&sol.system)?;
            let alph = sys.alphabet();
            let mut pmap = HashMap::new();
            for (p, v) in &sol.params {
                pmap.insert(p.clone(), parse_rat(v).unwrap_or_else(|_| {
                    // Parameter values in solutions are exact rationals.
                    panic!("solution parameter `{p}` must be rational")
                }));
            }
            // Evaluate the formula at a given time value.
            let eval_formula = |tval: f64| -> Result<Vec<f64>, CatalogError> {
                let mut values = vec![0.0; alph.len()];
                values[alph.require(time)?] = tval;
                for (sym, v) in fixed_times {
                    values[alph.require(sym)?] = *v;
                }
                for (p, v) in &pmap {
                    values[alph.require(p)?] = rat_to_f64(v);
                }
                let mut out = Vec::new();
                for v in sys.variables() {
                    let e = parse_expr(alph, &sol.values[v])?;
                    let mut vals = values.clone();
                    // Parameter symbols inside the formula (C1, C2) that
                    // are not set default to zero.
                    for (p, val) in &pmap {
                        vals[alph.require(p)?] = rat_to_f64(val);
                    }
                    out.push(e.eval_f64(&vals));
                }
                Ok(out)
            };
            let y0 = eval_formula(span.0)?;
            let mut fixed_params = pmap.clone();
            for (sym, v) in fixed_times {
                // Freeze the other time symbol as a constant parameter.
                fixed_params.insert(
                    sym.clone(),
                    crate::exactalg::Rat::new(
                        ((v * 1e9).round() as i64).into(),
                        1_000_000_000.into(),
                    ),
                );
            }
            let traj = integrate_flow(sys, &sol.system, time, &y0, &fixed_params, *span, *tol)
                .map_err(|e| CatalogError::Parse(e.to_string()))?;
            let want = eval_formula(span.1)?;
            let got = traj.last_state();
            let dev = got
                .iter()
                .zip(want.iter())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            notes.push(format!("max deviation from formula {dev:.3e}"));
            if dev <= factor * tol {
                Ok(Verdict::Pass)
            } else {
                fail(format!("deviation {dev:.3e} > {} * tol", factor))
            }
        }
        CheckJson::NumericTanhKink {
            grid,
            half_width,
            bound,
        } => {
            // q1 = -(1/sqrt2) tanh((t+s+c)/sqrt2), p1 = 0, alpha = 0:
            // both flows of the two-variable system, analytic derivatives.
            let n = *grid;
            let c = 0.0;
            let mut max_res = 0.0f64;
            let s2 = f64::sqrt(2.0);
            for i in 0..=n {
                for j in 0..=n {
                    let t = -half_width + 2.0 * half_width * i as f64 / n as f64;
                    let s = -half_width + 2.0 * half_width * j as f64 / n as f64;
                    let xi = (t + s + c) / s2;
                    let th = f64::tanh(xi);
                    let q1 = -th / s2;
                    let p1 = 0.0;
                    let sech2 = 1.0 - th * th;
                    // dq1/dt = dq1/ds = -(sech^2)/2
                    let dq1 = -sech2 / 2.0;
                    let rhs_q = q1 * q1 + p1 - 0.5;
                    let rhs_p = -2.0 * q1 * p1;
                    max_res = max_res.max((dq1 - rhs_q).abs()).max(rhs_p.abs());
                }
            }
            notes.push(format!("max residual {max_res:.3e} on {n}+1 square grid"));
            if max_res <= *bound {
                Ok(Verdict::Pass)
            } else {
                fail(format!("max residual {max_res:.3e} > {bound:.1e}"))
            }
        }
        CheckJson::NumericMkdvProfile {
            tol,
            step,
            half_span,
            bound,
        } => {
            // u(t,s) = phi(t+s+c) with phi'' = 2 phi^3 - phi solves the
            // mKdV form u_ttt = 6 u^2 u_t - u_s; since everything rides
            // on xi = t+s+c, the residual reduces to the profile line:
            // phi''' - 6 phi^2 phi' + phi' evaluated by fourth-order
            // finite differences on the dense solve.
            let (xi, phi) = solve_profile_ode(0.5, 0.0, *half_span, *step, *tol)
                .map_err(|e| CatalogError::Parse(e.to_string()))?;
            let h = *step;
            let mut max_res = 0.0f64;
            for i in 3..xi.len() - 3 {
                let d1 = fd_first(&phi, i, h);
                let d3 = fd_third(&phi, i, h);
                let res = d3 - 6.0 * phi[i] * phi[i] * d1 + d1;
                max_res = max_res.max(res.abs());
            }
            notes.push(format!(
                "max stationary-mKdV residual {max_res:.3e} over {} samples",
                xi.len()
            ));
            if max_res <= *bound {
                Ok(Verdict::Pass)
            } else {
                fail(format!("max residual {max_res:.3e} > {bound:.1e}"))
            }
        }
        CheckJson::CoverageAudit { eq_lo, eq_hi } => {
            let mut covered = vec![false; (*eq_hi + 1) as usize];
            for e in &cat.entries {
                for &q in &e.anchor.eqs {
                    if q <= *eq_hi {
                        covered[q as usize] = true;
                    }
                }
            }
            for c in &cat.claims {
                for &q in &c.anchor.eqs {
                    if q <= *eq_hi {
                        covered[q as usize] = true;
                    }
                }
            }
            let missing: Vec<String> = (*eq_lo..=*eq_hi)
                .filter(|&q| !covered[q as usize])
                .map(|q| q.to_string())
                .collect();
            if missing.is_empty() {
                notes.push(format!("equations {eq_lo}..{eq_hi} all covered"));
                Ok(Verdict::Pass)
            } else {
                fail(format!("uncovered equations: {}", missing.join(", ")))
            }
        }
        CheckJson::EntryCountAtLeast { min } => {
            let n = cat.len_entries();
            notes.push(format!("{n} catalog entries"));
            if n >= *min {
                Ok(Verdict::Pass)
            } else {
                fail(format!("{n} entries < required {min}"))
            }
        }
    }
}

fn run_jet_reduce(
    cat: &Catalog,
    system: &str,
    t_time: &str,
    towers: &[(String, Vec<String>)],
    params: &[String],
) -> Result<Vec<ScalarODE>, CatalogError> {
    let sys = cat.system(system)?;
    let tws: Vec<Tower> = towers
        .iter()
        .map(|(u, chain)| Tower {
            unknown: u.clone(),
            chain: chain.clone(),
        })
        .collect();
    jet_reduce(sys, &tws, t_time, params).map_err(|e| CatalogError::Parse(e.to_string()))
}
