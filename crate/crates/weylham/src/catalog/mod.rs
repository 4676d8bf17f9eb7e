//! The data-driven registry of every concrete object checked by this
//! crate: systems, Hamiltonians, maps, charts, generators, pencils,
//! first integrals, special solutions, and the claim suite binding them
//! to executable checks.
//!
//! The catalog ships as a JSON file embedded in the crate so every
//! formula is diffable; `load_catalog` parses, cross-validates (typed
//! invariants, registered inverses by composition, pencil sign
//! normalization), and indexes the entries.

pub mod claims;
pub mod report;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::dynsys::{DynError, HamiltonianSpec, TotalSystem};
use crate::exactalg::parse::{parse_expr, parse_poly};
use crate::exactalg::{parse_rat, Alphabet, ExactError, Polynomial, Rat, RationalFunction};
use crate::lax::MatrixPencil;
use crate::maps::{BirationalMap, MapError, TimePair};

/// The default catalog bundled with the crate.
pub const DEFAULT_CATALOG: &str = include_str!("data.json");

#[derive(Debug, thiserror::Error)]
pub enum CatalogError {
    #[error("catalog parse error: {0}")]
    Parse(String),
    #[error("duplicate entry id `{0}`")]
    DuplicateId(String),
    #[error("unknown family `{0}`")]
    UnknownFamily(String),
    #[error("unknown entry `{0}`")]
    UnknownEntry(String),
    #[error("entry `{0}` has unexpected kind (wanted {1})")]
    WrongKind(String, &'static str),
    #[error("entry `{id}` failed validation: {reason}")]
    Invalid { id: String, reason: String },
    #[error(transparent)]
    Exact(#[from] ExactError),
    #[error(transparent)]
    Dyn(#[from] DynError),
    #[error(transparent)]
    Map(#[from] MapError),
}

// ---------------------------------------------------------------------
// JSON schema
// ---------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CatalogJson {
    pub families: HashMap<String, FamilyJson>,
    pub entries: Vec<EntryJson>,
    pub claims: Vec<claims::ClaimJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FamilyJson {
    pub symbols: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnchorJson {
    /// Human-readable paper reference, e.g. "Theorem 1.2".
    pub anchor: String,
    /// Short verbatim quote locating the source text.
    #[serde(default)]
    pub quote: String,
    /// Equation numbers this entry/claim touches (coverage audit).
    #[serde(default)]
    pub eqs: Vec<u32>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EntryJson {
    pub id: String,
    #[serde(flatten)]
    pub anchor: AnchorJson,
    #[serde(flatten)]
    pub payload: PayloadJson,
    /// Components computed by this crate's own pushforward oracle (the
    /// paper leaves them unprinted); format "var:time".
    #[serde(default)]
    pub derived: Vec<String>,
    #[serde(default)]
    pub note: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PayloadJson {
    System(SystemJson),
    Hamiltonian(HamiltonianJson),
    Map(MapJson),
    Pencil(PencilJson),
    Integral(IntegralJson),
    Solution(SolutionJson),
    ScalarOde(ScalarOdeJson),
    Expr(ExprJson),
}

/// TotalSystem JSON: flows keyed by time then variable; constraints in
/// eliminated form `[param, replacement]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SystemJson {
    pub family: String,
    pub variables: Vec<String>,
    pub times: Vec<String>,
    pub flows: HashMap<String, HashMap<String, String>>,
    #[serde(default)]
    pub constraints: Vec<(String, String)>,
    /// Alternatively generate the flows from a Hamiltonian entry.
    #[serde(default)]
    pub from_hamiltonian: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HamiltonianJson {
    pub family: String,
    pub pairs: Vec<(String, String)>,
    pub hams: HashMap<String, String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MapJson {
    pub family_src: String,
    #[serde(default)]
    pub family_dst: Option<String>,
    pub vars_in: Vec<String>,
    pub vars_out: Vec<String>,
    pub components: HashMap<String, String>,
    #[serde(default)]
    pub param_map: HashMap<String, String>,
    /// [src_time, dst_time, dsrc_ddst]; identity pairs may be listed as
    /// plain time names under `times`.
    #[serde(default)]
    pub time_pairs: Vec<(String, String, String)>,
    #[serde(default)]
    pub times: Vec<String>,
    #[serde(default)]
    pub inverse: Option<InverseJson>,
    /// First-integral substitutions under which inverse∘map = id on the
    /// source side (projections inverted via integrals).
    #[serde(default)]
    pub inverse_mod: Vec<(String, String)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InverseJson {
    pub components: HashMap<String, String>,
    #[serde(default)]
    pub param_map: HashMap<String, String>,
}

/// Pencil JSON: 2x2 grid of expression strings; `negate` records that
/// the grid is printed as `-A` and must be negated on load.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PencilJson {
    pub family: String,
    pub t_symbol: String,
    pub entries: [[String; 2]; 2],
    #[serde(default)]
    pub negate: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IntegralJson {
    pub family: String,
    pub expr: String,
    #[serde(default)]
    pub constant: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolutionJson {
    pub system: String,
    pub values: HashMap<String, String>,
    #[serde(default)]
    pub params: HashMap<String, String>,
    /// Algebraic reductions [symbol, power, value] for irrational
    /// constants, e.g. ["r2", 2, "1/2"] for r2 = 1/sqrt(2).
    #[serde(default)]
    pub algebraic: Vec<(String, u16, String)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScalarOdeJson {
    pub unknown: String,
    pub independents: Vec<String>,
    pub symbols: Vec<String>,
    pub relation: String,
    #[serde(default)]
    pub cleared_factor: Option<String>,
}

/// A bare named expression over a family (surfaces, invariants, ...).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExprJson {
    pub family: String,
    pub expr: String,
}

// ---------------------------------------------------------------------
// Loaded catalog
// ---------------------------------------------------------------------

pub struct Catalog {
    pub families: HashMap<String, Alphabet>,
    pub entries: Vec<EntryJson>,
    index: HashMap<String, usize>,
    pub claims: Vec<claims::ClaimJson>,
    systems: HashMap<String, TotalSystem>,
    hamiltonians: HashMap<String, HamiltonianSpec>,
    maps: HashMap<String, BirationalMap>,
    pencils: HashMap<String, (MatrixPencil, String)>,
    integrals: HashMap<String, (RationalFunction, Option<String>)>,
    exprs: HashMap<String, RationalFunction>,
}

impl Catalog {
    pub fn len_entries(&self) -> usize {
        self.entries.len()
    }

    pub fn entry(&self, id: &str) -> Result<&EntryJson, CatalogError> {
        self.index
            .get(id)
            .map(|&i| &self.entries[i])
            .ok_or_else(|| CatalogError::UnknownEntry(id.to_string()))
    }

    pub fn family(&self, name: &str) -> Result<&Alphabet, CatalogError> {
        self.families
            .get(name)
            .ok_or_else(|| CatalogError::UnknownFamily(name.to_string()))
    }

    pub fn system(&self, id: &str) -> Result<&TotalSystem, CatalogError> {
        self.systems
            .get(id)
            .ok_or_else(|| CatalogError::WrongKind(id.to_string(), "system"))
    }

    pub fn hamiltonian(&self, id: &str) -> Result<&HamiltonianSpec, CatalogError> {
        self.hamiltonians
            .get(id)
            .ok_or_else(|| CatalogError::WrongKind(id.to_string(), "hamiltonian"))
    }

    pub fn map(&self, id: &str) -> Result<&BirationalMap, CatalogError> {
        self.maps
            .get(id)
            .ok_or_else(|| CatalogError::WrongKind(id.to_string(), "map"))
    }

    pub fn pencil(&self, id: &str) -> Result<&(MatrixPencil, String), CatalogError> {
        self.pencils
            .get(id)
            .ok_or_else(|| CatalogError::WrongKind(id.to_string(), "pencil"))
    }

    pub fn integral(
        &self,
        id: &str,
    ) -> Result<&(RationalFunction, Option<String>), CatalogError> {
        self.integrals
            .get(id)
            .ok_or_else(|| CatalogError::WrongKind(id.to_string(), "integral"))
    }

    pub fn expr(&self, id: &str) -> Result<&RationalFunction, CatalogError> {
        self.exprs
            .get(id)
            .ok_or_else(|| CatalogError::WrongKind(id.to_string(), "expr"))
    }

    /// Parses an expression over a family alphabet.
    pub fn parse_in(&self, family: &str, expr: &str) -> Result<RationalFunction, CatalogError> {
        Ok(parse_expr(self.family(family)?, expr)?)
    }
}

fn parse_constraints(
    alph: &Alphabet,
    pairs: &[(String, String)],
) -> Result<Vec<(String, RationalFunction)>, CatalogError> {
    pairs
        .iter()
        .map(|(p, e)| Ok((p.clone(), parse_expr(alph, e)?)))
        .collect()
}

/// Loads and validates a catalog from JSON text.
pub fn load_catalog(json: &str) -> Result<Catalog, CatalogError> {
    let raw: CatalogJson =
        serde_json::from_str(json).map_err(|e| CatalogError::Parse(e.to_string()))?;

    let mut families = HashMap::new();
    for (name, f) in &raw.families {
        families.insert(name.clone(), Alphabet::new(&f.symbols)?);
    }

    let mut index = HashMap::new();
    for (i, e) in raw.entries.iter().enumerate() {
        if index.insert(e.id.clone(), i).is_some() {
            return Err(CatalogError::DuplicateId(e.id.clone()));
        }
    }

    let mut cat = Catalog {
        families,
        index,
        entries: raw.entries,
        claims: raw.claims,
        systems: HashMap::new(),
        hamiltonians: HashMap::new(),
        maps: HashMap::new(),
        pencils: HashMap::new(),
        integrals: HashMap::new(),
        exprs: HashMap::new(),
    };

    // Pass 1: hamiltonians (systems may be generated from them).
    for e in cat.entries.clone() {
        if let PayloadJson::Hamiltonian(h) = &e.payload {
            let alph = cat.family(&h.family)?.clone();
            let mut hams = Vec::new();
            let mut keys: Vec<&String> = h.hams.keys().collect();
            keys.sort();
            for t in keys {
                hams.push((t.clone(), parse_poly(&alph, &h.hams[t])?));
            }
            let spec = HamiltonianSpec::new(alph, h.pairs.clone(), hams)
                .map_err(CatalogError::Dyn)?;
            cat.hamiltonians.insert(e.id.clone(), spec);
        }
    }

    // Pass 2: everything else.
    for e in cat.entries.clone() {
        match &e.payload {
            PayloadJson::Hamiltonian(_) => {}
            PayloadJson::System(s) => {
                let alph = cat.family(&s.family)?.clone();
                let constraints = parse_constraints(&alph, &s.constraints)?;
                let sys = if let Some(hid) = &s.from_hamiltonian {
                    let spec = cat.hamiltonian(hid)?.clone();
                    spec.to_total_system(constraints)
                        .map_err(CatalogError::Dyn)?
                } else {
                    let mut flows = Vec::new();
                    for t in &s.times {
                        let per_time = s.flows.get(t).ok_or_else(|| CatalogError::Invalid {
                            id: e.id.clone(),
                            reason: format!("missing flow for time `{t}`"),
                        })?;
                        let mut comps = Vec::new();
                        for v in &s.variables {
                            let expr =
                                per_time.get(v).ok_or_else(|| CatalogError::Invalid {
                                    id: e.id.clone(),
                                    reason: format!("missing component `{v}` for `{t}`"),
                                })?;
                            comps.push(parse_expr(&alph, expr)?);
                        }
                        flows.push(comps);
                    }
                    TotalSystem::new(alph, s.variables.clone(), s.times.clone(), flows, constraints)
                        .map_err(CatalogError::Dyn)?
                };
                cat.systems.insert(e.id.clone(), sys);
            }
            PayloadJson::Map(m) => {
                let map = build_map(&cat, &e.id, m)?;
                if map.inverse.is_some() {
                    let mod_subs = parse_constraints(&map.source_alph, &m.inverse_mod)?;
                    map.validate_inverse(&mod_subs).map_err(|err| {
                        CatalogError::Invalid {
                            id: e.id.clone(),
                            reason: format!("inverse validation failed: {err}"),
                        }
                    })?;
                }
                cat.maps.insert(e.id.clone(), map);
            }
            PayloadJson::Pencil(p) => {
                let alph = cat.family(&p.family)?.clone();
                let parse = |s: &String| parse_poly(&alph, s);
                let grid = MatrixPencil::new([
                    [parse(&p.entries[0][0])?, parse(&p.entries[0][1])?],
                    [parse(&p.entries[1][0])?, parse(&p.entries[1][1])?],
                ]);
                let pencil = if p.negate { grid.neg() } else { grid };
                cat.pencils.insert(e.id.clone(), (pencil, p.t_symbol.clone()));
            }
            PayloadJson::Integral(i) => {
                let alph = cat.family(&i.family)?.clone();
                let expr = parse_expr(&alph, &i.expr)?;
                if expr.as_constant().is_some() {
                    return Err(CatalogError::Invalid {
                        id: e.id.clone(),
                        reason: "integral expression is constant".into(),
                    });
                }
                cat.integrals
                    .insert(e.id.clone(), (expr, i.constant.clone()));
            }
            PayloadJson::Solution(_) => {
                // Validated when executed (needs the system).
            }
            PayloadJson::ScalarOde(_) => {}
            PayloadJson::Expr(x) => {
                let alph = cat.family(&x.family)?.clone();
                cat.exprs.insert(e.id.clone(), parse_expr(&alph, &x.expr)?);
            }
        }
    }
    Ok(cat)
}

fn build_map(cat: &Catalog, id: &str, m: &MapJson) -> Result<BirationalMap, CatalogError> {
    let src = cat.family(&m.family_src)?.clone();
    let dst = match &m.family_dst {
        Some(f) => cat.family(f)?.clone(),
        None => src.clone(),
    };
    // Expressions live over the union alphabet so maps can mention both
    // source and target parameters/times.
    let work = src.union(&dst);
    let mut components = Vec::new();
    for v in &m.vars_out {
        let expr = m.components.get(v).ok_or_else(|| CatalogError::Invalid {
            id: id.to_string(),
            reason: format!("missing component `{v}`"),
        })?;
        components.push(parse_expr(&work, expr)?);
    }
    let mut param_map = Vec::new();
    let mut pkeys: Vec<&String> = m.param_map.keys().collect();
    pkeys.sort();
    for p in pkeys {
        param_map.push((p.clone(), parse_expr(&work, &m.param_map[p])?));
    }
    let mut time_pairs: Vec<TimePair> = m
        .times
        .iter()
        .map(|t| TimePair::identity(t))
        .collect();
    for (s, d, scale) in &m.time_pairs {
        time_pairs.push(TimePair {
            src: s.clone(),
            dst: d.clone(),
            dsrc_ddst: parse_rat(scale)?,
        });
    }
    let inverse = match &m.inverse {
        None => None,
        Some(inv) => {
            let mut inv_components = Vec::new();
            for v in &m.vars_in {
                let expr = inv
                    .components
                    .get(v)
                    .ok_or_else(|| CatalogError::Invalid {
                        id: id.to_string(),
                        reason: format!("missing inverse component `{v}`"),
                    })?;
                inv_components.push(parse_expr(&work, expr)?);
            }
            let mut inv_params = Vec::new();
            let mut ikeys: Vec<&String> = inv.param_map.keys().collect();
            ikeys.sort();
            for p in ikeys {
                inv_params.push((p.clone(), parse_expr(&work, &inv.param_map[p])?));
            }
            Some(Box::new(BirationalMap {
                source_alph: work.clone(),
                target_alph: work.clone(),
                source_vars: m.vars_out.clone(),
                target_vars: m.vars_in.clone(),
                components: inv_components,
                param_map: inv_params,
                time_pairs: time_pairs
                    .iter()
                    .map(|tp| TimePair {
                        src: tp.dst.clone(),
                        dst: tp.src.clone(),
                        dsrc_ddst: Rat::from_integer(1.into()) / tp.dsrc_ddst.clone(),
                    })
                    .collect(),
                inverse: None,
            }))
        }
    };
    Ok(BirationalMap {
        source_alph: work.clone(),
        target_alph: work,
        source_vars: m.vars_in.clone(),
        target_vars: m.vars_out.clone(),
        components,
        param_map,
        time_pairs,
        inverse,
    })
}
