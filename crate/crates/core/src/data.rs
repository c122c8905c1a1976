//! User-supplied cohomology, quantum and tangent data in a single JSON document.
//!
//! Degrees are real cohomological degrees. Rational entries are JSON integers or
//! strings such as `"-3/2"`. `cup` and `quantum` list products sparsely; an entry
//! given for `(i, j)` only is mirrored to `(j, i)`. Pairs absent from `quantum`
//! fall back to the cup product. `quantum` entries hold, for each basis element,
//! the coefficient list of a polynomial in `q`.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::charclasses::TangentData;
use crate::cohomology::{GradedFrobeniusAlgebra, ValidationReport};
use crate::error::{Error, Result};
use crate::exact::{self, Rat};
use crate::quantum::{QTerm, QuantumAlgebra};
use crate::space::Space;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RatValue {
    Int(i64),
    Text(String),
}

impl RatValue {
    fn parse(&self, field: &str) -> Result<Rat> {
        match self {
            Self::Int(k) => Ok(exact::rint(*k)),
            Self::Text(s) => s.trim().parse::<Rat>().map_err(|_| Error::Data(format!("{field}: `{s}` is not a rational number"))),
        }
    }

    fn from_rat(r: &Rat) -> Self {
        match exact::to_integer(r) {
            Some(k) => Self::Int(k),
            None => Self::Text(r.to_string()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisEntry {
    pub label: String,
    pub degree: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HypersurfaceSpec {
    /// Ambient `P^n`.
    pub n: u32,
    pub d: u32,
}

/// `(i, j, coefficients of e_i ⋆ e_j)`, one polynomial in `q` per basis element.
pub type QuantumEntry = (usize, usize, Vec<Vec<RatValue>>);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UserDataFile {
    pub name: String,
    pub dim_complex: u32,
    pub basis: Vec<BasisEntry>,
    pub unit: usize,
    pub top: usize,
    pub cup: Vec<(usize, usize, Vec<RatValue>)>,
    pub pairing: Vec<(usize, usize, RatValue)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quantum: Option<Vec<QuantumEntry>>,
    /// `q = t^{q_weight}` along `τ = c₁ log t`; inferred from the grading when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q_weight: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c1: Option<Vec<RatValue>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ch_tangent: Option<Vec<(u32, Vec<RatValue>)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hypersurface: Option<HypersurfaceSpec>,
}

#[derive(Clone, Debug)]
pub struct UserData {
    pub algebra: Arc<GradedFrobeniusAlgebra>,
    pub quantum: Option<QuantumAlgebra>,
    pub tangent: Option<TangentData>,
    pub hypersurface: Option<HypersurfaceSpec>,
}

impl UserData {
    /// Axiom reports for every structure present.
    pub fn validate(&self) -> Vec<ValidationReport> {
        let mut out = vec![self.algebra.validate()];
        if let Some(q) = &self.quantum {
            out.push(q.validate());
        }
        out
    }
}

fn vector(field: &str, v: &[RatValue], n: usize) -> Result<Vec<Rat>> {
    if v.len() != n {
        return Err(Error::Data(format!("{field}: expected {n} coefficients, got {}", v.len())));
    }
    v.iter().enumerate().map(|(k, x)| x.parse(&format!("{field}[{k}]"))).collect()
}

fn index(field: &str, i: usize, n: usize) -> Result<usize> {
    if i >= n {
        return Err(Error::Data(format!("{field}: basis index {i} is out of range 0..{n}")));
    }
    Ok(i)
}

/// Fill a sparse pair table, mirroring entries given for one order only.
fn mirrored<T: Clone>(entries: Vec<((usize, usize), T)>, field: &str) -> Result<BTreeMap<(usize, usize), T>> {
    let mut out = BTreeMap::new();
    for (key, v) in &entries {
        if out.insert(*key, v.clone()).is_some() {
            return Err(Error::Data(format!("{field}: pair ({}, {}) is listed twice", key.0, key.1)));
        }
    }
    for (key, v) in entries {
        out.entry((key.1, key.0)).or_insert(v);
    }
    Ok(out)
}

impl UserDataFile {
    pub fn build(&self) -> Result<UserData> {
        let n = self.basis.len();
        if n == 0 {
            return Err(Error::Data("basis: at least one element is required".into()));
        }
        let labels: Vec<String> = self.basis.iter().map(|b| b.label.clone()).collect();
        let degrees: Vec<u32> = self.basis.iter().map(|b| b.degree).collect();
        index("unit", self.unit, n)?;
        index("top", self.top, n)?;

        let mut cup_entries = Vec::new();
        for (r, (i, j, v)) in self.cup.iter().enumerate() {
            let f = format!("cup[{r}]");
            cup_entries.push(((index(&f, *i, n)?, index(&f, *j, n)?), vector(&f, v, n)?));
        }
        let cup_map = mirrored(cup_entries, "cup")?;
        let mut cup = vec![vec![vec![Rat::zero(); n]; n]; n];
        for ((i, j), v) in &cup_map {
            cup[*i][*j] = v.clone();
        }

        let mut pair_entries = Vec::new();
        for (r, (i, j, v)) in self.pairing.iter().enumerate() {
            let f = format!("pairing[{r}]");
            pair_entries.push(((index(&f, *i, n)?, index(&f, *j, n)?), v.parse(&f)?));
        }
        let mut pairing = exact::zeros(n, n);
        for ((i, j), v) in mirrored(pair_entries, "pairing")? {
            pairing[i][j] = v;
        }
        let algebra = Arc::new(GradedFrobeniusAlgebra::from_parts(
            self.name.clone(),
            labels,
            degrees.clone(),
            self.dim_complex,
            self.unit,
            self.top,
            cup.clone(),
            pairing,
        )?);

        let c1 = self.c1.as_ref().map(|v| vector("c1", v, n)).transpose()?;

        let tangent = match &self.ch_tangent {
            None => None,
            Some(parts) => {
                let mut ch = vec![vec![Rat::zero(); n]; self.dim_complex as usize + 1];
                for (r, (k, v)) in parts.iter().enumerate() {
                    let f = format!("ch_tangent[{r}]");
                    let slot = ch.get_mut(*k as usize).ok_or_else(|| Error::Data(format!("{f}: degree {k} exceeds dim_complex")))?;
                    *slot = vector(&f, v, n)?;
                }
                let td = TangentData::new(Arc::clone(&algebra), ch)?;
                if let Some(c) = &c1 {
                    if *c != td.c1 {
                        return Err(Error::Data("c1 disagrees with the degree-2 part of ch_tangent".into()));
                    }
                }
                Some(td)
            }
        };

        let quantum = match &self.quantum {
            None => None,
            Some(entries) => {
                let c1 = c1
                    .clone()
                    .or_else(|| tangent.as_ref().map(|t| t.c1.clone()))
                    .ok_or_else(|| Error::Data("quantum: c1 or ch_tangent is required".into()))?;
                let mut rows = Vec::new();
                for (r, (i, j, polys)) in entries.iter().enumerate() {
                    let f = format!("quantum[{r}]");
                    if polys.len() != n {
                        return Err(Error::Data(format!("{f}: expected {n} polynomials, got {}", polys.len())));
                    }
                    let parsed: Vec<Vec<Rat>> = polys
                        .iter()
                        .enumerate()
                        .map(|(k, p)| p.iter().enumerate().map(|(d, x)| x.parse(&format!("{f}[{k}][{d}]"))).collect())
                        .collect::<Result<_>>()?;
                    rows.push(((index(&f, *i, n)?, index(&f, *j, n)?), parsed));
                }
                let table = mirrored(rows, "quantum")?;
                let weight = match self.q_weight {
                    Some(w) => w,
                    None => infer_weight(&table, &degrees)?,
                };
                let mut terms = Vec::new();
                for i in 0..n {
                    for j in 0..n {
                        match table.get(&(i, j)) {
                            Some(polys) => {
                                for (k, p) in polys.iter().enumerate() {
                                    for (d, c) in p.iter().enumerate() {
                                        if !c.is_zero() {
                                            terms.push(QTerm { i, j, k, exps: vec![d as u32], coeff: c.clone() });
                                        }
                                    }
                                }
                            }
                            None => {
                                for k in 0..n {
                                    let c = &cup[i][j][k];
                                    if !c.is_zero() {
                                        terms.push(QTerm { i, j, k, exps: vec![0], coeff: c.clone() });
                                    }
                                }
                            }
                        }
                    }
                }
                Some(QuantumAlgebra::from_terms(Arc::clone(&algebra), c1, vec![weight], terms)?)
            }
        };
        if let Some(h) = &self.hypersurface {
            if h.d == 0 || h.d > h.n || h.n != self.dim_complex + 1 {
                return Err(Error::Data(format!(
                    "hypersurface: degree {} in P^{} does not cut out a Fano of dimension {}",
                    h.d, h.n, self.dim_complex
                )));
            }
        }
        Ok(UserData { algebra, quantum, tangent, hypersurface: self.hypersurface.clone() })
    }
}

/// `deg q / 2` from the first genuinely quantum term.
fn infer_weight(table: &BTreeMap<(usize, usize), Vec<Vec<Rat>>>, degrees: &[u32]) -> Result<u32> {
    for ((i, j), polys) in table {
        for (k, p) in polys.iter().enumerate() {
            for (d, c) in p.iter().enumerate().skip(1) {
                if c.is_zero() {
                    continue;
                }
                let excess = i64::from(degrees[*i]) + i64::from(degrees[*j]) - i64::from(degrees[k]);
                let per = 2 * d as i64;
                if excess <= 0 || excess % per != 0 {
                    return Err(Error::Data(format!("quantum: the q^{d} term of ({i}, {j}) along {k} has no consistent degree")));
                }
                return Ok((excess / per) as u32);
            }
        }
    }
    Ok(1)
}

pub fn parse_user_data(text: &str) -> Result<UserDataFile> {
    serde_json::from_str(text).map_err(|e| Error::Data(format!("parse error at line {}, column {}: {e}", e.line(), e.column())))
}

/// Parse and build without enforcing the axioms.
pub fn read_user_data(path: &Path) -> Result<UserData> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Data(format!("{}: {e}", path.display())))?;
    parse_user_data(&text)?.build()
}

/// Parse, build and validate; any axiom failure is an error naming its witness.
pub fn load_user_data(path: &Path) -> Result<UserData> {
    let data = read_user_data(path)?;
    let failures: Vec<String> = data
        .validate()
        .iter()
        .flat_map(|r| r.failures().into_iter().map(move |c| format!("{}: {} fails at {}", r.algebra, c.axiom, c.witness.as_deref().unwrap_or("?"))))
        .collect();
    if !failures.is_empty() {
        return Err(Error::Data(failures.join("; ")));
    }
    Ok(data)
}

/// A built-in single-factor space in the user schema.
pub fn export_space(space: &Space) -> Result<UserDataFile> {
    let q = &space.quantum;
    if q.nvars() != 1 {
        return Err(Error::Unsupported(format!("{} has {} Novikov variables; the schema carries one", space.name, q.nvars())));
    }
    let alg = space.algebra();
    let n = alg.dim();
    let mut cup = Vec::new();
    for i in 0..n {
        for j in i..n {
            let v: Vec<Rat> = (0..n).map(|k| alg.structure_constant(i, j, k).clone()).collect();
            if v.iter().any(|c| !c.is_zero()) {
                cup.push((i, j, v.iter().map(RatValue::from_rat).collect()));
            }
        }
    }
    let p = alg.pairing_exact();
    let pairing = (0..n)
        .flat_map(|i| (i..n).map(move |j| (i, j)))
        .filter(|&(i, j)| !p[i][j].is_zero())
        .map(|(i, j)| (i, j, RatValue::from_rat(&p[i][j])))
        .collect();
    let mut table: BTreeMap<(usize, usize), Vec<Vec<Rat>>> = BTreeMap::new();
    for t in q.terms() {
        if t.exps[0] == 0 || t.i > t.j {
            continue;
        }
        table.entry((t.i, t.j)).or_insert_with(|| vec![Vec::new(); n]);
    }
    for t in q.terms() {
        if let Some(polys) = table.get_mut(&(t.i, t.j)) {
            let p = &mut polys[t.k];
            let d = t.exps[0] as usize;
            if p.len() <= d {
                p.resize(d + 1, Rat::zero());
            }
            p[d] += &t.coeff;
        }
    }
    let quantum =
        table.into_iter().map(|((i, j), polys)| (i, j, polys.iter().map(|p| p.iter().map(RatValue::from_rat).collect()).collect())).collect();
    let ch_tangent = space.tangent.ch.iter().enumerate().map(|(k, c)| (k as u32, c.iter().map(RatValue::from_rat).collect())).collect();
    Ok(UserDataFile {
        name: space.name.clone(),
        dim_complex: alg.dim_complex,
        basis: alg.labels.iter().zip(&alg.degrees).map(|(l, &d)| BasisEntry { label: l.clone(), degree: d }).collect(),
        unit: alg.unit,
        top: alg.top,
        cup,
        pairing,
        quantum: Some(quantum),
        q_weight: Some(q.weights[0]),
        c1: Some(q.c1.iter().map(RatValue::from_rat).collect()),
        ch_tangent: Some(ch_tangent),
        hypersurface: None,
    })
}

/// Structure constants and quantum terms of two algebras agree exactly.
pub fn same_structure(a: &QuantumAlgebra, b: &QuantumAlgebra) -> bool {
    let key = |q: &QuantumAlgebra| {
        let mut m: BTreeMap<(usize, usize, usize, Vec<u32>), Rat> = BTreeMap::new();
        for t in q.terms() {
            *m.entry((t.i, t.j, t.k, t.exps.clone())).or_insert_with(Rat::zero) += &t.coeff;
        }
        m.retain(|_, c| !c.is_zero());
        m
    };
    *a.base == *b.base && a.c1 == b.c1 && a.weights == b.weights && key(a) == key(b)
}
