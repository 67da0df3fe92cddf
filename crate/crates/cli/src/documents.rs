//! JSON documents read and written by the CLI.
//!
//! Vertices are named in the poset document and referred to by name
//! everywhere else; names map to dense indices in declaration order.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use filie::algebra::{Algebra, FiElement};
use filie::maps::{AdditiveInduced, MapError, MapSpec, Primitive, TransitiveMap, Witness};
use filie::preorder::{Preorder, PreorderError};
use filie::ring::{AdditiveDerivation, IntPoly, RingDescriptor, RingValue};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::CliError;

/// A vertex name; bare JSON integers are accepted and read as names.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Name {
    Text(String),
    Number(u64),
}

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Name::Text(s) => f.write_str(s),
            Name::Number(k) => write!(f, "{k}"),
        }
    }
}

fn default_close() -> bool {
    true
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PosetDocument {
    pub vertices: Vec<Name>,
    #[serde(default)]
    pub leq: Vec<(Name, Name)>,
    #[serde(default = "default_close")]
    pub close: bool,
}

/// A parsed poset document.
#[derive(Debug, Clone)]
pub struct Poset {
    pub names: Vec<String>,
    pub preorder: Preorder,
    index: HashMap<String, usize>,
}

impl Poset {
    pub fn parse(text: &str, no_close: bool) -> Result<Self, CliError> {
        let doc: PosetDocument =
            serde_json::from_str(text).map_err(|e| CliError::Document(format!("poset: {e}")))?;
        let names: Vec<String> = doc.vertices.iter().map(Name::to_string).collect();
        let mut index = HashMap::new();
        for (k, name) in names.iter().enumerate() {
            if index.insert(name.clone(), k).is_some() {
                return Err(CliError::Document(format!(
                    "poset: vertex name {name:?} is declared twice"
                )));
            }
        }
        let lookup = |n: &Name| {
            index.get(&n.to_string()).copied().ok_or_else(|| {
                CliError::Document(format!("poset: leq refers to unknown vertex {:?}", n.to_string()))
            })
        };
        let pairs = doc
            .leq
            .iter()
            .map(|(a, b)| Ok((lookup(a)?, lookup(b)?)))
            .collect::<Result<Vec<_>, CliError>>()?;
        let preorder = if doc.close && !no_close {
            Preorder::from_generators(names.len(), pairs)
        } else {
            Preorder::from_relation(names.len(), pairs)
        }
        .map_err(|e| CliError::Document(format!("poset: {}", describe(&e, &names))))?;
        Ok(Poset {
            names,
            preorder,
            index,
        })
    }

    pub fn vertex(&self, name: &Name) -> Result<usize, CliError> {
        self.index
            .get(&name.to_string())
            .copied()
            .ok_or_else(|| CliError::Document(format!("unknown vertex {:?}", name.to_string())))
    }

    pub fn name(&self, x: usize) -> &str {
        &self.names[x]
    }

    pub fn edge(&self, (x, y): (usize, usize)) -> String {
        format!("({},{})", self.names[x], self.names[y])
    }

    pub fn set(&self, vertices: impl IntoIterator<Item = usize>) -> String {
        let names: Vec<&str> = vertices.into_iter().map(|x| self.name(x)).collect();
        format!("{{{}}}", names.join(", "))
    }
}

fn describe(e: &PreorderError, names: &[String]) -> String {
    match *e {
        PreorderError::NotReflexive(x) => {
            format!("relation is not reflexive at {} (use close: true)", names[x])
        }
        PreorderError::NotTransitive(x, y, z) => format!(
            "relation is not transitive: {0} <= {1} <= {2} but not {0} <= {2} (use close: true)",
            names[x], names[y], names[z]
        ),
        _ => e.to_string(),
    }
}

pub type DerivationPayload = (String, Value);

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TermDocument {
    Inner {
        alpha: Vec<(Name, Name, Value)>,
    },
    Transitive {
        f: Vec<(Name, Name, Value)>,
    },
    AdditiveInduced {
        assign: Vec<((Name, Name), DerivationPayload)>,
    },
    CentralTrace {
        h: Vec<(usize, Vec<Value>)>,
    },
    Witness {
        class_edge: (Name, Name),
        t: Name,
        f: DerivationPayload,
    },
    ProperPart {
        assign: Vec<(usize, DerivationPayload)>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DerivationDocument {
    pub ring: String,
    pub n: u64,
    pub terms: Vec<TermDocument>,
}

/// A parsed derivation document.
#[derive(Debug, Clone)]
pub struct Derivation {
    pub ring: RingDescriptor,
    pub n: u64,
    pub spec: MapSpec,
}

fn field_error(term: usize, kind: &str, e: impl fmt::Display) -> CliError {
    CliError::Document(format!("derivation: terms[{term}] ({kind}): {e}"))
}

fn parse_derivation_payload(
    ring: RingDescriptor,
    (kind, payload): &DerivationPayload,
) -> Result<AdditiveDerivation, String> {
    let d = match kind.as_str() {
        "zero" => AdditiveDerivation::Zero,
        "poly_ddt" => {
            let RingValue::Poly(p) = RingValue::from_json(RingDescriptor::IntPoly, payload)
                .map_err(|e| e.to_string())?
            else {
                return Err("poly_ddt payload must be a coefficient array".into());
            };
            AdditiveDerivation::poly_times_ddt(p)
        }
        other => return Err(format!("unknown derivation kind {other:?}")),
    };
    d.check_ring(ring).map_err(|e| e.to_string())?;
    Ok(d)
}

pub fn derivation_payload(d: &AdditiveDerivation) -> DerivationPayload {
    match d {
        AdditiveDerivation::Zero => ("zero".into(), Value::Null),
        AdditiveDerivation::PolyTimesDdt(p) => ("poly_ddt".into(), RingValue::poly(p.clone()).to_json()),
    }
}

fn integer_array(values: &[Value]) -> Result<IntPoly, String> {
    match RingValue::from_json(RingDescriptor::IntPoly, &Value::Array(values.to_vec())) {
        Ok(RingValue::Poly(p)) => Ok(p),
        Ok(_) => unreachable!("IntPoly values are polynomials"),
        Err(e) => Err(e.to_string()),
    }
}

impl Derivation {
    pub fn parse(
        text: &str,
        poset: &Poset,
        ring_override: Option<RingDescriptor>,
    ) -> Result<(Self, Arc<Algebra>), CliError> {
        let doc: DerivationDocument = serde_json::from_str(text)
            .map_err(|e| CliError::Document(format!("derivation: {e}")))?;
        let ring: RingDescriptor = doc
            .ring
            .parse()
            .map_err(|e| CliError::Document(format!("derivation: ring: {e}")))?;
        if let Some(r) = ring_override {
            if r != ring {
                return Err(CliError::Document(format!(
                    "derivation: document ring {ring} differs from --ring {r}"
                )));
            }
        }
        let algebra = Algebra::new(poset.preorder.clone(), ring);
        let mut terms = Vec::new();
        for (k, term) in doc.terms.iter().enumerate() {
            terms.push(parse_term(k, term, poset, &algebra)?);
        }
        let spec = MapSpec::new(&algebra, terms)
            .map_err(|e| CliError::Document(format!("derivation: {e}")))?;
        Ok((
            Derivation {
                ring,
                n: doc.n,
                spec,
            },
            algebra,
        ))
    }
}

fn parse_table(
    k: usize,
    kind: &str,
    rows: &[(Name, Name, Value)],
    poset: &Poset,
    ring: RingDescriptor,
) -> Result<Vec<(usize, usize, RingValue)>, CliError> {
    rows.iter()
        .map(|(a, b, v)| {
            let x = poset.vertex(a).map_err(|e| field_error(k, kind, e))?;
            let y = poset.vertex(b).map_err(|e| field_error(k, kind, e))?;
            let r = RingValue::from_json(ring, v).map_err(|e| field_error(k, kind, e))?;
            Ok((x, y, r))
        })
        .collect()
}

fn class_of(
    k: usize,
    kind: &str,
    (a, b): &(Name, Name),
    poset: &Poset,
    algebra: &Algebra,
) -> Result<usize, CliError> {
    let x = poset.vertex(a).map_err(|e| field_error(k, kind, e))?;
    let y = poset.vertex(b).map_err(|e| field_error(k, kind, e))?;
    algebra.classes().class_of(x, y).ok_or_else(|| {
        field_error(k, kind, format!("({a},{b}) is not a strict edge"))
    })
}

fn parse_term(
    k: usize,
    term: &TermDocument,
    poset: &Poset,
    algebra: &Arc<Algebra>,
) -> Result<Primitive, CliError> {
    let ring = algebra.ring();
    Ok(match term {
        TermDocument::Inner { alpha } => {
            let rows = parse_table(k, "inner", alpha, poset, ring)?;
            Primitive::Inner(algebra.from_entries(rows).map_err(|e| field_error(k, "inner", e))?)
        }
        TermDocument::Transitive { f } => {
            let rows = parse_table(k, "transitive", f, poset, ring)?;
            Primitive::Transitive(
                TransitiveMap::new(algebra, rows)
                    .map_err(|e| field_error(k, "transitive", transitive_error(&e, poset)))?,
            )
        }
        TermDocument::AdditiveInduced { assign } => {
            let mut map = BTreeMap::new();
            for (edge, payload) in assign {
                let i = class_of(k, "additive_induced", edge, poset, algebra)?;
                let d = parse_derivation_payload(ring, payload)
                    .map_err(|e| field_error(k, "additive_induced", e))?;
                if map.insert(i, d).is_some() {
                    return Err(field_error(k, "additive_induced", format!("class {i} assigned twice")));
                }
            }
            Primitive::AdditiveInduced(
                AdditiveInduced::new(algebra, map).map_err(|e| field_error(k, "additive_induced", e))?,
            )
        }
        TermDocument::CentralTrace { h } => {
            let mut map = BTreeMap::new();
            for (j, coeffs) in h {
                let p = integer_array(coeffs).map_err(|e| field_error(k, "central_trace", e))?;
                map.insert(*j, p);
            }
            Primitive::CentralTrace(map)
        }
        TermDocument::Witness { class_edge, t, f } => {
            let i = class_of(k, "witness", class_edge, poset, algebra)?;
            let t = poset.vertex(t).map_err(|e| field_error(k, "witness", e))?;
            let d = parse_derivation_payload(ring, f).map_err(|e| field_error(k, "witness", e))?;
            Primitive::Witness(Witness::new(algebra, i, t, d).map_err(|e| field_error(k, "witness", e))?)
        }
        TermDocument::ProperPart { assign } => {
            let mut map = BTreeMap::new();
            for (j, payload) in assign {
                let d = parse_derivation_payload(ring, payload)
                    .map_err(|e| field_error(k, "proper_part", e))?;
                map.insert(*j, d);
            }
            Primitive::ProperPart(map)
        }
    })
}

fn transitive_error(e: &MapError, poset: &Poset) -> String {
    match *e {
        MapError::NotTransitive { x, y, z } => format!(
            "f({0},{1}) + f({1},{2}) != f({0},{2})",
            poset.name(x),
            poset.name(y),
            poset.name(z)
        ),
        MapError::NonzeroDiagonal(x) => format!("f({0},{0}) must be 0", poset.name(x)),
        _ => e.to_string(),
    }
}

/// Sparse element as `[[x, y, value], ...]` with vertex names.
pub fn element_rows(e: &FiElement, poset: &Poset) -> Vec<Value> {
    e.entries()
        .map(|((x, y), r)| json!([poset.name(x), poset.name(y), r.to_json()]))
        .collect()
}

fn term_document(term: &Primitive, poset: &Poset, algebra: &Algebra) -> TermDocument {
    let name = |x: usize| Name::Text(poset.name(x).to_string());
    let rep = |i: usize| {
        let (x, y) = algebra.classes().classes()[i].edges[0];
        (name(x), name(y))
    };
    match term {
        Primitive::Inner(alpha) => TermDocument::Inner {
            alpha: alpha
                .entries()
                .map(|((x, y), r)| (name(x), name(y), r.to_json()))
                .collect(),
        },
        Primitive::Transitive(f) => TermDocument::Transitive {
            f: f.entries()
                .map(|((x, y), r)| (name(x), name(y), r.to_json()))
                .collect(),
        },
        Primitive::AdditiveInduced(a) => TermDocument::AdditiveInduced {
            assign: a
                .assignments()
                .iter()
                .map(|(&i, d)| (rep(i), derivation_payload(d)))
                .collect(),
        },
        Primitive::CentralTrace(h) => TermDocument::CentralTrace {
            h: h.iter()
                .map(|(&j, p)| {
                    let Value::Array(c) = RingValue::poly(p.clone()).to_json() else {
                        unreachable!("polynomials serialize as arrays")
                    };
                    (j, c)
                })
                .collect(),
        },
        Primitive::Witness(w) => TermDocument::Witness {
            class_edge: rep(w.class()),
            t: name(w.base_point()),
            f: derivation_payload(w.derivation()),
        },
        Primitive::ProperPart(g) => TermDocument::ProperPart {
            assign: g.iter().map(|(&j, d)| (j, derivation_payload(d))).collect(),
        },
    }
}

pub fn derivation_document(spec: &MapSpec, n: u64, poset: &Poset) -> DerivationDocument {
    DerivationDocument {
        ring: spec.algebra().ring().to_string(),
        n,
        terms: spec
            .terms()
            .iter()
            .map(|t| term_document(t, poset, spec.algebra()))
            .collect(),
    }
}

/// Indented JSON in which arrays that fit in `INLINE` columns stay on one line.
pub fn to_pretty(value: &impl Serialize) -> String {
    let value = serde_json::to_value(value).expect("documents serialize");
    let mut out = String::new();
    write_value(&value, 0, &mut out);
    out.push('\n');
    out
}

const INLINE: usize = 72;

fn write_value(value: &Value, depth: usize, out: &mut String) {
    let pad = "  ".repeat(depth + 1);
    match value {
        Value::Object(map) if !map.is_empty() => {
            out.push_str("{\n");
            for (k, (key, v)) in map.iter().enumerate() {
                out.push_str(&pad);
                out.push_str(&Value::String(key.clone()).to_string());
                out.push_str(": ");
                write_value(v, depth + 1, out);
                out.push_str(if k + 1 < map.len() { ",\n" } else { "\n" });
            }
            out.push_str(&"  ".repeat(depth));
            out.push('}');
        }
        Value::Array(items) if value.to_string().len() > INLINE => {
            out.push_str("[\n");
            for (k, v) in items.iter().enumerate() {
                out.push_str(&pad);
                write_value(v, depth + 1, out);
                out.push_str(if k + 1 < items.len() { ",\n" } else { "\n" });
            }
            out.push_str(&"  ".repeat(depth));
            out.push(']');
        }
        other => out.push_str(&spaced(other)),
    }
}

/// Compact JSON with a space after commas and colons.
fn spaced(value: &Value) -> String {
    match value {
        Value::Array(items) => {
            let parts: Vec<String> = items.iter().map(spaced).collect();
            format!("[{}]", parts.join(", "))
        }
        Value::Object(map) => {
            let parts: Vec<String> = map
                .iter()
                .map(|(k, v)| format!("{}: {}", Value::String(k.clone()), spaced(v)))
                .collect();
            format!("{{{}}}", parts.join(", "))
        }
        other => other.to_string(),
    }
}
