//! Report rendering: plain text for the combinatorial commands and `check`,
//! JSON for decompositions and proper forms.

use filie::algebra::FiElement;
use filie::decompose::DecompositionReport;
use filie::properness::{PropernessError, PropernessVerdict, Properized};
use filie::ring::RingDescriptor;
use filie::verify::{ProbeBudget, Verdict};
use serde::Serialize;
use serde_json::{json, Value};

use crate::documents::{derivation_document, derivation_payload, element_rows, DerivationDocument, DerivationPayload, Poset};

fn count(k: usize, noun: &str, plural: &str) -> String {
    if k == 1 {
        format!("1 {noun}")
    } else {
        format!("{k} {plural}")
    }
}

pub fn validate(poset: &Poset) -> String {
    let p = &poset.preorder;
    let classes = p.edge_classes();
    format!(
        "valid pre-order: {}, {} ({} strict), {}, {}{}\n",
        count(p.size(), "vertex", "vertices"),
        count(p.pairs().count(), "pair", "pairs"),
        p.strict_pairs().count(),
        count(classes.components().count(), "component", "components"),
        count(classes.num_classes(), "class", "classes"),
        if p.is_poset() { ", antisymmetric" } else { "" }
    )
}

pub fn components(poset: &Poset) -> String {
    let comps = poset.preorder.connected_components();
    let mut out = format!("{}\n", count(comps.count(), "component", "components"));
    for (j, members) in comps.iter().enumerate() {
        out.push_str(&format!("component {j}: {}\n", poset.set(members.iter().copied())));
    }
    out
}

pub fn classes(poset: &Poset) -> String {
    let c = poset.preorder.edge_classes();
    let mut out = format!("{}\n", count(c.num_classes(), "class", "classes"));
    for (i, class) in c.classes().iter().enumerate() {
        let edges: Vec<String> = class.edges.iter().map(|&e| poset.edge(e)).collect();
        out.push_str(&format!(
            "class {i} (component {}): edges {}; vertices {}\n",
            class.component,
            edges.join(" "),
            poset.set(class.vertices.iter().copied())
        ));
    }
    out
}

pub fn properness(poset: &Poset, verdict: &PropernessVerdict) -> String {
    let c = poset.preorder.edge_classes();
    let label = |i: usize| format!("{i} {}", poset.edge(c.classes()[i].edges[0]));
    let mut out = match verdict.certificate {
        None => format!("{verdict}\n"),
        Some(cert) => format!(
            "not proper-capable: component {} hosts classes {} and {}\n",
            cert.component,
            label(cert.first),
            label(cert.second)
        ),
    };
    for (j, group) in verdict.groups.iter().enumerate() {
        let names: Vec<String> = group.iter().map(|&i| label(i)).collect();
        out.push_str(&format!("component {j}: [{}]\n", names.join(", ")));
    }
    out
}

fn compact(e: &FiElement, poset: &Poset) -> String {
    Value::Array(element_rows(e, poset)).to_string()
}

fn verdict_text(verdict: &Verdict, poset: &Poset) -> String {
    match verdict {
        Verdict::Pass { .. } => verdict.to_string(),
        Verdict::Fail(c) => {
            let args: Vec<String> = c.tuple.iter().map(|e| compact(e, poset)).collect();
            format!(
                "{} violated at probe {}: args = [{}], lhs = {}, rhs = {}",
                c.law,
                c.index,
                args.join(", "),
                compact(&c.lhs, poset),
                compact(&c.rhs, poset)
            )
        }
    }
}

pub fn check(
    poset: &Poset,
    budget: &ProbeBudget,
    n: u64,
    ring: RingDescriptor,
    verdict: &Verdict,
) -> String {
    format!(
        "ring {ring}, n = {n}, seed {}, {} random probes\nlie-{n}-derivation: {}\n",
        budget.seed,
        budget.tuples,
        verdict_text(verdict, poset)
    )
}

#[derive(Serialize)]
pub struct ClassDocument {
    pub class: usize,
    pub edge: (String, String),
    pub probes: Vec<(Value, Value)>,
    pub fitted: Option<DerivationPayload>,
}

#[derive(Serialize)]
pub struct CheckDocument {
    pub check: String,
    pub result: String,
}

#[derive(Serialize)]
pub struct DecompositionDocument {
    pub ring: String,
    pub n: u64,
    pub seed: u64,
    pub random_probes: usize,
    pub lie_check: String,
    pub decomposable: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub e_l: Option<Vec<Value>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f: Option<Vec<Value>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gauge: Option<Vec<Value>>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub classes: Vec<ClassDocument>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub checks: Vec<CheckDocument>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub structured_part: Option<DerivationDocument>,
}

pub fn rejected(
    poset: &Poset,
    ring: RingDescriptor,
    n: u64,
    budget: &ProbeBudget,
    lie: &Verdict,
) -> DecompositionDocument {
    DecompositionDocument {
        ring: ring.to_string(),
        n,
        seed: budget.seed,
        random_probes: budget.tuples,
        lie_check: verdict_text(lie, poset),
        decomposable: false,
        e_l: None,
        f: None,
        gauge: None,
        classes: Vec::new(),
        checks: Vec::new(),
        structured_part: None,
    }
}

pub fn decomposition(poset: &Poset, r: &DecompositionReport) -> DecompositionDocument {
    let classes = r.algebra.classes();
    DecompositionDocument {
        ring: r.algebra.ring().to_string(),
        n: r.n,
        seed: r.budget.seed,
        random_probes: r.budget.tuples,
        lie_check: verdict_text(&r.lie, poset),
        decomposable: r.decomposable(),
        e_l: Some(element_rows(&r.e_l, poset)),
        f: Some(
            r.f_table
                .iter()
                .map(|((x, y), v)| json!([poset.name(*x), poset.name(*y), v.to_json()]))
                .collect(),
        ),
        gauge: r.gauge.as_ref().map(|sigma| {
            sigma
                .iter()
                .enumerate()
                .map(|(x, v)| json!([poset.name(x), v.to_json()]))
                .collect()
        }),
        classes: r
            .class_probes
            .iter()
            .map(|(&i, table)| {
                let (x, y) = classes.classes()[i].edges[0];
                ClassDocument {
                    class: i,
                    edge: (poset.name(x).to_string(), poset.name(y).to_string()),
                    probes: table.iter().map(|(a, b)| (a.to_json(), b.to_json())).collect(),
                    fitted: r.fitted.get(&i).cloned().flatten().as_ref().map(derivation_payload),
                }
            })
            .collect(),
        checks: r
            .checks
            .iter()
            .map(|c| CheckDocument {
                check: c.check.name().to_string(),
                result: match &c.failure {
                    None => format!("no violation found in {} probes", c.probes),
                    Some(why) => format!("FAIL: {why}"),
                },
            })
            .collect(),
        structured_part: r
            .structured_part()
            .map(|m| derivation_document(&m, r.n, poset)),
    }
}

#[derive(Serialize)]
pub struct MismatchDocument {
    pub component: usize,
    pub first: (usize, (String, String)),
    pub second: (usize, (String, String)),
    pub scalar: Value,
    pub values: (Value, Value),
}

#[derive(Serialize)]
pub struct ProperizedDocument {
    pub ring: String,
    pub n: u64,
    pub seed: u64,
    pub random_probes: usize,
    pub proper: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub derivation: Option<DerivationDocument>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub components: Option<Vec<(usize, DerivationPayload)>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa_check: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<MismatchDocument>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

pub fn properized(
    poset: &Poset,
    r: &DecompositionReport,
    outcome: &Result<Properized, PropernessError>,
) -> ProperizedDocument {
    let classes = r.algebra.classes();
    let class = |i: usize| {
        let (x, y) = classes.classes()[i].edges[0];
        (i, (poset.name(x).to_string(), poset.name(y).to_string()))
    };
    let mut doc = ProperizedDocument {
        ring: r.algebra.ring().to_string(),
        n: r.n,
        seed: r.budget.seed,
        random_probes: r.budget.tuples,
        proper: false,
        derivation: None,
        components: None,
        kappa_check: None,
        certificate: None,
        error: None,
    };
    match outcome {
        Ok(p) => {
            doc.proper = p.kappa_verdict.passed();
            doc.derivation = Some(derivation_document(&p.derivation, r.n, poset));
            doc.components = Some(
                p.per_component
                    .iter()
                    .map(|(&j, d)| (j, derivation_payload(d)))
                    .collect(),
            );
            doc.kappa_check = Some(verdict_text(&p.kappa_verdict, poset));
        }
        Err(PropernessError::NotProper(m)) => {
            doc.certificate = Some(MismatchDocument {
                component: m.component,
                first: class(m.first),
                second: class(m.second),
                scalar: m.scalar.to_json(),
                values: (m.first_value.to_json(), m.second_value.to_json()),
            });
            doc.error = Some("class functions differ inside a component".to_string());
        }
        Err(e) => doc.error = Some(e.to_string()),
    }
    doc
}
