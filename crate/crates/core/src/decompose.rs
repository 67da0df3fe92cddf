//! Decomposition of a black-box Lie n-derivation into an inner part, a
//! transitive induced part, an additive induced part and a central residual.
//!
//! The pipeline reads the corner element `e_L` off `L(e_yy)`, subtracts its
//! inner derivation, reads the transitive map off the basis elements,
//! subtracts that too and probes what is left on scalar multiples of the
//! basis edges, one edge class at a time. Every structural fact the pipeline
//! relies on is checked at probe points and logged.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::algebra::{Algebra, FiElement};
use crate::maps::{BlackBoxMap, MapCombination, MapSpec, SharedMap, TransitiveMap};
use crate::ring::{AdditiveDerivation, IntPoly, RingDescriptor, RingValue};
use crate::verify::{
    check_central_annihilating, check_lie_n_derivation, Counterexample, ProbeBudget, Probes,
    Verdict, VerifyError,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecomposeError {
    #[error("input is not a Lie {n}-derivation: {counterexample}")]
    NotLieN {
        n: u64,
        counterexample: Box<Counterexample>,
    },
    #[error(transparent)]
    Verify(#[from] VerifyError),
}

/// Structural checks logged by the pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Check {
    /// `L(e_xx)(x, y) = -L(e_yy)(x, y)` on strict pairs.
    CornerAntisymmetry,
    /// `L1` maps diagonal elements to diagonal elements.
    DiagonalInvariance,
    /// `L1(e_xx)` is central.
    CornerCentrality,
    /// `L1(r e_xy)` is supported on `(x, y)`.
    StrictSupport,
    /// The extracted `f` is a transitive map.
    Transitivity,
    /// Edges of one class give the same scalar function.
    ClassAgreement,
    /// Each class function is additive and satisfies Leibniz at pool pairs.
    ClassDerivation,
    /// The residual is central-valued and kills `p_n` values.
    CentralAnnihilating,
}

impl Check {
    pub fn name(&self) -> &'static str {
        match self {
            Check::CornerAntisymmetry => "corner-antisymmetry",
            Check::DiagonalInvariance => "diagonal-invariance",
            Check::CornerCentrality => "corner-centrality",
            Check::StrictSupport => "strict-support",
            Check::Transitivity => "transitivity",
            Check::ClassAgreement => "class-agreement",
            Check::ClassDerivation => "class-derivation",
            Check::CentralAnnihilating => "central-annihilating",
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckRecord {
    pub check: Check,
    pub probes: usize,
    pub failure: Option<String>,
}

impl CheckRecord {
    fn new(check: Check) -> Self {
        CheckRecord {
            check,
            probes: 0,
            failure: None,
        }
    }

    fn from_verdict(check: Check, verdict: &Verdict) -> Self {
        match verdict {
            Verdict::Pass { probes } => CheckRecord {
                check,
                probes: *probes,
                failure: None,
            },
            Verdict::Fail(c) => CheckRecord {
                check,
                probes: c.index,
                failure: Some(verdict.to_string()),
            },
        }
    }

    /// Counts a probe; records the first failure only.
    fn probe(&mut self, ok: bool, detail: impl FnOnce() -> String) {
        if self.failure.is_some() {
            return;
        }
        if ok {
            self.probes += 1;
        } else {
            self.failure = Some(detail());
        }
    }

    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

impl fmt::Display for CheckRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.failure {
            None => write!(f, "{}: no violation found in {} probes", self.check, self.probes),
            Some(why) => write!(f, "{}: FAIL: {}", self.check, why),
        }
    }
}

/// `e_L(x, y) = L(e_yy)(x, y)` for strict pairs; zero diagonal.
pub fn extract_corner(map: &dyn BlackBoxMap, algebra: &Arc<Algebra>) -> FiElement {
    let p = algebra.preorder();
    let images: Vec<FiElement> = (0..p.size())
        .map(|y| map.apply(&algebra.basis(y, y).expect("diagonal")))
        .collect();
    algebra
        .from_entries(p.strict_pairs().map(|(x, y)| (x, y, images[y].get(x, y))))
        .expect("strict pairs")
}

/// `L(e_xx)(x, y) = -L(e_yy)(x, y)` at every strict pair.
pub fn check_corner_antisymmetry(map: &dyn BlackBoxMap, algebra: &Arc<Algebra>) -> CheckRecord {
    let p = algebra.preorder();
    let images: Vec<FiElement> = (0..p.size())
        .map(|x| map.apply(&algebra.basis(x, x).expect("diagonal")))
        .collect();
    let mut rec = CheckRecord::new(Check::CornerAntisymmetry);
    for (x, y) in p.strict_pairs() {
        let (a, b) = (images[x].get(x, y), images[y].get(x, y));
        rec.probe(a == -&b, || {
            format!("L(e_{x}{x})({x},{y}) = {a} but L(e_{y}{y})({x},{y}) = {b}")
        });
    }
    rec
}

/// Outcome of reading the transitive map off `L1`.
#[derive(Debug, Clone)]
pub struct TransitiveExtraction {
    /// `L1(e_xy)(x, y)` for every strict pair, zeros included.
    pub table: Vec<((usize, usize), RingValue)>,
    pub f: Option<TransitiveMap>,
    pub checks: Vec<CheckRecord>,
}

/// Reads `f(x, y) = L1(e_xy)(x, y)` and checks support and transitivity.
pub fn extract_transitive(
    l1: &dyn BlackBoxMap,
    algebra: &Arc<Algebra>,
    pool: &[RingValue],
) -> TransitiveExtraction {
    let p = algebra.preorder();
    let mut support = CheckRecord::new(Check::StrictSupport);
    let mut table = Vec::new();
    for (x, y) in p.strict_pairs() {
        let image = l1.apply(&algebra.basis(x, y).expect("pair"));
        table.push(((x, y), image.get(x, y)));
        let one = RingValue::one(algebra.ring());
        for r in std::iter::once(&one).chain(pool.iter()) {
            let image = l1.apply(&algebra.scaled_basis(r.clone(), x, y).expect("pair"));
            let stray = image.entries().find(|&(k, _)| k != (x, y)).map(|(k, _)| k);
            rec_stray(&mut support, x, y, r, stray);
        }
    }
    let mut transitivity = CheckRecord::new(Check::Transitivity);
    let f = match TransitiveMap::new(
        algebra,
        table.iter().map(|((x, y), v)| (*x, *y, v.clone())),
    ) {
        Ok(f) => {
            transitivity.probes = table.len();
            Some(f)
        }
        Err(e) => {
            transitivity.failure = Some(e.to_string());
            None
        }
    };
    TransitiveExtraction {
        table,
        f,
        checks: vec![support, transitivity],
    }
}

fn rec_stray(
    rec: &mut CheckRecord,
    x: usize,
    y: usize,
    r: &RingValue,
    stray: Option<(usize, usize)>,
) {
    rec.probe(stray.is_none(), || {
        let (u, v) = stray.expect("failure has a stray entry");
        format!("L1({r} e_{x}{y}) has a nonzero entry at ({u},{v})")
    });
}

/// Outcome of probing `L2` on the edge classes.
#[derive(Debug, Clone)]
pub struct ClassExtraction {
    /// Class id to `(r, f_i(r))` over the pool, read on the class's first edge.
    pub probes: BTreeMap<usize, Vec<(RingValue, RingValue)>>,
    pub fitted: BTreeMap<usize, Option<AdditiveDerivation>>,
    pub checks: Vec<CheckRecord>,
}

/// Scalar used to validate a fit beyond the pool.
pub fn held_out_scalar(ring: RingDescriptor) -> RingValue {
    match ring {
        RingDescriptor::IntPoly => RingValue::poly(IntPoly::from_i64s(&[5, -2, 0, 1])),
        other => RingValue::from_i64(other, 7),
    }
}

/// Probes `f_i(r) = L2(r e_xy)(x, y)` on every edge of every class, checks
/// cross-edge agreement and the derivation laws at pool pairs, and fits
/// each class to `Zero` or `p(t) d/dt`.
pub fn extract_class_derivations(
    l2: &dyn BlackBoxMap,
    algebra: &Arc<Algebra>,
    pool: &[RingValue],
) -> ClassExtraction {
    let classes = algebra.classes();
    let ring = algebra.ring();
    let read = |r: &RingValue, (x, y): (usize, usize)| {
        l2.apply(&algebra.scaled_basis(r.clone(), x, y).expect("edge"))
            .get(x, y)
    };
    let mut agreement = CheckRecord::new(Check::ClassAgreement);
    let mut laws = CheckRecord::new(Check::ClassDerivation);
    let mut probes = BTreeMap::new();
    let mut fitted = BTreeMap::new();
    for (i, class) in classes.classes().iter().enumerate() {
        let rep = class.edges[0];
        let table: Vec<(RingValue, RingValue)> =
            pool.iter().map(|r| (r.clone(), read(r, rep))).collect();
        for &edge in &class.edges[1..] {
            for (r, v) in &table {
                let w = read(r, edge);
                agreement.probe(&w == v, || {
                    format!(
                        "class {i}: f({r}) is {v} on edge ({},{}) but {w} on edge ({},{})",
                        rep.0, rep.1, edge.0, edge.1
                    )
                });
            }
        }
        for (r, fr) in &table {
            for (s, fs) in &table {
                let sum = read(&(r + s), rep);
                laws.probe(sum == fr + fs, || {
                    format!("class {i}: f({r} + {s}) = {sum}, expected {}", fr + fs)
                });
                let prod = read(&(r * s), rep);
                let leibniz = &(fr * s) + &(r * fs);
                laws.probe(prod == leibniz, || {
                    format!("class {i}: f({r} * {s}) = {prod}, expected {leibniz}")
                });
            }
        }
        let fit = fit_derivation(ring, &|r: &RingValue| read(r, rep), pool);
        probes.insert(i, table);
        fitted.insert(i, fit);
    }
    ClassExtraction {
        probes,
        fitted,
        checks: vec![agreement, laws],
    }
}

/// Tries `Zero`, then `f(t) d/dt` over integer polynomials; accepted only
/// when it matches the whole pool and the held-out scalar.
fn fit_derivation(
    ring: RingDescriptor,
    probe: &dyn Fn(&RingValue) -> RingValue,
    pool: &[RingValue],
) -> Option<AdditiveDerivation> {
    let candidate = match ring {
        RingDescriptor::IntPoly => match probe(&RingValue::poly(IntPoly::t())) {
            RingValue::Poly(p) => AdditiveDerivation::poly_times_ddt(p),
            _ => return None,
        },
        _ => AdditiveDerivation::Zero,
    };
    let held = held_out_scalar(ring);
    pool.iter()
        .chain(std::iter::once(&held))
        .all(|r| candidate.apply_unchecked(r) == probe(r))
        .then_some(candidate)
}

/// Result of the full pipeline.
#[derive(Clone)]
pub struct DecompositionReport {
    pub algebra: Arc<Algebra>,
    pub n: u64,
    pub budget: ProbeBudget,
    /// The up-front Lie n-derivation falsifier.
    pub lie: Verdict,
    pub e_l: FiElement,
    /// `L1(e_xy)(x, y)` over strict pairs, empty when the pipeline stopped earlier.
    pub f_table: Vec<((usize, usize), RingValue)>,
    pub f: Option<TransitiveMap>,
    /// `σ` with `f(x, y) = σ(x) - σ(y)` when `f` is trivial.
    pub gauge: Option<Vec<RingValue>>,
    pub class_probes: BTreeMap<usize, Vec<(RingValue, RingValue)>>,
    pub fitted: BTreeMap<usize, Option<AdditiveDerivation>>,
    pub checks: Vec<CheckRecord>,
    source: SharedMap,
    residual: SharedMap,
}

impl DecompositionReport {
    pub fn decomposable(&self) -> bool {
        self.checks.iter().all(CheckRecord::passed)
            && self.f.is_some()
            && self.class_probes.len() == self.algebra.classes().num_classes()
    }

    pub fn first_failure(&self) -> Option<&CheckRecord> {
        self.checks.iter().find(|c| !c.passed())
    }

    pub fn all_fitted(&self) -> bool {
        self.class_probes.len() == self.fitted.len() && self.fitted.values().all(Option::is_some)
    }

    /// The map that was decomposed.
    pub fn source(&self) -> &SharedMap {
        &self.source
    }

    /// `L - ad_{e_L} - L_f - ψ_F` when every class is fitted, else `L - ad_{e_L} - L_f`.
    pub fn residual(&self) -> &SharedMap {
        &self.residual
    }

    /// `ad_{e_L} + L_f + ψ_F` with the fitted class derivations.
    pub fn structured_part(&self) -> Option<MapSpec> {
        let psi = self.fitted_psi()?;
        MapSpec::inner(self.e_l.clone())
            .plus(MapSpec::transitive(self.f.clone()?))
            .and_then(|m| m.plus(psi))
            .ok()
    }

    /// Structured part plus residual; agrees with the source at every input.
    pub fn recomposition(&self) -> SharedMap {
        let mut combo = MapCombination::of(Arc::new(MapSpec::inner(self.e_l.clone())));
        if let Some(f) = &self.f {
            combo = combo.plus(Arc::new(MapSpec::transitive(f.clone())));
        }
        if let Some(psi) = self.fitted_psi() {
            combo = combo.plus(Arc::new(psi));
        }
        Arc::new(combo.plus(Arc::clone(&self.residual)))
    }

    fn fitted_psi(&self) -> Option<MapSpec> {
        if !self.all_fitted() || self.f.is_none() {
            return None;
        }
        let assign = self
            .fitted
            .iter()
            .map(|(&i, d)| (i, d.clone().expect("fitted")))
            .collect();
        MapSpec::additive_induced(&self.algebra, assign).ok()
    }

    /// Everything except the map handles, for comparing two runs.
    pub fn same_outcome(&self, other: &DecompositionReport) -> bool {
        self.n == other.n
            && self.lie == other.lie
            && self.e_l == other.e_l
            && self.f_table == other.f_table
            && self.gauge == other.gauge
            && self.class_probes == other.class_probes
            && self.fitted == other.fitted
            && self.checks == other.checks
    }
}

impl fmt::Debug for DecompositionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DecompositionReport")
            .field("n", &self.n)
            .field("lie", &self.lie)
            .field("e_l", &self.e_l)
            .field("f_table", &self.f_table)
            .field("gauge", &self.gauge)
            .field("class_probes", &self.class_probes)
            .field("fitted", &self.fitted)
            .field("checks", &self.checks)
            .finish_non_exhaustive()
    }
}

/// Runs the falsifier, then the extraction pipeline. A falsifier failure is
/// an error; a failed structural check yields a report that is not
/// decomposable and stops the pipeline at that stage.
pub fn decompose(
    map: SharedMap,
    algebra: &Arc<Algebra>,
    n: u64,
    budget: &ProbeBudget,
) -> Result<DecompositionReport, DecomposeError> {
    let lie = check_lie_n_derivation(map.as_ref(), algebra, n, budget)?;
    if let Verdict::Fail(counterexample) = lie {
        return Err(DecomposeError::NotLieN { n, counterexample });
    }
    let e_l = extract_corner(map.as_ref(), algebra);
    let ad: SharedMap = Arc::new(MapSpec::inner(e_l.clone()));
    let l1: SharedMap = Arc::new(MapCombination::of(Arc::clone(&map)).minus(Arc::clone(&ad)));
    let mut report = DecompositionReport {
        algebra: Arc::clone(algebra),
        n,
        budget: budget.clone(),
        lie,
        e_l,
        f_table: Vec::new(),
        f: None,
        gauge: None,
        class_probes: BTreeMap::new(),
        fitted: BTreeMap::new(),
        checks: Vec::new(),
        source: Arc::clone(&map),
        residual: Arc::clone(&l1),
    };

    report.checks.push(check_corner_antisymmetry(map.as_ref(), algebra));
    report.checks.push(check_diagonal_invariance(l1.as_ref(), algebra, budget));
    report.checks.push(check_corner_centrality(l1.as_ref(), algebra));
    if report.first_failure().is_some() {
        return Ok(report);
    }

    let extraction = extract_transitive(l1.as_ref(), algebra, &budget.pool);
    report.f_table = extraction.table;
    report.checks.extend(extraction.checks);
    let Some(f) = extraction.f else {
        return Ok(report);
    };
    report.gauge = f.is_trivial();
    report.f = Some(f.clone());
    if report.first_failure().is_some() {
        return Ok(report);
    }
    let l2: SharedMap = Arc::new(
        MapCombination::of(Arc::clone(&l1)).minus(Arc::new(MapSpec::transitive(f))),
    );
    report.residual = Arc::clone(&l2);

    let classes = extract_class_derivations(l2.as_ref(), algebra, &budget.pool);
    report.class_probes = classes.probes;
    report.fitted = classes.fitted;
    report.checks.extend(classes.checks);
    if report.first_failure().is_some() {
        return Ok(report);
    }

    if let Some(psi) = report.fitted_psi() {
        let kappa: SharedMap = Arc::new(MapCombination::of(l2).minus(Arc::new(psi)));
        let verdict = check_central_annihilating(kappa.as_ref(), algebra, n, budget)?;
        report
            .checks
            .push(CheckRecord::from_verdict(Check::CentralAnnihilating, &verdict));
        report.residual = kappa;
    }
    Ok(report)
}

/// `L1` keeps structured and random diagonal probes diagonal.
fn check_diagonal_invariance(
    l1: &dyn BlackBoxMap,
    algebra: &Arc<Algebra>,
    budget: &ProbeBudget,
) -> CheckRecord {
    let mut rec = CheckRecord::new(Check::DiagonalInvariance);
    for d in Probes::new(algebra, budget)
        .singles()
        .into_iter()
        .map(|b| b.diagonal_part())
    {
        let image = l1.apply(&d);
        rec.probe(image.is_diagonal(), || {
            format!("L1({d}) = {image} is not diagonal")
        });
    }
    rec
}

fn check_corner_centrality(l1: &dyn BlackBoxMap, algebra: &Arc<Algebra>) -> CheckRecord {
    let mut rec = CheckRecord::new(Check::CornerCentrality);
    for x in 0..algebra.size() {
        let image = l1.apply(&algebra.basis(x, x).expect("diagonal"));
        rec.probe(image.is_central().is_some(), || {
            format!("L1(e_{x}{x}) = {image} is not central")
        });
    }
    rec
}
