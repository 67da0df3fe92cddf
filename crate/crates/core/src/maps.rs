//! Self-maps of the incidence algebra.
//!
//! [`BlackBoxMap`] is the evaluation-only interface consumed by the checkers
//! and the decomposer. [`MapSpec`] is a structured, serializable sum of the
//! primitive derivation kinds:
//!
//! * inner derivations `β -> αβ - βα`,
//! * transitive induced derivations `r e_xy -> f(x, y) r e_xy`,
//! * additive induced Lie derivations built from one additive ring
//!   derivation per edge class,
//! * central-valued maps `β -> Σ_j h_j(tr_j β) I_j`,
//! * the single-class witness map that is a Lie derivation but not proper
//!   when a component hosts two or more classes,
//! * the proper part `r e_xy -> f_j(r) e_xy`, one derivation per component.
//!
//! All primitives act entry by entry on the sparse table of the input.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use num_traits::Zero;
use thiserror::Error;

use crate::algebra::{Algebra, AlgebraError, FiElement};
use crate::preorder::PreorderError;
use crate::ring::{AdditiveDerivation, IntPoly, RingError, RingValue};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MapError {
    #[error("transitive table has f({0}, {0}) != 0")]
    NonzeroDiagonal(usize),
    #[error("transitive table violates f({x}, {y}) + f({y}, {z}) = f({x}, {z})")]
    NotTransitive { x: usize, y: usize, z: usize },
    #[error("witness vertex {t} is not a vertex of class {class}")]
    WitnessVertex { class: usize, t: usize },
    #[error("witness derivation must be nonzero")]
    ZeroWitnessDerivation,
    #[error("component {component} hosts a single class; the witness would be proper")]
    SingleClassComponent { component: usize },
    #[error("central-trace polynomial for component {0} has a nonzero constant term")]
    NonzeroConstantTerm(usize),
    #[error("no derivation assigned to component {0}")]
    MissingComponent(usize),
    #[error("map and element belong to different algebras")]
    StructureMismatch,
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Preorder(#[from] PreorderError),
    #[error(transparent)]
    Ring(#[from] RingError),
}

/// A deterministic, total map on elements of one algebra.
///
/// Implementations must be pure: the checkers may evaluate them concurrently.
pub trait BlackBoxMap: Send + Sync {
    fn apply(&self, beta: &FiElement) -> FiElement;
}

impl<F> BlackBoxMap for F
where
    F: Fn(&FiElement) -> FiElement + Send + Sync,
{
    fn apply(&self, beta: &FiElement) -> FiElement {
        self(beta)
    }
}

pub type SharedMap = Arc<dyn BlackBoxMap>;

/// Signed sum of black-box maps, e.g. `L - ad_e - L_f`.
#[derive(Clone, Default)]
pub struct MapCombination {
    terms: Vec<(bool, SharedMap)>,
}

impl MapCombination {
    pub fn of(map: SharedMap) -> Self {
        MapCombination {
            terms: vec![(false, map)],
        }
    }

    pub fn plus(mut self, map: SharedMap) -> Self {
        self.terms.push((false, map));
        self
    }

    pub fn minus(mut self, map: SharedMap) -> Self {
        self.terms.push((true, map));
        self
    }
}

impl BlackBoxMap for MapCombination {
    fn apply(&self, beta: &FiElement) -> FiElement {
        self.terms
            .iter()
            .fold(beta.algebra().zero(), |acc, (negate, map)| {
                let v = map.apply(beta);
                if *negate {
                    &acc - &v
                } else {
                    &acc + &v
                }
            })
    }
}

/// A map `f` on pairs `x <= y` with `f(x, y) + f(y, z) = f(x, z)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitiveMap {
    algebra: Arc<Algebra>,
    values: BTreeMap<(usize, usize), RingValue>,
}

impl TransitiveMap {
    /// Validates the table; pairs that are not listed are zero.
    pub fn new(
        algebra: &Arc<Algebra>,
        table: impl IntoIterator<Item = (usize, usize, RingValue)>,
    ) -> Result<Self, MapError> {
        // reuse the element constructor for order and ring validation
        let as_element = algebra.from_entries(table)?;
        let values: BTreeMap<_, _> = as_element.entries().map(|(k, v)| (k, v.clone())).collect();
        let f = TransitiveMap {
            algebra: Arc::clone(algebra),
            values,
        };
        f.validate()?;
        Ok(f)
    }

    pub fn zero(algebra: &Arc<Algebra>) -> Self {
        TransitiveMap {
            algebra: Arc::clone(algebra),
            values: BTreeMap::new(),
        }
    }

    fn validate(&self) -> Result<(), MapError> {
        let p = self.algebra.preorder();
        for x in 0..p.size() {
            if !self.get(x, x).is_zero() {
                return Err(MapError::NonzeroDiagonal(x));
            }
        }
        for (x, y) in p.pairs() {
            for z in (0..p.size()).filter(|&z| p.leq(y, z)) {
                if &self.get(x, y) + &self.get(y, z) != self.get(x, z) {
                    return Err(MapError::NotTransitive { x, y, z });
                }
            }
        }
        Ok(())
    }

    pub fn algebra(&self) -> &Arc<Algebra> {
        &self.algebra
    }

    pub fn get(&self, x: usize, y: usize) -> RingValue {
        self.values
            .get(&(x, y))
            .cloned()
            .unwrap_or_else(|| RingValue::zero(self.algebra.ring()))
    }

    /// Nonzero values, lexicographic.
    pub fn entries(&self) -> impl Iterator<Item = ((usize, usize), &RingValue)> {
        self.values.iter().map(|(&k, v)| (k, v))
    }

    pub fn is_zero(&self) -> bool {
        self.values.is_empty()
    }

    /// Returns `σ` with `f(x, y) = σ(x) - σ(y)` when `f` is trivial.
    ///
    /// `σ` is fixed to zero at the least vertex of every component and
    /// propagated along a breadth-first spanning tree; every remaining
    /// comparable pair is then checked.
    pub fn is_trivial(&self) -> Option<Vec<RingValue>> {
        let p = self.algebra.preorder();
        let ring = self.algebra.ring();
        let mut sigma: Vec<Option<RingValue>> = vec![None; p.size()];
        for members in self.algebra.components().iter() {
            let root = members[0];
            sigma[root] = Some(RingValue::zero(ring));
            let mut queue = std::collections::VecDeque::from([root]);
            while let Some(u) = queue.pop_front() {
                let su = sigma[u].clone().expect("visited");
                for v in p.neighbors(u) {
                    if sigma[v].is_some() {
                        continue;
                    }
                    let sv = if p.leq(u, v) {
                        &su - &self.get(u, v)
                    } else {
                        &su + &self.get(v, u)
                    };
                    sigma[v] = Some(sv);
                    queue.push_back(v);
                }
            }
        }
        let sigma: Vec<RingValue> = sigma.into_iter().map(|s| s.expect("all visited")).collect();
        p.pairs()
            .all(|(x, y)| self.get(x, y) == &sigma[x] - &sigma[y])
            .then_some(sigma)
    }

    fn apply(&self, beta: &FiElement) -> FiElement {
        beta.map_entries(|x, y, r| match self.values.get(&(x, y)) {
            Some(f) => f * r,
            None => RingValue::zero(r.descriptor()),
        })
    }
}

/// Additive induced Lie derivation `ψ_F` from one derivation per class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdditiveInduced {
    assign: BTreeMap<usize, AdditiveDerivation>,
    /// Per vertex `x`: `(i, V(x, i) \ {x})` for every class `i` at `x`.
    spread: Vec<Vec<(usize, Vec<usize>)>>,
}

impl AdditiveInduced {
    pub fn new(
        algebra: &Arc<Algebra>,
        assign: BTreeMap<usize, AdditiveDerivation>,
    ) -> Result<Self, MapError> {
        let classes = algebra.classes();
        for (&i, d) in &assign {
            classes.class(i)?;
            d.check_ring(algebra.ring())?;
            // Classes of infinite components must carry the zero derivation;
            // every component is finite here, so there is nothing to reject.
        }
        let mut spread = Vec::with_capacity(algebra.size());
        for x in 0..algebra.size() {
            let mut at_x = Vec::new();
            for &i in classes.classes_at(x) {
                let mut vs = classes.v_set(x, i)?;
                vs.remove(&x);
                at_x.push((i, vs.into_iter().collect()));
            }
            spread.push(at_x);
        }
        Ok(AdditiveInduced { assign, spread })
    }

    pub fn assignments(&self) -> &BTreeMap<usize, AdditiveDerivation> {
        &self.assign
    }

    pub fn derivation(&self, class: usize) -> &AdditiveDerivation {
        self.assign.get(&class).unwrap_or(&AdditiveDerivation::Zero)
    }

    fn apply(&self, algebra: &Arc<Algebra>, beta: &FiElement, out: &mut Accumulator) {
        let classes = algebra.classes();
        for ((x, y), r) in beta.entries() {
            if x != y {
                let class = classes.class_of(x, y).expect("strict pair has a class");
                out.add(x, y, self.derivation(class).apply_unchecked(r));
            } else {
                for (i, ys) in &self.spread[x] {
                    let d = self.derivation(*i);
                    if d.is_zero() {
                        continue;
                    }
                    let v = -&d.apply_unchecked(r);
                    for &z in ys {
                        out.add(z, z, v.clone());
                    }
                }
            }
        }
    }
}

/// The non-proper witness: derivation `f` on class `i`, zero elsewhere, with
/// the diagonal spread over the blocks `V_x` relative to the base point `t`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    class: usize,
    t: usize,
    derivation: AdditiveDerivation,
    blocks: BTreeMap<usize, BTreeSet<usize>>,
}

impl Witness {
    pub fn new(
        algebra: &Arc<Algebra>,
        class: usize,
        t: usize,
        derivation: AdditiveDerivation,
    ) -> Result<Self, MapError> {
        let classes = algebra.classes();
        if !classes.class(class)?.vertices.contains(&t) {
            return Err(MapError::WitnessVertex { class, t });
        }
        derivation.check_ring(algebra.ring())?;
        Ok(Witness {
            class,
            t,
            derivation,
            blocks: classes.vx_partition(class)?,
        })
    }

    pub fn class(&self) -> usize {
        self.class
    }

    pub fn base_point(&self) -> usize {
        self.t
    }

    pub fn derivation(&self) -> &AdditiveDerivation {
        &self.derivation
    }

    fn apply(&self, algebra: &Arc<Algebra>, beta: &FiElement, out: &mut Accumulator) {
        let classes = algebra.classes();
        let f = &self.derivation;
        for ((x, y), r) in beta.entries() {
            if x != y && classes.class_of(x, y) == Some(self.class) {
                out.add(x, y, f.apply_unchecked(r));
            }
        }
        let base = f.apply_unchecked(&beta.get(self.t, self.t));
        for (&x, vx) in &self.blocks {
            let c = &f.apply_unchecked(&beta.get(x, x)) - &base;
            if c.is_zero() {
                continue;
            }
            for &y in vx {
                out.add(y, y, c.clone());
            }
        }
    }
}

/// One summand of a [`MapSpec`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Primitive {
    Inner(FiElement),
    Transitive(TransitiveMap),
    AdditiveInduced(AdditiveInduced),
    /// Component id to an integer polynomial with zero constant term.
    CentralTrace(BTreeMap<usize, IntPoly>),
    Witness(Witness),
    /// Component id to the derivation acting on every entry of that component.
    ProperPart(BTreeMap<usize, AdditiveDerivation>),
}

impl Primitive {
    pub fn kind(&self) -> &'static str {
        match self {
            Primitive::Inner(_) => "inner",
            Primitive::Transitive(_) => "transitive",
            Primitive::AdditiveInduced(_) => "additive_induced",
            Primitive::CentralTrace(_) => "central_trace",
            Primitive::Witness(_) => "witness",
            Primitive::ProperPart(_) => "proper_part",
        }
    }
}

/// A structured map: the sum of its primitives.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MapSpec {
    algebra: Arc<Algebra>,
    terms: Vec<Primitive>,
}

impl MapSpec {
    /// The zero map.
    pub fn zero(algebra: &Arc<Algebra>) -> Self {
        MapSpec {
            algebra: Arc::clone(algebra),
            terms: Vec::new(),
        }
    }

    pub fn new(algebra: &Arc<Algebra>, terms: Vec<Primitive>) -> Result<Self, MapError> {
        let spec = MapSpec {
            algebra: Arc::clone(algebra),
            terms,
        };
        for term in &spec.terms {
            spec.validate(term)?;
        }
        Ok(spec)
    }

    fn validate(&self, term: &Primitive) -> Result<(), MapError> {
        let alg = &self.algebra;
        match term {
            Primitive::Inner(alpha) => {
                if **alpha.algebra() != **alg {
                    return Err(MapError::StructureMismatch);
                }
            }
            Primitive::Transitive(f) => {
                if **f.algebra() != **alg {
                    return Err(MapError::StructureMismatch);
                }
            }
            Primitive::AdditiveInduced(a) => {
                for (&i, d) in a.assignments() {
                    alg.classes().class(i)?;
                    d.check_ring(alg.ring())?;
                }
            }
            Primitive::CentralTrace(h) => {
                for (&j, poly) in h {
                    alg.components().members(j)?;
                    if !poly.coeff(0).is_zero() {
                        return Err(MapError::NonzeroConstantTerm(j));
                    }
                }
            }
            Primitive::Witness(w) => {
                if !alg.classes().class(w.class)?.vertices.contains(&w.t) {
                    return Err(MapError::WitnessVertex {
                        class: w.class,
                        t: w.t,
                    });
                }
                w.derivation.check_ring(alg.ring())?;
            }
            Primitive::ProperPart(g) => {
                for j in 0..alg.components().count() {
                    let d = g.get(&j).ok_or(MapError::MissingComponent(j))?;
                    d.check_ring(alg.ring())?;
                }
                for &j in g.keys() {
                    alg.components().members(j)?;
                }
            }
        }
        Ok(())
    }

    pub fn inner(alpha: FiElement) -> Self {
        MapSpec {
            algebra: Arc::clone(alpha.algebra()),
            terms: vec![Primitive::Inner(alpha)],
        }
    }

    pub fn transitive(f: TransitiveMap) -> Self {
        MapSpec {
            algebra: Arc::clone(f.algebra()),
            terms: vec![Primitive::Transitive(f)],
        }
    }

    pub fn additive_induced(
        algebra: &Arc<Algebra>,
        assign: BTreeMap<usize, AdditiveDerivation>,
    ) -> Result<Self, MapError> {
        let a = AdditiveInduced::new(algebra, assign)?;
        Self::new(algebra, vec![Primitive::AdditiveInduced(a)])
    }

    pub fn central_trace(
        algebra: &Arc<Algebra>,
        h: BTreeMap<usize, IntPoly>,
    ) -> Result<Self, MapError> {
        Self::new(algebra, vec![Primitive::CentralTrace(h)])
    }

    /// Witness map for class `i` with base point `t`; `f` must be nonzero and
    /// the host component must carry at least two classes.
    pub fn make_witness(
        algebra: &Arc<Algebra>,
        class: usize,
        t: usize,
        f: AdditiveDerivation,
    ) -> Result<Self, MapError> {
        let classes = algebra.classes();
        let host = classes.class(class)?.component;
        if !classes.class(class)?.vertices.contains(&t) {
            return Err(MapError::WitnessVertex { class, t });
        }
        if f.is_zero() {
            return Err(MapError::ZeroWitnessDerivation);
        }
        if classes.classes_in_component(host).len() < 2 {
            return Err(MapError::SingleClassComponent { component: host });
        }
        let w = Witness::new(algebra, class, t, f)?;
        Self::new(algebra, vec![Primitive::Witness(w)])
    }

    /// The additive derivation `r e_xy -> f_j(r) e_xy` on every component `j`.
    pub fn make_proper_part(
        algebra: &Arc<Algebra>,
        assign: BTreeMap<usize, AdditiveDerivation>,
    ) -> Result<Self, MapError> {
        Self::new(algebra, vec![Primitive::ProperPart(assign)])
    }

    pub fn algebra(&self) -> &Arc<Algebra> {
        &self.algebra
    }

    pub fn terms(&self) -> &[Primitive] {
        &self.terms
    }

    /// Sum of two specs over the same algebra.
    pub fn plus(mut self, other: MapSpec) -> Result<Self, MapError> {
        if *self.algebra != *other.algebra {
            return Err(MapError::StructureMismatch);
        }
        self.terms.extend(other.terms);
        Ok(self)
    }

    /// True when every primitive is an additive derivation of the algebra
    /// (inner, transitive or proper part).
    pub fn is_derivation_shaped(&self) -> bool {
        self.terms.iter().all(|t| {
            matches!(
                t,
                Primitive::Inner(_) | Primitive::Transitive(_) | Primitive::ProperPart(_)
            )
        })
    }

    pub fn eval(&self, beta: &FiElement) -> Result<FiElement, MapError> {
        if !beta.same_algebra(&self.algebra.zero()) {
            return Err(MapError::StructureMismatch);
        }
        let mut acc = Accumulator::default();
        for term in &self.terms {
            match term {
                Primitive::Inner(alpha) => acc.add_element(&alpha.bracket(beta)?),
                Primitive::Transitive(f) => acc.add_element(&f.apply(beta)),
                Primitive::AdditiveInduced(a) => a.apply(&self.algebra, beta, &mut acc),
                Primitive::CentralTrace(h) => {
                    let comps = self.algebra.components();
                    for (&j, poly) in h {
                        let c = beta.component_trace(j)?.eval_poly(poly);
                        if c.is_zero() {
                            continue;
                        }
                        for &x in comps.members(j)? {
                            acc.add(x, x, c.clone());
                        }
                    }
                }
                Primitive::Witness(w) => w.apply(&self.algebra, beta, &mut acc),
                Primitive::ProperPart(g) => {
                    let comps = self.algebra.components();
                    for ((x, y), r) in beta.entries() {
                        let d = g.get(&comps.label(x)).unwrap_or(&AdditiveDerivation::Zero);
                        acc.add(x, y, d.apply_unchecked(r));
                    }
                }
            }
        }
        Ok(self.algebra.from_entries(acc.0)?)
    }
}

impl BlackBoxMap for MapSpec {
    fn apply(&self, beta: &FiElement) -> FiElement {
        self.eval(beta)
            .unwrap_or_else(|e| panic!("map evaluation failed: {e}"))
    }
}

impl fmt::Display for MapSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let kinds: Vec<&str> = self.terms.iter().map(Primitive::kind).collect();
        write!(f, "{}", kinds.join(" + "))
    }
}

#[derive(Default)]
struct Accumulator(Vec<(usize, usize, RingValue)>);

impl Accumulator {
    fn add(&mut self, x: usize, y: usize, r: RingValue) {
        if !r.is_zero() {
            self.0.push((x, y, r));
        }
    }

    fn add_element(&mut self, e: &FiElement) {
        for ((x, y), r) in e.entries() {
            self.0.push((x, y, r.clone()));
        }
    }
}
