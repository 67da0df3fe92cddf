//! Elements of the incidence algebra of a finite pre-order over an exact ring.
//!
//! An [`FiElement`] is a sparse table `(x, y) -> r` supported on pairs
//! `x <= y`. Zero entries are never stored, so two elements are equal exactly
//! when their tables are equal.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::sync::Arc;

use thiserror::Error;

use crate::preorder::{Components, EdgeClassification, Preorder, PreorderError};
use crate::ring::{RingDescriptor, RingError, RingValue};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("elements belong to different algebras")]
    StructureMismatch,
    #[error("({0}, {1}) is not a pair of the order")]
    NotInOrder(usize, usize),
    #[error("p_n needs at least one argument")]
    EmptyCommutator,
    #[error("expected {expected} diagonal values, got {got}")]
    DiagonalLength { expected: usize, got: usize },
    #[error(transparent)]
    Ring(#[from] RingError),
    #[error(transparent)]
    Preorder(#[from] PreorderError),
}

/// A pre-order together with a coefficient ring and the combinatorial data
/// derived from the order.
#[derive(Debug, PartialEq, Eq)]
pub struct Algebra {
    preorder: Preorder,
    ring: RingDescriptor,
    classes: EdgeClassification,
}

impl Algebra {
    pub fn new(preorder: Preorder, ring: RingDescriptor) -> Arc<Algebra> {
        let classes = preorder.edge_classes();
        Arc::new(Algebra {
            preorder,
            ring,
            classes,
        })
    }

    pub fn preorder(&self) -> &Preorder {
        &self.preorder
    }

    pub fn ring(&self) -> RingDescriptor {
        self.ring
    }

    pub fn classes(&self) -> &EdgeClassification {
        &self.classes
    }

    pub fn components(&self) -> &Components {
        self.classes.components()
    }

    pub fn size(&self) -> usize {
        self.preorder.size()
    }

    pub fn zero(self: &Arc<Self>) -> FiElement {
        FiElement {
            algebra: Arc::clone(self),
            entries: BTreeMap::new(),
        }
    }

    /// `e_xy`.
    pub fn basis(self: &Arc<Self>, x: usize, y: usize) -> Result<FiElement, AlgebraError> {
        self.scaled_basis(RingValue::one(self.ring), x, y)
    }

    /// `r e_xy`.
    pub fn scaled_basis(
        self: &Arc<Self>,
        r: RingValue,
        x: usize,
        y: usize,
    ) -> Result<FiElement, AlgebraError> {
        self.from_entries([(x, y, r)])
    }

    /// The identity `δ = Σ e_xx`.
    pub fn identity(self: &Arc<Self>) -> FiElement {
        let one = RingValue::one(self.ring);
        self.diagonal(vec![one; self.size()])
            .expect("identity has the right length")
    }

    /// `Σ d_x e_xx`.
    pub fn diagonal(self: &Arc<Self>, values: Vec<RingValue>) -> Result<FiElement, AlgebraError> {
        if values.len() != self.size() {
            return Err(AlgebraError::DiagonalLength {
                expected: self.size(),
                got: values.len(),
            });
        }
        self.from_entries(values.into_iter().enumerate().map(|(x, r)| (x, x, r)))
    }

    /// `I_j`, the unit of component `j`.
    pub fn component_unit(self: &Arc<Self>, component: usize) -> Result<FiElement, AlgebraError> {
        let one = RingValue::one(self.ring);
        let members = self.components().members(component)?;
        self.from_entries(members.iter().map(|&x| (x, x, one.clone())))
    }

    /// Builds an element from entries, summing repeated pairs and dropping zeros.
    pub fn from_entries(
        self: &Arc<Self>,
        entries: impl IntoIterator<Item = (usize, usize, RingValue)>,
    ) -> Result<FiElement, AlgebraError> {
        let mut table: BTreeMap<(usize, usize), RingValue> = BTreeMap::new();
        for (x, y, r) in entries {
            if !self.preorder.leq(x, y) {
                return Err(AlgebraError::NotInOrder(x, y));
            }
            if r.descriptor() != self.ring {
                return Err(RingError::Mismatch {
                    left: self.ring,
                    right: r.descriptor(),
                }
                .into());
            }
            match table.get_mut(&(x, y)) {
                Some(v) => *v = &*v + &r,
                None => {
                    table.insert((x, y), r);
                }
            }
        }
        table.retain(|_, v| !v.is_zero());
        Ok(FiElement {
            algebra: Arc::clone(self),
            entries: table,
        })
    }
}

/// An element `Σ α(x, y) e_xy` of the incidence algebra.
#[derive(Clone)]
pub struct FiElement {
    algebra: Arc<Algebra>,
    entries: BTreeMap<(usize, usize), RingValue>,
}

impl PartialEq for FiElement {
    fn eq(&self, other: &Self) -> bool {
        self.same_algebra(other) && self.entries == other.entries
    }
}

impl Eq for FiElement {}

impl fmt::Debug for FiElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for FiElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.entries.is_empty() {
            return write!(f, "0");
        }
        let terms: Vec<String> = self
            .entries
            .iter()
            .map(|((x, y), r)| format!("({r})e{x},{y}"))
            .collect();
        write!(f, "{}", terms.join(" + "))
    }
}

/// The central decomposition `β = Σ c_j I_j`, one coefficient per component.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CenterWitness {
    pub coefficients: Vec<RingValue>,
}

impl FiElement {
    pub fn algebra(&self) -> &Arc<Algebra> {
        &self.algebra
    }

    pub fn ring(&self) -> RingDescriptor {
        self.algebra.ring
    }

    pub fn same_algebra(&self, other: &FiElement) -> bool {
        Arc::ptr_eq(&self.algebra, &other.algebra) || *self.algebra == *other.algebra
    }

    fn check(&self, other: &FiElement) -> Result<(), AlgebraError> {
        if self.same_algebra(other) {
            Ok(())
        } else {
            Err(AlgebraError::StructureMismatch)
        }
    }

    /// Nonzero entries in lexicographic order of `(x, y)`.
    pub fn entries(&self) -> impl Iterator<Item = ((usize, usize), &RingValue)> {
        self.entries.iter().map(|(&k, v)| (k, v))
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    /// `β(x, y)`, zero when unset or when `x` is not below `y`.
    pub fn get(&self, x: usize, y: usize) -> RingValue {
        self.entries
            .get(&(x, y))
            .cloned()
            .unwrap_or_else(|| RingValue::zero(self.ring()))
    }

    fn with_entries(&self, entries: BTreeMap<(usize, usize), RingValue>) -> FiElement {
        FiElement {
            algebra: Arc::clone(&self.algebra),
            entries,
        }
    }

    fn combine(&self, other: &FiElement, subtract: bool) -> FiElement {
        assert!(self.same_algebra(other), "elements belong to different algebras");
        let mut out = self.entries.clone();
        for (k, v) in &other.entries {
            let updated = match out.get(k) {
                Some(cur) if subtract => cur - v,
                Some(cur) => cur + v,
                None if subtract => -v,
                None => v.clone(),
            };
            if updated.is_zero() {
                out.remove(k);
            } else {
                out.insert(*k, updated);
            }
        }
        self.with_entries(out)
    }

    pub fn checked_add(&self, other: &FiElement) -> Result<FiElement, AlgebraError> {
        self.check(other)?;
        Ok(self.combine(other, false))
    }

    pub fn checked_sub(&self, other: &FiElement) -> Result<FiElement, AlgebraError> {
        self.check(other)?;
        Ok(self.combine(other, true))
    }

    /// `r β`.
    pub fn scale(&self, r: &RingValue) -> FiElement {
        let entries = self
            .entries
            .iter()
            .filter_map(|(k, v)| {
                let p = r * v;
                (!p.is_zero()).then_some((*k, p))
            })
            .collect();
        self.with_entries(entries)
    }

    /// Applies `g` to every stored entry and rebuilds the canonical table.
    pub fn map_entries(&self, mut g: impl FnMut(usize, usize, &RingValue) -> RingValue) -> FiElement {
        let entries = self
            .entries
            .iter()
            .filter_map(|(&(x, y), v)| {
                let w = g(x, y, v);
                (!w.is_zero()).then_some(((x, y), w))
            })
            .collect();
        self.with_entries(entries)
    }

    /// Convolution `(αβ)(x, y) = Σ_{x<=z<=y} α(x, z) β(z, y)`.
    pub fn convolve(&self, other: &FiElement) -> Result<FiElement, AlgebraError> {
        self.check(other)?;
        let mut out: BTreeMap<(usize, usize), RingValue> = BTreeMap::new();
        for (&(x, z), a) in &self.entries {
            for (&(_, y), b) in other.entries.range((z, 0)..(z + 1, 0)) {
                let term = a * b;
                match out.get_mut(&(x, y)) {
                    Some(acc) => *acc = &*acc + &term,
                    None => {
                        out.insert((x, y), term);
                    }
                }
            }
        }
        out.retain(|_, v| !v.is_zero());
        Ok(self.with_entries(out))
    }

    /// `[α, β] = αβ - βα`.
    pub fn bracket(&self, other: &FiElement) -> Result<FiElement, AlgebraError> {
        let ab = self.convolve(other)?;
        let ba = other.convolve(self)?;
        Ok(ab.combine(&ba, true))
    }

    /// Split into diagonal part `β^D` and strict part `β^T`.
    pub fn split(&self) -> (FiElement, FiElement) {
        let (diag, strict): (BTreeMap<_, _>, BTreeMap<_, _>) = self
            .entries
            .iter()
            .map(|(k, v)| (*k, v.clone()))
            .partition(|((x, y), _)| x == y);
        (self.with_entries(diag), self.with_entries(strict))
    }

    pub fn diagonal_part(&self) -> FiElement {
        self.split().0
    }

    pub fn strict_part(&self) -> FiElement {
        self.split().1
    }

    pub fn is_diagonal(&self) -> bool {
        self.entries.keys().all(|(x, y)| x == y)
    }

    /// `β|_u^v`: entries with `u <= x <= y <= v`.
    pub fn restrict(&self, u: usize, v: usize) -> Result<FiElement, AlgebraError> {
        let p = self.algebra.preorder();
        if !p.leq(u, v) {
            return Err(AlgebraError::NotInOrder(u, v));
        }
        let entries = self
            .entries
            .iter()
            .filter(|(&(x, y), _)| p.leq(u, x) && p.leq(y, v))
            .map(|(k, r)| (*k, r.clone()))
            .collect();
        Ok(self.with_entries(entries))
    }

    /// Entries inside component `j`.
    pub fn project_component(&self, component: usize) -> Result<FiElement, AlgebraError> {
        let comps = self.algebra.components();
        comps.members(component)?;
        let entries = self
            .entries
            .iter()
            .filter(|(&(x, _), _)| comps.label(x) == component)
            .map(|(k, r)| (*k, r.clone()))
            .collect();
        Ok(self.with_entries(entries))
    }

    /// `Σ_{x in X_j} β(x, x)`.
    pub fn component_trace(&self, component: usize) -> Result<RingValue, AlgebraError> {
        let comps = self.algebra.components();
        let mut acc = RingValue::zero(self.ring());
        for &x in comps.members(component)? {
            if let Some(v) = self.entries.get(&(x, x)) {
                acc = &acc + v;
            }
        }
        Ok(acc)
    }

    /// Some witness iff `β` is diagonal and constant on each component.
    pub fn is_central(&self) -> Option<CenterWitness> {
        if !self.is_diagonal() {
            return None;
        }
        let comps = self.algebra.components();
        let mut coefficients = Vec::with_capacity(comps.count());
        for members in comps.iter() {
            let c = self.get(members[0], members[0]);
            if members.iter().any(|&x| self.get(x, x) != c) {
                return None;
            }
            coefficients.push(c);
        }
        Some(CenterWitness { coefficients })
    }
}

/// Left-nested commutator `p_n(x_1, ..., x_n) = [p_{n-1}(x_1, ..., x_{n-1}), x_n]`.
pub fn p_n(args: &[FiElement]) -> Result<FiElement, AlgebraError> {
    let (first, rest) = args.split_first().ok_or(AlgebraError::EmptyCommutator)?;
    rest.iter().try_fold(first.clone(), |acc, x| acc.bracket(x))
}

impl Add for &FiElement {
    type Output = FiElement;
    fn add(self, rhs: &FiElement) -> FiElement {
        self.combine(rhs, false)
    }
}

impl Sub for &FiElement {
    type Output = FiElement;
    fn sub(self, rhs: &FiElement) -> FiElement {
        self.combine(rhs, true)
    }
}

impl Neg for &FiElement {
    type Output = FiElement;
    fn neg(self) -> FiElement {
        self.map_entries(|_, _, v| -v)
    }
}
