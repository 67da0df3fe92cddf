//! Exact commutative rings and their additive derivations.
//!
//! Rings form a closed set: the integers, the rationals, residues modulo a
//! fixed modulus, and integer polynomials in one indeterminate `t`. Every
//! [`RingValue`] carries enough information to recover its
//! [`RingDescriptor`], so mixing values from different rings is detected
//! rather than silently coerced.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::Value;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RingError {
    #[error("ring mismatch: {left} vs {right}")]
    Mismatch {
        left: RingDescriptor,
        right: RingDescriptor,
    },
    #[error("modulus must be positive")]
    ZeroModulus,
    #[error("derivation {derivation} is not defined on ring {ring}")]
    DerivationRing {
        derivation: String,
        ring: RingDescriptor,
    },
    #[error("cannot parse {ring} value from {input}")]
    Parse { ring: RingDescriptor, input: String },
    #[error("unknown ring descriptor `{0}` (expected int, rat, mod:M or intpoly)")]
    UnknownDescriptor(String),
}

/// Which ring a value lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RingDescriptor {
    Integer,
    Rational,
    Modular(u64),
    IntPoly,
}

impl fmt::Display for RingDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RingDescriptor::Integer => write!(f, "int"),
            RingDescriptor::Rational => write!(f, "rat"),
            RingDescriptor::Modular(m) => write!(f, "mod:{m}"),
            RingDescriptor::IntPoly => write!(f, "intpoly"),
        }
    }
}

impl FromStr for RingDescriptor {
    type Err = RingError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "int" | "integer" => Ok(RingDescriptor::Integer),
            "rat" | "rational" => Ok(RingDescriptor::Rational),
            "intpoly" | "poly" => Ok(RingDescriptor::IntPoly),
            other => {
                let m = other
                    .strip_prefix("mod:")
                    .and_then(|m| m.parse::<u64>().ok())
                    .ok_or_else(|| RingError::UnknownDescriptor(other.to_string()))?;
                if m == 0 {
                    return Err(RingError::ZeroModulus);
                }
                Ok(RingDescriptor::Modular(m))
            }
        }
    }
}

/// Outcome of the torsion-freeness test for a given `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Admissibility {
    Admissible,
    /// `torsion * r == 0` has a nonzero solution `r`.
    Inadmissible { torsion: u64 },
}

impl Admissibility {
    pub fn is_admissible(self) -> bool {
        matches!(self, Admissibility::Admissible)
    }
}

/// Checks that the ring is 2-torsionfree and (n-1)-torsionfree.
///
/// Only `Modular(m)` can fail: it needs `gcd(m, 2) = gcd(m, n - 1) = 1`.
pub fn validate_torsionfree(ring: RingDescriptor, n: u64) -> Admissibility {
    let RingDescriptor::Modular(m) = ring else {
        return Admissibility::Admissible;
    };
    for k in [2, n.saturating_sub(1)] {
        if k == 0 || m.gcd(&k) != 1 {
            return Admissibility::Inadmissible { torsion: k };
        }
    }
    Admissibility::Admissible
}

/// Integer polynomial in `t`, constant term first, no trailing zeros.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct IntPoly(Vec<BigInt>);

impl IntPoly {
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        IntPoly(coeffs)
    }

    pub fn from_i64s(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn zero() -> Self {
        IntPoly(Vec::new())
    }

    pub fn constant(c: BigInt) -> Self {
        Self::new(vec![c])
    }

    /// The indeterminate `t`.
    pub fn t() -> Self {
        Self::from_i64s(&[0, 1])
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.0.len().checked_sub(1)
    }

    pub fn coeff(&self, i: usize) -> BigInt {
        self.0.get(i).cloned().unwrap_or_default()
    }

    pub fn derivative(&self) -> IntPoly {
        IntPoly::new(
            self.0
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * BigInt::from(i))
                .collect(),
        )
    }

    fn add_ref(&self, other: &IntPoly) -> IntPoly {
        let len = self.0.len().max(other.0.len());
        IntPoly::new((0..len).map(|i| self.coeff(i) + other.coeff(i)).collect())
    }

    fn neg_ref(&self) -> IntPoly {
        IntPoly(self.0.iter().map(|c| -c).collect())
    }

    fn mul_ref(&self, other: &IntPoly) -> IntPoly {
        if self.is_zero() || other.is_zero() {
            return IntPoly::zero();
        }
        let mut out = vec![BigInt::zero(); self.0.len() + other.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in other.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        IntPoly::new(out)
    }
}

impl fmt::Display for IntPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.0.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let sign = if c.is_negative() { "-" } else { "+" };
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            let mag = c.abs();
            match i {
                0 => write!(f, "{mag}")?,
                _ => {
                    if !mag.is_one() {
                        write!(f, "{mag}")?;
                    }
                    if i == 1 {
                        write!(f, "t")?;
                    } else {
                        write!(f, "t^{i}")?;
                    }
                }
            }
        }
        Ok(())
    }
}

/// An exact element of one of the supported rings.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum RingValue {
    Integer(BigInt),
    /// Always in lowest terms with positive denominator (guaranteed by `BigRational`).
    Rational(BigRational),
    Modular { residue: u64, modulus: u64 },
    Poly(IntPoly),
}

impl RingValue {
    pub fn descriptor(&self) -> RingDescriptor {
        match self {
            RingValue::Integer(_) => RingDescriptor::Integer,
            RingValue::Rational(_) => RingDescriptor::Rational,
            RingValue::Modular { modulus, .. } => RingDescriptor::Modular(*modulus),
            RingValue::Poly(_) => RingDescriptor::IntPoly,
        }
    }

    pub fn zero(ring: RingDescriptor) -> Self {
        Self::from_int(ring, &BigInt::zero())
    }

    pub fn one(ring: RingDescriptor) -> Self {
        Self::from_int(ring, &BigInt::one())
    }

    pub fn from_i64(ring: RingDescriptor, k: i64) -> Self {
        Self::from_int(ring, &BigInt::from(k))
    }

    /// Image of an integer under the unique ring map from Z.
    pub fn from_int(ring: RingDescriptor, k: &BigInt) -> Self {
        match ring {
            RingDescriptor::Integer => RingValue::Integer(k.clone()),
            RingDescriptor::Rational => RingValue::Rational(BigRational::from_integer(k.clone())),
            RingDescriptor::Modular(m) => RingValue::Modular {
                residue: k.mod_floor(&BigInt::from(m)).to_u64().unwrap_or(0),
                modulus: m,
            },
            RingDescriptor::IntPoly => RingValue::Poly(IntPoly::constant(k.clone())),
        }
    }

    pub fn poly(p: IntPoly) -> Self {
        RingValue::Poly(p)
    }

    pub fn rational(numer: i64, denom: i64) -> Self {
        RingValue::Rational(BigRational::new(numer.into(), denom.into()))
    }

    pub fn modular(k: i64, modulus: u64) -> Self {
        Self::from_int(RingDescriptor::Modular(modulus), &BigInt::from(k))
    }

    pub fn is_zero(&self) -> bool {
        match self {
            RingValue::Integer(v) => v.is_zero(),
            RingValue::Rational(v) => v.is_zero(),
            RingValue::Modular { residue, .. } => *residue == 0,
            RingValue::Poly(p) => p.is_zero(),
        }
    }

    fn check(&self, other: &RingValue) -> Result<(), RingError> {
        let (l, r) = (self.descriptor(), other.descriptor());
        if l == r {
            Ok(())
        } else {
            Err(RingError::Mismatch { left: l, right: r })
        }
    }

    pub fn checked_add(&self, other: &RingValue) -> Result<RingValue, RingError> {
        self.check(other)?;
        Ok(self.binary(other, Op::Add))
    }

    pub fn checked_sub(&self, other: &RingValue) -> Result<RingValue, RingError> {
        self.check(other)?;
        Ok(self.binary(other, Op::Sub))
    }

    pub fn checked_mul(&self, other: &RingValue) -> Result<RingValue, RingError> {
        self.check(other)?;
        Ok(self.binary(other, Op::Mul))
    }

    pub fn checked_eq(&self, other: &RingValue) -> Result<bool, RingError> {
        self.check(other)?;
        Ok(self == other)
    }

    fn binary(&self, other: &RingValue, op: Op) -> RingValue {
        use RingValue::*;
        match (self, other) {
            (Integer(a), Integer(b)) => Integer(op.apply(a, b)),
            (Rational(a), Rational(b)) => Rational(match op {
                Op::Add => a + b,
                Op::Sub => a - b,
                Op::Mul => a * b,
            }),
            (Modular { residue: a, modulus }, Modular { residue: b, .. }) => {
                let m = *modulus as u128;
                let (a, b) = (*a as u128, *b as u128);
                let r = match op {
                    Op::Add => (a + b) % m,
                    Op::Sub => (a + m - b) % m,
                    Op::Mul => (a * b) % m,
                };
                Modular {
                    residue: r as u64,
                    modulus: *modulus,
                }
            }
            (Poly(a), Poly(b)) => Poly(match op {
                Op::Add => a.add_ref(b),
                Op::Sub => a.add_ref(&b.neg_ref()),
                Op::Mul => a.mul_ref(b),
            }),
            (a, b) => panic!(
                "ring mismatch in arithmetic: {} vs {}",
                a.descriptor(),
                b.descriptor()
            ),
        }
    }

    /// `k * self` for an integer `k`.
    pub fn times_int(&self, k: i64) -> RingValue {
        self * &RingValue::from_i64(self.descriptor(), k)
    }

    /// Evaluates an integer polynomial at this value.
    pub fn eval_poly(&self, h: &IntPoly) -> RingValue {
        let ring = self.descriptor();
        let mut acc = RingValue::zero(ring);
        for c in h.coeffs().iter().rev() {
            acc = &(&acc * self) + &RingValue::from_int(ring, c);
        }
        acc
    }

    /// Serialized form: integers as decimal strings, rationals as `p/q`,
    /// residues as `k mod m`, polynomials as coefficient arrays.
    pub fn to_json(&self) -> Value {
        match self {
            RingValue::Poly(p) => Value::Array(
                p.coeffs()
                    .iter()
                    .map(|c| Value::String(c.to_string()))
                    .collect(),
            ),
            other => Value::String(other.to_string()),
        }
    }

    pub fn from_json(ring: RingDescriptor, value: &Value) -> Result<RingValue, RingError> {
        let fail = || RingError::Parse {
            ring,
            input: value.to_string(),
        };
        match (ring, value) {
            (RingDescriptor::IntPoly, Value::Array(items)) => {
                let coeffs = items
                    .iter()
                    .map(|c| json_integer(c).ok_or_else(fail))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(RingValue::Poly(IntPoly::new(coeffs)))
            }
            (_, Value::Number(_)) => {
                let k = json_integer(value).ok_or_else(fail)?;
                Ok(RingValue::from_int(ring, &k))
            }
            (_, Value::String(s)) => RingValue::parse(ring, s),
            _ => Err(fail()),
        }
    }

    pub fn parse(ring: RingDescriptor, s: &str) -> Result<RingValue, RingError> {
        let fail = || RingError::Parse {
            ring,
            input: s.to_string(),
        };
        let s = s.trim();
        match ring {
            RingDescriptor::Integer | RingDescriptor::IntPoly => {
                let k = BigInt::from_str(s).map_err(|_| fail())?;
                Ok(RingValue::from_int(ring, &k))
            }
            RingDescriptor::Rational => {
                let (p, q) = match s.split_once('/') {
                    Some((p, q)) => (p.trim(), q.trim()),
                    None => (s, "1"),
                };
                let p = BigInt::from_str(p).map_err(|_| fail())?;
                let q = BigInt::from_str(q).map_err(|_| fail())?;
                if q.is_zero() {
                    return Err(fail());
                }
                Ok(RingValue::Rational(BigRational::new(p, q)))
            }
            RingDescriptor::Modular(m) => {
                let k = match s.split_once("mod") {
                    Some((k, modulus)) => {
                        if modulus.trim().parse::<u64>().ok() != Some(m) {
                            return Err(fail());
                        }
                        k.trim()
                    }
                    None => s,
                };
                let k = BigInt::from_str(k).map_err(|_| fail())?;
                Ok(RingValue::from_int(ring, &k))
            }
        }
    }
}

fn json_integer(value: &Value) -> Option<BigInt> {
    match value {
        Value::Number(n) => n.as_i64().map(BigInt::from),
        Value::String(s) => BigInt::from_str(s.trim()).ok(),
        _ => None,
    }
}

#[derive(Clone, Copy)]
enum Op {
    Add,
    Sub,
    Mul,
}

impl Op {
    fn apply(self, a: &BigInt, b: &BigInt) -> BigInt {
        match self {
            Op::Add => a + b,
            Op::Sub => a - b,
            Op::Mul => a * b,
        }
    }
}

impl fmt::Display for RingValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RingValue::Integer(v) => write!(f, "{v}"),
            RingValue::Rational(v) => {
                if v.denom().is_one() {
                    write!(f, "{}", v.numer())
                } else {
                    write!(f, "{}/{}", v.numer(), v.denom())
                }
            }
            RingValue::Modular { residue, modulus } => write!(f, "{residue} mod {modulus}"),
            RingValue::Poly(p) => write!(f, "{p}"),
        }
    }
}

// Operator impls panic on ring mismatch; callers that cannot guarantee a
// shared descriptor use the `checked_*` methods.
impl Add for &RingValue {
    type Output = RingValue;
    fn add(self, rhs: &RingValue) -> RingValue {
        self.binary(rhs, Op::Add)
    }
}

impl Sub for &RingValue {
    type Output = RingValue;
    fn sub(self, rhs: &RingValue) -> RingValue {
        self.binary(rhs, Op::Sub)
    }
}

impl Mul for &RingValue {
    type Output = RingValue;
    fn mul(self, rhs: &RingValue) -> RingValue {
        self.binary(rhs, Op::Mul)
    }
}

impl Neg for &RingValue {
    type Output = RingValue;
    fn neg(self) -> RingValue {
        &RingValue::zero(self.descriptor()) - self
    }
}

/// Additive derivations `d` of a ring: `d(r + s) = d(r) + d(s)` and
/// `d(rs) = d(r) s + r d(s)`.
///
/// On the integers, rationals and residue rings every additive derivation
/// vanishes, so the only nonzero family is `p(t) d/dt` on integer polynomials.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AdditiveDerivation {
    Zero,
    /// `q(t) -> p(t) q'(t)`; `p` is never the zero polynomial.
    PolyTimesDdt(IntPoly),
}

impl AdditiveDerivation {
    /// Normalizes `0 * d/dt` to `Zero`.
    pub fn poly_times_ddt(p: IntPoly) -> Self {
        if p.is_zero() {
            AdditiveDerivation::Zero
        } else {
            AdditiveDerivation::PolyTimesDdt(p)
        }
    }

    /// Plain `d/dt`.
    pub fn ddt() -> Self {
        AdditiveDerivation::PolyTimesDdt(IntPoly::constant(BigInt::one()))
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, AdditiveDerivation::Zero)
    }

    pub fn supports(&self, ring: RingDescriptor) -> bool {
        match self {
            AdditiveDerivation::Zero => true,
            AdditiveDerivation::PolyTimesDdt(_) => ring == RingDescriptor::IntPoly,
        }
    }

    pub fn check_ring(&self, ring: RingDescriptor) -> Result<(), RingError> {
        if self.supports(ring) {
            Ok(())
        } else {
            Err(RingError::DerivationRing {
                derivation: self.to_string(),
                ring,
            })
        }
    }

    pub fn apply(&self, r: &RingValue) -> Result<RingValue, RingError> {
        self.check_ring(r.descriptor())?;
        Ok(self.apply_unchecked(r))
    }

    /// Panics when the derivation is not defined on `r`'s ring.
    pub fn apply_unchecked(&self, r: &RingValue) -> RingValue {
        match (self, r) {
            (AdditiveDerivation::Zero, r) => RingValue::zero(r.descriptor()),
            (AdditiveDerivation::PolyTimesDdt(p), RingValue::Poly(q)) => {
                RingValue::Poly(p.mul_ref(&q.derivative()))
            }
            (d, r) => panic!("derivation {d} applied to {} value", r.descriptor()),
        }
    }
}

impl fmt::Display for AdditiveDerivation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AdditiveDerivation::Zero => write!(f, "0"),
            AdditiveDerivation::PolyTimesDdt(p) => write!(f, "({p}) d/dt"),
        }
    }
}
