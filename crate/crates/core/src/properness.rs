//! The properness criterion and its two constructive sides.
//!
//! Every Lie n-derivation of the algebra has the proper form (an additive
//! derivation plus a central map killing `p_n` values) exactly when each
//! connected component hosts at most one edge class. When a component hosts
//! two, [`emit_witness`] builds a map that is not proper; otherwise
//! [`properize`] rewrites a decomposition into the proper form.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::algebra::Algebra;
use crate::decompose::DecompositionReport;
use crate::maps::{MapCombination, MapError, MapSpec, SharedMap};
use crate::preorder::EdgeClassification;
use crate::ring::{AdditiveDerivation, RingDescriptor, RingValue};
use crate::verify::{check_central_annihilating, Verdict, VerifyError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PropernessError {
    #[error("no nonzero additive derivation available on ring {0}")]
    NoDerivation(RingDescriptor),
    #[error("cannot properize: class derivation not identified from probes (class {0})")]
    Unfitted(usize),
    #[error("cannot properize: the decomposition did not complete")]
    NotDecomposable,
    #[error("cannot properize: {0}")]
    NotProper(Box<ClassMismatch>),
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Verify(#[from] VerifyError),
}

/// Two classes in one component.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Certificate {
    pub component: usize,
    pub first: usize,
    pub second: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PropernessVerdict {
    /// Component id to the classes it hosts, ascending.
    pub groups: Vec<Vec<usize>>,
    pub certificate: Option<Certificate>,
}

impl PropernessVerdict {
    pub fn proper_capable(&self) -> bool {
        self.certificate.is_none()
    }
}

impl fmt::Display for PropernessVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.certificate {
            None => write!(f, "proper-capable: every Lie n-derivation is proper"),
            Some(c) => write!(
                f,
                "not proper-capable: component {} hosts classes {} and {}",
                c.component, c.first, c.second
            ),
        }
    }
}

/// Groups classes by component; the certificate names the first component
/// with two classes and its two least classes.
pub fn properness_criterion(classes: &EdgeClassification) -> PropernessVerdict {
    let groups: Vec<Vec<usize>> = (0..classes.components().count())
        .map(|j| classes.classes_in_component(j))
        .collect();
    let certificate = groups
        .iter()
        .enumerate()
        .find(|(_, g)| g.len() >= 2)
        .map(|(component, g)| Certificate {
            component,
            first: g[0],
            second: g[1],
        });
    PropernessVerdict {
        groups,
        certificate,
    }
}

/// Two classes of one component whose functions differ at a pool scalar.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassMismatch {
    pub component: usize,
    pub first: usize,
    pub second: usize,
    pub scalar: RingValue,
    pub first_value: RingValue,
    pub second_value: RingValue,
}

impl fmt::Display for ClassMismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "component {}: class {} gives {} but class {} gives {} at {}",
            self.component, self.first, self.first_value, self.second, self.second_value, self.scalar
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ClassComparison {
    Pass { probes: usize },
    Fail(Box<ClassMismatch>),
}

impl ClassComparison {
    pub fn passed(&self) -> bool {
        matches!(self, ClassComparison::Pass { .. })
    }
}

impl fmt::Display for ClassComparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClassComparison::Pass { probes } => {
                write!(f, "no violation found in {probes} probes")
            }
            ClassComparison::Fail(m) => write!(f, "{m}"),
        }
    }
}

/// Compares the class probe tables of each component pairwise.
pub fn check_quasi_additive_proper(report: &DecompositionReport) -> ClassComparison {
    let verdict = properness_criterion(report.algebra.classes());
    let mut probes = 0;
    for (component, group) in verdict.groups.iter().enumerate() {
        for (a, &i) in group.iter().enumerate() {
            for &j in &group[a + 1..] {
                let (Some(ti), Some(tj)) = (report.class_probes.get(&i), report.class_probes.get(&j))
                else {
                    continue;
                };
                for ((r, vi), (_, vj)) in ti.iter().zip(tj) {
                    if vi != vj {
                        return ClassComparison::Fail(Box::new(ClassMismatch {
                            component,
                            first: i,
                            second: j,
                            scalar: r.clone(),
                            first_value: vi.clone(),
                            second_value: vj.clone(),
                        }));
                    }
                    probes += 1;
                }
            }
        }
    }
    ClassComparison::Pass { probes }
}

/// A non-proper Lie derivation when the criterion fails: `d/dt` on the
/// certificate's first class, based at its least vertex.
pub fn emit_witness(algebra: &Arc<Algebra>) -> Result<Option<MapSpec>, PropernessError> {
    let verdict = properness_criterion(algebra.classes());
    let Some(cert) = verdict.certificate else {
        return Ok(None);
    };
    if algebra.ring() != RingDescriptor::IntPoly {
        return Err(PropernessError::NoDerivation(algebra.ring()));
    }
    let class = algebra.classes().class(cert.first).map_err(MapError::from)?;
    let t = *class.vertices.iter().next().expect("classes have vertices");
    Ok(Some(MapSpec::make_witness(
        algebra,
        cert.first,
        t,
        AdditiveDerivation::ddt(),
    )?))
}

/// The proper form `D + κ` of a decomposed map.
#[derive(Clone)]
pub struct Properized {
    /// `ad_{e_L} + L_f + Ψ`.
    pub derivation: MapSpec,
    /// Component id to the derivation used by `Ψ`.
    pub per_component: BTreeMap<usize, AdditiveDerivation>,
    /// `L - D`.
    pub kappa: SharedMap,
    pub kappa_verdict: Verdict,
}

/// Builds `D = ad_{e_L} + L_f + Ψ` with one fitted derivation per component
/// and checks that `κ = L - D` is central and kills `p_n` values.
pub fn properize(report: &DecompositionReport) -> Result<Properized, PropernessError> {
    if !report.decomposable() {
        return Err(PropernessError::NotDecomposable);
    }
    if let ClassComparison::Fail(m) = check_quasi_additive_proper(report) {
        return Err(PropernessError::NotProper(m));
    }
    if let Some((&i, _)) = report.fitted.iter().find(|(_, d)| d.is_none()) {
        return Err(PropernessError::Unfitted(i));
    }
    let algebra = &report.algebra;
    let classes = algebra.classes();
    let mut per_component = BTreeMap::new();
    for j in 0..classes.components().count() {
        let mut fits = classes.classes_in_component(j).into_iter().map(|i| {
            report
                .fitted
                .get(&i)
                .cloned()
                .flatten()
                .ok_or(PropernessError::Unfitted(i))
        });
        let d = match fits.next() {
            None => AdditiveDerivation::Zero,
            Some(first) => first?,
        };
        per_component.insert(j, d);
    }
    let f = report.f.clone().ok_or(PropernessError::NotDecomposable)?;
    let derivation = MapSpec::inner(report.e_l.clone())
        .plus(MapSpec::transitive(f))?
        .plus(MapSpec::make_proper_part(algebra, per_component.clone())?)?;
    let kappa: SharedMap = Arc::new(
        MapCombination::of(Arc::clone(report.source())).minus(Arc::new(derivation.clone())),
    );
    let kappa_verdict =
        check_central_annihilating(kappa.as_ref(), algebra, report.n, &report.budget)?;
    Ok(Properized {
        derivation,
        per_component,
        kappa,
        kappa_verdict,
    })
}
