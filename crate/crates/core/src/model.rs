use std::collections::BTreeMap;

use crate::dataset::Transform;
use crate::error::{HcrError, Result};
use crate::tensor_basis::{BasisSpec, MultiIndex};
use crate::Scalar;

/// Coordinate subset, sorted ascending (0-based).
pub type Subset = Vec<usize>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvidenceFlag {
    Ok,
    /// `|K_C| = 0`: the coefficient is 0 by convention.
    NoEvidence,
    /// `|K_C| = 1`: the standard error is undefined.
    SingleRecord,
}

impl EvidenceFlag {
    pub fn from_count(count: usize) -> Self {
        match count {
            0 => EvidenceFlag::NoEvidence,
            1 => EvidenceFlag::SingleRecord,
            _ => EvidenceFlag::Ok,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Term<T> {
    pub index: MultiIndex,
    pub coefficient: T,
    /// Standard error of the coefficient; `None` when undefined.
    pub uncertainty: Option<T>,
}

/// Fitted density `ρ(x) = Σ_f a_f f(x)` on `[0, 1]^d`.
///
/// Terms follow the canonical order of `spec.selected()`. The constant term
/// always has coefficient 1.
#[derive(Debug, Clone, PartialEq)]
pub struct Model<T> {
    spec: BasisSpec<T>,
    terms: Vec<Term<T>>,
    evidence: BTreeMap<Subset, usize>,
    names: Vec<String>,
    transforms: Vec<Transform<T>>,
}

impl<T: Scalar> Model<T> {
    /// Uniform density over `spec`: every coefficient but the constant is 0.
    pub fn uniform(spec: BasisSpec<T>) -> Self {
        let d = spec.dim();
        let terms = spec
            .selected()
            .iter()
            .map(|j| Term {
                coefficient: if j.is_constant() { T::one() } else { T::zero() },
                index: j.clone(),
                uncertainty: None,
            })
            .collect();
        let evidence = spec.supports().into_iter().map(|s| (s, 0)).collect();
        Self {
            spec,
            terms,
            evidence,
            names: (1..=d).map(|i| format!("x{i}")).collect(),
            transforms: vec![Transform::Identity; d],
        }
    }

    /// Uniform model with the listed coefficients set.
    pub fn with_coefficients(
        spec: BasisSpec<T>,
        coefficients: impl IntoIterator<Item = (MultiIndex, T)>,
    ) -> Result<Self> {
        let mut m = Self::uniform(spec);
        for (j, a) in coefficients {
            m.set_coefficient(&j, a)?;
        }
        Ok(m)
    }

    pub(crate) fn from_parts(
        spec: BasisSpec<T>,
        terms: Vec<Term<T>>,
        evidence: BTreeMap<Subset, usize>,
    ) -> Self {
        let d = spec.dim();
        Self {
            spec,
            terms,
            evidence,
            names: (1..=d).map(|i| format!("x{i}")).collect(),
            transforms: vec![Transform::Identity; d],
        }
    }

    pub fn with_coordinates(
        mut self,
        names: Vec<String>,
        transforms: Vec<Transform<T>>,
    ) -> Result<Self> {
        let d = self.dim();
        if names.len() != d || transforms.len() != d {
            return Err(HcrError::DimensionMismatch {
                expected: d,
                found: if names.len() != d {
                    names.len()
                } else {
                    transforms.len()
                },
            });
        }
        self.names = names;
        self.transforms = transforms;
        Ok(self)
    }

    pub fn spec(&self) -> &BasisSpec<T> {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.spec.dim()
    }

    pub fn terms(&self) -> &[Term<T>] {
        &self.terms
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn transforms(&self) -> &[Transform<T>] {
        &self.transforms
    }

    /// Tracked evidence counts `|K_C|`, keyed by subset.
    pub fn evidence(&self) -> &BTreeMap<Subset, usize> {
        &self.evidence
    }

    pub fn evidence_for(&self, support: &[usize]) -> usize {
        self.evidence.get(support).copied().unwrap_or(0)
    }

    pub fn flag(&self, term: &Term<T>) -> EvidenceFlag {
        EvidenceFlag::from_count(self.evidence_for(&term.index.support()))
    }

    pub fn coefficient(&self, j: &MultiIndex) -> Option<T> {
        self.spec.position(j).map(|p| self.terms[p].coefficient)
    }

    /// Sets a non-constant coefficient.
    pub fn set_coefficient(&mut self, j: &MultiIndex, value: T) -> Result<()> {
        if j.is_constant() {
            return Err(HcrError::InvalidConfig(
                "the constant coefficient is fixed at 1".into(),
            ));
        }
        let p = self
            .spec
            .position(j)
            .ok_or_else(|| HcrError::InvalidBasis(format!("index {j} is not selected")))?;
        self.terms[p].coefficient = value;
        Ok(())
    }

    pub fn is_uniform(&self) -> bool {
        self.terms.len() == 1
    }

    pub(crate) fn terms_mut(&mut self) -> &mut [Term<T>] {
        &mut self.terms
    }

    pub(crate) fn evidence_mut(&mut self) -> &mut BTreeMap<Subset, usize> {
        &mut self.evidence
    }

    /// Keeps the constant and the terms accepted by `keep`.
    pub(crate) fn restricted(&self, mut keep: impl FnMut(&Term<T>) -> bool) -> Self {
        let terms: Vec<Term<T>> = self
            .terms
            .iter()
            .filter(|t| t.index.is_constant() || keep(t))
            .cloned()
            .collect();
        let kept: std::collections::BTreeSet<&MultiIndex> =
            terms.iter().map(|t| &t.index).collect();
        let spec = self.spec.retain(|j| kept.contains(j));
        let supports: std::collections::BTreeSet<Subset> = spec.supports().into_iter().collect();
        let evidence = self
            .evidence
            .iter()
            .filter(|(s, _)| supports.contains(*s))
            .map(|(s, &c)| (s.clone(), c))
            .collect();
        Self {
            spec,
            terms,
            evidence,
            names: self.names.clone(),
            transforms: self.transforms.clone(),
        }
    }

    /// `Σ_{f ≠ ∅} a_f f(x)` over terms whose support is known in `x`, plus the constant.
    pub(crate) fn partial_sum(&self, x: &[Option<T>]) -> Result<T> {
        let mut total = T::zero();
        for t in &self.terms {
            if t.index.supported_by(|i| x[i].is_some()) {
                total += t.coefficient * self.spec.eval_function(&t.index, x)?;
            }
        }
        Ok(total)
    }
}
