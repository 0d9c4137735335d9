//! Density evaluation, marginals and one-coordinate conditional slices.

use crate::basis1d::FamilyKind;
use crate::error::{HcrError, Result};
use crate::model::Model;
use crate::slice::ConditionalSlice;
use crate::Scalar;

/// `max(value, epsilon)`: a positive floor at the cost of exact normalization.
pub fn clamp<T: Scalar>(value: T, epsilon: T) -> T {
    value.max(epsilon)
}

impl<T: Scalar> Model<T> {
    /// `ρ(x) = Σ_f a_f f(x)` at a complete point; may be negative.
    pub fn evaluate(&self, x: &[T]) -> Result<T> {
        if x.len() != self.dim() {
            return Err(HcrError::DimensionMismatch {
                expected: self.dim(),
                found: x.len(),
            });
        }
        let opts: Vec<Option<T>> = x.iter().map(|&v| Some(v)).collect();
        self.partial_sum(&opts)
    }

    /// Marginal density of the known coordinates of `x`: only terms whose
    /// support is known contribute, since every other term integrates to 0.
    pub fn marginal_density(&self, x: &[Option<T>]) -> Result<T> {
        if x.len() != self.dim() {
            return Err(HcrError::DimensionMismatch {
                expected: self.dim(),
                found: x.len(),
            });
        }
        self.partial_sum(x)
    }

    /// Probability of a grid cell when every coordinate is discrete: the
    /// density times the cell volume `Π 1/v_i`.
    pub fn cell_probability(&self, x: &[T]) -> Result<T> {
        let mut volume = T::one();
        for fam in self.spec().families() {
            match fam.kind() {
                FamilyKind::DiscreteOrthonormal { levels } => volume /= T::count(levels),
                _ => {
                    return Err(HcrError::Unsupported(
                        "cell probability needs every coordinate discrete".into(),
                    ))
                }
            }
        }
        Ok(self.evaluate(x)? * volume)
    }

    /// Integral of the model over `[0, 1]^d`. Only the constant term survives
    /// integration, so this is its coefficient, exactly 1.
    pub fn total_mass(&self) -> T {
        self.terms()
            .iter()
            .filter(|t| t.index.is_constant())
            .map(|t| t.coefficient)
            .sum()
    }

    /// Model holding the terms whose support lies inside `keep`, coefficients
    /// unchanged. Integrating out the other coordinates removes exactly the
    /// remaining terms.
    pub fn marginalize(&self, keep: &[usize]) -> Model<T> {
        self.restricted(|t| t.index.support_iter().all(|i| keep.contains(&i)))
    }

    /// Density of coordinate `free` given the known coordinates of `known`.
    ///
    /// Numerator: terms with support inside `C ∪ {free}`, grouped by their
    /// order on `free`. Denominator: terms with support inside `C`.
    pub fn conditional_slice(
        &self,
        known: &[Option<T>],
        free: usize,
    ) -> Result<ConditionalSlice<T>> {
        let d = self.dim();
        if known.len() != d {
            return Err(HcrError::DimensionMismatch {
                expected: d,
                found: known.len(),
            });
        }
        if free >= d {
            return Err(HcrError::CoordinateOutOfRange {
                index: free,
                dim: d,
            });
        }
        if known[free].is_some() {
            return Err(HcrError::InvalidConfig(format!(
                "coordinate {free} is known, not free"
            )));
        }
        let family = self.spec().family(free).clone();
        let mut numerator = vec![T::zero(); family.max_order() + 1];
        for t in self.terms() {
            let j = &t.index;
            if !j.supported_by(|i| i == free || known[i].is_some()) {
                continue;
            }
            let mut factor = t.coefficient;
            for i in j.support_iter().filter(|&i| i != free) {
                let xi = known[i].expect("support checked");
                factor *= self.spec().family(i).eval(j.order(i), xi)?;
            }
            numerator[j.order(free)] += factor;
        }
        ConditionalSlice::new(free, family, numerator)
    }
}
