//! Coefficient estimation: per-subset averaging, online updates, pruning.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::dataset::{Dataset, Record};
use crate::error::{HcrError, Result};
use crate::model::{Model, Subset, Term};
use crate::tensor_basis::{BasisSpec, MultiIndex};
use crate::Scalar;

/// Fits `a_f = mean of f over K_C`, where `K_C` holds the records knowing every
/// coordinate of `f`'s support `C`.
///
/// The standard error is the `(n-1)` sample deviation of `f` over `K_C` divided
/// by `√|K_C|`. With `|K_C| = 0` the coefficient is 0 and flagged; with
/// `|K_C| = 1` the uncertainty is left undefined.
pub fn fit<T: Scalar>(spec: &BasisSpec<T>, data: &Dataset<T>) -> Result<Model<T>> {
    if data.dim() != spec.dim() {
        return Err(HcrError::DimensionMismatch {
            expected: spec.dim(),
            found: data.dim(),
        });
    }
    let table = value_table(spec, data)?;

    let terms = spec
        .selected()
        .par_iter()
        .map(|j| {
            if j.is_constant() {
                return Term {
                    index: j.clone(),
                    coefficient: T::one(),
                    uncertainty: None,
                };
            }
            let support = j.support();
            let mut values = Vec::new();
            for row in &table {
                if let Some(v) = product_on(row, j, &support) {
                    values.push(v);
                }
            }
            let (coefficient, uncertainty) = mean_and_error(&values);
            Term {
                index: j.clone(),
                coefficient,
                uncertainty,
            }
        })
        .collect::<Vec<_>>();

    let evidence: BTreeMap<Subset, usize> = spec
        .supports()
        .into_iter()
        .map(|s| {
            let n = data.evidence_count(&s);
            (s, n)
        })
        .collect();

    Model::from_parts(spec.clone(), terms, evidence).with_coordinates(
        data.names().to_vec(),
        vec![crate::dataset::Transform::Identity; data.dim()],
    )
}

/// Per record, per coordinate: `f_0(x_i) ..= f_max(x_i)`, or `None` when missing.
fn value_table<T: Scalar>(
    spec: &BasisSpec<T>,
    data: &Dataset<T>,
) -> Result<Vec<Vec<Option<Vec<T>>>>> {
    data.records()
        .iter()
        .map(|r| {
            r.values()
                .iter()
                .zip(spec.families())
                .map(|(v, fam)| v.map(|x| fam.eval_all(x)).transpose())
                .collect()
        })
        .collect()
}

fn product_on<T: Scalar>(row: &[Option<Vec<T>>], j: &MultiIndex, support: &[usize]) -> Option<T> {
    let mut v = T::one();
    for &i in support {
        v *= row[i].as_ref()?[j.order(i)];
    }
    Some(v)
}

fn mean_and_error<T: Scalar>(values: &[T]) -> (T, Option<T>) {
    let n = values.len();
    if n == 0 {
        return (T::zero(), None);
    }
    let nf = T::count(n);
    let mean = values.iter().copied().sum::<T>() / nf;
    if n == 1 {
        return (mean, None);
    }
    let ss: T = values.iter().map(|&v| (v - mean) * (v - mean)).sum();
    let sd = (ss / T::count(n - 1)).sqrt();
    (mean, Some(sd / nf.sqrt()))
}

impl<T: Scalar> Model<T> {
    /// Exponential moving average step `a_f ← (1 - λ) a_f + λ f(x)` for every
    /// term whose support is known in `x`; other terms are untouched.
    pub fn adapt(&mut self, x: &Record<T>, lambda: T) -> Result<()> {
        if !(lambda > T::zero() && lambda < T::one()) {
            return Err(HcrError::InvalidRate(lambda.as_f64()));
        }
        if x.dim() != self.dim() {
            return Err(HcrError::DimensionMismatch {
                expected: self.dim(),
                found: x.dim(),
            });
        }
        let vals = x.values();
        // evaluate first so a bad value leaves the model unchanged
        let mut updates = Vec::new();
        for (p, t) in self.terms().iter().enumerate() {
            if t.index.is_constant() || !t.index.supported_by(|i| vals[i].is_some()) {
                continue;
            }
            updates.push((p, self.spec().eval_function(&t.index, vals)?));
        }
        let keep = T::one() - lambda;
        let terms = self.terms_mut();
        for (p, f) in updates {
            terms[p].coefficient = keep * terms[p].coefficient + lambda * f;
        }
        for (subset, count) in self.evidence_mut().iter_mut() {
            if subset.iter().all(|&i| vals[i].is_some()) {
                *count += 1;
            }
        }
        Ok(())
    }

    /// Drops terms with `|a_f| < threshold · σ_f`; terms without evidence go too
    /// when the threshold is positive. The constant is never removed.
    pub fn prune(&self, threshold_sigmas: T) -> (Model<T>, PruneReport<T>) {
        let mut removed = Vec::new();
        let pruned = self.restricted(|t| {
            let drop = threshold_sigmas > T::zero()
                && match t.uncertainty {
                    Some(s) => t.coefficient.abs() < threshold_sigmas * s,
                    None => self.evidence_for(&t.index.support()) == 0,
                };
            if drop {
                removed.push(t.clone());
            }
            !drop
        });
        (pruned, PruneReport { removed })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PruneReport<T> {
    pub removed: Vec<Term<T>>,
}

/// Learning rates decaying geometrically from `start` to `end` over `horizon`
/// steps, then holding at `end`.
#[derive(Debug, Clone)]
pub struct LearningRateSchedule<T> {
    start: T,
    end: T,
    horizon: usize,
    step: usize,
}

impl<T: Scalar> LearningRateSchedule<T> {
    pub fn new(start: T, end: T, horizon: usize) -> Result<Self> {
        for r in [start, end] {
            if !(r > T::zero() && r < T::one()) {
                return Err(HcrError::InvalidRate(r.as_f64()));
            }
        }
        Ok(Self {
            start,
            end,
            horizon: horizon.max(1),
            step: 0,
        })
    }

    /// 0.05 decaying to 0.001.
    pub fn standard(horizon: usize) -> Self {
        Self::new(T::lit(0.05), T::lit(0.001), horizon).expect("valid rates")
    }

    pub fn rate_at(&self, step: usize) -> T {
        if step + 1 >= self.horizon {
            return self.end;
        }
        let t = T::count(step) / T::count(self.horizon - 1);
        self.start * (self.end / self.start).powf(t)
    }
}

impl<T: Scalar> Iterator for LearningRateSchedule<T> {
    type Item = T;

    fn next(&mut self) -> Option<T> {
        let r = self.rate_at(self.step);
        self.step += 1;
        Some(r)
    }
}
