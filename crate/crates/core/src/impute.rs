//! Sequential one-coordinate imputation from conditional slices.

use crate::dataset::Record;
use crate::error::{HcrError, Result};
use crate::model::Model;
use crate::slice::{ConditionalSlice, SliceMoments};
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImputePolicy {
    /// Conditional mean.
    Expected,
    /// Highest point of the conditional density.
    TopMode,
    /// One weighted completion per cluster of a multimodal slice.
    ClusterSplit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImputeNote {
    NegativeRegion(usize),
    ClippedMean(usize),
    ModeTie(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Imputation<T> {
    pub values: Vec<T>,
    /// Completions of one record have weights summing to one.
    pub weight: T,
    /// Variance of the slice each missing coordinate was drawn from.
    pub variances: Vec<Option<T>>,
    pub notes: Vec<ImputeNote>,
}

#[derive(Clone)]
struct Partial<T> {
    values: Vec<Option<T>>,
    weight: T,
    variances: Vec<Option<T>>,
    notes: Vec<ImputeNote>,
}

impl<T: Scalar> Model<T> {
    /// Fills the missing coordinates of `record` one at a time, always taking
    /// next the coordinate whose slice has the smallest variance and
    /// conditioning later choices on the earlier ones.
    ///
    /// Discrete coordinates are snapped to their nearest grid point.
    pub fn impute(&self, record: &Record<T>, policy: ImputePolicy) -> Result<Vec<Imputation<T>>> {
        if record.dim() != self.dim() {
            return Err(HcrError::DimensionMismatch {
                expected: self.dim(),
                found: record.dim(),
            });
        }
        if record.is_complete() {
            return Err(HcrError::RecordComplete);
        }
        let start = Partial {
            values: record.values().to_vec(),
            weight: T::one(),
            variances: vec![None; self.dim()],
            notes: Vec::new(),
        };
        let mut done = Vec::new();
        self.impute_from(start, policy, &mut done)?;
        let total: T = done.iter().map(|p: &Imputation<T>| p.weight).sum();
        if total > T::zero() {
            done.iter_mut().for_each(|p| p.weight /= total);
        }
        Ok(done)
    }

    fn impute_from(
        &self,
        state: Partial<T>,
        policy: ImputePolicy,
        out: &mut Vec<Imputation<T>>,
    ) -> Result<()> {
        let missing: Vec<usize> = state
            .values
            .iter()
            .enumerate()
            .filter(|(_, v)| v.is_none())
            .map(|(i, _)| i)
            .collect();
        if missing.is_empty() {
            out.push(Imputation {
                values: state.values.iter().map(|v| v.expect("filled")).collect(),
                weight: state.weight,
                variances: state.variances,
                notes: state.notes,
            });
            return Ok(());
        }

        let mut best: Option<(usize, ConditionalSlice<T>, SliceMoments<T>)> = None;
        for &i in &missing {
            let slice = self.conditional_slice(&state.values, i)?;
            let moments = slice.expected_value();
            let better = match &best {
                None => true,
                Some((_, _, m)) => moments.variance < m.variance,
            };
            if better {
                best = Some((i, slice, moments));
            }
        }
        let (i, slice, moments) = best.expect("at least one missing coordinate");
        let family = self.spec().family(i);

        let mut next = state;
        next.variances[i] = Some(moments.variance);
        if moments.negative_region {
            next.notes.push(ImputeNote::NegativeRegion(i));
        }

        match policy {
            ImputePolicy::Expected => {
                if moments.clipped {
                    next.notes.push(ImputeNote::ClippedMean(i));
                }
                next.values[i] = Some(family.snap(moments.mean));
                self.impute_from(next, policy, out)
            }
            ImputePolicy::TopMode => {
                let mode = slice.top_mode();
                if mode.tie {
                    next.notes.push(ImputeNote::ModeTie(i));
                }
                next.values[i] = Some(family.snap(mode.x));
                self.impute_from(next, policy, out)
            }
            ImputePolicy::ClusterSplit => {
                for cluster in slice.modes_and_clusters() {
                    let mut branch = next.clone();
                    branch.values[i] = Some(family.snap(cluster.mean));
                    branch.weight = next.weight * cluster.mass.max(T::zero());
                    self.impute_from(branch, policy, out)?;
                }
                Ok(())
            }
        }
    }
}
