use crate::error::{HcrError, Result};
use crate::Scalar;

/// Map from original units to `[0, 1]` and back.
#[derive(Debug, Clone, PartialEq)]
pub enum Transform<T> {
    /// Values are already in `[0, 1]`.
    Identity,
    /// `(y - min) / (max - min)`; out-of-range inputs clamp unless `strict`.
    Rescale {
        min: T,
        max: T,
        strict: bool,
    },
    /// `1 / (1 + e^{-y})`.
    Logistic,
    EmpiricalCdf(EmpiricalCdf<T>),
    /// Sorted category values mapped to the grid `k / (v - 1)`.
    Categorical {
        levels: Vec<T>,
    },
}

impl<T: Scalar> Transform<T> {
    pub fn rescale_from(values: &[T], strict: bool) -> Result<Self> {
        let (min, max) = values
            .iter()
            .fold((T::infinity(), T::neg_infinity()), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            });
        if !(max > min) {
            return Err(HcrError::ConstantCoordinate);
        }
        Ok(Transform::Rescale { min, max, strict })
    }

    pub fn categorical_from(values: &[T]) -> Result<Self> {
        let mut levels = values.to_vec();
        levels.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
        levels.dedup();
        if levels.len() < 2 {
            return Err(HcrError::ConstantCoordinate);
        }
        Ok(Transform::Categorical { levels })
    }

    pub fn apply(&self, y: T) -> Result<T> {
        match self {
            Transform::Identity => {
                if y < T::zero() || y > T::one() {
                    return Err(HcrError::OutsideDomain { value: y.as_f64() });
                }
                Ok(y)
            }
            Transform::Rescale { min, max, strict } => {
                let u = (y - *min) / (*max - *min);
                if u < T::zero() || u > T::one() {
                    if *strict {
                        return Err(HcrError::OutsideDomain { value: y.as_f64() });
                    }
                    return Ok(u.max(T::zero()).min(T::one()));
                }
                Ok(u)
            }
            Transform::Logistic => Ok(T::one() / (T::one() + (-y).exp())),
            Transform::EmpiricalCdf(cdf) => Ok(cdf.apply(y)),
            Transform::Categorical { levels } => {
                let tol = T::lit(1e-12) * (T::one() + y.abs());
                let k = levels
                    .iter()
                    .position(|&l| (l - y).abs() <= tol)
                    .ok_or(HcrError::OutsideDomain { value: y.as_f64() })?;
                Ok(T::count(k) / T::count(levels.len() - 1))
            }
        }
    }

    pub fn invert(&self, u: T) -> Result<T> {
        if u.is_nan() || u < T::zero() || u > T::one() {
            return Err(HcrError::OutOfUnitInterval { value: u.as_f64() });
        }
        match self {
            Transform::Identity => Ok(u),
            Transform::Rescale { min, max, .. } => Ok(*min + u * (*max - *min)),
            Transform::Logistic => {
                if u == T::zero() || u == T::one() {
                    return Err(HcrError::OutsideDomain { value: u.as_f64() });
                }
                Ok((u / (T::one() - u)).ln())
            }
            Transform::EmpiricalCdf(cdf) => Ok(cdf.invert(u)),
            Transform::Categorical { levels } => {
                let k = (u * T::count(levels.len() - 1))
                    .round()
                    .to_usize()
                    .expect("grid index");
                Ok(levels[k])
            }
        }
    }

    pub fn is_discrete(&self) -> bool {
        matches!(self, Transform::Categorical { .. })
    }
}

/// Piecewise-linear CDF through plotting positions `(k - 0.5) / l`.
///
/// Tied values share the mean of their positions. Outside the observed range
/// the CDF is clamped to `[δ, 1 - δ]` with `δ = 1 / (2l)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCdf<T> {
    support: Vec<T>,
    positions: Vec<T>,
    sample_size: usize,
}

impl<T: Scalar> EmpiricalCdf<T> {
    pub fn fit(values: &[T]) -> Result<Self> {
        let mut sorted: Vec<T> = values.iter().copied().filter(|v| !v.is_nan()).collect();
        sorted.sort_by(|a, b| a.partial_cmp(b).expect("not NaN"));
        let l = sorted.len();
        let mut support = Vec::new();
        let mut positions = Vec::new();
        let lf = T::count(l);
        let mut k = 0;
        while k < l {
            let mut end = k + 1;
            while end < l && sorted[end] == sorted[k] {
                end += 1;
            }
            // mean of (r - 0.5)/l for ranks r = k+1 ..= end
            let mean_rank = T::count(k + 1 + end) / T::lit(2.0);
            support.push(sorted[k]);
            positions.push((mean_rank - T::lit(0.5)) / lf);
            k = end;
        }
        if support.len() < 2 {
            return Err(HcrError::ConstantCoordinate);
        }
        Ok(Self {
            support,
            positions,
            sample_size: l,
        })
    }

    /// Rebuilds from serialized parts; positions must increase strictly inside `(0, 1)`.
    pub fn from_parts(support: Vec<T>, positions: Vec<T>, sample_size: usize) -> Result<Self> {
        let ok = support.len() >= 2
            && support.len() == positions.len()
            && support.windows(2).all(|w| w[0] < w[1])
            && positions.windows(2).all(|w| w[0] < w[1])
            && positions[0] > T::zero()
            && positions[positions.len() - 1] < T::one()
            && sample_size >= support.len();
        if !ok {
            return Err(HcrError::InvalidConfig(
                "malformed empirical CDF table".into(),
            ));
        }
        Ok(Self {
            support,
            positions,
            sample_size,
        })
    }

    pub fn support(&self) -> &[T] {
        &self.support
    }

    pub fn positions(&self) -> &[T] {
        &self.positions
    }

    pub fn sample_size(&self) -> usize {
        self.sample_size
    }

    pub fn delta(&self) -> T {
        T::one() / (T::lit(2.0) * T::count(self.sample_size))
    }

    pub fn apply(&self, y: T) -> T {
        let n = self.support.len();
        if y < self.support[0] {
            return self.delta();
        }
        if y > self.support[n - 1] {
            return T::one() - self.delta();
        }
        interpolate(&self.support, &self.positions, y)
    }

    pub fn invert(&self, u: T) -> T {
        let n = self.positions.len();
        if u <= self.positions[0] {
            return self.support[0];
        }
        if u >= self.positions[n - 1] {
            return self.support[n - 1];
        }
        interpolate(&self.positions, &self.support, u)
    }
}

/// Linear interpolation on a strictly increasing abscissa; `x` within its range.
fn interpolate<T: Scalar>(xs: &[T], ys: &[T], x: T) -> T {
    let hi = xs.partition_point(|&v| v < x).min(xs.len() - 1);
    if xs[hi] == x || hi == 0 {
        return ys[hi];
    }
    let lo = hi - 1;
    let t = (x - xs[lo]) / (xs[hi] - xs[lo]);
    ys[lo] + t * (ys[hi] - ys[lo])
}
