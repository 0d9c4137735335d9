//! One-dimensional orthonormal families on `[0, 1]` and on finite grids.
//!
//! Every family starts with the constant `f_0 = 1`; higher orders integrate to
//! zero, so adding them never changes the total mass of a density.
//!
//! * `LegendreRescaled`: `f_j(x) = √(2j+1) · P_j(2x - 1)`.
//! * `Trig`: `f_{2k-1} = √2 sin(2πkx)`, `f_{2k} = √2 cos(2πkx)` (sine first).
//! * `DiscreteOrthonormal { levels: v }`: Gram-Schmidt on monomials over the
//!   grid `k / (v - 1)`, orthonormal under the weight `1/v` per grid point.

use crate::error::{HcrError, Result};
use crate::quadrature::GaussLegendre;
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FamilyKind {
    LegendreRescaled,
    Trig,
    DiscreteOrthonormal { levels: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Family1D<T> {
    kind: FamilyKind,
    max_order: usize,
    /// Discrete families only: `table[j][k] = f_j(k / (v - 1))`.
    table: Vec<Vec<T>>,
}

impl<T: Scalar> Family1D<T> {
    pub fn legendre(max_order: usize) -> Self {
        Self {
            kind: FamilyKind::LegendreRescaled,
            max_order,
            table: Vec::new(),
        }
    }

    pub fn trig(max_order: usize) -> Self {
        Self {
            kind: FamilyKind::Trig,
            max_order,
            table: Vec::new(),
        }
    }

    pub fn discrete(levels: usize, max_order: usize) -> Result<Self> {
        if levels < 2 {
            return Err(HcrError::InvalidFamily(format!(
                "a discrete family needs at least 2 levels, got {levels}"
            )));
        }
        if max_order > levels - 1 {
            return Err(HcrError::InvalidFamily(format!(
                "max order {max_order} exceeds the capacity {} of a {levels}-level coordinate",
                levels - 1
            )));
        }
        Ok(Self {
            kind: FamilyKind::DiscreteOrthonormal { levels },
            max_order,
            table: gram_schmidt_table(levels, max_order),
        })
    }

    pub fn new(kind: FamilyKind, max_order: usize) -> Result<Self> {
        match kind {
            FamilyKind::LegendreRescaled => Ok(Self::legendre(max_order)),
            FamilyKind::Trig => Ok(Self::trig(max_order)),
            FamilyKind::DiscreteOrthonormal { levels } => Self::discrete(levels, max_order),
        }
    }

    /// Same kind with a different max order.
    pub fn with_max_order(&self, max_order: usize) -> Result<Self> {
        Self::new(self.kind, max_order)
    }

    pub fn kind(&self) -> FamilyKind {
        self.kind
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    pub fn is_discrete(&self) -> bool {
        matches!(self.kind, FamilyKind::DiscreteOrthonormal { .. })
    }

    /// Grid points `k / (v - 1)` of a discrete family.
    pub fn grid(&self) -> Option<Vec<T>> {
        match self.kind {
            FamilyKind::DiscreteOrthonormal { levels } => Some(grid_points(levels)),
            _ => None,
        }
    }

    /// Index of `x` on the discrete grid.
    pub fn grid_index(&self, x: T) -> Result<usize> {
        let FamilyKind::DiscreteOrthonormal { levels } = self.kind else {
            return Err(HcrError::Unsupported(
                "grid_index on a continuous family".into(),
            ));
        };
        check_unit(x)?;
        let scaled = x * T::count(levels - 1);
        let k = scaled.round();
        let tol = T::lit(1e-9).max(T::epsilon() * T::lit(64.0)) * T::count(levels - 1);
        if (scaled - k).abs() > tol {
            return Err(HcrError::OffGrid {
                value: x.as_f64(),
                levels,
            });
        }
        Ok(k.to_usize().expect("grid index"))
    }

    /// Nearest grid point of a discrete family; identity for continuous ones.
    pub fn snap(&self, x: T) -> T {
        match self.kind {
            FamilyKind::DiscreteOrthonormal { levels } => {
                let steps = T::count(levels - 1);
                (x.max(T::zero()).min(T::one()) * steps).round() / steps
            }
            _ => x,
        }
    }

    fn check_order(&self, j: usize) -> Result<()> {
        if j > self.max_order {
            return Err(HcrError::OrderOutOfRange {
                order: j,
                max: self.max_order,
            });
        }
        Ok(())
    }

    pub fn eval(&self, j: usize, x: T) -> Result<T> {
        self.check_order(j)?;
        check_unit(x)?;
        if j == 0 {
            // the grid check still applies
            if self.is_discrete() {
                self.grid_index(x)?;
            }
            return Ok(T::one());
        }
        Ok(match self.kind {
            FamilyKind::LegendreRescaled => legendre(j, x),
            FamilyKind::Trig => trig(j, x),
            FamilyKind::DiscreteOrthonormal { .. } => self.table[j][self.grid_index(x)?],
        })
    }

    /// Values `f_0(x) ..= f_max(x)`.
    pub fn eval_all(&self, x: T) -> Result<Vec<T>> {
        check_unit(x)?;
        match self.kind {
            FamilyKind::DiscreteOrthonormal { .. } => {
                let k = self.grid_index(x)?;
                Ok(self.table.iter().map(|row| row[k]).collect())
            }
            _ => (0..=self.max_order).map(|j| self.eval(j, x)).collect(),
        }
    }

    /// `f_j'(x)` for continuous families.
    pub fn derivative(&self, j: usize, x: T) -> Result<T> {
        self.check_order(j)?;
        check_unit(x)?;
        match self.kind {
            FamilyKind::LegendreRescaled => {
                let c = legendre_power_coefficients::<T>(j);
                Ok(crate::poly::eval(&crate::poly::derivative(&c), x))
            }
            FamilyKind::Trig => Ok(trig_derivative(j, x)),
            FamilyKind::DiscreteOrthonormal { .. } => Err(HcrError::Unsupported(
                "derivative of a discrete family".into(),
            )),
        }
    }

    /// Power-basis coefficients of `f_j` (Legendre only).
    pub fn power_coefficients(&self, j: usize) -> Option<Vec<T>> {
        match self.kind {
            FamilyKind::LegendreRescaled if j <= self.max_order => {
                Some(legendre_power_coefficients(j))
            }
            _ => None,
        }
    }

    /// `⟨f_j1, f_j2⟩`: Gauss-Legendre quadrature on `[0, 1]` for continuous
    /// families, the `1/v`-weighted grid sum for discrete ones.
    pub fn inner_product(&self, j1: usize, j2: usize) -> Result<T> {
        self.check_order(j1)?;
        self.check_order(j2)?;
        match self.kind {
            FamilyKind::DiscreteOrthonormal { levels } => Ok(self.table[j1]
                .iter()
                .zip(&self.table[j2])
                .map(|(&a, &b)| a * b)
                .sum::<T>()
                / T::count(levels)),
            FamilyKind::LegendreRescaled => {
                let q = GaussLegendre::<T>::for_degree(j1 + j2);
                Ok(q.integrate(|x| legendre(j1, x) * legendre(j2, x)))
            }
            FamilyKind::Trig => {
                let q = GaussLegendre::<T>::new(trig_nodes(j1.div_ceil(2) + j2.div_ceil(2)));
                Ok(q.integrate(|x| trig(j1, x) * trig(j2, x)))
            }
        }
    }

    /// `∫_0^1 x^p f_j(x) dx` for `p ∈ {0, 1, 2}`.
    pub fn integrate_moment(&self, j: usize, p: usize) -> Result<T> {
        self.check_order(j)?;
        if p > 2 {
            return Err(HcrError::Unsupported(format!(
                "moment power {p} (only 0, 1, 2)"
            )));
        }
        match self.kind {
            FamilyKind::DiscreteOrthonormal { .. } => Err(HcrError::Unsupported(
                "integrate_moment on a discrete family; use grid sums".into(),
            )),
            _ if j == 0 => Ok(T::one() / T::count(p + 1)),
            // x = 1/2 + f_1/(2√3) and x² = 1/3 + f_1/(2√3) + f_2/(6√5)
            FamilyKind::LegendreRescaled => Ok(match (j, p) {
                (1, 1 | 2) => T::one() / (T::lit(2.0) * T::lit(3.0).sqrt()),
                (2, 2) => T::one() / (T::lit(6.0) * T::lit(5.0).sqrt()),
                _ => T::zero(),
            }),
            FamilyKind::Trig => {
                let a = T::TAU() * T::count(j.div_ceil(2));
                let v = match (j % 2 == 1, p) {
                    (_, 0) => T::zero(),
                    (true, _) => -T::one() / a,
                    (false, 1) => T::zero(),
                    (false, _) => T::lit(2.0) / (a * a),
                };
                Ok(T::SQRT_2() * v)
            }
        }
    }
}

/// Quadrature size for trig products with combined frequency `freq`.
pub(crate) fn trig_nodes(freq: usize) -> usize {
    24 + 8 * freq
}

pub(crate) fn check_unit<T: Scalar>(x: T) -> Result<()> {
    if x.is_nan() || x < T::zero() || x > T::one() {
        return Err(HcrError::OutOfUnitInterval { value: x.as_f64() });
    }
    Ok(())
}

fn grid_points<T: Scalar>(levels: usize) -> Vec<T> {
    let steps = T::count(levels - 1);
    (0..levels).map(|k| T::count(k) / steps).collect()
}

fn gram_schmidt_table<T: Scalar>(levels: usize, max_order: usize) -> Vec<Vec<T>> {
    let grid = grid_points::<T>(levels);
    let weight = T::one() / T::count(levels);
    let dot = |a: &[T], b: &[T]| a.iter().zip(b).map(|(&x, &y)| x * y).sum::<T>() * weight;
    let mut table: Vec<Vec<T>> = Vec::with_capacity(max_order + 1);
    for j in 0..=max_order {
        let mut v: Vec<T> = grid.iter().map(|&x| x.powi(j as i32)).collect();
        // two passes keep the basis orthogonal to rounding level
        for _ in 0..2 {
            for prev in &table {
                let c = dot(&v, prev);
                for (vi, &pi) in v.iter_mut().zip(prev) {
                    *vi -= c * pi;
                }
            }
        }
        let norm = dot(&v, &v).sqrt();
        v.iter_mut().for_each(|vi| *vi /= norm);
        table.push(v);
    }
    table
}

fn legendre<T: Scalar>(j: usize, x: T) -> T {
    let l = T::lit;
    match j {
        0 => T::one(),
        1 => l(3.0).sqrt() * (l(2.0) * x - T::one()),
        2 => l(5.0).sqrt() * ((l(6.0) * x - l(6.0)) * x + T::one()),
        3 => l(7.0).sqrt() * (((l(20.0) * x - l(30.0)) * x + l(12.0)) * x - T::one()),
        4 => l(3.0) * ((((l(70.0) * x - l(140.0)) * x + l(90.0)) * x - l(20.0)) * x + T::one()),
        5 => {
            l(11.0).sqrt()
                * (((((l(252.0) * x - l(630.0)) * x + l(560.0)) * x - l(210.0)) * x + l(30.0)) * x
                    - T::one())
        }
        _ => legendre_recurrence(j, x),
    }
}

/// Shifted Legendre by the three-term recurrence, normalized by `√(2j+1)`.
pub(crate) fn legendre_recurrence<T: Scalar>(j: usize, x: T) -> T {
    let t = T::lit(2.0) * x - T::one();
    let (mut p0, mut p1) = (T::one(), t);
    if j == 0 {
        return T::one();
    }
    for n in 1..j {
        let nf = T::count(n);
        let p2 = ((T::lit(2.0) * nf + T::one()) * t * p1 - nf * p0) / (nf + T::one());
        p0 = p1;
        p1 = p2;
    }
    T::count(2 * j + 1).sqrt() * p1
}

/// Coefficients of `√(2j+1) Σ_k (-1)^{j+k} C(j,k) C(j+k,k) x^k`.
fn legendre_power_coefficients<T: Scalar>(j: usize) -> Vec<T> {
    let norm = T::count(2 * j + 1).sqrt();
    let mut out = Vec::with_capacity(j + 1);
    let mut binom_jk = 1.0f64; // C(j, k)
    let mut binom_jkk = 1.0f64; // C(j + k, k)
    for k in 0..=j {
        if k > 0 {
            binom_jk = binom_jk * (j + 1 - k) as f64 / k as f64;
            binom_jkk = binom_jkk * (j + k) as f64 / k as f64;
        }
        let sign = if (j + k).is_multiple_of(2) { 1.0 } else { -1.0 };
        out.push(norm * T::lit(sign * binom_jk * binom_jkk));
    }
    out
}

fn trig<T: Scalar>(j: usize, x: T) -> T {
    if j == 0 {
        return T::one();
    }
    let arg = T::TAU() * T::count(j.div_ceil(2)) * x;
    if j % 2 == 1 {
        T::SQRT_2() * arg.sin()
    } else {
        T::SQRT_2() * arg.cos()
    }
}

fn trig_derivative<T: Scalar>(j: usize, x: T) -> T {
    if j == 0 {
        return T::zero();
    }
    let w = T::TAU() * T::count(j.div_ceil(2));
    if j % 2 == 1 {
        T::SQRT_2() * w * (w * x).cos()
    } else {
        -T::SQRT_2() * w * (w * x).sin()
    }
}
