//! Normalized one-coordinate sections of a fitted density.

use crate::basis1d::{trig_nodes, Family1D, FamilyKind};
use crate::error::{HcrError, Result};
use crate::poly;
use crate::quadrature::GaussLegendre;
use crate::Scalar;

/// Clusters lighter than this are merged into a neighbour.
pub const MIN_CLUSTER_MASS: f64 = 0.01;

const ROOT_TOL: f64 = 1e-10;

/// `ρ(x) = Σ_j (numerator_j / denominator) f_j(x)` for the free coordinate.
///
/// `numerator_0` equals the denominator, so the slice integrates to one.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalSlice<T> {
    free: usize,
    family: Family1D<T>,
    numerator: Vec<T>,
    denominator: T,
    weights: Vec<T>,
    /// Power-basis form of the normalized slice (Legendre only).
    power: Option<Vec<T>>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SliceMoments<T> {
    pub mean: T,
    pub variance: T,
    /// The slice dips below zero somewhere on `[0, 1]`.
    pub negative_region: bool,
    /// The signed mean fell outside `[0, 1]` and was clipped.
    pub clipped: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cluster<T> {
    pub start: T,
    pub end: T,
    pub mean: T,
    pub mass: T,
    /// Location of the highest density inside the cluster.
    pub mode: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mode<T> {
    pub x: T,
    pub density: T,
    /// Another candidate reached the same height; the smaller `x` was kept.
    pub tie: bool,
}

impl<T: Scalar> ConditionalSlice<T> {
    pub fn new(free: usize, family: Family1D<T>, numerator: Vec<T>) -> Result<Self> {
        if numerator.len() != family.max_order() + 1 {
            return Err(HcrError::DimensionMismatch {
                expected: family.max_order() + 1,
                found: numerator.len(),
            });
        }
        let denominator = numerator[0];
        if !(denominator > T::zero()) {
            return Err(HcrError::NonPositiveMass {
                denominator: denominator.as_f64(),
            });
        }
        let weights: Vec<T> = numerator.iter().map(|&n| n / denominator).collect();
        let power = (family.kind() == FamilyKind::LegendreRescaled).then(|| {
            let mut p = vec![T::zero()];
            for (j, &w) in weights.iter().enumerate() {
                let c = family
                    .power_coefficients(j)
                    .expect("legendre order in range");
                poly::add_scaled(&mut p, &c, w);
            }
            p
        });
        Ok(Self {
            free,
            family,
            numerator,
            denominator,
            weights,
            power,
        })
    }

    pub fn free_coordinate(&self) -> usize {
        self.free
    }

    pub fn family(&self) -> &Family1D<T> {
        &self.family
    }

    pub fn numerator(&self) -> &[T] {
        &self.numerator
    }

    pub fn denominator(&self) -> T {
        self.denominator
    }

    /// Normalized coefficients; the first is 1.
    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn density(&self, x: T) -> Result<T> {
        let vals = self.family.eval_all(x)?;
        Ok(vals.iter().zip(&self.weights).map(|(&f, &w)| f * w).sum())
    }

    fn density_unchecked(&self, x: T) -> T {
        match &self.power {
            Some(p) => poly::eval(p, x),
            None => self.density(x).unwrap_or(T::nan()),
        }
    }

    fn derivative(&self, x: T) -> T {
        (1..self.weights.len())
            .map(|j| self.weights[j] * self.family.derivative(j, x).unwrap_or(T::zero()))
            .sum()
    }

    /// `(x, ρ(x))` on `points` evenly spaced values from 0 to 1 (grid points
    /// for discrete families).
    pub fn table(&self, points: usize) -> Vec<(T, T)> {
        let xs: Vec<T> = match self.family.grid() {
            Some(g) => g,
            None => {
                let n = points.max(2);
                (0..n).map(|k| T::count(k) / T::count(n - 1)).collect()
            }
        };
        xs.into_iter()
            .map(|x| (x, self.density_unchecked(x)))
            .collect()
    }

    /// Numeric integral over `[0, 1]` (grid sum with weight `1/v` when discrete).
    pub fn integral(&self) -> T {
        match self.family.kind() {
            FamilyKind::DiscreteOrthonormal { .. } => {
                self.grid_masses().iter().map(|&(_, p)| p).sum()
            }
            FamilyKind::LegendreRescaled => GaussLegendre::for_degree(self.family.max_order())
                .integrate(|x| self.density_unchecked(x)),
            FamilyKind::Trig => GaussLegendre::new(trig_nodes(self.family.max_order().div_ceil(2)))
                .integrate(|x| self.density_unchecked(x)),
        }
    }

    fn shape(&self) -> Shape<'_, T> {
        match (&self.power, self.family.kind()) {
            (Some(p), _) => Shape::Poly(p),
            (None, FamilyKind::DiscreteOrthonormal { .. }) => Shape::Discrete,
            (None, _) => Shape::Trig,
        }
    }

    /// `(x_k, ρ(x_k)/v)` for discrete families.
    fn grid_masses(&self) -> Vec<(T, T)> {
        let grid = self.family.grid().unwrap_or_default();
        let v = T::count(grid.len().max(1));
        grid.into_iter()
            .map(|x| (x, self.density_unchecked(x) / v))
            .collect()
    }

    /// `[∫ρ, ∫xρ, ∫x²ρ]` over `[a, b]`.
    fn interval_moments(&self, shape: &Shape<'_, T>, a: T, b: T) -> [T; 3] {
        match shape {
            Shape::Poly(p) => std::array::from_fn(|k| poly::integrate_weighted(p, k, a, b)),
            Shape::Trig => {
                let q = GaussLegendre::new(2 * trig_nodes(self.family.max_order().div_ceil(2)));
                std::array::from_fn(|k| {
                    q.integrate_on(a, b, |x| x.powi(k as i32) * self.density_unchecked(x))
                })
            }
            Shape::Discrete => {
                let mut m = [T::zero(); 3];
                for (x, p) in self.grid_masses() {
                    if x >= a && x <= b {
                        m[0] += p;
                        m[1] += x * p;
                        m[2] += x * x * p;
                    }
                }
                m
            }
        }
    }

    /// Interior points where `ρ' = 0`, ascending (continuous families).
    fn critical_points(&self, shape: &Shape<'_, T>) -> Vec<T> {
        let tol = T::lit(ROOT_TOL);
        let interior = |r: &T| *r > T::zero() && *r < T::one();
        match shape {
            Shape::Poly(p) => poly::real_roots(&poly::derivative(p), T::zero(), T::one(), tol)
                .into_iter()
                .filter(interior)
                .collect(),
            Shape::Trig => {
                let cells = 64 * (self.family.max_order().div_ceil(2) + 1);
                let mut roots: Vec<T> = Vec::new();
                for k in 0..cells {
                    let lo = T::count(k) / T::count(cells);
                    let hi = T::count(k + 1) / T::count(cells);
                    let (dlo, dhi) = (self.derivative(lo), self.derivative(hi));
                    // zero at the left edge is caught by the previous cell
                    if dlo == T::zero() && k > 0 {
                        continue;
                    }
                    if (dlo > T::zero()) != (dhi > T::zero()) || dhi == T::zero() {
                        if let Some(r) = poly::bisect(|x| self.derivative(x), lo, hi, tol) {
                            if interior(&r) && roots.last().is_none_or(|&l| r - l > tol) {
                                roots.push(r);
                            }
                        }
                    }
                }
                roots
            }
            Shape::Discrete => Vec::new(),
        }
    }

    fn min_density(&self, shape: &Shape<'_, T>) -> T {
        match shape {
            Shape::Discrete => self
                .grid_masses()
                .iter()
                .map(|&(x, _)| self.density_unchecked(x))
                .fold(T::infinity(), T::min),
            _ => self
                .critical_points(shape)
                .into_iter()
                .chain([T::zero(), T::one()])
                .map(|x| self.density_unchecked(x))
                .fold(T::infinity(), T::min),
        }
    }

    /// Mean and variance of the free coordinate under the slice.
    ///
    /// Negative regions are integrated as signed mass; a mean pushed outside
    /// `[0, 1]` is clipped and flagged.
    pub fn expected_value(&self) -> SliceMoments<T> {
        let shape = self.shape();
        let (m1, m2) = match shape {
            Shape::Discrete => {
                let m = self.interval_moments(&shape, T::zero(), T::one());
                (m[1], m[2])
            }
            _ => {
                let moment = |p: usize| -> T {
                    self.weights
                        .iter()
                        .enumerate()
                        .map(|(j, &w)| w * self.family.integrate_moment(j, p).expect("continuous"))
                        .sum()
                };
                (moment(1), moment(2))
            }
        };
        let variance = (m2 - m1 * m1).max(T::zero());
        let clipped = m1 < T::zero() || m1 > T::one();
        SliceMoments {
            mean: m1.max(T::zero()).min(T::one()),
            variance,
            negative_region: self.min_density(&shape) < T::zero(),
            clipped,
        }
    }

    /// Highest point of the slice; ties go to the smaller coordinate.
    pub fn top_mode(&self) -> Mode<T> {
        let shape = self.shape();
        let candidates: Vec<T> = match shape {
            Shape::Discrete => self.family.grid().unwrap_or_default(),
            _ => {
                let mut c = vec![T::zero()];
                c.extend(self.critical_points(&shape));
                c.push(T::one());
                c
            }
        };
        pick_mode(
            candidates
                .into_iter()
                .map(|x| (x, self.density_unchecked(x))),
        )
    }

    /// Splits `[0, 1]` at interior local minima of the slice.
    ///
    /// Clusters with mass below [`MIN_CLUSTER_MASS`] are merged into the
    /// adjacent cluster with the closer mean. The result is sorted by mass,
    /// heaviest first, ties by left endpoint; masses sum to one.
    pub fn modes_and_clusters(&self) -> Vec<Cluster<T>> {
        let shape = self.shape();
        let mut clusters = match shape {
            Shape::Discrete => self.discrete_clusters(),
            _ => self.continuous_clusters(&shape),
        };
        merge_light_clusters(&mut clusters, T::lit(MIN_CLUSTER_MASS));
        let mut out: Vec<Cluster<T>> = clusters.into_iter().map(|p| p.finish()).collect();
        out.sort_by(|a, b| {
            b.mass
                .partial_cmp(&a.mass)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(
                    a.start
                        .partial_cmp(&b.start)
                        .unwrap_or(std::cmp::Ordering::Equal),
                )
        });
        out
    }

    fn continuous_clusters(&self, shape: &Shape<'_, T>) -> Vec<PartialCluster<T>> {
        let crit = self.critical_points(shape);
        let two = T::lit(2.0);
        let mut cuts = vec![T::zero()];
        for (k, &r) in crit.iter().enumerate() {
            let left = if k == 0 { T::zero() } else { crit[k - 1] };
            let right = crit.get(k + 1).copied().unwrap_or(T::one());
            let here = self.density_unchecked(r);
            let l = self.density_unchecked((left + r) / two);
            let h = self.density_unchecked((r + right) / two);
            if l > here && h > here {
                cuts.push(r);
            }
        }
        cuts.push(T::one());
        cuts.windows(2)
            .map(|w| {
                let (a, b) = (w[0], w[1]);
                let m = self.interval_moments(shape, a, b);
                let peaks = [a, b]
                    .into_iter()
                    .chain(crit.iter().copied().filter(|&r| r > a && r < b))
                    .map(|x| (x, self.density_unchecked(x)));
                let mode = pick_mode(peaks);
                PartialCluster {
                    start: a,
                    end: b,
                    mass: m[0],
                    first: m[1],
                    mode,
                }
            })
            .collect()
    }

    fn discrete_clusters(&self) -> Vec<PartialCluster<T>> {
        let pts = self.grid_masses();
        let n = pts.len();
        let mut groups: Vec<Vec<(T, T)>> = vec![Vec::new()];
        for k in 0..n {
            groups.last_mut().expect("nonempty").push(pts[k]);
            let is_min = k > 0
                && k + 1 < n
                && pts[k].1 <= pts[k - 1].1
                && pts[k].1 <= pts[k + 1].1
                && (pts[k].1 < pts[k - 1].1 || pts[k].1 < pts[k + 1].1);
            if is_min {
                groups.push(Vec::new());
            }
        }
        groups
            .into_iter()
            .filter(|g| !g.is_empty())
            .map(|g| {
                let v = T::count(n);
                PartialCluster {
                    start: g[0].0,
                    end: g[g.len() - 1].0,
                    mass: g.iter().map(|&(_, p)| p).sum(),
                    first: g.iter().map(|&(x, p)| x * p).sum(),
                    mode: pick_mode(g.iter().map(|&(x, p)| (x, p * v))),
                }
            })
            .collect()
    }
}

enum Shape<'a, T> {
    Poly(&'a [T]),
    Trig,
    Discrete,
}

#[derive(Debug, Clone, Copy)]
struct PartialCluster<T> {
    start: T,
    end: T,
    mass: T,
    first: T,
    mode: Mode<T>,
}

impl<T: Scalar> PartialCluster<T> {
    fn center(&self) -> T {
        if self.mass > T::zero() {
            self.first / self.mass
        } else {
            (self.start + self.end) / T::lit(2.0)
        }
    }

    fn finish(self) -> Cluster<T> {
        let mean = self.center().max(self.start).min(self.end);
        Cluster {
            start: self.start,
            end: self.end,
            mean,
            mass: self.mass,
            mode: self.mode.x,
        }
    }

    fn absorb(&mut self, other: PartialCluster<T>) {
        self.start = self.start.min(other.start);
        self.end = self.end.max(other.end);
        self.mass += other.mass;
        self.first += other.first;
        if other.mode.density > self.mode.density {
            self.mode = other.mode;
        }
    }
}

fn merge_light_clusters<T: Scalar>(clusters: &mut Vec<PartialCluster<T>>, floor: T) {
    while clusters.len() > 1 {
        let Some((k, _)) = clusters
            .iter()
            .enumerate()
            .filter(|(_, c)| c.mass < floor)
            .min_by(|a, b| {
                a.1.mass
                    .partial_cmp(&b.1.mass)
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
        else {
            break;
        };
        let c = clusters[k];
        let target = match (k.checked_sub(1), (k + 1 < clusters.len()).then_some(k + 1)) {
            (Some(l), Some(r)) => {
                let dl = (clusters[l].center() - c.center()).abs();
                let dr = (clusters[r].center() - c.center()).abs();
                if dr < dl {
                    r
                } else {
                    l
                }
            }
            (Some(l), None) => l,
            (None, Some(r)) => r,
            (None, None) => break,
        };
        clusters[target].absorb(c);
        clusters.remove(k);
    }
}

fn pick_mode<T: Scalar>(candidates: impl Iterator<Item = (T, T)>) -> Mode<T> {
    let mut best: Option<Mode<T>> = None;
    for (x, density) in candidates {
        match &mut best {
            None => {
                best = Some(Mode {
                    x,
                    density,
                    tie: false,
                })
            }
            Some(b) => {
                let tol = T::lit(1e-12) * T::one().max(density.abs());
                if density > b.density + tol {
                    *b = Mode {
                        x,
                        density,
                        tie: false,
                    };
                } else if (density - b.density).abs() <= tol {
                    b.tie = true;
                    if x < b.x {
                        b.x = x;
                    }
                }
            }
        }
    }
    best.unwrap_or(Mode {
        x: T::lit(0.5),
        density: T::nan(),
        tie: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn legendre_slice(weights: &[f64]) -> ConditionalSlice<f64> {
        ConditionalSlice::new(0, Family1D::legendre(weights.len() - 1), weights.to_vec()).unwrap()
    }

    #[test]
    fn uniform_slice() {
        let s = legendre_slice(&[1.0, 0.0, 0.0]);
        let m = s.expected_value();
        assert!((m.mean - 0.5).abs() < 1e-15);
        assert!((m.variance - 1.0 / 12.0).abs() < 1e-15);
        assert!(!m.negative_region);
        let c = s.modes_and_clusters();
        assert_eq!(c.len(), 1);
        assert_eq!((c[0].start, c[0].end), (0.0, 1.0));
        assert!((c[0].mean - 0.5).abs() < 1e-15 && (c[0].mass - 1.0).abs() < 1e-15);
    }

    #[test]
    fn linear_slice_mean() {
        let s = legendre_slice(&[1.0, 0.2]);
        let want = 0.5 + 0.2 / (2.0 * 3f64.sqrt());
        assert!((s.expected_value().mean - want).abs() < 1e-14);
    }

    #[test]
    fn scaled_numerator_normalizes() {
        let s =
            ConditionalSlice::new(1, Family1D::<f64>::legendre(2), vec![2.0, 0.4, -0.2]).unwrap();
        assert_eq!(s.weights(), &[1.0, 0.2, -0.1]);
        assert!((s.integral() - 1.0).abs() < 1e-14);
        assert!(matches!(
            ConditionalSlice::new(0, Family1D::<f64>::legendre(1), vec![-0.1, 0.3]),
            Err(HcrError::NonPositiveMass { .. })
        ));
    }

    #[test]
    fn symmetric_parabola_splits_in_two() {
        // positive f_2 weight: high at the edges, minimum at 1/2
        let s = legendre_slice(&[1.0, 0.0, 0.4]);
        let c = s.modes_and_clusters();
        assert_eq!(c.len(), 2);
        assert!((c[0].mass - 0.5).abs() < 1e-12 && (c[1].mass - 0.5).abs() < 1e-12);
        assert!((c[0].mean + c[1].mean - 1.0).abs() < 1e-12);
        assert!((c[0].end - 0.5).abs() < 1e-9 || (c[1].end - 0.5).abs() < 1e-9);
        let total: f64 = c.iter().map(|c| c.mass).sum();
        assert!((total - 1.0).abs() < 1e-12);
        let mode = s.top_mode();
        assert!(mode.tie && mode.x == 0.0);
    }

    #[test]
    fn cluster_means_against_brute_force() {
        let s = legendre_slice(&[1.0, 0.1, 0.5, 0.05, 0.1]);
        let c = s.modes_and_clusters();
        // brute force: Riemann sums between dense-grid local minima
        let n = 200_000;
        let xs: Vec<f64> = (0..=n).map(|k| k as f64 / n as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|&x| s.density(x).unwrap()).collect();
        let mut cuts = vec![0.0];
        for k in 1..n {
            if ys[k] < ys[k - 1] && ys[k] <= ys[k + 1] {
                cuts.push(xs[k]);
            }
        }
        cuts.push(1.0);
        assert_eq!(cuts.len() - 1, c.len());
        let mut sorted = c.clone();
        sorted.sort_by(|a, b| a.start.partial_cmp(&b.start).unwrap());
        for (w, cl) in cuts.windows(2).zip(&sorted) {
            let (mut m0, mut m1) = (0.0, 0.0);
            for k in 0..n {
                let x = (xs[k] + xs[k + 1]) / 2.0;
                if x >= w[0] && x < w[1] {
                    let y = s.density(x).unwrap() / n as f64;
                    m0 += y;
                    m1 += x * y;
                }
            }
            assert!((m0 - cl.mass).abs() < 1e-4, "{m0} {}", cl.mass);
            assert!((m1 / m0 - cl.mean).abs() < 1e-4);
        }
    }

    #[test]
    fn light_clusters_merge() {
        // a tiny bump near x = 1 on top of a dominant left mode
        let s = legendre_slice(&[1.0, -0.55, 0.0, 0.0, 0.0, 0.02]);
        let c = s.modes_and_clusters();
        assert!(c.iter().all(|c| c.mass >= MIN_CLUSTER_MASS));
        assert!((c.iter().map(|c| c.mass).sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn negative_region_is_flagged() {
        // 1 + 0.9 f_1 is negative near 0 (1 - 0.9√3 < 0)
        let s = legendre_slice(&[1.0, 0.9]);
        let m = s.expected_value();
        assert!(m.negative_region);
        assert!(m.mean >= 0.0 && m.mean <= 1.0);
        let hard = legendre_slice(&[1.0, 0.0, 0.0, 0.0, 0.0, 3.0]);
        let hm = hard.expected_value();
        assert!(hm.negative_region && (0.0..=1.0).contains(&hm.mean));
    }

    #[test]
    fn trig_slice() {
        let s = ConditionalSlice::new(0, Family1D::<f64>::trig(2), vec![1.0, 0.0, 0.5]).unwrap();
        // 1 + 0.5√2 cos(2πx): maximum at the edges, minimum at 1/2
        assert!((s.integral() - 1.0).abs() < 1e-12);
        let m = s.expected_value();
        assert!((m.mean - 0.5).abs() < 1e-12);
        let c = s.modes_and_clusters();
        assert_eq!(c.len(), 2);
        assert!((c[0].mass - 0.5).abs() < 1e-9);
        let lone = ConditionalSlice::new(0, Family1D::<f64>::trig(2), vec![1.0, 0.3, 0.0]).unwrap();
        // sin bump: one interior max at 1/4, interior min at 3/4
        let mode = lone.top_mode();
        assert!((mode.x - 0.25).abs() < 1e-8);
    }

    #[test]
    fn discrete_slice() {
        let fam = Family1D::<f64>::discrete(3, 2).unwrap();
        // pmf proportional to (2, 1, 3) over grid (0, 1/2, 1)
        let target = [2.0 / 6.0, 1.0 / 6.0, 3.0 / 6.0];
        let grid = fam.grid().unwrap();
        let weights: Vec<f64> = (0..3)
            .map(|j| {
                (0..3)
                    .map(|k| target[k] * fam.eval(j, grid[k]).unwrap())
                    .sum()
            })
            .collect();
        let s = ConditionalSlice::new(0, fam, weights).unwrap();
        for k in 0..3 {
            assert!((s.density(grid[k]).unwrap() / 3.0 - target[k]).abs() < 1e-12);
        }
        assert!((s.integral() - 1.0).abs() < 1e-12);
        let m = s.expected_value();
        assert!((m.mean - (0.5 / 6.0 + 3.0 / 6.0)).abs() < 1e-12);
        let c = s.modes_and_clusters();
        assert_eq!(c.len(), 2);
        assert!((c[0].mass - 0.5).abs() < 1e-12);
        assert_eq!(s.top_mode().x, 1.0);
    }
}
