//! Tensor-product bases over `[0, 1]^d`, grouped by support subset.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use crate::basis1d::Family1D;
use crate::error::{HcrError, Result};
use crate::Scalar;

/// Per-coordinate orders `j`; the function is `Π_i f_{j_i}(x_i)`.
///
/// Ordered by support size, then support set, then the order vector.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultiIndex(Vec<usize>);

impl MultiIndex {
    pub fn new(orders: Vec<usize>) -> Self {
        Self(orders)
    }

    pub fn constant(dim: usize) -> Self {
        Self(vec![0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn orders(&self) -> &[usize] {
        &self.0
    }

    pub fn order(&self, i: usize) -> usize {
        self.0[i]
    }

    pub fn support(&self) -> Vec<usize> {
        self.support_iter().collect()
    }

    pub fn support_iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &j)| j > 0)
            .map(|(i, _)| i)
    }

    pub fn support_len(&self) -> usize {
        self.0.iter().filter(|&&j| j > 0).count()
    }

    pub fn is_constant(&self) -> bool {
        self.0.iter().all(|&j| j == 0)
    }

    pub fn max_order(&self) -> usize {
        self.0.iter().copied().max().unwrap_or(0)
    }

    /// True when the support is contained in the coordinates where `known(i)` holds.
    pub fn supported_by(&self, known: impl FnMut(usize) -> bool) -> bool {
        self.support_iter().all(known)
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.support_len()
            .cmp(&other.support_len())
            .then_with(|| self.support_iter().cmp(other.support_iter()))
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl std::fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(")?;
        for (k, j) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{j}")?;
        }
        write!(f, ")")
    }
}

/// Per-coordinate families plus the selected multi-indices, canonically sorted.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisSpec<T> {
    families: Vec<Family1D<T>>,
    selected: Vec<MultiIndex>,
    level_orders: Option<Vec<usize>>,
}

impl<T: Scalar> BasisSpec<T> {
    /// Every multi-index with `1 ≤ j_i ≤ level_orders[|C|]` on its support `C`
    /// (capped by each family's max order), plus the constant.
    ///
    /// `level_orders[k]` is the max order for correlations of `k` coordinates;
    /// it must cover levels `0..=d`. An order of 0 skips that level.
    pub fn build_full(families: Vec<Family1D<T>>, level_orders: &[usize]) -> Result<Self> {
        let d = families.len();
        check_dim(d)?;
        if level_orders.len() < d + 1 {
            return Err(HcrError::InvalidBasis(format!(
                "level orders cover {} levels, need {} (levels 0..={d})",
                level_orders.len(),
                d + 1
            )));
        }
        let mut selected = vec![MultiIndex::constant(d)];
        for (level, &order) in level_orders.iter().enumerate().take(d + 1).skip(1) {
            if order == 0 {
                continue;
            }
            for_each_combination(d, level, |subset| {
                push_orders_on(&families, subset, order, &mut selected);
            });
        }
        selected.sort();
        Ok(Self {
            families,
            selected,
            level_orders: Some(level_orders[..=d].to_vec()),
        })
    }

    /// Populates `B_C` only for the listed subsets (0-based coordinates).
    pub fn build_sparse(
        families: Vec<Family1D<T>>,
        subsets: &[Vec<usize>],
        order: usize,
    ) -> Result<Self> {
        let d = families.len();
        check_dim(d)?;
        let mut unique: BTreeSet<Vec<usize>> = BTreeSet::new();
        for s in subsets {
            if s.is_empty() {
                return Err(HcrError::InvalidBasis("empty subset in whitelist".into()));
            }
            let mut s = s.clone();
            s.sort_unstable();
            s.dedup();
            if let Some(&bad) = s.iter().find(|&&i| i >= d) {
                return Err(HcrError::CoordinateOutOfRange { index: bad, dim: d });
            }
            unique.insert(s);
        }
        let mut selected = vec![MultiIndex::constant(d)];
        if order > 0 {
            for s in &unique {
                push_orders_on(&families, s, order, &mut selected);
            }
        }
        selected.sort();
        Ok(Self {
            families,
            selected,
            level_orders: None,
        })
    }

    /// Validates an explicit selection; the constant index is added if absent.
    pub fn from_indices(
        families: Vec<Family1D<T>>,
        indices: impl IntoIterator<Item = MultiIndex>,
        level_orders: Option<Vec<usize>>,
    ) -> Result<Self> {
        let d = families.len();
        check_dim(d)?;
        let mut set: BTreeSet<MultiIndex> = BTreeSet::new();
        set.insert(MultiIndex::constant(d));
        for j in indices {
            if j.dim() != d {
                return Err(HcrError::DimensionMismatch {
                    expected: d,
                    found: j.dim(),
                });
            }
            for (i, &o) in j.orders().iter().enumerate() {
                if o > families[i].max_order() {
                    return Err(HcrError::OrderOutOfRange {
                        order: o,
                        max: families[i].max_order(),
                    });
                }
            }
            if let Some(levels) = &level_orders {
                let cap = levels.get(j.support_len()).copied().unwrap_or(0);
                if !j.is_constant() && j.max_order() > cap {
                    return Err(HcrError::InvalidBasis(format!(
                        "index {j} exceeds the level order {cap}"
                    )));
                }
            }
            set.insert(j);
        }
        Ok(Self {
            families,
            selected: set.into_iter().collect(),
            level_orders,
        })
    }

    pub fn dim(&self) -> usize {
        self.families.len()
    }

    pub fn families(&self) -> &[Family1D<T>] {
        &self.families
    }

    pub fn family(&self, i: usize) -> &Family1D<T> {
        &self.families[i]
    }

    pub fn selected(&self) -> &[MultiIndex] {
        &self.selected
    }

    pub fn level_orders(&self) -> Option<&[usize]> {
        self.level_orders.as_deref()
    }

    pub fn len(&self) -> usize {
        self.selected.len()
    }

    pub fn is_empty(&self) -> bool {
        self.selected.is_empty()
    }

    pub fn position(&self, j: &MultiIndex) -> Option<usize> {
        self.selected.binary_search(j).ok()
    }

    /// Distinct supports of the selected indices, including the empty set.
    pub fn supports(&self) -> Vec<Vec<usize>> {
        let set: BTreeSet<Vec<usize>> = self.selected.iter().map(|j| j.support()).collect();
        set.into_iter().collect()
    }

    /// `Π_{i ∈ support(j)} f_{j_i}(x_i)`. Coordinates off the support are never read.
    pub fn eval_function(&self, j: &MultiIndex, x: &[Option<T>]) -> Result<T> {
        if j.dim() != self.dim() {
            return Err(HcrError::DimensionMismatch {
                expected: self.dim(),
                found: j.dim(),
            });
        }
        let mut v = T::one();
        for i in j.support_iter() {
            let xi = x
                .get(i)
                .copied()
                .flatten()
                .ok_or(HcrError::MissingCoordinate(i))?;
            v *= self.families[i].eval(j.order(i), xi)?;
        }
        Ok(v)
    }

    /// Restricts the selection; used by pruning and marginalization.
    pub(crate) fn retain(&self, mut keep: impl FnMut(&MultiIndex) -> bool) -> Self {
        Self {
            families: self.families.clone(),
            selected: self
                .selected
                .iter()
                .filter(|j| j.is_constant() || keep(j))
                .cloned()
                .collect(),
            level_orders: self.level_orders.clone(),
        }
    }
}

fn check_dim(d: usize) -> Result<()> {
    if d == 0 {
        return Err(HcrError::InvalidBasis(
            "dimension must be at least 1".into(),
        ));
    }
    Ok(())
}

/// Appends every order vector on `subset` with `1 ≤ j_i ≤ min(order, family max)`.
fn push_orders_on<T: Scalar>(
    families: &[Family1D<T>],
    subset: &[usize],
    order: usize,
    out: &mut Vec<MultiIndex>,
) {
    let caps: Vec<usize> = subset
        .iter()
        .map(|&i| order.min(families[i].max_order()))
        .collect();
    if caps.contains(&0) {
        return;
    }
    let mut current = vec![1usize; subset.len()];
    loop {
        let mut orders = vec![0; families.len()];
        for (&i, &o) in subset.iter().zip(&current) {
            orders[i] = o;
        }
        out.push(MultiIndex(orders));
        // odometer
        let mut k = 0;
        loop {
            if k == current.len() {
                return;
            }
            current[k] += 1;
            if current[k] <= caps[k] {
                break;
            }
            current[k] = 1;
            k += 1;
        }
    }
}

/// Calls `f` on each `k`-subset of `0..n` in lexicographic order.
pub(crate) fn for_each_combination(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        let mut i = k;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] < n - k + i {
                idx[i] += 1;
                for t in i + 1..k {
                    idx[t] = idx[t - 1] + 1;
                }
                break;
            }
            if i == 0 {
                return;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::GaussLegendre;

    fn leg(d: usize, m: usize) -> Vec<Family1D<f64>> {
        vec![Family1D::legendre(m); d]
    }

    /// Independent enumeration over the full lattice {0..m}^d.
    fn brute_force_count(d: usize, levels: &[usize]) -> usize {
        let m = *levels.iter().max().unwrap();
        let total = (m + 1).pow(d as u32);
        (0..total)
            .filter(|&code| {
                let mut c = code;
                let orders: Vec<usize> = (0..d)
                    .map(|_| {
                        let o = c % (m + 1);
                        c /= m + 1;
                        o
                    })
                    .collect();
                let support = orders.iter().filter(|&&o| o > 0).count();
                support == 0 || orders.iter().all(|&o| o <= levels[support])
            })
            .count()
    }

    #[test]
    fn full_counts() {
        assert_eq!(
            BasisSpec::build_full(leg(2, 2), &[0, 2, 2]).unwrap().len(),
            9
        );
        let spec = BasisSpec::build_full(leg(3, 2), &[0, 2, 1, 0]).unwrap();
        assert_eq!(spec.len(), 10);
        assert_eq!(brute_force_count(3, &[0, 2, 1, 0]), 10);
        assert_eq!(BasisSpec::build_full(leg(1, 0), &[0, 0]).unwrap().len(), 1);
        for (d, levels) in [(4, vec![0, 3, 2, 1, 1]), (3, vec![0, 0, 2, 2])] {
            let spec = BasisSpec::build_full(leg(d, 3), &levels).unwrap();
            assert_eq!(spec.len(), brute_force_count(d, &levels));
        }
    }

    #[test]
    fn full_requires_every_level() {
        assert!(BasisSpec::build_full(leg(3, 2), &[0, 2, 1]).is_err());
    }

    #[test]
    fn cardinality_is_power_of_order() {
        let spec = BasisSpec::build_full(leg(3, 3), &[0, 3, 3, 3]).unwrap();
        for level in 1..=3 {
            let per_subset = spec
                .selected()
                .iter()
                .filter(|j| j.support() == (0..level).collect::<Vec<_>>())
                .count();
            assert_eq!(per_subset, 3usize.pow(level as u32));
        }
    }

    #[test]
    fn sparse_counts() {
        let s = BasisSpec::build_sparse(leg(4, 1), &[vec![0, 1], vec![2, 3]], 1).unwrap();
        assert_eq!(s.len() - 1, 2);
        let s = BasisSpec::build_sparse(leg(4, 1), &[], 1).unwrap();
        assert_eq!(s.len(), 1);
        let s = BasisSpec::build_sparse(leg(2, 2), &[vec![0], vec![1], vec![0, 1]], 2).unwrap();
        assert_eq!(s.len() - 1, 8);
        assert!(matches!(
            BasisSpec::build_sparse(leg(2, 2), &[vec![0, 5]], 2),
            Err(HcrError::CoordinateOutOfRange { .. })
        ));
    }

    #[test]
    fn discrete_caps_orders() {
        let fams = vec![
            Family1D::<f64>::discrete(2, 1).unwrap(),
            Family1D::legendre(3),
        ];
        let s = BasisSpec::build_full(fams, &[0, 3, 3]).unwrap();
        // 1 + (1 + 3) + 1·3
        assert_eq!(s.len(), 8);
    }

    #[test]
    fn canonical_order() {
        let s = BasisSpec::build_full(leg(2, 2), &[0, 2, 2]).unwrap();
        let orders: Vec<Vec<usize>> = s.selected().iter().map(|j| j.orders().to_vec()).collect();
        assert_eq!(
            orders,
            vec![
                vec![0, 0],
                vec![1, 0],
                vec![2, 0],
                vec![0, 1],
                vec![0, 2],
                vec![1, 1],
                vec![1, 2],
                vec![2, 1],
                vec![2, 2]
            ]
        );
    }

    #[test]
    fn eval_function_examples() {
        let s = BasisSpec::build_full(leg(2, 2), &[0, 2, 2]).unwrap();
        let c = MultiIndex::constant(2);
        assert_eq!(s.eval_function(&c, &[None, None]).unwrap(), 1.0);
        let j11 = MultiIndex::new(vec![1, 1]);
        assert!((s.eval_function(&j11, &[Some(1.0), Some(1.0)]).unwrap() - 3.0).abs() < 1e-12);
        let j10 = MultiIndex::new(vec![1, 0]);
        assert!(s.eval_function(&j10, &[Some(0.5), None]).unwrap().abs() < 1e-15);
        // poisoned off-support slot is never read
        assert!(s.eval_function(&j10, &[Some(0.5), Some(f64::NAN)]).is_ok());
        assert_eq!(
            s.eval_function(&j11, &[Some(0.5), None]),
            Err(HcrError::MissingCoordinate(1))
        );
        assert!(matches!(
            s.eval_function(&j11, &[Some(0.5), Some(2.0)]),
            Err(HcrError::OutOfUnitInterval { .. })
        ));
    }

    #[test]
    fn tensor_orthonormality() {
        for (d, m) in [(1usize, 3usize), (2, 3), (3, 2)] {
            let levels = vec![m; d + 1];
            let s = BasisSpec::build_full(leg(d, m), &levels).unwrap();
            let q = GaussLegendre::<f64>::for_degree(2 * m);
            let nq = q.len();
            let sel = s.selected();
            for a in 0..sel.len() {
                for b in a..sel.len() {
                    let mut total = 0.0;
                    let mut idx = vec![0usize; d];
                    loop {
                        let x: Vec<Option<f64>> = idx.iter().map(|&k| Some(q.nodes()[k])).collect();
                        let w: f64 = idx.iter().map(|&k| q.weights()[k]).product();
                        total += w
                            * s.eval_function(&sel[a], &x).unwrap()
                            * s.eval_function(&sel[b], &x).unwrap();
                        let mut t = 0;
                        while t < d {
                            idx[t] += 1;
                            if idx[t] < nq {
                                break;
                            }
                            idx[t] = 0;
                            t += 1;
                        }
                        if t == d {
                            break;
                        }
                    }
                    let want = if a == b { 1.0 } else { 0.0 };
                    assert!(
                        (total - want).abs() < 1e-9,
                        "{} {} {}",
                        sel[a],
                        sel[b],
                        total
                    );
                }
            }
        }
    }

    #[test]
    fn combinations_enumerate_binomially() {
        let mut n = 0;
        for_each_combination(6, 3, |_| n += 1);
        assert_eq!(n, 20);
        let mut seen = Vec::new();
        for_each_combination(3, 2, |c| seen.push(c.to_vec()));
        assert_eq!(seen, vec![vec![0, 1], vec![0, 2], vec![1, 2]]);
        let mut z = 0;
        for_each_combination(3, 0, |_| z += 1);
        assert_eq!(z, 1);
    }
}
