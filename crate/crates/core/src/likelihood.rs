//! Log-likelihood, its missing-data gradient, ridge-penalized ascent, and
//! repair of negative densities.

use crate::dataset::Dataset;
use crate::error::{HcrError, Result};
use crate::model::Model;
use crate::Scalar;

/// Backtracking gives up after this many step reductions.
pub const MAX_BACKTRACKS: usize = 60;

/// Per record: `(term position, f(x))` for every term whose support is known.
struct Design<T> {
    rows: Vec<Vec<(usize, T)>>,
}

impl<T: Scalar> Design<T> {
    fn new(model: &Model<T>, data: &Dataset<T>) -> Result<Self> {
        if data.dim() != model.dim() {
            return Err(HcrError::DimensionMismatch {
                expected: model.dim(),
                found: data.dim(),
            });
        }
        let spec = model.spec();
        let rows = data
            .records()
            .iter()
            .map(|r| {
                let x = r.values();
                model
                    .terms()
                    .iter()
                    .enumerate()
                    .filter(|(_, t)| t.index.supported_by(|i| x[i].is_some()))
                    .map(|(p, t)| spec.eval_function(&t.index, x).map(|v| (p, v)))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { rows })
    }

    fn density(&self, k: usize, coefficients: &[T]) -> T {
        self.rows[k].iter().map(|&(p, v)| coefficients[p] * v).sum()
    }

    /// Records that enter some non-constant term's evidence set.
    fn usable(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.rows.len()).filter(|&k| self.rows[k].len() > 1)
    }
}

/// `F(a) = (1/n') Σ ln ρ(x^k)` over the `n'` complete records.
pub fn log_likelihood<T: Scalar>(model: &Model<T>, data: &Dataset<T>) -> Result<T> {
    let coefficients: Vec<T> = model.terms().iter().map(|t| t.coefficient).collect();
    let design = Design::new(model, data)?;
    complete_log_likelihood(&design, data, &coefficients)
}

fn complete_log_likelihood<T: Scalar>(
    design: &Design<T>,
    data: &Dataset<T>,
    coefficients: &[T],
) -> Result<T> {
    let mut total = T::zero();
    let mut n = 0usize;
    let mut bad = Vec::new();
    for (k, r) in data.records().iter().enumerate() {
        if !r.is_complete() {
            continue;
        }
        let rho = design.density(k, coefficients);
        if rho > T::zero() {
            total += rho.ln();
        } else {
            bad.push(k);
        }
        n += 1;
    }
    if n == 0 {
        return Err(HcrError::NoCompleteRecords);
    }
    if !bad.is_empty() {
        return Err(HcrError::NonPositiveDensity { records: bad });
    }
    Ok(total / T::count(n))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gradient<T> {
    /// Aligned with `model.terms()`; the constant entry is 0.
    pub values: Vec<T>,
    /// Terms with an empty evidence set (gradient 0).
    pub no_evidence: Vec<bool>,
}

/// For `f` with support `C`: `(1/|K_C|) Σ_{k ∈ K_C} f(x^k) / ρ(x^k)`.
///
/// For an incomplete record `ρ` is the marginal density of its known
/// coordinates; on complete data this is the exact gradient of
/// [`log_likelihood`].
pub fn gradient<T: Scalar>(model: &Model<T>, data: &Dataset<T>) -> Result<Gradient<T>> {
    let coefficients: Vec<T> = model.terms().iter().map(|t| t.coefficient).collect();
    let design = Design::new(model, data)?;
    gradient_with(&design, model, &coefficients)
}

fn gradient_with<T: Scalar>(
    design: &Design<T>,
    model: &Model<T>,
    coefficients: &[T],
) -> Result<Gradient<T>> {
    let nterms = model.terms().len();
    let mut sums = vec![T::zero(); nterms];
    let mut counts = vec![0usize; nterms];
    let mut bad = Vec::new();
    for k in design.usable() {
        let rho = design.density(k, coefficients);
        if !(rho > T::zero()) {
            bad.push(k);
            continue;
        }
        for &(p, v) in &design.rows[k] {
            sums[p] += v / rho;
            counts[p] += 1;
        }
    }
    if !bad.is_empty() {
        return Err(HcrError::NonPositiveDensity { records: bad });
    }
    let mut values = vec![T::zero(); nterms];
    let mut no_evidence = vec![false; nterms];
    for (p, t) in model.terms().iter().enumerate() {
        if t.index.is_constant() {
            continue;
        }
        if counts[p] == 0 {
            no_evidence[p] = true;
        } else {
            values[p] = sums[p] / T::count(counts[p]);
        }
    }
    Ok(Gradient {
        values,
        no_evidence,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefineConfig<T> {
    pub steps: usize,
    pub step_size: T,
    /// Ridge weight `ξ` on `Σ_{f ≠ ∅} a_f²`.
    pub ridge: T,
    /// Every usable record must keep at least this density.
    pub positivity_margin: T,
    pub backtrack_factor: T,
}

impl<T: Scalar> Default for RefineConfig<T> {
    fn default() -> Self {
        Self {
            steps: 10,
            step_size: T::lit(0.1),
            ridge: T::zero(),
            positivity_margin: T::lit(1e-6),
            backtrack_factor: T::lit(0.5),
        }
    }
}

impl<T: Scalar> RefineConfig<T> {
    fn validate(&self) -> Result<()> {
        let ok = self.step_size > T::zero()
            && self.ridge >= T::zero()
            && self.positivity_margin >= T::zero()
            && self.backtrack_factor > T::zero()
            && self.backtrack_factor < T::one();
        if !ok {
            return Err(HcrError::InvalidConfig(
                "need step_size > 0, ridge >= 0, margin >= 0 and backtrack factor in (0, 1)".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceEntry<T> {
    pub step: usize,
    /// `F(a) - ξ Σ a_f²`.
    pub objective: T,
    pub log_likelihood: T,
    /// Accepted step length (0 for the starting point).
    pub step_size: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RefineOutcome<T> {
    pub model: Model<T>,
    pub trace: Vec<TraceEntry<T>>,
    /// Stopped early: no admissible step improved the objective.
    pub stalled: bool,
}

/// Gradient ascent on `F(a) - ξ Σ a_f²` with the constant held at 1.
///
/// Each step starts at `step_size` and shrinks by `backtrack_factor` until the
/// density at every usable record stays at or above the margin and the
/// objective does not decrease. `F` is computed on complete records only while
/// the gradient uses each subset's full evidence, so under missing data the
/// trace is indicative.
pub fn refine<T: Scalar>(
    model: &Model<T>,
    data: &Dataset<T>,
    config: &RefineConfig<T>,
) -> Result<RefineOutcome<T>> {
    config.validate()?;
    let design = Design::new(model, data)?;
    let mut a: Vec<T> = model.terms().iter().map(|t| t.coefficient).collect();
    let constant: Vec<bool> = model
        .terms()
        .iter()
        .map(|t| t.index.is_constant())
        .collect();

    let penalty = |a: &[T]| -> T {
        config.ridge
            * a.iter()
                .zip(&constant)
                .filter(|(_, &c)| !c)
                .map(|(&v, _)| v * v)
                .sum::<T>()
    };
    let positive = |a: &[T], floor: T| design.usable().all(|k| design.density(k, a) >= floor);

    let bad: Vec<usize> = design
        .usable()
        .filter(|&k| !(design.density(k, &a) > T::zero()))
        .collect();
    if !bad.is_empty() {
        return Err(HcrError::NonPositiveDensity { records: bad });
    }
    let mut ll = complete_log_likelihood(&design, data, &a)?;
    let mut objective = ll - penalty(&a);
    let mut trace = vec![TraceEntry {
        step: 0,
        objective,
        log_likelihood: ll,
        step_size: T::zero(),
    }];
    let mut stalled = false;

    for step in 1..=config.steps {
        let g = gradient_with(&design, model, &a)?;
        let direction: Vec<T> = a
            .iter()
            .zip(&g.values)
            .zip(&constant)
            .map(|((&ai, &gi), &c)| {
                if c {
                    T::zero()
                } else {
                    gi - T::lit(2.0) * config.ridge * ai
                }
            })
            .collect();
        let mut eta = config.step_size;
        let mut accepted = None;
        let mut admissible = false;
        for _ in 0..=MAX_BACKTRACKS {
            let cand: Vec<T> = a
                .iter()
                .zip(&direction)
                .map(|(&ai, &di)| ai + eta * di)
                .collect();
            if positive(&cand, config.positivity_margin) {
                admissible = true;
                let cand_ll = complete_log_likelihood(&design, data, &cand)?;
                let cand_obj = cand_ll - penalty(&cand);
                if cand_obj >= objective {
                    accepted = Some((cand, cand_ll, cand_obj));
                    break;
                }
            }
            eta *= config.backtrack_factor;
        }
        match accepted {
            Some((cand, cand_ll, cand_obj)) => {
                a = cand;
                ll = cand_ll;
                objective = cand_obj;
                trace.push(TraceEntry {
                    step,
                    objective,
                    log_likelihood: ll,
                    step_size: eta,
                });
            }
            None if admissible => {
                stalled = true;
                break;
            }
            None => {
                return Err(HcrError::BacktrackExhausted {
                    step,
                    halvings: MAX_BACKTRACKS,
                })
            }
        }
    }

    let mut refined = model.clone();
    for (t, &v) in refined.terms_mut().iter_mut().zip(&a) {
        if !t.index.is_constant() {
            t.coefficient = v;
        }
    }
    Ok(RefineOutcome {
        model: refined,
        trace,
        stalled,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RepairStrategy {
    /// Scale every non-constant coefficient by one factor `t ∈ (0, 1)`.
    RescaleAll,
    /// Shrink only the term pulling the witness down the most.
    ReduceLargest,
}

/// Lifts the density at `witness` to exactly `margin` (up to rounding, never
/// below). `ReduceLargest` may push its coefficient through zero when removing
/// the term alone is not enough.
pub fn repair_negative<T: Scalar>(
    model: &Model<T>,
    witness: &[T],
    strategy: RepairStrategy,
    margin: T,
) -> Result<Model<T>> {
    let density = model.evaluate(witness)?;
    if density >= margin {
        return Err(HcrError::WitnessNotNegative {
            density: density.as_f64(),
            margin: margin.as_f64(),
        });
    }
    let spec = model.spec();
    let x: Vec<Option<T>> = witness.iter().map(|&v| Some(v)).collect();
    let contributions: Vec<T> = model
        .terms()
        .iter()
        .map(|t| Ok(t.coefficient * spec.eval_function(&t.index, &x)?))
        .collect::<Result<_>>()?;
    let base: T = model
        .terms()
        .iter()
        .zip(&contributions)
        .filter(|(t, _)| t.index.is_constant())
        .map(|(_, &c)| c)
        .sum();
    let rest = density - base;

    let mut repaired = model.clone();
    let mut target = margin;
    for _ in 0..16 {
        match strategy {
            RepairStrategy::RescaleAll => {
                // base + t·rest = target
                if !(rest < T::zero()) || !(target < base) {
                    return Err(HcrError::InvalidConfig(
                        "rescaling cannot reach the margin (margin must be below the constant term)".into(),
                    ));
                }
                let t = (target - base) / rest;
                for (rt, ot) in repaired.terms_mut().iter_mut().zip(model.terms()) {
                    if !ot.index.is_constant() {
                        rt.coefficient = ot.coefficient * t;
                    }
                }
            }
            RepairStrategy::ReduceLargest => {
                let (p, c) = contributions
                    .iter()
                    .enumerate()
                    .filter(|(p, &c)| !model.terms()[*p].index.is_constant() && c < T::zero())
                    .min_by(|a, b| a.1.partial_cmp(b.1).unwrap_or(std::cmp::Ordering::Equal))
                    .map(|(p, &c)| (p, c))
                    .ok_or_else(|| {
                        HcrError::InvalidConfig("no term pulls the witness density down".into())
                    })?;
                // density - (1 - s)·c = target
                let s = T::one() - (density - target) / c;
                repaired.terms_mut()[p].coefficient = model.terms()[p].coefficient * s;
            }
        }
        let now = repaired.evaluate(witness)?;
        if now >= margin {
            return Ok(repaired);
        }
        target += (margin - now).max(T::epsilon() * (T::one() + margin.abs()));
    }
    Err(HcrError::InvalidConfig(
        "repair could not reach the margin".into(),
    ))
}

/// Scans corners of `[0, 1]^d`, then edge midpoints, then a Halton sequence,
/// evaluating at most `budget` points; returns the most negative one.
pub fn find_negative_witness<T: Scalar>(model: &Model<T>, budget: usize) -> Option<Vec<T>> {
    find_negative_witness_from(model, budget, 0)
}

/// As [`find_negative_witness`], with the Halton part starting at `offset`.
pub fn find_negative_witness_from<T: Scalar>(
    model: &Model<T>,
    budget: usize,
    offset: u64,
) -> Option<Vec<T>> {
    let d = model.dim();
    let families = model.spec().families();
    let mut best: Option<(T, Vec<T>)> = None;
    for point in candidates::<T>(d, offset).take(budget) {
        let point: Vec<T> = point
            .iter()
            .zip(families)
            .map(|(&x, f)| f.snap(x))
            .collect();
        let Ok(v) = model.evaluate(&point) else {
            continue;
        };
        if v < T::zero() && best.as_ref().is_none_or(|(b, _)| v < *b) {
            best = Some((v, point));
        }
    }
    best.map(|(_, p)| p)
}

fn candidates<T: Scalar>(d: usize, offset: u64) -> impl Iterator<Item = Vec<T>> {
    let corner_count = if d < 63 { 1u64 << d } else { u64::MAX };
    let corners = (0..corner_count).map(move |code| {
        (0..d)
            .map(|i| {
                if i < 64 && (code >> i) & 1 == 1 {
                    T::one()
                } else {
                    T::zero()
                }
            })
            .collect()
    });
    let others = d.saturating_sub(1);
    let other_count = if others < 63 {
        1u64 << others
    } else {
        u64::MAX
    };
    let edges = (0..d).flat_map(move |free| {
        (0..other_count).map(move |code| {
            let mut bit = 0;
            (0..d)
                .map(|i| {
                    if i == free {
                        return T::lit(0.5);
                    }
                    let v = if bit < 64 && (code >> bit) & 1 == 1 {
                        T::one()
                    } else {
                        T::zero()
                    };
                    bit += 1;
                    v
                })
                .collect()
        })
    });
    let primes = first_primes(d);
    let halton = (1u64..).map(move |k| {
        primes
            .iter()
            .map(|&p| T::lit(radical_inverse(k + offset, p)))
            .collect()
    });
    corners.chain(edges).chain(halton)
}

fn radical_inverse(mut k: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut out = 0.0;
    while k > 0 {
        out += f * (k % base) as f64;
        k /= base;
        f *= inv;
    }
    out
}

fn first_primes(n: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(n);
    let mut c = 2u64;
    while out.len() < n {
        if out
            .iter()
            .take_while(|&&p| p * p <= c)
            .all(|&p| !c.is_multiple_of(p))
        {
            out.push(c);
        }
        c += 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis1d::Family1D;
    use crate::tensor_basis::{BasisSpec, MultiIndex};

    fn spec2(m: usize) -> BasisSpec<f64> {
        BasisSpec::build_full(vec![Family1D::legendre(m); 2], &[0, m, m]).unwrap()
    }

    fn data() -> Dataset<f64> {
        Dataset::from_rows(vec![
            vec![Some(0.1), Some(0.2)],
            vec![Some(0.4), Some(0.5)],
            vec![Some(0.9), Some(0.7)],
            vec![Some(0.6), None],
        ])
        .unwrap()
    }

    #[test]
    fn uniform_log_likelihood_is_zero() {
        let m = Model::uniform(spec2(2));
        assert_eq!(log_likelihood(&m, &data()).unwrap(), 0.0);
    }

    #[test]
    fn density_two_gives_ln_two() {
        // f_1 over the binary grid is ±1; a = 1 gives density 2 at x = 1, 0 at x = 0
        let spec =
            BasisSpec::build_full(vec![Family1D::<f64>::discrete(2, 1).unwrap()], &[0, 1]).unwrap();
        let m = Model::with_coefficients(spec, [(MultiIndex::new(vec![1]), 1.0)]).unwrap();
        let ones = Dataset::from_rows(vec![vec![Some(1.0)], vec![Some(1.0)]]).unwrap();
        assert!((log_likelihood(&m, &ones).unwrap() - 2f64.ln()).abs() < 1e-15);
        let zero = Dataset::from_rows(vec![vec![Some(1.0)], vec![Some(0.0)]]).unwrap();
        assert_eq!(
            log_likelihood(&m, &zero),
            Err(HcrError::NonPositiveDensity { records: vec![1] })
        );
    }

    #[test]
    fn no_complete_records() {
        let m = Model::uniform(spec2(1));
        let d = Dataset::from_rows(vec![vec![Some(0.3), None]]).unwrap();
        assert_eq!(log_likelihood(&m, &d), Err(HcrError::NoCompleteRecords));
    }

    #[test]
    fn gradient_at_uniform_equals_fit() {
        let spec = spec2(2);
        let d = data();
        let fitted = crate::estimator::fit(&spec, &d).unwrap();
        let g = gradient(&Model::uniform(spec), &d).unwrap();
        for (t, &gv) in fitted.terms().iter().zip(&g.values) {
            if t.index.is_constant() {
                assert_eq!(gv, 0.0);
            } else {
                assert!((t.coefficient - gv).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn no_evidence_gradient_is_zero() {
        let d = Dataset::from_rows(vec![vec![Some(0.3), None], vec![None, Some(0.4)]]).unwrap();
        let m = Model::uniform(spec2(1));
        let g = gradient(&m, &d).unwrap();
        let p = m.spec().position(&MultiIndex::new(vec![1, 1])).unwrap();
        assert!(g.no_evidence[p]);
        assert_eq!(g.values[p], 0.0);
    }

    #[test]
    fn refine_zero_steps_is_identity() {
        let spec = spec2(2);
        let d = data();
        let m = crate::estimator::fit(&spec, &d).unwrap();
        let out = refine(
            &m,
            &d,
            &RefineConfig {
                steps: 0,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(out.model, m);
        assert_eq!(out.trace.len(), 1);
    }

    #[test]
    fn refine_ascends_and_ridge_shrinks() {
        let spec = spec2(1);
        let d = data();
        let m = crate::estimator::fit(&spec, &d).unwrap();
        let out = refine(
            &m,
            &d,
            &RefineConfig {
                steps: 20,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(out
            .trace
            .windows(2)
            .all(|w| w[1].objective >= w[0].objective));
        assert!(out.trace.last().unwrap().log_likelihood > out.trace[0].log_likelihood);
        assert_eq!(out.model.terms()[0].coefficient, 1.0);
        let heavy = refine(
            &m,
            &d,
            &RefineConfig {
                steps: 30,
                ridge: 1e6,
                ..Default::default()
            },
        )
        .unwrap();
        for t in heavy.model.terms().iter().skip(1) {
            assert!(t.coefficient.abs() < 1e-3, "{}", t.coefficient);
        }
    }

    #[test]
    fn repair_examples() {
        let spec = BasisSpec::build_full(vec![Family1D::<f64>::legendre(1)], &[0, 1]).unwrap();
        let j = MultiIndex::new(vec![1]);
        // 1 + a·√3(2x - 1) at x = 0 equals -0.5 when a = 1.5/√3
        let a = 1.5 / 3f64.sqrt();
        let m = Model::with_coefficients(spec, [(j.clone(), a)]).unwrap();
        assert!((m.evaluate(&[0.0]).unwrap() + 0.5).abs() < 1e-12);
        let r = repair_negative(&m, &[0.0], RepairStrategy::RescaleAll, 0.0).unwrap();
        assert!((r.coefficient(&j).unwrap() / a - 2.0 / 3.0).abs() < 1e-12);
        assert!(r.evaluate(&[0.0]).unwrap() >= 0.0);
        let s = repair_negative(&m, &[0.0], RepairStrategy::ReduceLargest, 0.0).unwrap();
        assert!((s.coefficient(&j).unwrap() - r.coefficient(&j).unwrap()).abs() < 1e-12);
        assert!(matches!(
            repair_negative(&m, &[1.0], RepairStrategy::RescaleAll, 0.0),
            Err(HcrError::WitnessNotNegative { .. })
        ));
    }

    #[test]
    fn witness_search() {
        let spec = spec2(2);
        assert_eq!(
            find_negative_witness(&Model::uniform(spec.clone()), 500),
            None
        );
        let m = Model::with_coefficients(spec, [(MultiIndex::new(vec![2, 2]), 0.9)]).unwrap();
        let w = find_negative_witness(&m, 500).unwrap();
        assert!(m.evaluate(&w).unwrap() < 0.0);
        // dense grid oracle: the scan finds the global minimum region
        let mut grid_min = f64::INFINITY;
        for a in 0..=100 {
            for b in 0..=100 {
                grid_min = grid_min.min(m.evaluate(&[a as f64 / 100.0, b as f64 / 100.0]).unwrap());
            }
        }
        assert!(grid_min < 0.0);
        assert!((m.evaluate(&w).unwrap() - grid_min).abs() < 1e-9);
        // budget 1 sees only the origin corner, where the density is 1 + 0.9·5
        assert_eq!(find_negative_witness(&m, 1), None);
    }

    #[test]
    fn adapt_then_refine_keeps_constant() {
        let spec = spec2(1);
        let mut m = Model::uniform(spec);
        for r in data().records() {
            m.adapt(r, 0.2).unwrap();
        }
        let out = refine(&m, &data(), &RefineConfig::default()).unwrap();
        assert_eq!(out.model.terms()[0].coefficient, 1.0);
    }
}
