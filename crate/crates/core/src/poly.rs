//! Dense univariate polynomials in the power basis (ascending coefficients).

use crate::Scalar;

const MAX_BISECTIONS: usize = 200;

pub fn eval<T: Scalar>(coeffs: &[T], x: T) -> T {
    coeffs.iter().rev().fold(T::zero(), |acc, &c| acc * x + c)
}

pub fn derivative<T: Scalar>(coeffs: &[T]) -> Vec<T> {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, &c)| c * T::count(k))
        .collect()
}

/// `∫_a^b x^power · p(x) dx`, exact up to rounding.
pub fn integrate_weighted<T: Scalar>(coeffs: &[T], power: usize, a: T, b: T) -> T {
    coeffs
        .iter()
        .enumerate()
        .map(|(k, &c)| {
            let e = k + power + 1;
            let ef = T::count(e);
            c * (b.powi(e as i32) - a.powi(e as i32)) / ef
        })
        .sum()
}

pub fn add_scaled<T: Scalar>(acc: &mut Vec<T>, coeffs: &[T], scale: T) {
    if acc.len() < coeffs.len() {
        acc.resize(coeffs.len(), T::zero());
    }
    for (a, &c) in acc.iter_mut().zip(coeffs) {
        *a += scale * c;
    }
}

/// Drops trailing coefficients that are negligible relative to the largest one.
fn trimmed<T: Scalar>(coeffs: &[T]) -> &[T] {
    let scale = coeffs.iter().fold(T::zero(), |m, c| m.max(c.abs()));
    if scale == T::zero() {
        return &coeffs[..0];
    }
    let tol = scale * T::epsilon() * T::lit(16.0);
    let mut len = coeffs.len();
    while len > 0 && coeffs[len - 1].abs() <= tol {
        len -= 1;
    }
    &coeffs[..len]
}

/// Real roots of `p` in `[a, b]`, ascending.
///
/// Roots of `p'` split `[a, b]` into monotone pieces, each holding at most one
/// root of `p`, which is then located by bisection to `tol`.
pub fn real_roots<T: Scalar>(coeffs: &[T], a: T, b: T, tol: T) -> Vec<T> {
    let p = trimmed(coeffs);
    match p.len() {
        0 | 1 => return Vec::new(),
        2 => {
            let r = -p[0] / p[1];
            return if r >= a && r <= b {
                vec![r]
            } else {
                Vec::new()
            };
        }
        _ => {}
    }
    let dp = derivative(p);
    let mut cuts = vec![a];
    cuts.extend(
        real_roots(&dp, a, b, tol)
            .into_iter()
            .filter(|&r| r > a && r < b),
    );
    cuts.push(b);

    let mut roots: Vec<T> = Vec::new();
    for w in cuts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        if let Some(r) = bisect(|x| eval(p, x), lo, hi, tol) {
            if roots.last().is_none_or(|&last| (r - last).abs() > tol) {
                roots.push(r);
            }
        }
    }
    roots
}

/// Finds a sign change of `f` on `[lo, hi]` (endpoint zeros included).
pub fn bisect<T: Scalar, F: Fn(T) -> T>(f: F, lo: T, hi: T, tol: T) -> Option<T> {
    let (mut lo, mut hi) = (lo, hi);
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == T::zero() {
        return Some(lo);
    }
    if fhi == T::zero() {
        return Some(hi);
    }
    if (flo > T::zero()) == (fhi > T::zero()) {
        return None;
    }
    let two = T::lit(2.0);
    for _ in 0..MAX_BISECTIONS {
        let mid = (lo + hi) / two;
        if hi - lo <= tol || mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == T::zero() {
            return Some(mid);
        }
        if (fm > T::zero()) == (flo > T::zero()) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Some((lo + hi) / two)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn from_roots(roots: &[f64]) -> Vec<f64> {
        let mut p = vec![1.0];
        for &r in roots {
            let mut q = vec![0.0; p.len() + 1];
            for (k, &c) in p.iter().enumerate() {
                q[k] -= r * c;
                q[k + 1] += c;
            }
            p = q;
        }
        p
    }

    #[test]
    fn finds_all_roots_in_interval() {
        let p = from_roots(&[0.1, 0.35, 0.36, 0.8, 1.7]);
        let r = real_roots(&p, 0.0, 1.0, 1e-12);
        assert_eq!(r.len(), 4);
        for (got, want) in r.iter().zip([0.1, 0.35, 0.36, 0.8]) {
            assert!((got - want).abs() < 1e-10);
        }
    }

    #[test]
    fn no_roots_for_positive_quadratic() {
        assert!(real_roots(&[1.0, 0.0, 1.0], -3.0, 3.0, 1e-12).is_empty());
    }

    #[test]
    fn weighted_integral() {
        // ∫_0^1 x (1 + 2x) dx = 1/2 + 2/3
        let v: f64 = integrate_weighted(&[1.0, 2.0], 1, 0.0, 1.0);
        assert!((v - (0.5 + 2.0 / 3.0)).abs() < 1e-15);
    }

    #[test]
    fn trailing_zero_coefficients_are_ignored() {
        let r = real_roots(&[-0.5, 1.0, 0.0, 0.0], 0.0, 1.0, 1e-12);
        assert_eq!(r, vec![0.5]);
    }
}
