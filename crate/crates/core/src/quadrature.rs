//! Gauss-Legendre quadrature mapped to `[0, 1]`.

use crate::Scalar;

#[derive(Debug, Clone)]
pub struct GaussLegendre<T> {
    nodes: Vec<T>,
    weights: Vec<T>,
}

impl<T: Scalar> GaussLegendre<T> {
    /// `n`-point rule on `[0, 1]`; exact for polynomials of degree `2n - 1`.
    pub fn new(n: usize) -> Self {
        let n = n.max(1);
        let mut nodes = vec![T::zero(); n];
        let mut weights = vec![T::zero(); n];
        // Newton on P_n in f64 from the Tricomi initial guess; nodes are symmetric.
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut t = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre_and_derivative(n, t);
                dp = d;
                let dt = p / d;
                t -= dt;
                if dt.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_and_derivative(n, t);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - t * t) * dp * dp);
            // map [-1, 1] -> [0, 1]
            nodes[i] = T::lit(0.5 * (1.0 - t));
            nodes[n - 1 - i] = T::lit(0.5 * (1.0 + t));
            weights[i] = T::lit(0.5 * w);
            weights[n - 1 - i] = T::lit(0.5 * w);
        }
        Self { nodes, weights }
    }

    /// Smallest rule with a margin of two nodes over exactness for degree `deg`.
    pub fn for_degree(deg: usize) -> Self {
        Self::new((deg + 2).div_ceil(2) + 2)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn integrate<F: FnMut(T) -> T>(&self, f: F) -> T {
        self.integrate_on(T::zero(), T::one(), f)
    }

    pub fn integrate_on<F: FnMut(T) -> T>(&self, a: T, b: T, mut f: F) -> T {
        let h = b - a;
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(a + h * x))
            .sum::<T>()
            * h
    }
}

fn legendre_and_derivative(n: usize, t: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = t;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let d = nf * (t * p1 - p0) / (t * t - 1.0);
    (p1, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_monomials_exactly() {
        for n in 1..12 {
            let q = GaussLegendre::<f64>::new(n);
            for p in 0..(2 * n) {
                let got = q.integrate(|x| x.powi(p as i32));
                let want = 1.0 / (p as f64 + 1.0);
                assert!((got - want).abs() < 1e-14, "n={n} p={p} got={got}");
            }
        }
    }

    #[test]
    fn weights_sum_to_one() {
        let q = GaussLegendre::<f64>::new(37);
        let s: f64 = q.weights().iter().sum();
        assert!((s - 1.0).abs() < 1e-14);
    }

    #[test]
    fn subinterval() {
        let q = GaussLegendre::<f64>::new(4);
        let got = q.integrate_on(0.2, 0.7, |x| x * x * x);
        let want = (0.7f64.powi(4) - 0.2f64.powi(4)) / 4.0;
        assert!((got - want).abs() < 1e-15);
    }
}
