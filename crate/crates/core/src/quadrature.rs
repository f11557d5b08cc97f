//! Globally adaptive Gauss–Legendre quadrature on finite intervals.
//!
//! Each panel is integrated with an `n`-point Gauss–Legendre rule and again
//! as two half panels; the difference is the panel's error estimate and the
//! half-panel sum is its value. The panel with the largest estimate is
//! bisected until the summed estimate drops below the tolerance. Integrable
//! endpoint singularities are fine since nodes never touch the endpoints.

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone)]
pub struct Quadrature<T> {
    pub abs_tol: T,
    pub max_subdivisions: usize,
    nodes: Vec<T>,
    weights: Vec<T>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult<T> {
    pub value: T,
    pub error_bound: T,
    pub subdivisions: usize,
}

#[derive(Debug, Clone, Copy)]
struct Panel<T> {
    a: T,
    b: T,
    value: T,
    error: T,
}

const DEFAULT_ORDER: usize = 10;

impl<T: Real> Quadrature<T> {
    pub fn new(abs_tol: T) -> Self {
        Self::with_order(abs_tol, DEFAULT_ORDER, 4000)
    }

    pub fn with_order(abs_tol: T, order: usize, max_subdivisions: usize) -> Self {
        assert!(abs_tol > T::zero(), "tolerance must be positive");
        let (nodes, weights) = gauss_legendre(order);
        Self {
            abs_tol,
            max_subdivisions,
            nodes: nodes.into_iter().map(T::lit).collect(),
            weights: weights.into_iter().map(T::lit).collect(),
        }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    fn rule<F: Fn(T) -> T>(&self, f: &F, a: T, b: T) -> Result<T> {
        let half = (b - a) * T::lit(0.5);
        let mid = (a + b) * T::lit(0.5);
        let mut acc = T::zero();
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            let fx = f(mid + half * x);
            if !fx.is_finite() {
                return Err(Error::Domain(format!(
                    "integrand not finite at {}",
                    (mid + half * x).as_f64()
                )));
            }
            acc += w * fx;
        }
        Ok(acc * half)
    }

    fn panel<F: Fn(T) -> T>(&self, f: &F, a: T, b: T, coarse: T) -> Result<(Panel<T>, T, T)> {
        let mid = (a + b) * T::lit(0.5);
        let left = self.rule(f, a, mid)?;
        let right = self.rule(f, mid, b)?;
        let value = left + right;
        Ok((
            Panel {
                a,
                b,
                value,
                error: (value - coarse).abs(),
            },
            left,
            right,
        ))
    }

    /// Integrates `f` over `[a, b]`.
    pub fn integrate<F: Fn(T) -> T>(&self, f: F, a: T, b: T) -> Result<QuadResult<T>> {
        self.integrate_with_breaks(f, &[a, b])
    }

    /// Integrates over `[points[0], points[last]]`, starting from one panel per
    /// consecutive pair. Use breaks to seed the adaptivity near features the
    /// coarse rule could miss (sharp peaks, kinks).
    pub fn integrate_with_breaks<F: Fn(T) -> T>(&self, f: F, points: &[T]) -> Result<QuadResult<T>> {
        if points.len() < 2 {
            return Err(Error::Domain("need at least two integration limits".into()));
        }
        if points.windows(2).any(|w| !(w[0] <= w[1])) {
            return Err(Error::Domain("integration limits must be ascending".into()));
        }
        // Each panel also caches its two half-panel values for the next split.
        let mut panels: Vec<(Panel<T>, T, T)> = Vec::new();
        for w in points.windows(2) {
            if w[0] == w[1] {
                continue;
            }
            let coarse = self.rule(&f, w[0], w[1])?;
            panels.push(self.panel(&f, w[0], w[1], coarse)?);
        }
        let mut subdivisions = 0;
        loop {
            let total_err: T = panels.iter().map(|p| p.0.error).sum();
            if total_err <= self.abs_tol {
                break;
            }
            let Some((worst, _)) = panels
                .iter()
                .enumerate()
                .filter(|(_, p)| splittable(&p.0))
                .max_by(|x, y| x.1 .0.error.partial_cmp(&y.1 .0.error).unwrap())
            else {
                // Nothing left that floating point can bisect.
                break;
            };
            if subdivisions >= self.max_subdivisions {
                return Err(Error::QuadratureFailure {
                    tol: self.abs_tol.as_f64(),
                    error_estimate: total_err.as_f64(),
                    subdivisions,
                });
            }
            let (p, left, right) = panels.swap_remove(worst);
            let mid = (p.a + p.b) * T::lit(0.5);
            panels.push(self.panel(&f, p.a, mid, left)?);
            panels.push(self.panel(&f, mid, p.b, right)?);
            subdivisions += 1;
        }
        // Summing in position order keeps results independent of split history.
        panels.sort_by(|x, y| x.0.a.partial_cmp(&y.0.a).unwrap());
        let value = panels.iter().map(|p| p.0.value).sum();
        let error_bound: T = panels.iter().map(|p| p.0.error).sum();
        if error_bound > self.abs_tol {
            return Err(Error::QuadratureFailure {
                tol: self.abs_tol.as_f64(),
                error_estimate: error_bound.as_f64(),
                subdivisions,
            });
        }
        Ok(QuadResult {
            value,
            error_bound,
            subdivisions,
        })
    }
}

fn splittable<T: Real>(p: &Panel<T>) -> bool {
    let mid = (p.a + p.b) * T::lit(0.5);
    mid > p.a && mid < p.b && (p.b - p.a) > T::epsilon() * p.a.abs().max(p.b.abs()) * T::lit(8.0)
}

/// Integrates `f` over `[a, b]` to absolute tolerance `tol`.
pub fn integrate_finite<T: Real, F: Fn(T) -> T>(f: F, a: T, b: T, tol: T) -> Result<QuadResult<T>> {
    if !(a <= b) {
        return Err(Error::Domain("integrate_finite needs a <= b".into()));
    }
    Quadrature::new(tol).integrate(f, a, b)
}

/// Nodes and weights of the `n`-point Gauss–Legendre rule on [-1, 1],
/// by Newton iteration on `P_n`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                let (_, d) = legendre_with_derivative(n, x);
                dp = d;
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}
