//! Dense complex linear algebra for the small matrices the schemes use
//! (at most a few dozen rows).

use std::ops::{Index, IndexMut};

use num_complex::Complex;

use crate::scalar::Real;

/// Row-major dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> CMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex::new(T::zero(), T::zero()); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut out = Self::zeros(n, n);
        for i in 0..n {
            out[(i, i)] = Complex::new(T::one(), T::zero());
        }
        out
    }

    /// Builds a matrix from rows; panics if rows are ragged.
    pub fn from_rows(rows: &[Vec<Complex<T>>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        Self {
            rows: rows.len(),
            cols,
            data: rows.iter().flatten().copied().collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn column(&self, j: usize) -> Vec<Complex<T>> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn scale(&self, s: T) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    /// `A^H A`.
    pub fn gram(&self) -> Self {
        let mut g = Self::zeros(self.cols, self.cols);
        for i in 0..self.cols {
            for j in i..self.cols {
                let mut acc = Complex::new(T::zero(), T::zero());
                for k in 0..self.rows {
                    acc += self[(k, i)].conj() * self[(k, j)];
                }
                g[(i, j)] = acc;
                g[(j, i)] = acc.conj();
            }
        }
        g
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(T::zero(), T::max)
    }
}

impl<T> Index<(usize, usize)> for CMatrix<T> {
    type Output = Complex<T>;

    fn index(&self, (i, j): (usize, usize)) -> &Complex<T> {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for CMatrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<T> {
        &mut self.data[i * self.cols + j]
    }
}

fn zero<T: Real>() -> Complex<T> {
    Complex::new(T::zero(), T::zero())
}

/// Unit-modulus phase of `z`, or 1 when `z = 0`.
pub(crate) fn phase<T: Real>(z: Complex<T>) -> Complex<T> {
    let r = z.norm();
    if r == T::zero() {
        Complex::new(T::one(), T::zero())
    } else {
        z / r
    }
}

/// Thin QR by Householder reflections, returning the first `a.cols()`
/// columns of `Q` with each column rotated by the phase of the matching
/// diagonal entry of `R`. The result equals the `Q` factor of the unique
/// QR decomposition whose `R` has a positive real diagonal.
pub fn thin_q_phase_corrected<T: Real>(a: &CMatrix<T>) -> CMatrix<T> {
    let (m, n) = (a.rows(), a.cols());
    assert!(n <= m, "thin QR needs rows >= cols");
    let mut work = a.clone();
    let mut reflectors: Vec<Option<Vec<Complex<T>>>> = Vec::with_capacity(n);
    let mut diag_phase = Vec::with_capacity(n);

    for k in 0..n {
        let norm_x = (k..m).map(|i| work[(i, k)].norm_sqr()).sum::<T>().sqrt();
        if norm_x == T::zero() {
            reflectors.push(None);
            diag_phase.push(Complex::new(T::one(), T::zero()));
            continue;
        }
        // alpha = -phase(x0) ||x|| keeps v0 = x0 - alpha away from cancellation.
        let alpha = -phase(work[(k, k)]) * norm_x;
        let mut v: Vec<Complex<T>> = (k..m).map(|i| work[(i, k)]).collect();
        v[0] -= alpha;
        let v_norm = v.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
        for z in &mut v {
            *z /= v_norm;
        }
        apply_reflector(&mut work, &v, k, k);
        diag_phase.push(phase(alpha));
        reflectors.push(Some(v));
    }

    let mut q = CMatrix::zeros(m, n);
    for j in 0..n {
        q[(j, j)] = Complex::new(T::one(), T::zero());
    }
    for k in (0..n).rev() {
        if let Some(v) = &reflectors[k] {
            apply_reflector(&mut q, v, k, 0);
        }
    }
    for (j, &ph) in diag_phase.iter().enumerate() {
        for i in 0..m {
            q[(i, j)] *= ph;
        }
    }
    q
}

/// Applies `I - 2 v v^H` (acting on rows `row0..`) to columns `col0..`.
fn apply_reflector<T: Real>(a: &mut CMatrix<T>, v: &[Complex<T>], row0: usize, col0: usize) {
    let two = T::lit(2.0);
    for j in col0..a.cols() {
        let mut dot = zero();
        for (i, vi) in v.iter().enumerate() {
            dot += vi.conj() * a[(row0 + i, j)];
        }
        let dot = dot * two;
        for (i, vi) in v.iter().enumerate() {
            a[(row0 + i, j)] -= vi * dot;
        }
    }
}

/// Lower Cholesky factor of a Hermitian positive-definite matrix.
/// Returns `None` if a pivot is not positive.
pub fn cholesky<T: Real>(a: &CMatrix<T>) -> Option<CMatrix<T>> {
    let n = a.rows();
    assert_eq!(n, a.cols(), "cholesky needs a square matrix");
    let mut l = CMatrix::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)].re;
        for k in 0..j {
            d -= l[(j, k)].norm_sqr();
        }
        if !(d > T::zero()) {
            return None;
        }
        let d = d.sqrt();
        l[(j, j)] = Complex::new(d, T::zero());
        for i in j + 1..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s / d;
        }
    }
    Some(l)
}

/// Solves `L L^H x = b` given the lower Cholesky factor `L`.
pub fn cholesky_solve<T: Real>(l: &CMatrix<T>, b: &[Complex<T>]) -> Vec<Complex<T>> {
    let n = l.rows();
    let mut y = vec![zero(); n];
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[(i, k)] * y[k];
        }
        y[i] = s / l[(i, i)];
    }
    let mut x = vec![zero(); n];
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in i + 1..n {
            s -= l[(k, i)].conj() * x[k];
        }
        x[i] = s / l[(i, i)];
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    fn matmul(a: &CMatrix<f64>, b: &CMatrix<f64>) -> CMatrix<f64> {
        let mut out = CMatrix::zeros(a.rows(), b.cols());
        for i in 0..a.rows() {
            for j in 0..b.cols() {
                for k in 0..a.cols() {
                    out[(i, j)] += a[(i, k)] * b[(k, j)];
                }
            }
        }
        out
    }

    #[test]
    fn q_columns_orthonormal_and_span_input() {
        let a = CMatrix::from_rows(&[
            vec![c(1.0, 2.0), c(0.5, -1.0)],
            vec![c(-0.3, 0.1), c(2.0, 0.0)],
            vec![c(0.0, 1.0), c(1.0, 1.0)],
        ]);
        let q = thin_q_phase_corrected(&a);
        assert!(q.gram().max_abs_diff(&CMatrix::identity(2)) < 1e-14);
        // R = Q^H A must be upper triangular with positive real diagonal.
        let mut qh = CMatrix::zeros(2, 3);
        for i in 0..3 {
            for j in 0..2 {
                qh[(j, i)] = q[(i, j)].conj();
            }
        }
        let r = matmul(&qh, &a);
        assert!(r[(1, 0)].norm() < 1e-14);
        for j in 0..2 {
            assert!(r[(j, j)].im.abs() < 1e-14 && r[(j, j)].re > 0.0);
        }
        assert!(matmul(&q, &r).max_abs_diff(&a) < 1e-14);
    }

    #[test]
    fn cholesky_solves_hermitian_system() {
        let a = CMatrix::from_rows(&[
            vec![c(4.0, 0.0), c(1.0, 1.0), c(0.0, -0.5)],
            vec![c(1.0, -1.0), c(3.0, 0.0), c(0.2, 0.0)],
            vec![c(0.0, 0.5), c(0.2, 0.0), c(2.0, 0.0)],
        ]);
        let l = cholesky(&a).unwrap();
        let b = vec![c(1.0, 0.0), c(0.0, 2.0), c(-1.0, 1.0)];
        let x = cholesky_solve(&l, &b);
        for i in 0..3 {
            let mut s = Complex::new(0.0, 0.0);
            for k in 0..3 {
                s += a[(i, k)] * x[k];
            }
            assert!((s - b[i]).norm() < 1e-13);
        }
        let not_pd = CMatrix::from_rows(&[vec![c(1.0, 0.0), c(2.0, 0.0)], vec![c(2.0, 0.0), c(1.0, 0.0)]]);
        assert!(cholesky(&not_pd).is_none());
    }
}
