//! Haar-random orthonormal frames and the law of a projection of a
//! uniformly random unit vector onto a fixed low-dimensional subspace.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{thin_q_phase_corrected, CMatrix};
use crate::scalar::Real;
use crate::special::ln_beta_normalizer;

/// Counter-based random substream: `(seed, stream_index)` fully determines
/// every sample drawn from it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngStream {
    pub seed: u64,
    pub stream_index: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream_index: u64) -> Self {
        Self { seed, stream_index }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_index);
        rng
    }
}

/// `M x N` complex matrix with orthonormal columns `b_1 .. b_N`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthonormalFrame<T> {
    columns: CMatrix<T>,
}

impl<T: Real> OrthonormalFrame<T> {
    /// Validates orthonormality to `1e-10` per Gram entry (scaled up for
    /// narrow scalar types).
    pub fn from_matrix(columns: CMatrix<T>) -> Result<Self> {
        if columns.cols() > columns.rows() || columns.cols() == 0 {
            return Err(Error::FrameTooLarge {
                m: columns.rows(),
                n: columns.cols(),
            });
        }
        let frame = Self { columns };
        let tol = T::lit(1e-10).max(T::epsilon() * T::lit(1e3));
        if frame.orthonormality_error() > tol {
            return Err(Error::Domain(format!(
                "frame columns are not orthonormal (error {:.3e})",
                frame.orthonormality_error().as_f64()
            )));
        }
        Ok(frame)
    }

    /// Columns given as vectors of length `M`.
    pub fn from_columns(columns: &[Vec<Complex<T>>]) -> Result<Self> {
        let m = columns.first().map_or(0, Vec::len);
        let mut mat = CMatrix::zeros(m, columns.len());
        for (j, col) in columns.iter().enumerate() {
            if col.len() != m {
                return Err(Error::Domain("frame columns differ in length".into()));
            }
            for (i, &z) in col.iter().enumerate() {
                mat[(i, j)] = z;
            }
        }
        Self::from_matrix(mat)
    }

    /// First `n` columns of the `M x M` identity.
    pub fn canonical(m: usize, n: usize) -> Result<Self> {
        if n > m || n == 0 {
            return Err(Error::FrameTooLarge { m, n });
        }
        let mut mat = CMatrix::zeros(m, n);
        for j in 0..n {
            mat[(j, j)] = Complex::new(T::one(), T::zero());
        }
        Ok(Self { columns: mat })
    }

    pub fn m(&self) -> usize {
        self.columns.rows()
    }

    pub fn n(&self) -> usize {
        self.columns.cols()
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.columns
    }

    pub fn column(&self, j: usize) -> Vec<Complex<T>> {
        self.columns.column(j)
    }

    /// `max |b_i^H b_j - δ_ij|`.
    pub fn orthonormality_error(&self) -> T {
        self.columns.gram().max_abs_diff(&CMatrix::identity(self.n()))
    }

    /// Effective channel gains `h^T b_j` (plain transpose, no conjugate).
    pub fn project(&self, h: &[Complex<T>]) -> Vec<Complex<T>> {
        assert_eq!(h.len(), self.m(), "channel length must match frame");
        (0..self.n())
            .map(|j| {
                h.iter()
                    .enumerate()
                    .map(|(i, &hi)| hi * self.columns[(i, j)])
                    .fold(Complex::new(T::zero(), T::zero()), |a, b| a + b)
            })
            .collect()
    }

    /// Squared length of the projection of `h` onto the frame's span.
    pub fn projection_norm_sqr(&self, h: &[Complex<T>]) -> T {
        self.project(h).iter().map(|z| z.norm_sqr()).sum()
    }
}

fn standard_complex_normal<T: Real, R: Rng + ?Sized>(rng: &mut R) -> Complex<T> {
    let s = T::FRAC_1_SQRT_2();
    Complex::new(T::sample_standard_normal(rng) * s, T::sample_standard_normal(rng) * s)
}

/// Draws the first `n` columns of a Haar-distributed `m x m` unitary from
/// `rng`: QR of an i.i.d. complex Gaussian `m x n` matrix, with each `Q`
/// column rotated by the phase of the corresponding diagonal entry of `R`.
pub fn sample_haar_frame_from<T: Real, R: Rng + ?Sized>(
    m: usize,
    n: usize,
    rng: &mut R,
) -> Result<OrthonormalFrame<T>> {
    if n > m {
        return Err(Error::FrameTooLarge { m, n });
    }
    if n == 0 {
        return Err(Error::Domain("frame needs at least one column".into()));
    }
    let mut g = CMatrix::zeros(m, n);
    // Column-major fill so the first column does not depend on n.
    for j in 0..n {
        for i in 0..m {
            g[(i, j)] = standard_complex_normal(rng);
        }
    }
    Ok(OrthonormalFrame {
        columns: thin_q_phase_corrected(&g),
    })
}

pub fn sample_haar_frame<T: Real>(m: usize, n: usize, stream: RngStream) -> Result<OrthonormalFrame<T>> {
    sample_haar_frame_from(m, n, &mut stream.rng())
}

fn validate_dims(m_complex: usize, n_complex: usize) -> Result<()> {
    if n_complex == 0 || n_complex > m_complex {
        return Err(Error::Domain(format!(
            "projection needs 1 <= n <= m, got m={m_complex}, n={n_complex}"
        )));
    }
    Ok(())
}

/// Density of `r = ||P h||` for `h` uniform on the complex unit sphere in
/// `C^m` and `P` the orthogonal projector onto a fixed `n`-dimensional
/// complex subspace:
///
/// `2 Γ(m) / (Γ(n) Γ(m-n)) u^(2n-1) (1-u^2)^(m-n-1)`, `0 <= u <= 1`.
///
/// For `n = 2` this is `2 (m-1)(m-2) u^3 (1-u^2)^(m-3)`. The prefactor is
/// evaluated in log form so it stays finite for very large `m`.
pub fn projection_radius_pdf<T: Real>(u: T, m_complex: usize, n_complex: usize) -> Result<T> {
    validate_dims(m_complex, n_complex)?;
    if n_complex == m_complex {
        return Err(Error::DegenerateProjection);
    }
    if !(u >= T::zero() && u <= T::one()) {
        return Err(Error::Domain(format!("u must lie in [0, 1], got {}", u.as_f64())));
    }
    let ln_pref = T::lit(2.0).ln() + ln_beta_normalizer::<T>(m_complex, n_complex);
    let u_exp = T::from_count(2 * n_complex - 1);
    let tail_exp = T::from_count(m_complex - n_complex - 1);
    if u == T::zero() {
        return Ok(T::zero());
    }
    let mut log_body = u_exp * u.ln();
    if tail_exp > T::zero() {
        log_body += tail_exp * (-(u * u)).ln_1p();
    }
    Ok((ln_pref + log_body).exp())
}

/// Draws `r^2` for the projection above, i.e. `Beta(n, m - n)`, as
/// `X / (X + Y)` with `X ~ Gamma(n)`, `Y ~ Gamma(m - n)`. Returns exactly 1
/// when `n = m`.
pub fn sample_projection_radius_sq_from<T: Real, R: Rng + ?Sized>(
    m_complex: usize,
    n_complex: usize,
    rng: &mut R,
) -> Result<T> {
    validate_dims(m_complex, n_complex)?;
    if n_complex == m_complex {
        return Ok(T::one());
    }
    let x = T::sample_gamma(T::from_count(n_complex), rng);
    let y = T::sample_gamma(T::from_count(m_complex - n_complex), rng);
    Ok(x / (x + y))
}

pub fn sample_projection_radius_sq<T: Real>(m_complex: usize, n_complex: usize, stream: RngStream) -> Result<T> {
    sample_projection_radius_sq_from(m_complex, n_complex, &mut stream.rng())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate_finite;
    use crate::special::ln_gamma;

    /// Density of the length of the projection of a uniform unit vector in
    /// real dimension `big_m` onto a fixed real `big_n`-dimensional subspace.
    fn real_projection_pdf<T: Real>(u: T, big_m: usize, big_n: usize) -> T {
        debug_assert!(big_n < big_m);
        let half = |k: usize| T::from_count(k) * T::lit(0.5);
        let ln_pref = T::lit(2.0).ln() + ln_gamma(half(big_m)) - ln_gamma(half(big_n)) - ln_gamma(half(big_m - big_n));
        let u_exp = T::from_count(big_n) - T::one();
        let tail_exp = (T::from_count(big_m - big_n) - T::lit(2.0)) * T::lit(0.5);
        pow_term(u, u_exp) * pow_term(T::one() - u * u, tail_exp) * ln_pref.exp()
    }

    /// `x^p` with the convention `0^0 = 1`.
    fn pow_term<T: Real>(x: T, p: T) -> T {
        if p == T::zero() {
            T::one()
        } else {
            x.powf(p)
        }
    }

    #[test]
    fn scalar_frame_is_unit_phase() {
        for i in 0..20 {
            let f = sample_haar_frame::<f64>(1, 1, RngStream::new(3, i)).unwrap();
            assert!((f.matrix()[(0, 0)].norm() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn frames_are_orthonormal() {
        for i in 0..500 {
            let f = sample_haar_frame::<f64>(4, 2, RngStream::new(11, i)).unwrap();
            assert!(f.orthonormality_error() <= 1e-10);
            let b1 = f.column(0);
            let b2 = f.column(1);
            let inner: Complex<f64> = b1.iter().zip(&b2).map(|(a, b)| a.conj() * b).sum();
            assert!(inner.norm() <= 1e-10);
        }
        let f = sample_haar_frame::<f32>(8, 8, RngStream::new(1, 1)).unwrap();
        assert!(f.orthonormality_error() < 1e-5);
    }

    #[test]
    fn frame_errors() {
        assert_eq!(
            sample_haar_frame::<f64>(2, 3, RngStream::new(0, 0)),
            Err(Error::FrameTooLarge { m: 2, n: 3 })
        );
        assert!(
            OrthonormalFrame::<f64>::from_columns(&[vec![Complex::new(1.0, 0.0), Complex::new(1.0, 0.0)]]).is_err()
        );
    }

    #[test]
    fn draws_are_deterministic_per_stream() {
        let a = sample_haar_frame::<f64>(6, 3, RngStream::new(42, 17)).unwrap();
        let b = sample_haar_frame::<f64>(6, 3, RngStream::new(42, 17)).unwrap();
        let c = sample_haar_frame::<f64>(6, 3, RngStream::new(42, 18)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn isotropy_of_first_column() {
        // E|h^T b1|^2 = ||h||^2 / M = 1 for a normalized channel.
        let h: Vec<Complex<f64>> = [2.0, 0.0, 0.0, 0.0].iter().map(|&x| Complex::new(x, 0.0)).collect();
        let trials = 100_000u64;
        let (mut s, mut s2) = (0.0, 0.0);
        for i in 0..trials {
            let f = sample_haar_frame::<f64>(4, 1, RngStream::new(5, i)).unwrap();
            let v = f.projection_norm_sqr(&h);
            s += v;
            s2 += v * v;
        }
        let mean = s / trials as f64;
        let se = ((s2 / trials as f64 - mean * mean) / trials as f64).sqrt();
        assert!((mean - 1.0).abs() <= 3.0 * se, "mean {mean} se {se}");
    }

    #[test]
    fn pdf_closed_forms() {
        for &u in &[0.0, 0.1, 0.5, 0.9, 1.0] {
            let p: f64 = projection_radius_pdf(u, 3, 2).unwrap();
            assert!((p - 4.0 * u * u * u).abs() < 1e-13);
            for m in [4usize, 7, 12] {
                let mf = m as f64;
                let expect = 2.0 * (mf - 1.0) * (mf - 2.0) * u.powi(3) * (1.0 - u * u).powi(m as i32 - 3);
                let got: f64 = projection_radius_pdf(u, m, 2).unwrap();
                assert!((got - expect).abs() < 1e-11 * expect.max(1.0), "m={m} u={u}");
            }
        }
    }

    #[test]
    fn complex_wrapper_matches_real_dimension_form() {
        for (m, n) in [(3, 1), (5, 2), (9, 4), (16, 8)] {
            for &u in &[0.05f64, 0.3, 0.77] {
                let a = projection_radius_pdf(u, m, n).unwrap();
                let b = real_projection_pdf(u, 2 * m, 2 * n);
                assert!((a - b).abs() < 1e-11 * a.max(1.0));
            }
        }
    }

    #[test]
    fn pdf_errors() {
        assert_eq!(projection_radius_pdf(0.5f64, 4, 4), Err(Error::DegenerateProjection));
        assert!(matches!(projection_radius_pdf(1.5f64, 4, 2), Err(Error::Domain(_))));
        assert!(matches!(projection_radius_pdf(-0.1f64, 4, 2), Err(Error::Domain(_))));
        assert!(projection_radius_pdf(0.5f64, 2, 3).is_err());
    }

    #[test]
    fn pdf_normalization_and_second_moment() {
        for m in 3..=16usize {
            for n in [1usize, 2, 4] {
                if n >= m {
                    continue;
                }
                let pdf = |u: f64| projection_radius_pdf(u, m, n).unwrap();
                let mass = integrate_finite(pdf, 0.0, 1.0, 1e-12).unwrap().value;
                assert!((mass - 1.0).abs() <= 1e-10, "m={m} n={n} mass={mass}");
                let moment = integrate_finite(|u| u * u * pdf(u), 0.0, 1.0, 1e-12).unwrap().value;
                assert!((moment - n as f64 / m as f64).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn pdf_large_m_stays_finite() {
        let m = 1_000_000;
        let u = (2.0f64 / m as f64).sqrt();
        let p = projection_radius_pdf(u, m, 2).unwrap();
        assert!(p.is_finite() && p > 0.0);
    }

    #[test]
    fn full_space_radius_is_one() {
        for i in 0..10 {
            assert_eq!(
                sample_projection_radius_sq::<f64>(5, 5, RngStream::new(9, i)).unwrap(),
                1.0
            );
        }
    }

    #[test]
    fn radius_sq_mean_is_n_over_m() {
        let trials = 100_000u64;
        let (mut s, mut s2) = (0.0, 0.0);
        for i in 0..trials {
            let r2: f64 = sample_projection_radius_sq(8, 2, RngStream::new(77, i)).unwrap();
            s += r2;
            s2 += r2 * r2;
        }
        let mean = s / trials as f64;
        let se = ((s2 / trials as f64 - mean * mean) / trials as f64).sqrt();
        assert!((mean - 0.25).abs() <= 3.0 * se, "mean {mean} se {se}");
    }
}
