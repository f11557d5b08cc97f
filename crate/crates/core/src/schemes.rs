//! Equivalent virtual channel matrices (EVCMs) and per-draw mutual
//! information of each scalar-coding scheme.
//!
//! Every scheme turns the MISO channel into a SISO channel whose SNR is a
//! scalar function of the (possibly randomized) effective channel; the
//! functions here evaluate `log2(1 + effective SNR)` for one draw. Only
//! information rates are modelled; no symbols are transmitted.
//!
//! ABBA stands in for the whole QOSTBC family. The extended-Alamouti and
//! Papadias–Foschini codes are related to it by a fixed unitary transform
//! and are not implemented separately.

use num_complex::Complex;

use crate::ensembles::OrthonormalFrame;
use crate::error::{Error, Result};
use crate::linalg::{cholesky, cholesky_solve, CMatrix};
use crate::model::{ChannelVector, SchemeId, SnrPoint};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvcmKind {
    Alamouti,
    Abba,
    Trombi,
}

/// Matrix relating the stacked data symbols to the (partly conjugated)
/// received samples of one space-time block.
#[derive(Debug, Clone, PartialEq)]
pub struct Evcm<T> {
    pub matrix: CMatrix<T>,
    pub kind: EvcmKind,
}

/// Per-block randomization: beamforming frame and/or TROMBI phases.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SchemeDraw<T> {
    pub frame: Option<OrthonormalFrame<T>>,
    pub phases: Option<(T, T)>,
}

impl<T: Real> SchemeDraw<T> {
    pub fn none() -> Self {
        Self {
            frame: None,
            phases: None,
        }
    }

    pub fn with_frame(frame: OrthonormalFrame<T>) -> Self {
        Self {
            frame: Some(frame),
            phases: None,
        }
    }

    pub fn with_phases(theta1: T, theta2: T) -> Self {
        Self {
            frame: None,
            phases: Some((theta1, theta2)),
        }
    }

    pub fn with_frame_and_phases(frame: OrthonormalFrame<T>, theta1: T, theta2: T) -> Self {
        Self {
            frame: Some(frame),
            phases: Some((theta1, theta2)),
        }
    }
}

/// `log2(1 + x)` accurate for small `x`.
pub(crate) fn log2_1p<T: Real>(x: T) -> T {
    x.ln_1p() * T::LOG2_E()
}

fn c_zero<T: Real>() -> Complex<T> {
    Complex::new(T::zero(), T::zero())
}

/// White-input mutual information `log2(1 + SNR)`.
pub fn opt_mi<T: Real>(snr: SnrPoint<T>) -> Result<T> {
    Ok(log2_1p(snr.finite()?))
}

/// `(1/√2) [g1 g2; -g2* g1*]`.
pub fn alamouti_evcm<T: Real>(g: [Complex<T>; 2]) -> Evcm<T> {
    let s = T::FRAC_1_SQRT_2();
    let [g1, g2] = g;
    Evcm {
        matrix: CMatrix::from_rows(&[vec![g1, g2], vec![-g2.conj(), g1.conj()]]).scale(s),
        kind: EvcmKind::Alamouti,
    }
}

/// `log2(1 + SNR ||g||^2 / 2)`.
pub fn alamouti_mi<T: Real>(snr: SnrPoint<T>, g: [Complex<T>; 2]) -> Result<T> {
    let snr = snr.finite()?;
    let norm = g[0].norm_sqr() + g[1].norm_sqr();
    Ok(log2_1p(snr * norm * T::lit(0.5)))
}

/// ABBA EVCM for four transmit antennas, including the factor 1/2.
pub fn abba_evcm<T: Real>(g: [Complex<T>; 4]) -> Evcm<T> {
    let [h1, h2, h3, h4] = g;
    let rows = [
        vec![h1, h2, h3, h4],
        vec![-h2.conj(), h1.conj(), -h4.conj(), h3.conj()],
        vec![h3, h4, h1, h2],
        vec![-h4.conj(), h3.conj(), -h2.conj(), h1.conj()],
    ];
    Evcm {
        matrix: CMatrix::from_rows(&rows).scale(T::lit(0.5)),
        kind: EvcmKind::Abba,
    }
}

/// Per-symbol SNR of the unbiased linear MMSE estimate,
/// `1 / {(H^H H SNR + I)^-1}_{ii} - 1`.
///
/// The diagonal must be the same for every symbol index; a spread above
/// `1e-10` (relative) is reported as [`Error::NonUniformSnr`].
pub fn mmse_unbiased_snr<T: Real>(evcm: &Evcm<T>, snr: SnrPoint<T>) -> Result<T> {
    mmse_unbiased_snr_matrix(&evcm.matrix, snr)
}

/// [`mmse_unbiased_snr`] for an arbitrary square channel matrix.
pub fn mmse_unbiased_snr_matrix<T: Real>(h: &CMatrix<T>, snr: SnrPoint<T>) -> Result<T> {
    let snr = snr.finite()?;
    let diag = mmse_error_diagonal(h, snr)?;
    let (lo, hi) = diag.iter().fold((T::infinity(), T::neg_infinity()), |(lo, hi), &d| {
        (lo.min(d), hi.max(d))
    });
    let spread = (hi - lo) / hi;
    let tol = T::lit(1e-10).max(T::epsilon() * T::lit(1e3));
    if !(spread <= tol) {
        return Err(Error::NonUniformSnr {
            spread: spread.as_f64(),
        });
    }
    Ok(diag[0].recip() - T::one())
}

/// Diagonal of `(H^H H SNR + I)^-1`, one Cholesky solve per unit vector.
pub(crate) fn mmse_error_diagonal<T: Real>(h: &CMatrix<T>, snr: T) -> Result<Vec<T>> {
    if h.rows() != h.cols() {
        return Err(Error::Domain("EVCM must be square".into()));
    }
    let k = h.cols();
    let mut a = h.gram().scale(snr);
    for i in 0..k {
        a[(i, i)] += Complex::new(T::one(), T::zero());
    }
    let l = cholesky(&a).ok_or_else(|| Error::Domain("MMSE system is not positive definite".into()))?;
    Ok((0..k)
        .map(|i| {
            let mut e = vec![c_zero(); k];
            e[i] = Complex::new(T::one(), T::zero());
            cholesky_solve(&l, &e)[i].re
        })
        .collect())
}

/// ABBA rate with linear MMSE front end, `log2(1 + SNR_MMSE)`.
pub fn abba_mi<T: Real>(snr: SnrPoint<T>, g: [Complex<T>; 4]) -> Result<T> {
    Ok(log2_1p(mmse_unbiased_snr(&abba_evcm(g), snr)?))
}

/// Two-antenna channel seen by the Alamouti demodulator under TROMBI:
/// `((g1 + g2 e^{jθ1})/√2, (g3 + g4 e^{jθ2})/√2)`.
pub fn trombi_effective_channel<T: Real>(g: [Complex<T>; 4], theta1: T, theta2: T) -> [Complex<T>; 2] {
    let s = T::FRAC_1_SQRT_2();
    let rot = |t: T| Complex::new(t.cos(), t.sin());
    [(g[0] + g[1] * rot(theta1)) * s, (g[2] + g[3] * rot(theta2)) * s]
}

pub fn trombi_instant_mi<T: Real>(snr: SnrPoint<T>, g: [Complex<T>; 4], theta1: T, theta2: T) -> Result<T> {
    alamouti_mi(snr, trombi_effective_channel(g, theta1, theta2))
}

/// Exact rational symbol rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rate {
    pub num: u64,
    pub den: u64,
}

impl Rate {
    pub fn value<T: Real>(self) -> T {
        T::lit(self.num as f64) / T::lit(self.den as f64)
    }
}

/// Maximal symbol rate of a complex orthogonal design for `n_virtual`
/// antennas: `(m + 1) / (2m)` with `m = ceil(n/2)`, and 1 for a single antenna.
pub fn ostbc_max_rate(n_virtual: usize) -> Result<Rate> {
    if n_virtual < 1 {
        return Err(Error::Domain("OSTBC needs at least one antenna".into()));
    }
    if n_virtual == 1 {
        return Ok(Rate { num: 1, den: 1 });
    }
    let m = n_virtual.div_ceil(2) as u64;
    let (num, den) = (m + 1, 2 * m);
    let g = gcd(num, den);
    Ok(Rate {
        num: num / g,
        den: den / g,
    })
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn fixed<const K: usize, T: Real>(v: &[Complex<T>], what: &str) -> Result<[Complex<T>; K]> {
    v.try_into()
        .map_err(|_| Error::DrawMismatch(format!("{what} needs a {K}-dimensional channel, got {}", v.len())))
}

/// Instantaneous mutual information of `scheme` for one draw.
///
/// With `h~_i = h^T b_i` the effective gains of the draw's frame:
///
/// * `IR_BF`: `log2(1 + SNR |h~_1|^2)`
/// * `IR_BF_A`: `log2(1 + SNR (|h~_1|^2 + |h~_2|^2) / 2)`
/// * `IR_ABBA`: ABBA with linear MMSE on `h~`
/// * `IR_TROMBI`: TROMBI on `h~` with the draw's phases
/// * `IR_OSTBC(n)`: `R log2(1 + SNR ||h~||^2 / (n R))`, `R` the maximal OSTBC rate
///
/// Deterministic schemes (`OPT`, `ALAMOUTI`, `ABBA`) and plain `TROMBI`
/// use `h` directly. `h` must satisfy `||h||^2 / M = 1`.
pub fn ir_instant_mi<T: Real>(
    scheme: SchemeId,
    h: &ChannelVector<T>,
    snr: SnrPoint<T>,
    draw: &SchemeDraw<T>,
) -> Result<T> {
    let snr_lin = snr.finite()?;
    h.require_normalized()?;
    check_draw(scheme, h, draw)?;
    let coeffs = h.coefficients();
    let tilde = || draw.frame.as_ref().map(|f| f.project(coeffs)).unwrap_or_default();
    let phases = draw.phases.unwrap_or((T::zero(), T::zero()));

    match scheme {
        SchemeId::Opt => opt_mi(snr),
        SchemeId::Alamouti => alamouti_mi(snr, fixed::<2, T>(coeffs, "ALAMOUTI")?),
        SchemeId::Abba => abba_mi(snr, fixed::<4, T>(coeffs, "ABBA")?),
        SchemeId::Trombi => trombi_instant_mi(snr, fixed::<4, T>(coeffs, "TROMBI")?, phases.0, phases.1),
        SchemeId::IrBf => Ok(log2_1p(snr_lin * tilde()[0].norm_sqr())),
        SchemeId::IrBfA => {
            let t = tilde();
            Ok(log2_1p(snr_lin * (t[0].norm_sqr() + t[1].norm_sqr()) * T::lit(0.5)))
        }
        SchemeId::IrAbba => abba_mi(snr, fixed::<4, T>(&tilde(), "IR_ABBA")?),
        SchemeId::IrTrombi => trombi_instant_mi(snr, fixed::<4, T>(&tilde(), "IR_TROMBI")?, phases.0, phases.1),
        SchemeId::IrOstbc(n) => {
            let rate = ostbc_max_rate(n)?.value::<T>();
            let energy: T = tilde().iter().map(|z| z.norm_sqr()).sum();
            Ok(rate * log2_1p(snr_lin * energy / (T::from_count(n) * rate)))
        }
    }
}

fn check_draw<T: Real>(scheme: SchemeId, h: &ChannelVector<T>, draw: &SchemeDraw<T>) -> Result<()> {
    if let Some(m) = scheme.fixed_antennas() {
        if h.m() != m {
            return Err(Error::DrawMismatch(format!(
                "{scheme} is defined for {m} antennas, got {}",
                h.m()
            )));
        }
    }
    match (scheme.frame_columns(), &draw.frame) {
        (Some(n), Some(frame)) => {
            if frame.n() != n || frame.m() != h.m() {
                return Err(Error::DrawMismatch(format!(
                    "{scheme} needs a {}x{n} frame, got {}x{}",
                    h.m(),
                    frame.m(),
                    frame.n()
                )));
            }
        }
        (Some(n), None) => {
            return Err(Error::DrawMismatch(format!("{scheme} needs a frame with {n} columns")));
        }
        (None, Some(_)) => {
            return Err(Error::DrawMismatch(format!("{scheme} takes no beamforming frame")));
        }
        (None, None) => {}
    }
    if scheme.needs_phases() != draw.phases.is_some() {
        return Err(Error::DrawMismatch(if scheme.needs_phases() {
            format!("{scheme} needs TROMBI phases")
        } else {
            format!("{scheme} takes no TROMBI phases")
        }));
    }
    Ok(())
}

/// Collapses an IR-TROMBI draw (4-column frame plus phases) into the
/// 2-column frame `((b1 + b2 e^{jθ1})/√2, (b3 + b4 e^{jθ2})/√2)` that gives
/// the same rate under IR-BF-A.
pub fn trombi_frame_as_bfa<T: Real>(frame: &OrthonormalFrame<T>, theta1: T, theta2: T) -> Result<OrthonormalFrame<T>> {
    if frame.n() != 4 {
        return Err(Error::DrawMismatch("IR-TROMBI frame must have 4 columns".into()));
    }
    let s = T::FRAC_1_SQRT_2();
    let rot = |t: T| Complex::new(t.cos(), t.sin());
    let combine = |a: usize, b: usize, t: T| -> Vec<Complex<T>> {
        frame
            .column(a)
            .iter()
            .zip(frame.column(b))
            .map(|(&x, y)| (x + y * rot(t)) * s)
            .collect()
    };
    OrthonormalFrame::from_columns(&[combine(0, 1, theta1), combine(2, 3, theta2)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::{sample_haar_frame, RngStream};
    use crate::model::normalize_channel;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    fn snr(s: f64) -> SnrPoint<f64> {
        SnrPoint::linear(s).unwrap()
    }

    /// Naive Gauss–Jordan inverse, independent of the Cholesky path.
    fn brute_inverse(a: &CMatrix<f64>) -> CMatrix<f64> {
        let n = a.rows();
        let mut aug = vec![vec![c(0.0, 0.0); 2 * n]; n];
        for i in 0..n {
            for j in 0..n {
                aug[i][j] = a[(i, j)];
            }
            aug[i][n + i] = c(1.0, 0.0);
        }
        for col in 0..n {
            let piv = (col..n)
                .max_by(|&x, &y| aug[x][col].norm().partial_cmp(&aug[y][col].norm()).unwrap())
                .unwrap();
            aug.swap(col, piv);
            let p = aug[col][col];
            for v in aug[col].iter_mut() {
                *v /= p;
            }
            for r in 0..n {
                if r != col {
                    let f = aug[r][col];
                    let pivot_row = aug[col].clone();
                    for (v, pv) in aug[r].iter_mut().zip(pivot_row) {
                        *v -= f * pv;
                    }
                }
            }
        }
        let mut inv = CMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                inv[(i, j)] = aug[i][n + j];
            }
        }
        inv
    }

    fn random_g<const K: usize>(seed: u64) -> [Complex<f64>; K] {
        use rand::Rng;
        let mut rng = RngStream::new(seed, 0).rng();
        std::array::from_fn(|_| c(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)))
    }

    #[test]
    fn opt_values() {
        assert_eq!(opt_mi(snr(0.0)).unwrap(), 0.0);
        assert!((opt_mi(snr(1.0)).unwrap() - 1.0).abs() < 1e-15);
        assert!((opt_mi(snr(3.0)).unwrap() - 2.0).abs() < 1e-15);
        assert_eq!(opt_mi(SnrPoint::<f64>::infinite()), Err(Error::AsymptoticOnly));
    }

    #[test]
    fn alamouti_examples() {
        let e = alamouti_evcm([c(1.0, 0.0), c(0.0, 0.0)]);
        let expect = CMatrix::identity(2).scale(std::f64::consts::FRAC_1_SQRT_2);
        assert!(e.matrix.max_abs_diff(&expect) < 1e-15);

        // Hand multiplication: H = (1/√2)[1 i; i 1], H^H H = I.
        let e = alamouti_evcm([c(1.0, 0.0), c(0.0, 1.0)]);
        assert!(e.matrix.gram().max_abs_diff(&CMatrix::identity(2)) < 1e-15);

        let z = alamouti_evcm([c(0.0, 0.0), c(0.0, 0.0)]);
        assert_eq!(z.matrix, CMatrix::zeros(2, 2));

        for s in [0.0, 0.5, 10.0, 1e4] {
            let a = alamouti_mi(snr(s), [c(1.0, 0.0), c(1.0, 0.0)]).unwrap();
            assert!((a - opt_mi(snr(s)).unwrap()).abs() < 1e-15);
        }
        assert!((alamouti_mi(snr(1.0), [c(2f64.sqrt(), 0.0), c(0.0, 0.0)]).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(alamouti_mi(snr(7.0), [c(0.0, 0.0), c(0.0, 0.0)]).unwrap(), 0.0);
    }

    #[test]
    fn abba_examples() {
        let e = abba_evcm([c(2.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        assert!(e.matrix.gram().max_abs_diff(&CMatrix::identity(4)) < 1e-15);

        let g = random_g::<4>(3);
        let norm: f64 = g.iter().map(|z| z.norm_sqr()).sum();
        let gram = abba_evcm(g).matrix.gram();
        for i in 0..4 {
            assert!((gram[(i, i)].re - norm / 4.0).abs() < 1e-12);
            assert!(gram[(i, i)].im.abs() < 1e-15);
        }

        // Columns 1,3 and 2,4 coincide for g = (1,0,1,0): only those pairs couple.
        let gram = abba_evcm([c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)])
            .matrix
            .gram();
        for i in 0..4 {
            for j in 0..4 {
                let coupled = i == j || (i % 2 == j % 2);
                assert_eq!(gram[(i, j)].norm() > 1e-15, coupled, "({i},{j})");
            }
        }
    }

    #[test]
    fn mmse_examples() {
        for s in [0.0, 0.1, 3.0, 100.0] {
            let ident = Evcm {
                matrix: CMatrix::<f64>::identity(3),
                kind: EvcmKind::Abba,
            };
            assert!((mmse_unbiased_snr(&ident, snr(s)).unwrap() - s).abs() < 1e-12 * s.max(1.0));
            let al = alamouti_evcm([c(1.0, 0.0), c(1.0, 0.0)]);
            assert!((mmse_unbiased_snr(&al, snr(s)).unwrap() - s).abs() < 1e-12 * s.max(1.0));
            let ab = abba_evcm([c(2.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
            assert!((mmse_unbiased_snr(&ab, snr(s)).unwrap() - s).abs() < 1e-12 * s.max(1.0));
            assert!(
                (abba_mi(snr(s), [c(2.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]).unwrap() - (1.0f64 + s).log2())
                    .abs()
                    < 1e-12
            );
        }
        assert_eq!(
            mmse_unbiased_snr(&abba_evcm([c(1.0, 0.0); 4]), SnrPoint::infinite()),
            Err(Error::AsymptoticOnly)
        );
    }

    #[test]
    fn abba_self_interference_costs_rate() {
        // Brute-force 4x4 inverse oracle.
        let g = [c(1.0, 0.0); 4];
        let h = abba_evcm(g).matrix;
        let mut a = h.gram().scale(10.0);
        for i in 0..4 {
            a[(i, i)] += c(1.0, 0.0);
        }
        let inv = brute_inverse(&a);
        let oracle = (1.0 / inv[(0, 0)].re).log2();
        let got = abba_mi(snr(10.0), g).unwrap();
        assert!((got - oracle).abs() < 1e-12);
        assert!(got < 11f64.log2());
        assert_eq!(abba_mi(snr(0.0), g).unwrap(), 0.0);
    }

    #[test]
    fn non_uniform_diagonal_is_rejected() {
        let m = CMatrix::from_rows(&[vec![c(1.0, 0.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(2.0, 0.0)]]);
        assert!(matches!(
            mmse_unbiased_snr_matrix(&m, snr(1.0)),
            Err(Error::NonUniformSnr { .. })
        ));
        assert!(mmse_unbiased_snr_matrix(&CMatrix::<f64>::zeros(2, 3), snr(1.0)).is_err());
    }

    #[test]
    fn trombi_examples() {
        let ones = [c(1.0, 0.0); 4];
        let r2 = 2f64.sqrt();
        let t = trombi_effective_channel(ones, 0.0, 0.0);
        assert!((t[0] - c(r2, 0.0)).norm() < 1e-15 && (t[1] - c(r2, 0.0)).norm() < 1e-15);
        let pi = std::f64::consts::PI;
        let t = trombi_effective_channel(ones, pi, pi);
        assert!(t[0].norm() < 1e-15 && t[1].norm() < 1e-15);
        let g = [c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)];
        for th in [0.3, 2.0, 5.5] {
            let t = trombi_effective_channel(g, 1.234, th);
            assert!((t[0] - c(1.0 / r2, 0.0)).norm() < 1e-15);
            assert!((t[1] - c(th.cos(), th.sin()) / r2).norm() < 1e-15);
        }
        for s in [0.0, 1.0, 10.0] {
            let v = trombi_instant_mi(snr(s), ones, 0.0, 0.0).unwrap();
            assert!((v - (1.0 + 2.0 * s).log2()).abs() < 1e-14);
            assert!(trombi_instant_mi(snr(s), ones, pi, pi).unwrap().abs() < 1e-15);
        }
    }

    #[test]
    fn ostbc_rates() {
        assert_eq!(ostbc_max_rate(1).unwrap(), Rate { num: 1, den: 1 });
        assert_eq!(ostbc_max_rate(2).unwrap(), Rate { num: 1, den: 1 });
        assert_eq!(ostbc_max_rate(3).unwrap(), Rate { num: 3, den: 4 });
        assert_eq!(ostbc_max_rate(4).unwrap(), Rate { num: 3, den: 4 });
        assert_eq!(ostbc_max_rate(8).unwrap(), Rate { num: 5, den: 8 });
        assert!(ostbc_max_rate(0).is_err());
    }

    #[test]
    fn ir_examples() {
        let h2 = ChannelVector::from_real(&[1.0, 1.0]).unwrap();
        let id2 = OrthonormalFrame::canonical(2, 2).unwrap();
        for s in [0.0, 2.0, 50.0] {
            let v = ir_instant_mi(SchemeId::IrBfA, &h2, snr(s), &SchemeDraw::with_frame(id2.clone())).unwrap();
            assert!((v - (1.0 + s).log2()).abs() < 1e-14);
        }

        let h4 = ChannelVector::from_real(&[2.0, 0.0, 0.0, 0.0]).unwrap();
        let b = OrthonormalFrame::from_columns(&[vec![c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]]).unwrap();
        let v = ir_instant_mi(SchemeId::IrBf, &h4, snr(10.0), &SchemeDraw::with_frame(b)).unwrap();
        assert_eq!(v, 0.0);

        for i in 0..50 {
            let frame = sample_haar_frame::<f64>(6, 2, RngStream::new(8, i)).unwrap();
            let h = normalize_channel(&ChannelVector::new(random_g::<6>(i).to_vec()).unwrap()).unwrap();
            let d = SchemeDraw::with_frame(frame);
            let a = ir_instant_mi(SchemeId::IrOstbc(2), &h, snr(7.0), &d).unwrap();
            let b = ir_instant_mi(SchemeId::IrBfA, &h, snr(7.0), &d).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn ir_precondition_and_mismatch_errors() {
        let raw = ChannelVector::from_real(&[1.0, 0.0, 0.0, 0.0]).unwrap();
        let f = SchemeDraw::with_frame(OrthonormalFrame::canonical(4, 2).unwrap());
        assert!(matches!(
            ir_instant_mi(SchemeId::IrBfA, &raw, snr(1.0), &f),
            Err(Error::PreconditionViolation(_))
        ));
        let h = normalize_channel(&raw).unwrap();
        assert!(matches!(
            ir_instant_mi(SchemeId::IrBf, &h, snr(1.0), &f),
            Err(Error::DrawMismatch(_))
        ));
        assert!(matches!(
            ir_instant_mi(SchemeId::IrBfA, &h, snr(1.0), &SchemeDraw::none()),
            Err(Error::DrawMismatch(_))
        ));
        assert!(matches!(
            ir_instant_mi(SchemeId::Opt, &h, snr(1.0), &f),
            Err(Error::DrawMismatch(_))
        ));
        let f4 = SchemeDraw::with_frame(OrthonormalFrame::canonical(4, 4).unwrap());
        assert!(matches!(
            ir_instant_mi(SchemeId::IrTrombi, &h, snr(1.0), &f4),
            Err(Error::DrawMismatch(_))
        ));
        assert!(matches!(
            ir_instant_mi(SchemeId::Alamouti, &h, snr(1.0), &SchemeDraw::none()),
            Err(Error::DrawMismatch(_))
        ));
        assert_eq!(
            ir_instant_mi(SchemeId::IrBfA, &h, SnrPoint::infinite(), &f),
            Err(Error::AsymptoticOnly)
        );
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn cvec<const K: usize>() -> impl Strategy<Value = [Complex<f64>; K]> {
            prop::array::uniform((-3.0..3.0f64, -3.0..3.0f64)).prop_map(|a: [(f64, f64); K]| a.map(|(r, i)| c(r, i)))
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(10_000))]

            #[test]
            fn alamouti_gram_is_scaled_identity(g in cvec::<2>()) {
                let n = (g[0].norm_sqr() + g[1].norm_sqr()) / 2.0;
                let gram = alamouti_evcm(g).matrix.gram();
                prop_assert!(gram.max_abs_diff(&CMatrix::identity(2).scale(n)) <= 1e-12);
            }

            #[test]
            fn abba_diagonal_constant(g in cvec::<4>()) {
                let norm: f64 = g.iter().map(|z| z.norm_sqr()).sum();
                let gram = abba_evcm(g).matrix.gram();
                let d: Vec<f64> = (0..4).map(|i| gram[(i, i)].re).collect();
                let spread = d.iter().cloned().fold(f64::MIN, f64::max) - d.iter().cloned().fold(f64::MAX, f64::min);
                prop_assert!(spread <= 1e-12 * norm.max(1e-300));
            }

            #[test]
            fn mmse_snr_index_independent(g in cvec::<4>(), k in 0usize..4) {
                let s = [0.1, 1.0, 10.0, 100.0][k];
                let diag = mmse_error_diagonal(&abba_evcm(g).matrix, s).unwrap();
                let snrs: Vec<f64> = diag.iter().map(|d| 1.0 / d - 1.0).collect();
                for x in &snrs {
                    prop_assert!((x - snrs[0]).abs() <= 1e-10 * snrs[0].abs().max(1e-12));
                }
            }

            #[test]
            fn mmse_on_orthogonal_gram(g in cvec::<2>(), s in 0.0..1e3f64) {
                let e = alamouti_evcm(g);
                let c = (g[0].norm_sqr() + g[1].norm_sqr()) / 2.0;
                let got = mmse_unbiased_snr(&e, snr(s)).unwrap();
                // brute-force inverse oracle
                let mut a = e.matrix.gram().scale(s);
                for i in 0..2 { a[(i, i)] += c64(1.0); }
                let oracle = 1.0 / brute_inverse(&a)[(0, 0)].re - 1.0;
                prop_assert!((got - c * s).abs() <= 1e-12 * (c * s).max(1.0));
                prop_assert!((oracle - c * s).abs() <= 1e-12 * (c * s).max(1.0));
            }

            #[test]
            fn ir_trombi_equals_ir_bfa(seed in 0u64..10_000, t1 in 0.0..std::f64::consts::TAU, t2 in 0.0..std::f64::consts::TAU, s in 0.0..1e3f64) {
                let frame = sample_haar_frame::<f64>(6, 4, RngStream::new(seed, 1)).unwrap();
                let h = normalize_channel(&ChannelVector::new(random_g::<6>(seed).to_vec()).unwrap()).unwrap();
                let trombi = ir_instant_mi(SchemeId::IrTrombi, &h, snr(s), &SchemeDraw::with_frame_and_phases(frame.clone(), t1, t2)).unwrap();
                let f2 = trombi_frame_as_bfa(&frame, t1, t2).unwrap();
                let bfa = ir_instant_mi(SchemeId::IrBfA, &h, snr(s), &SchemeDraw::with_frame(f2)).unwrap();
                prop_assert!((trombi - bfa).abs() <= 1e-12 * trombi.max(1.0));
            }

            #[test]
            fn instant_mi_monotone_in_snr(seed in 0u64..10_000, s in 0.0..1e3f64, ds in 0.0..1e2f64, k in 0usize..5) {
                let scheme = [SchemeId::IrBf, SchemeId::IrBfA, SchemeId::IrAbba, SchemeId::IrTrombi, SchemeId::IrOstbc(4)][k];
                let n = scheme.frame_columns().unwrap();
                let frame = sample_haar_frame::<f64>(4, n, RngStream::new(seed, 2)).unwrap();
                let draw = if scheme.needs_phases() {
                    SchemeDraw::with_frame_and_phases(frame, 0.4, 1.9)
                } else {
                    SchemeDraw::with_frame(frame)
                };
                let h = normalize_channel(&ChannelVector::new(random_g::<4>(seed).to_vec()).unwrap()).unwrap();
                let lo = ir_instant_mi(scheme, &h, snr(s), &draw).unwrap();
                let hi = ir_instant_mi(scheme, &h, snr(s + ds), &draw).unwrap();
                prop_assert!(hi >= lo - 1e-12);
            }

            #[test]
            fn ir_bfa_below_projection_bound(seed in 0u64..10_000, s in 0.0..1e3f64) {
                let m = 5;
                let frame = sample_haar_frame::<f64>(m, 2, RngStream::new(seed, 3)).unwrap();
                let h = normalize_channel(&ChannelVector::new(random_g::<5>(seed).to_vec()).unwrap()).unwrap();
                let v = ir_instant_mi(SchemeId::IrBfA, &h, snr(s), &SchemeDraw::with_frame(frame)).unwrap();
                prop_assert!(v <= (1.0 + s * m as f64 / 2.0).log2() + 1e-12);
            }
        }

        fn c64(x: f64) -> Complex<f64> {
            c(x, 0.0)
        }
    }
}
