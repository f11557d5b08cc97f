//! Gap between the white-input rate and randomized-beamforming schemes,
//! evaluated by quadrature.
//!
//! For IR-BF-A on `M` antennas the squared projection radius `r^2` of the
//! normalized channel onto the 2-column frame has density `f_r` with
//! `f_r(u) = 2 (M-1)(M-2) u^3 (1-u^2)^(M-3)`, so
//!
//! ```text
//! Δ(SNR, M) = 2 (M-1)(M-2) ∫_0^1 log2((1 + SNR) / (1 + M SNR u^2 / 2)) u^3 (1-u^2)^(M-3) du
//! ```
//!
//! The factor 2 is what makes `f_r` integrate to one. All `[0, 1]` integrals
//! are taken in `v = u^2`, where the Jacobian absorbs the factor 2 and the
//! weight becomes the Beta(2, M-2) kernel `(M-1)(M-2) v (1-v)^(M-3)`.

use crate::error::{Error, Result};
use crate::model::{bits_to_db, SnrPoint};
use crate::model::{ChannelVector, SchemeId};
use crate::montecarlo::{ergodic_mi, McConfig};
use crate::quadrature::Quadrature;
use crate::scalar::Real;
use crate::schemes::{log2_1p, ostbc_max_rate};
use crate::special::{digamma, ln_beta_normalizer, ln_gamma};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GapMethod {
    Quadrature,
    MonteCarlo,
    AnalyticLimit,
}

/// Gap to the white-input rate, in bits and in dB.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapValue<T> {
    pub gap_bits: T,
    pub gap_db: T,
    pub method: GapMethod,
    pub abs_error_bound: T,
}

impl<T: Real> GapValue<T> {
    /// Negative values inside the error bound are rounded to zero.
    pub fn new(gap_bits: T, method: GapMethod, abs_error_bound: T) -> Result<Self> {
        let gap_bits = if gap_bits < T::zero() && -gap_bits <= abs_error_bound {
            T::zero()
        } else {
            gap_bits
        };
        Ok(Self {
            gap_bits,
            gap_db: bits_to_db(gap_bits)?,
            method,
            abs_error_bound,
        })
    }

    fn exact_zero(method: GapMethod) -> Self {
        Self {
            gap_bits: T::zero(),
            gap_db: T::zero(),
            method,
            abs_error_bound: T::zero(),
        }
    }
}

/// Guaranteed bound on the quadrature gaps (`1e-8` in double precision).
pub fn gap_error_budget<T: Real>() -> T {
    T::lit(1e-8).max(T::epsilon() * T::lit(1e3))
}

fn quadrature<T: Real>() -> Quadrature<T> {
    // The adaptive estimate is used as the reported bound, so ask for a
    // margin below the budget.
    Quadrature::new(gap_error_budget::<T>() * T::lit(0.01))
}

/// Panel breaks for a Beta-kernel integral on `v ∈ [0, 1]` whose mass sits
/// around `v ~ n/m`, plus an optional extra feature point.
fn beta_breaks<T: Real>(m: usize, extra: Option<T>) -> Vec<T> {
    let scale = T::from_count(m).recip();
    let mut pts = vec![T::zero(), T::one()];
    let mut x = scale * T::lit(0.125);
    while x < T::one() {
        pts.push(x);
        x *= T::lit(2.0);
    }
    if let Some(e) = extra {
        if e > T::zero() && e < T::one() {
            pts.push(e);
        }
    }
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup();
    pts
}

/// Beta(n, m-n) density of `r^2` in `v`, in log form for large `m`.
fn beta_density<T: Real>(v: T, m: usize, n: usize, ln_norm: T) -> T {
    if v <= T::zero() || v >= T::one() {
        return T::zero();
    }
    let mut ln = ln_norm;
    if n > 1 {
        ln += T::from_count(n - 1) * v.ln();
    }
    if m - n > 1 {
        ln += T::from_count(m - n - 1) * (-v).ln_1p();
    }
    ln.exp()
}

fn check_m(m: usize) -> Result<()> {
    if m < 2 {
        return Err(Error::Domain(format!("gap needs at least 2 antennas, got {m}")));
    }
    Ok(())
}

/// IR-BF-A gap `Δ(SNR, M)` by quadrature. Infinite SNR dispatches to
/// [`gap_asymptotic`].
pub fn gap_closed_form<T: Real>(snr: SnrPoint<T>, m: usize) -> Result<GapValue<T>> {
    check_m(m)?;
    if snr.is_infinite() {
        return gap_asymptotic(m);
    }
    let s = snr.value();
    if m == 2 || s == T::zero() {
        return Ok(GapValue::exact_zero(GapMethod::Quadrature));
    }
    let mf = T::from_count(m);
    let ln_norm = ln_beta_normalizer::<T>(m, 2);
    let opt = log2_1p(s);
    let half_ms = mf * s * T::lit(0.5);
    let integrand = |v: T| (opt - log2_1p(half_ms * v)) * beta_density(v, m, 2, ln_norm);
    let knee = (half_ms).recip();
    let r = quadrature().integrate_with_breaks(integrand, &beta_breaks(m, Some(knee)))?;
    GapValue::new(r.value, GapMethod::Quadrature, r.error_bound)
}

/// High-SNR limit `Δ_M`: the same integral with the log term replaced by
/// `log2(2 / (M v))`. Zero for `M = 2`.
pub fn gap_asymptotic<T: Real>(m: usize) -> Result<GapValue<T>> {
    check_m(m)?;
    if m == 2 {
        return Ok(GapValue::exact_zero(GapMethod::Quadrature));
    }
    let mf = T::from_count(m);
    let ln_norm = ln_beta_normalizer::<T>(m, 2);
    let c = (T::lit(2.0) / mf).log2();
    let integrand = |v: T| (c - v.log2()) * beta_density(v, m, 2, ln_norm);
    let r = quadrature().integrate_with_breaks(integrand, &beta_breaks(m, None))?;
    GapValue::new(r.value, GapMethod::Quadrature, r.error_bound)
}

/// Truncation point of the `[0, ∞)` limit integrals.
pub const LIMIT_Z_MAX: f64 = 50.0;

/// Bound on `∫_{z_max}^∞ |log2(n/z)| z^(n-1) e^(-z) / Γ(n) dz` for `n ≤ 2`.
pub fn limit_tail_bound(z_max: f64) -> f64 {
    (z_max + 1.0) * (-z_max).exp() * z_max.log2()
}

/// `M → ∞` gap with `n ∈ {1, 2}` rate-one virtual antennas,
/// `log2(n) - ψ(n) / ln 2`: `γ/ln 2 ≈ 0.8327` for beamforming alone,
/// `1 - (log2 e - γ/ln 2) ≈ 0.3901` for randomly beamformed Alamouti.
///
/// The digamma value is cross-checked against the truncated integral
/// `∫_0^{z_max} log2(n/z) z^(n-1) e^(-z) / Γ(n) dz`; the reported error
/// bound is their difference plus the analytic tail bound.
pub fn gap_limit_virtual<T: Real>(n_virtual: usize) -> Result<GapValue<T>> {
    if !(1..=2).contains(&n_virtual) {
        return Err(Error::DivergentGap(n_virtual));
    }
    let n = T::from_count(n_virtual);
    let analytic = n.log2() - digamma(n) * T::LOG2_E();
    let truncated = gap_limit_virtual_truncated::<T>(n_virtual, T::lit(LIMIT_Z_MAX))?;
    let diff = (analytic - truncated).abs() + T::lit(limit_tail_bound(LIMIT_Z_MAX));
    let tol = T::lit(1e-6).max(T::epsilon() * T::lit(1e2));
    if diff > tol {
        return Err(Error::QuadratureFailure {
            tol: tol.as_f64(),
            error_estimate: diff.as_f64(),
            subdivisions: 0,
        });
    }
    GapValue::new(analytic, GapMethod::AnalyticLimit, diff)
}

/// `∫_0^{z_max} log2(n/z) z^(n-1) e^(-z) / Γ(n) dz`, with `z = t^2` to
/// remove the logarithmic endpoint singularity.
pub fn gap_limit_virtual_truncated<T: Real>(n_virtual: usize, z_max: T) -> Result<T> {
    let n = T::from_count(n_virtual);
    let ln_gn = ln_gamma(n);
    let integrand = |t: T| {
        let z = t * t;
        let ln_w = (n - T::one()) * z.ln() - z - ln_gn;
        (n.log2() - z.log2()) * ln_w.exp() * T::lit(2.0) * t
    };
    let t_max = z_max.sqrt();
    let breaks: Vec<T> = [0.0, 0.5, 1.0, 2.0, 3.0, 4.0, 5.0]
        .iter()
        .map(|&x| T::lit(x))
        .filter(|&x| x < t_max)
        .chain(std::iter::once(t_max))
        .collect();
    let q = Quadrature::new(T::lit(1e-12).max(T::epsilon() * T::lit(1e2)));
    Ok(q.integrate_with_breaks(integrand, &breaks)?.value)
}

/// Gap of Alamouti-style schemes on `n` Haar-random virtual antennas:
/// `log2(1 + SNR) - E[R log2(1 + SNR M r^2 / (n R))]`, `r^2 ~ Beta(n, M-n)`
/// and `R` the maximal OSTBC rate for `n` antennas. `n = 1` is plain
/// randomized beamforming; `n = 2` coincides with [`gap_closed_form`].
pub fn gap_general<T: Real>(snr: SnrPoint<T>, m: usize, n_virtual: usize) -> Result<GapValue<T>> {
    let s = snr.finite()?;
    if n_virtual < 1 || n_virtual > m {
        return Err(Error::Domain(format!(
            "need 1 <= n_virtual <= m, got n={n_virtual}, m={m}"
        )));
    }
    let rate = ostbc_max_rate(n_virtual)?.value::<T>();
    let opt = log2_1p(s);
    let mf = T::from_count(m);
    let nf = T::from_count(n_virtual);
    if n_virtual == m {
        return GapValue::new(opt - rate * log2_1p(s / rate), GapMethod::Quadrature, T::zero());
    }
    if s == T::zero() {
        return Ok(GapValue::exact_zero(GapMethod::Quadrature));
    }
    let ln_norm = ln_beta_normalizer::<T>(m, n_virtual);
    let gain = s * mf / (nf * rate);
    let integrand = |v: T| (opt - rate * log2_1p(gain * v)) * beta_density(v, m, n_virtual, ln_norm);
    let r = quadrature().integrate_with_breaks(integrand, &beta_breaks(m, Some(gain.recip())))?;
    GapValue::new(r.value, GapMethod::Quadrature, r.error_bound)
}

/// Monte-Carlo counterpart of [`gap_general`]: `log2(1 + SNR)` minus the
/// ergodic rate of `IR_OSTBC(n)` on a random normalized channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McGap<T> {
    pub gap_bits: T,
    pub stderr_bits: T,
    pub trials: u64,
}

pub fn gap_monte_carlo<T: Real>(
    snr: SnrPoint<T>,
    h: &ChannelVector<T>,
    n_virtual: usize,
    cfg: &McConfig<T>,
) -> Result<McGap<T>> {
    let scheme = if n_virtual == 2 {
        SchemeId::IrBfA
    } else {
        SchemeId::IrOstbc(n_virtual)
    };
    let est = ergodic_mi(scheme, h, snr, cfg)?;
    Ok(McGap {
        gap_bits: log2_1p(snr.finite()?) - est.mean_bits,
        stderr_bits: est.stderr_bits,
        trials: est.trials,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonotonicityReport<T> {
    /// `(snr_db, Δ)` per grid point.
    pub points: Vec<(T, T)>,
    pub asymptote: T,
    /// Largest decrease `Δ(i) - Δ(i+1)` seen (negative when strictly increasing).
    pub worst_decrease: T,
    pub pass: bool,
}

/// Slack allowed between consecutive grid points.
pub const MONOTONICITY_SLACK: f64 = 1e-9;

/// Evaluates [`gap_closed_form`] on an ascending dB grid and checks that it
/// never decreases (up to [`MONOTONICITY_SLACK`]) and stays below `Δ_M`.
pub fn verify_monotonicity<T: Real>(m: usize, snr_grid_db: &[T]) -> Result<MonotonicityReport<T>> {
    check_m(m)?;
    if snr_grid_db.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(Error::Domain("SNR grid must be sorted ascending".into()));
    }
    let points: Vec<(T, T)> = snr_grid_db
        .iter()
        .map(|&db| Ok((db, gap_closed_form(SnrPoint::from_db(db)?, m)?.gap_bits)))
        .collect::<Result<_>>()?;
    let asymptote = gap_asymptotic::<T>(m)?.gap_bits;
    let slack = T::lit(MONOTONICITY_SLACK).max(T::epsilon() * T::lit(1e2));
    let mut worst = T::neg_infinity();
    for w in points.windows(2) {
        worst = worst.max(w[0].1 - w[1].1);
    }
    let last_ok = points
        .last()
        .is_none_or(|&(_, d)| d <= asymptote + gap_error_budget::<T>());
    Ok(MonotonicityReport {
        pass: worst <= slack && last_ok,
        points,
        asymptote,
        worst_decrease: worst,
    })
}
