//! Channel, SNR and mutual-information value types.
//!
//! The MISO link is `y = h^T x + n` with `M` transmit antennas. Most results
//! assume the normalization `||h||^2 / M = 1`; channels are accepted raw and
//! normalized explicitly with [`normalize_channel`].

use std::fmt;
use std::str::FromStr;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Complex channel vector of a MISO link.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelVector<T> {
    coefficients: Vec<Complex<T>>,
}

impl<T: Real> ChannelVector<T> {
    pub fn new(coefficients: Vec<Complex<T>>) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(Error::Domain("channel needs at least one antenna".into()));
        }
        Ok(Self { coefficients })
    }

    /// Channel with purely real gains.
    pub fn from_real(gains: &[T]) -> Result<Self> {
        Self::new(gains.iter().map(|&g| Complex::new(g, T::zero())).collect())
    }

    pub fn coefficients(&self) -> &[Complex<T>] {
        &self.coefficients
    }

    /// Number of transmit antennas `M`.
    pub fn m(&self) -> usize {
        self.coefficients.len()
    }

    pub fn norm_sqr(&self) -> T {
        self.coefficients.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Whether `||h||^2 / M = 1` holds to the precondition tolerance.
    pub fn is_normalized(&self) -> bool {
        let ratio = self.norm_sqr() / T::from_count(self.m());
        (ratio - T::one()).abs() <= T::precondition_tol()
    }

    pub(crate) fn require_normalized(&self) -> Result<()> {
        if self.is_normalized() {
            Ok(())
        } else {
            Err(Error::PreconditionViolation(format!(
                "channel must satisfy ||h||^2/M = 1, got {}",
                (self.norm_sqr() / T::from_count(self.m())).as_f64()
            )))
        }
    }
}

/// Rescales `h` so that `||h||^2 / M = 1`, preserving its direction.
pub fn normalize_channel<T: Real>(h: &ChannelVector<T>) -> Result<ChannelVector<T>> {
    let norm = h.norm_sqr().sqrt();
    if norm == T::zero() {
        return Err(Error::ZeroChannel);
    }
    let scale = T::from_count(h.m()).sqrt() / norm;
    Ok(ChannelVector {
        coefficients: h.coefficients.iter().map(|&c| c * scale).collect(),
    })
}

/// High-SNR conversion of a rate gap to a power gap: one bit is `10 log10(2)` dB.
pub fn bits_to_db<T: Real>(gap_bits: T) -> Result<T> {
    if gap_bits < T::zero() {
        return Err(Error::NegativeGap(gap_bits.as_f64()));
    }
    Ok(gap_bits * T::lit(10.0) * T::LOG10_2())
}

pub fn db_to_linear<T: Real>(db: T) -> T {
    T::lit(10.0).powf(db / T::lit(10.0))
}

pub fn linear_to_db<T: Real>(linear: T) -> T {
    T::lit(10.0) * linear.log10()
}

/// Linear SNR `es / N0`. May be `+inf` for asymptotic evaluations.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct SnrPoint<T>(T);

impl<T: Real> SnrPoint<T> {
    pub fn linear(snr: T) -> Result<Self> {
        if snr.is_nan() || snr < T::zero() {
            return Err(Error::Domain(format!("SNR must be nonnegative, got {}", snr.as_f64())));
        }
        Ok(Self(snr))
    }

    pub fn from_db(db: T) -> Result<Self> {
        if db.is_nan() || db == T::infinity() {
            return if db.is_nan() {
                Err(Error::Domain("SNR in dB is NaN".into()))
            } else {
                Ok(Self::infinite())
            };
        }
        Self::linear(db_to_linear(db))
    }

    pub fn infinite() -> Self {
        Self(T::infinity())
    }

    pub fn value(self) -> T {
        self.0
    }

    pub fn is_infinite(self) -> bool {
        self.0.is_infinite()
    }

    /// Linear value for formulas that have no asymptotic form.
    pub fn finite(self) -> Result<T> {
        if self.is_infinite() {
            Err(Error::AsymptoticOnly)
        } else {
            Ok(self.0)
        }
    }

    pub fn db(self) -> T {
        linear_to_db(self.0)
    }
}

/// Monte-Carlo estimate of an ergodic mutual information, in bits per symbol.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MiEstimate<T> {
    pub mean_bits: T,
    /// Sample standard deviation over `sqrt(trials)`.
    pub stderr_bits: T,
    pub trials: u64,
}

impl<T: Real> MiEstimate<T> {
    pub fn exact(value: T) -> Self {
        Self {
            mean_bits: value,
            stderr_bits: T::zero(),
            trials: 1,
        }
    }
}

/// Scalar-coding schemes covered by the library.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SchemeId {
    /// White-input benchmark `log2(1 + SNR)`.
    Opt,
    /// Randomized beamforming onto one Haar-random direction.
    IrBf,
    /// Plain Alamouti on a 2-antenna channel.
    Alamouti,
    /// ABBA quasi-orthogonal code with linear MMSE front end, 4 antennas.
    Abba,
    IrAbba,
    /// Two phase-rotated Alamouti copies, 4 antennas.
    Trombi,
    IrTrombi,
    /// Alamouti on a 2-column Haar-random projection.
    IrBfA,
    /// Rate-optimal OSTBC on an `n`-column Haar-random projection.
    IrOstbc(usize),
}

impl SchemeId {
    /// Frame columns the per-block draw must carry, `None` for schemes
    /// without randomized beamforming.
    pub fn frame_columns(self) -> Option<usize> {
        match self {
            SchemeId::IrBf => Some(1),
            SchemeId::IrBfA => Some(2),
            SchemeId::IrAbba | SchemeId::IrTrombi => Some(4),
            SchemeId::IrOstbc(n) => Some(n),
            SchemeId::Opt | SchemeId::Alamouti | SchemeId::Abba | SchemeId::Trombi => None,
        }
    }

    pub fn needs_phases(self) -> bool {
        matches!(self, SchemeId::Trombi | SchemeId::IrTrombi)
    }

    /// Whether the instantaneous MI is random (depends on a per-block draw).
    pub fn is_randomized(self) -> bool {
        self.frame_columns().is_some() || self.needs_phases()
    }

    /// Number of antennas the scheme is defined for, if fixed.
    pub fn fixed_antennas(self) -> Option<usize> {
        match self {
            SchemeId::Alamouti => Some(2),
            SchemeId::Abba | SchemeId::Trombi => Some(4),
            _ => None,
        }
    }
}

impl fmt::Display for SchemeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SchemeId::Opt => f.write_str("OPT"),
            SchemeId::IrBf => f.write_str("IR_BF"),
            SchemeId::Alamouti => f.write_str("ALAMOUTI"),
            SchemeId::Abba => f.write_str("ABBA"),
            SchemeId::IrAbba => f.write_str("IR_ABBA"),
            SchemeId::Trombi => f.write_str("TROMBI"),
            SchemeId::IrTrombi => f.write_str("IR_TROMBI"),
            SchemeId::IrBfA => f.write_str("IR_BF_A"),
            SchemeId::IrOstbc(n) => write!(f, "IR_OSTBC({n})"),
        }
    }
}

impl FromStr for SchemeId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let upper = s.trim().to_ascii_uppercase().replace('-', "_");
        let scheme = match upper.as_str() {
            "OPT" => SchemeId::Opt,
            "IR_BF" => SchemeId::IrBf,
            "ALAMOUTI" => SchemeId::Alamouti,
            "ABBA" => SchemeId::Abba,
            "IR_ABBA" => SchemeId::IrAbba,
            "TROMBI" => SchemeId::Trombi,
            "IR_TROMBI" => SchemeId::IrTrombi,
            "IR_BF_A" => SchemeId::IrBfA,
            other => {
                let n = other
                    .strip_prefix("IR_OSTBC(")
                    .and_then(|rest| rest.strip_suffix(')'))
                    .or_else(|| other.strip_prefix("IR_OSTBC"))
                    .and_then(|n| n.trim_start_matches('_').parse::<usize>().ok())
                    .ok_or_else(|| Error::Domain(format!("unknown scheme '{s}'")))?;
                SchemeId::IrOstbc(n)
            }
        };
        Ok(scheme)
    }
}
