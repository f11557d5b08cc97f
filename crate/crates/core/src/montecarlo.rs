//! Ergodic mutual information by Monte-Carlo over per-block draws.
//!
//! Trial `i` draws from `RngStream { seed, stream_index: base + i }`, so a
//! trial's draw does not depend on which worker runs it. Trials are grouped
//! in fixed blocks of [`CHECK_INTERVAL`]; each block is reduced sequentially
//! and blocks are merged in index order, which makes every estimate
//! bit-identical for any thread count.

use num_complex::Complex;
use rand::Rng;
use rayon::prelude::*;

use crate::ensembles::{sample_haar_frame_from, RngStream};
use crate::error::{Error, Result};
use crate::model::{normalize_channel, ChannelVector, MiEstimate, SchemeId, SnrPoint};
use crate::scalar::Real;
use crate::schemes::{ir_instant_mi, SchemeDraw};

/// Trials per block; early stopping is checked at block boundaries only.
pub const CHECK_INTERVAL: u64 = 1_000;

/// Blocks evaluated in parallel between early-stop checks.
const BLOCKS_PER_ROUND: u64 = 64;

/// Stream offset between SNR grid points of a sweep.
const GRID_STREAM_STRIDE: u64 = 1 << 40;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McConfig<T> {
    /// Trials run when no stderr target is set.
    pub trials: u64,
    pub seed: u64,
    /// With a target, estimation stops at the first block boundary (and no
    /// earlier than [`CHECK_INTERVAL`] trials) where the stderr is at or
    /// below it, or at `max_trials`.
    pub target_stderr_bits: Option<T>,
    pub max_trials: u64,
}

impl<T: Real> McConfig<T> {
    pub fn new(trials: u64, seed: u64) -> Self {
        Self {
            trials,
            seed,
            target_stderr_bits: None,
            max_trials: trials,
        }
    }

    pub fn with_target(mut self, target_stderr_bits: T, max_trials: u64) -> Self {
        self.target_stderr_bits = Some(target_stderr_bits);
        self.max_trials = max_trials;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.trials == 0 || self.max_trials == 0 {
            return Err(Error::Domain("trial counts must be positive".into()));
        }
        if self.trials > self.max_trials {
            return Err(Error::Domain(format!(
                "trials ({}) exceed max_trials ({})",
                self.trials, self.max_trials
            )));
        }
        if let Some(t) = self.target_stderr_bits {
            if !(t > T::zero()) {
                return Err(Error::Domain("target stderr must be positive".into()));
            }
        }
        Ok(())
    }
}

/// Running `(count, mean, M2)` triple.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Accumulator<T> {
    count: u64,
    mean: T,
    m2: T,
}

impl<T: Real> Accumulator<T> {
    pub(crate) fn new() -> Self {
        Self {
            count: 0,
            mean: T::zero(),
            m2: T::zero(),
        }
    }

    pub(crate) fn push(&mut self, x: T) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / T::lit(self.count as f64);
        self.m2 += delta * (x - self.mean);
    }

    pub(crate) fn merge(&mut self, other: &Self) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let (na, nb) = (T::lit(self.count as f64), T::lit(other.count as f64));
        let n = na + nb;
        let delta = other.mean - self.mean;
        self.mean += delta * nb / n;
        self.m2 += other.m2 + delta * delta * na * nb / n;
        self.count += other.count;
    }

    pub(crate) fn stderr(&self) -> T {
        if self.count < 2 {
            return T::zero();
        }
        let n = T::lit(self.count as f64);
        let var = (self.m2 / (n - T::one())).max(T::zero());
        (var / n).sqrt()
    }

    pub(crate) fn estimate(&self) -> MiEstimate<T> {
        MiEstimate {
            mean_bits: self.mean,
            stderr_bits: self.stderr(),
            trials: self.count,
        }
    }
}

/// Fresh per-block draw for `scheme` on `m` antennas.
pub fn draw_for<T: Real, R: Rng + ?Sized>(scheme: SchemeId, m: usize, rng: &mut R) -> Result<SchemeDraw<T>> {
    let frame = match scheme.frame_columns() {
        Some(n) => Some(sample_haar_frame_from(m, n, rng)?),
        None => None,
    };
    let phases = scheme
        .needs_phases()
        .then(|| (T::sample_unit(rng) * T::TAU(), T::sample_unit(rng) * T::TAU()));
    Ok(SchemeDraw { frame, phases })
}

/// Whether the per-draw rate depends on the draw only through the projected
/// energy, and the projection is onto the whole space (so nothing is random).
fn lossless_projection(scheme: SchemeId, m: usize) -> bool {
    matches!(scheme, SchemeId::IrBf | SchemeId::IrBfA | SchemeId::IrOstbc(_)) && scheme.frame_columns() == Some(m)
}

/// Ergodic mutual information of `scheme` on channel `h`.
///
/// `h` must satisfy `||h||^2 / M = 1`. Deterministic schemes (and energy-only
/// schemes whose frame spans the whole space) are evaluated once and report
/// zero stderr.
pub fn ergodic_mi<T: Real>(
    scheme: SchemeId,
    h: &ChannelVector<T>,
    snr: SnrPoint<T>,
    cfg: &McConfig<T>,
) -> Result<MiEstimate<T>> {
    ergodic_mi_at(scheme, h, snr, cfg, 0)
}

fn ergodic_mi_at<T: Real>(
    scheme: SchemeId,
    h: &ChannelVector<T>,
    snr: SnrPoint<T>,
    cfg: &McConfig<T>,
    stream_base: u64,
) -> Result<MiEstimate<T>> {
    cfg.validate()?;
    snr.finite()?;
    h.require_normalized()?;
    let m = h.m();
    if let Some(n) = scheme.frame_columns() {
        if n == 0 || n > m {
            return Err(Error::FrameTooLarge { m, n });
        }
    }

    if !scheme.is_randomized() {
        return Ok(MiEstimate::exact(ir_instant_mi(scheme, h, snr, &SchemeDraw::none())?));
    }
    if lossless_projection(scheme, m) {
        let frame = crate::ensembles::OrthonormalFrame::canonical(m, m)?;
        return Ok(MiEstimate::exact(ir_instant_mi(
            scheme,
            h,
            snr,
            &SchemeDraw::with_frame(frame),
        )?));
    }

    let trial = |i: u64| -> Result<T> {
        let mut rng = RngStream::new(cfg.seed, stream_base + i).rng();
        let draw = draw_for(scheme, m, &mut rng)?;
        ir_instant_mi(scheme, h, snr, &draw)
    };
    let block = |b: u64, end: u64| -> Result<Accumulator<T>> {
        let mut acc = Accumulator::new();
        for i in b * CHECK_INTERVAL..((b + 1) * CHECK_INTERVAL).min(end) {
            acc.push(trial(i)?);
        }
        Ok(acc)
    };

    let mut total = Accumulator::new();
    match cfg.target_stderr_bits {
        None => {
            let end = cfg.trials;
            let blocks: Vec<Accumulator<T>> = (0..end.div_ceil(CHECK_INTERVAL))
                .into_par_iter()
                .map(|b| block(b, end))
                .collect::<Result<_>>()?;
            for b in &blocks {
                total.merge(b);
            }
        }
        Some(target) => {
            let end = cfg.max_trials;
            let n_blocks = end.div_ceil(CHECK_INTERVAL);
            let mut next = 0;
            'rounds: while next < n_blocks {
                let stop = (next + BLOCKS_PER_ROUND).min(n_blocks);
                let blocks: Vec<Accumulator<T>> = (next..stop)
                    .into_par_iter()
                    .map(|b| block(b, end))
                    .collect::<Result<_>>()?;
                for b in &blocks {
                    total.merge(b);
                    if total.count >= CHECK_INTERVAL && total.stderr() <= target {
                        break 'rounds;
                    }
                }
                next = stop;
            }
        }
    }
    Ok(total.estimate())
}

/// [`ergodic_mi`] at each grid point. Grid point `k` uses streams offset by
/// `k * 2^40`, so points share no random draws.
pub fn sweep_ergodic_mi<T: Real>(
    scheme: SchemeId,
    h: &ChannelVector<T>,
    snr_grid: &[SnrPoint<T>],
    cfg: &McConfig<T>,
) -> Result<Vec<MiEstimate<T>>> {
    snr_grid
        .iter()
        .enumerate()
        .map(|(k, &snr)| ergodic_mi_at(scheme, h, snr, cfg, k as u64 * GRID_STREAM_STRIDE))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct NdoReport<T> {
    pub channels: Vec<ChannelVector<T>>,
    pub estimates: Vec<MiEstimate<T>>,
    pub max_pairwise_gap_bits: T,
    /// Combined stderr `sqrt(se_i^2 + se_j^2)` of the pair with the largest gap.
    pub stderr_bits: T,
    /// Every pair agrees within three combined standard errors.
    pub pass: bool,
}

/// Salt separating the channel-direction streams from the trial streams.
const DIRECTION_SEED_SALT: u64 = 0x9e37_79b9_7f4a_7c15;

/// Random channel direction with `||h||^2 / M = 1` (isotropic complex Gaussian, normalized).
pub fn random_channel<T: Real>(m: usize, stream: RngStream) -> Result<ChannelVector<T>> {
    let mut rng = stream.rng();
    let coeffs = (0..m)
        .map(|_| Complex::new(T::sample_standard_normal(&mut rng), T::sample_standard_normal(&mut rng)))
        .collect();
    normalize_channel(&ChannelVector::new(coeffs)?)
}

/// Checks that the ergodic rate of `scheme` depends on the channel only
/// through its norm: estimates it for `num_directions` random normalized
/// channels (independent trial streams per channel) and compares all pairs.
pub fn ndo_check<T: Real>(
    scheme: SchemeId,
    m: usize,
    snr: SnrPoint<T>,
    num_directions: usize,
    cfg: &McConfig<T>,
) -> Result<NdoReport<T>> {
    if !scheme.is_randomized() {
        return Err(Error::Domain(format!(
            "{scheme} is not a randomized-beamforming scheme"
        )));
    }
    if num_directions == 0 {
        return Err(Error::Domain("need at least one channel direction".into()));
    }
    let channels: Vec<ChannelVector<T>> = (0..num_directions as u64)
        .map(|d| random_channel(m, RngStream::new(cfg.seed ^ DIRECTION_SEED_SALT, d)))
        .collect::<Result<_>>()?;
    let estimates: Vec<MiEstimate<T>> = channels
        .iter()
        .enumerate()
        .map(|(d, h)| {
            let per_dir = McConfig {
                seed: cfg.seed.wrapping_add(d as u64),
                ..*cfg
            };
            ergodic_mi(scheme, h, snr, &per_dir)
        })
        .collect::<Result<_>>()?;

    let mut max_gap = T::zero();
    let mut gap_se = T::zero();
    let mut pass = true;
    for i in 0..estimates.len() {
        for j in i + 1..estimates.len() {
            let (a, b) = (&estimates[i], &estimates[j]);
            let gap = (a.mean_bits - b.mean_bits).abs();
            let se = (a.stderr_bits.powi(2) + b.stderr_bits.powi(2)).sqrt();
            if gap > T::lit(3.0) * se {
                pass = false;
            }
            if gap > max_gap {
                max_gap = gap;
                gap_se = se;
            }
        }
    }
    Ok(NdoReport {
        channels,
        estimates,
        max_pairwise_gap_bits: max_gap,
        stderr_bits: gap_se,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn snr(s: f64) -> SnrPoint<f64> {
        SnrPoint::linear(s).unwrap()
    }

    #[test]
    fn accumulator_merge_matches_sequential() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 7919) % 1013) as f64 / 37.0).collect();
        let mut seq = Accumulator::new();
        xs.iter().for_each(|&x| seq.push(x));
        let mut merged = Accumulator::new();
        for chunk in xs.chunks(77) {
            let mut a = Accumulator::new();
            chunk.iter().for_each(|&x| a.push(x));
            merged.merge(&a);
        }
        assert_eq!(seq.count, merged.count);
        assert!((seq.mean - merged.mean).abs() < 1e-12);
        assert!((seq.m2 - merged.m2).abs() < 1e-9 * seq.m2);
        let mean = xs.iter().sum::<f64>() / 1000.0;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 999.0;
        assert!((seq.stderr() - (var / 1000.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn lossless_projection_is_exact() {
        let h = ChannelVector::from_real(&[1.0, 1.0]).unwrap();
        for s in [0.0, 1.0, 10.0] {
            let e = ergodic_mi(SchemeId::IrBfA, &h, snr(s), &McConfig::new(5_000, 1)).unwrap();
            assert_eq!(e.mean_bits, (1.0f64 + s).log2());
            assert_eq!(e.stderr_bits, 0.0);
        }
    }

    #[test]
    fn deterministic_schemes_have_zero_stderr() {
        let h = ChannelVector::from_real(&[1.0, 1.0, 1.0, 1.0]).unwrap();
        for scheme in [SchemeId::Opt, SchemeId::Abba] {
            let e = ergodic_mi(scheme, &h, snr(3.0), &McConfig::new(100, 1)).unwrap();
            assert_eq!(e.stderr_bits, 0.0);
            assert_eq!(e.trials, 1);
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let raw = ChannelVector::from_real(&[1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(
            ergodic_mi(SchemeId::IrBf, &raw, snr(1.0), &McConfig::new(10, 0)),
            Err(Error::PreconditionViolation(_))
        ));
        let h = normalize_channel(&raw).unwrap();
        assert!(ergodic_mi(SchemeId::IrBf, &h, snr(1.0), &McConfig::new(0, 0)).is_err());
        assert!(ergodic_mi(SchemeId::IrAbba, &h, snr(1.0), &McConfig::new(10, 0)).is_err());
        let bad = McConfig {
            trials: 20,
            seed: 0,
            target_stderr_bits: None,
            max_trials: 10,
        };
        assert!(ergodic_mi(SchemeId::IrBf, &h, snr(1.0), &bad).is_err());
    }

    #[test]
    fn reproducible_across_thread_counts() {
        let h = random_channel::<f64>(4, RngStream::new(3, 3)).unwrap();
        let cfg = McConfig::new(20_500, 99);
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| ergodic_mi(SchemeId::IrAbba, &h, snr(10.0), &cfg).unwrap())
        };
        let one = run(1);
        assert_eq!(one, run(3));
        assert_eq!(one, run(8));
        assert_eq!(one.trials, 20_500);
    }

    #[test]
    fn early_stop_respects_target_and_floor() {
        let h = random_channel::<f64>(8, RngStream::new(1, 1)).unwrap();
        let cfg = McConfig::new(1_000, 5).with_target(0.01, 1_000_000);
        let e = ergodic_mi(SchemeId::IrBf, &h, snr(10.0), &cfg).unwrap();
        assert!(e.stderr_bits <= 0.01);
        assert!(e.trials >= CHECK_INTERVAL && e.trials % CHECK_INTERVAL == 0);
        assert!(e.trials < 1_000_000);
        // Huge target: stops at the floor, never earlier.
        let cfg = McConfig::new(1_000, 5).with_target(10.0, 50_000);
        assert_eq!(
            ergodic_mi(SchemeId::IrBf, &h, snr(10.0), &cfg).unwrap().trials,
            CHECK_INTERVAL
        );
    }

    #[test]
    fn sweep_edge_cases() {
        let h = random_channel::<f64>(4, RngStream::new(2, 2)).unwrap();
        let cfg = McConfig::new(3_000, 4);
        assert!(sweep_ergodic_mi(SchemeId::IrBfA, &h, &[], &cfg).unwrap().is_empty());
        let one = sweep_ergodic_mi(SchemeId::IrBfA, &h, &[snr(5.0)], &cfg).unwrap();
        assert_eq!(one[0], ergodic_mi(SchemeId::IrBfA, &h, snr(5.0), &cfg).unwrap());
        let grid: Vec<_> = [0.1, 1.0, 10.0, 100.0].iter().map(|&s| snr(s)).collect();
        let est = sweep_ergodic_mi(SchemeId::IrBfA, &h, &grid, &cfg).unwrap();
        for w in est.windows(2) {
            let slack = 3.0 * (w[0].stderr_bits.powi(2) + w[1].stderr_bits.powi(2)).sqrt();
            assert!(w[1].mean_bits >= w[0].mean_bits - slack);
        }
    }

    #[test]
    fn single_direction_ndo_is_trivial() {
        let r = ndo_check(SchemeId::IrBf, 4, snr(1.0), 1, &McConfig::new(2_000, 1)).unwrap();
        assert_eq!(r.max_pairwise_gap_bits, 0.0);
        assert!(r.pass);
        assert!(ndo_check(SchemeId::Opt, 4, snr(1.0), 2, &McConfig::new(2_000, 1)).is_err());
    }

    #[test]
    fn ir_bfa_mean_within_projection_bounds() {
        let h = random_channel::<f64>(6, RngStream::new(8, 0)).unwrap();
        let s = 20.0;
        let e = ergodic_mi(SchemeId::IrBfA, &h, snr(s), &McConfig::new(10_000, 2)).unwrap();
        assert!(e.mean_bits >= 0.0 && e.mean_bits <= (1.0 + s * 6.0 / 2.0).log2());
    }
}
