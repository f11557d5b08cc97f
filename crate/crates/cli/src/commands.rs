//! One function per subcommand. Each takes validated parameters and returns
//! the CSV text plus notes for stderr; nothing is written until the whole
//! table has been computed.

use rayon::prelude::*;

use misobench_core::analysis::gap_error_budget;
use misobench_core::montecarlo::random_channel;
use misobench_core::schemes::ostbc_max_rate;
use misobench_core::{
    gap_asymptotic, gap_closed_form, gap_general, gap_limit_virtual, ndo_check, normalize_channel, opt_mi,
    sweep_ergodic_mi, ChannelVectorF64, McConfigF64, MiEstimateF64, RngStream, SchemeId, SnrPointF64,
};

use crate::args::Opts;
use crate::error::CliError;
use crate::format::{fmt_float, parse_db, parse_db_range, push_row, DEFAULT_DB_GRID};

pub const FIGURE2_HEADER: &str = "snr_db,scheme,mi_bits,stderr_bits,trials";
pub const FIGURE4_HEADER: &str = "m,delta_bits,delta_db";
pub const FIGURE5_HEADER: &str = "snr_db,n_virtual,gap_bits,stderr_bits";
pub const GAP_HEADER: &str = "snr_db,m,n_virtual,gap_bits,gap_db,abs_error_bound";
pub const MI_HEADER: &str = "snr_db,scheme,m,mi_bits,stderr_bits,trials";
pub const NDO_HEADER: &str = "direction,mi_bits,stderr_bits,trials";

pub const DEFAULT_SEED: u64 = 1;
pub const FIGURE_TRIALS: u64 = 10_000;
pub const POINT_TRIALS: u64 = 100_000;

/// Random channel directions searched for the TROMBI worst case, on top of
/// the structured ones from [`trombi_wc_directions`].
pub const TROMBI_WC_RANDOM_DIRECTIONS: u64 = 64;
const TROMBI_WC_SALT: u64 = 0x5452_4f4d_4249_5743;

pub const FIGURE2_SCHEMES: [SchemeId; 5] = [
    SchemeId::Opt,
    SchemeId::IrBf,
    SchemeId::IrAbba,
    SchemeId::IrTrombi,
    SchemeId::IrBfA,
];

/// Result of a command: CSV body, notes for stderr and an optional failed check.
#[derive(Debug, Clone, Default)]
pub struct Report {
    pub csv: String,
    pub notes: Vec<String>,
    pub failure: Option<String>,
}

impl Report {
    fn with_header(header: &str) -> Self {
        Self {
            csv: format!("{header}\n"),
            ..Self::default()
        }
    }
}

fn reject_unused(command: &str, opts: &Opts, allowed: &[&str]) -> Result<(), CliError> {
    let extra: Vec<&str> = opts
        .present()
        .into_iter()
        .filter(|f| *f != "--out" && !allowed.contains(f))
        .collect();
    if extra.is_empty() {
        Ok(())
    } else {
        Err(CliError::Usage(format!("{command} does not take {}", extra.join(", "))))
    }
}

/// `None` stands for `inf`.
fn parse_m(s: &str) -> Result<Option<usize>, CliError> {
    if s.trim().eq_ignore_ascii_case("inf") {
        return Ok(None);
    }
    s.trim()
        .parse::<usize>()
        .map(Some)
        .map_err(|_| CliError::Usage(format!("--m expects a positive integer or inf, got '{s}'")))
}

fn finite_m(opts: &Opts, default: usize, min: usize) -> Result<usize, CliError> {
    let m = match &opts.m {
        None => default,
        Some(s) => parse_m(s)?.ok_or_else(|| CliError::Usage("--m inf is only accepted by gap".into()))?,
    };
    if m < min {
        return Err(CliError::Usage(format!("--m must be at least {min}, got {m}")));
    }
    Ok(m)
}

fn db_grid(opts: &Opts, allow_inf: bool) -> Result<Vec<f64>, CliError> {
    let grid = match (&opts.snr_db, &opts.snr_db_range) {
        (Some(s), _) => vec![parse_db(s)?],
        (None, Some(r)) => parse_db_range(r)?,
        (None, None) => parse_db_range(DEFAULT_DB_GRID)?,
    };
    for &db in &grid {
        if db == f64::NEG_INFINITY || (db == f64::INFINITY && !allow_inf) {
            return Err(CliError::Usage(format!(
                "SNR of {} dB is not supported here",
                fmt_float(db)
            )));
        }
    }
    Ok(grid)
}

fn trials(opts: &Opts, default: u64) -> Result<u64, CliError> {
    match opts.trials {
        Some(0) => Err(CliError::Usage("--trials must be positive".into())),
        Some(t) => Ok(t),
        None => Ok(default),
    }
}

fn snr_points(grid_db: &[f64]) -> Result<Vec<SnrPointF64>, CliError> {
    Ok(grid_db
        .iter()
        .map(|&db| SnrPointF64::from_db(db))
        .collect::<Result<_, _>>()?)
}

/// `(1, ..., 1)`: normalized, and as good a representative as any for the
/// norm-only schemes.
pub fn equal_gain_channel(m: usize) -> Result<ChannelVectorF64, CliError> {
    Ok(ChannelVectorF64::from_real(&vec![1.0; m])?)
}

fn mi_row(db: f64, name: &str, est: &MiEstimateF64) -> Vec<String> {
    vec![
        fmt_float(db),
        name.to_string(),
        fmt_float(est.mean_bits),
        fmt_float(est.stderr_bits),
        est.trials.to_string(),
    ]
}

// ---------------------------------------------------------------- figure2

#[derive(Debug, Clone, PartialEq)]
pub struct Figure2Params {
    pub m: usize,
    pub grid_db: Vec<f64>,
    pub trials: u64,
    pub seed: u64,
}

impl Figure2Params {
    pub fn from_opts(opts: &Opts) -> Result<Self, CliError> {
        reject_unused(
            "figure2",
            opts,
            &["--m", "--snr-db", "--snr-db-range", "--trials", "--seed"],
        )?;
        Ok(Self {
            m: finite_m(opts, 4, 2)?,
            grid_db: db_grid(opts, false)?,
            trials: trials(opts, FIGURE_TRIALS)?,
            seed: opts.seed.unwrap_or(DEFAULT_SEED),
        })
    }
}

/// Structured directions for the TROMBI worst case (all power on one
/// antenna, on each antenna pair, and equal gains), followed by
/// [`TROMBI_WC_RANDOM_DIRECTIONS`] isotropic random ones derived from `seed`.
pub fn trombi_wc_directions(seed: u64) -> Result<Vec<(String, ChannelVectorF64)>, CliError> {
    let mut dirs = Vec::new();
    let unnormalized = |v: [f64; 4]| -> Result<ChannelVectorF64, CliError> {
        Ok(normalize_channel(&ChannelVectorF64::from_real(&v)?)?)
    };
    for k in 0..4 {
        let mut v = [0.0; 4];
        v[k] = 1.0;
        dirs.push((format!("e{}", k + 1), unnormalized(v)?));
    }
    for i in 0..4 {
        for j in i + 1..4 {
            let mut v = [0.0; 4];
            v[i] = 1.0;
            v[j] = 1.0;
            dirs.push((format!("pair{}{}", i + 1, j + 1), unnormalized(v)?));
        }
    }
    dirs.push(("equal".into(), equal_gain_channel(4)?));
    for d in 0..TROMBI_WC_RANDOM_DIRECTIONS {
        let h = random_channel(4, RngStream::new(seed ^ TROMBI_WC_SALT, d))?;
        dirs.push((format!("random{d}"), h));
    }
    Ok(dirs)
}

pub fn figure2(p: &Figure2Params) -> Result<Report, CliError> {
    let snrs = snr_points(&p.grid_db)?;
    let h = equal_gain_channel(p.m)?;
    let cfg = McConfigF64::new(p.trials, p.seed);
    let mut report = Report::with_header(FIGURE2_HEADER);
    if p.m != 4 {
        report
            .notes
            .push(format!("figure2 is defined for 4 antennas; running with m = {}", p.m));
    }

    let schemes: Vec<SchemeId> = FIGURE2_SCHEMES
        .iter()
        .copied()
        .filter(|s| s.frame_columns().is_none_or(|n| n <= p.m))
        .collect();
    for s in FIGURE2_SCHEMES.iter().filter(|s| !schemes.contains(s)) {
        report
            .notes
            .push(format!("{s} needs more than {} antennas; skipped", p.m));
    }
    let mut columns: Vec<(String, Vec<MiEstimateF64>)> = schemes
        .par_iter()
        .map(|&s| Ok((s.to_string(), sweep_ergodic_mi(s, &h, &snrs, &cfg)?)))
        .collect::<Result<_, CliError>>()?;

    if p.m == 4 {
        let dirs = trombi_wc_directions(p.seed)?;
        report.notes.push(format!(
            "TROMBI_WC: minimum over {} channel directions (e1..e4, pair12..pair34, equal, {} isotropic random from seed {}) of the rate averaged over TROMBI phases",
            dirs.len(),
            TROMBI_WC_RANDOM_DIRECTIONS,
            p.seed
        ));
        let per_dir: Vec<Vec<MiEstimateF64>> = dirs
            .par_iter()
            .map(|(_, h)| sweep_ergodic_mi(SchemeId::Trombi, h, &snrs, &cfg))
            .collect::<Result<_, _>>()?;
        let worst: Vec<MiEstimateF64> = (0..snrs.len())
            .map(|k| {
                let d = (0..dirs.len())
                    .min_by(|&a, &b| per_dir[a][k].mean_bits.total_cmp(&per_dir[b][k].mean_bits))
                    .expect("at least one direction");
                per_dir[d][k]
            })
            .collect();
        columns.push(("TROMBI_WC".into(), worst));
    } else {
        report.notes.push("TROMBI_WC needs exactly 4 antennas; skipped".into());
    }

    for (k, &db) in p.grid_db.iter().enumerate() {
        for (name, col) in &columns {
            push_row(&mut report.csv, &mi_row(db, name, &col[k]));
        }
    }
    Ok(report)
}

// ---------------------------------------------------------------- figure4

#[derive(Debug, Clone, PartialEq)]
pub struct Figure4Params {
    pub m_list: Vec<usize>,
}

pub fn default_figure4_m_list() -> Vec<usize> {
    (2..=64).chain([128, 256, 512, 1000]).collect()
}

impl Figure4Params {
    pub fn from_opts(opts: &Opts) -> Result<Self, CliError> {
        reject_unused("figure4", opts, &["--m-list"])?;
        let m_list = match &opts.m_list {
            None => default_figure4_m_list(),
            Some(s) => {
                s.split(',')
                    .map(|t| {
                        t.trim().parse::<usize>().ok().filter(|&m| m >= 2).ok_or_else(|| {
                            CliError::Usage(format!("--m-list entries must be integers >= 2, got '{t}'"))
                        })
                    })
                    .collect::<Result<_, _>>()?
            }
        };
        Ok(Self { m_list })
    }
}

pub fn figure4(p: &Figure4Params) -> Result<Report, CliError> {
    let gaps = p
        .m_list
        .par_iter()
        .map(|&m| gap_asymptotic::<f64>(m))
        .collect::<Result<Vec<_>, _>>()?;
    let mut report = Report::with_header(FIGURE4_HEADER);
    for (&m, g) in p.m_list.iter().zip(&gaps) {
        push_row(
            &mut report.csv,
            &[m.to_string(), fmt_float(g.gap_bits), fmt_float(g.gap_db)],
        );
    }
    let limit = gap_limit_virtual::<f64>(2)?;
    push_row(
        &mut report.csv,
        &["inf".into(), fmt_float(limit.gap_bits), fmt_float(limit.gap_db)],
    );
    Ok(report)
}

// ---------------------------------------------------------------- figure5

#[derive(Debug, Clone, PartialEq)]
pub struct Figure5Params {
    pub m: usize,
    pub n_list: Vec<usize>,
    pub grid_db: Vec<f64>,
    pub trials: u64,
    pub seed: u64,
}

impl Figure5Params {
    pub fn from_opts(opts: &Opts) -> Result<Self, CliError> {
        reject_unused(
            "figure5",
            opts,
            &["--m", "--n-virtual", "--snr-db", "--snr-db-range", "--trials", "--seed"],
        )?;
        let m = finite_m(opts, 8, 1)?;
        let n_list = match opts.n_virtual {
            Some(n) if n == 0 || n > m => {
                return Err(CliError::Usage(format!("--n-virtual must be in 1..={m}, got {n}")));
            }
            Some(n) => vec![n],
            None => [1, 2, 4, 8].into_iter().filter(|&n| n <= m).collect(),
        };
        Ok(Self {
            m,
            n_list,
            grid_db: db_grid(opts, false)?,
            trials: trials(opts, FIGURE_TRIALS)?,
            seed: opts.seed.unwrap_or(DEFAULT_SEED),
        })
    }
}

/// Scheme whose ergodic rate defines the `n`-virtual-antenna gap.
pub fn virtual_antenna_scheme(n: usize) -> SchemeId {
    if n == 2 {
        SchemeId::IrBfA
    } else {
        SchemeId::IrOstbc(n)
    }
}

/// Monte-Carlo gaps in deviations of the quadrature value beyond this many
/// standard errors are reported as notes.
const CROSS_CHECK_SIGMAS: f64 = 5.0;

pub fn figure5(p: &Figure5Params) -> Result<Report, CliError> {
    let snrs = snr_points(&p.grid_db)?;
    let h = equal_gain_channel(p.m)?;
    let cfg = McConfigF64::new(p.trials, p.seed);
    // (mc estimates, quadrature gaps) per n
    let per_n: Vec<(Vec<MiEstimateF64>, Vec<f64>)> = p
        .n_list
        .par_iter()
        .map(|&n| {
            let est = sweep_ergodic_mi(virtual_antenna_scheme(n), &h, &snrs, &cfg)?;
            let quad = snrs
                .iter()
                .map(|&s| Ok(gap_general(s, p.m, n)?.gap_bits))
                .collect::<Result<Vec<f64>, CliError>>()?;
            Ok((est, quad))
        })
        .collect::<Result<_, CliError>>()?;

    let mut report = Report::with_header(FIGURE5_HEADER);
    let mut mismatches = 0;
    for (k, (&db, &snr)) in p.grid_db.iter().zip(&snrs).enumerate() {
        let opt = opt_mi(snr)?;
        for (&n, (est, quad)) in p.n_list.iter().zip(&per_n) {
            let gap = opt - est[k].mean_bits;
            let allowed = CROSS_CHECK_SIGMAS * est[k].stderr_bits + gap_error_budget::<f64>() + 1e-12 * opt;
            if (gap - quad[k]).abs() > allowed {
                mismatches += 1;
                report.notes.push(format!(
                    "snr {} dB, n = {n}: Monte-Carlo gap {} differs from quadrature {} by more than {CROSS_CHECK_SIGMAS} stderr",
                    fmt_float(db),
                    fmt_float(gap),
                    fmt_float(quad[k])
                ));
            }
            push_row(
                &mut report.csv,
                &[
                    fmt_float(db),
                    n.to_string(),
                    fmt_float(gap),
                    fmt_float(est[k].stderr_bits),
                ],
            );
        }
    }
    report.notes.push(format!(
        "cross-checked {} points against quadrature, {mismatches} outside {CROSS_CHECK_SIGMAS} stderr",
        p.grid_db.len() * p.n_list.len()
    ));
    Ok(report)
}

// ---------------------------------------------------------------- gap

#[derive(Debug, Clone, PartialEq)]
pub struct GapParams {
    pub grid_db: Vec<f64>,
    /// `None` is `M -> inf`.
    pub m: Option<usize>,
    pub n_virtual: usize,
}

impl GapParams {
    pub fn from_opts(opts: &Opts) -> Result<Self, CliError> {
        reject_unused("gap", opts, &["--m", "--n-virtual", "--snr-db", "--snr-db-range"])?;
        let m = match &opts.m {
            Some(s) => parse_m(s)?,
            None => return Err(CliError::Usage("gap needs --m (an integer or inf)".into())),
        };
        let n_virtual = opts.n_virtual.unwrap_or(2);
        if n_virtual == 0 || m.is_some_and(|m| n_virtual > m) {
            return Err(CliError::Usage(format!("--n-virtual {n_virtual} is out of range")));
        }
        let grid_db = match (&opts.snr_db, &opts.snr_db_range) {
            (None, None) => vec![f64::INFINITY],
            _ => db_grid(opts, true)?,
        };
        Ok(Self { grid_db, m, n_virtual })
    }
}

pub fn gap(p: &GapParams) -> Result<Report, CliError> {
    let mut report = Report::with_header(GAP_HEADER);
    let n = p.n_virtual;
    for &db in &p.grid_db {
        let value = match (p.m, db.is_infinite()) {
            (None, true) => gap_limit_virtual::<f64>(n)?,
            (None, false) => {
                return Err(CliError::Usage("--m inf is only available with --snr-db inf".into()));
            }
            (Some(m), true) if n == 2 => gap_asymptotic::<f64>(m)?,
            (Some(_), true) if ostbc_max_rate(n)?.value::<f64>() < 1.0 => {
                return Err(misobench_core::Error::DivergentGap(n).into());
            }
            (Some(_), true) => {
                return Err(CliError::Usage(
                    "infinite-SNR gaps for finite m are available for --n-virtual 2 only".into(),
                ));
            }
            (Some(m), false) => {
                let snr = SnrPointF64::from_db(db)?;
                if n == 2 {
                    gap_closed_form(snr, m)?
                } else {
                    gap_general(snr, m, n)?
                }
            }
        };
        push_row(
            &mut report.csv,
            &[
                fmt_float(db),
                p.m.map_or_else(|| "inf".into(), |m| m.to_string()),
                n.to_string(),
                fmt_float(value.gap_bits),
                fmt_float(value.gap_db),
                fmt_float(value.abs_error_bound),
            ],
        );
    }
    Ok(report)
}

// ---------------------------------------------------------------- mi

#[derive(Debug, Clone, PartialEq)]
pub struct MiParams {
    pub scheme: SchemeId,
    pub m: usize,
    pub grid_db: Vec<f64>,
    pub trials: u64,
    pub seed: u64,
}

fn parse_scheme(opts: &Opts, default: Option<SchemeId>) -> Result<SchemeId, CliError> {
    match (&opts.scheme, default) {
        (Some(s), _) => s.parse::<SchemeId>().map_err(|e| CliError::Usage(e.to_string())),
        (None, Some(d)) => Ok(d),
        (None, None) => Err(CliError::Usage("--scheme is required".into())),
    }
}

fn scheme_m(scheme: SchemeId, opts: &Opts) -> Result<usize, CliError> {
    let default = scheme.fixed_antennas().unwrap_or(4);
    let m = finite_m(opts, default, 1)?;
    if let Some(fixed) = scheme.fixed_antennas() {
        if m != fixed {
            return Err(CliError::Usage(format!(
                "{scheme} is defined for {fixed} antennas, got --m {m}"
            )));
        }
    }
    if let Some(n) = scheme.frame_columns() {
        if n == 0 || n > m {
            return Err(CliError::Usage(format!(
                "{scheme} needs at least {n} antennas, got --m {m}"
            )));
        }
    }
    Ok(m)
}

impl MiParams {
    pub fn from_opts(opts: &Opts) -> Result<Self, CliError> {
        reject_unused(
            "mi",
            opts,
            &["--scheme", "--m", "--snr-db", "--snr-db-range", "--trials", "--seed"],
        )?;
        let scheme = parse_scheme(opts, None)?;
        Ok(Self {
            scheme,
            m: scheme_m(scheme, opts)?,
            grid_db: db_grid(opts, false)?,
            trials: trials(opts, POINT_TRIALS)?,
            seed: opts.seed.unwrap_or(DEFAULT_SEED),
        })
    }
}

pub fn mi(p: &MiParams) -> Result<Report, CliError> {
    let snrs = snr_points(&p.grid_db)?;
    let h = equal_gain_channel(p.m)?;
    let est = sweep_ergodic_mi(p.scheme, &h, &snrs, &McConfigF64::new(p.trials, p.seed))?;
    let mut report = Report::with_header(MI_HEADER);
    report.notes.push(format!("channel: equal gains on {} antennas", p.m));
    for (&db, e) in p.grid_db.iter().zip(&est) {
        push_row(
            &mut report.csv,
            &[
                fmt_float(db),
                p.scheme.to_string(),
                p.m.to_string(),
                fmt_float(e.mean_bits),
                fmt_float(e.stderr_bits),
                e.trials.to_string(),
            ],
        );
    }
    Ok(report)
}

// ---------------------------------------------------------------- ndo

#[derive(Debug, Clone, PartialEq)]
pub struct NdoParams {
    pub scheme: SchemeId,
    pub m: usize,
    pub snr_db: f64,
    pub directions: usize,
    pub trials: u64,
    pub seed: u64,
}

impl NdoParams {
    pub fn from_opts(opts: &Opts) -> Result<Self, CliError> {
        reject_unused(
            "ndo",
            opts,
            &["--scheme", "--m", "--snr-db", "--directions", "--trials", "--seed"],
        )?;
        let scheme = parse_scheme(opts, Some(SchemeId::IrBfA))?;
        if !scheme.is_randomized() {
            return Err(CliError::Usage(format!(
                "{scheme} is not a randomized-beamforming scheme"
            )));
        }
        let snr_db = match &opts.snr_db {
            Some(s) => parse_db(s)?,
            None => 10.0,
        };
        if !snr_db.is_finite() {
            return Err(CliError::Usage("ndo needs a finite --snr-db".into()));
        }
        let directions = opts.directions.unwrap_or(8);
        if directions < 2 {
            return Err(CliError::Usage("--directions must be at least 2".into()));
        }
        Ok(Self {
            scheme,
            m: scheme_m(scheme, opts)?,
            snr_db,
            directions,
            trials: trials(opts, POINT_TRIALS)?,
            seed: opts.seed.unwrap_or(DEFAULT_SEED),
        })
    }
}

pub fn ndo(p: &NdoParams) -> Result<Report, CliError> {
    let snr = SnrPointF64::from_db(p.snr_db)?;
    let r = ndo_check(p.scheme, p.m, snr, p.directions, &McConfigF64::new(p.trials, p.seed))?;
    let mut report = Report::with_header(NDO_HEADER);
    for (d, e) in r.estimates.iter().enumerate() {
        push_row(
            &mut report.csv,
            &[
                d.to_string(),
                fmt_float(e.mean_bits),
                fmt_float(e.stderr_bits),
                e.trials.to_string(),
            ],
        );
    }
    let summary = format!(
        "{} at m = {}, {} dB: largest pairwise difference {} bits, combined stderr {}",
        p.scheme,
        p.m,
        fmt_float(p.snr_db),
        fmt_float(r.max_pairwise_gap_bits),
        fmt_float(r.stderr_bits)
    );
    if r.pass {
        report.notes.push(format!("NDO pass: {summary}"));
    } else {
        report.failure = Some(format!("NDO fail: {summary}"));
    }
    Ok(report)
}
