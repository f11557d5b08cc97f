//! Invariant suite behind `misobench selftest`.
//!
//! Tolerances are chosen so that pass/fail does not depend on the seed at
//! the configured trial counts: exact identities use fixed absolute bounds,
//! the Monte-Carlo comparison allows four standard errors and the KS test
//! runs at the 0.1% level.

use misobench_core::analysis::gap_monte_carlo;
use misobench_core::montecarlo::{draw_for, random_channel};
use misobench_core::schemes::trombi_frame_as_bfa;
use misobench_core::stats::{ks_critical_one_sample, ks_one_sample};
use misobench_core::{
    abba_evcm, gap_closed_form, integrate_finite, ir_instant_mi, mmse_unbiased_snr, projection_radius_pdf,
    sample_haar_frame, sample_projection_radius_sq, verify_monotonicity, RngStream, SchemeDrawF64, SchemeId,
    SnrPointF64,
};

use crate::args::Opts;
use crate::commands::{equal_gain_channel, Report, DEFAULT_SEED, POINT_TRIALS};
use crate::error::CliError;
use crate::format::{fmt_float, push_row};

pub const SELFTEST_HEADER: &str = "check,result,detail";

#[derive(Debug, Clone, PartialEq)]
pub struct SelftestParams {
    pub seed: u64,
    pub trials: u64,
    /// Evaluate the projection-radius pdf without its leading factor 2.
    pub drop_pdf_factor: bool,
}

impl SelftestParams {
    pub fn from_opts(opts: &Opts) -> Result<Self, CliError> {
        let extra: Vec<&str> = opts
            .present()
            .into_iter()
            .filter(|f| !matches!(*f, "--out" | "--seed" | "--trials" | "--debug-drop-pdf-factor"))
            .collect();
        if !extra.is_empty() {
            return Err(CliError::Usage(format!("selftest does not take {}", extra.join(", "))));
        }
        let trials = opts.trials.unwrap_or(POINT_TRIALS);
        if trials < 10_000 {
            return Err(CliError::Usage("selftest needs --trials of at least 10000".into()));
        }
        Ok(Self {
            seed: opts.seed.unwrap_or(DEFAULT_SEED),
            trials,
            drop_pdf_factor: opts.debug_drop_pdf_factor,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

fn outcome(name: &'static str, pass: bool, detail: String) -> CheckOutcome {
    CheckOutcome { name, pass, detail }
}

const HAAR_SHAPES: [(usize, usize); 7] = [(2, 1), (2, 2), (4, 2), (4, 4), (8, 2), (8, 8), (16, 4)];
const IDENTITY_TOL: f64 = 1e-12;
const INTEGRAL_TOL: f64 = 1e-10;

fn haar_orthonormality(p: &SelftestParams) -> Result<CheckOutcome, CliError> {
    let mut worst = 0.0f64;
    for (s, &(m, n)) in HAAR_SHAPES.iter().enumerate() {
        for i in 0..200u64 {
            let f = sample_haar_frame::<f64>(m, n, RngStream::new(p.seed, (s as u64) << 32 | i))?;
            worst = worst.max(f.orthonormality_error());
        }
    }
    Ok(outcome(
        "haar_orthonormality",
        worst <= IDENTITY_TOL,
        format!("max |B^H B - I| = {} over 1400 frames", fmt_float(worst)),
    ))
}

fn pdf(p: &SelftestParams, u: f64, m: usize, n: usize) -> f64 {
    let f = projection_radius_pdf(u, m, n).expect("u in [0, 1] and n < m");
    if p.drop_pdf_factor {
        f / 2.0
    } else {
        f
    }
}

fn pdf_cases() -> impl Iterator<Item = (usize, usize)> {
    (3..=16usize).flat_map(|m| [1usize, 2, 4].into_iter().filter(move |&n| n < m).map(move |n| (m, n)))
}

fn pdf_normalization(p: &SelftestParams) -> Result<CheckOutcome, CliError> {
    let mut worst = 0.0f64;
    for (m, n) in pdf_cases() {
        let r = integrate_finite(|u| pdf(p, u, m, n), 0.0, 1.0, 1e-12)?;
        worst = worst.max((r.value - 1.0).abs());
    }
    Ok(outcome(
        "pdf_normalization",
        worst <= INTEGRAL_TOL,
        format!(
            "max |integral - 1| = {} for m in 3..16 and n in {{1 2 4}}",
            fmt_float(worst)
        ),
    ))
}

fn mean_radius_sq(p: &SelftestParams) -> Result<CheckOutcome, CliError> {
    let mut worst = 0.0f64;
    for (m, n) in pdf_cases() {
        let r = integrate_finite(|u| u * u * pdf(p, u, m, n), 0.0, 1.0, 1e-12)?;
        worst = worst.max((r.value - n as f64 / m as f64).abs());
    }
    Ok(outcome(
        "mean_radius_sq",
        worst <= INTEGRAL_TOL,
        format!("max |E[r^2] - n/M| = {}", fmt_float(worst)),
    ))
}

fn mmse_uniformity(p: &SelftestParams) -> Result<CheckOutcome, CliError> {
    let snr = SnrPointF64::from_db(10.0)?;
    let mut bad = 0;
    for i in 0..1000u64 {
        let h = random_channel::<f64>(4, RngStream::new(p.seed, i))?;
        let g = h.coefficients().try_into().expect("4 coefficients");
        // Non-uniform per-symbol SNRs surface as an error.
        if mmse_unbiased_snr(&abba_evcm(g), snr).is_err() {
            bad += 1;
        }
    }
    Ok(outcome(
        "mmse_uniformity",
        bad == 0,
        format!("{bad} of 1000 ABBA channels with unequal per-symbol MMSE SNR"),
    ))
}

fn trombi_equals_bfa(p: &SelftestParams) -> Result<CheckOutcome, CliError> {
    let mut worst = 0.0f64;
    for m in [4usize, 8] {
        let h = random_channel::<f64>(m, RngStream::new(p.seed ^ 0xA5A5, m as u64))?;
        for (i, db) in (0..500u64).zip([0.0, 10.0, 20.0].into_iter().cycle()) {
            let snr = SnrPointF64::from_db(db)?;
            let mut rng = RngStream::new(p.seed, i).rng();
            let draw: SchemeDrawF64 = draw_for(SchemeId::IrTrombi, m, &mut rng)?;
            let frame = draw.frame.as_ref().expect("IR_TROMBI draws a frame");
            let (t1, t2) = draw.phases.expect("IR_TROMBI draws phases");
            let collapsed = SchemeDrawF64::with_frame(trombi_frame_as_bfa(frame, t1, t2)?);
            let a = ir_instant_mi(SchemeId::IrTrombi, &h, snr, &draw)?;
            let b = ir_instant_mi(SchemeId::IrBfA, &h, snr, &collapsed)?;
            worst = worst.max((a - b).abs());
        }
    }
    Ok(outcome(
        "trombi_equals_bfa",
        worst <= IDENTITY_TOL,
        format!("max per-draw difference {} bits over 1000 draws", fmt_float(worst)),
    ))
}

fn gap_monotonicity(_: &SelftestParams) -> Result<CheckOutcome, CliError> {
    let grid: Vec<f64> = (-20..=40).map(f64::from).collect();
    let mut failing = Vec::new();
    let mut worst = f64::NEG_INFINITY;
    for m in [3usize, 4, 8, 16] {
        let r = verify_monotonicity(m, &grid)?;
        worst = worst.max(r.worst_decrease);
        if !r.pass {
            failing.push(m.to_string());
        }
    }
    Ok(outcome(
        "gap_monotonicity",
        failing.is_empty(),
        format!(
            "largest step decrease {} bits over -20..40 dB for m in {{3 4 8 16}}; failing m: [{}]",
            fmt_float(worst),
            failing.join(" ")
        ),
    ))
}

const MC_SIGMAS: f64 = 4.0;

fn mc_vs_quadrature(p: &SelftestParams) -> Result<CheckOutcome, CliError> {
    let cfg = misobench_core::McConfigF64::new(p.trials, p.seed);
    let mut worst_z = 0.0f64;
    for (m, snr) in [(4usize, 10.0), (8, 1.0)] {
        let snr = SnrPointF64::linear(snr)?;
        let h = equal_gain_channel(m)?;
        let mc = gap_monte_carlo(snr, &h, 2, &cfg)?;
        let q = gap_closed_form(snr, m)?;
        let z = ((mc.gap_bits - q.gap_bits).abs() - q.abs_error_bound).max(0.0) / mc.stderr_bits;
        worst_z = worst_z.max(z);
    }
    Ok(outcome(
        "mc_vs_quadrature",
        worst_z <= MC_SIGMAS,
        format!(
            "largest deviation {} stderr at {} trials (m=4 snr=10; m=8 snr=1)",
            fmt_float(worst_z),
            p.trials
        ),
    ))
}

const KS_ALPHA: f64 = 1e-3;
const KS_SAMPLES: u64 = 10_000;

fn ks_projection_radius(p: &SelftestParams) -> Result<CheckOutcome, CliError> {
    let m = 6usize;
    let samples: Vec<f64> = (0..KS_SAMPLES)
        .map(|i| sample_projection_radius_sq::<f64>(m, 2, RngStream::new(p.seed ^ 0x4B53, i)))
        .collect::<Result<_, _>>()?;
    // Beta(2, M-2) CDF
    let k = (m - 1) as f64;
    let cdf = |v: f64| 1.0 - (1.0 - v).powf(k) - k * v * (1.0 - v).powf(k - 1.0);
    let d = ks_one_sample(&samples, cdf);
    let crit = ks_critical_one_sample(KS_ALPHA, samples.len());
    Ok(outcome(
        "ks_projection_radius",
        d <= crit,
        format!(
            "D = {} vs critical {} (alpha {KS_ALPHA}; M=6 n=2)",
            fmt_float(d),
            fmt_float(crit)
        ),
    ))
}

type Check = fn(&SelftestParams) -> Result<CheckOutcome, CliError>;

const CHECKS: [Check; 8] = [
    haar_orthonormality,
    pdf_normalization,
    mean_radius_sq,
    mmse_uniformity,
    trombi_equals_bfa,
    gap_monotonicity,
    mc_vs_quadrature,
    ks_projection_radius,
];

pub fn run_checks(p: &SelftestParams) -> Result<Vec<CheckOutcome>, CliError> {
    CHECKS.iter().map(|c| c(p)).collect()
}

pub fn selftest(p: &SelftestParams) -> Result<Report, CliError> {
    let outcomes = run_checks(p)?;
    let mut report = Report {
        csv: format!("{SELFTEST_HEADER}\n"),
        ..Report::default()
    };
    for o in &outcomes {
        let result = if o.pass { "pass" } else { "FAIL" };
        push_row(
            &mut report.csv,
            &[o.name.to_string(), result.to_string(), o.detail.replace(',', ";")],
        );
    }
    let failed: Vec<&str> = outcomes.iter().filter(|o| !o.pass).map(|o| o.name).collect();
    if !failed.is_empty() {
        report.failure = Some(format!("selftest failed: {}", failed.join(", ")));
    }
    Ok(report)
}
