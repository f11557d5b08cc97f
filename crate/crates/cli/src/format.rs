//! CSV number formatting and dB grid parsing.

use crate::error::CliError;

/// Significant digits of every float written to CSV.
pub const SIG_DIGITS: usize = 10;

/// Formats `x` with [`SIG_DIGITS`] significant digits, like C's `%.10g`:
/// fixed notation for decimal exponents in `[-4, 10)`, scientific
/// otherwise, trailing zeros dropped. Infinities print as `inf` / `-inf`.
pub fn fmt_float(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    // Rounding to the target precision first fixes the exponent.
    let sci = format!("{:.*e}", SIG_DIGITS - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..SIG_DIGITS as i32).contains(&exp) {
        let decimals = (SIG_DIGITS as i32 - 1 - exp).max(0) as usize;
        trim_zeros(format!("{:.*}", decimals, x))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{}{:02}", trim_zeros(mantissa.to_string()), sign, exp.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

/// Parses a dB value; `inf` (any case, optional sign) is accepted.
pub fn parse_db(s: &str) -> Result<f64, CliError> {
    let t = s.trim();
    let v = match t.to_ascii_lowercase().as_str() {
        "inf" | "+inf" => f64::INFINITY,
        "-inf" => f64::NEG_INFINITY,
        _ => t
            .parse::<f64>()
            .map_err(|_| CliError::Usage(format!("not a dB value: '{s}'")))?,
    };
    if v.is_nan() {
        return Err(CliError::Usage(format!("not a dB value: '{s}'")));
    }
    Ok(v)
}

/// Expands `A:B:STEP` into `A, A+STEP, ..., <= B`. Points are computed as
/// `A + k*STEP` so the grid does not drift, and `B` is kept when it is hit
/// up to rounding.
pub fn parse_db_range(s: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = s.split(':').collect();
    let [a, b, step] = parts[..] else {
        return Err(CliError::Usage(format!("expected A:B:STEP, got '{s}'")));
    };
    let num = |p: &str| -> Result<f64, CliError> {
        p.trim()
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| CliError::Usage(format!("bad number '{p}' in range '{s}'")))
    };
    let (a, b, step) = (num(a)?, num(b)?, num(step)?);
    if step <= 0.0 {
        return Err(CliError::Usage(format!("range step must be positive, got {step}")));
    }
    if a > b {
        return Err(CliError::Usage(format!("range start {a} exceeds end {b}")));
    }
    let count = ((b - a) / step + 1e-9).floor() as usize + 1;
    if count > 100_000 {
        return Err(CliError::Usage(format!("range '{s}' has {count} points")));
    }
    Ok((0..count).map(|k| a + k as f64 * step).collect())
}

pub const DEFAULT_DB_GRID: &str = "-10:40:2";

/// Appends one CSV line.
pub fn push_row(out: &mut String, fields: &[String]) {
    out.push_str(&fields.join(","));
    out.push('\n');
}
