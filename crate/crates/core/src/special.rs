//! Log-gamma and digamma.

use crate::scalar::Real;

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// `ln Γ(x)` for `x > 0` (Lanczos, g = 7).
pub fn ln_gamma<T: Real>(x: T) -> T {
    assert!(x > T::zero(), "ln_gamma needs a positive argument");
    if x < T::lit(0.5) {
        // Reflection keeps the series in its accurate range.
        let pi = T::PI();
        return (pi / (pi * x).sin()).ln() - ln_gamma(T::one() - x);
    }
    let x = x - T::one();
    let mut acc = T::lit(LANCZOS_COEF[0]);
    for (i, &c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        acc += T::lit(c) / (x + T::from_count(i));
    }
    let t = x + T::lit(LANCZOS_G + 0.5);
    T::lit(0.5) * (T::TAU()).ln() + (x + T::lit(0.5)) * t.ln() - t + acc.ln()
}

/// Digamma `ψ(x)` for `x > 0`: upward recurrence, then the asymptotic series.
pub fn digamma<T: Real>(x: T) -> T {
    assert!(x > T::zero(), "digamma needs a positive argument");
    let mut x = x;
    let mut shift = T::zero();
    while x < T::lit(12.0) {
        shift -= x.recip();
        x += T::one();
    }
    let inv2 = (x * x).recip();
    // Bernoulli terms B_2k / (2k x^2k).
    let series = inv2
        * (T::lit(1.0 / 12.0)
            - inv2
                * (T::lit(1.0 / 120.0)
                    - inv2 * (T::lit(1.0 / 252.0) - inv2 * (T::lit(1.0 / 240.0) - inv2 * T::lit(1.0 / 132.0)))));
    shift + x.ln() - T::lit(0.5) / x - series
}

/// `ln(Γ(m) / (Γ(n) Γ(m - n)))` for integers `1 <= n < m`.
///
/// Uses the exact falling product `Γ(m)/Γ(m-n) = (m-1)(m-2)...(m-n)` in log
/// form, so it stays finite and accurate for `m` in the millions.
pub fn ln_beta_normalizer<T: Real>(m: usize, n: usize) -> T {
    assert!(1 <= n && n < m);
    let mut acc = T::zero();
    for k in 1..=n {
        acc += T::from_count(m - k).ln();
    }
    acc - ln_gamma(T::from_count(n))
}

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
