//! Modified Bessel functions of the first kind, orders 0 and 1.

use crate::error::{Error, Result};

/// Unscaled evaluation overflows past this magnitude.
pub const MAX_ARG: f64 = 700.0;
/// Power series below this magnitude, asymptotic expansion above.
const SERIES_LIMIT: f64 = 30.0;

/// `I_order(x)` for `order ∈ {0, 1}` and `|x| ≤ 700`.
pub fn bessel_i(order: u32, x: f64) -> Result<f64> {
    if order > 1 {
        return Err(Error::Parse(format!("Bessel order {order} not supported (0 or 1)")));
    }
    if !x.is_finite() || x.abs() > MAX_ARG {
        return Err(Error::RangeError(x));
    }
    let ax = x.abs();
    let v = if ax <= SERIES_LIMIT {
        series(order, ax)
    } else {
        ax.exp() * asymptotic_scaled(order, ax)
    };
    Ok(if order == 1 && x < 0.0 { -v } else { v })
}

/// `e^{-|x|} I_order(x)`, finite for every finite `x`.
pub fn bessel_i_scaled(order: u32, x: f64) -> f64 {
    assert!(order <= 1, "Bessel order {order} not supported");
    let ax = x.abs();
    let v = if ax <= SERIES_LIMIT {
        series(order, ax) * (-ax).exp()
    } else {
        asymptotic_scaled(order, ax)
    };
    if order == 1 && x < 0.0 {
        -v
    } else {
        v
    }
}

/// `I_1(x) / I_0(x)`, computed without overflow.
pub fn bessel_ratio_10(x: f64) -> f64 {
    let ax = x.abs();
    let r = if ax <= SERIES_LIMIT {
        series(1, ax) / series(0, ax)
    } else {
        asymptotic_scaled(1, ax) / asymptotic_scaled(0, ax)
    };
    if x < 0.0 {
        -r
    } else {
        r
    }
}

/// `log I_0(x)`.
pub fn log_bessel_i0(x: f64) -> f64 {
    let ax = x.abs();
    ax + bessel_i_scaled(0, ax).ln()
}

/// `Σ_m (x/2)^{2m+j} / (m! (m+j)!)` for `x ≥ 0`.
fn series(order: u32, x: f64) -> f64 {
    let j = order as f64;
    let q = 0.25 * x * x;
    let mut term = if order == 0 { 1.0 } else { 0.5 * x };
    let mut sum = term;
    let mut m = 0.0;
    while term > 1e-17 * sum {
        m += 1.0;
        term *= q / (m * (m + j));
        sum += term;
        if m > 500.0 {
            break;
        }
    }
    sum
}

/// `e^{-x} I_j(x) ≈ (2πx)^{-1/2} Σ_k (-1)^k a_k(j) / x^k`,
/// `a_k(j) = Π_{i=1..k} (4j² − (2i−1)²) / (k! 8^k)`.
fn asymptotic_scaled(order: u32, x: f64) -> f64 {
    let mu = 4.0 * (order * order) as f64;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 0.0;
    loop {
        k += 1.0;
        let odd = 2.0 * k - 1.0;
        let next = -term * (mu - odd * odd) / (k * 8.0 * x);
        // stop at the smallest term of the divergent series
        if next.abs() >= term.abs() || next == 0.0 {
            break;
        }
        term = next;
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum / (2.0 * std::f64::consts::PI * x).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent oracle: direct power series with 1200 terms evaluated
    /// from factorials in log space.
    fn oracle(order: u32, x: f64) -> f64 {
        let mut ln_fact = vec![0.0f64; 1202];
        for k in 1..ln_fact.len() {
            ln_fact[k] = ln_fact[k - 1] + (k as f64).ln();
        }
        let j = order as usize;
        let half = x.abs() / 2.0;
        let mut sum = 0.0;
        for m in 0..1200 {
            let ln_term = (2 * m + j) as f64 * half.ln() - ln_fact[m] - ln_fact[m + j];
            sum += ln_term.exp();
        }
        if order == 1 && x < 0.0 {
            -sum
        } else {
            sum
        }
    }

    #[test]
    fn values_at_zero() {
        assert_eq!(bessel_i(0, 0.0).unwrap(), 1.0);
        assert_eq!(bessel_i(1, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn known_values() {
        assert!((bessel_i(0, 1.0).unwrap() - 1.266_065_878).abs() < 1e-9);
        let i0_1 = oracle(0, 1.0);
        assert!((bessel_i(0, 1.0).unwrap() - i0_1).abs() <= 1e-12 * i0_1);
        // I0(4) = 11.301921952136330, I1(4) = 9.759465153704450
        assert!((bessel_i(0, 4.0).unwrap() - 11.301_921_952_136_33).abs() < 1e-11);
        assert!((bessel_i(1, 4.0).unwrap() - 9.759_465_153_704_45).abs() < 1e-11);
    }

    /// Second oracle: `e^{-x} I_n(x) = (1/π)∫₀^π e^{x(cos t − 1)} cos(nt) dt`
    /// by the trapezoid rule, spectrally accurate for this periodic integrand.
    fn integral_oracle_scaled(order: u32, x: f64) -> f64 {
        let n = 8192;
        let h = std::f64::consts::PI / n as f64;
        let f = |t: f64| (x * (t.cos() - 1.0)).exp() * (order as f64 * t).cos();
        let inner: f64 = (1..n).map(|k| f(k as f64 * h)).sum();
        (inner + 0.5 * (f(0.0) + f(std::f64::consts::PI))) * h / std::f64::consts::PI
    }

    #[test]
    fn relative_accuracy_against_power_series() {
        let mut x = 0.01;
        while x < 50.0 {
            for order in 0..=1 {
                let want = oracle(order, x);
                let got = bessel_i(order, x).unwrap();
                let rel = ((got - want) / want).abs();
                assert!(rel <= 1e-12, "I{order}({x}): {got} vs {want}, rel {rel:.2e}");
            }
            x *= 1.21;
        }
    }

    #[test]
    fn relative_accuracy_against_integral() {
        let mut x = 0.05;
        while x < 690.0 {
            for order in 0..=1 {
                let want = integral_oracle_scaled(order, x);
                let got = bessel_i_scaled(order, x);
                let rel = ((got - want) / want).abs();
                assert!(rel <= 1e-12, "I{order}({x}): {got} vs {want}, rel {rel:.2e}");
                let unscaled = bessel_i(order, x).unwrap();
                assert!(((unscaled * (-x).exp() - want) / want).abs() <= 1e-12);
            }
            x *= 1.29;
        }
    }

    #[test]
    fn branches_agree_at_the_switch() {
        for order in 0..=1 {
            for &x in &[25.0, SERIES_LIMIT, 35.0] {
                let s = series(order, x) * (-x).exp();
                let a = asymptotic_scaled(order, x);
                assert!(((s - a) / a).abs() < 1e-13, "I{order}({x}): {s} vs {a}");
            }
        }
    }

    #[test]
    fn parity() {
        for &x in &[0.3, 2.0, 17.5, 45.0, 250.0] {
            assert_eq!(bessel_i(0, -x).unwrap(), bessel_i(0, x).unwrap());
            assert_eq!(bessel_i(1, -x).unwrap(), -bessel_i(1, x).unwrap());
            assert_eq!(bessel_ratio_10(-x), -bessel_ratio_10(x));
        }
    }

    #[test]
    fn range_and_order_errors() {
        assert!(matches!(bessel_i(0, 701.0), Err(Error::RangeError(_))));
        assert!(matches!(bessel_i(0, f64::NAN), Err(Error::RangeError(_))));
        assert!(bessel_i(2, 1.0).is_err());
        // scaled form has no range limit
        assert!(bessel_i_scaled(0, 1e5).is_finite());
        assert!((log_bessel_i0(800.0) - (800.0 + bessel_i_scaled(0, 800.0).ln())).abs() < 1e-12);
    }

    #[test]
    fn ratio_matches_quotient() {
        for &x in &[0.5, 5.0, 29.0, 31.0, 80.0] {
            let q = bessel_i(1, x).unwrap() / bessel_i(0, x).unwrap();
            assert!((bessel_ratio_10(x) - q).abs() < 1e-14);
        }
    }
}
