use num_traits::Float;

use crate::error::{domain, Error, Result};

const MAX_TERMS: usize = 10_000_000;
/// Arguments above this use the asymptotic expansion when it converges.
const ASYMPTOTIC_THRESHOLD: f64 = 30.0;

/// `ln 1F1(a; b; z)`, Kummer's confluent hypergeometric function.
///
/// For `a, b > 0` and `z >= 0` (every use inside the mixture model) the series
/// has only positive terms and is summed with a running log scale, so neither
/// overflow nor cancellation occurs. For `z > 30` the large-argument
/// expansion is used whenever it converges to machine precision and the
/// recessive `(-z)^-a` branch is negligible. Negative `z` goes through
/// Kummer's transformation `1F1(a; b; z) = e^z 1F1(b - a; b; -z)`.
///
/// `b` must not be zero or a negative integer. If the function value is not
/// positive (only possible for negative `a` or `b`) its logarithm is
/// undefined and [`Error::Evaluation`] is returned.
pub fn log_kummer_1f1(a: f64, b: f64, z: f64) -> Result<f64> {
    if !a.is_finite() {
        return Err(domain("1F1 parameter a", a));
    }
    if !b.is_finite() || (b <= 0.0 && b == b.round()) {
        return Err(domain("1F1 parameter b", b));
    }
    if z.is_nan() {
        return Err(domain("1F1 argument z", z));
    }
    if z == 0.0 || a == 0.0 {
        return Ok(0.0);
    }
    if z < 0.0 {
        return Ok(z + log_kummer_1f1(b - a, b, -z)?);
    }
    if z.is_infinite() {
        return Err(Error::Evaluation { a, b, z });
    }
    if z > ASYMPTOTIC_THRESHOLD {
        if let Some(v) = asymptotic(a, b, z) {
            return Ok(v);
        }
    }
    series(a, b, z)
}

/// Direct power series, rescaled whenever the partial sum grows large.
fn series(a: f64, b: f64, z: f64) -> Result<f64> {
    let err = || Error::Evaluation { a, b, z };
    let mut log_scale = 0.0;
    let mut sum = 1.0_f64;
    let mut term = 1.0_f64;
    // Largest partial-sum magnitude, to detect cancellation with signed terms.
    let mut peak = 1.0_f64;
    let mut j = 0.0;
    for _ in 0..MAX_TERMS {
        let ratio = (a + j) * z / ((b + j) * (j + 1.0));
        term *= ratio;
        sum += term;
        peak = peak.max(sum.abs()).max(term.abs());
        j += 1.0;
        if term == 0.0 || (term.abs() <= 1e-17 * sum.abs() && ratio.abs() < 1.0) {
            if sum <= 0.0 || sum.abs() < 1e-8 * peak {
                return Err(err());
            }
            return Ok(log_scale + sum.ln());
        }
        if sum.abs() > 1e250 {
            let s = sum.abs();
            log_scale += s.ln();
            sum /= s;
            term /= s;
            peak /= s;
        }
    }
    Err(err())
}

/// Large-z expansion `Gamma(b)/Gamma(a) e^z z^(a-b) sum_s (b-a)_s (1-a)_s / (s! z^s)`.
/// Returns `None` if it cannot deliver full precision at this argument.
fn asymptotic(a: f64, b: f64, z: f64) -> Option<f64> {
    if a <= 0.0 || b <= 0.0 {
        return None;
    }
    // Relative size of the neglected Gamma(b)/Gamma(b-a) (-z)^-a branch.
    let (lg_bma, _) = libm::lgamma_r(b - a);
    let bma_is_pole = b - a <= 0.0 && (b - a) == (b - a).round();
    if !bma_is_pole {
        let log_ratio = libm::lgamma(a) - lg_bma + (b - 2.0 * a) * z.ln() - z;
        if log_ratio > -38.0 {
            return None;
        }
    }
    let mut sum = 1.0_f64;
    let mut term = 1.0_f64;
    let mut prev = f64::INFINITY;
    for s in 0..200 {
        let sf = s as f64;
        term *= (b - a + sf) * (1.0 - a + sf) / ((sf + 1.0) * z);
        if term == 0.0 {
            break;
        }
        if term.abs() >= prev {
            return None;
        }
        sum += term;
        prev = term.abs();
        if prev <= 1e-17 * sum.abs() {
            break;
        }
        if s == 199 {
            return None;
        }
    }
    if sum <= 0.0 {
        return None;
    }
    Some(libm::lgamma(b) - libm::lgamma(a) + z + (a - b) * z.ln() + sum.ln())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rel_err_of_exp(got: f64, want: f64) -> f64 {
        // |exp(got) / exp(want) - 1|
        (got - want).exp_m1().abs()
    }

    // ln 1F1 reference values from mpmath (40 digits).
    const REFERENCE: [(f64, f64, f64, f64); 9] = [
        (2.5, 1.5, 4.0, 5.299_282_984_130_260_852_7),
        (50.5, 0.5, 40.0, 111.818_948_573_659_494_69),
        (0.7, 1.3, 200.0, 196.452_871_842_363_256_41),
        (1000.0, 1.5, 5000.0, 7768.204_216_110_932_812_9),
        (10000.0, 1.5, 10000.0, 25_793.202_173_834_684_933),
        (3.5, 0.5, 29.9, 39.698_844_527_568_432_231),
        (3.5, 0.5, 30.1, 39.917_391_422_035_168_51),
        (2.0, 1.5, 1000.0, 1003.333_595_276_897_474_4),
        (10000.0, 0.5, 1.0, 199.805_179_925_611_978_06),
    ];

    #[test]
    fn trivial_cases() {
        assert_eq!(log_kummer_1f1(3.0, 0.5, 0.0).unwrap(), 0.0);
        assert!((log_kummer_1f1(1.0, 1.0, 2.5).unwrap() - 2.5).abs() < 1e-14);
    }

    #[test]
    fn matches_reference_values() {
        for (a, b, z, want) in REFERENCE {
            let got = log_kummer_1f1(a, b, z).unwrap();
            let rel = rel_err_of_exp(got, want);
            assert!(rel < 1e-9, "1F1({a};{b};{z}): got {got}, want {want}, rel {rel:e}");
        }
    }

    #[test]
    fn partial_summation_oracle() {
        // Direct summation of the defining series in plain f64.
        let (a, b, z) = (2.5, 1.5, 4.0);
        let mut sum = 0.0;
        let mut term = 1.0;
        for j in 0..200 {
            sum += term;
            let jf = j as f64;
            term *= (a + jf) / (b + jf) * z / (jf + 1.0);
        }
        let got = log_kummer_1f1(a, b, z).unwrap().exp();
        assert!((got / sum - 1.0).abs() < 1e-13);
    }

    #[test]
    fn kummer_transformation_for_negative_argument() {
        // 1F1(1; 2; z) = (e^z - 1) / z
        let z = -3.0_f64;
        let want = ((z.exp() - 1.0) / z).ln();
        assert!((log_kummer_1f1(1.0, 2.0, z).unwrap() - want).abs() < 1e-13);
    }

    #[test]
    fn rejects_bad_b() {
        assert!(matches!(log_kummer_1f1(1.0, 0.0, 1.0), Err(Error::Domain { .. })));
        assert!(matches!(log_kummer_1f1(1.0, -2.0, 1.0), Err(Error::Domain { .. })));
        assert!(log_kummer_1f1(1.0, -2.5, 0.1).is_ok());
    }

    #[test]
    fn non_positive_value_is_an_evaluation_error() {
        // 1F1(-1; 1; z) = 1 - z, negative for z > 1.
        assert!(matches!(log_kummer_1f1(-1.0, 1.0, 3.0), Err(Error::Evaluation { .. })));
        assert!((log_kummer_1f1(-1.0, 1.0, 0.5).unwrap() - 0.5_f64.ln()).abs() < 1e-14);
    }

    proptest! {
        #[test]
        fn monotone_in_z(a in 0.1f64..60.0, b in 0.1f64..5.0, z in 0.0f64..200.0, dz in 0.01f64..5.0) {
            let lo = log_kummer_1f1(a, b, z).unwrap();
            let hi = log_kummer_1f1(a, b, z + dz).unwrap();
            prop_assert!(hi > lo);
        }

        #[test]
        fn regimes_agree_across_threshold(a in 0.5f64..40.0, b in 0.5f64..3.0, z in 30.5f64..120.0) {
            // Both the series and (when it engages) the expansion must agree.
            let s = series(a, b, z).unwrap();
            let v = log_kummer_1f1(a, b, z).unwrap();
            prop_assert!(rel_err_of_exp(v, s) < 1e-10);
        }
    }
}
