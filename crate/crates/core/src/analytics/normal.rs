//! Normal distribution functions and the Bachelier option formula.

use serde::{Deserialize, Serialize};

use crate::error::{PricingError, Result};

pub const INV_SQRT_2PI: f64 = 0.3989422804014327;
const SQRT_2: f64 = std::f64::consts::SQRT_2;

/// Standard normal density.
#[inline]
pub fn norm_pdf(x: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Standard normal cdf via the complementary error function.
#[inline]
pub fn norm_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / SQRT_2)
}

/// Inverse standard normal cdf: Acklam's rational approximation refined with
/// one Halley step against the erfc-based cdf.
pub fn norm_inv_cdf(p: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0, "norm_inv_cdf needs p in (0,1), got {p}");
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383577518672690e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LOW: f64 = 0.02425;

    let x = if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    // Halley refinement.
    let e = norm_cdf(x) - p;
    let u = e * (2.0 * std::f64::consts::PI).sqrt() * (0.5 * x * x).exp();
    x - u / (1.0 + 0.5 * x * u)
}

/// A (possibly degenerate) one-dimensional normal law. `stdev == 0` is the
/// point mass at `mean`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalLaw {
    pub mean: f64,
    pub stdev: f64,
}

impl NormalLaw {
    pub fn new(mean: f64, stdev: f64) -> Result<Self> {
        if stdev < 0.0 || !stdev.is_finite() || !mean.is_finite() {
            return Err(PricingError::Domain(format!(
                "normal law needs finite mean and stdev >= 0, got ({mean}, {stdev})"
            )));
        }
        Ok(Self { mean, stdev })
    }

    pub fn point_mass(mean: f64) -> Self {
        Self { mean, stdev: 0.0 }
    }
}

/// Undiscounted Bachelier option price
/// `omega (F - K) Phi(omega (F - K) / sigma) + sigma phi((F - K) / sigma)`.
///
/// `sigma` is the absolute volatility including the square-root-of-time
/// factor. `sigma == 0` returns the intrinsic value exactly.
pub fn bachelier(forward: f64, strike: f64, sigma: f64, omega: f64) -> Result<f64> {
    if sigma < 0.0 {
        return Err(PricingError::Domain(format!("bachelier sigma must be >= 0, got {sigma}")));
    }
    debug_assert!(omega == 1.0 || omega == -1.0, "omega must be +/-1");
    let m = omega * (forward - strike);
    if sigma == 0.0 {
        return Ok(m.max(0.0));
    }
    let d = m / sigma;
    Ok(m * norm_cdf(d) + sigma * norm_pdf(d))
}

/// Solves `bachelier(0, strike - z, sigma, omega) = target` for `z`.
///
/// The price is strictly monotone in `z` (increasing for a payer), so the
/// root is unique. Returns `None` when `target` is at or below the lower
/// price bound (0 for sigma > 0 requires target > 0).
pub fn bachelier_invert_center(strike: f64, sigma: f64, omega: f64, target: f64) -> Option<f64> {
    if sigma <= 0.0 || target <= 0.0 {
        return None;
    }
    // z enters through the moneyness m = omega (z - strike); price = sigma * g(m / sigma)
    // with g(d) = d Phi(d) + phi(d), strictly increasing, g(-inf) = 0.
    let target_d = target / sigma;
    let g = |d: f64| d * norm_cdf(d) + norm_pdf(d);
    // Bracket in d.
    let mut lo = -40.0;
    let mut hi = 40.0;
    if g(lo) >= target_d || g(hi) <= target_d {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) < target_d {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 * (1.0 + hi.abs()) {
            break;
        }
    }
    let d = 0.5 * (lo + hi);
    Some(strike + omega * d * sigma)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn cdf_benchmarks() {
        // Reference values from high-precision tables.
        assert_relative_eq!(norm_cdf(0.0), 0.5, epsilon = 1e-16);
        assert_relative_eq!(norm_cdf(1.0), 0.8413447460685429, epsilon = 1e-15);
        assert_relative_eq!(norm_cdf(-2.5), 0.006209665325776132, epsilon = 1e-15);
        assert_relative_eq!(norm_cdf(6.0), 0.9999999990134124, epsilon = 1e-15);
    }

    #[test]
    fn inverse_cdf_round_trip() {
        for &p in &[1e-12, 1e-6, 0.01, 0.3, 0.5, 0.7, 0.99, 1.0 - 1e-10] {
            let x = norm_inv_cdf(p);
            assert_relative_eq!(norm_cdf(x), p, max_relative = 1e-12);
        }
    }

    #[test]
    fn bachelier_zero_vol_intrinsic() {
        assert_eq!(bachelier(0.02, 0.01, 0.0, 1.0).unwrap(), 0.01);
        assert_eq!(bachelier(0.02, 0.01, 0.0, -1.0).unwrap(), 0.0);
    }

    #[test]
    fn bachelier_atm_symmetric_value() {
        for &sigma in &[0.001, 0.01, 0.2] {
            assert_relative_eq!(
                bachelier(0.0, 0.0, sigma, 1.0).unwrap(),
                sigma * 0.3989422804,
                max_relative = 1e-9
            );
            assert_relative_eq!(
                bachelier(0.0, 0.0, sigma, -1.0).unwrap(),
                bachelier(0.0, 0.0, sigma, 1.0).unwrap(),
                epsilon = 1e-16
            );
        }
    }

    #[test]
    fn bachelier_negative_vol_rejected() {
        assert!(bachelier(0.0, 0.0, -0.1, 1.0).is_err());
    }

    #[test]
    fn invert_center_round_trip() {
        let (k, sigma, omega) = (0.012, 0.006, 1.0);
        for &z in &[-0.01, 0.0, 0.011, 0.03] {
            let price = bachelier(0.0, k - z, sigma, omega).unwrap();
            let back = bachelier_invert_center(k, sigma, omega, price).unwrap();
            assert_relative_eq!(back, z, epsilon = 1e-10);
        }
    }

    proptest! {
        #[test]
        fn parity_holds(f in -0.05f64..0.05, k in -0.05f64..0.05, sigma in 0.0f64..0.05) {
            let call = bachelier(f, k, sigma, 1.0).unwrap();
            let put = bachelier(f, k, sigma, -1.0).unwrap();
            prop_assert!((call - put - (f - k)).abs() < 1e-14);
        }

        #[test]
        fn non_decreasing_in_sigma(f in -0.05f64..0.05, k in -0.05f64..0.05,
                                   s1 in 0.0f64..0.05, ds in 0.0f64..0.05) {
            let lo = bachelier(f, k, s1, 1.0).unwrap();
            let hi = bachelier(f, k, s1 + ds, 1.0).unwrap();
            prop_assert!(hi >= lo - 1e-14);
        }

        #[test]
        fn above_intrinsic(f in -0.05f64..0.05, k in -0.05f64..0.05, sigma in 0.0f64..0.05) {
            let v = bachelier(f, k, sigma, 1.0).unwrap();
            prop_assert!(v >= (f - k).max(0.0) - 1e-16);
        }

        #[test]
        fn convex_in_strike(f in -0.02f64..0.02, k in -0.03f64..0.03, sigma in 1e-4f64..0.05) {
            let h = 1e-3;
            let a = bachelier(f, k - h, sigma, 1.0).unwrap();
            let b = bachelier(f, k, sigma, 1.0).unwrap();
            let c = bachelier(f, k + h, sigma, 1.0).unwrap();
            prop_assert!(a + c - 2.0 * b >= -1e-12);
        }
    }
}
