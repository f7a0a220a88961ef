//! Pricing of swaptions with relative strikes and the fixing-time
//! correlation used throughout the Canary and Bermudan pricers.
//!
//! The strike of the contract is a spread over the ATM level fixed at an
//! earlier time T_fix; between the fixing and the exercise only the forward
//! variance `sigma_x^2 - sigma_z^2` matters.

use crate::analytics::bachelier;
use crate::error::{PricingError, Result};
use crate::market::Annuity;
use crate::trades::{PricingResult, RelativeStrikeSwaption};

/// Absolute vols of the underlying rate at the two observation times:
/// `sigma_x` for R(T_s, T_s, T_e) to T_s, `sigma_z` for R(T_fix, T_s, T_e)
/// to T_fix. Both include the square-root-of-time factor.
#[derive(Debug, Clone, Copy)]
pub struct FixingVols {
    pub sigma_x: f64,
    pub sigma_z: f64,
}

impl FixingVols {
    pub fn new(sigma_x: f64, sigma_z: f64) -> Result<Self> {
        if sigma_z < 0.0 || sigma_x < 0.0 {
            return Err(PricingError::Domain("fixing vols must be >= 0".into()));
        }
        if sigma_z > sigma_x * (1.0 + 1e-12) {
            return Err(PricingError::Model(format!(
                "forward variance negative: sigma_z {sigma_z} > sigma_x {sigma_x}"
            )));
        }
        Ok(Self { sigma_x, sigma_z: sigma_z.min(sigma_x) })
    }

    /// Forward vol between fixing and exercise.
    pub fn forward_vol(&self) -> f64 {
        (self.sigma_x * self.sigma_x - self.sigma_z * self.sigma_z).max(0.0).sqrt()
    }
}

/// Correlation between the rate fixed at T_fix and fixed at T_s:
/// `rho = sigma_z / sigma_x` (tower rule).
pub fn fixing_correlation(vols: &FixingVols) -> Result<f64> {
    if vols.sigma_x == 0.0 {
        return Err(PricingError::Domain("fixing correlation undefined for sigma_x = 0".into()));
    }
    Ok(vols.sigma_z / vols.sigma_x)
}

/// Fair value of a relative-strike swaption:
/// `A * Omega(0, K, m * sqrt(sigma_x^2 - sigma_z^2), omega)` with `m` the
/// multiplicative vol spread. The degenerate case `sigma_x = sigma_z` is
/// exactly `A (omega K)^+`.
pub fn price_relative_strike(
    trade: &RelativeStrikeSwaption,
    annuity: Annuity,
    vols: &FixingVols,
) -> Result<PricingResult> {
    trade.validate()?;
    let fwd_vol = vols.forward_vol();
    let normalized = if fwd_vol == 0.0 {
        (trade.omega * trade.spread).max(0.0)
    } else {
        bachelier(0.0, trade.spread, trade.vol_spread_mult * fwd_vol, trade.omega)?
    };
    let mut result = PricingResult::from_normalized(normalized, annuity.value());
    result.diagnostics.put("sigma_x", vols.sigma_x);
    result.diagnostics.put("sigma_z", vols.sigma_z);
    result.diagnostics.put("forward_vol", trade.vol_spread_mult * fwd_vol);
    result.diagnostics.put("fixing_correlation", if vols.sigma_x > 0.0 { vols.sigma_z / vols.sigma_x } else { 1.0 });
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn trade(spread: f64, omega: f64) -> RelativeStrikeSwaption {
        RelativeStrikeSwaption {
            fix_time: 0.5,
            start: 2.0,
            end: 4.0,
            spread,
            omega,
            vol_spread_mult: 1.0,
        }
    }

    #[test]
    fn fixing_correlation_limits() {
        assert_relative_eq!(
            fixing_correlation(&FixingVols::new(0.02, 0.02).unwrap()).unwrap(),
            1.0,
            epsilon = 1e-15
        );
        // equal per-annum vols, T_fix = 0.25, T_s = 1
        let v = FixingVols::new(0.01 * 1.0f64.sqrt(), 0.01 * 0.25f64.sqrt()).unwrap();
        assert_relative_eq!(fixing_correlation(&v).unwrap(), 0.5, epsilon = 1e-15);
        // per-annum 0.008 at T_fix = 0.5 and 0.010 at T_s = 2
        let v = FixingVols::new(0.010 * 2.0f64.sqrt(), 0.008 * 0.5f64.sqrt()).unwrap();
        assert_relative_eq!(fixing_correlation(&v).unwrap(), 0.4, epsilon = 1e-14);
    }

    #[test]
    fn fixing_correlation_errors() {
        assert!(fixing_correlation(&FixingVols { sigma_x: 0.0, sigma_z: 0.0 }).is_err());
        assert!(FixingVols::new(0.01, 0.02).is_err());
    }

    #[test]
    fn deterministic_case_is_intrinsic_spread() {
        let vols = FixingVols::new(0.015, 0.015).unwrap();
        let r = price_relative_strike(&trade(0.005, 1.0), Annuity(1.9414), &vols).unwrap();
        assert_relative_eq!(r.pv, 1.9414 * 0.005, epsilon = 1e-15);
        let r = price_relative_strike(&trade(0.005, -1.0), Annuity(1.9414), &vols).unwrap();
        assert_eq!(r.pv, 0.0);
    }

    #[test]
    fn zero_fixing_vol_is_standard_european() {
        let vols = FixingVols::new(0.02, 0.0).unwrap();
        let r = price_relative_strike(&trade(0.005, 1.0), Annuity(1.0), &vols).unwrap();
        assert_relative_eq!(r.pv, bachelier(0.0, 0.005, 0.02, 1.0).unwrap(), epsilon = 1e-15);
    }

    #[test]
    fn generic_forward_vol_case() {
        // sqrt(0.02^2 - 0.012^2) = 0.016
        let vols = FixingVols::new(0.02, 0.012).unwrap();
        let r = price_relative_strike(&trade(0.005, 1.0), Annuity(1.0), &vols).unwrap();
        assert_relative_eq!(r.pv, bachelier(0.0, 0.005, 0.016, 1.0).unwrap(), epsilon = 1e-15);
        // frozen value computed with 30-digit arithmetic
        assert_relative_eq!(r.pv, 0.004192238291528830, epsilon = 1e-15);
    }

    #[test]
    fn monotonicity_in_the_two_vols() {
        let base = price_relative_strike(&trade(0.005, 1.0), Annuity(1.0), &FixingVols::new(0.02, 0.012).unwrap())
            .unwrap()
            .pv;
        let up_x = price_relative_strike(&trade(0.005, 1.0), Annuity(1.0), &FixingVols::new(0.022, 0.012).unwrap())
            .unwrap()
            .pv;
        let up_z = price_relative_strike(&trade(0.005, 1.0), Annuity(1.0), &FixingVols::new(0.02, 0.014).unwrap())
            .unwrap()
            .pv;
        assert!(up_x > base);
        assert!(up_z < base);
    }

    #[test]
    fn vol_spread_mult_scales_forward_vol() {
        let mut t = trade(0.005, 1.0);
        t.vol_spread_mult = 1.25;
        let vols = FixingVols::new(0.02, 0.012).unwrap();
        let r = price_relative_strike(&t, Annuity(1.0), &vols).unwrap();
        assert_relative_eq!(r.pv, bachelier(0.0, 0.005, 1.25 * 0.016, 1.0).unwrap(), epsilon = 1e-15);
    }
}
