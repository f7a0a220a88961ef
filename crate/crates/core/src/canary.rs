//! Canary (two-exercise Bermudan) swaption pricing.
//!
//! At T1 the holder either exercises into the swap [T1, Te] or keeps the
//! right to exercise at T2 into [T2, Te]. Conditional on time-T1 information
//! the later rate X2 = R(T2, T2, Te) stays Gaussian around its projection
//! Z = E[X2 | F_T1], so the continuation value is a Bachelier price in Z with
//! the forward vol sqrt(sigma_X2^2 - sigma_Z^2). The canary price is then a
//! two-dimensional integral over the correlated pair (X1, Z), or a Clark
//! moment-matching approximation of max(swap values, 0).

use crate::analytics::clark::clark_running_max;
use crate::analytics::normal::{bachelier, bachelier_invert_center, NormalLaw};
use crate::analytics::quadrature::gaussian_expectation;
use crate::error::{PricingError, Result};
use crate::market::{annuity, par_rate, Annuity, DiscountCurve, SwapSpec};
use crate::trades::{CanarySwaption, PricingResult};
use crate::volsurface::{apply_convexity_shift, midcurve_vol_approx, CorrelationConfig, VolSurface};

/// Correlation between the first exercise rate X1 = R(T1, T1, Te) and the
/// projected later rate Z = (A1e X1 - A12 X12) / A2e:
/// `rho = (A1e sigma_1e - A12 rho_2e sigma_12) / (A2e sigma_Z)`.
///
/// All vols are absolute (to T1). Values a hair outside [-1, 1] from
/// round-off are clamped; larger violations are rejected.
pub fn rho_x1_z(
    a1e: Annuity,
    a12: Annuity,
    a2e: Annuity,
    sigma_1e: f64,
    sigma_12: f64,
    rho_2e: f64,
    sigma_z: f64,
) -> Result<f64> {
    if sigma_z <= 0.0 || sigma_1e <= 0.0 {
        return Err(PricingError::Domain("rho_x1_z needs positive sigma_1e and sigma_z".into()));
    }
    let rho = (a1e.value() * sigma_1e - a12.value() * rho_2e * sigma_12) / (a2e.value() * sigma_z);
    if rho.abs() > 1.0 + 1e-8 {
        return Err(PricingError::Model(format!("rho_x1_z = {rho} outside [-1, 1]")));
    }
    Ok(rho.clamp(-1.0, 1.0))
}

/// Market inputs resolved for one canary trade. All vols absolute.
#[derive(Debug, Clone)]
pub struct CanarySetup {
    pub a1e: Annuity,
    pub a2e: Annuity,
    pub a12: Annuity,
    /// Law of X1 = R(T1, T1, Te) (convexity-shifted mean).
    pub x1: NormalLaw,
    /// Law of Z = E[X2 | F_T1] (convexity-shifted mean).
    pub z: NormalLaw,
    /// Absolute vol of X2 = R(T2, T2, Te) observed at T2.
    pub sigma_x2: f64,
    pub rho_x1_z: f64,
    pub sigma_12: f64,
    pub rho_2e: f64,
}

impl CanarySetup {
    /// Forward vol of X2 between T1 and T2.
    pub fn forward_vol(&self) -> f64 {
        (self.sigma_x2 * self.sigma_x2 - self.z.stdev * self.z.stdev).max(0.0).sqrt()
    }

    /// Implied correlation of the pair (X1, X2).
    pub fn rho_x1_x2(&self) -> f64 {
        if self.sigma_x2 > 0.0 {
            self.rho_x1_z * self.z.stdev / self.sigma_x2
        } else {
            0.0
        }
    }
}

/// Resolves curve, surface and correlation inputs for a canary trade.
///
/// `sigma_Z` comes from the decomposition of R(T1, T2, Te) into the long
/// [T1, Te] and short [T1, T2] rates with the configured long/short
/// correlation at T1; a `forward_fix` entry for (T1, T2, Te) overrides it as
/// `sigma_Z = rho_fix * sigma_X2`.
pub fn build_canary_setup(
    trade: &CanarySwaption,
    curve: &DiscountCurve,
    surface: &VolSurface,
    corr: &CorrelationConfig,
) -> Result<CanarySetup> {
    trade.validate()?;
    let (t1, t2, te) = (trade.t1, trade.t2, trade.end);
    let s1e = SwapSpec::annual(t1, te)?;
    let s2e = SwapSpec::annual(t2, te)?;
    let s12 = SwapSpec::annual(t1, t2)?;
    let a1e = annuity(curve, &s1e)?;
    let a2e = annuity(curve, &s2e)?;
    let a12 = annuity(curve, &s12)?;
    let r1e = par_rate(curve, &s1e)?;
    let r2e = par_rate(curve, &s2e)?;
    let r12 = par_rate(curve, &s12)?;
    let sigma_1e = surface.lookup_vol(t1, t1, te, trade.strike, r1e)? * t1.sqrt();
    let sigma_12 = surface.lookup_vol(t1, t1, t2, r12 + (trade.strike - r2e), r12)? * t1.sqrt();
    let sigma_x2 = surface.lookup_vol(t2, t2, te, trade.strike, r2e)? * t2.sqrt();
    let rho_2e = corr.long_short(t1, t2)?;
    let sigma_z = match corr.forward_fix(t1, t2, te) {
        Some(rho_fix) => {
            if !(0.0..=1.0).contains(&rho_fix) {
                return Err(PricingError::Domain(format!(
                    "forward_fix correlation must be in [0, 1], got {rho_fix}"
                )));
            }
            rho_fix * sigma_x2
        }
        None => midcurve_vol_approx(a1e, a12, a2e, sigma_1e, sigma_12, rho_2e)?,
    };
    if sigma_z > sigma_x2 * (1.0 + 1e-10) {
        return Err(PricingError::Model(format!(
            "projected vol sigma_Z {sigma_z} exceeds sigma_X2 {sigma_x2}: negative forward variance"
        )));
    }
    let sigma_z = sigma_z.min(sigma_x2);
    let rho = rho_x1_z(a1e, a12, a2e, sigma_1e, sigma_12, rho_2e, sigma_z)?;
    let mu1 = apply_convexity_shift(r1e, sigma_1e, corr.convexity_shift(t1));
    let mu_z = apply_convexity_shift(r2e, sigma_x2, corr.convexity_shift(t2));
    Ok(CanarySetup {
        a1e,
        a2e,
        a12,
        x1: NormalLaw::new(mu1, sigma_1e)?,
        z: NormalLaw::new(mu_z, sigma_z)?,
        sigma_x2,
        rho_x1_z: rho,
        sigma_12,
        rho_2e,
    })
}

fn put_setup_diagnostics(result: &mut PricingResult, setup: &CanarySetup) {
    result.diagnostics.put("sigma_1e", setup.x1.stdev);
    result.diagnostics.put("sigma_x2", setup.sigma_x2);
    result.diagnostics.put("sigma_z", setup.z.stdev);
    result.diagnostics.put("sigma_12", setup.sigma_12);
    result.diagnostics.put("rho_2e", setup.rho_2e);
    result.diagnostics.put("rho_x1_z", setup.rho_x1_z);
    result.diagnostics.put("rho_x1_x2", setup.rho_x1_x2());
    result.diagnostics.put("forward_vol", setup.forward_vol());
}

/// Canary value by direct two-dimensional Gaussian integration:
/// `E[ max( A1e omega (X1 - K), A2e Omega(Z, K, fwd_vol, omega) ) ]`.
///
/// The outer grid over X1 is snapped to the strike; the inner conditional
/// grid over Z is snapped to the exercise/continuation crossing.
pub fn price_canary_integral(
    trade: &CanarySwaption,
    curve: &DiscountCurve,
    surface: &VolSurface,
    corr: &CorrelationConfig,
    nodes: usize,
) -> Result<PricingResult> {
    let setup = build_canary_setup(trade, curve, surface, corr)?;
    let pv = canary_integral(&setup, trade.strike, trade.omega, nodes)?;
    let mut result = PricingResult::from_normalized(pv / setup.a1e.value(), setup.a1e.value());
    put_setup_diagnostics(&mut result, &setup);
    result.diagnostics.put("nodes", nodes);
    Ok(result)
}

/// The raw expectation behind [`price_canary_integral`], in PV units.
pub fn canary_integral(setup: &CanarySetup, strike: f64, omega: f64, nodes: usize) -> Result<f64> {
    let fwd_vol = setup.forward_vol();
    let (a1, a2) = (setup.a1e.value(), setup.a2e.value());
    let cond_sd = setup.z.stdev * (1.0 - setup.rho_x1_z * setup.rho_x1_z).max(0.0).sqrt();
    let slope = if setup.x1.stdev > 0.0 {
        setup.rho_x1_z * setup.z.stdev / setup.x1.stdev
    } else {
        0.0
    };
    gaussian_expectation(
        |x| {
            let exercise = a1 * omega * (x - strike);
            let cond_mean = setup.z.mean + slope * (x - setup.x1.mean);
            // Kink of max(exercise, continuation) in z: the crossing when the
            // exercise leg is positive, otherwise the continuation's own kink
            // at the strike (only present when the forward vol vanishes).
            let kink = if exercise > 0.0 {
                bachelier_invert_center(strike, fwd_vol, omega, exercise / a2)
            } else if fwd_vol == 0.0 {
                Some(strike)
            } else {
                None
            };
            gaussian_expectation(
                |z| {
                    let cont = a2 * bachelier(z, strike, fwd_vol, omega).unwrap_or(f64::NAN);
                    exercise.max(cont)
                },
                cond_mean,
                cond_sd,
                nodes,
                kink,
            )
            .unwrap_or(f64::NAN)
        },
        setup.x1.mean,
        setup.x1.stdev,
        nodes,
        Some(strike),
    )
}

/// Correlation of the pair (X1, X2) under the perfect-correlation-of-forward
/// -rates assumption (the projected rate Z carries the full variance of X2):
/// the law-of-cosines form with `sigma_Z` replaced by `sigma_X2`.
pub fn perfect_corr_rho(
    a1e: Annuity,
    a12: Annuity,
    a2e: Annuity,
    sigma_1e: f64,
    sigma_12: f64,
    sigma_x2: f64,
) -> Result<f64> {
    if sigma_1e <= 0.0 || sigma_x2 <= 0.0 {
        return Err(PricingError::Domain("perfect_corr_rho needs positive vols".into()));
    }
    let u = a1e.value() * sigma_1e;
    let v = a12.value() * sigma_12;
    let w = a2e.value() * sigma_x2;
    let rho = (u * u + w * w - v * v) / (2.0 * u * w);
    if rho.abs() > 1.0 + 1e-8 {
        return Err(PricingError::Model(format!("perfect-correlation rho {rho} outside [-1, 1]")));
    }
    Ok(rho.clamp(-1.0, 1.0))
}

/// Canary value by Clark moment matching of
/// `max(A1e omega (X1 - K), A2e omega (X2 - K), 0)` with the zero floor as a
/// point-mass member. The members carry the full marginal vols; consistency
/// requires the perfect-correlation form of the pair correlation.
pub fn price_canary_mm(
    trade: &CanarySwaption,
    curve: &DiscountCurve,
    surface: &VolSurface,
    corr: &CorrelationConfig,
) -> Result<PricingResult> {
    let setup = build_canary_setup(trade, curve, surface, corr)?;
    let rho12 = perfect_corr_rho(
        setup.a1e,
        setup.a12,
        setup.a2e,
        setup.x1.stdev,
        setup.sigma_12,
        setup.sigma_x2,
    )?;
    let laws = [
        NormalLaw::new(setup.a1e.value() * trade.omega * (setup.x1.mean - trade.strike), setup.a1e.value() * setup.x1.stdev)?,
        NormalLaw::new(setup.a2e.value() * trade.omega * (setup.z.mean - trade.strike), setup.a2e.value() * setup.sigma_x2)?,
        NormalLaw::point_mass(0.0),
    ];
    let corr_m = vec![
        vec![1.0, rho12, 0.0],
        vec![rho12, 1.0, 0.0],
        vec![0.0, 0.0, 1.0],
    ];
    let max_law = clark_running_max(&laws, &corr_m, None)?;
    // The true price dominates each single-exercise European; the
    // re-Gaussianized maximum can dip below that bound out of the money, so
    // clip to the best member value.
    let mut floor = 0.0f64;
    for law in &laws[..2] {
        floor = floor.max(bachelier(law.mean, 0.0, law.stdev, 1.0)?);
    }
    let pv = max_law.mean.max(floor);
    let mut result = PricingResult::from_normalized(pv / setup.a1e.value(), setup.a1e.value());
    put_setup_diagnostics(&mut result, &setup);
    result.diagnostics.put("rho_mm", rho12);
    Ok(result)
}
