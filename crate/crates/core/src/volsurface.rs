//! Normal volatility storage, the midcurve implied-volatility approximation
//! and convexity-shift bookkeeping.
//!
//! Smiles are keyed by the (expiry, start, end) triple of the underlying
//! swap and stored as ordered (strike offset from ATM, normal vol) pairs.
//! Vols are per annum; the pricers convert to absolute vols (times sqrt of
//! expiry) at their boundaries.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{PricingError, Result};
use crate::market::Annuity;

/// Quantized time key so f64 triples can index a map. Resolution 1e-6 years.
fn tkey(t: f64) -> i64 {
    (t * 1e6).round() as i64
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Smile {
    /// (strike offset from ATM, normal vol per annum), offsets strictly increasing.
    points: Vec<(f64, f64)>,
}

impl Smile {
    fn vol(&self, offset: f64) -> f64 {
        let pts = &self.points;
        if offset <= pts[0].0 {
            return pts[0].1; // flat wing
        }
        if offset >= pts[pts.len() - 1].0 {
            return pts[pts.len() - 1].1;
        }
        let i = pts.partition_point(|p| p.0 <= offset) - 1;
        let (x0, v0) = pts[i];
        let (x1, v1) = pts[i + 1];
        v0 + (offset - x0) / (x1 - x0) * (v1 - v0)
    }
}

/// Normal volatility surface keyed by (expiry, start, end) in years.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct VolSurface {
    entries: BTreeMap<(i64, i64, i64), Smile>,
}

impl VolSurface {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registers a smile. Offsets must be strictly increasing, vols positive.
    pub fn insert(&mut self, expiry: f64, start: f64, end: f64, points: Vec<(f64, f64)>) -> Result<()> {
        if points.is_empty() {
            return Err(PricingError::Invalid(format!(
                "smile for ({expiry}, {start}, {end}) needs at least one point"
            )));
        }
        if points.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(PricingError::Invalid(format!(
                "smile offsets for ({expiry}, {start}, {end}) must be strictly increasing"
            )));
        }
        if points.iter().any(|p| p.1 <= 0.0) {
            return Err(PricingError::Invalid(format!(
                "smile vols for ({expiry}, {start}, {end}) must be positive"
            )));
        }
        self.entries.insert((tkey(expiry), tkey(start), tkey(end)), Smile { points });
        Ok(())
    }

    pub fn contains(&self, expiry: f64, start: f64, end: f64) -> bool {
        self.entries.contains_key(&(tkey(expiry), tkey(start), tkey(end)))
    }

    /// Per-annum normal vol at `strike`, interpolated linearly in the offset
    /// `strike - atm` with flat extrapolation beyond the smile wings.
    pub fn lookup_vol(&self, expiry: f64, start: f64, end: f64, strike: f64, atm: f64) -> Result<f64> {
        let smile = self
            .entries
            .get(&(tkey(expiry), tkey(start), tkey(end)))
            .ok_or(PricingError::MissingVol { expiry, start, end })?;
        Ok(smile.vol(strike - atm))
    }
}

/// Correlations and convexity shifts feeding the pricers.
///
/// `long_short` entries are keyed by (observation time, split time): the
/// correlation between the long rate R(T_obs, T_obs, T_end) and the short
/// rate R(T_obs, T_obs, T_split) fixed at T_obs. `forward_fix` overrides the
/// fixing correlation of Theorem-2 style pairs, keyed by (T_fix, T_s, T_e).
/// `convexity_shifts` are keyed by the start time of the shifted rate and
/// default to 0 (deterministic annuity ratios).
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct CorrelationConfig {
    long_short: BTreeMap<(i64, i64), f64>,
    forward_fix: BTreeMap<(i64, i64, i64), f64>,
    convexity_shifts: BTreeMap<i64, f64>,
}

impl CorrelationConfig {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set_long_short(&mut self, obs: f64, split: f64, rho: f64) -> Result<()> {
        if !(-1.0..=1.0).contains(&rho) {
            return Err(PricingError::Domain(format!("correlation must be in [-1, 1], got {rho}")));
        }
        self.long_short.insert((tkey(obs), tkey(split)), rho);
        Ok(())
    }

    pub fn long_short(&self, obs: f64, split: f64) -> Result<f64> {
        self.long_short
            .get(&(tkey(obs), tkey(split)))
            .copied()
            .ok_or_else(|| PricingError::MissingCorrelation(format!("long/short pair ({obs}, {split})")))
    }

    pub fn set_forward_fix(&mut self, t_fix: f64, t_s: f64, t_e: f64, rho: f64) -> Result<()> {
        if !(-1.0..=1.0).contains(&rho) {
            return Err(PricingError::Domain(format!("correlation must be in [-1, 1], got {rho}")));
        }
        self.forward_fix.insert((tkey(t_fix), tkey(t_s), tkey(t_e)), rho);
        Ok(())
    }

    pub fn forward_fix(&self, t_fix: f64, t_s: f64, t_e: f64) -> Option<f64> {
        self.forward_fix.get(&(tkey(t_fix), tkey(t_s), tkey(t_e))).copied()
    }

    pub fn set_convexity_shift(&mut self, rate_start: f64, delta: f64) {
        self.convexity_shifts.insert(tkey(rate_start), delta);
    }

    /// Shift parameter for the rate starting at `rate_start`; 0 when unset.
    pub fn convexity_shift(&self, rate_start: f64) -> f64 {
        self.convexity_shifts.get(&tkey(rate_start)).copied().unwrap_or(0.0)
    }
}

/// Midcurve implied volatility-by-strike approximation:
/// `sigma_se^2 = (Ae/A)^2 se^2 - 2 (Ae/A)(As/A) rho se ss + (As/A)^2 ss^2`.
///
/// `sigma_e`, `sigma_s` are the long and short swap rate vols at the mapped
/// strikes (same expiry, so per-annum and absolute conventions agree).
pub fn midcurve_vol_approx(
    a_long: Annuity,
    a_short: Annuity,
    a_fwd: Annuity,
    sigma_e: f64,
    sigma_s: f64,
    rho_se: f64,
) -> Result<f64> {
    if a_long.value() <= 0.0 || a_short.value() < 0.0 || a_fwd.value() <= 0.0 {
        return Err(PricingError::Domain("annuities must be positive".into()));
    }
    if !(-1.0..=1.0).contains(&rho_se) {
        return Err(PricingError::Domain(format!("correlation must be in [-1, 1], got {rho_se}")));
    }
    let we = a_long.value() / a_fwd.value();
    let ws = a_short.value() / a_fwd.value();
    let t_long = we * we * sigma_e * sigma_e;
    let t_cross = 2.0 * we * ws * rho_se * sigma_e * sigma_s;
    let t_short = ws * ws * sigma_s * sigma_s;
    let var = t_long - t_cross + t_short;
    if var < 0.0 {
        return Err(PricingError::Model(format!(
            "negative midcurve variance: long {t_long:.6e} - cross {t_cross:.6e} + short {t_short:.6e} = {var:.6e}"
        )));
    }
    Ok(var.sqrt())
}

/// Convexity-adjusted forward: `mean + sigma^2 delta` with `sigma` the
/// absolute vol of the rate.
pub fn apply_convexity_shift(mean: f64, sigma: f64, delta: f64) -> f64 {
    mean + sigma * sigma * delta
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn smile_surface() -> VolSurface {
        let mut s = VolSurface::new();
        s.insert(2.0, 2.0, 5.0, vec![(-0.01, 0.009), (0.0, 0.010), (0.01, 0.012)]).unwrap();
        s.insert(1.0, 1.0, 2.0, vec![(0.0, 0.008)]).unwrap();
        s
    }

    #[test]
    fn single_point_smile_is_flat() {
        let s = smile_surface();
        for &k in &[-0.5, 0.0, 0.03] {
            assert_eq!(s.lookup_vol(1.0, 1.0, 2.0, k, 0.02).unwrap(), 0.008);
        }
    }

    #[test]
    fn exact_node_and_midpoint() {
        let s = smile_surface();
        let atm = 0.025;
        assert_relative_eq!(s.lookup_vol(2.0, 2.0, 5.0, atm, atm).unwrap(), 0.010, epsilon = 1e-15);
        assert_relative_eq!(s.lookup_vol(2.0, 2.0, 5.0, atm + 0.005, atm).unwrap(), 0.011, epsilon = 1e-15);
    }

    #[test]
    fn flat_wings() {
        let s = smile_surface();
        assert_eq!(s.lookup_vol(2.0, 2.0, 5.0, 0.2, 0.0).unwrap(), 0.012);
        assert_eq!(s.lookup_vol(2.0, 2.0, 5.0, -0.2, 0.0).unwrap(), 0.009);
    }

    #[test]
    fn missing_key_names_triple() {
        let s = smile_surface();
        let err = s.lookup_vol(3.0, 3.0, 7.0, 0.0, 0.0).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains('3') && msg.contains('7'), "{msg}");
    }

    #[test]
    fn midcurve_vol_degenerate_short_collapses() {
        let v = midcurve_vol_approx(Annuity(4.0), Annuity(0.0), Annuity(4.0), 0.01, 0.009, 0.89).unwrap();
        assert_relative_eq!(v, 0.01, epsilon = 1e-15);
    }

    #[test]
    fn midcurve_vol_perfect_correlation_difference() {
        // With rho = 1 the form is a perfect square: |we se - ws ss|.
        let (ae, as_, a) = (Annuity(4.0), Annuity(2.0), Annuity(2.0));
        let (se, ss) = (0.01, 0.009);
        let v = midcurve_vol_approx(ae, as_, a, se, ss, 1.0).unwrap();
        let expect = (ae.value() / a.value() * se - as_.value() / a.value() * ss).abs();
        assert_relative_eq!(v, expect, max_relative = 1e-12);
    }

    #[test]
    fn midcurve_vol_generic_quadratic_form() {
        // Independently: we=2, ws=1, var = 4*1e-4 - 2*2*0.89*1e-2*9e-3 + 8.1e-5
        let v = midcurve_vol_approx(Annuity(4.0), Annuity(2.0), Annuity(2.0), 0.01, 0.009, 0.89).unwrap();
        let var: f64 = 4.0 * 1e-4 - 4.0 * 0.89 * 0.01 * 0.009 + 8.1e-5;
        assert_relative_eq!(v, var.sqrt(), max_relative = 1e-12);
    }

    #[test]
    fn midcurve_vol_negative_variance_reported() {
        // Force inconsistency: huge cross term.
        let err = midcurve_vol_approx(Annuity(1.0), Annuity(1.0), Annuity(1.0), 0.01, 0.0100001, 1.0);
        assert!(err.is_ok()); // perfect square, still non-negative
        let err = midcurve_vol_approx(Annuity(1.0), Annuity(2.0), Annuity(1.0), 0.01, 0.01, 1.0).unwrap();
        assert_relative_eq!(err, 0.01, max_relative = 1e-9);
    }

    #[test]
    fn convexity_shift_formula() {
        assert_eq!(apply_convexity_shift(0.02, 0.01, 0.0), 0.02);
        assert_relative_eq!(apply_convexity_shift(0.02, 0.01, 5.0), 0.0205, epsilon = 1e-15);
        // linear in delta
        let base = apply_convexity_shift(0.02, 0.013, 2.0) - 0.02;
        assert_relative_eq!(apply_convexity_shift(0.02, 0.013, 4.0) - 0.02, 2.0 * base, epsilon = 1e-15);
    }

    #[test]
    fn shifted_density_is_exponential_tilt() {
        // The shifted Gaussian density equals exp(delta (x - mu')) times the
        // original up to normalization: check the identity pointwise on a grid.
        let (mu, sigma, delta) = (0.02, 0.01, 5.0);
        let mu_shift = apply_convexity_shift(mu, sigma, delta);
        let pdf = |x: f64, m: f64| (-(x - m) * (x - m) / (2.0 * sigma * sigma)).exp();
        // tilt factor exp(delta (x - mu) - delta^2 sigma^2 / 2)
        let log_c = -0.5 * delta * delta * sigma * sigma;
        for i in 0..=40 {
            let x = mu - 4.0 * sigma + i as f64 * 0.2 * sigma;
            let lhs = pdf(x, mu_shift);
            let rhs = (delta * (x - mu) + log_c).exp() * pdf(x, mu);
            assert_relative_eq!(lhs, rhs, max_relative = 1e-10);
        }
    }

    #[test]
    fn correlation_config_lookup_and_defaults() {
        let mut c = CorrelationConfig::new();
        c.set_long_short(1.0, 2.0, 0.89).unwrap();
        c.set_convexity_shift(1.0, 3.0);
        assert_eq!(c.long_short(1.0, 2.0).unwrap(), 0.89);
        assert!(c.long_short(1.0, 3.0).is_err());
        assert_eq!(c.convexity_shift(1.0), 3.0);
        assert_eq!(c.convexity_shift(2.0), 0.0);
        assert!(c.set_long_short(1.0, 2.0, 1.2).is_err());
    }
}
