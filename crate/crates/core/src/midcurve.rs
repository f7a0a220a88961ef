//! Midcurve swaption pricing by two-dimensional Gaussian integration over
//! the long and short swap rates.
//!
//! The forward-starting swap rate decomposes into a weighted difference of
//! the long and the short rates fixed at expiry; the option is priced as a
//! basket option on that pair. With deterministic annuity ratios the
//! integration weight is identically 1; stochastic ratios enter only through
//! convexity shifts of the marginal means.

use crate::analytics::normal::{bachelier, NormalLaw};
use crate::analytics::quadrature::gaussian_expectation;
use crate::error::{PricingError, Result};
use crate::market::{annuity, par_rate, Annuity, DiscountCurve, SwapSpec};
use crate::trades::{MidcurveSwaption, PricingResult};
use crate::volsurface::{apply_convexity_shift, midcurve_vol_approx, CorrelationConfig, VolSurface};

/// Annuity-ratio weights of the basket decomposition:
/// `a = A(t,T_ex,T_e) / A(t,T_s,T_e)`, `b = A(t,T_ex,T_s) / A(t,T_s,T_e)`.
#[derive(Debug, Clone, Copy)]
pub struct BasketWeights {
    pub a: f64,
    pub b: f64,
}

impl BasketWeights {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if a <= 0.0 || b < 0.0 {
            return Err(PricingError::Domain(format!("need a > 0 and b >= 0, got a={a} b={b}")));
        }
        Ok(Self { a, b })
    }
}

/// Gaussian-copula price of the basket payoff
/// `(omega (a x - b y - K))^+` against correlated normal marginals for the
/// long rate `x` and short rate `y` (absolute vols), per unit of the forward
/// swap annuity.
///
/// The inner (long-rate) integral is taken conditionally on the short rate
/// with its grid snapped to the payoff kink, so the quadrature converges at
/// full Simpson order.
pub fn basket_option_gaussian(
    weights: BasketWeights,
    strike: f64,
    omega: f64,
    long: &NormalLaw,
    short: &NormalLaw,
    rho: f64,
    nodes: usize,
) -> Result<f64> {
    if !(-1.0..=1.0).contains(&rho) {
        return Err(PricingError::Domain(format!("correlation must be in [-1, 1], got {rho}")));
    }
    let payoff = |x: f64, y: f64| (omega * (weights.a * x - weights.b * y - strike)).max(0.0);
    if short.stdev == 0.0 && long.stdev == 0.0 {
        return Ok(payoff(long.mean, short.mean));
    }
    let cond_sd = long.stdev * (1.0 - rho * rho).max(0.0).sqrt();
    let slope = if short.stdev > 0.0 { rho * long.stdev / short.stdev } else { 0.0 };
    gaussian_expectation(
        |y| {
            let cond_mean = long.mean + slope * (y - short.mean);
            let kink = (strike + weights.b * y) / weights.a;
            gaussian_expectation(|x| payoff(x, y), cond_mean, cond_sd, nodes, Some(kink))
                .unwrap_or(f64::NAN)
        },
        short.mean,
        short.stdev,
        nodes,
        None,
    )
}

/// Inputs resolved from market data for one midcurve trade.
#[derive(Debug, Clone)]
pub struct MidcurveSetup {
    pub weights: BasketWeights,
    pub fwd_annuity: Annuity,
    /// Long/short marginals with absolute vols and convexity-shifted means.
    pub long: NormalLaw,
    pub short: NormalLaw,
    pub rho_se: f64,
    /// Per-annum vols at the mapped strikes.
    pub sigma_e: f64,
    pub sigma_s: f64,
    /// Annuities of the long and short legs.
    pub a_long: Annuity,
    pub a_short: Annuity,
    pub forward: f64,
}

/// Resolves curve, surface and correlation inputs for a midcurve trade.
///
/// Strike mapping for the smile lookups:
/// `K_e = R(t,T_ex,T_e) + (K - R(t,T_s,T_e))`, `K_s = R(t,T_ex,T_s) + (K - R(t,T_s,T_e))`.
pub fn build_midcurve_setup(
    trade: &MidcurveSwaption,
    curve: &DiscountCurve,
    surface: &VolSurface,
    corr: &CorrelationConfig,
) -> Result<MidcurveSetup> {
    trade.validate()?;
    let (tex, ts, te) = (trade.expiry, trade.start, trade.end);
    let fwd_spec = SwapSpec::annual(ts, te)?;
    let long_spec = SwapSpec::annual(tex, te)?;
    let a_fwd = annuity(curve, &fwd_spec)?;
    let a_long = annuity(curve, &long_spec)?;
    let r_fwd = par_rate(curve, &fwd_spec)?;
    let r_long = par_rate(curve, &long_spec)?;
    let k_e = r_long + (trade.strike - r_fwd);
    let sigma_e = surface.lookup_vol(tex, tex, te, k_e, r_long)?;
    let sigma_e_abs = sigma_e * tex.sqrt();
    let delta = corr.convexity_shift(tex);
    let degenerate = (ts - tex).abs() < 1e-12;
    if degenerate {
        // Expiry at the swap start: the decomposition collapses to a plain
        // European swaption on (T_s, T_e).
        return Ok(MidcurveSetup {
            weights: BasketWeights::new(1.0, 0.0)?,
            fwd_annuity: a_fwd,
            long: NormalLaw::new(apply_convexity_shift(r_long, sigma_e_abs, delta), sigma_e_abs)?,
            short: NormalLaw::point_mass(0.0),
            rho_se: 0.0,
            sigma_e,
            sigma_s: 0.0,
            a_long,
            a_short: Annuity(0.0),
            forward: r_fwd,
        });
    }
    let short_spec = SwapSpec::annual(tex, ts)?;
    let a_short = annuity(curve, &short_spec)?;
    let r_short = par_rate(curve, &short_spec)?;
    let k_s = r_short + (trade.strike - r_fwd);
    let sigma_s = surface.lookup_vol(tex, tex, ts, k_s, r_short)?;
    let sigma_s_abs = sigma_s * tex.sqrt();
    let rho_se = corr.long_short(tex, ts)?;
    let weights = BasketWeights::new(a_long.value() / a_fwd.value(), a_short.value() / a_fwd.value())?;
    Ok(MidcurveSetup {
        weights,
        fwd_annuity: a_fwd,
        long: NormalLaw::new(apply_convexity_shift(r_long, sigma_e_abs, delta), sigma_e_abs)?,
        short: NormalLaw::new(apply_convexity_shift(r_short, sigma_s_abs, delta), sigma_s_abs)?,
        rho_se,
        sigma_e,
        sigma_s,
        a_long,
        a_short,
        forward: r_fwd,
    })
}

/// Copula price of a midcurve swaption.
pub fn price_midcurve(
    trade: &MidcurveSwaption,
    curve: &DiscountCurve,
    surface: &VolSurface,
    corr: &CorrelationConfig,
    nodes: usize,
) -> Result<PricingResult> {
    let setup = build_midcurve_setup(trade, curve, surface, corr)?;
    let normalized = basket_option_gaussian(
        setup.weights,
        trade.strike,
        trade.omega,
        &setup.long,
        &setup.short,
        setup.rho_se,
        nodes,
    )?;
    let mut result = PricingResult::from_normalized(normalized, setup.fwd_annuity.value());
    result.diagnostics.put("sigma_e", setup.sigma_e);
    result.diagnostics.put("sigma_s", setup.sigma_s);
    result.diagnostics.put("rho_se", setup.rho_se);
    result.diagnostics.put("weights", [setup.weights.a, setup.weights.b]);
    result.diagnostics.put("nodes", nodes);
    Ok(result)
}

/// Per-annum implied vol of the forward-starting rate by the
/// volatility-by-strike approximation.
pub fn implied_midcurve_vol(
    trade: &MidcurveSwaption,
    curve: &DiscountCurve,
    surface: &VolSurface,
    corr: &CorrelationConfig,
) -> Result<f64> {
    let setup = build_midcurve_setup(trade, curve, surface, corr)?;
    if setup.a_short.value() == 0.0 {
        return Ok(setup.sigma_e);
    }
    midcurve_vol_approx(setup.a_long, setup.a_short, setup.fwd_annuity, setup.sigma_e, setup.sigma_s, setup.rho_se)
}

/// Bachelier price of the midcurve swaption using the implied-vol
/// approximation (the "practitioner" quote convention).
pub fn price_midcurve_bachelier(
    trade: &MidcurveSwaption,
    curve: &DiscountCurve,
    surface: &VolSurface,
    corr: &CorrelationConfig,
) -> Result<PricingResult> {
    let setup = build_midcurve_setup(trade, curve, surface, corr)?;
    let vol = implied_midcurve_vol(trade, curve, surface, corr)?;
    let fwd = setup.weights.a * setup.long.mean - setup.weights.b * setup.short.mean;
    let normalized = bachelier(fwd, trade.strike, vol * trade.expiry.sqrt(), trade.omega)?;
    let mut result = PricingResult::from_normalized(normalized, setup.fwd_annuity.value());
    result.diagnostics.put("implied_midcurve_vol", vol);
    Ok(result)
}

/// Diagnostic integration weight of the stochastic-annuity-ratio change of
/// variables, in the deformed coordinates:
/// `f^-1 g^-1 (1 + x fx / f^2 + y gy / g^2 + x y (fx gy - fy gx) / (f^2 g^2))^-1`
/// evaluated at the deformed point `(x_tilde, y_tilde)`.
#[allow(clippy::too_many_arguments)]
pub fn jacobian_weight(
    x_tilde: f64,
    y_tilde: f64,
    f: f64,
    g: f64,
    fx: f64,
    fy: f64,
    gx: f64,
    gy: f64,
) -> Result<f64> {
    if f <= 0.0 || g <= 0.0 {
        return Err(PricingError::Domain(format!("ratio functions must be positive, got f={f} g={g}")));
    }
    let bracket = 1.0 + x_tilde * fx / (f * f)
        + y_tilde * gy / (g * g)
        + x_tilde * y_tilde * (fx * gy - fy * gx) / (f * f * g * g);
    Ok(1.0 / (f * g * bracket))
}
