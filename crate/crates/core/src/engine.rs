//! Model dispatch: prices any trade against a market bundle with the chosen
//! model family.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bermudan::{
    build_coterminal_set, price_bermudan_lattice, price_bermudan_mm, CorrConvention,
};
use crate::canary::{build_canary_setup, price_canary_integral, price_canary_mm};
use crate::error::{PricingError, Result};
use crate::market::{annuity, par_rate, DiscountCurve, SwapSpec};
use crate::midcurve::{build_midcurve_setup, price_midcurve, price_midcurve_bachelier};
use crate::oracle::{
    mc_price_bermudan_chain, mc_price_canary, mc_price_midcurve, mc_price_relative_strike, McResult,
    McSpec,
};
use crate::relstrike::{price_relative_strike, FixingVols};
use crate::trades::{BermudanSwaption, PricingResult, RelativeStrikeSwaption, Trade};
use crate::volsurface::{CorrelationConfig, VolSurface};

/// Everything a pricer needs: curve, vols, correlations and shifts.
#[derive(Debug, Clone)]
pub struct MarketData {
    pub curve: DiscountCurve,
    pub surface: VolSurface,
    pub corr: CorrelationConfig,
}

/// Model family selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    /// Closed form or deterministic numerical integration.
    Integral,
    /// Moment matching (Clark maxima, implied-vol approximations).
    Mm,
    /// Backward-induction lattice.
    Lattice,
    /// Monte Carlo oracle.
    Mc,
}

impl Model {
    pub fn as_str(&self) -> &'static str {
        match self {
            Model::Integral => "integral",
            Model::Mm => "mm",
            Model::Lattice => "lattice",
            Model::Mc => "mc",
        }
    }

    pub const ALL: [Model; 4] = [Model::Integral, Model::Mm, Model::Lattice, Model::Mc];
}

impl FromStr for Model {
    type Err = PricingError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "integral" => Ok(Model::Integral),
            "mm" => Ok(Model::Mm),
            "lattice" => Ok(Model::Lattice),
            "mc" => Ok(Model::Mc),
            other => Err(PricingError::Invalid(format!(
                "unknown model {other:?} (expected integral, mm, lattice or mc)"
            ))),
        }
    }
}

/// Numerical controls, all with production defaults.
#[derive(Debug, Clone, Copy)]
pub struct EngineSettings {
    /// Simpson nodes per axis for the integral pricers.
    pub grid_nodes: usize,
    /// Grid points per exercise for the lattice pricer.
    pub lattice_points: usize,
    pub mc_paths: u64,
    pub mc_seed: u64,
    pub convention: CorrConvention,
}

impl Default for EngineSettings {
    fn default() -> Self {
        Self {
            grid_nodes: 201,
            lattice_points: 201,
            mc_paths: 200_000,
            mc_seed: 42,
            convention: CorrConvention::LawOfCosines,
        }
    }
}

/// Whether `model` applies to trades of `kind`.
pub fn supports(kind: &str, model: Model) -> bool {
    match (kind, model) {
        ("relative_strike", Model::Integral | Model::Mc) => true,
        ("midcurve", Model::Integral | Model::Mm | Model::Mc) => true,
        ("canary", _) => true,
        ("bermudan", Model::Mm | Model::Lattice | Model::Mc) => true,
        _ => false,
    }
}

/// ATM strike of the trade's underlying (0 spread for relative strikes).
pub fn atm_strike(market: &MarketData, trade: &Trade) -> Result<f64> {
    let rate = |start: f64, end: f64| -> Result<f64> {
        par_rate(&market.curve, &SwapSpec::annual(start, end)?)
    };
    match trade {
        Trade::RelativeStrike(_) => Ok(0.0),
        Trade::Midcurve(t) => rate(t.start, t.end),
        Trade::Canary(t) => rate(t.t1, t.end),
        Trade::Bermudan(t) => rate(t.exercises[0], t.end),
    }
}

fn fixing_vols(market: &MarketData, t: &RelativeStrikeSwaption) -> Result<FixingVols> {
    let spec = SwapSpec::annual(t.start, t.end)?;
    let atm = par_rate(&market.curve, &spec)?;
    let strike = atm + t.spread;
    let sigma_x = market.surface.lookup_vol(t.start, t.start, t.end, strike, atm)? * t.start.sqrt();
    let sigma_z = if t.fix_time == 0.0 {
        0.0
    } else {
        match market.corr.forward_fix(t.fix_time, t.start, t.end) {
            Some(rho_fix) => {
                if !(0.0..=1.0).contains(&rho_fix) {
                    return Err(PricingError::Domain(format!(
                        "forward_fix correlation must be in [0, 1], got {rho_fix}"
                    )));
                }
                rho_fix * sigma_x
            }
            None => {
                market.surface.lookup_vol(t.fix_time, t.start, t.end, strike, atm)?
                    * t.fix_time.sqrt()
            }
        }
    };
    FixingVols::new(sigma_x, sigma_z)
}

fn mc_result(mc: McResult, annuity: f64) -> PricingResult {
    let mut r = PricingResult::from_normalized(mc.mean / annuity, annuity);
    r.std_error = Some(mc.std_error);
    r
}

/// Prices one trade with one model.
pub fn price_trade(
    market: &MarketData,
    trade: &Trade,
    model: Model,
    settings: &EngineSettings,
) -> Result<PricingResult> {
    if !supports(trade.kind(), model) {
        return Err(PricingError::Model(format!(
            "model {} does not apply to {} trades",
            model.as_str(),
            trade.kind()
        )));
    }
    let mc_spec = McSpec::new(settings.mc_paths, settings.mc_seed)?;
    match (trade, model) {
        (Trade::RelativeStrike(t), Model::Integral) => {
            let a = annuity(&market.curve, &SwapSpec::annual(t.start, t.end)?)?;
            price_relative_strike(t, a, &fixing_vols(market, t)?)
        }
        (Trade::RelativeStrike(t), Model::Mc) => {
            let a = annuity(&market.curve, &SwapSpec::annual(t.start, t.end)?)?;
            let vols = fixing_vols(market, t)?;
            let mc = mc_price_relative_strike(a, t.spread, t.omega, &vols, t.vol_spread_mult, &mc_spec)?;
            Ok(mc_result(mc, a.value()))
        }
        (Trade::Midcurve(t), Model::Integral) => {
            price_midcurve(t, &market.curve, &market.surface, &market.corr, settings.grid_nodes)
        }
        (Trade::Midcurve(t), Model::Mm) => {
            price_midcurve_bachelier(t, &market.curve, &market.surface, &market.corr)
        }
        (Trade::Midcurve(t), Model::Mc) => {
            let setup = build_midcurve_setup(t, &market.curve, &market.surface, &market.corr)?;
            let mc = mc_price_midcurve(&setup, t.strike, t.omega, &mc_spec)?;
            Ok(mc_result(mc, setup.fwd_annuity.value()))
        }
        (Trade::Canary(t), Model::Integral) => {
            price_canary_integral(t, &market.curve, &market.surface, &market.corr, settings.grid_nodes)
        }
        (Trade::Canary(t), Model::Mm) => {
            price_canary_mm(t, &market.curve, &market.surface, &market.corr)
        }
        (Trade::Canary(t), Model::Lattice) => {
            let as_bermudan = BermudanSwaption {
                exercises: vec![t.t1, t.t2],
                end: t.end,
                strike: t.strike,
                omega: t.omega,
            };
            price_bermudan_lattice(
                &as_bermudan,
                &market.curve,
                &market.surface,
                &market.corr,
                settings.convention,
                settings.lattice_points,
            )
        }
        (Trade::Canary(t), Model::Mc) => {
            let setup = build_canary_setup(t, &market.curve, &market.surface, &market.corr)?;
            let mc = mc_price_canary(&setup, t.strike, t.omega, &mc_spec)?;
            Ok(mc_result(mc, setup.a1e.value()))
        }
        (Trade::Bermudan(t), Model::Mm) => price_bermudan_mm(
            t,
            &market.curve,
            &market.surface,
            &market.corr,
            settings.convention,
        ),
        (Trade::Bermudan(t), Model::Lattice) => price_bermudan_lattice(
            t,
            &market.curve,
            &market.surface,
            &market.corr,
            settings.convention,
            settings.lattice_points,
        ),
        (Trade::Bermudan(t), Model::Mc) => {
            let set = build_coterminal_set(
                t,
                &market.curve,
                &market.surface,
                &market.corr,
                settings.convention,
            )?;
            let mc = mc_price_bermudan_chain(&set, t.strike, t.omega, &mc_spec, settings.lattice_points)?;
            Ok(mc_result(mc, set.exercises[0].annuity.value()))
        }
        _ => Err(PricingError::Model(format!(
            "model {} does not apply to {} trades",
            model.as_str(),
            trade.kind()
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trades::{CanarySwaption, MidcurveSwaption};
    use approx::assert_relative_eq;

    fn market() -> MarketData {
        let curve = DiscountCurve::new(vec![(1.0, 0.02), (5.0, 0.025), (10.0, 0.028)]).unwrap();
        let mut surface = VolSurface::new();
        surface.insert(0.5, 2.0, 6.0, vec![(0.0, 0.0060)]).unwrap();
        surface.insert(1.0, 1.0, 6.0, vec![(0.0, 0.0095)]).unwrap();
        surface.insert(1.0, 1.0, 2.0, vec![(0.0, 0.0080)]).unwrap();
        surface.insert(1.0, 2.0, 6.0, vec![(0.0, 0.0085)]).unwrap();
        surface.insert(2.0, 2.0, 6.0, vec![(0.0, 0.0100)]).unwrap();
        let mut corr = CorrelationConfig::new();
        corr.set_long_short(1.0, 2.0, 0.90).unwrap();
        MarketData { curve, surface, corr }
    }

    #[test]
    fn model_parsing() {
        assert_eq!(Model::from_str("mm").unwrap(), Model::Mm);
        assert_eq!(Model::from_str(" lattice ").unwrap(), Model::Lattice);
        assert!(Model::from_str("tree").is_err());
    }

    #[test]
    fn unsupported_combination_rejected() {
        let m = market();
        let t = Trade::Midcurve(MidcurveSwaption { expiry: 1.0, start: 2.0, end: 6.0, strike: 0.028, omega: 1.0 });
        let err = price_trade(&m, &t, Model::Lattice, &EngineSettings::default()).unwrap_err();
        assert!(err.to_string().contains("does not apply"), "{err}");
        assert!(!supports("relative_strike", Model::Lattice));
        assert!(supports("bermudan", Model::Lattice));
    }

    #[test]
    fn canary_models_agree_roughly() {
        let m = market();
        let t = Trade::Canary(CanarySwaption { t1: 1.0, t2: 2.0, end: 6.0, strike: 0.028, omega: 1.0 });
        let settings = EngineSettings { mc_paths: 400_000, ..Default::default() };
        let integral = price_trade(&m, &t, Model::Integral, &settings).unwrap();
        let mm = price_trade(&m, &t, Model::Mm, &settings).unwrap();
        let lattice = price_trade(&m, &t, Model::Lattice, &settings).unwrap();
        let mc = price_trade(&m, &t, Model::Mc, &settings).unwrap();
        assert_relative_eq!(mm.pv, integral.pv, max_relative = 0.10);
        assert_relative_eq!(lattice.pv, integral.pv, max_relative = 1e-3);
        let se = mc.std_error.unwrap();
        assert!((mc.pv - integral.pv).abs() < 4.0 * se * integral.pv.max(1.0) + 5e-5,
            "mc {} vs integral {} (se {se})", mc.pv, integral.pv);
    }

    #[test]
    fn relative_strike_fix_time_zero_is_european_spread_option() {
        let m = market();
        let t = RelativeStrikeSwaption {
            fix_time: 0.0,
            start: 2.0,
            end: 6.0,
            spread: 0.002,
            omega: 1.0,
            vol_spread_mult: 1.0,
        };
        let r = price_trade(&m, &Trade::RelativeStrike(t), Model::Integral, &EngineSettings::default()).unwrap();
        assert!(r.pv > 0.0);
    }

    #[test]
    fn atm_strikes() {
        let m = market();
        let t = Trade::Midcurve(MidcurveSwaption { expiry: 1.0, start: 2.0, end: 6.0, strike: 0.0, omega: 1.0 });
        let atm = atm_strike(&m, &t).unwrap();
        let direct = par_rate(&m.curve, &SwapSpec::annual(2.0, 6.0).unwrap()).unwrap();
        assert_relative_eq!(atm, direct, epsilon = 1e-15);
        let rs = Trade::RelativeStrike(RelativeStrikeSwaption {
            fix_time: 0.5, start: 2.0, end: 6.0, spread: 0.0, omega: 1.0, vol_spread_mult: 1.0,
        });
        assert_eq!(atm_strike(&m, &rs).unwrap(), 0.0);
    }
}
