//! Trade definitions and pricing results.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{PricingError, Result};
use crate::market::SwapSpec;

fn default_mult() -> f64 {
    1.0
}

/// Payer/receiver flag, +1 or -1.
pub type Omega = f64;

fn check_omega(omega: f64) -> Result<()> {
    if omega != 1.0 && omega != -1.0 {
        return Err(PricingError::Invalid(format!("omega must be +1 or -1, got {omega}")));
    }
    Ok(())
}

/// Swaption whose strike is a spread over the ATM rate observed at `fix_time`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RelativeStrikeSwaption {
    pub fix_time: f64,
    pub start: f64,
    pub end: f64,
    pub spread: f64,
    pub omega: Omega,
    #[serde(default = "default_mult")]
    pub vol_spread_mult: f64,
}

impl RelativeStrikeSwaption {
    pub fn validate(&self) -> Result<()> {
        check_omega(self.omega)?;
        if !(0.0..=self.start).contains(&self.fix_time) {
            return Err(PricingError::Invalid(format!(
                "need 0 <= fix_time <= start, got fix_time={} start={}",
                self.fix_time, self.start
            )));
        }
        if self.vol_spread_mult <= 0.0 {
            return Err(PricingError::Invalid("vol_spread_mult must be positive".into()));
        }
        SwapSpec::annual(self.start, self.end)?.validate()
    }
}

/// Swaption expiring at `expiry` on the forward swap [start, end], expiry <= start.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MidcurveSwaption {
    pub expiry: f64,
    pub start: f64,
    pub end: f64,
    pub strike: f64,
    pub omega: Omega,
}

impl MidcurveSwaption {
    pub fn validate(&self) -> Result<()> {
        check_omega(self.omega)?;
        if self.expiry <= 0.0 || self.expiry > self.start {
            return Err(PricingError::Invalid(format!(
                "need 0 < expiry <= start, got expiry={} start={}",
                self.expiry, self.start
            )));
        }
        SwapSpec::annual(self.start, self.end)?.validate()
    }
}

/// Two-exercise Bermudan: exercisable at t1 into [t1, end] or at t2 into [t2, end].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CanarySwaption {
    pub t1: f64,
    pub t2: f64,
    pub end: f64,
    pub strike: f64,
    pub omega: Omega,
}

impl CanarySwaption {
    pub fn validate(&self) -> Result<()> {
        check_omega(self.omega)?;
        if !(0.0 < self.t1 && self.t1 < self.t2 && self.t2 < self.end) {
            return Err(PricingError::Invalid(format!(
                "need 0 < t1 < t2 < end, got t1={} t2={} end={}",
                self.t1, self.t2, self.end
            )));
        }
        Ok(())
    }
}

/// General Bermudan with ordered exercise times into coterminal swaps ending at `end`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BermudanSwaption {
    pub exercises: Vec<f64>,
    pub end: f64,
    pub strike: f64,
    pub omega: Omega,
}

impl BermudanSwaption {
    pub fn validate(&self) -> Result<()> {
        check_omega(self.omega)?;
        if self.exercises.is_empty() {
            return Err(PricingError::Invalid("bermudan needs at least one exercise".into()));
        }
        if self.exercises[0] <= 0.0 || self.exercises.windows(2).any(|w| w[1] <= w[0]) {
            return Err(PricingError::Invalid("exercise times must be positive and strictly increasing".into()));
        }
        if *self.exercises.last().unwrap() >= self.end {
            return Err(PricingError::Invalid("all exercise times must be before end".into()));
        }
        Ok(())
    }
}

/// Tagged union of the supported products.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Trade {
    RelativeStrike(RelativeStrikeSwaption),
    Midcurve(MidcurveSwaption),
    Canary(CanarySwaption),
    Bermudan(BermudanSwaption),
}

impl Trade {
    pub fn validate(&self) -> Result<()> {
        match self {
            Trade::RelativeStrike(t) => t.validate(),
            Trade::Midcurve(t) => t.validate(),
            Trade::Canary(t) => t.validate(),
            Trade::Bermudan(t) => t.validate(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Trade::RelativeStrike(_) => "relative_strike",
            Trade::Midcurve(_) => "midcurve",
            Trade::Canary(_) => "canary",
            Trade::Bermudan(_) => "bermudan",
        }
    }

    /// Strike (spread for relative-strike trades) as booked.
    pub fn strike(&self) -> f64 {
        match self {
            Trade::RelativeStrike(t) => t.spread,
            Trade::Midcurve(t) => t.strike,
            Trade::Canary(t) => t.strike,
            Trade::Bermudan(t) => t.strike,
        }
    }

    /// Copy of the trade with the strike (or spread) replaced.
    pub fn with_strike(&self, strike: f64) -> Trade {
        let mut t = self.clone();
        match &mut t {
            Trade::RelativeStrike(x) => x.spread = strike,
            Trade::Midcurve(x) => x.strike = strike,
            Trade::Canary(x) => x.strike = strike,
            Trade::Bermudan(x) => x.strike = strike,
        }
        t
    }
}

/// A trade with an identifier, as read from the trades file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TradeDef {
    pub id: String,
    #[serde(flatten)]
    pub trade: Trade,
}

/// Structured per-price diagnostics (vols, correlations, grids, repairs, ...).
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Diagnostics {
    #[serde(flatten)]
    entries: BTreeMap<String, serde_json::Value>,
}

impl Diagnostics {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn put(&mut self, key: &str, value: impl Serialize) {
        if let Ok(v) = serde_json::to_value(value) {
            self.entries.insert(key.to_string(), v);
        }
    }

    pub fn get(&self, key: &str) -> Option<&serde_json::Value> {
        self.entries.get(key)
    }
}

/// Present value plus the annuity-normalized value and diagnostics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PricingResult {
    /// Value per unit notional.
    pub pv: f64,
    /// Value divided by the terminal annuity.
    pub pv_per_annuity: f64,
    /// Monte Carlo standard error, when the model is stochastic.
    pub std_error: Option<f64>,
    pub diagnostics: Diagnostics,
}

impl PricingResult {
    /// Builds a result from the annuity-normalized value and the annuity.
    pub fn from_normalized(value_per_annuity: f64, annuity: f64) -> Self {
        Self {
            pv: value_per_annuity * annuity,
            pv_per_annuity: value_per_annuity,
            std_error: None,
            diagnostics: Diagnostics::new(),
        }
    }
}
