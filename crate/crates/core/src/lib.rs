//! Semi-analytical pricing of Bermudan-style swaptions in a Gaussian
//! (normal-rate) framework.
//!
//! The engine prices relative-strike, midcurve, canary (two-exercise) and
//! general Bermudan swaptions from three inputs: a discount curve, a normal
//! vol surface and a small correlation/convexity configuration. Each product
//! has a fast semi-analytical model (deterministic integration, Clark moment
//! matching or a backward-induction lattice) plus a deterministic Monte
//! Carlo oracle for validation.

pub mod analytics;
pub mod bermudan;
pub mod canary;
pub mod engine;
pub mod error;
pub mod io;
pub mod market;
pub mod midcurve;
pub mod oracle;
pub mod relstrike;
pub mod trades;
pub mod volsurface;

pub use engine::{atm_strike, price_trade, supports, EngineSettings, MarketData, Model};
pub use error::{PricingError, Result};
pub use market::{annuity, par_rate, Annuity, DiscountCurve, SwapSpec};
pub use trades::{PricingResult, Trade, TradeDef};
pub use volsurface::{CorrelationConfig, VolSurface};
