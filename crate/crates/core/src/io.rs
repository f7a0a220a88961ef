//! Readers for the external market, vol, correlation and trade files.
//!
//! Formats:
//! - market.json: `{"pillars": [[t, zero_rate], ...]}`
//! - vols.csv: columns `expiry,start,end,strike_offset,normal_vol`
//! - corr.json: `{"long_short": [[t_obs, t_split, rho], ...],
//!   "forward_fix": [[t_fix, t_s, t_e, rho], ...],
//!   "convexity_shifts": [[t_start, delta], ...]}` (all keys optional)
//! - trades.json: an array of trade objects with `id` and `kind`, or
//!   `{"trades": [...]}`

use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;

use crate::error::{PricingError, Result};
use crate::market::DiscountCurve;
use crate::trades::TradeDef;
use crate::volsurface::{CorrelationConfig, VolSurface};

fn io_err(file: &Path, message: impl ToString) -> PricingError {
    PricingError::Io { file: file.display().to_string(), message: message.to_string() }
}

fn read_to_string(file: &Path) -> Result<String> {
    std::fs::read_to_string(file).map_err(|e| io_err(file, e))
}

#[derive(Deserialize)]
struct MarketFile {
    pillars: Vec<(f64, f64)>,
}

/// Loads a discount curve from a market.json file.
pub fn load_market(path: impl AsRef<Path>) -> Result<DiscountCurve> {
    let path = path.as_ref();
    let text = read_to_string(path)?;
    let parsed: MarketFile = serde_json::from_str(&text).map_err(|e| io_err(path, e))?;
    DiscountCurve::new(parsed.pillars).map_err(|e| io_err(path, e))
}

#[derive(Deserialize)]
struct VolRow {
    expiry: f64,
    start: f64,
    end: f64,
    strike_offset: f64,
    normal_vol: f64,
}

/// Loads a vol surface from a vols.csv file. Rows sharing an
/// (expiry, start, end) triple form one smile, sorted by strike offset.
pub fn load_vols(path: impl AsRef<Path>) -> Result<VolSurface> {
    let path = path.as_ref();
    let mut reader = csv::Reader::from_path(path).map_err(|e| io_err(path, e))?;
    let mut smiles: BTreeMap<(i64, i64, i64), Vec<(f64, f64)>> = BTreeMap::new();
    let mut keys: BTreeMap<(i64, i64, i64), (f64, f64, f64)> = BTreeMap::new();
    let quantize = |t: f64| (t * 1e6).round() as i64;
    for row in reader.deserialize() {
        let row: VolRow = row.map_err(|e| io_err(path, e))?;
        let key = (quantize(row.expiry), quantize(row.start), quantize(row.end));
        keys.insert(key, (row.expiry, row.start, row.end));
        smiles.entry(key).or_default().push((row.strike_offset, row.normal_vol));
    }
    if smiles.is_empty() {
        return Err(io_err(path, "no vol rows"));
    }
    let mut surface = VolSurface::new();
    for (key, mut points) in smiles {
        points.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let (expiry, start, end) = keys[&key];
        surface.insert(expiry, start, end, points).map_err(|e| io_err(path, e))?;
    }
    Ok(surface)
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct CorrFile {
    #[serde(default)]
    long_short: Vec<(f64, f64, f64)>,
    #[serde(default)]
    forward_fix: Vec<(f64, f64, f64, f64)>,
    #[serde(default)]
    convexity_shifts: Vec<(f64, f64)>,
}

/// Loads the correlation and convexity-shift configuration from corr.json.
pub fn load_corr(path: impl AsRef<Path>) -> Result<CorrelationConfig> {
    let path = path.as_ref();
    let text = read_to_string(path)?;
    let parsed: CorrFile = serde_json::from_str(&text).map_err(|e| io_err(path, e))?;
    let mut cfg = CorrelationConfig::new();
    for (obs, split, rho) in parsed.long_short {
        cfg.set_long_short(obs, split, rho).map_err(|e| io_err(path, e))?;
    }
    for (t_fix, t_s, t_e, rho) in parsed.forward_fix {
        cfg.set_forward_fix(t_fix, t_s, t_e, rho).map_err(|e| io_err(path, e))?;
    }
    for (t, delta) in parsed.convexity_shifts {
        cfg.set_convexity_shift(t, delta);
    }
    Ok(cfg)
}

#[derive(Deserialize)]
#[serde(untagged)]
enum TradesFile {
    Wrapped { trades: Vec<TradeDef> },
    Plain(Vec<TradeDef>),
}

/// Loads the trade list from trades.json. Validates every trade and rejects
/// duplicate ids.
pub fn load_trades(path: impl AsRef<Path>) -> Result<Vec<TradeDef>> {
    let path = path.as_ref();
    let text = read_to_string(path)?;
    let parsed: TradesFile = serde_json::from_str(&text).map_err(|e| io_err(path, e))?;
    let trades = match parsed {
        TradesFile::Wrapped { trades } => trades,
        TradesFile::Plain(trades) => trades,
    };
    let mut seen = std::collections::BTreeSet::new();
    for def in &trades {
        if !seen.insert(def.id.clone()) {
            return Err(io_err(path, format!("duplicate trade id {}", def.id)));
        }
        def.trade.validate().map_err(|e| io_err(path, format!("trade {}: {e}", def.id)))?;
    }
    Ok(trades)
}
