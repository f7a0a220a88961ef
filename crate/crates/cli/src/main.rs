//! Batch pricing CLI.
//!
//! `price` reads market, vol, correlation and trade files, prices every
//! trade under the requested models and writes a deterministic results.csv
//! plus a diagnostics.json into the output directory. `diff` compares two
//! results files within a tolerance.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use swaption_engine::engine::{atm_strike, price_trade, supports, EngineSettings, MarketData, Model};
use swaption_engine::io::{load_corr, load_market, load_trades, load_vols};

#[derive(Parser)]
#[command(name = "swaption-cli", version, about = "Swaption pricing engine")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Price a trade file against a market and write results.csv.
    Price(PriceArgs),
    /// Compare two results.csv files within a tolerance.
    Diff(DiffArgs),
}

#[derive(Args)]
struct PriceArgs {
    /// Discount curve file (market.json).
    #[arg(long)]
    market: PathBuf,
    /// Normal vol surface (vols.csv).
    #[arg(long)]
    vols: PathBuf,
    /// Correlations and convexity shifts (corr.json).
    #[arg(long)]
    corr: PathBuf,
    /// Trade definitions (trades.json).
    #[arg(long)]
    trades: PathBuf,
    /// Comma-separated model list.
    #[arg(long, default_value = "integral,mm,lattice,mc")]
    models: String,
    /// Strike sweep lo,hi,step replacing each trade's booked strike.
    #[arg(long)]
    sweep: Option<String>,
    /// Quadrature / lattice grid points.
    #[arg(long)]
    grid: Option<usize>,
    /// Monte Carlo path count.
    #[arg(long)]
    paths: Option<u64>,
    /// Monte Carlo seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Record per-price runtimes in diagnostics.json.
    #[arg(long)]
    timings: bool,
    /// Output directory for results.csv and diagnostics.json.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct DiffArgs {
    a: PathBuf,
    b: PathBuf,
    /// Maximum absolute difference in pv and pv_per_annuity.
    #[arg(long, default_value_t = 1e-4)]
    tol: f64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Price(args) => run_price(&args),
        Command::Diff(args) => run_diff(&args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn parse_models(spec: &str) -> Result<Vec<Model>, String> {
    let mut models = Vec::new();
    for part in spec.split(',').filter(|p| !p.trim().is_empty()) {
        let m = Model::from_str(part).map_err(|e| e.to_string())?;
        if !models.contains(&m) {
            models.push(m);
        }
    }
    if models.is_empty() {
        return Err("no models requested".into());
    }
    Ok(models)
}

fn parse_sweep(spec: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = spec.split(',').collect();
    if parts.len() != 3 {
        return Err(format!("sweep must be lo,hi,step, got {spec:?}"));
    }
    let nums: Vec<f64> = parts
        .iter()
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("bad sweep value {p:?}: {e}")))
        .collect::<Result<_, _>>()?;
    let (lo, hi, step) = (nums[0], nums[1], nums[2]);
    if step <= 0.0 || hi < lo {
        return Err(format!("sweep needs lo <= hi and step > 0, got {spec:?}"));
    }
    let mut strikes = Vec::new();
    let n = ((hi - lo) / step).round() as usize;
    for i in 0..=n {
        let k = lo + i as f64 * step;
        if k <= hi + 1e-12 * step {
            strikes.push(k);
        }
    }
    Ok(strikes)
}

struct Row {
    trade_id: String,
    kind: &'static str,
    model: &'static str,
    strike: f64,
    pv: f64,
    pv_per_annuity: f64,
    std_error: Option<f64>,
}

fn run_price(args: &PriceArgs) -> Result<ExitCode, String> {
    let models = parse_models(&args.models)?;
    let sweep = args.sweep.as_deref().map(parse_sweep).transpose()?;
    let market = MarketData {
        curve: load_market(&args.market).map_err(|e| e.to_string())?,
        surface: load_vols(&args.vols).map_err(|e| e.to_string())?,
        corr: load_corr(&args.corr).map_err(|e| e.to_string())?,
    };
    let trades = load_trades(&args.trades).map_err(|e| e.to_string())?;
    let mut settings = EngineSettings::default();
    if let Some(g) = args.grid {
        settings.grid_nodes = g;
        settings.lattice_points = g;
    }
    if let Some(p) = args.paths {
        settings.mc_paths = p;
    }
    if let Some(s) = args.seed {
        settings.mc_seed = s;
    }

    let mut rows: Vec<Row> = Vec::new();
    let mut diagnostics: BTreeMap<String, serde_json::Value> = BTreeMap::new();
    for def in &trades {
        let strikes: Vec<f64> = match &sweep {
            Some(ks) => ks.clone(),
            None => vec![def.trade.strike()],
        };
        // ATM resolution is cheap; keep it per trade for the diagnostics.
        let atm = atm_strike(&market, &def.trade).map_err(|e| format!("{}: {e}", def.id))?;
        for &strike in &strikes {
            let trade = def.trade.with_strike(strike);
            for &model in &models {
                if !supports(trade.kind(), model) {
                    continue;
                }
                let started = Instant::now();
                let priced = price_trade(&market, &trade, model, &settings)
                    .map_err(|e| format!("{} ({}, {}): {e}", def.id, model.as_str(), strike))?;
                let elapsed_ms = started.elapsed().as_secs_f64() * 1e3;
                rows.push(Row {
                    trade_id: def.id.clone(),
                    kind: trade.kind(),
                    model: model.as_str(),
                    strike,
                    pv: priced.pv,
                    pv_per_annuity: priced.pv_per_annuity,
                    std_error: priced.std_error,
                });
                let mut diag = serde_json::to_value(&priced.diagnostics)
                    .unwrap_or(serde_json::Value::Null);
                if let Some(obj) = diag.as_object_mut() {
                    obj.insert("atm".into(), serde_json::json!(atm));
                    if args.timings {
                        obj.insert("runtime_ms".into(), serde_json::json!(elapsed_ms));
                    }
                }
                diagnostics.insert(format!("{}/{}/{}", def.id, model.as_str(), fmt(strike)), diag);
            }
        }
    }
    rows.sort_by(|a, b| {
        (a.trade_id.as_str(), a.strike, a.model)
            .partial_cmp(&(b.trade_id.as_str(), b.strike, b.model))
            .unwrap()
    });

    std::fs::create_dir_all(&args.out).map_err(|e| format!("{}: {e}", args.out.display()))?;
    let csv_path = args.out.join("results.csv");
    let mut out = String::from("trade_id,kind,model,strike,pv,pv_per_annuity,std_error,runtime_ms\n");
    for r in &rows {
        let se = r.std_error.map(fmt).unwrap_or_default();
        // runtime_ms stays empty so results are bit-identical across runs;
        // measured runtimes go to diagnostics.json under --timings.
        out.push_str(&format!(
            "{},{},{},{},{},{},{},\n",
            r.trade_id,
            r.kind,
            r.model,
            fmt(r.strike),
            fmt(r.pv),
            fmt(r.pv_per_annuity),
            se
        ));
    }
    std::fs::write(&csv_path, out).map_err(|e| format!("{}: {e}", csv_path.display()))?;
    let diag_path = args.out.join("diagnostics.json");
    let diag_text = serde_json::to_string_pretty(&diagnostics).map_err(|e| e.to_string())?;
    std::fs::write(&diag_path, diag_text + "\n").map_err(|e| format!("{}: {e}", diag_path.display()))?;
    Ok(ExitCode::SUCCESS)
}

/// Shortest round-trip decimal representation; deterministic for a given value.
fn fmt(x: f64) -> String {
    format!("{x}")
}

fn read_results(path: &PathBuf) -> Result<BTreeMap<String, Vec<f64>>, String> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let headers = reader.headers().map_err(|e| e.to_string())?.clone();
    let idx = |name: &str| headers.iter().position(|h| h == name);
    let (Some(i_id), Some(i_model), Some(i_strike), Some(i_pv), Some(i_ppa)) = (
        idx("trade_id"),
        idx("model"),
        idx("strike"),
        idx("pv"),
        idx("pv_per_annuity"),
    ) else {
        return Err(format!("{}: missing required columns", path.display()));
    };
    let mut map = BTreeMap::new();
    for record in reader.records() {
        let record = record.map_err(|e| e.to_string())?;
        let key = format!("{}/{}/{}", &record[i_id], &record[i_model], &record[i_strike]);
        let pv: f64 = record[i_pv].parse().map_err(|e| format!("bad pv in {key}: {e}"))?;
        let ppa: f64 = record[i_ppa].parse().map_err(|e| format!("bad pv_per_annuity in {key}: {e}"))?;
        map.insert(key, vec![pv, ppa]);
    }
    Ok(map)
}

fn run_diff(args: &DiffArgs) -> Result<ExitCode, String> {
    let a = read_results(&args.a)?;
    let b = read_results(&args.b)?;
    let mut failures = 0usize;
    for key in a.keys().chain(b.keys()).collect::<std::collections::BTreeSet<_>>() {
        match (a.get(key), b.get(key)) {
            (Some(va), Some(vb)) => {
                for (name, x, y) in [("pv", va[0], vb[0]), ("pv_per_annuity", va[1], vb[1])] {
                    let d = (x - y).abs();
                    if d > args.tol {
                        println!("{key}: {name} differs by {d:e} ({x} vs {y})");
                        failures += 1;
                    }
                }
            }
            (Some(_), None) => {
                println!("{key}: only in {}", args.a.display());
                failures += 1;
            }
            (None, Some(_)) => {
                println!("{key}: only in {}", args.b.display());
                failures += 1;
            }
            (None, None) => unreachable!(),
        }
    }
    if failures == 0 {
        println!("results match within {:e}", args.tol);
        Ok(ExitCode::SUCCESS)
    } else {
        println!("{failures} difference(s) above {:e}", args.tol);
        Ok(ExitCode::FAILURE)
    }
}
