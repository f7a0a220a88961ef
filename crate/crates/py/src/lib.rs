//! Python bindings: load a market bundle, price trades, inspect diagnostics.
//!
//! The module mirrors the CLI surface: a `Market` built from the same three
//! input files (or JSON/CSV strings), trades given as JSON objects, and a
//! `price` method returning a dict with `pv`, `pv_per_annuity`, `std_error`
//! and `diagnostics`.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

use swaption_engine::engine::{self, EngineSettings, MarketData, Model};
use swaption_engine::io;
use swaption_engine::trades::Trade;

fn err(e: impl ToString) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn json_to_py(py: Python<'_>, v: &serde_json::Value) -> PyResult<Py<PyAny>> {
    use serde_json::Value;
    Ok(match v {
        Value::Null => py.None(),
        Value::Bool(b) => pyo3::types::PyBool::new(py, *b).to_owned().into_any().unbind(),
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                i.into_pyobject(py)?.into_any().unbind()
            } else {
                n.as_f64().unwrap_or(f64::NAN).into_pyobject(py)?.into_any().unbind()
            }
        }
        Value::String(s) => s.into_pyobject(py)?.into_any().unbind(),
        Value::Array(items) => {
            let list = PyList::empty(py);
            for item in items {
                list.append(json_to_py(py, item)?)?;
            }
            list.into_any().unbind()
        }
        Value::Object(map) => {
            let dict = PyDict::new(py);
            for (k, item) in map {
                dict.set_item(k, json_to_py(py, item)?)?;
            }
            dict.into_any().unbind()
        }
    })
}

fn parse_trade(trade_json: &str) -> PyResult<Trade> {
    let trade: Trade = serde_json::from_str(trade_json).map_err(err)?;
    trade.validate().map_err(err)?;
    Ok(trade)
}

fn settings_from(
    grid: Option<usize>,
    paths: Option<u64>,
    seed: Option<u64>,
) -> EngineSettings {
    let mut settings = EngineSettings::default();
    if let Some(g) = grid {
        settings.grid_nodes = g;
        settings.lattice_points = g;
    }
    if let Some(p) = paths {
        settings.mc_paths = p;
    }
    if let Some(s) = seed {
        settings.mc_seed = s;
    }
    settings
}

/// A market bundle: discount curve, vol surface, correlation config.
#[pyclass]
struct Market {
    data: MarketData,
}

#[pymethods]
impl Market {
    /// Loads the bundle from the three standard input files.
    #[staticmethod]
    fn from_files(market: &str, vols: &str, corr: &str) -> PyResult<Self> {
        Ok(Self {
            data: MarketData {
                curve: io::load_market(market).map_err(err)?,
                surface: io::load_vols(vols).map_err(err)?,
                corr: io::load_corr(corr).map_err(err)?,
            },
        })
    }

    /// Discount factor at time `t` (years).
    fn discount_factor(&self, t: f64) -> PyResult<f64> {
        self.data.curve.discount_factor(t).map_err(err)
    }

    /// Forward par swap rate of the annual swap [start, end].
    fn par_rate(&self, start: f64, end: f64) -> PyResult<f64> {
        let spec = swaption_engine::SwapSpec::annual(start, end).map_err(err)?;
        swaption_engine::par_rate(&self.data.curve, &spec).map_err(err)
    }

    /// ATM strike of a trade given as a JSON object string.
    fn atm_strike(&self, trade_json: &str) -> PyResult<f64> {
        engine::atm_strike(&self.data, &parse_trade(trade_json)?).map_err(err)
    }

    /// Prices a trade (JSON object string) with one of the models
    /// "integral", "mm", "lattice" or "mc".
    #[pyo3(signature = (trade_json, model, *, grid=None, paths=None, seed=None))]
    fn price(
        &self,
        py: Python<'_>,
        trade_json: &str,
        model: &str,
        grid: Option<usize>,
        paths: Option<u64>,
        seed: Option<u64>,
    ) -> PyResult<Py<PyDict>> {
        let trade = parse_trade(trade_json)?;
        let model: Model = model.parse().map_err(err)?;
        let settings = settings_from(grid, paths, seed);
        let result = engine::price_trade(&self.data, &trade, model, &settings).map_err(err)?;
        let dict = PyDict::new(py);
        dict.set_item("pv", result.pv)?;
        dict.set_item("pv_per_annuity", result.pv_per_annuity)?;
        dict.set_item("std_error", result.std_error)?;
        let diag = serde_json::to_value(&result.diagnostics).map_err(err)?;
        dict.set_item("diagnostics", json_to_py(py, &diag)?)?;
        Ok(dict.unbind())
    }
}

/// Undiscounted Bachelier option price with absolute vol `sigma`.
#[pyfunction]
fn bachelier(forward: f64, strike: f64, sigma: f64, omega: f64) -> PyResult<f64> {
    swaption_engine::analytics::bachelier(forward, strike, sigma, omega).map_err(err)
}

/// Standard normal cumulative distribution function.
#[pyfunction]
fn norm_cdf(x: f64) -> f64 {
    swaption_engine::analytics::norm_cdf(x)
}

/// Model names applicable to a trade kind.
#[pyfunction]
fn supported_models(kind: &str) -> Vec<&'static str> {
    Model::ALL
        .iter()
        .filter(|&&m| engine::supports(kind, m))
        .map(|m| m.as_str())
        .collect()
}

#[pymodule]
fn swaption_engine_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Market>()?;
    m.add_function(wrap_pyfunction!(bachelier, m)?)?;
    m.add_function(wrap_pyfunction!(norm_cdf, m)?)?;
    m.add_function(wrap_pyfunction!(supported_models, m)?)?;
    Ok(())
}
