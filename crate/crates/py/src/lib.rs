//! Python bindings: configuration, single runs, sweeps, the cost model and a
//! few pure helpers. Structured results cross the boundary as plain dicts.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::{PyBool, PyDict, PyList};

use vcsim_core::costmodel::{self, CostInputs};
use vcsim_core::experiments::SweepError;
use vcsim_core::mobility::{self, Point};
use vcsim_core::netmodel;
use vcsim_core::{ConfigError, LatencyClass, SimConfig, Strategy, SweepAxis, SweepPlan};

fn config_err(e: ConfigError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn sweep_err(e: SweepError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Converts anything serde can emit into Python objects via `json.loads`.
fn to_py<'py, T: serde::Serialize + ?Sized>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn value_text(value: &Bound<'_, PyAny>) -> PyResult<String> {
    if let Ok(b) = value.cast::<PyBool>() {
        return Ok(if b.is_true() { "true" } else { "false" }.to_string());
    }
    Ok(value.str()?.to_string())
}

/// Simulation parameters. Every field is readable and writable as an
/// attribute; unknown names raise `AttributeError`.
#[pyclass(name = "SimConfig", module = "vcsim", from_py_object)]
#[derive(Clone)]
pub struct PySimConfig {
    inner: SimConfig,
}

#[pymethods]
impl PySimConfig {
    #[new]
    #[pyo3(signature = (**kwargs))]
    fn new(kwargs: Option<&Bound<'_, PyDict>>) -> PyResult<Self> {
        let mut inner = SimConfig::default();
        if let Some(kw) = kwargs {
            for (k, v) in kw.iter() {
                inner.set(&k.extract::<String>()?, &value_text(&v)?).map_err(config_err)?;
            }
        }
        Ok(PySimConfig { inner })
    }

    #[staticmethod]
    fn keys() -> Vec<&'static str> {
        SimConfig::KEYS.to_vec()
    }

    /// Parses `key = value` text over the defaults.
    #[staticmethod]
    fn from_kv(text: &str) -> PyResult<Self> {
        SimConfig::from_kv(text).map(|inner| PySimConfig { inner }).map_err(config_err)
    }

    fn to_kv(&self) -> String {
        self.inner.to_kv()
    }

    fn to_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.inner)
    }

    fn validate(&self) -> PyResult<()> {
        self.inner.validate().map_err(config_err)
    }

    fn __getattr__<'py>(&self, py: Python<'py>, name: &str) -> PyResult<Bound<'py, PyAny>> {
        if !SimConfig::KEYS.contains(&name) {
            return Err(pyo3::exceptions::PyAttributeError::new_err(name.to_string()));
        }
        to_py(py, &self.inner)?.get_item(name)
    }

    fn __setattr__(&mut self, name: &str, value: &Bound<'_, PyAny>) -> PyResult<()> {
        if !SimConfig::KEYS.contains(&name) {
            return Err(pyo3::exceptions::PyAttributeError::new_err(name.to_string()));
        }
        self.inner.set(name, &value_text(value)?).map_err(config_err)
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.inner == other.inner
    }

    fn __repr__(&self) -> String {
        format!(
            "SimConfig(strategy={}, n_users={}, n_vehicles={}, seed={})",
            self.inner.strategy, self.inner.n_users, self.inner.n_vehicles, self.inner.seed
        )
    }
}

fn config_or_default(config: Option<&PySimConfig>) -> SimConfig {
    config.map(|c| c.inner.clone()).unwrap_or_default()
}

/// Runs one scenario; returns `{"config": ..., "summary": ...}`.
#[pyfunction]
#[pyo3(signature = (config=None, records=false))]
fn run_scenario<'py>(py: Python<'py>, config: Option<&PySimConfig>, records: bool) -> PyResult<Bound<'py, PyDict>> {
    let cfg = config_or_default(config);
    let out = py
        .detach(|| vcsim_core::run_scenario_full(&cfg))
        .map_err(config_err)?;
    let d = PyDict::new(py);
    d.set_item("config", to_py(py, &out.config)?)?;
    d.set_item("summary", to_py(py, &out.summary)?)?;
    if records {
        let rows: Vec<serde_json::Value> = out
            .records
            .iter()
            .map(|r| {
                serde_json::json!({
                    "task_id": r.task_id.0,
                    "destination": r.destination.to_string(),
                    "t_request": r.t_request,
                    "t_up_ap": r.t_up_ap,
                    "t_up_leg2": r.t_up_leg2,
                    "t_queue": r.t_queue,
                    "t_elab": r.t_elab,
                    "t_down_leg2": r.t_down_leg2,
                    "t_down_ap": r.t_down_ap,
                    "total": r.total(),
                    "outcome": r.outcome.label(),
                })
            })
            .collect();
        d.set_item("records", to_py(py, &rows)?)?;
    }
    Ok(d)
}

/// Sweeps `axis` over `values`; one dict per run with `axis`, `value`,
/// `repeat` and the summary fields.
#[pyfunction]
#[pyo3(signature = (axis, values, config=None, strategies=None, repeats=1))]
fn sweep<'py>(
    py: Python<'py>,
    axis: &str,
    values: Vec<f64>,
    config: Option<&PySimConfig>,
    strategies: Option<Vec<String>>,
    repeats: u32,
) -> PyResult<Bound<'py, PyList>> {
    let axis: SweepAxis = axis.parse().map_err(sweep_err)?;
    let strategies = match strategies {
        None => Strategy::BOTH.to_vec(),
        Some(names) => names
            .iter()
            .map(|s| s.parse::<Strategy>())
            .collect::<Result<_, _>>()
            .map_err(config_err)?,
    };
    let plan = SweepPlan::new(axis, values, config_or_default(config))
        .strategies(&strategies)
        .repeats(repeats);
    let rows = py.detach(|| vcsim_core::sweep(&plan)).map_err(sweep_err)?;
    let list = PyList::empty(py);
    for row in &rows {
        let d = to_py(py, &row.summary)?;
        d.set_item("axis", axis.name())?;
        d.set_item("value", row.key.value)?;
        d.set_item("repeat", row.key.repeat)?;
        list.append(d)?;
    }
    Ok(list)
}

/// Break-even report for pay-per-request offloading versus an edge CPU.
#[pyfunction]
#[pyo3(signature = (price_per_request_usd=2e-5, request_rate_per_s=40.0, edge_capex_usd=1000.0, horizon_s=None))]
fn cost_report<'py>(
    py: Python<'py>,
    price_per_request_usd: f64,
    request_rate_per_s: f64,
    edge_capex_usd: f64,
    horizon_s: Option<f64>,
) -> PyResult<Bound<'py, PyAny>> {
    let inputs = CostInputs { price_per_request_usd, request_rate_per_s, edge_capex_usd, horizon_s };
    if !inputs.is_valid() {
        return Err(PyValueError::new_err("price and rate must be >= 0 and capex > 0"));
    }
    to_py(py, &costmodel::report(&inputs))
}

#[pyfunction]
fn vcc_spend(price_per_request_usd: f64, request_rate_per_s: f64, horizon_s: f64) -> f64 {
    let inputs = CostInputs { price_per_request_usd, request_rate_per_s, ..CostInputs::default() };
    costmodel::vcc_spend(&inputs, horizon_s)
}

#[pyfunction]
#[pyo3(signature = (price_per_request_usd=2e-5, edge_capex_usd=1000.0))]
fn breakeven_requests(price_per_request_usd: f64, edge_capex_usd: f64) -> Option<u64> {
    let inputs = CostInputs { price_per_request_usd, edge_capex_usd, ..CostInputs::default() };
    costmodel::breakeven_requests(&inputs)
}

/// Transfer time of one frame over an idle medium.
#[pyfunction]
fn wireless_path_time(bytes: u64, throughput_bps: f64, per_frame_overhead_s: f64) -> f64 {
    netmodel::wireless_path_time(bytes, throughput_bps, per_frame_overhead_s)
}

#[pyfunction]
#[pyo3(signature = (x, y, ap_x=100.0, ap_y=100.0, radius_m=100.0))]
fn in_coverage(x: f64, y: f64, ap_x: f64, ap_y: f64, radius_m: f64) -> bool {
    mobility::in_coverage(Point::new(x, y), Point::new(ap_x, ap_y), radius_m)
}

fn latency_class(name: &str) -> PyResult<LatencyClass> {
    match name {
        "LL++" | "ll_plus_plus" => Ok(LatencyClass::LlPlusPlus),
        "LL+" | "ll_plus" => Ok(LatencyClass::LlPlus),
        "LL" | "ll" => Ok(LatencyClass::Ll),
        other => Err(PyValueError::new_err(format!("unknown latency class `{other}`"))),
    }
}

/// Threshold in seconds of `LL++`, `LL+` or `LL`.
#[pyfunction]
fn latency_threshold(name: &str) -> PyResult<f64> {
    Ok(latency_class(name)?.threshold_s())
}

#[pyfunction]
fn meets_latency_class(name: &str, total_s: f64) -> PyResult<bool> {
    Ok(latency_class(name)?.satisfied_by(total_s))
}

/// `(time_s, vehicle_id, x_m, y_m)` samples every `dt` seconds.
#[pyfunction]
#[pyo3(signature = (config=None, dt=1.0))]
fn mobility_trace(config: Option<&PySimConfig>, dt: f64) -> PyResult<Vec<(f64, u32, f64, f64)>> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(PyValueError::new_err("dt must be > 0"));
    }
    let cfg = config_or_default(config);
    cfg.validate().map_err(config_err)?;
    Ok(mobility::mobility_trace(&cfg, dt)
        .into_iter()
        .map(|r| (r.time_s, r.vehicle_id, r.x_m, r.y_m))
        .collect())
}

#[pymodule]
pub fn vcsim(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySimConfig>()?;
    m.add_function(wrap_pyfunction!(run_scenario, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add_function(wrap_pyfunction!(cost_report, m)?)?;
    m.add_function(wrap_pyfunction!(vcc_spend, m)?)?;
    m.add_function(wrap_pyfunction!(breakeven_requests, m)?)?;
    m.add_function(wrap_pyfunction!(wireless_path_time, m)?)?;
    m.add_function(wrap_pyfunction!(in_coverage, m)?)?;
    m.add_function(wrap_pyfunction!(latency_threshold, m)?)?;
    m.add_function(wrap_pyfunction!(meets_latency_class, m)?)?;
    m.add_function(wrap_pyfunction!(mobility_trace, m)?)?;
    Ok(())
}
