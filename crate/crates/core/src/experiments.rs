//! Single scenarios and parameter sweeps.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::config::{ConfigError, SimConfig, Strategy};
use crate::metrics::RunSummary;
use crate::simulation::{ScenarioOutput, Simulation};

/// Runs one seeded scenario to completion.
pub fn run_scenario(config: &SimConfig) -> Result<RunSummary, ConfigError> {
    Ok(run_scenario_full(config)?.summary)
}

/// Like [`run_scenario`] but keeps the per-task records.
pub fn run_scenario_full(config: &SimConfig) -> Result<ScenarioOutput, ConfigError> {
    Ok(Simulation::new(config.clone())?.run())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    Users,
    Vehicles,
    VccMips,
    WorkloadMi,
    SpeedKmh,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::Users => "users",
            SweepAxis::Vehicles => "vehicles",
            SweepAxis::VccMips => "vcc_mips",
            SweepAxis::WorkloadMi => "workload_mi",
            SweepAxis::SpeedKmh => "speed_kmh",
        }
    }

    /// Returns `base` with this axis set to `value`.
    pub fn apply(self, base: &SimConfig, value: f64) -> Result<SimConfig, SweepError> {
        let mut c = base.clone();
        let as_count = |v: f64| -> Result<u32, SweepError> {
            if v >= 0.0 && v.fract() == 0.0 && v <= f64::from(u32::MAX) {
                Ok(v as u32)
            } else {
                Err(SweepError::NotACount { axis: self, value: v })
            }
        };
        match self {
            SweepAxis::Users => c.n_users = as_count(value)?,
            SweepAxis::Vehicles => c.n_vehicles = as_count(value)?,
            SweepAxis::VccMips => c.c_vcc_mips = value,
            SweepAxis::WorkloadMi => c.task_workload_mi = value,
            SweepAxis::SpeedKmh => c.vehicle_speed_kmh = value,
        }
        Ok(c)
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepAxis {
    type Err = SweepError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "users" | "n_users" => Ok(SweepAxis::Users),
            "vehicles" | "n_vehicles" => Ok(SweepAxis::Vehicles),
            "vcc_mips" | "c_vcc_mips" => Ok(SweepAxis::VccMips),
            "workload_mi" | "task_workload_mi" | "workload" => Ok(SweepAxis::WorkloadMi),
            "speed_kmh" | "vehicle_speed_kmh" | "speed" => Ok(SweepAxis::SpeedKmh),
            other => Err(SweepError::UnknownAxis(other.to_string())),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SweepError {
    #[error("unknown sweep axis `{0}`")]
    UnknownAxis(String),
    #[error("sweep needs at least one value")]
    NoValues,
    #[error("repeats must be at least 1")]
    NoRepeats,
    #[error("axis {axis} needs a whole count, got {value}")]
    NotACount { axis: SweepAxis, value: f64 },
    #[error("bad value list `{0}`")]
    BadValues(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
}

/// Parses `a:b` (inclusive integer range), `a:b:step`, or `v1,v2,...`.
pub fn parse_values(text: &str) -> Result<Vec<f64>, SweepError> {
    let bad = || SweepError::BadValues(text.to_string());
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad());
    let values: Vec<f64> = if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        let (start, end, step) = match parts.as_slice() {
            [a, b] => (num(a)?, num(b)?, 1.0),
            [a, b, s] => (num(a)?, num(b)?, num(s)?),
            _ => return Err(bad()),
        };
        if !(step > 0.0) || end < start {
            return Err(bad());
        }
        let n = ((end - start) / step + 1e-9).floor() as usize;
        (0..=n).map(|i| start + i as f64 * step).collect()
    } else {
        text.split(',').filter(|s| !s.trim().is_empty()).map(num).collect::<Result<_, _>>()?
    };
    if values.is_empty() {
        return Err(SweepError::NoValues);
    }
    Ok(values)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepKey {
    pub axis: SweepAxis,
    pub value: f64,
    pub repeat: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub key: SweepKey,
    pub summary: RunSummary,
}

#[derive(Debug, Clone)]
pub struct SweepPlan {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    pub strategies: Vec<Strategy>,
    pub repeats: u32,
    pub base: SimConfig,
}

impl SweepPlan {
    pub fn new(axis: SweepAxis, values: Vec<f64>, base: SimConfig) -> Self {
        SweepPlan { axis, values, strategies: vec![base.strategy], repeats: 1, base }
    }

    pub fn strategies(mut self, s: &[Strategy]) -> Self {
        self.strategies = s.to_vec();
        self
    }

    pub fn repeats(mut self, n: u32) -> Self {
        self.repeats = n;
        self
    }

    /// Every configuration of the sweep, in output order.
    pub fn points(&self) -> Result<Vec<(SweepKey, SimConfig)>, SweepError> {
        if self.values.is_empty() {
            return Err(SweepError::NoValues);
        }
        if self.repeats == 0 {
            return Err(SweepError::NoRepeats);
        }
        let mut points = Vec::new();
        for &strategy in &self.strategies {
            for &value in &self.values {
                for repeat in 0..self.repeats {
                    let mut cfg = self.axis.apply(&self.base, value)?;
                    cfg.strategy = strategy;
                    cfg.seed = self.base.seed.wrapping_add(u64::from(repeat));
                    cfg.validate()?;
                    points.push((SweepKey { axis: self.axis, value, repeat }, cfg));
                }
            }
        }
        Ok(points)
    }
}

/// Runs every point, in parallel, returning rows in plan order.
pub fn sweep(plan: &SweepPlan) -> Result<Vec<SweepRow>, SweepError> {
    let points = plan.points()?;
    points
        .into_par_iter()
        .map(|(key, cfg)| Ok(SweepRow { key, summary: run_scenario(&cfg)? }))
        .collect()
}

/// Sweep table: `axis,value,repeat` followed by the summary columns.
pub fn write_sweep_csv<W: std::io::Write>(rows: &[SweepRow], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize((&row.key, &row.summary))?;
    }
    w.flush()?;
    Ok(())
}

/// Mean of `f` over rows matching `strategy` and `value`, skipping absent values.
pub fn mean_over_repeats(
    rows: &[SweepRow],
    strategy: Strategy,
    value: f64,
    f: impl Fn(&RunSummary) -> Option<f64>,
) -> Option<f64> {
    let vals: Vec<f64> = rows
        .iter()
        .filter(|r| r.summary.strategy == strategy && r.key.value == value)
        .filter_map(|r| f(&r.summary))
        .collect();
    (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
}
