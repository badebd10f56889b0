//! Run configuration.
//!
//! The on-disk format is flat `key = value` text, one entry per line, with
//! `#` comments. Keys are the field names of [`SimConfig`].

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Strategy {
    /// Edge first, cloud when the edge queue is full.
    #[serde(rename = "ecfirst")]
    EcFirst,
    /// A random free vehicle, cloud when none is free.
    #[serde(rename = "vccfirst")]
    VccFirst,
}

impl Strategy {
    pub const BOTH: [Strategy; 2] = [Strategy::EcFirst, Strategy::VccFirst];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::EcFirst => "ecfirst",
            Strategy::VccFirst => "vccfirst",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "ecfirst" => Ok(Strategy::EcFirst),
            "vccfirst" => Ok(Strategy::VccFirst),
            _ => Err(ConfigError::InvalidValue {
                key: "strategy".into(),
                value: s.into(),
                reason: "expected ecfirst or vccfirst".into(),
            }),
        }
    }
}

/// How users space their requests.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArrivalProcess {
    /// Fixed period after a random initial phase.
    Periodic,
    /// Exponential gaps with mean `request_period_s`.
    Poisson,
}

impl FromStr for ArrivalProcess {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "periodic" => Ok(ArrivalProcess::Periodic),
            "poisson" => Ok(ArrivalProcess::Poisson),
            _ => Err(ConfigError::InvalidValue {
                key: "arrival_process".into(),
                value: s.into(),
                reason: "expected periodic or poisson".into(),
            }),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("invalid value `{value}` for `{key}`: {reason}")]
    InvalidValue { key: String, value: String, reason: String },
    #[error("line {line}: expected `key = value`, got `{text}`")]
    Syntax { line: usize, text: String },
    #[error("`{key}` must be {requirement}")]
    Constraint { key: &'static str, requirement: &'static str },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n_users: u32,
    pub n_vehicles: u32,
    pub duration_s: f64,
    pub c_cc_mips: f64,
    pub c_ec_mips: f64,
    pub c_vcc_mips: f64,
    pub task_workload_mi: f64,
    pub task_size_bytes: u64,
    pub result_size_bytes: u64,
    /// Edge capacity in tasks, counting the one in service.
    pub edge_queue_max: u32,
    /// One-way core network latency.
    pub cn_latency_s: f64,
    pub request_period_s: f64,
    pub beacon_hz: f64,
    pub beacon_staleness_s: f64,
    pub beacon_size_bytes: u64,
    pub vehicle_speed_kmh: f64,
    pub coverage_radius_m: f64,
    pub ax_throughput_bps: f64,
    pub p_throughput_bps: f64,
    pub per_frame_overhead_s: f64,
    /// Waiting slots per vehicle, not counting the task in service.
    pub vehicle_queue_max: u32,
    pub strategy: Strategy,
    pub seed: u64,
    /// Send a task rejected by its vehicle on to the cloud instead of failing it.
    pub retry_to_cloud: bool,
    /// Completed tasks requested before this instant are left out of latency statistics.
    pub warmup_s: f64,
    pub arrival_process: ArrivalProcess,
    /// Start with every in-coverage vehicle registered as free, as if beaconing
    /// had been running before t = 0.
    pub prime_registry: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            n_users: 8,
            n_vehicles: 10,
            duration_s: 120.0,
            c_cc_mips: 2_356_230.0,
            c_ec_mips: 749_070.0,
            c_vcc_mips: 71_120.0,
            task_workload_mi: 500.0,
            task_size_bytes: 4000,
            result_size_bytes: 4000,
            edge_queue_max: 100,
            cn_latency_s: 0.035,
            request_period_s: 0.200,
            beacon_hz: 10.0,
            beacon_staleness_s: 0.500,
            beacon_size_bytes: 300,
            vehicle_speed_kmh: 13.1,
            coverage_radius_m: 100.0,
            ax_throughput_bps: 100e6,
            p_throughput_bps: 6e6,
            per_frame_overhead_s: 0.001,
            vehicle_queue_max: 1,
            strategy: Strategy::VccFirst,
            seed: 1,
            retry_to_cloud: false,
            warmup_s: 0.0,
            arrival_process: ArrivalProcess::Periodic,
            prime_registry: true,
        }
    }
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: fmt::Display,
{
    value.trim().parse::<T>().map_err(|e| ConfigError::InvalidValue {
        key: key.to_string(),
        value: value.to_string(),
        reason: e.to_string(),
    })
}

impl SimConfig {
    pub const KEYS: [&'static str; 27] = [
        "n_users",
        "n_vehicles",
        "duration_s",
        "c_cc_mips",
        "c_ec_mips",
        "c_vcc_mips",
        "task_workload_mi",
        "task_size_bytes",
        "result_size_bytes",
        "edge_queue_max",
        "cn_latency_s",
        "request_period_s",
        "beacon_hz",
        "beacon_staleness_s",
        "beacon_size_bytes",
        "vehicle_speed_kmh",
        "coverage_radius_m",
        "ax_throughput_bps",
        "p_throughput_bps",
        "per_frame_overhead_s",
        "vehicle_queue_max",
        "strategy",
        "seed",
        "retry_to_cloud",
        "warmup_s",
        "arrival_process",
        "prime_registry",
    ];

    /// Sets a single field from its textual form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let value = value.trim();
        match key {
            "n_users" => self.n_users = parse_value(key, value)?,
            "n_vehicles" => self.n_vehicles = parse_value(key, value)?,
            "duration_s" => self.duration_s = parse_value(key, value)?,
            "c_cc_mips" => self.c_cc_mips = parse_value(key, value)?,
            "c_ec_mips" => self.c_ec_mips = parse_value(key, value)?,
            "c_vcc_mips" => self.c_vcc_mips = parse_value(key, value)?,
            "task_workload_mi" => self.task_workload_mi = parse_value(key, value)?,
            "task_size_bytes" => self.task_size_bytes = parse_value(key, value)?,
            "result_size_bytes" => self.result_size_bytes = parse_value(key, value)?,
            "edge_queue_max" => self.edge_queue_max = parse_value(key, value)?,
            "cn_latency_s" => self.cn_latency_s = parse_value(key, value)?,
            "request_period_s" => self.request_period_s = parse_value(key, value)?,
            "beacon_hz" => self.beacon_hz = parse_value(key, value)?,
            "beacon_staleness_s" => self.beacon_staleness_s = parse_value(key, value)?,
            "beacon_size_bytes" => self.beacon_size_bytes = parse_value(key, value)?,
            "vehicle_speed_kmh" => self.vehicle_speed_kmh = parse_value(key, value)?,
            "coverage_radius_m" => self.coverage_radius_m = parse_value(key, value)?,
            "ax_throughput_bps" => self.ax_throughput_bps = parse_value(key, value)?,
            "p_throughput_bps" => self.p_throughput_bps = parse_value(key, value)?,
            "per_frame_overhead_s" => self.per_frame_overhead_s = parse_value(key, value)?,
            "vehicle_queue_max" => self.vehicle_queue_max = parse_value(key, value)?,
            "strategy" => self.strategy = value.parse()?,
            "seed" => self.seed = parse_value(key, value)?,
            "retry_to_cloud" => self.retry_to_cloud = parse_value(key, value)?,
            "warmup_s" => self.warmup_s = parse_value(key, value)?,
            "arrival_process" => self.arrival_process = value.parse()?,
            "prime_registry" => self.prime_registry = parse_value(key, value)?,
            _ => return Err(ConfigError::UnknownKey(key.to_string())),
        }
        Ok(())
    }

    /// Applies `key = value` lines on top of `self`.
    pub fn apply_kv(&mut self, text: &str) -> Result<(), ConfigError> {
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line: idx + 1,
                text: raw.to_string(),
            })?;
            self.set(key.trim(), value)?;
        }
        Ok(())
    }

    /// Parses a full config file over the defaults and validates it.
    pub fn from_kv(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = SimConfig::default();
        cfg.apply_kv(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Serializes to the `key = value` format, in [`SimConfig::KEYS`] order.
    pub fn to_kv(&self) -> String {
        let value = serde_json::to_value(self).expect("config serializes");
        let mut out = String::new();
        for key in Self::KEYS {
            let v = &value[key];
            let text = match v {
                serde_json::Value::String(s) => s.clone(),
                other => other.to_string(),
            };
            out.push_str(key);
            out.push_str(" = ");
            out.push_str(&text);
            out.push('\n');
        }
        out
    }

    pub fn vehicle_speed_mps(&self) -> f64 {
        self.vehicle_speed_kmh / 3.6
    }

    pub fn beacon_period_s(&self) -> f64 {
        1.0 / self.beacon_hz
    }

    /// Total request rate offered by all users, per second.
    pub fn aggregate_request_rate(&self) -> f64 {
        f64::from(self.n_users) / self.request_period_s
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        fn positive(v: f64) -> bool {
            v.is_finite() && v > 0.0
        }
        let checks: [(bool, &'static str, &'static str); 18] = [
            (self.n_users >= 1, "n_users", "at least 1"),
            (positive(self.duration_s), "duration_s", "> 0"),
            (positive(self.c_cc_mips), "c_cc_mips", "> 0"),
            (positive(self.c_ec_mips), "c_ec_mips", "> 0"),
            (positive(self.c_vcc_mips), "c_vcc_mips", "> 0"),
            (positive(self.task_workload_mi), "task_workload_mi", "> 0"),
            (self.task_size_bytes > 0, "task_size_bytes", "> 0"),
            (self.result_size_bytes > 0, "result_size_bytes", "> 0"),
            (self.cn_latency_s.is_finite() && self.cn_latency_s >= 0.0, "cn_latency_s", ">= 0"),
            (positive(self.request_period_s), "request_period_s", "> 0"),
            (positive(self.beacon_hz), "beacon_hz", "> 0"),
            (positive(self.beacon_staleness_s), "beacon_staleness_s", "> 0"),
            (self.beacon_size_bytes > 0, "beacon_size_bytes", "> 0"),
            (positive(self.vehicle_speed_kmh), "vehicle_speed_kmh", "> 0"),
            (positive(self.coverage_radius_m), "coverage_radius_m", "> 0"),
            (
                positive(self.ax_throughput_bps) && positive(self.p_throughput_bps),
                "ax_throughput_bps/p_throughput_bps",
                "> 0",
            ),
            (
                self.per_frame_overhead_s.is_finite() && self.per_frame_overhead_s >= 0.0,
                "per_frame_overhead_s",
                ">= 0",
            ),
            (
                self.warmup_s.is_finite() && self.warmup_s >= 0.0,
                "warmup_s",
                ">= 0",
            ),
        ];
        for (ok, key, requirement) in checks {
            if !ok {
                return Err(ConfigError::Constraint { key, requirement });
            }
        }
        if self.edge_queue_max == 0 {
            return Err(ConfigError::Constraint { key: "edge_queue_max", requirement: "at least 1" });
        }
        Ok(())
    }
}
