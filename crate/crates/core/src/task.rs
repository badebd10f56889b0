use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TaskId(pub u64);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct UserId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct VehicleId(pub u32);

impl fmt::Display for TaskId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for VehicleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// An offloadable unit of work: workload, input size and result size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Task {
    pub task_id: TaskId,
    pub origin_user: UserId,
    /// Million instructions.
    pub workload_mi: f64,
    pub input_size_bytes: u64,
    pub result_size_bytes: u64,
    pub created_at: f64,
}

impl Task {
    pub fn is_valid(&self) -> bool {
        self.workload_mi > 0.0 && self.input_size_bytes > 0 && self.result_size_bytes > 0
    }
}

/// Application latency requirement tiers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LatencyClass {
    /// Extremely low latency, 16 ms.
    LlPlusPlus,
    /// Very low latency, 100 ms.
    LlPlus,
    /// Low latency, 500 ms.
    Ll,
}

impl LatencyClass {
    /// Tightest first.
    pub const ALL: [LatencyClass; 3] = [LatencyClass::LlPlusPlus, LatencyClass::LlPlus, LatencyClass::Ll];

    pub fn threshold_s(self) -> f64 {
        match self {
            LatencyClass::LlPlusPlus => 0.016,
            LatencyClass::LlPlus => 0.100,
            LatencyClass::Ll => 0.500,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            LatencyClass::LlPlusPlus => "LL++",
            LatencyClass::LlPlus => "LL+",
            LatencyClass::Ll => "LL",
        }
    }

    pub fn satisfied_by(self, total_s: f64) -> bool {
        total_s <= self.threshold_s()
    }
}

impl fmt::Display for LatencyClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}
