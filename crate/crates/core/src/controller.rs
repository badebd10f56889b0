//! The AP-side decision center: vehicle registry fed by beacons, destination
//! choice per strategy, and the per-task offloading record.

use std::collections::BTreeMap;
use std::fmt;

use rand::Rng;
use serde::Serialize;

use crate::compute::EdgeNode;
use crate::config::Strategy;
use crate::task::{TaskId, VehicleId};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BeaconRecord {
    pub vehicle_id: VehicleId,
    pub last_seen: f64,
    /// Vehicle's own view of whether it can take a task, at emission time.
    pub reported_free: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Destination {
    Cloud,
    Edge,
    Vehicle(VehicleId),
}

impl Destination {
    pub fn label(&self) -> &'static str {
        match self {
            Destination::Cloud => "cloud",
            Destination::Edge => "edge",
            Destination::Vehicle(_) => "vehicle",
        }
    }
}

impl fmt::Display for Destination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Destination::Vehicle(v) => write!(f, "vehicle:{v}"),
            other => f.write_str(other.label()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum FailureReason {
    /// Request or result found the vehicle outside AP coverage.
    VehicleLeftCoverage,
    /// The vehicle's queue was full when the request arrived.
    VehicleRejected,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Outcome {
    Completed { total: f64 },
    Failed(FailureReason),
}

impl Outcome {
    pub fn label(&self) -> &'static str {
        match self {
            Outcome::Completed { .. } => "completed",
            Outcome::Failed(FailureReason::VehicleLeftCoverage) => "failed_left_coverage",
            Outcome::Failed(FailureReason::VehicleRejected) => "failed_rejected",
        }
    }
}

/// Per-task timeline, split into the components of the end-to-end latency.
///
/// `t_up_leg2` / `t_down_leg2` hold the core-network legs for cloud tasks and
/// the AP-vehicle legs for vehicle tasks; both are zero for edge tasks.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OffloadRecord {
    pub task_id: TaskId,
    pub strategy: Strategy,
    pub destination: Destination,
    pub t_request: f64,
    pub t_up_ap: f64,
    pub t_up_leg2: f64,
    pub t_queue: f64,
    pub t_elab: f64,
    pub t_down_leg2: f64,
    pub t_down_ap: f64,
    pub outcome: Outcome,
}

impl OffloadRecord {
    pub fn new(task_id: TaskId, strategy: Strategy, destination: Destination, t_request: f64) -> Self {
        OffloadRecord {
            task_id,
            strategy,
            destination,
            t_request,
            t_up_ap: 0.0,
            t_up_leg2: 0.0,
            t_queue: 0.0,
            t_elab: 0.0,
            t_down_leg2: 0.0,
            t_down_ap: 0.0,
            outcome: Outcome::Failed(FailureReason::VehicleRejected),
        }
    }

    pub fn component_sum(&self) -> f64 {
        self.t_up_ap + self.t_up_leg2 + self.t_queue + self.t_elab + self.t_down_leg2 + self.t_down_ap
    }

    pub fn total(&self) -> Option<f64> {
        match self.outcome {
            Outcome::Completed { total } => Some(total),
            Outcome::Failed(_) => None,
        }
    }

    pub fn is_completed(&self) -> bool {
        matches!(self.outcome, Outcome::Completed { .. })
    }

    /// Wireless share of the latency: both AP legs plus the vehicle legs.
    pub fn wireless_time(&self) -> f64 {
        match self.destination {
            Destination::Vehicle(_) => self.t_up_ap + self.t_up_leg2 + self.t_down_leg2 + self.t_down_ap,
            _ => self.t_up_ap + self.t_down_ap,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Controller {
    strategy: Strategy,
    staleness_s: f64,
    registry: BTreeMap<VehicleId, BeaconRecord>,
}

impl Controller {
    pub fn new(strategy: Strategy, staleness_s: f64) -> Self {
        Controller { strategy, staleness_s, registry: BTreeMap::new() }
    }

    pub fn strategy(&self) -> Strategy {
        self.strategy
    }

    pub fn registry_len(&self) -> usize {
        self.registry.len()
    }

    pub fn record(&self, v: VehicleId) -> Option<&BeaconRecord> {
        self.registry.get(&v)
    }

    pub fn on_beacon(&mut self, vehicle_id: VehicleId, reported_free: bool, now: f64) {
        self.registry.insert(vehicle_id, BeaconRecord { vehicle_id, last_seen: now, reported_free });
    }

    /// Drops every vehicle not heard from in more than the staleness window.
    pub fn evict_stale(&mut self, now: f64) -> Vec<VehicleId> {
        let limit = self.staleness_s;
        let stale: Vec<VehicleId> = self
            .registry
            .values()
            .filter(|r| now - r.last_seen > limit)
            .map(|r| r.vehicle_id)
            .collect();
        for v in &stale {
            self.registry.remove(v);
        }
        stale
    }

    /// Registered vehicles whose last beacon reported them free, in id order.
    pub fn free_vehicles(&self) -> Vec<VehicleId> {
        self.registry.values().filter(|r| r.reported_free).map(|r| r.vehicle_id).collect()
    }

    pub fn max_staleness(&self, now: f64) -> Option<f64> {
        self.registry.values().map(|r| now - r.last_seen).reduce(f64::max)
    }

    /// Chooses where a task goes. Evicts stale registry entries first.
    pub fn decide<R: Rng + ?Sized>(&mut self, now: f64, edge: &mut EdgeNode, rng: &mut R) -> Destination {
        match self.strategy {
            Strategy::EcFirst => {
                if edge.is_full(now) {
                    Destination::Cloud
                } else {
                    Destination::Edge
                }
            }
            Strategy::VccFirst => {
                self.evict_stale(now);
                let free = self.free_vehicles();
                if free.is_empty() {
                    Destination::Cloud
                } else {
                    Destination::Vehicle(free[rng.random_range(0..free.len())])
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compute::EdgeNode;
    use crate::rng::{substream, Stream};
    use crate::task::{Task, UserId};

    fn edge_with(n: usize) -> EdgeNode {
        let mut e = EdgeNode::new(749_070.0, 100);
        let t = Task {
            task_id: TaskId(0),
            origin_user: UserId(0),
            workload_mi: 500.0,
            input_size_bytes: 1,
            result_size_bytes: 1,
            created_at: 0.0,
        };
        for _ in 0..n {
            e.submit(&t, 0.0).unwrap();
        }
        e
    }

    #[test]
    fn beacons_upsert() {
        let mut c = Controller::new(Strategy::VccFirst, 0.5);
        c.on_beacon(VehicleId(1), true, 0.1);
        assert_eq!(c.registry_len(), 1);
        c.on_beacon(VehicleId(1), true, 0.2);
        assert_eq!(c.registry_len(), 1);
        assert_eq!(c.record(VehicleId(1)).unwrap().last_seen, 0.2);
    }

    #[test]
    fn busy_vehicle_is_kept_but_not_selected() {
        let mut c = Controller::new(Strategy::VccFirst, 0.5);
        c.on_beacon(VehicleId(4), false, 0.0);
        assert_eq!(c.registry_len(), 1);
        assert!(c.free_vehicles().is_empty());
        let mut rng = substream(1, Stream::VehicleSelection, 0);
        assert_eq!(c.decide(0.1, &mut edge_with(0), &mut rng), Destination::Cloud);
    }

    #[test]
    fn eviction_boundary() {
        let mut c = Controller::new(Strategy::VccFirst, 0.5);
        c.on_beacon(VehicleId(1), true, 10.0 - 0.501);
        c.on_beacon(VehicleId(2), true, 10.0 - 0.100);
        c.on_beacon(VehicleId(3), true, 9.5);
        let removed = c.evict_stale(10.0);
        assert_eq!(removed, vec![VehicleId(1)]);
        assert!(c.record(VehicleId(2)).is_some());
        assert!(c.record(VehicleId(3)).is_some(), "exactly at the limit is retained");
        assert!(c.max_staleness(10.0).unwrap() <= 0.5);
    }

    #[test]
    fn ecfirst_prefers_edge_until_full() {
        let mut c = Controller::new(Strategy::EcFirst, 0.5);
        let mut rng = substream(1, Stream::VehicleSelection, 0);
        assert_eq!(c.decide(0.0, &mut edge_with(40), &mut rng), Destination::Edge);
        assert_eq!(c.decide(0.0, &mut edge_with(100), &mut rng), Destination::Cloud);
    }

    #[test]
    fn vccfirst_empty_registry_goes_to_cloud() {
        let mut c = Controller::new(Strategy::VccFirst, 0.5);
        let mut rng = substream(1, Stream::VehicleSelection, 0);
        assert_eq!(c.decide(0.0, &mut edge_with(0), &mut rng), Destination::Cloud);
    }

    #[test]
    fn vccfirst_choice_replays() {
        let pick = |seed| {
            let mut c = Controller::new(Strategy::VccFirst, 0.5);
            for v in [3, 7, 9] {
                c.on_beacon(VehicleId(v), true, 0.0);
            }
            let mut rng = substream(seed, Stream::VehicleSelection, 0);
            c.decide(0.1, &mut edge_with(0), &mut rng)
        };
        let first = pick(5);
        assert!(matches!(first, Destination::Vehicle(VehicleId(3 | 7 | 9))));
        for _ in 0..5 {
            assert_eq!(pick(5), first);
        }
    }

    #[test]
    fn vccfirst_selection_is_uniform() {
        let mut c = Controller::new(Strategy::VccFirst, 0.5);
        for v in [3, 7, 9] {
            c.on_beacon(VehicleId(v), true, 0.0);
        }
        let mut rng = substream(2024, Stream::VehicleSelection, 0);
        let n = 12_000;
        let mut counts = BTreeMap::new();
        let mut edge = edge_with(0);
        for _ in 0..n {
            *counts.entry(c.decide(0.0, &mut edge, &mut rng)).or_insert(0usize) += 1;
        }
        let p = 1.0 / 3.0;
        let sigma = (n as f64 * p * (1.0 - p)).sqrt();
        assert_eq!(counts.len(), 3);
        for (_, k) in counts {
            assert!((k as f64 - n as f64 * p).abs() <= 3.0 * sigma);
        }
    }

    #[test]
    fn component_sum_and_wireless_share() {
        let mut r = OffloadRecord::new(TaskId(1), Strategy::VccFirst, Destination::Vehicle(VehicleId(0)), 0.0);
        r.t_up_ap = 1.0;
        r.t_up_leg2 = 2.0;
        r.t_queue = 3.0;
        r.t_elab = 4.0;
        r.t_down_leg2 = 5.0;
        r.t_down_ap = 6.0;
        assert_eq!(r.component_sum(), 21.0);
        assert_eq!(r.wireless_time(), 14.0);
        r.destination = Destination::Cloud;
        assert_eq!(r.wireless_time(), 7.0);
    }
}
