//! One seeded run: users, vehicles, AP controller, compute tiers and media,
//! driven by the event scheduler.
//!
//! Task pipeline:
//!
//! ```text
//! user --ax_up--> AP --decide--> cloud   (cn, W/C_CC, cn)      --ax_down--> user
//!                            \-> edge    (queue, W/C_EC)       --ax_down--> user
//!                             \-> vehicle (p_up, queue, W/C_VCC, p_down) --ax_down--> user
//! ```
//!
//! Every stage boundary is an event, so frames enter each shared medium in
//! simulated-time order.

use std::collections::BTreeMap;

use crate::compute::{CloudNode, EdgeNode, VehicleComputeNode};
use crate::config::{ConfigError, SimConfig, Strategy};
use crate::controller::{Controller, Destination, FailureReason, OffloadRecord, Outcome};
use crate::engine::Scheduler;
use crate::metrics::{summarize, MetricsLog, RunSummary, RunTally};
use crate::mobility::{build_network, RoadNetwork, VehicleTrack};
use crate::netmodel::Network;
use crate::rng::{substream, Stream, StreamRng};
use crate::task::{Task, TaskId, VehicleId};
use crate::workload::{generate, spawn_users, UserAgent};

use rand::Rng;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Ev {
    Issue(TaskId),
    AtAp(TaskId),
    AtVehicle(TaskId, VehicleId),
    VehicleDone(TaskId, VehicleId),
    /// Result is back at the AP and goes onto ax_down.
    ReturnToAp(TaskId),
    Delivered(TaskId),
    BeaconEmit(VehicleId),
    BeaconArrive(VehicleId, bool),
    CoverageSample,
}

struct Vehicle {
    track: VehicleTrack,
    node: VehicleComputeNode,
}

struct InFlight {
    record: OffloadRecord,
    /// Time of the last stage boundary.
    mark: f64,
}

/// Output of a complete run.
#[derive(Debug, Clone)]
pub struct ScenarioOutput {
    pub config: SimConfig,
    pub summary: RunSummary,
    pub records: Vec<OffloadRecord>,
}

pub struct Simulation {
    config: SimConfig,
    road: RoadNetwork,
    net: Network,
    cloud: CloudNode,
    edge: EdgeNode,
    vehicles: Vec<Vehicle>,
    users: Vec<UserAgent>,
    controller: Controller,
    selection_rng: StreamRng,
    sched: Scheduler<Ev>,
    tasks: BTreeMap<TaskId, Task>,
    in_flight: BTreeMap<TaskId, InFlight>,
    log: MetricsLog,
    tally: RunTally,
}

impl Simulation {
    /// Builds the world and schedules the generated workload.
    pub fn new(config: SimConfig) -> Result<Self, ConfigError> {
        let mut sim = Self::empty(config)?;
        let tasks = generate(&sim.config, &sim.users);
        for task in tasks {
            sim.inject_task(task);
        }
        Ok(sim)
    }

    /// Builds the world with no user requests scheduled.
    pub fn empty(config: SimConfig) -> Result<Self, ConfigError> {
        config.validate()?;
        let road = build_network(&config);
        let speed = config.vehicle_speed_mps();
        let mut vehicles: Vec<Vehicle> = (0..config.n_vehicles)
            .map(|v| Vehicle {
                track: VehicleTrack::new(VehicleId(v), speed, config.seed),
                node: VehicleComputeNode::new(VehicleId(v), config.c_vcc_mips, config.vehicle_queue_max),
            })
            .collect();
        let mut controller = Controller::new(config.strategy, config.beacon_staleness_s);
        let mut sched = Scheduler::new();

        if config.strategy == Strategy::VccFirst {
            for (i, v) in vehicles.iter_mut().enumerate() {
                let id = VehicleId(i as u32);
                if config.prime_registry && road.covers(v.track.position_at(0.0)) {
                    controller.on_beacon(id, true, 0.0);
                }
                let mut phase_rng = substream(config.seed, Stream::BeaconPhase, i as u64);
                let phase = phase_rng.random::<f64>() * config.beacon_period_s();
                if phase < config.duration_s {
                    sched.schedule(phase, Ev::BeaconEmit(id)).expect("phase >= 0");
                }
            }
        }
        let mut k = 0u64;
        while (k as f64) < config.duration_s {
            sched.schedule(k as f64, Ev::CoverageSample).expect("sample time >= 0");
            k += 1;
        }

        Ok(Simulation {
            net: Network::from_config(&config),
            cloud: CloudNode::new(config.c_cc_mips),
            edge: EdgeNode::new(config.c_ec_mips, config.edge_queue_max),
            users: spawn_users(&config),
            selection_rng: substream(config.seed, Stream::VehicleSelection, 0),
            road,
            vehicles,
            controller,
            sched,
            tasks: BTreeMap::new(),
            in_flight: BTreeMap::new(),
            log: MetricsLog::new(),
            tally: RunTally::default(),
            config,
        })
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn users(&self) -> &[UserAgent] {
        &self.users
    }

    pub fn road(&self) -> &RoadNetwork {
        &self.road
    }

    pub fn controller(&self) -> &Controller {
        &self.controller
    }

    pub fn now(&self) -> f64 {
        self.sched.now()
    }

    /// Schedules a request at `task.created_at`.
    pub fn inject_task(&mut self, task: Task) {
        assert!(task.is_valid(), "task {} has a non-positive field", task.task_id);
        let id = task.task_id;
        let at = task.created_at;
        assert!(self.tasks.insert(id, task).is_none(), "task id {id} reused");
        self.sched.schedule(at, Ev::Issue(id)).expect("task created in the past");
    }

    /// Processes every event up to `until`.
    pub fn run_until(&mut self, until: f64) {
        while let Some(ev) = self.sched.pop_until(until) {
            self.handle(ev.time, ev.kind);
        }
        self.sched.advance_to(until).expect("run_until moves forward");
    }

    /// Runs to the configured horizon and summarizes.
    pub fn run(mut self) -> ScenarioOutput {
        let end = self.config.duration_s;
        if self.sched.now() < end {
            self.run_until(end);
        }
        self.finish()
    }

    pub fn finish(mut self) -> ScenarioOutput {
        self.tally.in_flight = self.in_flight.len() as u64;
        let summary = summarize(&self.log, &self.tally, &self.config);
        ScenarioOutput { config: self.config, summary, records: self.log.into_records() }
    }

    fn vehicle_covered(&mut self, v: VehicleId, t: f64) -> bool {
        let p = self.vehicles[v.0 as usize].track.position_at(t);
        self.road.covers(p)
    }

    fn schedule(&mut self, at: f64, ev: Ev) {
        self.sched.schedule(at, ev).expect("events are never scheduled in the past");
    }

    fn fail(&mut self, id: TaskId, reason: FailureReason) {
        let mut f = self.in_flight.remove(&id).expect("failing an unknown task");
        f.record.outcome = Outcome::Failed(reason);
        self.log.record(f.record).expect("each task finalizes once");
    }

    fn handle(&mut self, now: f64, ev: Ev) {
        match ev {
            Ev::Issue(id) => {
                self.tally.issued += 1;
                let bytes = self.tasks[&id].input_size_bytes;
                let record = OffloadRecord::new(id, self.config.strategy, Destination::Cloud, now);
                let job = self.net.ax_up.enqueue_frame(bytes, now);
                self.in_flight.insert(id, InFlight { record, mark: now });
                self.schedule(job.delivered_at, Ev::AtAp(id));
            }
            Ev::AtAp(id) => {
                let dest = self.controller.decide(now, &mut self.edge, &mut self.selection_rng);
                self.tally.count_dispatch(dest);
                let f = self.in_flight.get_mut(&id).expect("task in flight");
                f.record.t_up_ap = now - f.mark;
                f.record.destination = dest;
                f.mark = now;
                match dest {
                    Destination::Cloud => self.dispatch_cloud(id, now),
                    Destination::Edge => {
                        let exec = self.edge.submit(&self.tasks[&id], now).expect("decide saw a free slot");
                        let f = self.in_flight.get_mut(&id).expect("task in flight");
                        f.record.t_queue = exec.waiting();
                        f.record.t_elab = exec.elaboration();
                        f.mark = exec.completed_at;
                        self.schedule(exec.completed_at, Ev::ReturnToAp(id));
                    }
                    Destination::Vehicle(v) => {
                        let job = self.net.p_up.enqueue_frame(self.tasks[&id].input_size_bytes, now);
                        self.schedule(job.delivered_at, Ev::AtVehicle(id, v));
                    }
                }
            }
            Ev::AtVehicle(id, v) => {
                {
                    let f = self.in_flight.get_mut(&id).expect("task in flight");
                    f.record.t_up_leg2 = now - f.mark;
                    f.mark = now;
                }
                if !self.vehicle_covered(v, now) {
                    self.fail(id, FailureReason::VehicleLeftCoverage);
                    return;
                }
                match self.vehicles[v.0 as usize].node.submit(&self.tasks[&id], now) {
                    Ok(exec) => {
                        let f = self.in_flight.get_mut(&id).expect("task in flight");
                        f.record.t_queue = exec.waiting();
                        f.record.t_elab = exec.elaboration();
                        f.mark = exec.completed_at;
                        self.schedule(exec.completed_at, Ev::VehicleDone(id, v));
                    }
                    Err(_) if self.config.retry_to_cloud => {
                        // The wasted AP-vehicle hop stays in the uplink leg.
                        let f = self.in_flight.get_mut(&id).expect("task in flight");
                        f.record.destination = Destination::Cloud;
                        let wasted = f.record.t_up_leg2;
                        self.dispatch_cloud(id, now);
                        let f = self.in_flight.get_mut(&id).expect("task in flight");
                        f.record.t_up_leg2 += wasted;
                    }
                    Err(_) => self.fail(id, FailureReason::VehicleRejected),
                }
            }
            Ev::VehicleDone(id, v) => {
                if !self.vehicle_covered(v, now) {
                    self.fail(id, FailureReason::VehicleLeftCoverage);
                    return;
                }
                let job = self.net.p_down.enqueue_frame(self.tasks[&id].result_size_bytes, now);
                self.schedule(job.delivered_at, Ev::ReturnToAp(id));
            }
            Ev::ReturnToAp(id) => {
                let f = self.in_flight.get_mut(&id).expect("task in flight");
                match f.record.destination {
                    Destination::Vehicle(_) => f.record.t_down_leg2 = now - f.mark,
                    Destination::Cloud => f.record.t_down_leg2 = self.config.cn_latency_s,
                    Destination::Edge => {}
                }
                f.mark = now;
                let job = self.net.ax_down.enqueue_frame(self.tasks[&id].result_size_bytes, now);
                self.schedule(job.delivered_at, Ev::Delivered(id));
            }
            Ev::Delivered(id) => {
                let mut f = self.in_flight.remove(&id).expect("task in flight");
                f.record.t_down_ap = now - f.mark;
                f.record.outcome = Outcome::Completed { total: now - f.record.t_request };
                self.log.record(f.record).expect("each task finalizes once");
            }
            Ev::BeaconEmit(v) => {
                let next = now + self.config.beacon_period_s();
                if next < self.config.duration_s {
                    self.schedule(next, Ev::BeaconEmit(v));
                }
                if self.vehicle_covered(v, now) {
                    let free = self.vehicles[v.0 as usize].node.has_room(now);
                    let job = self.net.p_up.enqueue_frame(self.config.beacon_size_bytes, now);
                    self.schedule(job.delivered_at, Ev::BeaconArrive(v, free));
                }
            }
            Ev::BeaconArrive(v, free) => self.controller.on_beacon(v, free, now),
            Ev::CoverageSample => {
                let mut n = 0;
                for v in &mut self.vehicles {
                    if self.road.covers(v.track.position_at(now)) {
                        n += 1;
                    }
                }
                self.tally.coverage_samples.push(n);
            }
        }
    }

    /// Sends a task from the AP to the cloud and schedules its return.
    fn dispatch_cloud(&mut self, id: TaskId, now: f64) {
        let cn = self.net.core.cn_delay();
        let exec = self.cloud.submit(&self.tasks[&id], now + cn);
        let f = self.in_flight.get_mut(&id).expect("task in flight");
        f.record.t_up_leg2 = cn;
        f.record.t_queue = 0.0;
        f.record.t_elab = exec.elaboration();
        f.mark = exec.completed_at;
        self.schedule(exec.completed_at + cn, Ev::ReturnToAp(id));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conservation_on_short_run() {
        let cfg = SimConfig { duration_s: 5.0, ..SimConfig::default() };
        let out = Simulation::new(cfg).unwrap().run();
        let s = &out.summary;
        assert_eq!(s.issued, 8 * 25);
        assert_eq!(s.issued, s.completed + s.failed + s.in_flight);
    }

    #[test]
    fn ecfirst_keeps_vehicles_idle() {
        let cfg = SimConfig { duration_s: 5.0, strategy: Strategy::EcFirst, ..SimConfig::default() };
        let out = Simulation::new(cfg).unwrap().run();
        assert_eq!(out.summary.dispatched_vehicle, 0);
        assert!(out.summary.dispatched_edge > 0);
    }

    #[test]
    fn invalid_config_is_rejected_up_front() {
        let cfg = SimConfig { n_users: 0, ..SimConfig::default() };
        assert!(Simulation::new(cfg).is_err());
    }
}
