//! Execution models for the three compute tiers.

use std::collections::VecDeque;

use serde::Serialize;
use thiserror::Error;

use crate::task::{Task, VehicleId};

/// Seconds to run `workload_mi` million instructions at `capacity_mips`.
pub fn elaboration_time(workload_mi: f64, capacity_mips: f64) -> f64 {
    workload_mi / capacity_mips
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Execution {
    pub arrived_at: f64,
    pub started_at: f64,
    pub completed_at: f64,
}

impl Execution {
    pub fn waiting(&self) -> f64 {
        self.started_at - self.arrived_at
    }

    pub fn elaboration(&self) -> f64 {
        self.completed_at - self.started_at
    }
}

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum Admission {
    #[error("edge queue is full")]
    QueueFull,
    #[error("vehicle rejected the task")]
    Rejected,
}

/// Infinitely parallel: every task starts on arrival.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CloudNode {
    pub capacity_mips: f64,
}

impl CloudNode {
    pub fn new(capacity_mips: f64) -> Self {
        CloudNode { capacity_mips }
    }

    pub fn submit(&self, task: &Task, now: f64) -> Execution {
        Execution {
            arrived_at: now,
            started_at: now,
            completed_at: now + elaboration_time(task.workload_mi, self.capacity_mips),
        }
    }
}

/// One processor serving a bounded FIFO. `limit` counts the task in service.
#[derive(Debug, Clone, PartialEq)]
struct FifoProcessor {
    capacity_mips: f64,
    limit: usize,
    busy_until: f64,
    completions: VecDeque<f64>,
}

impl FifoProcessor {
    fn new(capacity_mips: f64, limit: usize) -> Self {
        FifoProcessor { capacity_mips, limit, busy_until: 0.0, completions: VecDeque::new() }
    }

    fn purge(&mut self, now: f64) {
        while self.completions.front().is_some_and(|&c| c <= now) {
            self.completions.pop_front();
        }
    }

    fn occupancy(&mut self, now: f64) -> usize {
        self.purge(now);
        self.completions.len()
    }

    fn is_full(&mut self, now: f64) -> bool {
        self.occupancy(now) >= self.limit
    }

    fn submit(&mut self, workload_mi: f64, now: f64) -> Option<Execution> {
        if self.is_full(now) {
            return None;
        }
        let start = now.max(self.busy_until);
        let done = start + elaboration_time(workload_mi, self.capacity_mips);
        self.busy_until = done;
        self.completions.push_back(done);
        Some(Execution { arrived_at: now, started_at: start, completed_at: done })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeNode {
    inner: FifoProcessor,
}

impl EdgeNode {
    /// `queue_max` counts the task in service as well as the waiting ones.
    pub fn new(capacity_mips: f64, queue_max: u32) -> Self {
        EdgeNode { inner: FifoProcessor::new(capacity_mips, queue_max as usize) }
    }

    pub fn capacity_mips(&self) -> f64 {
        self.inner.capacity_mips
    }

    pub fn queue_max(&self) -> usize {
        self.inner.limit
    }

    /// Tasks held at `now`, including the one in service.
    pub fn occupancy(&mut self, now: f64) -> usize {
        self.inner.occupancy(now)
    }

    pub fn is_full(&mut self, now: f64) -> bool {
        self.inner.is_full(now)
    }

    pub fn busy_until(&self) -> f64 {
        self.inner.busy_until
    }

    pub fn submit(&mut self, task: &Task, now: f64) -> Result<Execution, Admission> {
        self.inner.submit(task.workload_mi, now).ok_or(Admission::QueueFull)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VehicleComputeNode {
    pub vehicle_id: VehicleId,
    inner: FifoProcessor,
}

impl VehicleComputeNode {
    /// `queue_max` is the number of waiting slots behind the task in service;
    /// 0 means a busy vehicle rejects everything.
    pub fn new(vehicle_id: VehicleId, capacity_mips: f64, queue_max: u32) -> Self {
        VehicleComputeNode {
            vehicle_id,
            inner: FifoProcessor::new(capacity_mips, queue_max as usize + 1),
        }
    }

    pub fn occupancy(&mut self, now: f64) -> usize {
        self.inner.occupancy(now)
    }

    pub fn is_idle(&mut self, now: f64) -> bool {
        self.occupancy(now) == 0
    }

    /// True while another task would be admitted.
    pub fn has_room(&mut self, now: f64) -> bool {
        self.occupancy(now) < self.inner.limit
    }

    pub fn submit(&mut self, task: &Task, now: f64) -> Result<Execution, Admission> {
        self.inner.submit(task.workload_mi, now).ok_or(Admission::Rejected)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::task::{TaskId, UserId};

    fn task(mi: f64) -> Task {
        Task {
            task_id: TaskId(0),
            origin_user: UserId(0),
            workload_mi: mi,
            input_size_bytes: 4000,
            result_size_bytes: 4000,
            created_at: 0.0,
        }
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn cloud_elaboration() {
        let cc = CloudNode::new(2_356_230.0);
        let e = cc.submit(&task(500.0), 0.0);
        assert!(rel(e.elaboration(), 500.0 / 2_356_230.0) < 1e-12);
        assert!((e.elaboration() * 1e3 - 0.2122).abs() < 1e-4);
        assert_eq!(cc.submit(&task(2_356_230.0), 4.0).completed_at, 5.0);
    }

    #[test]
    fn cloud_has_no_queueing() {
        let cc = CloudNode::new(2_356_230.0);
        let a = cc.submit(&task(500.0), 1.0);
        let b = cc.submit(&task(500.0), 1.0);
        assert_eq!(a.completed_at, b.completed_at);
        assert_eq!(b.waiting(), 0.0);
    }

    #[test]
    fn edge_fifo_tandem() {
        let mut ec = EdgeNode::new(749_070.0, 100);
        let a = ec.submit(&task(500.0), 0.0).unwrap();
        assert_eq!(a.waiting(), 0.0);
        assert!((a.elaboration() * 1e3 - 0.6675).abs() < 1e-4);
        let b = ec.submit(&task(500.0), 0.0).unwrap();
        assert!((b.completed_at * 1e3 - 1.3350).abs() < 1e-4);
        assert!((b.waiting() - a.elaboration()).abs() < 1e-15);
    }

    #[test]
    fn edge_rejects_at_queue_max() {
        let mut ec = EdgeNode::new(749_070.0, 100);
        for _ in 0..100 {
            ec.submit(&task(500.0), 0.0).unwrap();
        }
        assert_eq!(ec.occupancy(0.0), 100);
        assert_eq!(ec.submit(&task(500.0), 0.0), Err(Admission::QueueFull));
        // One departure frees a slot.
        let first_done = 500.0 / 749_070.0;
        assert!(ec.submit(&task(500.0), first_done).is_ok());
    }

    #[test]
    fn vehicle_elaboration_and_bound() {
        let mut v = VehicleComputeNode::new(VehicleId(3), 71_120.0, 1);
        let a = v.submit(&task(500.0), 0.0).unwrap();
        assert!((a.elaboration() * 1e3 - 7.0304).abs() < 1e-4);
        // One waiting slot behind the task in service.
        let b = v.submit(&task(500.0), 0.001).unwrap();
        assert_eq!(b.started_at, a.completed_at);
        assert_eq!(v.submit(&task(500.0), 0.002), Err(Admission::Rejected));

        let mut strict = VehicleComputeNode::new(VehicleId(4), 71_120.0, 0);
        strict.submit(&task(71_120.0), 0.0).unwrap();
        assert_eq!(strict.submit(&task(1.0), 0.5), Err(Admission::Rejected));
        assert!(strict.is_idle(1.0));
    }

    #[test]
    fn room_counts_the_waiting_slot() {
        let mut v = VehicleComputeNode::new(VehicleId(1), 71_120.0, 1);
        assert!(v.has_room(0.0));
        v.submit(&task(500.0), 0.0).unwrap();
        assert!(v.has_room(0.0) && !v.is_idle(0.0));
        v.submit(&task(500.0), 0.0).unwrap();
        assert!(!v.has_room(0.0));
        assert!(v.has_room(500.0 / 71_120.0));
    }

    #[test]
    fn capacity_ordering() {
        let t = task(500.0);
        let cc = CloudNode::new(2_356_230.0).submit(&t, 0.0).elaboration();
        let ec = EdgeNode::new(749_070.0, 100).submit(&t, 0.0).unwrap().elaboration();
        let vc = VehicleComputeNode::new(VehicleId(0), 71_120.0, 1).submit(&t, 0.0).unwrap().elaboration();
        assert!(cc < ec && ec < vc);
    }
}
