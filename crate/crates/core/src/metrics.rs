//! Aggregation of offloading records into run-level figures.
//!
//! `RunSummary` field names are part of the output interface: they are the
//! JSON keys of a scenario report and the CSV columns of a sweep table.

use std::collections::HashSet;

use serde::Serialize;
use thiserror::Error;

use crate::config::{SimConfig, Strategy};
use crate::controller::{Destination, FailureReason, OffloadRecord, Outcome};
use crate::task::{LatencyClass, TaskId};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MetricsError {
    #[error("task {0} recorded twice")]
    DuplicateTask(TaskId),
}

#[derive(Debug, Default, Clone)]
pub struct MetricsLog {
    records: Vec<OffloadRecord>,
    seen: HashSet<TaskId>,
}

impl MetricsLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&mut self, r: OffloadRecord) -> Result<(), MetricsError> {
        if !self.seen.insert(r.task_id) {
            return Err(MetricsError::DuplicateTask(r.task_id));
        }
        self.records.push(r);
        Ok(())
    }

    pub fn records(&self) -> &[OffloadRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn into_records(self) -> Vec<OffloadRecord> {
        self.records
    }
}

/// Run-level counters the log alone cannot provide.
#[derive(Debug, Default, Clone, PartialEq)]
pub struct RunTally {
    pub issued: u64,
    pub in_flight: u64,
    pub dispatched_cloud: u64,
    pub dispatched_edge: u64,
    pub dispatched_vehicle: u64,
    /// Vehicles inside AP coverage, sampled at 1 Hz.
    pub coverage_samples: Vec<usize>,
}

impl RunTally {
    pub fn count_dispatch(&mut self, d: Destination) {
        match d {
            Destination::Cloud => self.dispatched_cloud += 1,
            Destination::Edge => self.dispatched_edge += 1,
            Destination::Vehicle(_) => self.dispatched_vehicle += 1,
        }
    }

    pub fn dispatched(&self) -> u64 {
        self.dispatched_cloud + self.dispatched_edge + self.dispatched_vehicle
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub strategy: Strategy,
    pub n_users: u32,
    pub n_vehicles: u32,
    pub seed: u64,
    pub issued: u64,
    pub completed: u64,
    pub failed: u64,
    pub in_flight: u64,
    pub failed_left_coverage: u64,
    pub failed_rejected: u64,
    pub dispatched_cloud: u64,
    pub dispatched_edge: u64,
    pub dispatched_vehicle: u64,
    pub completed_cloud: u64,
    pub completed_edge: u64,
    pub completed_vehicle: u64,
    /// Share of dispatched tasks sent to the cloud.
    pub cloud_fallback_fraction: f64,
    /// Failed over finalized (completed + failed) tasks.
    pub failure_rate: f64,
    pub mean_total_s: Option<f64>,
    pub median_total_s: Option<f64>,
    pub p95_total_s: Option<f64>,
    pub mean_t_up_ap_s: Option<f64>,
    pub mean_t_up_leg2_s: Option<f64>,
    pub mean_t_queue_s: Option<f64>,
    pub mean_t_elab_s: Option<f64>,
    pub mean_t_down_leg2_s: Option<f64>,
    pub mean_t_down_ap_s: Option<f64>,
    /// Mean of `t_up_ap + t_up_leg2 + t_down_leg2 + t_down_ap` on vehicle
    /// tasks and `t_up_ap + t_down_ap` otherwise.
    pub mean_wireless_s: Option<f64>,
    pub sat_ll_plus_plus: Option<f64>,
    pub sat_ll_plus: Option<f64>,
    pub sat_ll: Option<f64>,
    pub mean_vehicles_in_coverage: f64,
}

impl RunSummary {
    pub fn satisfaction(&self, class: LatencyClass) -> Option<f64> {
        match class {
            LatencyClass::LlPlusPlus => self.sat_ll_plus_plus,
            LatencyClass::LlPlus => self.sat_ll_plus,
            LatencyClass::Ll => self.sat_ll,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary serializes")
    }
}

/// Fraction of completed tasks meeting `class`; `None` if none completed.
pub fn class_satisfaction(summary: &RunSummary, class: LatencyClass) -> Option<f64> {
    summary.satisfaction(class)
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// Nearest-rank percentile of an ascending slice.
fn percentile(sorted: &[f64], q: f64) -> Option<f64> {
    if sorted.is_empty() {
        return None;
    }
    let rank = ((q * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
    Some(sorted[rank - 1])
}

fn fraction_within(totals: &[f64], threshold: f64) -> Option<f64> {
    if totals.is_empty() {
        return None;
    }
    Some(totals.iter().filter(|&&t| t <= threshold).count() as f64 / totals.len() as f64)
}

pub fn summarize(log: &MetricsLog, tally: &RunTally, config: &SimConfig) -> RunSummary {
    let records = log.records();
    let mut completed = 0u64;
    let mut failed_left = 0u64;
    let mut failed_rejected = 0u64;
    let mut completed_by = [0u64; 3];
    for r in records {
        match r.outcome {
            Outcome::Completed { .. } => {
                completed += 1;
                let slot = match r.destination {
                    Destination::Cloud => 0,
                    Destination::Edge => 1,
                    Destination::Vehicle(_) => 2,
                };
                completed_by[slot] += 1;
            }
            Outcome::Failed(FailureReason::VehicleLeftCoverage) => failed_left += 1,
            Outcome::Failed(FailureReason::VehicleRejected) => failed_rejected += 1,
        }
    }
    let failed = failed_left + failed_rejected;

    let measured: Vec<&OffloadRecord> = records
        .iter()
        .filter(|r| r.is_completed() && r.t_request >= config.warmup_s)
        .collect();
    let mut totals: Vec<f64> = measured.iter().filter_map(|r| r.total()).collect();
    totals.sort_by(f64::total_cmp);
    let component = |f: fn(&OffloadRecord) -> f64| mean(measured.iter().map(|r| f(r)));

    let dispatched = tally.dispatched();
    let finalized = completed + failed;
    RunSummary {
        strategy: config.strategy,
        n_users: config.n_users,
        n_vehicles: config.n_vehicles,
        seed: config.seed,
        issued: tally.issued,
        completed,
        failed,
        in_flight: tally.in_flight,
        failed_left_coverage: failed_left,
        failed_rejected,
        dispatched_cloud: tally.dispatched_cloud,
        dispatched_edge: tally.dispatched_edge,
        dispatched_vehicle: tally.dispatched_vehicle,
        completed_cloud: completed_by[0],
        completed_edge: completed_by[1],
        completed_vehicle: completed_by[2],
        cloud_fallback_fraction: if dispatched == 0 {
            0.0
        } else {
            tally.dispatched_cloud as f64 / dispatched as f64
        },
        failure_rate: if finalized == 0 { 0.0 } else { failed as f64 / finalized as f64 },
        mean_total_s: mean(totals.iter().copied()),
        median_total_s: percentile(&totals, 0.5),
        p95_total_s: percentile(&totals, 0.95),
        mean_t_up_ap_s: component(|r| r.t_up_ap),
        mean_t_up_leg2_s: component(|r| r.t_up_leg2),
        mean_t_queue_s: component(|r| r.t_queue),
        mean_t_elab_s: component(|r| r.t_elab),
        mean_t_down_leg2_s: component(|r| r.t_down_leg2),
        mean_t_down_ap_s: component(|r| r.t_down_ap),
        mean_wireless_s: component(OffloadRecord::wireless_time),
        sat_ll_plus_plus: fraction_within(&totals, LatencyClass::LlPlusPlus.threshold_s()),
        sat_ll_plus: fraction_within(&totals, LatencyClass::LlPlus.threshold_s()),
        sat_ll: fraction_within(&totals, LatencyClass::Ll.threshold_s()),
        mean_vehicles_in_coverage: mean(tally.coverage_samples.iter().map(|&n| n as f64)).unwrap_or(0.0),
    }
}

/// Writes summaries as CSV, one row each, header first.
pub fn write_summaries_csv<W: std::io::Write>(rows: &[RunSummary], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Per-task log, one CSV row per finalized record.
#[derive(Debug, Serialize)]
struct RecordRow<'a> {
    task_id: u64,
    strategy: &'a str,
    destination: String,
    t_request: f64,
    t_up_ap: f64,
    t_up_leg2: f64,
    t_queue: f64,
    t_elab: f64,
    t_down_leg2: f64,
    t_down_ap: f64,
    total: Option<f64>,
    outcome: &'static str,
}

pub fn write_records_csv<W: std::io::Write>(records: &[OffloadRecord], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(RecordRow {
            task_id: r.task_id.0,
            strategy: r.strategy.name(),
            destination: r.destination.to_string(),
            t_request: r.t_request,
            t_up_ap: r.t_up_ap,
            t_up_leg2: r.t_up_leg2,
            t_queue: r.t_queue,
            t_elab: r.t_elab,
            t_down_leg2: r.t_down_leg2,
            t_down_ap: r.t_down_ap,
            total: r.total(),
            outcome: r.outcome.label(),
        })?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::task::VehicleId;

    fn completed(id: u64, total: f64) -> OffloadRecord {
        let mut r = OffloadRecord::new(TaskId(id), Strategy::VccFirst, Destination::Vehicle(VehicleId(0)), 0.0);
        r.t_up_ap = total * 0.1;
        r.t_up_leg2 = total * 0.2;
        r.t_elab = total * 0.4;
        r.t_down_leg2 = total * 0.2;
        r.t_down_ap = total - r.t_up_ap - r.t_up_leg2 - r.t_elab - r.t_down_leg2;
        r.outcome = Outcome::Completed { total };
        r
    }

    fn failed(id: u64) -> OffloadRecord {
        let mut r = OffloadRecord::new(TaskId(id), Strategy::VccFirst, Destination::Vehicle(VehicleId(1)), 0.0);
        r.outcome = Outcome::Failed(FailureReason::VehicleRejected);
        r
    }

    fn tally_for(log: &MetricsLog) -> RunTally {
        RunTally {
            issued: log.len() as u64,
            dispatched_vehicle: log.len() as u64,
            ..RunTally::default()
        }
    }

    #[test]
    fn record_then_summarize() {
        let mut log = MetricsLog::new();
        log.record(completed(1, 0.05)).unwrap();
        let s = summarize(&log, &tally_for(&log), &SimConfig::default());
        assert_eq!(s.completed, 1);
        assert_eq!(s.issued, 1);
    }

    #[test]
    fn duplicate_task_rejected() {
        let mut log = MetricsLog::new();
        log.record(completed(1, 0.05)).unwrap();
        assert_eq!(log.record(completed(1, 0.07)), Err(MetricsError::DuplicateTask(TaskId(1))));
    }

    #[test]
    fn failed_tasks_count_only_toward_failure_rate() {
        let mut log = MetricsLog::new();
        log.record(completed(1, 0.05)).unwrap();
        log.record(failed(2)).unwrap();
        let s = summarize(&log, &tally_for(&log), &SimConfig::default());
        assert_eq!(s.mean_total_s, Some(0.05));
        assert_eq!(s.failure_rate, 0.5);
    }

    #[test]
    fn satisfaction_examples() {
        let mut log = MetricsLog::new();
        log.record(completed(1, 0.010)).unwrap();
        log.record(completed(2, 0.200)).unwrap();
        let s = summarize(&log, &tally_for(&log), &SimConfig::default());
        assert_eq!(class_satisfaction(&s, LatencyClass::LlPlus), Some(0.5));
        assert_eq!(class_satisfaction(&s, LatencyClass::Ll), Some(1.0));

        let mut log = MetricsLog::new();
        for i in 0..4 {
            log.record(completed(i, 0.050)).unwrap();
        }
        let s = summarize(&log, &tally_for(&log), &SimConfig::default());
        assert_eq!(s.sat_ll_plus, Some(1.0));
        assert_eq!(s.sat_ll_plus_plus, Some(0.0));
    }

    #[test]
    fn failure_rate_ten_percent() {
        let mut log = MetricsLog::new();
        for i in 0..4320 {
            log.record(completed(i, 0.02)).unwrap();
        }
        for i in 4320..4800 {
            log.record(failed(i)).unwrap();
        }
        let s = summarize(&log, &tally_for(&log), &SimConfig::default());
        assert_eq!(s.issued, 4800);
        assert!((s.failure_rate - 0.10).abs() < 1e-12);
        assert_eq!(s.issued, s.completed + s.failed + s.in_flight);
    }

    #[test]
    fn empty_log_leaves_means_absent() {
        let s = summarize(&MetricsLog::new(), &RunTally::default(), &SimConfig::default());
        assert_eq!(s.completed, 0);
        assert_eq!(s.mean_total_s, None);
        assert_eq!(class_satisfaction(&s, LatencyClass::Ll), None);
        assert!(s.to_json().contains("\"mean_total_s\": null"));
    }

    #[test]
    fn component_means_add_up_to_mean_total() {
        let mut log = MetricsLog::new();
        for (i, t) in [0.013, 0.2, 0.031, 0.47, 0.0999].into_iter().enumerate() {
            log.record(completed(i as u64, t)).unwrap();
        }
        let s = summarize(&log, &tally_for(&log), &SimConfig::default());
        let parts = [
            s.mean_t_up_ap_s,
            s.mean_t_up_leg2_s,
            s.mean_t_queue_s,
            s.mean_t_elab_s,
            s.mean_t_down_leg2_s,
            s.mean_t_down_ap_s,
        ];
        let sum: f64 = parts.iter().map(|p| p.unwrap()).sum();
        assert!((sum - s.mean_total_s.unwrap()).abs() < 1e-9);
        assert_eq!(s.median_total_s, Some(0.0999));
        assert_eq!(s.p95_total_s, Some(0.47));
    }

    #[test]
    fn warmup_excludes_early_requests() {
        let mut log = MetricsLog::new();
        log.record(completed(1, 0.3)).unwrap();
        let mut late = completed(2, 0.1);
        late.t_request = 5.0;
        log.record(late).unwrap();
        let cfg = SimConfig { warmup_s: 1.0, ..SimConfig::default() };
        let s = summarize(&log, &tally_for(&log), &cfg);
        assert_eq!(s.mean_total_s, Some(0.1));
        assert_eq!(s.completed, 2);
    }

    #[test]
    fn csv_outputs_have_fixed_headers() {
        let mut log = MetricsLog::new();
        log.record(completed(1, 0.05)).unwrap();
        let s = summarize(&log, &tally_for(&log), &SimConfig::default());
        let mut buf = Vec::new();
        write_summaries_csv(&[s], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("strategy,n_users,n_vehicles,seed,issued,completed,failed,in_flight,"));
        assert_eq!(text.lines().count(), 2);

        let mut buf = Vec::new();
        write_records_csv(log.records(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with(
            "task_id,strategy,destination,t_request,t_up_ap,t_up_leg2,t_queue,t_elab,t_down_leg2,t_down_ap,total,outcome\n"
        ));
    }
}
