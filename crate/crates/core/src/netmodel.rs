//! Transmission-time models for the three network segments.
//!
//! Each wireless direction is a single FIFO server: a frame starts when the
//! medium frees up and occupies it for `bytes * 8 / throughput` plus a fixed
//! per-frame overhead standing in for MAC contention. The core network is a
//! constant one-way latency with no bandwidth term.

use serde::Serialize;

use crate::config::SimConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum MediumKind {
    /// User to AP.
    AxUp,
    /// AP to user.
    AxDown,
    /// AP to vehicle (requests) and vehicle beacons.
    PUp,
    /// Vehicle to AP (results).
    PDown,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrameJob {
    pub bytes: u64,
    pub submitted_at: f64,
    pub started_at: f64,
    pub delivered_at: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Medium {
    pub kind: MediumKind,
    pub throughput_bps: f64,
    pub per_frame_overhead_s: f64,
    busy_until: f64,
    frames: u64,
    busy_time: f64,
}

/// Uncontended time to push `bytes` through a link.
pub fn wireless_path_time(bytes: u64, throughput_bps: f64, per_frame_overhead_s: f64) -> f64 {
    (bytes as f64) * 8.0 / throughput_bps + per_frame_overhead_s
}

impl Medium {
    pub fn new(kind: MediumKind, throughput_bps: f64, per_frame_overhead_s: f64) -> Self {
        assert!(throughput_bps > 0.0 && per_frame_overhead_s >= 0.0);
        Medium {
            kind,
            throughput_bps,
            per_frame_overhead_s,
            busy_until: 0.0,
            frames: 0,
            busy_time: 0.0,
        }
    }

    pub fn busy_until(&self) -> f64 {
        self.busy_until
    }

    pub fn frames_sent(&self) -> u64 {
        self.frames
    }

    /// Total time the medium has been (or is committed to be) transmitting.
    pub fn busy_time(&self) -> f64 {
        self.busy_time
    }

    pub fn transfer_time(&self, bytes: u64) -> f64 {
        wireless_path_time(bytes, self.throughput_bps, self.per_frame_overhead_s)
    }

    /// Queues a frame behind everything already submitted.
    pub fn enqueue_frame(&mut self, bytes: u64, now: f64) -> FrameJob {
        debug_assert!(bytes > 0 && now >= 0.0);
        let start = now.max(self.busy_until);
        let service = self.transfer_time(bytes);
        let delivered = start + service;
        self.busy_until = delivered;
        self.frames += 1;
        self.busy_time += service;
        FrameJob { bytes, submitted_at: now, started_at: start, delivered_at: delivered }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoreNetwork {
    latency_s: f64,
}

impl CoreNetwork {
    pub fn new(latency_s: f64) -> Self {
        CoreNetwork { latency_s }
    }

    /// One-way AP to cloud latency.
    pub fn cn_delay(&self) -> f64 {
        self.latency_s
    }
}

/// The four wireless media plus the core network.
#[derive(Debug, Clone)]
pub struct Network {
    pub ax_up: Medium,
    pub ax_down: Medium,
    pub p_up: Medium,
    pub p_down: Medium,
    pub core: CoreNetwork,
}

impl Network {
    pub fn from_config(c: &SimConfig) -> Self {
        let o = c.per_frame_overhead_s;
        Network {
            ax_up: Medium::new(MediumKind::AxUp, c.ax_throughput_bps, o),
            ax_down: Medium::new(MediumKind::AxDown, c.ax_throughput_bps, o),
            p_up: Medium::new(MediumKind::PUp, c.p_throughput_bps, o),
            p_down: Medium::new(MediumKind::PDown, c.p_throughput_bps, o),
            core: CoreNetwork::new(c.cn_latency_s),
        }
    }
}
