//! End-user request generation.

use rand::Rng;
use rand_distr::{Distribution, Exp};

use crate::config::{ArrivalProcess, SimConfig};
use crate::mobility::{Point, GRID_EXTENT_M};
use crate::rng::{substream, Stream};
use crate::task::{Task, TaskId, UserId};

/// A stationary pedestrian issuing requests on a fixed cadence.
#[derive(Debug, Clone, PartialEq)]
pub struct UserAgent {
    pub user_id: UserId,
    pub position: Point,
    pub request_period_s: f64,
    /// Offset of the first request within `[0, period)`.
    pub phase_s: f64,
}

/// Places each user uniformly at random inside the coverage disk.
pub fn spawn_users(config: &SimConfig) -> Vec<UserAgent> {
    let center = Point::new(GRID_EXTENT_M / 2.0, GRID_EXTENT_M / 2.0);
    (0..config.n_users)
        .map(|u| {
            let mut place = substream(config.seed, Stream::Placement, u64::from(u));
            let r = config.coverage_radius_m * place.random::<f64>().sqrt();
            let theta = std::f64::consts::TAU * place.random::<f64>();
            let mut jitter = substream(config.seed, Stream::ArrivalJitter, u64::from(u));
            UserAgent {
                user_id: UserId(u),
                position: Point::new(center.x + r * theta.cos(), center.y + r * theta.sin()),
                request_period_s: config.request_period_s,
                phase_s: jitter.random::<f64>() * config.request_period_s,
            }
        })
        .collect()
}

/// Requests per user for a periodic run: floor(duration / period).
pub fn requests_per_user(duration_s: f64, period_s: f64) -> u64 {
    // Guard against 120 / 0.2 landing a hair under 600.
    let ratio = duration_s / period_s;
    let nearest = ratio.round();
    if (ratio - nearest).abs() <= 1e-9 * ratio.max(1.0) {
        nearest as u64
    } else {
        ratio.floor() as u64
    }
}

/// All tasks of the run, ordered by creation time (ties by user id).
pub fn generate(config: &SimConfig, users: &[UserAgent]) -> Vec<Task> {
    let mut emissions: Vec<(f64, UserId)> = Vec::new();
    for user in users {
        match config.arrival_process {
            ArrivalProcess::Periodic => {
                let n = requests_per_user(config.duration_s, user.request_period_s);
                for k in 0..n {
                    emissions.push((user.phase_s + k as f64 * user.request_period_s, user.user_id));
                }
            }
            ArrivalProcess::Poisson => {
                // Separate substream so periodic phases stay untouched.
                let mut rng = substream(config.seed, Stream::ArrivalJitter, (1 << 40) | u64::from(user.user_id.0));
                let gaps = Exp::new(1.0 / user.request_period_s).expect("positive rate");
                let mut t = gaps.sample(&mut rng);
                while t < config.duration_s {
                    emissions.push((t, user.user_id));
                    t += gaps.sample(&mut rng);
                }
            }
        }
    }
    emissions.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    emissions
        .into_iter()
        .enumerate()
        .map(|(i, (t, user))| Task {
            task_id: TaskId(i as u64),
            origin_user: user,
            workload_mi: config.task_workload_mi,
            input_size_bytes: config.task_size_bytes,
            result_size_bytes: config.result_size_bytes,
            created_at: t,
        })
        .collect()
}
