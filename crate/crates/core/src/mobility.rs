//! Manhattan-grid vehicle mobility.
//!
//! A 200 m x 200 m square with two horizontal streets (y = 50, 150) and two
//! vertical streets (x = 50, 150). Each street carries one lane per direction;
//! lanes run on the street centerline. Vehicles move at constant speed, pick a
//! uniformly random continuation (straight, left, right) at every
//! intersection, and wrap around to the opposite edge of the grid on the same
//! street when they run off it.

use rand::Rng;
use serde::Serialize;

use crate::config::SimConfig;
use crate::rng::{substream, Stream, StreamRng};
use crate::task::VehicleId;

pub const GRID_EXTENT_M: f64 = 200.0;
pub const STREET_OFFSETS_M: [f64; 2] = [50.0, 150.0];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn distance(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    /// Shortest distance on the wrapped grid.
    pub fn toroidal_distance(self, other: Point) -> f64 {
        let wrap = |d: f64| {
            let d = d.abs() % GRID_EXTENT_M;
            d.min(GRID_EXTENT_M - d)
        };
        wrap(self.x - other.x).hypot(wrap(self.y - other.y))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Heading {
    East,
    West,
    North,
    South,
}

impl Heading {
    pub const ALL: [Heading; 4] = [Heading::East, Heading::West, Heading::North, Heading::South];

    fn left(self) -> Heading {
        match self {
            Heading::East => Heading::North,
            Heading::North => Heading::West,
            Heading::West => Heading::South,
            Heading::South => Heading::East,
        }
    }

    fn right(self) -> Heading {
        self.left().reverse()
    }

    fn reverse(self) -> Heading {
        match self {
            Heading::East => Heading::West,
            Heading::West => Heading::East,
            Heading::North => Heading::South,
            Heading::South => Heading::North,
        }
    }

    fn is_horizontal(self) -> bool {
        matches!(self, Heading::East | Heading::West)
    }

    fn sign(self) -> f64 {
        match self {
            Heading::East | Heading::North => 1.0,
            Heading::West | Heading::South => -1.0,
        }
    }
}

/// One directed lane: the street it runs on and its direction of travel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Lane {
    /// Fixed coordinate of the street (y for horizontal, x for vertical).
    pub street_offset_m: f64,
    pub heading: Heading,
}

impl Lane {
    pub fn endpoints(&self) -> (Point, Point) {
        let o = self.street_offset_m;
        let (a, b) = if self.heading.is_horizontal() {
            (Point::new(0.0, o), Point::new(GRID_EXTENT_M, o))
        } else {
            (Point::new(o, 0.0), Point::new(o, GRID_EXTENT_M))
        };
        if self.heading.sign() > 0.0 {
            (a, b)
        } else {
            (b, a)
        }
    }

    pub fn contains(&self, p: Point) -> bool {
        let (along, across) = if self.heading.is_horizontal() { (p.x, p.y) } else { (p.y, p.x) };
        across == self.street_offset_m && (0.0..=GRID_EXTENT_M).contains(&along)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoadNetwork {
    pub extent_m: f64,
    pub lanes: Vec<Lane>,
    pub ap: Point,
    pub coverage_radius_m: f64,
}

pub fn build_network(config: &SimConfig) -> RoadNetwork {
    let mut lanes = Vec::with_capacity(8);
    for heading in Heading::ALL {
        for offset in STREET_OFFSETS_M {
            lanes.push(Lane { street_offset_m: offset, heading });
        }
    }
    RoadNetwork {
        extent_m: GRID_EXTENT_M,
        lanes,
        ap: Point::new(GRID_EXTENT_M / 2.0, GRID_EXTENT_M / 2.0),
        coverage_radius_m: config.coverage_radius_m,
    }
}

impl RoadNetwork {
    pub fn street_count(&self) -> usize {
        let mut horizontal = 0;
        let mut vertical = 0;
        for lane in &self.lanes {
            if lane.heading == Heading::East {
                horizontal += 1;
            }
            if lane.heading == Heading::North {
                vertical += 1;
            }
        }
        horizontal + vertical
    }

    pub fn on_network(&self, p: Point) -> bool {
        self.lanes.iter().any(|l| l.contains(p))
    }

    pub fn covers(&self, p: Point) -> bool {
        in_coverage(p, self.ap, self.coverage_radius_m)
    }
}

/// True iff `pos` lies within `radius` of `ap`, boundary included.
pub fn in_coverage(pos: Point, ap: Point, radius: f64) -> bool {
    let dx = pos.x - ap.x;
    let dy = pos.y - ap.y;
    dx * dx + dy * dy <= radius * radius
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VehicleState {
    pub vehicle_id: VehicleId,
    pub position: Point,
    pub heading: Heading,
    pub speed_mps: f64,
}

enum Stop {
    Intersection,
    Edge,
}

impl VehicleState {
    pub fn lane(&self) -> Lane {
        let offset = if self.heading.is_horizontal() { self.position.y } else { self.position.x };
        Lane { street_offset_m: offset, heading: self.heading }
    }

    fn along(&self) -> f64 {
        if self.heading.is_horizontal() {
            self.position.x
        } else {
            self.position.y
        }
    }

    fn set_along(&mut self, v: f64) {
        if self.heading.is_horizontal() {
            self.position.x = v;
        } else {
            self.position.y = v;
        }
    }

    /// Coordinate along the lane of the next intersection or grid edge ahead.
    pub fn next_intersection(&self) -> f64 {
        self.next_stop().0
    }

    fn next_stop(&self) -> (f64, Stop) {
        let a = self.along();
        if self.heading.sign() > 0.0 {
            STREET_OFFSETS_M
                .into_iter()
                .find(|&o| o > a)
                .map(|o| (o, Stop::Intersection))
                .unwrap_or((GRID_EXTENT_M, Stop::Edge))
        } else {
            STREET_OFFSETS_M
                .into_iter()
                .rev()
                .find(|&o| o < a)
                .map(|o| (o, Stop::Intersection))
                .unwrap_or((0.0, Stop::Edge))
        }
    }

    fn distance_to_next_stop(&self) -> f64 {
        (self.next_stop().0 - self.along()).abs()
    }

    /// Moves to the next stop and applies the turn or wrap found there.
    fn cross_next_stop<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        let (target, stop) = self.next_stop();
        self.set_along(target);
        match stop {
            Stop::Edge => {
                let wrapped = if target == 0.0 { GRID_EXTENT_M } else { 0.0 };
                self.set_along(wrapped);
            }
            Stop::Intersection => {
                self.heading = match rng.random_range(0..3) {
                    0 => self.heading,
                    1 => self.heading.left(),
                    _ => self.heading.right(),
                };
            }
        }
    }

    fn move_by(&mut self, distance: f64) {
        let a = self.along() + self.heading.sign() * distance;
        self.set_along(a);
    }
}

/// Moves `state` along the network for `dt` seconds, drawing turns from `rng`.
pub fn advance<R: Rng + ?Sized>(mut state: VehicleState, dt: f64, rng: &mut R) -> VehicleState {
    debug_assert!(dt >= 0.0);
    let mut remaining = state.speed_mps * dt;
    while remaining > 0.0 {
        let d = state.distance_to_next_stop();
        if remaining < d {
            state.move_by(remaining);
            break;
        }
        remaining -= d;
        state.cross_next_stop(rng);
    }
    state
}

/// Draws a uniformly random on-network position and heading.
pub fn random_state<R: Rng + ?Sized>(vehicle_id: VehicleId, speed_mps: f64, rng: &mut R) -> VehicleState {
    let street = STREET_OFFSETS_M[rng.random_range(0..2)];
    let horizontal = rng.random_bool(0.5);
    let forward = rng.random_bool(0.5);
    let along = rng.random::<f64>() * GRID_EXTENT_M;
    let heading = match (horizontal, forward) {
        (true, true) => Heading::East,
        (true, false) => Heading::West,
        (false, true) => Heading::North,
        (false, false) => Heading::South,
    };
    let position = if horizontal { Point::new(along, street) } else { Point::new(street, along) };
    VehicleState { vehicle_id, position, heading, speed_mps }
}

/// A vehicle's path, evaluated lazily from its last waypoint.
///
/// Waypoints are the intersections and wrap points the vehicle has crossed.
/// Queries must be nondecreasing in time. Each track owns its own random
/// substream, so a vehicle's path does not depend on how often or in which
/// order positions are queried.
#[derive(Debug, Clone)]
pub struct VehicleTrack {
    waypoint: VehicleState,
    waypoint_time: f64,
    rng: StreamRng,
}

impl VehicleTrack {
    pub fn new(vehicle_id: VehicleId, speed_mps: f64, seed: u64) -> Self {
        let mut rng = substream(seed, Stream::Mobility, u64::from(vehicle_id.0));
        let waypoint = random_state(vehicle_id, speed_mps, &mut rng);
        VehicleTrack { waypoint, waypoint_time: 0.0, rng }
    }

    pub fn from_state(state: VehicleState, rng: StreamRng) -> Self {
        VehicleTrack { waypoint: state, waypoint_time: 0.0, rng }
    }

    pub fn state_at(&mut self, t: f64) -> VehicleState {
        debug_assert!(t >= self.waypoint_time, "track queried backwards in time");
        loop {
            let leg = self.waypoint.distance_to_next_stop() / self.waypoint.speed_mps;
            let reach = self.waypoint_time + leg;
            if t < reach {
                let mut s = self.waypoint;
                s.move_by((t - self.waypoint_time) * s.speed_mps);
                return s;
            }
            self.waypoint.cross_next_stop(&mut self.rng);
            self.waypoint_time = reach;
        }
    }

    pub fn position_at(&mut self, t: f64) -> Point {
        self.state_at(t).position
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRow {
    pub time_s: f64,
    pub vehicle_id: u32,
    pub x_m: f64,
    pub y_m: f64,
}

/// Samples every vehicle's position each `dt` seconds over `[0, duration]`.
pub fn mobility_trace(config: &SimConfig, dt: f64) -> Vec<TraceRow> {
    let speed = config.vehicle_speed_mps();
    let mut tracks: Vec<VehicleTrack> = (0..config.n_vehicles)
        .map(|v| VehicleTrack::new(VehicleId(v), speed, config.seed))
        .collect();
    let steps = (config.duration_s / dt).floor() as u64;
    let mut rows = Vec::with_capacity(tracks.len() * (steps as usize + 1));
    for k in 0..=steps {
        let t = k as f64 * dt;
        for (v, track) in tracks.iter_mut().enumerate() {
            let p = track.position_at(t);
            rows.push(TraceRow { time_s: t, vehicle_id: v as u32, x_m: p.x, y_m: p.y });
        }
    }
    rows
}

pub fn write_trace_csv<W: std::io::Write>(rows: &[TraceRow], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}
