//! Named, independently seeded random streams.
//!
//! Every stream is a ChaCha8 generator keyed by the run seed and selected by
//! `(stream, index)` through the ChaCha stream counter, so drawing from one
//! stream never shifts another and the order in which streams are created
//! does not matter.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub type StreamRng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Stream {
    /// Initial placement and turn choices, one substream per vehicle.
    Mobility,
    /// Controller's random pick among free vehicles.
    VehicleSelection,
    /// User phase offsets (and Poisson gaps when enabled), one per user.
    ArrivalJitter,
    /// Beacon phase offsets, one per vehicle.
    BeaconPhase,
    /// Pedestrian positions, one per user.
    Placement,
}

impl Stream {
    pub const ALL: [Stream; 5] = [
        Stream::Mobility,
        Stream::VehicleSelection,
        Stream::ArrivalJitter,
        Stream::BeaconPhase,
        Stream::Placement,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stream::Mobility => "mobility",
            Stream::VehicleSelection => "vehicle-selection",
            Stream::ArrivalJitter => "arrival-jitter",
            Stream::BeaconPhase => "beacon-phase",
            Stream::Placement => "placement",
        }
    }

    fn id(self) -> u64 {
        match self {
            Stream::Mobility => 1,
            Stream::VehicleSelection => 2,
            Stream::ArrivalJitter => 3,
            Stream::BeaconPhase => 4,
            Stream::Placement => 5,
        }
    }
}

impl fmt::Display for Stream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("unknown random stream `{0}`")]
pub struct UnknownStream(pub String);

impl FromStr for Stream {
    type Err = UnknownStream;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Stream::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| UnknownStream(s.to_string()))
    }
}

/// Builds a generator for `(stream, index)` under `seed`.
pub fn substream(seed: u64, stream: Stream, index: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // 16 bits of stream id, 48 bits of index.
    rng.set_stream((stream.id() << 48) | (index & 0xFFFF_FFFF_FFFF));
    rng
}

/// A bank of the top-level named streams (substream index 0), for callers
/// that address streams by name.
#[derive(Debug, Clone)]
pub struct RngStreams {
    seed: u64,
    streams: BTreeMap<Stream, StreamRng>,
}

impl RngStreams {
    pub fn new(seed: u64) -> Self {
        let streams = Stream::ALL
            .into_iter()
            .map(|s| (s, substream(seed, s, 0)))
            .collect();
        RngStreams { seed, streams }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn get(&mut self, stream: Stream) -> &mut StreamRng {
        self.streams.get_mut(&stream).expect("all streams are created up front")
    }

    /// Next uniform value in `[0, 1)` from the named stream.
    pub fn draw(&mut self, name: &str) -> Result<f64, UnknownStream> {
        let stream: Stream = name.parse()?;
        Ok(self.get(stream).random::<f64>())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn first_n(seed: u64, name: &str, n: usize) -> Vec<f64> {
        let mut bank = RngStreams::new(seed);
        (0..n).map(|_| bank.draw(name).unwrap()).collect()
    }

    #[test]
    fn same_seed_same_sequence() {
        assert_eq!(first_n(7, "mobility", 20), first_n(7, "mobility", 20));
    }

    #[test]
    fn draws_on_one_stream_leave_others_alone() {
        let mut a = RngStreams::new(11);
        let mut b = RngStreams::new(11);
        for _ in 0..50 {
            a.draw("mobility").unwrap();
        }
        let xa: Vec<f64> = (0..10).map(|_| a.draw("vehicle-selection").unwrap()).collect();
        let xb: Vec<f64> = (0..10).map(|_| b.draw("vehicle-selection").unwrap()).collect();
        assert_eq!(xa, xb);
    }

    #[test]
    fn different_seeds_differ() {
        let a = first_n(42, "arrival-jitter", 100);
        let b = first_n(43, "arrival-jitter", 100);
        let same = a.iter().zip(&b).filter(|(x, y)| x == y).count();
        assert_eq!(same, 0);
    }

    #[test]
    fn unknown_stream_is_an_error() {
        let mut bank = RngStreams::new(1);
        assert_eq!(bank.draw("weather"), Err(UnknownStream("weather".into())));
    }

    #[test]
    fn substreams_are_independent_of_creation_order() {
        let a1 = substream(5, Stream::Mobility, 3).random::<u64>();
        let _ = substream(5, Stream::Mobility, 0).random::<u64>();
        let a2 = substream(5, Stream::Mobility, 3).random::<u64>();
        assert_eq!(a1, a2);
        assert_ne!(a1, substream(5, Stream::Mobility, 4).random::<u64>());
        assert_ne!(a1, substream(5, Stream::BeaconPhase, 3).random::<u64>());
    }
}
