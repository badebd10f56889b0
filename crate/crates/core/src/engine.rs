//! Deterministic discrete-event scheduler.
//!
//! Events are kept in a binary heap keyed by `(time, sequence)`. The sequence
//! number is assigned at insertion, so events scheduled for the same instant
//! come out in the order they were scheduled.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use thiserror::Error;

/// Simulated time in seconds.
pub type SimTime = f64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EngineError {
    #[error("cannot schedule event at t={at} before current time t={now}")]
    ScheduleInPast { at: SimTime, now: SimTime },
    #[error("event time must be a finite number, got {0}")]
    NonFiniteTime(SimTime),
    #[error("run_until({until}) is earlier than current time t={now}")]
    RunBackwards { until: SimTime, now: SimTime },
}

/// An event popped from the queue.
#[derive(Debug, Clone, PartialEq)]
pub struct Event<K> {
    pub time: SimTime,
    pub sequence: u64,
    pub kind: K,
}

struct Entry<K>(Event<K>);

impl<K> PartialEq for Entry<K> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<K> Eq for Entry<K> {}

impl<K> PartialOrd for Entry<K> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<K> Ord for Entry<K> {
    // Reversed: BinaryHeap is a max-heap and we want the earliest event first.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .0
            .time
            .total_cmp(&self.0.time)
            .then_with(|| other.0.sequence.cmp(&self.0.sequence))
    }
}

pub struct Scheduler<K> {
    now: SimTime,
    next_sequence: u64,
    queue: BinaryHeap<Entry<K>>,
    processed: u64,
}

impl<K> Default for Scheduler<K> {
    fn default() -> Self {
        Self::new()
    }
}

impl<K> Scheduler<K> {
    pub fn new() -> Self {
        Scheduler {
            now: 0.0,
            next_sequence: 0,
            queue: BinaryHeap::new(),
            processed: 0,
        }
    }

    pub fn now(&self) -> SimTime {
        self.now
    }

    pub fn pending(&self) -> usize {
        self.queue.len()
    }

    /// Number of events handed out so far.
    pub fn processed(&self) -> u64 {
        self.processed
    }

    /// Enqueues `kind` at absolute time `time` and returns its sequence number.
    pub fn schedule(&mut self, time: SimTime, kind: K) -> Result<u64, EngineError> {
        if !time.is_finite() {
            return Err(EngineError::NonFiniteTime(time));
        }
        if time < self.now {
            return Err(EngineError::ScheduleInPast { at: time, now: self.now });
        }
        let sequence = self.next_sequence;
        self.next_sequence += 1;
        self.queue.push(Entry(Event { time, sequence, kind }));
        Ok(sequence)
    }

    /// Schedules `kind` at `now + delay`.
    pub fn schedule_in(&mut self, delay: SimTime, kind: K) -> Result<u64, EngineError> {
        self.schedule(self.now + delay, kind)
    }

    /// Pops the next event if its time is `<= until`, advancing the clock to it.
    pub fn pop_until(&mut self, until: SimTime) -> Option<Event<K>> {
        match self.queue.peek() {
            Some(Entry(ev)) if ev.time <= until => {
                let Entry(ev) = self.queue.pop().expect("peeked entry");
                self.now = ev.time;
                self.processed += 1;
                Some(ev)
            }
            _ => None,
        }
    }

    /// Moves the clock forward without processing anything.
    pub fn advance_to(&mut self, until: SimTime) -> Result<(), EngineError> {
        if until < self.now {
            return Err(EngineError::RunBackwards { until, now: self.now });
        }
        if let Some(Entry(ev)) = self.queue.peek() {
            debug_assert!(ev.time > until, "advance_to would skip pending events");
        }
        self.now = until;
        Ok(())
    }

    /// Delivers every event with `time <= until` to `handler`, then sets the
    /// clock to `until`. The handler may schedule further events.
    pub fn run_until<E, F>(&mut self, until: SimTime, mut handler: F) -> Result<(), E>
    where
        F: FnMut(&mut Self, Event<K>) -> Result<(), E>,
        E: From<EngineError>,
    {
        if until < self.now {
            return Err(EngineError::RunBackwards { until, now: self.now }.into());
        }
        while let Some(ev) = self.pop_until(until) {
            handler(self, ev)?;
        }
        self.now = until;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn drain(s: &mut Scheduler<&'static str>, until: SimTime) -> Vec<(SimTime, &'static str)> {
        let mut out = Vec::new();
        s.run_until::<EngineError, _>(until, |_, ev| {
            out.push((ev.time, ev.kind));
            Ok(())
        })
        .unwrap();
        out
    }

    #[test]
    fn pops_in_time_order() {
        let mut s = Scheduler::new();
        s.schedule(2.0, "b").unwrap();
        s.schedule(1.0, "a").unwrap();
        assert_eq!(drain(&mut s, 10.0), vec![(1.0, "a"), (2.0, "b")]);
    }

    #[test]
    fn equal_times_keep_insertion_order() {
        let mut s = Scheduler::new();
        s.schedule(5.0, "A").unwrap();
        s.schedule(5.0, "B").unwrap();
        assert_eq!(drain(&mut s, 5.0), vec![(5.0, "A"), (5.0, "B")]);

        let mut s = Scheduler::new();
        for k in ["x", "y", "z"] {
            s.schedule(1.0, k).unwrap();
        }
        assert_eq!(drain(&mut s, 2.0), vec![(1.0, "x"), (1.0, "y"), (1.0, "z")]);
        assert_eq!(s.now(), 2.0);
    }

    #[test]
    fn scheduling_in_the_past_fails() {
        let mut s: Scheduler<&str> = Scheduler::new();
        s.schedule(3.0, "a").unwrap();
        drain(&mut s, 3.0);
        let err = s.schedule(2.0, "late").unwrap_err();
        assert_eq!(err, EngineError::ScheduleInPast { at: 2.0, now: 3.0 });
        assert!(matches!(
            s.schedule(f64::NAN, "nan"),
            Err(EngineError::NonFiniteTime(_))
        ));
    }

    #[test]
    fn run_until_stops_at_horizon() {
        let mut s = Scheduler::new();
        for (t, k) in [(1.0, "one"), (3.0, "three"), (7.0, "seven")] {
            s.schedule(t, k).unwrap();
        }
        assert_eq!(drain(&mut s, 5.0), vec![(1.0, "one"), (3.0, "three")]);
        assert_eq!(s.now(), 5.0);
        assert_eq!(s.pending(), 1);
    }

    #[test]
    fn run_until_now_on_empty_queue_is_noop() {
        let mut s: Scheduler<&str> = Scheduler::new();
        assert!(drain(&mut s, 0.0).is_empty());
        assert_eq!(s.now(), 0.0);
        assert!(s
            .run_until::<EngineError, _>(-1.0, |_, _| Ok(()))
            .is_err());
    }

    #[test]
    fn handler_can_schedule_follow_ups() {
        let mut s = Scheduler::new();
        s.schedule(0.0, 0u32).unwrap();
        let mut seen = Vec::new();
        s.run_until::<EngineError, _>(10.0, |s, ev| {
            seen.push(ev.time);
            if ev.kind < 4 {
                s.schedule_in(2.0, ev.kind + 1)?;
            }
            Ok(())
        })
        .unwrap();
        assert_eq!(seen, vec![0.0, 2.0, 4.0, 6.0, 8.0]);
    }
}
