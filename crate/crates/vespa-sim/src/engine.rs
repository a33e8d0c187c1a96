//! Deterministic discrete-event kernel.
//!
//! Simulation time is an absolute femtosecond count in a `u64`, which covers
//! about 5.1 hours of simulated time before overflowing. Clock edges are never
//! accumulated period-by-period: [`cycle_edge_time`] computes the n-th edge
//! directly from the cycle index with half-up integer rounding, so the error
//! per edge is at most 0.5 fs and there is no drift.
//!
//! Events are totally ordered by `(time, sequence)` where the sequence number
//! is the global issue order. The kernel is single-threaded; parallelism only
//! exists across independent simulation instances.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashSet};

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Femtoseconds per second.
pub const FS_PER_SEC: u64 = 1_000_000_000_000_000;

/// Absolute simulation time in femtoseconds since simulation start.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct SimTime(u64);

impl SimTime {
    pub const ZERO: SimTime = SimTime(0);
    pub const MAX: SimTime = SimTime(u64::MAX);

    pub const fn from_fs(fs: u64) -> Self {
        SimTime(fs)
    }

    pub const fn fs(self) -> u64 {
        self.0
    }

    pub fn checked_add(self, delta: u64) -> Result<Self, EngineError> {
        self.0
            .checked_add(delta)
            .map(SimTime)
            .ok_or(EngineError::TimeOverflow)
    }

    pub fn saturating_sub(self, other: SimTime) -> u64 {
        self.0.saturating_sub(other.0)
    }

    pub fn as_secs_f64(self) -> f64 {
        self.0 as f64 / FS_PER_SEC as f64
    }
}

impl std::fmt::Display for SimTime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}fs", self.0)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EngineError {
    #[error("simulation time overflowed the 64-bit femtosecond counter")]
    TimeOverflow,
    #[error("event scheduled at {event} which is before current time {now}")]
    SchedulePast { event: SimTime, now: SimTime },
    #[error("livelock: more than {limit} events executed at instant {at}")]
    Livelock { at: SimTime, limit: u64 },
    #[error("frequency must be positive")]
    ZeroFrequency,
}

/// Time of the n-th rising edge of a clock of `freq_hz`, with edge 0 at t=0.
///
/// Computed as `round(n * 10^15 / freq_hz)` femtoseconds, rounding half up.
/// The result is exact to 0.5 fs for any cycle index; consecutive calls do
/// not accumulate error because nothing is carried between them.
pub fn cycle_edge_time(freq_hz: u64, n: u64) -> Result<SimTime, EngineError> {
    if freq_hz == 0 {
        return Err(EngineError::ZeroFrequency);
    }
    let num = (n as u128) * (FS_PER_SEC as u128) + freq_hz as u128 / 2;
    let fs = num / freq_hz as u128;
    if fs > u64::MAX as u128 {
        return Err(EngineError::TimeOverflow);
    }
    Ok(SimTime(fs as u64))
}

/// Handle to a scheduled event, usable for cancellation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct EventId(u64);

impl EventId {
    pub fn raw(self) -> u64 {
        self.0
    }
}

struct Entry<E> {
    time: SimTime,
    seq: u64,
    id: EventId,
    payload: E,
}

impl<E> PartialEq for Entry<E> {
    fn eq(&self, other: &Self) -> bool {
        self.time == other.time && self.seq == other.seq
    }
}
impl<E> Eq for Entry<E> {}
impl<E> PartialOrd for Entry<E> {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl<E> Ord for Entry<E> {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.time, self.seq).cmp(&(other.time, other.seq))
    }
}

/// Summary of a completed run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunSummary {
    pub events_processed: u64,
    pub final_time: SimTime,
}

/// Event queue with a monotone clock and `(time, sequence)` total order.
pub struct Kernel<E> {
    now: SimTime,
    heap: BinaryHeap<Reverse<Entry<E>>>,
    next_seq: u64,
    next_id: u64,
    cancelled: HashSet<EventId>,
    processed: u64,
    /// Events executed at the current instant, for the livelock guard.
    at_now: u64,
    zero_delay_limit: u64,
}

impl<E> Kernel<E> {
    pub fn new() -> Self {
        Kernel {
            now: SimTime::ZERO,
            heap: BinaryHeap::new(),
            next_seq: 0,
            next_id: 0,
            cancelled: HashSet::new(),
            processed: 0,
            at_now: 0,
            zero_delay_limit: 2_000_000,
        }
    }

    pub fn with_zero_delay_limit(mut self, limit: u64) -> Self {
        self.zero_delay_limit = limit;
        self
    }

    pub fn now(&self) -> SimTime {
        self.now
    }

    pub fn events_processed(&self) -> u64 {
        self.processed
    }

    pub fn pending(&self) -> usize {
        self.heap.len() - self.cancelled.len()
    }

    /// Enqueue an event. Scheduling into the past is a hard fault.
    pub fn schedule(&mut self, time: SimTime, payload: E) -> Result<EventId, EngineError> {
        if time < self.now {
            return Err(EngineError::SchedulePast {
                event: time,
                now: self.now,
            });
        }
        let id = EventId(self.next_id);
        self.next_id += 1;
        let seq = self.next_seq;
        self.next_seq += 1;
        self.heap.push(Reverse(Entry {
            time,
            seq,
            id,
            payload,
        }));
        Ok(id)
    }

    /// Cancel a pending event. Returns false if it already fired or was
    /// cancelled before.
    pub fn cancel(&mut self, id: EventId) -> bool {
        if id.0 >= self.next_id {
            return false;
        }
        self.cancelled.insert(id)
    }

    /// Pop the next event with `time <= t_end`, advancing the clock to it.
    pub fn pop_due(&mut self, t_end: SimTime) -> Result<Option<(SimTime, E)>, EngineError> {
        loop {
            let due = match self.heap.peek() {
                Some(Reverse(e)) if e.time <= t_end => true,
                _ => return Ok(None),
            };
            debug_assert!(due);
            let Reverse(entry) = self.heap.pop().expect("peeked entry");
            if self.cancelled.remove(&entry.id) {
                continue;
            }
            if entry.time == self.now {
                self.at_now += 1;
                if self.at_now > self.zero_delay_limit {
                    return Err(EngineError::Livelock {
                        at: self.now,
                        limit: self.zero_delay_limit,
                    });
                }
            } else {
                debug_assert!(entry.time > self.now);
                self.now = entry.time;
                self.at_now = 1;
            }
            self.processed += 1;
            return Ok(Some((entry.time, entry.payload)));
        }
    }

    /// Drain and handle all events with `time <= t_end`.
    pub fn run_until<F>(&mut self, t_end: SimTime, mut handle: F) -> Result<RunSummary, EngineError>
    where
        F: FnMut(&mut Kernel<E>, SimTime, E) -> Result<(), EngineError>,
    {
        while let Some((t, payload)) = self.pop_due(t_end)? {
            handle(self, t, payload)?;
        }
        if t_end > self.now {
            self.now = t_end;
            self.at_now = 0;
        }
        Ok(RunSummary {
            events_processed: self.processed,
            final_time: self.now,
        })
    }
}

impl<E> Default for Kernel<E> {
    fn default() -> Self {
        Self::new()
    }
}

/// Seeded random streams, split per component by stable component id so that
/// adding a component never perturbs another component's stream.
#[derive(Debug, Clone, Copy)]
pub struct RngStreams {
    master_seed: u64,
}

impl RngStreams {
    pub fn new(master_seed: u64) -> Self {
        RngStreams { master_seed }
    }

    pub fn stream(&self, component_id: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(component_id);
        rng
    }
}
