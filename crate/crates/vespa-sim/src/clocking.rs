//! Per-island clocks, frequency registers, the dual-oscillator DFS actuator,
//! and clock-domain-crossing delays.
//!
//! An island clock is a sequence of segments, each generating rising edges at
//! one frequency from an exact femtosecond anchor. Retargeting the frequency
//! appends a segment; all future edge times are therefore fully determined the
//! moment a frequency write is accepted, which keeps eagerly computed edge
//! lookups exact across a reconfiguration.
//!
//! Edge indices are global and continue across segments, so a timer that waits
//! for "n more cycles" keeps its meaning when the frequency changes mid-wait.

use crate::engine::{cycle_edge_time, EngineError, SimTime, FS_PER_SEC};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ClockError {
    #[error("island {0} does not exist")]
    NoSuchIsland(usize),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

/// Why a frequency write was refused.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RejectReason {
    OutOfRange,
    OffStepGrid,
    Busy,
    FixedIsland,
}

impl std::fmt::Display for RejectReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            RejectReason::OutOfRange => "out_of_range",
            RejectReason::OffStepGrid => "off_step_grid",
            RejectReason::Busy => "busy",
            RejectReason::FixedIsland => "fixed_island",
        };
        f.write_str(s)
    }
}

/// Outcome of a frequency register write.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WriteOutcome {
    Accepted { completes_at: SimTime },
    Rejected(RejectReason),
}

/// How the actuator behaves while the oscillator retargets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ActuatorMode {
    /// Two oscillators; the master holds the old clock while the slave locks,
    /// then roles swap. The output never gaps longer than one period.
    #[default]
    DualOscillator,
    /// Single oscillator whose output stays low for the whole reconfiguration.
    NaiveSingle,
}

/// One constant-frequency stretch of an island clock.
#[derive(Debug, Clone, Copy)]
struct Segment {
    /// Time of this segment's edge 0.
    first_edge: SimTime,
    freq_hz: u64,
    /// Global index of this segment's edge 0.
    base_idx: u64,
}

impl Segment {
    fn edge_time(&self, k: u64) -> SimTime {
        // Exact offsets from the segment anchor; no accumulated drift.
        let off = cycle_edge_time(self.freq_hz, k).expect("edge within u64 range");
        SimTime::from_fs(self.first_edge.fs() + off.fs())
    }
}

/// Rising-edge source for one frequency island.
#[derive(Debug, Clone)]
pub struct IslandClock {
    segments: Vec<Segment>,
}

impl IslandClock {
    /// Clock running at `freq_hz` with edge 0 at t=0.
    pub fn new(freq_hz: u64) -> Self {
        assert!(freq_hz > 0, "island frequency must be positive");
        IslandClock {
            segments: vec![Segment {
                first_edge: SimTime::ZERO,
                freq_hz,
                base_idx: 0,
            }],
        }
    }

    /// Effective frequency at time `t`: the frequency of the segment whose
    /// edges are current at `t`. During a naive-mode gap the old frequency is
    /// reported until the new segment's first edge.
    pub fn freq_at(&self, t: SimTime) -> u64 {
        let mut freq = self.segments[0].freq_hz;
        for seg in &self.segments {
            if seg.first_edge <= t {
                freq = seg.freq_hz;
            } else {
                break;
            }
        }
        freq
    }

    fn segment_for_idx(&self, idx: u64) -> &Segment {
        let pos = self
            .segments
            .partition_point(|s| s.base_idx <= idx)
            .saturating_sub(1);
        &self.segments[pos]
    }

    /// Last edge index of `seg_pos`, if the segment is bounded by a successor.
    fn segment_last_idx(&self, seg_pos: usize) -> Option<u64> {
        self.segments.get(seg_pos + 1).map(|next| next.base_idx - 1)
    }

    /// Time of the global edge `idx`.
    pub fn edge_time(&self, idx: u64) -> SimTime {
        let seg = self.segment_for_idx(idx);
        seg.edge_time(idx - seg.base_idx)
    }

    /// First `(index, time)` with `time >= t`.
    pub fn edge_at_or_after(&self, t: SimTime) -> (u64, SimTime) {
        self.locate(t, false)
    }

    /// First `(index, time)` with `time > t`.
    pub fn edge_strictly_after(&self, t: SimTime) -> (u64, SimTime) {
        self.locate(t, true)
    }

    /// Time of the `n`-th edge strictly after `t` (n >= 1).
    pub fn nth_edge_strictly_after(&self, t: SimTime, n: u64) -> SimTime {
        debug_assert!(n >= 1);
        let (idx, _) = self.edge_strictly_after(t);
        self.edge_time(idx + (n - 1))
    }

    fn locate(&self, t: SimTime, strict: bool) -> (u64, SimTime) {
        // Find the last segment whose first edge could still be <= t.
        let mut pos = self
            .segments
            .partition_point(|s| s.first_edge <= t)
            .saturating_sub(1);
        loop {
            let seg = &self.segments[pos];
            let last = self.segment_last_idx(pos);
            let k = if t <= seg.first_edge {
                0
            } else {
                // Initial guess from the exact rational, then fix up.
                let rel = (t.fs() - seg.first_edge.fs()) as u128;
                let mut k = (rel * seg.freq_hz as u128 / FS_PER_SEC as u128) as u64;
                while seg.edge_time(k) < t || (strict && seg.edge_time(k) == t) {
                    k += 1;
                }
                while k > 0 && {
                    let e = seg.edge_time(k - 1);
                    e > t || (!strict && e == t)
                } {
                    k -= 1;
                }
                k
            };
            let k = if strict && seg.edge_time(k) == t { k + 1 } else { k };
            match last {
                Some(last_idx) if seg.base_idx + k > last_idx => {
                    // Past the end of this segment; the answer is in the next.
                    pos += 1;
                }
                _ => {
                    let idx = seg.base_idx + k;
                    return (idx, seg.edge_time(k));
                }
            }
        }
    }

    /// All edges with `t0 <= time <= t1`, for edge-enumeration tests.
    pub fn edges_between(&self, t0: SimTime, t1: SimTime) -> Vec<SimTime> {
        let mut out = Vec::new();
        let (mut idx, mut t) = self.edge_at_or_after(t0);
        while t <= t1 {
            out.push(t);
            idx += 1;
            t = self.edge_time(idx);
        }
        out
    }

    /// Append the retarget segments for a reconfiguration that was requested
    /// at `t_req` and completes at `t_done`, switching to `new_hz`.
    fn retarget(&mut self, t_req: SimTime, t_done: SimTime, new_hz: u64, mode: ActuatorMode) {
        let new_period = cycle_edge_time(new_hz, 1).expect("legal frequency").fs();
        match mode {
            ActuatorMode::DualOscillator => {
                // Old edges run strictly before t_done. The first new edge is
                // one new period after the last old edge, but never before the
                // reconfiguration completes; this keeps every gap bounded by
                // max(T_old, T_new).
                let (at_or_after_idx, _) = self.edge_at_or_after(t_done);
                let last_old_idx = at_or_after_idx.saturating_sub(1);
                let last_old = self.edge_time(last_old_idx);
                let first_new = SimTime::from_fs(
                    (last_old.fs() + new_period).max(t_done.fs()),
                );
                self.segments.push(Segment {
                    first_edge: first_new,
                    freq_hz: new_hz,
                    base_idx: last_old_idx + 1,
                });
            }
            ActuatorMode::NaiveSingle => {
                // Output gated low for [t_req, t_done); it restarts at t_done.
                let (after_idx, _) = self.edge_strictly_after(t_req);
                let last_old_idx = after_idx.saturating_sub(1);
                self.segments.push(Segment {
                    first_edge: t_done,
                    freq_hz: new_hz,
                    base_idx: last_old_idx + 1,
                });
            }
        }
    }
}

/// Legal DFS frequency grid of one island.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FreqGrid {
    pub min_hz: u64,
    pub max_hz: u64,
    pub step_hz: u64,
}

impl FreqGrid {
    pub fn contains(&self, hz: u64) -> bool {
        hz >= self.min_hz && hz <= self.max_hz && (hz - self.min_hz).is_multiple_of(self.step_hz)
    }

    pub fn legal_values(&self) -> Vec<u64> {
        (0..=(self.max_hz - self.min_hz) / self.step_hz)
            .map(|k| self.min_hz + k * self.step_hz)
            .collect()
    }
}

/// Staging logic carrying signals between two clock domains; delivery costs
/// `depth` destination cycles.
#[derive(Debug, Clone, Copy)]
pub struct Resynchronizer {
    pub src: usize,
    pub dst: usize,
    pub depth: u64,
}

impl Resynchronizer {
    pub fn new(src: usize, dst: usize, depth: u64) -> Self {
        assert!(depth >= 2, "synchronizer depth must be at least 2");
        Resynchronizer { src, dst, depth }
    }
}

#[derive(Debug, Clone)]
struct DfsState {
    grid: FreqGrid,
    mode: ActuatorMode,
    reconfig_latency_fs: u64,
    requested_hz: u64,
    busy_until: Option<SimTime>,
    /// Which physical oscillator drives the output; flips on completion.
    master_is_a: bool,
}

#[derive(Debug, Clone)]
struct IslandState {
    clock: IslandClock,
    dfs: Option<DfsState>,
}

/// Frequency register view of one DFS island.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FreqRegister {
    pub requested_hz: u64,
    pub busy: bool,
}

/// All island clocks of one SoC plus their DFS actuators and the
/// island-boundary synchronizer depth.
#[derive(Debug, Clone)]
pub struct ClockSystem {
    islands: Vec<IslandState>,
    sync_depth: u64,
}

impl ClockSystem {
    pub fn new(sync_depth: u64) -> Self {
        assert!(sync_depth >= 2);
        ClockSystem {
            islands: Vec::new(),
            sync_depth,
        }
    }

    pub fn add_fixed(&mut self, freq_hz: u64) -> usize {
        self.islands.push(IslandState {
            clock: IslandClock::new(freq_hz),
            dfs: None,
        });
        self.islands.len() - 1
    }

    pub fn add_dfs(
        &mut self,
        grid: FreqGrid,
        initial_hz: u64,
        mode: ActuatorMode,
        reconfig_latency_fs: u64,
    ) -> usize {
        assert!(grid.contains(initial_hz), "initial frequency off grid");
        self.islands.push(IslandState {
            clock: IslandClock::new(initial_hz),
            dfs: Some(DfsState {
                grid,
                mode,
                reconfig_latency_fs,
                requested_hz: initial_hz,
                busy_until: None,
                master_is_a: true,
            }),
        });
        self.islands.len() - 1
    }

    pub fn island_count(&self) -> usize {
        self.islands.len()
    }

    pub fn is_dfs(&self, island: usize) -> bool {
        self.islands[island].dfs.is_some()
    }

    pub fn clock(&self, island: usize) -> &IslandClock {
        &self.islands[island].clock
    }

    pub fn freq_at(&self, island: usize, t: SimTime) -> u64 {
        self.islands[island].clock.freq_at(t)
    }

    pub fn register(&self, island: usize) -> Option<FreqRegister> {
        self.islands[island].dfs.as_ref().map(|d| FreqRegister {
            requested_hz: d.requested_hz,
            busy: d.busy_until.is_some(),
        })
    }

    /// Request a frequency change on a DFS island.
    ///
    /// On acceptance the actuator goes busy and the new frequency takes
    /// effect at `t + reconfig_latency`; the island's future edge schedule is
    /// appended immediately. The caller is expected to deliver
    /// [`ClockSystem::complete_reconfig`] at the returned completion time.
    pub fn write_frequency(&mut self, island: usize, freq_hz: u64, t: SimTime) -> WriteOutcome {
        let state = &mut self.islands[island];
        let Some(dfs) = state.dfs.as_mut() else {
            return WriteOutcome::Rejected(RejectReason::FixedIsland);
        };
        if dfs.busy_until.is_some() {
            return WriteOutcome::Rejected(RejectReason::Busy);
        }
        if freq_hz < dfs.grid.min_hz || freq_hz > dfs.grid.max_hz {
            return WriteOutcome::Rejected(RejectReason::OutOfRange);
        }
        if !dfs.grid.contains(freq_hz) {
            return WriteOutcome::Rejected(RejectReason::OffStepGrid);
        }
        let done = SimTime::from_fs(t.fs() + dfs.reconfig_latency_fs);
        dfs.busy_until = Some(done);
        dfs.requested_hz = freq_hz;
        let mode = dfs.mode;
        state.clock.retarget(t, done, freq_hz, mode);
        WriteOutcome::Accepted { completes_at: done }
    }

    /// Finish a reconfiguration: clear busy and swap master/slave roles.
    pub fn complete_reconfig(&mut self, island: usize, now: SimTime) {
        if let Some(dfs) = self.islands[island].dfs.as_mut() {
            if let Some(done) = dfs.busy_until {
                debug_assert!(now >= done);
                dfs.busy_until = None;
                dfs.master_is_a = !dfs.master_is_a;
            }
        }
    }

    pub fn busy_until(&self, island: usize) -> Option<SimTime> {
        self.islands[island].dfs.as_ref().and_then(|d| d.busy_until)
    }

    /// Delivery time of a signal arriving at `t_arrival` on the boundary from
    /// `src` to `dst`: the `depth`-th destination rising edge strictly after
    /// arrival. Same-island crossings pass through unchanged.
    pub fn crossing_delay(&self, src: usize, dst: usize, t_arrival: SimTime) -> SimTime {
        if src == dst {
            return t_arrival;
        }
        self.islands[dst]
            .clock
            .nth_edge_strictly_after(t_arrival, self.sync_depth)
    }

    pub fn sync_depth(&self) -> u64 {
        self.sync_depth
    }
}
