//! Behavioral tile models: the multi-replica accelerator tile with its
//! four-channel stream bridge, the memory tile, traffic generators, and the
//! inert CPU/IO stubs.
//!
//! A replica works through its items in bursts. Each burst is one memory
//! round trip: the read request holds the tile's read channel until the data
//! returns, and the write data holds the write channel until the memory's
//! acknowledgement returns. Those two single-occupancy channels are the
//! serialization points that bound the throughput of a K-replica tile, while
//! compute phases of different replicas overlap freely.

use crate::config::AcceleratorProfile;
use crate::engine::SimTime;
use crate::noc::Position;
use std::collections::BTreeSet;

/// Stream channels between the replicas and the NoC-facing tile buffers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Channel {
    RdCtrl,
    WrCtrl,
    RdData,
    WrData,
}

pub const CHANNEL_COUNT: usize = 4;

impl Channel {
    pub fn index(self) -> usize {
        match self {
            Channel::RdCtrl => 0,
            Channel::WrCtrl => 1,
            Channel::RdData => 2,
            Channel::WrData => 3,
        }
    }
}

/// Round-robin grant: the first pending replica strictly after `last` in
/// cyclic order, or none.
pub fn bridge_grant(k: usize, last: usize, pending: &BTreeSet<usize>) -> Option<usize> {
    if pending.is_empty() {
        return None;
    }
    for off in 1..=k {
        let candidate = (last + off) % k;
        if pending.contains(&candidate) {
            return Some(candidate);
        }
    }
    None
}

/// Split `items` across `k` replicas round-robin: the first `items % k`
/// replicas receive one extra item.
pub fn split_round_robin(items: u64, k: u32) -> Vec<u64> {
    let k64 = k as u64;
    (0..k64)
        .map(|i| items / k64 + if i < items % k64 { 1 } else { 0 })
        .collect()
}

/// Execution state of one accelerator replica.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReplicaState {
    Idle,
    /// Waiting for the read channel grant to issue the next burst.
    IssueRead,
    /// Read burst in flight; the read channel is held.
    AwaitData,
    /// Crunching the current chunk until the stored edge index.
    Compute,
    /// Waiting for the write channel grant.
    IssueWrite,
    /// All items processed; waiting for the last write acknowledgement.
    Draining,
    Done,
}

#[derive(Debug, Clone)]
pub struct Replica {
    pub state: ReplicaState,
    pub items_remaining: u64,
    /// Items of the burst currently in flight or being computed.
    pub chunk_items: u64,
    /// Descriptor packet emitted for the current work assignment.
    pub descriptor_sent: bool,
    /// A write burst of this replica is awaiting its acknowledgement.
    pub write_outstanding: bool,
    pub bursts_issued: u64,
    /// When the in-flight read burst was issued, for the RTT hook.
    pub read_issued_at: Option<SimTime>,
}

impl Replica {
    fn idle() -> Self {
        Replica {
            state: ReplicaState::Idle,
            items_remaining: 0,
            chunk_items: 0,
            descriptor_sent: false,
            write_outstanding: false,
            bursts_issued: 0,
            read_issued_at: None,
        }
    }

    pub fn assign(&mut self, items: u64) {
        self.items_remaining = items;
        self.chunk_items = 0;
        self.descriptor_sent = false;
        self.write_outstanding = false;
        self.bursts_issued = 0;
        self.read_issued_at = None;
        self.state = if items == 0 {
            ReplicaState::Done
        } else {
            ReplicaState::IssueRead
        };
    }

    /// Take the next burst worth of items.
    pub fn begin_chunk(&mut self, items_per_burst: u64) -> u64 {
        let n = self.items_remaining.min(items_per_burst);
        self.chunk_items = n;
        self.items_remaining -= n;
        self.bursts_issued += 1;
        n
    }
}

/// Per-channel round-robin state of the bridge.
#[derive(Debug, Clone)]
pub struct AxiBridge {
    pub last_grant: [usize; CHANNEL_COUNT],
    /// Replica currently holding the read path (burst round trip).
    pub read_grant: Option<usize>,
    /// Replica whose write burst is awaiting acknowledgement.
    pub write_grant: Option<usize>,
}

impl AxiBridge {
    fn new(k: usize) -> Self {
        AxiBridge {
            last_grant: [k - 1; CHANNEL_COUNT],
            read_grant: None,
            write_grant: None,
        }
    }
}

/// An in-flight invocation across all replicas of a tile.
#[derive(Debug, Clone, Copy)]
pub struct Invocation {
    pub items_total: u64,
    pub started_at: SimTime,
    pub start_edge: u64,
    pub replicas_done: u32,
}

/// Multi-replica accelerator tile. TG tiles are the same model with K=1 and
/// `loop_invocations` set.
#[derive(Debug, Clone)]
pub struct MraTile {
    pub pos: Position,
    pub island: usize,
    pub profile: AcceleratorProfile,
    pub k: u32,
    pub replicas: Vec<Replica>,
    pub bridge: AxiBridge,
    /// Pending grant requests per direction.
    pub want_read: BTreeSet<usize>,
    pub want_write: BTreeSet<usize>,
    pub invocation: Option<Invocation>,
    /// Re-start an invocation whenever the previous one finishes.
    pub loop_invocations: bool,
    pub enabled: bool,
    /// Input bytes of completed bursts, for duration-based throughput.
    pub input_bytes_completed: u64,
    pub invocations_completed: u64,
}

impl MraTile {
    pub fn new(pos: Position, island: usize, profile: AcceleratorProfile, k: u32) -> Self {
        assert!(k >= 1);
        MraTile {
            pos,
            island,
            profile,
            k,
            replicas: (0..k).map(|_| Replica::idle()).collect(),
            bridge: AxiBridge::new(k as usize),
            want_read: BTreeSet::new(),
            want_write: BTreeSet::new(),
            invocation: None,
            loop_invocations: false,
            enabled: false,
            input_bytes_completed: 0,
            invocations_completed: 0,
        }
    }

    pub fn busy(&self) -> bool {
        self.invocation.is_some()
    }

    /// Split the work across replicas; the monitor resets the execution-time
    /// counter at this instant.
    pub fn start_invocation(&mut self, items: u64, now: SimTime, start_edge: u64) {
        debug_assert!(self.invocation.is_none());
        let shares = split_round_robin(items, self.k);
        let mut done = 0;
        self.want_read.clear();
        self.want_write.clear();
        for (i, (r, share)) in self.replicas.iter_mut().zip(shares.iter()).enumerate() {
            r.assign(*share);
            if r.state == ReplicaState::Done {
                done += 1;
            } else {
                self.want_read.insert(i);
            }
        }
        self.invocation = Some(Invocation {
            items_total: items,
            started_at: now,
            start_edge,
            replicas_done: done,
        });
    }
}

/// Memory controller: FIFO service, one transfer at a time. A request's data
/// transfer occupies the controller for `ceil(bytes / bytes_per_cycle)`
/// memory cycles; the fixed latency is pipelined ahead of the transfer, so
/// back-to-back requests are spaced by their serve time while an isolated
/// request responds `latency + serve` cycles after arrival.
///
/// Service bookkeeping is held as memory-island edge indices so a frequency
/// retarget of the island moves the pending schedule with the clock.
#[derive(Debug)]
pub struct MemTile {
    pub pos: Position,
    pub island: usize,
    pub bytes_per_cycle: u64,
    pub latency_cycles: u64,
    /// Edge index at which the controller's transfer engine is next free.
    pub serve_free_idx: u64,
    /// Accumulated transfer occupancy, for the busy fraction.
    pub busy_fs: u64,
    pub requests_served: u64,
}

impl MemTile {
    pub fn new(pos: Position, island: usize, bytes_per_cycle: u64, latency_cycles: u64) -> Self {
        MemTile {
            pos,
            island,
            bytes_per_cycle,
            latency_cycles,
            serve_free_idx: 0,
            busy_fs: 0,
            requests_served: 0,
        }
    }

    pub fn serve_cycles(&self, bytes: u64) -> u64 {
        bytes.div_ceil(self.bytes_per_cycle)
    }

    /// Admit a request arriving at `arrival_idx`; returns the edge index at
    /// which the response data is ready.
    pub fn admit(&mut self, arrival_idx: u64, bytes: u64) -> u64 {
        let serve = self.serve_cycles(bytes);
        let start = (arrival_idx + self.latency_cycles).max(self.serve_free_idx);
        let done = start + serve;
        self.serve_free_idx = done;
        self.requests_served += 1;
        done
    }

    pub fn busy_fraction(&self, elapsed: SimTime) -> f64 {
        if elapsed.fs() == 0 {
            0.0
        } else {
            (self.busy_fs as f64 / elapsed.fs() as f64).min(1.0)
        }
    }
}
