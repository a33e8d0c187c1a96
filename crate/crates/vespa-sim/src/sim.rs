//! Whole-SoC simulation: wires the kernel, island clocks, mesh, tiles, and
//! monitor together and drives the event loop.
//!
//! All component activity happens on rising edges of the component's island
//! clock. Handlers re-align themselves to the current edge schedule when they
//! fire, so a frequency retarget accepted after an event was scheduled only
//! costs a deferral, never an early action. Long cycle-anchored timers
//! (replica compute phases) are registered and explicitly re-timed when their
//! island retargets.

use crate::clocking::{ActuatorMode, ClockSystem, WriteOutcome};
use crate::config::{validate, SoCDescription, TileKind};
use crate::engine::{EngineError, EventId, Kernel, RngStreams, RunSummary, SimTime};
use crate::monitor::{Monitor, TrafficSampler};
use crate::noc::{
    size_flits, xy_next_hop, Mesh, NocTiming, Packet, PacketClass, Port, Position, QueuedPacket,
    Tag, PORT_COUNT, VNET_COUNT,
};
use crate::tiles::{bridge_grant, Channel, MemTile, MraTile, ReplicaState};
use std::collections::{HashMap, VecDeque};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("protocol fault: {0}")]
    Protocol(String),
    #[error("invalid description: {0}")]
    InvalidDescription(String),
    #[error("workload did not finish before the simulation deadline")]
    Deadline,
}

/// Descriptor and acknowledgement payload sizes on the wire.
pub const RD_CTRL_BYTES: u64 = 16;
pub const WR_CTRL_BYTES: u64 = 8;
pub const MEM_REQ_BYTES: u64 = 8;
pub const MEM_RESP_BYTES: u64 = 8;

// Outbound NI queues per tile: the three request channels, the response
// queue used by the memory tile, and a low-priority queue for synthetic test
// traffic.
const NI_RDCTRL: usize = 0;
const NI_WRCTRL: usize = 1;
const NI_WRDATA: usize = 2;
const NI_RESP: usize = 3;
const NI_SYNTH: usize = 4;
const NI_QUEUES: usize = 5;

#[derive(Debug, Clone, Copy)]
enum Ev {
    /// Run bridge grants and packet emission at a tile edge.
    TileWork(usize),
    /// Try to inject queued packets into the local router port.
    NiInject(usize),
    /// Output-port arbitration at a router edge.
    RouterWork(usize),
    /// Head arrival at a downstream router input.
    RouterArrive {
        router: usize,
        port: usize,
        vnet: usize,
        qp: QueuedPacket,
    },
    /// Tail delivered at the destination router's local port.
    Eject { router: usize, packet: Packet },
    /// Packet handed to the tile after the boundary crossing.
    TileDeliver { tile: usize, packet: Packet },
    /// A replica finished its compute phase (cycle-anchored timer).
    ComputeDone {
        tile: usize,
        replica: usize,
        target_edge: u64,
    },
    /// DFS actuator finished; clears the busy flag.
    DfsComplete { island: usize },
    /// Begin an invocation of `items` on a tile.
    StartInvocation { tile: usize, items: u64 },
    /// Scheduled host command (frequency write, TG toggle, ...).
    Command(usize),
    /// Periodic traffic sampling window close.
    Sample(usize),
}

#[allow(clippy::large_enum_variant)] // Accel is the common variant
enum TileModel {
    Accel(MraTile),
    Mem(MemTile),
    Stub,
}

#[derive(Debug, Clone, Copy)]
struct NiPacket {
    packet: Packet,
    /// Earliest router-domain time the packet can start injecting.
    ready: SimTime,
}

struct NiState {
    queues: [VecDeque<NiPacket>; NI_QUEUES],
    rr_next: usize,
    busy_until: SimTime,
}

impl NiState {
    fn new() -> Self {
        NiState {
            queues: Default::default(),
            rr_next: 0,
            busy_until: SimTime::ZERO,
        }
    }

    fn is_empty(&self) -> bool {
        self.queues.iter().all(|q| q.is_empty())
    }
}

#[derive(Debug, Clone, Copy)]
struct CycleTimer {
    island: usize,
    tile: usize,
    replica: usize,
    target_edge: u64,
    event: EventId,
}

/// Host-side command kinds accepted by a schedule.
#[derive(Debug, Clone, PartialEq)]
pub enum HostCommand {
    WriteFrequency { island: String, hz: u64 },
    TgEnableCount { count: u32 },
    TgSet { tile: Position, enabled: bool },
    ResetCounters { tile: Option<Position> },
    SampleProbe { probe: Position },
}

#[derive(Debug, Clone)]
pub struct ScheduledCommand {
    pub at: SimTime,
    pub command: HostCommand,
}

/// Log line for a schedule command that could not be applied.
#[derive(Debug, Clone, PartialEq)]
pub struct CommandRejection {
    pub at: SimTime,
    pub command: String,
    pub reason: String,
}

/// Per-island frequency change, recorded when it takes effect.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreqChange {
    pub at: SimTime,
    pub island: usize,
    pub freq_hz: u64,
}

#[derive(Debug, Clone, Copy)]
pub struct EjectionRecord {
    pub t: SimTime,
    pub tile: usize,
    pub packet_id: u64,
    pub class: PacketClass,
    pub src: Position,
    pub dst: Position,
    pub payload_bytes: u64,
}

/// Result of a finished work batch on one accelerator tile.
#[derive(Debug, Clone, Copy)]
pub struct BatchResult {
    pub started: SimTime,
    pub finished: SimTime,
    pub input_bytes: u64,
    /// Input bytes per simulated second, in MB/s (10^6 bytes).
    pub throughput_mbps: f64,
}

struct EmitRequest {
    queue: usize,
    class: PacketClass,
    payload: u64,
    req_bytes: u64,
    tag: Tag,
}

pub struct SocSim {
    pub desc: SoCDescription,
    kernel: Kernel<Ev>,
    pub clocks: ClockSystem,
    mesh: Mesh,
    tiles: Vec<TileModel>,
    pub monitor: Monitor,
    ni: Vec<NiState>,
    /// Raw ingress counters, independent of the monitor's register semantics.
    raw_pkts_in: Vec<u64>,
    tile_island: Vec<usize>,
    router_island: Vec<usize>,
    mem_tile: usize,
    packet_seq: u64,
    /// Pending compute timers keyed by raw event id.
    cycle_timers: HashMap<u64, CycleTimer>,
    schedule: Vec<ScheduledCommand>,
    pub command_log: Vec<CommandRejection>,
    pub freq_log: Vec<FreqChange>,
    samplers: Vec<TrafficSampler>,
    sampler_horizon: SimTime,
    /// Pending wakeup times per router / NI / tile, to dedupe retries.
    router_wake: Vec<std::collections::BTreeSet<u64>>,
    ni_wake: Vec<std::collections::BTreeSet<u64>>,
    tile_wake: Vec<std::collections::BTreeSet<u64>>,
    /// (start, finish) of the most recently completed invocation per tile.
    batch_done: Vec<Option<(SimTime, SimTime)>>,
    ejection_log: Option<Vec<EjectionRecord>>,
    /// Longest time any packet waited at a single router (log mode only).
    pub max_sit_fs: u64,
    /// Dispatch counts by event kind, for performance diagnostics.
    pub event_stats: [u64; 11],
    #[allow(dead_code)]
    rng: RngStreams,
    pub seed: u64,
}

impl SocSim {
    pub fn new(desc: &SoCDescription, seed: u64) -> Result<SocSim, SimError> {
        let report = validate(desc);
        if !report.is_empty() {
            return Err(SimError::InvalidDescription(report.to_string()));
        }
        let rows = desc.grid.rows;
        let cols = desc.grid.cols;

        let mut clocks = ClockSystem::new(desc.noc.sync_stages);
        for isl in &desc.islands {
            match isl.clock {
                crate::config::ClockSpec::Fixed { hz } => {
                    clocks.add_fixed(hz);
                }
                crate::config::ClockSpec::Dfs { initial_hz, .. } => {
                    let grid = isl.clock.grid().expect("dfs grid");
                    let mode: ActuatorMode = isl.actuator.into();
                    clocks.add_dfs(grid, initial_hz, mode, isl.reconfig_latency_us * 1_000_000_000);
                }
            }
        }

        let mut router_island = vec![0usize; (rows * cols) as usize];
        for r in 0..rows {
            for c in 0..cols {
                let pos = Position::new(r, c);
                let isl = desc.island_of_router(pos).ok_or_else(|| {
                    SimError::InvalidDescription(format!("router {pos} islandless"))
                })?;
                router_island[(r * cols + c) as usize] = isl;
            }
        }
        let mesh = Mesh::new(
            rows,
            cols,
            &router_island,
            NocTiming {
                link_bytes: desc.noc.link_bytes,
                pipeline: desc.noc.router_pipeline,
                fifo_depth: desc.noc.fifo_depth,
            },
        );

        let mut tiles = Vec::new();
        let mut tile_island = Vec::new();
        let mut mem_tile = None;
        for (i, spec) in desc.tiles.iter().enumerate() {
            let isl = desc.island_of_tile(spec.pos).ok_or_else(|| {
                SimError::InvalidDescription(format!("tile {} islandless", spec.pos))
            })?;
            tile_island.push(isl);
            let model = match spec.kind {
                TileKind::Mem => {
                    mem_tile = Some(i);
                    TileModel::Mem(MemTile::new(
                        spec.pos,
                        isl,
                        desc.memory.bytes_per_cycle,
                        desc.memory.latency_cycles,
                    ))
                }
                TileKind::Accel | TileKind::Tg => {
                    let profile = desc
                        .profile(spec.accel.as_deref().unwrap_or(""))
                        .expect("validated profile")
                        .clone();
                    let mut tile = MraTile::new(spec.pos, isl, profile, spec.replication());
                    if spec.kind == TileKind::Tg {
                        tile.loop_invocations = true;
                        tile.enabled = spec.enabled_at_start.unwrap_or(false);
                    }
                    TileModel::Accel(tile)
                }
                TileKind::Cpu | TileKind::Io => TileModel::Stub,
            };
            tiles.push(model);
        }
        let mem_tile =
            mem_tile.ok_or_else(|| SimError::InvalidDescription("no MEM tile".into()))?;

        let tile_count = tiles.len();
        let mut sim = SocSim {
            desc: desc.clone(),
            kernel: Kernel::new(),
            clocks,
            mesh,
            tiles,
            monitor: Monitor::new(tile_count),
            ni: (0..tile_count).map(|_| NiState::new()).collect(),
            raw_pkts_in: vec![0; tile_count],
            tile_island,
            router_island,
            mem_tile,
            packet_seq: 0,
            cycle_timers: HashMap::new(),
            schedule: Vec::new(),
            command_log: Vec::new(),
            freq_log: Vec::new(),
            samplers: Vec::new(),
            sampler_horizon: SimTime::MAX,
            router_wake: vec![Default::default(); (rows * cols) as usize],
            ni_wake: vec![Default::default(); tile_count],
            tile_wake: vec![Default::default(); tile_count],
            batch_done: vec![None; tile_count],
            ejection_log: None,
            max_sit_fs: 0,
            event_stats: [0; 11],
            rng: RngStreams::new(seed),
            seed,
        };
        sim.start_enabled_tgs()?;
        Ok(sim)
    }

    pub fn now(&self) -> SimTime {
        self.kernel.now()
    }

    pub fn events_processed(&self) -> u64 {
        self.kernel.events_processed()
    }

    pub fn mem_tile_index(&self) -> usize {
        self.mem_tile
    }

    pub fn tile_index(&self, pos: Position) -> Option<usize> {
        self.desc.tile_index(pos)
    }

    pub fn raw_pkts_in(&self, tile: usize) -> u64 {
        self.raw_pkts_in[tile]
    }

    pub fn enable_ejection_log(&mut self) {
        self.ejection_log = Some(Vec::new());
    }

    pub fn take_ejection_log(&mut self) -> Vec<EjectionRecord> {
        self.ejection_log.take().unwrap_or_default()
    }

    pub fn mem_busy_fraction(&self) -> f64 {
        match &self.tiles[self.mem_tile] {
            TileModel::Mem(m) => m.busy_fraction(self.now()),
            _ => 0.0,
        }
    }

    pub fn accel_tile(&self, idx: usize) -> Option<&MraTile> {
        match &self.tiles[idx] {
            TileModel::Accel(t) => Some(t),
            _ => None,
        }
    }

    /// Enabled-at-start traffic generators begin looping right away, with a
    /// small per-tile stagger so their request streams do not phase-lock.
    fn start_enabled_tgs(&mut self) -> Result<(), SimError> {
        for i in 0..self.tiles.len() {
            let (enabled, items) = match &self.tiles[i] {
                TileModel::Accel(t) if t.loop_invocations => {
                    (t.enabled, t.profile.items_per_invocation)
                }
                _ => continue,
            };
            if enabled {
                self.schedule_invocation_start(i, items, (i as u64 % 13) + 1)?;
            }
        }
        Ok(())
    }

    fn schedule_invocation_start(
        &mut self,
        tile: usize,
        items: u64,
        edge_offset: u64,
    ) -> Result<(), SimError> {
        let isl = self.tile_island[tile];
        let (idx, _) = self.clocks.clock(isl).edge_at_or_after(self.now());
        let t = self.clocks.clock(isl).edge_time(idx + edge_offset);
        self.kernel.schedule(t, Ev::StartInvocation { tile, items })?;
        Ok(())
    }

    /// Switch a traffic generator on or off. Disabling stops new invocations;
    /// in-flight work drains.
    pub fn set_tg_enabled(&mut self, pos: Position, enabled: bool) -> Result<(), SimError> {
        let idx = self
            .tile_index(pos)
            .ok_or_else(|| SimError::Protocol(format!("no tile at {pos}")))?;
        let (was_enabled, busy, items) = match &mut self.tiles[idx] {
            TileModel::Accel(t) if t.loop_invocations => {
                let was = t.enabled;
                t.enabled = enabled;
                (was, t.busy(), t.profile.items_per_invocation)
            }
            _ => return Err(SimError::Protocol(format!("tile {pos} is not a TG tile"))),
        };
        if enabled && !was_enabled && !busy {
            self.schedule_invocation_start(idx, items, (idx as u64 % 13) + 1)?;
        }
        Ok(())
    }

    /// Enable the first `count` TG tiles in tile-index order, disable the rest.
    pub fn set_active_tg_count(&mut self, count: u32) -> Result<(), SimError> {
        let tgs = self.desc.tg_tiles();
        for (i, pos) in tgs.iter().enumerate() {
            self.set_tg_enabled(*pos, (i as u32) < count)?;
        }
        Ok(())
    }

    /// Make ACCEL tiles loop invocations back-to-back (run/profile mode).
    pub fn set_accel_looping(&mut self) -> Result<(), SimError> {
        for i in 0..self.tiles.len() {
            if self.desc.tiles[i].kind != TileKind::Accel {
                continue;
            }
            let items = match &mut self.tiles[i] {
                TileModel::Accel(t) => {
                    t.loop_invocations = true;
                    t.enabled = true;
                    t.profile.items_per_invocation
                }
                _ => continue,
            };
            self.schedule_invocation_start(i, items, (i as u64 % 13) + 1)?;
        }
        Ok(())
    }

    /// Input bytes completed by the accelerator at `pos` so far.
    pub fn accel_input_bytes(&self, pos: Position) -> u64 {
        self.tile_index(pos)
            .and_then(|i| self.accel_tile(i))
            .map(|t| t.input_bytes_completed)
            .unwrap_or(0)
    }

    pub fn set_schedule(&mut self, commands: Vec<ScheduledCommand>) -> Result<(), SimError> {
        for (i, cmd) in commands.iter().enumerate() {
            self.kernel.schedule(cmd.at, Ev::Command(i))?;
        }
        self.schedule = commands;
        Ok(())
    }

    /// Periodic packet-rate probe at a tile; samples every `window` until the
    /// run horizon.
    pub fn add_sampler(&mut self, probe: Position, window: SimTime) -> Result<usize, SimError> {
        let idx = self
            .tile_index(probe)
            .ok_or_else(|| SimError::Protocol(format!("no tile at {probe}")))?;
        let sampler = TrafficSampler::new(idx, window);
        let sid = self.samplers.len();
        self.samplers.push(sampler);
        let first = SimTime::from_fs(self.now().fs() + window.fs());
        self.kernel.schedule(first, Ev::Sample(sid))?;
        Ok(sid)
    }

    pub fn sampler_series(&self, sid: usize) -> &[crate::monitor::RatePoint] {
        &self.samplers[sid].series
    }

    pub fn read_register(&mut self, addr: u32) -> Result<u32, crate::monitor::MonitorError> {
        let now = self.now();
        self.monitor.read_register(addr, &self.clocks, now)
    }

    /// Register-space write: tile CONTROL registers go to the monitor;
    /// frequency registers request a DFS change (value in MHz).
    pub fn write_register(&mut self, addr: u32, value: u32) -> Result<(), crate::monitor::MonitorError> {
        use crate::monitor::{DFS_STATUS_BASE, FREQ_REG_BASE};
        if (FREQ_REG_BASE..DFS_STATUS_BASE).contains(&addr) {
            let island = ((addr - FREQ_REG_BASE) / 4) as usize;
            if island >= self.clocks.island_count() || !self.clocks.is_dfs(island) {
                return Err(crate::monitor::MonitorError::Unmapped(addr));
            }
            // Rejections are visible through the DFS status register.
            let _ = self.write_frequency(island, value as u64 * 1_000_000);
            return Ok(());
        }
        self.monitor.write_register(addr, value)
    }

    /// Host-side frequency write.
    pub fn write_frequency(&mut self, island: usize, hz: u64) -> WriteOutcome {
        let now = self.now();
        let outcome = self.clocks.write_frequency(island, hz, now);
        if let WriteOutcome::Accepted { completes_at } = outcome {
            self.retime_island_timers(island);
            self.kernel
                .schedule(completes_at, Ev::DfsComplete { island })
                .expect("future completion");
            self.freq_log.push(FreqChange {
                at: completes_at,
                island,
                freq_hz: hz,
            });
        }
        outcome
    }

    /// Run until `t_end`, processing every event at or before it.
    pub fn run_until(&mut self, t_end: SimTime) -> Result<RunSummary, SimError> {
        self.sampler_horizon = t_end;
        while let Some((t, ev)) = self.kernel.pop_due(t_end)? {
            self.dispatch(t, ev)?;
        }
        // Advance the clock to the horizon.
        let summary = self.kernel.run_until(t_end, |_, _, _| Ok(()))?;
        Ok(summary)
    }

    /// Start a work batch of `items` on the accelerator tile at `pos` and run
    /// until it completes. Other workloads (TGs) keep running.
    pub fn run_batch(&mut self, pos: Position, items: u64) -> Result<BatchResult, SimError> {
        let idx = self
            .tile_index(pos)
            .ok_or_else(|| SimError::Protocol(format!("no tile at {pos}")))?;
        let input_bytes = {
            let tile = self
                .accel_tile(idx)
                .ok_or_else(|| SimError::Protocol(format!("tile {pos} is not an accelerator")))?;
            if tile.busy() {
                return Err(SimError::Protocol(format!("tile {pos} already busy")));
            }
            items * tile.profile.bytes_read_per_item
        };
        self.batch_done[idx] = None;
        self.schedule_invocation_start(idx, items, 1)?;
        // An hour of simulated time is effectively "never finishes".
        let deadline =
            SimTime::from_fs(self.now().fs().saturating_add(3_600 * crate::engine::FS_PER_SEC));
        let (started, finished) = loop {
            if let Some(done) = self.batch_done[idx] {
                break done;
            }
            match self.kernel.pop_due(deadline)? {
                Some((t, ev)) => self.dispatch(t, ev)?,
                None => return Err(SimError::Deadline),
            }
        };
        let span = finished.saturating_sub(started);
        let secs = span as f64 / 1e15;
        Ok(BatchResult {
            started,
            finished,
            input_bytes,
            throughput_mbps: if secs > 0.0 {
                input_bytes as f64 / secs / 1e6
            } else {
                f64::INFINITY
            },
        })
    }

    /// Start batches on several accelerator tiles at once and run until all
    /// of them complete; returns results in argument order.
    pub fn run_batches(&mut self, batches: &[(Position, u64)]) -> Result<Vec<BatchResult>, SimError> {
        let mut idxs = Vec::with_capacity(batches.len());
        for (pos, items) in batches {
            let idx = self
                .tile_index(*pos)
                .ok_or_else(|| SimError::Protocol(format!("no tile at {pos}")))?;
            let tile = self
                .accel_tile(idx)
                .ok_or_else(|| SimError::Protocol(format!("tile {pos} is not an accelerator")))?;
            if tile.busy() {
                return Err(SimError::Protocol(format!("tile {pos} already busy")));
            }
            idxs.push((idx, *items, *items * tile.profile.bytes_read_per_item));
        }
        for (idx, items, _) in &idxs {
            self.batch_done[*idx] = None;
            self.schedule_invocation_start(*idx, *items, 1)?;
        }
        let deadline =
            SimTime::from_fs(self.now().fs().saturating_add(3_600 * crate::engine::FS_PER_SEC));
        while idxs.iter().any(|(idx, _, _)| self.batch_done[*idx].is_none()) {
            match self.kernel.pop_due(deadline)? {
                Some((t, ev)) => self.dispatch(t, ev)?,
                None => return Err(SimError::Deadline),
            }
        }
        Ok(idxs
            .iter()
            .map(|(idx, _, input_bytes)| {
                let (started, finished) = self.batch_done[*idx].expect("batch completed");
                let secs = finished.saturating_sub(started) as f64 / 1e15;
                BatchResult {
                    started,
                    finished,
                    input_bytes: *input_bytes,
                    throughput_mbps: if secs > 0.0 {
                        *input_bytes as f64 / secs / 1e6
                    } else {
                        f64::INFINITY
                    },
                }
            })
            .collect())
    }

    /// Run until the event queue drains (finite workloads only).
    pub fn drain(&mut self) -> Result<RunSummary, SimError> {
        while let Some((t, ev)) = self.kernel.pop_due(SimTime::MAX)? {
            self.dispatch(t, ev)?;
        }
        Ok(RunSummary {
            events_processed: self.kernel.events_processed(),
            final_time: self.kernel.now(),
        })
    }

    /// Queue a raw packet for injection at `src` (transport-level test
    /// traffic). Returns the packet id.
    pub fn inject_synthetic(
        &mut self,
        src: Position,
        dst: Position,
        class: PacketClass,
        payload_bytes: u64,
        at: SimTime,
    ) -> Result<u64, SimError> {
        let tile = self
            .tile_index(src)
            .ok_or_else(|| SimError::Protocol(format!("no tile at {src}")))?;
        let id = self.next_packet_id();
        let packet = Packet {
            id,
            class,
            src,
            dst,
            payload_bytes,
            size_flits: size_flits(payload_bytes, self.mesh.timing.link_bytes),
            req_bytes: 0,
            synthetic: true,
            t_injected: at,
            tag: Tag {
                tile,
                replica: 0,
                burst: 0,
            },
        };
        let ready = self.crossing_to_router(tile, at);
        self.ni[tile].queues[NI_SYNTH].push_back(NiPacket { packet, ready });
        self.sched_ni_inject(tile, ready.max(at))?;
        Ok(id)
    }

    // ----- internals -------------------------------------------------------

    fn next_packet_id(&mut self) -> u64 {
        let id = self.packet_seq;
        self.packet_seq += 1;
        id
    }

    // Wakeup schedulers, deduped on the earliest pending time so retry
    // storms cannot multiply events under contention.

    fn sched_router_work(&mut self, router: usize, t: SimTime) -> Result<(), SimError> {
        if self.router_wake[router].insert(t.fs()) {
            self.kernel.schedule(t, Ev::RouterWork(router))?;
        }
        Ok(())
    }

    fn sched_ni_inject(&mut self, tile: usize, t: SimTime) -> Result<(), SimError> {
        if self.ni_wake[tile].insert(t.fs()) {
            self.kernel.schedule(t, Ev::NiInject(tile))?;
        }
        Ok(())
    }

    fn sched_tile_work(&mut self, tile: usize, t: SimTime) -> Result<(), SimError> {
        if self.tile_wake[tile].insert(t.fs()) {
            self.kernel.schedule(t, Ev::TileWork(tile))?;
        }
        Ok(())
    }

    fn crossing_to_router(&self, tile: usize, t: SimTime) -> SimTime {
        let router_isl = self.router_island[self.mesh.index(self.desc.tiles[tile].pos)];
        self.clocks
            .crossing_delay(self.tile_island[tile], router_isl, t)
    }

    fn dispatch(&mut self, t: SimTime, ev: Ev) -> Result<(), SimError> {
        let stat_idx = match ev {
            Ev::TileWork(_) => 0,
            Ev::NiInject(_) => 1,
            Ev::RouterWork(_) => 2,
            Ev::RouterArrive { .. } => 3,
            Ev::Eject { .. } => 4,
            Ev::TileDeliver { .. } => 5,
            Ev::ComputeDone { .. } => 6,
            Ev::DfsComplete { .. } => 7,
            Ev::StartInvocation { .. } => 8,
            Ev::Command(_) => 9,
            Ev::Sample(_) => 10,
        };
        self.event_stats[stat_idx] += 1;
        match ev {
            Ev::TileWork(tile) => self.tile_work(tile, t),
            Ev::NiInject(tile) => self.ni_inject(tile, t),
            Ev::RouterWork(r) => self.router_work(r, t),
            Ev::RouterArrive {
                router,
                port,
                vnet,
                qp,
            } => {
                self.mesh.routers[router].reserved[port][vnet] -= 1;
                self.mesh.routers[router].fifos[port][vnet].push_back(qp);
                self.sched_router_work(router, t)?;
                Ok(())
            }
            Ev::Eject { router, packet } => {
                let pos = self.mesh.routers[router].pos;
                let tile = self
                    .tile_index(pos)
                    .expect("every router position has a tile");
                let t_del = self
                    .clocks
                    .crossing_delay(self.router_island[router], self.tile_island[tile], t);
                self.kernel.schedule(t_del, Ev::TileDeliver { tile, packet })?;
                Ok(())
            }
            Ev::TileDeliver { tile, packet } => self.tile_deliver(tile, packet, t),
            Ev::ComputeDone {
                tile,
                replica,
                target_edge,
            } => self.compute_done(tile, replica, target_edge, t),
            Ev::DfsComplete { island } => {
                self.clocks.complete_reconfig(island, t);
                Ok(())
            }
            Ev::StartInvocation { tile, items } => self.start_invocation(tile, items, t),
            Ev::Command(idx) => self.run_command(idx, t),
            Ev::Sample(sid) => {
                let probe = self.samplers[sid].probe_tile;
                let count = self.raw_pkts_in[probe];
                self.samplers[sid].sample(t, count);
                let window = self.samplers[sid].window;
                let next = SimTime::from_fs(t.fs() + window.fs());
                if next <= self.sampler_horizon {
                    self.kernel.schedule(next, Ev::Sample(sid))?;
                }
                Ok(())
            }
        }
    }

    /// Align to the island's current edge schedule; if `t` is no longer an
    /// edge (the island retargeted after this event was scheduled), reschedule
    /// the event at the next edge and return None.
    fn aligned_edge(&mut self, island: usize, t: SimTime, ev: Ev) -> Result<Option<u64>, SimError> {
        let (idx, et) = self.clocks.clock(island).edge_at_or_after(t);
        if et > t {
            self.kernel.schedule(et, ev)?;
            return Ok(None);
        }
        Ok(Some(idx))
    }

    fn start_invocation(&mut self, tile: usize, items: u64, t: SimTime) -> Result<(), SimError> {
        let isl = self.tile_island[tile];
        let edge = match self.aligned_edge(isl, t, Ev::StartInvocation { tile, items })? {
            Some(e) => e,
            None => return Ok(()),
        };
        let all_done = {
            let tm = match &mut self.tiles[tile] {
                TileModel::Accel(tm) => tm,
                _ => return Err(SimError::Protocol("invocation on non-accelerator".into())),
            };
            if tm.busy() {
                return Ok(()); // a TG restart raced an explicit start
            }
            tm.start_invocation(items, t, edge);
            tm.invocation.map(|i| i.replicas_done == tm.k).unwrap_or(false)
        };
        self.monitor.exec_start(tile, edge);
        if all_done {
            // Zero items: immediate completion with zero execution time.
            self.finish_invocation(tile, t, edge)?;
        } else {
            self.sched_tile_work(tile, t)?;
        }
        Ok(())
    }

    fn finish_invocation(&mut self, tile: usize, t: SimTime, edge: u64) -> Result<(), SimError> {
        self.monitor.exec_stop(tile, edge);
        let (started, restart, completed) = match &mut self.tiles[tile] {
            TileModel::Accel(tm) => {
                let started = tm.invocation.map(|i| i.started_at).unwrap_or(t);
                tm.invocations_completed += 1;
                let again = tm.loop_invocations && tm.enabled;
                let items = tm.profile.items_per_invocation;
                tm.invocation = None;
                (started, again.then_some(items), tm.invocations_completed)
            }
            _ => (t, None, 0),
        };
        self.batch_done[tile] = Some((started, t));
        if let Some(items) = restart {
            // A small deterministic pacing stagger keeps looping generators
            // from phase-locking with each other and with measured tiles.
            let jitter = (tile as u64 * 7 + completed * 5) % 17;
            self.schedule_invocation_start(tile, items, 1 + jitter)?;
        }
        Ok(())
    }

    /// Grant arbitration and packet emission for one accelerator tile, at a
    /// tile-domain edge.
    fn tile_work(&mut self, tile: usize, t: SimTime) -> Result<(), SimError> {
        self.tile_wake[tile].remove(&t.fs());
        let isl = self.tile_island[tile];
        let (_, et) = self.clocks.clock(isl).edge_at_or_after(t);
        if et > t {
            self.sched_tile_work(tile, et)?;
            return Ok(());
        }
        let mut emitted: Vec<EmitRequest> = Vec::new();
        {
            let tm = match &mut self.tiles[tile] {
                TileModel::Accel(tm) => tm,
                _ => return Ok(()),
            };
            let k = tm.k as usize;
            // Write path: grant one pending replica, emit WrCtrl + WrData.
            // The write channel stays held until the acknowledgement returns.
            if tm.bridge.write_grant.is_none() && !tm.want_write.is_empty() {
                let g = bridge_grant(
                    k,
                    tm.bridge.last_grant[Channel::WrData.index()],
                    &tm.want_write,
                )
                .expect("nonempty pending set");
                tm.bridge.last_grant[Channel::WrData.index()] = g;
                tm.bridge.last_grant[Channel::WrCtrl.index()] = g;
                tm.want_write.remove(&g);
                tm.bridge.write_grant = Some(g);
                let chunk_items = tm.replicas[g].chunk_items;
                let out_bytes = chunk_items * tm.profile.bytes_written_per_item;
                let in_bytes = chunk_items * tm.profile.bytes_read_per_item;
                let tag = Tag {
                    tile,
                    replica: g,
                    burst: tm.replicas[g].bursts_issued,
                };
                tm.replicas[g].write_outstanding = true;
                tm.input_bytes_completed += in_bytes;
                tm.replicas[g].state = if tm.replicas[g].items_remaining > 0 {
                    tm.want_read.insert(g);
                    ReplicaState::IssueRead
                } else {
                    ReplicaState::Draining
                };
                emitted.push(EmitRequest {
                    queue: NI_WRCTRL,
                    class: PacketClass::WrCtrl,
                    payload: WR_CTRL_BYTES,
                    req_bytes: 0,
                    tag,
                });
                emitted.push(EmitRequest {
                    queue: NI_WRDATA,
                    class: PacketClass::WrData,
                    payload: out_bytes,
                    req_bytes: out_bytes,
                    tag,
                });
            }
            // Read path: the grant holds from request issue to data delivery.
            if tm.bridge.read_grant.is_none() && !tm.want_read.is_empty() {
                let g = bridge_grant(
                    k,
                    tm.bridge.last_grant[Channel::RdCtrl.index()],
                    &tm.want_read,
                )
                .expect("nonempty pending set");
                tm.bridge.last_grant[Channel::RdCtrl.index()] = g;
                tm.want_read.remove(&g);
                tm.bridge.read_grant = Some(g);
                let per_burst = tm.profile.items_per_burst();
                let chunk_items = tm.replicas[g].begin_chunk(per_burst);
                let in_bytes = chunk_items * tm.profile.bytes_read_per_item;
                let tag = Tag {
                    tile,
                    replica: g,
                    burst: tm.replicas[g].bursts_issued,
                };
                if !tm.replicas[g].descriptor_sent {
                    tm.replicas[g].descriptor_sent = true;
                    emitted.push(EmitRequest {
                        queue: NI_RDCTRL,
                        class: PacketClass::RdCtrl,
                        payload: RD_CTRL_BYTES,
                        req_bytes: 0,
                        tag,
                    });
                }
                tm.replicas[g].state = ReplicaState::AwaitData;
                tm.replicas[g].read_issued_at = Some(t);
                emitted.push(EmitRequest {
                    queue: NI_RDCTRL,
                    class: PacketClass::MemReq,
                    payload: MEM_REQ_BYTES,
                    req_bytes: in_bytes,
                    tag,
                });
            }
        }

        if !emitted.is_empty() {
            let pos = self.desc.tiles[tile].pos;
            let mem_pos = self.desc.tiles[self.mem_tile].pos;
            let ready = self.crossing_to_router(tile, t);
            for req in emitted {
                let packet = self.make_packet(req.class, pos, mem_pos, req.payload, req.req_bytes, t, req.tag);
                self.ni[tile].queues[req.queue].push_back(NiPacket { packet, ready });
            }
            self.sched_ni_inject(tile, ready)?;
        }
        Ok(())
    }

    #[allow(clippy::too_many_arguments)]
    fn make_packet(
        &mut self,
        class: PacketClass,
        src: Position,
        dst: Position,
        payload: u64,
        req_bytes: u64,
        t: SimTime,
        tag: Tag,
    ) -> Packet {
        Packet {
            id: self.next_packet_id(),
            class,
            src,
            dst,
            payload_bytes: payload,
            size_flits: size_flits(payload, self.mesh.timing.link_bytes),
            req_bytes,
            synthetic: false,
            t_injected: t,
            tag,
        }
    }

    /// Try to start injecting the next ready packet into the router's local
    /// input port.
    fn ni_inject(&mut self, tile: usize, t: SimTime) -> Result<(), SimError> {
        self.ni_wake[tile].remove(&t.fs());
        let pos = self.desc.tiles[tile].pos;
        let router = self.mesh.index(pos);
        let isl = self.router_island[router];
        let (edge, et) = self.clocks.clock(isl).edge_at_or_after(t);
        if et > t {
            self.sched_ni_inject(tile, et)?;
            return Ok(());
        }
        if self.ni[tile].busy_until > t {
            let retry = self.ni[tile].busy_until;
            if !self.ni[tile].is_empty() {
                self.sched_ni_inject(tile, retry)?;
            }
            return Ok(());
        }
        let depth = self.mesh.timing.fifo_depth;
        let mut chosen: Option<usize> = None;
        let mut earliest_future: Option<SimTime> = None;
        for off in 0..NI_QUEUES {
            let q = (self.ni[tile].rr_next + off) % NI_QUEUES;
            let Some(head) = self.ni[tile].queues[q].front() else {
                continue;
            };
            if head.ready > t {
                earliest_future = Some(match earliest_future {
                    Some(e) => e.min(head.ready),
                    None => head.ready,
                });
                continue;
            }
            let vn = head.packet.class.vnet();
            if self.mesh.routers[router].occupancy(Port::Local, vn) >= depth {
                continue; // blocked on credit; the router pop wakes us
            }
            chosen = Some(q);
            break;
        }
        if let Some(q) = chosen {
            let NiPacket { packet, .. } = self.ni[tile].queues[q].pop_front().unwrap();
            self.ni[tile].rr_next = (q + 1) % NI_QUEUES;
            let vn = packet.class.vnet();
            let flits = packet.size_flits;
            self.mesh.routers[router].fifos[Port::Local.index()][vn]
                .push_back(QueuedPacket { packet, arrived: t });
            self.monitor.count_pkt_out(tile);
            let busy_end = self.clocks.clock(isl).edge_time(edge + flits);
            self.ni[tile].busy_until = busy_end;
            self.sched_router_work(router, t)?;
            if !self.ni[tile].is_empty() {
                self.sched_ni_inject(tile, busy_end)?;
            }
        } else if let Some(future) = earliest_future {
            self.sched_ni_inject(tile, future)?;
        }
        Ok(())
    }

    /// Output-port arbitration at one router: for each free output port the
    /// oldest eligible head (by arrival time, then packet id) departs.
    fn router_work(&mut self, router: usize, t: SimTime) -> Result<(), SimError> {
        self.router_wake[router].remove(&t.fs());
        let isl = self.router_island[router];
        let (edge, et) = self.clocks.clock(isl).edge_at_or_after(t);
        if et > t {
            self.sched_router_work(router, et)?;
            return Ok(());
        }
        let pos = self.mesh.routers[router].pos;
        let rows = self.mesh.rows;
        let cols = self.mesh.cols;
        let depth = self.mesh.timing.fifo_depth;
        let pipeline = self.mesh.timing.pipeline;
        let mut retry_at: Option<SimTime> = None;
        let bump_retry = |r: &mut Option<SimTime>, t: SimTime| {
            *r = Some(match *r {
                Some(existing) => existing.min(t),
                None => t,
            });
        };

        for out_port in [Port::East, Port::West, Port::North, Port::South, Port::Local] {
            let busy = self.mesh.routers[router].out_busy_until[out_port.index()];
            let mut best: Option<(SimTime, u64, usize, usize)> = None;
            let mut has_waiting = false;
            for in_port in 0..PORT_COUNT {
                for vn in 0..VNET_COUNT {
                    let Some(head) = self.mesh.routers[router].fifos[in_port][vn].front() else {
                        continue;
                    };
                    if head.arrived > t {
                        bump_retry(&mut retry_at, head.arrived);
                        continue;
                    }
                    let hop = xy_next_hop(pos, head.packet.dst, rows, cols)
                        .map_err(|e| SimError::Protocol(e.to_string()))?;
                    if hop != out_port {
                        continue;
                    }
                    has_waiting = true;
                    if busy > t {
                        continue;
                    }
                    if out_port != Port::Local {
                        let nb = self
                            .mesh
                            .neighbor(pos, out_port)
                            .expect("xy routing stays inside the mesh");
                        let nb_idx = self.mesh.index(nb);
                        if self.mesh.routers[nb_idx].occupancy(out_port.opposite(), vn) >= depth {
                            continue; // no credit; the downstream pop wakes us
                        }
                    }
                    let key = (head.arrived, head.packet.id);
                    if best.map(|(a, i, _, _)| key < (a, i)).unwrap_or(true) {
                        best = Some((head.arrived, head.packet.id, in_port, vn));
                    }
                }
            }
            if busy > t && has_waiting {
                bump_retry(&mut retry_at, busy);
                continue;
            }
            let Some((arrived, _, in_port, vn)) = best else {
                continue;
            };
            let qp = self.mesh.routers[router].fifos[in_port][vn]
                .pop_front()
                .expect("candidate head");
            if self.ejection_log.is_some() {
                self.max_sit_fs = self.max_sit_fs.max(t.fs() - arrived.fs());
            }
            let flits = qp.packet.size_flits;
            let busy_end = self.clocks.clock(isl).edge_time(edge + flits);
            self.mesh.routers[router].out_busy_until[out_port.index()] = busy_end;

            if out_port == Port::Local {
                // Tail arrives `flits` cycles after ejection starts.
                self.kernel.schedule(
                    busy_end,
                    Ev::Eject {
                        router,
                        packet: qp.packet,
                    },
                )?;
            } else {
                let nb = self.mesh.neighbor(pos, out_port).unwrap();
                let nb_idx = self.mesh.index(nb);
                let nb_isl = self.router_island[nb_idx];
                let head_raw = self.clocks.clock(isl).edge_time(edge + pipeline + 1);
                let head_at = self.clocks.crossing_delay(isl, nb_isl, head_raw);
                self.mesh.routers[nb_idx].reserved[out_port.opposite().index()][vn] += 1;
                self.kernel.schedule(
                    head_at,
                    Ev::RouterArrive {
                        router: nb_idx,
                        port: out_port.opposite().index(),
                        vnet: vn,
                        qp: QueuedPacket {
                            packet: qp.packet,
                            arrived: head_at,
                        },
                    },
                )?;
            }
            // Freed a slot: wake the upstream source.
            if in_port == Port::Local.index() {
                let tile = self.tile_index(pos).expect("tile at router");
                self.sched_ni_inject(tile, t)?;
            } else {
                let upstream_port = match in_port {
                    0 => Port::East,
                    1 => Port::West,
                    2 => Port::North,
                    3 => Port::South,
                    _ => unreachable!(),
                };
                if let Some(up) = self.mesh.neighbor(pos, upstream_port) {
                    let up_idx = self.mesh.index(up);
                    self.sched_router_work(up_idx, t)?;
                }
            }
            bump_retry(&mut retry_at, busy_end);
        }
        if let Some(retry) = retry_at {
            if retry > t {
                self.sched_router_work(router, retry)?;
            }
        }
        Ok(())
    }

    fn tile_deliver(&mut self, tile: usize, packet: Packet, t: SimTime) -> Result<(), SimError> {
        self.raw_pkts_in[tile] += 1;
        self.monitor.count_pkt_in(tile);
        if let Some(log) = self.ejection_log.as_mut() {
            log.push(EjectionRecord {
                t,
                tile,
                packet_id: packet.id,
                class: packet.class,
                src: packet.src,
                dst: packet.dst,
                payload_bytes: packet.payload_bytes,
            });
        }
        if packet.synthetic {
            return Ok(());
        }
        match &self.tiles[tile] {
            TileModel::Mem(_) => self.mem_deliver(tile, packet, t),
            TileModel::Accel(_) => self.accel_deliver(tile, packet, t),
            TileModel::Stub => Ok(()), // CPU/IO stubs: counters only
        }
    }

    fn mem_deliver(&mut self, tile: usize, packet: Packet, t: SimTime) -> Result<(), SimError> {
        let (resp_class, resp_payload) = match packet.class {
            PacketClass::MemReq => (Some(PacketClass::RdData), packet.req_bytes),
            PacketClass::WrData => (Some(PacketClass::MemResp), MEM_RESP_BYTES),
            // Descriptor packets carry no service.
            PacketClass::RdCtrl | PacketClass::WrCtrl => (None, 0),
            other => {
                return Err(SimError::Protocol(format!(
                    "memory received unexpected {} packet",
                    other.name()
                )))
            }
        };
        let Some(resp_class) = resp_class else {
            return Ok(());
        };
        let isl = self.tile_island[tile];
        let (a_idx, _) = self.clocks.clock(isl).edge_at_or_after(t);
        let bytes = packet.req_bytes.max(1);
        let (done_idx, start_idx) = {
            let TileModel::Mem(m) = &mut self.tiles[tile] else {
                unreachable!()
            };
            let serve = m.serve_cycles(bytes);
            let done = m.admit(a_idx, bytes);
            (done, done - serve)
        };
        let clock = self.clocks.clock(isl);
        let done_t = clock.edge_time(done_idx);
        let start_t = clock.edge_time(start_idx);
        if let TileModel::Mem(m) = &mut self.tiles[tile] {
            m.busy_fs += done_t.fs() - start_t.fs();
        }
        let pos = self.desc.tiles[tile].pos;
        let resp = self.make_packet(resp_class, pos, packet.src, resp_payload, 0, done_t, packet.tag);
        let ready = self.crossing_to_router(tile, done_t);
        self.ni[tile].queues[NI_RESP].push_back(NiPacket { packet: resp, ready });
        self.sched_ni_inject(tile, ready)?;
        Ok(())
    }

    fn accel_deliver(&mut self, tile: usize, packet: Packet, t: SimTime) -> Result<(), SimError> {
        let isl = self.tile_island[tile];
        let (edge, _) = self.clocks.clock(isl).edge_at_or_after(t);
        match packet.class {
            PacketClass::RdData => {
                let (issue, compute_edges, replica) = {
                    let TileModel::Accel(tm) = &mut self.tiles[tile] else {
                        unreachable!()
                    };
                    let r = packet.tag.replica;
                    if tm.replicas[r].state != ReplicaState::AwaitData {
                        return Err(SimError::Protocol(format!(
                            "data arrived for replica {r} in state {:?}",
                            tm.replicas[r].state
                        )));
                    }
                    if tm.bridge.read_grant != Some(r) {
                        return Err(SimError::Protocol(
                            "read data without a held read grant".into(),
                        ));
                    }
                    tm.bridge.read_grant = None;
                    let issue = tm.replicas[r].read_issued_at.take();
                    let cycles = tm.profile.compute_cycles_per_item * tm.replicas[r].chunk_items;
                    if cycles == 0 {
                        // Degenerate profile: the compute phase is skipped.
                        tm.replicas[r].state = ReplicaState::IssueWrite;
                        tm.want_write.insert(r);
                    } else {
                        tm.replicas[r].state = ReplicaState::Compute;
                    }
                    (issue, cycles, r)
                };
                if let Some(issue) = issue {
                    self.monitor.record_rtt(tile, issue, t);
                }
                if compute_edges > 0 {
                    let target = edge + compute_edges;
                    let when = self.clocks.clock(isl).edge_time(target);
                    let id = self.kernel.schedule(
                        when,
                        Ev::ComputeDone {
                            tile,
                            replica,
                            target_edge: target,
                        },
                    )?;
                    self.cycle_timers.insert(
                        id.raw(),
                        CycleTimer {
                            island: isl,
                            tile,
                            replica,
                            target_edge: target,
                            event: id,
                        },
                    );
                }
                self.sched_tile_work(tile, t)?;
                Ok(())
            }
            PacketClass::MemResp => {
                let finished = {
                    let TileModel::Accel(tm) = &mut self.tiles[tile] else {
                        unreachable!()
                    };
                    let r = packet.tag.replica;
                    if !tm.replicas[r].write_outstanding {
                        return Err(SimError::Protocol(
                            "write acknowledgement without outstanding write".into(),
                        ));
                    }
                    tm.replicas[r].write_outstanding = false;
                    if tm.bridge.write_grant != Some(r) {
                        return Err(SimError::Protocol(
                            "write acknowledgement without a held write grant".into(),
                        ));
                    }
                    tm.bridge.write_grant = None;
                    if tm.replicas[r].state == ReplicaState::Draining {
                        tm.replicas[r].state = ReplicaState::Done;
                        match tm.invocation.as_mut() {
                            Some(inv) => {
                                inv.replicas_done += 1;
                                inv.replicas_done == tm.k
                            }
                            None => false,
                        }
                    } else {
                        false
                    }
                };
                if finished {
                    self.finish_invocation(tile, t, edge)?;
                }
                self.sched_tile_work(tile, t)?;
                Ok(())
            }
            other => Err(SimError::Protocol(format!(
                "accelerator received unexpected {} packet",
                other.name()
            ))),
        }
    }

    fn compute_done(
        &mut self,
        tile: usize,
        replica: usize,
        target_edge: u64,
        t: SimTime,
    ) -> Result<(), SimError> {
        self.cycle_timers.retain(|_, timer| {
            !(timer.tile == tile && timer.replica == replica && timer.target_edge == target_edge)
        });
        let TileModel::Accel(tm) = &mut self.tiles[tile] else {
            unreachable!()
        };
        if tm.replicas[replica].state != ReplicaState::Compute {
            return Err(SimError::Protocol(format!(
                "compute timer fired in state {:?}",
                tm.replicas[replica].state
            )));
        }
        tm.replicas[replica].state = ReplicaState::IssueWrite;
        tm.want_write.insert(replica);
        self.sched_tile_work(tile, t)?;
        Ok(())
    }

    /// After an accepted retarget, pending cycle timers of the island map to
    /// new edge times; cancel and reschedule the moved ones.
    fn retime_island_timers(&mut self, island: usize) {
        let moved: Vec<CycleTimer> = self
            .cycle_timers
            .values()
            .filter(|timer| timer.island == island)
            .copied()
            .collect();
        let now = self.now();
        for timer in moved {
            let new_time = self.clocks.clock(island).edge_time(timer.target_edge);
            if self.kernel.cancel(timer.event) {
                self.cycle_timers.remove(&timer.event.raw());
                let id = self
                    .kernel
                    .schedule(
                        new_time.max(now),
                        Ev::ComputeDone {
                            tile: timer.tile,
                            replica: timer.replica,
                            target_edge: timer.target_edge,
                        },
                    )
                    .expect("retimed event is in the future");
                self.cycle_timers.insert(
                    id.raw(),
                    CycleTimer {
                        event: id,
                        ..timer
                    },
                );
            }
        }
    }

    fn run_command(&mut self, idx: usize, t: SimTime) -> Result<(), SimError> {
        let cmd = self.schedule[idx].command.clone();
        match cmd {
            HostCommand::WriteFrequency { island, hz } => {
                let Some(isl) = self.desc.island_by_name(&island) else {
                    self.command_log.push(CommandRejection {
                        at: t,
                        command: format!("write_frequency {island} {hz}"),
                        reason: "unknown island".into(),
                    });
                    return Ok(());
                };
                if let WriteOutcome::Rejected(reason) = self.write_frequency(isl, hz) {
                    self.command_log.push(CommandRejection {
                        at: t,
                        command: format!("write_frequency {island} {hz}"),
                        reason: reason.to_string(),
                    });
                }
            }
            HostCommand::TgEnableCount { count } => {
                self.set_active_tg_count(count)?;
            }
            HostCommand::TgSet { tile, enabled } => {
                if let Err(e) = self.set_tg_enabled(tile, enabled) {
                    self.command_log.push(CommandRejection {
                        at: t,
                        command: format!("tg_set {tile} {enabled}"),
                        reason: e.to_string(),
                    });
                }
            }
            HostCommand::ResetCounters { tile } => match tile {
                Some(pos) => {
                    if let Some(i) = self.tile_index(pos) {
                        self.monitor.reset_manual(i);
                    }
                }
                None => {
                    for i in 0..self.monitor.tile_count() {
                        self.monitor.reset_manual(i);
                    }
                }
            },
            HostCommand::SampleProbe { probe } => {
                if let Some(i) = self.tile_index(probe) {
                    if let Some(sid) = self.samplers.iter().position(|s| s.probe_tile == i) {
                        let count = self.raw_pkts_in[i];
                        self.samplers[sid].sample(t, count);
                    }
                }
            }
        }
        Ok(())
    }
}
