//! Static SoC description: the mesh, tiles, frequency islands, NoC and memory
//! parameters, and accelerator behavioral profiles, together with the TOML
//! document format, validation, and the built-in reference testbed.

use crate::clocking::{ActuatorMode, FreqGrid};
use crate::noc::{hop_count, Position};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

pub const SCHEMA_VERSION: u32 = 1;

pub use crate::calibration::{calibrate_profile, CalibrationError};

const MHZ: u64 = 1_000_000;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("parse error at line {line}, column {col}: {message}")]
    Parse {
        line: usize,
        col: usize,
        message: String,
    },
    #[error("invalid description:\n{0}")]
    Invalid(ValidationReport),
    #[error("unsupported schema version {0} (expected {SCHEMA_VERSION})")]
    SchemaVersion(u32),
    #[error("unknown accelerator {0:?}")]
    UnknownAccelerator(String),
    #[error("serialization failed: {0}")]
    Serialize(#[from] toml::ser::Error),
}

/// One invariant violation found by [`validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub location: String,
    pub message: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.location, self.message)
    }
}

/// Outcome of validating a description; empty means valid.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    fn push(&mut self, location: impl Into<String>, message: impl Into<String>) {
        self.violations.push(Violation {
            location: location.into(),
            message: message.into(),
        });
    }
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for v in &self.violations {
            writeln!(f,"  - {v}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TileKind {
    Cpu,
    Mem,
    Io,
    Accel,
    Tg,
}

impl TileKind {
    pub fn name(self) -> &'static str {
        match self {
            TileKind::Cpu => "cpu",
            TileKind::Mem => "mem",
            TileKind::Io => "io",
            TileKind::Accel => "accel",
            TileKind::Tg => "tg",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TileSpec {
    pub pos: Position,
    pub kind: TileKind,
    /// Accelerator profile name; required for ACCEL and TG tiles.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub accel: Option<String>,
    /// Replication factor K; ACCEL tiles only, defaults to 1.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replication: Option<u32>,
    /// TG tiles only: whether the generator runs from t=0.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub enabled_at_start: Option<bool>,
}

impl TileSpec {
    pub fn replication(&self) -> u32 {
        self.replication.unwrap_or(1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase", deny_unknown_fields)]
pub enum ClockSpec {
    Fixed {
        hz: u64,
    },
    Dfs {
        min_hz: u64,
        max_hz: u64,
        step_hz: u64,
        initial_hz: u64,
    },
}

impl ClockSpec {
    pub fn initial_hz(&self) -> u64 {
        match *self {
            ClockSpec::Fixed { hz } => hz,
            ClockSpec::Dfs { initial_hz, .. } => initial_hz,
        }
    }

    pub fn grid(&self) -> Option<FreqGrid> {
        match *self {
            ClockSpec::Fixed { .. } => None,
            ClockSpec::Dfs {
                min_hz,
                max_hz,
                step_hz,
                ..
            } => Some(FreqGrid {
                min_hz,
                max_hz,
                step_hz,
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ActuatorKind {
    #[default]
    Dual,
    Naive,
}

impl From<ActuatorKind> for ActuatorMode {
    fn from(k: ActuatorKind) -> Self {
        match k {
            ActuatorKind::Dual => ActuatorMode::DualOscillator,
            ActuatorKind::Naive => ActuatorMode::NaiveSingle,
        }
    }
}

fn default_reconfig_latency_us() -> u64 {
    10
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IslandSpec {
    pub id: u32,
    pub name: String,
    /// Tile positions belonging to this island.
    #[serde(default)]
    pub tiles: Vec<Position>,
    /// Router positions belonging to this island.
    #[serde(default)]
    pub routers: Vec<Position>,
    pub clock: ClockSpec,
    #[serde(default)]
    pub actuator: ActuatorKind,
    #[serde(default = "default_reconfig_latency_us")]
    pub reconfig_latency_us: u64,
}

fn default_link_bytes() -> u64 {
    8
}
fn default_pipeline() -> u64 {
    1
}
fn default_fifo_depth() -> u32 {
    4
}
fn default_sync_stages() -> u64 {
    2
}

/// NoC link and router parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NocParams {
    /// Link width in bytes per NoC cycle.
    #[serde(default = "default_link_bytes")]
    pub link_bytes: u64,
    /// Router pipeline latency in NoC cycles.
    #[serde(default = "default_pipeline")]
    pub router_pipeline: u64,
    /// Input FIFO depth in packets, per port and virtual network.
    #[serde(default = "default_fifo_depth")]
    pub fifo_depth: u32,
    /// Synchronizer stages on island boundaries, in destination cycles.
    #[serde(default = "default_sync_stages")]
    pub sync_stages: u64,
}

impl Default for NocParams {
    fn default() -> Self {
        NocParams {
            link_bytes: default_link_bytes(),
            router_pipeline: default_pipeline(),
            fifo_depth: default_fifo_depth(),
            sync_stages: default_sync_stages(),
        }
    }
}

fn default_mem_bytes_per_cycle() -> u64 {
    2
}
fn default_mem_latency() -> u64 {
    150
}

/// Memory controller service model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MemModel {
    /// Bytes served per memory-controller cycle.
    #[serde(default = "default_mem_bytes_per_cycle")]
    pub bytes_per_cycle: u64,
    /// Fixed service latency in memory cycles.
    #[serde(default = "default_mem_latency")]
    pub latency_cycles: u64,
}

impl Default for MemModel {
    fn default() -> Self {
        MemModel {
            bytes_per_cycle: default_mem_bytes_per_cycle(),
            latency_cycles: default_mem_latency(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundedness {
    ComputeBound,
    MemoryBound,
}

/// Calibrated behavioral model of one accelerator.
///
/// An invocation processes `items`; each item reads `bytes_read_per_item`,
/// costs `compute_cycles_per_item` accelerator cycles, and writes
/// `bytes_written_per_item`. DMA traffic moves in bursts of `burst_bytes`
/// of input (with the proportional share of output).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AcceleratorProfile {
    pub name: String,
    pub items_per_invocation: u64,
    pub bytes_read_per_item: u64,
    pub bytes_written_per_item: u64,
    pub compute_cycles_per_item: u64,
    pub burst_bytes: u64,
    pub boundedness: Boundedness,
}

impl AcceleratorProfile {
    /// Items covered by one DMA burst.
    pub fn items_per_burst(&self) -> u64 {
        (self.burst_bytes / self.bytes_read_per_item).max(1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub rows: u32,
    pub cols: u32,
}

/// Full static description of a mesh SoC.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SoCDescription {
    pub schema_version: u32,
    pub grid: GridSpec,
    #[serde(default)]
    pub noc: NocParams,
    #[serde(default)]
    pub memory: MemModel,
    pub tiles: Vec<TileSpec>,
    pub islands: Vec<IslandSpec>,
    #[serde(default)]
    pub profiles: Vec<AcceleratorProfile>,
}

impl SoCDescription {
    pub fn tile_index(&self, pos: Position) -> Option<usize> {
        self.tiles.iter().position(|t| t.pos == pos)
    }

    pub fn tile_at(&self, pos: Position) -> Option<&TileSpec> {
        self.tiles.iter().find(|t| t.pos == pos)
    }

    pub fn profile(&self, name: &str) -> Option<&AcceleratorProfile> {
        self.profiles.iter().find(|p| p.name == name)
    }

    pub fn mem_pos(&self) -> Option<Position> {
        self.tiles
            .iter()
            .find(|t| t.kind == TileKind::Mem)
            .map(|t| t.pos)
    }

    /// Island index (into `islands`) owning a tile position.
    pub fn island_of_tile(&self, pos: Position) -> Option<usize> {
        self.islands
            .iter()
            .position(|i| i.tiles.contains(&pos))
    }

    pub fn island_of_router(&self, pos: Position) -> Option<usize> {
        self.islands
            .iter()
            .position(|i| i.routers.contains(&pos))
    }

    pub fn island_by_name(&self, name: &str) -> Option<usize> {
        self.islands.iter().position(|i| i.name == name)
    }

    /// ACCEL tiles ordered by hop distance from memory: the first entry is
    /// the near slot (A1), the last the far slot (A2).
    pub fn accel_slots(&self) -> Vec<Position> {
        let mem = match self.mem_pos() {
            Some(m) => m,
            None => return Vec::new(),
        };
        let mut slots: Vec<Position> = self
            .tiles
            .iter()
            .filter(|t| t.kind == TileKind::Accel)
            .map(|t| t.pos)
            .collect();
        slots.sort_by_key(|&p| (hop_count(p, mem), p));
        slots
    }

    pub fn tg_tiles(&self) -> Vec<Position> {
        self.tiles
            .iter()
            .filter(|t| t.kind == TileKind::Tg)
            .map(|t| t.pos)
            .collect()
    }
}

/// Parse and validate a configuration document.
pub fn load_description(text: &str) -> Result<SoCDescription, ConfigError> {
    let desc: SoCDescription = toml::from_str(text).map_err(|e| {
        let (line, col) = e
            .span()
            .map(|span| offset_to_line_col(text, span.start))
            .unwrap_or((0, 0));
        ConfigError::Parse {
            line,
            col,
            message: e.message().to_string(),
        }
    })?;
    if desc.schema_version != SCHEMA_VERSION {
        return Err(ConfigError::SchemaVersion(desc.schema_version));
    }
    let report = validate(&desc);
    if !report.is_empty() {
        return Err(ConfigError::Invalid(report));
    }
    Ok(desc)
}

/// Render a description back to its document form.
pub fn serialize_description(desc: &SoCDescription) -> Result<String, ConfigError> {
    Ok(toml::to_string(desc)?)
}

fn offset_to_line_col(text: &str, offset: usize) -> (usize, usize) {
    let mut line = 1;
    let mut col = 1;
    for (i, ch) in text.char_indices() {
        if i >= offset {
            break;
        }
        if ch == '\n' {
            line += 1;
            col = 1;
        } else {
            col += 1;
        }
    }
    (line, col)
}

/// Check every type invariant; one report entry per violation.
pub fn validate(desc: &SoCDescription) -> ValidationReport {
    let mut rep = ValidationReport::default();
    let rows = desc.grid.rows;
    let cols = desc.grid.cols;

    if rows == 0 || cols == 0 {
        rep.push("grid", "rows and cols must be positive");
        return rep;
    }
    if desc.tiles.len() != (rows * cols) as usize {
        rep.push(
            "tiles",
            format!(
                "expected {} tiles for a {}x{} grid, found {}",
                rows * cols,
                rows,
                cols,
                desc.tiles.len()
            ),
        );
    }

    let mut seen = BTreeMap::new();
    for t in &desc.tiles {
        if t.pos.row >= rows || t.pos.col >= cols {
            rep.push(format!("tile {}", t.pos), "position outside the grid");
        }
        if let Some(prev) = seen.insert(t.pos, t.kind) {
            rep.push(
                format!("tile {}", t.pos),
                format!("duplicate position (already {})", prev.name()),
            );
        }
        match t.kind {
            TileKind::Accel | TileKind::Tg => {
                match &t.accel {
                    None => rep.push(
                        format!("tile {}", t.pos),
                        "accel name required for accel/tg tiles",
                    ),
                    Some(name) if desc.profile(name).is_none() => rep.push(
                        format!("tile {}", t.pos),
                        format!("unknown accelerator profile {name:?}"),
                    ),
                    _ => {}
                }
                if t.kind == TileKind::Tg && t.replication.is_some() {
                    rep.push(
                        format!("tile {}", t.pos),
                        "replication applies to accel tiles only",
                    );
                }
                if t.kind == TileKind::Accel && t.enabled_at_start.is_some() {
                    rep.push(
                        format!("tile {}", t.pos),
                        "enabled_at_start applies to tg tiles only",
                    );
                }
                if t.replication == Some(0) {
                    rep.push(format!("tile {}", t.pos), "replication K must be >= 1");
                }
            }
            _ => {
                if t.accel.is_some() || t.replication.is_some() || t.enabled_at_start.is_some() {
                    rep.push(
                        format!("tile {}", t.pos),
                        "accel/replication/enabled_at_start not allowed for this kind",
                    );
                }
            }
        }
    }

    let mems = desc.tiles.iter().filter(|t| t.kind == TileKind::Mem).count();
    if mems != 1 {
        rep.push("tiles", format!("exactly one MEM tile required, found {mems}"));
    }
    for (kind, label) in [(TileKind::Cpu, "CPU"), (TileKind::Io, "IO")] {
        let n = desc.tiles.iter().filter(|t| t.kind == kind).count();
        if n > 1 {
            rep.push("tiles", format!("at most one {label} tile allowed, found {n}"));
        }
    }

    // Island coverage: every tile and router in exactly one island.
    let mut ids = BTreeMap::new();
    for isl in &desc.islands {
        if let Some(prev) = ids.insert(isl.id, &isl.name) {
            rep.push(
                format!("island {}", isl.id),
                format!("duplicate island id (already {prev:?})"),
            );
        }
        if isl.tiles.is_empty() && isl.routers.is_empty() {
            rep.push(format!("island {}", isl.id), "island is empty");
        }
        match isl.clock {
            ClockSpec::Fixed { hz } => {
                if hz == 0 {
                    rep.push(format!("island {}", isl.id), "fixed frequency must be positive");
                }
            }
            ClockSpec::Dfs {
                min_hz,
                max_hz,
                step_hz,
                initial_hz,
            } => {
                if step_hz == 0 {
                    rep.push(format!("island {}", isl.id), "step must be positive");
                } else {
                    if min_hz > max_hz {
                        rep.push(format!("island {}", isl.id), "min frequency above max");
                    }
                    if (max_hz - min_hz) % step_hz != 0 {
                        rep.push(
                            format!("island {}", isl.id),
                            "(max - min) not divisible by step",
                        );
                    }
                    if initial_hz < min_hz || initial_hz > max_hz {
                        rep.push(format!("island {}", isl.id), "initial frequency out of range");
                    } else if (initial_hz - min_hz) % step_hz != 0 {
                        rep.push(
                            format!("island {}", isl.id),
                            "initial frequency not on step grid",
                        );
                    }
                }
            }
        }
    }

    for t in &desc.tiles {
        let n = desc
            .islands
            .iter()
            .filter(|i| i.tiles.contains(&t.pos))
            .count();
        if n == 0 {
            rep.push(
                format!("tile {}", t.pos),
                format!("tile {} not in any island", t.pos),
            );
        } else if n > 1 {
            rep.push(format!("tile {}", t.pos), "tile in more than one island");
        }
    }
    for r in 0..rows {
        for c in 0..cols {
            let pos = Position::new(r, c);
            let n = desc
                .islands
                .iter()
                .filter(|i| i.routers.contains(&pos))
                .count();
            if n == 0 {
                rep.push(
                    format!("router {pos}"),
                    format!("router {pos} not in any island"),
                );
            } else if n > 1 {
                rep.push(format!("router {pos}"), "router in more than one island");
            }
        }
    }

    if desc.noc.link_bytes == 0 {
        rep.push("noc.link_bytes", "link width must be positive");
    }
    if desc.noc.fifo_depth == 0 {
        rep.push("noc.fifo_depth", "FIFO depth must be positive");
    }
    if desc.noc.sync_stages < 2 {
        rep.push("noc.sync_stages", "synchronizer depth must be at least 2");
    }
    if desc.memory.bytes_per_cycle == 0 {
        rep.push("memory.bytes_per_cycle", "service rate must be positive");
    }

    let mut names = BTreeMap::new();
    for p in &desc.profiles {
        if names.insert(p.name.clone(), ()).is_some() {
            rep.push(format!("profile {}", p.name), "duplicate profile name");
        }
        if p.items_per_invocation == 0 || p.bytes_read_per_item == 0 || p.bytes_written_per_item == 0
        {
            rep.push(
                format!("profile {}", p.name),
                "items and per-item byte counts must be strictly positive",
            );
        }
        if p.burst_bytes == 0 {
            rep.push(format!("profile {}", p.name), "burst_bytes must be positive");
        } else {
            if p.burst_bytes > p.items_per_invocation * p.bytes_read_per_item {
                rep.push(
                    format!("profile {}", p.name),
                    "burst_bytes exceeds bytes of one invocation",
                );
            }
            if p.bytes_read_per_item > 0 && p.burst_bytes % p.bytes_read_per_item != 0 {
                rep.push(
                    format!("profile {}", p.name),
                    "burst_bytes must be a whole number of items",
                );
            }
        }
    }

    rep
}

/// Default accelerator profiles calibrated against the reference targets.
///
/// The byte-per-item shape and burst sizes are fixed design choices; the
/// compute cycle counts are the frozen output of [`crate::calibration`] at
/// reference clocks (accelerator 50 MHz, NoC and memory 100 MHz, idle mesh).
pub fn builtin_profiles() -> Vec<AcceleratorProfile> {
    vec![
        AcceleratorProfile {
            name: "adpcm".into(),
            items_per_invocation: 16,
            bytes_read_per_item: 1024,
            bytes_written_per_item: 512,
            compute_cycles_per_item: 36009,
            burst_bytes: 1024,
            boundedness: Boundedness::ComputeBound,
        },
        AcceleratorProfile {
            name: "dfadd".into(),
            items_per_invocation: 64,
            bytes_read_per_item: 48,
            bytes_written_per_item: 24,
            compute_cycles_per_item: 155,
            burst_bytes: 48,
            boundedness: Boundedness::MemoryBound,
        },
        AcceleratorProfile {
            name: "dfmul".into(),
            items_per_invocation: 64,
            bytes_read_per_item: 64,
            bytes_written_per_item: 32,
            compute_cycles_per_item: 255,
            burst_bytes: 64,
            boundedness: Boundedness::MemoryBound,
        },
        AcceleratorProfile {
            name: "dfsin".into(),
            items_per_invocation: 16,
            bytes_read_per_item: 1024,
            bytes_written_per_item: 1024,
            compute_cycles_per_item: 154429,
            burst_bytes: 1024,
            boundedness: Boundedness::ComputeBound,
        },
        AcceleratorProfile {
            name: "gsm".into(),
            items_per_invocation: 64,
            bytes_read_per_item: 32,
            bytes_written_per_item: 16,
            compute_cycles_per_item: 249,
            burst_bytes: 32,
            boundedness: Boundedness::MemoryBound,
        },
    ]
}

/// How the five-or-six island question is resolved for the testbed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum IslandVariant {
    /// Six independent clocks: NoC+MEM, A1, A2, TG, CPU, IO.
    #[default]
    Six,
    /// Five clocks with CPU and IO sharing one island.
    Five,
}

/// The built-in 4x4 reference testbed: one CPU, one MEM, one IO, eleven TG
/// tiles running the dfadd profile, and two accelerator slots A1 (adjacent to
/// memory) and A2 (at maximal hop distance from memory).
pub fn reference_testbed() -> SoCDescription {
    reference_testbed_with(("dfsin", 1), ("gsm", 1), IslandVariant::Six)
}

/// Testbed with explicit accelerators `(name, K)` in the A1 and A2 slots.
pub fn reference_testbed_with(
    a1: (&str, u32),
    a2: (&str, u32),
    variant: IslandVariant,
) -> SoCDescription {
    let mem = Position::new(0, 3);
    let a1_pos = Position::new(1, 3); // one hop from memory
    let a2_pos = Position::new(3, 0); // six hops from memory
    let cpu = Position::new(0, 0);
    let io = Position::new(0, 1);

    let mut tiles = Vec::new();
    let mut tg_tiles = Vec::new();
    for r in 0..4 {
        for c in 0..4 {
            let pos = Position::new(r, c);
            let spec = if pos == mem {
                TileSpec {
                    pos,
                    kind: TileKind::Mem,
                    accel: None,
                    replication: None,
                    enabled_at_start: None,
                }
            } else if pos == cpu {
                TileSpec {
                    pos,
                    kind: TileKind::Cpu,
                    accel: None,
                    replication: None,
                    enabled_at_start: None,
                }
            } else if pos == io {
                TileSpec {
                    pos,
                    kind: TileKind::Io,
                    accel: None,
                    replication: None,
                    enabled_at_start: None,
                }
            } else if pos == a1_pos {
                TileSpec {
                    pos,
                    kind: TileKind::Accel,
                    accel: Some(a1.0.to_string()),
                    replication: Some(a1.1),
                    enabled_at_start: None,
                }
            } else if pos == a2_pos {
                TileSpec {
                    pos,
                    kind: TileKind::Accel,
                    accel: Some(a2.0.to_string()),
                    replication: Some(a2.1),
                    enabled_at_start: None,
                }
            } else {
                tg_tiles.push(pos);
                TileSpec {
                    pos,
                    kind: TileKind::Tg,
                    accel: Some("dfadd".to_string()),
                    replication: None,
                    enabled_at_start: Some(false),
                }
            };
            tiles.push(spec);
        }
    }

    let all_routers: Vec<Position> = (0..4)
        .flat_map(|r| (0..4).map(move |c| Position::new(r, c)))
        .collect();

    let dfs_wide = ClockSpec::Dfs {
        min_hz: 10 * MHZ,
        max_hz: 100 * MHZ,
        step_hz: 5 * MHZ,
        initial_hz: 100 * MHZ,
    };
    let dfs_narrow = ClockSpec::Dfs {
        min_hz: 10 * MHZ,
        max_hz: 50 * MHZ,
        step_hz: 5 * MHZ,
        initial_hz: 50 * MHZ,
    };

    let island = |id: u32, name: &str, tiles: Vec<Position>, routers: Vec<Position>, clock| {
        IslandSpec {
            id,
            name: name.into(),
            tiles,
            routers,
            clock,
            actuator: ActuatorKind::Dual,
            reconfig_latency_us: default_reconfig_latency_us(),
        }
    };

    let mut islands = vec![
        island(0, "noc", vec![mem], all_routers, dfs_wide),
        island(1, "a1", vec![a1_pos], vec![], dfs_narrow),
        island(2, "a2", vec![a2_pos], vec![], dfs_narrow),
        island(3, "tg", tg_tiles, vec![], dfs_narrow),
    ];
    match variant {
        IslandVariant::Six => {
            islands.push(island(4, "cpu", vec![cpu], vec![], dfs_narrow));
            islands.push(island(5, "io", vec![io], vec![], dfs_narrow));
        }
        IslandVariant::Five => {
            islands.push(island(4, "cpu_io", vec![cpu, io], vec![], dfs_narrow));
        }
    }

    SoCDescription {
        schema_version: SCHEMA_VERSION,
        grid: GridSpec { rows: 4, cols: 4 },
        noc: NocParams::default(),
        memory: MemModel::default(),
        tiles,
        islands,
        profiles: builtin_profiles(),
    }
}
