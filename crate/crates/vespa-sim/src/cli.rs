//! Command-line front end: single runs, design-space sweeps, and
//! schedule-driven profiling, emitting CSV and plot-data files.
//!
//! Exit codes: 0 success, 1 configuration error, 2 simulation fault,
//! 3 partial sweep failure.

use crate::area::{estimate, CalibrationTable};
use crate::config::{
    load_description, reference_testbed, validate, ClockSpec, SoCDescription, TileKind,
};
use crate::engine::SimTime;
use crate::monitor::RatePoint;
use crate::noc::Position;
use crate::sim::{BatchResult, HostCommand, ScheduledCommand, SimError, SocSim};
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("simulation fault: {0}")]
    Sim(String),
    #[error("{failed} of {total} sweep points failed")]
    PartialSweep { failed: usize, total: usize },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Sim(_) | CliError::Io { .. } => 2,
            CliError::PartialSweep { .. } => 3,
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::InvalidDescription(msg) => CliError::Config(msg),
            other => CliError::Sim(other.to_string()),
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "vespa-sim",
    about = "Deterministic simulator for tile-based SoCs with multi-replica accelerator tiles and DFS frequency islands",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Simulate one configuration for a fixed duration.
    Run(RunArgs),
    /// Evaluate every point of a declared design space.
    Sweep(SweepArgs),
    /// Run a time-varying command schedule and record traffic/frequency
    /// series.
    Profile(ProfileArgs),
}

#[derive(Args, Debug)]
pub struct RunArgs {
    /// SoC description document; the built-in testbed when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Simulated duration, e.g. `50ms`, `100us`, or a femtosecond count.
    #[arg(long, default_value = "50ms")]
    pub duration: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Traffic sampling window for trace.csv.
    #[arg(long, default_value = "1ms")]
    pub window: String,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    /// Sweep space document.
    #[arg(long)]
    pub config: PathBuf,
    /// Worker threads for independent points.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// Input byte budget per point (overrides the space document).
    #[arg(long)]
    pub budget_bytes: Option<u64>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct ProfileArgs {
    /// SoC description document; the built-in testbed when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Command schedule document.
    #[arg(long)]
    pub schedule: PathBuf,
    /// Simulated duration; defaults to the last command time plus 10 ms.
    #[arg(long)]
    pub duration: Option<String>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Traffic sampling window.
    #[arg(long, default_value = "1ms")]
    pub window: String,
    /// Also render the two panels to profile.svg.
    #[arg(long)]
    pub render: bool,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

/// Parse a human duration: `<n>` fs, or `<n>(fs|ps|ns|us|ms|s)`.
pub fn parse_duration(text: &str) -> Result<SimTime, CliError> {
    let text = text.trim();
    let split = text.find(|c: char| !c.is_ascii_digit()).unwrap_or(text.len());
    let (num, unit) = text.split_at(split);
    let n: u64 = num
        .parse()
        .map_err(|_| CliError::Config(format!("bad duration {text:?}")))?;
    let scale: u64 = match unit.trim() {
        "" | "fs" => 1,
        "ps" => 1_000,
        "ns" => 1_000_000,
        "us" => 1_000_000_000,
        "ms" => 1_000_000_000_000,
        "s" => 1_000_000_000_000_000,
        other => return Err(CliError::Config(format!("unknown time unit {other:?}"))),
    };
    n.checked_mul(scale)
        .map(SimTime::from_fs)
        .ok_or_else(|| CliError::Config(format!("duration {text:?} overflows")))
}

fn load_config(path: &Option<PathBuf>) -> Result<SoCDescription, CliError> {
    match path {
        None => Ok(reference_testbed()),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
            load_description(&text).map_err(|e| CliError::Config(e.to_string()))
        }
    }
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|source| CliError::Io { path, source })
}

fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.6}")
    } else {
        "nan".to_string()
    }
}

// ---------------------------------------------------------------------------
// run
// ---------------------------------------------------------------------------

pub fn cmd_run(args: &RunArgs) -> Result<(), CliError> {
    let desc = load_config(&args.config)?;
    let duration = parse_duration(&args.duration)?;
    let window = parse_duration(&args.window)?;
    let outputs = execute_run(&desc, args.seed, duration, window)?;
    write_file(&args.out, "metrics.csv", &outputs.metrics_csv)?;
    write_file(&args.out, "trace.csv", &outputs.trace_csv)?;
    Ok(())
}

pub struct RunOutputs {
    pub metrics_csv: String,
    pub trace_csv: String,
}

/// Duration-based run: every TG marked enabled-at-start plus every ACCEL tile
/// loops invocations back-to-back; throughput is completed input bytes over
/// the duration.
pub fn execute_run(
    desc: &SoCDescription,
    seed: u64,
    duration: SimTime,
    window: SimTime,
) -> Result<RunOutputs, CliError> {
    let mut sim = SocSim::new(desc, seed)?;
    let mem_pos = desc.mem_pos().expect("validated");
    sim.set_accel_looping()?;
    let sampler = if duration.fs() > 0 {
        Some(sim.add_sampler(mem_pos, window)?)
    } else {
        None
    };
    sim.run_until(duration)?;

    let secs = duration.as_secs_f64();
    let mut metrics = String::from(
        "tile_row,tile_col,kind,accel,replication,throughput_mbps,exec_time_cycles,pkts_in,pkts_out,rtt_count,rtt_mean_fs,busy_frac\n",
    );
    for (i, spec) in desc.tiles.iter().enumerate() {
        let c = sim.monitor.tile(i);
        let thr = match sim.accel_tile(i) {
            Some(t) if secs > 0.0 => t.input_bytes_completed as f64 / secs / 1e6,
            _ => 0.0,
        };
        let busy = if spec.kind == TileKind::Mem {
            sim.mem_busy_fraction()
        } else {
            0.0
        };
        let _ = writeln!(
            metrics,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            spec.pos.row,
            spec.pos.col,
            spec.kind.name(),
            spec.accel.clone().unwrap_or_default(),
            spec.replication.map(|k| k.to_string()).unwrap_or_default(),
            fmt_f64(thr),
            c.exec_time,
            c.pkts_in,
            c.pkts_out,
            c.rtt_count,
            fmt_f64(c.mean_rtt_fs().unwrap_or(0.0)),
            fmt_f64(busy),
        );
    }

    let mut trace = String::from("time_fs,probe,stat,value\n");
    if let Some(sid) = sampler {
        for p in sim.sampler_series(sid) {
            let _ = writeln!(
                trace,
                "{},{},mem_in_mpkts,{}",
                p.t.fs(),
                mem_pos,
                fmt_f64(p.mpkts_per_sec)
            );
        }
    }
    for change in &sim.freq_log {
        let name = &desc.islands[change.island].name;
        let _ = writeln!(
            trace,
            "{},{},freq_mhz,{}",
            change.at.fs(),
            name,
            change.freq_hz / 1_000_000
        );
    }
    Ok(RunOutputs {
        metrics_csv: metrics,
        trace_csv: trace,
    })
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

fn default_budget() -> u64 {
    1_000_000
}
fn default_seeds() -> Vec<u64> {
    vec![0]
}
fn default_placements() -> Vec<String> {
    vec!["normal".into()]
}
fn default_tg_active() -> Vec<u32> {
    vec![0]
}
fn default_warmup() -> String {
    "2ms".into()
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct SlotSpace {
    #[serde(default)]
    pub accels: Vec<String>,
    #[serde(default)]
    pub k: Vec<u32>,
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct SlotsSpace {
    #[serde(default)]
    pub a1: SlotSpace,
    #[serde(default)]
    pub a2: SlotSpace,
}

/// Declarative sweep space: the Cartesian product of every listed choice.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpace {
    pub schema_version: u32,
    /// Base SoC description path; the built-in testbed when omitted.
    #[serde(default)]
    pub base_config: Option<PathBuf>,
    #[serde(default = "default_budget")]
    pub budget_bytes: u64,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub slots: SlotsSpace,
    /// Initial frequency choices in MHz, keyed by island name.
    #[serde(default)]
    pub frequencies: BTreeMap<String, Vec<u64>>,
    #[serde(default = "default_tg_active")]
    pub tg_active: Vec<u32>,
    /// `normal` keeps slot a1 near memory; `swapped` exchanges the slots.
    #[serde(default = "default_placements")]
    pub placements: Vec<String>,
    /// TG warm-up time before measurement starts.
    #[serde(default = "default_warmup")]
    pub warmup: String,
}

/// One fully resolved sweep point, in enumeration order.
#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub index: usize,
    pub seed: u64,
    pub placement: String,
    pub a1: Option<(String, u32)>,
    pub a2: Option<(String, u32)>,
    pub freqs_mhz: Vec<(String, u64)>,
    pub tg_active: u32,
}

/// Deterministic enumeration: placements, then a1 accel/K, a2 accel/K,
/// frequency combinations (islands in name order), TG counts, seeds.
pub fn enumerate_points(space: &SweepSpace) -> Vec<SweepPoint> {
    let opt = |s: &SlotSpace| -> Vec<Option<(String, u32)>> {
        if s.accels.is_empty() || s.k.is_empty() {
            vec![None]
        } else {
            s.accels
                .iter()
                .flat_map(|a| s.k.iter().map(move |k| Some((a.clone(), *k))))
                .collect()
        }
    };
    let a1s = opt(&space.slots.a1);
    let a2s = opt(&space.slots.a2);
    let freq_axes: Vec<(&String, &Vec<u64>)> = space.frequencies.iter().collect();
    let mut freq_combos: Vec<Vec<(String, u64)>> = vec![Vec::new()];
    for (name, vals) in &freq_axes {
        let mut next = Vec::with_capacity(freq_combos.len() * vals.len());
        for combo in &freq_combos {
            for v in vals.iter() {
                let mut c = combo.clone();
                c.push(((*name).clone(), *v));
                next.push(c);
            }
        }
        freq_combos = next;
    }
    let mut points = Vec::new();
    let mut index = 0;
    for placement in &space.placements {
        for a1 in &a1s {
            for a2 in &a2s {
                for freqs in &freq_combos {
                    for &tg in &space.tg_active {
                        for &seed in &space.seeds {
                            points.push(SweepPoint {
                                index,
                                seed,
                                placement: placement.clone(),
                                a1: a1.clone(),
                                a2: a2.clone(),
                                freqs_mhz: freqs.clone(),
                                tg_active: tg,
                            });
                            index += 1;
                        }
                    }
                }
            }
        }
    }
    points
}

/// Materialize the SoC description of one sweep point.
pub fn point_description(
    base: &SoCDescription,
    point: &SweepPoint,
) -> Result<SoCDescription, CliError> {
    let mut desc = base.clone();
    let slots = desc.accel_slots();
    if slots.len() < 2 {
        return Err(CliError::Config(
            "sweep base config must have two accelerator slots".into(),
        ));
    }
    let (near, far) = (slots[0], slots[1]);
    let swapped = match point.placement.as_str() {
        "normal" => false,
        "swapped" => true,
        other => return Err(CliError::Config(format!("unknown placement {other:?}"))),
    };
    let (near_cfg, far_cfg) = if swapped {
        (&point.a2, &point.a1)
    } else {
        (&point.a1, &point.a2)
    };
    for (pos, cfg) in [(near, near_cfg), (far, far_cfg)] {
        let idx = desc.tile_index(pos).expect("slot exists");
        match cfg {
            Some((accel, k)) => {
                desc.tiles[idx].accel = Some(accel.clone());
                desc.tiles[idx].replication = Some(*k);
            }
            None => {
                // Idle slot: the tile stays in place but never starts work.
                desc.tiles[idx].replication = Some(1);
            }
        }
    }
    for (name, mhz) in &point.freqs_mhz {
        let Some(i) = desc.island_by_name(name) else {
            return Err(CliError::Config(format!("unknown island {name:?}")));
        };
        let hz = mhz * 1_000_000;
        desc.islands[i].clock = match desc.islands[i].clock {
            ClockSpec::Fixed { .. } => ClockSpec::Fixed { hz },
            ClockSpec::Dfs {
                min_hz,
                max_hz,
                step_hz,
                ..
            } => ClockSpec::Dfs {
                min_hz,
                max_hz,
                step_hz,
                initial_hz: hz,
            },
        };
    }
    let report = validate(&desc);
    if !report.is_empty() {
        return Err(CliError::Config(report.to_string()));
    }
    Ok(desc)
}

#[derive(Debug, Clone)]
pub struct SweepRow {
    pub point: SweepPoint,
    pub thr_a1_mbps: Option<f64>,
    pub thr_a2_mbps: Option<f64>,
    pub area_a1: Option<[u64; 4]>,
    pub area_a2: Option<[u64; 4]>,
    pub capacity_violation: bool,
    pub mem_busy_frac: f64,
    pub error: Option<String>,
}

/// Evaluate one sweep point: warm up the traffic generators, then run the
/// measured slots' byte budgets to completion.
pub fn evaluate_point(base: &SoCDescription, space: &SweepSpace, point: &SweepPoint) -> SweepRow {
    let mut row = SweepRow {
        point: point.clone(),
        thr_a1_mbps: None,
        thr_a2_mbps: None,
        area_a1: None,
        area_a2: None,
        capacity_violation: false,
        mem_busy_frac: 0.0,
        error: None,
    };
    let attempt = (|| -> Result<(), CliError> {
        let desc = point_description(base, point)?;
        let warmup = parse_duration(&space.warmup)?;
        let mut sim = SocSim::new(&desc, point.seed)?;
        sim.set_active_tg_count(point.tg_active)?;
        if point.tg_active > 0 {
            sim.run_until(warmup)?;
        }
        let slots = desc.accel_slots();
        let swapped = point.placement == "swapped";
        let pos_of = |logical_a1: bool| -> Position {
            match (logical_a1, swapped) {
                (true, false) | (false, true) => slots[0],
                _ => slots[1],
            }
        };
        let mut batches = Vec::new();
        let mut labels = Vec::new();
        for (cfg, logical_a1) in [(&point.a1, true), (&point.a2, false)] {
            if let Some((accel, _)) = cfg {
                let pos = pos_of(logical_a1);
                let profile = desc.profile(accel).expect("validated");
                let items = space.budget_bytes.div_ceil(profile.bytes_read_per_item);
                batches.push((pos, items));
                labels.push(logical_a1);
            }
        }
        let results: Vec<BatchResult> = if batches.is_empty() {
            Vec::new()
        } else {
            sim.run_batches(&batches)?
        };
        for (logical_a1, r) in labels.iter().zip(results.iter()) {
            if *logical_a1 {
                row.thr_a1_mbps = Some(r.throughput_mbps);
            } else {
                row.thr_a2_mbps = Some(r.throughput_mbps);
            }
        }
        row.mem_busy_frac = sim.mem_busy_fraction();
        let table = CalibrationTable::builtin();
        for (cfg, slot_area) in [(&point.a1, &mut row.area_a1), (&point.a2, &mut row.area_a2)] {
            if let Some((accel, k)) = cfg {
                if let Ok(e) = estimate(table, accel, *k) {
                    *slot_area = Some([
                        e.resources.lut,
                        e.resources.ff,
                        e.resources.bram,
                        e.resources.dsp,
                    ]);
                    row.capacity_violation |= e.capacity_violation;
                }
            }
        }
        Ok(())
    })();
    if let Err(e) = attempt {
        row.error = Some(e.to_string());
    }
    row
}

pub fn sweep_csv(space: &SweepSpace, rows: &[SweepRow]) -> String {
    let mut header =
        String::from("point,seed,placement,a1_accel,a1_k,a2_accel,a2_k,tg_active");
    for name in space.frequencies.keys() {
        let _ = write!(header, ",freq_{name}_mhz");
    }
    header.push_str(
        ",thr_a1_mbps,thr_a2_mbps,a1_lut,a1_ff,a1_bram,a1_dsp,a2_lut,a2_ff,a2_bram,a2_dsp,capacity_violation,mem_busy_frac,status\n",
    );
    let mut out = header;
    for row in rows {
        let p = &row.point;
        let slot = |s: &Option<(String, u32)>| match s {
            Some((a, k)) => (a.clone(), k.to_string()),
            None => (String::new(), String::new()),
        };
        let (a1a, a1k) = slot(&p.a1);
        let (a2a, a2k) = slot(&p.a2);
        let _ = write!(
            out,
            "{},{},{},{},{},{},{},{}",
            p.index, p.seed, p.placement, a1a, a1k, a2a, a2k, p.tg_active
        );
        for (_, mhz) in &p.freqs_mhz {
            let _ = write!(out, ",{mhz}");
        }
        let opt_f = |v: Option<f64>| v.map(fmt_f64).unwrap_or_default();
        let area = |a: &Option<[u64; 4]>| match a {
            Some([l, f, b, d]) => format!("{l},{f},{b},{d}"),
            None => ",,,".to_string(),
        };
        let _ = writeln!(
            out,
            ",{},{},{},{},{},{},{}",
            opt_f(row.thr_a1_mbps),
            opt_f(row.thr_a2_mbps),
            area(&row.area_a1),
            area(&row.area_a2),
            row.capacity_violation,
            fmt_f64(row.mem_busy_frac),
            row.error
                .clone()
                .map(|e| e.replace([',', '\n'], ";"))
                .unwrap_or_else(|| "ok".into()),
        );
    }
    out
}

pub fn load_sweep_space(path: &Path) -> Result<SweepSpace, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let space: SweepSpace =
        toml::from_str(&text).map_err(|e| CliError::Config(format!("sweep space: {e}")))?;
    if space.schema_version != crate::config::SCHEMA_VERSION {
        return Err(CliError::Config(format!(
            "unsupported sweep schema version {}",
            space.schema_version
        )));
    }
    Ok(space)
}

pub fn cmd_sweep(args: &SweepArgs) -> Result<(), CliError> {
    let mut space = load_sweep_space(&args.config)?;
    if let Some(b) = args.budget_bytes {
        space.budget_bytes = b;
    }
    let base = load_config(&space.base_config)?;
    let points = enumerate_points(&space);
    eprintln!("sweep: {} points", points.len());
    let rows = run_sweep(&base, &space, &points, args.jobs);
    write_file(&args.out, "sweep.csv", &sweep_csv(&space, &rows))?;
    let failed = rows.iter().filter(|r| r.error.is_some()).count();
    if failed > 0 {
        return Err(CliError::PartialSweep {
            failed,
            total: rows.len(),
        });
    }
    Ok(())
}

/// Evaluate all points, optionally in parallel; results keep enumeration
/// order regardless of completion order.
pub fn run_sweep(
    base: &SoCDescription,
    space: &SweepSpace,
    points: &[SweepPoint],
    jobs: usize,
) -> Vec<SweepRow> {
    if jobs <= 1 {
        points
            .iter()
            .map(|p| evaluate_point(base, space, p))
            .collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .expect("thread pool");
        pool.install(|| {
            use rayon::prelude::*;
            points
                .par_iter()
                .map(|p| evaluate_point(base, space, p))
                .collect()
        })
    }
}

// ---------------------------------------------------------------------------
// profile
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScheduleDoc {
    schema_version: u32,
    #[serde(default)]
    commands: Vec<CommandDoc>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct CommandDoc {
    at: String,
    #[serde(default)]
    write_frequency: Option<FreqDoc>,
    #[serde(default)]
    tg_enable: Option<TgEnableDoc>,
    #[serde(default)]
    tg_set: Option<TgSetDoc>,
    #[serde(default)]
    reset_counters: Option<ResetDoc>,
    #[serde(default)]
    sample: Option<SampleDoc>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct FreqDoc {
    island: String,
    mhz: u64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct TgEnableDoc {
    count: u32,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct TgSetDoc {
    tile: [u32; 2],
    enabled: bool,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct ResetDoc {
    #[serde(default)]
    tile: Option<[u32; 2]>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct SampleDoc {
    probe: [u32; 2],
}

/// Parse a schedule document into kernel commands; times must be strictly
/// increasing and each command carries exactly one action.
pub fn load_schedule(path: &Path) -> Result<Vec<ScheduledCommand>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    parse_schedule(&text)
}

pub fn parse_schedule(text: &str) -> Result<Vec<ScheduledCommand>, CliError> {
    let doc: ScheduleDoc =
        toml::from_str(text).map_err(|e| CliError::Config(format!("schedule: {e}")))?;
    if doc.schema_version != crate::config::SCHEMA_VERSION {
        return Err(CliError::Config(format!(
            "unsupported schedule schema version {}",
            doc.schema_version
        )));
    }
    let mut out = Vec::new();
    let mut last: Option<SimTime> = None;
    for (i, cmd) in doc.commands.iter().enumerate() {
        let at = parse_duration(&cmd.at)?;
        if let Some(prev) = last {
            if at <= prev {
                return Err(CliError::Config(format!(
                    "schedule command {i}: times must be strictly increasing"
                )));
            }
        }
        last = Some(at);
        let actions: Vec<HostCommand> = [
            cmd.write_frequency
                .as_ref()
                .map(|f| HostCommand::WriteFrequency {
                    island: f.island.clone(),
                    hz: f.mhz * 1_000_000,
                }),
            cmd.tg_enable
                .as_ref()
                .map(|t| HostCommand::TgEnableCount { count: t.count }),
            cmd.tg_set.as_ref().map(|t| HostCommand::TgSet {
                tile: Position::new(t.tile[0], t.tile[1]),
                enabled: t.enabled,
            }),
            cmd.reset_counters
                .as_ref()
                .map(|r| HostCommand::ResetCounters {
                    tile: r.tile.map(|p| Position::new(p[0], p[1])),
                }),
            cmd.sample.as_ref().map(|s| HostCommand::SampleProbe {
                probe: Position::new(s.probe[0], s.probe[1]),
            }),
        ]
        .into_iter()
        .flatten()
        .collect();
        match actions.len() {
            0 => {
                return Err(CliError::Config(format!(
                    "schedule command {i}: no action given"
                )))
            }
            1 => out.push(ScheduledCommand {
                at,
                command: actions.into_iter().next().unwrap(),
            }),
            _ => {
                return Err(CliError::Config(format!(
                    "schedule command {i}: exactly one action per command"
                )))
            }
        }
    }
    Ok(out)
}

pub struct ProfileOutputs {
    pub freq_profile_csv: String,
    pub mem_traffic_csv: String,
    pub plotdata_csv: String,
    pub command_log_csv: String,
    /// Structured series for rendering: per island (name, [(t_fs, MHz)]).
    pub freq_series: Vec<(String, Vec<(u64, u64)>)>,
    pub traffic_series: Vec<(u64, f64)>,
    pub duration_fs: u64,
}

pub fn execute_profile(
    desc: &SoCDescription,
    seed: u64,
    schedule: Vec<ScheduledCommand>,
    duration: SimTime,
    window: SimTime,
) -> Result<ProfileOutputs, CliError> {
    let mut sim = SocSim::new(desc, seed)?;
    let mem_pos = desc.mem_pos().expect("validated");
    sim.set_accel_looping()?;
    sim.set_schedule(schedule)?;
    let sid = sim.add_sampler(mem_pos, window)?;
    sim.run_until(duration)?;

    // Frequency profile: initial value of every DFS island, then each change
    // at the instant it takes effect.
    let mut freq = String::from("time_fs,island,freq_mhz\n");
    for isl in &desc.islands {
        if matches!(isl.clock, ClockSpec::Dfs { .. }) {
            let _ = writeln!(freq, "0,{},{}", isl.name, isl.clock.initial_hz() / 1_000_000);
        }
    }
    for change in &sim.freq_log {
        let _ = writeln!(
            freq,
            "{},{},{}",
            change.at.fs(),
            desc.islands[change.island].name,
            change.freq_hz / 1_000_000
        );
    }

    let mut mem = String::from("time_fs,mpkts_per_sec\n");
    let series: &[RatePoint] = sim.sampler_series(sid);
    for p in series {
        let _ = writeln!(mem, "{},{}", p.t.fs(), fmt_f64(p.mpkts_per_sec));
    }

    // Generic plot data: one labeled x/y series per signal.
    let traffic_series: Vec<(u64, f64)> = series.iter().map(|p| (p.t.fs(), p.mpkts_per_sec)).collect();
    let mut plot = String::from("series,label,x,y\n");
    for (t, v) in &traffic_series {
        let _ = writeln!(plot, "mem_traffic,MEM incoming (Mpkt/s),{},{}", t, fmt_f64(*v));
    }
    let mut freq_series: Vec<(String, Vec<(u64, u64)>)> = Vec::new();
    for (i, isl) in desc.islands.iter().enumerate() {
        if !matches!(isl.clock, ClockSpec::Dfs { .. }) {
            continue;
        }
        let mut points: Vec<(u64, u64)> = vec![(0, isl.clock.initial_hz() / 1_000_000)];
        for change in sim.freq_log.iter().filter(|c| c.island == i) {
            points.push((change.at.fs(), change.freq_hz / 1_000_000));
        }
        for (x, y) in &points {
            let _ = writeln!(plot, "freq_{0},{0} island (MHz),{1},{2}", isl.name, x, y);
        }
        freq_series.push((isl.name.clone(), points));
    }

    let mut log = String::from("time_fs,command,reason\n");
    for rej in &sim.command_log {
        let _ = writeln!(log, "{},{},{}", rej.at.fs(), rej.command, rej.reason);
    }

    Ok(ProfileOutputs {
        freq_profile_csv: freq,
        mem_traffic_csv: mem,
        plotdata_csv: plot,
        command_log_csv: log,
        freq_series,
        traffic_series,
        duration_fs: duration.fs(),
    })
}

/// Render the two profile panels (island frequencies, memory traffic) as a
/// standalone SVG. Hand-rolled so the core stays dependency-light.
pub fn render_profile_svg(outputs: &ProfileOutputs) -> String {
    const W: f64 = 900.0;
    const PANEL_H: f64 = 220.0;
    const MARGIN_L: f64 = 60.0;
    const MARGIN_R: f64 = 120.0;
    const MARGIN_V: f64 = 30.0;
    const PALETTE: [&str; 6] = [
        "#c44e52", "#dd8452", "#55a868", "#4c72b0", "#8172b3", "#937860",
    ];
    let span = outputs.duration_fs.max(1) as f64;
    let plot_w = W - MARGIN_L - MARGIN_R;
    let x = |t_fs: u64| MARGIN_L + t_fs as f64 / span * plot_w;

    let mut svg = String::new();
    let total_h = 2.0 * (PANEL_H + 2.0 * MARGIN_V);
    let _ = writeln!(
        svg,
        r##"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{total_h}" font-family="sans-serif" font-size="11">"##
    );

    // Panel 1: island frequencies as step lines.
    let top1 = MARGIN_V;
    let max_mhz = outputs
        .freq_series
        .iter()
        .flat_map(|(_, pts)| pts.iter().map(|(_, m)| *m))
        .max()
        .unwrap_or(100) as f64
        * 1.15;
    let y1 = |mhz: u64| top1 + PANEL_H - mhz as f64 / max_mhz * PANEL_H;
    let _ = writeln!(
        svg,
        r##"<rect x="{MARGIN_L}" y="{top1}" width="{plot_w}" height="{PANEL_H}" fill="none" stroke="#999"/>"##
    );
    let _ = writeln!(
        svg,
        r##"<text x="{MARGIN_L}" y="{}" fill="#333">island frequency (MHz)</text>"##,
        top1 - 8.0
    );
    for (i, (name, pts)) in outputs.freq_series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let mut d = String::new();
        for (j, (t, mhz)) in pts.iter().enumerate() {
            if j == 0 {
                let _ = write!(d, "M {:.1} {:.1}", x(*t), y1(*mhz));
            } else {
                // Step: horizontal to the change time, then vertical.
                let _ = write!(d, " H {:.1} V {:.1}", x(*t), y1(*mhz));
            }
        }
        let _ = write!(d, " H {:.1}", MARGIN_L + plot_w);
        let _ = writeln!(
            svg,
            r##"<path d="{d}" fill="none" stroke="{color}" stroke-width="1.5"/>"##
        );
        let ly = top1 + 14.0 * (i as f64 + 1.0);
        let _ = writeln!(
            svg,
            r##"<line x1="{}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/><text x="{}" y="{}" fill="#333">{name}</text>"##,
            W - MARGIN_R + 10.0,
            W - MARGIN_R + 30.0,
            W - MARGIN_R + 35.0,
            ly + 4.0
        );
    }

    // Panel 2: memory ingress rate.
    let top2 = PANEL_H + 3.0 * MARGIN_V;
    let max_rate = outputs
        .traffic_series
        .iter()
        .map(|(_, v)| *v)
        .fold(1e-9, f64::max)
        * 1.15;
    let y2 = |v: f64| top2 + PANEL_H - v / max_rate * PANEL_H;
    let _ = writeln!(
        svg,
        r##"<rect x="{MARGIN_L}" y="{top2}" width="{plot_w}" height="{PANEL_H}" fill="none" stroke="#999"/>"##
    );
    let _ = writeln!(
        svg,
        r##"<text x="{MARGIN_L}" y="{}" fill="#333">memory incoming traffic (Mpkt/s)</text>"##,
        top2 - 8.0
    );
    if !outputs.traffic_series.is_empty() {
        let mut d = String::new();
        for (j, (t, v)) in outputs.traffic_series.iter().enumerate() {
            let cmd = if j == 0 { 'M' } else { 'L' };
            let _ = write!(d, "{cmd} {:.1} {:.1} ", x(*t), y2(*v));
        }
        let _ = writeln!(
            svg,
            r##"<path d="{}" fill="none" stroke="#4c72b0" stroke-width="1.5"/>"##,
            d.trim_end()
        );
        let _ = writeln!(
            svg,
            r##"<text x="{}" y="{}" fill="#333" text-anchor="end">{:.2}</text>"##,
            MARGIN_L - 5.0,
            top2 + 10.0,
            max_rate / 1.15
        );
    }
    // Shared time axis labels in milliseconds.
    for frac in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let t_ms = span * frac / 1e12;
        let _ = writeln!(
            svg,
            r##"<text x="{:.1}" y="{}" fill="#333" text-anchor="middle">{t_ms:.0} ms</text>"##,
            MARGIN_L + plot_w * frac,
            top2 + PANEL_H + 16.0
        );
    }
    svg.push_str("</svg>\n");
    svg
}

pub fn cmd_profile(args: &ProfileArgs) -> Result<(), CliError> {
    let desc = load_config(&args.config)?;
    let schedule = load_schedule(&args.schedule)?;
    let window = parse_duration(&args.window)?;
    let duration = match &args.duration {
        Some(d) => parse_duration(d)?,
        None => {
            let last = schedule.last().map(|c| c.at.fs()).unwrap_or(0);
            SimTime::from_fs(last + 10_000_000_000_000)
        }
    };
    let outputs = execute_profile(&desc, args.seed, schedule, duration, window)?;
    write_file(&args.out, "freq_profile.csv", &outputs.freq_profile_csv)?;
    write_file(&args.out, "mem_traffic.csv", &outputs.mem_traffic_csv)?;
    write_file(&args.out, "plotdata.csv", &outputs.plotdata_csv)?;
    write_file(&args.out, "command_log.csv", &outputs.command_log_csv)?;
    if args.render {
        write_file(&args.out, "profile.svg", &render_profile_svg(&outputs))?;
    }
    Ok(())
}

pub fn main_entry() -> i32 {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Profile(args) => cmd_profile(args),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
