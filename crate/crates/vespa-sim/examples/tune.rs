//! Development harness: prints calibration fits, replication scaling,
//! traffic-sweep curves, and schedule-driven memory rates for the built-in
//! testbed so model constants can be inspected in one place.
//!
//! Run with `cargo run --release --example tune [section]` where section is
//! one of `calibrate`, `scaling`, `traffic`, `schedule`, `rtt` (default: all).

use vespa_sim::area::CalibrationTable;
use vespa_sim::calibration::{calibrate_profile, measure_baseline};
use vespa_sim::config::{reference_testbed_with, IslandVariant};
use vespa_sim::engine::SimTime;
use vespa_sim::sim::{HostCommand, ScheduledCommand, SocSim};

const MHZ: u64 = 1_000_000;
const MS: u64 = 1_000_000_000_000;

fn throughput(accel: &str, k: u32, tgs: u32, slot: usize, noc_mhz: u64, tile_mhz: u64, budget: u64) -> f64 {
    let (a1, a2) = if slot == 0 {
        ((accel, k), ("dfadd", 1))
    } else {
        (("dfadd", 1), (accel, k))
    };
    let mut desc = reference_testbed_with(a1, a2, IslandVariant::Six);
    // Initial frequencies come from the DFS spec; override via initial_hz.
    for isl in desc.islands.iter_mut() {
        let init = match isl.name.as_str() {
            "noc" => noc_mhz * MHZ,
            _ => tile_mhz * MHZ,
        };
        if let vespa_sim::config::ClockSpec::Dfs { min_hz, max_hz, step_hz, .. } = isl.clock {
            isl.clock = vespa_sim::config::ClockSpec::Dfs {
                min_hz,
                max_hz,
                step_hz,
                initial_hz: init.clamp(min_hz, max_hz),
            };
        }
    }
    let mut sim = SocSim::new(&desc, 0).unwrap();
    sim.set_active_tg_count(tgs).unwrap();
    let slots = desc.accel_slots();
    let pos = slots[slot];
    let profile = desc.profile(accel).unwrap();
    let items = budget.div_ceil(profile.bytes_read_per_item);
    // Let TG traffic reach steady state before measuring.
    if tgs > 0 {
        sim.run_until(SimTime::from_fs(2 * MS)).unwrap();
    }
    sim.run_batch(pos, items).unwrap().throughput_mbps
}

fn section_calibrate() {
    println!("== calibration at reference clocks (A1, K=1, 0 TGs) ==");
    let table = CalibrationTable::builtin();
    for name in table.names() {
        let target = table.baseline_throughput(name).unwrap();
        let fitted = calibrate_profile(name, table).unwrap();
        let got = measure_baseline(&fitted).unwrap();
        let builtin = vespa_sim::config::builtin_profiles()
            .into_iter()
            .find(|p| p.name == name)
            .unwrap();
        println!(
            "{name:>6}: target {target:6.2}  fitted_c {:>7}  builtin_c {:>7}  sim {got:7.3}  err {:+.2}%",
            fitted.compute_cycles_per_item,
            builtin.compute_cycles_per_item,
            100.0 * (got - target) / target,
        );
    }
}

fn section_scaling() {
    println!("== replication scaling at reference clocks (A1, 0 TGs) ==");
    let table = CalibrationTable::builtin();
    let mut r2s = Vec::new();
    let mut r4s = Vec::new();
    for name in table.names() {
        let t1 = throughput(name, 1, 0, 0, 100, 50, 262_144);
        let t2 = throughput(name, 2, 0, 0, 100, 50, 262_144);
        let t4 = throughput(name, 4, 0, 0, 100, 50, 262_144);
        let row = table.row(name).unwrap();
        println!(
            "{name:>6}: K1 {t1:7.3} K2 {t2:7.3} K4 {t4:7.3}  r2 {:.2} r4 {:.2}  (table r2 {:.2} r4 {:.2})",
            t2 / t1,
            t4 / t1,
            row.k2.thr_mbps / row.k1.thr_mbps,
            row.k4.thr_mbps / row.k1.thr_mbps,
        );
        r2s.push(t2 / t1);
        r4s.push(t4 / t1);
    }
    let avg = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    println!(
        "average: r2 {:.3} (target 1.89 +-15% = [1.61, 2.17]), r4 {:.3} (target 3.41 +-15% = [2.90, 3.92])",
        avg(&r2s),
        avg(&r4s)
    );
}

fn section_traffic() {
    println!("== A2 throughput vs active TGs (NoC 10 MHz, tiles 50 MHz, K=4) ==");
    for accel in ["adpcm", "dfmul"] {
        let mut base = 0.0;
        print!("{accel:>6}: ");
        for tgs in 0..=11 {
            let t = throughput(accel, 4, tgs, 1, 10, 50, 131_072);
            if tgs == 0 {
                base = t;
            }
            print!("{t:9.6} ");
        }
        let last = throughput(accel, 4, 11, 1, 10, 50, 131_072);
        println!(" drop {:.1}%", 100.0 * (1.0 - last / base));
    }
}

fn section_schedule() {
    println!("== MEM incoming Mpkt/s vs schedules (A1=A2=dfmul K=1, 11 TGs) ==");
    let desc = reference_testbed_with(("dfmul", 1), ("dfmul", 1), IslandVariant::Six);
    let mem = desc.mem_pos().unwrap();
    // Phase A: TG at 50, step A1/A2 10 -> 30 -> 50.
    let mut sim = SocSim::new(&desc, 0).unwrap();
    sim.set_active_tg_count(11).unwrap();
    sim.set_accel_looping().unwrap();
    let cmds = vec![
        ScheduledCommand {
            at: SimTime::from_fs(1),
            command: HostCommand::WriteFrequency { island: "a1".into(), hz: 10 * MHZ },
        },
        ScheduledCommand {
            at: SimTime::from_fs(2),
            command: HostCommand::WriteFrequency { island: "a2".into(), hz: 10 * MHZ },
        },
        ScheduledCommand {
            at: SimTime::from_fs(10 * MS),
            command: HostCommand::WriteFrequency { island: "a1".into(), hz: 30 * MHZ },
        },
        ScheduledCommand {
            at: SimTime::from_fs(10 * MS + 1),
            command: HostCommand::WriteFrequency { island: "a2".into(), hz: 30 * MHZ },
        },
        ScheduledCommand {
            at: SimTime::from_fs(20 * MS),
            command: HostCommand::WriteFrequency { island: "a1".into(), hz: 50 * MHZ },
        },
        ScheduledCommand {
            at: SimTime::from_fs(20 * MS + 1),
            command: HostCommand::WriteFrequency { island: "a2".into(), hz: 50 * MHZ },
        },
    ];
    sim.set_schedule(cmds).unwrap();
    let sid = sim.add_sampler(mem, SimTime::from_fs(MS)).unwrap();
    sim.run_until(SimTime::from_fs(30 * MS)).unwrap();
    let series = sim.sampler_series(sid);
    let plateau = |from_ms: u64, to_ms: u64| {
        let pts: Vec<f64> = series
            .iter()
            .filter(|p| p.t.fs() > from_ms * MS && p.t.fs() <= to_ms * MS)
            .map(|p| p.mpkts_per_sec)
            .collect();
        pts.iter().sum::<f64>() / pts.len() as f64
    };
    let (p10, p30, p50) = (plateau(5, 10), plateau(15, 20), plateau(25, 30));
    let spread = (p50.max(p30).max(p10) - p50.min(p30).min(p10)) / p50.max(p30).max(p10);
    println!("phase A plateaus: 10MHz {p10:.3}  30MHz {p30:.3}  50MHz {p50:.3}  spread {:.1}% (<10% wanted)", 100.0 * spread);

    // Phase B: A1/A2 at 50, TG island 10 -> 50.
    let mut sim = SocSim::new(&desc, 0).unwrap();
    sim.set_active_tg_count(11).unwrap();
    sim.set_accel_looping().unwrap();
    let cmds = vec![
        ScheduledCommand {
            at: SimTime::from_fs(1),
            command: HostCommand::WriteFrequency { island: "tg".into(), hz: 10 * MHZ },
        },
        ScheduledCommand {
            at: SimTime::from_fs(10 * MS),
            command: HostCommand::WriteFrequency { island: "tg".into(), hz: 50 * MHZ },
        },
    ];
    sim.set_schedule(cmds).unwrap();
    let sid = sim.add_sampler(mem, SimTime::from_fs(MS)).unwrap();
    sim.run_until(SimTime::from_fs(20 * MS)).unwrap();
    let series = sim.sampler_series(sid);
    let plateau = |from_ms: u64, to_ms: u64| {
        let pts: Vec<f64> = series
            .iter()
            .filter(|p| p.t.fs() > from_ms * MS && p.t.fs() <= to_ms * MS)
            .map(|p| p.mpkts_per_sec)
            .collect();
        pts.iter().sum::<f64>() / pts.len() as f64
    };
    let (lo, hi) = (plateau(5, 10), plateau(15, 20));
    println!("phase B plateaus: tg@10 {lo:.3}  tg@50 {hi:.3}  ratio {:.2} (>=2 wanted)", hi / lo);
}

fn section_rtt() {
    println!("== zero-load RTT (dfadd K=1, idle mesh) ==");
    for (slot, label) in [(0usize, "A1"), (1usize, "A2")] {
        let (a1, a2) = if slot == 0 {
            (("dfadd", 1), ("dfmul", 1))
        } else {
            (("dfmul", 1), ("dfadd", 1))
        };
        let desc = reference_testbed_with(a1, a2, IslandVariant::Six);
        let mut sim = SocSim::new(&desc, 0).unwrap();
        let pos = desc.accel_slots()[slot];
        let idx = desc.tile_index(pos).unwrap();
        sim.run_batch(pos, 16).unwrap();
        let c = sim.monitor.tile(idx);
        println!(
            "{label}: bursts {}  mean RTT {:.1} ns  (sum {} fs)",
            c.rtt_count,
            c.mean_rtt_fs().unwrap_or(0.0) / 1e6,
            c.rtt_sum_fs
        );
    }
}

fn main() {
    let section = std::env::args().nth(1).unwrap_or_else(|| "all".into());
    match section.as_str() {
        "calibrate" => section_calibrate(),
        "scaling" => section_scaling(),
        "traffic" => section_traffic(),
        "schedule" => section_schedule(),
        "rtt" => section_rtt(),
        _ => {
            section_calibrate();
            section_scaling();
            section_traffic();
            section_schedule();
            section_rtt();
        }
    }
}
