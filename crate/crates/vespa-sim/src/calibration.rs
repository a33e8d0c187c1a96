//! Deterministic fitting of accelerator profiles against measured throughput
//! targets.
//!
//! The byte shape of a profile (bytes per item, burst size) is a fixed design
//! choice per accelerator; calibration solves the remaining free parameter,
//! `compute_cycles_per_item`, so that one isolated K=1 tile at reference
//! clocks (accelerator island 50 MHz, NoC and memory 100 MHz, all traffic
//! generators disabled) reproduces the target throughput.
//!
//! Because a K=1 tile strictly alternates burst round trips and compute, the
//! batch completion time is affine in the compute cycle count. Two probe
//! simulations determine the line; the solved value is rounded to an integer
//! cycle count and refined by direct simulation in unit steps, which makes
//! the procedure exact, deterministic, and independent of any starting guess.

use crate::area::CalibrationTable;
use crate::config::{reference_testbed_with, AcceleratorProfile, IslandVariant, SoCDescription};
use crate::sim::{SimError, SocSim};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CalibrationError {
    #[error("unknown accelerator {0:?}")]
    UnknownAccelerator(String),
    #[error("infeasible target {target_mbps} MB/s: required compute cycles < 1")]
    InfeasibleTarget { target_mbps: f64 },
    #[error("calibration simulation failed: {0}")]
    Sim(#[from] SimError),
}

/// Bursts simulated per probe; enough to wash out start/drain edges.
const CALIBRATION_BURSTS: u64 = 96;

/// Reference measurement condition: a testbed with the candidate profile in
/// the A1 slot, zero active TGs, accelerator islands at 50 MHz and the
/// NoC+MEM island at 100 MHz (the testbed defaults).
fn calibration_testbed(profile: &AcceleratorProfile) -> SoCDescription {
    let mut desc = reference_testbed_with((&profile.name, 1), ("dfadd", 1), IslandVariant::Six);
    for p in desc.profiles.iter_mut() {
        if p.name == profile.name {
            *p = profile.clone();
        }
    }
    desc
}

/// Simulated baseline throughput (MB/s of input bytes) of one isolated K=1
/// tile running `profile` at reference clocks.
pub fn measure_baseline(profile: &AcceleratorProfile) -> Result<f64, SimError> {
    let desc = calibration_testbed(profile);
    let a1 = desc.accel_slots()[0];
    let mut sim = SocSim::new(&desc, 0)?;
    let items = CALIBRATION_BURSTS * profile.items_per_burst();
    let result = sim.run_batch(a1, items)?;
    Ok(result.throughput_mbps)
}

fn batch_time_fs(profile: &AcceleratorProfile, cycles: u64) -> Result<(u64, u64), SimError> {
    let mut p = profile.clone();
    p.compute_cycles_per_item = cycles;
    let desc = calibration_testbed(&p);
    let a1 = desc.accel_slots()[0];
    let mut sim = SocSim::new(&desc, 0)?;
    let items = CALIBRATION_BURSTS * p.items_per_burst();
    let result = sim.run_batch(a1, items)?;
    Ok((result.finished.fs() - result.started.fs(), result.input_bytes))
}

/// Fit `compute_cycles_per_item` of the named accelerator so the simulated
/// baseline matches the calibration table's K=1 throughput.
pub fn calibrate_profile(
    name: &str,
    targets: &CalibrationTable,
) -> Result<AcceleratorProfile, CalibrationError> {
    let shape = crate::config::builtin_profiles()
        .into_iter()
        .find(|p| p.name == name)
        .ok_or_else(|| CalibrationError::UnknownAccelerator(name.to_string()))?;
    let target_mbps = targets
        .baseline_throughput(name)
        .ok_or_else(|| CalibrationError::UnknownAccelerator(name.to_string()))?;
    calibrate_shape(shape, target_mbps)
}

/// Calibrate an arbitrary profile shape against an explicit throughput
/// target.
pub fn calibrate_shape(
    shape: AcceleratorProfile,
    target_mbps: f64,
) -> Result<AcceleratorProfile, CalibrationError> {
    // Two probes pin the affine relation T(C) = a + b*C.
    let c0 = 8u64;
    let c1 = 4096u64;
    let (t0, bytes) = batch_time_fs(&shape, c0)?;
    let (t1, _) = batch_time_fs(&shape, c1)?;
    let slope = (t1 as f64 - t0 as f64) / (c1 as f64 - c0 as f64);
    let target_fs = bytes as f64 / (target_mbps * 1e6) * 1e15;
    let guess = c0 as f64 + (target_fs - t0 as f64) / slope;
    if guess < 1.0 {
        return Err(CalibrationError::InfeasibleTarget { target_mbps });
    }
    // Refine around the rounded solution: pick the integer cycle count whose
    // simulated time is closest to the target.
    let mut best_c = guess.round().max(1.0) as u64;
    let mut best_err = {
        let (t, _) = batch_time_fs(&shape, best_c)?;
        (t as f64 - target_fs).abs()
    };
    loop {
        let mut improved = false;
        for cand in [best_c.saturating_sub(1).max(1), best_c + 1] {
            if cand == best_c {
                continue;
            }
            let (t, _) = batch_time_fs(&shape, cand)?;
            let err = (t as f64 - target_fs).abs();
            if err < best_err {
                best_err = err;
                best_c = cand;
                improved = true;
            }
        }
        if !improved {
            break;
        }
    }
    let mut fitted = shape;
    fitted.compute_cycles_per_item = best_c;
    Ok(fitted)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::area::CalibrationTable;

    #[test]
    fn unknown_name_is_an_error() {
        let err = calibrate_profile("nonesuch", CalibrationTable::builtin()).unwrap_err();
        assert!(matches!(err, CalibrationError::UnknownAccelerator(_)));
    }

    #[test]
    fn impossibly_fast_target_is_infeasible() {
        let shape = crate::config::builtin_profiles()
            .into_iter()
            .find(|p| p.name == "dfadd")
            .unwrap();
        // Far beyond what the burst round trips alone allow.
        let err = calibrate_shape(shape, 1e6).unwrap_err();
        assert!(matches!(err, CalibrationError::InfeasibleTarget { .. }));
    }
}
