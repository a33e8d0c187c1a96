//! Analytical FPGA resource model for multi-replica accelerator tiles.
//!
//! The stored calibration points at K in {1, 2, 4} are reproduced exactly;
//! other replication factors interpolate a per-accelerator least-squares line
//! whose intercept captures the shared tile overhead and whose slope is the
//! marginal cost of one replica. DSP usage is exactly linear in K.

use serde::Deserialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AreaError {
    #[error("unknown accelerator {0:?}")]
    UnknownAccelerator(String),
    #[error("replication factor must be >= 1")]
    ZeroReplication,
}

pub const RESOURCE_NAMES: [&str; 4] = ["lut", "ff", "bram", "dsp"];

/// FPGA resource counts: LUTs, flip-flops, 18Kb BRAM blocks, DSP slices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
pub struct ResourceVector {
    pub lut: u64,
    pub ff: u64,
    pub bram: u64,
    pub dsp: u64,
}

impl ResourceVector {
    pub fn get(&self, i: usize) -> u64 {
        match i {
            0 => self.lut,
            1 => self.ff,
            2 => self.bram,
            _ => self.dsp,
        }
    }

    fn exceeds(&self, cap: &ResourceVector) -> bool {
        self.lut > cap.lut || self.ff > cap.ff || self.bram > cap.bram || self.dsp > cap.dsp
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
pub struct CalPoint {
    pub lut: u64,
    pub ff: u64,
    pub bram: u64,
    pub dsp: u64,
    pub thr_mbps: f64,
}

impl CalPoint {
    pub fn resources(&self) -> ResourceVector {
        ResourceVector {
            lut: self.lut,
            ff: self.ff,
            bram: self.bram,
            dsp: self.dsp,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AcceleratorRow {
    pub name: String,
    pub k1: CalPoint,
    pub k2: CalPoint,
    pub k4: CalPoint,
}

/// The shipped calibration data: per-accelerator resource/throughput points
/// plus the device capacity vector.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationTable {
    pub schema_version: u32,
    pub device: ResourceVector,
    pub accelerators: Vec<AcceleratorRow>,
}

const TABLE_DATA: &str = include_str!("../data/table1.toml");

impl CalibrationTable {
    /// The calibration table shipped with the crate.
    pub fn builtin() -> &'static CalibrationTable {
        use std::sync::OnceLock;
        static TABLE: OnceLock<CalibrationTable> = OnceLock::new();
        TABLE.get_or_init(|| {
            CalibrationTable::from_toml(TABLE_DATA).expect("embedded table parses")
        })
    }

    pub fn from_toml(text: &str) -> Result<CalibrationTable, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn row(&self, name: &str) -> Option<&AcceleratorRow> {
        self.accelerators.iter().find(|r| r.name == name)
    }

    pub fn names(&self) -> Vec<&str> {
        self.accelerators.iter().map(|r| r.name.as_str()).collect()
    }

    /// Baseline (K=1) throughput target in MB/s.
    pub fn baseline_throughput(&self, name: &str) -> Option<f64> {
        self.row(name).map(|r| r.k1.thr_mbps)
    }
}

/// Least-squares line for one resource over the three stored points.
#[derive(Debug, Clone, Copy)]
pub struct LineFit {
    pub intercept: f64,
    pub slope: f64,
    /// Residual (observed - fitted) at K = 1, 2, 4.
    pub residuals: [f64; 3],
}

fn fit_line(ys: [f64; 3]) -> LineFit {
    let xs = [1.0f64, 2.0, 4.0];
    let xm = 7.0 / 3.0;
    let ym = (ys[0] + ys[1] + ys[2]) / 3.0;
    let sxx: f64 = xs.iter().map(|x| (x - xm) * (x - xm)).sum();
    let sxy: f64 = xs
        .iter()
        .zip(ys.iter())
        .map(|(x, y)| (x - xm) * (y - ym))
        .sum();
    let slope = sxy / sxx;
    let intercept = ym - slope * xm;
    let mut residuals = [0.0; 3];
    for (i, (x, y)) in xs.iter().zip(ys.iter()).enumerate() {
        residuals[i] = y - (intercept + slope * x);
    }
    LineFit {
        intercept,
        slope,
        residuals,
    }
}

/// Marginal-cost fits for all four resources of one accelerator.
#[derive(Debug, Clone, Copy)]
pub struct MarginalFit {
    pub lut: LineFit,
    pub ff: LineFit,
    pub bram: LineFit,
    pub dsp: LineFit,
}

impl MarginalFit {
    pub fn get(&self, i: usize) -> &LineFit {
        match i {
            0 => &self.lut,
            1 => &self.ff,
            2 => &self.bram,
            _ => &self.dsp,
        }
    }
}

/// Resource estimate plus a device capacity check.
#[derive(Debug, Clone, Copy)]
pub struct Estimate {
    pub resources: ResourceVector,
    pub capacity_violation: bool,
    /// Utilization of the device per resource, in percent.
    pub utilization_pct: [f64; 4],
}

/// Fit the per-replica marginal cost lines for one accelerator.
pub fn fit_marginal(table: &CalibrationTable, accel: &str) -> Result<MarginalFit, AreaError> {
    let row = table
        .row(accel)
        .ok_or_else(|| AreaError::UnknownAccelerator(accel.to_string()))?;
    let series = |i: usize| {
        [
            row.k1.resources().get(i) as f64,
            row.k2.resources().get(i) as f64,
            row.k4.resources().get(i) as f64,
        ]
    };
    Ok(MarginalFit {
        lut: fit_line(series(0)),
        ff: fit_line(series(1)),
        bram: fit_line(series(2)),
        dsp: fit_line(series(3)),
    })
}

/// Estimate the resource cost of a K-replica tile.
///
/// K in {1, 2, 4} returns the stored calibration point verbatim; other K
/// evaluate the fitted line rounded to integers. DSP is always K times the
/// single-replica count.
pub fn estimate(table: &CalibrationTable, accel: &str, k: u32) -> Result<Estimate, AreaError> {
    if k == 0 {
        return Err(AreaError::ZeroReplication);
    }
    let row = table
        .row(accel)
        .ok_or_else(|| AreaError::UnknownAccelerator(accel.to_string()))?;
    let resources = match k {
        1 => row.k1.resources(),
        2 => row.k2.resources(),
        4 => row.k4.resources(),
        _ => {
            let fit = fit_marginal(table, accel)?;
            let eval = |f: &LineFit| -> u64 {
                let v = f.intercept + f.slope * k as f64;
                if v <= 0.0 {
                    0
                } else {
                    v.round() as u64
                }
            };
            ResourceVector {
                lut: eval(&fit.lut),
                ff: eval(&fit.ff),
                bram: eval(&fit.bram),
                dsp: k as u64 * row.k1.dsp,
            }
        }
    };
    let cap = &table.device;
    let utilization_pct = [
        100.0 * resources.lut as f64 / cap.lut as f64,
        100.0 * resources.ff as f64 / cap.ff as f64,
        100.0 * resources.bram as f64 / cap.bram as f64,
        100.0 * resources.dsp as f64 / cap.dsp as f64,
    ];
    Ok(Estimate {
        resources,
        capacity_violation: resources.exceeds(cap),
        utilization_pct,
    })
}
