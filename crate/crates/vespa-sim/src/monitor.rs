//! Run-time monitoring: four per-tile counters (execution time, packets in,
//! packets out, round-trip time), their memory-mapped 32-bit register space,
//! and windowed traffic sampling.
//!
//! Register map (also in `docs/register_map.md`):
//!
//! | address            | register    | access | behavior                            |
//! |--------------------|-------------|--------|-------------------------------------|
//! | tile*0x40 + 0x00   | CONTROL     | RW     | bits 3:0 statistic enables,         |
//! |                    |             |        | bit 31 write-one-to-clear reset of  |
//! |                    |             |        | the three manual counters           |
//! | tile*0x40 + 0x04   | EXEC_TIME   | RO     | accelerator cycles, auto start/stop |
//! | tile*0x40 + 0x08   | PKTS_IN     | RO     | manual reset                        |
//! | tile*0x40 + 0x0C   | PKTS_OUT    | RO     | manual reset                        |
//! | tile*0x40 + 0x10   | RTT_SUM_LO  | RO     | reading latches RTT_SUM_HI          |
//! | tile*0x40 + 0x14   | RTT_SUM_HI  | RO     | latched by RTT_SUM_LO read          |
//! | tile*0x40 + 0x18   | RTT_COUNT   | RO     | manual reset                        |
//! | tile*0x40 + 0x1C   | RTT_LAST    | RO     | most recent sample, fs (truncated)  |
//! | 0x8000 + island*4  | FREQ_MHZ    | RW     | effective island frequency in MHz   |
//! | 0xC000 + island*4  | DFS_STATUS  | RO     | bit 0 = actuator busy               |

use crate::clocking::ClockSystem;
use crate::engine::SimTime;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MonitorError {
    #[error("unmapped register address {0:#06x}")]
    Unmapped(u32),
    #[error("register {0:#06x} is read-only")]
    ReadOnly(u32),
}

pub const TILE_REG_STRIDE: u32 = 0x40;
pub const REG_CONTROL: u32 = 0x00;
pub const REG_EXEC_TIME: u32 = 0x04;
pub const REG_PKTS_IN: u32 = 0x08;
pub const REG_PKTS_OUT: u32 = 0x0C;
pub const REG_RTT_SUM_LO: u32 = 0x10;
pub const REG_RTT_SUM_HI: u32 = 0x14;
pub const REG_RTT_COUNT: u32 = 0x18;
pub const REG_RTT_LAST: u32 = 0x1C;
pub const FREQ_REG_BASE: u32 = 0x8000;
pub const DFS_STATUS_BASE: u32 = 0xC000;
pub const CONTROL_RESET_BIT: u32 = 1 << 31;

/// Which of the four statistics a control-register bit enables.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stat {
    ExecTime = 0,
    PktsIn = 1,
    PktsOut = 2,
    Rtt = 3,
}

/// The four monitored statistics of one tile.
#[derive(Debug, Clone)]
pub struct TileCounters {
    pub exec_time: u64,
    pub pkts_in: u64,
    pub pkts_out: u64,
    pub rtt_sum_fs: u64,
    pub rtt_count: u64,
    pub rtt_last_fs: u64,
    pub enables: [bool; 4],
    /// Start edge of the running invocation, if any.
    exec_start_edge: Option<u64>,
    /// HI word latched by the last RTT_SUM_LO read.
    latched_hi: u32,
}

impl TileCounters {
    fn new() -> Self {
        TileCounters {
            exec_time: 0,
            pkts_in: 0,
            pkts_out: 0,
            rtt_sum_fs: 0,
            rtt_count: 0,
            rtt_last_fs: 0,
            enables: [true; 4],
            exec_start_edge: None,
            latched_hi: 0,
        }
    }

    pub fn mean_rtt_fs(&self) -> Option<f64> {
        if self.rtt_count == 0 {
            None
        } else {
            Some(self.rtt_sum_fs as f64 / self.rtt_count as f64)
        }
    }
}

/// Counter bank for all tiles plus the register decode.
#[derive(Debug)]
pub struct Monitor {
    counters: Vec<TileCounters>,
}

impl Monitor {
    pub fn new(tile_count: usize) -> Self {
        Monitor {
            counters: (0..tile_count).map(|_| TileCounters::new()).collect(),
        }
    }

    pub fn tile(&self, idx: usize) -> &TileCounters {
        &self.counters[idx]
    }

    pub fn tile_count(&self) -> usize {
        self.counters.len()
    }

    /// Execution-time counter resets automatically when the tile starts its
    /// computation.
    pub fn exec_start(&mut self, tile: usize, edge: u64) {
        let c = &mut self.counters[tile];
        if c.enables[Stat::ExecTime as usize] {
            c.exec_time = 0;
            c.exec_start_edge = Some(edge);
        }
    }

    /// ... and stops (freezes) when the computation completes.
    pub fn exec_stop(&mut self, tile: usize, edge: u64) {
        let c = &mut self.counters[tile];
        if let Some(start) = c.exec_start_edge.take() {
            c.exec_time = edge.saturating_sub(start);
        }
    }

    pub fn count_pkt_in(&mut self, tile: usize) {
        let c = &mut self.counters[tile];
        if c.enables[Stat::PktsIn as usize] {
            c.pkts_in += 1;
        }
    }

    pub fn count_pkt_out(&mut self, tile: usize) {
        let c = &mut self.counters[tile];
        if c.enables[Stat::PktsOut as usize] {
            c.pkts_out += 1;
        }
    }

    /// Record one DMA round trip: request issue to first data arrival.
    pub fn record_rtt(&mut self, tile: usize, issue: SimTime, arrival: SimTime) {
        debug_assert!(arrival >= issue);
        let c = &mut self.counters[tile];
        if c.enables[Stat::Rtt as usize] {
            let rtt = arrival.fs() - issue.fs();
            c.rtt_sum_fs = c.rtt_sum_fs.wrapping_add(rtt);
            c.rtt_count += 1;
            c.rtt_last_fs = rtt;
        }
    }

    /// Manual reset of the three non-automatic counters.
    pub fn reset_manual(&mut self, tile: usize) {
        let c = &mut self.counters[tile];
        c.pkts_in = 0;
        c.pkts_out = 0;
        c.rtt_sum_fs = 0;
        c.rtt_count = 0;
        c.rtt_last_fs = 0;
    }

    pub fn set_enable(&mut self, tile: usize, stat: Stat, on: bool) {
        self.counters[tile].enables[stat as usize] = on;
    }

    fn decode(&self, addr: u32) -> Option<(usize, u32)> {
        if addr >= FREQ_REG_BASE {
            return None;
        }
        let tile = (addr / TILE_REG_STRIDE) as usize;
        let reg = addr % TILE_REG_STRIDE;
        if tile < self.counters.len() {
            Some((tile, reg))
        } else {
            None
        }
    }

    /// Side-effect-free reads, except that reading RTT_SUM_LO latches the HI
    /// word so a host can assemble a consistent 64-bit value.
    pub fn read_register(&mut self, addr: u32, clocks: &ClockSystem, now: SimTime) -> Result<u32, MonitorError> {
        if addr >= DFS_STATUS_BASE {
            let island = ((addr - DFS_STATUS_BASE) / 4) as usize;
            if island < clocks.island_count() && clocks.is_dfs(island) {
                return Ok(clocks.busy_until(island).is_some() as u32);
            }
            return Err(MonitorError::Unmapped(addr));
        }
        if addr >= FREQ_REG_BASE {
            let island = ((addr - FREQ_REG_BASE) / 4) as usize;
            if island < clocks.island_count() && clocks.is_dfs(island) {
                return Ok((clocks.freq_at(island, now) / 1_000_000) as u32);
            }
            return Err(MonitorError::Unmapped(addr));
        }
        let (tile, reg) = self.decode(addr).ok_or(MonitorError::Unmapped(addr))?;
        let c = &mut self.counters[tile];
        let v = match reg {
            REG_CONTROL => {
                (c.enables[0] as u32)
                    | (c.enables[1] as u32) << 1
                    | (c.enables[2] as u32) << 2
                    | (c.enables[3] as u32) << 3
            }
            REG_EXEC_TIME => c.exec_time as u32,
            REG_PKTS_IN => c.pkts_in as u32,
            REG_PKTS_OUT => c.pkts_out as u32,
            REG_RTT_SUM_LO => {
                c.latched_hi = (c.rtt_sum_fs >> 32) as u32;
                c.rtt_sum_fs as u32
            }
            REG_RTT_SUM_HI => c.latched_hi,
            REG_RTT_COUNT => c.rtt_count as u32,
            REG_RTT_LAST => c.rtt_last_fs as u32,
            _ => return Err(MonitorError::Unmapped(addr)),
        };
        Ok(v)
    }

    /// Writes: tile CONTROL (enables + write-one-to-clear reset). Frequency
    /// register writes go through the DFS actuator and are handled by the
    /// simulation, not here.
    pub fn write_register(&mut self, addr: u32, value: u32) -> Result<(), MonitorError> {
        let (tile, reg) = self.decode(addr).ok_or(MonitorError::Unmapped(addr))?;
        match reg {
            REG_CONTROL => {
                let c = &mut self.counters[tile];
                for bit in 0..4 {
                    c.enables[bit] = value & (1 << bit) != 0;
                }
                if value & CONTROL_RESET_BIT != 0 {
                    self.reset_manual(tile);
                }
                Ok(())
            }
            REG_EXEC_TIME | REG_PKTS_IN | REG_PKTS_OUT | REG_RTT_SUM_LO | REG_RTT_SUM_HI
            | REG_RTT_COUNT | REG_RTT_LAST => Err(MonitorError::ReadOnly(addr)),
            _ => Err(MonitorError::Unmapped(addr)),
        }
    }
}

pub fn tile_reg(tile: usize, reg: u32) -> u32 {
    tile as u32 * TILE_REG_STRIDE + reg
}

pub fn freq_reg(island: usize) -> u32 {
    FREQ_REG_BASE + island as u32 * 4
}

/// One point of a sampled time series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatePoint {
    /// Window end time.
    pub t: SimTime,
    /// Millions of packets per second over the window.
    pub mpkts_per_sec: f64,
}

/// Packets-per-window probe over a tile's ingress counter. The rate of each
/// sample is computed over the actual elapsed span since the previous sample,
/// so one-shot samples interleave correctly with the periodic ones.
#[derive(Debug, Clone)]
pub struct TrafficSampler {
    pub probe_tile: usize,
    pub window: SimTime,
    last_count: u64,
    last_t: SimTime,
    pub series: Vec<RatePoint>,
}

impl TrafficSampler {
    pub fn new(probe_tile: usize, window: SimTime) -> Self {
        assert!(window.fs() > 0);
        TrafficSampler {
            probe_tile,
            window,
            last_count: 0,
            last_t: SimTime::ZERO,
            series: Vec::new(),
        }
    }

    /// Close the window ending at `t`.
    pub fn sample(&mut self, t: SimTime, pkts_in_total: u64) -> RatePoint {
        let delta = pkts_in_total - self.last_count;
        let span = t.saturating_sub(self.last_t);
        self.last_count = pkts_in_total;
        self.last_t = t;
        let secs = span as f64 / 1e15;
        let point = RatePoint {
            t,
            mpkts_per_sec: if secs > 0.0 {
                delta as f64 / secs / 1e6
            } else {
                0.0
            },
        };
        self.series.push(point);
        point
    }
}
