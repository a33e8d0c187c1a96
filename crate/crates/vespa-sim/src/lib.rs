//! Deterministic discrete-event simulator for tile-based heterogeneous SoCs.
//!
//! The simulated platform is a 2D-mesh NoC connecting accelerator, memory,
//! traffic-generator, CPU, and I/O tiles. Accelerator tiles can instantiate K
//! parallel replicas of one accelerator behind a shared four-channel stream
//! bridge; tiles and routers are partitioned into frequency islands whose
//! clocks can be retargeted at run time by glitch-free DFS actuators; and a
//! monitoring layer exposes per-tile counters through a memory-mapped 32-bit
//! register space.
//!
//! The `vespa-sim` binary drives single runs, design-space sweeps, and
//! schedule-driven profiling on top of this library.

pub mod area;
pub mod calibration;
pub mod cli;
pub mod clocking;
pub mod config;
pub mod engine;
pub mod monitor;
pub mod noc;
pub mod sim;
pub mod tiles;

pub use config::{load_description, reference_testbed, serialize_description, SoCDescription};
pub use engine::{cycle_edge_time, SimTime};
pub use sim::SocSim;
