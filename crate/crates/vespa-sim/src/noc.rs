//! Packet-level 2D-mesh network-on-chip with XY dimension-order routing,
//! bounded input FIFOs with credit backpressure, and two virtual networks
//! (request / response) to keep the mesh deadlock-free.
//!
//! The model is packet-granular: a packet occupies an output link for
//! `size_flits` cycles and advances one router per `pipeline + 1` cycles, so
//! the zero-load delivery latency is `hops * (pipeline + 1) + size_flits`
//! cycles plus any clock-domain crossings.

use crate::engine::SimTime;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum NocError {
    #[error("position ({0}, {1}) outside the mesh")]
    OutsideGrid(u32, u32),
}

/// Mesh coordinate, 0-based `(row, col)`.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default,
)]
#[serde(from = "[u32; 2]", into = "[u32; 2]")]
pub struct Position {
    pub row: u32,
    pub col: u32,
}

impl From<[u32; 2]> for Position {
    fn from(v: [u32; 2]) -> Self {
        Position { row: v[0], col: v[1] }
    }
}

impl From<Position> for [u32; 2] {
    fn from(p: Position) -> Self {
        [p.row, p.col]
    }
}

impl Position {
    pub fn new(row: u32, col: u32) -> Self {
        Position { row, col }
    }
}

impl std::fmt::Display for Position {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{})", self.row, self.col)
    }
}

/// Manhattan distance between two mesh nodes.
pub fn hop_count(a: Position, b: Position) -> u64 {
    (a.row.abs_diff(b.row) + a.col.abs_diff(b.col)) as u64
}

/// Router ports. `Local` is the tile ejection port.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Port {
    East,
    West,
    North,
    South,
    Local,
}

pub const PORT_COUNT: usize = 5;

impl Port {
    pub fn index(self) -> usize {
        match self {
            Port::East => 0,
            Port::West => 1,
            Port::North => 2,
            Port::South => 3,
            Port::Local => 4,
        }
    }

    /// The input port a packet arrives on after leaving through `self`.
    pub fn opposite(self) -> Port {
        match self {
            Port::East => Port::West,
            Port::West => Port::East,
            Port::North => Port::South,
            Port::South => Port::North,
            Port::Local => Port::Local,
        }
    }
}

/// Dimension-order next hop: correct the column first, then the row.
pub fn xy_next_hop(cur: Position, dst: Position, rows: u32, cols: u32) -> Result<Port, NocError> {
    if dst.row >= rows || dst.col >= cols {
        return Err(NocError::OutsideGrid(dst.row, dst.col));
    }
    Ok(if cur.col < dst.col {
        Port::East
    } else if cur.col > dst.col {
        Port::West
    } else if cur.row > dst.row {
        Port::North
    } else if cur.row < dst.row {
        Port::South
    } else {
        Port::Local
    })
}

/// Transport class of a packet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PacketClass {
    RdCtrl,
    WrCtrl,
    RdData,
    WrData,
    MemReq,
    MemResp,
}

impl PacketClass {
    /// Requests and responses travel on disjoint virtual networks.
    pub fn vnet(self) -> usize {
        match self {
            PacketClass::RdCtrl | PacketClass::WrCtrl | PacketClass::WrData | PacketClass::MemReq => 0,
            PacketClass::RdData | PacketClass::MemResp => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PacketClass::RdCtrl => "rd_ctrl",
            PacketClass::WrCtrl => "wr_ctrl",
            PacketClass::RdData => "rd_data",
            PacketClass::WrData => "wr_data",
            PacketClass::MemReq => "mem_req",
            PacketClass::MemResp => "mem_resp",
        }
    }
}

pub const VNET_COUNT: usize = 2;

/// Header flit plus one flit per link-width chunk of payload.
pub fn size_flits(payload_bytes: u64, link_bytes: u64) -> u64 {
    payload_bytes.div_ceil(link_bytes) + 1
}

/// Identifies the originating requester of a transaction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Tag {
    pub tile: usize,
    pub replica: usize,
    pub burst: u64,
}

#[derive(Debug, Clone, Copy)]
pub struct Packet {
    pub id: u64,
    pub class: PacketClass,
    pub src: Position,
    pub dst: Position,
    pub payload_bytes: u64,
    pub size_flits: u64,
    /// Bytes the memory controller must move to satisfy this request; zero
    /// for pure metadata packets and for responses.
    pub req_bytes: u64,
    /// Raw test traffic: delivered and counted, but never interpreted.
    pub synthetic: bool,
    pub t_injected: SimTime,
    pub tag: Tag,
}

#[derive(Debug, Clone, Copy)]
pub struct QueuedPacket {
    pub packet: Packet,
    /// Head arrival time at this router, used for arbitration order.
    pub arrived: SimTime,
}

/// One mesh router: per-input-port, per-virtual-network FIFOs plus
/// busy-until bookkeeping for each output link.
#[derive(Debug)]
pub struct Router {
    pub pos: Position,
    pub island: usize,
    pub fifos: [[std::collections::VecDeque<QueuedPacket>; VNET_COUNT]; PORT_COUNT],
    /// Slots reserved by upstream packets already committed to arrive.
    pub reserved: [[u32; VNET_COUNT]; PORT_COUNT],
    pub out_busy_until: [SimTime; PORT_COUNT],
}

impl Router {
    pub fn new(pos: Position, island: usize) -> Self {
        Router {
            pos,
            island,
            fifos: Default::default(),
            reserved: Default::default(),
            out_busy_until: [SimTime::ZERO; PORT_COUNT],
        }
    }

    pub fn occupancy(&self, port: Port, vnet: usize) -> u32 {
        self.fifos[port.index()][vnet].len() as u32 + self.reserved[port.index()][vnet]
    }
}

/// Static NoC parameters.
#[derive(Debug, Clone, Copy)]
pub struct NocTiming {
    pub link_bytes: u64,
    pub pipeline: u64,
    pub fifo_depth: u32,
}

/// All routers of the mesh.
pub struct Mesh {
    pub rows: u32,
    pub cols: u32,
    pub routers: Vec<Router>,
    pub timing: NocTiming,
}

impl Mesh {
    pub fn new(rows: u32, cols: u32, islands: &[usize], timing: NocTiming) -> Self {
        assert_eq!(islands.len(), (rows * cols) as usize);
        let routers = (0..rows * cols)
            .map(|i| {
                let pos = Position::new(i / cols, i % cols);
                Router::new(pos, islands[i as usize])
            })
            .collect();
        Mesh {
            rows,
            cols,
            routers,
            timing,
        }
    }

    pub fn index(&self, pos: Position) -> usize {
        (pos.row * self.cols + pos.col) as usize
    }

    pub fn router(&self, pos: Position) -> &Router {
        &self.routers[self.index(pos)]
    }

    pub fn router_mut(&mut self, pos: Position) -> &mut Router {
        let i = self.index(pos);
        &mut self.routers[i]
    }

    pub fn neighbor(&self, pos: Position, port: Port) -> Option<Position> {
        match port {
            Port::East if pos.col + 1 < self.cols => Some(Position::new(pos.row, pos.col + 1)),
            Port::West if pos.col > 0 => Some(Position::new(pos.row, pos.col - 1)),
            Port::North if pos.row > 0 => Some(Position::new(pos.row - 1, pos.col)),
            Port::South if pos.row + 1 < self.rows => Some(Position::new(pos.row + 1, pos.col)),
            _ => None,
        }
    }
}
