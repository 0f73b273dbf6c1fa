use thiserror::Error;

use crate::geometry::Position;
use crate::mapping::DramAddress;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("invalid packing: symbol of {symbol_bits} bits does not fit a {burst_bits}-bit burst")]
    InvalidPacking { symbol_bits: u32, burst_bits: u32 },

    #[error("infeasible packing: {distinct} distinct code words for {slots} slots per burst")]
    InfeasiblePacking { slots: usize, distinct: usize },

    #[error("unsupported topology: {0}")]
    UnsupportedTopology(String),

    #[error("position {0} is outside the triangle of side {1}")]
    OutOfRange(Position, u32),

    #[error("address {0} is not in the image of the mapping")]
    UnmappedAddress(DramAddress),

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("preset parse error at line {line}: {msg}")]
    PresetParse { line: usize, msg: String },

    #[error("simulation aborted: address {addr} at request {index} is out of bounds")]
    SimulationAbort { index: u64, addr: DramAddress },

    #[error("utilization is undefined for a phase with zero elapsed cycles")]
    UndefinedUtilization,

    #[error("enumeration of {0} positions exceeds the oracle limit")]
    TooLarge(u64),

    #[error("incomplete results: {0}")]
    IncompleteResults(String),

    #[error("malformed results file: {0}")]
    MalformedResults(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
