//! Placement of interleaver cells into DRAM.
//!
//! Two schemes are provided. [`RowMajorMapping`] is the SRAM-style packed
//! linearization. [`OptimizedMapping`] combines three measures:
//!
//! * the bank index is the anti-diagonal `(i + j) mod B`, so both traversal
//!   directions step through the banks (and therefore the bank groups, which
//!   occupy the low bank bits) one by one;
//! * each DRAM row holds one rectangular tile of the index space on every
//!   bank, so page misses occur at a similar rate in both directions;
//! * every bank's cells are circularly shifted towards the top left by a
//!   bank-dependent offset, so banks cross tile borders at different times.
//!
//! When `C x B` is not a perfect square the tiles are `W x H` rectangles
//! with `W = 2H`. They are grouped into `W x W` blocks that are split
//! horizontally or vertically in a checkerboard pattern, so a row and a
//! column cross the same number of tile borders on average.
//!
//! All per-access arithmetic is additions, shifts and masks; the only table
//! is the dense tile allocation built once at construction.

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Geometry, Position};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DramTopology {
    pub bank_groups: u32,
    pub banks_per_group: u32,
    /// Page size in bursts (`C`).
    pub bursts_per_page: u32,
    /// Rows per bank.
    pub rows: u32,
}

impl DramTopology {
    pub fn new(
        bank_groups: u32,
        banks_per_group: u32,
        bursts_per_page: u32,
        rows: u32,
    ) -> Result<Self> {
        let t = DramTopology {
            bank_groups,
            banks_per_group,
            bursts_per_page,
            rows,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        let pow2 = |v: u32| v != 0 && v.is_power_of_two();
        if !pow2(self.bank_groups) || !pow2(self.banks_per_group) || !pow2(self.bursts_per_page) {
            return Err(Error::UnsupportedTopology(format!(
                "bank groups ({}), banks per group ({}) and bursts per page ({}) must be powers of two",
                self.bank_groups, self.banks_per_group, self.bursts_per_page
            )));
        }
        if self.rows == 0 {
            return Err(Error::UnsupportedTopology("zero rows per bank".into()));
        }
        Ok(())
    }

    /// Total bank count `B`.
    pub fn banks(&self) -> u32 {
        self.bank_groups * self.banks_per_group
    }

    /// Bank group of a bank: its low bits.
    pub fn group_of(&self, bank: u32) -> u32 {
        bank & (self.bank_groups - 1)
    }

    /// Cells held by one DRAM row across all banks (`C x B`).
    pub fn row_cells(&self) -> u64 {
        u64::from(self.bursts_per_page) * u64::from(self.banks())
    }

    pub fn contains(&self, a: DramAddress) -> bool {
        a.bank < self.banks() && a.row < self.rows && a.column < self.bursts_per_page
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DramAddress {
    pub bank: u32,
    pub row: u32,
    pub column: u32,
}

impl DramAddress {
    pub const fn new(bank: u32, row: u32, column: u32) -> Self {
        DramAddress { bank, row, column }
    }
}

impl fmt::Display for DramAddress {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{{bank {}, row {}, col {}}}",
            self.bank, self.row, self.column
        )
    }
}

/// Tile shape and stagger stride of the optimized mapping.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MappingParams {
    /// Tile width `W` (columns of the index space).
    pub tile_width: u32,
    /// Tile height `H`.
    pub tile_height: u32,
    /// Per-bank shift step `d`; bank `b` is shifted by `d * b` in both directions.
    pub stagger: u32,
    /// Side of the padded square index space.
    pub padded_side: u32,
}

impl MappingParams {
    pub fn with_stagger(mut self, stagger: u32) -> Result<Self> {
        if stagger == 0 {
            return Err(Error::UnsupportedTopology(
                "stagger stride must be at least 1".into(),
            ));
        }
        self.stagger = stagger;
        Ok(self)
    }
}

/// Tile dimensions for a topology: the balanced power-of-two split of `C x B`.
pub fn derive_params(topology: &DramTopology, geometry: &Geometry) -> Result<MappingParams> {
    topology.validate()?;
    let banks = topology.banks();
    let k = topology.row_cells().trailing_zeros();
    let tile_width = 1u32 << k.div_ceil(2);
    let tile_height = 1u32 << (k / 2);
    if banks > tile_height {
        return Err(Error::UnsupportedTopology(format!(
            "{banks} banks exceed the tile height {tile_height}; a tile could not hold every bank"
        )));
    }
    let stagger = (tile_width / banks).max(1);
    // The tile width is a multiple of the height and of the bank count.
    let padded_side = geometry.side().div_ceil(tile_width) * tile_width;
    Ok(MappingParams {
        tile_width,
        tile_height,
        stagger,
        padded_side,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    RowMajor,
    Optimized,
}

impl Scheme {
    pub const ALL: [Scheme; 2] = [Scheme::RowMajor, Scheme::Optimized];

    pub fn as_str(&self) -> &'static str {
        match self {
            Scheme::RowMajor => "row_major",
            Scheme::Optimized => "optimized",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "row_major" | "row-major" => Ok(Scheme::RowMajor),
            "optimized" => Ok(Scheme::Optimized),
            other => Err(Error::MalformedResults(format!("unknown scheme `{other}`"))),
        }
    }
}

/// A placement of every valid interleaver cell into DRAM.
pub trait AddressMapper: Send + Sync {
    fn map(&self, p: Position) -> Result<DramAddress>;
    fn geometry(&self) -> &Geometry;
    fn topology(&self) -> &DramTopology;
}

fn log2(v: u32) -> u32 {
    debug_assert!(v.is_power_of_two());
    v.trailing_zeros()
}

/// Packed triangular row-major linearization, laid out as `row | bank | column`.
#[derive(Debug, Clone)]
pub struct RowMajorMapping {
    geometry: Geometry,
    topology: DramTopology,
    col_bits: u32,
    bank_bits: u32,
}

impl RowMajorMapping {
    pub fn new(geometry: Geometry, topology: DramTopology) -> Result<Self> {
        topology.validate()?;
        let needed = geometry.total().div_ceil(topology.row_cells());
        if needed > u64::from(topology.rows) {
            return Err(Error::UnsupportedTopology(format!(
                "{needed} rows needed, device has {}",
                topology.rows
            )));
        }
        Ok(RowMajorMapping {
            geometry,
            topology,
            col_bits: log2(topology.bursts_per_page),
            bank_bits: log2(topology.banks()),
        })
    }

    /// DRAM rows allocated on every bank.
    pub fn rows_used(&self) -> u64 {
        self.geometry.total().div_ceil(self.topology.row_cells())
    }
}

impl AddressMapper for RowMajorMapping {
    fn map(&self, p: Position) -> Result<DramAddress> {
        let lin = self.geometry.write_rank(p)?;
        let column = (lin & u64::from(self.topology.bursts_per_page - 1)) as u32;
        let bank = ((lin >> self.col_bits) & u64::from(self.topology.banks() - 1)) as u32;
        let row = (lin >> (self.col_bits + self.bank_bits)) as u32;
        Ok(DramAddress { bank, row, column })
    }

    fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    fn topology(&self) -> &DramTopology {
        &self.topology
    }
}

pub fn map_row_major(p: Position, g: &Geometry, t: &DramTopology) -> Result<DramAddress> {
    RowMajorMapping::new(*g, *t)?.map(p)
}

const UNALLOCATED: u32 = u32::MAX;

/// Location of a shifted cell: raw tile id plus the cell within the tile.
#[derive(Debug, Clone, Copy)]
struct TileCell {
    raw: u32,
    li: u32,
    lj: u32,
    width_bits: u32,
}

/// Bank-diagonal, tiled, staggered mapping.
#[derive(Debug, Clone)]
pub struct OptimizedMapping {
    geometry: Geometry,
    topology: DramTopology,
    params: MappingParams,
    bank_bits: u32,
    block_bits: u32,
    short_bits: u32,
    /// Whether tiles are `2:1` rectangles arranged in alternating blocks.
    split: bool,
    block_index_bits: u32,
    /// Shift applied to each bank, already reduced modulo the padded side.
    offsets: Vec<u32>,
    /// Diagonal class `(i* + j*) mod B` that each bank's shifted cells occupy.
    classes: Vec<u32>,
    /// Banks whose blocks use the opposite split orientation.
    flipped: u64,
    /// Raw tile id to dense DRAM row.
    dense: Vec<u32>,
    /// Dense DRAM row to raw tile id.
    raw_of_row: Vec<u32>,
}

impl OptimizedMapping {
    pub fn new(geometry: Geometry, topology: DramTopology, params: MappingParams) -> Result<Self> {
        topology.validate()?;
        let banks = topology.banks();
        let MappingParams {
            tile_width,
            tile_height,
            stagger,
            padded_side,
        } = params;
        if !tile_width.is_power_of_two()
            || !tile_height.is_power_of_two()
            || u64::from(tile_width) * u64::from(tile_height) != topology.row_cells()
            || !(tile_width == tile_height || tile_width == 2 * tile_height)
        {
            return Err(Error::UnsupportedTopology(format!(
                "tile {tile_width}x{tile_height} does not fit a {}-cell row",
                topology.row_cells()
            )));
        }
        if tile_height < banks {
            return Err(Error::UnsupportedTopology(format!(
                "tile height {tile_height} is below the bank count {banks}"
            )));
        }
        if stagger == 0 {
            return Err(Error::UnsupportedTopology(
                "stagger stride must be at least 1".into(),
            ));
        }
        if padded_side < geometry.side() || padded_side % tile_width != 0 {
            return Err(Error::UnsupportedTopology(format!(
                "padded side {padded_side} must cover {} and be a multiple of {tile_width}",
                geometry.side()
            )));
        }

        let blocks_per_side = padded_side / tile_width;
        let block_index_bits = u32::BITS - (blocks_per_side - 1).leading_zeros();
        let split = tile_width != tile_height;
        let offsets: Vec<u32> = (0..banks)
            .map(|b| ((u64::from(stagger) * u64::from(b)) % u64::from(padded_side)) as u32)
            .collect();
        let classes: Vec<u32> = (0..banks)
            .map(|b| {
                (i64::from(b) - 2 * i64::from(offsets[b as usize])).rem_euclid(i64::from(banks))
                    as u32
            })
            .collect();

        let raw_tiles = 1usize << (2 * block_index_bits + u32::from(split));
        let mut mapping = OptimizedMapping {
            geometry,
            topology,
            params,
            bank_bits: log2(banks),
            block_bits: log2(tile_width),
            short_bits: log2(tile_height),
            split,
            block_index_bits,
            offsets,
            classes,
            flipped: 0,
            dense: vec![UNALLOCATED; raw_tiles],
            raw_of_row: Vec::new(),
        };

        if split {
            mapping.flipped = mapping.balanced_orientation();
        }
        for p in geometry.write_stream() {
            let bank = mapping.bank_of(p);
            let raw = mapping.locate(bank, p).raw as usize;
            mapping.dense[raw] = 0;
        }
        let mut next = 0u32;
        for (raw, slot) in mapping.dense.iter_mut().enumerate() {
            if *slot != UNALLOCATED {
                *slot = next;
                mapping.raw_of_row.push(raw as u32);
                next += 1;
            }
        }
        if next > topology.rows {
            return Err(Error::UnsupportedTopology(format!(
                "{next} rows needed, device has {}",
                topology.rows
            )));
        }
        Ok(mapping)
    }

    /// Tile changes per bank along the write order, as raw tile ids.
    fn write_tile_changes(&self) -> Vec<u64> {
        let banks = self.topology.banks() as usize;
        let mut open = vec![UNALLOCATED; banks];
        let mut changes = vec![0u64; banks];
        for p in self.geometry.write_stream() {
            let bank = self.bank_of(p);
            let raw = self.locate(bank, p).raw;
            if open[bank as usize] != raw {
                open[bank as usize] = raw;
                changes[bank as usize] += 1;
            }
        }
        changes
    }

    /// Picks the split orientation of each bank so that the write and read
    /// orders see the same number of tile changes.
    ///
    /// Transposing the index space maps the read order onto the write order
    /// and swaps the two orientations, so a bank contributes `h` write and
    /// `v` read changes in one orientation and the reverse in the other.
    /// Banks are assigned greedily, largest imbalance first.
    fn balanced_orientation(&mut self) -> u64 {
        let banks = self.topology.banks();
        self.flipped = 0;
        let horizontal = self.write_tile_changes();
        self.flipped = u64::MAX;
        let vertical = self.write_tile_changes();

        let mut order: Vec<(i64, u32)> = (0..banks)
            .map(|b| {
                (
                    horizontal[b as usize] as i64 - vertical[b as usize] as i64,
                    b,
                )
            })
            .collect();
        order.sort_by_key(|&(d, b)| (std::cmp::Reverse(d.abs()), b));
        let mut surplus = 0i64;
        let mut mask = 0u64;
        for (d, b) in order {
            if (surplus + d).abs() <= (surplus - d).abs() {
                surplus += d;
            } else {
                surplus -= d;
                mask |= 1 << b;
            }
        }
        mask
    }

    /// Builds the mapping with the default parameters for `topology`.
    pub fn with_defaults(geometry: Geometry, topology: DramTopology) -> Result<Self> {
        let params = derive_params(&topology, &geometry)?;
        Self::new(geometry, topology, params)
    }

    pub fn params(&self) -> &MappingParams {
        &self.params
    }

    /// Number of DRAM rows (tiles) allocated on each bank.
    pub fn rows_used(&self) -> u64 {
        self.raw_of_row.len() as u64
    }

    /// Cells of a fully populated square index space of side `padded_side`,
    /// i.e. every raw tile that lies inside it times the tile size.
    pub fn square_capacity(&self) -> u64 {
        let blocks = u64::from(self.params.padded_side / self.params.tile_width);
        let tiles_per_block = if self.split { 2 } else { 1 };
        blocks * blocks * tiles_per_block * self.topology.row_cells()
    }

    fn bank_of(&self, p: Position) -> u32 {
        (p.i + p.j) & ((1 << self.bank_bits) - 1)
    }

    fn locate(&self, bank: u32, p: Position) -> TileCell {
        let o = self.offsets[bank as usize];
        let n = self.params.padded_side;
        let wrap = |v: u32| if v >= o { v - o } else { v + n - o };
        let (si, sj) = (wrap(p.i), wrap(p.j));
        let block_mask = (1 << self.block_bits) - 1;
        let short_mask = (1 << self.short_bits) - 1;
        let (bi, bj) = (si >> self.block_bits, sj >> self.block_bits);
        let (ri, rj) = (si & block_mask, sj & block_mask);
        let block = (bi << self.block_index_bits) | bj;
        if !self.split {
            return TileCell {
                raw: block,
                li: ri,
                lj: rj,
                width_bits: self.block_bits,
            };
        }
        if (bi ^ bj ^ (self.flipped >> bank) as u32) & 1 == 0 {
            // Split horizontally: two wide tiles stacked.
            TileCell {
                raw: (block << 1) | (ri >> self.short_bits),
                li: ri & short_mask,
                lj: rj,
                width_bits: self.block_bits,
            }
        } else {
            // Split vertically: two tall tiles side by side.
            TileCell {
                raw: (block << 1) | (rj >> self.short_bits),
                li: ri,
                lj: rj & short_mask,
                width_bits: self.short_bits,
            }
        }
    }

    pub fn unmap(&self, a: DramAddress) -> Result<Position> {
        let unmapped = || Error::UnmappedAddress(a);
        if a.bank >= self.topology.banks() || a.column >= self.topology.bursts_per_page {
            return Err(unmapped());
        }
        let raw = *self.raw_of_row.get(a.row as usize).ok_or_else(unmapped)?;
        let (block, half) = if self.split {
            (raw >> 1, raw & 1)
        } else {
            (raw, 0)
        };
        let bi = block >> self.block_index_bits;
        let bj = block & ((1 << self.block_index_bits) - 1);
        let (mut oi, mut oj) = (bi << self.block_bits, bj << self.block_bits);
        let mut width_bits = self.block_bits;
        if self.split {
            if (bi ^ bj ^ (self.flipped >> a.bank) as u32) & 1 == 0 {
                oi += half << self.short_bits;
            } else {
                oj += half << self.short_bits;
                width_bits = self.short_bits;
            }
        }
        let cell = a.column << self.bank_bits;
        let li = cell >> width_bits;
        let lane = cell & ((1 << width_bits) - 1);
        let bank_mask = (1 << self.bank_bits) - 1;
        let class = self.classes[a.bank as usize];
        let lj = lane + ((class + (1 << self.bank_bits) - (li & bank_mask)) & bank_mask);

        let o = self.offsets[a.bank as usize];
        let n = self.params.padded_side;
        let unwrap = |v: u32| if v + o >= n { v + o - n } else { v + o };
        let p = Position::new(unwrap(oi + li), unwrap(oj + lj));
        if !self.geometry.contains(p) || self.map(p)? != a {
            return Err(unmapped());
        }
        Ok(p)
    }
}

impl AddressMapper for OptimizedMapping {
    fn map(&self, p: Position) -> Result<DramAddress> {
        self.geometry.check(p)?;
        let bank = self.bank_of(p);
        let cell = self.locate(bank, p);
        let row = self.dense[cell.raw as usize];
        debug_assert_ne!(row, UNALLOCATED);
        let column = ((cell.li << cell.width_bits) | cell.lj) >> self.bank_bits;
        Ok(DramAddress { bank, row, column })
    }

    fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    fn topology(&self) -> &DramTopology {
        &self.topology
    }
}

/// One-off optimized mapping of a single position. Build an
/// [`OptimizedMapping`] instead when mapping more than a handful of cells.
pub fn map_optimized(
    p: Position,
    g: &Geometry,
    t: &DramTopology,
    m: &MappingParams,
) -> Result<DramAddress> {
    OptimizedMapping::new(*g, *t, *m)?.map(p)
}

pub fn unmap_optimized(
    a: DramAddress,
    g: &Geometry,
    t: &DramTopology,
    m: &MappingParams,
) -> Result<Position> {
    OptimizedMapping::new(*g, *t, *m)?.unmap(a)
}

/// Allocated cells over used cells, minus one.
pub fn storage_overhead(g: &Geometry, t: &DramTopology, scheme: Scheme) -> Result<f64> {
    let rows = match scheme {
        Scheme::RowMajor => RowMajorMapping::new(*g, *t)?.rows_used(),
        Scheme::Optimized => OptimizedMapping::with_defaults(*g, *t)?.rows_used(),
    };
    Ok((rows * t.row_cells()) as f64 / g.total() as f64 - 1.0)
}

pub fn build_mapper(
    scheme: Scheme,
    g: Geometry,
    t: DramTopology,
) -> Result<Box<dyn AddressMapper>> {
    Ok(match scheme {
        Scheme::RowMajor => Box::new(RowMajorMapping::new(g, t)?),
        Scheme::Optimized => Box::new(OptimizedMapping::with_defaults(g, t)?),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Write,
    Read,
}

impl Phase {
    pub const ALL: [Phase; 2] = [Phase::Write, Phase::Read];

    pub fn as_str(&self) -> &'static str {
        match self {
            Phase::Write => "write",
            Phase::Read => "read",
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Phase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "write" => Ok(Phase::Write),
            "read" => Ok(Phase::Read),
            other => Err(Error::MalformedResults(format!("unknown phase `{other}`"))),
        }
    }
}

/// One line of the access trace dump: `phase,index,i,j,bank,row,column`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TraceRecord {
    pub phase: Phase,
    pub index: u64,
    pub position: Position,
    pub address: DramAddress,
}

/// Writes both phases of `mapper` as an access trace.
pub fn write_access_trace<W: Write>(out: &mut W, mapper: &dyn AddressMapper) -> Result<()> {
    let g = *mapper.geometry();
    for (phase, stream) in [
        (
            Phase::Write,
            Box::new(g.write_stream()) as Box<dyn Iterator<Item = Position>>,
        ),
        (Phase::Read, Box::new(g.read_stream())),
    ] {
        for (index, p) in stream.enumerate() {
            let a = mapper.map(p)?;
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                phase, index, p.i, p.j, a.bank, a.row, a.column
            )?;
        }
    }
    Ok(())
}

pub fn read_access_trace<R: BufRead>(input: R) -> Result<Vec<TraceRecord>> {
    let mut records = Vec::new();
    for (n, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let bad = |msg: &str| Error::MalformedResults(format!("trace line {}: {msg}", n + 1));
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 7 {
            return Err(bad("expected 7 fields"));
        }
        let num = |k: usize| {
            fields[k]
                .trim()
                .parse::<u64>()
                .map_err(|_| bad("not an integer"))
        };
        let small =
            |k: usize| num(k).and_then(|v| u32::try_from(v).map_err(|_| bad("value too large")));
        records.push(TraceRecord {
            phase: fields[0].trim().parse()?,
            index: num(1)?,
            position: Position::new(small(2)?, small(3)?),
            address: DramAddress::new(small(4)?, small(5)?, small(6)?),
        });
    }
    Ok(records)
}
