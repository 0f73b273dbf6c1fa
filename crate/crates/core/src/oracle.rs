//! Brute-force reference checks.
//!
//! Everything here treats a mapping as an opaque `Position -> DramAddress`
//! function or consumes a recorded access trace. No timing is involved.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::geometry::{Geometry, Position};
use crate::mapping::{AddressMapper, DramAddress, DramTopology, Phase, TraceRecord};

/// Largest index space `verify_bijection` will enumerate.
pub const ENUMERATION_LIMIT: u64 = 1 << 24;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MissReport {
    pub per_bank: Vec<u64>,
    /// Stream index of the first miss on each bank that replaced an open row.
    pub first_miss: Vec<Option<u64>>,
    pub total: u64,
}

impl MissReport {
    /// Misses that closed a previously open row (excludes each bank's first activation).
    pub fn conflicts(&self) -> u64 {
        self.total - self.per_bank.iter().filter(|&&m| m > 0).count() as u64
    }
}

/// Timing-free open-page model: every access to a row other than the one
/// last opened on its bank is a miss, and so is the first access to a bank.
pub fn oracle_page_misses<I>(addresses: I, topology: &DramTopology) -> MissReport
where
    I: IntoIterator<Item = DramAddress>,
{
    let banks = topology.banks() as usize;
    let mut open: Vec<Option<u32>> = vec![None; banks];
    let mut report = MissReport {
        per_bank: vec![0; banks],
        first_miss: vec![None; banks],
        total: 0,
    };
    for (index, a) in addresses.into_iter().enumerate() {
        let b = a.bank as usize;
        match open[b] {
            Some(row) if row == a.row => {}
            previous => {
                if previous.is_some() && report.first_miss[b].is_none() {
                    report.first_miss[b] = Some(index as u64);
                }
                open[b] = Some(a.row);
                report.per_bank[b] += 1;
                report.total += 1;
            }
        }
    }
    report
}

pub fn trace_page_misses(
    records: &[TraceRecord],
    phase: Phase,
    topology: &DramTopology,
) -> MissReport {
    let mut selected: Vec<&TraceRecord> = records.iter().filter(|r| r.phase == phase).collect();
    selected.sort_by_key(|r| r.index);
    oracle_page_misses(selected.into_iter().map(|r| r.address), topology)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Collision {
    pub first: Position,
    pub second: Position,
    pub address: DramAddress,
}

/// Lists every position that lands on an address already taken by an
/// earlier position (in write order).
pub fn verify_bijection<F>(map: F, g: &Geometry) -> Result<Vec<Collision>>
where
    F: Fn(Position) -> Result<DramAddress>,
{
    if g.total() > ENUMERATION_LIMIT {
        return Err(Error::TooLarge(g.total()));
    }
    let mut seen: HashMap<DramAddress, Position> = HashMap::with_capacity(g.total() as usize);
    let mut collisions = Vec::new();
    for i in 0..g.side() {
        for j in 0..g.side() - i {
            let p = Position::new(i, j);
            let address = map(p)?;
            if let Some(&first) = seen.get(&address) {
                collisions.push(Collision {
                    first,
                    second: p,
                    address,
                });
            } else {
                seen.insert(address, p);
            }
        }
    }
    Ok(collisions)
}

/// Checks that along every row (write direction) and every column (read
/// direction) the bank index advances by exactly one modulo `B` per access.
/// Returns the positions where it does not.
pub fn bank_step_violations(mapper: &dyn AddressMapper) -> Result<Vec<Position>> {
    let g = *mapper.geometry();
    let banks = mapper.topology().banks();
    let mut bad = Vec::new();
    for k in 0..g.side() {
        for step in 1..g.line_len(k) {
            for (prev, cur) in [
                (Position::new(k, step - 1), Position::new(k, step)),
                (Position::new(step - 1, k), Position::new(step, k)),
            ] {
                let a = mapper.map(prev)?.bank;
                let b = mapper.map(cur)?.bank;
                if b != (a + 1) % banks {
                    bad.push(cur);
                }
            }
        }
    }
    Ok(bad)
}

/// Miss counts of the write and the read phase of `mapper`.
pub fn phase_misses(mapper: &dyn AddressMapper) -> Result<(MissReport, MissReport)> {
    let g = *mapper.geometry();
    let t = *mapper.topology();
    let write: Vec<DramAddress> = g
        .write_stream()
        .map(|p| mapper.map(p))
        .collect::<Result<_>>()?;
    let read: Vec<DramAddress> = g
        .read_stream()
        .map(|p| mapper.map(p))
        .collect::<Result<_>>()?;
    Ok((oracle_page_misses(write, &t), oracle_page_misses(read, &t)))
}

/// Read misses over write misses.
pub fn miss_ratio(write: &MissReport, read: &MissReport) -> f64 {
    read.total as f64 / write.total.max(1) as f64
}

/// True when no two banks share a first-conflict index.
pub fn first_misses_distinct(report: &MissReport) -> bool {
    let mut seen: Vec<u64> = report.first_miss.iter().flatten().copied().collect();
    let n = seen.len();
    seen.sort_unstable();
    seen.dedup();
    seen.len() == n
}
