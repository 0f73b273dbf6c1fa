//! Triangular interleaver index space.
//!
//! The storage array is the upper-left half of an `N x N` square,
//! `{(i, j) : i + j <= N - 1}`, measured in DRAM bursts. Row `k` and
//! column `k` both hold `N - k` cells. Symbols are written row by row and
//! read column by column.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use crate::error::{Error, Result};

/// Number of cells in a triangle of side `n`.
pub fn triangle_size(n: u32) -> Result<u64> {
    if n == 0 {
        return Err(Error::InvalidGeometry(
            "side length must be at least 1".into(),
        ));
    }
    let n = u64::from(n);
    Ok(n * (n + 1) / 2)
}

/// A cell of the index space: `i` is the row, `j` the column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Position {
    pub i: u32,
    pub j: u32,
}

impl Position {
    pub const fn new(i: u32, j: u32) -> Self {
        Position { i, j }
    }

    pub const fn transpose(self) -> Self {
        Position {
            i: self.j,
            j: self.i,
        }
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.i, self.j)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Geometry {
    side: u32,
    total: u64,
}

impl Geometry {
    pub fn new(side: u32) -> Result<Self> {
        let total = triangle_size(side)?;
        Ok(Geometry { side, total })
    }

    /// Side length `N`.
    pub fn side(&self) -> u32 {
        self.side
    }

    /// Total cell count `T = N(N+1)/2`.
    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn contains(&self, p: Position) -> bool {
        u64::from(p.i) + u64::from(p.j) < u64::from(self.side)
    }

    pub fn check(&self, p: Position) -> Result<()> {
        if self.contains(p) {
            Ok(())
        } else {
            Err(Error::OutOfRange(p, self.side))
        }
    }

    /// Length of row `i` (equivalently column `i`).
    pub fn line_len(&self, k: u32) -> u32 {
        self.side.saturating_sub(k)
    }

    /// Rank of `p` in the row-wise write order.
    pub fn write_rank(&self, p: Position) -> Result<u64> {
        self.check(p)?;
        let n = u64::from(self.side);
        let i = u64::from(p.i);
        Ok(i * n - i * i.saturating_sub(1) / 2 + u64::from(p.j))
    }

    /// Rank of `p` in the column-wise read order.
    pub fn read_rank(&self, p: Position) -> Result<u64> {
        self.write_rank(p.transpose())
    }

    pub fn write_stream(&self) -> WriteStream {
        WriteStream {
            side: self.side,
            cursor: Some(Position::new(0, 0)),
            remaining: self.total,
        }
    }

    pub fn read_stream(&self) -> ReadStream {
        ReadStream {
            inner: self.write_stream(),
        }
    }
}

/// Row-major traversal: row 0 left to right, then row 1, and so on.
#[derive(Debug, Clone)]
pub struct WriteStream {
    side: u32,
    cursor: Option<Position>,
    remaining: u64,
}

impl Iterator for WriteStream {
    type Item = Position;

    fn next(&mut self) -> Option<Position> {
        let cur = self.cursor?;
        self.remaining -= 1;
        self.cursor = if cur.i + cur.j + 1 < self.side {
            Some(Position::new(cur.i, cur.j + 1))
        } else if cur.i + 1 < self.side {
            Some(Position::new(cur.i + 1, 0))
        } else {
            None
        };
        Some(cur)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = usize::try_from(self.remaining).unwrap_or(usize::MAX);
        (n, Some(n))
    }
}

impl ExactSizeIterator for WriteStream {}

/// Column-major traversal, the transpose image of [`WriteStream`].
#[derive(Debug, Clone)]
pub struct ReadStream {
    inner: WriteStream,
}

impl Iterator for ReadStream {
    type Item = Position;

    fn next(&mut self) -> Option<Position> {
        self.inner.next().map(Position::transpose)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        self.inner.size_hint()
    }
}

impl ExactSizeIterator for ReadStream {}

/// Number of whole symbols carried by one DRAM burst.
pub fn symbols_per_burst(symbol_bits: u32, burst_bits: u32) -> Result<u32> {
    if symbol_bits == 0 || burst_bits == 0 || symbol_bits > burst_bits {
        return Err(Error::InvalidPacking {
            symbol_bits,
            burst_bits,
        });
    }
    Ok(burst_bits / symbol_bits)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BurstPacking {
    pub symbol_bits: u32,
    pub burst_bits: u32,
    slots: u32,
}

impl BurstPacking {
    pub fn new(symbol_bits: u32, burst_bits: u32) -> Result<Self> {
        let slots = symbols_per_burst(symbol_bits, burst_bits)?;
        Ok(BurstPacking {
            symbol_bits,
            burst_bits,
            slots,
        })
    }

    pub fn slots(&self) -> u32 {
        self.slots
    }

    pub fn assign(&self, codeword_ids: &[u32]) -> Result<Vec<Vec<u32>>> {
        assign_codewords(self.slots as usize, codeword_ids)
    }
}

/// Packs a symbol stream (given as the code word id of each symbol) into
/// bursts of `slots` symbols so that no burst holds two symbols of the same
/// code word.
///
/// Code words are served round-robin in order of first appearance; each
/// burst takes the oldest pending symbol of the next `slots` code words that
/// still have symbols left. The final bursts may be partially filled once
/// fewer than `slots` code words remain.
pub fn assign_codewords(slots: usize, codeword_ids: &[u32]) -> Result<Vec<Vec<u32>>> {
    let mut order: Vec<u32> = Vec::new();
    let mut pending: HashMap<u32, usize> = HashMap::new();
    for &id in codeword_ids {
        let count = pending.entry(id).or_insert_with(|| {
            order.push(id);
            0
        });
        *count += 1;
    }
    if slots == 0 || order.len() < slots {
        return Err(Error::InfeasiblePacking {
            slots,
            distinct: order.len(),
        });
    }

    let mut ring: VecDeque<u32> = order.into();
    let mut bursts = Vec::with_capacity(codeword_ids.len().div_ceil(slots));
    while !ring.is_empty() {
        let take = slots.min(ring.len());
        let mut burst = Vec::with_capacity(take);
        for _ in 0..take {
            let id = ring.pop_front().expect("ring holds at least `take` ids");
            burst.push(id);
            let left = pending.get_mut(&id).expect("every ring id is pending");
            *left -= 1;
            if *left > 0 {
                ring.push_back(id);
            }
        }
        bursts.push(burst);
    }
    Ok(bursts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn collect(it: impl Iterator<Item = Position>) -> Vec<(u32, u32)> {
        it.map(|p| (p.i, p.j)).collect()
    }

    #[test]
    fn triangle_sizes() {
        assert_eq!(triangle_size(1).unwrap(), 1);
        assert_eq!(triangle_size(4).unwrap(), 10);
        assert_eq!(triangle_size(5000).unwrap(), 12_502_500);
        assert!(matches!(triangle_size(0), Err(Error::InvalidGeometry(_))));
    }

    #[test]
    fn write_stream_order() {
        let g = Geometry::new(2).unwrap();
        assert_eq!(collect(g.write_stream()), vec![(0, 0), (0, 1), (1, 0)]);
        let g = Geometry::new(4).unwrap();
        let head: Vec<_> = collect(g.write_stream().take(5));
        assert_eq!(head, vec![(0, 0), (0, 1), (0, 2), (0, 3), (1, 0)]);
    }

    #[test]
    fn read_stream_order() {
        let g = Geometry::new(2).unwrap();
        assert_eq!(collect(g.read_stream()), vec![(0, 0), (1, 0), (0, 1)]);
        let g = Geometry::new(4).unwrap();
        let head: Vec<_> = collect(g.read_stream().take(5));
        assert_eq!(head, vec![(0, 0), (1, 0), (2, 0), (3, 0), (0, 1)]);
    }

    #[test]
    fn streams_are_restartable_and_exact_size() {
        let g = Geometry::new(37).unwrap();
        assert_eq!(g.write_stream().len() as u64, g.total());
        assert_eq!(g.read_stream().count() as u64, g.total());
        assert_eq!(collect(g.write_stream()), collect(g.write_stream()));
    }

    #[test]
    fn conservation_exhaustive() {
        for n in [1u32, 2, 3, 17, 64, 255, 1024] {
            let g = Geometry::new(n).unwrap();
            let mut expected = HashSet::new();
            for i in 0..n {
                for j in 0..n - i {
                    expected.insert(Position::new(i, j));
                }
            }
            let w: HashSet<_> = g.write_stream().collect();
            let r: HashSet<_> = g.read_stream().collect();
            assert_eq!(w.len() as u64, g.total());
            assert_eq!(w, expected, "write stream, n = {n}");
            assert_eq!(r, expected, "read stream, n = {n}");
        }
    }

    #[test]
    fn row_and_column_lengths_match() {
        let g = Geometry::new(50).unwrap();
        let mut rows = vec![0u32; 50];
        let mut cols = vec![0u32; 50];
        for p in g.write_stream() {
            rows[p.i as usize] += 1;
        }
        for p in g.read_stream() {
            cols[p.j as usize] += 1;
        }
        rows.sort_unstable();
        cols.sort_unstable();
        assert_eq!(rows, cols);
    }

    #[test]
    fn ranks_match_stream_order() {
        let g = Geometry::new(23).unwrap();
        for (k, p) in g.write_stream().enumerate() {
            assert_eq!(g.write_rank(p).unwrap(), k as u64);
        }
        for (k, p) in g.read_stream().enumerate() {
            assert_eq!(g.read_rank(p).unwrap(), k as u64);
            assert_eq!(g.write_rank(p.transpose()).unwrap(), k as u64);
        }
        assert!(g.write_rank(Position::new(10, 13)).is_err());
    }

    #[test]
    fn packing() {
        assert_eq!(symbols_per_burst(3, 512).unwrap(), 170);
        assert_eq!(symbols_per_burst(8, 512).unwrap(), 64);
        assert_eq!(symbols_per_burst(512, 512).unwrap(), 1);
        assert!(matches!(
            symbols_per_burst(513, 512),
            Err(Error::InvalidPacking { .. })
        ));
        assert_eq!(BurstPacking::new(3, 512).unwrap().slots(), 170);
    }

    #[test]
    fn round_robin_assignment() {
        let ids: Vec<u32> = (0..4).cycle().take(12).collect();
        let bursts = assign_codewords(4, &ids).unwrap();
        assert_eq!(bursts.len(), 3);
        assert_eq!(bursts[0], vec![0, 1, 2, 3]);
        assert!(matches!(
            assign_codewords(2, &[7, 7]),
            Err(Error::InfeasiblePacking {
                slots: 2,
                distinct: 1
            })
        ));
    }

    #[test]
    fn one_symbol_per_codeword_per_burst() {
        // 170 code words of 6 symbols each, arriving code word by code word.
        let ids: Vec<u32> = (0..170u32)
            .flat_map(|c| std::iter::repeat_n(c, 6))
            .collect();
        let bursts = assign_codewords(170, &ids).unwrap();
        assert_eq!(bursts.len(), 6);
        for b in &bursts {
            assert_eq!(b.len(), 170);
            let distinct: HashSet<_> = b.iter().collect();
            assert_eq!(distinct.len(), b.len());
        }
    }
}
