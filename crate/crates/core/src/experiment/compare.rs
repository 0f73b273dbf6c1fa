use crate::dram::config::{data_rate_of, standard_of};
use crate::error::{Error, Result};
use crate::experiment::reference::ReferenceTable;
use crate::experiment::run::{find, PhaseResult};
use crate::mapping::{Phase, Scheme};

pub const DEFAULT_TOLERANCE_PP: f64 = 15.0;

#[derive(Debug, Clone, PartialEq)]
pub struct CellComparison {
    pub config: String,
    pub scheme: Scheme,
    pub phase: Phase,
    pub measured_pct: f64,
    pub reference_pct: f64,
    pub diff_pp: f64,
    pub passed: bool,
}

/// Row-major read utilization of two grades of one standard.
#[derive(Debug, Clone, PartialEq)]
pub struct RankCheck {
    pub standard: String,
    pub slower: String,
    pub faster: String,
    pub slower_pct: f64,
    pub faster_pct: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub tolerance_pp: f64,
    pub cells: Vec<CellComparison>,
    pub ranks: Vec<RankCheck>,
}

impl ComparisonReport {
    pub fn passed(&self) -> bool {
        self.cells.iter().all(|c| c.passed) && self.ranks.iter().all(|r| r.passed)
    }

    pub fn failures(&self) -> usize {
        self.cells.iter().filter(|c| !c.passed).count()
            + self.ranks.iter().filter(|r| !r.passed).count()
    }
}

/// Compares every reference configuration present in `results` cell by
/// cell, then checks the rank order of row-major reads within each
/// standard for which two grades are present.
///
/// A configuration that appears in the results must have all four cells.
/// Results for configurations outside the reference table are ignored.
pub fn compare_to_reference(
    results: &[PhaseResult],
    reference: &ReferenceTable,
    tolerance_pp: f64,
) -> Result<ComparisonReport> {
    let mut cells = Vec::new();
    for row in reference.rows() {
        if !results.iter().any(|r| r.config == row.config) {
            continue;
        }
        for scheme in Scheme::ALL {
            for phase in Phase::ALL {
                let measured = find(results, row.config, scheme, phase).ok_or_else(|| {
                    Error::IncompleteResults(format!(
                        "{} has no {} {} result",
                        row.config, scheme, phase
                    ))
                })?;
                let measured_pct = 100.0 * measured.utilization;
                let reference_pct = row.get(scheme, phase);
                let diff_pp = (measured_pct - reference_pct).abs();
                cells.push(CellComparison {
                    config: row.config.to_string(),
                    scheme,
                    phase,
                    measured_pct,
                    reference_pct,
                    diff_pp,
                    passed: diff_pp <= tolerance_pp,
                });
            }
        }
    }
    if cells.is_empty() {
        return Err(Error::IncompleteResults(
            "no results for any reference configuration".into(),
        ));
    }

    let mut ranks = Vec::new();
    let mut grades: Vec<(&str, u32, f64)> = cells
        .iter()
        .filter(|c| c.scheme == Scheme::RowMajor && c.phase == Phase::Read)
        .filter_map(|c| Some((c.config.as_str(), data_rate_of(&c.config)?, c.measured_pct)))
        .collect();
    grades.sort_by(|a, b| standard_of(a.0).cmp(standard_of(b.0)).then(a.1.cmp(&b.1)));
    for pair in grades.windows(2) {
        let (slow, fast) = (pair[0], pair[1]);
        if standard_of(slow.0) != standard_of(fast.0) {
            continue;
        }
        ranks.push(RankCheck {
            standard: standard_of(slow.0).to_string(),
            slower: slow.0.to_string(),
            faster: fast.0.to_string(),
            slower_pct: slow.2,
            faster_pct: fast.2,
            passed: fast.2 < slow.2,
        });
    }
    Ok(ComparisonReport {
        tolerance_pp,
        cells,
        ranks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn result(config: &str, scheme: Scheme, phase: Phase, utilization: f64) -> PhaseResult {
        PhaseResult {
            config: config.into(),
            scheme,
            phase,
            bursts: 1,
            elapsed_cycles: 1,
            utilization,
            page_hits: 0,
            page_misses: 1,
            activates: 1,
            refreshes: 0,
        }
    }

    fn full(config: &str, values: [f64; 4]) -> Vec<PhaseResult> {
        let mut v = Vec::new();
        let mut k = 0;
        for scheme in Scheme::ALL {
            for phase in Phase::ALL {
                v.push(result(config, scheme, phase, values[k]));
                k += 1;
            }
        }
        v
    }

    #[test]
    fn cell_tolerance() {
        let rows = full("DDR4-3200", [0.9, 0.50, 0.9, 0.9]);
        let rep = compare_to_reference(&rows, &ReferenceTable::published(), 15.0).unwrap();
        let rm_read = rep
            .cells
            .iter()
            .find(|c| c.scheme == Scheme::RowMajor && c.phase == Phase::Read)
            .unwrap();
        assert!((rm_read.diff_pp - 6.5).abs() < 1e-9);
        assert!(rm_read.passed);
        assert!(rep.passed());
        let strict = compare_to_reference(&rows, &ReferenceTable::published(), 5.0).unwrap();
        assert!(!strict.passed());
    }

    #[test]
    fn rank_order() {
        let mut rows = full("DDR3-800", [0.96, 0.96, 0.96, 0.96]);
        rows.extend(full("DDR3-1600", [0.96, 0.64, 0.96, 0.96]));
        let rep = compare_to_reference(&rows, &ReferenceTable::published(), 15.0).unwrap();
        assert_eq!(rep.ranks.len(), 1);
        assert_eq!(
            (rep.ranks[0].slower.as_str(), rep.ranks[0].faster.as_str()),
            ("DDR3-800", "DDR3-1600")
        );
        assert!(rep.ranks[0].passed);

        let mut flipped = full("DDR3-800", [0.96, 0.60, 0.96, 0.96]);
        flipped.extend(full("DDR3-1600", [0.96, 0.64, 0.96, 0.96]));
        let rep = compare_to_reference(&flipped, &ReferenceTable::published(), 15.0).unwrap();
        assert!(!rep.ranks[0].passed);
        assert!(!rep.passed());
    }

    #[test]
    fn incomplete_inputs() {
        let t = ReferenceTable::published();
        assert!(matches!(
            compare_to_reference(&[], &t, 15.0),
            Err(Error::IncompleteResults(_))
        ));
        let mut rows = full("DDR4-1600", [0.9; 4]);
        rows.pop();
        assert!(matches!(
            compare_to_reference(&rows, &t, 15.0),
            Err(Error::IncompleteResults(_))
        ));
        let custom = full("my-device", [0.9; 4]);
        assert!(matches!(
            compare_to_reference(&custom, &t, 15.0),
            Err(Error::IncompleteResults(_))
        ));
    }
}
