use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::dram::PRESET_NAMES;
use crate::error::{Error, Result};
use crate::experiment::compare::ComparisonReport;
use crate::experiment::run::{summarize, PhaseResult, ResultSet, RowSummary};
use crate::mapping::{Phase, Scheme};

pub const CSV_HEADER: [&str; 10] = [
    "config",
    "scheme",
    "phase",
    "bursts",
    "elapsed_cycles",
    "utilization",
    "page_hits",
    "page_misses",
    "activates",
    "refreshes",
];

pub fn write_results_csv<W: Write>(rows: &[PhaseResult], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_results_csv<R: std::io::Read>(input: R) -> Result<Vec<PhaseResult>> {
    let mut r = csv::Reader::from_reader(input);
    let header = r
        .headers()
        .map_err(|e| Error::MalformedResults(e.to_string()))?;
    if header.iter().ne(CSV_HEADER) {
        return Err(Error::MalformedResults(format!(
            "unexpected header `{}`",
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    r.deserialize()
        .map(|row| row.map_err(|e| Error::MalformedResults(e.to_string())))
        .collect()
}

pub fn load_results(path: &Path) -> Result<Vec<PhaseResult>> {
    read_results_csv(std::fs::File::open(path)?)
}

fn table_position(config: &str) -> usize {
    PRESET_NAMES
        .iter()
        .position(|n| *n == config)
        .unwrap_or(PRESET_NAMES.len())
}

/// Plain-text utilization table, one row per configuration in the standard
/// preset order. In each scheme the lower of the two phases is starred.
pub fn format_table(results: &ResultSet) -> String {
    let mut summaries: Vec<RowSummary<'_>> = summarize(&results.rows);
    summaries.sort_by_key(|s| table_position(s.config));
    let mut configs: Vec<&str> = Vec::new();
    for s in &summaries {
        if !configs.contains(&s.config) {
            configs.push(s.config);
        }
    }

    let mut out = String::new();
    let refresh = if results.refresh { "on" } else { "off" };
    let _ = writeln!(
        out,
        "Bandwidth utilization, N = {}, refresh {refresh}, lookahead {}",
        results.side, results.lookahead
    );
    let _ = writeln!(out);
    let _ = writeln!(out, "{:<14} {:^20} {:^20}", "", "Row-major", "Optimized");
    let _ = write!(out, "{:<14}", "Configuration");
    for _ in Scheme::ALL {
        let _ = write!(out, "  {:>8}  {:>8} ", "write", "read");
    }
    out.push('\n');
    for config in configs {
        let _ = write!(out, "{config:<14}");
        for scheme in Scheme::ALL {
            out.push(' ');
            match summaries
                .iter()
                .find(|s| s.config == config && s.scheme == scheme)
            {
                Some(s) => {
                    for phase in Phase::ALL {
                        let v = if phase == Phase::Write {
                            s.write
                        } else {
                            s.read
                        };
                        let mark = if s.limiting_phase() == phase {
                            '*'
                        } else {
                            ' '
                        };
                        let _ = write!(out, " {:>7.2}%{mark}", 100.0 * v);
                    }
                }
                None => {
                    let _ = write!(out, " {:>9} {:>9}", "-", "-");
                }
            }
        }
        out.push('\n');
    }
    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "* lower phase of the mapping; it bounds sustained interleaver throughput"
    );
    out.lines().map(|l| format!("{}\n", l.trim_end())).collect()
}

/// Renders a comparison as a plain-text listing.
pub fn format_comparison(report: &ComparisonReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "tolerance {:.2} pp", report.tolerance_pp);
    for c in &report.cells {
        let _ = writeln!(
            out,
            "{} {:<12} {:<9} {:<5} measured {:>6.2}%  reference {:>6.2}%  diff {:>5.2} pp",
            if c.passed { "PASS" } else { "FAIL" },
            c.config,
            c.scheme,
            c.phase,
            c.measured_pct,
            c.reference_pct,
            c.diff_pp
        );
    }
    for r in &report.ranks {
        let _ = writeln!(
            out,
            "{} rank {:<6} row-major read {} {:.2}% < {} {:.2}%",
            if r.passed { "PASS" } else { "FAIL" },
            r.standard,
            r.faster,
            r.faster_pct,
            r.slower,
            r.slower_pct
        );
    }
    let _ = writeln!(out, "{} failure(s)", report.failures());
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReportPaths {
    pub csv: PathBuf,
    pub table: PathBuf,
}

/// Writes `results.csv` and `table.txt` into `dir`, creating it if needed.
pub fn emit_reports(results: &ResultSet, dir: &Path) -> Result<ReportPaths> {
    if results.rows.is_empty() {
        return Err(Error::IncompleteResults("nothing to report".into()));
    }
    std::fs::create_dir_all(dir)?;
    let paths = ReportPaths {
        csv: dir.join("results.csv"),
        table: dir.join("table.txt"),
    };
    write_results_csv(
        &results.rows,
        std::io::BufWriter::new(std::fs::File::create(&paths.csv)?),
    )?;
    std::fs::write(&paths.table, format_table(results))?;
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rows() -> Vec<PhaseResult> {
        let mut v = Vec::new();
        for config in ["DDR4-3200", "DDR3-800"] {
            for scheme in Scheme::ALL {
                for phase in Phase::ALL {
                    let utilization = if phase == Phase::Read && scheme == Scheme::RowMajor {
                        0.5
                    } else {
                        0.9
                    };
                    v.push(PhaseResult {
                        config: config.into(),
                        scheme,
                        phase,
                        bursts: 100,
                        elapsed_cycles: 400,
                        utilization,
                        page_hits: 90,
                        page_misses: 10,
                        activates: 10,
                        refreshes: 0,
                    });
                }
            }
        }
        v
    }

    fn set(rows: Vec<PhaseResult>) -> ResultSet {
        ResultSet {
            side: 64,
            refresh: true,
            lookahead: 16,
            rows,
            audits: vec![],
            wall_time: vec![],
        }
    }

    #[test]
    fn csv_round_trip() {
        let rows = rows();
        let mut buf = Vec::new();
        write_results_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text.lines().next().unwrap(), CSV_HEADER.join(","));
        assert_eq!(text.lines().count(), 9);
        assert!(text.contains("DDR4-3200,row_major,read,100,400,0.5,90,10,10,0"));
        assert_eq!(read_results_csv(buf.as_slice()).unwrap(), rows);
    }

    #[test]
    fn malformed_csv() {
        let bad = "config,scheme\nDDR3-800,optimized\n";
        assert!(matches!(
            read_results_csv(bad.as_bytes()),
            Err(Error::MalformedResults(_))
        ));
        let mut buf = Vec::new();
        write_results_csv(&rows()[..1], &mut buf).unwrap();
        let text = String::from_utf8(buf)
            .unwrap()
            .replace("row_major", "diagonal");
        assert!(matches!(
            read_results_csv(text.as_bytes()),
            Err(Error::MalformedResults(_))
        ));
    }

    #[test]
    fn table_follows_preset_order() {
        let table = format_table(&set(rows()));
        let ddr3 = table.find("DDR3-800").unwrap();
        let ddr4 = table.find("DDR4-3200").unwrap();
        assert!(ddr3 < ddr4);
        let line = table.lines().find(|l| l.starts_with("DDR4-3200")).unwrap();
        assert_eq!(line.matches('*').count(), 2);
        assert!(line.contains("50.00%*"));
    }

    #[test]
    fn reports_on_disk() {
        let dir = tempfile::tempdir().unwrap();
        let paths = emit_reports(&set(rows()), &dir.path().join("out")).unwrap();
        assert_eq!(load_results(&paths.csv).unwrap().len(), 8);
        assert!(std::fs::read_to_string(&paths.table)
            .unwrap()
            .contains("Optimized"));
        assert!(matches!(
            emit_reports(&set(vec![]), dir.path()),
            Err(Error::IncompleteResults(_))
        ));
    }
}
