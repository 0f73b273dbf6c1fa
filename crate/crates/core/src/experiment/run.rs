use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dram::{
    simulate_phase_with, CommandSink, DataOrder, DeviceConfig, NullSink, PhaseStats, SimOptions,
    TimingAuditor, Violation, DEFAULT_LOOKAHEAD,
};
use crate::error::{Error, Result};
use crate::geometry::Geometry;
use crate::mapping::{build_mapper, AddressMapper, DramAddress, Phase, Scheme};

pub const DEFAULT_SIDE: u32 = 2000;

#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub presets: Vec<DeviceConfig>,
    pub schemes: Vec<Scheme>,
    pub side: u32,
    pub refresh: bool,
    pub lookahead: usize,
    pub order: DataOrder,
    /// Replay every command stream through the timing auditor.
    pub audit: bool,
}

impl ExperimentSpec {
    pub fn new(presets: Vec<DeviceConfig>) -> Self {
        ExperimentSpec {
            presets,
            schemes: Scheme::ALL.to_vec(),
            side: DEFAULT_SIDE,
            refresh: true,
            lookahead: DEFAULT_LOOKAHEAD,
            order: DataOrder::default(),
            audit: false,
        }
    }
}

/// One simulated phase. Field order is the CSV column order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseResult {
    pub config: String,
    pub scheme: Scheme,
    pub phase: Phase,
    pub bursts: u64,
    pub elapsed_cycles: u64,
    pub utilization: f64,
    pub page_hits: u64,
    pub page_misses: u64,
    pub activates: u64,
    pub refreshes: u64,
}

impl PhaseResult {
    fn new(config: &str, scheme: Scheme, phase: Phase, stats: &PhaseStats) -> Result<Self> {
        Ok(PhaseResult {
            config: config.to_string(),
            scheme,
            phase,
            bursts: stats.bursts,
            elapsed_cycles: stats.elapsed_cycles,
            utilization: stats.utilization()?,
            page_hits: stats.page_hits,
            page_misses: stats.page_misses,
            activates: stats.activates,
            refreshes: stats.refreshes,
        })
    }
}

#[derive(Debug, Clone)]
pub struct AuditSummary {
    pub config: String,
    pub scheme: Scheme,
    pub phase: Phase,
    pub commands: u64,
    pub violations: Vec<Violation>,
}

/// Write and read utilization of one configuration under one scheme.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RowSummary<'a> {
    pub config: &'a str,
    pub scheme: Scheme,
    pub write: f64,
    pub read: f64,
}

impl RowSummary<'_> {
    /// The lower of the two phases; it bounds sustained interleaver throughput.
    pub fn minimum(&self) -> f64 {
        self.write.min(self.read)
    }

    pub fn limiting_phase(&self) -> Phase {
        if self.write <= self.read {
            Phase::Write
        } else {
            Phase::Read
        }
    }
}

#[derive(Debug, Clone)]
pub struct ResultSet {
    pub side: u32,
    pub refresh: bool,
    pub lookahead: usize,
    pub rows: Vec<PhaseResult>,
    /// Empty unless the experiment asked for an audit.
    pub audits: Vec<AuditSummary>,
    /// Wall time spent per configuration, summed over its phases.
    pub wall_time: Vec<(String, Duration)>,
}

impl ResultSet {
    pub fn get(&self, config: &str, scheme: Scheme, phase: Phase) -> Option<&PhaseResult> {
        find(&self.rows, config, scheme, phase)
    }

    pub fn summaries(&self) -> Vec<RowSummary<'_>> {
        summarize(&self.rows)
    }

    pub fn violation_count(&self) -> usize {
        self.audits.iter().map(|a| a.violations.len()).sum()
    }
}

pub(crate) fn find<'a>(
    rows: &'a [PhaseResult],
    config: &str,
    scheme: Scheme,
    phase: Phase,
) -> Option<&'a PhaseResult> {
    rows.iter()
        .find(|r| r.config == config && r.scheme == scheme && r.phase == phase)
}

/// Pairs the write and read phases of each (configuration, scheme), in
/// order of first appearance. Incomplete pairs are skipped.
pub fn summarize(rows: &[PhaseResult]) -> Vec<RowSummary<'_>> {
    let mut out: Vec<RowSummary<'_>> = Vec::new();
    for r in rows {
        if out
            .iter()
            .any(|s| s.config == r.config && s.scheme == r.scheme)
        {
            continue;
        }
        let (Some(w), Some(rd)) = (
            find(rows, &r.config, r.scheme, Phase::Write),
            find(rows, &r.config, r.scheme, Phase::Read),
        ) else {
            continue;
        };
        out.push(RowSummary {
            config: &r.config,
            scheme: r.scheme,
            write: w.utilization,
            read: rd.utilization,
        });
    }
    out
}

fn addresses<'a>(
    mapper: &'a dyn AddressMapper,
    g: &Geometry,
    phase: Phase,
) -> Box<dyn Iterator<Item = Result<DramAddress>> + 'a> {
    match phase {
        Phase::Write => Box::new(g.write_stream().map(move |p| mapper.map(p))),
        Phase::Read => Box::new(g.read_stream().map(move |p| mapper.map(p))),
    }
}

struct Job<'a> {
    cfg: &'a DeviceConfig,
    scheme: Scheme,
    phase: Phase,
}

struct JobOutput {
    result: PhaseResult,
    audit: Option<AuditSummary>,
    wall: Duration,
}

/// Simulates one phase of `scheme` on `cfg`, handing every command to `sink`.
pub fn simulate_cell<S>(
    cfg: &DeviceConfig,
    scheme: Scheme,
    side: u32,
    opts: &SimOptions,
    sink: &mut S,
) -> Result<PhaseStats>
where
    S: CommandSink + ?Sized,
{
    let g = Geometry::new(side)?;
    let mapper = build_mapper(scheme, g, cfg.topology)?;
    let stream = addresses(mapper.as_ref(), &g, opts.phase);
    itertools::process_results(stream, |a| simulate_phase_with(a, cfg, opts, sink))?
}

fn run_job(job: &Job<'_>, spec: &ExperimentSpec) -> Result<JobOutput> {
    let start = Instant::now();
    let opts = SimOptions::new(job.phase)
        .lookahead(spec.lookahead)
        .refresh(spec.refresh)
        .order(spec.order);
    let (stats, audit) = if spec.audit {
        let mut auditor = TimingAuditor::new(job.cfg);
        let stats = simulate_cell(job.cfg, job.scheme, spec.side, &opts, &mut auditor)?;
        let summary = AuditSummary {
            config: job.cfg.name.clone(),
            scheme: job.scheme,
            phase: job.phase,
            commands: auditor.commands_checked(),
            violations: auditor.into_violations(),
        };
        (stats, Some(summary))
    } else {
        (
            simulate_cell(job.cfg, job.scheme, spec.side, &opts, &mut NullSink)?,
            None,
        )
    };
    Ok(JobOutput {
        result: PhaseResult::new(&job.cfg.name, job.scheme, job.phase, &stats)?,
        audit,
        wall: start.elapsed(),
    })
}

/// Simulates both phases of every (preset, scheme) pair. Cells run in
/// parallel; the result order is presets, then schemes, then write before
/// read, independent of scheduling.
pub fn run_matrix(spec: &ExperimentSpec) -> Result<ResultSet> {
    Geometry::new(spec.side)?;
    if spec.presets.is_empty() || spec.schemes.is_empty() {
        return Err(Error::IncompleteResults(
            "experiment needs at least one preset and one scheme".into(),
        ));
    }
    for cfg in &spec.presets {
        cfg.validate()?;
    }
    let jobs: Vec<Job<'_>> = spec
        .presets
        .iter()
        .flat_map(|cfg| {
            spec.schemes
                .iter()
                .flat_map(move |&scheme| Phase::ALL.map(|phase| Job { cfg, scheme, phase }))
        })
        .collect();
    let outputs: Vec<JobOutput> = jobs
        .par_iter()
        .map(|job| run_job(job, spec))
        .collect::<Result<_>>()?;

    let mut wall_time: Vec<(String, Duration)> = spec
        .presets
        .iter()
        .map(|c| (c.name.clone(), Duration::ZERO))
        .collect();
    for (job, out) in jobs.iter().zip(&outputs) {
        if let Some(slot) = wall_time.iter_mut().find(|(n, _)| *n == job.cfg.name) {
            slot.1 += out.wall;
        }
    }
    let (rows, audits): (Vec<_>, Vec<_>) = outputs.into_iter().map(|o| (o.result, o.audit)).unzip();
    Ok(ResultSet {
        side: spec.side,
        refresh: spec.refresh,
        lookahead: spec.lookahead,
        rows,
        audits: audits.into_iter().flatten().collect(),
        wall_time,
    })
}
