use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use tbi_dram::dram::config::load_preset_file;
use tbi_dram::dram::{
    load_preset, DataOrder, DeviceConfig, SimOptions, TraceWriter, DEFAULT_LOOKAHEAD, PRESET_NAMES,
};
use tbi_dram::experiment::{
    compare_to_reference, emit_reports, format_comparison, format_table, load_results, run_matrix,
    simulate_cell, verify_mapping, ExperimentSpec, ReferenceTable, DEFAULT_SIDE,
    DEFAULT_TOLERANCE_PP,
};
use tbi_dram::mapping::{Phase, Scheme};

/// Triangular block interleaver DRAM mapping experiments.
#[derive(Parser)]
#[command(name = "tbi-dram", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate write and read phases and write results.csv and table.txt.
    Simulate {
        /// Preset name, `all`, or a path to a preset file.
        #[arg(long, default_value = "all")]
        preset: String,
        #[arg(long, value_enum, default_value_t = SchemeArg::Both)]
        scheme: SchemeArg,
        /// Side length of the triangle in bursts.
        #[arg(long, default_value_t = DEFAULT_SIDE)]
        n: u32,
        #[arg(long, value_enum, default_value_t = Switch::On)]
        refresh: Switch,
        #[arg(long, default_value_t = DEFAULT_LOOKAHEAD)]
        lookahead: usize,
        #[arg(long, value_enum, default_value_t = OrderArg::Reorder)]
        order: OrderArg,
        /// Check every issued command against the device timings.
        #[arg(long)]
        audit: bool,
        #[arg(long, default_value = "results")]
        out: PathBuf,
    },
    /// Run the oracle checks for one preset's topology.
    Verify {
        #[arg(long)]
        preset: String,
        #[arg(long, default_value_t = 1024)]
        n: u32,
    },
    /// Compare a results file with the reference utilizations.
    Compare {
        #[arg(long)]
        results: PathBuf,
        #[arg(long, default_value_t = DEFAULT_TOLERANCE_PP)]
        tolerance_pp: f64,
    },
    /// Write the command trace of one phase as cycle,command,bank,row,column lines.
    Trace {
        #[arg(long)]
        preset: String,
        #[arg(long, value_enum)]
        scheme: SingleScheme,
        #[arg(long, value_enum)]
        phase: PhaseArg,
        #[arg(long, default_value_t = DEFAULT_SIDE)]
        n: u32,
        #[arg(long, value_enum, default_value_t = Switch::On)]
        refresh: Switch,
        #[arg(long, default_value_t = DEFAULT_LOOKAHEAD)]
        lookahead: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    RowMajor,
    Optimized,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum SingleScheme {
    RowMajor,
    Optimized,
}

#[derive(Clone, Copy, ValueEnum)]
enum PhaseArg {
    Write,
    Read,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(Clone, Copy, ValueEnum)]
enum OrderArg {
    /// Serve the oldest ready request on any bank.
    Reorder,
    /// Serve data strictly in stream order.
    Strict,
}

fn resolve_presets(arg: &str) -> Result<Vec<DeviceConfig>> {
    if arg == "all" {
        return PRESET_NAMES
            .iter()
            .map(|n| load_preset(n).map_err(Into::into))
            .collect();
    }
    let path = Path::new(arg);
    if path.extension().is_some_and(|e| e == "cfg") || path.is_file() {
        return Ok(vec![
            load_preset_file(path).with_context(|| format!("loading {}", path.display()))?
        ]);
    }
    arg.split(',')
        .map(|n| load_preset(n.trim()).map_err(Into::into))
        .collect()
}

fn single_preset(arg: &str) -> Result<DeviceConfig> {
    let mut presets = resolve_presets(arg)?;
    if presets.len() != 1 {
        bail!("expected exactly one preset, got `{arg}`");
    }
    Ok(presets.remove(0))
}

fn simulate(spec: &ExperimentSpec, out: &Path) -> Result<bool> {
    let results = run_matrix(spec)?;
    let paths = emit_reports(&results, out)?;
    print!("{}", format_table(&results));
    println!();
    for (config, wall) in &results.wall_time {
        println!("{config:<14} {:>7.2} s", wall.as_secs_f64());
    }
    println!(
        "wrote {} and {}",
        paths.csv.display(),
        paths.table.display()
    );
    if !spec.audit {
        return Ok(true);
    }
    let commands: u64 = results.audits.iter().map(|a| a.commands).sum();
    println!(
        "audit: {} violation(s) in {commands} commands",
        results.violation_count()
    );
    for a in results.audits.iter().filter(|a| !a.violations.is_empty()) {
        println!(
            "  {} {} {}: {}",
            a.config, a.scheme, a.phase, a.violations[0]
        );
    }
    Ok(results.violation_count() == 0)
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Simulate {
            preset,
            scheme,
            n,
            refresh,
            lookahead,
            order,
            audit,
            out,
        } => {
            let mut spec = ExperimentSpec::new(resolve_presets(&preset)?);
            spec.schemes = match scheme {
                SchemeArg::RowMajor => vec![Scheme::RowMajor],
                SchemeArg::Optimized => vec![Scheme::Optimized],
                SchemeArg::Both => Scheme::ALL.to_vec(),
            };
            spec.side = n;
            spec.refresh = refresh == Switch::On;
            spec.lookahead = lookahead;
            spec.order = match order {
                OrderArg::Reorder => DataOrder::BankReorder,
                OrderArg::Strict => DataOrder::Strict,
            };
            spec.audit = audit;
            simulate(&spec, &out)
        }
        Command::Verify { preset, n } => {
            let cfg = single_preset(&preset)?;
            let checks = verify_mapping(cfg.topology, n)?;
            for c in &checks {
                println!(
                    "{} {}: {}",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.detail
                );
            }
            Ok(checks.iter().all(|c| c.passed))
        }
        Command::Compare {
            results,
            tolerance_pp,
        } => {
            let rows =
                load_results(&results).with_context(|| format!("reading {}", results.display()))?;
            let report = compare_to_reference(&rows, &ReferenceTable::published(), tolerance_pp)?;
            print!("{}", format_comparison(&report));
            Ok(report.passed())
        }
        Command::Trace {
            preset,
            scheme,
            phase,
            n,
            refresh,
            lookahead,
            out,
        } => {
            let cfg = single_preset(&preset)?;
            let scheme = match scheme {
                SingleScheme::RowMajor => Scheme::RowMajor,
                SingleScheme::Optimized => Scheme::Optimized,
            };
            let phase = match phase {
                PhaseArg::Write => Phase::Write,
                PhaseArg::Read => Phase::Read,
            };
            let opts = SimOptions::new(phase)
                .lookahead(lookahead)
                .refresh(refresh == Switch::On);
            let file = File::create(&out).with_context(|| format!("creating {}", out.display()))?;
            let mut writer = TraceWriter::new(BufWriter::new(file));
            let stats = simulate_cell(&cfg, scheme, n, &opts, &mut writer)?;
            writer.finish()?;
            println!(
                "{} {} {}: {} bursts, {} cycles, utilization {:.4}",
                cfg.name,
                scheme,
                phase,
                stats.bursts,
                stats.elapsed_cycles,
                stats.utilization()?
            );
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
