//! Cycle-level model of one DRAM channel serving a single-direction stream.
//!
//! The controller keeps an open-page policy and sees the first `lookahead`
//! unserved requests of the stream. Requests to the same bank are served in
//! order; across banks the oldest request whose next command is legal goes
//! first, with column commands ahead of activates and precharges. At most
//! one command is issued per cycle. With refresh enabled an all-bank refresh
//! becomes due every `tREFI`; the controller then stops issuing new work,
//! closes all banks and refreshes.

use std::collections::VecDeque;

use crate::dram::command::{Command, CommandKind, CommandSink, NullSink};
use crate::dram::config::DeviceConfig;
use crate::dram::stats::PhaseStats;
use crate::error::{Error, Result};
use crate::mapping::{DramAddress, Phase};

pub const DEFAULT_LOOKAHEAD: usize = 128;

/// Which ready column command may issue.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum DataOrder {
    /// The oldest ready request on any bank.
    #[default]
    BankReorder,
    /// Only the oldest unserved request; ACT and PRE may still run ahead.
    Strict,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimOptions {
    pub phase: Phase,
    /// Requests visible to the scheduler; values below 1 behave as 1.
    pub lookahead: usize,
    pub refresh: bool,
    pub order: DataOrder,
}

impl SimOptions {
    pub fn new(phase: Phase) -> Self {
        SimOptions {
            phase,
            lookahead: DEFAULT_LOOKAHEAD,
            refresh: true,
            order: DataOrder::default(),
        }
    }

    pub fn order(mut self, order: DataOrder) -> Self {
        self.order = order;
        self
    }

    pub fn lookahead(mut self, lookahead: usize) -> Self {
        self.lookahead = lookahead;
        self
    }

    pub fn refresh(mut self, refresh: bool) -> Self {
        self.refresh = refresh;
        self
    }
}

pub fn simulate_phase<I>(addresses: I, cfg: &DeviceConfig, opts: &SimOptions) -> Result<PhaseStats>
where
    I: IntoIterator<Item = DramAddress>,
{
    simulate_phase_with(addresses, cfg, opts, &mut NullSink)
}

/// Like [`simulate_phase`], handing every issued command to `sink`.
pub fn simulate_phase_with<I, S>(
    addresses: I,
    cfg: &DeviceConfig,
    opts: &SimOptions,
    sink: &mut S,
) -> Result<PhaseStats>
where
    I: IntoIterator<Item = DramAddress>,
    S: CommandSink + ?Sized,
{
    let mut sim = Sim::new(cfg, opts);
    let mut source = addresses.into_iter().enumerate();
    let lookahead = opts.lookahead.max(1);
    let mut exhausted = false;

    loop {
        while !exhausted && sim.in_window < lookahead {
            match source.next() {
                Some((index, addr)) => sim.push(index as u64, addr)?,
                None => exhausted = true,
            }
        }
        if sim.refresh_enabled && !sim.refresh_pending && sim.now >= sim.refresh_due {
            sim.refresh_pending = true;
        }
        if sim.in_window == 0 && !sim.refresh_pending {
            // A refresh that falls due while the last data is still in
            // flight is carried out before the phase ends.
            if sim.refresh_enabled && sim.refresh_due < sim.last_data_end {
                sim.now = sim.now.max(sim.refresh_due);
                continue;
            }
            break;
        }
        match sim.pick() {
            Pick::Issue(cmd) => {
                sim.issue(&cmd);
                sink.record(&cmd);
            }
            Pick::Wait(t) => sim.now = t,
        }
    }
    Ok(sim.finish())
}

#[derive(Debug, Clone, Copy)]
struct Request {
    index: u64,
    row: u32,
    column: u32,
    activated: bool,
}

#[derive(Debug, Default)]
struct Bank {
    open: Option<u32>,
    act_ready: u64,
    pre_ready: u64,
    col_ready: u64,
    queue: VecDeque<Request>,
}

enum Pick {
    Issue(Command),
    Wait(u64),
}

fn after(t: Option<u64>, delta: u32) -> u64 {
    t.map_or(0, |t| t + u64::from(delta))
}

struct Sim<'a> {
    cfg: &'a DeviceConfig,
    write: bool,
    strict: bool,
    refresh_enabled: bool,
    group_mask: u32,
    latency: u64,
    burst: u64,

    banks: Vec<Bank>,
    in_window: usize,

    now: u64,
    cmd_free: u64,
    last_act: Option<u64>,
    last_act_group: Vec<Option<u64>>,
    faw: VecDeque<u64>,
    last_col: Option<u64>,
    last_col_group: Vec<Option<u64>>,
    bus_free: u64,
    last_data_end: u64,
    refresh_due: u64,
    refresh_pending: bool,
    refresh_end: u64,

    stats: PhaseStats,
}

impl<'a> Sim<'a> {
    fn new(cfg: &'a DeviceConfig, opts: &SimOptions) -> Self {
        let t = &cfg.timings;
        let write = opts.phase == Phase::Write;
        let groups = cfg.topology.bank_groups as usize;
        Sim {
            cfg,
            write,
            strict: opts.order == DataOrder::Strict,
            refresh_enabled: opts.refresh,
            group_mask: cfg.topology.bank_groups - 1,
            latency: u64::from(if write { t.CWL } else { t.CL }),
            burst: u64::from(cfg.burst_cycles),
            banks: (0..cfg.topology.banks()).map(|_| Bank::default()).collect(),
            in_window: 0,
            now: 0,
            cmd_free: 0,
            last_act: None,
            last_act_group: vec![None; groups],
            faw: VecDeque::with_capacity(4),
            last_col: None,
            last_col_group: vec![None; groups],
            bus_free: 0,
            last_data_end: 0,
            refresh_due: u64::from(t.tREFI),
            refresh_pending: false,
            refresh_end: 0,
            stats: PhaseStats::default(),
        }
    }

    fn push(&mut self, index: u64, addr: DramAddress) -> Result<()> {
        if !self.cfg.topology.contains(addr) {
            return Err(Error::SimulationAbort { index, addr });
        }
        self.banks[addr.bank as usize].queue.push_back(Request {
            index,
            row: addr.row,
            column: addr.column,
            activated: false,
        });
        self.in_window += 1;
        Ok(())
    }

    fn group(&self, bank: usize) -> usize {
        (bank as u32 & self.group_mask) as usize
    }

    fn act_earliest(&self, bank: usize) -> u64 {
        let t = &self.cfg.timings;
        let mut e = self.banks[bank].act_ready.max(self.cmd_free);
        e = e.max(after(self.last_act, t.tRRD_S));
        e = e.max(after(self.last_act_group[self.group(bank)], t.tRRD_L));
        if self.faw.len() == 4 {
            e = e.max(self.faw[0] + u64::from(t.tFAW));
        }
        e
    }

    fn col_earliest(&self, bank: usize) -> u64 {
        let t = &self.cfg.timings;
        let mut e = self.banks[bank].col_ready.max(self.cmd_free);
        e = e.max(after(self.last_col, t.tCCD_S));
        e = e.max(after(self.last_col_group[self.group(bank)], t.tCCD_L));
        e.max(self.bus_free.saturating_sub(self.latency))
    }

    fn pre_earliest(&self, bank: usize) -> u64 {
        self.banks[bank].pre_ready.max(self.cmd_free)
    }

    fn pick(&self) -> Pick {
        let now = self.now;
        if self.refresh_pending {
            return self.pick_refresh();
        }
        // (request index, command) of the oldest ready candidate per class.
        let mut col: Option<(u64, Command)> = None;
        let mut row_cmd: Option<(u64, Command)> = None;
        let mut wait = u64::MAX;
        if self.refresh_enabled {
            wait = self.refresh_due;
        }
        let oldest = if self.strict {
            self.banks
                .iter()
                .filter_map(|b| b.queue.front())
                .map(|r| r.index)
                .min()
        } else {
            None
        };
        for (b, bank) in self.banks.iter().enumerate() {
            let Some(head) = bank.queue.front() else {
                continue;
            };
            let (kind, earliest) = match bank.open {
                Some(r) if r == head.row => {
                    if oldest.is_some_and(|o| o != head.index) {
                        continue;
                    }
                    (
                        if self.write {
                            CommandKind::Write
                        } else {
                            CommandKind::Read
                        },
                        self.col_earliest(b),
                    )
                }
                Some(_) => (CommandKind::Precharge, self.pre_earliest(b)),
                None => (CommandKind::Activate, self.act_earliest(b)),
            };
            if earliest > now {
                wait = wait.min(earliest);
                continue;
            }
            let row = match kind {
                CommandKind::Precharge => bank.open.unwrap_or(0),
                _ => head.row,
            };
            let column = if matches!(kind, CommandKind::Read | CommandKind::Write) {
                head.column
            } else {
                0
            };
            let cmd = Command {
                cycle: now,
                kind,
                bank: b as u32,
                row,
                column,
            };
            let slot = if matches!(kind, CommandKind::Read | CommandKind::Write) {
                &mut col
            } else {
                &mut row_cmd
            };
            if slot.is_none_or(|(idx, _)| head.index < idx) {
                *slot = Some((head.index, cmd));
            }
        }
        match col.or(row_cmd) {
            Some((_, cmd)) => Pick::Issue(cmd),
            None => Pick::Wait(wait),
        }
    }

    fn pick_refresh(&self) -> Pick {
        let now = self.now;
        let mut wait = u64::MAX;
        let mut any_open = false;
        for (b, bank) in self.banks.iter().enumerate() {
            let Some(row) = bank.open else { continue };
            any_open = true;
            let e = self.pre_earliest(b);
            if e <= now {
                return Pick::Issue(Command {
                    cycle: now,
                    kind: CommandKind::Precharge,
                    bank: b as u32,
                    row,
                    column: 0,
                });
            }
            wait = wait.min(e);
        }
        if any_open {
            return Pick::Wait(wait);
        }
        let ready = self
            .banks
            .iter()
            .map(|b| b.act_ready)
            .max()
            .unwrap_or(0)
            .max(self.cmd_free)
            .max(self.bus_free);
        if ready <= now {
            Pick::Issue(Command {
                cycle: now,
                kind: CommandKind::Refresh,
                bank: 0,
                row: 0,
                column: 0,
            })
        } else {
            Pick::Wait(ready)
        }
    }

    fn issue(&mut self, cmd: &Command) {
        let t = self.cfg.timings;
        let now = cmd.cycle;
        let b = cmd.bank as usize;
        let g = self.group(b);
        match cmd.kind {
            CommandKind::Activate => {
                let bank = &mut self.banks[b];
                bank.open = Some(cmd.row);
                bank.act_ready = now + u64::from(t.tRC);
                bank.pre_ready = now + u64::from(t.tRAS);
                bank.col_ready = now + u64::from(t.tRCD);
                if let Some(head) = bank.queue.front_mut() {
                    head.activated = true;
                }
                self.last_act = Some(now);
                self.last_act_group[g] = Some(now);
                if self.faw.len() == 4 {
                    self.faw.pop_front();
                }
                self.faw.push_back(now);
                self.stats.activates += 1;
            }
            CommandKind::Precharge => {
                let bank = &mut self.banks[b];
                bank.open = None;
                bank.act_ready = bank.act_ready.max(now + u64::from(t.tRP));
                self.stats.precharges += 1;
            }
            CommandKind::Read | CommandKind::Write => {
                let recovery = if self.write {
                    self.cfg.write_to_precharge()
                } else {
                    t.tRTP
                };
                let bank = &mut self.banks[b];
                bank.pre_ready = bank.pre_ready.max(now + u64::from(recovery));
                let req = bank
                    .queue
                    .pop_front()
                    .expect("column command for a queued request");
                if req.activated {
                    self.stats.page_misses += 1;
                } else {
                    self.stats.page_hits += 1;
                }
                self.in_window -= 1;
                self.last_col = Some(now);
                self.last_col_group[g] = Some(now);
                self.bus_free = now + self.latency + self.burst;
                self.last_data_end = self.bus_free;
                self.stats.bursts += 1;
            }
            CommandKind::Refresh => {
                let ready = now + u64::from(t.tRFC);
                for bank in &mut self.banks {
                    bank.act_ready = bank.act_ready.max(ready);
                }
                self.refresh_end = ready;
                self.refresh_pending = false;
                self.refresh_due += u64::from(t.tREFI);
                self.stats.refreshes += 1;
            }
        }
        self.cmd_free = now + 1;
        self.now = now + 1;
    }

    fn finish(mut self) -> PhaseStats {
        self.stats.elapsed_cycles = self.last_data_end.max(self.refresh_end);
        self.stats.data_cycles = self.stats.bursts * self.burst;
        if self.stats.bursts == 0 {
            self.stats.elapsed_cycles = 0;
        }
        self.stats
    }
}
