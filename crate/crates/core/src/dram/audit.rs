//! Independent replay of a command stream against the device timings.
//!
//! The checker shares no state or code with the scheduler. It keeps its own
//! per-bank row state and the time of the latest command of each kind, and
//! reports every rule a command breaks.

use std::collections::VecDeque;
use std::fmt;

use crate::dram::command::{Command, CommandKind, CommandSink};
use crate::dram::config::DeviceConfig;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    /// Position of the offending command in the stream.
    pub position: u64,
    pub command: Command,
    pub rule: &'static str,
    /// Earliest cycle at which the rule would have been met, if it is a spacing rule.
    pub earliest: Option<u64>,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = &self.command;
        write!(
            f,
            "#{} {} bank {} at cycle {}: {}",
            self.position, c.kind, c.bank, c.cycle, self.rule
        )?;
        if let Some(e) = self.earliest {
            write!(f, " (earliest {e})")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default)]
struct BankTrack {
    open: Option<u32>,
    act: Option<u64>,
    pre: Option<u64>,
    rd: Option<u64>,
    wr: Option<u64>,
}

#[derive(Debug, Clone)]
pub struct TimingAuditor {
    cfg: DeviceConfig,
    banks: Vec<BankTrack>,
    acts: VecDeque<u64>,
    act_group: Vec<Option<u64>>,
    rd_group: Vec<Option<u64>>,
    wr_group: Vec<Option<u64>>,
    last_act: Option<u64>,
    last_rd: Option<u64>,
    last_wr: Option<u64>,
    last_ref: Option<u64>,
    last_cycle: Option<u64>,
    data_end: u64,
    position: u64,
    violations: Vec<Violation>,
}

impl TimingAuditor {
    pub fn new(cfg: &DeviceConfig) -> Self {
        let groups = cfg.topology.bank_groups as usize;
        TimingAuditor {
            cfg: cfg.clone(),
            banks: vec![BankTrack::default(); cfg.topology.banks() as usize],
            acts: VecDeque::new(),
            act_group: vec![None; groups],
            rd_group: vec![None; groups],
            wr_group: vec![None; groups],
            last_act: None,
            last_rd: None,
            last_wr: None,
            last_ref: None,
            last_cycle: None,
            data_end: 0,
            position: 0,
            violations: Vec::new(),
        }
    }

    pub fn commands_checked(&self) -> u64 {
        self.position
    }

    pub fn violations(&self) -> &[Violation] {
        &self.violations
    }

    pub fn into_violations(self) -> Vec<Violation> {
        self.violations
    }

    fn flag(&mut self, cmd: &Command, rule: &'static str, earliest: Option<u64>) {
        self.violations.push(Violation {
            position: self.position,
            command: *cmd,
            rule,
            earliest,
        });
    }

    /// Flags `rule` unless `cmd` comes at least `gap` cycles after `since`.
    fn spacing(&mut self, cmd: &Command, since: Option<u64>, gap: u32, rule: &'static str) {
        if let Some(t) = since {
            let earliest = t + u64::from(gap);
            if cmd.cycle < earliest {
                self.flag(cmd, rule, Some(earliest));
            }
        }
    }

    pub fn check(&mut self, cmd: &Command) {
        let t = self.cfg.timings;
        let burst = self.cfg.burst_cycles;
        let banks = self.banks.len();

        if let Some(prev) = self.last_cycle {
            if cmd.cycle <= prev {
                self.flag(cmd, "one command per cycle, in time order", Some(prev + 1));
            }
        }
        self.last_cycle = Some(cmd.cycle);

        if cmd.kind != CommandKind::Refresh && cmd.bank as usize >= banks {
            self.flag(cmd, "bank out of range", None);
            self.position += 1;
            return;
        }
        let b = cmd.bank as usize;
        let g = (cmd.bank % self.cfg.topology.bank_groups) as usize;
        let wr_to_rd = t.CWL + burst;

        match cmd.kind {
            CommandKind::Activate => {
                let bank = self.banks[b].clone();
                if bank.open.is_some() {
                    self.flag(cmd, "ACT to an open bank", None);
                }
                if cmd.row >= self.cfg.topology.rows {
                    self.flag(cmd, "row out of range", None);
                }
                self.spacing(cmd, bank.act, t.tRC, "tRC");
                self.spacing(cmd, bank.pre, t.tRP, "tRP");
                self.spacing(cmd, self.last_ref, t.tRFC, "tRFC");
                self.spacing(cmd, self.last_act, t.tRRD_S, "tRRD_S");
                self.spacing(cmd, self.act_group[g], t.tRRD_L, "tRRD_L");
                if self.acts.len() == 4 {
                    self.spacing(cmd, Some(self.acts[0]), t.tFAW, "tFAW");
                    self.acts.pop_front();
                }
                self.acts.push_back(cmd.cycle);
                self.last_act = Some(cmd.cycle);
                self.act_group[g] = Some(cmd.cycle);
                let bank = &mut self.banks[b];
                bank.open = Some(cmd.row);
                bank.act = Some(cmd.cycle);
            }
            CommandKind::Precharge => {
                let bank = self.banks[b].clone();
                if bank.open.is_none() {
                    self.flag(cmd, "PRE to a closed bank", None);
                }
                self.spacing(cmd, bank.act, t.tRAS, "tRAS");
                self.spacing(cmd, bank.rd, t.tRTP, "tRTP");
                self.spacing(cmd, bank.wr, t.CWL + burst + t.tWR, "tWR");
                let bank = &mut self.banks[b];
                bank.open = None;
                bank.pre = Some(cmd.cycle);
            }
            CommandKind::Read | CommandKind::Write => {
                let bank = self.banks[b].clone();
                match bank.open {
                    None => self.flag(cmd, "column command to a closed bank", None),
                    Some(r) if r != cmd.row => {
                        self.flag(cmd, "column command to a row that is not open", None)
                    }
                    _ => {}
                }
                if cmd.column >= self.cfg.topology.bursts_per_page {
                    self.flag(cmd, "column out of range", None);
                }
                self.spacing(cmd, bank.act, t.tRCD, "tRCD");
                let last_col = self.last_rd.max(self.last_wr);
                let group_col = self.rd_group[g].max(self.wr_group[g]);
                self.spacing(cmd, last_col, t.tCCD_S, "tCCD_S");
                self.spacing(cmd, group_col, t.tCCD_L, "tCCD_L");
                let read = cmd.kind == CommandKind::Read;
                if read {
                    self.spacing(cmd, self.last_wr, wr_to_rd + t.tWTR_S, "tWTR_S");
                    self.spacing(cmd, self.wr_group[g], wr_to_rd + t.tWTR_L, "tWTR_L");
                } else {
                    self.spacing(cmd, self.last_rd, t.tRTW, "tRTW");
                }
                let start = cmd.cycle + u64::from(if read { t.CL } else { t.CWL });
                if start < self.data_end {
                    self.flag(
                        cmd,
                        "data bus overlap",
                        Some(cmd.cycle + self.data_end - start),
                    );
                }
                self.data_end = self.data_end.max(start + u64::from(burst));
                let bank = &mut self.banks[b];
                if read {
                    bank.rd = Some(cmd.cycle);
                    self.last_rd = Some(cmd.cycle);
                    self.rd_group[g] = Some(cmd.cycle);
                } else {
                    bank.wr = Some(cmd.cycle);
                    self.last_wr = Some(cmd.cycle);
                    self.wr_group[g] = Some(cmd.cycle);
                }
            }
            CommandKind::Refresh => {
                if self.banks.iter().any(|k| k.open.is_some()) {
                    self.flag(cmd, "REF with an open bank", None);
                }
                let tracks = self.banks.clone();
                for k in &tracks {
                    self.spacing(cmd, k.pre, t.tRP, "tRP before REF");
                    self.spacing(cmd, k.act, t.tRC, "tRC before REF");
                }
                self.spacing(cmd, self.last_ref, t.tRFC, "tRFC");
                self.last_ref = Some(cmd.cycle);
            }
        }
        self.position += 1;
    }
}

impl CommandSink for TimingAuditor {
    fn record(&mut self, cmd: &Command) {
        self.check(cmd);
    }
}

/// Replays `commands` and returns every violation found.
pub fn audit_commands<'a, I>(commands: I, cfg: &DeviceConfig) -> Vec<Violation>
where
    I: IntoIterator<Item = &'a Command>,
{
    let mut auditor = TimingAuditor::new(cfg);
    for c in commands {
        auditor.check(c);
    }
    auditor.into_violations()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dram::config::load_preset;

    fn cmd(cycle: u64, kind: CommandKind, bank: u32, row: u32) -> Command {
        Command {
            cycle,
            kind,
            bank,
            row,
            column: 0,
        }
    }

    fn rules(v: &[Violation]) -> Vec<&'static str> {
        v.iter().map(|v| v.rule).collect()
    }

    #[test]
    fn legal_sequence_passes() {
        let cfg = load_preset("DDR4-3200").unwrap();
        let t = cfg.timings;
        let act = 0;
        let rd = act + u64::from(t.tRCD);
        let pre = (act + u64::from(t.tRAS)).max(rd + u64::from(t.tRTP));
        let act2 = (pre + u64::from(t.tRP)).max(act + u64::from(t.tRC));
        let seq = [
            cmd(act, CommandKind::Activate, 0, 5),
            cmd(rd, CommandKind::Read, 0, 5),
            cmd(pre, CommandKind::Precharge, 0, 5),
            cmd(act2, CommandKind::Activate, 0, 6),
        ];
        assert!(audit_commands(&seq, &cfg).is_empty());
    }

    #[test]
    fn catches_early_and_illegal_commands() {
        let cfg = load_preset("DDR4-3200").unwrap();
        let seq = [
            cmd(0, CommandKind::Activate, 0, 5),
            cmd(1, CommandKind::Activate, 4, 1),
            cmd(3, CommandKind::Read, 0, 5),
            cmd(4, CommandKind::Read, 1, 0),
            cmd(4, CommandKind::Precharge, 0, 5),
        ];
        let found = rules(&audit_commands(&seq, &cfg));
        assert!(found.contains(&"tRRD_L"));
        assert!(found.contains(&"tRCD"));
        assert!(found.contains(&"column command to a closed bank"));
        assert!(found.contains(&"one command per cycle, in time order"));
        assert!(found.contains(&"tRAS"));
    }

    #[test]
    fn four_activate_window() {
        let cfg = load_preset("DDR4-3200").unwrap();
        let t = cfg.timings;
        let step = u64::from(t.tRRD_S);
        let seq: Vec<_> = (0..5u32)
            .map(|k| cmd(u64::from(k) * step, CommandKind::Activate, k, 0))
            .collect();
        let v = audit_commands(&seq, &cfg);
        assert_eq!(rules(&v), vec!["tFAW"]);
        assert_eq!(v[0].earliest, Some(u64::from(t.tFAW)));
    }

    #[test]
    fn refresh_rules() {
        let cfg = load_preset("DDR3-800").unwrap();
        let t = cfg.timings;
        let seq = [
            cmd(0, CommandKind::Activate, 2, 0),
            cmd(u64::from(t.tRAS), CommandKind::Refresh, 0, 0),
            cmd(u64::from(t.tRAS) + 1, CommandKind::Activate, 3, 0),
        ];
        let found = rules(&audit_commands(&seq, &cfg));
        assert!(found.contains(&"REF with an open bank"));
        assert!(found.contains(&"tRFC"));
    }
}
