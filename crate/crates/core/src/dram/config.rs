//! Device presets.
//!
//! A preset file is a list of `key = integer` lines. `#` starts a comment.
//! Keys are exactly the field names below; every key must appear once and
//! unknown keys are rejected. All timings are in clock cycles and the clock
//! period is given in picoseconds.

use std::fmt;
use std::path::Path;

use crate::error::{Error, Result};
use crate::mapping::DramTopology;

#[allow(non_snake_case)]
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Timings {
    pub tRCD: u32,
    pub tRP: u32,
    pub tRAS: u32,
    pub tRC: u32,
    pub tCCD_S: u32,
    pub tCCD_L: u32,
    pub tRRD_S: u32,
    pub tRRD_L: u32,
    pub tFAW: u32,
    pub tWR: u32,
    pub tWTR_S: u32,
    pub tWTR_L: u32,
    pub tRTP: u32,
    pub tRTW: u32,
    pub tRFC: u32,
    pub tREFI: u32,
    pub CL: u32,
    pub CWL: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeviceConfig {
    pub name: String,
    pub topology: DramTopology,
    /// Data bus cycles per burst (burst length / 2).
    pub burst_cycles: u32,
    pub timings: Timings,
    pub clock_period_ps: u32,
}

impl DeviceConfig {
    pub fn clock_period_ns(&self) -> f64 {
        f64::from(self.clock_period_ps) / 1000.0
    }

    /// Earliest precharge after a write command to the same bank.
    pub fn write_to_precharge(&self) -> u32 {
        self.timings.CWL + self.burst_cycles + self.timings.tWR
    }

    pub fn validate(&self) -> Result<()> {
        self.topology.validate()?;
        let t = &self.timings;
        let bad = |msg: String| Error::PresetParse {
            line: 0,
            msg: format!("{}: {msg}", self.name),
        };
        if self.burst_cycles == 0 || self.clock_period_ps == 0 {
            return Err(bad(
                "burst_cycles and clock_period_ps must be positive".into()
            ));
        }
        for (key, v) in t.fields() {
            if v == 0 {
                return Err(bad(format!("{key} must be at least 1")));
            }
        }
        if t.tRC != t.tRAS + t.tRP {
            return Err(bad(format!(
                "tRC ({}) must equal tRAS + tRP ({})",
                t.tRC,
                t.tRAS + t.tRP
            )));
        }
        if t.tCCD_L < t.tCCD_S || t.tRRD_L < t.tRRD_S || t.tWTR_L < t.tWTR_S {
            return Err(bad(
                "same-group timings must not be shorter than cross-group ones".into(),
            ));
        }
        Ok(())
    }
}

impl fmt::Display for DeviceConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

impl Timings {
    fn fields(&self) -> [(&'static str, u32); 18] {
        [
            ("tRCD", self.tRCD),
            ("tRP", self.tRP),
            ("tRAS", self.tRAS),
            ("tRC", self.tRC),
            ("tCCD_S", self.tCCD_S),
            ("tCCD_L", self.tCCD_L),
            ("tRRD_S", self.tRRD_S),
            ("tRRD_L", self.tRRD_L),
            ("tFAW", self.tFAW),
            ("tWR", self.tWR),
            ("tWTR_S", self.tWTR_S),
            ("tWTR_L", self.tWTR_L),
            ("tRTP", self.tRTP),
            ("tRTW", self.tRTW),
            ("tRFC", self.tRFC),
            ("tREFI", self.tREFI),
            ("CL", self.CL),
            ("CWL", self.CWL),
        ]
    }

    fn slot(&mut self, key: &str) -> Option<&mut u32> {
        Some(match key {
            "tRCD" => &mut self.tRCD,
            "tRP" => &mut self.tRP,
            "tRAS" => &mut self.tRAS,
            "tRC" => &mut self.tRC,
            "tCCD_S" => &mut self.tCCD_S,
            "tCCD_L" => &mut self.tCCD_L,
            "tRRD_S" => &mut self.tRRD_S,
            "tRRD_L" => &mut self.tRRD_L,
            "tFAW" => &mut self.tFAW,
            "tWR" => &mut self.tWR,
            "tWTR_S" => &mut self.tWTR_S,
            "tWTR_L" => &mut self.tWTR_L,
            "tRTP" => &mut self.tRTP,
            "tRTW" => &mut self.tRTW,
            "tRFC" => &mut self.tRFC,
            "tREFI" => &mut self.tREFI,
            "CL" => &mut self.CL,
            "CWL" => &mut self.CWL,
            _ => return None,
        })
    }
}

const TOPOLOGY_KEYS: [&str; 6] = [
    "bank_groups",
    "banks_per_group",
    "bursts_per_page",
    "rows",
    "burst_cycles",
    "clock_period_ps",
];

/// Parses a preset file body. `name` becomes the configuration name.
pub fn parse_preset(name: &str, text: &str) -> Result<DeviceConfig> {
    let mut timings = Timings::default();
    let mut topo = [0u32; 6];
    let mut seen: Vec<String> = Vec::new();

    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let err = |msg: String| Error::PresetParse { line, msg };
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| err(format!("expected `key = integer`, got `{content}`")))?;
        let key = key.trim();
        let value = value.trim();
        if !value.bytes().all(|b| b.is_ascii_digit()) || value.is_empty() {
            return Err(err(format!(
                "`{key}` needs a decimal integer, got `{value}`"
            )));
        }
        let value: u32 = value
            .parse()
            .map_err(|_| err(format!("`{key}` value out of range")))?;
        if seen.iter().any(|k| k == key) {
            return Err(err(format!("duplicate key `{key}`")));
        }
        if let Some(idx) = TOPOLOGY_KEYS.iter().position(|k| *k == key) {
            topo[idx] = value;
        } else if let Some(slot) = timings.slot(key) {
            *slot = value;
        } else {
            return Err(err(format!("unknown key `{key}`")));
        }
        seen.push(key.to_string());
    }

    let missing: Vec<&str> = TOPOLOGY_KEYS
        .iter()
        .copied()
        .chain(timings.fields().iter().map(|(k, _)| *k))
        .filter(|k| !seen.iter().any(|s| s == k))
        .collect();
    if !missing.is_empty() {
        return Err(Error::PresetParse {
            line: 0,
            msg: format!("missing keys: {}", missing.join(", ")),
        });
    }

    let [bank_groups, banks_per_group, bursts_per_page, rows, burst_cycles, clock_period_ps] = topo;
    let cfg = DeviceConfig {
        name: name.to_string(),
        topology: DramTopology {
            bank_groups,
            banks_per_group,
            bursts_per_page,
            rows,
        },
        burst_cycles,
        timings,
        clock_period_ps,
    };
    cfg.validate()?;
    Ok(cfg)
}

/// Renders a configuration in preset file syntax.
pub fn format_preset(cfg: &DeviceConfig) -> String {
    let mut out = format!("# {}\n", cfg.name);
    let topo = [
        cfg.topology.bank_groups,
        cfg.topology.banks_per_group,
        cfg.topology.bursts_per_page,
        cfg.topology.rows,
        cfg.burst_cycles,
        cfg.clock_period_ps,
    ];
    for (k, v) in TOPOLOGY_KEYS.iter().zip(topo) {
        out.push_str(&format!("{k} = {v}\n"));
    }
    for (k, v) in cfg.timings.fields() {
        out.push_str(&format!("{k} = {v}\n"));
    }
    out
}

pub fn load_preset_file(path: &Path) -> Result<DeviceConfig> {
    let text = std::fs::read_to_string(path)?;
    let name = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("custom");
    parse_preset(name, &text)
}

/// The ten device configurations, slowest grade of each standard first.
pub const PRESET_NAMES: [&str; 10] = [
    "DDR3-800",
    "DDR3-1600",
    "DDR4-1600",
    "DDR4-3200",
    "DDR5-3200",
    "DDR5-6400",
    "LPDDR4-2133",
    "LPDDR4-4266",
    "LPDDR5-4267",
    "LPDDR5-8533",
];

fn preset_text(name: &str) -> Option<&'static str> {
    Some(match name {
        "DDR3-800" => include_str!("../../presets/DDR3-800.cfg"),
        "DDR3-1600" => include_str!("../../presets/DDR3-1600.cfg"),
        "DDR4-1600" => include_str!("../../presets/DDR4-1600.cfg"),
        "DDR4-3200" => include_str!("../../presets/DDR4-3200.cfg"),
        "DDR5-3200" => include_str!("../../presets/DDR5-3200.cfg"),
        "DDR5-6400" => include_str!("../../presets/DDR5-6400.cfg"),
        "LPDDR4-2133" => include_str!("../../presets/LPDDR4-2133.cfg"),
        "LPDDR4-4266" => include_str!("../../presets/LPDDR4-4266.cfg"),
        "LPDDR5-4267" => include_str!("../../presets/LPDDR5-4267.cfg"),
        "LPDDR5-8533" => include_str!("../../presets/LPDDR5-8533.cfg"),
        _ => return None,
    })
}

pub fn load_preset(name: &str) -> Result<DeviceConfig> {
    let text = preset_text(name).ok_or_else(|| Error::UnknownPreset(name.to_string()))?;
    parse_preset(name, text)
}

/// Standard family of a preset name, e.g. `LPDDR4` for `LPDDR4-4266`.
pub fn standard_of(name: &str) -> &str {
    name.split('-').next().unwrap_or(name)
}

/// Data rate of a preset name in MT/s, e.g. `4266` for `LPDDR4-4266`.
pub fn data_rate_of(name: &str) -> Option<u32> {
    name.rsplit('-').next()?.parse().ok()
}
