use crate::dram::config::DeviceConfig;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PhaseStats {
    pub bursts: u64,
    /// From cycle 0 to the end of the last data transfer (or refresh).
    pub elapsed_cycles: u64,
    pub data_cycles: u64,
    pub page_hits: u64,
    /// Requests that needed an activation before their column command.
    pub page_misses: u64,
    pub activates: u64,
    pub precharges: u64,
    pub refreshes: u64,
}

impl PhaseStats {
    pub fn utilization(&self) -> Result<f64> {
        utilization(self)
    }
}

/// Fraction of elapsed cycles during which the data bus carried a burst.
pub fn utilization(stats: &PhaseStats) -> Result<f64> {
    if stats.elapsed_cycles == 0 {
        return Err(Error::UndefinedUtilization);
    }
    Ok(stats.data_cycles as f64 / stats.elapsed_cycles as f64)
}

/// Lower bound on the cycles needed for `bursts` bursts: back-to-back data,
/// plus one `tRFC` for every full refresh interval that pure transfer spans.
pub fn ideal_phase_cycles(bursts: u64, cfg: &DeviceConfig, refresh: bool) -> u64 {
    let data = bursts * u64::from(cfg.burst_cycles);
    if !refresh {
        return data;
    }
    let t = &cfg.timings;
    data + data / u64::from(t.tREFI) * u64::from(t.tRFC)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dram::config::load_preset;

    #[test]
    fn ideal_cycles() {
        let mut cfg = load_preset("DDR4-3200").unwrap();
        assert_eq!(ideal_phase_cycles(0, &cfg, true), 0);
        assert_eq!(ideal_phase_cycles(1000, &cfg, false), 4000);
        cfg.timings.tRFC = 40;
        cfg.timings.tREFI = 4000;
        assert_eq!(ideal_phase_cycles(1000, &cfg, true), 4040);
        assert_eq!(ideal_phase_cycles(100_000, &cfg, true), 404_000);
    }

    #[test]
    fn undefined_utilization() {
        assert!(matches!(
            PhaseStats::default().utilization(),
            Err(Error::UndefinedUtilization)
        ));
        let s = PhaseStats {
            bursts: 10,
            data_cycles: 40,
            elapsed_cycles: 50,
            ..Default::default()
        };
        assert!((s.utilization().unwrap() - 0.8).abs() < 1e-12);
    }
}
