use crate::error::Result;
use crate::geometry::Geometry;
use crate::mapping::{AddressMapper, DramTopology, OptimizedMapping, RowMajorMapping};
use crate::oracle::{
    bank_step_violations, first_misses_distinct, miss_ratio, phase_misses, verify_bijection,
    ENUMERATION_LIMIT,
};

/// Accepted spread between read and write misses of the optimized mapping.
pub const BALANCE_TOLERANCE: f64 = 0.10;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// Oracle checks of both mappings for one topology and side length.
pub fn verify_mapping(topology: DramTopology, side: u32) -> Result<Vec<CheckOutcome>> {
    let g = Geometry::new(side)?;
    let opt = OptimizedMapping::with_defaults(g, topology)?;
    let rm = RowMajorMapping::new(g, topology)?;
    let mut out = Vec::new();

    if g.total() <= ENUMERATION_LIMIT {
        for (name, mapper) in [
            ("bijection (optimized)", &opt as &dyn AddressMapper),
            ("bijection (row-major)", &rm),
        ] {
            let collisions = verify_bijection(|p| mapper.map(p), &g)?;
            out.push(CheckOutcome {
                name,
                passed: collisions.is_empty(),
                detail: format!(
                    "{} collision(s) over {} positions",
                    collisions.len(),
                    g.total()
                ),
            });
        }
    } else {
        out.push(CheckOutcome {
            name: "bijection (optimized)",
            passed: true,
            detail: format!(
                "skipped: {} positions exceed the enumeration limit",
                g.total()
            ),
        });
    }

    let mut round_trip_failures = 0u64;
    for p in g.write_stream() {
        if opt.unmap(opt.map(p)?)? != p {
            round_trip_failures += 1;
        }
    }
    out.push(CheckOutcome {
        name: "round trip (optimized)",
        passed: round_trip_failures == 0,
        detail: format!("{round_trip_failures} mismatch(es)"),
    });

    let steps = bank_step_violations(&opt)?;
    out.push(CheckOutcome {
        name: "bank step along rows and columns",
        passed: steps.is_empty(),
        detail: format!("{} violation(s)", steps.len()),
    });

    let (w, r) = phase_misses(&opt)?;
    let ratio = miss_ratio(&w, &r);
    out.push(CheckOutcome {
        name: "read/write miss balance (optimized)",
        passed: (ratio - 1.0).abs() <= BALANCE_TOLERANCE,
        detail: format!(
            "write {} misses, read {} misses, ratio {ratio:.4}",
            w.total, r.total
        ),
    });
    out.push(CheckOutcome {
        name: "distinct first misses (optimized)",
        passed: first_misses_distinct(&w) && first_misses_distinct(&r),
        detail: format!(
            "{} write and {} read banks with a conflict miss",
            w.first_miss.iter().flatten().count(),
            r.first_miss.iter().flatten().count()
        ),
    });

    let (rw, rr) = phase_misses(&rm)?;
    out.push(CheckOutcome {
        name: "row-major contrast",
        passed: miss_ratio(&rw, &rr) > ratio,
        detail: format!(
            "row-major read/write miss ratio {:.2}",
            miss_ratio(&rw, &rr)
        ),
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_topology_passes() {
        let t = DramTopology::new(1, 4, 8, 1 << 16).unwrap();
        let checks = verify_mapping(t, 64).unwrap();
        assert!(checks.iter().all(|c| c.passed), "{checks:?}");
        assert_eq!(checks.len(), 7);
    }
}
