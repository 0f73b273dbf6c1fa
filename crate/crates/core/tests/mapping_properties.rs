use std::collections::HashSet;

use proptest::prelude::*;

use tbi_dram::geometry::{Geometry, Position};
use tbi_dram::mapping::{
    build_mapper, map_row_major, storage_overhead, AddressMapper, DramTopology, OptimizedMapping,
    Scheme,
};
use tbi_dram::oracle::{
    bank_step_violations, first_misses_distinct, miss_ratio, phase_misses, verify_bijection,
};

const SIDES: [u32; 4] = [16, 64, 256, 1024];
const SHAPES: [(u32, u32); 4] = [(2, 2), (4, 8), (8, 64), (16, 128)];

fn topology(banks: u32, columns: u32) -> DramTopology {
    DramTopology::new(1, banks, columns, 1 << 20).unwrap()
}

#[test]
fn optimized_mapping_over_the_grid() {
    for n in SIDES {
        for (b, c) in SHAPES {
            let g = Geometry::new(n).unwrap();
            let m = OptimizedMapping::with_defaults(g, topology(b, c)).unwrap();
            let tag = format!("N={n} B={b} C={c}");

            assert!(
                verify_bijection(|p| m.map(p), &g).unwrap().is_empty(),
                "{tag}: collision"
            );
            for p in g.write_stream() {
                assert_eq!(
                    m.unmap(m.map(p).unwrap()).unwrap(),
                    p,
                    "{tag}: round trip at {p:?}"
                );
            }
            assert!(
                bank_step_violations(&m).unwrap().is_empty(),
                "{tag}: bank step"
            );

            let (w, r) = phase_misses(&m).unwrap();
            let ratio = miss_ratio(&w, &r);
            assert!((0.9..=1.1).contains(&ratio), "{tag}: miss ratio {ratio}");
            assert!(
                first_misses_distinct(&w) && first_misses_distinct(&r),
                "{tag}: first misses coincide"
            );
        }
    }
}

#[test]
fn row_major_matches_closed_form() {
    let g = Geometry::new(37).unwrap();
    let t = topology(4, 8);
    for (l, p) in g.write_stream().enumerate() {
        let l = l as u64;
        let a = map_row_major(p, &g, &t).unwrap();
        assert_eq!(u64::from(a.column), l % 8);
        assert_eq!(u64::from(a.bank), (l / 8) % 4);
        assert_eq!(u64::from(a.row), l / 32);
    }
}

#[test]
fn row_major_read_misses_explode() {
    let g = Geometry::new(1024).unwrap();
    let t = topology(16, 128);
    let rm = build_mapper(Scheme::RowMajor, g, t).unwrap();
    let (w, r) = phase_misses(rm.as_ref()).unwrap();
    assert!(
        r.total >= 10 * w.total,
        "write {} read {}",
        w.total,
        r.total
    );
    let opt = build_mapper(Scheme::Optimized, g, t).unwrap();
    let (w, r) = phase_misses(opt.as_ref()).unwrap();
    assert!((0.9..=1.1).contains(&miss_ratio(&w, &r)));
}

#[test]
fn optimized_storage_stays_close_to_the_triangle() {
    let g = Geometry::new(5000).unwrap();
    let t = DramTopology::new(4, 4, 128, 1 << 16).unwrap();
    let over = storage_overhead(&g, &t, Scheme::Optimized).unwrap();
    assert!((0.0..0.25).contains(&over), "overhead {over}");
    assert!(storage_overhead(&g, &t, Scheme::RowMajor).unwrap() < over + 1e-9);
}

#[test]
fn out_of_triangle_positions_are_rejected() {
    let g = Geometry::new(10).unwrap();
    let m = build_mapper(Scheme::Optimized, g, topology(4, 8)).unwrap();
    assert!(m.map(Position::new(5, 5)).is_err());
    assert!(m.map(Position::new(10, 0)).is_err());
    assert!(m.map(Position::new(9, 0)).is_ok());
}

/// Topologies whose page holds at least as many bursts as there are banks.
fn arb_topology() -> impl Strategy<Value = DramTopology> {
    (0u32..3, 0u32..4, 0u32..4).prop_map(|(g, b, extra)| {
        DramTopology::new(1 << g, 1 << b, 1 << (g + b + extra), 1 << 22).unwrap()
    })
}

#[test]
fn pages_smaller_than_the_bank_count_are_unsupported() {
    let g = Geometry::new(32).unwrap();
    let t = DramTopology::new(2, 4, 4, 1 << 16).unwrap();
    assert!(matches!(
        build_mapper(Scheme::Optimized, g, t),
        Err(tbi_dram::Error::UnsupportedTopology(_))
    ));
    assert!(build_mapper(Scheme::RowMajor, g, t).is_ok());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn both_mappings_are_injective(n in 1u32..160, t in arb_topology()) {
        let g = Geometry::new(n).unwrap();
        for scheme in Scheme::ALL {
            let m = build_mapper(scheme, g, t).unwrap();
            let mut seen = HashSet::new();
            for p in g.write_stream() {
                let a = m.map(p).unwrap();
                prop_assert!(t.contains(a), "{scheme}: {a:?} outside {t:?}");
                prop_assert!(seen.insert(a), "{scheme}: {a:?} reused");
            }
            prop_assert_eq!(seen.len() as u64, g.total());
        }
    }

    #[test]
    fn optimized_round_trips_and_steps(n in 1u32..160, t in arb_topology()) {
        let g = Geometry::new(n).unwrap();
        let m = OptimizedMapping::with_defaults(g, t).unwrap();
        for p in g.read_stream() {
            prop_assert_eq!(m.unmap(m.map(p).unwrap()).unwrap(), p);
        }
        prop_assert!(bank_step_violations(&m).unwrap().is_empty());
    }
}
