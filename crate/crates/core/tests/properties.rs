use std::collections::BTreeMap;

use filament_ns::domain_fields::{lp_norm, Grid, ScalarField};
use filament_ns::harness::{emit_report, load_report, AsymptoticsRow, RunLedger};
use filament_ns::selfsim::{perturbation_energies, DEFAULT_CUTOFF};
use proptest::prelude::*;

fn field(grid: Grid, values: &[f64]) -> ScalarField {
    ScalarField::from_values(grid, values.to_vec()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lp_norms_are_absolutely_homogeneous(
        values in proptest::collection::vec(-10.0f64..10.0, 64),
        c in -100.0f64..100.0,
        p in prop_oneof![Just(1.0), Just(2.0), 1.0f64..6.0, Just(f64::INFINITY)],
    ) {
        let g = Grid::new(0.0, 1.0, -1.0, 1.0, 8, 8).unwrap();
        let f = field(g, &values);
        let a = lp_norm(&f.scaled(c), p).unwrap();
        let b = c.abs() * lp_norm(&f, p).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * b.max(1e-300));
    }

    #[test]
    fn energies_obey_the_triangle_inequality(
        a in proptest::collection::vec(-1.0f64..1.0, 256),
        b in proptest::collection::vec(-1.0f64..1.0, 256),
    ) {
        let g = Grid::frame(DEFAULT_CUTOFF, 16).unwrap();
        let (fa, fb) = (field(g, &a), field(g, &b));
        let (ea, ca) = perturbation_energies(&fa, DEFAULT_CUTOFF).unwrap();
        let (eb, cb) = perturbation_energies(&fb, DEFAULT_CUTOFF).unwrap();
        let (ed, cd) = perturbation_energies(&fa.sub(&fb).unwrap(), DEFAULT_CUTOFF).unwrap();
        prop_assert!(ed >= 0.0 && cd >= 0.0);
        prop_assert!(ed.sqrt() <= (ea.sqrt() + eb.sqrt()) * (1.0 + 1e-12));
        prop_assert!(cd.sqrt() <= (ca.sqrt() + cb.sqrt()) * (1.0 + 1e-12));
        prop_assert!(ed.sqrt() <= ((2.0 * ea).sqrt() + (2.0 * eb).sqrt()));
    }

    #[test]
    fn reports_reload_bit_exactly(
        cal in proptest::collection::btree_map("[a-z_]{1,12}", proptest::num::f64::NORMAL, 0..6),
        series in proptest::collection::vec(proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL, 0..20),
        rows in proptest::collection::vec((1e-6f64..1.0, 0usize..4, proptest::num::f64::POSITIVE, proptest::option::of(0.0f64..10.0)), 0..5),
        passed in any::<bool>(),
    ) {
        let mut ledger = RunLedger::new("property", None, "0123abcd".into());
        for (k, v) in &cal {
            ledger.calibrate(k, *v).unwrap();
        }
        for v in &series {
            ledger.push_series("s", *v);
        }
        for (t, i, e, ratio) in &rows {
            ledger.rows.push(AsymptoticsRow {
                t: *t,
                i: *i,
                eps: t.sqrt(),
                e: *e,
                cal_e: 3.0 * e,
                l1_dist: e.sqrt(),
                rate_ratio: *ratio,
            });
        }
        ledger.push_check("flag", passed, "detail");
        ledger.time("total", 1.25);
        let dir = tempfile::tempdir().unwrap();
        emit_report(&ledger, dir.path()).unwrap();
        let back = load_report(&dir.path().join("report.json")).unwrap();
        prop_assert_eq!(&back, &ledger);
        let keys: BTreeMap<_, _> = back.calibration.iter().map(|(k, v)| (k.clone(), v.to_bits())).collect();
        let orig: BTreeMap<_, _> = ledger.calibration.iter().map(|(k, v)| (k.clone(), v.to_bits())).collect();
        prop_assert_eq!(keys, orig);
    }
}
