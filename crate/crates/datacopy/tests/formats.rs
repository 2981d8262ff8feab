use proptest::prelude::*;

use datacopy::io::{format_point_set, load_point_set, parse_point_set, save_point_set};
use datacopy::report::{
    emit_report, parse_partition, parse_report, partition_to_json, report_to_json,
};
use datacopy::CliError;
use datacopy_core::copy_detector::ct_test;
use datacopy_core::dataset::generate_moons;
use datacopy_core::partition::{fit_kmeans, DEFAULT_MAX_ITERS};
use datacopy_core::{CopyConfig, CopyReport, PointSet, Role, Seed, Tau};

proptest! {
    #[test]
    fn csv_round_trip_is_exact(
        rows in 1usize..20,
        dim in 1usize..5,
        raw in prop::collection::vec(prop::num::f64::NORMAL | prop::num::f64::ZERO | prop::num::f64::SUBNORMAL, 100),
    ) {
        let data: Vec<f64> = raw.iter().cycle().take(rows * dim).copied().collect();
        let p = PointSet::new(data, dim, Role::Train).unwrap();
        let back = parse_point_set(&format_point_set(&p), Role::Train).unwrap();
        prop_assert_eq!(back.dim(), dim);
        for (a, b) in p.as_slice().iter().zip(back.as_slice()) {
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }
    }
}

#[test]
fn files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.csv");
    let p = generate_moons(101, 0.1, Seed(3)).unwrap();
    save_point_set(&p, &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 101);
    assert!(text.lines().all(|l| l.split(',').count() == 2));
    assert_eq!(load_point_set(&path, Role::Train).unwrap(), p);

    let missing = load_point_set(dir.path().join("nope.csv"), Role::Train).unwrap_err();
    assert!(matches!(missing, CliError::Io { .. }));
    assert_eq!(missing.exit_code(), 2);
}

fn sample_report(tau: Tau) -> CopyReport {
    let train = generate_moons(600, 0.1, Seed(1)).unwrap();
    let test = generate_moons(300, 0.1, Seed(2)).unwrap();
    let gen = generate_moons(300, 0.3, Seed(3)).unwrap();
    let part = fit_kmeans(&train, 6, Seed(4), DEFAULT_MAX_ITERS).unwrap();
    let cfg = CopyConfig {
        tau,
        ..CopyConfig::default()
    };
    ct_test(&train, &test, &gen, &part, &cfg).unwrap()
}

#[test]
fn report_keys_and_order() {
    let text = report_to_json(&sample_report(Tau::Auto)).unwrap();
    let pos = |k: &str| {
        text.find(&format!("\"{k}\""))
            .unwrap_or_else(|| panic!("missing {k}"))
    };
    let top = ["global", "cells", "c_t", "ndb_over", "ndb_under", "params"];
    assert!(top.windows(2).all(|w| pos(w[0]) < pos(w[1])));
    for k in ["u", "rank_sum", "delta_hat", "z_u", "m", "n", "tie_count"] {
        pos(k);
    }
    for k in [
        "cell",
        "train_count",
        "test_count",
        "gen_count",
        "p_frac",
        "q_frac",
        "z_pi",
        "included_in_ct",
        "exclusion_reason",
    ] {
        pos(k);
    }
    for k in ["k", "tau", "min_cell", "significance", "metric", "seed"] {
        pos(k);
    }
    assert!(!text.contains("small_sample"));
}

#[test]
fn report_round_trip() {
    let r = sample_report(Tau::Auto);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    emit_report(&r, &path).unwrap();
    let back = parse_report(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert!((back.c_t - r.c_t).abs() <= 1e-12);
    assert!((back.global.z_u - r.global.z_u).abs() <= 1e-12);
    assert_eq!(back.global.m, r.global.m);
    assert_eq!(back.params.seed, 4);
    assert_eq!(back.params.metric, "squared-euclidean");
    for (a, b) in back.cells.iter().zip(&r.cells) {
        assert!((a.p_frac - b.p_frac).abs() <= 1e-12);
        assert!((a.z_pi - b.z_pi).abs() <= 1e-12);
        match (a.z_u, b.z_u) {
            (Some(x), Some(y)) => assert!((x - y).abs() <= 1e-12),
            (None, None) => {}
            other => panic!("z_u mismatch {other:?}"),
        }
    }
}

#[test]
fn excluded_cells_carry_a_reason() {
    let r = sample_report(Tau::Value(0.16));
    let back = parse_report(&report_to_json(&r).unwrap()).unwrap();
    let excluded: Vec<_> = back.cells.iter().filter(|c| !c.included_in_ct).collect();
    assert!(!excluded.is_empty());
    for c in excluded {
        assert_eq!(c.z_u, None);
        assert_eq!(c.exclusion_reason.as_deref(), Some("below-tau"));
    }
}

#[test]
fn empty_cells_are_refused() {
    let mut r = sample_report(Tau::Auto);
    r.cells.clear();
    assert!(matches!(report_to_json(&r), Err(CliError::Usage(_))));
    let text = r#"{"global":{"u":0,"rank_sum":1,"delta_hat":0,"z_u":0,"m":1,"n":1,"tie_count":0},
        "cells":[],"c_t":0,"ndb_over":0,"ndb_under":0,
        "params":{"k":1,"tau":0,"min_cell":20,"significance":0.05,"metric":"euclidean","seed":0}}"#;
    assert!(parse_report(text).is_err());
}

#[test]
fn partition_round_trip() {
    let train = generate_moons(200, 0.1, Seed(1)).unwrap();
    let part = fit_kmeans(&train, 4, Seed(9), DEFAULT_MAX_ITERS).unwrap();
    let json = partition_to_json(&part).unwrap();
    assert!(json.contains("\"centroids\"") && json.contains("\"seed\": 9"));
    let back = parse_partition(&json).unwrap();
    assert_eq!(back.centroids(), part.centroids());
    assert_eq!(back.assign(&train).unwrap(), part.assign(&train).unwrap());
    assert!(parse_partition(r#"{"k":2,"seed":0,"centroids":[[0.0]]}"#).is_err());
}
