use evsite_core::scenario::{generate, generate_to, golden_hash, ScenarioConfig};

const SEED_42_HASH: &str = "4094ce33840ba15091f3cf3806ba51152c03dfa8736423ad5f748ffc1a43ac6f";

#[test]
fn seed_42_golden_hash() {
    let dir = tempfile::tempdir().unwrap();
    let hash = generate_to(&ScenarioConfig::default(), dir.path()).unwrap();
    assert_eq!(hash, SEED_42_HASH);
    assert_eq!(golden_hash(dir.path()).unwrap(), SEED_42_HASH);
}

#[test]
fn same_seed_same_bundle_and_different_seed_differs() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let c = tempfile::tempdir().unwrap();
    let cfg = ScenarioConfig {
        seed: 7,
        ..ScenarioConfig::default()
    };
    let ha = generate_to(&cfg, a.path()).unwrap();
    assert_eq!(ha, generate_to(&cfg, b.path()).unwrap());
    assert_ne!(ha, generate_to(&ScenarioConfig { seed: 8, ..cfg }, c.path()).unwrap());
}

#[test]
fn hash_ignores_run_report() {
    let dir = tempfile::tempdir().unwrap();
    let h = generate_to(&ScenarioConfig::default(), dir.path()).unwrap();
    std::fs::write(dir.path().join("run_report.json"), "{}").unwrap();
    assert_eq!(golden_hash(dir.path()).unwrap(), h);
    std::fs::write(dir.path().join("extra.txt"), "x").unwrap();
    assert_ne!(golden_hash(dir.path()).unwrap(), h);
}

#[test]
fn attributes_stay_in_range() {
    let cfg = ScenarioConfig::default();
    let b = generate(&cfg).unwrap();
    assert_eq!(b.attributes.len(), cfg.zone_grid * cfg.zone_grid);
    assert_eq!(b.evcs.len(), cfg.n_evcs);
    assert_eq!(b.parking.len(), cfg.n_parking);
    for zone in b.attributes.zone_ids() {
        for col in evsite_core::transforms::columns::FRACTIONS {
            let v = b.attributes.get(zone, col).unwrap();
            assert!((0.0..=1.0).contains(&v), "{col} = {v}");
        }
    }
    assert!(generate(&ScenarioConfig { width: 0, ..cfg }).is_err());
}
