use std::fs;

use digraph_order::report::run_report;
use digraph_order::store::{cmd_build, level_file_name, load_store, read_manifest};
use digraph_order::{Error, PosetStore};

#[test]
fn stored_levels_drive_a_passing_deterministic_report() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = cmd_build(4, dir.path()).unwrap();
    assert_eq!(manifest.counts(), vec![2, 10, 104, 3044]);
    assert_eq!(manifest.total, 3160);
    assert_eq!(read_manifest(dir.path()).unwrap(), manifest);

    let store = load_store(dir.path()).unwrap();
    let first = run_report(&store).unwrap();
    assert!(first.all_pass, "{:?}", first.failing());
    assert!(first.claims.len() >= 14);

    let again = run_report(&load_store(dir.path()).unwrap()).unwrap();
    assert_eq!(
        serde_json::to_string_pretty(&first).unwrap(),
        serde_json::to_string_pretty(&again).unwrap()
    );
    let text = first.transcript();
    for claim in &first.claims {
        assert!(text.contains(&format!("[PASS] {:>2} {}", claim.id, claim.name)));
    }
}

#[test]
fn level_files_are_byte_stable_across_builds() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let ma = cmd_build(3, a.path()).unwrap();
    let mb = cmd_build(3, b.path()).unwrap();
    assert_eq!(ma.levels, mb.levels);
    for n in 1..=3 {
        let file = level_file_name(n);
        assert_eq!(
            fs::read(a.path().join(&file)).unwrap(),
            fs::read(b.path().join(&file)).unwrap()
        );
    }
}

#[test]
fn corrupted_store_fails_before_any_check() {
    let dir = tempfile::tempdir().unwrap();
    cmd_build(3, dir.path()).unwrap();
    let path = dir.path().join(level_file_name(3));
    let text = fs::read_to_string(&path).unwrap().replacen("3:0", "3:1", 1);
    fs::write(&path, text).unwrap();
    match load_store(dir.path()) {
        Err(Error::HashMismatch { path: p, .. }) => assert_eq!(p, path),
        other => panic!("expected a hash mismatch, got {other:?}"),
    }
}

#[test]
fn report_needs_level_four() {
    let store = PosetStore::build(3).unwrap();
    assert!(run_report(&store).is_err());
}
