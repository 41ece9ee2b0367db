#![allow(dead_code)]

use std::path::PathBuf;

use openness::ingest::{load_ndjson, EventStore, ParseMode};

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn oracle_store() -> EventStore {
    load_ndjson(fixture("oracle.ndjson"), ParseMode::Strict).expect("oracle fixture loads")
}

pub fn assert_close(actual: f64, expected: f64, what: &str) {
    let tol = 1e-9 * expected.abs().max(1.0);
    assert!((actual - expected).abs() <= tol, "{what}: {actual} != {expected}");
}

pub mod strategies;
