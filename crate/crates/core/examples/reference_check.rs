//! Compare an analyzed dataset against the published reference values.
//! Without an argument it runs on the bundled fixture, which is far from
//! the reference dataset, so most rows miss.
//!
//! `cargo run --example reference_check -- [ghtorrent-dump-dir]`

use std::path::PathBuf;

use openness::ingest::{load_ghtorrent_dump, ParseMode};
use openness::reference::{compare, TOLERANCE};
use openness::report::{analyze, AnalysisOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::args_os()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/dump_small"));
    let store = load_ghtorrent_dump(&dir, ParseMode::Lenient)?;
    let report = analyze(&store, &AnalysisOptions::default())?;

    println!("{:<24} {:>12} {:>14} {:>9}", "value", "reference", "computed", "within");
    for c in compare(&report) {
        let computed = c.computed.map_or("-".to_owned(), |v| format!("{v:.4}"));
        println!("{:<24} {:>12} {:>14} {:>9}", c.name, c.reference, computed, c.within_tolerance());
    }
    println!("tolerance: {:.1}% relative", TOLERANCE * 100.0);
    Ok(())
}
