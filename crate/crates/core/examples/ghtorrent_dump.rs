//! Join a GHTorrent-style CSV dump into an event store.
//!
//! `cargo run --example ghtorrent_dump -- [dump-dir]`

use std::path::PathBuf;

use openness::ingest::ghtorrent::{MANDATORY_TABLES, OPTIONAL_TABLES};
use openness::ingest::{dataset_summary, load_ghtorrent_dump, ParseMode};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::args_os()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/dump_small"));

    for table in MANDATORY_TABLES.iter().chain(&OPTIONAL_TABLES) {
        let present = dir.join(format!("{table}.csv")).is_file();
        println!("{:<22} {}", table, if present { "found" } else { "absent" });
    }

    let store = load_ghtorrent_dump(&dir, ParseMode::Lenient)?;
    let linkage = store.commit_linkage();
    println!("\n{:?}", dataset_summary(&store));
    println!("commits linked to a project: {}, unlinked: {}", linkage.linked, linkage.unlinked);
    println!("diagnostics: {}", store.diagnostics().len());
    Ok(())
}
