//! Everything at once: analyze a store, then write the JSON report, the CSV
//! tables and the chart page.
//!
//! `cargo run --example full_report -- [path.ndjson] [out-dir]`

use std::fs::File;
use std::path::PathBuf;

use openness::ingest::{load_ndjson, ParseMode};
use openness::report::{analyze, emit_charts, emit_csv, emit_json, AnalysisOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args_os().skip(1).map(PathBuf::from);
    let input = args
        .next()
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/oracle.ndjson"));
    let out = args.next().unwrap_or_else(|| std::env::temp_dir().join("openness-report"));

    let store = load_ndjson(&input, ParseMode::Lenient)?;
    let report = analyze(&store, &AnalysisOptions::default())?;

    std::fs::create_dir_all(&out)?;
    let json = out.join("report.json");
    emit_json(&report, File::create(&json)?)?;
    println!("{}", json.display());
    for path in emit_csv(&report, out.join("csv"))? {
        println!("{}", path.display());
    }
    for path in emit_charts(&report, out.join("charts"))? {
        println!("{}", path.display());
    }
    Ok(())
}
