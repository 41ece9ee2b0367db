//! Load an NDJSON event log and print what ended up in the store.
//!
//! `cargo run --example load_ndjson -- [path.ndjson]`

use std::path::PathBuf;

use openness::ingest::{dataset_summary, load_ndjson, ParseMode};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args_os()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/oracle.ndjson"));
    let store = load_ndjson(&path, ParseMode::Lenient)?;

    let s = dataset_summary(&store);
    println!("{}", path.display());
    println!("  users             {}", s.user_count);
    println!("  projects          {} ({} original)", s.project_count, s.original_project_count);
    println!("  issues            {}", s.issue_count);
    println!("  pull requests     {}", s.pr_count);
    println!("  commits           {}", s.commit_count);
    for project in store.projects() {
        println!(
            "  {:<16} {} events, {} pull requests{}",
            project.full_name,
            store.events(project.project_id).len(),
            store.pull_requests(project.project_id).len(),
            if project.is_original() { "" } else { " (fork)" },
        );
    }
    for d in store.diagnostics() {
        println!("  note: {d:?}");
    }
    Ok(())
}
