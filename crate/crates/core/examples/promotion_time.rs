//! How long collaborators took to go from first action to first management
//! action, per project and across the dataset.
//!
//! `cargo run --example promotion_time -- [path.ndjson]`

use std::path::PathBuf;

use openness::ingest::{load_ndjson, ParseMode};
use openness::promotion::{dataset_promotion_distribution, project_promotion_stats};
use openness::roles::RoleOptions;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args_os()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/oracle.ndjson"));
    let store = load_ndjson(path, ParseMode::Lenient)?;

    let mut per_project = Vec::new();
    for project in store.original_projects() {
        let stats = project_promotion_stats(project.project_id, &store, RoleOptions::default())?;
        println!("{} ({} filtered)", stats.project_name, stats.filtered);
        for r in &stats.records {
            let login = store.user(r.user).map_or("?", |u| u.login.as_str());
            println!("  {login:<8} {} -> {}  {:.2} days", r.first_action_at, r.first_management_at, r.duration_days);
        }
        per_project.push(stats);
    }

    match dataset_promotion_distribution(&per_project) {
        Ok(b) => {
            println!("\nq1 {:.2}  median {:.2}  q3 {:.2} days", b.q1, b.median, b.q3);
            for v in &b.above_box {
                println!("  above the box: {} ({:.2})", v.label, v.value);
            }
        }
        Err(e) => println!("\nno distribution: {e}"),
    }
    Ok(())
}
