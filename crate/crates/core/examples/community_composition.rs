//! Classify every participant of each original project and summarize the
//! community by role.
//!
//! `cargo run --example community_composition -- [path.ndjson] [--strict-management]`

use std::path::PathBuf;

use openness::ingest::{load_ndjson, ParseMode};
use openness::roles::{average_composition, classify_users, CommunityComposition, Role, RoleOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let options = RoleOptions {
        strict_management: args.iter().any(|a| a == "--strict-management"),
    };
    let path = args
        .iter()
        .find(|a| !a.starts_with("--"))
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/oracle.ndjson"));
    let store = load_ndjson(path, ParseMode::Lenient)?;

    let mut compositions = Vec::new();
    for project in store.original_projects() {
        let assignments = classify_users(project.project_id, &store, options)?;
        println!("{}", project.full_name);
        for a in &assignments {
            let login = store.user(a.user).map_or("?", |u| u.login.as_str());
            println!("  {:<10} {:<22} {:?} {:?}", login, a.role.label(), a.assigned_reason, a.evidence);
        }
        compositions.push(CommunityComposition::from_assignments(project.project_id, &assignments));
    }

    let avg = average_composition(&compositions)?;
    println!("\naverage over {} projects", avg.projects);
    for role in Role::ALL {
        println!("  {:<22} {:>6.2}%", role.label(), avg.share(role) * 100.0);
    }
    println!("  contributing share     {:>6.2}%", avg.contributing_share() * 100.0);
    Ok(())
}
