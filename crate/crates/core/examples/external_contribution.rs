//! Acceptance rate and decision latency of pull requests sent by outsiders.
//!
//! `cargo run --example external_contribution -- [path.ndjson] [--role-at-pr-time]`

use std::path::PathBuf;

use openness::contrib::{
    aggregate_contribution, aggregate_contribution_pooled, classify_outcome, contribution_stats,
    external_pull_requests, ContribOptions,
};
use openness::ingest::{load_ndjson, ParseMode};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let options = ContribOptions {
        role_at_pr_time: args.iter().any(|a| a == "--role-at-pr-time"),
        ..ContribOptions::default()
    };
    let path = args
        .iter()
        .find(|a| !a.starts_with("--"))
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/oracle.ndjson"));
    let store = load_ndjson(path, ParseMode::Lenient)?;

    let mut all = Vec::new();
    for project in store.original_projects() {
        println!("{}", project.full_name);
        for pr in external_pull_requests(project.project_id, &store, options)? {
            let o = classify_outcome(&pr)?;
            let days = o.decision_days.map_or("-".to_owned(), |d| format!("{d:.2} days"));
            println!("  #{:<4} {:?} {}", pr.pr_id, o.outcome, days);
        }
        let s = contribution_stats(project.project_id, &store, options)?;
        println!(
            "  accepted {} rejected {} pending {} rate {:?} mean latency {:?}",
            s.accepted, s.rejected, s.pending_excluded, s.acceptance_rate, s.mean_decision_days
        );
        all.push(s);
    }

    let mean = aggregate_contribution(&all)?;
    let pooled = aggregate_contribution_pooled(&all)?;
    println!("\nmean of projects: {:.2}% accepted, {:.2} days", mean.mean_acceptance_rate * 100.0, mean.mean_decision_days);
    println!("pooled requests:  {:.2}% accepted, {:.2} days", pooled.mean_acceptance_rate * 100.0, pooled.mean_decision_days);
    Ok(())
}
