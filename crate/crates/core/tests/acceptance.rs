//! One PASS/FAIL line per acceptance criterion. Runs without the libtest
//! harness so the lines always reach stdout, in order.

mod common;

use std::collections::BTreeSet;
use std::fs;
use std::process::Command;
use std::time::Instant;

use chrono::{TimeZone, Utc};
use common::fixture;
use common::strategies::{arb_spec, arb_store};
use openness::contrib::{self, classify_outcome, ContribOptions, Outcome};
use openness::ingest::remote::{FetchConfig, Fetcher, RecordedTransport, RemoteError};
use openness::ingest::{
    load_ghtorrent_dump, load_ndjson, read_ndjson, to_ndjson, EventStore, ParseMode, ProjectId,
    UserId,
};
use openness::promotion;
use openness::reference;
use openness::report::{analyze, AnalysisOptions};
use openness::roles::{self, Role, RoleOptions};
use openness::stats::{boxplot_summary, quantile};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

type Verdict = Result<String, String>;
type Criterion = (&'static str, fn() -> Verdict);

fn check(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn run_cases<S: Strategy>(
    cases: u32,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String> {
    let mut runner = TestRunner::new(Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    });
    runner.run(&strategy, test).map_err(|e| e.to_string())
}

fn reference_values() -> Verdict {
    check(reference::SUMMARY.original_project_count == 91, "original project count")?;
    check(reference::MEAN_ACCEPTANCE_RATE == 0.5947, "acceptance rate")?;
    check(reference::MEAN_DECISION_DAYS == 231.70, "decision days")?;
    check(
        (reference::PROMOTION_Q1_DAYS, reference::PROMOTION_MEDIAN_DAYS, reference::PROMOTION_Q3_DAYS)
            == (74.83, 147.83, 225.05),
        "promotion quartiles",
    )?;
    check(reference::CONTRIBUTING_SHARE == 0.13, "contributing share")?;
    let Some(dir) = std::env::var_os("OPENNESS_REFERENCE_DUMP") else {
        return Ok("constants encoded; dataset not supplied, comparison skipped".into());
    };
    let store = load_ghtorrent_dump(&dir, ParseMode::Lenient).map_err(|e| e.to_string())?;
    let report = analyze(&store, &AnalysisOptions::default()).map_err(|e| e.to_string())?;
    let off: Vec<&str> = reference::compare(&report)
        .into_iter()
        .filter(|c| !c.within_tolerance())
        .map(|c| c.name)
        .collect();
    check(off.is_empty(), format!("outside tolerance: {off:?}"))?;
    Ok("dataset reproduced within tolerance".into())
}

fn oracle_equivalence() -> Verdict {
    let start = Instant::now();
    let store = load_ndjson(fixture("oracle.ndjson"), ParseMode::Strict).map_err(|e| e.to_string())?;
    let roles_of = |p: u64| -> Vec<(u64, Role)> {
        roles::classify_users(ProjectId(p), &store, RoleOptions::default())
            .unwrap()
            .into_iter()
            .map(|a| (a.user.0, a.role))
            .collect()
    };
    use Role::*;
    check(
        roles_of(10)
            == [
                (1, Member),
                (2, Member),
                (3, Collaborator),
                (4, Collaborator),
                (5, ExternalContributor),
                (6, ExternalContributor),
                (7, ExternalUser),
                (13, ExternalContributor),
            ],
        "roles in project 10",
    )?;
    check(
        roles_of(20)
            == [(8, Member), (9, Collaborator), (10, Collaborator), (11, ExternalContributor), (12, ExternalUser)],
        "roles in project 20",
    )?;
    let outcomes: Vec<(Outcome, Option<f64>)> = store
        .all_pull_requests()
        .map(|pr| {
            let o = classify_outcome(pr).unwrap();
            (o.outcome, o.decision_days)
        })
        .collect();
    use Outcome::*;
    let expected = [
        (Accepted, Some(29.0)),
        (Rejected, Some(10.0)),
        (Pending, None),
        (Accepted, Some(1.5)),
        (Rejected, Some(2.0)),
        (Accepted, Some(1.0)),
        (Rejected, Some(3.0)),
        (Accepted, Some(1.0)),
        (Accepted, Some(1.5)),
        (Rejected, Some(5.0)),
        (Pending, None),
    ];
    check(outcomes == expected, format!("pull request outcomes {outcomes:?}"))?;
    let mut promoted = Vec::new();
    for p in [10, 20] {
        let s = promotion::project_promotion_stats(ProjectId(p), &store, RoleOptions::default()).unwrap();
        promoted.extend(s.records.into_iter().map(|r| (r.user.0, r.duration_days)));
    }
    check(promoted == [(3, 51.0), (9, 10.0), (10, 7.0)], format!("promotions {promoted:?}"))?;
    analyze(&store, &AnalysisOptions::default()).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed().as_secs_f64();
    check(elapsed < 1.0, format!("took {elapsed:.3}s"))?;
    Ok(format!("13 assignments, 11 outcomes, 3 promotions in {:.0} ms", elapsed * 1000.0))
}

fn originals(store: &EventStore) -> Vec<ProjectId> {
    store.original_projects().map(|p| p.project_id).collect()
}

fn property_suite() -> Verdict {
    const CASES: u32 = 1000;
    let start = Instant::now();

    run_cases(CASES, (arb_store(), any::<bool>()), |(store, strict)| {
        let options = RoleOptions { strict_management: strict };
        for p in originals(&store) {
            let got = roles::classify_users(p, &store, options).unwrap();
            let users: BTreeSet<UserId> = got.iter().map(|a| a.user).collect();
            prop_assert_eq!(users.len(), got.len());
            let mut seen: BTreeSet<UserId> = store.events(p).iter().map(|e| e.actor).collect();
            seen.extend(store.pull_requests(p).iter().map(|pr| pr.author));
            seen.extend(store.members_of(p).map(|m| m.user));
            seen.insert(store.project(p).unwrap().owner);
            prop_assert_eq!(users, seen);

            let c = roles::compose_community(p, &store, options).unwrap();
            let sum: f64 = Role::ALL.iter().map(|&r| c.share(r)).sum();
            prop_assert!((sum - 1.0).abs() <= 1e-9);

            let s = contrib::contribution_stats(p, &store, ContribOptions::default()).unwrap();
            prop_assert_eq!(s.accepted + s.rejected + s.pending_excluded, s.total_external_prs);
            prop_assert!(s.acceptance_rate.is_none_or(|r| (0.0..=1.0).contains(&r)));

            for r in promotion::project_promotion_stats(p, &store, options).unwrap().records {
                prop_assert!(r.duration_days > 0.0);
            }
        }
        Ok(())
    })?;

    run_cases(CASES, (arb_spec(), 0i64..(500 * 86_400_000)), |(spec, opened)| {
        let store = spec.build();
        for p in originals(&store) {
            let before = contrib::contribution_stats(p, &store, ContribOptions::default()).unwrap();
            let assigned = roles::classify_users(p, &store, RoleOptions::default()).unwrap();
            let Some(author) = assigned.iter().find(|a| a.role == Role::ExternalContributor) else {
                continue;
            };
            let at = Utc.timestamp_millis_opt(1_325_376_000_000 + opened).unwrap();
            let line = serde_json::json!({
                "type": "pull_request", "pr_id": "extra", "project": p, "author": author.user,
                "opened_at": openness::ingest::timestamp::format(&at), "closed_at": null,
                "merged": false, "head_project": null, "base_project": p,
            });
            let grown = read_ndjson(format!("{}{line}\n", to_ndjson(&store)).as_bytes(), ParseMode::Lenient).unwrap();
            let after = contrib::contribution_stats(p, &grown, ContribOptions::default()).unwrap();
            prop_assert_eq!(after.acceptance_rate, before.acceptance_rate);
            prop_assert_eq!(after.mean_decision_days, before.mean_decision_days);
        }
        Ok(())
    })?;

    let sample = prop::collection::vec(-1.0e6..1.0e6f64, 1..60);
    run_cases(CASES, (sample, 0.0..=1.0f64), |(values, p)| {
        let labelled: Vec<(String, f64)> = values.iter().map(|&v| (String::new(), v)).collect();
        let b = boxplot_summary(&labelled).unwrap();
        prop_assert!(b.min <= b.q1 && b.q1 <= b.median && b.median <= b.q3 && b.q3 <= b.max);
        let mut sorted = values.clone();
        sorted.sort_by(f64::total_cmp);
        let h = (sorted.len() - 1) as f64 * p;
        let (lo, hi) = (h.floor() as usize, h.ceil() as usize);
        let want = sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo]);
        let got = quantile(&values, p).unwrap();
        prop_assert!((got - want).abs() <= 1e-12 * want.abs().max(1.0));
        Ok(())
    })?;

    let elapsed = start.elapsed().as_secs_f64();
    check(elapsed < 60.0, format!("took {elapsed:.1}s"))?;
    Ok(format!("8 invariants, {CASES} cases each, {elapsed:.1}s"))
}

fn round_trip() -> Verdict {
    run_cases(200, arb_store(), |store| {
        let back = read_ndjson(to_ndjson(&store).as_bytes(), ParseMode::Strict).unwrap();
        prop_assert_eq!(back, store);
        Ok(())
    })?;
    Ok("200 generated stores".into())
}

fn determinism() -> Verdict {
    let input = fixture("oracle.ndjson");
    let run = |dir: &std::path::Path| -> Result<(), String> {
        let status = Command::new(env!("CARGO_BIN_EXE_openness"))
            .arg("analyze")
            .arg("--input")
            .arg(&input)
            .args(["--format", "ndjson", "--out"])
            .arg(dir.join("report.json"))
            .arg("--charts")
            .arg(dir.join("charts"))
            .env_remove("SOURCE_DATE_EPOCH")
            .status()
            .map_err(|e| e.to_string())?;
        check(status.success(), format!("exit {status}"))
    };
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    run(a.path())?;
    run(b.path())?;
    let files = ["report.json", "charts/composition.svg", "charts/contribution.svg", "charts/promotion.svg"];
    for f in files {
        let x = fs::read(a.path().join(f)).map_err(|e| format!("{f}: {e}"))?;
        let y = fs::read(b.path().join(f)).map_err(|e| format!("{f}: {e}"))?;
        check(x == y, format!("{f} differs"))?;
    }
    Ok(format!("{} files byte-identical", files.len()))
}

fn remote_fixtures() -> Verdict {
    let transport = RecordedTransport::from_dir(fixture("remote/two_prs")).map_err(|e| e.to_string())?;
    let store = Fetcher::new(transport, FetchConfig::default()).fetch("octo/demo").map_err(|e| e.to_string())?;
    let expected = load_ndjson(fixture("remote/two_prs.expected.ndjson"), ParseMode::Strict).map_err(|e| e.to_string())?;
    check(store == expected, "two-PR repository differs from expected store")?;

    let transport = RecordedTransport::from_dir(fixture("remote/rate_limit")).map_err(|e| e.to_string())?;
    match Fetcher::new(transport, FetchConfig::default()).fetch("octo/demo") {
        Err(RemoteError::RateLimited { reset_at: Some(t), .. }) if t.timestamp() == 1_700_000_000 => {}
        other => return Err(format!("expected RateLimited with reset, got {other:?}")),
    }
    Ok("2-PR repository and rate limit replayed".into())
}

fn main() {
    let criteria: [Criterion; 6] = [
        ("reference constants", reference_values),
        ("oracle equivalence", oracle_equivalence),
        ("property suite", property_suite),
        ("ndjson round trip", round_trip),
        ("determinism", determinism),
        ("recorded remote ingestion", remote_fixtures),
    ];
    let mut failed = Vec::new();
    for (name, criterion) in criteria {
        let result = std::panic::catch_unwind(criterion).unwrap_or_else(|_| Err("panicked".into()));
        match result {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(why) => {
                println!("FAIL {name}: {why}");
                failed.push(name);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed.len(), criteria.len());
    if !failed.is_empty() {
        std::process::exit(1);
    }
}
