mod common;

use std::collections::BTreeMap;
use std::fs;

use chrono::{TimeZone, Utc};
use common::fixture;
use openness::ingest::remote::{FetchConfig, Fetcher, RecordedTransport, RemoteError};
use openness::ingest::{
    dataset_summary, load_ghtorrent_dump, load_ndjson, read_ndjson, DiagnosticKind, IngestError,
    ParseMode,
};
use serde_json::Value;

/// Counts records straight from the text, without the loader.
fn count_lines(text: &str) -> BTreeMap<String, u64> {
    let mut counts = BTreeMap::new();
    for line in text.lines().filter(|l| !l.trim().is_empty()) {
        *counts.entry("lines".to_owned()).or_insert(0) += 1;
        let v: Value = serde_json::from_str(line).unwrap();
        let key = match (v["type"].as_str().unwrap(), v["kind"].as_str()) {
            ("user", _) => "users",
            ("project", _) => {
                if v["forked_from"].is_null() {
                    *counts.entry("original_projects".to_owned()).or_insert(0) += 1;
                }
                "projects"
            }
            ("pull_request", _) => "pull_requests",
            ("event", Some("IssueOpened")) => "issues",
            ("event", Some("CommitAuthored")) => "commits",
            _ => continue,
        };
        *counts.entry(key.to_owned()).or_insert(0) += 1;
    }
    counts
}

#[test]
fn small_fixture_counts_match_manifest() {
    let text = fs::read_to_string(fixture("small.ndjson")).unwrap();
    let manifest: BTreeMap<String, u64> =
        serde_json::from_str(&fs::read_to_string(fixture("small.manifest.json")).unwrap()).unwrap();
    let mut counted = count_lines(&text);
    counted.entry("commits".into()).or_insert(0);
    assert_eq!(counted, manifest);

    let store = load_ndjson(fixture("small.ndjson"), ParseMode::Strict).unwrap();
    let s = dataset_summary(&store);
    assert_eq!(s.user_count as u64, manifest["users"]);
    assert_eq!(s.project_count as u64, manifest["projects"]);
    assert_eq!(s.original_project_count as u64, manifest["original_projects"]);
    assert_eq!(s.pr_count as u64, manifest["pull_requests"]);
    assert_eq!(s.issue_count as u64, manifest["issues"]);
    assert_eq!(s.commit_count as u64, manifest["commits"]);
    // Both pull requests lack an opening event and get one synthesized.
    assert_eq!(
        store
            .diagnostics()
            .iter()
            .filter(|d| d.kind == DiagnosticKind::SynthesizedOpenEvent)
            .count(),
        2
    );
}

#[test]
fn dump_and_ndjson_twin_load_to_the_same_store() {
    let dump = load_ghtorrent_dump(fixture("dump_small"), ParseMode::Lenient).unwrap();
    let twin = load_ndjson(fixture("dump_small.ndjson"), ParseMode::Strict).unwrap();
    assert_eq!(dump, twin);
    let linkage = dump.commit_linkage();
    assert_eq!((linkage.linked, linkage.unlinked), (2, 1));
    assert_eq!(dataset_summary(&dump).commit_count, 3);
}

#[test]
fn missing_inputs_are_reported() {
    assert!(matches!(
        load_ndjson(fixture("no-such-file.ndjson"), ParseMode::Lenient),
        Err(IngestError::FileNotFound(_))
    ));
    let empty = tempfile::tempdir().unwrap();
    assert!(matches!(
        load_ghtorrent_dump(empty.path(), ParseMode::Lenient),
        Err(IngestError::MissingTable(t)) if t == "projects"
    ));
    assert!(matches!(read_ndjson("\n\n".as_bytes(), ParseMode::Lenient), Err(IngestError::EmptyInput)));
}

#[test]
fn strict_mode_names_the_bad_line_and_field() {
    let text = fs::read_to_string(fixture("small.ndjson")).unwrap();
    let broken = text.replacen("\"login\":\"bob\"", "\"login\":7", 1);
    match read_ndjson(broken.as_bytes(), ParseMode::Strict) {
        Err(IngestError::Schema { location, .. }) => assert_eq!(location, "line 2"),
        other => panic!("expected a schema error, got {other:?}"),
    }
    let lenient = read_ndjson(broken.as_bytes(), ParseMode::Lenient).unwrap();
    assert_eq!(lenient.diagnostics()[0].kind, DiagnosticKind::MalformedRecord);
}

#[test]
fn lenient_mode_drops_dangling_events() {
    let mut text = fs::read_to_string(fixture("small.ndjson")).unwrap();
    text.push_str(
        r#"{"type":"event","event_id":"x","kind":"IssueComment","actor":99,"project":10,"subject_id":"1","at":"2012-02-11T00:00:00Z"}"#,
    );
    let store = read_ndjson(text.as_bytes(), ParseMode::Lenient).unwrap();
    assert!(store.all_events().all(|e| e.event_id != "x"));
    assert!(store.diagnostics().iter().any(|d| d.kind == DiagnosticKind::DanglingReference));
    assert!(matches!(
        read_ndjson(text.as_bytes(), ParseMode::Strict),
        Err(IngestError::Join { .. })
    ));
}

#[test]
fn recorded_two_pull_request_repository() {
    let transport = RecordedTransport::from_dir(fixture("remote/two_prs")).unwrap();
    let store = Fetcher::new(transport, FetchConfig::default()).fetch("octo/demo").unwrap();
    let expected = load_ndjson(fixture("remote/two_prs.expected.ndjson"), ParseMode::Strict).unwrap();
    assert_eq!(store, expected);
    assert_eq!(store.commit_linkage().unlinked, 1);
}

#[test]
fn recorded_rate_limit_carries_the_reset_time() {
    let transport = RecordedTransport::from_dir(fixture("remote/rate_limit")).unwrap();
    let err = Fetcher::new(transport, FetchConfig::default()).fetch("octo/demo").unwrap_err();
    match err {
        RemoteError::RateLimited { reset_at, .. } => {
            assert_eq!(reset_at, Some(Utc.timestamp_opt(1_700_000_000, 0).unwrap()));
        }
        other => panic!("expected RateLimited, got {other:?}"),
    }
}

#[test]
fn unknown_repository_is_not_found() {
    let transport = RecordedTransport::from_dir(fixture("remote/two_prs")).unwrap();
    let err = Fetcher::new(transport, FetchConfig::default()).fetch("octo/missing").unwrap_err();
    assert!(matches!(err, RemoteError::NotFound(_)), "{err:?}");
}
