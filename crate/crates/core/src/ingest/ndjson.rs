//! Newline-delimited JSON interchange.
//!
//! Each line is an object tagged by `"type"`: `user`, `project`,
//! `membership`, `pull_request` or `event`. The remaining keys are the
//! record's fields in snake_case; timestamps are RFC 3339 strings.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::model::{EventRecord, MembershipRecord, Project, PullRequestRecord, User};
use super::store::{DiagnosticKind, EventStore, StoreBuilder};
use super::{IngestError, ParseMode};

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
enum Line {
    User(User),
    Project(Project),
    Membership(MembershipRecord),
    PullRequest(PullRequestRecord),
    Event(EventRecord),
}

#[derive(Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
enum LineRef<'a> {
    User(&'a User),
    Project(&'a Project),
    Membership(&'a MembershipRecord),
    PullRequest(&'a PullRequestRecord),
    Event(&'a EventRecord),
}

pub fn load_ndjson(path: impl AsRef<Path>, mode: ParseMode) -> Result<EventStore, IngestError> {
    let path = path.as_ref();
    if !path.exists() {
        return Err(IngestError::FileNotFound(path.to_owned()));
    }
    let file = File::open(path).map_err(|source| IngestError::Io {
        path: path.to_owned(),
        source,
    })?;
    read_ndjson(BufReader::new(file), mode).map_err(|e| match e {
        IngestError::Io { source, .. } => IngestError::Io {
            path: path.to_owned(),
            source,
        },
        other => other,
    })
}

/// Reads NDJSON from any buffered reader. Blank lines are skipped.
pub fn read_ndjson(reader: impl BufRead, mode: ParseMode) -> Result<EventStore, IngestError> {
    let mut builder = StoreBuilder::new(mode.is_strict());
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|source| IngestError::Io {
            path: Default::default(),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let location = format!("line {line_no}");
        match serde_json::from_str::<Line>(&line) {
            Ok(Line::User(r)) => builder.add_user(r, location),
            Ok(Line::Project(r)) => builder.add_project(r, location),
            Ok(Line::Membership(r)) => builder.add_membership(r, location),
            Ok(Line::PullRequest(r)) => builder.add_pull_request(r, location),
            Ok(Line::Event(r)) => builder.add_event(r, location),
            Err(err) => {
                let message = err.to_string();
                if mode.is_strict() {
                    return Err(IngestError::Schema {
                        location,
                        field: field_from_message(&message),
                        message,
                    });
                }
                builder.diagnose(DiagnosticKind::MalformedRecord, location, message)?;
            }
        }
    }
    if builder.record_count() == 0 {
        return Err(IngestError::EmptyInput);
    }
    builder.finish()
}

/// serde_json names the offending field between backticks.
fn field_from_message(message: &str) -> Option<String> {
    let start = message.find('`')? + 1;
    let len = message[start..].find('`')?;
    Some(message[start..start + len].to_owned())
}

/// Serializes a store in a fixed order: users, projects, memberships, pull
/// requests, events.
pub fn write_ndjson(store: &EventStore, writer: impl Write) -> std::io::Result<()> {
    let mut out = BufWriter::new(writer);
    let lines = store
        .users()
        .map(LineRef::User)
        .chain(store.projects().map(LineRef::Project))
        .chain(store.memberships().iter().map(LineRef::Membership))
        .chain(store.all_pull_requests().map(LineRef::PullRequest))
        .chain(store.all_events().map(LineRef::Event));
    for line in lines {
        serde_json::to_writer(&mut out, &line)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

pub fn to_ndjson(store: &EventStore) -> String {
    let mut buf = Vec::new();
    write_ndjson(store, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}
