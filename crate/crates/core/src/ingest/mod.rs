//! Loading repository activity into an [`EventStore`].
//!
//! Three routes feed the same [`StoreBuilder`]: newline-delimited JSON
//! ([`load_ndjson`]), a GHTorrent-style CSV table dump
//! ([`load_ghtorrent_dump`]) and a GitHub-compatible REST API
//! ([`remote::fetch_remote`]). Whatever the route, the builder resolves
//! references, applies merge detection and sorts events, so the resulting
//! stores compare equal when they describe the same data.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub mod ghtorrent;
pub mod model;
pub mod ndjson;
pub mod remote;
mod store;
pub mod timestamp;

pub use ghtorrent::load_ghtorrent_dump;
pub use model::{
    EventKind, EventRecord, MembershipRecord, Project, ProjectId, PullRequestRecord, SubjectKind,
    User, UserId,
};
pub use ndjson::{load_ndjson, read_ndjson, to_ndjson, write_ndjson};
pub use store::{CommitLinkage, Diagnostic, DiagnosticKind, EventStore, StoreBuilder};

/// Parse strictness shared by all loaders.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ParseMode {
    /// Bad records become diagnostics.
    #[default]
    Lenient,
    /// The first bad record aborts the load.
    Strict,
}

impl ParseMode {
    pub fn is_strict(self) -> bool {
        self == ParseMode::Strict
    }
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("file not found: {}", .0.display())]
    FileNotFound(PathBuf),
    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("schema error at {location}{}: {message}", field.as_ref().map(|f| format!(" (field `{f}`)")).unwrap_or_default())]
    Schema {
        location: String,
        field: Option<String>,
        message: String,
    },
    #[error("input contains no valid records")]
    EmptyInput,
    #[error("missing mandatory table `{0}`")]
    MissingTable(String),
    #[error("unresolved reference at {location}: {message}")]
    Join { location: String, message: String },
}

/// Headline counts of a dataset.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub project_count: usize,
    pub original_project_count: usize,
    pub user_count: usize,
    pub issue_count: usize,
    pub pr_count: usize,
    /// Linked and unlinked commits together.
    pub commit_count: usize,
}

pub fn dataset_summary(store: &EventStore) -> DatasetSummary {
    let linkage = store.commit_linkage();
    DatasetSummary {
        project_count: store.projects().count(),
        original_project_count: store.original_projects().count(),
        user_count: store.users().count(),
        issue_count: store.issue_count(),
        pr_count: store.all_pull_requests().count(),
        commit_count: linkage.linked + linkage.unlinked,
    }
}
