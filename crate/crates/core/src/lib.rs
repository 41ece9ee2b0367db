//! Openness metrics for repositories hosted on GitHub-style forges.
//!
//! The pipeline loads activity into an [`ingest::EventStore`] and computes,
//! for every original (non-fork) project:
//!
//! - community composition ([`roles`]): members, collaborators, external
//!   contributors and external users;
//! - external contribution acceptance and decision latency ([`contrib`]);
//! - time for an external user to become a collaborator ([`promotion`]).
//!
//! [`report`] bundles the results into JSON, CSV and static SVG/HTML output.

pub mod contrib;
pub mod ingest;
pub mod promotion;
pub mod reference;
pub mod report;
pub mod roles;
pub mod stats;
