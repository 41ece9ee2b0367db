//! Report assembly and emitters.
//!
//! [`analyze`] runs the three metrics over every original project of a store
//! and produces a [`DatasetReport`]. The emitters turn it into JSON
//! ([`emit_json`]), CSV tables ([`emit_csv`]) and a static HTML page with
//! SVG charts ([`emit_charts`]).

use std::collections::BTreeMap;

use chrono::{DateTime, TimeZone, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::contrib::{self, ContribOptions, ContributionAggregate, ContributionStats};
use crate::ingest::{self, DatasetSummary, DiagnosticKind, EventStore, Project, ProjectId, UserId};
use crate::promotion::{self, PromotionStats};
use crate::roles::{self, CommunityComposition, ProjectRoles, Role, RoleOptions};
use crate::stats::{BoxplotSummary, LabeledValue};

mod charts;
pub mod cli;
mod csv_out;
pub mod display;
mod json;

pub use charts::{emit_charts, render_composition_svg, render_contribution_svg, render_promotion_svg};
pub use csv_out::emit_csv;
pub use display::{Days, Percent};
pub use json::{emit_json, to_json_string};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("project {0:?} is not in the dataset")]
    UnknownProject(String),
    #[error("project {0:?} is a fork; metrics cover original projects only")]
    NotOriginal(String),
    #[error(transparent)]
    Roles(#[from] roles::RolesError),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    M1,
    M2,
    M3,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::M1, Metric::M2, Metric::M3];
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnalysisOptions {
    pub metrics: Vec<Metric>,
    pub roles: RoleOptions,
    pub role_at_pr_time: bool,
    pub pooled: bool,
    /// Restrict the report to one `owner/name`.
    pub project: Option<String>,
    /// Defaults to the latest instant in the data so reruns are identical.
    pub generated_at: Option<DateTime<Utc>>,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            metrics: Metric::ALL.to_vec(),
            roles: RoleOptions::default(),
            role_at_pr_time: false,
            pooled: false,
            project: None,
            generated_at: None,
        }
    }
}

impl AnalysisOptions {
    fn wants(&self, metric: Metric) -> bool {
        self.metrics.contains(&metric)
    }

    fn contrib(&self) -> ContribOptions {
        ContribOptions {
            roles: self.roles,
            role_at_pr_time: self.role_at_pr_time,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProjectInfo {
    pub project_id: ProjectId,
    pub full_name: String,
    pub owner: UserId,
    #[serde(with = "crate::ingest::timestamp::serde_utc")]
    pub created_at: DateTime<Utc>,
}

impl From<&Project> for ProjectInfo {
    fn from(p: &Project) -> Self {
        ProjectInfo {
            project_id: p.project_id,
            full_name: p.full_name.clone(),
            owner: p.owner,
            created_at: p.created_at,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompositionReport {
    pub counts: BTreeMap<Role, u64>,
    pub shares: BTreeMap<Role, Percent>,
    /// Members, collaborators and external contributors together.
    pub contributing_share: Percent,
}

impl From<&CommunityComposition> for CompositionReport {
    fn from(c: &CommunityComposition) -> Self {
        CompositionReport {
            counts: c.counts.clone(),
            shares: c.percentages.iter().map(|(&r, &v)| (r, Percent(v))).collect(),
            contributing_share: Percent(c.contributing_share()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContributionReport {
    pub total_external_prs: u64,
    pub accepted: u64,
    pub rejected: u64,
    pub pending_excluded: u64,
    pub invalid_excluded: u64,
    pub acceptance_rate: Option<Percent>,
    pub mean_decision_days: Option<Days>,
}

impl From<&ContributionStats> for ContributionReport {
    fn from(s: &ContributionStats) -> Self {
        ContributionReport {
            total_external_prs: s.total_external_prs,
            accepted: s.accepted,
            rejected: s.rejected,
            pending_excluded: s.pending_excluded,
            invalid_excluded: s.invalid_excluded,
            acceptance_rate: s.acceptance_rate.map(Percent),
            mean_decision_days: s.mean_decision_days.map(Days),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PromotionEntry {
    pub user: UserId,
    pub login: String,
    #[serde(with = "crate::ingest::timestamp::serde_utc")]
    pub first_action_at: DateTime<Utc>,
    #[serde(with = "crate::ingest::timestamp::serde_utc")]
    pub first_management_at: DateTime<Utc>,
    pub duration_days: Days,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PromotionReport {
    pub records: Vec<PromotionEntry>,
    pub filtered: u64,
    pub mean_duration_days: Option<Days>,
}

impl PromotionReport {
    fn new(s: &PromotionStats, store: &EventStore) -> Self {
        PromotionReport {
            records: s
                .records
                .iter()
                .map(|r| PromotionEntry {
                    user: r.user,
                    login: store.user(r.user).map(|u| u.login.clone()).unwrap_or_default(),
                    first_action_at: r.first_action_at,
                    first_management_at: r.first_management_at,
                    duration_days: Days(r.duration_days),
                })
                .collect(),
            filtered: s.filtered,
            mean_duration_days: s.mean_duration_days.map(Days),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProjectReport {
    pub project: ProjectInfo,
    pub composition: Option<CompositionReport>,
    pub contribution: Option<ContributionReport>,
    pub promotion: Option<PromotionReport>,
    #[serde(with = "crate::ingest::timestamp::serde_utc")]
    pub generated_at: DateTime<Utc>,
    pub tool_version: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AverageCompositionReport {
    pub projects: usize,
    pub shares: BTreeMap<Role, Percent>,
    pub contributing_share: Percent,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggregateContributionReport {
    pub mean_acceptance_rate: Percent,
    pub mean_decision_days: Days,
    pub projects_included: usize,
    pub projects_skipped: usize,
    pub pooled: bool,
}

impl From<&ContributionAggregate> for AggregateContributionReport {
    fn from(a: &ContributionAggregate) -> Self {
        AggregateContributionReport {
            mean_acceptance_rate: Percent(a.mean_acceptance_rate),
            mean_decision_days: Days(a.mean_decision_days),
            projects_included: a.projects_included,
            projects_skipped: a.projects_skipped,
            pooled: a.pooled,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabeledDays {
    pub label: String,
    pub value: Days,
}

impl From<&LabeledValue> for LabeledDays {
    fn from(v: &LabeledValue) -> Self {
        LabeledDays {
            label: v.label.clone(),
            value: Days(v.value),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxplotReport {
    pub n: usize,
    pub min: Days,
    pub q1: Days,
    pub median: Days,
    pub q3: Days,
    pub max: Days,
    pub iqr: Days,
    pub whisker_low: Days,
    pub whisker_high: Days,
    pub outliers: Vec<LabeledDays>,
    pub above_box: Vec<LabeledDays>,
}

impl From<&BoxplotSummary> for BoxplotReport {
    fn from(b: &BoxplotSummary) -> Self {
        BoxplotReport {
            n: b.n,
            min: Days(b.min),
            q1: Days(b.q1),
            median: Days(b.median),
            q3: Days(b.q3),
            max: Days(b.max),
            iqr: Days(b.iqr),
            whisker_low: Days(b.whisker_low),
            whisker_high: Days(b.whisker_high),
            outliers: b.outliers.iter().map(Into::into).collect(),
            above_box: b.above_box.iter().map(Into::into).collect(),
        }
    }
}

impl BoxplotReport {
    pub fn to_summary(&self) -> BoxplotSummary {
        let back = |v: &[LabeledDays]| {
            v.iter()
                .map(|l| LabeledValue {
                    label: l.label.clone(),
                    value: l.value.0,
                })
                .collect()
        };
        BoxplotSummary {
            n: self.n,
            min: self.min.0,
            q1: self.q1.0,
            median: self.median.0,
            q3: self.q3.0,
            max: self.max.0,
            iqr: self.iqr.0,
            whisker_low: self.whisker_low.0,
            whisker_high: self.whisker_high.0,
            outliers: back(&self.outliers),
            above_box: back(&self.above_box),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct IngestSummary {
    pub diagnostics: BTreeMap<String, usize>,
    pub linked_commits: usize,
    pub unlinked_commits: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetReport {
    pub summary: DatasetSummary,
    pub ingest: IngestSummary,
    pub metrics: Vec<Metric>,
    pub average_composition: Option<AverageCompositionReport>,
    pub aggregate_contribution: Option<AggregateContributionReport>,
    pub promotion_boxplot: Option<BoxplotReport>,
    pub per_project: Vec<ProjectReport>,
    #[serde(with = "crate::ingest::timestamp::serde_utc")]
    pub generated_at: DateTime<Utc>,
    pub tool_version: String,
}

fn diagnostic_name(kind: DiagnosticKind) -> String {
    serde_json::to_value(kind)
        .ok()
        .and_then(|v| v.as_str().map(str::to_owned))
        .unwrap_or_default()
}

/// Runs the selected metrics over every original project (or the one named
/// in `options.project`).
pub fn analyze(store: &EventStore, options: &AnalysisOptions) -> Result<DatasetReport, ReportError> {
    let generated_at = options
        .generated_at
        .or_else(|| store.latest_timestamp())
        .unwrap_or_else(|| Utc.timestamp_opt(0, 0).single().expect("epoch"));

    let projects: Vec<&Project> = match &options.project {
        Some(name) => {
            let p = store
                .project_by_name(name)
                .ok_or_else(|| ReportError::UnknownProject(name.clone()))?;
            if !p.is_original() {
                return Err(ReportError::NotOriginal(name.clone()));
            }
            vec![p]
        }
        None => store.original_projects().collect(),
    };

    let mut compositions = Vec::new();
    let mut contributions = Vec::new();
    let mut promotions = Vec::new();
    let mut per_project = Vec::new();
    for project in projects {
        let roles = ProjectRoles::compute(project.project_id, store, options.roles)?;
        if roles.assignments.is_empty() {
            continue;
        }
        let composition = options.wants(Metric::M1).then(|| {
            let c = CommunityComposition::from_assignments(project.project_id, &roles.assignments);
            let report = CompositionReport::from(&c);
            compositions.push(c);
            report
        });
        let contribution = options.wants(Metric::M2).then(|| {
            let s = contrib::stats_from_roles(store, &roles, options.contrib());
            let report = ContributionReport::from(&s);
            contributions.push(s);
            report
        });
        let promotion = options.wants(Metric::M3).then(|| {
            let s = promotion::stats_from_roles(store, &roles);
            let report = PromotionReport::new(&s, store);
            promotions.push(s);
            report
        });
        per_project.push(ProjectReport {
            project: project.into(),
            composition,
            contribution,
            promotion,
            generated_at,
            tool_version: TOOL_VERSION.to_owned(),
        });
    }

    let average_composition = roles::average_composition(&compositions).ok().map(|a| {
        AverageCompositionReport {
            projects: a.projects,
            shares: a.percentages.iter().map(|(&r, &v)| (r, Percent(v))).collect(),
            contributing_share: Percent(a.contributing_share()),
        }
    });
    let aggregate = if options.pooled {
        contrib::aggregate_contribution_pooled(&contributions)
    } else {
        contrib::aggregate_contribution(&contributions)
    };
    let promotion_boxplot = promotion::dataset_promotion_distribution(&promotions).ok();

    let mut diagnostics = BTreeMap::new();
    for d in store.diagnostics() {
        *diagnostics.entry(diagnostic_name(d.kind)).or_insert(0) += 1;
    }
    let linkage = store.commit_linkage();
    let mut metrics = options.metrics.clone();
    metrics.sort();
    metrics.dedup();

    Ok(DatasetReport {
        summary: ingest::dataset_summary(store),
        ingest: IngestSummary {
            diagnostics,
            linked_commits: linkage.linked,
            unlinked_commits: linkage.unlinked,
        },
        metrics,
        average_composition,
        aggregate_contribution: aggregate.ok().as_ref().map(Into::into),
        promotion_boxplot: promotion_boxplot.as_ref().map(Into::into),
        per_project,
        generated_at,
        tool_version: TOOL_VERSION.to_owned(),
    })
}
