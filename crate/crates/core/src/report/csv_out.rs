//! CSV tables. Real-valued columns hold the full-precision raw values.

use std::fs;
use std::path::{Path, PathBuf};

use super::{DatasetReport, ReportError};
use crate::roles::Role;

pub const PROJECTS_FILE: &str = "projects.csv";
pub const PROMOTIONS_FILE: &str = "promotions.csv";
pub const SUMMARY_FILE: &str = "summary.csv";

fn opt(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn io_error(path: &Path, e: impl Into<std::io::Error>) -> ReportError {
    ReportError::Io {
        path: path.display().to_string(),
        source: e.into(),
    }
}

fn write_table(path: &Path, header: &[&str], rows: Vec<Vec<String>>) -> Result<(), ReportError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| io_error(path, e))?;
    w.write_record(header).map_err(|e| io_error(path, e))?;
    for row in rows {
        w.write_record(&row).map_err(|e| io_error(path, e))?;
    }
    w.flush().map_err(|e| io_error(path, e))
}

/// Writes `projects.csv`, `promotions.csv` and `summary.csv` into `out_dir`.
pub fn emit_csv(report: &DatasetReport, out_dir: impl AsRef<Path>) -> Result<Vec<PathBuf>, ReportError> {
    let out_dir = out_dir.as_ref();
    fs::create_dir_all(out_dir).map_err(|e| io_error(out_dir, e))?;

    let projects = out_dir.join(PROJECTS_FILE);
    let mut header = vec!["project_id", "full_name"];
    for role in Role::ALL {
        header.push(match role {
            Role::Member => "members",
            Role::Collaborator => "collaborators",
            Role::ExternalContributor => "external_contributors",
            Role::ExternalUser => "external_users",
        });
    }
    for role in Role::ALL {
        header.push(match role {
            Role::Member => "member_share",
            Role::Collaborator => "collaborator_share",
            Role::ExternalContributor => "external_contributor_share",
            Role::ExternalUser => "external_user_share",
        });
    }
    header.extend([
        "total_external_prs",
        "accepted",
        "rejected",
        "pending_excluded",
        "invalid_excluded",
        "acceptance_rate",
        "mean_decision_days",
        "promoted_collaborators",
        "filtered_collaborators",
        "mean_promotion_days",
    ]);
    let rows = report
        .per_project
        .iter()
        .map(|p| {
            let mut row = vec![p.project.project_id.to_string(), p.project.full_name.clone()];
            for role in Role::ALL {
                row.push(
                    p.composition
                        .as_ref()
                        .map(|c| c.counts.get(&role).copied().unwrap_or(0).to_string())
                        .unwrap_or_default(),
                );
            }
            for role in Role::ALL {
                row.push(opt(p
                    .composition
                    .as_ref()
                    .and_then(|c| c.shares.get(&role))
                    .map(|s| s.0)));
            }
            match &p.contribution {
                Some(c) => row.extend([
                    c.total_external_prs.to_string(),
                    c.accepted.to_string(),
                    c.rejected.to_string(),
                    c.pending_excluded.to_string(),
                    c.invalid_excluded.to_string(),
                    opt(c.acceptance_rate.map(|r| r.0)),
                    opt(c.mean_decision_days.map(|d| d.0)),
                ]),
                None => row.extend(std::iter::repeat_n(String::new(), 7)),
            }
            match &p.promotion {
                Some(m) => row.extend([
                    m.records.len().to_string(),
                    m.filtered.to_string(),
                    opt(m.mean_duration_days.map(|d| d.0)),
                ]),
                None => row.extend(std::iter::repeat_n(String::new(), 3)),
            }
            row
        })
        .collect();
    write_table(&projects, &header, rows)?;

    let promotions = out_dir.join(PROMOTIONS_FILE);
    let rows = report
        .per_project
        .iter()
        .flat_map(|p| {
            p.promotion.iter().flat_map(move |m| {
                m.records.iter().map(move |r| {
                    vec![
                        p.project.project_id.to_string(),
                        p.project.full_name.clone(),
                        r.user.to_string(),
                        r.login.clone(),
                        crate::ingest::timestamp::format(&r.first_action_at),
                        crate::ingest::timestamp::format(&r.first_management_at),
                        r.duration_days.0.to_string(),
                    ]
                })
            })
        })
        .collect();
    write_table(
        &promotions,
        &[
            "project_id",
            "full_name",
            "user_id",
            "login",
            "first_action_at",
            "first_management_at",
            "duration_days",
        ],
        rows,
    )?;

    let summary = out_dir.join(SUMMARY_FILE);
    let s = &report.summary;
    let mut rows: Vec<Vec<String>> = [
        ("project_count", s.project_count),
        ("original_project_count", s.original_project_count),
        ("user_count", s.user_count),
        ("issue_count", s.issue_count),
        ("pr_count", s.pr_count),
        ("commit_count", s.commit_count),
    ]
    .iter()
    .map(|(k, v)| vec![k.to_string(), v.to_string()])
    .collect();
    if let Some(a) = &report.average_composition {
        for (role, share) in &a.shares {
            rows.push(vec![format!("average_{}_share", role.as_str()), share.0.to_string()]);
        }
        rows.push(vec!["average_contributing_share".into(), a.contributing_share.0.to_string()]);
    }
    if let Some(c) = &report.aggregate_contribution {
        rows.push(vec!["mean_acceptance_rate".into(), c.mean_acceptance_rate.0.to_string()]);
        rows.push(vec!["mean_decision_days".into(), c.mean_decision_days.0.to_string()]);
    }
    if let Some(b) = &report.promotion_boxplot {
        for (k, v) in [
            ("promotion_q1_days", b.q1),
            ("promotion_median_days", b.median),
            ("promotion_q3_days", b.q3),
        ] {
            rows.push(vec![k.into(), v.0.to_string()]);
        }
    }
    write_table(&summary, &["metric", "value"], rows)?;

    Ok(vec![projects, promotions, summary])
}
