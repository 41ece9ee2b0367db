//! Published results for the 2014 MSR mining-challenge GHTorrent subset.
//!
//! The dataset is not bundled. These values let a user who has it check a
//! run: [`compare`] reports each figure next to the computed one with its
//! relative error. Quartile conventions for the published boxplot are not
//! stated, so a relative tolerance of [`TOLERANCE`] is used.

use crate::ingest::DatasetSummary;
use crate::report::DatasetReport;

pub const SUMMARY: DatasetSummary = DatasetSummary {
    project_count: 108_718,
    original_project_count: 91,
    user_count: 499_485,
    issue_count: 150_362,
    pr_count: 78_955,
    commit_count: 555_325,
};

/// Average share of members, collaborators and external contributors.
pub const CONTRIBUTING_SHARE: f64 = 0.13;
pub const MEAN_ACCEPTANCE_RATE: f64 = 0.5947;
pub const MEAN_DECISION_DAYS: f64 = 231.70;
pub const PROMOTION_MEDIAN_DAYS: f64 = 147.83;
pub const PROMOTION_Q1_DAYS: f64 = 74.83;
pub const PROMOTION_Q3_DAYS: f64 = 225.05;
/// The project singled out above the promotion box.
pub const PROMOTION_HIGHLIGHT: (&str, f64) = ("elasticsearch", 413.70);

pub const TOLERANCE: f64 = 0.005;

#[derive(Clone, Debug, PartialEq)]
pub struct Comparison {
    pub name: &'static str,
    pub reference: f64,
    pub computed: Option<f64>,
}

impl Comparison {
    pub fn relative_error(&self) -> Option<f64> {
        self.computed
            .map(|c| (c - self.reference).abs() / self.reference.abs())
    }

    pub fn within_tolerance(&self) -> bool {
        self.relative_error().is_some_and(|e| e <= TOLERANCE)
    }
}

/// Lines up every reference value with its counterpart in `report`.
pub fn compare(report: &DatasetReport) -> Vec<Comparison> {
    let count = |v: usize| Some(v as f64);
    let s = &report.summary;
    let box_ = report.promotion_boxplot.as_ref();
    let agg = report.aggregate_contribution.as_ref();
    vec![
        Comparison { name: "projects", reference: SUMMARY.project_count as f64, computed: count(s.project_count) },
        Comparison {
            name: "original_projects",
            reference: SUMMARY.original_project_count as f64,
            computed: count(s.original_project_count),
        },
        Comparison { name: "users", reference: SUMMARY.user_count as f64, computed: count(s.user_count) },
        Comparison { name: "issues", reference: SUMMARY.issue_count as f64, computed: count(s.issue_count) },
        Comparison { name: "pull_requests", reference: SUMMARY.pr_count as f64, computed: count(s.pr_count) },
        Comparison { name: "commits", reference: SUMMARY.commit_count as f64, computed: count(s.commit_count) },
        Comparison {
            name: "contributing_share",
            reference: CONTRIBUTING_SHARE,
            computed: report.average_composition.as_ref().map(|a| a.contributing_share.0),
        },
        Comparison {
            name: "mean_acceptance_rate",
            reference: MEAN_ACCEPTANCE_RATE,
            computed: agg.map(|a| a.mean_acceptance_rate.0),
        },
        Comparison {
            name: "mean_decision_days",
            reference: MEAN_DECISION_DAYS,
            computed: agg.map(|a| a.mean_decision_days.0),
        },
        Comparison { name: "promotion_q1_days", reference: PROMOTION_Q1_DAYS, computed: box_.map(|b| b.q1.0) },
        Comparison {
            name: "promotion_median_days",
            reference: PROMOTION_MEDIAN_DAYS,
            computed: box_.map(|b| b.median.0),
        },
        Comparison { name: "promotion_q3_days", reference: PROMOTION_Q3_DAYS, computed: box_.map(|b| b.q3.0) },
    ]
}
