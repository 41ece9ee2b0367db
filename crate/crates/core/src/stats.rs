//! Descriptive statistics: mean, quantiles and boxplot summaries.
//!
//! Quantiles interpolate linearly between order statistics at rank
//! `(n - 1) * p` (R's type 7, numpy's default). Outlier fences sit at
//! `1.5 * IQR` beyond the quartiles.

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

const MILLIS_PER_DAY: f64 = 86_400_000.0;

/// Signed elapsed time from `from` to `to` in fractional days.
pub fn days_between(from: DateTime<Utc>, to: DateTime<Utc>) -> f64 {
    (to - from).num_milliseconds() as f64 / MILLIS_PER_DAY
}

#[derive(Debug, Error, PartialEq)]
pub enum StatsError {
    #[error("sample is empty")]
    EmptyInput,
    #[error("sample contains a non-finite value")]
    NonFiniteValue,
    #[error("probability {0} is outside [0, 1]")]
    InvalidProbability(f64),
}

fn check(sample: &[f64]) -> Result<(), StatsError> {
    if sample.is_empty() {
        return Err(StatsError::EmptyInput);
    }
    if sample.iter().any(|v| !v.is_finite()) {
        return Err(StatsError::NonFiniteValue);
    }
    Ok(())
}

/// Arithmetic mean. Summation runs over the sorted sample so the result is
/// the same for every permutation of the input.
pub fn mean(sample: &[f64]) -> Result<f64, StatsError> {
    check(sample)?;
    let sorted = sorted(sample);
    Ok(sorted.iter().sum::<f64>() / sorted.len() as f64)
}

fn sorted(sample: &[f64]) -> Vec<f64> {
    let mut v = sample.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

pub fn quantile(sample: &[f64], p: f64) -> Result<f64, StatsError> {
    check(sample)?;
    if !(0.0..=1.0).contains(&p) {
        return Err(StatsError::InvalidProbability(p));
    }
    Ok(quantile_sorted(&sorted(sample), p))
}

fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    let frac = h - lo as f64;
    if frac == 0.0 {
        sorted[lo]
    } else {
        sorted[lo] + frac * (sorted[hi] - sorted[lo])
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabeledValue {
    pub label: String,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxplotSummary {
    pub n: usize,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub iqr: f64,
    /// Most extreme observation at or above `q1 - 1.5 * iqr`, never above `q1`.
    pub whisker_low: f64,
    /// Most extreme observation at or below `q3 + 1.5 * iqr`, never below `q3`.
    pub whisker_high: f64,
    /// Observations beyond the whiskers, ascending by value.
    pub outliers: Vec<LabeledValue>,
    /// Observations strictly above `q3`, fence outliers included.
    pub above_box: Vec<LabeledValue>,
}

impl BoxplotSummary {
    pub fn lower_fence(&self) -> f64 {
        self.q1 - 1.5 * self.iqr
    }

    pub fn upper_fence(&self) -> f64 {
        self.q3 + 1.5 * self.iqr
    }

    pub fn is_above_box(&self, label: &str) -> bool {
        self.above_box.iter().any(|v| v.label == label)
    }

    pub fn is_outlier(&self, label: &str) -> bool {
        self.outliers.iter().any(|v| v.label == label)
    }
}

pub fn boxplot_summary<L: AsRef<str>>(sample: &[(L, f64)]) -> Result<BoxplotSummary, StatsError> {
    let values: Vec<f64> = sample.iter().map(|(_, v)| *v).collect();
    check(&values)?;
    let values = sorted(&values);
    let q1 = quantile_sorted(&values, 0.25);
    let median = quantile_sorted(&values, 0.5);
    let q3 = quantile_sorted(&values, 0.75);
    let iqr = q3 - q1;
    let (low_fence, high_fence) = (q1 - 1.5 * iqr, q3 + 1.5 * iqr);

    // With few points no observation may fall between the fence and the box;
    // the whisker then collapses onto the box edge.
    let whisker_low = values
        .iter()
        .copied()
        .find(|&v| v >= low_fence)
        .map_or(q1, |v| v.min(q1));
    let whisker_high = values
        .iter()
        .rev()
        .copied()
        .find(|&v| v <= high_fence)
        .map_or(q3, |v| v.max(q3));

    let mut labeled: Vec<LabeledValue> = sample
        .iter()
        .map(|(l, v)| LabeledValue {
            label: l.as_ref().to_owned(),
            value: *v,
        })
        .collect();
    labeled.sort_by(|a, b| a.value.total_cmp(&b.value).then_with(|| a.label.cmp(&b.label)));
    let outliers = labeled
        .iter()
        .filter(|v| v.value < whisker_low || v.value > whisker_high)
        .cloned()
        .collect();
    let above_box = labeled.iter().filter(|v| v.value > q3).cloned().collect();

    Ok(BoxplotSummary {
        n: values.len(),
        min: values[0],
        q1,
        median,
        q3,
        max: values[values.len() - 1],
        iqr,
        whisker_low,
        whisker_high,
        outliers,
        above_box,
    })
}
