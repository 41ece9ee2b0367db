//! The statistics helpers on their own: quantiles and a labeled boxplot.
//!
//! `cargo run --example boxplot_stats -- [value ...]`

use openness::stats::{boxplot_summary, mean, quantile};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut values: Vec<f64> = std::env::args().skip(1).map(|a| a.parse()).collect::<Result<_, _>>()?;
    if values.is_empty() {
        values = vec![12.0, 30.5, 47.0, 51.0, 74.8, 95.0, 147.8, 180.2, 225.0, 413.7];
    }
    let labelled: Vec<(String, f64)> = values.iter().enumerate().map(|(i, &v)| (format!("p{i}"), v)).collect();

    println!("mean      {:.3}", mean(&values)?);
    for p in [0.1, 0.25, 0.5, 0.75, 0.9] {
        println!("q({p:.2})   {:.3}", quantile(&values, p)?);
    }

    let b = boxplot_summary(&labelled)?;
    println!("\nmin {:.2}  q1 {:.2}  median {:.2}  q3 {:.2}  max {:.2}", b.min, b.q1, b.median, b.q3, b.max);
    println!("fences [{:.2}, {:.2}]  whiskers [{:.2}, {:.2}]", b.lower_fence(), b.upper_fence(), b.whisker_low, b.whisker_high);
    for o in &b.outliers {
        println!("outlier {} = {}", o.label, o.value);
    }
    Ok(())
}
