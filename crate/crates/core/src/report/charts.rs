//! Static SVG charts and an index page. Everything is inline; no scripts,
//! fonts or stylesheets are fetched.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::{DatasetReport, ReportError};
use crate::roles::Role;

pub const COMPOSITION_FILE: &str = "composition.svg";
pub const CONTRIBUTION_FILE: &str = "contribution.svg";
pub const PROMOTION_FILE: &str = "promotion.svg";
pub const INDEX_FILE: &str = "index.html";

const FONT: &str = "font-family=\"sans-serif\" font-size=\"12\"";

fn color(role: Role) -> &'static str {
    match role {
        Role::Member => "#1f77b4",
        Role::Collaborator => "#ff7f0e",
        Role::ExternalContributor => "#2ca02c",
        Role::ExternalUser => "#9e9e9e",
    }
}

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&#39;"),
            _ => out.push(c),
        }
    }
    out
}

/// Fixed three-decimal coordinates; `-0.000` is folded into `0.000` so output
/// never depends on the sign of a rounding residue.
fn n(v: f64) -> String {
    let s = format!("{v:.3}");
    if s == "-0.000" {
        "0.000".into()
    } else {
        s
    }
}

fn open_svg(out: &mut String, width: f64, height: f64, title: &str) {
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">",
        w = n(width),
        h = n(height)
    );
    let _ = writeln!(out, "<title>{}</title>", escape(title));
    let _ = writeln!(out, "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>");
}

fn text(out: &mut String, x: f64, y: f64, anchor: &str, body: &str) {
    let _ = writeln!(
        out,
        "<text x=\"{}\" y=\"{}\" text-anchor=\"{anchor}\" {FONT}>{}</text>",
        n(x),
        n(y),
        escape(body)
    );
}

fn point_on_circle(cx: f64, cy: f64, r: f64, turns: f64) -> (f64, f64) {
    // Zero turns is twelve o'clock; sectors advance clockwise.
    let angle = turns * 2.0 * PI - PI / 2.0;
    (cx + r * angle.cos(), cy + r * angle.sin())
}

/// Pie chart of role shares. Every non-empty sector is a `<path class="sector">`
/// of the form `M cx,cy L x1,y1 A r,r 0 large,1 x2,y2 Z`; a single 100% share
/// is drawn as a circle.
fn pie(out: &mut String, cx: f64, cy: f64, r: f64, shares: &[(Role, f64, String)]) {
    let mut start = 0.0;
    for (role, share, shown) in shares {
        if *share <= 0.0 {
            continue;
        }
        let label = format!("{}: {}%", role.label(), shown);
        if *share >= 1.0 - 1e-12 {
            let _ = writeln!(
                out,
                "<circle class=\"sector\" cx=\"{}\" cy=\"{}\" r=\"{}\" fill=\"{}\"><title>{}</title></circle>",
                n(cx),
                n(cy),
                n(r),
                color(*role),
                escape(&label)
            );
            start += share;
            continue;
        }
        let end = start + share;
        let (x1, y1) = point_on_circle(cx, cy, r, start);
        let (x2, y2) = point_on_circle(cx, cy, r, end);
        let large = if *share > 0.5 { 1 } else { 0 };
        let _ = writeln!(
            out,
            "<path class=\"sector\" data-role=\"{}\" d=\"M {},{} L {},{} A {},{} 0 {large},1 {},{} Z\" fill=\"{}\" stroke=\"#ffffff\"><title>{}</title></path>",
            role.as_str(),
            n(cx),
            n(cy),
            n(x1),
            n(y1),
            n(r),
            n(r),
            n(x2),
            n(y2),
            color(*role),
            escape(&label)
        );
        start = end;
    }
}

fn legend(out: &mut String, x: f64, y: f64) {
    for (i, role) in Role::ALL.iter().enumerate() {
        let yy = y + i as f64 * 18.0;
        let _ = writeln!(
            out,
            "<rect x=\"{}\" y=\"{}\" width=\"12\" height=\"12\" fill=\"{}\"/>",
            n(x),
            n(yy),
            color(*role)
        );
        text(out, x + 18.0, yy + 10.0, "start", role.label());
    }
}

/// Dataset-average pie followed by one stacked bar per project.
pub fn render_composition_svg(report: &DatasetReport) -> String {
    let bar_h = 18.0;
    let top = 300.0;
    let height = top + 30.0 + report.per_project.len() as f64 * (bar_h + 8.0) + 20.0;
    let width = 760.0;
    let mut out = String::new();
    open_svg(&mut out, width, height, "Community composition");
    text(&mut out, 20.0, 24.0, "start", "Community composition (average over projects)");

    match &report.average_composition {
        Some(avg) => {
            let shares: Vec<(Role, f64, String)> = Role::ALL
                .iter()
                .map(|r| {
                    let p = avg.shares.get(r).copied().unwrap_or(super::Percent(0.0));
                    (*r, p.0, p.display())
                })
                .collect();
            pie(&mut out, 150.0, 160.0, 110.0, &shares);
            legend(&mut out, 300.0, 80.0);
            text(
                &mut out,
                300.0,
                170.0,
                "start",
                &format!(
                    "Contributing share: {}% across {} projects",
                    avg.contributing_share.display(),
                    avg.projects
                ),
            );
        }
        None => text(&mut out, 150.0, 160.0, "middle", "no classified users"),
    }

    text(&mut out, 20.0, top, "start", "Per project");
    let bar_x = 240.0;
    let bar_w = 480.0;
    for (i, p) in report.per_project.iter().enumerate() {
        let y = top + 14.0 + i as f64 * (bar_h + 8.0);
        text(&mut out, bar_x - 8.0, y + 13.0, "end", &p.project.full_name);
        let Some(c) = &p.composition else { continue };
        let mut x = bar_x;
        for role in Role::ALL {
            let share = c.shares.get(&role).map(|s| s.0).unwrap_or(0.0);
            if share <= 0.0 {
                continue;
            }
            let w = share * bar_w;
            let _ = writeln!(
                out,
                "<rect class=\"segment\" x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\"><title>{}</title></rect>",
                n(x),
                n(y),
                n(w),
                n(bar_h),
                color(role),
                escape(&format!(
                    "{} {}: {} ({}%)",
                    p.project.full_name,
                    role.label(),
                    c.counts.get(&role).copied().unwrap_or(0),
                    c.shares[&role].display()
                ))
            );
            x += w;
        }
    }
    out.push_str("</svg>\n");
    out
}

/// Accepted/rejected bars per project above a panel of mean decision times.
pub fn render_contribution_svg(report: &DatasetReport) -> String {
    let rows: Vec<_> = report
        .per_project
        .iter()
        .filter_map(|p| p.contribution.as_ref().map(|c| (p.project.full_name.as_str(), c)))
        .collect();
    let row_h = 22.0;
    let panel_h = rows.len() as f64 * row_h + 20.0;
    let width = 760.0;
    let height = 70.0 + 2.0 * (panel_h + 40.0);
    let label_x = 232.0;
    let bar_x = 240.0;
    let bar_w = 440.0;

    let mut out = String::new();
    open_svg(&mut out, width, height, "External contributions");
    let headline = match &report.aggregate_contribution {
        Some(a) => format!(
            "Accepted: {}% of external pull requests; mean decision time {} days ({} projects)",
            a.mean_acceptance_rate.display(),
            a.mean_decision_days.display(),
            a.projects_included
        ),
        None => "No decided external pull requests".to_owned(),
    };
    text(&mut out, 20.0, 24.0, "start", &headline);

    let top1 = 60.0;
    text(&mut out, 20.0, top1, "start", "Accepted and rejected external pull requests");
    let max_prs = rows.iter().map(|(_, c)| c.accepted + c.rejected).max().unwrap_or(0).max(1) as f64;
    for (i, (name, c)) in rows.iter().enumerate() {
        let y = top1 + 12.0 + i as f64 * row_h;
        text(&mut out, label_x, y + 13.0, "end", name);
        let wa = c.accepted as f64 / max_prs * bar_w;
        let wr = c.rejected as f64 / max_prs * bar_w;
        let _ = writeln!(
            out,
            "<rect class=\"accepted\" x=\"{}\" y=\"{}\" width=\"{}\" height=\"16\" fill=\"#2ca02c\"><title>accepted: {}</title></rect>",
            n(bar_x),
            n(y),
            n(wa),
            c.accepted
        );
        let _ = writeln!(
            out,
            "<rect class=\"rejected\" x=\"{}\" y=\"{}\" width=\"{}\" height=\"16\" fill=\"#d62728\"><title>rejected: {}</title></rect>",
            n(bar_x + wa),
            n(y),
            n(wr),
            c.rejected
        );
        let rate = c
            .acceptance_rate
            .map(|r| format!("{}%", r.display()))
            .unwrap_or_else(|| "n/a".into());
        text(&mut out, bar_x + wa + wr + 6.0, y + 13.0, "start", &rate);
    }

    let top2 = top1 + panel_h + 40.0;
    text(&mut out, 20.0, top2, "start", "Mean decision time (days)");
    let max_days = rows
        .iter()
        .filter_map(|(_, c)| c.mean_decision_days.map(|d| d.0))
        .fold(0.0_f64, f64::max);
    for (i, (name, c)) in rows.iter().enumerate() {
        let y = top2 + 12.0 + i as f64 * row_h;
        text(&mut out, label_x, y + 13.0, "end", name);
        let Some(days) = c.mean_decision_days else {
            text(&mut out, bar_x, y + 13.0, "start", "n/a");
            continue;
        };
        let w = if max_days > 0.0 { days.0 / max_days * bar_w } else { 0.0 };
        let _ = writeln!(
            out,
            "<rect class=\"latency\" x=\"{}\" y=\"{}\" width=\"{}\" height=\"16\" fill=\"#1f77b4\"><title>{} days</title></rect>",
            n(bar_x),
            n(y),
            n(w),
            days.display()
        );
        text(&mut out, bar_x + w + 6.0, y + 13.0, "start", &days.display());
    }
    out.push_str("</svg>\n");
    out
}

/// Vertical boxplot of per-project mean promotion durations. Outliers and
/// every point above the box carry their project name.
pub fn render_promotion_svg(report: &DatasetReport) -> String {
    let width = 560.0;
    let height = 460.0;
    let mut out = String::new();
    open_svg(&mut out, width, height, "Time to become a collaborator");
    text(&mut out, 20.0, 24.0, "start", "Days from first action to first management action");

    let Some(b) = &report.promotion_boxplot else {
        text(&mut out, width / 2.0, height / 2.0, "middle", "no promoted collaborators");
        out.push_str("</svg>\n");
        return out;
    };

    let (plot_top, plot_bottom) = (50.0, 420.0);
    let hi = b.max.0.max(b.whisker_high.0);
    let lo = b.min.0.min(0.0);
    let span = if hi > lo { hi - lo } else { 1.0 };
    let y = |v: f64| plot_bottom - (v - lo) / span * (plot_bottom - plot_top);
    let axis_x = 70.0;
    let cx = 200.0;
    let half = 50.0;

    let _ = writeln!(
        out,
        "<line x1=\"{a}\" y1=\"{}\" x2=\"{a}\" y2=\"{}\" stroke=\"#000000\"/>",
        n(plot_top),
        n(plot_bottom),
        a = n(axis_x)
    );
    for i in 0..=4 {
        let v = lo + span * i as f64 / 4.0;
        let yy = y(v);
        let _ = writeln!(
            out,
            "<line x1=\"{}\" y1=\"{yy}\" x2=\"{}\" y2=\"{yy}\" stroke=\"#000000\"/>",
            n(axis_x - 4.0),
            n(axis_x),
            yy = n(yy)
        );
        text(&mut out, axis_x - 8.0, yy + 4.0, "end", &super::Days(v).display());
    }

    let line = |out: &mut String, x1: f64, y1: f64, x2: f64, y2: f64, class: &str| {
        let _ = writeln!(
            out,
            "<line class=\"{class}\" x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#000000\"/>",
            n(x1),
            n(y1),
            n(x2),
            n(y2)
        );
    };
    line(&mut out, cx, y(b.whisker_high.0), cx, y(b.q3.0), "whisker");
    line(&mut out, cx, y(b.q1.0), cx, y(b.whisker_low.0), "whisker");
    line(&mut out, cx - half / 2.0, y(b.whisker_high.0), cx + half / 2.0, y(b.whisker_high.0), "cap");
    line(&mut out, cx - half / 2.0, y(b.whisker_low.0), cx + half / 2.0, y(b.whisker_low.0), "cap");
    let _ = writeln!(
        out,
        "<rect class=\"box\" x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"#aec7e8\" stroke=\"#000000\"><title>Q1 {} / Q3 {}</title></rect>",
        n(cx - half),
        n(y(b.q3.0)),
        n(2.0 * half),
        n(y(b.q1.0) - y(b.q3.0)),
        b.q1.display(),
        b.q3.display()
    );
    line(&mut out, cx - half, y(b.median.0), cx + half, y(b.median.0), "median");
    text(&mut out, cx + half + 8.0, y(b.median.0) + 4.0, "start", &format!("median {}", b.median.display()));

    let mut labelled: Vec<(&str, f64, bool)> = Vec::new();
    for p in &b.above_box {
        let outlier = b.outliers.iter().any(|o| o.label == p.label);
        labelled.push((&p.label, p.value.0, outlier));
    }
    for o in &b.outliers {
        if !labelled.iter().any(|(l, _, _)| *l == o.label) {
            labelled.push((&o.label, o.value.0, true));
        }
    }
    labelled.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(b.0)));
    let mut last_label_y = f64::INFINITY;
    for (label, value, outlier) in labelled {
        let yy = y(value);
        let class = if outlier { "outlier" } else { "point" };
        let _ = writeln!(
            out,
            "<circle class=\"{class}\" cx=\"{}\" cy=\"{}\" r=\"4\" fill=\"{}\" stroke=\"#000000\"/>",
            n(cx),
            n(yy),
            if outlier { "#ffffff" } else { "#000000" }
        );
        // Keep labels at least one line apart.
        let ly = (yy + 4.0).min(last_label_y - 13.0);
        last_label_y = ly;
        text(
            &mut out,
            cx + half + 8.0,
            ly,
            "start",
            &format!("{label} ({})", super::Days(value).display()),
        );
    }
    out.push_str("</svg>\n");
    out
}

fn render_index(report: &DatasetReport) -> String {
    let mut out = String::new();
    out.push_str("<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n");
    out.push_str("<title>Project openness report</title>\n");
    out.push_str("<style>body{font-family:sans-serif;margin:2em}table{border-collapse:collapse}td,th{border:1px solid #ccc;padding:2px 8px;text-align:right}td:first-child{text-align:left}</style>\n");
    out.push_str("</head>\n<body>\n<h1>Project openness report</h1>\n");
    let s = &report.summary;
    let _ = writeln!(
        out,
        "<p>{} projects ({} original), {} users, {} issues, {} pull requests, {} commits. Generated {} by version {}.</p>",
        s.project_count,
        s.original_project_count,
        s.user_count,
        s.issue_count,
        s.pr_count,
        s.commit_count,
        escape(&crate::ingest::timestamp::format(&report.generated_at)),
        escape(&report.tool_version)
    );
    for (file, heading) in [
        (COMPOSITION_FILE, "Community composition"),
        (CONTRIBUTION_FILE, "External contributions"),
        (PROMOTION_FILE, "Time to become a collaborator"),
    ] {
        let _ = writeln!(
            out,
            "<h2><a href=\"{file}\">{heading}</a></h2>\n<p><img src=\"{file}\" alt=\"{heading}\"></p>"
        );
    }
    out.push_str("<h2>Per project</h2>\n<table>\n<tr><th>Project</th><th>Contributing share</th><th>Acceptance rate</th><th>Decision days</th><th>Promotion days</th></tr>\n");
    let na = || "n/a".to_owned();
    for p in &report.per_project {
        let contributing = p
            .composition
            .as_ref()
            .map(|c| format!("{}%", c.contributing_share.display()))
            .unwrap_or_else(na);
        let rate = p
            .contribution
            .as_ref()
            .and_then(|c| c.acceptance_rate)
            .map(|r| format!("{}%", r.display()))
            .unwrap_or_else(na);
        let decision = p
            .contribution
            .as_ref()
            .and_then(|c| c.mean_decision_days)
            .map(|d| d.display())
            .unwrap_or_else(na);
        let promotion = p
            .promotion
            .as_ref()
            .and_then(|m| m.mean_duration_days)
            .map(|d| d.display())
            .unwrap_or_else(na);
        let _ = writeln!(
            out,
            "<tr><td>{}</td><td>{contributing}</td><td>{rate}</td><td>{decision}</td><td>{promotion}</td></tr>",
            escape(&p.project.full_name)
        );
    }
    out.push_str("</table>\n</body>\n</html>\n");
    out
}

/// Writes the three SVG charts and `index.html` into `out_dir`, returning the
/// paths in that order.
pub fn emit_charts(report: &DatasetReport, out_dir: impl AsRef<Path>) -> Result<Vec<PathBuf>, ReportError> {
    let out_dir = out_dir.as_ref();
    let io = |path: &Path, source| ReportError::Io {
        path: path.display().to_string(),
        source,
    };
    fs::create_dir_all(out_dir).map_err(|e| io(out_dir, e))?;
    let files = [
        (COMPOSITION_FILE, render_composition_svg(report)),
        (CONTRIBUTION_FILE, render_contribution_svg(report)),
        (PROMOTION_FILE, render_promotion_svg(report)),
        (INDEX_FILE, render_index(report)),
    ];
    let mut written = Vec::with_capacity(files.len());
    for (name, body) in files {
        let path = out_dir.join(name);
        fs::write(&path, body).map_err(|e| io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn escaping() {
        assert_eq!(escape("a<b & \"c\""), "a&lt;b &amp; &quot;c&quot;");
    }

    #[test]
    fn negative_zero_is_folded() {
        assert_eq!(n(-0.0001), "0.000");
        assert_eq!(n(1.23456), "1.235");
    }

    #[test]
    fn quarter_sectors_span_ninety_degrees() {
        let shares: Vec<_> = Role::ALL.iter().map(|r| (*r, 0.25, "25.00".to_owned())).collect();
        let mut out = String::new();
        pie(&mut out, 100.0, 100.0, 50.0, &shares);
        assert_eq!(out.matches("<path class=\"sector\"").count(), 4);
    }

    #[test]
    fn full_share_is_a_circle() {
        let shares = vec![(Role::ExternalUser, 1.0, "100.00".to_owned())];
        let mut out = String::new();
        pie(&mut out, 100.0, 100.0, 50.0, &shares);
        assert!(out.starts_with("<circle class=\"sector\""));
    }
}
