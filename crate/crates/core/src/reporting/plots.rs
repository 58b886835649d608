//! Per-task summaries and their CSV and SVG renderings.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{box_stats, convergence_stats, BoxStats, ConvergenceStats, StepStats};
use crate::error::{Error, Result};
use crate::harness::{RunRecord, TaskId};
use crate::optimizers::Algorithm;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizerSummary {
    pub optimizer: Algorithm,
    pub n_runs: usize,
    pub convergence: ConvergenceStats,
    pub finals: BoxStats,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaskReport {
    pub task: TaskId,
    /// One entry per optimizer, in [`Algorithm::ALL`] order.
    pub optimizers: Vec<OptimizerSummary>,
}

/// Groups successful runs by task and optimizer. Failed runs are skipped; a
/// group holding a single run gets a zero-width band.
pub fn summarize(records: &[RunRecord]) -> Result<Vec<TaskReport>> {
    let mut groups: BTreeMap<TaskId, BTreeMap<Algorithm, Vec<RunRecord>>> = BTreeMap::new();
    for r in records.iter().filter(|r| r.is_ok()) {
        groups
            .entry(r.task())
            .or_default()
            .entry(r.algorithm())
            .or_default()
            .push(r.clone());
    }
    groups
        .into_iter()
        .map(|(task, by_opt)| {
            let optimizers = by_opt
                .into_iter()
                .map(|(optimizer, runs)| summarize_group(optimizer, &runs))
                .collect::<Result<_>>()?;
            Ok(TaskReport { task, optimizers })
        })
        .collect()
}

fn summarize_group(optimizer: Algorithm, runs: &[RunRecord]) -> Result<OptimizerSummary> {
    let convergence = if runs.len() == 1 {
        ConvergenceStats {
            steps: runs[0]
                .trace
                .iter()
                .map(|&mean| StepStats { mean, ci_half: 0.0, n: 1 })
                .collect(),
        }
    } else {
        convergence_stats(runs)?
    };
    let finals: Vec<f64> = runs.iter().filter_map(|r| r.final_loss).collect();
    Ok(OptimizerSummary {
        optimizer,
        n_runs: runs.len(),
        convergence,
        finals: box_stats(&finals)?,
    })
}

/// Writes `{task}_convergence.csv`, `{task}_box.csv`, `{task}_convergence.svg`
/// and `{task}_box.svg` for every report into `dir` and returns the paths.
/// Nothing is written when any report has no optimizers.
pub fn emit_plots(reports: &[TaskReport], dir: &Path) -> Result<Vec<PathBuf>> {
    if reports.is_empty() || reports.iter().any(|r| r.optimizers.is_empty()) {
        return Err(Error::Empty("plot emission"));
    }
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    for report in reports {
        let files = [
            ("convergence.csv", convergence_csv(report)),
            ("box.csv", box_csv(report)),
            ("convergence.svg", convergence_svg(report)),
            ("box.svg", box_svg(report)),
        ];
        for (suffix, body) in files {
            let path = dir.join(format!("{}_{suffix}", report.task));
            fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
            written.push(path);
        }
    }
    Ok(written)
}

fn convergence_csv(report: &TaskReport) -> String {
    let mut out = String::from("step,optimizer,mean,ci_half\n");
    for o in &report.optimizers {
        for (step, s) in o.convergence.steps.iter().enumerate() {
            let _ = writeln!(out, "{step},{},{},{}", o.optimizer, s.mean, s.ci_half);
        }
    }
    out
}

fn box_csv(report: &TaskReport) -> String {
    let mut out =
        String::from("optimizer,n_runs,median,q1,q3,whisker_low,whisker_high,outliers\n");
    for o in &report.optimizers {
        let b = &o.finals;
        let outliers: Vec<String> = b.outliers.iter().map(f64::to_string).collect();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            o.optimizer,
            o.n_runs,
            b.median,
            b.q1,
            b.q3,
            b.whisker_low,
            b.whisker_high,
            outliers.join(";")
        );
    }
    out
}

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;
const PALETTE: [&str; 7] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2",
];

fn color(a: Algorithm) -> &'static str {
    let i = Algorithm::ALL.iter().position(|&x| x == a).unwrap_or(0);
    PALETTE[i % PALETTE.len()]
}

/// Linear map from data space onto the plot rectangle.
struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn new(x: (f64, f64), y: (f64, f64)) -> Self {
        let pad = |(lo, hi): (f64, f64)| {
            if hi > lo && (hi - lo).is_finite() {
                let m = 0.05 * (hi - lo);
                (lo - m, hi + m)
            } else {
                (lo - 0.5, lo + 0.5)
            }
        };
        let x = if x.1 > x.0 { x } else { (x.0 - 0.5, x.0 + 0.5) };
        Frame { x, y: pad(y) }
    }

    fn px(&self, v: f64) -> f64 {
        LEFT + (v - self.x.0) / (self.x.1 - self.x.0) * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, v: f64) -> f64 {
        HEIGHT - BOTTOM - (v - self.y.0) / (self.y.1 - self.y.0) * (HEIGHT - TOP - BOTTOM)
    }
}

fn svg_open(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
}

fn axes(out: &mut String, f: &Frame, x_label: &str, y_label: &str, x_ticks: bool) {
    let (x0, x1) = (LEFT, WIDTH - RIGHT);
    let (y0, y1) = (HEIGHT - BOTTOM, TOP);
    let _ = writeln!(
        out,
        r#"<path d="M{x0} {y1} L{x0} {y0} L{x1} {y0}" fill="none" stroke="black"/>"#
    );
    for i in 0..=4 {
        let v = f.y.0 + (f.y.1 - f.y.0) * i as f64 / 4.0;
        let y = f.py(v);
        let _ = writeln!(
            out,
            r#"<line x1="{}" y1="{y:.2}" x2="{x0}" y2="{y:.2}" stroke="black"/><text x="{}" y="{:.2}" text-anchor="end">{}</text>"#,
            x0 - 4.0,
            x0 - 6.0,
            y + 4.0,
            tick(v)
        );
        if x_ticks {
            let v = f.x.0 + (f.x.1 - f.x.0) * i as f64 / 4.0;
            let x = f.px(v);
            let _ = writeln!(
                out,
                r#"<line x1="{x:.2}" y1="{y0}" x2="{x:.2}" y2="{}" stroke="black"/><text x="{x:.2}" y="{}" text-anchor="middle">{}</text>"#,
                y0 + 4.0,
                y0 + 18.0,
                tick(v)
            );
        }
    }
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 10.0,
        escape(x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="18" y="{}" text-anchor="middle" transform="rotate(-90 18 {})">{}</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        escape(y_label)
    );
}

fn tick(v: f64) -> String {
    if v == 0.0 || (1e-3..1e4).contains(&v.abs()) {
        format!("{:.3}", v)
    } else {
        format!("{:.2e}", v)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn loss_label(task: TaskId) -> &'static str {
    if task.is_generative() {
        "negative log-likelihood"
    } else {
        "energy"
    }
}

fn legend(out: &mut String, index: usize, a: Algorithm) {
    let x = WIDTH - RIGHT + 16.0;
    let y = TOP + 10.0 + 18.0 * index as f64;
    let _ = writeln!(
        out,
        r#"<rect x="{x}" y="{}" width="12" height="12" fill="{}"/><text x="{}" y="{}">{a}</text>"#,
        y - 10.0,
        color(a),
        x + 18.0,
        y
    );
}

fn finite_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

fn convergence_svg(report: &TaskReport) -> String {
    let max_step = report
        .optimizers
        .iter()
        .map(|o| o.convergence.steps.len().saturating_sub(1))
        .max()
        .unwrap_or(0);
    let (lo, hi) = finite_range(report.optimizers.iter().flat_map(|o| {
        o.convergence
            .steps
            .iter()
            .flat_map(|s| [s.mean - s.ci_half, s.mean + s.ci_half])
    }));
    let (lo, hi) = if lo.is_finite() { (lo, hi) } else { (0.0, 1.0) };
    let f = Frame::new((0.0, max_step as f64), (lo, hi));

    let mut out = String::new();
    svg_open(&mut out, &format!("{}: mean loss with 95% CI", report.task));
    axes(&mut out, &f, "step", loss_label(report.task), true);
    for (i, o) in report.optimizers.iter().enumerate() {
        let steps = &o.convergence.steps;
        let point = |s: usize, v: f64| format!("{:.2},{:.2}", f.px(s as f64), f.py(v));
        let upper = steps.iter().enumerate().map(|(s, st)| point(s, st.mean + st.ci_half));
        let lower = steps.iter().enumerate().rev().map(|(s, st)| point(s, st.mean - st.ci_half));
        let band: Vec<String> = upper.chain(lower).collect();
        let line: Vec<String> = steps.iter().enumerate().map(|(s, st)| point(s, st.mean)).collect();
        let c = color(o.optimizer);
        let _ = writeln!(
            out,
            r#"<polygon points="{}" fill="{c}" fill-opacity="0.2" stroke="none"/>"#,
            band.join(" ")
        );
        let _ = writeln!(
            out,
            r#"<polyline points="{}" fill="none" stroke="{c}" stroke-width="1.5"/>"#,
            line.join(" ")
        );
        legend(&mut out, i, o.optimizer);
    }
    out.push_str("</svg>\n");
    out
}

fn box_svg(report: &TaskReport) -> String {
    let n = report.optimizers.len();
    let (lo, hi) = finite_range(report.optimizers.iter().flat_map(|o| {
        let b = &o.finals;
        [b.whisker_low, b.whisker_high]
            .into_iter()
            .chain(b.outliers.iter().copied())
    }));
    let f = Frame::new((0.0, n as f64), (lo, hi));

    let mut out = String::new();
    svg_open(&mut out, &format!("{}: final loss", report.task));
    axes(&mut out, &f, "optimizer", loss_label(report.task), false);
    let slot = f.px(1.0) - f.px(0.0);
    for (i, o) in report.optimizers.iter().enumerate() {
        let b = &o.finals;
        let c = color(o.optimizer);
        let cx = f.px(i as f64 + 0.5);
        let half = 0.3 * slot;
        let _ = writeln!(
            out,
            r#"<line x1="{cx:.2}" y1="{:.2}" x2="{cx:.2}" y2="{:.2}" stroke="black"/>"#,
            f.py(b.whisker_low),
            f.py(b.whisker_high)
        );
        for w in [b.whisker_low, b.whisker_high] {
            let _ = writeln!(
                out,
                r#"<line x1="{:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="black"/>"#,
                cx - half / 2.0,
                cx + half / 2.0,
                y = f.py(w)
            );
        }
        let _ = writeln!(
            out,
            r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{c}" fill-opacity="0.6" stroke="black"/>"#,
            cx - half,
            f.py(b.q3),
            2.0 * half,
            (f.py(b.q1) - f.py(b.q3)).max(0.5)
        );
        let _ = writeln!(
            out,
            r#"<line x1="{:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="black" stroke-width="2"/>"#,
            cx - half,
            cx + half,
            y = f.py(b.median)
        );
        for &v in &b.outliers {
            let _ = writeln!(
                out,
                r#"<circle cx="{cx:.2}" cy="{:.2}" r="3" fill="none" stroke="{c}"/>"#,
                f.py(v)
            );
        }
        let _ = writeln!(
            out,
            r#"<text x="{cx:.2}" y="{}" text-anchor="middle">{}</text>"#,
            HEIGHT - BOTTOM + 18.0,
            o.optimizer
        );
    }
    out.push_str("</svg>\n");
    out
}
