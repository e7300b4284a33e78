//! Flat-file artifacts: per-replicate CSV, aggregate JSON, SVG traces.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::Context;
use graphdrift::detector::TracePoint;
use graphdrift::stream::{aggregate, Estimate, RunMetrics, RunSample};
use serde::{Deserialize, Serialize};

use crate::config::{DetectorKind, ExperimentSpec};
use crate::experiment::{ExperimentOutcome, ReplicateResult};

pub const METRICS_FILE: &str = "metrics.csv";
pub const SUMMARY_FILE: &str = "summary.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct MetricsRow {
    run_id: usize,
    seed: u64,
    /// Space-separated alarm windows.
    alarms: String,
    arl0_observed: Option<f64>,
    dod: Option<f64>,
    detected: bool,
    fa1000: f64,
}

impl From<&ReplicateResult> for MetricsRow {
    fn from(r: &ReplicateResult) -> Self {
        let s = &r.sample;
        Self {
            run_id: r.run_id,
            seed: r.seed,
            alarms: s.alarms.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(" "),
            arl0_observed: s.arl0_observed,
            dod: s.dod,
            detected: s.detected,
            fa1000: s.fa1000,
        }
    }
}

pub fn write_metrics_csv(path: &Path, replicates: &[ReplicateResult]) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    for r in replicates {
        w.serialize(MetricsRow::from(r))?;
    }
    w.flush()?;
    Ok(())
}

/// Reads back `(run_id, seed, sample)` rows.
pub fn read_metrics_csv(path: &Path) -> anyhow::Result<Vec<(usize, u64, RunSample)>> {
    let mut r = csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    let mut out = Vec::new();
    for row in r.deserialize() {
        let row: MetricsRow = row?;
        let alarms = row
            .alarms
            .split_whitespace()
            .map(str::parse)
            .collect::<Result<Vec<usize>, _>>()
            .with_context(|| format!("bad alarm list in run {}", row.run_id))?;
        out.push((
            row.run_id,
            row.seed,
            RunSample {
                alarms,
                arl0_observed: row.arl0_observed,
                dod: row.dod,
                detected: row.detected,
                fa1000: row.fa1000,
            },
        ));
    }
    Ok(out)
}

/// Contents of `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub id: String,
    pub detector: DetectorKind,
    #[serde(rename = "M")]
    pub m: usize,
    pub n: usize,
    pub arl0_target: usize,
    pub seed: u64,
    pub tau_window: usize,
    pub horizon: usize,
    pub replicates_completed: usize,
    pub failures: Vec<(usize, String)>,
    pub metrics: Option<RunMetrics>,
}

impl Summary {
    pub fn new(outcome: &ExperimentOutcome) -> Self {
        let spec: &ExperimentSpec = &outcome.spec;
        Self {
            id: spec.id.clone(),
            detector: spec.detector,
            m: spec.effective_m(),
            n: spec.effective_n(),
            arl0_target: spec.arl0_target,
            seed: spec.seed,
            tau_window: outcome.stream.tau_window(),
            horizon: outcome.stream.horizon(),
            replicates_completed: outcome.replicates.len(),
            failures: outcome.failures.clone(),
            metrics: outcome.metrics.clone(),
        }
    }
}

/// Writes `metrics.csv`, `summary.json` and `trace_0.svg` into `dir`.
pub fn write_outcome(dir: &Path, outcome: &ExperimentOutcome) -> anyhow::Result<()> {
    std::fs::create_dir_all(dir)?;
    write_metrics_csv(&dir.join(METRICS_FILE), &outcome.replicates)?;
    let summary = Summary::new(outcome);
    std::fs::write(dir.join(SUMMARY_FILE), serde_json::to_string_pretty(&summary)?)?;
    for r in &outcome.replicates {
        if let Some(trace) = &r.trace {
            let title = format!("{} replicate {}", outcome.spec.id, r.run_id);
            let svg = trace_svg(trace, outcome.stream.tau_window(), &title);
            std::fs::write(dir.join(format!("trace_{}.svg", r.run_id)), svg)?;
        }
    }
    Ok(())
}

/// Re-aggregates `metrics.csv` when no summary is present.
pub fn load_summary(dir: &Path) -> anyhow::Result<Summary> {
    let path = dir.join(SUMMARY_FILE);
    if path.exists() {
        let text = std::fs::read_to_string(&path)?;
        return serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()));
    }
    let rows = read_metrics_csv(&dir.join(METRICS_FILE))?;
    let samples: Vec<RunSample> = rows.into_iter().map(|r| r.2).collect();
    let metrics = if samples.len() >= 2 { Some(aggregate(&samples, 0)?) } else { None };
    Ok(Summary {
        id: dir.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default(),
        detector: DetectorKind::Main,
        m: 0,
        n: 0,
        arl0_target: 0,
        seed: 0,
        tau_window: 0,
        horizon: 0,
        replicates_completed: samples.len(),
        failures: Vec::new(),
        metrics,
    })
}

fn estimate(e: &Option<Estimate>, digits: usize) -> String {
    match e {
        Some(e) => format!("{:.d$} [{:.d$}, {:.d$}]", e.mean, e.lo, e.hi, d = digits),
        None => "-".to_string(),
    }
}

pub const TABLE_HEADER: &str = "| Exp. | Detector | M | n | DCR [95% CI] | ARL0 [95% CI] | DoD [95% CI] | FA1000 (std) |";

/// One table row with the aggregate figures of merit.
pub fn table_row(s: &Summary) -> String {
    let detector = format!("{:?}", s.detector).to_lowercase();
    match &s.metrics {
        Some(m) => format!(
            "| {} | {} | {} | {} | {} | {} | {} | {:.3} ({:.3}) |",
            s.id,
            detector,
            s.m,
            s.n,
            estimate(&Some(m.dcr), 3),
            estimate(&m.arl0, 0),
            estimate(&m.dod, 0),
            m.fa1000.mean,
            m.fa1000.std
        ),
        None => format!("| {} | {} | {} | {} | - | - | - | - |", s.id, detector, s.m, s.n),
    }
}

/// Cumulative statistic and threshold per window, with the change window
/// and alarms marked.
pub fn trace_svg(trace: &[TracePoint<f64>], tau_window: usize, title: &str) -> String {
    const W: f64 = 900.0;
    const H: f64 = 360.0;
    const PAD: f64 = 50.0;
    let len = trace.len().max(1) as f64;
    let ymax = trace
        .iter()
        .map(|t| t.cumulative.max(t.threshold))
        .filter(|v| v.is_finite())
        .fold(1e-9, f64::max)
        * 1.05;
    let x = |w: f64| PAD + (W - 2.0 * PAD) * w / len;
    let y = |v: f64| H - PAD - (H - 2.0 * PAD) * v.min(ymax) / ymax;
    let poly = |f: &dyn Fn(&TracePoint<f64>) -> f64| {
        trace
            .iter()
            .enumerate()
            .map(|(i, t)| format!("{:.2},{:.2}", x(i as f64 + 1.0), y(f(t))))
            .collect::<Vec<_>>()
            .join(" ")
    };

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{PAD}" y="20">{}</text>"#, escape(title));
    let _ = writeln!(
        s,
        r#"<line x1="{PAD}" y1="{b}" x2="{r}" y2="{b}" stroke="black"/><line x1="{PAD}" y1="{PAD}" x2="{PAD}" y2="{b}" stroke="black"/>"#,
        b = H - PAD,
        r = W - PAD
    );
    let _ = writeln!(s, r#"<text x="{}" y="{}">window</text>"#, W / 2.0, H - 15.0);
    let _ = writeln!(s, r#"<text x="5" y="{}">{ymax:.2}</text>"#, PAD);
    let _ = writeln!(
        s,
        r#"<polyline fill="none" stroke="firebrick" stroke-dasharray="4 3" points="{}"/>"#,
        poly(&|t| t.threshold)
    );
    let _ = writeln!(
        s,
        r#"<polyline fill="none" stroke="steelblue" points="{}"/>"#,
        poly(&|t| t.cumulative)
    );
    let tx = x(tau_window as f64 + 0.5);
    let _ = writeln!(
        s,
        r#"<line x1="{tx:.2}" y1="{PAD}" x2="{tx:.2}" y2="{}" stroke="gray" stroke-dasharray="2 2"/><text x="{:.2}" y="{}">change</text>"#,
        H - PAD,
        tx + 4.0,
        PAD + 12.0
    );
    for (i, t) in trace.iter().enumerate().filter(|(_, t)| t.alarm) {
        let _ = writeln!(
            s,
            r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="darkorange"/>"#,
            x(i as f64 + 1.0),
            y(t.cumulative)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="40" fill="steelblue">S_w</text><text x="{}" y="40" fill="firebrick">h_w</text>"#,
        W - 140.0,
        W - 100.0
    );
    s.push_str("</svg>\n");
    s
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn result(id: usize, alarms: Vec<usize>, dod: Option<f64>) -> ReplicateResult {
        ReplicateResult {
            run_id: id,
            seed: 17 + id as u64,
            sample: RunSample {
                alarms,
                arl0_observed: None,
                dod,
                detected: dod.is_some(),
                fa1000: 0.25,
            },
            trace: None,
        }
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join(METRICS_FILE);
        let rows = vec![result(0, vec![3, 250, 251], Some(0.1 + 0.2)), result(1, vec![], None)];
        write_metrics_csv(&path, &rows).unwrap();
        let back = read_metrics_csv(&path).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back[0].2, rows[0].sample);
        assert_eq!(back[1].2, rows[1].sample);
        assert_eq!(back[1].1, 18);
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("run_id,seed,alarms,arl0_observed,dod,detected,fa1000"));
    }

    #[test]
    fn svg_marks_alarms_and_change() {
        let trace: Vec<TracePoint<f64>> = (0..20)
            .map(|i| TracePoint {
                s_w: 1.0,
                cumulative: i as f64 * 0.1,
                threshold: 1.5,
                alarm: i == 15,
            })
            .collect();
        let svg = trace_svg(&trace, 10, "a<b");
        assert_eq!(svg.matches("<circle").count(), 1);
        assert!(svg.contains("change"));
        assert!(svg.contains("a&lt;b"));
        assert!(svg.trim_end().ends_with("</svg>"));
    }
}
