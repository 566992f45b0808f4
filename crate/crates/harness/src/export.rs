//! CSV and JSON report files.
//!
//! JSON files are the serde form of the report structs, pretty-printed; CSV
//! numbers use six decimals. Every file ends with a newline.

use std::path::Path;

use alter3_core::analysis::{AxisDeltaReport, RhiTrial};
use alter3_core::{axis_group, AxisId, MsrReport, TrialResult};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::json;

use crate::error::{HarnessError, Result};
use crate::files::{read_text, write_text};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Csv,
    Json,
}

fn csv_string(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(header).expect("in-memory write");
    for row in rows {
        writer.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("utf-8 input")
}

fn decimal(x: f64) -> String {
    alter3_core::canonical::number(x)
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("report serializes");
    text.push('\n');
    text
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(|e| HarnessError::format(path, e.line(), e))
}

/// `axis,group,mean_abs_delta`, one row per axis.
pub fn axis_report_csv(report: &AxisDeltaReport) -> String {
    let rows = AxisId::all().zip(&report.per_axis).map(|(id, value)| {
        vec![id.get().to_string(), axis_group(id).key().to_string(), decimal(*value)]
    });
    csv_string(&["axis", "group", "mean_abs_delta"], rows)
}

/// `group,mean_abs_delta`, one row per group.
pub fn group_report_csv(report: &AxisDeltaReport) -> String {
    let rows = report
        .per_group
        .iter()
        .map(|g| vec![g.group.key().to_string(), decimal(g.mean_abs_delta)]);
    csv_string(&["group", "mean_abs_delta"], rows)
}

pub fn msr_report_csv(report: &MsrReport) -> String {
    let rows = report.trials.iter().map(|t| {
        let (status, verdict, rationale) = match &t.result {
            TrialResult::Completed(tr) => (
                "completed",
                tr.verdict.kind.to_string(),
                tr.verdict.rationale.clone(),
            ),
            TrialResult::Aborted(a) => ("aborted", String::new(), a.reason.to_string()),
        };
        vec![
            t.index.to_string(),
            t.seed.to_string(),
            t.expected.to_string(),
            verdict,
            t.correct.to_string(),
            t.memory().len().to_string(),
            status.to_string(),
            rationale,
        ]
    });
    csv_string(
        &["trial", "seed", "expected", "verdict", "correct", "steps", "status", "rationale"],
        rows,
    )
}

pub fn rhi_trials_csv(trials: &[RhiTrial]) -> String {
    let rows = trials.iter().map(|t| {
        let (keyframes, axes) = t.script.as_ref().map_or((0, String::new()), |s| {
            let axes: Vec<String> = s.touched_axes().iter().map(|a| a.get().to_string()).collect();
            (s.frames.len(), axes.join(" "))
        });
        vec![
            t.repeat.to_string(),
            t.prop.key().to_string(),
            t.rotation.degrees().to_string(),
            format!("{:?}", t.classification).to_lowercase(),
            keyframes.to_string(),
            axes,
            t.aborted.to_string(),
            t.note.clone().unwrap_or_default(),
        ]
    });
    csv_string(
        &["repeat", "prop", "rotation", "classification", "keyframes", "touched_axes", "aborted", "note"],
        rows,
    )
}

/// Chart input: parallel arrays of axis index and mean absolute change.
pub fn plot_json(report: &AxisDeltaReport) -> String {
    let axis_index: Vec<u8> = AxisId::all().map(AxisId::get).collect();
    let group: Vec<&str> = AxisId::all().map(|id| axis_group(id).key()).collect();
    to_json(&json!({
        "axis_index": axis_index,
        "group": group,
        "mean_abs_delta": report.per_axis,
        "repeats": report.repeats,
    }))
}

/// RHI trials, one JSON object per line.
pub fn rhi_trials_jsonl(trials: &[RhiTrial]) -> String {
    let mut out = String::new();
    for t in trials {
        out.push_str(&serde_json::to_string(t).expect("trial serializes"));
        out.push('\n');
    }
    out
}

pub fn export_axis_report(report: &AxisDeltaReport, format: ExportFormat, path: &Path) -> Result<()> {
    let text = match format {
        ExportFormat::Csv => axis_report_csv(report),
        ExportFormat::Json => to_json(report),
    };
    write_text(path, &text)
}

pub fn export_msr_report(report: &MsrReport, format: ExportFormat, path: &Path) -> Result<()> {
    let text = match format {
        ExportFormat::Csv => msr_report_csv(report),
        ExportFormat::Json => to_json(report),
    };
    write_text(path, &text)
}
