//! Report rendering: selection reports, horizon-sweep tables, rule
//! tables, and decoded timelines.
//!
//! CSV cells for unavailable values (no pruning weight, no eligible test
//! sequence at a horizon) are left empty. Floats render with Rust's
//! shortest round-trip formatting, so equal inputs give byte-equal files.

use anyhow::Result;
use cthsmm_core::{CthsmmModel, EvalMetrics, SelectionReport, ViterbiResult};
use serde::Serialize;

#[derive(Serialize)]
struct ReportDoc<'a> {
    horizons: &'a [u32],
    rows: Vec<RowDoc<'a>>,
}

#[derive(Serialize)]
struct RowDoc<'a> {
    label: &'a str,
    n_leaves: usize,
    minbucket: usize,
    alpha: Option<f64>,
    mi_bits: f64,
    cv_mr: f64,
    is_mmie: bool,
    sweep: Vec<SweepDoc>,
}

#[derive(Serialize)]
struct SweepDoc {
    horizon: u32,
    hit_ratio: Option<f64>,
    lmrl_ratio: Option<f64>,
    n_sequences: usize,
}

fn sweep_doc(m: &EvalMetrics) -> SweepDoc {
    SweepDoc {
        horizon: m.horizon,
        hit_ratio: m.hit_ratio,
        lmrl_ratio: m.lmrl_ratio,
        n_sequences: m.n_sequences,
    }
}

/// The selection report as a JSON document.
pub fn selection_report_json(report: &SelectionReport) -> String {
    let doc = ReportDoc {
        horizons: &report.horizons,
        rows: report
            .rows
            .iter()
            .map(|r| RowDoc {
                label: &r.label,
                n_leaves: r.n_leaves,
                minbucket: r.minbucket,
                alpha: r.alpha,
                mi_bits: r.mi_bits,
                cv_mr: r.cv_mr,
                is_mmie: r.is_mmie,
                sweep: r.sweep.iter().map(sweep_doc).collect(),
            })
            .collect(),
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("report serialization is infallible");
    text.push('\n');
    text
}

fn opt_cell(v: Option<f64>) -> String {
    v.map(|x| format!("{x}")).unwrap_or_default()
}

/// One row per candidate: the MI and CV-MR table.
pub fn candidates_csv(report: &SelectionReport) -> Result<String> {
    let mut buffer = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut buffer);
        w.write_record(["label", "n_leaves", "minbucket", "alpha", "mi_bits", "cv_mr", "is_mmie"])?;
        for r in &report.rows {
            w.write_record(&[
                r.label.clone(),
                r.n_leaves.to_string(),
                r.minbucket.to_string(),
                opt_cell(r.alpha),
                format!("{}", r.mi_bits),
                format!("{}", r.cv_mr),
                r.is_mmie.to_string(),
            ])?;
        }
        w.flush()?;
    }
    Ok(String::from_utf8(buffer)?)
}

/// The flat selection report: one row per candidate and horizon, ready
/// for external plotting.
pub fn selection_report_csv(report: &SelectionReport) -> Result<String> {
    let mut buffer = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut buffer);
        w.write_record([
            "label",
            "n_leaves",
            "minbucket",
            "alpha",
            "mi_bits",
            "cv_mr",
            "is_mmie",
            "horizon",
            "hit_ratio",
            "lmrl_ratio",
            "n_sequences",
        ])?;
        for r in &report.rows {
            for m in &r.sweep {
                w.write_record(&[
                    r.label.clone(),
                    r.n_leaves.to_string(),
                    r.minbucket.to_string(),
                    opt_cell(r.alpha),
                    format!("{}", r.mi_bits),
                    format!("{}", r.cv_mr),
                    r.is_mmie.to_string(),
                    m.horizon.to_string(),
                    opt_cell(m.hit_ratio),
                    opt_cell(m.lmrl_ratio),
                    m.n_sequences.to_string(),
                ])?;
            }
        }
        w.flush()?;
    }
    Ok(String::from_utf8(buffer)?)
}

/// A horizon sweep as CSV.
pub fn sweep_csv(rows: &[EvalMetrics]) -> Result<String> {
    let mut buffer = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut buffer);
        w.write_record(["horizon", "hit_ratio", "lmrl_ratio", "n_sequences"])?;
        for m in rows {
            w.write_record(&[
                m.horizon.to_string(),
                opt_cell(m.hit_ratio),
                opt_cell(m.lmrl_ratio),
                m.n_sequences.to_string(),
            ])?;
        }
        w.flush()?;
    }
    Ok(String::from_utf8(buffer)?)
}

/// The state definition rule table: one line per state.
pub fn rule_table(model: &CthsmmModel) -> String {
    let mut out = String::new();
    for rule in model.rules() {
        out.push_str(&format!("{}\t{}\n", rule.state_id, rule));
    }
    out
}

/// A decoded sequence as an aligned-text timeline: one row per state
/// sojourn with its hour span and defining rule.
pub fn timeline_text(result: &ViterbiResult, model: &CthsmmModel) -> String {
    let total = result.total_duration();
    let hour_width = format!("{total}").len();
    let state_width = format!("{}", model.n_states()).len();
    let duration_width = result
        .segments
        .iter()
        .map(|s| format!("{}", s.duration).len())
        .max()
        .unwrap_or(1);
    let mut out = format!(
        "decoded {} sojourns over {} hours, log probability {:.6}\n",
        result.segments.len(),
        total,
        result.log_prob
    );
    let mut start = 1u64;
    for segment in &result.segments {
        let end = start + u64::from(segment.duration) - 1;
        let rule = &model.rules()[(segment.state_id - 1) as usize];
        out.push_str(&format!(
            "hours {start:>hour_width$}-{end:<hour_width$}  state {:<state_width$}  {:>duration_width$}h  {rule}\n",
            segment.state_id, segment.duration,
        ));
        start = end + 1;
    }
    out
}

#[derive(Serialize)]
struct DecodedDoc<'a> {
    log_prob: f64,
    total_hours: u32,
    segments: Vec<SegmentDoc<'a>>,
}

#[derive(Serialize)]
struct SegmentDoc<'a> {
    state_id: u32,
    duration: u32,
    rule: &'a str,
}

/// A decoded sequence as JSON: segments with durations and rule text,
/// plus the joint log probability.
pub fn decoded_json(result: &ViterbiResult, model: &CthsmmModel) -> String {
    let rules: Vec<String> = model.rules().iter().map(|r| r.to_string()).collect();
    let doc = DecodedDoc {
        log_prob: result.log_prob,
        total_hours: result.total_duration(),
        segments: result
            .segments
            .iter()
            .map(|s| SegmentDoc {
                state_id: s.state_id,
                duration: s.duration,
                rule: &rules[(s.state_id - 1) as usize],
            })
            .collect(),
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("decoded serialization is infallible");
    text.push('\n');
    text
}
