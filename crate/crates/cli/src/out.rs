//! Artifact writers: JSON envelopes and small CSV tables.
//!
//! Numbers are written with the shortest round-trip decimal form, so a
//! value parses back to the identical f64 and the files are byte-stable
//! across re-runs.

use std::path::Path;

use textpart_core::{Corpus, FeatureReport, LabelMap, NullDistribution, Result};

use crate::config::Ctx;

/// Wraps a result in the common artifact shape: the subcommand, the full
/// settings echo, and the payload.
pub fn envelope(ctx: &Ctx, result: serde_json::Value) -> serde_json::Value {
    serde_json::json!({
        "command": ctx.command(),
        "config": ctx.echo_json(),
        "result": result,
    })
}

pub fn write_json(dir: &Path, name: &str, value: &serde_json::Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("artifact serializes");
    text.push('\n');
    std::fs::write(dir.join(name), text)?;
    Ok(())
}

/// A per-cell table as CSV: first column the window half-width, one column
/// per n-gram order.
pub fn grid_csv(windows: &[usize], ngrams: &[usize], table: &[Vec<f64>]) -> String {
    let mut s = String::from("window");
    for n in ngrams {
        s.push(',');
        s.push_str(&n.to_string());
    }
    s.push('\n');
    for (row, w) in table.iter().zip(windows) {
        s.push_str(&w.to_string());
        for v in row {
            s.push(',');
            s.push_str(&v.to_string());
        }
        s.push('\n');
    }
    s
}

/// One null distribution as CSV. Shift-based nulls carry their offsets;
/// permutation draws are numbered.
pub fn null_csv(null: &NullDistribution) -> String {
    let mut s = String::new();
    match &null.offsets {
        Some(offsets) => {
            s.push_str("shift,ba\n");
            for (o, v) in offsets.iter().zip(&null.values) {
                s.push_str(&format!("{o},{v}\n"));
            }
        }
        None => {
            s.push_str("draw,ba\n");
            for (i, v) in null.values.iter().enumerate() {
                s.push_str(&format!("{i},{v}\n"));
            }
        }
    }
    s
}

/// The block structure of a corpus in positional order.
pub fn blocks_csv(corpus: &Corpus) -> String {
    let mut s = String::from("label,start,end,length\n");
    for b in corpus.all_blocks() {
        s.push_str(&format!(
            "{},{},{},{}\n",
            csv_field(corpus.label_map.name(b.label)),
            b.start,
            b.end,
            b.len()
        ));
    }
    s
}

/// The ranked feature table, clusters shown under their class names.
pub fn features_csv(map: &LabelMap, report: &FeatureReport) -> String {
    let mut s = String::from(
        "feature,representation,mean_loading,std_loading,present_in,cluster,ev_share,abundance\n",
    );
    for r in &report.rows {
        s.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            csv_field(&r.feature),
            report.representation,
            r.mean_loading,
            r.std_loading,
            r.present_in,
            csv_field(map.name(r.cluster)),
            r.ev_share,
            r.abundance
        ));
    }
    s
}

fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
