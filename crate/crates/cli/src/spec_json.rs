//! Ground-truth simulator specs as JSON documents.

use std::path::Path;

use anyhow::{Context, Result};
use cthsmm_core::{DurationSpec, GroundTruthSpec, StateSpec};
use serde::Deserialize;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecDoc {
    feature_names: Vec<String>,
    alphabet: Vec<String>,
    states: Vec<StateDoc>,
    transition: Vec<Vec<f64>>,
    initial: Vec<f64>,
    n_entities: usize,
    mean_sequence_length: u32,
    #[serde(default)]
    merge_runs: bool,
    seed: u64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct StateDoc {
    /// Per-feature [low, high) interval.
    bounds: Vec<[f64; 2]>,
    emission: Vec<f64>,
    duration: DurationDoc,
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum DurationDoc {
    Geometric { p_self: f64 },
    Pmf { probs: Vec<f64> },
}

/// Parse a ground-truth spec from JSON text. Structural validation beyond
/// the document shape happens when the spec is sampled.
pub fn spec_from_json(text: &str) -> Result<GroundTruthSpec> {
    let doc: SpecDoc = serde_json::from_str(text).context("parsing spec JSON")?;
    Ok(GroundTruthSpec {
        feature_names: doc.feature_names,
        alphabet: doc.alphabet,
        states: doc
            .states
            .into_iter()
            .map(|s| StateSpec {
                bounds: s.bounds.iter().map(|b| (b[0], b[1])).collect(),
                emission: s.emission,
                duration: match s.duration {
                    DurationDoc::Geometric { p_self } => DurationSpec::Geometric { p_self },
                    DurationDoc::Pmf { probs } => DurationSpec::Pmf { probs },
                },
            })
            .collect(),
        transition: doc.transition,
        initial: doc.initial,
        n_entities: doc.n_entities,
        mean_sequence_length: doc.mean_sequence_length,
        merge_runs: doc.merge_runs,
        seed: doc.seed,
    })
}

pub fn read_spec(path: &Path) -> Result<GroundTruthSpec> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))?;
    spec_from_json(&text).with_context(|| format!("loading {}", path.display()))
}
