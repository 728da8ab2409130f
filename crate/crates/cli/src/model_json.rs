//! Versioned model JSON.
//!
//! A saved model carries everything decoding needs without the training
//! data: the observation alphabet, initial/transition/emission matrices,
//! per-state duration pmfs, the state definition rules, and the source
//! tree itself. Rule text is written for human readers and regenerated
//! from the tree on load, so the tree stays the single source of truth.

use std::path::Path;

use anyhow::{bail, Context, Result};
use cthsmm_core::{ClassificationTree, CthsmmModel, DurationDensity, Node};
use serde::{Deserialize, Serialize};

use crate::io::write_atomic;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct ModelDoc {
    format_version: u32,
    alphabet: Vec<String>,
    feature_names: Vec<String>,
    initial: Vec<f64>,
    transition: Vec<Vec<f64>>,
    emission: Vec<Vec<f64>>,
    durations: Vec<DurationDoc>,
    rules: Vec<RuleDoc>,
    tree: TreeDoc,
}

#[derive(Serialize, Deserialize)]
struct DurationDoc {
    sample_count: usize,
    bandwidth: f64,
    dmax: u32,
    pmf: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RuleDoc {
    state_id: u32,
    rule: String,
}

#[derive(Serialize, Deserialize)]
struct TreeDoc {
    minbucket: usize,
    root: NodeDoc,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum NodeDoc {
    Internal {
        feature: String,
        threshold: f64,
        left: Box<NodeDoc>,
        right: Box<NodeDoc>,
    },
    Leaf {
        state_id: u32,
        class_distribution: Vec<f64>,
        record_count: usize,
    },
}

fn node_to_doc(node: &Node, feature_names: &[String]) -> NodeDoc {
    match node {
        Node::Internal {
            feature,
            threshold,
            left,
            right,
        } => NodeDoc::Internal {
            feature: feature_names[*feature].clone(),
            threshold: *threshold,
            left: Box::new(node_to_doc(left, feature_names)),
            right: Box::new(node_to_doc(right, feature_names)),
        },
        Node::Leaf {
            state_id,
            class_distribution,
            record_count,
        } => NodeDoc::Leaf {
            state_id: *state_id,
            class_distribution: class_distribution.clone(),
            record_count: *record_count,
        },
    }
}

fn node_from_doc(doc: NodeDoc, feature_names: &[String]) -> Result<Node> {
    Ok(match doc {
        NodeDoc::Internal {
            feature,
            threshold,
            left,
            right,
        } => {
            let index = feature_names
                .iter()
                .position(|n| *n == feature)
                .with_context(|| format!("split feature {feature:?} is not in feature_names"))?;
            Node::Internal {
                feature: index,
                threshold,
                left: Box::new(node_from_doc(*left, feature_names)?),
                right: Box::new(node_from_doc(*right, feature_names)?),
            }
        }
        NodeDoc::Leaf {
            state_id,
            class_distribution,
            record_count,
        } => Node::Leaf {
            state_id,
            class_distribution,
            record_count,
        },
    })
}

/// Render a model as its JSON document text.
pub fn model_to_json(model: &CthsmmModel) -> String {
    let tree = model.tree();
    let doc = ModelDoc {
        format_version: FORMAT_VERSION,
        alphabet: model.alphabet().to_vec(),
        feature_names: model.feature_names().to_vec(),
        initial: model.initial().to_vec(),
        transition: model.transition().to_vec(),
        emission: model.emission().to_vec(),
        durations: model
            .durations()
            .iter()
            .map(|d| DurationDoc {
                sample_count: d.sample_count(),
                bandwidth: d.bandwidth(),
                dmax: d.dmax(),
                pmf: d.pmf_values().to_vec(),
            })
            .collect(),
        rules: model
            .rules()
            .iter()
            .map(|r| RuleDoc {
                state_id: r.state_id,
                rule: r.to_string(),
            })
            .collect(),
        tree: TreeDoc {
            minbucket: tree.minbucket(),
            root: node_to_doc(tree.root(), tree.feature_names()),
        },
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("model serialization is infallible");
    text.push('\n');
    text
}

/// Parse a model from its JSON document text.
pub fn model_from_json(text: &str) -> Result<CthsmmModel> {
    let doc: ModelDoc = serde_json::from_str(text).context("parsing model JSON")?;
    if doc.format_version != FORMAT_VERSION {
        bail!(
            "unsupported model format_version {} (expected {FORMAT_VERSION})",
            doc.format_version
        );
    }
    let root = node_from_doc(doc.tree.root, &doc.feature_names)?;
    let tree = ClassificationTree::from_parts(
        root,
        doc.feature_names,
        doc.alphabet,
        doc.tree.minbucket,
    )?;
    let durations = doc
        .durations
        .into_iter()
        .map(|d| DurationDensity::from_parts(d.sample_count, d.bandwidth, d.dmax, d.pmf))
        .collect::<cthsmm_core::Result<Vec<_>>>()?;
    let rules = tree.extract_rules();
    Ok(CthsmmModel::from_parts(
        tree,
        doc.initial,
        doc.transition,
        doc.emission,
        durations,
        rules,
    )?)
}

pub fn save_model(path: &Path, model: &CthsmmModel) -> Result<()> {
    write_atomic(path, model_to_json(model).as_bytes())
}

pub fn load_model(path: &Path) -> Result<CthsmmModel> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))?;
    model_from_json(&text).with_context(|| format!("loading {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use cthsmm_core::{build_model, grow_tree, DatasetBuilder, ModelConfig, TreeGrowthConfig};

    fn example_model() -> CthsmmModel {
        let mut b = DatasetBuilder::new(vec!["temp".to_string()]);
        for (label, temp, duration) in [
            ("Rainy", 45.0, 2),
            ("Cloudy", 52.0, 1),
            ("Sunny", 62.0, 1),
            ("Cloudy", 55.0, 2),
            ("Rainy", 47.0, 6),
        ] {
            b.add_record("w1", label, vec![temp], duration).unwrap();
        }
        let data = b.finish();
        let tree = grow_tree(&data, &TreeGrowthConfig::new(1)).unwrap();
        build_model(&tree, &data, &ModelConfig::default()).unwrap()
    }

    #[test]
    fn json_round_trip_preserves_the_model() {
        let model = example_model();
        let text = model_to_json(&model);
        let loaded = model_from_json(&text).unwrap();
        assert_eq!(loaded, model);
        // Serialization is stable across a round trip.
        assert_eq!(model_to_json(&loaded), text);
    }

    #[test]
    fn document_carries_the_declared_sections() {
        let text = model_to_json(&example_model());
        let value: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(value["format_version"], 1);
        for key in [
            "alphabet",
            "feature_names",
            "initial",
            "transition",
            "emission",
            "durations",
            "rules",
            "tree",
        ] {
            assert!(!value[key].is_null(), "missing section {key}");
        }
        assert_eq!(value["tree"]["root"]["kind"], "internal");
        assert!(value["rules"][0]["rule"].as_str().unwrap().contains("temp"));
    }

    #[test]
    fn future_format_versions_are_refused() {
        let mut text = model_to_json(&example_model());
        text = text.replacen("\"format_version\": 1", "\"format_version\": 9", 1);
        let err = model_from_json(&text).unwrap_err();
        assert!(err.to_string().contains("format_version 9"), "{err:#}");
    }

    #[test]
    fn unknown_split_feature_is_refused() {
        let mut value: serde_json::Value =
            serde_json::from_str(&model_to_json(&example_model())).unwrap();
        value["tree"]["root"]["feature"] = "ghost".into();
        let err = model_from_json(&value.to_string()).unwrap_err();
        assert!(format!("{err:#}").contains("ghost"), "{err:#}");
    }

    #[test]
    fn save_and_load_through_a_file() {
        let model = example_model();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        save_model(&path, &model).unwrap();
        assert_eq!(load_model(&path).unwrap(), model);
    }
}
