//! Cost-complexity pruning and cross-validated error estimates.
//!
//! For a tree T and complexity weight alpha, the penalized cost is
//! R_alpha(T) = R(T) + alpha * |leaves(T)| with R the resubstitution
//! misclassification rate. Collapsing, in rounds, every internal node whose
//! link strength
//!
//! ```text
//! g(t) = (R(t) - R(T_t)) / (|leaves(T_t)| - 1)
//! ```
//!
//! attains the current minimum yields the nested family of subtrees that
//! are optimal as alpha grows. Entry zero holds the smallest subtree that
//! is optimal at alpha = 0, so splits that never reduce the
//! misclassification count are already collapsed there; recorded alphas are
//! strictly increasing and the last entry is the root leaf.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::TemporalDataset;
use crate::error::{Error, Result};
use crate::tree::{grow_tree, ClassificationTree, Node, TreeGrowthConfig};

const LINK_TOLERANCE: f64 = 1e-12;

/// One subtree in the pruning sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct PrunedSubtree {
    /// Smallest alpha at which this subtree is cost-optimal.
    pub alpha: f64,
    pub tree: ClassificationTree,
    pub n_leaves: usize,
    /// Misclassification rate on the pruning data.
    pub resubstitution_rate: f64,
    /// Cross-validated misclassification rate, when one was computed.
    pub cv_rate: Option<f64>,
}

/// The nested subtree family produced by cost-complexity pruning, ordered
/// by increasing alpha and decreasing leaf count.
#[derive(Debug, Clone, PartialEq)]
pub struct PruningReport {
    pub entries: Vec<PrunedSubtree>,
}

impl PruningReport {
    /// Index of the entry with the lowest cross-validated error; ties go
    /// to the smaller subtree. Requires [`cv_misclassification`] rates.
    pub fn best_by_cv(&self) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for (i, entry) in self.entries.iter().enumerate() {
            let rate = entry.cv_rate?;
            best = match best {
                Some((_, r)) if rate < r => Some((i, rate)),
                Some((j, r)) if rate <= r => Some((j.max(i), r)),
                None => Some((i, rate)),
                keep => keep,
            };
        }
        best.map(|(i, _)| i)
    }
}

/// Working tree that carries per-node label counts.
#[derive(Clone)]
struct CountNode {
    counts: Vec<u64>,
    split: Option<CountSplit>,
}

#[derive(Clone)]
struct CountSplit {
    feature: usize,
    threshold: f64,
    left: Box<CountNode>,
    right: Box<CountNode>,
}

impl CountNode {
    fn misclassified(&self) -> u64 {
        let total: u64 = self.counts.iter().sum();
        total - self.counts.iter().copied().max().unwrap_or(0)
    }

    /// (subtree misclassified, subtree leaf count)
    fn subtree_error(&self) -> (u64, usize) {
        match &self.split {
            None => (self.misclassified(), 1),
            Some(s) => {
                let (le, ln) = s.left.subtree_error();
                let (re, rn) = s.right.subtree_error();
                (le + re, ln + rn)
            }
        }
    }

    fn min_link(&self, n_total: f64) -> Option<f64> {
        let split = self.split.as_ref()?;
        let (err, leaves) = self.subtree_error();
        let own = (self.misclassified() as f64 - err as f64) / n_total / (leaves - 1) as f64;
        let mut min = own;
        for child in [&split.left, &split.right] {
            if let Some(g) = child.min_link(n_total) {
                min = min.min(g);
            }
        }
        Some(min)
    }

    /// Collapse every internal node whose link strength is at most `bound`.
    fn collapse_links(&mut self, bound: f64, n_total: f64) {
        if self.split.is_none() {
            return;
        }
        let (err, leaves) = self.subtree_error();
        let g = (self.misclassified() as f64 - err as f64) / n_total / (leaves - 1) as f64;
        if g <= bound {
            self.split = None;
        } else if let Some(split) = self.split.as_mut() {
            split.left.collapse_links(bound, n_total);
            split.right.collapse_links(bound, n_total);
        }
    }

    fn to_node(&self, next_id: &mut u32) -> Result<Node> {
        match &self.split {
            Some(s) => {
                let left = s.left.to_node(next_id)?;
                let right = s.right.to_node(next_id)?;
                Ok(Node::Internal {
                    feature: s.feature,
                    threshold: s.threshold,
                    left: Box::new(left),
                    right: Box::new(right),
                })
            }
            None => {
                let total: u64 = self.counts.iter().sum();
                if total == 0 {
                    return Err(Error::InvalidArgument {
                        what: "data",
                        detail: "pruning data leaves a leaf with no records".to_string(),
                    });
                }
                let id = *next_id;
                *next_id += 1;
                Ok(Node::Leaf {
                    state_id: id,
                    class_distribution: self
                        .counts
                        .iter()
                        .map(|&c| c as f64 / total as f64)
                        .collect(),
                    record_count: total as usize,
                })
            }
        }
    }
}

fn mirror(node: &Node, n_labels: usize) -> CountNode {
    match node {
        Node::Leaf { .. } => CountNode {
            counts: vec![0; n_labels],
            split: None,
        },
        Node::Internal {
            feature,
            threshold,
            left,
            right,
        } => CountNode {
            counts: vec![0; n_labels],
            split: Some(CountSplit {
                feature: *feature,
                threshold: *threshold,
                left: Box::new(mirror(left, n_labels)),
                right: Box::new(mirror(right, n_labels)),
            }),
        },
    }
}

fn route(node: &mut CountNode, predictors: &[f64], observation: usize) {
    node.counts[observation] += 1;
    if let Some(split) = node.split.as_mut() {
        if predictors[split.feature] < split.threshold {
            route(&mut split.left, predictors, observation);
        } else {
            route(&mut split.right, predictors, observation);
        }
    }
}

fn snapshot(work: &CountNode, template: &ClassificationTree, n_total: f64) -> Result<PrunedSubtree> {
    let mut next_id = 1u32;
    let root = work.to_node(&mut next_id)?;
    let tree = ClassificationTree::from_parts(
        root,
        template.feature_names().to_vec(),
        template.training_alphabet().to_vec(),
        template.minbucket(),
    )?;
    let (err, n_leaves) = work.subtree_error();
    Ok(PrunedSubtree {
        alpha: 0.0,
        tree,
        n_leaves,
        resubstitution_rate: err as f64 / n_total,
        cv_rate: None,
    })
}

/// Compute the nested pruning sequence of `tree` against `data`.
pub fn cost_complexity_prune(
    tree: &ClassificationTree,
    data: &TemporalDataset,
) -> Result<PruningReport> {
    let n_labels = tree.training_alphabet().len();
    if data.n_records() == 0 {
        return Err(Error::EmptyInput("pruning data"));
    }
    let mut work = mirror(tree.root(), n_labels);
    for record in data.records() {
        if record.predictors.len() != tree.feature_names().len() {
            return Err(Error::DimensionMismatch {
                what: "predictors",
                expected: tree.feature_names().len(),
                got: record.predictors.len(),
            });
        }
        if record.observation >= n_labels {
            return Err(Error::InvalidArgument {
                what: "data",
                detail: format!(
                    "observation index {} outside the tree's alphabet",
                    record.observation
                ),
            });
        }
        route(&mut work, &record.predictors, record.observation);
    }
    let n_total = data.n_records() as f64;

    // Smallest subtree optimal at alpha = 0: drop links with no
    // misclassification gain, repeating because collapses can expose new
    // zero-strength links upstream.
    while let Some(g) = work.min_link(n_total) {
        if g > LINK_TOLERANCE {
            break;
        }
        work.collapse_links(LINK_TOLERANCE, n_total);
    }
    let mut entries = vec![snapshot(&work, tree, n_total)?];

    while work.split.is_some() {
        let alpha = work.min_link(n_total).expect("internal node present");
        loop {
            work.collapse_links(alpha + LINK_TOLERANCE, n_total);
            match work.min_link(n_total) {
                Some(g) if g <= alpha + LINK_TOLERANCE => continue,
                _ => break,
            }
        }
        let mut entry = snapshot(&work, tree, n_total)?;
        entry.alpha = alpha;
        let prev = entries.last().expect("nonempty");
        if alpha <= prev.alpha + LINK_TOLERANCE {
            // Floating-point coincidence: fold into the previous entry so
            // reported alphas stay strictly increasing.
            entry.alpha = prev.alpha;
            *entries.last_mut().expect("nonempty") = entry;
        } else {
            entries.push(entry);
        }
    }
    Ok(PruningReport { entries })
}

/// Estimate each pruning entry's out-of-sample misclassification rate by
/// k-fold cross-validation with folds partitioned by entity. Every fold
/// regrows and reprunes a tree on the remaining entities, picks the
/// subtree matching the entry's alpha interval (via the geometric mean of
/// adjacent alphas), and scores majority-class predictions on the held-out
/// records. Rates are returned in report order and also written into the
/// report's `cv_rate` fields.
pub fn cv_misclassification(
    report: &mut PruningReport,
    data: &TemporalDataset,
    config: &TreeGrowthConfig,
    k_folds: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    let n_entities = data.entities().len();
    if n_entities < 2 {
        return Err(Error::InvalidArgument {
            what: "data",
            detail: "cross-validation needs at least two entities".to_string(),
        });
    }
    if k_folds < 2 {
        return Err(Error::InvalidArgument {
            what: "k_folds",
            detail: "must be at least 2".to_string(),
        });
    }
    let k = k_folds.min(n_entities);

    let mut order: Vec<usize> = (0..n_entities).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    let mut fold_of = vec![0usize; n_entities];
    for (pos, &entity) in order.iter().enumerate() {
        fold_of[entity] = pos % k;
    }

    let n = report.entries.len();
    let mut test_alphas = Vec::with_capacity(n);
    for m in 0..n {
        let a = report.entries[m].alpha;
        let alpha = if m + 1 < n {
            (a * report.entries[m + 1].alpha).sqrt()
        } else {
            a
        };
        test_alphas.push(alpha);
    }

    let mut errors = vec![0u64; n];
    let mut held_out = 0u64;
    for fold in 0..k {
        let train_ids: Vec<usize> = (0..n_entities).filter(|&e| fold_of[e] != fold).collect();
        let test_ids: Vec<usize> = (0..n_entities).filter(|&e| fold_of[e] == fold).collect();
        if test_ids.is_empty() {
            continue;
        }
        let train = data.subset(&train_ids)?;
        let fold_tree = grow_tree(&train, config)?;
        let fold_report = cost_complexity_prune(&fold_tree, &train)?;

        for (m, &alpha) in test_alphas.iter().enumerate() {
            // Largest recorded alpha not exceeding the test alpha; entry 0
            // has alpha 0 and always qualifies.
            let mut pick = 0usize;
            for (i, e) in fold_report.entries.iter().enumerate() {
                if e.alpha <= alpha + LINK_TOLERANCE {
                    pick = i;
                } else {
                    break;
                }
            }
            let subtree = &fold_report.entries[pick].tree;
            let majority: Vec<usize> = subtree
                .leaves()
                .iter()
                .map(|leaf| argmax(leaf.class_distribution))
                .collect();
            for &e in &test_ids {
                for record in &data.entities()[e].records {
                    let state = subtree.assign_state(&record.predictors)?;
                    if majority[(state - 1) as usize] != record.observation {
                        errors[m] += 1;
                    }
                }
            }
        }
        for &e in &test_ids {
            held_out += data.entities()[e].records.len() as u64;
        }
    }
    if held_out == 0 {
        return Err(Error::EmptyInput("held-out records"));
    }
    let rates: Vec<f64> = errors.iter().map(|&e| e as f64 / held_out as f64).collect();
    for (entry, &rate) in report.entries.iter_mut().zip(&rates) {
        entry.cv_rate = Some(rate);
    }
    Ok(rates)
}

fn argmax(values: &[f64]) -> usize {
    let mut best = 0usize;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::DatasetBuilder;

    /// Seven records on one axis: A for x < 3.5, B on [3.5, 5.5), A above.
    fn humped_dataset() -> TemporalDataset {
        let labels = ["A", "A", "A", "B", "B", "A", "A"];
        let mut b = DatasetBuilder::new(vec!["x".to_string()]);
        for (i, label) in labels.iter().enumerate() {
            b.add_record(&format!("e{i}"), label, vec![(i + 1) as f64], 1)
                .unwrap();
        }
        b.finish()
    }

    #[test]
    fn pruning_sequence_on_humped_data() {
        let data = humped_dataset();
        let tree = grow_tree(&data, &TreeGrowthConfig::new(1)).unwrap();
        assert_eq!(tree.n_leaves(), 3);
        let report = cost_complexity_prune(&tree, &data).unwrap();

        // The root is the weakest link: g(root) = (2/7) / 2 is below the
        // inner node's 2/7, so one round collapses everything.
        assert_eq!(report.entries.len(), 2);
        assert_eq!(report.entries[0].alpha, 0.0);
        assert_eq!(report.entries[0].n_leaves, 3);
        assert!((report.entries[0].resubstitution_rate - 0.0).abs() < 1e-12);
        assert!((report.entries[1].alpha - 1.0 / 7.0).abs() < 1e-12);
        assert_eq!(report.entries[1].n_leaves, 1);
        assert!((report.entries[1].resubstitution_rate - 2.0 / 7.0).abs() < 1e-12);
        assert!(report.entries[1].tree.root().is_leaf());
    }

    #[test]
    fn zero_gain_split_is_absent_from_entry_zero() {
        // minbucket 3 stops growth right after a root split that improves
        // Gini but not the misclassification count: both sides stay
        // majority A.
        let labels = ["A", "A", "B", "A", "A", "A", "B"];
        let mut b = DatasetBuilder::new(vec!["x".to_string()]);
        for (i, label) in labels.iter().enumerate() {
            b.add_record(&format!("e{i}"), label, vec![(i + 1) as f64], 1)
                .unwrap();
        }
        let data = b.finish();
        let tree = grow_tree(&data, &TreeGrowthConfig::new(3)).unwrap();
        assert_eq!(tree.n_leaves(), 2);
        let report = cost_complexity_prune(&tree, &data).unwrap();
        assert_eq!(report.entries.len(), 1);
        assert_eq!(report.entries[0].alpha, 0.0);
        assert_eq!(report.entries[0].n_leaves, 1);
    }

    #[test]
    fn alphas_increase_and_subtrees_nest() {
        // Two features, four regions of different sizes so several rounds
        // survive with distinct link strengths.
        let mut b = DatasetBuilder::new(vec!["x".to_string(), "y".to_string()]);
        let mut put = |n: usize, label: &str, x: f64, y: f64| {
            for i in 0..n {
                b.add_record(
                    &format!("{label}{x}{y}{i}"),
                    label,
                    vec![x + (i % 3) as f64 * 0.1, y + (i % 5) as f64 * 0.1],
                    1,
                )
                .unwrap();
            }
        };
        put(20, "A", 0.0, 0.0);
        put(10, "B", 10.0, 0.0);
        put(6, "C", 0.0, 10.0);
        put(3, "D", 10.0, 10.0);
        let data = b.finish();
        let tree = grow_tree(&data, &TreeGrowthConfig::new(1)).unwrap();
        assert_eq!(tree.n_leaves(), 4);
        let report = cost_complexity_prune(&tree, &data).unwrap();

        assert!(report.entries.len() >= 2);
        assert_eq!(report.entries[0].alpha, 0.0);
        for pair in report.entries.windows(2) {
            assert!(pair[1].alpha > pair[0].alpha);
            assert!(pair[1].n_leaves < pair[0].n_leaves);
            assert!(pair[1].resubstitution_rate >= pair[0].resubstitution_rate);
            assert!(splits_of(&pair[1].tree).iter().all(|s| splits_of(&pair[0].tree).contains(s)));
        }
        let last = report.entries.last().unwrap();
        assert_eq!(last.n_leaves, 1);
    }

    fn splits_of(tree: &ClassificationTree) -> Vec<(usize, u64)> {
        fn walk(node: &Node, out: &mut Vec<(usize, u64)>) {
            if let Node::Internal {
                feature,
                threshold,
                left,
                right,
            } = node
            {
                out.push((*feature, threshold.to_bits()));
                walk(left, out);
                walk(right, out);
            }
        }
        let mut out = Vec::new();
        walk(tree.root(), &mut out);
        out.sort_unstable();
        out
    }

    #[test]
    fn cv_rates_separate_full_tree_from_root() {
        let mut b = DatasetBuilder::new(vec!["x".to_string()]);
        for i in 0..12 {
            b.add_record(&format!("e{i}"), "A", vec![1.0 + (i % 3) as f64 * 0.1], 1)
                .unwrap();
            b.add_record(&format!("e{i}"), "B", vec![9.0 + (i % 3) as f64 * 0.1], 1)
                .unwrap();
        }
        let data = b.finish();
        let config = TreeGrowthConfig::new(1);
        let tree = grow_tree(&data, &config).unwrap();
        let mut report = cost_complexity_prune(&tree, &data).unwrap();
        let rates = cv_misclassification(&mut report, &data, &config, 4, 7).unwrap();
        assert_eq!(rates.len(), report.entries.len());
        assert!(rates.iter().all(|r| (0.0..=1.0).contains(r)));
        assert!((rates[0] - 0.0).abs() < 1e-12);
        assert!((rates.last().unwrap() - 0.5).abs() < 1e-12);
        assert_eq!(report.best_by_cv(), Some(0));
        assert_eq!(report.entries[0].cv_rate, Some(rates[0]));

        let mut report2 = cost_complexity_prune(&tree, &data).unwrap();
        let rates2 = cv_misclassification(&mut report2, &data, &config, 4, 7).unwrap();
        assert_eq!(rates, rates2);
    }

    #[test]
    fn cv_rejects_single_entity() {
        let mut b = DatasetBuilder::new(vec!["x".to_string()]);
        b.add_record("only", "A", vec![1.0], 1).unwrap();
        b.add_record("only", "B", vec![2.0], 1).unwrap();
        let data = b.finish();
        let config = TreeGrowthConfig::new(1);
        let tree = grow_tree(&data, &config).unwrap();
        let mut report = cost_complexity_prune(&tree, &data).unwrap();
        assert!(cv_misclassification(&mut report, &data, &config, 2, 0).is_err());
    }

    #[test]
    fn single_leaf_tree_prunes_to_itself() {
        let mut b = DatasetBuilder::new(vec!["x".to_string()]);
        b.add_record("e", "A", vec![1.0], 1).unwrap();
        b.add_record("e", "A", vec![2.0], 1).unwrap();
        let data = b.finish();
        let tree = grow_tree(&data, &TreeGrowthConfig::new(2)).unwrap();
        assert_eq!(tree.n_leaves(), 1);
        let report = cost_complexity_prune(&tree, &data).unwrap();
        assert_eq!(report.entries.len(), 1);
        assert_eq!(report.entries[0].n_leaves, 1);
        assert_eq!(report.entries[0].alpha, 0.0);
    }
}
