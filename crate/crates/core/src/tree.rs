//! Binary classification trees over continuous predictors.
//!
//! Trees are grown by greedy recursive binary splitting on the Gini
//! criterion. Each leaf is a hidden state: it carries a class distribution
//! over the observation alphabet (the emission row it will contribute) and
//! the leaf's root-to-leaf threshold conjunction is the state's definition
//! rule.

use alloc::boxed::Box;
use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::data::TemporalDataset;
use crate::error::{Error, Result};

/// Growth limits for [`grow_tree`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeGrowthConfig {
    /// Minimum records per leaf.
    pub minbucket: usize,
    /// Maximum number of split levels below the root.
    pub max_depth: usize,
    /// Minimum records a node needs before a split is attempted.
    pub min_split: usize,
}

impl TreeGrowthConfig {
    /// Standard configuration: `min_split = 2 * minbucket`, depth capped at
    /// 30 (effectively unbounded at desk scale).
    pub fn new(minbucket: usize) -> Self {
        TreeGrowthConfig {
            minbucket,
            max_depth: 30,
            min_split: 2 * minbucket.max(1),
        }
    }
}

/// A tree node: either a threshold split or a leaf state.
///
/// A split sends `feature < threshold` left and `feature >= threshold`
/// right. Leaves hold a 1-based `state_id`, the class distribution of the
/// training records that reached them, and the record count.
#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Internal {
        feature: usize,
        threshold: f64,
        left: Box<Node>,
        right: Box<Node>,
    },
    Leaf {
        state_id: u32,
        class_distribution: Vec<f64>,
        record_count: usize,
    },
}

impl Node {
    pub fn is_leaf(&self) -> bool {
        matches!(self, Node::Leaf { .. })
    }

    fn count_leaves(&self) -> usize {
        match self {
            Node::Leaf { .. } => 1,
            Node::Internal { left, right, .. } => left.count_leaves() + right.count_leaves(),
        }
    }
}

/// Gini impurity `1 - sum(p_k^2)` of a class-count vector.
pub fn gini_impurity(class_counts: &[u64]) -> Result<f64> {
    let total: u64 = class_counts.iter().sum();
    if total == 0 {
        return Err(Error::EmptyInput("class counts are all zero"));
    }
    let total = total as f64;
    let sum_sq: f64 = class_counts
        .iter()
        .map(|&c| {
            let p = c as f64 / total;
            p * p
        })
        .sum();
    Ok(1.0 - sum_sq)
}

/// One comparison in a state definition rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Comparator {
    Lt,
    Ge,
}

/// A single threshold predicate, e.g. `RR >= 48`.
#[derive(Debug, Clone, PartialEq)]
pub struct RulePredicate {
    pub feature: String,
    pub comparator: Comparator,
    pub threshold: f64,
}

impl fmt::Display for RulePredicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.comparator {
            // rpart-style rendering: no space around ">=", a space after "<".
            Comparator::Ge => write!(f, "{}>={}", self.feature, self.threshold),
            Comparator::Lt => write!(f, "{}< {}", self.feature, self.threshold),
        }
    }
}

/// The root-to-leaf conjunction defining one hidden state's region.
#[derive(Debug, Clone, PartialEq)]
pub struct StateRule {
    pub state_id: u32,
    pub predicates: Vec<RulePredicate>,
}

impl fmt::Display for StateRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.predicates.is_empty() {
            return write!(f, "TRUE");
        }
        let mut first = true;
        for p in &self.predicates {
            if !first {
                write!(f, " & ")?;
            }
            write!(f, "{p}")?;
            first = false;
        }
        Ok(())
    }
}

/// A grown (or pruned) classification tree together with the training
/// schema it was fit against.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassificationTree {
    root: Node,
    feature_names: Vec<String>,
    alphabet: Vec<String>,
    minbucket: usize,
}

/// A leaf seen as a hidden state, ordered by state id.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeafView<'a> {
    pub state_id: u32,
    pub class_distribution: &'a [f64],
    pub record_count: usize,
}

impl ClassificationTree {
    /// Rebuild a tree from its parts, validating the structural invariants:
    /// leaf ids are exactly `1..=L` used once each, every class distribution
    /// matches the alphabet and sums to 1, and split features are in range.
    pub fn from_parts(
        root: Node,
        feature_names: Vec<String>,
        alphabet: Vec<String>,
        minbucket: usize,
    ) -> Result<Self> {
        let tree = ClassificationTree {
            root,
            feature_names,
            alphabet,
            minbucket,
        };
        tree.validate()?;
        Ok(tree)
    }

    fn validate(&self) -> Result<()> {
        let mut ids = BTreeSet::new();
        let mut stack = vec![&self.root];
        let mut n_leaves = 0usize;
        while let Some(node) = stack.pop() {
            match node {
                Node::Internal {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    if *feature >= self.feature_names.len() {
                        return Err(Error::InvalidModel {
                            detail: format!("split feature index {feature} out of range"),
                        });
                    }
                    if !threshold.is_finite() {
                        return Err(Error::InvalidModel {
                            detail: "non-finite split threshold".to_string(),
                        });
                    }
                    stack.push(left);
                    stack.push(right);
                }
                Node::Leaf {
                    state_id,
                    class_distribution,
                    record_count,
                } => {
                    n_leaves += 1;
                    if !ids.insert(*state_id) {
                        return Err(Error::InvalidModel {
                            detail: format!("duplicate leaf state id {state_id}"),
                        });
                    }
                    if class_distribution.len() != self.alphabet.len() {
                        return Err(Error::DimensionMismatch {
                            what: "leaf class distribution",
                            expected: self.alphabet.len(),
                            got: class_distribution.len(),
                        });
                    }
                    let sum: f64 = class_distribution.iter().sum();
                    if (sum - 1.0).abs() > 1e-9 {
                        return Err(Error::InvalidModel {
                            detail: format!("leaf {state_id} distribution sums to {sum}"),
                        });
                    }
                    if *record_count == 0 {
                        return Err(Error::InvalidModel {
                            detail: format!("leaf {state_id} has zero records"),
                        });
                    }
                }
            }
        }
        let expected: BTreeSet<u32> = (1..=n_leaves as u32).collect();
        if ids != expected {
            return Err(Error::InvalidModel {
                detail: format!("leaf state ids are not 1..={n_leaves}"),
            });
        }
        Ok(())
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn training_alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn minbucket(&self) -> usize {
        self.minbucket
    }

    pub fn n_leaves(&self) -> usize {
        self.root.count_leaves()
    }

    /// All leaves sorted by state id.
    pub fn leaves(&self) -> Vec<LeafView<'_>> {
        let mut out = Vec::with_capacity(self.n_leaves());
        let mut stack = vec![&self.root];
        while let Some(node) = stack.pop() {
            match node {
                Node::Internal { left, right, .. } => {
                    stack.push(left);
                    stack.push(right);
                }
                Node::Leaf {
                    state_id,
                    class_distribution,
                    record_count,
                } => out.push(LeafView {
                    state_id: *state_id,
                    class_distribution,
                    record_count: *record_count,
                }),
            }
        }
        out.sort_by_key(|l| l.state_id);
        out
    }

    /// Descend by threshold comparisons and return the unique leaf's state.
    pub fn assign_state(&self, predictors: &[f64]) -> Result<u32> {
        if predictors.len() != self.feature_names.len() {
            return Err(Error::DimensionMismatch {
                what: "predictors",
                expected: self.feature_names.len(),
                got: predictors.len(),
            });
        }
        if predictors.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue { what: "predictors" });
        }
        let mut node = &self.root;
        loop {
            match node {
                Node::Leaf { state_id, .. } => return Ok(*state_id),
                Node::Internal {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    node = if predictors[*feature] < *threshold {
                        left
                    } else {
                        right
                    };
                }
            }
        }
    }

    /// One rule per leaf, sorted by state id. Along each root-to-leaf path
    /// the predicates are simplified so a feature keeps only its binding
    /// threshold per comparator direction, in first-occurrence order.
    pub fn extract_rules(&self) -> Vec<StateRule> {
        let mut rules = Vec::with_capacity(self.n_leaves());
        let mut path: Vec<(usize, Comparator, f64)> = Vec::new();
        self.collect_rules(&self.root, &mut path, &mut rules);
        rules.sort_by_key(|r| r.state_id);
        rules
    }

    fn collect_rules(
        &self,
        node: &Node,
        path: &mut Vec<(usize, Comparator, f64)>,
        out: &mut Vec<StateRule>,
    ) {
        match node {
            Node::Leaf { state_id, .. } => {
                out.push(StateRule {
                    state_id: *state_id,
                    predicates: self.simplify_path(path),
                });
            }
            Node::Internal {
                feature,
                threshold,
                left,
                right,
            } => {
                path.push((*feature, Comparator::Lt, *threshold));
                self.collect_rules(left, path, out);
                path.pop();
                path.push((*feature, Comparator::Ge, *threshold));
                self.collect_rules(right, path, out);
                path.pop();
            }
        }
    }

    fn simplify_path(&self, path: &[(usize, Comparator, f64)]) -> Vec<RulePredicate> {
        // (feature, comparator) -> (first position, binding threshold)
        let mut kept: Vec<(usize, Comparator, usize, f64)> = Vec::new();
        for (pos, &(feature, cmp, threshold)) in path.iter().enumerate() {
            match kept
                .iter_mut()
                .find(|(f, c, _, _)| *f == feature && *c == cmp)
            {
                Some(entry) => {
                    // `<` binds at the smallest threshold, `>=` at the largest.
                    entry.3 = match cmp {
                        Comparator::Lt => entry.3.min(threshold),
                        Comparator::Ge => entry.3.max(threshold),
                    };
                }
                None => kept.push((feature, cmp, pos, threshold)),
            }
        }
        kept.sort_by_key(|&(_, _, pos, _)| pos);
        kept.into_iter()
            .map(|(feature, comparator, _, threshold)| RulePredicate {
                feature: self.feature_names[feature].clone(),
                comparator,
                threshold,
            })
            .collect()
    }

    /// Canonical byte encoding of the split structure, used to detect
    /// identical trees across a minbucket scan without re-scoring them.
    pub fn structure_key(&self) -> Vec<u8> {
        fn encode(node: &Node, out: &mut Vec<u8>) {
            match node {
                Node::Leaf { .. } => out.push(0x00),
                Node::Internal {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    out.push(0x01);
                    out.extend_from_slice(&(*feature as u32).to_le_bytes());
                    out.extend_from_slice(&threshold.to_bits().to_le_bytes());
                    encode(left, out);
                    encode(right, out);
                }
            }
        }
        let mut out = Vec::new();
        encode(&self.root, &mut out);
        out
    }
}

struct GrowContext<'a> {
    rows: Vec<(&'a [f64], usize)>,
    n_classes: usize,
    config: TreeGrowthConfig,
}

/// Grow a classification tree from a dataset's records.
///
/// Splitting is greedy on weighted child Gini; a split is accepted only if
/// both children hold at least `minbucket` records and the weighted impurity
/// strictly decreases. Equal-gain candidates resolve to the lowest feature
/// index, then the lowest threshold. Leaves are numbered 1..=L left to right.
pub fn grow_tree(train: &TemporalDataset, config: &TreeGrowthConfig) -> Result<ClassificationTree> {
    let n = train.n_records();
    if n == 0 {
        return Err(Error::EmptyInput("training dataset has no records"));
    }
    if config.minbucket == 0 || config.minbucket > n {
        return Err(Error::InvalidArgument {
            what: "minbucket",
            detail: format!("must lie in 1..={n}, got {}", config.minbucket),
        });
    }
    if config.max_depth == 0 {
        return Err(Error::InvalidArgument {
            what: "max_depth",
            detail: "must be at least 1".to_string(),
        });
    }

    let ctx = GrowContext {
        rows: train
            .records()
            .map(|r| (r.predictors.as_slice(), r.observation))
            .collect(),
        n_classes: train.schema().n_observations(),
        config: *config,
    };
    let idx: Vec<usize> = (0..n).collect();
    let mut root = grow_node(&ctx, idx, 0);
    number_leaves(&mut root, &mut 0);
    Ok(ClassificationTree {
        root,
        feature_names: train.schema().feature_names().to_vec(),
        alphabet: train.schema().alphabet().to_vec(),
        minbucket: config.minbucket,
    })
}

fn class_counts(ctx: &GrowContext<'_>, idx: &[usize]) -> Vec<u64> {
    let mut counts = vec![0u64; ctx.n_classes];
    for &i in idx {
        counts[ctx.rows[i].1] += 1;
    }
    counts
}

fn make_leaf(ctx: &GrowContext<'_>, idx: &[usize]) -> Node {
    let counts = class_counts(ctx, idx);
    let n = idx.len() as f64;
    Node::Leaf {
        state_id: 0, // numbered after growth
        class_distribution: counts.iter().map(|&c| c as f64 / n).collect(),
        record_count: idx.len(),
    }
}

fn grow_node(ctx: &GrowContext<'_>, idx: Vec<usize>, depth: usize) -> Node {
    let counts = class_counts(ctx, &idx);
    let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
    if depth >= ctx.config.max_depth || idx.len() < ctx.config.min_split || pure {
        return make_leaf(ctx, &idx);
    }

    let Some((feature, threshold)) = best_split(ctx, &idx, &counts) else {
        return make_leaf(ctx, &idx);
    };

    let (left_idx, right_idx): (Vec<usize>, Vec<usize>) = idx
        .into_iter()
        .partition(|&i| ctx.rows[i].0[feature] < threshold);
    Node::Internal {
        feature,
        threshold,
        left: Box::new(grow_node(ctx, left_idx, depth + 1)),
        right: Box::new(grow_node(ctx, right_idx, depth + 1)),
    }
}

/// Find the best admissible split of `idx`, or `None` when no candidate
/// strictly decreases the weighted Gini impurity.
///
/// Splits are scored by `Q = sum_k c_k^2/n_left + sum_k c_k^2/n_right`;
/// maximizing Q is equivalent to minimizing weighted child Gini.
fn best_split(ctx: &GrowContext<'_>, idx: &[usize], parent_counts: &[u64]) -> Option<(usize, f64)> {
    let n = idx.len();
    let n_features = ctx.rows[idx[0]].0.len();
    let parent_q: f64 = parent_counts.iter().map(|&c| (c * c) as f64).sum::<f64>() / n as f64;
    // Strictness margin absorbs float noise in the Q comparison.
    let eps = parent_q.abs().max(1.0) * 1e-12;

    let mut best: Option<(f64, usize, f64)> = None; // (q, feature, threshold)
    let mut sorted = idx.to_vec();
    for feature in 0..n_features {
        sorted.sort_by(|&a, &b| ctx.rows[a].0[feature].total_cmp(&ctx.rows[b].0[feature]));
        let mut left_counts = vec![0u64; ctx.n_classes];
        let mut left_sum_sq = 0.0f64;
        for (taken, window) in sorted.windows(2).enumerate() {
            let (i, j) = (window[0], window[1]);
            let class = ctx.rows[i].1;
            // Incrementally maintain sum of squared left counts.
            let c = left_counts[class];
            left_sum_sq += (2 * c + 1) as f64;
            left_counts[class] = c + 1;

            let n_left = taken + 1;
            let n_right = n - n_left;
            let (lo, hi) = (ctx.rows[i].0[feature], ctx.rows[j].0[feature]);
            if lo == hi {
                continue;
            }
            if n_left < ctx.config.minbucket || n_right < ctx.config.minbucket {
                continue;
            }
            let right_sum_sq: f64 = parent_counts
                .iter()
                .zip(&left_counts)
                .map(|(&p, &l)| {
                    let r = (p - l) as f64;
                    r * r
                })
                .sum();
            let q = left_sum_sq / n_left as f64 + right_sum_sq / n_right as f64;
            if q <= parent_q + eps {
                continue;
            }
            let threshold = lo + (hi - lo) / 2.0;
            let better = match best {
                None => true,
                Some((best_q, _, _)) => q > best_q,
            };
            if better {
                best = Some((q, feature, threshold));
            }
        }
    }
    best.map(|(_, feature, threshold)| (feature, threshold))
}

fn number_leaves(node: &mut Node, next: &mut u32) {
    match node {
        Node::Leaf { state_id, .. } => {
            *next += 1;
            *state_id = *next;
        }
        Node::Internal { left, right, .. } => {
            number_leaves(left, next);
            number_leaves(right, next);
        }
    }
}
