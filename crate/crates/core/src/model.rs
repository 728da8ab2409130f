//! CTHSMM assembly.
//!
//! A model is built from a grown tree and the training sequences: each
//! record is mapped to its leaf state, per-entity runs of equal states are
//! merged into sojourn segments, and the segment sequences yield the initial
//! distribution, the zero-diagonal out-state transition matrix, and one
//! duration density per state. The emission matrix comes straight from the
//! tree's leaf class distributions.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::data::{merge_consecutive_states, StateSegment, TemporalDataset};
use crate::duration::{fit_duration_density, DurationDensity};
use crate::error::{Error, Result};
use crate::tree::{ClassificationTree, StateRule};

/// Floor applied to emission and initial probabilities before
/// renormalization, keeping every log finite during decoding.
pub const EMISSION_FLOOR: f64 = 1e-9;

/// Knobs for [`build_model`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelConfig {
    /// Per-state duration support bound as a multiple of the largest
    /// observed sojourn: `dmax = ceil(dmax_factor * max_duration)`.
    pub dmax_factor: f64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig { dmax_factor: 1.5 }
    }
}

/// A classification-tree hidden semi-Markov model.
#[derive(Debug, Clone, PartialEq)]
pub struct CthsmmModel {
    tree: ClassificationTree,
    initial: Vec<f64>,
    transition: Vec<Vec<f64>>,
    emission: Vec<Vec<f64>>,
    durations: Vec<DurationDensity>,
    rules: Vec<StateRule>,
}

impl CthsmmModel {
    /// Assemble a model from its parts, validating every invariant: square
    /// zero-diagonal transition matrix with unit row sums (skipped for a
    /// single state), stochastic emission rows over the tree's alphabet,
    /// a stochastic initial distribution, and one duration density and rule
    /// per state.
    pub fn from_parts(
        tree: ClassificationTree,
        initial: Vec<f64>,
        transition: Vec<Vec<f64>>,
        emission: Vec<Vec<f64>>,
        durations: Vec<DurationDensity>,
        rules: Vec<StateRule>,
    ) -> Result<Self> {
        let n_states = tree.n_leaves();
        let n_obs = tree.training_alphabet().len();
        let check_len = |what: &'static str, got: usize| {
            if got != n_states {
                Err(Error::DimensionMismatch {
                    what,
                    expected: n_states,
                    got,
                })
            } else {
                Ok(())
            }
        };
        check_len("initial distribution", initial.len())?;
        check_len("transition rows", transition.len())?;
        check_len("emission rows", emission.len())?;
        check_len("duration densities", durations.len())?;
        check_len("state rules", rules.len())?;

        let sum_initial: f64 = initial.iter().sum();
        if (sum_initial - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidModel {
                detail: format!("initial distribution sums to {sum_initial}"),
            });
        }
        if initial.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
            return Err(Error::InvalidModel {
                detail: "initial distribution has invalid entries".to_string(),
            });
        }
        for (i, row) in transition.iter().enumerate() {
            if row.len() != n_states {
                return Err(Error::DimensionMismatch {
                    what: "transition row",
                    expected: n_states,
                    got: row.len(),
                });
            }
            if row[i] != 0.0 {
                return Err(Error::InvalidModel {
                    detail: format!("transition diagonal entry {i} is {}", row[i]),
                });
            }
            let sum: f64 = row.iter().sum();
            // With one state there are no out-state transitions at all.
            if n_states > 1 && (sum - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidModel {
                    detail: format!("transition row {i} sums to {sum}"),
                });
            }
        }
        for (j, row) in emission.iter().enumerate() {
            if row.len() != n_obs {
                return Err(Error::DimensionMismatch {
                    what: "emission row",
                    expected: n_obs,
                    got: row.len(),
                });
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidModel {
                    detail: format!("emission row {j} sums to {sum}"),
                });
            }
            if row.iter().any(|&p| !(p > 0.0) || !p.is_finite()) {
                return Err(Error::InvalidModel {
                    detail: format!("emission row {j} has entries below the floor"),
                });
            }
        }
        for (j, rule) in rules.iter().enumerate() {
            if rule.state_id != (j + 1) as u32 {
                return Err(Error::InvalidModel {
                    detail: "rules are not ordered by state id".to_string(),
                });
            }
        }
        Ok(CthsmmModel {
            tree,
            initial,
            transition,
            emission,
            durations,
            rules,
        })
    }

    pub fn n_states(&self) -> usize {
        self.initial.len()
    }

    pub fn alphabet(&self) -> &[String] {
        self.tree.training_alphabet()
    }

    pub fn feature_names(&self) -> &[String] {
        self.tree.feature_names()
    }

    pub fn obs_index(&self, label: &str) -> Option<usize> {
        self.alphabet().iter().position(|l| l == label)
    }

    pub fn initial(&self) -> &[f64] {
        &self.initial
    }

    pub fn transition(&self) -> &[Vec<f64>] {
        &self.transition
    }

    pub fn emission(&self) -> &[Vec<f64>] {
        &self.emission
    }

    pub fn durations(&self) -> &[DurationDensity] {
        &self.durations
    }

    pub fn duration(&self, state_id: u32) -> &DurationDensity {
        &self.durations[(state_id - 1) as usize]
    }

    pub fn rules(&self) -> &[StateRule] {
        &self.rules
    }

    pub fn tree(&self) -> &ClassificationTree {
        &self.tree
    }
}

/// Relative-frequency out-state transition matrix from merged segment
/// sequences. The diagonal is zero by construction; rows that never
/// transition out are set uniform over the other states. No transition is
/// counted across sequence (entity) boundaries.
pub fn estimate_transitions(
    segment_sequences: &[Vec<StateSegment>],
    n_states: usize,
) -> Result<Vec<Vec<f64>>> {
    if n_states == 0 {
        return Err(Error::InvalidArgument {
            what: "n_states",
            detail: "must be at least 1".to_string(),
        });
    }
    let mut counts = vec![vec![0u64; n_states]; n_states];
    for seq in segment_sequences {
        for pair in seq.windows(2) {
            let from = (pair[0].state_id - 1) as usize;
            let to = (pair[1].state_id - 1) as usize;
            if from == to {
                return Err(Error::InvalidArgument {
                    what: "segment_sequences",
                    detail: "adjacent segments share a state; merge them first".to_string(),
                });
            }
            if from >= n_states || to >= n_states {
                return Err(Error::InvalidArgument {
                    what: "segment_sequences",
                    detail: format!("state id out of range 1..={n_states}"),
                });
            }
            counts[from][to] += 1;
        }
    }
    let mut matrix = vec![vec![0.0f64; n_states]; n_states];
    for i in 0..n_states {
        let total: u64 = counts[i].iter().sum();
        if total > 0 {
            for j in 0..n_states {
                matrix[i][j] = counts[i][j] as f64 / total as f64;
            }
        } else if n_states > 1 {
            let uniform = 1.0 / (n_states - 1) as f64;
            for j in 0..n_states {
                if j != i {
                    matrix[i][j] = uniform;
                }
            }
        }
        matrix[i][i] = 0.0;
    }
    Ok(matrix)
}

/// Emission matrix from the tree's leaf class distributions, floored and
/// renormalized so every entry stays strictly positive.
pub fn estimate_emissions(tree: &ClassificationTree) -> Vec<Vec<f64>> {
    tree.leaves()
        .iter()
        .map(|leaf| floor_normalize(leaf.class_distribution, EMISSION_FLOOR))
        .collect()
}

/// Initial state distribution from the first segment of each sequence,
/// floored and renormalized.
pub fn estimate_initial(
    segment_sequences: &[Vec<StateSegment>],
    n_states: usize,
) -> Result<Vec<f64>> {
    let mut counts = vec![0u64; n_states];
    let mut total = 0u64;
    for seq in segment_sequences {
        if let Some(first) = seq.first() {
            let idx = (first.state_id - 1) as usize;
            if idx >= n_states {
                return Err(Error::InvalidArgument {
                    what: "segment_sequences",
                    detail: format!("state id out of range 1..={n_states}"),
                });
            }
            counts[idx] += 1;
            total += 1;
        }
    }
    if total == 0 {
        return Err(Error::EmptyInput("no nonempty segment sequences"));
    }
    let raw: Vec<f64> = counts.iter().map(|&c| c as f64 / total as f64).collect();
    Ok(floor_normalize(&raw, EMISSION_FLOOR))
}

fn floor_normalize(row: &[f64], floor: f64) -> Vec<f64> {
    let mut out: Vec<f64> = row.iter().map(|&p| p.max(floor)).collect();
    let sum: f64 = out.iter().sum();
    for p in &mut out {
        *p /= sum;
    }
    out
}

/// Map each training record to its leaf state and merge per-entity runs
/// into sojourn segments. This is the labeling every estimator consumes.
pub fn label_segments(
    tree: &ClassificationTree,
    train: &TemporalDataset,
) -> Result<Vec<Vec<StateSegment>>> {
    train
        .entities()
        .iter()
        .map(|entity| {
            let labeled: Result<Vec<(u32, u32)>> = entity
                .records
                .iter()
                .map(|r| Ok((tree.assign_state(&r.predictors)?, r.duration)))
                .collect();
            Ok(merge_consecutive_states(&labeled?))
        })
        .collect()
}

/// Build a complete CTHSMM from a tree and the dataset it was grown from.
pub fn build_model(
    tree: &ClassificationTree,
    train: &TemporalDataset,
    config: &ModelConfig,
) -> Result<CthsmmModel> {
    if !(config.dmax_factor.is_finite() && config.dmax_factor > 0.0) {
        return Err(Error::InvalidArgument {
            what: "dmax_factor",
            detail: "must be positive and finite".to_string(),
        });
    }
    let n_states = tree.n_leaves();
    let sequences = label_segments(tree, train)?;

    let mut samples: Vec<Vec<u32>> = vec![Vec::new(); n_states];
    for seq in &sequences {
        for segment in seq {
            samples[(segment.state_id - 1) as usize].push(segment.duration);
        }
    }
    let durations: Result<Vec<DurationDensity>> = samples
        .iter()
        .enumerate()
        .map(|(j, s)| {
            if s.is_empty() {
                // Tree leaves are nonempty on the training data, so every
                // state appears in at least one segment.
                return Err(Error::InvalidModel {
                    detail: format!("state {} has no duration samples", j + 1),
                });
            }
            let max = *s.iter().max().expect("nonempty");
            let dmax = ((f64::from(max) * config.dmax_factor).ceil() as u32).max(max).max(1);
            fit_duration_density(s, dmax)
        })
        .collect();

    let initial = estimate_initial(&sequences, n_states)?;
    let transition = estimate_transitions(&sequences, n_states)?;
    let emission = estimate_emissions(tree);
    let rules = tree.extract_rules();

    CthsmmModel::from_parts(tree.clone(), initial, transition, emission, durations?, rules)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::DatasetBuilder;
    use crate::tree::{grow_tree, TreeGrowthConfig};

    fn seg(state_id: u32, duration: u32) -> StateSegment {
        StateSegment { state_id, duration }
    }

    #[test]
    fn alternating_sequence_gives_exact_swap_matrix() {
        let seqs = vec![vec![seg(1, 1), seg(2, 1), seg(1, 1), seg(2, 1)]];
        let a = estimate_transitions(&seqs, 2).unwrap();
        assert_eq!(a, vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
    }

    #[test]
    fn silent_state_row_goes_uniform() {
        let seqs = vec![vec![seg(1, 1), seg(2, 1)], vec![seg(3, 4)]];
        let a = estimate_transitions(&seqs, 3).unwrap();
        assert_eq!(a[2], vec![0.5, 0.5, 0.0]);
        assert_eq!(a[2][2], 0.0);
    }

    #[test]
    fn transitions_never_cross_sequence_boundaries() {
        let seqs = vec![vec![seg(1, 1)], vec![seg(2, 1)]];
        let a = estimate_transitions(&seqs, 2).unwrap();
        // No observed transitions anywhere: both rows fall back to uniform.
        assert_eq!(a, vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
    }

    #[test]
    fn unmerged_adjacent_states_are_rejected() {
        let seqs = vec![vec![seg(1, 1), seg(1, 2)]];
        assert!(estimate_transitions(&seqs, 2).is_err());
    }

    #[test]
    fn initial_distribution_counts_first_segments() {
        let seqs = vec![
            vec![seg(1, 1)],
            vec![seg(1, 2)],
            vec![seg(2, 1)],
            vec![seg(2, 3)],
        ];
        let pi = estimate_initial(&seqs, 2).unwrap();
        assert!((pi[0] - 0.5).abs() < 1e-9);
        assert!((pi[1] - 0.5).abs() < 1e-9);
        assert!((pi.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn initial_concentrates_with_floor() {
        let seqs = vec![vec![seg(3, 1)], vec![seg(3, 2)]];
        let pi = estimate_initial(&seqs, 3).unwrap();
        assert!(pi[2] > 0.999);
        assert!(pi[0] > 0.0 && pi[1] > 0.0);
        assert!((pi.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    /// Five records visiting three separable temperature regions in the
    /// order 1,2,3,2,1 with durations 2,1,1,2,6.
    fn table_style_dataset() -> TemporalDataset {
        let mut b = DatasetBuilder::new(vec!["Temperature".to_string()]);
        b.add_record("p", "Rainy", vec![45.0], 2).unwrap();
        b.add_record("p", "Cloudy", vec![52.0], 1).unwrap();
        b.add_record("p", "Sunny", vec![62.0], 1).unwrap();
        b.add_record("p", "Cloudy", vec![55.0], 2).unwrap();
        b.add_record("p", "Rainy", vec![47.0], 6).unwrap();
        b.finish()
    }

    #[test]
    fn build_model_collects_duration_samples_per_state() {
        let data = table_style_dataset();
        let tree = grow_tree(&data, &TreeGrowthConfig::new(1)).unwrap();
        assert_eq!(tree.n_leaves(), 3);
        let model = build_model(&tree, &data, &ModelConfig::default()).unwrap();
        assert_eq!(model.n_states(), 3);

        // State visit order is 1,2,3,2,1, so the per-state sojourn samples
        // are {1: [2, 6], 2: [1, 2], 3: [1]}.
        let sequences = label_segments(&tree, &data).unwrap();
        assert_eq!(
            sequences,
            vec![vec![seg(1, 2), seg(2, 1), seg(3, 1), seg(2, 2), seg(1, 6)]]
        );
        assert_eq!(model.duration(1).sample_count(), 2);
        assert_eq!(model.duration(2).sample_count(), 2);
        assert_eq!(model.duration(3).sample_count(), 1);
        // dmax covers half again the largest sample per state.
        assert_eq!(model.duration(1).dmax(), 9);
        assert_eq!(model.duration(2).dmax(), 3);
        assert_eq!(model.duration(3).dmax(), 2);

        // Transitions 1->2, 2->3, 3->2, 2->1 with row normalization.
        assert_eq!(model.transition()[0], vec![0.0, 1.0, 0.0]);
        assert_eq!(model.transition()[1], vec![0.5, 0.0, 0.5]);
        assert_eq!(model.transition()[2], vec![0.0, 1.0, 0.0]);
        assert!(model.initial()[0] > 0.999);
    }

    #[test]
    fn single_leaf_model_has_trivial_parameters() {
        let mut b = DatasetBuilder::new(vec!["x".to_string()]);
        b.add_record("e", "A", vec![0.0], 2).unwrap();
        b.add_record("e", "A", vec![1.0], 3).unwrap();
        let data = b.finish();
        let tree = grow_tree(&data, &TreeGrowthConfig::new(2)).unwrap();
        let model = build_model(&tree, &data, &ModelConfig::default()).unwrap();
        assert_eq!(model.n_states(), 1);
        assert_eq!(model.initial(), &[1.0]);
        assert_eq!(model.transition(), &[vec![0.0]]);
        assert_eq!(model.emission(), &[vec![1.0]]);
        // Both records land in the one leaf and merge to a single sojourn.
        assert_eq!(model.duration(1).sample_count(), 1);
    }

    #[test]
    fn model_invariants_hold_on_built_models() {
        let data = table_style_dataset();
        let tree = grow_tree(&data, &TreeGrowthConfig::new(1)).unwrap();
        let model = build_model(&tree, &data, &ModelConfig::default()).unwrap();
        for (i, row) in model.transition().iter().enumerate() {
            assert_eq!(row[i], 0.0);
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
        for row in model.emission() {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            assert!(row.iter().all(|&p| p > 0.0));
        }
        assert!((model.initial().iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }
}
