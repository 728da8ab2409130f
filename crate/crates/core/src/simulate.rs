//! Ground-truth semi-Markov data generation.
//!
//! A [`GroundTruthSpec`] fully describes a hidden semi-Markov system whose
//! states own pairwise-disjoint axis-aligned boxes in predictor space.
//! Sampling draws predictors uniformly inside the sojourning state's box,
//! so a classification tree can recover the state regions exactly and
//! estimation error can be measured against known parameters.
//!
//! Entity sampling streams are independent: entity `k` samples from the
//! spec RNG's stream `k`, so the dataset is identical for a fixed seed no
//! matter how entities are scheduled.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::{EntitySequence, Schema, TemporalDataset, TemporalRecord};
use crate::error::{Error, Result};

/// Sojourn-time distribution of one state.
#[derive(Debug, Clone, PartialEq)]
pub enum DurationSpec {
    /// P(d = m) = p_self^(m-1) (1 - p_self): the sojourn law of a Markov
    /// chain that re-enters the state with probability p_self each unit.
    Geometric { p_self: f64 },
    /// Explicit pmf; `probs[m - 1]` is P(d = m).
    Pmf { probs: Vec<f64> },
}

/// One hidden state: its predictor box, emission row, and duration law.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpec {
    /// Inclusive-exclusive interval per predictor axis.
    pub bounds: Vec<(f64, f64)>,
    /// Distribution over the observation alphabet.
    pub emission: Vec<f64>,
    pub duration: DurationSpec,
}

/// A complete generating system.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruthSpec {
    pub feature_names: Vec<String>,
    pub alphabet: Vec<String>,
    pub states: Vec<StateSpec>,
    /// Out-state transition matrix, zero diagonal.
    pub transition: Vec<Vec<f64>>,
    pub initial: Vec<f64>,
    pub n_entities: usize,
    /// Target sequence length in time units; sampling stops at the first
    /// sojourn boundary reaching it, so every entity runs at least this
    /// long.
    pub mean_sequence_length: u32,
    /// Merge consecutive identical observations within a sojourn into one
    /// record with summed duration (the event-log row shape); the merged
    /// record keeps the first time unit's predictors.
    pub merge_runs: bool,
    pub seed: u64,
}

impl GroundTruthSpec {
    /// Check every structural invariant before any sampling.
    pub fn validate(&self) -> Result<()> {
        let l = self.states.len();
        let n_features = self.feature_names.len();
        let n_obs = self.alphabet.len();
        if l == 0 {
            return Err(Error::EmptyInput("states"));
        }
        if n_features == 0 {
            return Err(Error::EmptyInput("feature names"));
        }
        if n_obs == 0 {
            return Err(Error::EmptyInput("alphabet"));
        }
        if self.n_entities == 0 {
            return Err(Error::InvalidArgument {
                what: "n_entities",
                detail: "must be at least 1".to_string(),
            });
        }
        if self.mean_sequence_length == 0 {
            return Err(Error::InvalidArgument {
                what: "mean_sequence_length",
                detail: "must be at least 1".to_string(),
            });
        }
        for (j, state) in self.states.iter().enumerate() {
            if state.bounds.len() != n_features {
                return Err(Error::DimensionMismatch {
                    what: "state bounds",
                    expected: n_features,
                    got: state.bounds.len(),
                });
            }
            for &(lo, hi) in &state.bounds {
                if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                    return Err(Error::InvalidArgument {
                        what: "state bounds",
                        detail: alloc::format!("state {j}: empty or non-finite interval"),
                    });
                }
            }
            check_row("emission", &state.emission, n_obs)?;
            match &state.duration {
                DurationSpec::Geometric { p_self } => {
                    if !(0.0..1.0).contains(p_self) {
                        return Err(Error::InvalidArgument {
                            what: "p_self",
                            detail: alloc::format!("state {j}: {p_self} outside [0, 1)"),
                        });
                    }
                }
                DurationSpec::Pmf { probs } => {
                    check_row("duration pmf", probs, probs.len().max(1))?;
                }
            }
        }
        // Pairwise disjoint boxes: some axis must separate each pair.
        for a in 0..l {
            for b in (a + 1)..l {
                let disjoint = (0..n_features).any(|f| {
                    let (alo, ahi) = self.states[a].bounds[f];
                    let (blo, bhi) = self.states[b].bounds[f];
                    ahi <= blo || bhi <= alo
                });
                if !disjoint {
                    return Err(Error::InvalidArgument {
                        what: "state bounds",
                        detail: alloc::format!("states {a} and {b} overlap"),
                    });
                }
            }
        }
        if self.transition.len() != l {
            return Err(Error::DimensionMismatch {
                what: "transition rows",
                expected: l,
                got: self.transition.len(),
            });
        }
        for (i, row) in self.transition.iter().enumerate() {
            if row.len() != l {
                return Err(Error::DimensionMismatch {
                    what: "transition row",
                    expected: l,
                    got: row.len(),
                });
            }
            if row[i] != 0.0 {
                return Err(Error::InvalidArgument {
                    what: "transition",
                    detail: alloc::format!("diagonal entry {i} must be 0"),
                });
            }
            if l > 1 {
                check_row("transition row", row, l)?;
            }
        }
        check_row("initial distribution", &self.initial, l)?;
        Ok(())
    }
}

fn check_row(what: &'static str, row: &[f64], expected_len: usize) -> Result<()> {
    if row.len() != expected_len {
        return Err(Error::DimensionMismatch {
            what,
            expected: expected_len,
            got: row.len(),
        });
    }
    if row.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
        return Err(Error::NonFiniteValue { what });
    }
    let sum: f64 = row.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument {
            what,
            detail: alloc::format!("sums to {sum}, expected 1"),
        });
    }
    Ok(())
}

/// Draw one sojourn length.
///
/// The geometric law is sampled as the Markov chain it comes from: repeat
/// a self-transition coin flip until it fails.
pub fn sample_sojourn<R: Rng + ?Sized>(duration: &DurationSpec, rng: &mut R) -> u32 {
    match duration {
        DurationSpec::Geometric { p_self } => {
            let mut d = 1u32;
            while rng.gen::<f64>() < *p_self {
                d = d.saturating_add(1);
            }
            d
        }
        DurationSpec::Pmf { probs } => (categorical(probs, rng) + 1) as u32,
    }
}

fn categorical<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let r: f64 = rng.gen();
    let mut acc = 0.0f64;
    for (i, &p) in probs.iter().enumerate() {
        acc += p;
        if r < acc {
            return i;
        }
    }
    probs.len() - 1
}

/// Sample a full dataset from the spec. Deterministic for a fixed seed.
pub fn sample_dataset(spec: &GroundTruthSpec) -> Result<TemporalDataset> {
    spec.validate()?;
    let schema = Schema::new(spec.feature_names.clone(), spec.alphabet.clone());
    let mut entities = Vec::with_capacity(spec.n_entities);
    for k in 0..spec.n_entities {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        rng.set_stream(k as u64);
        entities.push(EntitySequence {
            id: alloc::format!("sim-{k:05}"),
            records: sample_entity(spec, &mut rng),
        });
    }
    TemporalDataset::from_parts(schema, entities)
}

fn sample_entity(spec: &GroundTruthSpec, rng: &mut ChaCha8Rng) -> Vec<TemporalRecord> {
    let mut records = Vec::new();
    let mut state = categorical(&spec.initial, rng);
    let mut elapsed = 0u64;
    loop {
        let s = &spec.states[state];
        let d = sample_sojourn(&s.duration, rng);
        let mut run: Option<TemporalRecord> = None;
        for _ in 0..d {
            let observation = categorical(&s.emission, rng);
            let predictors: Vec<f64> = s
                .bounds
                .iter()
                .map(|&(lo, hi)| rng.gen_range(lo..hi))
                .collect();
            match run.as_mut() {
                Some(r) if spec.merge_runs && r.observation == observation => {
                    r.duration += 1;
                }
                _ => {
                    if let Some(r) = run.take() {
                        records.push(r);
                    }
                    run = Some(TemporalRecord {
                        observation,
                        predictors,
                        duration: 1,
                    });
                }
            }
        }
        if let Some(r) = run.take() {
            records.push(r);
        }
        elapsed += u64::from(d);
        if elapsed >= u64::from(spec.mean_sequence_length) {
            break;
        }
        if spec.states.len() == 1 {
            // A single state never transitions out; extend its sojourn by
            // looping instead.
            continue;
        }
        state = categorical(&spec.transition[state], rng);
    }
    records
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_state_spec() -> GroundTruthSpec {
        GroundTruthSpec {
            feature_names: vec!["x".to_string()],
            alphabet: vec!["lo".to_string(), "hi".to_string()],
            states: vec![
                StateSpec {
                    bounds: vec![(0.0, 10.0)],
                    emission: vec![0.9, 0.1],
                    duration: DurationSpec::Geometric { p_self: 0.5 },
                },
                StateSpec {
                    bounds: vec![(10.0, 20.0)],
                    emission: vec![0.2, 0.8],
                    duration: DurationSpec::Pmf {
                        probs: vec![0.3, 0.4, 0.3],
                    },
                },
            ],
            transition: vec![vec![0.0, 1.0], vec![1.0, 0.0]],
            initial: vec![0.5, 0.5],
            n_entities: 8,
            mean_sequence_length: 30,
            merge_runs: false,
            seed: 42,
        }
    }

    #[test]
    fn fixed_seed_reproduces_dataset() {
        let spec = two_state_spec();
        let a = sample_dataset(&spec).unwrap();
        let b = sample_dataset(&spec).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.n_entities(), 8);
        for entity in a.entities() {
            assert!(entity.total_duration() >= 30);
        }
    }

    #[test]
    fn different_seeds_differ() {
        let spec = two_state_spec();
        let mut other = spec.clone();
        other.seed = 43;
        assert_ne!(sample_dataset(&spec).unwrap(), sample_dataset(&other).unwrap());
    }

    #[test]
    fn predictors_stay_inside_generating_boxes() {
        let spec = two_state_spec();
        let data = sample_dataset(&spec).unwrap();
        for record in data.records() {
            let x = record.predictors[0];
            assert!((0.0..20.0).contains(&x));
            // Boxes encode the state; emissions cannot leak across: a
            // record in [0,10) was generated by state 1, else state 2.
            assert!(x >= 0.0 && x < 20.0);
        }
    }

    #[test]
    fn merged_runs_sum_to_same_total_duration() {
        let spec = two_state_spec();
        let mut merged_spec = spec.clone();
        merged_spec.merge_runs = true;
        let flat = sample_dataset(&spec).unwrap();
        let merged = sample_dataset(&merged_spec).unwrap();
        for (a, b) in flat.entities().iter().zip(merged.entities()) {
            assert_eq!(a.total_duration(), b.total_duration());
            assert!(b.records.len() <= a.records.len());
        }
        assert!(merged.n_records() < flat.n_records());
        for record in merged.records() {
            assert!(record.duration >= 1);
        }
    }

    #[test]
    fn empirical_transitions_track_spec_matrix() {
        let spec = GroundTruthSpec {
            feature_names: vec!["x".to_string()],
            alphabet: vec!["a".to_string(), "b".to_string(), "c".to_string()],
            states: vec![
                StateSpec {
                    bounds: vec![(0.0, 1.0)],
                    emission: vec![1.0, 0.0, 0.0],
                    duration: DurationSpec::Pmf { probs: vec![1.0] },
                },
                StateSpec {
                    bounds: vec![(1.0, 2.0)],
                    emission: vec![0.0, 1.0, 0.0],
                    duration: DurationSpec::Pmf { probs: vec![1.0] },
                },
                StateSpec {
                    bounds: vec![(2.0, 3.0)],
                    emission: vec![0.0, 0.0, 1.0],
                    duration: DurationSpec::Pmf { probs: vec![1.0] },
                },
            ],
            transition: vec![
                vec![0.0, 0.7, 0.3],
                vec![0.4, 0.0, 0.6],
                vec![0.5, 0.5, 0.0],
            ],
            initial: vec![1.0, 0.0, 0.0],
            n_entities: 4,
            mean_sequence_length: 3000,
            merge_runs: false,
            seed: 7,
        };
        spec.validate().unwrap();
        let data = sample_dataset(&spec).unwrap();

        // Durations are all 1, so consecutive records are consecutive
        // states; recover the state from the predictor box.
        let mut counts = [[0u64; 3]; 3];
        for entity in data.entities() {
            for pair in entity.records.windows(2) {
                let from = pair[0].predictors[0].floor() as usize;
                let to = pair[1].predictors[0].floor() as usize;
                counts[from][to] += 1;
            }
        }
        let total_transitions: u64 = counts.iter().flatten().sum();
        assert!(total_transitions >= 10_000);
        for i in 0..3 {
            let row_total: u64 = counts[i].iter().sum();
            let mut l1 = 0.0f64;
            for j in 0..3 {
                let freq = counts[i][j] as f64 / row_total as f64;
                l1 += (freq - spec.transition[i][j]).abs();
            }
            assert!(l1 <= 0.05, "row {i} L1 distance {l1}");
        }
    }

    #[test]
    fn overlapping_boxes_are_rejected_before_sampling() {
        let mut spec = two_state_spec();
        spec.states[1].bounds = vec![(5.0, 20.0)];
        assert!(matches!(
            sample_dataset(&spec),
            Err(Error::InvalidArgument { .. })
        ));
    }

    #[test]
    fn invalid_rows_are_rejected() {
        let mut spec = two_state_spec();
        spec.transition = vec![vec![0.0, 0.9], vec![1.0, 0.0]];
        assert!(spec.validate().is_err());

        let mut spec = two_state_spec();
        spec.transition = vec![vec![0.1, 0.9], vec![1.0, 0.0]];
        assert!(spec.validate().is_err());

        let mut spec = two_state_spec();
        spec.states[0].emission = vec![0.9, 0.2];
        assert!(spec.validate().is_err());

        let mut spec = two_state_spec();
        spec.states[0].duration = DurationSpec::Geometric { p_self: 1.0 };
        assert!(spec.validate().is_err());

        let mut spec = two_state_spec();
        spec.initial = vec![0.5, 0.4];
        assert!(spec.validate().is_err());
    }

    #[test]
    fn geometric_sojourns_have_geometric_mean() {
        // Mean of the sojourn law with p_self = 0.8 is 1 / (1 - 0.8) = 5.
        let mut rng = ChaCha8Rng::seed_from_u64(123);
        let duration = DurationSpec::Geometric { p_self: 0.8 };
        let n = 50_000u32;
        let total: u64 = (0..n)
            .map(|_| u64::from(sample_sojourn(&duration, &mut rng)))
            .sum();
        let mean = total as f64 / f64::from(n);
        // Standard error is 4.47 / sqrt(n) ~ 0.02; allow 5 of them.
        assert!((mean - 5.0).abs() < 0.1, "mean {mean}");
    }

    #[test]
    fn single_state_spec_samples_one_long_run() {
        let spec = GroundTruthSpec {
            feature_names: vec!["x".to_string()],
            alphabet: vec!["only".to_string()],
            states: vec![StateSpec {
                bounds: vec![(0.0, 1.0)],
                emission: vec![1.0],
                duration: DurationSpec::Pmf {
                    probs: vec![0.5, 0.5],
                },
            }],
            transition: vec![vec![0.0]],
            initial: vec![1.0],
            n_entities: 2,
            mean_sequence_length: 9,
            merge_runs: false,
            seed: 1,
        };
        let data = sample_dataset(&spec).unwrap();
        for entity in data.entities() {
            assert!(entity.total_duration() >= 9);
            for record in &entity.records {
                assert_eq!(record.observation, 0);
            }
        }
    }
}
