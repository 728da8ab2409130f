//! Temporal event-log data.
//!
//! A [`TemporalDataset`] holds event records grouped by entity (a patient, a
//! monitored system, ...). Each record carries a categorical observation, a
//! vector of continuous predictors, and a positive integer duration in time
//! units. The same module provides the two working representations used by
//! estimation and evaluation: run-length [`StateSegment`] lists and flat
//! per-time-unit state sequences.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Ordered feature names plus the observation alphabet.
///
/// The alphabet is inferred at load time: it contains exactly the distinct
/// observation labels present in the data, in first-appearance order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schema {
    feature_names: Vec<String>,
    alphabet: Vec<String>,
}

impl Schema {
    pub fn new(feature_names: Vec<String>, alphabet: Vec<String>) -> Self {
        Schema {
            feature_names,
            alphabet,
        }
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn n_observations(&self) -> usize {
        self.alphabet.len()
    }

    /// Index of an observation label in the alphabet, if present.
    pub fn obs_index(&self, label: &str) -> Option<usize> {
        self.alphabet.iter().position(|l| l == label)
    }
}

/// One event-log row: an observation with its predictors and duration.
///
/// The observation is stored as an index into the dataset schema's alphabet.
#[derive(Debug, Clone, PartialEq)]
pub struct TemporalRecord {
    pub observation: usize,
    pub predictors: Vec<f64>,
    pub duration: u32,
}

/// The ordered records of a single entity.
#[derive(Debug, Clone, PartialEq)]
pub struct EntitySequence {
    pub id: String,
    pub records: Vec<TemporalRecord>,
}

impl EntitySequence {
    /// Total duration of the sequence in time units.
    pub fn total_duration(&self) -> u64 {
        self.records.iter().map(|r| u64::from(r.duration)).sum()
    }
}

/// A validated, immutable event-log dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct TemporalDataset {
    schema: Schema,
    entities: Vec<EntitySequence>,
}

impl TemporalDataset {
    /// Assemble a dataset from pre-indexed parts, validating what the
    /// builder would have enforced: distinct nonempty entity ids, nonempty
    /// record lists, observation indices within the alphabet, uniform
    /// predictor arity with finite values, and positive durations.
    pub fn from_parts(schema: Schema, entities: Vec<EntitySequence>) -> Result<Self> {
        if entities.is_empty() {
            return Err(Error::EmptyInput("entities"));
        }
        let mut seen = alloc::collections::BTreeSet::new();
        for entity in &entities {
            if entity.id.is_empty() {
                return Err(Error::InvalidArgument {
                    what: "entity id",
                    detail: "must be nonempty".to_string(),
                });
            }
            if !seen.insert(entity.id.clone()) {
                return Err(Error::InvalidArgument {
                    what: "entity id",
                    detail: alloc::format!("duplicate id {:?}", entity.id),
                });
            }
            if entity.records.is_empty() {
                return Err(Error::EmptyInput("entity records"));
            }
            for record in &entity.records {
                if record.observation >= schema.n_observations() {
                    return Err(Error::InvalidArgument {
                        what: "observation",
                        detail: alloc::format!(
                            "index {} outside alphabet of size {}",
                            record.observation,
                            schema.n_observations()
                        ),
                    });
                }
                if record.predictors.len() != schema.n_features() {
                    return Err(Error::DimensionMismatch {
                        what: "predictors",
                        expected: schema.n_features(),
                        got: record.predictors.len(),
                    });
                }
                if record.predictors.iter().any(|p| !p.is_finite()) {
                    return Err(Error::NonFiniteValue { what: "predictor" });
                }
                if record.duration == 0 {
                    return Err(Error::InvalidArgument {
                        what: "duration",
                        detail: "must be at least 1".to_string(),
                    });
                }
            }
        }
        Ok(TemporalDataset { schema, entities })
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn entities(&self) -> &[EntitySequence] {
        &self.entities
    }

    pub fn n_entities(&self) -> usize {
        self.entities.len()
    }

    pub fn n_records(&self) -> usize {
        self.entities.iter().map(|e| e.records.len()).sum()
    }

    /// Iterate over every record across all entities, in dataset order.
    pub fn records(&self) -> impl Iterator<Item = &TemporalRecord> {
        self.entities.iter().flat_map(|e| e.records.iter())
    }

    /// Dataset holding only the entities at `indices`, keeping the parent
    /// schema so observation and feature indexing stay compatible.
    pub fn subset(&self, indices: &[usize]) -> Result<TemporalDataset> {
        if indices.is_empty() {
            return Err(Error::EmptyInput("entity indices"));
        }
        let entities: Result<Vec<EntitySequence>> = indices
            .iter()
            .map(|&i| {
                self.entities.get(i).cloned().ok_or(Error::InvalidArgument {
                    what: "indices",
                    detail: alloc::format!("entity index {i} out of range"),
                })
            })
            .collect();
        Ok(TemporalDataset {
            schema: self.schema.clone(),
            entities: entities?,
        })
    }

    /// Partition entities into train and test subsets.
    ///
    /// `round(train_fraction * n_entities)` entities go to the train side;
    /// the split is deterministic for a given seed and both sides keep the
    /// parent schema, so candidate models built from either share one
    /// observation alphabet.
    pub fn split_by_entity(
        &self,
        train_fraction: f64,
        seed: u64,
    ) -> Result<(TemporalDataset, TemporalDataset)> {
        if self.entities.is_empty() {
            return Err(Error::EmptyInput("dataset has no entities"));
        }
        if !(train_fraction > 0.0 && train_fraction <= 1.0) {
            return Err(Error::InvalidArgument {
                what: "train_fraction",
                detail: "must lie in (0, 1]".to_string(),
            });
        }
        let n = self.entities.len();
        let n_train = ((train_fraction * n as f64).round() as usize).min(n);

        let mut order: Vec<usize> = (0..n).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        order.shuffle(&mut rng);
        let mut train_idx = order[..n_train].to_vec();
        let mut test_idx = order[n_train..].to_vec();
        // Keep original entity order within each side.
        train_idx.sort_unstable();
        test_idx.sort_unstable();

        let pick = |idx: &[usize]| TemporalDataset {
            schema: self.schema.clone(),
            entities: idx.iter().map(|&i| self.entities[i].clone()).collect(),
        };
        Ok((pick(&train_idx), pick(&test_idx)))
    }
}

/// Incrementally assembles a [`TemporalDataset`], interning entity ids and
/// observation labels as they appear.
#[derive(Debug)]
pub struct DatasetBuilder {
    feature_names: Vec<String>,
    alphabet: Vec<String>,
    obs_lookup: BTreeMap<String, usize>,
    entities: Vec<EntitySequence>,
    entity_lookup: BTreeMap<String, usize>,
}

impl DatasetBuilder {
    pub fn new(feature_names: Vec<String>) -> Self {
        DatasetBuilder {
            feature_names,
            alphabet: Vec::new(),
            obs_lookup: BTreeMap::new(),
            entities: Vec::new(),
            entity_lookup: BTreeMap::new(),
        }
    }

    /// Append one record to its entity's sequence. Records of an entity are
    /// kept in insertion order regardless of how entities interleave.
    pub fn add_record(
        &mut self,
        entity_id: &str,
        observation: &str,
        predictors: Vec<f64>,
        duration: u32,
    ) -> Result<()> {
        if duration < 1 {
            return Err(Error::InvalidArgument {
                what: "duration",
                detail: "must be a positive integer".to_string(),
            });
        }
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

        let obs = match self.obs_lookup.get(observation) {
            Some(&i) => i,
            None => {
                let i = self.alphabet.len();
                self.alphabet.push(observation.to_string());
                self.obs_lookup.insert(observation.to_string(), i);
                i
            }
        };
        let entity = match self.entity_lookup.get(entity_id) {
            Some(&i) => i,
            None => {
                let i = self.entities.len();
                self.entities.push(EntitySequence {
                    id: entity_id.to_string(),
                    records: Vec::new(),
                });
                self.entity_lookup.insert(entity_id.to_string(), i);
                i
            }
        };
        self.entities[entity].records.push(TemporalRecord {
            observation: obs,
            predictors,
            duration,
        });
        Ok(())
    }

    pub fn finish(self) -> TemporalDataset {
        TemporalDataset {
            schema: Schema::new(self.feature_names, self.alphabet),
            entities: self.entities,
        }
    }
}

/// A maximal run of one hidden state: the state id (1-based) and how many
/// time units the system sojourned there.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StateSegment {
    pub state_id: u32,
    pub duration: u32,
}

impl StateSegment {
    pub fn new(state_id: u32, duration: u32) -> Self {
        StateSegment { state_id, duration }
    }
}

/// Merge adjacent equal states, summing durations.
///
/// The input pairs are `(state_id, duration)` with durations >= 1; the output
/// is a segment list where adjacent segments differ in state and the total
/// duration is preserved.
pub fn merge_consecutive_states(labeled: &[(u32, u32)]) -> Vec<StateSegment> {
    let mut segments: Vec<StateSegment> = Vec::new();
    for &(state_id, duration) in labeled {
        match segments.last_mut() {
            Some(last) if last.state_id == state_id => last.duration += duration,
            _ => segments.push(StateSegment { state_id, duration }),
        }
    }
    segments
}

/// Expand a segment list into one state id per time unit.
pub fn expand_to_time_units(segments: &[StateSegment]) -> Vec<u32> {
    let total: usize = segments.iter().map(|s| s.duration as usize).sum();
    let mut out = Vec::with_capacity(total);
    for s in segments {
        for _ in 0..s.duration {
            out.push(s.state_id);
        }
    }
    out
}
