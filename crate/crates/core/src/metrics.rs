//! Per-time-unit sequence comparison metrics.
//!
//! Hit ratio counts matched positions; LMRL ratio measures the longest
//! contiguous matched run. Both divide by the predicted length, so when
//! the prediction is longer than the actual sequence the overhang counts
//! as misses. The horizon sweep applies both metrics to Viterbi decodes of
//! growing observation prefixes, averaging over the entities long enough
//! for each horizon.

use alloc::string::ToString;
use alloc::vec::Vec;

use crate::data::{expand_to_time_units, TemporalDataset};
use crate::error::{Error, Result};
use crate::model::CthsmmModel;
use crate::tree::ClassificationTree;
use crate::viterbi::viterbi_decode_indexed;

/// Averaged prediction quality at one horizon. Ratios are `None` when no
/// entity was long enough to be evaluated.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalMetrics {
    pub horizon: u32,
    pub hit_ratio: Option<f64>,
    pub lmrl_ratio: Option<f64>,
    pub n_sequences: usize,
}

/// Fraction of predicted positions whose state matches the actual state.
/// Positions past the end of `actual` count as misses.
pub fn hit_ratio(actual: &[u32], predicted: &[u32]) -> Result<f64> {
    if predicted.is_empty() {
        return Err(Error::EmptyInput("predicted states"));
    }
    let overlap = actual.len().min(predicted.len());
    let matched = (0..overlap).filter(|&s| actual[s] == predicted[s]).count();
    Ok(matched as f64 / predicted.len() as f64)
}

/// Length of the longest contiguous run of matching positions, divided by
/// the predicted length.
pub fn lmrl_ratio(actual: &[u32], predicted: &[u32]) -> Result<f64> {
    if predicted.is_empty() {
        return Err(Error::EmptyInput("predicted states"));
    }
    let overlap = actual.len().min(predicted.len());
    let mut longest = 0usize;
    let mut run = 0usize;
    for s in 0..overlap {
        if actual[s] == predicted[s] {
            run += 1;
            longest = longest.max(run);
        } else {
            run = 0;
        }
    }
    Ok(longest as f64 / predicted.len() as f64)
}

/// Decode the first `h` observation time units of every sufficiently long
/// test entity and compare against the states the tree assigns to the
/// actual records, for each horizon `h`.
///
/// An entity is eligible at horizon `h` when its total duration is at
/// least `h`; averages are unweighted across eligible entities.
pub fn horizon_sweep(
    model: &CthsmmModel,
    tree: &ClassificationTree,
    test: &TemporalDataset,
    horizons: &[u32],
) -> Result<Vec<EvalMetrics>> {
    if horizons.is_empty() {
        return Err(Error::EmptyInput("horizons"));
    }
    if horizons.iter().any(|&h| h == 0) {
        return Err(Error::InvalidArgument {
            what: "horizons",
            detail: "must be at least 1".to_string(),
        });
    }
    if test.n_records() == 0 {
        return Err(Error::EmptyInput("test data"));
    }
    // Map the test dataset's alphabet into the model's before any decode,
    // so a foreign label fails once, by name.
    let label_map: Result<Vec<usize>> = test
        .schema()
        .alphabet()
        .iter()
        .map(|label| {
            model
                .obs_index(label)
                .ok_or_else(|| Error::UnknownObservation(label.clone()))
        })
        .collect();
    let label_map = label_map?;

    struct Prepared {
        observations: Vec<usize>,
        actual: Vec<u32>,
    }
    let mut prepared: Vec<Prepared> = Vec::with_capacity(test.n_entities());
    for entity in test.entities() {
        let mut observations = Vec::new();
        let mut labeled = Vec::with_capacity(entity.records.len());
        for record in &entity.records {
            let mapped = label_map[record.observation];
            for _ in 0..record.duration {
                observations.push(mapped);
            }
            labeled.push((tree.assign_state(&record.predictors)?, record.duration));
        }
        let segments = crate::data::merge_consecutive_states(&labeled);
        prepared.push(Prepared {
            observations,
            actual: expand_to_time_units(&segments),
        });
    }

    let mut out = Vec::with_capacity(horizons.len());
    for &h in horizons {
        let mut hit_sum = 0.0f64;
        let mut lmrl_sum = 0.0f64;
        let mut n = 0usize;
        for p in &prepared {
            if p.observations.len() < h as usize {
                continue;
            }
            let decoded = viterbi_decode_indexed(model, &p.observations[..h as usize])?;
            let predicted = expand_to_time_units(&decoded.segments);
            hit_sum += hit_ratio(&p.actual, &predicted)?;
            lmrl_sum += lmrl_ratio(&p.actual, &predicted)?;
            n += 1;
        }
        out.push(if n == 0 {
            EvalMetrics {
                horizon: h,
                hit_ratio: None,
                lmrl_ratio: None,
                n_sequences: 0,
            }
        } else {
            EvalMetrics {
                horizon: h,
                hit_ratio: Some(hit_sum / n as f64),
                lmrl_ratio: Some(lmrl_sum / n as f64),
                n_sequences: n,
            }
        });
    }
    Ok(out)
}
