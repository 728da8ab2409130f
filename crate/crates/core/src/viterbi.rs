//! Explicit-duration Viterbi decoding.
//!
//! Finds the segmentation of an observation sequence into hidden-state
//! sojourns that maximizes the joint log probability
//!
//! ```text
//! log pi(s1) + sum_k log d_{s_k}(m_k)
//!            + sum_{k>1} log A[s_{k-1}][s_k]
//!            + sum_t log B[s(t)][o_t]
//! ```
//!
//! over all segmentations in which consecutive segments use different
//! states. The recursion runs over end time t, state j, and sojourn length
//! d, in O(T * L^2 * dmax) after prefix sums make each segment's emission
//! mass O(1).

use alloc::format;
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::data::StateSegment;
use crate::error::{Error, Result};
use crate::model::CthsmmModel;

/// Most probable state path with its score.
#[derive(Debug, Clone, PartialEq)]
pub struct ViterbiResult {
    /// Decoded sojourns in time order; durations sum to the input length.
    pub segments: Vec<StateSegment>,
    /// Joint log probability of the decoded segmentation.
    pub log_prob: f64,
}

impl ViterbiResult {
    pub fn total_duration(&self) -> u32 {
        self.segments.iter().map(|s| s.duration).sum()
    }
}

/// Decode the most probable hidden-state segmentation of `observations`,
/// one symbol per time unit. Unknown labels are rejected by name.
pub fn viterbi_decode(model: &CthsmmModel, observations: &[&str]) -> Result<ViterbiResult> {
    let indices: Result<Vec<usize>> = observations
        .iter()
        .map(|label| {
            model
                .obs_index(label)
                .ok_or_else(|| Error::UnknownObservation((*label).to_string()))
        })
        .collect();
    viterbi_decode_indexed(model, &indices?)
}

/// Decode a sequence already mapped to alphabet indices.
pub fn viterbi_decode_indexed(model: &CthsmmModel, observations: &[usize]) -> Result<ViterbiResult> {
    let t_len = observations.len();
    if t_len == 0 {
        return Err(Error::EmptyInput("observation sequence"));
    }
    let n_states = model.n_states();
    let n_obs = model.alphabet().len();
    for &o in observations {
        if o >= n_obs {
            return Err(Error::InvalidArgument {
                what: "observations",
                detail: format!("index {o} outside alphabet of size {n_obs}"),
            });
        }
    }

    let log_b: Vec<Vec<f64>> = model
        .emission()
        .iter()
        .map(|row| row.iter().map(|&p| p.ln()).collect())
        .collect();
    // emit_prefix[j][t] = sum of log B[j][o_u] for u < t.
    let mut emit_prefix = vec![vec![0.0f64; t_len + 1]; n_states];
    for j in 0..n_states {
        for (t, &o) in observations.iter().enumerate() {
            emit_prefix[j][t + 1] = emit_prefix[j][t] + log_b[j][o];
        }
    }
    let log_a: Vec<Vec<f64>> = model
        .transition()
        .iter()
        .map(|row| row.iter().map(|&p| safe_ln(p)).collect())
        .collect();
    let log_pi: Vec<f64> = model.initial().iter().map(|&p| safe_ln(p)).collect();
    let log_d: Vec<Vec<f64>> = model
        .durations()
        .iter()
        .map(|d| d.pmf_values().iter().map(|&p| p.ln()).collect())
        .collect();

    // score[t][j]: best log probability of a segmentation of the first t
    // time units whose last sojourn is in state j and ends at t.
    let mut score = vec![vec![f64::NEG_INFINITY; n_states]; t_len + 1];
    // back[t][j]: (sojourn length, previous state) for the best entry;
    // previous state is usize::MAX on a first segment.
    let mut back = vec![vec![(0u32, usize::MAX); n_states]; t_len + 1];

    // Strict > comparisons with this candidate order break score ties
    // toward the lower previous state id, then the shorter duration.
    for t in 1..=t_len {
        for j in 0..n_states {
            let dmax = log_d[j].len();
            let mut best = f64::NEG_INFINITY;
            let mut best_entry = (0u32, usize::MAX);
            if t <= dmax {
                let segment = log_d[j][t - 1] + emit_prefix[j][t];
                best = log_pi[j] + segment;
                best_entry = (t as u32, usize::MAX);
            }
            for i in 0..n_states {
                if i == j {
                    continue;
                }
                for d in 1..=dmax.min(t - 1) {
                    let start = t - d;
                    let prev = score[start][i];
                    if prev == f64::NEG_INFINITY {
                        continue;
                    }
                    let emit = emit_prefix[j][t] - emit_prefix[j][start];
                    let cand = prev + log_a[i][j] + log_d[j][d - 1] + emit;
                    if cand > best {
                        best = cand;
                        best_entry = (d as u32, i);
                    }
                }
            }
            score[t][j] = best;
            back[t][j] = best_entry;
        }
    }

    let mut best_j = 0usize;
    for j in 1..n_states {
        if score[t_len][j] > score[t_len][best_j] {
            best_j = j;
        }
    }
    if score[t_len][best_j] == f64::NEG_INFINITY {
        return Err(Error::InfeasibleDecode {
            detail: format!(
                "no segmentation of length {t_len} fits the duration supports"
            ),
        });
    }

    let mut segments: Vec<StateSegment> = Vec::new();
    let mut t = t_len;
    let mut j = best_j;
    while t > 0 {
        let (d, prev) = back[t][j];
        segments.push(StateSegment {
            state_id: (j + 1) as u32,
            duration: d,
        });
        t -= d as usize;
        if prev == usize::MAX {
            break;
        }
        j = prev;
    }
    segments.reverse();
    Ok(ViterbiResult {
        segments,
        log_prob: score[t_len][best_j],
    })
}

/// Log probability of one specific segmentation under the model, scored by
/// the same expression the decoder maximizes. The segment durations must
/// sum to the observation length.
pub fn score_segmentation(
    model: &CthsmmModel,
    observations: &[usize],
    segments: &[StateSegment],
) -> Result<f64> {
    let total: u32 = segments.iter().map(|s| s.duration).sum();
    if total as usize != observations.len() {
        return Err(Error::DimensionMismatch {
            what: "segmentation length",
            expected: observations.len(),
            got: total as usize,
        });
    }
    if segments.is_empty() {
        return Err(Error::EmptyInput("segments"));
    }
    let mut log_p = 0.0f64;
    let mut t = 0usize;
    let mut prev: Option<usize> = None;
    for seg in segments {
        let j = (seg.state_id - 1) as usize;
        if j >= model.n_states() {
            return Err(Error::InvalidArgument {
                what: "segments",
                detail: format!("state id {} out of range", seg.state_id),
            });
        }
        match prev {
            None => log_p += safe_ln(model.initial()[j]),
            Some(i) => {
                if i == j {
                    return Err(Error::InvalidArgument {
                        what: "segments",
                        detail: "adjacent segments share a state".to_string(),
                    });
                }
                log_p += safe_ln(model.transition()[i][j]);
            }
        }
        log_p += safe_ln(model.duration(seg.state_id).pmf(seg.duration));
        for &o in &observations[t..t + seg.duration as usize] {
            log_p += model.emission()[j][o].ln();
        }
        t += seg.duration as usize;
        prev = Some(j);
    }
    Ok(log_p)
}

fn safe_ln(p: f64) -> f64 {
    if p > 0.0 {
        p.ln()
    } else {
        f64::NEG_INFINITY
    }
}
