//! Combining accuracy and compression into a total order.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

/// Accuracy values this close count as equal.
pub const ACCURACY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum FitnessPolicy {
    /// Candidates within `delta` of the best accuracy compete on rho; the
    /// rest rank below them by accuracy.
    Constrained { delta: f64 },
    /// `accuracy + lambda * rho / rho_norm`.
    Scalarized { lambda: f64, rho_norm: f64 },
}

impl Default for FitnessPolicy {
    fn default() -> Self {
        FitnessPolicy::Constrained { delta: 0.02 }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PolicyError {
    #[error("delta must be finite and >= 0, got {0}")]
    Delta(f64),
    #[error("lambda must be finite and >= 0, got {0}")]
    Lambda(f64),
    #[error("rho normalizer must be finite and > 0, got {0}")]
    Norm(f64),
}

impl FitnessPolicy {
    pub fn check(&self) -> Result<(), PolicyError> {
        match *self {
            FitnessPolicy::Constrained { delta } if !(delta.is_finite() && delta >= 0.0) => {
                Err(PolicyError::Delta(delta))
            }
            FitnessPolicy::Scalarized { lambda, .. } if !(lambda.is_finite() && lambda >= 0.0) => {
                Err(PolicyError::Lambda(lambda))
            }
            FitnessPolicy::Scalarized { rho_norm, .. } if !(rho_norm.is_finite() && rho_norm > 0.0) => {
                Err(PolicyError::Norm(rho_norm))
            }
            _ => Ok(()),
        }
    }
}

/// Lexicographic fitness, larger is better.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitnessKeys {
    pub primary: f64,
    pub secondary: f64,
}

impl FitnessKeys {
    pub fn cmp(&self, other: &Self) -> Ordering {
        self.primary
            .total_cmp(&other.primary)
            .then(self.secondary.total_cmp(&other.secondary))
    }
}

/// Keys of one evaluated candidate, given the best accuracy among the
/// candidates it is ranked against.
pub fn fitness(accuracy: f64, rho: f64, best_accuracy: f64, policy: &FitnessPolicy) -> FitnessKeys {
    match *policy {
        FitnessPolicy::Constrained { delta } => {
            if accuracy >= best_accuracy - delta - ACCURACY_TOLERANCE {
                FitnessKeys { primary: 1.0, secondary: rho }
            } else {
                FitnessKeys { primary: 0.0, secondary: accuracy }
            }
        }
        FitnessPolicy::Scalarized { lambda, rho_norm } => FitnessKeys {
            primary: accuracy + lambda * rho / rho_norm,
            secondary: accuracy,
        },
    }
}

/// What ranking needs to know about a candidate.
#[derive(Debug, Clone, Copy)]
pub struct Scored<'a> {
    /// `None` for failed evaluations, which rank last.
    pub scores: Option<(f64, f64)>,
    pub fingerprint: &'a str,
}

/// Total order, best first: keys, then higher rho, then the smaller
/// fingerprint.
pub fn compare(a: &Scored<'_>, b: &Scored<'_>, best_accuracy: f64, policy: &FitnessPolicy) -> Ordering {
    let key = |s: &Scored<'_>| s.scores.map(|(acc, rho)| (fitness(acc, rho, best_accuracy, policy), rho));
    let by_fitness = match (key(a), key(b)) {
        (Some((ka, ra)), Some((kb, rb))) => kb.cmp(&ka).then(rb.total_cmp(&ra)),
        (Some(_), None) => Ordering::Less,
        (None, Some(_)) => Ordering::Greater,
        (None, None) => Ordering::Equal,
    };
    by_fitness.then_with(|| a.fingerprint.cmp(b.fingerprint))
}

/// Best accuracy over successful candidates, 0 when there are none.
pub fn best_accuracy<'a, I: IntoIterator<Item = &'a Scored<'a>>>(items: I) -> f64 {
    items
        .into_iter()
        .filter_map(|s| s.scores.map(|(a, _)| a))
        .fold(0.0, f64::max)
}

/// Indices of `items` sorted best first.
pub fn rank(items: &[Scored<'_>], policy: &FitnessPolicy) -> Vec<usize> {
    let best = best_accuracy(items);
    let mut idx: Vec<usize> = (0..items.len()).collect();
    idx.sort_by(|&i, &j| compare(&items[i], &items[j], best, policy));
    idx
}
