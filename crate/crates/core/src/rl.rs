//! Group-relative policy optimization arithmetic and the OCR-style rewards.
//!
//! Everything numeric is generic over the float type; the crate root has
//! `f64` and `f32` aliases.

use num_traits::Float;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RlError {
    #[error("group needs at least 2 rollouts, got {0}")]
    GroupTooSmall(usize),
    #[error("group {group} has {rewards} rewards but {records} log-prob records")]
    LengthMismatch { group: usize, rewards: usize, records: usize },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("clip bounds must satisfy 0 <= eps_low < 1 and eps_high >= 0")]
    BadClip,
    #[error("KL weight must be non-negative")]
    NegativeBeta,
    #[error("no groups to optimize")]
    Empty,
    #[error("group {0} is degenerate (all rewards equal) and must be discarded")]
    DegenerateGroup(usize),
    #[error("reward {value} in group {group} is outside [0, 1]")]
    RewardOutOfRange { group: usize, value: f64 },
}

/// Summed log-probabilities of one response.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogProbRecord<T> {
    pub logp_new: T,
    pub logp_old: T,
    pub logp_ref: Option<T>,
}

impl<T: Float> LogProbRecord<T> {
    pub fn weight(&self) -> T {
        importance_weight(self.logp_new, self.logp_old)
    }

    /// Zero when no reference log-prob was recorded.
    pub fn kl(&self) -> T {
        self.logp_ref.map_or(T::zero(), |r| kl_estimate(self.logp_new, r))
    }

    fn is_finite(&self) -> bool {
        self.logp_new.is_finite()
            && self.logp_old.is_finite()
            && self.logp_ref.map_or(true, |r| r.is_finite())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RewardGroup<T> {
    #[serde(default)]
    pub responses: Vec<String>,
    pub rewards: Vec<T>,
    pub records: Vec<LogProbRecord<T>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrpoParams<T> {
    pub eps_low: T,
    pub eps_high: T,
    pub beta: T,
}

impl<T: Float> GrpoParams<T> {
    pub fn new(eps_low: T, eps_high: T, beta: T) -> Result<Self, RlError> {
        let p = GrpoParams { eps_low, eps_high, beta };
        p.check()?;
        Ok(p)
    }

    fn check(&self) -> Result<(), RlError> {
        if !(self.eps_low.is_finite() && self.eps_high.is_finite() && self.beta.is_finite()) {
            return Err(RlError::NonFinite("params"));
        }
        if self.eps_low < T::zero() || self.eps_low >= T::one() || self.eps_high < T::zero() {
            return Err(RlError::BadClip);
        }
        if self.beta < T::zero() {
            return Err(RlError::NegativeBeta);
        }
        Ok(())
    }
}

impl<T: Float> Default for GrpoParams<T> {
    fn default() -> Self {
        let c = T::from(0.2).unwrap();
        GrpoParams { eps_low: c, eps_high: c, beta: T::from(0.04).unwrap() }
    }
}

pub fn importance_weight<T: Float>(logp_new: T, logp_old: T) -> T {
    (logp_new - logp_old).exp()
}

#[derive(Debug, Clone, PartialEq)]
pub enum Advantages<T> {
    Standardized(Vec<T>),
    /// Every reward in the group is equal; the group carries no signal.
    Degenerate,
}

/// `(u_i - mean) / std` with the population standard deviation.
pub fn group_advantages<T: Float>(rewards: &[T]) -> Result<Advantages<T>, RlError> {
    let g = rewards.len();
    if g < 2 {
        return Err(RlError::GroupTooSmall(g));
    }
    if rewards.iter().any(|r| !r.is_finite()) {
        return Err(RlError::NonFinite("rewards"));
    }
    let (lo, hi) = rewards
        .iter()
        .fold((rewards[0], rewards[0]), |(lo, hi), &r| (lo.min(r), hi.max(r)));
    if lo == hi {
        return Ok(Advantages::Degenerate);
    }
    let n = T::from(g).unwrap();
    let mean = rewards.iter().fold(T::zero(), |a, &r| a + r) / n;
    let var = rewards.iter().fold(T::zero(), |a, &r| a + (r - mean) * (r - mean)) / n;
    let std = var.sqrt();
    if std == T::zero() {
        return Ok(Advantages::Degenerate);
    }
    Ok(Advantages::Standardized(rewards.iter().map(|&r| (r - mean) / std).collect()))
}

/// `min(w A, clip(w, 1 - eps_low, 1 + eps_high) A)`.
pub fn clipped_term<T: Float>(w: T, advantage: T, eps_low: T, eps_high: T) -> T {
    let clipped = w.max(T::one() - eps_low).min(T::one() + eps_high);
    (w * advantage).min(clipped * advantage)
}

/// Unbiased, non-negative KL estimator `exp(d) - d - 1` with
/// `d = logp_ref - logp_new`.
pub fn kl_estimate<T: Float>(logp_new: T, logp_ref: T) -> T {
    let d = logp_ref - logp_new;
    // exp_m1 keeps precision when d is tiny.
    (d.exp_m1() - d).max(T::zero())
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupTerms<T> {
    pub advantages: Vec<T>,
    pub weights: Vec<T>,
    pub clipped: Vec<T>,
    pub kl: Vec<T>,
    /// `(1/G) sum(clipped) - beta * mean(kl)`.
    pub value: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrpoOutput<T> {
    pub objective: T,
    pub groups: Vec<GroupTerms<T>>,
}

/// Checks shape, finiteness and reward range of one group.
pub fn check_group<T: Float>(index: usize, g: &RewardGroup<T>) -> Result<(), RlError> {
    if g.rewards.len() != g.records.len() {
        return Err(RlError::LengthMismatch {
            group: index,
            rewards: g.rewards.len(),
            records: g.records.len(),
        });
    }
    if g.rewards.len() < 2 {
        return Err(RlError::GroupTooSmall(g.rewards.len()));
    }
    if g.rewards.iter().any(|r| !r.is_finite()) {
        return Err(RlError::NonFinite("rewards"));
    }
    if let Some(r) = g.rewards.iter().find(|r| **r < T::zero() || **r > T::one()) {
        return Err(RlError::RewardOutOfRange { group: index, value: r.to_f64().unwrap_or(f64::NAN) });
    }
    if !g.records.iter().all(LogProbRecord::is_finite) {
        return Err(RlError::NonFinite("log-probs"));
    }
    Ok(())
}

/// Per-response terms of one non-degenerate group.
pub fn group_terms<T: Float>(
    index: usize,
    g: &RewardGroup<T>,
    params: &GrpoParams<T>,
) -> Result<GroupTerms<T>, RlError> {
    check_group(index, g)?;
    let advantages = match group_advantages(&g.rewards)? {
        Advantages::Degenerate => return Err(RlError::DegenerateGroup(index)),
        Advantages::Standardized(a) => a,
    };
    let weights: Vec<T> = g.records.iter().map(LogProbRecord::weight).collect();
    let kl: Vec<T> = g.records.iter().map(LogProbRecord::kl).collect();
    let clipped: Vec<T> = weights
        .iter()
        .zip(&advantages)
        .map(|(&w, &a)| clipped_term(w, a, params.eps_low, params.eps_high))
        .collect();
    let n = T::from(g.rewards.len()).unwrap();
    let mean = |v: &[T]| v.iter().fold(T::zero(), |acc, &x| acc + x) / n;
    let value = mean(&clipped) - params.beta * mean(&kl);
    Ok(GroupTerms { advantages, weights, clipped, kl, value })
}

/// Mean over groups of the group-normalized clipped surrogate minus
/// `beta * KL`. Degenerate groups must be filtered out by the caller.
pub fn grpo_objective<T: Float>(
    groups: &[RewardGroup<T>],
    params: &GrpoParams<T>,
) -> Result<GrpoOutput<T>, RlError> {
    params.check()?;
    if groups.is_empty() {
        return Err(RlError::Empty);
    }
    let terms = groups
        .iter()
        .enumerate()
        .map(|(i, g)| group_terms(i, g, params))
        .collect::<Result<Vec<_>, _>>()?;
    let objective =
        terms.iter().fold(T::zero(), |a, t| a + t.value) / T::from(terms.len()).unwrap();
    Ok(GrpoOutput { objective, groups: terms })
}

/// Edit distance over chars, two-row dynamic program.
pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    if a.is_empty() {
        return b.len();
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// `1 - d / max(len)`, 1 for two empty strings.
pub fn ocr_reward<T: Float>(predicted: &str, reference: &str) -> T {
    let m = predicted.chars().count().max(reference.chars().count());
    if m == 0 {
        return T::one();
    }
    T::one() - T::from(levenshtein(predicted, reference)).unwrap() / T::from(m).unwrap()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum FormatViolation {
    #[error("missing <think> block")]
    MissingThink,
    #[error("more than one <think> block")]
    MultipleThink,
    #[error("unclosed <think> block")]
    Unclosed,
    #[error("text before <think>")]
    LeadingText,
    #[error("empty answer after </think>")]
    EmptyAnswer,
}

pub const THINK_OPEN: &str = "<think>";
pub const THINK_CLOSE: &str = "</think>";

/// A completion is well formed when it is one `<think>...</think>` block,
/// optionally preceded by whitespace, followed by a non-empty answer.
pub fn check_format(completion: &str) -> Result<(), FormatViolation> {
    let opens = completion.matches(THINK_OPEN).count();
    let closes = completion.matches(THINK_CLOSE).count();
    if opens == 0 {
        return Err(if closes == 0 { FormatViolation::MissingThink } else { FormatViolation::Unclosed });
    }
    if opens > 1 || closes > 1 {
        return Err(FormatViolation::MultipleThink);
    }
    let open = completion.find(THINK_OPEN).unwrap();
    let close = match completion.find(THINK_CLOSE) {
        Some(c) if c > open => c,
        _ => return Err(FormatViolation::Unclosed),
    };
    if !completion[..open].trim().is_empty() {
        return Err(FormatViolation::LeadingText);
    }
    if completion[close + THINK_CLOSE.len()..].trim().is_empty() {
        return Err(FormatViolation::EmptyAnswer);
    }
    Ok(())
}

pub fn format_reward<T: Float>(completion: &str) -> T {
    if check_format(completion).is_ok() {
        T::one()
    } else {
        T::zero()
    }
}

/// The answer part of a well-formed completion.
pub fn answer_of(completion: &str) -> Option<&str> {
    check_format(completion).ok()?;
    let close = completion.find(THINK_CLOSE)?;
    Some(completion[close + THINK_CLOSE.len()..].trim())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-9
    }

    #[test]
    fn clipping_examples() {
        assert!(close(clipped_term(1.5, 1.0, 0.2, 0.2), 1.2));
        assert!(close(clipped_term(0.5, -1.0, 0.2, 0.2), -0.8));
        assert!(close(clipped_term(1.5, -1.0, 0.2, 0.2), -1.5));
        assert!(close(clipped_term(0.5, 1.0, 0.2, 0.2), 0.5));
        assert!(close(clipped_term(1.0, 2.0, 0.2, 0.2), 2.0));
        assert!(close(clipped_term(1.5, 1.0, 0.2, 0.28), 1.28));
    }

    #[test]
    fn advantages_of_a_binary_group() {
        let Advantages::Standardized(a) = group_advantages(&[1.0, 0.0, 1.0, 0.0]).unwrap() else {
            panic!()
        };
        assert_eq!(a, vec![1.0, -1.0, 1.0, -1.0]);
        assert_eq!(group_advantages(&[0.5, 0.5, 0.5]).unwrap(), Advantages::Degenerate);
        assert_eq!(group_advantages(&[1.0]), Err(RlError::GroupTooSmall(1)));
    }

    #[test]
    fn kl_is_zero_at_equality_and_positive_elsewhere() {
        assert_eq!(kl_estimate(-3.0, -3.0), 0.0);
        assert!(close(kl_estimate(0.0, 1.0), std::f64::consts::E - 2.0));
        assert!(kl_estimate(-1.0f64, -1.0 + 1e-9) >= 0.0);
    }

    #[test]
    fn objective_rejects_degenerate_groups() {
        let rec = |d: f64| LogProbRecord { logp_new: d, logp_old: 0.0, logp_ref: Some(0.0) };
        let group = |r: Vec<f64>| RewardGroup {
            responses: vec![],
            records: vec![rec(0.0); r.len()],
            rewards: r,
        };
        let ok = vec![group(vec![1.0, 0.0]), group(vec![0.0, 1.0, 1.0])];
        let out = grpo_objective(&ok, &GrpoParams::default()).unwrap();
        assert!(close(out.objective, 0.0));
        let bad = vec![group(vec![1.0, 0.0]), group(vec![1.0, 1.0])];
        assert_eq!(grpo_objective(&bad, &GrpoParams::default()), Err(RlError::DegenerateGroup(1)));
        let short = vec![RewardGroup { responses: vec![], rewards: vec![1.0, 0.0], records: vec![rec(0.0)] }];
        assert!(matches!(grpo_objective(&short, &GrpoParams::default()), Err(RlError::LengthMismatch { .. })));
    }

    #[test]
    fn kl_penalty_lowers_the_objective() {
        let params = GrpoParams::new(0.2, 0.28, 0.1).unwrap();
        let groups = |d: f64| {
            vec![RewardGroup {
                responses: vec![],
                rewards: vec![1.0, 0.0],
                records: vec![LogProbRecord { logp_new: 0.0, logp_old: 0.0, logp_ref: Some(d) }; 2],
            }]
        };
        let base = grpo_objective(&groups(0.0), &params).unwrap().objective;
        assert_eq!(base, 0.0);
        // exp(0.1) - 1.1 and exp(-0.1) - 0.9
        let up = grpo_objective(&groups(0.1), &params).unwrap().objective;
        let down = grpo_objective(&groups(-0.1), &params).unwrap().objective;
        assert!(close(up, -0.1 * 0.005170918075647624));
        assert!(close(down, -0.1 * 0.004837418035959573));
        assert!(GrpoParams::new(0.2, 0.28, -1.0).is_err());
        assert!(GrpoParams::new(1.0, 0.28, 0.0).is_err());
    }

    #[test]
    fn levenshtein_examples() {
        assert_eq!(levenshtein("kitten", "sitting"), 3);
        assert_eq!(levenshtein("", "abc"), 3);
        assert_eq!(levenshtein("abc", ""), 3);
        assert_eq!(levenshtein("flaw", "lawn"), 2);
        assert_eq!(levenshtein("日本語", "日本"), 1);
    }

    #[test]
    fn ocr_reward_examples() {
        assert_eq!(ocr_reward::<f64>("", ""), 1.0);
        assert_eq!(ocr_reward::<f64>("abc", "abc"), 1.0);
        assert_eq!(ocr_reward::<f64>("", "abcd"), 0.0);
        assert!(close(ocr_reward("kitten", "sitting"), 1.0 - 3.0 / 7.0));
    }

    #[test]
    fn format_checks() {
        assert!(check_format("<think>r</think>answer").is_ok());
        assert!(check_format("  \n<think></think> a ").is_ok());
        assert_eq!(check_format("answer"), Err(FormatViolation::MissingThink));
        assert_eq!(check_format("x<think>r</think>a"), Err(FormatViolation::LeadingText));
        assert_eq!(check_format("<think>r</think>  "), Err(FormatViolation::EmptyAnswer));
        assert_eq!(check_format("<think>r"), Err(FormatViolation::Unclosed));
        assert_eq!(check_format("</think><think>a"), Err(FormatViolation::Unclosed));
        assert_eq!(
            check_format("<think>a</think><think>b</think>c"),
            Err(FormatViolation::MultipleThink)
        );
        assert_eq!(format_reward::<f32>("<think>r</think>a"), 1.0);
        assert_eq!(answer_of("<think>r</think> 42 "), Some("42"));
    }
}
