//! Validation sets, model clients, scorers and per-config evaluation.

use std::collections::HashSet;
use std::io::BufRead;
use std::path::Path;

use base64::Engine;
use glyphpress_core::config::{validate, RenderConfig, ValidationReport};
use glyphpress_core::metrics::{compression_report, TextTokenizer, VisualTokenModel};
use glyphpress_core::raster::PageImage;
use glyphpress_core::render::render_document;
use glyphpress_core::GlyphMetrics;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::remote::{truncate, Endpoint, RemoteError};

/// One (instruction, context, answer) triple.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidationItem {
    pub id: String,
    pub context: String,
    pub instruction: String,
    pub answer: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tag: Option<String>,
}

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: duplicate id {id:?}")]
    DuplicateId { line: usize, id: String },
    #[error("line {line}: item {id:?} has an empty context")]
    EmptyContext { line: usize, id: String },
}

/// Read a JSONL validation set. Blank lines are skipped.
pub fn load_validation_set(path: &Path) -> Result<Vec<ValidationItem>, LoadError> {
    let io = |source| LoadError::Io { path: path.display().to_string(), source };
    let file = std::fs::File::open(path).map_err(io)?;
    let mut items = Vec::new();
    let mut seen = HashSet::new();
    for (i, line) in std::io::BufReader::new(file).lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(io)?;
        if line.trim().is_empty() {
            continue;
        }
        let item: ValidationItem = serde_json::from_str(&line)
            .map_err(|e| LoadError::Malformed { line: line_no, message: e.to_string() })?;
        if item.context.trim().is_empty() {
            return Err(LoadError::EmptyContext { line: line_no, id: item.id });
        }
        if !seen.insert(item.id.clone()) {
            return Err(LoadError::DuplicateId { line: line_no, id: item.id });
        }
        items.push(item);
    }
    Ok(items)
}

/// Trim, collapse inner whitespace, lowercase.
pub fn normalize_answer(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase()
}

pub fn score_exact(prediction: &str, gold: &str) -> f64 {
    if normalize_answer(prediction) == normalize_answer(gold) {
        1.0
    } else {
        0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreOutcome {
    Scored(f64),
    /// The scorer could not reach a verdict; never counted as 0.
    Unscored(String),
}

pub trait Scorer: Send + Sync {
    fn score(&self, item: &ValidationItem, prediction: &str) -> ScoreOutcome;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ExactMatch;

impl Scorer for ExactMatch {
    fn score(&self, item: &ValidationItem, prediction: &str) -> ScoreOutcome {
        ScoreOutcome::Scored(score_exact(prediction, &item.answer))
    }
}

pub const JUDGE_PROMPT: &str = "You are grading an answer against a reference answer.\n\
Question: {instruction}\n\
Reference answer: {gold}\n\
Candidate answer: {prediction}\n\
Decide whether the candidate answer agrees with the reference answer. \
Reply with exactly one word: CORRECT or INCORRECT.";

pub fn judge_prompt(instruction: &str, gold: &str, prediction: &str) -> String {
    JUDGE_PROMPT
        .replace("{instruction}", instruction)
        .replace("{gold}", gold)
        .replace("{prediction}", prediction)
}

/// The verdict in a judge reply: whole uppercase words `CORRECT` or
/// `INCORRECT`. Both or neither present means no verdict.
pub fn parse_verdict(reply: &str) -> Option<bool> {
    let mut correct = false;
    let mut incorrect = false;
    for word in reply.split(|c: char| !c.is_ascii_alphanumeric()) {
        match word {
            "CORRECT" => correct = true,
            "INCORRECT" => incorrect = true,
            _ => {}
        }
    }
    match (correct, incorrect) {
        (true, false) => Some(true),
        (false, true) => Some(false),
        _ => None,
    }
}

/// Reference-based LLM judge.
#[derive(Debug, Clone)]
pub struct RemoteJudge {
    pub endpoint: Endpoint,
}

impl Scorer for RemoteJudge {
    fn score(&self, item: &ValidationItem, prediction: &str) -> ScoreOutcome {
        let prompt = judge_prompt(&item.instruction, &item.answer, prediction);
        match self.endpoint.chat(json!([{ "role": "user", "content": prompt }])) {
            Ok(reply) => match parse_verdict(&reply) {
                Some(v) => ScoreOutcome::Scored(if v { 1.0 } else { 0.0 }),
                None => ScoreOutcome::Unscored(format!("no verdict in reply: {}", truncate(&reply, 80))),
            },
            Err(e) => ScoreOutcome::Unscored(e.to_string()),
        }
    }
}

/// Produces an answer from the rendered pages of an item's context.
pub trait ModelClient: Send + Sync {
    fn predict(&self, item: &ValidationItem, pages: &[PageImage]) -> Result<String, RemoteError>;
}

/// Answers every item with its gold answer.
#[derive(Debug, Clone, Copy, Default)]
pub struct EchoGold;

impl ModelClient for EchoGold {
    fn predict(&self, item: &ValidationItem, _: &[PageImage]) -> Result<String, RemoteError> {
        Ok(item.answer.clone())
    }
}

/// Always answers with the empty string.
#[derive(Debug, Clone, Copy, Default)]
pub struct Silent;

impl ModelClient for Silent {
    fn predict(&self, _: &ValidationItem, _: &[PageImage]) -> Result<String, RemoteError> {
        Ok(String::new())
    }
}

/// Deterministic stand-in for a vision model: an item is answered correctly
/// when the rendered x-height in pixels reaches a per-item threshold.
///
/// Thresholds are spread over `[min_px, max_px]` by a hash of the item id, so
/// accuracy falls smoothly as dpi or font size shrink.
#[derive(Debug, Clone, Copy)]
pub struct LegibilityMock {
    pub min_px: f64,
    pub max_px: f64,
}

impl Default for LegibilityMock {
    fn default() -> Self {
        LegibilityMock { min_px: 4.0, max_px: 9.0 }
    }
}

fn fnv1a(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

impl LegibilityMock {
    pub fn threshold_px(&self, id: &str) -> f64 {
        let u = (fnv1a(id) >> 11) as f64 / (1u64 << 53) as f64;
        self.min_px + u * (self.max_px - self.min_px)
    }
}

impl ModelClient for LegibilityMock {
    fn predict(&self, item: &ValidationItem, pages: &[PageImage]) -> Result<String, RemoteError> {
        let Some(first) = pages.first() else {
            return Ok(String::new());
        };
        // Glyph bodies are 0.7 em tall.
        let px = 0.7 * first.layout.font_size_pt * first.dpi as f64 / 72.0;
        Ok(if px >= self.threshold_px(&item.id) { item.answer.clone() } else { String::new() })
    }
}

/// A vision-language model behind a chat endpoint; pages are attached as
/// PNG data URLs in reading order, followed by the instruction.
#[derive(Debug, Clone)]
pub struct RemoteModel {
    pub endpoint: Endpoint,
}

impl ModelClient for RemoteModel {
    fn predict(&self, item: &ValidationItem, pages: &[PageImage]) -> Result<String, RemoteError> {
        let b64 = base64::engine::general_purpose::STANDARD;
        let mut content: Vec<serde_json::Value> = pages
            .iter()
            .map(|p| {
                json!({
                    "type": "image_url",
                    "image_url": { "url": format!("data:image/png;base64,{}", b64.encode(p.to_png())) }
                })
            })
            .collect();
        content.push(json!({ "type": "text", "text": item.instruction }));
        self.endpoint.chat(json!([{ "role": "user", "content": content }]))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemResult {
    pub id: String,
    pub pages: usize,
    pub rho: f64,
    pub outcome: ScoreOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    /// Mean over scored items.
    pub accuracy: f64,
    /// Mean of the per-item compression ratios.
    pub mean_rho: f64,
    pub scored: usize,
    pub unscored_ids: Vec<String>,
    pub items: Vec<ItemResult>,
}

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("validation set is empty")]
    EmptySet,
    #[error("invalid config:\n{0}")]
    InvalidConfig(ValidationReport),
    #[error("item {id}: {message}")]
    Item { id: String, message: String },
    #[error("all {0} items unscored")]
    AllUnscored(usize),
}

/// Everything `evaluate_config` needs besides the config.
pub struct Harness<'a> {
    pub set: &'a [ValidationItem],
    pub client: &'a dyn ModelClient,
    pub scorer: &'a dyn Scorer,
    pub vtm: VisualTokenModel,
    pub tokenizer: &'a dyn TextTokenizer,
    pub metrics: &'a dyn GlyphMetrics,
}

/// Render every item's context under `config`, query the model, score.
///
/// Items run in parallel; results are collected in set order, so the report
/// depends only on the inputs.
pub fn evaluate_config(config: &RenderConfig, h: &Harness<'_>) -> Result<EvalReport, EvalError> {
    if h.set.is_empty() {
        return Err(EvalError::EmptySet);
    }
    let report = validate(config);
    if !report.valid {
        return Err(EvalError::InvalidConfig(report));
    }
    let items = h
        .set
        .par_iter()
        .map(|item| {
            let err = |message: String| EvalError::Item { id: item.id.clone(), message };
            let pages = render_document(&item.context, config, h.metrics).map_err(|e| err(e.to_string()))?;
            let rho = compression_report(&item.context, &pages, &h.vtm, h.tokenizer)
                .map_err(|e| err(e.to_string()))?
                .ratio;
            let outcome = match h.client.predict(item, &pages) {
                Ok(pred) => h.scorer.score(item, &pred),
                Err(e) => ScoreOutcome::Unscored(e.to_string()),
            };
            Ok(ItemResult { id: item.id.clone(), pages: pages.len(), rho, outcome })
        })
        .collect::<Result<Vec<_>, EvalError>>()?;
    let mut sum = 0.0;
    let mut scored = 0;
    let mut unscored_ids = Vec::new();
    for r in &items {
        match r.outcome {
            ScoreOutcome::Scored(s) => {
                sum += s;
                scored += 1;
            }
            ScoreOutcome::Unscored(_) => unscored_ids.push(r.id.clone()),
        }
    }
    if scored == 0 {
        return Err(EvalError::AllUnscored(items.len()));
    }
    let mean_rho = items.iter().map(|r| r.rho).sum::<f64>() / items.len() as f64;
    Ok(EvalReport { accuracy: sum / scored as f64, mean_rho, scored, unscored_ids, items })
}
