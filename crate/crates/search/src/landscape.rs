//! Hermetic evaluators: a closed-form accuracy landscape over real renders,
//! and an adapter running the validation harness.

use glyphpress_core::config::RenderConfig;
use glyphpress_core::corpus;
use glyphpress_core::metrics::{compression_report, HeuristicTokenizer, VisualTokenModel};
use glyphpress_core::render::render_document;
use glyphpress_core::EmbeddedFont;

use crate::engine::{Evaluation, Evaluator};
use crate::eval::{evaluate_config, Harness};
use crate::fitness::FitnessPolicy;
use crate::ops::{Field, SearchSpace};

/// Accuracy falls 0.01 per dpi below 72 and 0.005 per point above 10 pt.
pub fn synthetic_accuracy(config: &RenderConfig) -> f64 {
    let dpi_loss = 0.01 * (72 - config.dpi).max(0) as f64;
    let size_loss = 0.005 * (config.font_size_pt - 10.0).max(0.0);
    (1.0 - dpi_loss - size_loss).max(0.0)
}

/// Leading paragraphs of the bundled corpus, about 2,000 words.
pub fn synthetic_text() -> &'static str {
    corpus::leading_paragraphs(corpus::ENGLISH, 2000)
}

/// The space the synthetic landscape is searched over: dpi, font size and
/// line height around the default config, dpi in `[45, 150]`.
pub fn synthetic_space() -> SearchSpace {
    SearchSpace::around(
        RenderConfig::default(),
        &[Field::Dpi, Field::FontSize, Field::LineHeight],
        45,
        150,
    )
}

/// Only exactly-lossless configurations are feasible on the landscape.
pub fn synthetic_policy() -> FitnessPolicy {
    FitnessPolicy::Constrained { delta: 0.0 }
}

/// [`synthetic_accuracy`] paired with the real compression ratio of
/// [`synthetic_text`].
pub struct SyntheticLandscape {
    pub text: String,
    pub vtm: VisualTokenModel,
}

impl Default for SyntheticLandscape {
    fn default() -> Self {
        SyntheticLandscape { text: synthetic_text().to_string(), vtm: VisualTokenModel::default() }
    }
}

impl Evaluator for SyntheticLandscape {
    fn evaluate(&self, config: &RenderConfig) -> Result<Evaluation, String> {
        let pages = render_document(&self.text, config, &EmbeddedFont).map_err(|e| e.to_string())?;
        let report = compression_report(&self.text, &pages, &self.vtm, &HeuristicTokenizer)
            .map_err(|e| e.to_string())?;
        Ok(Evaluation { accuracy: synthetic_accuracy(config), rho: report.ratio })
    }
}

/// Evaluates configs on a validation set.
pub struct HarnessEvaluator<'a> {
    pub harness: Harness<'a>,
}

impl Evaluator for HarnessEvaluator<'_> {
    fn evaluate(&self, config: &RenderConfig) -> Result<Evaluation, String> {
        let r = evaluate_config(config, &self.harness).map_err(|e| e.to_string())?;
        Ok(Evaluation { accuracy: r.accuracy, rho: r.mean_rho })
    }
}
