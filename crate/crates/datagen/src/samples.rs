//! Sample builders. Every target is read back from glyph provenance, so it
//! matches the rendered pages exactly.

use glyphpress_core::config::RenderConfig;
use glyphpress_core::layout::{normalize_text, paragraphs, provenance_text};
use glyphpress_core::rl::{check_format, FormatViolation};
use glyphpress_core::{render_document, GlyphMetrics, PageImage, RenderError};
use glyphpress_search::ValidationItem;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum SampleError {
    #[error(transparent)]
    Render(#[from] RenderError),
    #[error(transparent)]
    Config(#[from] glyphpress_core::ConfigError),
    #[error("page span {start}+{count} is outside the {pages} rendered pages")]
    SpanOutOfRange { start: usize, count: usize, pages: usize },
    #[error("span policy must select at least one page")]
    EmptySpan,
    #[error("{name} must lie strictly between 0 and 1, got {value}")]
    Fraction { name: &'static str, value: f64 },
    #[error("text has no visible characters")]
    EmptyText,
    #[error("text is too short to split")]
    TooShort,
    #[error("response rejected: {0}")]
    Format(FormatViolation),
}

/// Rendered pages together with the text they were rendered from.
#[derive(Debug, Clone)]
pub struct ImageBundle {
    pub pages: Vec<PageImage>,
    /// Provenance text of `pages`.
    pub text: String,
}

impl ImageBundle {
    fn render(source: &str, config: &RenderConfig, metrics: &dyn GlyphMetrics) -> Result<Self, SampleError> {
        let pages = render_document(source, config, metrics)?;
        let text = provenance_text(source, pages.iter().map(|p| &*p.layout));
        Ok(ImageBundle { pages, text })
    }
}

/// Which pages an OCR sample covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "span", rename_all = "snake_case")]
pub enum SpanPolicy {
    Whole,
    /// One page chosen by the seed.
    Single,
    /// A seed-chosen run of `min..=max` pages; `max` is capped at the page count.
    Range { min: usize, max: usize },
    Fixed { start: usize, count: usize },
}

#[derive(Debug, Clone)]
pub struct OcrSample {
    pub pages: Vec<PageImage>,
    pub start: usize,
    pub count: usize,
    pub target: String,
    pub seed: u64,
}

pub fn make_ocr_sample(
    text: &str,
    config: &RenderConfig,
    span: SpanPolicy,
    seed: u64,
    metrics: &dyn GlyphMetrics,
) -> Result<OcrSample, SampleError> {
    if normalize_text(text).is_empty() {
        return Err(SampleError::EmptyText);
    }
    let pages = render_document(text, config, metrics)?;
    let n = pages.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (start, count) = match span {
        SpanPolicy::Whole => (0, n),
        SpanPolicy::Single => (rng.gen_range(0..n), 1),
        SpanPolicy::Range { min, max } => {
            if min == 0 || max < min {
                return Err(SampleError::EmptySpan);
            }
            if min > n {
                return Err(SampleError::SpanOutOfRange { start: 0, count: min, pages: n });
            }
            let count = rng.gen_range(min..=max.min(n));
            (rng.gen_range(0..=n - count), count)
        }
        SpanPolicy::Fixed { count: 0, .. } => return Err(SampleError::EmptySpan),
        SpanPolicy::Fixed { start, count } => (start, count),
    };
    if start + count > n {
        return Err(SampleError::SpanOutOfRange { start, count, pages: n });
    }
    let pages: Vec<PageImage> = pages.into_iter().skip(start).take(count).collect();
    let target = provenance_text(text, pages.iter().map(|p| &*p.layout));
    Ok(OcrSample { pages, start, count, target, seed })
}

#[derive(Debug, Clone)]
pub enum Segment {
    Text(String),
    Images(ImageBundle),
}

impl Segment {
    pub fn text(&self) -> &str {
        match self {
            Segment::Text(t) => t,
            Segment::Images(b) => &b.text,
        }
    }
}

/// Runs of whole paragraphs, alternately kept as text and rendered.
#[derive(Debug, Clone)]
pub struct InterleavedSample {
    pub segments: Vec<Segment>,
    /// Normalized source text.
    pub original: String,
    /// Characters of rendered paragraphs, newlines excluded.
    pub rendered_chars: usize,
    pub total_chars: usize,
    pub seed: u64,
}

impl InterleavedSample {
    /// Segment texts joined by paragraph breaks.
    pub fn reconstruct(&self) -> String {
        self.segments.iter().map(Segment::text).collect::<Vec<_>>().join("\n")
    }
}

/// Paragraphs to render: visited in seed order until their characters reach
/// `fraction` of the total, then the last one is dropped if that lands closer.
pub fn choose_masked(lengths: &[usize], fraction: f64, seed: u64) -> Vec<bool> {
    let total: usize = lengths.iter().sum();
    let goal = fraction * total as f64;
    let mut order: Vec<usize> = (0..lengths.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut masked = vec![false; lengths.len()];
    let mut covered = 0usize;
    for &i in &order {
        if covered as f64 >= goal {
            break;
        }
        let before = covered;
        masked[i] = true;
        covered += lengths[i];
        let drop_last = goal - before as f64 <= covered as f64 - goal && before > 0;
        if drop_last {
            masked[i] = false;
            break;
        }
    }
    if masked.iter().all(|m| *m) && lengths.len() > 1 {
        masked[*order.last().unwrap()] = false;
    }
    if !masked.iter().any(|m| *m) && !lengths.is_empty() {
        masked[order[0]] = true;
    }
    masked
}

pub fn make_interleaved_sample(
    text: &str,
    config: &RenderConfig,
    mask_fraction: f64,
    seed: u64,
    metrics: &dyn GlyphMetrics,
) -> Result<InterleavedSample, SampleError> {
    if !(mask_fraction > 0.0 && mask_fraction < 1.0) {
        return Err(SampleError::Fraction { name: "mask fraction", value: mask_fraction });
    }
    let paras = paragraphs(text);
    if paras.is_empty() {
        return Err(SampleError::EmptyText);
    }
    let lengths: Vec<usize> = paras.iter().map(|p| p.chars().count()).collect();
    let masked = choose_masked(&lengths, mask_fraction, seed);
    let mut segments = Vec::new();
    let mut i = 0;
    while i < paras.len() {
        let j = (i..paras.len()).find(|&j| masked[j] != masked[i]).unwrap_or(paras.len());
        let run = paras[i..j].join("\n");
        segments.push(if masked[i] {
            Segment::Images(ImageBundle::render(&run, config, metrics)?)
        } else {
            Segment::Text(run)
        });
        i = j;
    }
    Ok(InterleavedSample {
        segments,
        original: paras.join("\n"),
        rendered_chars: lengths.iter().zip(&masked).filter(|(_, m)| **m).map(|(l, _)| l).sum(),
        total_chars: lengths.iter().sum(),
        seed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GenerationMode {
    /// The beginning is shown; the model writes the rest.
    CompleteSuffix,
    /// The end is shown; the model writes the beginning.
    CompletePrefix,
}

#[derive(Debug, Clone)]
pub struct GenerationSample {
    pub mode: GenerationMode,
    pub visible: ImageBundle,
    pub target: String,
    /// What joins the two sides: `"\n"` at a paragraph boundary, `" "` when a
    /// single-paragraph text had to be split between words.
    pub joint: &'static str,
    pub seed: u64,
}

impl GenerationSample {
    pub fn reconstruct(&self) -> String {
        match self.mode {
            GenerationMode::CompleteSuffix => format!("{}{}{}", self.visible.text, self.joint, self.target),
            GenerationMode::CompletePrefix => format!("{}{}{}", self.target, self.joint, self.visible.text),
        }
    }
}

/// Byte offset of the split in `normalized`: the boundary nearest to
/// `fraction` of its characters, preferring paragraph breaks over spaces.
fn split_point(normalized: &str, fraction: f64) -> Option<(usize, &'static str)> {
    let total = normalized.chars().count() as f64;
    let nearest = |sep: char| {
        normalized
            .char_indices()
            .enumerate()
            .filter(|(_, (_, c))| *c == sep)
            .min_by(|(a, _), (b, _)| {
                let da = (*a as f64 / total - fraction).abs();
                let db = (*b as f64 / total - fraction).abs();
                da.total_cmp(&db)
            })
            .map(|(_, (byte, _))| byte)
    };
    nearest('\n').map(|b| (b, "\n")).or_else(|| nearest(' ').map(|b| (b, " ")))
}

pub fn make_generation_sample(
    text: &str,
    config: &RenderConfig,
    mode: GenerationMode,
    split_fraction: f64,
    seed: u64,
    metrics: &dyn GlyphMetrics,
) -> Result<GenerationSample, SampleError> {
    if !(split_fraction > 0.0 && split_fraction < 1.0) {
        return Err(SampleError::Fraction { name: "split fraction", value: split_fraction });
    }
    let normalized = normalize_text(text);
    if normalized.is_empty() {
        return Err(SampleError::EmptyText);
    }
    let (at, joint) = split_point(&normalized, split_fraction).ok_or(SampleError::TooShort)?;
    let (head, tail) = (&normalized[..at], &normalized[at + 1..]);
    let (shown, hidden) = match mode {
        GenerationMode::CompleteSuffix => (head, tail),
        GenerationMode::CompletePrefix => (tail, head),
    };
    Ok(GenerationSample {
        mode,
        visible: ImageBundle::render(shown, config, metrics)?,
        target: hidden.to_string(),
        joint,
        seed,
    })
}

#[derive(Debug, Clone)]
pub struct SftSample {
    pub id: String,
    pub instruction: String,
    pub pages: Vec<PageImage>,
    pub response: String,
}

/// Render an item's context and attach a response that must carry exactly
/// one reasoning block before its answer.
pub fn package_sft(
    item: &ValidationItem,
    config: &RenderConfig,
    response: &str,
    metrics: &dyn GlyphMetrics,
) -> Result<SftSample, SampleError> {
    check_format(response).map_err(SampleError::Format)?;
    Ok(SftSample {
        id: item.id.clone(),
        instruction: item.instruction.clone(),
        pages: render_document(&item.context, config, metrics)?,
        response: response.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn masking_stays_within_one_paragraph() {
        let lengths = [120, 80, 300, 45, 210, 99, 150, 60, 75, 130];
        let total: usize = lengths.iter().sum();
        let longest = *lengths.iter().max().unwrap() as f64;
        for seed in 0..200 {
            for f in [0.1, 0.3, 0.5, 0.9] {
                let m = choose_masked(&lengths, f, seed);
                let covered: usize = lengths.iter().zip(&m).filter(|(_, b)| **b).map(|(l, _)| l).sum();
                assert!((covered as f64 - f * total as f64).abs() <= longest, "seed {seed} f {f}");
                assert!(m.iter().any(|b| *b) && !m.iter().all(|b| *b));
            }
        }
    }

    #[test]
    fn split_prefers_paragraphs() {
        assert_eq!(split_point("aaaa\nbbbb", 0.5), Some((4, "\n")));
        assert_eq!(split_point("aa bb", 0.9), Some((2, " ")));
        assert_eq!(split_point("word", 0.5), None);
    }
}
