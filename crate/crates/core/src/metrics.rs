//! Text-token counts, visual-token counts and the compression ratio
//! `rho = text_tokens / sum(visual tokens per page)`.

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::RenderConfig;
use crate::raster::PageImage;

#[derive(Debug, thiserror::Error)]
pub enum MetricsError {
    #[error("image has a zero dimension ({0}x{1})")]
    EmptyImage(u32, u32),
    #[error("no pages to measure")]
    NoPages,
    #[error("visual token model needs positive patch and merge, got {patch_px} and {merge}")]
    BadModel { patch_px: u32, merge: u32 },
    #[error("vocabulary: {0}")]
    Vocabulary(String),
}

/// Patch-grid model of a vision encoder: one token per `patch_px * merge`
/// square cell, partial cells rounded up.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VisualTokenModel {
    pub patch_px: u32,
    pub merge: u32,
    pub cap: Option<u64>,
}

impl Default for VisualTokenModel {
    fn default() -> Self {
        VisualTokenModel { patch_px: 14, merge: 2, cap: None }
    }
}

impl VisualTokenModel {
    pub fn new(patch_px: u32, merge: u32, cap: Option<u64>) -> Result<Self, MetricsError> {
        if patch_px == 0 || merge == 0 {
            return Err(MetricsError::BadModel { patch_px, merge });
        }
        Ok(VisualTokenModel { patch_px, merge, cap })
    }

    pub fn cell_px(&self) -> u64 {
        self.patch_px as u64 * self.merge as u64
    }

    /// Tokens for an image of the given size.
    pub fn tokens_for(&self, width_px: u32, height_px: u32) -> Result<u64, MetricsError> {
        if width_px == 0 || height_px == 0 {
            return Err(MetricsError::EmptyImage(width_px, height_px));
        }
        let cell = self.cell_px();
        let n = (width_px as u64).div_ceil(cell) * (height_px as u64).div_ceil(cell);
        Ok(match self.cap {
            Some(cap) => n.min(cap),
            None => n,
        })
    }
}

pub fn count_visual_tokens(image: &PageImage, vtm: &VisualTokenModel) -> Result<u64, MetricsError> {
    vtm.tokens_for(image.width_px, image.height_px)
}

/// Counts the text tokens of a context.
pub trait TextTokenizer: Send + Sync {
    fn count(&self, text: &str) -> usize;
}

/// `ceil(chars / 4)` per whitespace-delimited segment, control chars ignored.
#[derive(Debug, Clone, Copy, Default)]
pub struct HeuristicTokenizer;

impl TextTokenizer for HeuristicTokenizer {
    fn count(&self, text: &str) -> usize {
        text.split_whitespace()
            .map(|seg| seg.chars().filter(|c| !c.is_control()).count().div_ceil(4))
            .sum()
    }
}

#[derive(Debug, Default)]
struct TrieNode {
    children: HashMap<char, TrieNode>,
    terminal: bool,
}

/// Greedy longest-match tokenizer over a fixed vocabulary.
///
/// At each position the longest vocabulary entry that matches is consumed as
/// one token; a char that starts no entry is one token on its own.
/// Whitespace is matched like any other char, so vocabularies may carry
/// entries with leading spaces.
#[derive(Debug, Default)]
pub struct VocabTokenizer {
    root: TrieNode,
    size: usize,
}

impl VocabTokenizer {
    pub fn from_tokens<I, S>(tokens: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut t = VocabTokenizer::default();
        for tok in tokens {
            let tok = tok.as_ref();
            if tok.is_empty() {
                continue;
            }
            let mut node = &mut t.root;
            for c in tok.chars() {
                node = node.children.entry(c).or_default();
            }
            if !node.terminal {
                node.terminal = true;
                t.size += 1;
            }
        }
        t
    }

    /// One entry per line. `\s` and `\t` escapes stand for a space and a tab,
    /// so entries may start or end with whitespace.
    pub fn from_file(path: &Path) -> Result<Self, MetricsError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| MetricsError::Vocabulary(format!("{}: {e}", path.display())))?;
        Ok(Self::from_tokens(
            text.lines().map(|l| l.replace("\\s", " ").replace("\\t", "\t")),
        ))
    }

    pub fn len(&self) -> usize {
        self.size
    }

    pub fn is_empty(&self) -> bool {
        self.size == 0
    }

    /// The token strings, in order.
    pub fn tokenize(&self, text: &str) -> Vec<String> {
        let chars: Vec<char> = text.chars().collect();
        let mut out = Vec::new();
        let mut i = 0;
        while i < chars.len() {
            let mut node = &self.root;
            let mut best = 0;
            let mut j = i;
            while j < chars.len() {
                match node.children.get(&chars[j]) {
                    Some(next) => {
                        node = next;
                        j += 1;
                        if node.terminal {
                            best = j - i;
                        }
                    }
                    None => break,
                }
            }
            let len = best.max(1);
            out.push(chars[i..i + len].iter().collect());
            i += len;
        }
        out
    }
}

impl TextTokenizer for VocabTokenizer {
    fn count(&self, text: &str) -> usize {
        self.tokenize(text).len()
    }
}

pub fn count_text_tokens(text: &str, tokenizer: &dyn TextTokenizer) -> usize {
    tokenizer.count(text)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompressionReport {
    pub text_tokens: u64,
    pub per_page: Vec<u64>,
    pub total_visual_tokens: u64,
    pub ratio: f64,
    pub config_fingerprint: Option<String>,
}

impl CompressionReport {
    pub fn with_config(mut self, config: &RenderConfig) -> Self {
        self.config_fingerprint = Some(config.fingerprint());
        self
    }
}

/// Compression of `text` rendered as `pages`.
pub fn compression_report(
    text: &str,
    pages: &[PageImage],
    vtm: &VisualTokenModel,
    tokenizer: &dyn TextTokenizer,
) -> Result<CompressionReport, MetricsError> {
    if pages.is_empty() {
        return Err(MetricsError::NoPages);
    }
    let per_page = pages
        .iter()
        .map(|p| count_visual_tokens(p, vtm))
        .collect::<Result<Vec<_>, _>>()?;
    let total: u64 = per_page.iter().sum();
    let text_tokens = tokenizer.count(text) as u64;
    Ok(CompressionReport {
        text_tokens,
        per_page,
        total_visual_tokens: total,
        ratio: text_tokens as f64 / total as f64,
        config_fingerprint: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn a4_at_96_dpi_cell_28() {
        let vtm = VisualTokenModel::default();
        assert_eq!(vtm.tokens_for(794, 1123).unwrap(), 29 * 41);
        assert_eq!(vtm.tokens_for(794, 1123).unwrap(), 1189);
        assert_eq!(vtm.tokens_for(28, 28).unwrap(), 1);
        assert_eq!(vtm.tokens_for(29, 28).unwrap(), 2);
        assert_eq!(vtm.tokens_for(1, 1).unwrap(), 1);
    }

    #[test]
    fn zero_dimension_is_rejected() {
        let vtm = VisualTokenModel::default();
        assert!(matches!(vtm.tokens_for(0, 10), Err(MetricsError::EmptyImage(0, 10))));
        assert!(VisualTokenModel::new(0, 2, None).is_err());
    }

    #[test]
    fn cap_clamps_the_count() {
        let vtm = VisualTokenModel::new(14, 2, Some(100)).unwrap();
        assert_eq!(vtm.tokens_for(794, 1123).unwrap(), 100);
        assert_eq!(vtm.tokens_for(28, 28).unwrap(), 1);
    }

    #[test]
    fn heuristic_counts() {
        let t = HeuristicTokenizer;
        assert_eq!(t.count(""), 0);
        assert_eq!(t.count("aaaa bbbb cccc dddd"), 4);
        assert_eq!(t.count("aaaa bbbb cccc ddddd"), 5);
        assert_eq!(t.count("  a\tbb\n"), 2);
    }

    #[test]
    fn vocab_longest_match() {
        let t = VocabTokenizer::from_tokens(["th", "the", " the", "re", " ", "a"]);
        assert_eq!(t.tokenize("there the"), ["the", "re", " the"]);
        assert_eq!(t.count("xyz"), 3);
        assert_eq!(t.count(""), 0);
        assert_eq!(t.len(), 6);
    }

    #[test]
    fn report_ratio_is_text_over_visual() {
        use crate::layout::{PageLayout, Rect};
        use std::sync::Arc;
        let layout = Arc::new(PageLayout {
            page_index: 0,
            width_pt: 1.0,
            height_pt: 1.0,
            content: Rect { x_pt: 0.0, y_pt: 0.0, width_pt: 1.0, height_pt: 1.0 },
            font_size_pt: 1.0,
            line_height_pt: 1.0,
            line_count: 0,
            glyphs: vec![],
            paragraph_boxes: vec![],
        });
        let page = |w: u32, h: u32| PageImage {
            width_px: w,
            height_px: h,
            dpi: 72,
            pixels: vec![255; (w * h * 3) as usize],
            background: [255; 3],
            crop_origin: (0, 0),
            layout: layout.clone(),
        };
        // 10 x 10 cells and 10 x 15 cells: 250 tokens.
        let pages = [page(280, 280), page(280, 420)];
        let text = "abcd ".repeat(1000);
        let r = compression_report(&text, &pages, &VisualTokenModel::default(), &HeuristicTokenizer)
            .unwrap();
        assert_eq!(r.text_tokens, 1000);
        assert_eq!(r.per_page, [100, 150]);
        assert_eq!(r.total_visual_tokens, 250);
        assert_eq!(r.ratio, 4.0);
        assert!(compression_report("x", &[], &VisualTokenModel::default(), &HeuristicTokenizer).is_err());
    }
}
