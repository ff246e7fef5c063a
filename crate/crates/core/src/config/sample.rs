//! Seeded sampling of configurations from the controllable-factor mixture.
//!
//! The set memberships (dpi sets, font sizes, line-height offsets, margin
//! patterns) are fixed; the weights attached to them live in
//! [`SamplingPolicy`] and can be overridden from JSON.

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{
    validate, Alignment, Borders, Colors, ConfigError, Indent, IndentMode, Margins, PageSize,
    PaperSize, RenderConfig, Spacing, Theme, SCHEMA_VERSION,
};

/// Sanctioned font sizes in points.
pub const FONT_SIZES_PT: [f64; 9] = [7.0, 7.5, 8.0, 9.0, 9.5, 10.0, 11.0, 12.0, 14.0];

/// The "normal" dpi set.
pub const DPI_NORMAL_SET: [i64; 9] = [72, 80, 96, 100, 110, 120, 144, 150, 300];

/// An inclusive integer range with a mixture weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightedRange {
    pub weight: f64,
    pub min: i64,
    pub max: i64,
}

/// Mixture weights for every sampled field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SamplingPolicy {
    pub dpi_lowest: WeightedRange,
    pub dpi_low: WeightedRange,
    pub dpi_medium: WeightedRange,
    pub dpi_normal_weight: f64,
    pub dpi_high: WeightedRange,
    /// Named / common-aspect / free-aspect page size modes.
    pub page_mode_weights: [f64; 3],
    pub paper_weights: Vec<(PaperSize, f64)>,
    pub aspect_ratios: Vec<f64>,
    /// Aligned with [`FONT_SIZES_PT`].
    pub font_size_weights: [f64; 9],
    /// Weights for line_height = font_size + 0, 1, 2, 3.
    pub line_extra_weights: [f64; 4],
    /// Left, justify, right, center.
    pub alignment_weights: [f64; 4],
    /// All-equal, vertical-larger, horizontal-larger.
    pub margin_pattern_weights: [f64; 3],
    pub margin_min_pt: i64,
    pub margin_max_pt: i64,
    /// None, first-line, block, hanging.
    pub indent_mode_weights: [f64; 4],
    /// None, small, large.
    pub spacing_mode_weights: [f64; 3],
    /// (h_scale, weight) pairs.
    pub h_scale_levels: Vec<(f64, f64)>,
    pub italic_prob: f64,
    pub borders_prob: f64,
    pub newline_markup_prob: f64,
    pub auto_crop_prob: f64,
    pub font_families: Vec<String>,
    pub newline_markers: Vec<String>,
}

impl Default for SamplingPolicy {
    fn default() -> Self {
        SamplingPolicy {
            dpi_lowest: WeightedRange { weight: 0.04, min: 45, max: 59 },
            dpi_low: WeightedRange { weight: 0.08, min: 60, max: 71 },
            dpi_medium: WeightedRange { weight: 0.38, min: 72, max: 119 },
            dpi_normal_weight: 0.46,
            dpi_high: WeightedRange { weight: 0.04, min: 301, max: 600 },
            page_mode_weights: [0.7, 0.2, 0.1],
            paper_weights: vec![
                (PaperSize::A4, 0.3),
                (PaperSize::Letter, 0.3),
                (PaperSize::Legal, 0.05),
                (PaperSize::A5, 0.1),
                (PaperSize::B5, 0.1),
                (PaperSize::A3, 0.05),
                (PaperSize::B4, 0.05),
                (PaperSize::Tabloid, 0.05),
            ],
            aspect_ratios: vec![1.414, 1.333, 1.5, 1.778],
            font_size_weights: [0.08, 0.08, 0.12, 0.14, 0.1, 0.16, 0.14, 0.12, 0.06],
            line_extra_weights: [0.25, 0.3, 0.25, 0.2],
            alignment_weights: [0.45, 0.45, 0.05, 0.05],
            margin_pattern_weights: [0.5, 0.25, 0.25],
            margin_min_pt: 10,
            margin_max_pt: 40,
            indent_mode_weights: [0.5, 0.3, 0.1, 0.1],
            spacing_mode_weights: [0.5, 0.35, 0.15],
            h_scale_levels: vec![
                (1.0, 0.55),
                (0.95, 0.2),
                (0.9, 0.12),
                (0.85, 0.07),
                (0.8, 0.04),
                (0.75, 0.02),
            ],
            italic_prob: 0.1,
            borders_prob: 0.1,
            newline_markup_prob: 0.05,
            auto_crop_prob: 0.3,
            font_families: ["mono", "sans", "serif", "pixel"].map(String::from).to_vec(),
            newline_markers: ["\\n", "<br>", "\u{23CE}", "\u{B6}"].map(String::from).to_vec(),
        }
    }
}

impl SamplingPolicy {
    pub fn from_json(bytes: &[u8]) -> Result<Self, ConfigError> {
        serde_json::from_slice(bytes).map_err(|e| ConfigError::Syntax(e.to_string()))
    }
}

/// Sample a configuration with the default policy.
pub fn sample(seed: u64, theme: Option<&str>) -> Result<RenderConfig, ConfigError> {
    sample_with(seed, theme, &SamplingPolicy::default())
}

/// Sample a configuration; a pure function of `(seed, theme, policy)`.
pub fn sample_with(
    seed: u64,
    theme: Option<&str>,
    policy: &SamplingPolicy,
) -> Result<RenderConfig, ConfigError> {
    let theme = theme.map(str::parse::<Theme>).transpose()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_DRAWS {
        let cfg = draw(&mut rng, theme, policy);
        if validate(&cfg).valid {
            return Ok(cfg);
        }
    }
    Err(ConfigError::SamplingExhausted(MAX_DRAWS))
}

const MAX_DRAWS: usize = 256;

pub fn pick<R: Rng>(rng: &mut R, weights: &[f64]) -> usize {
    WeightedIndex::new(weights)
        .expect("sampling weights must be non-negative with a positive sum")
        .sample(rng)
}

pub fn sample_dpi<R: Rng>(rng: &mut R, p: &SamplingPolicy) -> i64 {
    let w = [
        p.dpi_lowest.weight,
        p.dpi_low.weight,
        p.dpi_medium.weight,
        p.dpi_normal_weight,
        p.dpi_high.weight,
    ];
    let range = |rng: &mut R, r: WeightedRange| rng.gen_range(r.min..=r.max);
    match pick(rng, &w) {
        0 => range(rng, p.dpi_lowest),
        1 => range(rng, p.dpi_low),
        2 => range(rng, p.dpi_medium),
        3 => DPI_NORMAL_SET[rng.gen_range(0..DPI_NORMAL_SET.len())],
        _ => range(rng, p.dpi_high),
    }
}

pub fn sample_page_size<R: Rng>(rng: &mut R, p: &SamplingPolicy) -> PageSize {
    match pick(rng, &p.page_mode_weights) {
        0 => {
            let w: Vec<f64> = p.paper_weights.iter().map(|(_, w)| *w).collect();
            PageSize::Named(p.paper_weights[pick(rng, &w)].0)
        }
        1 => {
            let aspect = p.aspect_ratios[rng.gen_range(0..p.aspect_ratios.len())];
            let width = round2(rng.gen_range(5.0..9.0));
            PageSize::Custom { width_in: width, height_in: round2(width * aspect) }
        }
        _ => {
            // Piecewise aspect: narrow pages up to tall ones.
            let aspect = match rng.gen_range(0..3) {
                0 => rng.gen_range(0.6..1.0),
                1 => rng.gen_range(1.0..1.5),
                _ => rng.gen_range(1.5..2.2),
            };
            let width = round2(rng.gen_range(5.0..10.0));
            PageSize::Custom { width_in: width, height_in: round2(width * aspect) }
        }
    }
}

pub fn sample_font_size<R: Rng>(rng: &mut R, p: &SamplingPolicy) -> f64 {
    FONT_SIZES_PT[pick(rng, &p.font_size_weights)]
}

pub fn sample_line_extra<R: Rng>(rng: &mut R, p: &SamplingPolicy) -> f64 {
    pick(rng, &p.line_extra_weights) as f64
}

pub fn sample_alignment<R: Rng>(rng: &mut R, p: &SamplingPolicy) -> Alignment {
    [Alignment::Left, Alignment::Justify, Alignment::Right, Alignment::Center]
        [pick(rng, &p.alignment_weights)]
}

pub fn sample_indent<R: Rng>(rng: &mut R, p: &SamplingPolicy) -> Indent {
    match pick(rng, &p.indent_mode_weights) {
        0 => Indent { mode: IndentMode::None, indent_em: 0.0 },
        1 => Indent { mode: IndentMode::FirstLine, indent_em: round1(rng.gen_range(1.0..=2.5)) },
        2 => Indent { mode: IndentMode::Block, indent_em: round1(rng.gen_range(0.5..=2.0)) },
        _ => Indent { mode: IndentMode::Hanging, indent_em: round1(rng.gen_range(1.0..=2.0)) },
    }
}

fn sample_gap<R: Rng>(rng: &mut R, p: &SamplingPolicy) -> f64 {
    match pick(rng, &p.spacing_mode_weights) {
        0 => 0.0,
        1 => rng.gen_range(2..=6) as f64,
        _ => rng.gen_range(8..=16) as f64,
    }
}

pub fn sample_spacing<R: Rng>(rng: &mut R, p: &SamplingPolicy) -> Spacing {
    let before = sample_gap(rng, p);
    let after = sample_gap(rng, p);
    Spacing { before, after }
}

pub fn sample_h_scale<R: Rng>(rng: &mut R, p: &SamplingPolicy) -> f64 {
    let w: Vec<f64> = p.h_scale_levels.iter().map(|(_, w)| *w).collect();
    p.h_scale_levels[pick(rng, &w)].0
}

/// Coherent (page, paragraph, font) triplets per theme.
pub fn palettes(theme: Option<Theme>) -> &'static [Colors] {
    const fn c(page: [u8; 3], paragraph: [u8; 3], font: [u8; 3]) -> Colors {
        Colors { page_rgb: page, paragraph_rgb: paragraph, font_rgb: font }
    }
    const DOCUMENT: &[Colors] = &[
        c([255, 255, 255], [255, 255, 255], [0, 0, 0]),
        c([255, 255, 255], [255, 255, 255], [33, 33, 33]),
        c([250, 250, 247], [250, 250, 247], [20, 20, 20]),
    ];
    const WEB: &[Colors] = &[
        c([245, 247, 250], [255, 255, 255], [33, 37, 41]),
        c([240, 242, 245], [255, 255, 255], [28, 30, 33]),
        c([255, 255, 255], [248, 249, 250], [52, 58, 64]),
    ];
    const DARK: &[Colors] = &[
        c([18, 18, 18], [30, 30, 30], [230, 230, 230]),
        c([13, 17, 23], [22, 27, 34], [201, 209, 217]),
        c([0, 0, 0], [0, 0, 0], [200, 200, 200]),
    ];
    const CODE: &[Colors] = &[
        c([40, 44, 52], [40, 44, 52], [171, 178, 191]),
        c([253, 246, 227], [253, 246, 227], [88, 110, 117]),
        c([246, 248, 250], [246, 248, 250], [36, 41, 46]),
    ];
    const PIXEL: &[Colors] = &[
        c([255, 248, 220], [250, 240, 200], [90, 40, 20]),
        c([15, 56, 15], [48, 98, 48], [155, 188, 15]),
        c([32, 24, 48], [48, 36, 72], [240, 208, 96]),
    ];
    const ANY: &[Colors] = &[
        c([255, 255, 255], [255, 255, 255], [0, 0, 0]),
        c([245, 247, 250], [255, 255, 255], [33, 37, 41]),
        c([18, 18, 18], [30, 30, 30], [230, 230, 230]),
        c([253, 246, 227], [253, 246, 227], [88, 110, 117]),
    ];
    match theme {
        Some(Theme::DocumentStyle) => DOCUMENT,
        Some(Theme::WebStyle) => WEB,
        Some(Theme::DarkMode) => DARK,
        Some(Theme::CodeStyle) => CODE,
        Some(Theme::ArtisticPixel) => PIXEL,
        None => ANY,
    }
}

pub fn sample_colors<R: Rng>(rng: &mut R, theme: Option<Theme>) -> Colors {
    let options = palettes(theme);
    options[rng.gen_range(0..options.len())]
}

fn draw(rng: &mut ChaCha8Rng, theme: Option<Theme>, p: &SamplingPolicy) -> RenderConfig {
    let dpi = sample_dpi(rng, p);
    let page_size = sample_page_size(rng, p);
    let family_idx = rng.gen_range(0..p.font_families.len());
    let font_family = match theme {
        Some(Theme::CodeStyle) => "mono".to_string(),
        Some(Theme::ArtisticPixel) => "pixel".to_string(),
        _ => p.font_families[family_idx].clone(),
    };
    let italic = rng.gen_bool(p.italic_prob);
    let font_size_pt = sample_font_size(rng, p);
    let line_height_pt = font_size_pt + sample_line_extra(rng, p);
    let alignment = match theme {
        Some(Theme::CodeStyle) => {
            // Code keeps its ragged right edge.
            let _ = sample_alignment(rng, p);
            Alignment::Left
        }
        _ => sample_alignment(rng, p),
    };
    let margins_pt = sample_margins(rng, p);
    let indent = sample_indent(rng, p);
    let spacing_pt = sample_spacing(rng, p);
    let h_scale = sample_h_scale(rng, p);
    let colors = sample_colors(rng, theme);
    let borders = rng.gen_bool(p.borders_prob).then(|| Borders {
        width_pt: round2(rng.gen_range(0.5..=2.0)),
        padding_pt: rng.gen_range(2..=6) as f64,
    });
    let newline_markup = rng
        .gen_bool(p.newline_markup_prob)
        .then(|| p.newline_markers[rng.gen_range(0..p.newline_markers.len())].clone());
    let auto_crop = rng.gen_bool(p.auto_crop_prob);
    RenderConfig {
        schema_version: SCHEMA_VERSION,
        dpi,
        page_size,
        font_family,
        italic,
        font_size_pt,
        line_height_pt,
        alignment,
        margins_pt,
        indent,
        spacing_pt,
        h_scale,
        colors,
        borders,
        newline_markup,
        auto_crop,
        theme,
    }
}

pub fn sample_margins<R: Rng>(rng: &mut R, p: &SamplingPolicy) -> Margins {
    let (lo, hi) = (p.margin_min_pt, p.margin_max_pt);
    match pick(rng, &p.margin_pattern_weights) {
        0 => Margins::uniform(rng.gen_range(lo..=hi) as f64),
        pattern => {
            let a = rng.gen_range(lo..=hi);
            let b = rng.gen_range(lo..=hi);
            let (big, small) = if a == b {
                (hi.max(a), lo.min(a))
            } else {
                (a.max(b), a.min(b))
            };
            let (big, small) = (big as f64, small as f64);
            if pattern == 1 {
                Margins { top: big, bottom: big, left: small, right: small }
            } else {
                Margins { top: small, bottom: small, left: big, right: big }
            }
        }
    }
}

fn round1(v: f64) -> f64 {
    (v * 10.0).round() / 10.0
}

fn round2(v: f64) -> f64 {
    (v * 100.0).round() / 100.0
}
