//! The rendering configuration vector: typed fields, validation rules, and the
//! versioned JSON interchange format.
//!
//! Parsing and validation are separate steps. [`RenderConfig::load`] only
//! checks structure, so a config with `"dpi": -5` loads fine and is then
//! reported by [`validate`].

pub mod sample;

pub use sample::{sample, sample_with, SamplingPolicy, WeightedRange, DPI_NORMAL_SET, FONT_SIZES_PT};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fmt;

use crate::font::EM_ADVANCE_WIDE;

/// Current value of the `schema_version` field.
pub const SCHEMA_VERSION: u32 = 1;

/// Lowest dpi accepted by [`validate`].
pub const MIN_DPI: i64 = 30;

/// Points per inch.
pub const PT_PER_IN: f64 = 72.0;

/// Named paper sizes with a fixed inch table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PaperSize {
    A4,
    Letter,
    Legal,
    A5,
    B5,
    A3,
    B4,
    Tabloid,
}

impl PaperSize {
    pub const ALL: [PaperSize; 8] = [
        PaperSize::A4,
        PaperSize::Letter,
        PaperSize::Legal,
        PaperSize::A5,
        PaperSize::B5,
        PaperSize::A3,
        PaperSize::B4,
        PaperSize::Tabloid,
    ];

    /// (width, height) in inches, portrait.
    pub fn inches(self) -> (f64, f64) {
        match self {
            PaperSize::A4 => (8.27, 11.69),
            PaperSize::Letter => (8.5, 11.0),
            PaperSize::Legal => (8.5, 14.0),
            PaperSize::A5 => (5.83, 8.27),
            PaperSize::B5 => (6.93, 9.84),
            PaperSize::A3 => (11.69, 16.54),
            PaperSize::B4 => (9.84, 13.9),
            PaperSize::Tabloid => (11.0, 17.0),
        }
    }
}

/// Either a named paper size or explicit inch dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PageSize {
    Named(PaperSize),
    Custom { width_in: f64, height_in: f64 },
}

impl PageSize {
    pub fn inches(&self) -> (f64, f64) {
        match *self {
            PageSize::Named(p) => p.inches(),
            PageSize::Custom { width_in, height_in } => (width_in, height_in),
        }
    }

    pub fn points(&self) -> (f64, f64) {
        let (w, h) = self.inches();
        (w * PT_PER_IN, h * PT_PER_IN)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Alignment {
    Left,
    Justify,
    Right,
    Center,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IndentMode {
    None,
    FirstLine,
    Block,
    Hanging,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Indent {
    pub mode: IndentMode,
    pub indent_em: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Margins {
    pub top: f64,
    pub bottom: f64,
    pub left: f64,
    pub right: f64,
}

impl Margins {
    pub fn uniform(v: f64) -> Self {
        Margins { top: v, bottom: v, left: v, right: v }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Spacing {
    pub before: f64,
    pub after: f64,
}

pub type Rgb = [u8; 3];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Colors {
    pub page_rgb: Rgb,
    pub paragraph_rgb: Rgb,
    pub font_rgb: Rgb,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Borders {
    pub width_pt: f64,
    pub padding_pt: f64,
}

/// The five named style themes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Theme {
    DocumentStyle,
    WebStyle,
    DarkMode,
    CodeStyle,
    ArtisticPixel,
}

impl Theme {
    pub const ALL: [Theme; 5] = [
        Theme::DocumentStyle,
        Theme::WebStyle,
        Theme::DarkMode,
        Theme::CodeStyle,
        Theme::ArtisticPixel,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Theme::DocumentStyle => "document_style",
            Theme::WebStyle => "web_style",
            Theme::DarkMode => "dark_mode",
            Theme::CodeStyle => "code_style",
            Theme::ArtisticPixel => "artistic_pixel",
        }
    }
}

impl std::str::FromStr for Theme {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Theme::ALL
            .into_iter()
            .find(|t| t.label() == s)
            .ok_or_else(|| ConfigError::UnknownTheme(s.to_string()))
    }
}

impl fmt::Display for Theme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Every typography and layout knob that controls how text becomes pages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RenderConfig {
    pub schema_version: u32,
    pub dpi: i64,
    pub page_size: PageSize,
    pub font_family: String,
    pub italic: bool,
    pub font_size_pt: f64,
    pub line_height_pt: f64,
    pub alignment: Alignment,
    pub margins_pt: Margins,
    pub indent: Indent,
    pub spacing_pt: Spacing,
    pub h_scale: f64,
    pub colors: Colors,
    pub borders: Option<Borders>,
    pub newline_markup: Option<String>,
    pub auto_crop: bool,
    pub theme: Option<Theme>,
}

impl Default for RenderConfig {
    fn default() -> Self {
        RenderConfig {
            schema_version: SCHEMA_VERSION,
            dpi: 72,
            page_size: PageSize::Named(PaperSize::Letter),
            font_family: "mono".to_string(),
            italic: false,
            font_size_pt: 9.0,
            line_height_pt: 10.0,
            alignment: Alignment::Left,
            margins_pt: Margins::uniform(20.0),
            indent: Indent { mode: IndentMode::None, indent_em: 0.0 },
            spacing_pt: Spacing { before: 0.0, after: 0.0 },
            h_scale: 1.0,
            colors: Colors {
                page_rgb: [255, 255, 255],
                paragraph_rgb: [255, 255, 255],
                font_rgb: [0, 0, 0],
            },
            borders: None,
            newline_markup: None,
            auto_crop: false,
            theme: None,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("missing field: {0}")]
    MissingField(String),
    #[error("invalid field {field}: {message}")]
    InvalidField { field: String, message: String },
    #[error("malformed config JSON: {0}")]
    Syntax(String),
    #[error("unsupported schema_version {0} (expected {SCHEMA_VERSION})")]
    SchemaVersion(u32),
    #[error("unknown theme {0:?}")]
    UnknownTheme(String),
    #[error("sampling policy produced no valid config in {0} draws")]
    SamplingExhausted(usize),
}

impl RenderConfig {
    /// Page width and height in points.
    pub fn page_points(&self) -> (f64, f64) {
        self.page_size.points()
    }

    pub fn content_width_pt(&self) -> f64 {
        self.page_points().0 - self.margins_pt.left - self.margins_pt.right
    }

    pub fn content_height_pt(&self) -> f64 {
        self.page_points().1 - self.margins_pt.top - self.margins_pt.bottom
    }

    /// Pixels per point at the configured dpi.
    pub fn px_per_pt(&self) -> f64 {
        self.dpi as f64 / PT_PER_IN
    }

    /// Serialize to the canonical pretty JSON form.
    pub fn save(&self) -> Vec<u8> {
        let mut out = serde_json::to_vec_pretty(self).expect("config serializes");
        out.push(b'\n');
        out
    }

    /// Parse the JSON form. Structural only; call [`validate`] afterwards.
    pub fn load(bytes: &[u8]) -> Result<RenderConfig, ConfigError> {
        let mut de = serde_json::Deserializer::from_slice(bytes);
        let cfg: RenderConfig = serde_path_to_error::deserialize(&mut de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            let msg = inner.to_string();
            if let Some(field) = missing_field_name(&msg) {
                let full = if path == "." || path.is_empty() {
                    field
                } else {
                    format!("{path}.{field}")
                };
                ConfigError::MissingField(full)
            } else if inner.is_syntax() || inner.is_eof() {
                ConfigError::Syntax(msg)
            } else {
                ConfigError::InvalidField { field: path, message: msg }
            }
        })?;
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(ConfigError::SchemaVersion(cfg.schema_version));
        }
        Ok(cfg)
    }

    /// Hex SHA-256 of the canonical compact JSON encoding.
    pub fn fingerprint(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&bytes))
    }
}

fn missing_field_name(msg: &str) -> Option<String> {
    let rest = msg.strip_prefix("missing field `")?;
    let end = rest.find('`')?;
    Some(rest[..end].to_string())
}

/// One violated rule.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub rule_id: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub valid: bool,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn has(&self, rule_id: &str) -> bool {
        self.violations.iter().any(|v| v.rule_id == rule_id)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.valid {
            return f.write_str("valid");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("\n")?;
            }
            write!(f, "{}: {}", v.rule_id, v.message)?;
        }
        Ok(())
    }
}

/// Rule identifiers reported by [`validate`].
pub mod rules {
    pub const DPI_BELOW_MIN: &str = "dpi_below_min";
    pub const NONPOSITIVE_PAGE_SIZE: &str = "nonpositive_page_size";
    pub const EMPTY_FONT_FAMILY: &str = "empty_font_family";
    pub const NONPOSITIVE_FONT_SIZE: &str = "nonpositive_font_size";
    pub const LINE_HEIGHT_LT_FONT_SIZE: &str = "line_height_lt_font_size";
    pub const NEGATIVE_MARGIN: &str = "negative_margin";
    pub const NONPOSITIVE_CONTENT_WIDTH: &str = "nonpositive_content_width";
    pub const CONTENT_WIDTH_LT_GLYPH: &str = "content_width_lt_glyph";
    pub const CONTENT_HEIGHT_LT_LINE_HEIGHT: &str = "content_height_lt_line_height";
    pub const NEGATIVE_INDENT: &str = "negative_indent";
    pub const INDENT_EXCEEDS_CONTENT_WIDTH: &str = "indent_exceeds_content_width";
    pub const NEGATIVE_SPACING: &str = "negative_spacing";
    pub const H_SCALE_OUT_OF_RANGE: &str = "h_scale_out_of_range";
    pub const INVISIBLE_TEXT: &str = "invisible_text";
    pub const NEGATIVE_BORDER: &str = "negative_border";
    pub const EMPTY_NEWLINE_MARKUP: &str = "empty_newline_markup";
}

/// Check every rule and report all violations.
///
/// Geometry rules that depend on each other are chained so that one root
/// cause yields one entry: a non-positive page size suppresses the content
/// box checks, and a non-positive content width suppresses the glyph-width
/// check.
pub fn validate(config: &RenderConfig) -> ValidationReport {
    let mut out = Vec::new();
    let mut push = |rule: &str, message: String| {
        out.push(Violation { rule_id: rule.to_string(), message });
    };

    if config.dpi < MIN_DPI {
        push(rules::DPI_BELOW_MIN, format!("dpi {} is below {MIN_DPI}", config.dpi));
    }

    let (w_in, h_in) = config.page_size.inches();
    let page_ok = w_in.is_finite() && h_in.is_finite() && w_in > 0.0 && h_in > 0.0;
    if !page_ok {
        push(
            rules::NONPOSITIVE_PAGE_SIZE,
            format!("page size {w_in} x {h_in} in must be positive"),
        );
    }

    if config.font_family.trim().is_empty() {
        push(rules::EMPTY_FONT_FAMILY, "font_family is empty".to_string());
    }

    let fs = config.font_size_pt;
    let lh = config.line_height_pt;
    let fs_ok = fs.is_finite() && fs > 0.0;
    if !fs_ok {
        push(rules::NONPOSITIVE_FONT_SIZE, format!("font_size_pt {fs} must be positive"));
    }
    if !(lh.is_finite() && lh >= fs) {
        push(
            rules::LINE_HEIGHT_LT_FONT_SIZE,
            format!("line_height_pt {lh} is smaller than font_size_pt {fs}"),
        );
    }

    let m = config.margins_pt;
    let margins_ok = [m.top, m.bottom, m.left, m.right]
        .iter()
        .all(|v| v.is_finite() && *v >= 0.0);
    if !margins_ok {
        push(
            rules::NEGATIVE_MARGIN,
            format!("margins ({}, {}, {}, {}) must be >= 0", m.top, m.bottom, m.left, m.right),
        );
    }

    let h = config.h_scale;
    let h_ok = h.is_finite() && h > 0.0 && h <= 1.0;
    if !h_ok {
        push(rules::H_SCALE_OUT_OF_RANGE, format!("h_scale {h} is outside (0, 1]"));
    }

    let indent_ok = config.indent.indent_em.is_finite() && config.indent.indent_em >= 0.0;
    if !indent_ok {
        push(
            rules::NEGATIVE_INDENT,
            format!("indent_em {} must be >= 0", config.indent.indent_em),
        );
    }

    if page_ok {
        let cw = config.content_width_pt();
        let ch = config.content_height_pt();
        if cw <= 0.0 {
            push(
                rules::NONPOSITIVE_CONTENT_WIDTH,
                format!("content width {cw:.2} pt is not positive"),
            );
        } else if fs_ok && h_ok {
            let widest = EM_ADVANCE_WIDE * fs * h;
            if cw <= widest {
                push(
                    rules::CONTENT_WIDTH_LT_GLYPH,
                    format!("content width {cw:.2} pt does not exceed one glyph advance {widest:.2} pt"),
                );
            } else if indent_ok && config.indent.mode != IndentMode::None {
                let indent = config.indent.indent_em * fs;
                if indent + widest >= cw {
                    push(
                        rules::INDENT_EXCEEDS_CONTENT_WIDTH,
                        format!("indent {indent:.2} pt leaves no room for a glyph in {cw:.2} pt"),
                    );
                }
            }
        }
        if ch < lh || ch <= 0.0 {
            push(
                rules::CONTENT_HEIGHT_LT_LINE_HEIGHT,
                format!("content height {ch:.2} pt is below line height {lh} pt"),
            );
        }
    }

    let s = config.spacing_pt;
    if !(s.before.is_finite() && s.before >= 0.0 && s.after.is_finite() && s.after >= 0.0) {
        push(
            rules::NEGATIVE_SPACING,
            format!("spacing ({}, {}) must be >= 0", s.before, s.after),
        );
    }

    if config.colors.font_rgb == config.colors.paragraph_rgb {
        push(
            rules::INVISIBLE_TEXT,
            format!("font_rgb {:?} equals paragraph_rgb", config.colors.font_rgb),
        );
    }

    if let Some(b) = config.borders {
        if !(b.width_pt.is_finite() && b.width_pt >= 0.0 && b.padding_pt.is_finite() && b.padding_pt >= 0.0) {
            push(
                rules::NEGATIVE_BORDER,
                format!("border width {} / padding {} must be >= 0", b.width_pt, b.padding_pt),
            );
        }
    }

    if matches!(config.newline_markup.as_deref(), Some("")) {
        push(rules::EMPTY_NEWLINE_MARKUP, "newline_markup is an empty string".to_string());
    }

    ValidationReport { valid: out.is_empty(), violations: out }
}
