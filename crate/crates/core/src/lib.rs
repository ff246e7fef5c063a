//! Text-to-image rendering with visual-token accounting.
//!
//! A [`RenderConfig`] describes how text is typeset onto pages. The
//! [`render::render_document`] pipeline breaks lines, paginates and
//! rasterizes with the embedded bitmap font; [`metrics`] turns the result
//! into a compression ratio, and [`rl`] holds the reward and policy
//! optimization arithmetic used for training on rendered pages.

pub mod config;
pub mod corpus;
pub mod font;
pub mod layout;
pub mod metrics;
pub mod raster;
pub mod render;
pub mod rl;

pub use config::{validate, ConfigError, RenderConfig, Theme, ValidationReport};
pub use font::{EmbeddedFont, GlyphMetrics};
pub use layout::{GlyphSource, PageLayout};
pub use metrics::{
    compression_report, CompressionReport, HeuristicTokenizer, TextTokenizer, VisualTokenModel,
    VocabTokenizer,
};
pub use raster::PageImage;
pub use render::{render_document, RenderError};

pub type GrpoParams = rl::GrpoParams<f64>;
pub type GrpoParams32 = rl::GrpoParams<f32>;
pub type RewardGroup = rl::RewardGroup<f64>;
pub type RewardGroup32 = rl::RewardGroup<f32>;
pub type LogProbRecord = rl::LogProbRecord<f64>;
pub type LogProbRecord32 = rl::LogProbRecord<f32>;
pub type GrpoOutput = rl::GrpoOutput<f64>;
pub type GroupTerms = rl::GroupTerms<f64>;
