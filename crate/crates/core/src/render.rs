//! The full text-to-pages pipeline.

use crate::config::{validate, RenderConfig, ValidationReport};
use crate::font::GlyphMetrics;
use crate::layout::{break_lines, paginate, provenance_text, PageLayout};
use crate::raster::{auto_crop, rasterize, PageImage};

#[derive(Debug, thiserror::Error)]
pub enum RenderError {
    #[error("invalid render config:\n{0}")]
    InvalidConfig(ValidationReport),
}

/// Lay out `text` without rasterizing.
pub fn layout_document(
    text: &str,
    config: &RenderConfig,
    metrics: &dyn GlyphMetrics,
) -> Result<Vec<PageLayout>, RenderError> {
    let report = validate(config);
    if !report.valid {
        return Err(RenderError::InvalidConfig(report));
    }
    Ok(paginate(&break_lines(text, config, metrics), config))
}

/// Break, paginate and rasterize `text`; pages come back in reading order.
/// With `auto_crop` set the last page is trimmed to its ink.
pub fn render_document(
    text: &str,
    config: &RenderConfig,
    metrics: &dyn GlyphMetrics,
) -> Result<Vec<PageImage>, RenderError> {
    let layouts = layout_document(text, config, metrics)?;
    let last = layouts.len() - 1;
    Ok(layouts
        .iter()
        .enumerate()
        .map(|(i, l)| {
            let img = rasterize(l, config, metrics);
            if config.auto_crop && i == last {
                auto_crop(&img)
            } else {
                img
            }
        })
        .collect())
}

/// Normalized source text recovered from the glyphs of `pages`.
pub fn pages_text(source: &str, pages: &[PageImage]) -> String {
    provenance_text(source, pages.iter().map(|p| p.layout.as_ref()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{PageSize, PaperSize};
    use crate::font::EmbeddedFont;
    use crate::layout::normalize_text;

    const SAMPLE: &str = "Rendering turns text into pages.\nEach page is an image; each glyph keeps its source index.\n\n  Whitespace   collapses.";

    #[test]
    fn invalid_config_is_rejected() {
        let mut c = RenderConfig::default();
        c.line_height_pt = 1.0;
        assert!(matches!(
            render_document("x", &c, &EmbeddedFont),
            Err(RenderError::InvalidConfig(_))
        ));
    }

    #[test]
    fn provenance_of_all_pages_is_the_normalized_text() {
        let mut c = RenderConfig::default();
        c.page_size = PageSize::Custom { width_in: 2.0, height_in: 1.5 };
        let pages = render_document(SAMPLE, &c, &EmbeddedFont).unwrap();
        assert!(pages.len() > 1);
        assert_eq!(pages_text(SAMPLE, &pages), normalize_text(SAMPLE));
    }

    #[test]
    fn dpi_scales_pixel_dimensions_exactly() {
        let mut c = RenderConfig::default();
        c.page_size = PageSize::Named(PaperSize::Letter);
        let a = render_document(SAMPLE, &c, &EmbeddedFont).unwrap();
        c.dpi = 96;
        let b = render_document(SAMPLE, &c, &EmbeddedFont).unwrap();
        assert_eq!(a.len(), b.len());
        for (p, q) in a.iter().zip(&b) {
            assert_eq!(p.width_px * 96, q.width_px * 72);
            assert_eq!(p.height_px * 96, q.height_px * 72);
        }
        assert_eq!((a[0].width_px, a[0].height_px), (612, 792));
    }

    #[test]
    fn auto_crop_trims_only_the_last_page() {
        let mut c = RenderConfig::default();
        c.page_size = PageSize::Custom { width_in: 2.0, height_in: 1.5 };
        c.auto_crop = true;
        let pages = render_document(SAMPLE, &c, &EmbeddedFont).unwrap();
        let (last, rest) = pages.split_last().unwrap();
        assert!(rest.iter().all(|p| (p.width_px, p.height_px) == (144, 108)));
        assert!(last.width_px < 144 || last.height_px < 108);
    }
}
