//! Glyph metrics and the embedded fixed-grid bitmap font.
//!
//! Every family name resolves to the same embedded grid font, so rendering
//! never touches system fonts. Printable ASCII uses a 5x7 bitmap; any other
//! codepoint gets a square box whose interior pattern is derived from the
//! codepoint, narrow for most scripts and full-width for CJK.

mod ascii5x7;

use ascii5x7::ASCII_5X7;

/// Advance of narrow glyphs, in em.
pub const EM_ADVANCE_NARROW: f64 = 0.6;
/// Advance of full-width glyphs, in em. Also the widest advance of the
/// embedded font.
pub const EM_ADVANCE_WIDE: f64 = 1.0;

/// An ink mask on a fixed grid, plus where the grid sits in the em box.
///
/// The `*_em` fields are relative to the glyph origin, the top-left corner
/// of an em box one `font_size` tall; horizontal values are further scaled
/// by `h_scale` at render time.
#[derive(Debug, Clone, PartialEq)]
pub struct GlyphBitmap {
    pub cols: u8,
    pub rows: u8,
    /// One mask per row; bit `cols - 1 - x` is column `x`.
    pub mask: Vec<u16>,
    pub left_em: f64,
    pub top_em: f64,
    pub width_em: f64,
    pub height_em: f64,
}

impl GlyphBitmap {
    pub fn ink(&self, col: usize, row: usize) -> bool {
        let bits = self.mask[row];
        (bits >> (self.cols as usize - 1 - col)) & 1 == 1
    }

    pub fn is_blank(&self) -> bool {
        self.mask.iter().all(|r| *r == 0)
    }
}

/// Source of advances and bitmaps for the typesetter.
///
/// Advances are expressed per em so that scaling in `font_size` and
/// `h_scale` is linear by construction.
pub trait GlyphMetrics: Send + Sync {
    /// Advance in em units; must be positive for every non-whitespace char.
    fn advance_em(&self, ch: char) -> f64;

    fn glyph(&self, ch: char) -> GlyphBitmap;

    /// Advance in points.
    fn advance(&self, ch: char, font_size_pt: f64, h_scale: f64) -> f64 {
        self.advance_em(ch) * font_size_pt * h_scale
    }
}

/// The hermetic default font.
#[derive(Debug, Clone, Copy, Default)]
pub struct EmbeddedFont;

/// CJK and other East Asian wide ranges, broken one glyph at a time.
pub fn is_wide(ch: char) -> bool {
    matches!(ch as u32,
        0x1100..=0x115F
        | 0x2E80..=0x303E
        | 0x3041..=0x33FF
        | 0x3400..=0x4DBF
        | 0x4E00..=0x9FFF
        | 0xA000..=0xA4CF
        | 0xAC00..=0xD7A3
        | 0xF900..=0xFAFF
        | 0xFE30..=0xFE4F
        | 0xFF00..=0xFF60
        | 0xFFE0..=0xFFE6
        | 0x20000..=0x2FFFD
        | 0x30000..=0x3FFFD)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Outlined box with a codepoint-specific interior pattern.
fn box_glyph(ch: char, cols: u8, rows: u8) -> Vec<u16> {
    let full: u16 = (1u16 << cols) - 1;
    let edge: u16 = (1u16 << (cols - 1)) | 1;
    let inner_cols = cols as u32 - 2;
    let mut bits = splitmix64(ch as u64);
    let mut mask = Vec::with_capacity(rows as usize);
    for r in 0..rows {
        if r == 0 || r == rows - 1 {
            mask.push(full);
            continue;
        }
        let inner = (bits as u16) & ((1u16 << inner_cols) - 1);
        bits >>= inner_cols;
        mask.push(edge | (inner << 1));
    }
    mask
}

impl GlyphMetrics for EmbeddedFont {
    fn advance_em(&self, ch: char) -> f64 {
        if is_wide(ch) {
            EM_ADVANCE_WIDE
        } else {
            EM_ADVANCE_NARROW
        }
    }

    fn glyph(&self, ch: char) -> GlyphBitmap {
        let code = ch as u32;
        if (0x20..=0x7E).contains(&code) {
            let rows = ASCII_5X7[(code - 0x20) as usize];
            return GlyphBitmap {
                cols: 5,
                rows: 7,
                mask: rows.iter().map(|r| *r as u16).collect(),
                left_em: 0.0,
                top_em: 0.1,
                width_em: 0.5,
                height_em: 0.7,
            };
        }
        if is_wide(ch) {
            GlyphBitmap {
                cols: 9,
                rows: 9,
                mask: box_glyph(ch, 9, 9),
                left_em: 0.05,
                top_em: 0.05,
                width_em: 0.9,
                height_em: 0.9,
            }
        } else {
            GlyphBitmap {
                cols: 5,
                rows: 7,
                mask: box_glyph(ch, 5, 7),
                left_em: 0.0,
                top_em: 0.1,
                width_em: 0.5,
                height_em: 0.7,
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn capital_a_fills_its_grid() {
        let g = EmbeddedFont.glyph('A');
        assert_eq!((g.cols, g.rows), (5, 7));
        assert!((0..5).all(|c| (0..7).any(|r| g.ink(c, r))));
        assert!((0..7).all(|r| (0..5).any(|c| g.ink(c, r))));
        assert!(!g.ink(0, 0));
        assert!(g.ink(1, 0));
    }

    #[test]
    fn space_is_blank_and_others_are_not() {
        assert!(EmbeddedFont.glyph(' ').is_blank());
        for code in 0x21u32..=0x7E {
            let ch = char::from_u32(code).unwrap();
            assert!(!EmbeddedFont.glyph(ch).is_blank(), "{ch:?}");
        }
    }

    #[test]
    fn advances_scale_linearly() {
        let f = EmbeddedFont;
        for ch in ['a', 'W', '\u{4E2D}', '\u{0416}', '\u{FFFD}'] {
            let base = f.advance(ch, 10.0, 1.0);
            assert!(base > 0.0);
            assert!((f.advance(ch, 20.0, 1.0) - 2.0 * base).abs() < 1e-12);
            assert!((f.advance(ch, 10.0, 0.5) - 0.5 * base).abs() < 1e-12);
        }
        assert_eq!(f.advance_em('\u{4E2D}'), EM_ADVANCE_WIDE);
        assert_eq!(f.advance_em('x'), EM_ADVANCE_NARROW);
    }

    #[test]
    fn unknown_codepoints_get_distinct_outlined_boxes() {
        let a = EmbeddedFont.glyph('\u{0416}');
        let b = EmbeddedFont.glyph('\u{0417}');
        assert_ne!(a.mask, b.mask);
        assert_eq!(a.mask[0], 0b11111);
        assert_eq!(a.mask[6], 0b11111);
        let wide = EmbeddedFont.glyph('\u{4E2D}');
        assert_eq!((wide.cols, wide.rows), (9, 9));
        assert_eq!(wide.width_em, wide.height_em);
    }
}
