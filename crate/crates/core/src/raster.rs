//! Page rasterization, white-margin cropping and PNG encoding.
//!
//! All geometry goes through `f64::round` on values computed with plain
//! IEEE arithmetic, so output is bit-identical across platforms.

use std::collections::HashMap;
use std::sync::Arc;

use sha2::{Digest, Sha256};

use crate::config::{RenderConfig, Rgb};
use crate::font::{GlyphBitmap, GlyphMetrics};
use crate::layout::{PageLayout, Rect};

/// A rasterized page: 8-bit RGB, row-major, no padding.
#[derive(Debug, Clone, PartialEq)]
pub struct PageImage {
    pub width_px: u32,
    pub height_px: u32,
    pub dpi: u32,
    pub pixels: Vec<u8>,
    /// The page fill color; everything else counts as ink for cropping.
    pub background: Rgb,
    /// Offset of this image inside the uncropped page.
    pub crop_origin: (u32, u32),
    pub layout: Arc<PageLayout>,
}

impl PageImage {
    fn filled(width_px: u32, height_px: u32, dpi: u32, color: Rgb, layout: Arc<PageLayout>) -> Self {
        let n = width_px as usize * height_px as usize;
        let mut pixels = Vec::with_capacity(n * 3);
        for _ in 0..n {
            pixels.extend_from_slice(&color);
        }
        PageImage {
            width_px,
            height_px,
            dpi,
            pixels,
            background: color,
            crop_origin: (0, 0),
            layout,
        }
    }

    pub fn pixel(&self, x: u32, y: u32) -> Rgb {
        let i = (y as usize * self.width_px as usize + x as usize) * 3;
        [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]]
    }

    fn fill_px(&mut self, x0: i64, y0: i64, x1: i64, y1: i64, color: Rgb) {
        let x0 = x0.clamp(0, self.width_px as i64) as usize;
        let x1 = x1.clamp(0, self.width_px as i64) as usize;
        let y0 = y0.clamp(0, self.height_px as i64) as usize;
        let y1 = y1.clamp(0, self.height_px as i64) as usize;
        let w = self.width_px as usize;
        for y in y0..y1 {
            for x in x0..x1 {
                let i = (y * w + x) * 3;
                self.pixels[i..i + 3].copy_from_slice(&color);
            }
        }
    }

    fn set(&mut self, x: i64, y: i64, color: Rgb) {
        if x >= 0 && y >= 0 && x < self.width_px as i64 && y < self.height_px as i64 {
            let i = (y as usize * self.width_px as usize + x as usize) * 3;
            self.pixels[i..i + 3].copy_from_slice(&color);
        }
    }

    /// Inclusive bounding box `(x0, y0, x1, y1)` of non-background pixels.
    pub fn ink_bbox(&self) -> Option<(u32, u32, u32, u32)> {
        let (w, h) = (self.width_px, self.height_px);
        let mut bbox: Option<(u32, u32, u32, u32)> = None;
        for y in 0..h {
            for x in 0..w {
                if self.pixel(x, y) != self.background {
                    bbox = Some(match bbox {
                        None => (x, y, x, y),
                        Some((a, b, c, d)) => (a.min(x), b.min(y), c.max(x), d.max(y)),
                    });
                }
            }
        }
        bbox
    }

    /// PNG bytes: RGB8, no interlacing, fixed compression settings.
    pub fn to_png(&self) -> Vec<u8> {
        let mut out = Vec::new();
        {
            let mut enc = png::Encoder::new(&mut out, self.width_px, self.height_px);
            enc.set_color(png::ColorType::Rgb);
            enc.set_depth(png::BitDepth::Eight);
            enc.set_compression(png::Compression::Fast);
            enc.set_filter(png::Filter::Sub);
            let mut writer = enc.write_header().expect("png header into memory");
            writer.write_image_data(&self.pixels).expect("png data into memory");
        }
        out
    }

    /// Hex SHA-256 of the PNG encoding.
    pub fn png_sha256(&self) -> String {
        hex::encode(Sha256::digest(self.to_png()))
    }
}

fn px(v_pt: f64, scale: f64) -> i64 {
    (v_pt * scale).round() as i64
}

fn fill_rect(img: &mut PageImage, r: &Rect, scale: f64, color: Rgb) {
    img.fill_px(
        px(r.x_pt, scale),
        px(r.y_pt, scale),
        px(r.right(), scale),
        px(r.bottom(), scale),
        color,
    );
}

fn stroke_rect(img: &mut PageImage, r: &Rect, width_px: i64, scale: f64, color: Rgb) {
    let (x0, y0) = (px(r.x_pt, scale), px(r.y_pt, scale));
    let (x1, y1) = (px(r.right(), scale), px(r.bottom(), scale));
    img.fill_px(x0, y0, x1, y0 + width_px, color);
    img.fill_px(x0, y1 - width_px, x1, y1, color);
    img.fill_px(x0, y0, x0 + width_px, y1, color);
    img.fill_px(x1 - width_px, y0, x1, y1, color);
}

/// Pixel box of one glyph's bitmap at the given origin.
pub(crate) struct GlyphBox {
    pub x: i64,
    pub y: i64,
    pub w: i64,
    pub h: i64,
}

pub(crate) fn glyph_box(bmp: &GlyphBitmap, x_pt: f64, y_pt: f64, config: &RenderConfig) -> GlyphBox {
    let s = config.px_per_pt();
    let fs = config.font_size_pt;
    let hs = config.h_scale;
    GlyphBox {
        x: px(x_pt + bmp.left_em * fs * hs, s),
        y: px(y_pt + bmp.top_em * fs, s),
        w: (bmp.width_em * fs * hs * s).round() as i64,
        h: (bmp.height_em * fs * s).round() as i64,
    }
}

fn stamp(img: &mut PageImage, bmp: &GlyphBitmap, b: &GlyphBox, slant_px: f64, color: Rgb) {
    if b.w <= 0 || b.h <= 0 {
        return;
    }
    let cols = bmp.cols as i64;
    let rows = bmp.rows as i64;
    for dy in 0..b.h {
        let sr = (dy * rows / b.h) as usize;
        let shift = if slant_px > 0.0 && rows > 1 {
            ((rows - 1 - sr as i64) as f64 / (rows - 1) as f64 * slant_px).round() as i64
        } else {
            0
        };
        for dx in 0..b.w {
            let sc = (dx * cols / b.w) as usize;
            if bmp.ink(sc, sr) {
                img.set(b.x + dx + shift, b.y + dy, color);
            }
        }
    }
}

/// Draw one page.
///
/// The page is filled with `page_rgb`, paragraph boxes with `paragraph_rgb`
/// (outlined when borders are set), then every glyph bitmap is scaled to
/// its em box with nearest-neighbor sampling in `font_rgb`. Italic shears
/// each bitmap row right by up to a tenth of an em.
pub fn rasterize(layout: &PageLayout, config: &RenderConfig, metrics: &dyn GlyphMetrics) -> PageImage {
    let dpi = config.dpi as f64;
    let (w_in, h_in) = config.page_size.inches();
    let width_px = (w_in * dpi).round() as u32;
    let height_px = (h_in * dpi).round() as u32;
    let scale = config.px_per_pt();
    let colors = config.colors;
    let mut img = PageImage::filled(
        width_px,
        height_px,
        config.dpi as u32,
        colors.page_rgb,
        Arc::new(layout.clone()),
    );

    for pb in &layout.paragraph_boxes {
        match config.borders {
            Some(b) => {
                let outer = Rect {
                    x_pt: pb.x_pt - b.padding_pt,
                    y_pt: pb.y_pt - b.padding_pt,
                    width_pt: pb.width_pt + 2.0 * b.padding_pt,
                    height_pt: pb.height_pt + 2.0 * b.padding_pt,
                };
                fill_rect(&mut img, &outer, scale, colors.paragraph_rgb);
                if b.width_pt > 0.0 {
                    let stroke = px(b.width_pt, scale).max(1);
                    stroke_rect(&mut img, &outer, stroke, scale, colors.font_rgb);
                }
            }
            None => fill_rect(&mut img, pb, scale, colors.paragraph_rgb),
        }
    }

    let slant_px = if config.italic {
        0.1 * config.font_size_pt * config.h_scale * scale
    } else {
        0.0
    };
    let mut cache: HashMap<char, GlyphBitmap> = HashMap::new();
    for g in &layout.glyphs {
        let bmp = cache.entry(g.ch).or_insert_with(|| metrics.glyph(g.ch));
        let b = glyph_box(bmp, g.x_pt, g.y_pt, config);
        stamp(&mut img, bmp, &b, slant_px, colors.font_rgb);
    }
    img
}

/// Crop to the tight box around every non-background pixel.
///
/// An all-background image comes back unchanged.
pub fn auto_crop(image: &PageImage) -> PageImage {
    let Some((x0, y0, x1, y1)) = image.ink_bbox() else {
        return image.clone();
    };
    let w = x1 - x0 + 1;
    let h = y1 - y0 + 1;
    let mut pixels = Vec::with_capacity(w as usize * h as usize * 3);
    let stride = image.width_px as usize * 3;
    for y in y0..=y1 {
        let start = y as usize * stride + x0 as usize * 3;
        pixels.extend_from_slice(&image.pixels[start..start + w as usize * 3]);
    }
    PageImage {
        width_px: w,
        height_px: h,
        dpi: image.dpi,
        pixels,
        background: image.background,
        crop_origin: (image.crop_origin.0 + x0, image.crop_origin.1 + y0),
        layout: image.layout.clone(),
    }
}
