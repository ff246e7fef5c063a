//! Search space, seeding, mutation, crossover and repair.

use glyphpress_core::config::sample::{
    pick, sample_alignment, sample_colors, sample_dpi, sample_font_size, sample_h_scale,
    sample_indent, sample_line_extra, sample_margins, sample_page_size, sample_spacing,
};
use glyphpress_core::config::{
    sample_with, validate, Borders, ConfigError, RenderConfig, SamplingPolicy, FONT_SIZES_PT,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Retries before an operator gives up and returns its input.
pub const MAX_TRIES: usize = 32;

/// A mutable aspect of a configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Field {
    Dpi,
    PageSize,
    FontSize,
    LineHeight,
    Alignment,
    Margins,
    Indent,
    Spacing,
    HScale,
    Colors,
    Italic,
    Borders,
    NewlineMarkup,
    AutoCrop,
}

impl Field {
    pub const ALL: [Field; 14] = [
        Field::Dpi,
        Field::PageSize,
        Field::FontSize,
        Field::LineHeight,
        Field::Alignment,
        Field::Margins,
        Field::Indent,
        Field::Spacing,
        Field::HScale,
        Field::Colors,
        Field::Italic,
        Field::Borders,
        Field::NewlineMarkup,
        Field::AutoCrop,
    ];

    /// Relative chance of being picked for mutation. Compression is driven
    /// mostly by dpi and type size, so those move most often.
    fn weight(self) -> f64 {
        match self {
            Field::Dpi => 4.0,
            Field::FontSize | Field::LineHeight => 3.0,
            Field::PageSize | Field::Margins | Field::HScale => 2.0,
            _ => 1.0,
        }
    }

    pub fn copy(self, from: &RenderConfig, to: &mut RenderConfig) {
        match self {
            Field::Dpi => to.dpi = from.dpi,
            Field::PageSize => to.page_size = from.page_size,
            Field::FontSize => to.font_size_pt = from.font_size_pt,
            Field::LineHeight => to.line_height_pt = from.line_height_pt,
            Field::Alignment => to.alignment = from.alignment,
            Field::Margins => to.margins_pt = from.margins_pt,
            Field::Indent => to.indent = from.indent,
            Field::Spacing => to.spacing_pt = from.spacing_pt,
            Field::HScale => to.h_scale = from.h_scale,
            Field::Colors => to.colors = from.colors,
            Field::Italic => to.italic = from.italic,
            Field::Borders => to.borders = from.borders,
            Field::NewlineMarkup => to.newline_markup = from.newline_markup.clone(),
            Field::AutoCrop => to.auto_crop = from.auto_crop,
        }
    }
}

/// Which fields may vary, around which base, with which sampling weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchSpace {
    /// Fixed values for inactive fields. Without a base, seeds are full
    /// samples of the configuration distribution.
    pub base: Option<RenderConfig>,
    pub fields: Vec<Field>,
    pub dpi_min: i64,
    pub dpi_max: i64,
    #[serde(default)]
    pub sampling: SamplingPolicy,
}

impl SearchSpace {
    pub fn full() -> Self {
        let p = SamplingPolicy::default();
        SearchSpace {
            base: None,
            fields: Field::ALL.to_vec(),
            dpi_min: p.dpi_lowest.min,
            dpi_max: p.dpi_high.max,
            sampling: p,
        }
    }

    /// Vary only `fields` of `base`, with dpi kept in `[dpi_min, dpi_max]`.
    pub fn around(base: RenderConfig, fields: &[Field], dpi_min: i64, dpi_max: i64) -> Self {
        SearchSpace {
            base: Some(base),
            fields: fields.to_vec(),
            dpi_min,
            dpi_max,
            sampling: SamplingPolicy::default(),
        }
    }

    fn has(&self, f: Field) -> bool {
        self.fields.contains(&f)
    }

    /// A seed configuration; deterministic in `seed`.
    pub fn sample(&self, seed: u64) -> Result<RenderConfig, ConfigError> {
        match &self.base {
            None => {
                let mut c = sample_with(seed, None, &self.sampling)?;
                c.dpi = c.dpi.clamp(self.dpi_min, self.dpi_max);
                Ok(c)
            }
            Some(base) => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                for _ in 0..MAX_TRIES {
                    let mut c = base.clone();
                    for &f in &Field::ALL {
                        if self.has(f) {
                            resample(&mut c, f, &mut rng, self);
                        }
                    }
                    repair(&mut c, self);
                    if validate(&c).valid {
                        return Ok(c);
                    }
                }
                Err(ConfigError::SamplingExhausted(MAX_TRIES))
            }
        }
    }
}

fn line_extra(c: &RenderConfig) -> f64 {
    (c.line_height_pt - c.font_size_pt).round().clamp(0.0, 3.0)
}

fn nearest_font_size(fs: f64) -> f64 {
    FONT_SIZES_PT
        .iter()
        .copied()
        .min_by(|a, b| (a - fs).abs().total_cmp(&(b - fs).abs()))
        .unwrap()
}

/// Pull a config back into the sanctioned domain: font size snapped to the
/// sanctioned set, line height `font_size + {0..3}`, dpi inside the space.
pub fn repair(c: &mut RenderConfig, space: &SearchSpace) {
    let extra = if c.line_height_pt.is_finite() { line_extra(c) } else { 0.0 };
    c.font_size_pt = nearest_font_size(c.font_size_pt);
    c.line_height_pt = c.font_size_pt + extra;
    c.dpi = c.dpi.clamp(space.dpi_min, space.dpi_max);
    if !(c.h_scale > 0.0 && c.h_scale <= 1.0) {
        c.h_scale = 1.0;
    }
}

fn resample<R: Rng>(c: &mut RenderConfig, f: Field, rng: &mut R, space: &SearchSpace) {
    let p = &space.sampling;
    match f {
        Field::Dpi => c.dpi = sample_dpi(rng, p).clamp(space.dpi_min, space.dpi_max),
        Field::PageSize => c.page_size = sample_page_size(rng, p),
        Field::FontSize => {
            let extra = line_extra(c);
            c.font_size_pt = sample_font_size(rng, p);
            c.line_height_pt = c.font_size_pt + extra;
        }
        Field::LineHeight => c.line_height_pt = c.font_size_pt + sample_line_extra(rng, p),
        Field::Alignment => c.alignment = sample_alignment(rng, p),
        Field::Margins => c.margins_pt = sample_margins(rng, p),
        Field::Indent => c.indent = sample_indent(rng, p),
        Field::Spacing => c.spacing_pt = sample_spacing(rng, p),
        Field::HScale => c.h_scale = sample_h_scale(rng, p),
        Field::Colors => c.colors = sample_colors(rng, c.theme),
        Field::Italic => c.italic = rng.gen_bool(p.italic_prob),
        Field::Borders => {
            c.borders = rng.gen_bool(p.borders_prob).then(|| Borders {
                width_pt: (rng.gen_range(0.5..=2.0f64) * 100.0).round() / 100.0,
                padding_pt: rng.gen_range(2..=6) as f64,
            })
        }
        Field::NewlineMarkup => {
            c.newline_markup = rng
                .gen_bool(p.newline_markup_prob)
                .then(|| p.newline_markers[rng.gen_range(0..p.newline_markers.len())].clone())
        }
        Field::AutoCrop => c.auto_crop = rng.gen_bool(p.auto_crop_prob),
    }
}

const DPI_STEPS: [i64; 5] = [1, 2, 3, 5, 8];
const DPI_STEP_WEIGHTS: [f64; 5] = [4.0, 3.0, 2.0, 1.0, 1.0];

/// Local move for ordered fields, fresh draw for the rest.
fn perturb<R: Rng>(c: &mut RenderConfig, f: Field, rng: &mut R, space: &SearchSpace) {
    match f {
        Field::Dpi if rng.gen_bool(0.6) => {
            let step = DPI_STEPS[pick(rng, &DPI_STEP_WEIGHTS)];
            let step = if rng.gen_bool(0.5) { step } else { -step };
            c.dpi = (c.dpi + step).clamp(space.dpi_min, space.dpi_max);
        }
        Field::FontSize if rng.gen_bool(0.6) => {
            let extra = line_extra(c);
            let i = FONT_SIZES_PT.iter().position(|v| *v == c.font_size_pt).unwrap_or(0);
            let j = if rng.gen_bool(0.5) { i.saturating_sub(1) } else { (i + 1).min(FONT_SIZES_PT.len() - 1) };
            c.font_size_pt = FONT_SIZES_PT[j];
            c.line_height_pt = c.font_size_pt + extra;
        }
        _ => resample(c, f, rng, space),
    }
}

fn choose_fields<R: Rng>(rng: &mut R, space: &SearchSpace) -> Vec<Field> {
    let mut pool = space.fields.clone();
    let n = [1, 1, 1, 2, 2, 3][rng.gen_range(0..6)].min(pool.len());
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let w: Vec<f64> = pool.iter().map(|f| f.weight()).collect();
        out.push(pool.remove(pick(rng, &w)));
    }
    out
}

/// Perturb one to three active fields. The result validates and differs from
/// the input, or the input comes back unchanged after [`MAX_TRIES`] attempts.
pub fn mutate_in(config: &RenderConfig, space: &SearchSpace, seed: u64) -> RenderConfig {
    if space.fields.is_empty() {
        return config.clone();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_TRIES {
        let mut c = config.clone();
        for f in choose_fields(&mut rng, space) {
            perturb(&mut c, f, &mut rng, space);
        }
        repair(&mut c, space);
        if c != *config && validate(&c).valid {
            return c;
        }
    }
    config.clone()
}

/// [`mutate_in`] over the full space.
pub fn heuristic_mutate(config: &RenderConfig, seed: u64) -> RenderConfig {
    mutate_in(config, &SearchSpace::full(), seed)
}

/// Field-wise uniform mix of two parents. When the mixed leading is off the
/// 0 to 3 pt grid, the line height is re-tied to the chosen font size using
/// that parent's leading. Mixes that still fail validation are redrawn;
/// after [`MAX_TRIES`] the first parent is returned.
pub fn crossover(a: &RenderConfig, b: &RenderConfig, seed: u64) -> RenderConfig {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_TRIES {
        let mut c = a.clone();
        let mut font_parent = a;
        for f in Field::ALL {
            if rng.gen_bool(0.5) {
                f.copy(b, &mut c);
                if f == Field::FontSize {
                    font_parent = b;
                }
            }
        }
        if line_extra(&c) != c.line_height_pt - c.font_size_pt {
            c.line_height_pt = c.font_size_pt + line_extra(font_parent);
        }
        if validate(&c).valid {
            return c;
        }
    }
    a.clone()
}

#[cfg(test)]
mod tests {
    use super::*;
    use glyphpress_core::config::sample;

    #[test]
    fn mutation_is_deterministic_and_valid() {
        let c = sample(3, None).unwrap();
        assert_eq!(heuristic_mutate(&c, 9), heuristic_mutate(&c, 9));
        for s in 0..1000 {
            let m = heuristic_mutate(&c, s);
            assert!(validate(&m).valid);
            assert!(FONT_SIZES_PT.contains(&m.font_size_pt));
        }
    }

    #[test]
    fn crossover_of_equal_parents_is_identity() {
        let a = sample(11, None).unwrap();
        for s in 0..20 {
            assert_eq!(crossover(&a, &a, s), a);
        }
    }

    #[test]
    fn crossover_reties_line_height() {
        let mut a = RenderConfig::default();
        a.font_size_pt = 7.0;
        a.line_height_pt = 8.0;
        let mut b = RenderConfig::default();
        b.font_size_pt = 14.0;
        b.line_height_pt = 15.0;
        for s in 0..200 {
            let c = crossover(&a, &b, s);
            assert!(c.line_height_pt >= c.font_size_pt);
            assert!(validate(&c).valid);
        }
    }

    #[test]
    fn restricted_space_only_touches_active_fields() {
        let base = RenderConfig::default();
        let space = SearchSpace::around(base.clone(), &[Field::Dpi, Field::FontSize], 45, 150);
        for s in 0..200 {
            let c = mutate_in(&space.sample(s).unwrap(), &space, s);
            assert!((45..=150).contains(&c.dpi));
            assert_eq!(c.margins_pt, base.margins_pt);
            assert_eq!(c.line_height_pt - c.font_size_pt, 1.0);
        }
    }
}
