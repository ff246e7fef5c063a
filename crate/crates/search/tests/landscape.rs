use glyphpress_core::config::{RenderConfig, FONT_SIZES_PT};
use glyphpress_core::metrics::{count_text_tokens, HeuristicTokenizer, VisualTokenModel};
use glyphpress_core::render::layout_document;
use glyphpress_core::EmbeddedFont;
use glyphpress_search::engine::run_search;
use glyphpress_search::landscape::{synthetic_accuracy, synthetic_policy, synthetic_space, synthetic_text, SyntheticLandscape};
use glyphpress_search::SearchParams;
use rayon::prelude::*;

/// Compression ratio from page geometry alone.
fn oracle_rho(text: &str, text_tokens: usize, c: &RenderConfig) -> f64 {
    let pages = layout_document(text, c, &EmbeddedFont).unwrap().len();
    let (w, h) = c.page_size.inches();
    let dpi = c.dpi as f64;
    let per_page = VisualTokenModel::default()
        .tokens_for((w * dpi).round() as u32, (h * dpi).round() as u32)
        .unwrap();
    text_tokens as f64 / (pages as u64 * per_page) as f64
}

/// Best feasible (accuracy 1) rho over the full grid of the space, and every
/// grid point attaining it.
fn oracle_optimum() -> (f64, Vec<RenderConfig>) {
    let text = synthetic_text();
    let tt = count_text_tokens(text, &HeuristicTokenizer);
    let mut grid = Vec::new();
    for dpi in 45..=150 {
        for &fs in FONT_SIZES_PT.iter() {
            for extra in 0..4 {
                grid.push(RenderConfig {
                    dpi,
                    font_size_pt: fs,
                    line_height_pt: fs + extra as f64,
                    ..RenderConfig::default()
                });
            }
        }
    }
    let scored: Vec<(f64, RenderConfig)> = grid
        .into_par_iter()
        .filter(|c| synthetic_accuracy(c) == 1.0)
        .map(|c| (oracle_rho(text, tt, &c), c))
        .collect();
    let best = scored.iter().map(|s| s.0).fold(0.0, f64::max);
    (best, scored.into_iter().filter(|s| s.0 == best).map(|s| s.1).collect())
}

#[test]
fn search_finds_the_grid_optimum() {
    let (rho_star, argmax) = oracle_optimum();
    assert!(argmax.iter().all(|c| c.dpi == 72));
    assert!(argmax.iter().any(|c| c.font_size_pt == 7.0 && c.line_height_pt == 7.0));
    let land = SyntheticLandscape::default();
    let mut hits = 0;
    for seed in 0..5u64 {
        let params = SearchParams { space: synthetic_space(), policy: synthetic_policy(), ..SearchParams::default() };
        let mut sink = Vec::new();
        let out = run_search(seed, params, &land, None, vec![], &mut sink).unwrap();
        let b = &out.best;
        eprintln!(
            "seed {seed}: dpi {} fs {} lh {} rho {:.4} (rho* {rho_star:.4}) after {} evals",
            b.config.dpi, b.config.font_size_pt, b.config.line_height_pt, b.rho.unwrap(), out.evaluations
        );
        assert!(out.evaluations <= 200);
        if b.accuracy == Some(1.0) && b.rho.unwrap() >= 0.99 * rho_star {
            hits += 1;
        }
    }
    assert!(hits >= 4, "{hits} of 5 seeds reached the optimum");
}

