use glyphpress_core::config::{sample, RenderConfig};
use glyphpress_core::layout::{normalize_text, paragraphs};
use glyphpress_core::render::layout_document;
use glyphpress_core::{corpus, render_document, EmbeddedFont};
use glyphpress_datagen::samples::choose_masked;
use glyphpress_datagen::{
    make_generation_sample, make_interleaved_sample, make_ocr_sample, package_sft, GenerationMode, SampleError,
    Segment, SpanPolicy,
};
use glyphpress_search::ValidationItem;
use proptest::prelude::*;

fn doc(words: usize) -> &'static str {
    corpus::leading_paragraphs(corpus::ENGLISH, words)
}

fn small() -> RenderConfig {
    RenderConfig { font_size_pt: 12.0, line_height_pt: 14.0, ..RenderConfig::default() }
}

/// Text of one page recovered from the source span its glyphs cover.
fn reextract(text: &str, config: &RenderConfig, page: usize) -> String {
    let layouts = layout_document(text, config, &EmbeddedFont).unwrap();
    let idx: Vec<usize> = layouts[page].text_indices().collect();
    let chars: Vec<char> = text.chars().collect();
    let (lo, hi) = (*idx.iter().min().unwrap(), *idx.iter().max().unwrap());
    normalize_text(&chars[lo..=hi].iter().collect::<String>())
}

#[test]
fn whole_document_ocr_is_the_normalized_text() {
    let text = doc(2000);
    let s = make_ocr_sample(text, &small(), SpanPolicy::Whole, 0, &EmbeddedFont).unwrap();
    assert!(s.pages.len() > 2);
    assert_eq!(s.target, normalize_text(text));
}

#[test]
fn middle_page_matches_an_independent_reextraction() {
    let text = doc(2000);
    let config = small();
    let n = render_document(text, &config, &EmbeddedFont).unwrap().len();
    let mid = n / 2;
    let s = make_ocr_sample(text, &config, SpanPolicy::Fixed { start: mid, count: 1 }, 0, &EmbeddedFont).unwrap();
    assert_eq!(s.target, reextract(text, &config, mid));
    let direct = render_document(text, &config, &EmbeddedFont).unwrap();
    assert_eq!(s.pages[0].to_png(), direct[mid].to_png());
}

#[test]
fn ocr_spans_are_seeded_and_bounded() {
    let text = doc(2000);
    let config = small();
    let a = make_ocr_sample(text, &config, SpanPolicy::Range { min: 1, max: 2 }, 7, &EmbeddedFont).unwrap();
    let b = make_ocr_sample(text, &config, SpanPolicy::Range { min: 1, max: 2 }, 7, &EmbeddedFont).unwrap();
    assert_eq!((a.start, a.count, &a.target), (b.start, b.count, &b.target));
    let n = render_document(text, &config, &EmbeddedFont).unwrap().len();
    assert!(matches!(
        make_ocr_sample(text, &config, SpanPolicy::Fixed { start: n - 1, count: 2 }, 0, &EmbeddedFont),
        Err(SampleError::SpanOutOfRange { .. })
    ));
    assert!(matches!(
        make_ocr_sample(text, &config, SpanPolicy::Range { min: n + 1, max: n + 3 }, 0, &EmbeddedFont),
        Err(SampleError::SpanOutOfRange { .. })
    ));
    assert!(matches!(
        make_ocr_sample(text, &config, SpanPolicy::Fixed { start: 0, count: 0 }, 0, &EmbeddedFont),
        Err(SampleError::EmptySpan)
    ));
    let bad = RenderConfig { dpi: 1, ..config };
    assert!(matches!(make_ocr_sample(text, &bad, SpanPolicy::Whole, 0, &EmbeddedFont), Err(SampleError::Render(_))));
}

fn ten_paragraphs() -> String {
    (0..10)
        .map(|i| format!("Paragraph {i} has {} words of filler here.", "some ".repeat(3 + 4 * (i % 4))))
        .collect::<Vec<_>>()
        .join("\n\n")
}

#[test]
fn interleave_covers_the_requested_share() {
    let text = ten_paragraphs();
    let paras = paragraphs(&text);
    let lengths: Vec<usize> = paras.iter().map(|p| p.chars().count()).collect();
    let total: usize = lengths.iter().sum();
    let longest = *lengths.iter().max().unwrap() as f64;
    for seed in 0..20 {
        let s = make_interleaved_sample(&text, &small(), 0.3, seed, &EmbeddedFont).unwrap();
        // Character accounting over the chosen split, independent of the sample's own counters.
        let rendered: usize = s
            .segments
            .iter()
            .filter_map(|seg| match seg {
                Segment::Images(b) => Some(b.text.split('\n').map(|p| p.chars().count()).sum::<usize>()),
                Segment::Text(_) => None,
            })
            .sum();
        assert_eq!(rendered, s.rendered_chars);
        assert_eq!(total, s.total_chars);
        assert!((rendered as f64 - 0.3 * total as f64).abs() <= longest, "seed {seed}");
        assert_eq!(s.reconstruct(), normalize_text(&text));
        assert_eq!(s.original, normalize_text(&text));
        for w in s.segments.windows(2) {
            assert_ne!(matches!(w[0], Segment::Images(_)), matches!(w[1], Segment::Images(_)));
        }
    }
    let a = make_interleaved_sample(&text, &small(), 0.5, 3, &EmbeddedFont).unwrap();
    let b = make_interleaved_sample(&text, &small(), 0.5, 3, &EmbeddedFont).unwrap();
    let texts = |s: &glyphpress_datagen::InterleavedSample| s.segments.iter().map(|x| x.text().to_string()).collect::<Vec<_>>();
    assert_eq!(texts(&a), texts(&b));
    assert!(make_interleaved_sample(&text, &small(), 1.0, 3, &EmbeddedFont).is_err());
}

#[test]
fn masked_subset_matches_the_documented_rule() {
    assert_eq!(choose_masked(&[10], 0.5, 0), vec![true]);
    assert_eq!(choose_masked(&[10, 10], 0.99, 0).iter().filter(|m| **m).count(), 1);
}

#[test]
fn suffix_split_shows_the_beginning() {
    let text = ten_paragraphs();
    let paras = paragraphs(&text);
    let s = make_generation_sample(&text, &small(), GenerationMode::CompleteSuffix, 0.8, 0, &EmbeddedFont).unwrap();
    let shown = s.visible.text.split('\n').count();
    assert!((7..=9).contains(&shown), "{shown} paragraphs visible");
    assert_eq!(s.target, paras[shown..].join("\n"));
    assert_eq!(s.reconstruct(), normalize_text(&text));
}

#[test]
fn prefix_split_of_two_paragraphs() {
    let text = "The first paragraph.\n\nAnd the second one.";
    let s = make_generation_sample(text, &small(), GenerationMode::CompletePrefix, 0.5, 0, &EmbeddedFont).unwrap();
    assert_eq!(s.visible.text, "And the second one.");
    assert_eq!(s.target, "The first paragraph.");
    assert_eq!(s.joint, "\n");
}

#[test]
fn single_paragraph_splits_between_words() {
    let s = make_generation_sample("one two three four", &small(), GenerationMode::CompleteSuffix, 0.5, 0, &EmbeddedFont)
        .unwrap();
    assert_eq!(s.joint, " ");
    assert_eq!(s.reconstruct(), "one two three four");
    assert!(matches!(
        make_generation_sample("word", &small(), GenerationMode::CompleteSuffix, 0.5, 0, &EmbeddedFont),
        Err(SampleError::TooShort)
    ));
}

#[test]
fn sft_packaging() {
    let item = ValidationItem {
        id: "x".into(),
        context: doc(300).to_string(),
        instruction: "Summarize.".into(),
        answer: "ok".into(),
        tag: None,
    };
    let config = RenderConfig::default();
    let s = package_sft(&item, &config, "<think>reasoning</think>answer", &EmbeddedFont).unwrap();
    let direct = render_document(&item.context, &config, &EmbeddedFont).unwrap();
    assert_eq!(s.pages.len(), direct.len());
    for (a, b) in s.pages.iter().zip(&direct) {
        assert_eq!(a.to_png(), b.to_png());
    }
    assert!(matches!(
        package_sft(&item, &config, "<think>reasoning answer", &EmbeddedFont),
        Err(SampleError::Format(_))
    ));
}

fn random_text() -> impl Strategy<Value = String> {
    let word = prop_oneof![
        "[a-zA-Z]{1,12}",
        "[0-9]{1,4}[.,;:!?]?",
        Just("naïve".to_string()),
        Just("W".repeat(90)),
    ];
    let sep = prop_oneof![6 => Just(" "), 1 => Just("  \t"), 1 => Just("\n"), 1 => Just("\n\n"), 1 => Just(" \r\n ")];
    prop::collection::vec((word, sep), 1..400).prop_map(|v| v.into_iter().map(|(w, s)| format!("{w}{s}")).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn ocr_target_matches_provenance_for_random_configs(text in random_text(), cseed: u64, seed: u64) {
        let config = sample(cseed, None).unwrap();
        let s = make_ocr_sample(&text, &config, SpanPolicy::Single, seed, &EmbeddedFont).unwrap();
        prop_assert_eq!(&s.target, &reextract(&text, &config, s.start));
        let whole = make_ocr_sample(&text, &config, SpanPolicy::Whole, seed, &EmbeddedFont).unwrap();
        prop_assert_eq!(whole.target, normalize_text(&text));
    }

    #[test]
    fn generation_reconstructs_the_original(text in random_text(), seed: u64, f in 0.05f64..0.95, prefix: bool) {
        let mode = if prefix { GenerationMode::CompletePrefix } else { GenerationMode::CompleteSuffix };
        match make_generation_sample(&text, &small(), mode, f, seed, &EmbeddedFont) {
            Ok(s) => prop_assert_eq!(s.reconstruct(), normalize_text(&text)),
            Err(SampleError::TooShort) => prop_assert!(!normalize_text(&text).contains([' ', '\n'])),
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        }
    }

    #[test]
    fn interleave_reconstructs_the_original(text in random_text(), seed: u64, f in 0.05f64..0.95) {
        let s = make_interleaved_sample(&text, &small(), f, seed, &EmbeddedFont).unwrap();
        prop_assert_eq!(s.reconstruct(), normalize_text(&text));
    }
}
