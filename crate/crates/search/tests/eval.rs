use std::io::Write;

use glyphpress_core::config::RenderConfig;
use glyphpress_core::metrics::{HeuristicTokenizer, VisualTokenModel};
use glyphpress_core::EmbeddedFont;
use glyphpress_search::eval::{
    parse_verdict, score_exact, EchoGold, EvalError, ExactMatch, LegibilityMock, LoadError, ScoreOutcome, Silent,
};
use glyphpress_search::{evaluate_config, load_validation_set, Harness, ModelClient, Scorer, ValidationItem};

fn set(n: usize) -> Vec<ValidationItem> {
    (0..n)
        .map(|i| ValidationItem {
            id: format!("item-{i}"),
            context: format!("Record {i}. The archive keeps {} boxes of letters in room {i}.\n\nNothing else.", i * 7),
            instruction: "How many boxes?".into(),
            answer: format!("{}", i * 7),
            tag: None,
        })
        .collect()
}

fn harness<'a>(items: &'a [ValidationItem], client: &'a dyn ModelClient, scorer: &'a dyn Scorer) -> Harness<'a> {
    Harness {
        set: items,
        client,
        scorer,
        vtm: VisualTokenModel::default(),
        tokenizer: &HeuristicTokenizer,
        metrics: &EmbeddedFont,
    }
}

/// Scores everything except ids listed as unscorable.
struct Flaky(&'static [&'static str]);

impl Scorer for Flaky {
    fn score(&self, item: &ValidationItem, prediction: &str) -> ScoreOutcome {
        if self.0.contains(&item.id.as_str()) {
            ScoreOutcome::Unscored("judge timed out".into())
        } else {
            ScoreOutcome::Scored(score_exact(prediction, &item.answer))
        }
    }
}

#[test]
fn echo_and_silent_bound_accuracy() {
    let items = set(5);
    let config = RenderConfig::default();
    let r = evaluate_config(&config, &harness(&items, &EchoGold, &ExactMatch)).unwrap();
    assert_eq!(r.accuracy, 1.0);
    assert_eq!(r.scored, 5);
    assert!(r.mean_rho > 0.0);
    let r = evaluate_config(&config, &harness(&items, &Silent, &ExactMatch)).unwrap();
    assert_eq!(r.accuracy, 0.0);
}

#[test]
fn unscored_items_leave_the_denominator() {
    let items = set(10);
    let r = evaluate_config(&RenderConfig::default(), &harness(&items, &EchoGold, &Flaky(&["item-3", "item-8"]))).unwrap();
    assert_eq!(r.scored, 8);
    assert_eq!(r.unscored_ids, vec!["item-3", "item-8"]);
    assert_eq!(r.accuracy, 1.0);
    assert_eq!(r.items.len(), 10);
    let err = evaluate_config(&RenderConfig::default(), &harness(&items[..2], &EchoGold, &Flaky(&["item-0", "item-1"])));
    assert!(matches!(err, Err(EvalError::AllUnscored(2))));
}

#[test]
fn empty_set_and_invalid_config_are_errors() {
    let items = set(1);
    assert!(matches!(
        evaluate_config(&RenderConfig::default(), &harness(&[], &EchoGold, &ExactMatch)),
        Err(EvalError::EmptySet)
    ));
    let bad = RenderConfig { dpi: 10, ..RenderConfig::default() };
    assert!(matches!(
        evaluate_config(&bad, &harness(&items, &EchoGold, &ExactMatch)),
        Err(EvalError::InvalidConfig(_))
    ));
}

#[test]
fn report_is_deterministic() {
    let items = set(12);
    let mock = LegibilityMock::default();
    let config = RenderConfig { dpi: 60, ..RenderConfig::default() };
    let a = evaluate_config(&config, &harness(&items, &mock, &ExactMatch)).unwrap();
    let b = evaluate_config(&config, &harness(&items, &mock, &ExactMatch)).unwrap();
    assert_eq!(a, b);
}

#[test]
fn legibility_mock_accuracy_rises_with_dpi() {
    let items = set(40);
    let mock = LegibilityMock::default();
    let mut last = -1.0;
    for dpi in [40, 55, 72, 96, 150] {
        let config = RenderConfig { dpi, ..RenderConfig::default() };
        let acc = evaluate_config(&config, &harness(&items, &mock, &ExactMatch)).unwrap().accuracy;
        assert!(acc >= last, "dpi {dpi}: {acc} < {last}");
        last = acc;
    }
    assert_eq!(last, 1.0);
}

#[test]
fn exact_match_normalizes() {
    assert_eq!(score_exact("  Forty  Two ", "forty two"), 1.0);
    assert_eq!(score_exact("42", "forty two"), 0.0);
}

#[test]
fn verdict_parsing() {
    assert_eq!(parse_verdict("CORRECT"), Some(true));
    assert_eq!(parse_verdict("Verdict: INCORRECT."), Some(false));
    assert_eq!(parse_verdict("correct"), None);
    assert_eq!(parse_verdict("CORRECT or INCORRECT"), None);
    assert_eq!(parse_verdict("The answer looks fine."), None);
}

fn write_set(lines: &[&str]) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    for l in lines {
        writeln!(f, "{l}").unwrap();
    }
    f
}

#[test]
fn load_reports_line_numbers() {
    let ok = r#"{"id":"a","context":"Some text.","instruction":"Q?","answer":"x"}"#;
    let f = write_set(&[ok, "", r#"{"id":"b","context":"More.","instruction":"Q?","answer":"y","tag":"t"}"#]);
    let items = load_validation_set(f.path()).unwrap();
    assert_eq!(items.len(), 2);
    assert_eq!(items[1].tag.as_deref(), Some("t"));

    let f = write_set(&[ok, ok]);
    assert!(matches!(load_validation_set(f.path()), Err(LoadError::DuplicateId { line: 2, .. })));
    let f = write_set(&[ok, r#"{"id":"c","context":"  ","instruction":"Q?","answer":"x"}"#]);
    assert!(matches!(load_validation_set(f.path()), Err(LoadError::EmptyContext { line: 2, .. })));
    let f = write_set(&[r#"{"id":"d","context":"t","instruction":"Q?"}"#]);
    assert!(matches!(load_validation_set(f.path()), Err(LoadError::Malformed { line: 1, .. })));
    let f = write_set(&[r#"{"id":"e","context":"t","instruction":"Q?","answer":"x","extra":1}"#]);
    assert!(matches!(load_validation_set(f.path()), Err(LoadError::Malformed { line: 1, .. })));
    assert!(matches!(
        load_validation_set(std::path::Path::new("/nonexistent/set.jsonl")),
        Err(LoadError::Io { .. })
    ));
}
