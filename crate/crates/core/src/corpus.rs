//! Bundled English text used for calibration and tests.

/// About 10,700 words of license prose, one paragraph per line.
pub const ENGLISH: &str = include_str!("../data/corpus_en.txt");

/// Leading whole paragraphs of `text` holding at least `words` words
/// (or all of it).
pub fn leading_paragraphs(text: &str, words: usize) -> &str {
    let mut count = 0;
    let mut end = 0;
    for line in text.split_inclusive('\n') {
        if count >= words {
            break;
        }
        count += line.split_whitespace().count();
        end += line.len();
    }
    &text[..end]
}
