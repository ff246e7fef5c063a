//! Line breaking and pagination.
//!
//! Whitespace handling is fixed: a newline (`\n` or `\r`) ends a paragraph,
//! any other run of whitespace or control characters is one inter-word gap,
//! and paragraphs with no visible characters are dropped. [`normalize_text`]
//! spells that rule out as a string, and [`provenance_text`] rebuilds the
//! same string from the glyphs placed on pages.

use serde::{Deserialize, Serialize};

use crate::config::{Alignment, IndentMode, RenderConfig};
use crate::font::{is_wide, GlyphMetrics};

/// Slack absorbed by width and height comparisons, in points.
const EPS: f64 = 1e-9;

/// Where a placed glyph came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "index", rename_all = "snake_case")]
pub enum GlyphSource {
    /// Char index into the source text.
    Text(usize),
    /// Newline marker glyph; the index is the newline it stands for.
    Marker(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShapedGlyph {
    pub ch: char,
    pub source: GlyphSource,
    pub advance_pt: f64,
}

/// An unbreakable run of glyphs (a word, one CJK glyph, or a force-broken piece).
#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub glyphs: Vec<ShapedGlyph>,
    /// Separated from the previous token by whitespace in the source.
    pub space_before: bool,
    pub width_pt: f64,
}

impl Token {
    fn new(glyphs: Vec<ShapedGlyph>, space_before: bool) -> Token {
        let width_pt = glyphs.iter().map(|g| g.advance_pt).sum();
        Token { glyphs, space_before, width_pt }
    }

    pub fn text(&self) -> String {
        self.glyphs.iter().map(|g| g.ch).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Line {
    pub tokens: Vec<Token>,
    pub paragraph: usize,
    pub first_in_paragraph: bool,
    pub last_in_paragraph: bool,
    pub indent_pt: f64,
    /// Width available after the indent.
    pub available_pt: f64,
    /// Advance of one inter-word gap.
    pub space_pt: f64,
}

impl Line {
    /// Natural width: glyph advances plus one space per inter-word gap.
    pub fn width_pt(&self) -> f64 {
        self.tokens
            .iter()
            .enumerate()
            .map(|(i, t)| t.width_pt + if i > 0 && t.space_before { self.space_pt } else { 0.0 })
            .sum()
    }

    pub fn gap_count(&self) -> usize {
        self.tokens.iter().skip(1).filter(|t| t.space_before).count()
    }

    /// Line content with gaps as single spaces, markers included.
    pub fn text(&self) -> String {
        let mut s = String::new();
        for (i, t) in self.tokens.iter().enumerate() {
            if i > 0 && t.space_before {
                s.push(' ');
            }
            s.push_str(&t.text());
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x_pt: f64,
    pub y_pt: f64,
    pub width_pt: f64,
    pub height_pt: f64,
}

impl Rect {
    pub fn right(&self) -> f64 {
        self.x_pt + self.width_pt
    }

    pub fn bottom(&self) -> f64 {
        self.y_pt + self.height_pt
    }
}

/// A glyph at its final position. `y_pt` is the top of its em box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlacedGlyph {
    pub ch: char,
    pub x_pt: f64,
    pub y_pt: f64,
    pub width_pt: f64,
    pub source: GlyphSource,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PageLayout {
    pub page_index: usize,
    pub width_pt: f64,
    pub height_pt: f64,
    pub content: Rect,
    pub font_size_pt: f64,
    pub line_height_pt: f64,
    pub line_count: usize,
    pub glyphs: Vec<PlacedGlyph>,
    pub paragraph_boxes: Vec<Rect>,
}

impl PageLayout {
    fn blank(index: usize, config: &RenderConfig) -> PageLayout {
        let (w, h) = config.page_points();
        let m = config.margins_pt;
        PageLayout {
            page_index: index,
            width_pt: w,
            height_pt: h,
            content: Rect {
                x_pt: m.left,
                y_pt: m.top,
                width_pt: config.content_width_pt(),
                height_pt: config.content_height_pt(),
            },
            font_size_pt: config.font_size_pt,
            line_height_pt: config.line_height_pt,
            line_count: 0,
            glyphs: Vec::new(),
            paragraph_boxes: Vec::new(),
        }
    }

    /// Source char indices of text glyphs, in reading order.
    pub fn text_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.glyphs.iter().filter_map(|g| match g.source {
            GlyphSource::Text(i) => Some(i),
            GlyphSource::Marker(_) => None,
        })
    }
}

fn is_break(c: char) -> bool {
    c == '\n' || c == '\r'
}

fn is_gap(c: char) -> bool {
    c.is_whitespace() || c.is_control()
}

/// A paragraph as words of `(char index, char)`, plus the newline ending it.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Paragraph {
    pub words: Vec<Vec<(usize, char)>>,
    pub break_index: Option<usize>,
}

pub(crate) fn split_paragraphs(text: &str) -> Vec<Paragraph> {
    let mut out = Vec::new();
    let mut words: Vec<Vec<(usize, char)>> = Vec::new();
    let mut word: Vec<(usize, char)> = Vec::new();
    for (i, c) in text.chars().enumerate() {
        if is_break(c) {
            if !word.is_empty() {
                words.push(std::mem::take(&mut word));
            }
            if !words.is_empty() {
                out.push(Paragraph { words: std::mem::take(&mut words), break_index: Some(i) });
            }
        } else if is_gap(c) {
            if !word.is_empty() {
                words.push(std::mem::take(&mut word));
            }
        } else {
            word.push((i, c));
        }
    }
    if !word.is_empty() {
        words.push(word);
    }
    if !words.is_empty() {
        out.push(Paragraph { words, break_index: None });
    }
    out
}

/// The text as the typesetter sees it: words joined by one space,
/// paragraphs by one `\n`, empty paragraphs dropped.
pub fn normalize_text(text: &str) -> String {
    split_paragraphs(text)
        .iter()
        .map(|p| {
            p.words
                .iter()
                .map(|w| w.iter().map(|(_, c)| *c).collect::<String>())
                .collect::<Vec<_>>()
                .join(" ")
        })
        .collect::<Vec<_>>()
        .join("\n")
}

/// Normalized paragraphs of `text`.
pub fn paragraphs(text: &str) -> Vec<String> {
    let n = normalize_text(text);
    if n.is_empty() {
        Vec::new()
    } else {
        n.split('\n').map(str::to_string).collect()
    }
}

/// Rebuild normalized text from placed glyphs.
///
/// Consecutive text glyphs are joined by `\n` when a paragraph break lies
/// between their source positions, by a space when any other characters were
/// skipped, and directly otherwise. Marker glyphs are ignored.
pub fn provenance_text<'a, I>(source: &str, layouts: I) -> String
where
    I: IntoIterator<Item = &'a PageLayout>,
{
    let chars: Vec<char> = source.chars().collect();
    let mut out = String::new();
    let mut prev: Option<usize> = None;
    for layout in layouts {
        for i in layout.text_indices() {
            if let Some(p) = prev {
                if chars[p + 1..i].iter().any(|c| is_break(*c)) {
                    out.push('\n');
                } else if i > p + 1 {
                    out.push(' ');
                }
            }
            out.push(chars[i]);
            prev = Some(i);
        }
    }
    out
}

fn shaped(ch: char, source: GlyphSource, config: &RenderConfig, metrics: &dyn GlyphMetrics) -> ShapedGlyph {
    ShapedGlyph {
        ch,
        source,
        advance_pt: metrics.advance(ch, config.font_size_pt, config.h_scale),
    }
}

fn paragraph_tokens(p: &Paragraph, config: &RenderConfig, metrics: &dyn GlyphMetrics) -> Vec<Token> {
    let mut tokens = Vec::new();
    for (wi, word) in p.words.iter().enumerate() {
        let mut first = true;
        let mut run: Vec<ShapedGlyph> = Vec::new();
        for &(i, c) in word {
            let g = shaped(c, GlyphSource::Text(i), config, metrics);
            if is_wide(c) {
                if !run.is_empty() {
                    tokens.push(Token::new(std::mem::take(&mut run), first && wi > 0));
                    first = false;
                }
                tokens.push(Token::new(vec![g], first && wi > 0));
                first = false;
            } else {
                run.push(g);
            }
        }
        if !run.is_empty() {
            tokens.push(Token::new(run, first && wi > 0));
        }
    }
    if let (Some(markup), Some(b)) = (config.newline_markup.as_deref(), p.break_index) {
        let glyphs: Vec<ShapedGlyph> = markup
            .chars()
            .filter(|c| !is_gap(*c))
            .map(|c| shaped(c, GlyphSource::Marker(b), config, metrics))
            .collect();
        if !glyphs.is_empty() {
            tokens.push(Token::new(glyphs, false));
        }
    }
    tokens
}

fn indent_for(config: &RenderConfig, first_line: bool) -> f64 {
    let amount = config.indent.indent_em * config.font_size_pt;
    match config.indent.mode {
        IndentMode::None => 0.0,
        IndentMode::FirstLine if first_line => amount,
        IndentMode::FirstLine => 0.0,
        IndentMode::Block => amount,
        IndentMode::Hanging if first_line => 0.0,
        IndentMode::Hanging => amount,
    }
}

/// Greedy first-fit line breaking on whitespace.
///
/// A token wider than an empty line is split at glyph boundaries, keeping at
/// least one glyph per line. With `newline_markup` set, the marker glyphs are
/// appended to every paragraph that a source newline ends.
pub fn break_lines(text: &str, config: &RenderConfig, metrics: &dyn GlyphMetrics) -> Vec<Line> {
    let content_width = config.content_width_pt();
    let space_pt = metrics.advance(' ', config.font_size_pt, config.h_scale);
    let mut lines = Vec::new();
    for (pi, para) in split_paragraphs(text).iter().enumerate() {
        let start = lines.len();
        let new_line = |first: bool| {
            let indent_pt = indent_for(config, first);
            Line {
                tokens: Vec::new(),
                paragraph: pi,
                first_in_paragraph: first,
                last_in_paragraph: false,
                indent_pt,
                available_pt: content_width - indent_pt,
                space_pt,
            }
        };
        let mut line = new_line(true);
        let mut width = 0.0;
        for token in paragraph_tokens(para, config, metrics) {
            let mut token = token;
            loop {
                let gap = if !line.tokens.is_empty() && token.space_before { space_pt } else { 0.0 };
                if width + gap + token.width_pt <= line.available_pt + EPS {
                    width += gap + token.width_pt;
                    line.tokens.push(token);
                    break;
                }
                if !line.tokens.is_empty() {
                    lines.push(std::mem::replace(&mut line, new_line(false)));
                    width = 0.0;
                    continue;
                }
                // Empty line and still too wide: split at a glyph boundary.
                let mut used = 0.0;
                let mut take = 0;
                for g in &token.glyphs {
                    if take > 0 && used + g.advance_pt > line.available_pt + EPS {
                        break;
                    }
                    used += g.advance_pt;
                    take += 1;
                }
                let tail = token.glyphs.split_off(take);
                line.tokens.push(Token::new(token.glyphs, token.space_before));
                lines.push(std::mem::replace(&mut line, new_line(false)));
                width = 0.0;
                if tail.is_empty() {
                    break;
                }
                token = Token::new(tail, false);
            }
        }
        if !line.tokens.is_empty() {
            lines.push(line);
        }
        if let Some(last) = lines[start..].last_mut() {
            last.last_in_paragraph = true;
        }
    }
    lines
}

/// Extra width for each inter-word gap of a justified line.
///
/// Slack is counted in quarter-pixel units at the configured dpi; every gap
/// gets the floor share and the remaining units go to the leftmost gaps.
pub fn justify_gaps(slack_pt: f64, gaps: usize, dpi: f64) -> Vec<f64> {
    if gaps == 0 || slack_pt <= 0.0 {
        return vec![0.0; gaps];
    }
    let unit = 72.0 / (dpi * 4.0);
    let units = (slack_pt / unit + EPS).floor() as u64;
    let base = units / gaps as u64;
    let rem = (units % gaps as u64) as usize;
    (0..gaps)
        .map(|k| (base + u64::from(k < rem)) as f64 * unit)
        .collect()
}

/// Stack lines onto pages at `line_height` pitch.
///
/// `space_before` is skipped at the top of a page; `space_after` follows the
/// last line of every paragraph. Empty input yields one blank page.
pub fn paginate(lines: &[Line], config: &RenderConfig) -> Vec<PageLayout> {
    let lh = config.line_height_pt;
    let content_h = config.content_height_pt();
    let dpi = config.dpi as f64;
    let glyph_offset = (lh - config.font_size_pt) / 2.0;

    let mut pages = Vec::new();
    let mut page = PageLayout::blank(0, config);
    let mut y = 0.0;
    // (paragraph, top, bottom) of the box being built on this page.
    let mut open_box: Option<(usize, f64, f64)> = None;

    let close_box = |page: &mut PageLayout, open: &mut Option<(usize, f64, f64)>| {
        if let Some((_, top, bottom)) = open.take() {
            page.paragraph_boxes.push(Rect {
                x_pt: page.content.x_pt,
                y_pt: top,
                width_pt: page.content.width_pt,
                height_pt: bottom - top,
            });
        }
    };

    for line in lines {
        let mut before = if line.first_in_paragraph && page.line_count > 0 {
            config.spacing_pt.before
        } else {
            0.0
        };
        if page.line_count > 0 && y + before + lh > content_h + EPS {
            close_box(&mut page, &mut open_box);
            let next = PageLayout::blank(pages.len() + 1, config);
            pages.push(std::mem::replace(&mut page, next));
            y = 0.0;
            before = 0.0;
        }
        let top = page.content.y_pt + y + before;

        let slack = line.available_pt - line.width_pt();
        let mut x = page.content.x_pt + line.indent_pt;
        let extra = match config.alignment {
            Alignment::Left => vec![0.0; line.gap_count()],
            Alignment::Right => {
                x += slack.max(0.0);
                vec![0.0; line.gap_count()]
            }
            Alignment::Center => {
                x += slack.max(0.0) / 2.0;
                vec![0.0; line.gap_count()]
            }
            Alignment::Justify if line.last_in_paragraph => vec![0.0; line.gap_count()],
            Alignment::Justify => justify_gaps(slack, line.gap_count(), dpi),
        };
        let mut gap_idx = 0;
        for (ti, token) in line.tokens.iter().enumerate() {
            if ti > 0 && token.space_before {
                x += line.space_pt + extra[gap_idx];
                gap_idx += 1;
            }
            for g in &token.glyphs {
                page.glyphs.push(PlacedGlyph {
                    ch: g.ch,
                    x_pt: x,
                    y_pt: top + glyph_offset,
                    width_pt: g.advance_pt,
                    source: g.source,
                });
                x += g.advance_pt;
            }
        }
        page.line_count += 1;

        match &mut open_box {
            Some((p, _, bottom)) if *p == line.paragraph => *bottom = top + lh,
            _ => {
                close_box(&mut page, &mut open_box);
                open_box = Some((line.paragraph, top, top + lh));
            }
        }

        y += before + lh;
        if line.last_in_paragraph {
            y += config.spacing_pt.after;
        }
    }
    close_box(&mut page, &mut open_box);
    pages.push(page);
    pages
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{Indent, Margins, PageSize, Spacing};
    use crate::font::EmbeddedFont;

    /// Config whose content box is exactly `cols` narrow glyphs wide at 10pt.
    fn config_cols(cols: f64) -> RenderConfig {
        let mut c = RenderConfig::default();
        c.font_size_pt = 10.0;
        c.line_height_pt = 12.0;
        c.margins_pt = Margins::uniform(0.0);
        c.page_size = PageSize::Custom { width_in: cols * 6.0 / 72.0, height_in: 4.0 };
        c
    }

    #[test]
    fn exact_fit_breaks_between_words() {
        let c = config_cols(5.0);
        let lines = break_lines("hello world", &c, &EmbeddedFont);
        let texts: Vec<String> = lines.iter().map(Line::text).collect();
        assert_eq!(texts, ["hello", "world"]);
        for l in &lines {
            assert!(l.width_pt() <= c.content_width_pt() + 1e-9);
        }
    }

    #[test]
    fn long_token_is_force_broken_five_five_two() {
        let c = config_cols(5.0);
        let lines = break_lines("abcdefghijkl", &c, &EmbeddedFont);
        let sizes: Vec<usize> = lines.iter().map(|l| l.tokens[0].glyphs.len()).collect();
        assert_eq!(sizes, [5, 5, 2]);
        assert!(lines.last().unwrap().last_in_paragraph);
    }

    #[test]
    fn newline_marker_is_placed_at_break() {
        let mut c = config_cols(40.0);
        c.newline_markup = Some("\u{23CE}".into());
        let lines = break_lines("one two\nthree", &c, &EmbeddedFont);
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0].text(), "one two\u{23CE}");
        let marker = lines[0].tokens.last().unwrap();
        assert_eq!(marker.glyphs[0].source, GlyphSource::Marker(7));
        assert_eq!(lines[1].text(), "three");
    }

    #[test]
    fn normalization_collapses_whitespace_and_blank_lines() {
        assert_eq!(normalize_text("  a \t b\n\n\r\n  c  d \n"), "a b\nc d");
        assert_eq!(normalize_text(""), "");
        assert_eq!(normalize_text(" \n\t "), "");
        assert_eq!(paragraphs("x\n\ny z"), ["x", "y z"]);
    }

    #[test]
    fn cjk_glyphs_break_individually() {
        let c = config_cols(5.0);
        // Each wide glyph is 10pt, content is 30pt: three per line.
        let lines = break_lines("\u{4E00}\u{4E01}\u{4E02}\u{4E03}", &c, &EmbeddedFont);
        let sizes: Vec<usize> = lines.iter().map(|l| l.tokens.len()).collect();
        assert_eq!(sizes, [3, 1]);
        assert!(lines[0].tokens.iter().all(|t| !t.space_before));
    }

    fn lines_of(n: usize, c: &RenderConfig) -> Vec<Line> {
        let text: Vec<String> = (0..n).map(|i| format!("w{i}")).collect();
        break_lines(&text.join("\n"), c, &EmbeddedFont)
    }

    #[test]
    fn ten_lines_four_per_page_make_three_pages() {
        let mut c = config_cols(20.0);
        c.page_size = PageSize::Custom { width_in: 120.0 / 72.0, height_in: 48.0 / 72.0 };
        assert_eq!(c.content_height_pt(), 4.0 * c.line_height_pt);
        let lines = lines_of(10, &c);
        assert_eq!(lines.len(), 10);
        let pages = paginate(&lines, &c);
        let counts: Vec<usize> = pages.iter().map(|p| p.line_count).collect();
        assert_eq!(counts, [4, 4, 2]);
    }

    #[test]
    fn empty_text_gives_one_blank_page() {
        let c = RenderConfig::default();
        let pages = paginate(&break_lines("", &c, &EmbeddedFont), &c);
        assert_eq!(pages.len(), 1);
        assert!(pages[0].glyphs.is_empty());
        assert!(pages[0].paragraph_boxes.is_empty());
    }

    #[test]
    fn justify_spreads_six_points_over_three_gaps() {
        assert_eq!(justify_gaps(6.0, 3, 72.0), vec![2.0, 2.0, 2.0]);
        // 7pt at 72 dpi is 28 quarter-pixel units: 10 + 9 + 9.
        assert_eq!(justify_gaps(7.0, 3, 72.0), vec![2.5, 2.25, 2.25]);
        assert!(justify_gaps(5.0, 0, 72.0).is_empty());
    }

    #[test]
    fn justified_line_is_flush_and_last_line_is_not() {
        let mut c = config_cols(20.0);
        c.alignment = Alignment::Justify;
        // "aa bb cc dd" = 11 glyphs + the next word forces a wrap.
        let text = "aa bb cc dd eeeeeeeeee";
        let lines = break_lines(text, &c, &EmbeddedFont);
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0].gap_count(), 3);
        let slack = lines[0].available_pt - lines[0].width_pt();
        assert!((slack - 9.0 * 6.0).abs() < 1e-9);
        let page = &paginate(&lines, &c)[0];
        let first_line: Vec<&PlacedGlyph> =
            page.glyphs.iter().filter(|g| g.y_pt == page.glyphs[0].y_pt).collect();
        let last = first_line.last().unwrap();
        assert!((last.x_pt + last.width_pt - page.content.right()).abs() < 1e-9);
        // Intra-word pitch stays one advance.
        assert!((first_line[1].x_pt - first_line[0].x_pt - 6.0).abs() < 1e-9);
        // The last line of the paragraph starts at the left edge.
        let tail = page.glyphs.iter().find(|g| g.ch == 'e').unwrap();
        assert_eq!(tail.x_pt, page.content.x_pt);
    }

    #[test]
    fn right_and_center_alignment_offsets() {
        let mut c = config_cols(10.0);
        c.alignment = Alignment::Right;
        let lines = break_lines("abcd", &c, &EmbeddedFont);
        let page = &paginate(&lines, &c)[0];
        assert!((page.glyphs[0].x_pt - 36.0).abs() < 1e-9);
        c.alignment = Alignment::Center;
        let page = &paginate(&lines, &c)[0];
        assert!((page.glyphs[0].x_pt - 18.0).abs() < 1e-9);
    }

    #[test]
    fn indent_modes_shift_the_right_lines() {
        let mut c = config_cols(10.0);
        c.indent = Indent { mode: IndentMode::FirstLine, indent_em: 1.2 };
        let lines = break_lines("aaaa bbbb cccc", &c, &EmbeddedFont);
        assert_eq!(lines[0].indent_pt, 12.0);
        assert!(lines[1..].iter().all(|l| l.indent_pt == 0.0));
        c.indent.mode = IndentMode::Hanging;
        let lines = break_lines("aaaa bbbb cccc", &c, &EmbeddedFont);
        assert_eq!(lines[0].indent_pt, 0.0);
        assert!(lines[1..].iter().all(|l| l.indent_pt == 12.0));
        c.indent.mode = IndentMode::Block;
        let lines = break_lines("aaaa bbbb cccc", &c, &EmbeddedFont);
        assert!(lines.iter().all(|l| l.indent_pt == 12.0));
        for l in &lines {
            assert!(l.indent_pt + l.width_pt() <= c.content_width_pt() + 1e-9);
        }
    }

    #[test]
    fn paragraph_spacing_is_applied_between_paragraphs() {
        let mut c = config_cols(20.0);
        c.spacing_pt = Spacing { before: 3.0, after: 5.0 };
        let lines = break_lines("a\nb", &c, &EmbeddedFont);
        let page = &paginate(&lines, &c)[0];
        let ya = page.glyphs[0].y_pt;
        let yb = page.glyphs[1].y_pt;
        assert!((yb - ya - (12.0 + 5.0 + 3.0)).abs() < 1e-9);
        assert_eq!(page.paragraph_boxes.len(), 2);
        // First paragraph at the top of the page gets no space_before.
        assert_eq!(page.paragraph_boxes[0].y_pt, page.content.y_pt);
    }

    #[test]
    fn provenance_rebuilds_normalized_text() {
        let mut c = config_cols(6.0);
        c.newline_markup = Some("<br>".into());
        let text = "  The  quick\tbrown\n\nfox jumpsoverthelazydog \u{4E2D}\u{6587}ok\r\nend ";
        let pages = paginate(&break_lines(text, &c, &EmbeddedFont), &c);
        assert_eq!(provenance_text(text, &pages), normalize_text(text));
    }

    #[test]
    fn glyphs_stay_inside_the_content_box() {
        let mut c = config_cols(7.0);
        c.margins_pt = Margins { top: 5.0, bottom: 7.0, left: 3.0, right: 4.0 };
        c.page_size = PageSize::Custom { width_in: 49.0 / 72.0, height_in: 60.0 / 72.0 };
        let text = "a bb ccc dddd eeeee ffffff ggggggggggggg h";
        for page in paginate(&break_lines(text, &c, &EmbeddedFont), &c) {
            for g in &page.glyphs {
                assert!(g.x_pt >= page.content.x_pt - 1e-9);
                assert!(g.x_pt + g.width_pt <= page.content.right() + 1e-9);
                assert!(g.y_pt >= page.content.y_pt - 1e-9);
                assert!(g.y_pt + c.font_size_pt <= page.content.bottom() + 1e-9);
            }
        }
    }
}
