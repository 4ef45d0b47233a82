//! The inline markdown subset allowed in slide text: `**bold**`, `*italic*`
//! and `` `code` ``. Everything else renders as plain text.

use pulldown_cmark::{Event, Parser, Tag, TagEnd};

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Run {
    pub text: String,
    pub bold: bool,
    pub italic: bool,
    pub code: bool,
}

/// Styled runs of one line of slide text. Adjacent runs never share a style.
pub fn runs(text: &str) -> Vec<Run> {
    let mut out: Vec<Run> = Vec::new();
    let (mut bold, mut italic) = (0usize, 0usize);
    let mut push = |text: &str, bold: bool, italic: bool, code: bool| {
        if text.is_empty() {
            return;
        }
        match out.last_mut() {
            Some(last) if last.bold == bold && last.italic == italic && last.code == code => last.text.push_str(text),
            _ => out.push(Run { text: text.to_string(), bold, italic, code }),
        }
    };
    for event in Parser::new(text) {
        match event {
            Event::Start(Tag::Strong) => bold += 1,
            Event::End(TagEnd::Strong) => bold = bold.saturating_sub(1),
            Event::Start(Tag::Emphasis) => italic += 1,
            Event::End(TagEnd::Emphasis) => italic = italic.saturating_sub(1),
            Event::Start(Tag::Paragraph) | Event::End(TagEnd::Paragraph) => {}
            Event::Text(t) => push(&t, bold > 0, italic > 0, false),
            Event::Code(t) => push(&t, bold > 0, italic > 0, true),
            Event::SoftBreak | Event::HardBreak => push(" ", bold > 0, italic > 0, false),
            Event::Html(t) | Event::InlineHtml(t) => push(&t, bold > 0, italic > 0, false),
            _ => {}
        }
    }
    out
}

/// Plain text of `text` with markup removed.
pub fn plain(text: &str) -> String {
    runs(text).into_iter().map(|r| r.text).collect()
}
