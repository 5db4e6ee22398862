//! Lead-section extraction for wikitext and HTML.
//!
//! The two formats are told apart by their bold delimiter: triple
//! apostrophes for wikitext, `<b>`/`<strong>` for HTML. Only the content
//! before the first section heading is ever looked at.

use std::sync::OnceLock;

use regex::Regex;

use crate::text::normalize_whitespace;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MarkupFormat {
    Wikitext,
    Html,
}

fn re(cell: &'static OnceLock<Regex>, pattern: &str) -> &'static Regex {
    cell.get_or_init(|| Regex::new(pattern).expect("static regex"))
}

fn html_bold_re() -> &'static Regex {
    static R: OnceLock<Regex> = OnceLock::new();
    re(&R, r"(?is)<(?:b|strong)(?:\s[^>]*)?>(.*?)</(?:b|strong)\s*>")
}

fn html_tag_re() -> &'static Regex {
    static R: OnceLock<Regex> = OnceLock::new();
    re(&R, r"(?s)<[^>]*>")
}

pub fn detect_format(raw: &str) -> MarkupFormat {
    if raw.contains("'''") {
        return MarkupFormat::Wikitext;
    }
    let lower = raw.to_ascii_lowercase();
    if lower.contains("<b>")
        || lower.contains("<b ")
        || lower.contains("<strong")
        || lower.contains("<p>")
        || lower.contains("<p ")
    {
        MarkupFormat::Html
    } else {
        MarkupFormat::Wikitext
    }
}

/// Returns the slice of `raw` that precedes the first section heading.
pub fn lead_section(raw: &str) -> &str {
    match detect_format(raw) {
        MarkupFormat::Wikitext => {
            static R: OnceLock<Regex> = OnceLock::new();
            let heading = re(&R, r"(?m)^[ \t]*={2,6}[^=\n].*?={2,6}[ \t]*\r?$");
            match heading.find(raw) {
                Some(m) => &raw[..m.start()],
                None => raw,
            }
        }
        MarkupFormat::Html => {
            static R: OnceLock<Regex> = OnceLock::new();
            let heading = re(&R, r"(?i)<h[1-6][\s>]");
            match heading.find(raw) {
                Some(m) => &raw[..m.start()],
                None => raw,
            }
        }
    }
}

/// Bold spans of a lead, in document order, whitespace-normalized, with
/// exact duplicates removed (first occurrence kept).
pub fn extract_bold_keywords(raw_lead: &str) -> Vec<String> {
    let spans = match detect_format(raw_lead) {
        MarkupFormat::Wikitext => wikitext_bold_spans(raw_lead),
        MarkupFormat::Html => html_bold_re()
            .captures_iter(raw_lead)
            .map(|c| strip_html(&c[1]))
            .collect(),
    };
    let mut out: Vec<String> = Vec::new();
    for span in spans {
        let span = normalize_whitespace(&span);
        if !span.is_empty() && !out.contains(&span) {
            out.push(span);
        }
    }
    out
}

/// Plain text of a lead: bold/italic/link markup removed, references,
/// templates, comments and file embeds dropped, whitespace collapsed.
pub fn strip_markup(raw_lead: &str) -> String {
    match detect_format(raw_lead) {
        MarkupFormat::Wikitext => normalize_whitespace(&strip_wikitext(raw_lead)),
        MarkupFormat::Html => normalize_whitespace(&strip_html(raw_lead)),
    }
}

// Apostrophe-run state machine following the MediaWiki quote rules:
// 2 toggles italic, 3 toggles bold, 5 toggles both, 4 is one literal
// apostrophe followed by a bold toggle. Open spans close at end of line.
fn wikitext_bold_spans(raw: &str) -> Vec<String> {
    let mut spans = Vec::new();
    let mut current: Option<String> = None;
    let chars: Vec<char> = raw.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c == '\'' {
            let mut run = 0;
            while i + run < chars.len() && chars[i + run] == '\'' {
                run += 1;
            }
            i += run;
            let (literal, toggles_bold) = match run {
                1 => (1, false),
                2 => (0, false),
                3 => (0, true),
                4 => (1, true),
                5 => (0, true),
                n => (n - 5, true),
            };
            if let Some(buf) = current.as_mut() {
                buf.extend(std::iter::repeat_n('\'', literal));
            }
            if toggles_bold {
                match current.take() {
                    Some(buf) => spans.push(strip_wikitext(&buf)),
                    None => current = Some(String::new()),
                }
            }
            continue;
        }
        if c == '\n' {
            if let Some(buf) = current.take() {
                spans.push(strip_wikitext(&buf));
            }
        } else if let Some(buf) = current.as_mut() {
            buf.push(c);
        }
        i += 1;
    }
    if let Some(buf) = current.take() {
        spans.push(strip_wikitext(&buf));
    }
    spans
}

fn strip_wikitext(raw: &str) -> String {
    static COMMENT: OnceLock<Regex> = OnceLock::new();
    static REF_SELF: OnceLock<Regex> = OnceLock::new();
    static REF_PAIR: OnceLock<Regex> = OnceLock::new();
    static EXT_LINK: OnceLock<Regex> = OnceLock::new();
    static QUOTES: OnceLock<Regex> = OnceLock::new();

    let s = re(&COMMENT, r"(?s)<!--.*?-->").replace_all(raw, "");
    let s = re(&REF_SELF, r"(?is)<ref[^>]*/>").replace_all(&s, "");
    let s = re(&REF_PAIR, r"(?is)<ref[^>]*>.*?</ref\s*>").replace_all(&s, "");
    let s = drop_nested(&s, "{{", "}}");
    let s = drop_nested(&s, "{|", "|}");
    let s = rewrite_internal_links(&s);
    let s = re(&EXT_LINK, r"\[(?:https?:)?//[^\s\]]+(?:\s+([^\]]*))?\]")
        .replace_all(&s, "$1");
    let s = re(&QUOTES, r"'{2,}").replace_all(&s, "");
    let s = html_tag_re().replace_all(&s, "");
    decode_entities(&s)
}

fn strip_html(raw: &str) -> String {
    static COMMENT: OnceLock<Regex> = OnceLock::new();
    static SUP: OnceLock<Regex> = OnceLock::new();
    static STYLE: OnceLock<Regex> = OnceLock::new();
    static BLOCK: OnceLock<Regex> = OnceLock::new();
    let s = re(&COMMENT, r"(?s)<!--.*?-->").replace_all(raw, "");
    let s = re(&SUP, r"(?is)<sup[^>]*>.*?</sup\s*>").replace_all(&s, "");
    let s = re(&STYLE, r"(?is)<(style|script)[^>]*>.*?</(style|script)\s*>").replace_all(&s, "");
    let s = re(&BLOCK, r"(?i)</?(?:p|br|div|li|ul|ol|tr|td|table)(?:\s[^>]*)?/?>").replace_all(&s, " ");
    let s = html_tag_re().replace_all(&s, "");
    decode_entities(&s)
}

fn decode_entities(s: &str) -> String {
    s.replace("&nbsp;", " ")
        .replace("&ndash;", "\u{2013}")
        .replace("&mdash;", "\u{2014}")
        .replace("&quot;", "\"")
        .replace("&#39;", "'")
        .replace("&lt;", "<")
        .replace("&gt;", ">")
        .replace("&amp;", "&")
}

/// Removes balanced `open ... close` regions, nesting included. An
/// unbalanced opener drops the rest of the input.
fn drop_nested(s: &str, open: &str, close: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut depth = 0usize;
    let mut rest = s;
    while !rest.is_empty() {
        if rest.starts_with(open) {
            depth += 1;
            rest = &rest[open.len()..];
        } else if depth > 0 && rest.starts_with(close) {
            depth -= 1;
            rest = &rest[close.len()..];
        } else {
            let ch = rest.chars().next().expect("non-empty");
            if depth == 0 {
                out.push(ch);
            }
            rest = &rest[ch.len_utf8()..];
        }
    }
    out
}

const DROPPED_NAMESPACES: [&str; 5] = ["file:", "image:", "category:", "media:", "wikt:"];

/// `[[target|label]]` becomes `label`, `[[target]]` becomes `target`;
/// file, image and category links vanish together with nested captions.
fn rewrite_internal_links(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut rest = s;
    while let Some(pos) = rest.find("[[") {
        out.push_str(&rest[..pos]);
        let after = &rest[pos + 2..];
        let mut depth = 1usize;
        let mut end = None;
        let mut j = 0;
        while j < after.len() {
            if after[j..].starts_with("[[") {
                depth += 1;
                j += 2;
            } else if after[j..].starts_with("]]") {
                depth -= 1;
                if depth == 0 {
                    end = Some(j);
                    break;
                }
                j += 2;
            } else {
                j += after[j..].chars().next().map_or(1, char::len_utf8);
            }
        }
        let Some(end) = end else {
            // unterminated link: keep the remainder as plain text
            out.push_str(after);
            return out;
        };
        let inner = &after[..end];
        let lower = inner.trim_start().to_lowercase();
        if !DROPPED_NAMESPACES.iter().any(|ns| lower.starts_with(ns)) {
            let label = match inner.rfind('|') {
                Some(bar) => &inner[bar + 1..],
                None => inner,
            };
            out.push_str(&rewrite_internal_links(label));
        }
        rest = &after[end + 2..];
    }
    out.push_str(rest);
    out
}
