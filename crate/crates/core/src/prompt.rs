//! Clue-generation prompt templates.
//!
//! A template carries the four placeholders `{context}`, `{keyword}`,
//! `{category}` and `{num_clues}`, each exactly once. Any other braces are
//! literal text, so a template may show the JSON response shape verbatim.
//! Substitution is a single left-to-right pass: substituted values are never
//! rescanned for placeholders.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::text::contains_ci;

pub const PLACEHOLDERS: [&str; 4] = ["{context}", "{keyword}", "{category}", "{num_clues}"];

/// Shipped default. A reconstruction of the instruction style (role, the
/// three inputs, clue count, no-answer constraint, JSON answer format), not
/// a transcript of any particular published prompt.
pub const DEFAULT_TEMPLATE: &str = "You are an educational crossword clue writer.\n\
Read the context below and write {num_clues} distinct crossword clues whose answer is the given keyword.\n\
Each clue must be grounded in the context, fit the category, and must not contain the answer or any variant of it.\n\
\n\
Category: {category}\n\
Answer: {keyword}\n\
Context:\n\
{context}\n\
\n\
Reply with a single JSON object of the form {\"clues\": [\"first clue\", \"second clue\", \"third clue\"]} and nothing else.\n";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PromptError {
    #[error("template placeholder {0} is missing")]
    UnboundPlaceholder(&'static str),
    #[error("template placeholder {0} appears more than once")]
    DuplicatePlaceholder(&'static str),
    #[error("empty prompt input: {0}")]
    EmptyInput(&'static str),
    #[error("num_clues must be positive")]
    ZeroClues,
    #[error("cannot read template {path}: {message}")]
    Io { path: String, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptTemplate {
    template_text: String,
    num_clues: usize,
}

impl Default for PromptTemplate {
    fn default() -> Self {
        PromptTemplate::new(DEFAULT_TEMPLATE, 3).expect("default template is well-formed")
    }
}

impl PromptTemplate {
    pub fn new(template_text: impl Into<String>, num_clues: usize) -> Result<Self, PromptError> {
        let template_text = template_text.into();
        if num_clues == 0 {
            return Err(PromptError::ZeroClues);
        }
        for p in PLACEHOLDERS {
            match template_text.matches(p).count() {
                0 => return Err(PromptError::UnboundPlaceholder(p)),
                1 => {}
                _ => return Err(PromptError::DuplicatePlaceholder(p)),
            }
        }
        Ok(PromptTemplate { template_text, num_clues })
    }

    pub fn from_file(path: &Path, num_clues: usize) -> Result<Self, PromptError> {
        let text = std::fs::read_to_string(path).map_err(|e| PromptError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        PromptTemplate::new(text, num_clues)
    }

    pub fn text(&self) -> &str {
        &self.template_text
    }

    pub fn num_clues(&self) -> usize {
        self.num_clues
    }

    /// Substitutes the triplet into the template. Logs a warning when the
    /// keyword does not occur in the context.
    pub fn render(&self, context: &str, keyword: &str, category: &str) -> Result<String, PromptError> {
        for (name, v) in [("context", context), ("keyword", keyword), ("category", category)] {
            if v.trim().is_empty() {
                return Err(PromptError::EmptyInput(name));
            }
        }
        if !contains_ci(context, keyword) {
            log::warn!("keyword {keyword:?} does not occur in its context");
        }
        let num = self.num_clues.to_string();
        let mut out = String::with_capacity(self.template_text.len() + context.len() + keyword.len() + 64);
        let mut rest = self.template_text.as_str();
        'scan: while !rest.is_empty() {
            if rest.starts_with('{') {
                for (p, value) in PLACEHOLDERS.iter().zip([context, keyword, category, num.as_str()]) {
                    if rest.starts_with(p) {
                        out.push_str(value);
                        rest = &rest[p.len()..];
                        continue 'scan;
                    }
                }
            }
            let ch = rest.chars().next().expect("non-empty");
            out.push(ch);
            rest = &rest[ch.len_utf8()..];
        }
        Ok(out)
    }
}

/// Free-function form of [`PromptTemplate::render`].
pub fn render_prompt(tpl: &PromptTemplate, context: &str, keyword: &str, category: &str) -> Result<String, PromptError> {
    tpl.render(context, keyword, category)
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    #[test]
    fn direct_substitution() {
        let tpl = PromptTemplate::new("{context}|{keyword}|{category}|{num_clues}", 3).unwrap();
        assert_eq!(tpl.render("C", "K", "G").unwrap(), "C|K|G|3");
    }

    #[test]
    fn missing_placeholder() {
        assert_eq!(
            PromptTemplate::new("{context}|{category}|{num_clues}", 3),
            Err(PromptError::UnboundPlaceholder("{keyword}"))
        );
        assert_eq!(
            PromptTemplate::new("{context}{context}|{keyword}|{category}|{num_clues}", 3),
            Err(PromptError::DuplicatePlaceholder("{context}"))
        );
    }

    #[test]
    fn default_template_with_robocall() {
        let context = "A robocall is an automated phone call that delivers a recorded message, \
                       as if from a robot. Robocall systems are used by political campaigns.";
        let prompt = PromptTemplate::default().render(context, "Robocall", "Society").unwrap();
        assert!(prompt.contains(context));
        let outside = prompt.replacen(context, "", 1);
        assert_eq!(outside.matches("Robocall").count(), 1);
        assert!(outside.contains("3 distinct crossword clues"));
        assert!(outside.contains("must not contain the answer"));
        assert!(outside.contains("{\"clues\": ["));
    }

    #[test]
    fn values_are_not_rescanned() {
        let tpl = PromptTemplate::new("{context}|{keyword}|{category}|{num_clues}", 2).unwrap();
        assert_eq!(tpl.render("{keyword}", "K", "G").unwrap(), "{keyword}|K|G|2");
    }

    #[test]
    fn empty_inputs_rejected() {
        assert_eq!(
            PromptTemplate::default().render(" ", "K", "G"),
            Err(PromptError::EmptyInput("context"))
        );
    }

    proptest! {
        #[test]
        fn length_is_pure_substitution(c in "[a-z]\\PC{0,60}", k in "[a-zA-Z]{1,10}", g in "[a-zA-Z ]{0,10}[a-z]") {
            let tpl = PromptTemplate::default();
            let out = tpl.render(&c, &k, &g).unwrap();
            let placeholder_len: usize = PLACEHOLDERS.iter().map(|p| p.len()).sum();
            let expected = tpl.text().len() - placeholder_len + c.len() + k.len() + g.len() + "3".len();
            prop_assert_eq!(out.len(), expected);
        }

        #[test]
        fn injective_on_contexts(a in "[a-z .]{1,40}", b in "[a-z .]{1,40}") {
            prop_assume!(a != b && !a.trim().is_empty() && !b.trim().is_empty());
            let tpl = PromptTemplate::default();
            prop_assert_ne!(tpl.render(&a, "kw", "Science").unwrap(), tpl.render(&b, "kw", "Science").unwrap());
        }
    }
}
