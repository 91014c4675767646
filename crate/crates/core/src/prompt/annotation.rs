//! Hidden annotations on assistant messages.
//!
//! An assistant message may start with a run of `<...>` segments that only
//! the model sees: emotion tags such as `<tormented>` and thought blocks such
//! as `<Thoughts: "...">`. Everything after the leading run is visible text.
//! A `<` later in the text is literal.

use std::fmt;

use serde::{Deserialize, Serialize};

const THOUGHTS_PREFIX: &str = "Thoughts:";

/// Marker that opens a thought block; it must never reach a participant.
pub const THOUGHT_DELIMITER: &str = "<Thoughts:";

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload", rename_all = "snake_case")]
pub enum Annotation {
    EmotionTag(String),
    ThoughtBlock(String),
}

impl fmt::Display for Annotation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Annotation::EmotionTag(tag) => write!(f, "<{tag}>"),
            Annotation::ThoughtBlock(text) => write!(f, "<{THOUGHTS_PREFIX} \"{text}\">"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AnnotationError {
    #[error("unterminated annotation starting at byte {offset}")]
    Unterminated { offset: usize },
    #[error("empty annotation at byte {offset}")]
    Empty { offset: usize },
}

/// Assistant content split into hidden annotations and visible text.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AnnotatedContent {
    annotations: Vec<Annotation>,
    visible_text: String,
}

impl AnnotatedContent {
    pub fn new(annotations: Vec<Annotation>, visible_text: impl Into<String>) -> Self {
        Self {
            annotations,
            visible_text: visible_text.into(),
        }
    }

    pub fn parse(raw: &str) -> Result<Self, AnnotationError> {
        parse_annotations(raw)
    }

    pub fn annotations(&self) -> &[Annotation] {
        &self.annotations
    }

    pub fn visible_text(&self) -> &str {
        &self.visible_text
    }

    /// Canonical raw form: annotations separated by single spaces, then the
    /// visible text.
    pub fn to_raw(&self) -> String {
        let mut out = String::new();
        for annotation in &self.annotations {
            if !out.is_empty() {
                out.push(' ');
            }
            out.push_str(&annotation.to_string());
        }
        if !self.visible_text.is_empty() {
            if !out.is_empty() {
                out.push(' ');
            }
            out.push_str(&self.visible_text);
        }
        out
    }
}

impl fmt::Display for AnnotatedContent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_raw())
    }
}

/// Splits the leading `<...>` run of `raw` into annotations.
pub fn parse_annotations(raw: &str) -> Result<AnnotatedContent, AnnotationError> {
    let mut annotations = Vec::new();
    let mut pos = skip_whitespace(raw, 0);

    while raw[pos..].starts_with('<') {
        let (annotation, next) = parse_segment(raw, pos)?;
        annotations.push(annotation);
        pos = skip_whitespace(raw, next);
    }

    Ok(AnnotatedContent {
        annotations,
        visible_text: raw[pos..].to_string(),
    })
}

fn skip_whitespace(raw: &str, from: usize) -> usize {
    raw[from..]
        .char_indices()
        .find(|(_, c)| !c.is_whitespace())
        .map_or(raw.len(), |(i, _)| from + i)
}

/// Parses the segment opening at `start` (which holds `<`); returns the
/// annotation and the byte offset just past its closing `>`.
fn parse_segment(raw: &str, start: usize) -> Result<(Annotation, usize), AnnotationError> {
    let body_start = start + 1;
    let body = &raw[body_start..];

    if let Some(after_prefix) = body.strip_prefix(THOUGHTS_PREFIX) {
        let prefix_end = body_start + THOUGHTS_PREFIX.len();
        let lead = after_prefix.len() - after_prefix.trim_start().len();
        let content_start = prefix_end + lead;
        if raw[content_start..].starts_with('"') {
            // Closing quote is the first `"` followed by optional space and `>`.
            let quoted = &raw[content_start + 1..];
            for (i, _) in quoted.match_indices('"') {
                let tail = &quoted[i + 1..];
                let trimmed = tail.trim_start();
                if trimmed.starts_with('>') {
                    let close = content_start + 1 + i + 1 + (tail.len() - trimmed.len());
                    let payload = quoted[..i].to_string();
                    return Ok((Annotation::ThoughtBlock(payload), close + 1));
                }
            }
            return Err(AnnotationError::Unterminated { offset: start });
        }
        let close = raw[content_start..]
            .find('>')
            .map(|i| content_start + i)
            .ok_or(AnnotationError::Unterminated { offset: start })?;
        let payload = raw[content_start..close].trim().to_string();
        return Ok((Annotation::ThoughtBlock(payload), close + 1));
    }

    let close = body
        .find(['<', '>'])
        .filter(|&i| body.as_bytes()[i] == b'>')
        .ok_or(AnnotationError::Unterminated { offset: start })?;
    let tag = body[..close].trim();
    if tag.is_empty() {
        return Err(AnnotationError::Empty { offset: start });
    }
    Ok((Annotation::EmotionTag(tag.to_string()), body_start + close + 1))
}

/// Text a participant may see: the visible part of `raw`, with any thought
/// block that a model embedded mid-text removed as well.
pub fn strip_for_display(raw: &str) -> Result<String, AnnotationError> {
    let content = parse_annotations(raw)?;
    Ok(scrub_embedded_thoughts(content.visible_text()))
}

fn scrub_embedded_thoughts(text: &str) -> String {
    let mut out = text.to_string();
    while let Some(start) = out.find(THOUGHT_DELIMITER) {
        let end = embedded_block_end(&out, start).unwrap_or(out.len());
        out.replace_range(start..end, "");
    }
    if out.len() != text.len() {
        let collapsed: Vec<&str> = out.split(' ').filter(|s| !s.is_empty()).collect();
        return collapsed.join(" ").trim().to_string();
    }
    out
}

fn embedded_block_end(text: &str, start: usize) -> Option<usize> {
    parse_segment(text, start).ok().map(|(_, end)| end)
}
