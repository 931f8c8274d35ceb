//! Replace detected figurative spans with their literal glosses.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::Serialize;

use crate::corpus::Dialog;
use crate::detector::{DetectionResult, DetectionSource, FigurativeSpan};
use crate::error::{Error, Result};
use crate::lexicon::ReplacementDictionary;

/// Which utterances of a dialog history get rewritten.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ContextMode {
    /// Only the final utterance.
    LastUtterance,
    /// Every utterance with spans.
    Anywhere,
}

impl FromStr for ContextMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "last-utterance" | "last" => Ok(ContextMode::LastUtterance),
            "anywhere" => Ok(ContextMode::Anywhere),
            other => Err(format!("unknown mode {other:?} (expected last-utterance or anywhere)")),
        }
    }
}

impl fmt::Display for ContextMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ContextMode::LastUtterance => "last-utterance",
            ContextMode::Anywhere => "anywhere",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Replacement {
    pub span: FigurativeSpan,
    /// Original text covered by the span.
    pub replaced: String,
    /// Gloss as inserted, after case adjustment.
    pub gloss: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RewriteRecord {
    pub utterance_id: String,
    pub original: String,
    pub literalized: String,
    pub replacements: Vec<Replacement>,
}

impl RewriteRecord {
    pub fn identity(utterance_id: &str, text: &str) -> Self {
        RewriteRecord {
            utterance_id: utterance_id.to_string(),
            original: text.to_string(),
            literalized: text.to_string(),
            replacements: Vec::new(),
        }
    }
}

/// Uppercase the gloss's first character when the replaced text starts
/// uppercase; otherwise insert it verbatim.
fn match_case(replaced: &str, gloss: &str) -> String {
    let starts_upper = replaced.chars().next().is_some_and(char::is_uppercase);
    let mut chars = gloss.chars();
    match chars.next() {
        Some(first) if starts_upper && first.is_lowercase() => first.to_uppercase().chain(chars).collect(),
        _ => gloss.to_string(),
    }
}

pub fn literalize_utterance(
    utterance_id: &str,
    utterance: &str,
    spans: &[FigurativeSpan],
    dictionary: &ReplacementDictionary,
) -> Result<RewriteRecord> {
    let invalid = |s: &FigurativeSpan, reason| Error::InvalidSpan {
        utterance_id: utterance_id.to_string(),
        start: s.start,
        end: s.end,
        reason,
    };
    let lexical: Vec<&FigurativeSpan> = spans.iter().filter(|s| s.source == DetectionSource::Idiom).collect();
    let mut prev_end = 0;
    for s in &lexical {
        if s.start >= s.end || s.end > utterance.len() {
            return Err(invalid(s, "out of bounds"));
        }
        if !utterance.is_char_boundary(s.start) || !utterance.is_char_boundary(s.end) {
            return Err(invalid(s, "not on a character boundary"));
        }
        if s.start < prev_end {
            return Err(invalid(s, "spans overlap or are unsorted"));
        }
        prev_end = s.end;
    }

    let mut replacements = Vec::with_capacity(lexical.len());
    for s in &lexical {
        let entry_ref = s.entry_ref.as_deref().ok_or_else(|| Error::UnresolvedEntry("-".into()))?;
        let gloss = dictionary.gloss(entry_ref).ok_or_else(|| Error::UnresolvedEntry(entry_ref.to_string()))?;
        let replaced = &utterance[s.start..s.end];
        replacements.push(Replacement {
            span: (*s).clone(),
            replaced: replaced.to_string(),
            gloss: match_case(replaced, gloss),
        });
    }

    // right to left keeps earlier offsets valid
    let mut literalized = utterance.to_string();
    for r in replacements.iter().rev() {
        literalized.replace_range(r.span.start..r.span.end, &r.gloss);
    }
    Ok(RewriteRecord {
        utterance_id: utterance_id.to_string(),
        original: utterance.to_string(),
        literalized,
        replacements,
    })
}

pub fn literalize_dialog(
    dialog: &Dialog,
    detection: &DetectionResult,
    dictionary: &ReplacementDictionary,
    mode: ContextMode,
) -> Result<Vec<RewriteRecord>> {
    let last = dialog.utterances.len().checked_sub(1).ok_or(Error::EmptyDialog)?;
    dialog
        .utterances
        .iter()
        .enumerate()
        .map(|(i, u)| {
            let eligible = match mode {
                ContextMode::LastUtterance => i == last,
                ContextMode::Anywhere => true,
            };
            if !eligible {
                return Ok(RewriteRecord::identity(&u.id, &u.text));
            }
            let spans: Vec<FigurativeSpan> = detection.spans_for(&u.id).cloned().collect();
            literalize_utterance(&u.id, &u.text, &spans, dictionary)
        })
        .collect()
}

/// `utterance_id  original  literalized  replacement_count` per record.
pub fn write_rewrites<W: Write>(records: &[RewriteRecord], mut out: W) -> std::io::Result<()> {
    for r in records {
        writeln!(out, "{}\t{}\t{}\t{}", r.utterance_id, r.original, r.literalized, r.replacements.len())?;
    }
    Ok(())
}

/// `utterance_id  surface  gloss` per replacement.
pub fn write_audit<W: Write>(records: &[RewriteRecord], mut out: W) -> std::io::Result<()> {
    for r in records {
        for rep in &r.replacements {
            writeln!(out, "{}\t{}\t{}", r.utterance_id, rep.span.matched_surface, rep.gloss)?;
        }
    }
    Ok(())
}
