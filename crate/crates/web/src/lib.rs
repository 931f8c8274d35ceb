//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Each export takes plain strings and returns a JSON document; the plain
//! Rust functions behind them are usable (and tested) natively.

use figlit::corpus::{Dialog, Utterance};
use figlit::detector::{self, DetectionResult};
use figlit::inflection::InflectionTables;
use figlit::lexicon::{self, ConstructType, LexiconEntry};
use figlit::literalizer::{self, ContextMode};
use figlit::metrics::{self, Smoothing, BLEU_ORDERS};
use serde::Serialize;
use wasm_bindgen::prelude::*;

#[derive(Serialize)]
struct Expansion {
    template: String,
    surfaces: Vec<String>,
}

pub fn expand_template_json(template: &str) -> Result<String, String> {
    if template.trim().is_empty() {
        return Err("template is empty".into());
    }
    let entry = LexiconEntry::new(template, "-", ConstructType::Unknown, "demo");
    let surfaces = lexicon::expand_entry(&entry, &InflectionTables::bundled()).into_iter().map(|p| p.surface).collect();
    to_json(&Expansion {
        template: lexicon::normalize_surface(template),
        surfaces,
    })
}

/// Lexicon lines may be tab-separated like the CLI input, or
/// `template = gloss` for easier typing in a text box.
fn lexicon_tsv(text: &str) -> String {
    text.lines()
        .map(|l| match l.split_once('\t') {
            Some(_) => l.to_string(),
            None => match l.split_once('=') {
                Some((t, g)) => format!("{}\t{}", t.trim(), g.trim()),
                None => l.to_string(),
            },
        })
        .collect::<Vec<_>>()
        .join("\n")
}

#[derive(Serialize)]
struct Segment {
    text: String,
    /// Set when this segment is a figurative span.
    gloss: Option<String>,
}

#[derive(Serialize)]
struct AnalyzedUtterance {
    text: String,
    literalized: String,
    segments: Vec<Segment>,
}

#[derive(Serialize)]
struct Analysis {
    patterns: usize,
    warnings: Vec<String>,
    mode: ContextMode,
    utterances: Vec<AnalyzedUtterance>,
}

pub fn analyze_json(lexicon_text: &str, dialog_text: &str, mode: &str) -> Result<String, String> {
    let mode: ContextMode = mode.parse()?;
    let entries = lexicon::parse_lexicon(lexicon_tsv(lexicon_text).as_bytes(), "lexicon").map_err(|e| e.to_string())?;
    let build = lexicon::build_dictionary(entries, &InflectionTables::bundled()).map_err(|e| e.to_string())?;
    let dict = build.dictionary;
    let matcher = detector::build_matcher(&dict).map_err(|e| e.to_string())?;

    let utterances: Vec<Utterance> = dialog_text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(i, l)| Utterance::new("demo", i as u32, if i % 2 == 0 { "A" } else { "B" }, l))
        .collect();
    if utterances.is_empty() {
        return Err("dialog is empty".into());
    }
    let mut spans = Vec::new();
    let mut idiom = std::collections::BTreeSet::new();
    for u in &utterances {
        let found = detector::detect_idioms(&u.id, &u.text, &matcher);
        if !found.is_empty() {
            idiom.insert(u.id.clone());
        }
        spans.extend(found);
    }
    let detection = DetectionResult::from_sets(idiom, Default::default(), spans);
    let dialog = Dialog {
        id: "demo".into(),
        utterances,
    };
    let records = literalizer::literalize_dialog(&dialog, &detection, &dict, mode).map_err(|e| e.to_string())?;

    let analyzed = dialog
        .utterances
        .iter()
        .zip(records)
        .map(|(u, r)| {
            let mut segments = Vec::new();
            let mut at = 0;
            for s in detection.spans_for(&u.id) {
                if s.start > at {
                    segments.push(Segment { text: u.text[at..s.start].to_string(), gloss: None });
                }
                let gloss = s.entry_ref.as_deref().and_then(|id| dict.gloss(id)).map(str::to_string);
                segments.push(Segment { text: u.text[s.start..s.end].to_string(), gloss });
                at = s.end;
            }
            if at < u.text.len() {
                segments.push(Segment { text: u.text[at..].to_string(), gloss: None });
            }
            AnalyzedUtterance {
                text: u.text.clone(),
                literalized: r.literalized,
                segments,
            }
        })
        .collect();
    to_json(&Analysis {
        patterns: dict.patterns().len(),
        warnings: build.warnings.iter().map(ToString::to_string).collect(),
        mode,
        utterances: analyzed,
    })
}

#[derive(Serialize)]
struct ScoreCard {
    bleu: Vec<f64>,
    rouge_l: f64,
}

pub fn score_json(candidate: &str, references: &str, add_one: bool) -> Result<String, String> {
    let cand = metrics::tokenize(candidate);
    let refs: Vec<Vec<String>> =
        references.lines().filter(|l| !l.trim().is_empty()).map(metrics::tokenize).collect();
    if refs.is_empty() {
        return Err("at least one reference is required".into());
    }
    let smoothing = if add_one { Smoothing::AddOne } else { Smoothing::None };
    to_json(&ScoreCard {
        bleu: BLEU_ORDERS.iter().map(|&n| metrics::bleu_n(&cand, &refs, n, smoothing)).collect(),
        rouge_l: metrics::rouge_l_multi(&cand, &refs),
    })
}

fn to_json<T: Serialize>(value: &T) -> Result<String, String> {
    serde_json::to_string(value).map_err(|e| e.to_string())
}

/// All surface variants of an idiom template, as JSON.
#[wasm_bindgen]
pub fn expand_template(template: &str) -> Result<String, JsError> {
    expand_template_json(template).map_err(|e| JsError::new(&e))
}

/// Detect and literalize a dialog (one utterance per line) against a
/// lexicon; `mode` is `anywhere` or `last-utterance`.
#[wasm_bindgen]
pub fn analyze(lexicon_text: &str, dialog_text: &str, mode: &str) -> Result<String, JsError> {
    analyze_json(lexicon_text, dialog_text, mode).map_err(|e| JsError::new(&e))
}

/// BLEU-1..4 and ROUGE-L of a candidate against newline-separated references.
#[wasm_bindgen]
pub fn score(candidate: &str, references: &str, add_one: bool) -> Result<String, JsError> {
    score_json(candidate, references, add_one).map_err(|e| JsError::new(&e))
}
