//! Idiom lexicons and the compiled replacement dictionary.
//!
//! A lexicon file is line-delimited, tab-separated:
//!
//! ```text
//! # surface_template <TAB> gloss_raw <TAB> construct_type [<TAB> source_id]
//! behind someone's back\t(informal) secretly\tidiom
//! bite the dust\t(euphemistic) die.\teuphemism
//! ```
//!
//! Templates may contain the slots `someone`, `someone's`, `one` and `one's`,
//! and may open with a verb lemma (optionally marked with a leading `to `).
//! [`expand_entry`] turns a template into every concrete surface; the
//! compiled [`ReplacementDictionary`] maps each surface to one cleaned gloss.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inflection::{InflectionTables, SlotKind, VerbForm};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConstructType {
    Idiom,
    Euphemism,
    Simile,
    Metaphor,
    Unknown,
}

impl ConstructType {
    pub fn as_str(self) -> &'static str {
        match self {
            ConstructType::Idiom => "idiom",
            ConstructType::Euphemism => "euphemism",
            ConstructType::Simile => "simile",
            ConstructType::Metaphor => "metaphor",
            ConstructType::Unknown => "unknown",
        }
    }
}

impl fmt::Display for ConstructType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ConstructType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "idiom" => Ok(ConstructType::Idiom),
            "euphemism" => Ok(ConstructType::Euphemism),
            "simile" => Ok(ConstructType::Simile),
            "metaphor" => Ok(ConstructType::Metaphor),
            "unknown" | "" => Ok(ConstructType::Unknown),
            other => Err(format!("unknown construct type {other:?}")),
        }
    }
}

/// One figurative phrase and its literal gloss.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LexiconEntry {
    pub surface_template: String,
    pub gloss_raw: String,
    /// Empty until [`clean_gloss`] has been applied.
    pub gloss_clean: String,
    pub construct_type: ConstructType,
    pub source_id: String,
}

impl LexiconEntry {
    pub fn new(surface_template: &str, gloss_raw: &str, construct_type: ConstructType, source_id: &str) -> Self {
        LexiconEntry {
            surface_template: normalize_surface(surface_template),
            gloss_raw: gloss_raw.to_string(),
            gloss_clean: String::new(),
            construct_type,
            source_id: source_id.to_string(),
        }
    }
}

/// Lowercase, straighten apostrophes, collapse whitespace.
pub fn normalize_surface(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for word in text.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        for c in word.chars() {
            match c {
                '\u{2019}' | '\u{2018}' => out.push('\''),
                c => out.extend(c.to_lowercase()),
            }
        }
    }
    out
}

/// Read a lexicon file. Entries without an explicit id get `L<line>`,
/// zero-padded so ids sort in file order.
pub fn parse_lexicon<R: BufRead>(reader: R, source_name: &str) -> Result<Vec<LexiconEntry>> {
    let mut entries = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let line_no = idx + 1;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if !(2..=4).contains(&fields.len()) {
            return Err(Error::malformed(
                source_name,
                line_no,
                format!("expected 2 to 4 tab-separated fields, found {}", fields.len()),
            ));
        }
        let surface = normalize_surface(fields[0]);
        if surface.is_empty() {
            return Err(Error::malformed(source_name, line_no, "empty surface template"));
        }
        let gloss = fields[1].trim();
        if gloss.is_empty() {
            return Err(Error::malformed(source_name, line_no, "empty gloss"));
        }
        let construct_type = match fields.get(2) {
            Some(t) => t.parse().map_err(|e: String| Error::malformed(source_name, line_no, e))?,
            None => ConstructType::Unknown,
        };
        let source_id = match fields.get(3).map(|s| s.trim()) {
            Some(id) if !id.is_empty() => id.to_string(),
            _ => format!("L{line_no:06}"),
        };
        entries.push(LexiconEntry {
            surface_template: surface,
            gloss_raw: gloss.to_string(),
            gloss_clean: String::new(),
            construct_type,
            source_id,
        });
    }
    Ok(entries)
}

static LEADING_LABELS: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^\s*(?:(?:\([^()]*\)|\[[^\[\]]*\])\s*)+").unwrap());

/// Strip leading `(label)` / `[label]` groups and trailing periods, collapse
/// whitespace. Interior parentheses are kept.
pub fn clean_gloss(gloss_raw: &str) -> Result<String> {
    let stripped = LEADING_LABELS.replace(gloss_raw, "");
    let collapsed = stripped.split_whitespace().collect::<Vec<_>>().join(" ");
    let cleaned = collapsed.trim_end_matches(|c: char| c == '.' || c.is_whitespace());
    if cleaned.is_empty() {
        return Err(Error::GlossEmptyAfterCleaning(gloss_raw.to_string()));
    }
    Ok(cleaned.to_string())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SlotMarker {
    /// `someone`
    Someone,
    /// `someone's`
    SomeonePossessive,
    /// `one`
    One,
    /// `one's`
    OnePossessive,
    /// Template-initial verb lemma.
    Verb(VerbForm),
}

impl SlotMarker {
    fn from_token(token: &str) -> Option<SlotMarker> {
        match token {
            "someone" => Some(SlotMarker::Someone),
            "someone's" => Some(SlotMarker::SomeonePossessive),
            "one" => Some(SlotMarker::One),
            "one's" => Some(SlotMarker::OnePossessive),
            _ => None,
        }
    }

    fn kind(self) -> Option<SlotKind> {
        match self {
            SlotMarker::Someone | SlotMarker::One => Some(SlotKind::Objective),
            SlotMarker::SomeonePossessive | SlotMarker::OnePossessive => Some(SlotKind::Possessive),
            SlotMarker::Verb(_) => None,
        }
    }
}

/// Which realization filled which template token.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SlotBinding {
    pub position: usize,
    pub marker: SlotMarker,
    pub realization: String,
}

/// A concrete surface form of a lexicon entry.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExpandedPattern {
    /// Lowercase, single-space separated, no slot markers.
    pub surface: String,
    pub entry_ref: String,
    pub slot_bindings: Vec<SlotBinding>,
}

/// Template tokens after normalization, plus the index of the verb to
/// inflect if there is one.
pub fn template_tokens(template: &str, tables: &InflectionTables) -> (Vec<String>, Option<usize>) {
    let normalized = normalize_surface(template);
    let (body, forced) = match normalized.strip_prefix("to ") {
        Some(rest) if !rest.is_empty() => (rest.to_string(), true),
        _ => (normalized, false),
    };
    let tokens: Vec<String> = body.split(' ').map(str::to_string).collect();
    let verb = tokens
        .first()
        .filter(|t| SlotMarker::from_token(t).is_none())
        .filter(|t| forced || tables.is_known_verb(t))
        .map(|_| 0);
    (tokens, verb)
}

/// Substitute bindings into template tokens.
pub fn realize(tokens: &[String], bindings: &[SlotBinding]) -> String {
    let mut out: Vec<&str> = tokens.iter().map(String::as_str).collect();
    for b in bindings {
        out[b.position] = &b.realization;
    }
    out.join(" ")
}

/// Every concrete surface of `entry`: verb inflections (outer) crossed with
/// each slot's pronoun paradigm, in paradigm order.
pub fn expand_entry(entry: &LexiconEntry, tables: &InflectionTables) -> Vec<ExpandedPattern> {
    let (tokens, verb_pos) = template_tokens(&entry.surface_template, tables);

    let mut axes: Vec<Vec<SlotBinding>> = Vec::new();
    if let Some(pos) = verb_pos {
        let forms = tables
            .verb_paradigm(&tokens[pos])
            .into_iter()
            .map(|(form, realization)| SlotBinding {
                position: pos,
                marker: SlotMarker::Verb(form),
                realization,
            })
            .collect();
        axes.push(forms);
    }
    for (pos, token) in tokens.iter().enumerate() {
        let Some(marker) = SlotMarker::from_token(token) else { continue };
        let kind = marker.kind().expect("pronoun slot");
        axes.push(
            tables
                .pronoun_forms(kind)
                .iter()
                .map(|p| SlotBinding {
                    position: pos,
                    marker,
                    realization: p.clone(),
                })
                .collect(),
        );
    }

    let mut combos: Vec<Vec<SlotBinding>> = vec![Vec::new()];
    for axis in &axes {
        let mut next = Vec::with_capacity(combos.len() * axis.len());
        for combo in &combos {
            for b in axis {
                let mut c = combo.clone();
                c.push(b.clone());
                next.push(c);
            }
        }
        combos = next;
    }

    combos
        .into_iter()
        .map(|bindings| ExpandedPattern {
            surface: realize(&tokens, &bindings),
            entry_ref: entry.source_id.clone(),
            slot_bindings: bindings,
        })
        .collect()
}

/// Non-fatal problems found while building a dictionary.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BuildWarning {
    /// Entry dropped because its gloss was only labels.
    GlossSkipped { source_id: String, gloss_raw: String },
    /// Two entries produced the same surface with different glosses.
    DuplicateSurface { surface: String, kept: String, dropped: String },
}

impl fmt::Display for BuildWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BuildWarning::GlossSkipped { source_id, gloss_raw } => {
                write!(f, "entry {source_id}: gloss {gloss_raw:?} is empty after cleaning; skipped")
            }
            BuildWarning::DuplicateSurface { surface, kept, dropped } => {
                write!(f, "surface {surface:?} produced by {kept} and {dropped} with different glosses; kept {kept}")
            }
        }
    }
}

/// Compiled surface → gloss mapping. Immutable once built.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReplacementDictionary {
    /// Sorted by surface, surfaces unique.
    patterns: Vec<ExpandedPattern>,
    entries: BTreeMap<String, LexiconEntry>,
    type_histogram: BTreeMap<ConstructType, usize>,
}

#[derive(Debug)]
pub struct DictionaryBuild {
    pub dictionary: ReplacementDictionary,
    pub warnings: Vec<BuildWarning>,
}

pub fn build_dictionary(entries: Vec<LexiconEntry>, tables: &InflectionTables) -> Result<DictionaryBuild> {
    let mut warnings = Vec::new();
    let mut kept: BTreeMap<String, LexiconEntry> = BTreeMap::new();
    for mut entry in entries {
        match clean_gloss(&entry.gloss_raw) {
            Ok(clean) => {
                entry.gloss_clean = clean;
                if let Some(prev) = kept.get(&entry.source_id) {
                    return Err(Error::Invalid(format!(
                        "source id {:?} used by both {:?} and {:?}",
                        entry.source_id, prev.surface_template, entry.surface_template
                    )));
                }
                kept.insert(entry.source_id.clone(), entry);
            }
            Err(_) => warnings.push(BuildWarning::GlossSkipped {
                source_id: entry.source_id.clone(),
                gloss_raw: entry.gloss_raw.clone(),
            }),
        }
    }
    if kept.is_empty() {
        return Err(Error::EmptyDictionary);
    }

    // `kept` iterates in source_id order, so the first claimant of a surface
    // is the lexicographically smallest id.
    let mut by_surface: BTreeMap<String, ExpandedPattern> = BTreeMap::new();
    for entry in kept.values() {
        for pattern in expand_entry(entry, tables) {
            match by_surface.get(&pattern.surface) {
                None => {
                    by_surface.insert(pattern.surface.clone(), pattern);
                }
                Some(existing) => {
                    if existing.entry_ref != pattern.entry_ref
                        && kept[&existing.entry_ref].gloss_clean != entry.gloss_clean
                    {
                        warnings.push(BuildWarning::DuplicateSurface {
                            surface: pattern.surface.clone(),
                            kept: existing.entry_ref.clone(),
                            dropped: pattern.entry_ref.clone(),
                        });
                    }
                }
            }
        }
    }

    let mut type_histogram = BTreeMap::new();
    for e in kept.values() {
        *type_histogram.entry(e.construct_type).or_insert(0) += 1;
    }
    Ok(DictionaryBuild {
        dictionary: ReplacementDictionary {
            patterns: by_surface.into_values().collect(),
            entries: kept,
            type_histogram,
        },
        warnings,
    })
}

impl ReplacementDictionary {
    pub fn patterns(&self) -> &[ExpandedPattern] {
        &self.patterns
    }

    pub fn entries(&self) -> impl Iterator<Item = &LexiconEntry> {
        self.entries.values()
    }

    pub fn entry_count(&self) -> usize {
        self.entries.len()
    }

    pub fn entry(&self, source_id: &str) -> Option<&LexiconEntry> {
        self.entries.get(source_id)
    }

    pub fn gloss(&self, source_id: &str) -> Option<&str> {
        self.entries.get(source_id).map(|e| e.gloss_clean.as_str())
    }

    pub fn type_histogram(&self) -> &BTreeMap<ConstructType, usize> {
        &self.type_histogram
    }

    /// Share of each construct type among entries, in percent.
    pub fn type_percentages(&self) -> BTreeMap<ConstructType, f64> {
        let total = self.entries.len() as f64;
        self.type_histogram
            .iter()
            .map(|(t, n)| (*t, *n as f64 * 100.0 / total))
            .collect()
    }

    /// One `surface\tgloss\ttype\tsource_id` line per pattern, sorted by surface.
    pub fn write_tsv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for p in &self.patterns {
            let e = &self.entries[&p.entry_ref];
            writeln!(out, "{}\t{}\t{}\t{}", p.surface, e.gloss_clean, e.construct_type, e.source_id)?;
        }
        Ok(())
    }

    /// Load a compiled dictionary. Templates and slot bindings are not
    /// stored, so each entry's template is its first surface.
    pub fn read_tsv<R: BufRead>(reader: R, source_name: &str) -> Result<Self> {
        let mut entries: BTreeMap<String, LexiconEntry> = BTreeMap::new();
        let mut by_surface: BTreeMap<String, ExpandedPattern> = BTreeMap::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            let line_no = idx + 1;
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 4 {
                return Err(Error::malformed(source_name, line_no, "expected surface, gloss, type, source_id"));
            }
            let surface = normalize_surface(fields[0]);
            let gloss = fields[1].trim();
            if surface.is_empty() || gloss.is_empty() || fields[3].is_empty() {
                return Err(Error::malformed(source_name, line_no, "empty field"));
            }
            let construct_type: ConstructType =
                fields[2].parse().map_err(|e: String| Error::malformed(source_name, line_no, e))?;
            let id = fields[3].to_string();
            match entries.get(&id) {
                Some(e) if e.gloss_clean != gloss || e.construct_type != construct_type => {
                    return Err(Error::malformed(source_name, line_no, format!("entry {id} has conflicting glosses")));
                }
                Some(_) => {}
                None => {
                    entries.insert(
                        id.clone(),
                        LexiconEntry {
                            surface_template: surface.clone(),
                            gloss_raw: gloss.to_string(),
                            gloss_clean: gloss.to_string(),
                            construct_type,
                            source_id: id.clone(),
                        },
                    );
                }
            }
            let pattern = ExpandedPattern {
                surface: surface.clone(),
                entry_ref: id,
                slot_bindings: Vec::new(),
            };
            if by_surface.insert(surface.clone(), pattern).is_some() {
                return Err(Error::malformed(source_name, line_no, format!("duplicate surface {surface:?}")));
            }
        }
        if entries.is_empty() {
            return Err(Error::EmptyDictionary);
        }
        let mut type_histogram = BTreeMap::new();
        for e in entries.values() {
            *type_histogram.entry(e.construct_type).or_insert(0) += 1;
        }
        Ok(ReplacementDictionary {
            patterns: by_surface.into_values().collect(),
            entries,
            type_histogram,
        })
    }
}
