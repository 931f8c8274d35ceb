//! Figurative span detection.
//!
//! Lexicon detection runs every dictionary surface through one Aho-Corasick
//! automaton. Candidate hits are kept only when they start and end on word
//! boundaries of the original utterance, then resolved leftmost-longest.
//! Metaphor detection is utterance-level: an external classifier's score has
//! to be strictly above the threshold.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use aho_corasick::{AhoCorasick, AhoCorasickKind, MatchKind};
use serde::Serialize;

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::lexicon::ReplacementDictionary;

pub const DEFAULT_THRESHOLD: f64 = 0.9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DetectionSource {
    Idiom,
    Metaphor,
}

impl DetectionSource {
    pub fn as_str(self) -> &'static str {
        match self {
            DetectionSource::Idiom => "idiom",
            DetectionSource::Metaphor => "metaphor",
        }
    }
}

impl fmt::Display for DetectionSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DetectionSource {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "idiom" => Ok(DetectionSource::Idiom),
            "metaphor" => Ok(DetectionSource::Metaphor),
            other => Err(format!("unknown detection source {other:?}")),
        }
    }
}

/// A detected occurrence. `start`/`end` are UTF-8 byte offsets into the
/// original utterance.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct FigurativeSpan {
    pub utterance_id: String,
    pub start: usize,
    pub end: usize,
    pub matched_surface: String,
    pub entry_ref: Option<String>,
    pub source: DetectionSource,
}

/// A resolved match, before it is tied to an utterance.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Hit {
    pub start: usize,
    pub end: usize,
    pub pattern: usize,
}

/// Case-insensitive, boundary-aware multi-pattern matcher.
#[derive(Clone, Debug)]
pub struct Matcher {
    automaton: AhoCorasick,
    surfaces: Vec<String>,
    entry_refs: Vec<String>,
}

/// Per-char lowercase used on both patterns and text.
pub fn fold_case(text: &str) -> String {
    text.chars().flat_map(char::to_lowercase).collect()
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric()
}

/// A match may not split an alphanumeric run at either end.
fn on_boundaries(text: &str, start: usize, end: usize) -> bool {
    let (before, rest) = text.split_at(start);
    let (matched, after) = rest.split_at(end - start);
    let cut = |outside: Option<char>, inside: Option<char>| match (outside, inside) {
        (Some(o), Some(i)) => is_word_char(o) && is_word_char(i),
        _ => false,
    };
    !cut(before.chars().next_back(), matched.chars().next()) && !cut(after.chars().next(), matched.chars().next_back())
}

/// Folded text plus, for non-ASCII input, the map from folded byte offsets
/// back to original offsets. `None` entries fall inside the expansion of a
/// single original character and are not valid match edges.
struct Folded {
    text: String,
    map: Option<Vec<Option<usize>>>,
}

impl Folded {
    fn new(text: &str) -> Self {
        if text.is_ascii() {
            return Folded {
                text: text.to_ascii_lowercase(),
                map: None,
            };
        }
        let mut folded = String::with_capacity(text.len());
        let mut map = Vec::with_capacity(text.len() + 1);
        for (orig, c) in text.char_indices() {
            let at = folded.len();
            folded.extend(c.to_lowercase());
            map.push(Some(orig));
            map.extend(std::iter::repeat_n(None, folded.len() - at - 1));
        }
        map.push(Some(text.len()));
        Folded {
            text: folded,
            map: Some(map),
        }
    }

    fn original(&self, offset: usize) -> Option<usize> {
        match &self.map {
            None => Some(offset),
            Some(map) => map[offset],
        }
    }
}

impl Matcher {
    /// Build over `(surface, entry_ref)` pairs. Surfaces are case-folded;
    /// duplicate folded surfaces keep the first pair.
    pub fn from_pairs<I, S, R>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, R)>,
        S: AsRef<str>,
        R: Into<String>,
    {
        let mut seen = BTreeSet::new();
        let mut surfaces = Vec::new();
        let mut entry_refs = Vec::new();
        for (surface, entry_ref) in pairs {
            let folded = fold_case(surface.as_ref());
            if folded.is_empty() || !seen.insert(folded.clone()) {
                continue;
            }
            surfaces.push(folded);
            entry_refs.push(entry_ref.into());
        }
        if surfaces.is_empty() {
            return Err(Error::EmptyMatcher);
        }
        let automaton = AhoCorasick::builder()
            .match_kind(MatchKind::Standard)
            .kind(Some(AhoCorasickKind::DFA))
            .build(&surfaces)
            .or_else(|_| AhoCorasick::builder().match_kind(MatchKind::Standard).build(&surfaces))
            .map_err(|e| Error::Invalid(format!("cannot build matcher: {e}")))?;
        Ok(Matcher {
            automaton,
            surfaces,
            entry_refs,
        })
    }

    pub fn pattern_count(&self) -> usize {
        self.surfaces.len()
    }

    pub fn surface(&self, pattern: usize) -> &str {
        &self.surfaces[pattern]
    }

    pub fn entry_ref(&self, pattern: usize) -> &str {
        &self.entry_refs[pattern]
    }

    /// Every boundary-aligned occurrence, overlapping, sorted by
    /// (start, longest first).
    pub fn candidates(&self, text: &str) -> Vec<Hit> {
        let folded = Folded::new(text);
        let mut hits = Vec::new();
        for m in self.automaton.find_overlapping_iter(&folded.text) {
            let (Some(start), Some(end)) = (folded.original(m.start()), folded.original(m.end())) else {
                continue;
            };
            if start < end && on_boundaries(text, start, end) {
                hits.push(Hit {
                    start,
                    end,
                    pattern: m.pattern().as_usize(),
                });
            }
        }
        hits.sort_by(|a, b| a.start.cmp(&b.start).then(b.end.cmp(&a.end)).then(a.pattern.cmp(&b.pattern)));
        hits
    }

    /// Non-overlapping hits under leftmost-longest resolution.
    pub fn find(&self, text: &str) -> Vec<Hit> {
        resolve_leftmost_longest(self.candidates(text))
    }
}

/// Greedy scan over hits sorted by (start asc, end desc).
fn resolve_leftmost_longest(sorted: Vec<Hit>) -> Vec<Hit> {
    let mut out: Vec<Hit> = Vec::new();
    let mut frontier = 0;
    for hit in sorted {
        if out.is_empty() || hit.start >= frontier {
            frontier = hit.end;
            out.push(hit);
        }
    }
    out
}

pub fn build_matcher(dictionary: &ReplacementDictionary) -> Result<Matcher> {
    Matcher::from_pairs(dictionary.patterns().iter().map(|p| (p.surface.as_str(), p.entry_ref.as_str())))
}

pub fn detect_idioms(utterance_id: &str, utterance: &str, matcher: &Matcher) -> Vec<FigurativeSpan> {
    matcher
        .find(utterance)
        .into_iter()
        .map(|h| FigurativeSpan {
            utterance_id: utterance_id.to_string(),
            start: h.start,
            end: h.end,
            matched_surface: matcher.surface(h.pattern).to_string(),
            entry_ref: Some(matcher.entry_ref(h.pattern).to_string()),
            source: DetectionSource::Idiom,
        })
        .collect()
}

/// Classifier probabilities keyed by utterance id.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct MetaphorScores {
    scores: BTreeMap<String, f64>,
}

impl MetaphorScores {
    pub fn new(scores: BTreeMap<String, f64>) -> Result<Self> {
        for (id, &p) in &scores {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::ScoreOutOfRange { id: id.clone(), value: p });
            }
        }
        Ok(MetaphorScores { scores })
    }

    /// `utterance_id<TAB>probability` per line.
    pub fn parse<R: BufRead>(reader: R, source_name: &str) -> Result<Self> {
        let mut scores = BTreeMap::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            let line_no = idx + 1;
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((id, p)) = line.split_once('\t') else {
                return Err(Error::malformed(source_name, line_no, "expected utterance_id<TAB>probability"));
            };
            let value: f64 = p
                .trim()
                .parse()
                .map_err(|_| Error::malformed(source_name, line_no, format!("bad probability {p:?}")))?;
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::ScoreOutOfRange { id: id.to_string(), value });
            }
            if scores.insert(id.trim().to_string(), value).is_some() {
                return Err(Error::malformed(source_name, line_no, format!("duplicate id {id:?}")));
            }
        }
        Ok(MetaphorScores { scores })
    }

    pub fn get(&self, id: &str) -> Option<f64> {
        self.scores.get(id).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.scores.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }
}

pub fn check_threshold(threshold: f64) -> Result<()> {
    if (0.0..=1.0).contains(&threshold) {
        Ok(())
    } else {
        Err(Error::ThresholdOutOfRange(threshold))
    }
}

/// Ids whose score is strictly greater than `threshold`.
pub fn detect_metaphors(scores: &MetaphorScores, threshold: f64) -> Result<BTreeSet<String>> {
    check_threshold(threshold)?;
    Ok(scores.iter().filter(|(_, p)| *p > threshold).map(|(id, _)| id.to_string()).collect())
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct DetectionResult {
    pub idiom_utterances: BTreeSet<String>,
    pub metaphor_utterances: BTreeSet<String>,
    pub figurative_utterances: BTreeSet<String>,
    /// Sorted by (utterance order in the corpus, start).
    pub spans: Vec<FigurativeSpan>,
}

impl DetectionResult {
    pub fn from_sets(
        idiom_utterances: BTreeSet<String>,
        metaphor_utterances: BTreeSet<String>,
        spans: Vec<FigurativeSpan>,
    ) -> Self {
        let figurative_utterances = idiom_utterances.union(&metaphor_utterances).cloned().collect();
        DetectionResult {
            idiom_utterances,
            metaphor_utterances,
            figurative_utterances,
            spans,
        }
    }

    pub fn spans_for<'a>(&'a self, utterance_id: &'a str) -> impl Iterator<Item = &'a FigurativeSpan> + 'a {
        self.spans.iter().filter(move |s| s.utterance_id == utterance_id)
    }
}

/// Set sizes and the figurative fraction of a detection run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DetectionSummary {
    pub utterances: usize,
    pub idiom_utterances: usize,
    pub metaphor_utterances: usize,
    pub figurative_utterances: usize,
    pub spans: usize,
    pub figurative_fraction: f64,
}

#[derive(Debug)]
pub struct Detection {
    pub result: DetectionResult,
    pub summary: DetectionSummary,
    /// Score ids that do not occur in the corpus; they are ignored.
    pub unknown_score_ids: Vec<String>,
}

pub fn detect_all(
    corpus: &Corpus,
    matcher: &Matcher,
    scores: Option<&MetaphorScores>,
    threshold: f64,
) -> Result<Detection> {
    check_threshold(threshold)?;
    let mut spans = Vec::new();
    let mut idiom = BTreeSet::new();
    let mut total = 0;
    for utt in corpus.utterances() {
        total += 1;
        let found = detect_idioms(&utt.id, &utt.text, matcher);
        if !found.is_empty() {
            idiom.insert(utt.id.clone());
        }
        spans.extend(found);
    }

    let mut metaphor = BTreeSet::new();
    let mut unknown_score_ids = Vec::new();
    if let Some(scores) = scores {
        for id in detect_metaphors(scores, threshold)? {
            if corpus.contains(&id) {
                metaphor.insert(id);
            } else {
                unknown_score_ids.push(id);
            }
        }
        unknown_score_ids.extend(
            scores
                .iter()
                .filter(|(id, p)| *p <= threshold && !corpus.contains(id))
                .map(|(id, _)| id.to_string()),
        );
        unknown_score_ids.sort();
    }

    let result = DetectionResult::from_sets(idiom, metaphor, spans);
    let summary = DetectionSummary {
        utterances: total,
        idiom_utterances: result.idiom_utterances.len(),
        metaphor_utterances: result.metaphor_utterances.len(),
        figurative_utterances: result.figurative_utterances.len(),
        spans: result.spans.len(),
        figurative_fraction: if total == 0 {
            0.0
        } else {
            result.figurative_utterances.len() as f64 / total as f64
        },
    };
    Ok(Detection {
        result,
        summary,
        unknown_score_ids,
    })
}

/// Write detection records: idiom spans in corpus order, then one record
/// per metaphor-only membership with `-` placeholders.
///
/// `utterance_id  start  end  matched_surface  source  entry_ref`
pub fn write_detections<W: Write>(result: &DetectionResult, corpus: &Corpus, mut out: W) -> std::io::Result<()> {
    let mut by_utt: BTreeMap<&str, Vec<&FigurativeSpan>> = BTreeMap::new();
    for s in &result.spans {
        by_utt.entry(s.utterance_id.as_str()).or_default().push(s);
    }
    for utt in corpus.utterances() {
        if let Some(spans) = by_utt.get(utt.id.as_str()) {
            for s in spans {
                writeln!(
                    out,
                    "{}\t{}\t{}\t{}\t{}\t{}",
                    s.utterance_id,
                    s.start,
                    s.end,
                    s.matched_surface,
                    s.source,
                    s.entry_ref.as_deref().unwrap_or("-")
                )?;
            }
        }
        if result.metaphor_utterances.contains(&utt.id) {
            writeln!(out, "{}\t-\t-\t-\tmetaphor\t-", utt.id)?;
        }
    }
    Ok(())
}

/// Read records written by [`write_detections`].
pub fn read_detections<R: BufRead>(reader: R, source_name: &str) -> Result<DetectionResult> {
    let mut idiom = BTreeSet::new();
    let mut metaphor = BTreeSet::new();
    let mut spans = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let line_no = idx + 1;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() != 6 {
            return Err(Error::malformed(source_name, line_no, "expected 6 tab-separated fields"));
        }
        let source: DetectionSource = f[4].parse().map_err(|e: String| Error::malformed(source_name, line_no, e))?;
        match source {
            DetectionSource::Metaphor => {
                metaphor.insert(f[0].to_string());
            }
            DetectionSource::Idiom => {
                let parse = |s: &str| {
                    s.parse::<usize>()
                        .map_err(|_| Error::malformed(source_name, line_no, format!("bad offset {s:?}")))
                };
                let (start, end) = (parse(f[1])?, parse(f[2])?);
                if start >= end {
                    return Err(Error::malformed(source_name, line_no, "span start must precede end"));
                }
                idiom.insert(f[0].to_string());
                spans.push(FigurativeSpan {
                    utterance_id: f[0].to_string(),
                    start,
                    end,
                    matched_surface: f[3].to_string(),
                    entry_ref: (f[5] != "-").then(|| f[5].to_string()),
                    source,
                });
            }
        }
    }
    Ok(DetectionResult::from_sets(idiom, metaphor, spans))
}

/// Glosses that themselves contain a dictionary surface; literalizing twice
/// would rewrite them again.
pub fn gloss_collisions(dictionary: &ReplacementDictionary, matcher: &Matcher) -> Vec<(String, String)> {
    let mut out = Vec::new();
    for entry in dictionary.entries() {
        for hit in matcher.find(&entry.gloss_clean) {
            out.push((entry.source_id.clone(), matcher.surface(hit.pattern).to_string()));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matcher(surfaces: &[&str]) -> Matcher {
        Matcher::from_pairs(surfaces.iter().map(|s| (*s, format!("id:{s}")))).unwrap()
    }

    fn matched(m: &Matcher, text: &str) -> Vec<(usize, usize, String)> {
        m.find(text).into_iter().map(|h| (h.start, h.end, m.surface(h.pattern).to_string())).collect()
    }

    #[test]
    fn counts_patterns() {
        let m = matcher(&["face the music", "get together", "bite the dust", "Face the Music"]);
        assert_eq!(m.pattern_count(), 3);
        assert!(matches!(Matcher::from_pairs(Vec::<(&str, &str)>::new()), Err(Error::EmptyMatcher)));
    }

    #[test]
    fn self_match_covers_whole_utterance() {
        let m = matcher(&["face the music", "get together", "the"]);
        assert_eq!(matched(&m, "get together"), [(0, 12, "get together".to_string())]);
        assert_eq!(matched(&m, "face the music"), [(0, 14, "face the music".to_string())]);
    }

    #[test]
    fn table_four_contexts() {
        let m = matcher(&["face the music", "get together"]);
        let spans = detect_idioms("u", "make him face the music .", &m);
        assert_eq!(spans.len(), 1);
        assert_eq!(&"make him face the music ."[spans[0].start..spans[0].end], "face the music");
        assert_eq!(spans[0].entry_ref.as_deref(), Some("id:face the music"));
        assert_eq!(spans[0].source, DetectionSource::Idiom);

        let spans = detect_idioms("u", "maybe we can get together sometime", &m);
        assert_eq!(spans.len(), 1);
        assert_eq!(spans[0].matched_surface, "get together");
    }

    #[test]
    fn respects_word_boundaries() {
        let m = matcher(&["face the music", "kick"]);
        assert!(m.find("the surface of the musical score").is_empty());
        assert!(m.find("surface the music").is_empty());
        assert!(m.find("face the musical").is_empty());
        assert!(m.find("kickstart").is_empty());
        assert_eq!(matched(&m, "Kick!"), [(0, 4, "kick".to_string())]);
    }

    #[test]
    fn leftmost_longest() {
        let m = matcher(&["kick", "get a kick out of", "a kick", "out of the blue", "out"]);
        assert_eq!(
            matched(&m, "I get a kick out of the blue sky"),
            [(2, 19, "get a kick out of".to_string())]
        );
        assert_eq!(
            matched(&m, "a kick out of the blue"),
            [(0, 6, "a kick".to_string()), (7, 22, "out of the blue".to_string())]
        );
    }

    #[test]
    fn case_insensitive_with_original_offsets() {
        let m = matcher(&["café au lait", "face the music"]);
        let text = "Ünd CAFÉ AU LAIT, then FACE THE MUSIC";
        let got = matched(&m, text);
        assert_eq!(got.len(), 2);
        assert_eq!(&text[got[0].0..got[0].1], "CAFÉ AU LAIT");
        assert_eq!(&text[got[1].0..got[1].1], "FACE THE MUSIC");
    }

    #[test]
    fn expanding_fold_does_not_misalign() {
        // U+0130 lowercases to two chars; a match may not end inside it.
        let m = matcher(&["i"]);
        assert!(m.find("\u{130}").is_empty());
        assert_eq!(m.find("\u{130} i").len(), 1);
    }

    #[test]
    fn metaphor_threshold_is_strict() {
        let scores = MetaphorScores::new(
            [("u1", 0.95), ("u2", 0.90), ("u3", 0.10)].iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        )
        .unwrap();
        let got = detect_metaphors(&scores, DEFAULT_THRESHOLD).unwrap();
        assert_eq!(got.into_iter().collect::<Vec<_>>(), ["u1"]);
        assert_eq!(detect_metaphors(&scores, 0.0).unwrap().len(), 3);
        assert!(detect_metaphors(&MetaphorScores::default(), 0.9).unwrap().is_empty());
        assert!(detect_metaphors(&scores, 1.5).is_err());
    }

    #[test]
    fn scores_are_validated_on_load() {
        assert!(matches!(
            MetaphorScores::parse("a\t0.5\nb\t1.2\n".as_bytes(), "s"),
            Err(Error::ScoreOutOfRange { .. })
        ));
        assert!(MetaphorScores::parse("a\tNaN\n".as_bytes(), "s").is_err());
        assert!(MetaphorScores::parse("a 0.5\n".as_bytes(), "s").is_err());
        let s = MetaphorScores::parse("a\t0.5\n# c\nb\t1\n".as_bytes(), "s").unwrap();
        assert_eq!(s.len(), 2);
    }

    #[test]
    fn union_of_sets() {
        let set = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect::<BTreeSet<_>>();
        let r = DetectionResult::from_sets(set(&["a", "b"]), set(&["b", "c"]), Vec::new());
        assert_eq!(r.figurative_utterances, set(&["a", "b", "c"]));
        let r = DetectionResult::from_sets(set(&["a"]), BTreeSet::new(), Vec::new());
        assert_eq!(r.figurative_utterances, set(&["a"]));
    }
}
