//! Seeded synthetic data for property tests, benchmarks and `gen-fixtures`.
//!
//! Everything here is a pure function of the seed so that CI and local runs
//! see the same corpora.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Short words over a small alphabet so patterns overlap and nest often.
pub fn vocabulary<R: Rng>(rng: &mut R, size: usize) -> Vec<String> {
    let alphabet: Vec<char> = "abcdeé".chars().collect();
    let mut out = BTreeSet::new();
    while out.len() < size {
        let len = rng.random_range(1..=4);
        let w: String = (0..len).map(|_| *alphabet.choose(rng).unwrap()).collect();
        out.insert(w);
    }
    out.into_iter().collect()
}

/// `count` distinct phrases of 1..=3 words.
pub fn patterns<R: Rng>(rng: &mut R, vocab: &[String], count: usize) -> Vec<String> {
    let mut out = BTreeSet::new();
    let mut attempts = 0;
    while out.len() < count && attempts < count * 100 {
        attempts += 1;
        let len = rng.random_range(1..=3);
        let p: Vec<&str> = (0..len).map(|_| vocab.choose(rng).unwrap().as_str()).collect();
        out.insert(p.join(" "));
    }
    out.into_iter().collect()
}

const SEPARATORS: [&str; 6] = [" ", " ", " ", ", ", "-", "  "];

/// Random text mixing vocabulary words, planted patterns, punctuation and
/// case changes.
pub fn utterance<R: Rng>(rng: &mut R, vocab: &[String], patterns: &[String]) -> String {
    let pieces = rng.random_range(1..=10);
    let mut text = String::new();
    for i in 0..pieces {
        if i > 0 {
            text.push_str(SEPARATORS.choose(rng).unwrap());
        }
        let piece = if !patterns.is_empty() && rng.random_bool(0.3) {
            patterns.choose(rng).unwrap().clone()
        } else {
            vocab.choose(rng).unwrap().clone()
        };
        let piece = match rng.random_range(0..6) {
            0 => piece.to_uppercase(),
            1 => {
                let mut c = piece.chars();
                c.next().map(|f| f.to_uppercase().chain(c).collect()).unwrap_or_default()
            }
            _ => piece,
        };
        text.push_str(&piece);
    }
    if rng.random_bool(0.3) {
        text.push_str(["!", ".", "?", " ."].choose(rng).unwrap());
    }
    text
}

/// Corpus file text: `dialogs` dialogs of 1..=`max_turns` utterances each,
/// every utterance carrying a dialog act.
pub fn corpus_tsv<R: Rng>(rng: &mut R, dialogs: usize, max_turns: usize, vocab: &[String], patterns: &[String]) -> String {
    let acts = ["inform", "question", "directive", "commissive"];
    let mut out = String::new();
    for d in 0..dialogs {
        let turns = rng.random_range(1..=max_turns);
        for t in 0..turns {
            let speaker = if t % 2 == 0 { "A" } else { "B" };
            let act = acts.choose(rng).unwrap();
            let text = utterance(rng, vocab, patterns);
            writeln!(out, "d{d:05}\t{t}\t{speaker}\t{act}\t{text}").unwrap();
        }
    }
    out
}

/// Lexicon file text with one entry per pattern.
pub fn lexicon_tsv(patterns: &[String]) -> String {
    let types = ["idiom", "euphemism", "simile", "metaphor"];
    let mut out = String::new();
    for (i, p) in patterns.iter().enumerate() {
        writeln!(out, "{p}\tgloss number {i}\t{}", types[i % types.len()]).unwrap();
    }
    out
}

/// Distinct multi-word phrases over an English-like word list, for
/// throughput runs with a large dictionary.
pub fn large_phrase_set<R: Rng>(rng: &mut R, count: usize) -> (Vec<String>, Vec<String>) {
    let syllables = ["ka", "lo", "mi", "ter", "sun", "ra", "ben", "to", "vel", "dor", "pi", "an", "qu", "es", "mo", "rin"];
    let mut words = BTreeSet::new();
    while words.len() < 3000 {
        let n = rng.random_range(1..=3);
        let w: String = (0..n).map(|_| *syllables.choose(rng).unwrap()).collect();
        words.insert(w);
    }
    let words: Vec<String> = words.into_iter().collect();
    let mut phrases = BTreeSet::new();
    while phrases.len() < count {
        let n = rng.random_range(2..=4);
        let p: Vec<&str> = (0..n).map(|_| words.choose(rng).unwrap().as_str()).collect();
        phrases.insert(p.join(" "));
    }
    (words, phrases.into_iter().collect())
}

/// A complete seeded input set for every CLI command, as (file name,
/// contents) pairs: corpus, lexicon, metaphor scores, gold annotations,
/// references, and responses from two systems under two conditions.
pub fn fixture_set(seed: u64, dialogs: usize, pattern_count: usize) -> Vec<(String, String)> {
    let mut r = rng(seed);
    let vocab = vocabulary(&mut r, 40);
    let pats = patterns(&mut r, &vocab, pattern_count);
    let corpus = corpus_tsv(&mut r, dialogs, 6, &vocab, &pats);

    // (id, text, is_last_turn) in file order
    let mut rows: Vec<(String, String, bool)> = Vec::new();
    let lines: Vec<&str> = corpus.lines().collect();
    for (i, line) in lines.iter().enumerate() {
        let f: Vec<&str> = line.splitn(5, '\t').collect();
        let last = lines.get(i + 1).is_none_or(|next| !next.starts_with(&format!("{}\t", f[0])));
        rows.push((format!("{}:{}", f[0], f[1]), f[4].to_string(), last));
    }

    let mut scores = String::new();
    let mut gold = String::new();
    let constructs = ["metaphor", "idiom", "rhetorical_question", "hyperbole", "personification"];
    for (id, _, _) in &rows {
        writeln!(scores, "{id}\t{:.3}", r.random_range(0.0..=1.0)).unwrap();
        if r.random_bool(0.2) {
            let t = constructs.choose(&mut r).unwrap();
            writeln!(gold, "{id}\t{t}\tliteral version of {id}").unwrap();
        }
    }

    let mut references = String::new();
    let mut responses: Vec<(String, String)> = ["a-before", "a-after", "b-before", "b-after"]
        .iter()
        .map(|n| (format!("responses-{n}.tsv"), String::new()))
        .collect();
    for (id, text, last) in &rows {
        if !last {
            continue;
        }
        let words: Vec<&str> = text.split_whitespace().collect();
        writeln!(references, "{id}\t{text}").unwrap();
        writeln!(references, "{id}\t{}", words.iter().rev().copied().collect::<Vec<_>>().join(" ")).unwrap();
        for (_, out) in responses.iter_mut() {
            let noisy: Vec<&str> = words
                .iter()
                .map(|w| if r.random_bool(0.3) { vocab.choose(&mut r).unwrap().as_str() } else { w })
                .collect();
            writeln!(out, "{id}\t{}", noisy.join(" ")).unwrap();
        }
    }

    let mut files = vec![
        ("corpus.tsv".to_string(), corpus.clone()),
        ("lexicon.tsv".to_string(), lexicon_tsv(&pats)),
        ("scores.tsv".to_string(), scores),
        ("gold.tsv".to_string(), gold),
        ("references.tsv".to_string(), references),
    ];
    files.extend(responses);
    files
}
