mod common;

use std::collections::BTreeSet;

use common::oracle;
use figlit::corpus::{figurative_stats, load_corpus};
use figlit::detector::{detect_metaphors, DetectionResult, DetectionSource, FigurativeSpan, Matcher, MetaphorScores};
use figlit::fixtures;
use figlit::inflection::InflectionTables;
use figlit::lexicon::{build_dictionary, clean_gloss, expand_entry, realize, template_tokens, ConstructType, LexiconEntry};
use figlit::literalizer::literalize_utterance;
use figlit::metrics::{bleu_n, detection_recall, rouge_l, Smoothing};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

fn matcher_for(patterns: &[String]) -> Matcher {
    Matcher::from_pairs(patterns.iter().enumerate().map(|(i, p)| (p.as_str(), format!("p{i}")))).unwrap()
}

#[test]
fn matcher_equals_naive_scan_on_seeded_corpora() {
    for seed in 0..5u64 {
        let mut rng = fixtures::rng(seed);
        let vocab = fixtures::vocabulary(&mut rng, 40);
        let patterns = fixtures::patterns(&mut rng, &vocab, 100);
        let m = matcher_for(&patterns);
        for _ in 0..200 {
            let text = fixtures::utterance(&mut rng, &vocab, &patterns);
            let got: Vec<(usize, usize)> = m.find(&text).iter().map(|h| (h.start, h.end)).collect();
            let want = oracle::leftmost_longest(oracle::naive_occurrences(&text, &patterns));
            assert_eq!(got, want, "seed {seed}: {text:?}");
            for h in m.find(&text) {
                assert_eq!(
                    m.surface(h.pattern).chars().flat_map(char::to_lowercase).collect::<String>(),
                    text[h.start..h.end].chars().flat_map(char::to_lowercase).collect::<String>()
                );
            }
        }
    }
}

#[test]
fn nested_patterns_resolve_leftmost_longest() {
    let patterns: Vec<String> = ["kick", "get a kick out of", "a kick", "kick out"].iter().map(|s| s.to_string()).collect();
    let m = matcher_for(&patterns);
    let text = "you get a kick out of it, a kick out the door";
    let got: Vec<&str> = m.find(text).iter().map(|h| &text[h.start..h.end]).collect();
    assert_eq!(got, ["get a kick out of", "a kick"]);
}

#[test]
fn expansion_count_matches_hand_enumeration() {
    let tables = InflectionTables::bundled();
    let cases: [(&str, usize); 6] = [
        ("between jobs", 1),
        ("behind someone's back", 7),
        ("bite the dust", 5),
        ("kick the bucket", 4),
        ("keep someone at arm's length", 4 * 7),
        ("put one's money where one's mouth is", 3 * 7 * 7),
    ];
    for (template, expected) in cases {
        let e = LexiconEntry::new(template, "g", ConstructType::Idiom, "id");
        let pats = expand_entry(&e, &tables);
        assert_eq!(pats.len(), expected, "{template}");
        let (tokens, _) = template_tokens(template, &tables);
        for p in &pats {
            assert_eq!(realize(&tokens, &p.slot_bindings), p.surface);
            for marker in ["someone", "someone's", "one", "one's"] {
                assert!(!p.surface.split(' ').any(|t| t == marker), "{}", p.surface);
            }
        }
    }
}

#[test]
fn dictionary_build_is_deterministic() {
    let src = "behind someone's back\t(informal) secretly\tidiom\nbite the dust\t(euphemistic) die.\teuphemism\nas cool as a cucumber\tcalm\tsimile\n";
    let build = || {
        let entries = figlit::lexicon::parse_lexicon(src.as_bytes(), "lex").unwrap();
        let d = build_dictionary(entries, &InflectionTables::bundled()).unwrap().dictionary;
        let mut out = Vec::new();
        d.write_tsv(&mut out).unwrap();
        out
    };
    assert_eq!(build(), build());
}

#[test]
fn rouge_matches_brute_force_lcs_small() {
    // length <= 5 here; the exhaustive length-8 sweep is in the acceptance suite
    let alphabet = *b"abc";
    let mut seqs: Vec<Vec<u8>> = vec![vec![]];
    for len in 1..=5 {
        let mut next = Vec::new();
        for s in seqs.iter().filter(|s| s.len() == len - 1) {
            for a in alphabet {
                let mut t = s.clone();
                t.push(a);
                next.push(t);
            }
        }
        seqs.extend(next);
    }
    for a in &seqs {
        for b in &seqs {
            let to_tokens = |s: &[u8]| s.iter().map(|c| (*c as char).to_string()).collect::<Vec<_>>();
            let got = rouge_l(&to_tokens(a), &to_tokens(b));
            assert!((got - oracle::brute_rouge_l(a, b)).abs() < 1e-12);
        }
    }
}

fn tok_strategy() -> impl Strategy<Value = Vec<String>> {
    prop::collection::vec(prop::sample::select(vec!["a", "b", "c", "d", "e"]).prop_map(str::to_string), 0..12)
}

fn id_set() -> impl Strategy<Value = BTreeSet<String>> {
    prop::collection::btree_set((0u8..40).prop_map(|i| format!("u{i}")), 0..20)
}

proptest! {
    #[test]
    fn union_law(idiom in id_set(), metaphor in id_set()) {
        let r = DetectionResult::from_sets(idiom.clone(), metaphor.clone(), Vec::new());
        let expected: BTreeSet<String> = idiom.iter().chain(metaphor.iter()).cloned().collect();
        prop_assert_eq!(r.figurative_utterances, expected);
    }

    #[test]
    fn lowering_threshold_never_shrinks(scores in prop::collection::btree_map("[a-z]{1,3}", 0.0f64..=1.0, 0..30), hi in 0.0f64..=1.0, lo_frac in 0.0f64..=1.0) {
        let lo = hi * lo_frac;
        let s = MetaphorScores::new(scores).unwrap();
        let high = detect_metaphors(&s, hi).unwrap();
        let low = detect_metaphors(&s, lo).unwrap();
        prop_assert!(high.is_subset(&low));
    }

    #[test]
    fn scores_bounded(c in tok_strategy(), r in tok_strategy(), n in 1usize..5) {
        prop_assume!(!r.is_empty());
        for sm in [Smoothing::None, Smoothing::AddOne] {
            let b = bleu_n(&c, std::slice::from_ref(&r), n, sm);
            prop_assert!((0.0..=1.0).contains(&b), "bleu {}", b);
        }
        let rl = rouge_l(&c, &r);
        prop_assert!((0.0..=1.0).contains(&rl));
    }

    #[test]
    fn unigram_bleu_ignores_order(c in tok_strategy(), r in tok_strategy(), seed in any::<u64>()) {
        prop_assume!(!r.is_empty());
        let mut shuffled = c.clone();
        shuffled.shuffle(&mut fixtures::rng(seed));
        let a = bleu_n(&c, std::slice::from_ref(&r), 1, Smoothing::None);
        let b = bleu_n(&shuffled, std::slice::from_ref(&r), 1, Smoothing::None);
        prop_assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn recall_is_monotone(detected in id_set(), extra in id_set(), gold in id_set()) {
        prop_assume!(!gold.is_empty());
        let base = detection_recall(&detected, &gold).unwrap();
        let grown: BTreeSet<String> = detected.union(&extra).cloned().collect();
        prop_assert!(detection_recall(&grown, &gold).unwrap() >= base);
    }

    #[test]
    fn literalize_offset_arithmetic(text in "[a-zé ,.]{0,40}", cuts in prop::collection::vec(0usize..48, 0..8), gloss in "[A-Za-z][A-Za-z ]{0,9}") {
        // random non-overlapping spans over char boundaries
        let bounds: Vec<usize> = text.char_indices().map(|(i, _)| i).chain([text.len()]).collect();
        let mut points: Vec<usize> = cuts.iter().map(|c| bounds[c % bounds.len()]).collect();
        points.sort();
        points.dedup();
        let spans: Vec<FigurativeSpan> = points
            .chunks_exact(2)
            .map(|w| FigurativeSpan {
                utterance_id: "u".into(),
                start: w[0],
                end: w[1],
                matched_surface: text[w[0]..w[1]].to_string(),
                entry_ref: Some("g".into()),
                source: DetectionSource::Idiom,
            })
            .collect();
        let dict = build_dictionary(vec![LexiconEntry::new("zzz", &gloss, ConstructType::Idiom, "g")], &InflectionTables::bundled())
            .unwrap()
            .dictionary;
        let clean = clean_gloss(&gloss).unwrap();
        let r = literalize_utterance("u", &text, &spans, &dict).unwrap();
        let removed: usize = spans.iter().map(|s| s.end - s.start).sum();
        prop_assert_eq!(r.literalized.len(), text.len() - removed + clean.len() * spans.len());

        // text outside replaced regions is preserved verbatim
        let mut rebuilt = String::new();
        let mut prev = 0;
        for (s, rep) in spans.iter().zip(&r.replacements) {
            rebuilt.push_str(&text[prev..s.start]);
            rebuilt.push_str(&rep.gloss);
            prev = s.end;
        }
        rebuilt.push_str(&text[prev..]);
        prop_assert_eq!(rebuilt, r.literalized);
    }

    #[test]
    fn dialog_level_bound(seed in any::<u64>(), density in 0.0f64..1.0) {
        // fig_dialogs >= fig_utts / max_len, i.e. dialog >= utterance * mean_len / max_len
        let mut rng = fixtures::rng(seed);
        let vocab = fixtures::vocabulary(&mut rng, 10);
        let dialogs = rng.random_range(1..20);
        let text = fixtures::corpus_tsv(&mut rng, dialogs, 6, &vocab, &[]);
        let corpus = load_corpus(text.as_bytes(), "c").unwrap();
        let ids: BTreeSet<String> = corpus.utterances().filter(|_| rng.random_bool(density)).map(|u| u.id.clone()).collect();
        let s = figurative_stats(&corpus, &ids).unwrap();
        let max_len = corpus.dialogs().iter().map(|d| d.utterances.len()).max().unwrap() as f64;
        let mean_len = corpus.len() as f64 / corpus.dialogs().len() as f64;
        prop_assert!(s.dialog_level_freq >= s.utterance_level_freq * mean_len / max_len - 1e-12);
    }

    #[test]
    fn dialog_level_at_least_utterance_level_for_equal_lengths(seed in any::<u64>(), density in 0.0f64..1.0, turns in 1usize..8) {
        let mut rng = fixtures::rng(seed);
        let dialogs = rng.random_range(1..20);
        let text: String = (0..dialogs)
            .flat_map(|d| (0..turns).map(move |t| format!("d{d}\t{t}\tA\t-\tx\n")))
            .collect();
        let corpus = load_corpus(text.as_bytes(), "c").unwrap();
        let ids: BTreeSet<String> = corpus.utterances().filter(|_| rng.random_bool(density)).map(|u| u.id.clone()).collect();
        let s = figurative_stats(&corpus, &ids).unwrap();
        prop_assert!(s.dialog_level_freq >= s.utterance_level_freq - 1e-12);
    }

    #[test]
    fn stats_ignore_dialog_order(seed in any::<u64>()) {
        let mut rng = fixtures::rng(seed);
        let vocab = fixtures::vocabulary(&mut rng, 10);
        let text = fixtures::corpus_tsv(&mut rng, 8, 4, &vocab, &[]);
        let corpus = load_corpus(text.as_bytes(), "c").unwrap();
        let ids: BTreeSet<String> = corpus.utterances().filter(|_| rng.random_bool(0.2)).map(|u| u.id.clone()).collect();

        let mut blocks: Vec<Vec<&str>> = Vec::new();
        for line in text.lines() {
            match blocks.last_mut() {
                Some(b) if b[0].split('\t').next() == line.split('\t').next() => b.push(line),
                _ => blocks.push(vec![line]),
            }
        }
        blocks.reverse();
        let reordered: String = blocks.concat().iter().map(|l| format!("{l}\n")).collect();
        let other = load_corpus(reordered.as_bytes(), "c").unwrap();
        prop_assert_eq!(figurative_stats(&corpus, &ids).unwrap(), figurative_stats(&other, &ids).unwrap());
    }
}
