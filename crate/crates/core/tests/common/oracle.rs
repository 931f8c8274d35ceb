//! Brute-force reference implementations used to check the fast paths.
#![allow(dead_code)]

/// Every boundary-aligned, case-insensitive occurrence of every pattern, as
/// (start, end, pattern index), found by trying each pattern at each char
/// position.
pub fn naive_occurrences(text: &str, patterns: &[String]) -> Vec<(usize, usize, usize)> {
    let starts: Vec<usize> = text.char_indices().map(|(i, _)| i).collect();
    let mut out = Vec::new();
    for (pi, pattern) in patterns.iter().enumerate() {
        let want: Vec<char> = pattern.chars().flat_map(|c| c.to_lowercase()).collect();
        if want.is_empty() {
            continue;
        }
        for &start in &starts {
            // consume whole original chars until the folded prefix covers the pattern
            let mut folded: Vec<char> = Vec::new();
            let mut end = start;
            for c in text[start..].chars() {
                if folded.len() >= want.len() {
                    break;
                }
                folded.extend(c.to_lowercase());
                end += c.len_utf8();
            }
            if folded == want && word_edge(text, start) && word_edge(text, end) {
                out.push((start, end, pi));
            }
        }
    }
    out
}

/// A match edge is fine unless an alphanumeric char sits on both sides of it.
fn word_edge(text: &str, at: usize) -> bool {
    let before = text[..at].chars().last();
    let after = text[at..].chars().next();
    !matches!((before, after), (Some(b), Some(a)) if b.is_alphanumeric() && a.is_alphanumeric())
}

/// Leftmost-longest selection: from the cursor, take the earliest start,
/// then the longest match there, then skip past it.
pub fn leftmost_longest(mut candidates: Vec<(usize, usize, usize)>) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut cursor = 0;
    loop {
        candidates.retain(|c| c.0 >= cursor);
        let Some(&start) = candidates.iter().map(|(s, _, _)| s).min() else { break };
        let end = candidates.iter().filter(|c| c.0 == start).map(|c| c.1).max().unwrap();
        out.push((start, end));
        cursor = end;
    }
    out
}

/// LCS length by enumerating every subsequence of `a` and testing it
/// against `b`.
pub fn brute_lcs(a: &[u8], b: &[u8]) -> usize {
    let mut best = 0;
    for mask in 0u32..(1 << a.len()) {
        let sub: Vec<u8> = (0..a.len()).filter(|i| mask & (1 << i) != 0).map(|i| a[i]).collect();
        if sub.len() > best && is_subsequence(&sub, b) {
            best = sub.len();
        }
    }
    best
}

fn is_subsequence(sub: &[u8], of: &[u8]) -> bool {
    let mut it = of.iter();
    sub.iter().all(|x| it.any(|y| y == x))
}

pub fn brute_rouge_l(a: &[u8], b: &[u8]) -> f64 {
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    let l = brute_lcs(a, b) as f64;
    if l == 0.0 {
        return 0.0;
    }
    let p = l / a.len() as f64;
    let r = l / b.len() as f64;
    2.0 * p * r / (p + r)
}
