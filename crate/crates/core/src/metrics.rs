//! Reference-overlap scores (BLEU, ROUGE-L), detection quality, and
//! before/after comparison of dialog systems.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::io::BufRead;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Lowercase, split off punctuation, split on whitespace.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut spaced = String::with_capacity(text.len() + 8);
    for c in text.chars() {
        if c.is_alphanumeric() || c == '\'' || c.is_whitespace() {
            spaced.extend(c.to_lowercase());
        } else {
            spaced.push(' ');
            spaced.push(c);
            spaced.push(' ');
        }
    }
    spaced.split_whitespace().map(str::to_string).collect()
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Smoothing {
    #[default]
    None,
    /// Add one to numerator and denominator of every order above unigrams.
    AddOne,
}

fn ngram_counts<S: AsRef<str>>(tokens: &[S], n: usize) -> HashMap<Vec<&str>, usize> {
    let mut counts = HashMap::new();
    if tokens.len() >= n {
        for w in tokens.windows(n) {
            *counts.entry(w.iter().map(AsRef::as_ref).collect()).or_insert(0) += 1;
        }
    }
    counts
}

/// Clipped n-gram matches and candidate n-gram total.
fn modified_precision<S: AsRef<str>>(candidate: &[S], references: &[Vec<S>], n: usize) -> (usize, usize) {
    let cand = ngram_counts(candidate, n);
    let mut max_ref: HashMap<Vec<&str>, usize> = HashMap::new();
    for r in references {
        for (g, c) in ngram_counts(r, n) {
            let e = max_ref.entry(g).or_insert(0);
            *e = (*e).max(c);
        }
    }
    let matched = cand.iter().map(|(g, c)| (*c).min(max_ref.get(g).copied().unwrap_or(0))).sum();
    (matched, candidate.len().saturating_sub(n - 1))
}

/// Reference length closest to `len`, shorter on ties.
fn closest_ref_len<S>(len: usize, references: &[Vec<S>]) -> usize {
    references
        .iter()
        .map(Vec::len)
        .min_by_key(|r| (r.abs_diff(len), *r))
        .unwrap_or(0)
}

fn combine(matches: &[(usize, usize)], cand_len: usize, ref_len: usize, smoothing: Smoothing) -> f64 {
    if cand_len == 0 {
        return 0.0;
    }
    let mut log_sum = 0.0;
    for (order, &(m, total)) in matches.iter().enumerate() {
        let (m, total) = match smoothing {
            Smoothing::AddOne if order > 0 => (m as f64 + 1.0, total as f64 + 1.0),
            _ => (m as f64, total as f64),
        };
        if m == 0.0 || total == 0.0 {
            return 0.0;
        }
        log_sum += (m / total).ln();
    }
    let bp = if cand_len >= ref_len {
        1.0
    } else {
        (1.0 - ref_len as f64 / cand_len as f64).exp()
    };
    bp * (log_sum / matches.len() as f64).exp()
}

/// Sentence BLEU with uniform weights over orders 1..=n.
pub fn bleu_n<S: AsRef<str>>(candidate: &[S], references: &[Vec<S>], n: usize, smoothing: Smoothing) -> f64 {
    assert!(n >= 1, "BLEU order must be at least 1");
    assert!(!references.is_empty(), "BLEU needs at least one reference");
    let matches: Vec<_> = (1..=n).map(|k| modified_precision(candidate, references, k)).collect();
    combine(&matches, candidate.len(), closest_ref_len(candidate.len(), references), smoothing)
}

/// Corpus BLEU: counts pooled over all segments before combining.
pub fn corpus_bleu<S: AsRef<str>>(segments: &[(Vec<S>, Vec<Vec<S>>)], n: usize, smoothing: Smoothing) -> f64 {
    assert!(n >= 1, "BLEU order must be at least 1");
    let mut pooled = vec![(0usize, 0usize); n];
    let (mut cand_len, mut ref_len) = (0, 0);
    for (cand, refs) in segments {
        assert!(!refs.is_empty(), "BLEU needs at least one reference");
        for (k, slot) in pooled.iter_mut().enumerate() {
            let (m, t) = modified_precision(cand, refs, k + 1);
            slot.0 += m;
            slot.1 += t;
        }
        cand_len += cand.len();
        ref_len += closest_ref_len(cand.len(), refs);
    }
    combine(&pooled, cand_len, ref_len, smoothing)
}

fn lcs_len<S: AsRef<str>>(a: &[S], b: &[S]) -> usize {
    let mut row = vec![0usize; b.len() + 1];
    for x in a {
        let mut diag = 0;
        for (j, y) in b.iter().enumerate() {
            let up = row[j + 1];
            row[j + 1] = if x.as_ref() == y.as_ref() { diag + 1 } else { up.max(row[j]) };
            diag = up;
        }
    }
    row[b.len()]
}

/// LCS-based F1.
pub fn rouge_l<S: AsRef<str>>(candidate: &[S], reference: &[S]) -> f64 {
    if candidate.is_empty() || reference.is_empty() {
        return 0.0;
    }
    let lcs = lcs_len(candidate, reference) as f64;
    if lcs == 0.0 {
        return 0.0;
    }
    let p = lcs / candidate.len() as f64;
    let r = lcs / reference.len() as f64;
    2.0 * p * r / (p + r)
}

/// Best ROUGE-L over several references.
pub fn rouge_l_multi<S: AsRef<str>>(candidate: &[S], references: &[Vec<S>]) -> f64 {
    references.iter().map(|r| rouge_l(candidate, r)).fold(0.0, f64::max)
}

pub fn detection_recall(detected: &BTreeSet<String>, gold: &BTreeSet<String>) -> Result<f64> {
    if gold.is_empty() {
        return Err(Error::EmptyGold);
    }
    Ok(detected.intersection(gold).count() as f64 / gold.len() as f64)
}

/// `None` when nothing was detected.
pub fn detection_precision(detected: &BTreeSet<String>, gold: &BTreeSet<String>) -> Option<f64> {
    (!detected.is_empty()).then(|| detected.intersection(gold).count() as f64 / detected.len() as f64)
}

/// Signed relative change in percent.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PercentChange {
    Finite(f64),
    /// before = 0, after > 0
    PosInf,
    /// before = 0, after < 0
    NegInf,
}

impl PercentChange {
    pub fn finite(self) -> Option<f64> {
        match self {
            PercentChange::Finite(v) => Some(v),
            _ => None,
        }
    }
}

impl fmt::Display for PercentChange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PercentChange::Finite(v) => write!(f, "{v:.2}"),
            PercentChange::PosInf => f.write_str("+inf"),
            PercentChange::NegInf => f.write_str("-inf"),
        }
    }
}

impl Serialize for PercentChange {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            PercentChange::Finite(v) => s.serialize_f64(*v),
            PercentChange::PosInf => s.serialize_str("+inf"),
            PercentChange::NegInf => s.serialize_str("-inf"),
        }
    }
}

/// (after - before) / before * 100; two zeros count as no change.
pub fn percent_change(before: f64, after: f64) -> PercentChange {
    if before != 0.0 {
        PercentChange::Finite((after - before) / before * 100.0)
    } else if after > 0.0 {
        PercentChange::PosInf
    } else if after < 0.0 {
        PercentChange::NegInf
    } else {
        PercentChange::Finite(0.0)
    }
}

/// 1-based ranks by descending score; ties go to the smaller system name.
pub fn ranks(scores: &BTreeMap<String, f64>) -> BTreeMap<String, usize> {
    let mut order: Vec<(&String, f64)> = scores.iter().map(|(k, v)| (k, *v)).collect();
    order.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    order.into_iter().enumerate().map(|(i, (k, _))| (k.clone(), i + 1)).collect()
}

/// Responses keyed by utterance id.
pub type Responses = BTreeMap<String, String>;
/// One or more references per utterance id.
pub type References = BTreeMap<String, Vec<String>>;

/// `utterance_id <TAB> text` lines. Repeated ids are rejected.
pub fn read_responses<R: BufRead>(reader: R, source_name: &str) -> Result<Responses> {
    let mut out = BTreeMap::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let line_no = idx + 1;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let (id, text) = line
            .split_once('\t')
            .ok_or_else(|| Error::malformed(source_name, line_no, "expected utterance_id<TAB>text"))?;
        if out.insert(id.to_string(), text.to_string()).is_some() {
            return Err(Error::malformed(source_name, line_no, format!("duplicate id {id:?}")));
        }
    }
    Ok(out)
}

/// Like [`read_responses`], but an id may repeat (multi-reference).
pub fn read_references<R: BufRead>(reader: R, source_name: &str) -> Result<References> {
    let mut out: References = BTreeMap::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let line_no = idx + 1;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let (id, text) = line
            .split_once('\t')
            .ok_or_else(|| Error::malformed(source_name, line_no, "expected utterance_id<TAB>text"))?;
        out.entry(id.to_string()).or_default().push(text.to_string());
    }
    Ok(out)
}

pub const BLEU_ORDERS: [usize; 4] = [1, 2, 3, 4];

/// Metric name → value for one system under one condition.
pub type Scores = BTreeMap<String, f64>;

/// Corpus BLEU-1..4 and mean sentence ROUGE-L of `responses` against
/// `references`. Every response id needs a reference.
pub fn score_system(responses: &Responses, references: &References, smoothing: Smoothing) -> Result<Scores> {
    let missing: Vec<String> = responses.keys().filter(|id| !references.contains_key(*id)).cloned().collect();
    if !missing.is_empty() {
        return Err(Error::Invalid(format!("no reference for ids: {}", missing.join(", "))));
    }
    let segments: Vec<(Vec<String>, Vec<Vec<String>>)> = responses
        .iter()
        .map(|(id, text)| (tokenize(text), references[id].iter().map(|r| tokenize(r)).collect()))
        .collect();
    let mut scores = BTreeMap::new();
    for n in BLEU_ORDERS {
        scores.insert(format!("bleu-{n}"), corpus_bleu(&segments, n, smoothing));
    }
    let rouge = if segments.is_empty() {
        0.0
    } else {
        segments.iter().map(|(c, r)| rouge_l_multi(c, r)).sum::<f64>() / segments.len() as f64
    };
    scores.insert("rouge-l".into(), rouge);
    Ok(scores)
}

/// Systems evaluated under one condition: system name → responses.
pub type ConditionRun = BTreeMap<String, Responses>;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MetricRow {
    pub metric: String,
    pub system: String,
    pub before: f64,
    pub after: f64,
    pub percent_change: PercentChange,
    pub rank_before: usize,
    pub rank_after: usize,
    /// Positive when the system moved up.
    pub rank_change: i64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MetricsReport {
    pub smoothing: Smoothing,
    pub utterances: usize,
    pub systems: Vec<String>,
    pub metrics: Vec<String>,
    /// Metrics reserved in the schema but not computed.
    pub unavailable: Vec<String>,
    pub tie_break: &'static str,
    pub rows: Vec<MetricRow>,
}

fn symmetric_difference<'a, I, J>(a: I, b: J) -> Vec<String>
where
    I: IntoIterator<Item = &'a String>,
    J: IntoIterator<Item = &'a String>,
{
    let a: BTreeSet<&String> = a.into_iter().collect();
    let b: BTreeSet<&String> = b.into_iter().collect();
    a.symmetric_difference(&b).map(|s| s.to_string()).collect()
}

/// Score both conditions and report per-metric change and rank movement.
pub fn compare_conditions(
    before: &ConditionRun,
    after: &ConditionRun,
    references: &References,
    smoothing: Smoothing,
) -> Result<MetricsReport> {
    let diff = symmetric_difference(before.keys(), after.keys());
    if !diff.is_empty() {
        return Err(Error::IdMismatch(diff.into_iter().map(|s| format!("system {s}")).collect()));
    }
    if before.is_empty() {
        return Err(Error::Invalid("no systems to compare".into()));
    }
    let mut ids: Option<&Responses> = None;
    for run in before.values().chain(after.values()) {
        match ids {
            None => ids = Some(run),
            Some(first) => {
                let diff = symmetric_difference(first.keys(), run.keys());
                if !diff.is_empty() {
                    return Err(Error::IdMismatch(diff));
                }
            }
        }
    }

    let score_all = |run: &ConditionRun| -> Result<BTreeMap<String, Scores>> {
        run.iter().map(|(sys, r)| Ok((sys.clone(), score_system(r, references, smoothing)?))).collect()
    };
    let scores_before = score_all(before)?;
    let scores_after = score_all(after)?;
    Ok(compare_scores(&scores_before, &scores_after, ids.map_or(0, BTreeMap::len), smoothing))
}

/// Change table from precomputed scores (system → metric → value).
pub fn compare_scores(
    before: &BTreeMap<String, Scores>,
    after: &BTreeMap<String, Scores>,
    utterances: usize,
    smoothing: Smoothing,
) -> MetricsReport {
    let metrics: Vec<String> = before.values().next().map(|s| s.keys().cloned().collect()).unwrap_or_default();
    let mut rows = Vec::new();
    for metric in &metrics {
        let column = |side: &BTreeMap<String, Scores>| -> BTreeMap<String, f64> {
            side.iter().map(|(sys, s)| (sys.clone(), s.get(metric).copied().unwrap_or(0.0))).collect()
        };
        let (b, a) = (column(before), column(after));
        let (rb, ra) = (ranks(&b), ranks(&a));
        for system in b.keys() {
            rows.push(MetricRow {
                metric: metric.clone(),
                system: system.clone(),
                before: b[system],
                after: a[system],
                percent_change: percent_change(b[system], a[system]),
                rank_before: rb[system],
                rank_after: ra[system],
                rank_change: rb[system] as i64 - ra[system] as i64,
            });
        }
    }
    MetricsReport {
        smoothing,
        utterances,
        systems: before.keys().cloned().collect(),
        metrics,
        unavailable: vec!["meteor".into()],
        tie_break: "equal scores rank by system name, ascending",
        rows,
    }
}
