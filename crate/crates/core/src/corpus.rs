//! Dialog corpora, gold annotations and prevalence statistics.
//!
//! Corpus files hold one utterance per line:
//!
//! ```text
//! dialog_id <TAB> turn_index <TAB> speaker <TAB> dialog_act_or_dash <TAB> text
//! ```
//!
//! Utterance ids are derived as `dialog_id:turn_index`.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DialogAct {
    Inform,
    Question,
    Directive,
    Commissive,
}

impl DialogAct {
    pub const ALL: [DialogAct; 4] = [DialogAct::Inform, DialogAct::Question, DialogAct::Directive, DialogAct::Commissive];

    pub fn as_str(self) -> &'static str {
        match self {
            DialogAct::Inform => "inform",
            DialogAct::Question => "question",
            DialogAct::Directive => "directive",
            DialogAct::Commissive => "commissive",
        }
    }
}

impl fmt::Display for DialogAct {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DialogAct {
    type Err = String;

    /// Names, or the numeric codes 1-4 used by DailyDialog.
    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inform" | "1" => Ok(DialogAct::Inform),
            "question" | "2" => Ok(DialogAct::Question),
            "directive" | "3" => Ok(DialogAct::Directive),
            "commissive" | "4" => Ok(DialogAct::Commissive),
            other => Err(format!("unknown dialog act {other:?}")),
        }
    }
}

/// Gold figurative construct labels (multi-label per utterance).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GoldConstruct {
    Metaphor,
    Idiom,
    RhetoricalQuestion,
    Hyperbole,
    Personification,
}

impl GoldConstruct {
    pub fn as_str(self) -> &'static str {
        match self {
            GoldConstruct::Metaphor => "metaphor",
            GoldConstruct::Idiom => "idiom",
            GoldConstruct::RhetoricalQuestion => "rhetorical_question",
            GoldConstruct::Hyperbole => "hyperbole",
            GoldConstruct::Personification => "personification",
        }
    }
}

impl FromStr for GoldConstruct {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().replace([' ', '-'], "_").as_str() {
            "metaphor" => Ok(GoldConstruct::Metaphor),
            "idiom" => Ok(GoldConstruct::Idiom),
            "rhetorical_question" => Ok(GoldConstruct::RhetoricalQuestion),
            "hyperbole" => Ok(GoldConstruct::Hyperbole),
            "personification" => Ok(GoldConstruct::Personification),
            other => Err(format!("unknown construct {other:?}")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Utterance {
    pub id: String,
    pub dialog_id: String,
    pub turn_index: u32,
    pub speaker: String,
    pub text: String,
    pub dialog_act: Option<DialogAct>,
    pub gold_figurative: Option<bool>,
    /// Non-empty only when `gold_figurative` is true.
    pub gold_literal_versions: Vec<String>,
    pub gold_construct_types: BTreeSet<GoldConstruct>,
}

impl Utterance {
    pub fn new(dialog_id: &str, turn_index: u32, speaker: &str, text: &str) -> Self {
        Utterance {
            id: utterance_id(dialog_id, turn_index),
            dialog_id: dialog_id.to_string(),
            turn_index,
            speaker: speaker.to_string(),
            text: text.to_string(),
            dialog_act: None,
            gold_figurative: None,
            gold_literal_versions: Vec::new(),
            gold_construct_types: BTreeSet::new(),
        }
    }
}

pub fn utterance_id(dialog_id: &str, turn_index: u32) -> String {
    format!("{dialog_id}:{turn_index}")
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dialog {
    pub id: String,
    pub utterances: Vec<Utterance>,
}

impl Dialog {
    /// Utterances strictly before the response at `response_index`.
    pub fn history(&self, response_index: usize) -> &[Utterance] {
        &self.utterances[..response_index.min(self.utterances.len())]
    }
}

#[derive(Clone, Debug)]
pub struct Corpus {
    pub name: String,
    dialogs: Vec<Dialog>,
    index: HashMap<String, (usize, usize)>,
}

impl PartialEq for Corpus {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.dialogs == other.dialogs
    }
}

impl Corpus {
    /// Validates id uniqueness, turn order and non-empty dialogs.
    pub fn new(name: &str, dialogs: Vec<Dialog>) -> Result<Self> {
        if dialogs.is_empty() {
            return Err(Error::EmptyCorpus(name.to_string()));
        }
        let mut index = HashMap::new();
        for (d, dialog) in dialogs.iter().enumerate() {
            if dialog.utterances.is_empty() {
                return Err(Error::Invalid(format!("dialog {:?} has no utterances", dialog.id)));
            }
            let mut prev: Option<u32> = None;
            for (u, utt) in dialog.utterances.iter().enumerate() {
                if index.insert(utt.id.clone(), (d, u)).is_some() {
                    return Err(Error::DuplicateId(utt.id.clone()));
                }
                if prev.is_some_and(|p| utt.turn_index <= p) {
                    return Err(Error::Invalid(format!(
                        "turn indices in dialog {:?} are not strictly increasing at {}",
                        dialog.id, utt.turn_index
                    )));
                }
                if !utt.gold_literal_versions.is_empty() && utt.gold_figurative != Some(true) {
                    return Err(Error::Invalid(format!("{}: literal versions on a non-figurative utterance", utt.id)));
                }
                prev = Some(utt.turn_index);
            }
        }
        Ok(Corpus {
            name: name.to_string(),
            dialogs,
            index,
        })
    }

    pub fn dialogs(&self) -> &[Dialog] {
        &self.dialogs
    }

    pub fn utterances(&self) -> impl Iterator<Item = &Utterance> {
        self.dialogs.iter().flat_map(|d| d.utterances.iter())
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    pub fn contains(&self, id: &str) -> bool {
        self.index.contains_key(id)
    }

    pub fn get(&self, id: &str) -> Option<&Utterance> {
        self.index.get(id).map(|&(d, u)| &self.dialogs[d].utterances[u])
    }

    /// Ids with `gold_figurative == Some(true)`.
    pub fn gold_figurative_ids(&self) -> BTreeSet<String> {
        self.utterances().filter(|u| u.gold_figurative == Some(true)).map(|u| u.id.clone()).collect()
    }

    pub fn write_tsv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for u in self.utterances() {
            writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}",
                u.dialog_id,
                u.turn_index,
                u.speaker,
                u.dialog_act.map_or("-", DialogAct::as_str),
                u.text
            )?;
        }
        Ok(())
    }

    /// Attach gold annotations read by [`parse_gold`]. Listed utterances
    /// become figurative, all others non-figurative.
    pub fn apply_gold<R: BufRead>(&mut self, reader: R, source_name: &str) -> Result<()> {
        let mut gold = parse_gold(reader, source_name)?;
        if let Some(id) = gold.keys().find(|id| !self.contains(id)) {
            return Err(Error::UnknownId(id.clone()));
        }
        for dialog in &mut self.dialogs {
            for u in &mut dialog.utterances {
                match gold.remove(&u.id) {
                    Some(record) => {
                        u.gold_figurative = Some(true);
                        u.gold_construct_types = record.construct_types;
                        u.gold_literal_versions = record.literal_versions;
                    }
                    None => {
                        u.gold_figurative = Some(false);
                        u.gold_construct_types.clear();
                        u.gold_literal_versions.clear();
                    }
                }
            }
        }
        Ok(())
    }
}

/// One gold annotation line.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GoldRecord {
    pub construct_types: BTreeSet<GoldConstruct>,
    pub literal_versions: Vec<String>,
}

/// Gold annotations: `utterance_id <TAB> types <TAB> literal_1 <TAB> literal_2`,
/// types comma-joined or `-`; trailing fields optional.
pub fn parse_gold<R: BufRead>(reader: R, source_name: &str) -> Result<BTreeMap<String, GoldRecord>> {
    let mut gold = BTreeMap::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let line_no = idx + 1;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() > 4 {
            return Err(Error::malformed(source_name, line_no, "expected utterance_id, types, literal_1, literal_2"));
        }
        let id = f[0].trim().to_string();
        let mut construct_types = BTreeSet::new();
        if let Some(t) = f.get(1).map(|s| s.trim()).filter(|s| !s.is_empty() && *s != "-") {
            for part in t.split(',') {
                construct_types.insert(part.trim().parse().map_err(|e: String| Error::malformed(source_name, line_no, e))?);
            }
        }
        let literal_versions =
            f.iter().skip(2).map(|s| s.trim()).filter(|s| !s.is_empty() && *s != "-").map(str::to_string).collect();
        if gold.insert(id.clone(), GoldRecord { construct_types, literal_versions }).is_some() {
            return Err(Error::malformed(source_name, line_no, format!("duplicate id {id:?}")));
        }
    }
    Ok(gold)
}

pub fn load_corpus<R: BufRead>(reader: R, name: &str) -> Result<Corpus> {
    let mut dialogs: Vec<Dialog> = Vec::new();
    let mut closed: BTreeSet<String> = BTreeSet::new();
    let mut ids: HashMap<String, usize> = HashMap::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let line_no = idx + 1;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let f: Vec<&str> = line.splitn(5, '\t').collect();
        if f.len() != 5 {
            return Err(Error::malformed(name, line_no, "expected dialog_id, turn_index, speaker, act, text"));
        }
        let dialog_id = f[0].trim();
        if dialog_id.is_empty() {
            return Err(Error::malformed(name, line_no, "empty dialog id"));
        }
        let turn: u32 =
            f[1].trim().parse().map_err(|_| Error::malformed(name, line_no, format!("bad turn index {:?}", f[1])))?;
        let act = match f[3].trim() {
            "-" | "" => None,
            a => Some(a.parse().map_err(|e: String| Error::malformed(name, line_no, e))?),
        };
        let mut utt = Utterance::new(dialog_id, turn, f[2].trim(), f[4]);
        utt.dialog_act = act;
        if let Some(first) = ids.insert(utt.id.clone(), line_no) {
            return Err(Error::malformed(
                name,
                line_no,
                format!("{} (first seen on line {first})", Error::DuplicateId(utt.id.clone())),
            ));
        }

        match dialogs.last_mut() {
            Some(d) if d.id == dialog_id => {
                let prev = d.utterances.last().map(|u| u.turn_index).unwrap_or(0);
                if turn <= prev {
                    return Err(Error::malformed(
                        name,
                        line_no,
                        format!("turn index {turn} does not increase in dialog {dialog_id:?}"),
                    ));
                }
                d.utterances.push(utt);
            }
            _ => {
                if closed.contains(dialog_id) {
                    return Err(Error::malformed(name, line_no, format!("dialog {dialog_id:?} is not contiguous")));
                }
                if let Some(d) = dialogs.last() {
                    closed.insert(d.id.clone());
                }
                dialogs.push(Dialog {
                    id: dialog_id.to_string(),
                    utterances: vec![utt],
                });
            }
        }
    }
    Corpus::new(name, dialogs)
}

/// (fraction among figurative utterances, fraction among all utterances).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ActShare {
    pub among_figurative: f64,
    pub overall: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StatsReport {
    pub utterances: usize,
    pub dialogs: usize,
    pub figurative_utterances: usize,
    pub figurative_dialogs: usize,
    pub utterance_level_freq: f64,
    pub dialog_level_freq: f64,
    /// dialog-level / utterance-level; `None` when nothing is figurative.
    pub amplification: Option<f64>,
    /// Multi-label, so values may sum past 1.
    pub construct_type_freqs: BTreeMap<GoldConstruct, f64>,
    pub dialog_act_crosstab: Option<BTreeMap<DialogAct, ActShare>>,
}

fn check_ids(corpus: &Corpus, ids: &BTreeSet<String>) -> Result<()> {
    match ids.iter().find(|id| !corpus.contains(id)) {
        Some(id) => Err(Error::UnknownId(id.clone())),
        None => Ok(()),
    }
}

pub fn figurative_stats(corpus: &Corpus, figurative_ids: &BTreeSet<String>) -> Result<StatsReport> {
    check_ids(corpus, figurative_ids)?;
    let utterances = corpus.len();
    let dialogs = corpus.dialogs().len();
    let figurative_dialogs =
        corpus.dialogs().iter().filter(|d| d.utterances.iter().any(|u| figurative_ids.contains(&u.id))).count();
    let utterance_level_freq = figurative_ids.len() as f64 / utterances as f64;
    let dialog_level_freq = figurative_dialogs as f64 / dialogs as f64;
    let amplification = (utterance_level_freq > 0.0).then(|| dialog_level_freq / utterance_level_freq);

    let mut construct_type_freqs = BTreeMap::new();
    if !figurative_ids.is_empty() {
        for id in figurative_ids {
            for t in &corpus.get(id).expect("checked").gold_construct_types {
                *construct_type_freqs.entry(*t).or_insert(0.0) += 1.0;
            }
        }
        for v in construct_type_freqs.values_mut() {
            *v /= figurative_ids.len() as f64;
        }
    }

    let dialog_act_crosstab = if corpus.utterances().all(|u| u.dialog_act.is_some()) {
        Some(act_crosstab(corpus, figurative_ids)?)
    } else {
        None
    };

    Ok(StatsReport {
        utterances,
        dialogs,
        figurative_utterances: figurative_ids.len(),
        figurative_dialogs,
        utterance_level_freq,
        dialog_level_freq,
        amplification,
        construct_type_freqs,
        dialog_act_crosstab,
    })
}

/// Per-act share among figurative utterances and among all utterances.
/// With no figurative utterances the first column is all zero.
pub fn act_crosstab(corpus: &Corpus, figurative_ids: &BTreeSet<String>) -> Result<BTreeMap<DialogAct, ActShare>> {
    check_ids(corpus, figurative_ids)?;
    let missing = corpus.utterances().filter(|u| u.dialog_act.is_none()).count();
    if missing > 0 {
        return Err(Error::MissingDialogActs { missing });
    }
    let mut fig = BTreeMap::new();
    let mut all = BTreeMap::new();
    for u in corpus.utterances() {
        let act = u.dialog_act.expect("checked");
        *all.entry(act).or_insert(0usize) += 1;
        if figurative_ids.contains(&u.id) {
            *fig.entry(act).or_insert(0usize) += 1;
        }
    }
    let n_all = corpus.len() as f64;
    let n_fig = figurative_ids.len() as f64;
    Ok(DialogAct::ALL
        .iter()
        .map(|act| {
            let f = fig.get(act).copied().unwrap_or(0) as f64;
            let a = all.get(act).copied().unwrap_or(0) as f64;
            (
                *act,
                ActShare {
                    among_figurative: if n_fig > 0.0 { f / n_fig } else { 0.0 },
                    overall: a / n_all,
                },
            )
        })
        .collect())
}
