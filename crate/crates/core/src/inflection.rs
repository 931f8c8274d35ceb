//! Minimal English morphology for template expansion.
//!
//! Two closed pronoun paradigms plus verb inflection. Irregular verbs come
//! from a bundled table; everything else goes through a handful of
//! orthographic rules (e-drop, consonant doubling, y-to-i, sibilant `-es`).

use std::collections::{BTreeMap, BTreeSet};
use std::io::BufRead;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const BUNDLED_IRREGULAR: &str = include_str!("../data/irregular_verbs.tsv");
const BUNDLED_REGULAR: &str = include_str!("../data/regular_verbs.txt");

const POSSESSIVE: [&str; 7] = ["my", "your", "his", "her", "its", "our", "their"];
const OBJECTIVE: [&str; 7] = ["me", "you", "him", "her", "it", "us", "them"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum VerbForm {
    Base,
    ThirdSingular,
    Past,
    PastParticiple,
    PresentParticiple,
}

impl VerbForm {
    /// All forms in expansion order.
    pub const ALL: [VerbForm; 5] = [
        VerbForm::Base,
        VerbForm::ThirdSingular,
        VerbForm::Past,
        VerbForm::PastParticiple,
        VerbForm::PresentParticiple,
    ];
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SlotKind {
    Possessive,
    Objective,
}

/// Stored forms of one irregular verb.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IrregularVerb {
    pub past: String,
    pub past_participle: String,
    pub third_singular: String,
    pub present_participle: String,
}

#[derive(Clone, Debug)]
pub struct InflectionTables {
    irregular_verbs: BTreeMap<String, IrregularVerb>,
    /// Regular lemmas that count as verbs when they open a template.
    regular_verbs: BTreeSet<String>,
    possessive: Vec<String>,
    objective: Vec<String>,
}

impl Default for InflectionTables {
    fn default() -> Self {
        Self::bundled()
    }
}

impl InflectionTables {
    /// Tables built from the resources shipped with the crate.
    pub fn bundled() -> Self {
        let irregular = parse_irregular_table(BUNDLED_IRREGULAR.as_bytes(), "irregular_verbs.tsv")
            .expect("bundled irregular verb table is well formed");
        let regular = parse_lemma_list(BUNDLED_REGULAR.as_bytes()).expect("bundled verb list");
        Self::new(irregular, regular)
    }

    pub fn new(irregular_verbs: BTreeMap<String, IrregularVerb>, regular_verbs: BTreeSet<String>) -> Self {
        InflectionTables {
            irregular_verbs,
            regular_verbs,
            possessive: POSSESSIVE.iter().map(|s| s.to_string()).collect(),
            objective: OBJECTIVE.iter().map(|s| s.to_string()).collect(),
        }
    }

    /// Replace the irregular table, keeping the bundled regular lemma list.
    pub fn with_irregular_table<R: BufRead>(reader: R, source_name: &str) -> Result<Self> {
        let irregular = parse_irregular_table(reader, source_name)?;
        let regular = parse_lemma_list(BUNDLED_REGULAR.as_bytes())?;
        Ok(Self::new(irregular, regular))
    }

    pub fn irregular_verbs(&self) -> &BTreeMap<String, IrregularVerb> {
        &self.irregular_verbs
    }

    pub fn is_known_verb(&self, lemma: &str) -> bool {
        self.irregular_verbs.contains_key(lemma) || self.regular_verbs.contains(lemma)
    }

    pub fn inflect_verb(&self, lemma: &str, form: VerbForm) -> String {
        if form == VerbForm::Base {
            return lemma.to_string();
        }
        if let Some(irr) = self.irregular_verbs.get(lemma) {
            return match form {
                VerbForm::Base => unreachable!(),
                VerbForm::ThirdSingular => irr.third_singular.clone(),
                VerbForm::Past => irr.past.clone(),
                VerbForm::PastParticiple => irr.past_participle.clone(),
                VerbForm::PresentParticiple => irr.present_participle.clone(),
            };
        }
        regular_form(lemma, form)
    }

    /// Distinct inflections of `lemma` in [`VerbForm::ALL`] order; a form
    /// whose spelling repeats an earlier one is dropped.
    pub fn verb_paradigm(&self, lemma: &str) -> Vec<(VerbForm, String)> {
        let mut out: Vec<(VerbForm, String)> = Vec::with_capacity(5);
        for form in VerbForm::ALL {
            let s = self.inflect_verb(lemma, form);
            if !out.iter().any(|(_, seen)| *seen == s) {
                out.push((form, s));
            }
        }
        out
    }

    pub fn pronoun_forms(&self, kind: SlotKind) -> &[String] {
        match kind {
            SlotKind::Possessive => &self.possessive,
            SlotKind::Objective => &self.objective,
        }
    }
}

fn parse_irregular_table<R: BufRead>(reader: R, source_name: &str) -> Result<BTreeMap<String, IrregularVerb>> {
    let mut table = BTreeMap::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let line_no = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split('\t').map(str::trim).collect();
        if fields.len() != 5 || fields.iter().any(|f| f.is_empty() || f.contains(char::is_whitespace)) {
            return Err(Error::malformed(
                source_name,
                line_no,
                "expected 5 single-token fields: lemma, past, past_participle, third_singular, present_participle",
            ));
        }
        let lemma = fields[0].to_lowercase();
        let verb = IrregularVerb {
            past: fields[1].to_lowercase(),
            past_participle: fields[2].to_lowercase(),
            third_singular: fields[3].to_lowercase(),
            present_participle: fields[4].to_lowercase(),
        };
        if table.insert(lemma.clone(), verb).is_some() {
            return Err(Error::malformed(source_name, line_no, format!("duplicate lemma {lemma:?}")));
        }
    }
    Ok(table)
}

fn parse_lemma_list<R: BufRead>(reader: R) -> Result<BTreeSet<String>> {
    let mut out = BTreeSet::new();
    for line in reader.lines() {
        let line = line?;
        let t = line.trim();
        if !t.is_empty() && !t.starts_with('#') {
            out.insert(t.to_lowercase());
        }
    }
    Ok(out)
}

fn is_vowel(c: char) -> bool {
    matches!(c, 'a' | 'e' | 'i' | 'o' | 'u')
}

/// Short single-syllable consonant-vowel-consonant lemmas double their final
/// consonant before a vowel suffix (stop -> stopped).
fn doubles_final_consonant(lemma: &str) -> bool {
    let chars: Vec<char> = lemma.chars().collect();
    let n = chars.len();
    if !(3..=4).contains(&n) || !chars.iter().all(|c| c.is_ascii_lowercase()) {
        return false;
    }
    let (c1, v, c2) = (chars[n - 3], chars[n - 2], chars[n - 1]);
    if is_vowel(c1) || !is_vowel(v) || is_vowel(c2) || matches!(c2, 'w' | 'x' | 'y') {
        return false;
    }
    // one vowel group means one syllable
    let groups = chars
        .iter()
        .zip(std::iter::once(&' ').chain(chars.iter()))
        .filter(|(c, prev)| is_vowel(**c) && !is_vowel(**prev))
        .count();
    groups == 1
}

fn consonant_y(lemma: &str) -> bool {
    let mut it = lemma.chars().rev();
    matches!((it.next(), it.next()), (Some('y'), Some(p)) if !is_vowel(p))
}

fn regular_form(lemma: &str, form: VerbForm) -> String {
    if lemma.is_empty() {
        return String::new();
    }
    match form {
        VerbForm::Base => lemma.to_string(),
        VerbForm::ThirdSingular => {
            if ["s", "x", "z", "ch", "sh"].iter().any(|s| lemma.ends_with(s)) {
                format!("{lemma}es")
            } else if consonant_y(lemma) {
                format!("{}ies", &lemma[..lemma.len() - 1])
            } else {
                format!("{lemma}s")
            }
        }
        VerbForm::Past | VerbForm::PastParticiple => {
            if lemma.ends_with('e') {
                format!("{lemma}d")
            } else if consonant_y(lemma) {
                format!("{}ied", &lemma[..lemma.len() - 1])
            } else if doubles_final_consonant(lemma) {
                let last = lemma.chars().last().unwrap();
                format!("{lemma}{last}ed")
            } else {
                format!("{lemma}ed")
            }
        }
        VerbForm::PresentParticiple => {
            if let Some(stem) = lemma.strip_suffix("ie") {
                format!("{stem}ying")
            } else if lemma.ends_with("ee") || lemma.ends_with("oe") || lemma.ends_with("ye") || lemma == "be" {
                format!("{lemma}ing")
            } else if let Some(stem) = lemma.strip_suffix('e') {
                if stem.is_empty() {
                    format!("{lemma}ing")
                } else {
                    format!("{stem}ing")
                }
            } else if doubles_final_consonant(lemma) {
                let last = lemma.chars().last().unwrap();
                format!("{lemma}{last}ing")
            } else {
                format!("{lemma}ing")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn tables() -> InflectionTables {
        InflectionTables::bundled()
    }

    #[test]
    fn fill_present_participle() {
        assert_eq!(tables().inflect_verb("fill", VerbForm::PresentParticiple), "filling");
    }

    #[test]
    fn walk_past() {
        assert_eq!(tables().inflect_verb("walk", VerbForm::Past), "walked");
    }

    #[test]
    fn bite_from_irregular_table() {
        let t = tables();
        assert_eq!(t.inflect_verb("bite", VerbForm::PastParticiple), "bitten");
        assert_eq!(t.inflect_verb("bite", VerbForm::Past), "bit");
        assert_eq!(t.inflect_verb("bite", VerbForm::ThirdSingular), "bites");
        assert_eq!(t.inflect_verb("bite", VerbForm::PresentParticiple), "biting");
    }

    #[test]
    fn regular_spelling_rules() {
        let t = tables();
        let cases = [
            ("stop", VerbForm::Past, "stopped"),
            ("stop", VerbForm::PresentParticiple, "stopping"),
            ("face", VerbForm::Past, "faced"),
            ("face", VerbForm::PresentParticiple, "facing"),
            ("cry", VerbForm::ThirdSingular, "cries"),
            ("cry", VerbForm::Past, "cried"),
            ("cry", VerbForm::PresentParticiple, "crying"),
            ("play", VerbForm::Past, "played"),
            ("play", VerbForm::ThirdSingular, "plays"),
            ("push", VerbForm::ThirdSingular, "pushes"),
            ("fix", VerbForm::ThirdSingular, "fixes"),
            ("fix", VerbForm::Past, "fixed"),
            ("watch", VerbForm::ThirdSingular, "watches"),
            ("buzz", VerbForm::ThirdSingular, "buzzes"),
            ("die", VerbForm::PresentParticiple, "dying"),
            ("agree", VerbForm::PresentParticiple, "agreeing"),
            ("toe", VerbForm::PresentParticiple, "toeing"),
            ("open", VerbForm::Past, "opened"),
            ("visit", VerbForm::PresentParticiple, "visiting"),
            ("beat", VerbForm::PresentParticiple, "beating"),
            ("bow", VerbForm::Past, "bowed"),
        ];
        for (lemma, form, want) in cases {
            assert_eq!(t.inflect_verb(lemma, form), want, "{lemma} {form:?}");
        }
    }

    #[test]
    fn unknown_lemma_is_regular() {
        let t = tables();
        assert!(!t.is_known_verb("frobnicate"));
        assert_eq!(t.inflect_verb("frobnicate", VerbForm::Past), "frobnicated");
    }

    #[test]
    fn pronoun_paradigms() {
        let t = tables();
        assert_eq!(t.pronoun_forms(SlotKind::Possessive), ["my", "your", "his", "her", "its", "our", "their"]);
        assert_eq!(t.pronoun_forms(SlotKind::Objective), ["me", "you", "him", "her", "it", "us", "them"]);
        assert_eq!(t.pronoun_forms(SlotKind::Objective), tables().pronoun_forms(SlotKind::Objective));
    }

    #[test]
    fn irregular_entries_round_trip() {
        let t = tables();
        assert!(t.irregular_verbs().len() >= 200);
        for (lemma, irr) in t.irregular_verbs() {
            assert_eq!(&t.inflect_verb(lemma, VerbForm::Base), lemma);
            assert_eq!(t.inflect_verb(lemma, VerbForm::Past), irr.past);
        }
    }

    #[test]
    fn paradigm_collapses_repeats() {
        let t = tables();
        let forms: Vec<String> = t.verb_paradigm("kick").into_iter().map(|(_, s)| s).collect();
        assert_eq!(forms, ["kick", "kicks", "kicked", "kicking"]);
        assert_eq!(t.verb_paradigm("bite").len(), 5);
        assert_eq!(t.verb_paradigm("put").len(), 3);
    }

    #[test]
    fn rejects_short_table_rows() {
        let err = InflectionTables::with_irregular_table("go\twent\n".as_bytes(), "verbs.tsv").unwrap_err();
        assert!(err.to_string().starts_with("verbs.tsv:1:"), "{err}");
    }

    proptest! {
        #[test]
        fn base_is_identity(lemma in "[a-z]{1,12}") {
            prop_assert_eq!(tables().inflect_verb(&lemma, VerbForm::Base), lemma);
        }

        #[test]
        fn regular_forms_are_single_tokens(lemma in "[a-z]{1,12}") {
            for form in VerbForm::ALL {
                let s = regular_form(&lemma, form);
                prop_assert!(!s.is_empty());
                prop_assert!(!s.contains(char::is_whitespace));
            }
        }
    }
}
