//! Subcommand implementations. Every command validates its paths first,
//! computes everything in memory, then writes outputs in one go.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use figlit::corpus::{self, Corpus};
use figlit::detector::{self, DetectionResult, DetectionSummary, MetaphorScores};
use figlit::inflection::InflectionTables;
use figlit::lexicon::{self, ConstructType, ReplacementDictionary};
use figlit::literalizer::{self, ContextMode, RewriteRecord};
use figlit::metrics::{self, ConditionRun, References, Smoothing};
use figlit::{fixtures, Error};
use log::{info, warn};
use serde::Serialize;

use crate::{
    BuildLexiconArgs, Command, DetectArgs, DictionarySource, EvaluateCommand, GenFixturesArgs, LiteralizeArgs,
    SourceArg, StatsArgs,
};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Pipeline(#[from] Error),
    /// Bad arguments or unusable paths.
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Pipeline(e) if e.is_validation() => 1,
            CliError::Usage(_) => 1,
            CliError::Pipeline(_) | CliError::Io { .. } => 2,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::BuildLexicon(a) => build_lexicon(a),
        Command::Detect(a) => detect(a),
        Command::Literalize(a) => literalize(a),
        Command::Stats(a) => stats(a),
        Command::Evaluate(a) => evaluate(a.command),
        Command::GenFixtures(a) => gen_fixtures(a),
    }
}

// ---- path handling ----

fn check_inputs<'a>(inputs: impl IntoIterator<Item = &'a Path>) -> Result<()> {
    for p in inputs {
        if !p.is_file() {
            return Err(CliError::Usage(format!("input {} does not exist or is not a file", p.display())));
        }
    }
    Ok(())
}

fn same_file(a: &Path, b: &Path) -> bool {
    match (fs::canonicalize(a), fs::canonicalize(b)) {
        (Ok(a), Ok(b)) => a == b,
        _ => false,
    }
}

/// An output must not clobber an input and its directory must exist.
fn check_output(out: &Path, inputs: &[&Path]) -> Result<()> {
    if out.is_dir() {
        return Err(CliError::Usage(format!("output {} is a directory", out.display())));
    }
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        if !parent.is_dir() {
            return Err(CliError::Usage(format!("output directory {} does not exist", parent.display())));
        }
    }
    if inputs.iter().any(|i| same_file(i, out)) {
        return Err(CliError::Usage(format!("output {} would overwrite an input", out.display())));
    }
    Ok(())
}

fn check_outputs(outs: &[&Path], inputs: &[&Path]) -> Result<()> {
    for (i, out) in outs.iter().enumerate() {
        check_output(out, inputs)?;
        if outs[..i].iter().any(|o| o == out || same_file(o, out)) {
            return Err(CliError::Usage(format!("output {} given twice", out.display())));
        }
    }
    Ok(())
}

fn read_text(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
    String::from_utf8(bytes).map_err(|e| CliError::Usage(format!("{}: not valid UTF-8 ({e})", path.display())))
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn name(path: &Path) -> String {
    path.display().to_string()
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

/// JSON to `out` when given, stdout otherwise.
fn emit_json<T: Serialize>(value: &T, out: Option<&Path>) -> Result<()> {
    let text = json(value);
    match out {
        Some(p) => write_bytes(p, text.as_bytes()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn in_memory<F>(f: F) -> Vec<u8>
where
    F: FnOnce(&mut Vec<u8>) -> std::io::Result<()>,
{
    let mut buf = Vec::new();
    f(&mut buf).expect("writing to memory cannot fail");
    buf
}

// ---- loaders ----

fn load_tables(verbs: Option<&Path>) -> Result<InflectionTables> {
    match verbs {
        Some(p) => Ok(InflectionTables::with_irregular_table(read_text(p)?.as_bytes(), &name(p))?),
        None => Ok(InflectionTables::bundled()),
    }
}

fn compile_lexicon(path: &Path, verbs: Option<&Path>) -> Result<lexicon::DictionaryBuild> {
    let tables = load_tables(verbs)?;
    let entries = lexicon::parse_lexicon(read_text(path)?.as_bytes(), &name(path))?;
    let build = lexicon::build_dictionary(entries, &tables)?;
    for w in &build.warnings {
        warn!("{w}");
    }
    Ok(build)
}

fn load_dictionary(src: &DictionarySource) -> Result<ReplacementDictionary> {
    match (&src.lexicon, &src.dictionary) {
        (Some(lex), _) => Ok(compile_lexicon(lex, src.verbs.as_deref())?.dictionary),
        (None, Some(dict)) => {
            if src.verbs.is_some() {
                warn!("--verbs has no effect on a compiled dictionary");
            }
            Ok(ReplacementDictionary::read_tsv(read_text(dict)?.as_bytes(), &name(dict))?)
        }
        (None, None) => Err(CliError::Usage("one of --lexicon or --dictionary is required".into())),
    }
}

fn dictionary_inputs(src: &DictionarySource) -> Vec<&Path> {
    [&src.lexicon, &src.dictionary, &src.verbs].into_iter().flatten().map(PathBuf::as_path).collect()
}

fn load_corpus_file(path: &Path) -> Result<Corpus> {
    Ok(corpus::load_corpus(read_text(path)?.as_bytes(), &name(path))?)
}

/// Detection records whose ids must all belong to `corpus`.
fn load_detections(path: &Path, corpus: &Corpus) -> Result<DetectionResult> {
    let result = detector::read_detections(read_text(path)?.as_bytes(), &name(path))?;
    if let Some(id) = result.figurative_utterances.iter().find(|id| !corpus.contains(id)) {
        return Err(Error::UnknownId(id.clone()).into());
    }
    Ok(result)
}

// ---- build-lexicon ----

#[derive(Serialize)]
struct LexiconSummary {
    entries: usize,
    patterns: usize,
    type_histogram: BTreeMap<ConstructType, usize>,
    type_percentages: BTreeMap<ConstructType, f64>,
    warnings: usize,
    gloss_collisions: usize,
}

fn build_lexicon(a: BuildLexiconArgs) -> Result<()> {
    let inputs: Vec<&Path> = [Some(a.lexicon.as_path()), a.verbs.as_deref()].into_iter().flatten().collect();
    check_inputs(inputs.iter().copied())?;
    check_output(&a.out, &inputs)?;

    let build = compile_lexicon(&a.lexicon, a.verbs.as_deref())?;
    let dict = &build.dictionary;
    let matcher = detector::build_matcher(dict)?;
    let collisions = detector::gloss_collisions(dict, &matcher);
    for (id, surface) in &collisions {
        warn!("gloss of entry {id} contains dictionary surface {surface:?}");
    }

    write_bytes(&a.out, &in_memory(|b| dict.write_tsv(b)))?;
    emit_json(
        &LexiconSummary {
            entries: dict.entry_count(),
            patterns: dict.patterns().len(),
            type_histogram: dict.type_histogram().clone(),
            type_percentages: dict.type_percentages(),
            warnings: build.warnings.len(),
            gloss_collisions: collisions.len(),
        },
        None,
    )
}

// ---- detect ----

#[derive(Serialize)]
struct DetectReport {
    threshold: f64,
    scores_supplied: bool,
    #[serde(flatten)]
    summary: DetectionSummary,
    unknown_score_ids: usize,
}

fn detect(a: DetectArgs) -> Result<()> {
    detector::check_threshold(a.threshold)?;
    let mut inputs = vec![a.corpus.as_path()];
    inputs.extend(dictionary_inputs(&a.dict));
    inputs.extend(a.scores.as_deref());
    check_inputs(inputs.iter().copied())?;
    let outs: Vec<&Path> = [Some(a.out.as_path()), a.summary.as_deref()].into_iter().flatten().collect();
    check_outputs(&outs, &inputs)?;

    let corpus = load_corpus_file(&a.corpus)?;
    let dict = load_dictionary(&a.dict)?;
    let scores = match &a.scores {
        Some(p) => Some(MetaphorScores::parse(read_text(p)?.as_bytes(), &name(p))?),
        None => None,
    };
    let matcher = detector::build_matcher(&dict)?;
    info!("matching {} utterances against {} patterns", corpus.len(), matcher.pattern_count());
    let detection = detector::detect_all(&corpus, &matcher, scores.as_ref(), a.threshold)?;
    if !detection.unknown_score_ids.is_empty() {
        warn!(
            "{} score id(s) not in the corpus were ignored, e.g. {:?}",
            detection.unknown_score_ids.len(),
            detection.unknown_score_ids[0]
        );
    }

    write_bytes(&a.out, &in_memory(|b| detector::write_detections(&detection.result, &corpus, b)))?;
    let report = DetectReport {
        threshold: a.threshold,
        scores_supplied: scores.is_some(),
        summary: detection.summary,
        unknown_score_ids: detection.unknown_score_ids.len(),
    };
    if let Some(p) = &a.summary {
        write_bytes(p, json(&report).as_bytes())?;
    }
    emit_json(&report, None)
}

// ---- literalize ----

#[derive(Serialize)]
struct LiteralizeSummary {
    mode: ContextMode,
    utterances: usize,
    eligible_utterances: usize,
    rewritten_utterances: usize,
    replacements: usize,
}

fn literalize(a: LiteralizeArgs) -> Result<()> {
    let audit = a.audit.clone().unwrap_or_else(|| {
        let mut s = a.out.clone().into_os_string();
        s.push(".audit");
        PathBuf::from(s)
    });
    let mut inputs = vec![a.corpus.as_path()];
    inputs.extend(dictionary_inputs(&a.dict));
    inputs.extend(a.detections.as_deref());
    inputs.extend(a.gold.as_deref());
    check_inputs(inputs.iter().copied())?;
    check_outputs(&[&a.out, &audit], &inputs)?;

    let mut corpus = load_corpus_file(&a.corpus)?;
    let dict = load_dictionary(&a.dict)?;
    let mut detection = match &a.detections {
        Some(p) => load_detections(p, &corpus)?,
        None => {
            let matcher = detector::build_matcher(&dict)?;
            detector::detect_all(&corpus, &matcher, None, detector::DEFAULT_THRESHOLD)?.result
        }
    };
    let mut eligible: Option<BTreeSet<String>> = None;
    if let Some(g) = &a.gold {
        corpus.apply_gold(read_text(g)?.as_bytes(), &name(g))?;
        let gold = corpus.gold_figurative_ids();
        detection.spans.retain(|s| gold.contains(&s.utterance_id));
        eligible = Some(gold);
    }

    let mode = ContextMode::from(a.mode);
    let mut records: Vec<RewriteRecord> = Vec::with_capacity(corpus.len());
    for dialog in corpus.dialogs() {
        records.extend(literalizer::literalize_dialog(dialog, &detection, &dict, mode)?);
    }

    let eligible_utterances = corpus
        .dialogs()
        .iter()
        .flat_map(|d| {
            let last = d.utterances.len() - 1;
            d.utterances.iter().enumerate().filter(move |(i, _)| mode == ContextMode::Anywhere || *i == last)
        })
        .filter(|(_, u)| eligible.as_ref().is_none_or(|g| g.contains(&u.id)))
        .count();
    let summary = LiteralizeSummary {
        mode,
        utterances: records.len(),
        eligible_utterances,
        rewritten_utterances: records.iter().filter(|r| !r.replacements.is_empty()).count(),
        replacements: records.iter().map(|r| r.replacements.len()).sum(),
    };

    write_bytes(&a.out, &in_memory(|b| literalizer::write_rewrites(&records, b)))?;
    write_bytes(&audit, &in_memory(|b| literalizer::write_audit(&records, b)))?;
    emit_json(&summary, None)
}

// ---- stats ----

fn stats(a: StatsArgs) -> Result<()> {
    let inputs: Vec<&Path> =
        [Some(a.corpus.as_path()), a.gold.as_deref(), a.detections.as_deref()].into_iter().flatten().collect();
    check_inputs(inputs.iter().copied())?;
    if let Some(out) = &a.out {
        check_output(out, &inputs)?;
    }

    let mut corpus = load_corpus_file(&a.corpus)?;
    let figurative = match (&a.gold, &a.detections) {
        (Some(g), _) => {
            corpus.apply_gold(read_text(g)?.as_bytes(), &name(g))?;
            corpus.gold_figurative_ids()
        }
        (None, Some(d)) => load_detections(d, &corpus)?.figurative_utterances,
        (None, None) => return Err(CliError::Usage("one of --gold or --detections is required".into())),
    };
    let report = corpus::figurative_stats(&corpus, &figurative)?;
    if report.dialog_act_crosstab.is_none() {
        info!("corpus lacks dialog acts on some utterances; crosstab omitted");
    }
    emit_json(&report, a.out.as_deref())
}

// ---- evaluate ----

fn read_system_runs(systems: &[(String, PathBuf)], label: &str) -> Result<ConditionRun> {
    let mut run = ConditionRun::new();
    for (sys, path) in systems {
        let responses = metrics::read_responses(read_text(path)?.as_bytes(), &name(path))?;
        if run.insert(sys.clone(), responses).is_some() {
            return Err(CliError::Usage(format!("system {sys:?} given twice for {label}")));
        }
    }
    Ok(run)
}

fn read_refs(path: &Path) -> Result<References> {
    Ok(metrics::read_references(read_text(path)?.as_bytes(), &name(path))?)
}

#[derive(Serialize)]
struct RecallReport {
    source: &'static str,
    detected: usize,
    gold: usize,
    true_positives: usize,
    recall: f64,
    precision: Option<f64>,
}

#[derive(Serialize)]
struct ScoreReport {
    smoothing: Smoothing,
    systems: BTreeMap<String, metrics::Scores>,
}

fn evaluate(command: EvaluateCommand) -> Result<()> {
    match command {
        EvaluateCommand::Compare { references, before, after, smoothing, out } => {
            let mut inputs = vec![references.as_path()];
            inputs.extend(before.iter().chain(&after).map(|(_, p)| p.as_path()));
            check_inputs(inputs.iter().copied())?;
            if let Some(o) = &out {
                check_output(o, &inputs)?;
            }
            let refs = read_refs(&references)?;
            let b = read_system_runs(&before, "--before")?;
            let a = read_system_runs(&after, "--after")?;
            let report = metrics::compare_conditions(&b, &a, &refs, smoothing.into())?;
            emit_json(&report, out.as_deref())
        }
        EvaluateCommand::Score { references, responses, smoothing, out } => {
            let mut inputs = vec![references.as_path()];
            inputs.extend(responses.iter().map(|(_, p)| p.as_path()));
            check_inputs(inputs.iter().copied())?;
            if let Some(o) = &out {
                check_output(o, &inputs)?;
            }
            let refs = read_refs(&references)?;
            let run = read_system_runs(&responses, "--responses")?;
            let smoothing: Smoothing = smoothing.into();
            let systems = run
                .iter()
                .map(|(sys, r)| Ok((sys.clone(), metrics::score_system(r, &refs, smoothing)?)))
                .collect::<std::result::Result<_, Error>>()?;
            emit_json(&ScoreReport { smoothing, systems }, out.as_deref())
        }
        EvaluateCommand::Recall { detections, gold, source, out } => {
            let inputs = [detections.as_path(), gold.as_path()];
            check_inputs(inputs)?;
            if let Some(o) = &out {
                check_output(o, &inputs)?;
            }
            let result = detector::read_detections(read_text(&detections)?.as_bytes(), &name(&detections))?;
            let gold_ids: BTreeSet<String> =
                corpus::parse_gold(read_text(&gold)?.as_bytes(), &name(&gold))?.into_keys().collect();
            let (label, detected) = match source {
                SourceArg::Idiom => ("idiom", result.idiom_utterances),
                SourceArg::Metaphor => ("metaphor", result.metaphor_utterances),
                SourceArg::All => ("all", result.figurative_utterances),
            };
            let report = RecallReport {
                source: label,
                detected: detected.len(),
                gold: gold_ids.len(),
                true_positives: detected.intersection(&gold_ids).count(),
                recall: metrics::detection_recall(&detected, &gold_ids)?,
                precision: metrics::detection_precision(&detected, &gold_ids),
            };
            emit_json(&report, out.as_deref())
        }
    }
}

// ---- gen-fixtures ----

fn gen_fixtures(a: GenFixturesArgs) -> Result<()> {
    if !a.out.is_dir() {
        return Err(CliError::Usage(format!("output directory {} does not exist", a.out.display())));
    }
    if a.dialogs == 0 || a.patterns == 0 {
        return Err(CliError::Usage("--dialogs and --patterns must be positive".into()));
    }
    for (file, contents) in fixtures::fixture_set(a.seed, a.dialogs, a.patterns) {
        let path = a.out.join(&file);
        write_bytes(&path, contents.as_bytes())?;
        println!("{}", path.display());
    }
    Ok(())
}
