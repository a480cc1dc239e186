use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use pyloc_core::abbrev::{abbreviate_term, resolve_collisions, LanguageProfile, Proposal};
use pyloc_core::backends::{
    BackendError, FixtureStore, GenerationBackend, RecordingBackend, ReplayBackend, RetryPolicy,
    TranslationBackend,
};
use pyloc_core::expander::{expand_terms, split_identifier, BatchOptions, ExpansionSet};
use pyloc_core::lexicon::{build_lexicon, lexicon_to_tsv, merge_lexicons, parse_lexicon_tsv, Lexicon, SENTINEL};
use pyloc_core::metrics::{evaluate, parse_eval_tsv, MetricConfig};
use pyloc_core::pipeline::{run_pipeline, PipelineBackends, PipelineConfig, PipelineError, Resources};
use pyloc_core::prompts::{ExpansionStrategy, PromptTemplates};
use pyloc_core::rewriter::{exec_check, rewrite_source, round_trip_hazards, Direction, HarnessError};
use pyloc_core::termtrans::{
    postprocess_term, translate_expansions, TermTransError, TranslateOptions, TranslationMethod,
    TranslatorBackend,
};
use pyloc_core::{scan, KeywordSet, Language};

use crate::{BackendArgs, CodeArgs, Command};

pub const USAGE: i32 = 1;
pub const INVALID: i32 = 2;
pub const BACKEND: i32 = 3;
pub const ROUND_TRIP: i32 = 4;

pub struct Failure {
    pub code: i32,
    pub message: String,
}

fn fail(code: i32, message: impl Display) -> Failure {
    Failure { code, message: message.to_string() }
}

fn invalid(message: impl Display) -> Failure {
    fail(INVALID, message)
}

impl From<BackendError> for Failure {
    fn from(e: BackendError) -> Self {
        match e {
            BackendError::FixtureFile(_) | BackendError::Config(_) => invalid(e),
            _ => fail(BACKEND, e),
        }
    }
}

impl From<TermTransError> for Failure {
    fn from(e: TermTransError) -> Self {
        match e {
            TermTransError::Backend(b) => b.into(),
            other => invalid(other),
        }
    }
}

type CmdResult = Result<(), Failure>;

pub fn run(command: Command) -> CmdResult {
    match command {
        Command::Expand { terms, strategy, split_only, out, backend } => {
            expand(&terms, &strategy, split_only, out.as_deref(), &backend)
        }
        Command::TranslateTerms { expansions, lang, method, glosses, reference_lexicon, out, backend } => {
            translate_terms(&expansions, &lang, &method, glosses, reference_lexicon, out.as_deref(), &backend)
        }
        Command::Abbreviate { lexicon, profile, out } => abbreviate(&lexicon, profile.as_deref(), &out),
        Command::BuildLexicon {
            terms,
            lang,
            strategy,
            method,
            abbreviate,
            glosses,
            reference_lexicon,
            out,
            report,
            backend,
        } => {
            let mut config = match &backend.config {
                Some(path) => PipelineConfig::load(path).map_err(invalid)?,
                None => {
                    let lang = lang.as_deref().ok_or_else(|| fail(USAGE, "--lang or --config is required"))?;
                    PipelineConfig::new(Language::from_code_or_name(lang))
                }
            };
            if let Some(lang) = &lang {
                config.language = Language::from_code_or_name(lang);
            }
            if let Some(s) = &strategy {
                config.expansion_strategy = parse_strategy(s)?;
            }
            if let Some(m) = &method {
                config.translation_method = parse_method(m)?;
            }
            config.abbreviate |= abbreviate;
            config.jobs = backend.jobs.max(1);
            if glosses.is_some() {
                config.glosses = glosses;
            }
            if reference_lexicon.is_some() {
                config.reference_lexicon = reference_lexicon;
            }
            build(&terms, &config, &out, report.as_deref(), &backend)
        }
        Command::MergeLexicons { lexicons, out } => {
            let mut merged = Lexicon::empty(Language::undetermined());
            for path in &lexicons {
                merged = merge_lexicons(&merged, &load_lexicon(path)?).map_err(invalid)?;
            }
            write(&out, &lexicon_to_tsv(&merged))
        }
        Command::TranslateCode { code } => rewrite(&code, Direction::Forward),
        Command::RestoreCode { code } => rewrite(&code, Direction::Reverse),
        Command::ExecCheck { lexicon, inputs, interpreter, scratch, keywords } => {
            check(&lexicon, &inputs, &interpreter, scratch.as_deref(), keywords.as_deref())
        }
        Command::Evaluate { pairs, out } => {
            let rows = parse_eval_tsv(&read(&pairs)?).map_err(invalid)?;
            let report = evaluate(&rows, &MetricConfig::default()).map_err(invalid)?;
            match out {
                Some(path) => {
                    write(&path, &report.to_tsv())?;
                    print!("{}", report.summary());
                }
                None => {
                    print!("{}", report.to_tsv());
                    eprint!("{}", report.summary());
                }
            }
            Ok(())
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| invalid(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> CmdResult {
    std::fs::write(path, text).map_err(|e| invalid(format!("{}: {e}", path.display())))
}

fn emit(out: Option<&Path>, text: &str) -> CmdResult {
    match out {
        Some(path) => write(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_lexicon(path: &Path) -> Result<Lexicon, Failure> {
    parse_lexicon_tsv(&read(path)?).map_err(|e| invalid(format!("{}: {e}", path.display())))
}

fn load_keywords(path: Option<&Path>) -> Result<KeywordSet, Failure> {
    match path {
        Some(p) => KeywordSet::load(p).map_err(invalid),
        None => Ok(KeywordSet::python310()),
    }
}

fn read_terms(path: &Path) -> Result<Vec<String>, Failure> {
    Ok(read(path)?
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_owned)
        .collect())
}

fn parse_strategy(s: &str) -> Result<ExpansionStrategy, Failure> {
    ExpansionStrategy::parse(s).ok_or_else(|| fail(USAGE, format!("unknown expansion strategy `{s}`")))
}

fn parse_method(s: &str) -> Result<TranslationMethod, Failure> {
    TranslationMethod::parse(s).ok_or_else(|| fail(USAGE, format!("unknown translation method `{s}`")))
}

/// Backends selected by the shared flags, plus the store to save when recording.
struct Backends {
    generation: Option<Arc<dyn GenerationBackend>>,
    translation: Option<Arc<dyn TranslationBackend>>,
    recording: Option<(Arc<FixtureStore>, PathBuf)>,
}

impl Backends {
    fn open(args: &BackendArgs, config: Option<&PipelineConfig>) -> Result<Self, Failure> {
        if let Some(path) = &args.fixtures {
            let replay = Arc::new(ReplayBackend::new(Arc::new(FixtureStore::load(path)?)));
            return Ok(Backends {
                generation: Some(replay.clone()),
                translation: Some(replay),
                recording: None,
            });
        }
        let loaded;
        let config = match (config, &args.config) {
            (Some(c), _) => c,
            (None, Some(path)) => {
                loaded = PipelineConfig::load(path).map_err(invalid)?;
                &loaded
            }
            (None, None) => return Err(invalid("no backend: pass --fixtures or a --config with endpoints")),
        };
        let (generation, translation) = config.http_backends();
        let mut generation: Option<Arc<dyn GenerationBackend>> =
            generation.map(|b| Arc::new(b) as Arc<dyn GenerationBackend>);
        let mut translation: Option<Arc<dyn TranslationBackend>> =
            translation.map(|b| Arc::new(b) as Arc<dyn TranslationBackend>);
        let mut recording = None;
        if let Some(path) = &args.record {
            let store = Arc::new(if path.exists() { FixtureStore::load(path)? } else { FixtureStore::new() });
            generation = generation.map(|g| Arc::new(RecordingBackend::new(g, store.clone())) as Arc<dyn GenerationBackend>);
            translation =
                translation.map(|t| Arc::new(RecordingBackend::new(t, store.clone())) as Arc<dyn TranslationBackend>);
            recording = Some((store, path.clone()));
        }
        Ok(Backends { generation, translation, recording })
    }

    fn generation(&self) -> Result<&dyn GenerationBackend, Failure> {
        self.generation
            .as_deref()
            .ok_or_else(|| invalid("no generation endpoint configured"))
    }

    fn save(&self) -> CmdResult {
        if let Some((store, path)) = &self.recording {
            store.save(path)?;
        }
        Ok(())
    }
}

fn batch(args: &BackendArgs) -> BatchOptions {
    BatchOptions {
        parallelism: args.jobs.max(1),
        retry: RetryPolicy::default(),
        ..BatchOptions::default()
    }
}

fn expand(terms: &Path, strategy: &str, split_only: bool, out: Option<&Path>, args: &BackendArgs) -> CmdResult {
    let terms = read_terms(terms)?;
    let mut text = String::new();
    if split_only {
        for t in &terms {
            text.push_str(&format!("{t}\t{}\n", split_identifier(t).join(" ")));
        }
        return emit(out, &text);
    }
    let strategy = parse_strategy(strategy)?;
    let backends = Backends::open(args, None)?;
    let set = expand_terms(&terms, backends.generation()?, &PromptTemplates::embedded(), strategy, &batch(args))?;
    backends.save()?;
    let mut seen = std::collections::BTreeSet::new();
    for t in terms.iter().filter(|t| seen.insert(t.as_str())) {
        text.push_str(&format!("{t}\t{}\n", set.recorded(t)));
    }
    emit(out, &text)
}

fn read_expansions(path: &Path) -> Result<(Vec<String>, ExpansionSet), Failure> {
    let mut terms = Vec::new();
    let mut set = ExpansionSet {
        strategy: ExpansionStrategy::FiveShot,
        entries: BTreeMap::new(),
        unresolved: Vec::new(),
    };
    for (i, line) in read(path)?.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let (term, expansion) = line
            .split_once('\t')
            .ok_or_else(|| invalid(format!("{}:{}: expected term<TAB>expansion", path.display(), i + 1)))?;
        terms.push(term.to_owned());
        if expansion == SENTINEL || expansion.is_empty() {
            set.unresolved.push(term.to_owned());
        } else {
            set.entries.insert(term.to_owned(), expansion.to_owned());
        }
    }
    Ok((terms, set))
}

fn translate_terms(
    expansions: &Path,
    lang: &str,
    method: &str,
    glosses: Option<PathBuf>,
    reference_lexicon: Option<PathBuf>,
    out: Option<&Path>,
    args: &BackendArgs,
) -> CmdResult {
    let language = Language::from_code_or_name(lang);
    let method = parse_method(method)?;
    let (terms, set) = read_expansions(expansions)?;
    let mut config = PipelineConfig::new(language.clone());
    config.translation_method = method;
    config.glosses = glosses;
    config.reference_lexicon = reference_lexicon;
    let resources = Resources::load(&config).map_err(invalid)?;
    let backends = Backends::open(args, None)?;
    let translator = if method.is_mt() {
        TranslatorBackend::Mt(
            backends
                .translation
                .as_deref()
                .ok_or_else(|| invalid("no translation endpoint configured"))?,
        )
    } else {
        TranslatorBackend::Llm(backends.generation()?)
    };
    let options = TranslateOptions {
        batch: batch(args),
        templates: &resources.templates,
        glosses: resources.glosses.as_ref(),
        reference_pairs: resources.reference_pairs.as_deref(),
    };
    let translated = translate_expansions(&terms, &set, translator, method, &language, &options)?;
    backends.save()?;
    let mut text = String::new();
    for (term, raw) in &translated.entries {
        let processed = if raw == SENTINEL {
            SENTINEL.to_owned()
        } else {
            match postprocess_term(raw, &language, &resources.determiners) {
                Ok(p) if p.valid => p.text,
                _ => SENTINEL.to_owned(),
            }
        };
        text.push_str(&format!("{term}\t{raw}\t{processed}\n"));
    }
    emit(out, &text)
}

fn abbreviate(lexicon: &Path, profile: Option<&Path>, out: &Path) -> CmdResult {
    let lex = load_lexicon(lexicon)?;
    let profile = match profile {
        Some(p) => LanguageProfile::load(lex.language().clone(), p).map_err(invalid)?,
        None => LanguageProfile::for_language(lex.language()),
    };
    let mut proposals = BTreeMap::new();
    for r in lex.records() {
        let ab = abbreviate_term(&r.translation, &profile).unwrap_or_else(|e| {
            log::warn!("keeping `{}` unabbreviated: {e}", r.translation);
            r.translation.clone()
        });
        proposals.insert(r.english.clone(), Proposal::new(r.translation.clone(), ab));
    }
    let resolved = resolve_collisions(&proposals).map_err(invalid)?;
    let records = lex.records().map(|r| {
        let mut r = r.clone();
        let ab = &resolved[&r.english];
        r.abbreviation = (ab != &r.translation).then(|| ab.clone());
        r
    });
    let build = build_lexicon(records, lex.language()).map_err(invalid)?;
    for f in &build.flagged {
        eprintln!("flagged {}: {}", f.record.english, f.reason);
    }
    write(out, &lexicon_to_tsv(&build.lexicon))
}

fn build(terms: &Path, config: &PipelineConfig, out: &Path, report: Option<&Path>, args: &BackendArgs) -> CmdResult {
    let terms = read_terms(terms)?;
    let resources = Resources::load(config).map_err(invalid)?;
    let backends = Backends::open(args, Some(config))?;
    let pipeline_backends = PipelineBackends {
        generation: backends.generation.as_deref(),
        translation: backends.translation.as_deref(),
    };
    let (run, failure) = match run_pipeline(&terms, config, &resources, pipeline_backends) {
        Ok(run) => (run, None),
        Err(PipelineError::Config(m)) => return Err(invalid(m)),
        Err(PipelineError::Stage { stage, message, backend, partial }) => {
            let code = if backend { BACKEND } else { INVALID };
            (*partial, Some(fail(code, format!("{stage} stage failed: {message}"))))
        }
    };
    backends.save()?;
    write(out, &run.lexicon_tsv())?;
    if let Some(path) = report {
        write(path, &run.report.to_json())?;
    }
    for f in &run.report.flagged {
        eprintln!("flagged {}: {}", f.english, f.reason);
    }
    println!("entries\t{}", run.lexicon.len());
    println!("flagged\t{}", run.report.flagged.len());
    println!("sentinels\t{}", run.report.sentinels.len());
    println!("output_digest\t{}", run.report.output_digest);
    failure.map_or(Ok(()), Err)
}

fn rewrite(args: &CodeArgs, direction: Direction) -> CmdResult {
    let lex = load_lexicon(&args.lexicon)?;
    let keywords = load_keywords(args.keywords.as_deref())?;
    let source = read(&args.input)?;
    let rewritten = rewrite_source(&source, &lex, direction, &keywords).map_err(invalid)?;
    if direction == Direction::Forward {
        let stream = scan(&source, &keywords).map_err(invalid)?;
        let hazards = round_trip_hazards(&stream, &lex);
        let back = rewrite_source(&rewritten, &lex, Direction::Reverse, &keywords).map_err(invalid)?;
        if back != source {
            return Err(fail(
                ROUND_TRIP,
                format!(
                    "{} would not restore byte-for-byte; names already spelled like target terms: {}",
                    args.input.display(),
                    hazards.join(", ")
                ),
            ));
        }
    }
    write(&args.out, &rewritten)
}

fn check(
    lexicon: &Path,
    inputs: &[PathBuf],
    interpreter: &Path,
    scratch: Option<&Path>,
    keywords: Option<&Path>,
) -> CmdResult {
    let lex = load_lexicon(lexicon)?;
    let keywords = load_keywords(keywords)?;
    let temp;
    let scratch = match scratch {
        Some(dir) => dir,
        None => {
            temp = tempfile::tempdir().map_err(invalid)?;
            temp.path()
        }
    };
    let mut failed = 0;
    for path in inputs {
        let source = read(path)?;
        let result = exec_check(&source, &lex, &keywords, interpreter, scratch).map_err(|e| match e {
            HarnessError::Lex(_) => invalid(format!("{}: {e}", path.display())),
            HarnessError::Timeout { .. } => fail(ROUND_TRIP, format!("{}: {e}", path.display())),
            _ => fail(BACKEND, format!("{}: {e}", path.display())),
        })?;
        let (a, b) = result.interpreter_exit_codes;
        let verdict = if result.equivalent { "ok" } else { "MISMATCH" };
        println!("{verdict}\t{}\texit {a}/{b}", path.display());
        if !result.equivalent {
            failed += 1;
        }
    }
    if failed > 0 {
        return Err(fail(ROUND_TRIP, format!("{failed} of {} programs differ after restoring", inputs.len())));
    }
    Ok(())
}
