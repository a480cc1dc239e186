//! End-to-end lexicon construction: expand, translate, post-process,
//! optionally abbreviate, then build a validated lexicon and a run report.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::abbrev::{abbreviate_term, resolve_collisions, LanguageProfile, Proposal};
use crate::backends::{
    GenerationBackend, HttpEndpoint, HttpGenerationBackend, HttpTranslationBackend, RetryPolicy,
    TranslationBackend,
};
use crate::expander::{distinct, expand_terms, BatchOptions, ExpansionSet, DEFAULT_BATCH_SIZE};
use crate::language::Language;
use crate::lexicon::{build_lexicon, lexicon_to_tsv, parse_lexicon_tsv, Lexicon, Provenance, TermRecord, SENTINEL};
use crate::prompts::{ExpansionStrategy, PromptTemplates};
use crate::termtrans::{
    postprocess_term, reference_language_for, translate_expansions, DeterminerTable, GlossTable,
    TermTransError, TranslateOptions, TranslationMethod, TranslatorBackend,
};

/// Confidence of a record whose expansion was produced by the backend.
const EXPANDED_CONFIDENCE: f64 = 1.0;
/// Confidence of a record translated from the bare term after a failed expansion.
const FALLBACK_CONFIDENCE: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EndpointConfig {
    pub url: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub api_key_env: Option<String>,
    pub response_path: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timeout_secs: Option<u64>,
}

impl EndpointConfig {
    pub fn to_endpoint(&self) -> HttpEndpoint {
        let mut e = HttpEndpoint::new(&self.url, &self.response_path);
        e.api_key_env = self.api_key_env.clone();
        if let Some(secs) = self.timeout_secs {
            e.timeout = Duration::from_secs(secs);
        }
        e
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub language: Language,
    #[serde(default = "default_expansion")]
    pub expansion_strategy: ExpansionStrategy,
    #[serde(default = "default_method")]
    pub translation_method: TranslationMethod,
    #[serde(default)]
    pub abbreviate: bool,
    #[serde(default = "default_batch_size")]
    pub batch_size: usize,
    #[serde(default = "default_jobs")]
    pub jobs: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub determiners: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub glosses: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prompts: Option<PathBuf>,
    /// Lexicon of the reference language, needed by the all-other method.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_lexicon: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generation: Option<EndpointConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub translation: Option<EndpointConfig>,
}

fn default_expansion() -> ExpansionStrategy {
    ExpansionStrategy::FiveShot
}
fn default_method() -> TranslationMethod {
    TranslationMethod::MtNoCntxt
}
fn default_batch_size() -> usize {
    DEFAULT_BATCH_SIZE
}
fn default_jobs() -> usize {
    4
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("config: {0}")]
    Config(String),
    #[error("{stage} stage failed: {message}")]
    Stage {
        stage: &'static str,
        message: String,
        /// Whether the failure came from a backend rather than from the data.
        backend: bool,
        partial: Box<PipelineRun>,
    },
}

impl PipelineConfig {
    pub fn new(language: Language) -> Self {
        PipelineConfig {
            language,
            expansion_strategy: default_expansion(),
            translation_method: default_method(),
            abbreviate: false,
            batch_size: default_batch_size(),
            jobs: default_jobs(),
            determiners: None,
            glosses: None,
            profile: None,
            prompts: None,
            reference_lexicon: None,
            generation: None,
            translation: None,
        }
    }

    /// Reads either a JSON object or `key=value` lines. Nested endpoint keys
    /// are written `generation.url=...`.
    pub fn parse(text: &str) -> Result<Self, PipelineError> {
        let bad = |m: String| PipelineError::Config(m);
        let trimmed = text.trim_start();
        let value: Value = if trimmed.starts_with('{') {
            serde_json::from_str(trimmed).map_err(|e| bad(e.to_string()))?
        } else {
            let mut root = serde_json::Map::new();
            for (i, raw) in text.lines().enumerate() {
                let line = raw.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let (key, val) = line
                    .split_once('=')
                    .ok_or_else(|| bad(format!("line {}: expected key=value", i + 1)))?;
                let (key, val) = (key.trim(), val.trim());
                let parsed = match key {
                    "abbreviate" | "batch_size" | "jobs" | "generation.timeout_secs" | "translation.timeout_secs" => {
                        serde_json::from_str(val).map_err(|_| bad(format!("line {}: bad value for {key}", i + 1)))?
                    }
                    _ => Value::String(val.to_owned()),
                };
                let slot = match key.split_once('.') {
                    Some((outer, inner)) => root
                        .entry(outer)
                        .or_insert_with(|| Value::Object(Default::default()))
                        .as_object_mut()
                        .ok_or_else(|| bad(format!("line {}: {outer} is not a section", i + 1)))?
                        .entry(inner),
                    None => root.entry(key),
                };
                match slot {
                    serde_json::map::Entry::Vacant(v) => {
                        v.insert(parsed);
                    }
                    serde_json::map::Entry::Occupied(_) => {
                        return Err(bad(format!("line {}: duplicate key {key}", i + 1)))
                    }
                }
            }
            Value::Object(root)
        };
        let mut config: PipelineConfig = serde_json::from_value(value).map_err(|e| bad(e.to_string()))?;
        config.language = Language::new(config.language.code());
        if config.batch_size == 0 || config.jobs == 0 {
            return Err(bad("batch_size and jobs must be positive".into()));
        }
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// SHA-256 of the canonical JSON form.
    pub fn digest(&self) -> String {
        sha256_hex(serde_json::to_string(self).expect("config serializes").as_bytes())
    }

    /// Live HTTP backends from the endpoint sections.
    pub fn http_backends(&self) -> (Option<HttpGenerationBackend>, Option<HttpTranslationBackend>) {
        (
            self.generation
                .as_ref()
                .map(|e| HttpGenerationBackend { endpoint: e.to_endpoint() }),
            self.translation.as_ref().map(|e| HttpTranslationBackend {
                endpoint: e.to_endpoint(),
                supported: Vec::new(),
            }),
        )
    }
}

pub(crate) fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Data files named by a config, loaded and checked up front.
pub struct Resources {
    pub templates: PromptTemplates,
    pub determiners: DeterminerTable,
    pub glosses: Option<GlossTable>,
    pub profile: LanguageProfile,
    pub reference_pairs: Option<Vec<(String, String)>>,
}

impl Resources {
    pub fn load(config: &PipelineConfig) -> Result<Self, PipelineError> {
        let cfg = |m: String| PipelineError::Config(m);
        let templates = match &config.prompts {
            Some(dir) => PromptTemplates::load_dir(dir).map_err(|e| cfg(format!("{}: {e}", dir.display())))?,
            None => PromptTemplates::embedded(),
        };
        let determiners = match &config.determiners {
            Some(dir) => DeterminerTable::load_dir(dir).map_err(|e| cfg(e.to_string()))?,
            None => DeterminerTable::embedded(),
        };
        let glosses = config
            .glosses
            .as_deref()
            .map(GlossTable::load)
            .transpose()
            .map_err(|e| cfg(e.to_string()))?;
        if matches!(config.translation_method, TranslationMethod::MtDef | TranslationMethod::MtExpl)
            && glosses.is_none()
        {
            return Err(cfg(format!("{} needs a gloss file", config.translation_method.as_str())));
        }
        let profile = match &config.profile {
            Some(path) => LanguageProfile::load(config.language.clone(), path).map_err(|e| cfg(e.to_string()))?,
            None => LanguageProfile::for_language(&config.language),
        };
        let reference_pairs = match (&config.reference_lexicon, config.translation_method) {
            (Some(path), _) => {
                let text = std::fs::read_to_string(path).map_err(|e| cfg(format!("{}: {e}", path.display())))?;
                let lex = parse_lexicon_tsv(&text).map_err(|e| cfg(format!("{}: {e}", path.display())))?;
                let expected = reference_language_for(&config.language);
                if lex.language() != &expected {
                    return Err(cfg(format!(
                        "reference lexicon is {}, expected {} for target {}",
                        lex.language(),
                        expected,
                        config.language
                    )));
                }
                Some(reference_pairs(&lex))
            }
            (None, TranslationMethod::LlmAllOther) => {
                return Err(cfg("llm_all_other needs reference_lexicon".into()))
            }
            (None, _) => None,
        };
        Ok(Resources {
            templates,
            determiners,
            glosses,
            profile,
            reference_pairs,
        })
    }
}

/// `(english phrase, translation)` pairs of a lexicon, using the expansion when there is one.
pub fn reference_pairs(lex: &Lexicon) -> Vec<(String, String)> {
    lex.records()
        .map(|r| {
            let english = if r.expansion == SENTINEL { &r.english } else { &r.expansion };
            (english.clone(), r.translation.clone())
        })
        .collect()
}

/// The backends a run talks to. Either may be absent when the configured
/// method does not need it.
#[derive(Clone, Copy)]
pub struct PipelineBackends<'a> {
    pub generation: Option<&'a dyn GenerationBackend>,
    pub translation: Option<&'a dyn TranslationBackend>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageCounts {
    pub expanded: usize,
    pub expansion_sentinels: usize,
    pub translated: usize,
    pub translation_sentinels: usize,
    pub postprocess_flagged: usize,
    pub abbreviated: usize,
    pub lexicon_entries: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlaggedTerm {
    pub english: String,
    pub translation: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageFailure {
    pub stage: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub language: Language,
    pub input_terms: usize,
    pub input_digest: String,
    pub config_digest: String,
    pub output_digest: String,
    pub counts: StageCounts,
    pub flagged: Vec<FlaggedTerm>,
    /// Terms with no translation.
    pub sentinels: Vec<String>,
    pub failure: Option<StageFailure>,
}

impl RunReport {
    /// Pretty JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineRun {
    pub lexicon: Lexicon,
    pub report: RunReport,
}

impl PipelineRun {
    pub fn lexicon_tsv(&self) -> String {
        lexicon_to_tsv(&self.lexicon)
    }
}

struct Run<'c> {
    config: &'c PipelineConfig,
    terms: Vec<String>,
    report: RunReport,
}

impl Run<'_> {
    fn finish(mut self, lexicon: Lexicon) -> PipelineRun {
        self.report.counts.lexicon_entries = lexicon.len();
        self.report.output_digest = sha256_hex(lexicon_to_tsv(&lexicon).as_bytes());
        PipelineRun { lexicon, report: self.report }
    }

    fn fail(mut self, stage: &'static str, message: String, backend: bool) -> PipelineError {
        self.report.failure = Some(StageFailure { stage: stage.into(), message: message.clone() });
        let empty = Lexicon::empty(self.config.language.clone());
        let partial = self.finish(empty);
        PipelineError::Stage { stage, message, backend, partial: Box::new(partial) }
    }

    fn fail_with(mut self, stage: &'static str, message: String, lexicon: Lexicon) -> PipelineError {
        self.report.failure = Some(StageFailure { stage: stage.into(), message: message.clone() });
        let partial = self.finish(lexicon);
        PipelineError::Stage { stage, message, backend: false, partial: Box::new(partial) }
    }
}

fn term_error_is_backend(e: &TermTransError) -> bool {
    matches!(e, TermTransError::Backend(_))
}

/// Runs every stage over `terms` and returns the lexicon with its report.
///
/// Each distinct input term ends up in exactly one of: the lexicon, the
/// flagged list, or the sentinel list.
pub fn run_pipeline(
    terms: &[String],
    config: &PipelineConfig,
    resources: &Resources,
    backends: PipelineBackends<'_>,
) -> Result<PipelineRun, PipelineError> {
    let terms: Vec<String> = distinct(
        &terms
            .iter()
            .map(|t| t.trim().to_owned())
            .filter(|t| !t.is_empty())
            .collect::<Vec<_>>(),
    );
    let mut run = Run {
        config,
        report: RunReport {
            language: config.language.clone(),
            input_terms: terms.len(),
            input_digest: sha256_hex(terms.join("\n").as_bytes()),
            config_digest: config.digest(),
            output_digest: String::new(),
            counts: StageCounts {
                expanded: 0,
                expansion_sentinels: 0,
                translated: 0,
                translation_sentinels: 0,
                postprocess_flagged: 0,
                abbreviated: 0,
                lexicon_entries: 0,
            },
            flagged: Vec::new(),
            sentinels: Vec::new(),
            failure: None,
        },
        terms,
    };
    let batch = BatchOptions {
        batch_size: config.batch_size,
        parallelism: config.jobs,
        retry: RetryPolicy::default(),
    };

    let Some(generation) = backends.generation else {
        return Err(run.fail("expansion", "no generation backend configured".into(), true));
    };
    let expansions = match expand_terms(&run.terms, generation, &resources.templates, config.expansion_strategy, &batch) {
        Ok(set) => set,
        Err(e) => return Err(run.fail("expansion", e.to_string(), true)),
    };
    run.report.counts.expanded = expansions.entries.len();
    run.report.counts.expansion_sentinels = expansions.unresolved.len();

    let translator = if config.translation_method.is_mt() {
        backends.translation.map(TranslatorBackend::Mt)
    } else {
        Some(TranslatorBackend::Llm(generation))
    };
    let Some(translator) = translator else {
        return Err(run.fail("translation", "no translation backend configured".into(), true));
    };
    let options = TranslateOptions {
        batch,
        templates: &resources.templates,
        glosses: resources.glosses.as_ref(),
        reference_pairs: resources.reference_pairs.as_deref(),
    };
    let translations = match translate_expansions(
        &run.terms,
        &expansions,
        translator,
        config.translation_method,
        &config.language,
        &options,
    ) {
        Ok(set) => set,
        Err(e) => {
            let backend = term_error_is_backend(&e);
            return Err(run.fail("translation", e.to_string(), backend));
        }
    };

    // Post-processing; the first term (in english order) keeps a shared target.
    let mut candidates: BTreeMap<String, String> = BTreeMap::new();
    let mut taken: BTreeMap<String, String> = BTreeMap::new();
    for (english, raw) in &translations.entries {
        if raw == SENTINEL {
            run.report.sentinels.push(english.clone());
            continue;
        }
        let flag = |reason: String| FlaggedTerm {
            english: english.clone(),
            translation: raw.clone(),
            reason,
        };
        match postprocess_term(raw, &config.language, &resources.determiners) {
            Err(e) => run.report.flagged.push(flag(e.to_string())),
            Ok(p) if !p.valid => run
                .report
                .flagged
                .push(flag(format!("`{}` is not a valid identifier", p.text))),
            Ok(p) => {
                if let Some(first) = taken.get(&p.text) {
                    run.report
                        .flagged
                        .push(flag(format!("`{}` is already the target of `{first}`", p.text)));
                } else {
                    taken.insert(p.text.clone(), english.clone());
                    candidates.insert(english.clone(), p.text);
                }
            }
        }
    }
    run.report.counts.translation_sentinels = run.report.sentinels.len();
    run.report.counts.translated = translations.entries.len() - run.report.sentinels.len();
    run.report.counts.postprocess_flagged = run.report.flagged.len();

    let abbreviations = if config.abbreviate {
        match abbreviate_all(&candidates, &resources.profile) {
            Ok(a) => a,
            Err(e) => {
                let lexicon = records_to_lexicon(&candidates, &BTreeMap::new(), &expansions, config)
                    .map(|b| b.0)
                    .unwrap_or_else(|_| Lexicon::empty(config.language.clone()));
                return Err(run.fail_with("abbreviation", e, lexicon));
            }
        }
    } else {
        BTreeMap::new()
    };
    run.report.counts.abbreviated = abbreviations.len();

    match records_to_lexicon(&candidates, &abbreviations, &expansions, config) {
        Ok((lexicon, flagged)) => {
            run.report.flagged.extend(flagged);
            run.report.flagged.sort_by(|a, b| a.english.cmp(&b.english));
            Ok(run.finish(lexicon))
        }
        Err(e) => Err(run.fail("lexicon", e, false)),
    }
}

/// Abbreviations that differ from the full translation, collision-free across the run.
fn abbreviate_all(
    candidates: &BTreeMap<String, String>,
    profile: &LanguageProfile,
) -> Result<BTreeMap<String, String>, String> {
    let mut proposals = BTreeMap::new();
    for (english, full) in candidates {
        let abbreviation = abbreviate_term(full, profile).unwrap_or_else(|e| {
            log::warn!("keeping `{full}` unabbreviated: {e}");
            full.clone()
        });
        proposals.insert(english.clone(), Proposal::new(full.clone(), abbreviation));
    }
    let resolved = resolve_collisions(&proposals).map_err(|e| e.to_string())?;
    Ok(resolved
        .into_iter()
        .filter(|(english, ab)| candidates[english] != *ab)
        .collect())
}

fn records_to_lexicon(
    candidates: &BTreeMap<String, String>,
    abbreviations: &BTreeMap<String, String>,
    expansions: &ExpansionSet,
    config: &PipelineConfig,
) -> Result<(Lexicon, Vec<FlaggedTerm>), String> {
    let records = candidates.iter().map(|(english, translation)| {
        let expanded = expansions.entries.contains_key(english);
        let mut r = TermRecord::new(
            english.clone(),
            expansions.recorded(english),
            config.language.clone(),
            translation.clone(),
        )
        .with_provenance(Provenance::Pipeline)
        .with_confidence(if expanded { EXPANDED_CONFIDENCE } else { FALLBACK_CONFIDENCE });
        if let Some(ab) = abbreviations.get(english) {
            r = r.with_abbreviation(ab.clone());
        }
        r
    });
    let build = build_lexicon(records, &config.language).map_err(|e| e.to_string())?;
    let flagged = build
        .flagged
        .into_iter()
        .map(|f| FlaggedTerm {
            english: f.record.english.clone(),
            translation: f.record.translation.clone(),
            reason: f.reason,
        })
        .collect();
    Ok((build.lexicon, flagged))
}

/// Every distinct term lands in exactly one bucket of a finished run.
pub fn accounted_terms(run: &PipelineRun) -> BTreeSet<String> {
    run.lexicon
        .records()
        .map(|r| r.english.clone())
        .chain(run.report.flagged.iter().map(|f| f.english.clone()))
        .chain(run.report.sentinels.iter().cloned())
        .collect()
}
