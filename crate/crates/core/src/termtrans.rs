//! Translation of expanded terms through MT or LLM backends, and the
//! post-processing that turns a translated phrase into an identifier.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::backends::{map_bounded, BackendError, GenerationBackend, TranslationBackend};
use crate::expander::{distinct, parse_arrow_response, BatchOptions, ExpansionSet};
use crate::language::Language;
use crate::lexicon::SENTINEL;
use crate::prompts::{PromptTemplates, TranslationStrategy, LANGUAGE_SLOT, REFERENCE_SLOT};
use crate::pytok::is_identifier;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TermTransError {
    #[error("no gloss for `{0}`; the def and expl levels need one")]
    MissingGloss(String),
    #[error("the all-other strategy needs reference translation pairs")]
    MissingReference,
    #[error("nothing left of `{0}` after removing determiners")]
    EmptyResult(String),
    #[error("method {method:?} needs a {needs} backend")]
    BackendMismatch { method: TranslationMethod, needs: &'static str },
    #[error("bad data file {path}: {message}")]
    DataFile { path: String, message: String },
    #[error(transparent)]
    Backend(#[from] BackendError),
}

/// How much context surrounds a term sent to an MT system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContextLevel {
    NoCntxt,
    Def,
    Expl,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TranslationMethod {
    MtNoCntxt,
    MtDef,
    MtExpl,
    LlmZero,
    LlmZeroMotive,
    LlmOne,
    LlmFive,
    LlmAllOther,
}

impl TranslationMethod {
    pub fn context_level(self) -> Option<ContextLevel> {
        match self {
            TranslationMethod::MtNoCntxt => Some(ContextLevel::NoCntxt),
            TranslationMethod::MtDef => Some(ContextLevel::Def),
            TranslationMethod::MtExpl => Some(ContextLevel::Expl),
            _ => None,
        }
    }

    pub fn llm_strategy(self) -> Option<TranslationStrategy> {
        match self {
            TranslationMethod::LlmZero => Some(TranslationStrategy::ZeroShot),
            TranslationMethod::LlmZeroMotive => Some(TranslationStrategy::ZeroMotive),
            TranslationMethod::LlmOne => Some(TranslationStrategy::OneShot),
            TranslationMethod::LlmFive => Some(TranslationStrategy::FiveShot),
            TranslationMethod::LlmAllOther => Some(TranslationStrategy::AllOther),
            _ => None,
        }
    }

    pub fn is_mt(self) -> bool {
        self.context_level().is_some()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            TranslationMethod::MtNoCntxt => "mt_no_cntxt",
            TranslationMethod::MtDef => "mt_def",
            TranslationMethod::MtExpl => "mt_expl",
            TranslationMethod::LlmZero => "llm_zero",
            TranslationMethod::LlmZeroMotive => "llm_zero_motive",
            TranslationMethod::LlmOne => "llm_one",
            TranslationMethod::LlmFive => "llm_five",
            TranslationMethod::LlmAllOther => "llm_all_other",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        let norm = s.trim().to_ascii_lowercase().replace(['-', '+'], "_");
        let all = [
            TranslationMethod::MtNoCntxt,
            TranslationMethod::MtDef,
            TranslationMethod::MtExpl,
            TranslationMethod::LlmZero,
            TranslationMethod::LlmZeroMotive,
            TranslationMethod::LlmOne,
            TranslationMethod::LlmFive,
            TranslationMethod::LlmAllOther,
        ];
        all.into_iter().find(|m| m.as_str() == norm).or(match norm.as_str() {
            "no_cntxt" | "no_contxt" => Some(TranslationMethod::MtNoCntxt),
            "def" => Some(TranslationMethod::MtDef),
            "expl" => Some(TranslationMethod::MtExpl),
            "0_shot" | "zero_shot" => Some(TranslationMethod::LlmZero),
            "0_motive" | "zero_motive" => Some(TranslationMethod::LlmZeroMotive),
            "1_shot" | "one_shot" => Some(TranslationMethod::LlmOne),
            "5_shot" | "five_shot" => Some(TranslationMethod::LlmFive),
            "all_other" => Some(TranslationMethod::LlmAllOther),
            _ => None,
        })
    }
}

/// Source text for one MT request at the given context level.
pub fn build_mt_input(
    level: ContextLevel,
    term: &str,
    gloss: Option<&str>,
) -> Result<String, TermTransError> {
    let gloss = || gloss.ok_or_else(|| TermTransError::MissingGloss(term.to_owned()));
    Ok(match level {
        ContextLevel::NoCntxt => term.to_owned(),
        ContextLevel::Def => format!("{term}: {}", gloss()?),
        ContextLevel::Expl => {
            format!("In Python, to use the expression that {}, write: {term}.", gloss()?)
        }
    })
}

/// Pulls the term's translation back out of a translated context sentence.
/// `def` keeps the part before the first colon, `expl` the part after the last.
pub fn extract_mt_output(level: ContextLevel, output: &str) -> String {
    let colon = |c: char| c == ':' || c == '：';
    let picked = match level {
        ContextLevel::NoCntxt => output,
        ContextLevel::Def => output.split(colon).next().unwrap_or(output),
        ContextLevel::Expl => output.rsplit(colon).next().unwrap_or(output),
    };
    let picked = picked.trim();
    match level {
        ContextLevel::Expl => picked.trim_end_matches(['.', '。', '।']).trim().to_owned(),
        _ => picked.to_owned(),
    }
}

/// Reference language for the all-other prompt: Spanish, or French when the
/// target itself is Spanish.
pub fn reference_language_for(target: &Language) -> Language {
    if target.primary() == "es" {
        Language::new("fr")
    } else {
        Language::new("es")
    }
}

pub fn build_llm_translation_prompt(
    templates: &PromptTemplates,
    strategy: TranslationStrategy,
    language: &Language,
    terms: &[String],
    reference_pairs: Option<&[(String, String)]>,
) -> Result<String, TermTransError> {
    let mut prompt = templates
        .translation(strategy)
        .replace(LANGUAGE_SLOT, language.display_name());
    if strategy == TranslationStrategy::AllOther {
        let pairs = reference_pairs
            .filter(|p| !p.is_empty())
            .ok_or(TermTransError::MissingReference)?;
        let rendered: Vec<String> = pairs.iter().map(|(e, t)| format!("{e} => {t}")).collect();
        prompt = prompt.replace(REFERENCE_SLOT, &rendered.join(", "));
    }
    prompt.push_str(&terms.join(", "));
    Ok(prompt)
}

/// Leading determiners to strip, per language.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DeterminerTable {
    by_language: BTreeMap<String, Vec<String>>,
}

const EMBEDDED_DETERMINERS: [(&str, &str); 7] = [
    ("fr", include_str!("../data/determiners/fr.txt")),
    ("es", include_str!("../data/determiners/es.txt")),
    ("el", include_str!("../data/determiners/el.txt")),
    ("hi", include_str!("../data/determiners/hi.txt")),
    ("bn", include_str!("../data/determiners/bn.txt")),
    ("ar", include_str!("../data/determiners/ar.txt")),
    ("zh", include_str!("../data/determiners/zh.txt")),
];

impl DeterminerTable {
    pub fn embedded() -> Self {
        let mut table = DeterminerTable::default();
        for (lang, text) in EMBEDDED_DETERMINERS {
            table
                .insert_text(lang, text)
                .expect("embedded determiner tables are well-formed");
        }
        table
    }

    /// Adds or replaces one language's list, one word per line.
    pub fn insert_text(&mut self, language: &str, text: &str) -> Result<(), String> {
        let mut words = Vec::new();
        let mut seen = BTreeSet::new();
        for (i, line) in text.lines().enumerate() {
            let w = line.trim();
            if w.is_empty() {
                continue;
            }
            if w != w.to_lowercase() {
                return Err(format!("line {}: `{w}` is not lowercase", i + 1));
            }
            if w.contains(|c: char| c.is_whitespace() || c == '_') {
                return Err(format!("line {}: `{w}` is not a single word", i + 1));
            }
            if !seen.insert(w.to_owned()) {
                return Err(format!("line {}: duplicate `{w}`", i + 1));
            }
            words.push(w.to_owned());
        }
        self.by_language.insert(language.to_ascii_lowercase(), words);
        Ok(())
    }

    /// Loads `<dir>/<lang>.txt` for every file in `dir`.
    pub fn load_dir(dir: &Path) -> Result<Self, TermTransError> {
        let mut table = DeterminerTable::default();
        let err = |message: String| TermTransError::DataFile {
            path: dir.display().to_string(),
            message,
        };
        let entries = std::fs::read_dir(dir).map_err(|e| err(e.to_string()))?;
        let mut paths: Vec<_> = entries.filter_map(|e| e.ok().map(|e| e.path())).collect();
        paths.sort();
        for path in paths {
            if path.extension().and_then(|e| e.to_str()) != Some("txt") {
                continue;
            }
            let lang = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default().to_owned();
            let text = std::fs::read_to_string(&path).map_err(|e| err(e.to_string()))?;
            table.insert_text(&lang, &text).map_err(|m| TermTransError::DataFile {
                path: path.display().to_string(),
                message: m,
            })?;
        }
        Ok(table)
    }

    pub fn for_language(&self, language: &Language) -> &[String] {
        self.by_language
            .get(language.code())
            .or_else(|| self.by_language.get(language.primary()))
            .map_or(&[], Vec::as_slice)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProcessedTerm {
    pub text: String,
    /// Whether `text` passes the identifier rule and can be used in code.
    pub valid: bool,
}

fn strip_leading_determiner<'a>(word: &'a str, determiners: &[String]) -> Option<&'a str> {
    let lower = word.to_lowercase();
    if determiners.contains(&lower) {
        return Some("");
    }
    for d in determiners.iter().filter(|d| d.ends_with(['\'', '’'])) {
        if lower.starts_with(d.as_str()) && lower.len() > d.len() {
            let skip = d.chars().count();
            let byte = word.char_indices().nth(skip).map_or(word.len(), |(i, _)| i);
            return Some(&word[byte..]);
        }
    }
    None
}

/// Removes leading determiners, then joins the remaining words with underscores.
pub fn postprocess_term(
    raw: &str,
    language: &Language,
    determiners: &DeterminerTable,
) -> Result<ProcessedTerm, TermTransError> {
    let dets = determiners.for_language(language);
    let mut words: Vec<&str> = raw.split_whitespace().collect();
    while let Some(first) = words.first() {
        match strip_leading_determiner(first, dets) {
            Some("") => {
                words.remove(0);
            }
            Some(rest) => words[0] = rest,
            None => break,
        }
    }
    if words.is_empty() {
        return Err(TermTransError::EmptyResult(raw.to_owned()));
    }
    let text = words.join("_");
    let valid = is_identifier(&text);
    Ok(ProcessedTerm { text, valid })
}

/// Per-term definitions used by the `def` and `expl` context levels.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GlossTable {
    glosses: BTreeMap<String, String>,
}

impl GlossTable {
    /// Parses `term<TAB>gloss` lines; an optional `term\tgloss` header is skipped.
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut glosses = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() || (i == 0 && line == "term\tgloss") {
                continue;
            }
            let (term, gloss) = line
                .split_once('\t')
                .ok_or_else(|| format!("line {}: expected `term<TAB>gloss`", i + 1))?;
            if gloss.contains('\t') {
                return Err(format!("line {}: too many fields", i + 1));
            }
            glosses.insert(term.trim().to_owned(), gloss.trim().to_owned());
        }
        Ok(GlossTable { glosses })
    }

    pub fn load(path: &Path) -> Result<Self, TermTransError> {
        let err = |message: String| TermTransError::DataFile {
            path: path.display().to_string(),
            message,
        };
        let text = std::fs::read_to_string(path).map_err(|e| err(e.to_string()))?;
        Self::parse(&text).map_err(err)
    }

    pub fn get(&self, term: &str) -> Option<&str> {
        self.glosses.get(term).map(String::as_str)
    }

    pub fn insert(&mut self, term: impl Into<String>, gloss: impl Into<String>) {
        self.glosses.insert(term.into(), gloss.into());
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TranslationSet {
    /// English term → raw translation (`-` when the backend gave none).
    pub entries: BTreeMap<String, String>,
    pub language: Language,
    pub method: TranslationMethod,
}

impl TranslationSet {
    pub fn sentinels(&self) -> impl Iterator<Item = &str> {
        self.entries
            .iter()
            .filter(|(_, v)| v.as_str() == SENTINEL)
            .map(|(k, _)| k.as_str())
    }
}

/// A backend of the family the translation method needs.
#[derive(Clone, Copy)]
pub enum TranslatorBackend<'a> {
    Mt(&'a dyn TranslationBackend),
    Llm(&'a dyn GenerationBackend),
}

pub struct TranslateOptions<'a> {
    pub batch: BatchOptions,
    pub templates: &'a PromptTemplates,
    pub glosses: Option<&'a GlossTable>,
    /// English → reference-language pairs for the all-other prompt.
    pub reference_pairs: Option<&'a [(String, String)]>,
}

/// Translates each term's expansion (or the term itself when unresolved).
pub fn translate_expansions(
    terms: &[String],
    expansions: &ExpansionSet,
    backend: TranslatorBackend<'_>,
    method: TranslationMethod,
    language: &Language,
    options: &TranslateOptions<'_>,
) -> Result<TranslationSet, TermTransError> {
    let terms = distinct(terms);
    let entries = match (backend, method.context_level(), method.llm_strategy()) {
        (TranslatorBackend::Mt(mt), Some(level), _) => {
            translate_mt(&terms, expansions, mt, level, language, options)?
        }
        (TranslatorBackend::Llm(llm), _, Some(strategy)) => {
            translate_llm(&terms, expansions, llm, strategy, language, options)?
        }
        _ => {
            return Err(TermTransError::BackendMismatch {
                method,
                needs: if method.is_mt() { "machine translation" } else { "generation" },
            })
        }
    };
    Ok(TranslationSet {
        entries,
        language: language.clone(),
        method,
    })
}

fn translate_mt(
    terms: &[String],
    expansions: &ExpansionSet,
    mt: &dyn TranslationBackend,
    level: ContextLevel,
    language: &Language,
    options: &TranslateOptions<'_>,
) -> Result<BTreeMap<String, String>, TermTransError> {
    let english = Language::new("en");
    let inputs = terms
        .iter()
        .map(|t| {
            let gloss = options.glosses.and_then(|g| g.get(t));
            build_mt_input(level, expansions.resolved(t), gloss)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let outputs = map_bounded(&inputs, options.batch.parallelism, |input| {
        options
            .batch
            .retry
            .run(|| mt.translate_text(input, &english, language))
    });
    let mut entries = BTreeMap::new();
    for (term, out) in terms.iter().zip(outputs) {
        let extracted = extract_mt_output(level, &out?);
        let value = if extracted.is_empty() { SENTINEL.to_owned() } else { extracted };
        entries.insert(term.clone(), value);
    }
    Ok(entries)
}

fn translate_llm(
    terms: &[String],
    expansions: &ExpansionSet,
    llm: &dyn GenerationBackend,
    strategy: TranslationStrategy,
    language: &Language,
    options: &TranslateOptions<'_>,
) -> Result<BTreeMap<String, String>, TermTransError> {
    let phrases = distinct(
        &terms
            .iter()
            .map(|t| expansions.resolved(t).to_owned())
            .collect::<Vec<_>>(),
    );
    let batches: Vec<&[String]> = phrases.chunks(options.batch.batch_size.max(1)).collect();
    let prompts = batches
        .iter()
        .map(|b| {
            build_llm_translation_prompt(options.templates, strategy, language, b, options.reference_pairs)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let work: Vec<(&[String], String)> = batches.into_iter().zip(prompts).collect();
    let results = map_bounded(&work, options.batch.parallelism, |(batch, prompt)| {
        options
            .batch
            .retry
            .run(|| llm.generate(prompt))
            .map(|response| parse_arrow_response(&response, batch))
    });
    let mut by_phrase = BTreeMap::new();
    for parsed in results {
        by_phrase.extend(parsed?.entries);
    }
    Ok(terms
        .iter()
        .map(|t| {
            let phrase = expansions.resolved(t);
            let value = by_phrase.get(phrase).cloned().unwrap_or_else(|| SENTINEL.to_owned());
            (t.clone(), value)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backends::RetryPolicy;
    use crate::expander::ExpansionStrategy;
    use proptest::prelude::*;

    fn s(v: &[&str]) -> Vec<String> {
        v.iter().map(|x| x.to_string()).collect()
    }

    #[test]
    fn mt_inputs() {
        assert_eq!(build_mt_input(ContextLevel::NoCntxt, "print", None).unwrap(), "print");
        assert_eq!(
            build_mt_input(ContextLevel::Def, "print", Some("Prints to the standard output device"))
                .unwrap(),
            "print: Prints to the standard output device"
        );
        assert_eq!(
            build_mt_input(ContextLevel::Expl, "print", Some("prints to the standard output device"))
                .unwrap(),
            "In Python, to use the expression that prints to the standard output device, write: print."
        );
        assert_eq!(
            build_mt_input(ContextLevel::Def, "print", None),
            Err(TermTransError::MissingGloss("print".into()))
        );
    }

    #[test]
    fn mt_output_extraction() {
        assert_eq!(extract_mt_output(ContextLevel::NoCntxt, " imprimer "), "imprimer");
        assert_eq!(
            extract_mt_output(ContextLevel::Def, "imprimer : Imprime sur le périphérique"),
            "imprimer"
        );
        assert_eq!(
            extract_mt_output(
                ContextLevel::Expl,
                "En Python, pour utiliser l'expression qui imprime, écrivez : imprimer."
            ),
            "imprimer"
        );
    }

    #[test]
    fn llm_prompts() {
        let t = PromptTemplates::embedded();
        let el = Language::new("el");
        let p = build_llm_translation_prompt(&t, TranslationStrategy::OneShot, &el, &s(&["absolute value"]), None)
            .unwrap();
        assert!(p.contains("For example: absolute value => [translation]"));
        assert!(p.contains("Please translate these terms into Greek: absolute value"));
        assert!(!p.contains(LANGUAGE_SLOT));

        let fr = Language::new("fr");
        let p = build_llm_translation_prompt(&t, TranslationStrategy::FiveShot, &fr, &s(&["power"]), None)
            .unwrap();
        assert!(p.contains("absolute value => [translation]\nmemory view => [translation]"));
        assert!(p.contains("Syntax Error => [translation]."));

        let pairs = vec![
            ("absolute value".to_string(), "valor absoluto".to_string()),
            ("print".to_string(), "imprimir".to_string()),
        ];
        let p = build_llm_translation_prompt(&t, TranslationStrategy::AllOther, &fr, &s(&["power"]), Some(&pairs))
            .unwrap();
        assert!(p.contains("when translating Python to French, you have these translations"));
        assert!(p.contains("absolute value => valor absoluto, print => imprimir."));
        assert!(p.ends_with("separated by commas:  power"));

        assert_eq!(
            build_llm_translation_prompt(&t, TranslationStrategy::AllOther, &fr, &s(&["x"]), None),
            Err(TermTransError::MissingReference)
        );
    }

    #[test]
    fn reference_language_rule() {
        assert_eq!(reference_language_for(&Language::new("fr")), Language::new("es"));
        assert_eq!(reference_language_for(&Language::new("el")), Language::new("es"));
        assert_eq!(reference_language_for(&Language::new("es")), Language::new("fr"));
    }

    #[test]
    fn postprocess_examples() {
        let d = DeterminerTable::embedded();
        let pp = |raw: &str, lang: &str| postprocess_term(raw, &Language::new(lang), &d);
        assert_eq!(pp("valor absoluto", "es").unwrap().text, "valor_absoluto");
        assert_eq!(pp("la valeur absolue", "fr").unwrap().text, "valeur_absolue");
        assert_eq!(pp("La valeur absolue", "fr").unwrap().text, "valeur_absolue");
        assert_eq!(pp("print", "fr").unwrap(), ProcessedTerm { text: "print".into(), valid: true });
        assert_eq!(pp("l'argument", "fr").unwrap().text, "argument");
        assert_eq!(pp("  η   απόλυτη  τιμή ", "el").unwrap().text, "απόλυτη_τιμή");
        // determiners are only removed from the front
        assert_eq!(pp("valeur de la partition", "fr").unwrap().text, "valeur_de_la_partition");
        assert!(matches!(pp("la", "fr"), Err(TermTransError::EmptyResult(_))));
        assert!(matches!(pp("   ", "fr"), Err(TermTransError::EmptyResult(_))));
        let flagged = pp("moins ou égal?", "fr").unwrap();
        assert!(!flagged.valid);
    }

    #[test]
    fn determiner_file_rules() {
        let mut t = DeterminerTable::default();
        assert!(t.insert_text("fr", "Le\n").is_err());
        assert!(t.insert_text("fr", "le\nle\n").is_err());
        assert!(t.insert_text("fr", "le la\n").is_err());
        assert!(t.insert_text("fr", "le\n\nla\n").is_ok());
        assert_eq!(t.for_language(&Language::new("fr-CA")), &s(&["le", "la"])[..]);
        let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/determiners");
        assert_eq!(DeterminerTable::load_dir(&dir).unwrap(), DeterminerTable::embedded());
    }

    proptest! {
        #[test]
        fn postprocess_idempotent(raw in "(la |le |l'|un |[a-zé]{1,6} ){1,5}") {
            let d = DeterminerTable::embedded();
            let fr = Language::new("fr");
            if let Ok(once) = postprocess_term(&raw, &fr, &d) {
                prop_assert!(!once.text.contains(char::is_whitespace));
                prop_assert!(once.text.chars().count() <= raw.chars().count());
                let twice = postprocess_term(&once.text, &fr, &d).unwrap();
                prop_assert_eq!(twice, once);
            }
        }
    }

    #[test]
    fn gloss_file() {
        let g = GlossTable::parse("term\tgloss\nprint\tPrints to the standard output device\n").unwrap();
        assert_eq!(g.get("print"), Some("Prints to the standard output device"));
        assert!(GlossTable::parse("print only\n").is_err());
    }

    struct DictMt(BTreeMap<&'static str, &'static str>);

    impl TranslationBackend for DictMt {
        fn translate_text(&self, s: &str, _: &Language, _: &Language) -> Result<String, BackendError> {
            Ok(self.0.get(s).copied().unwrap_or("").to_owned())
        }
    }

    struct DictLlm;

    impl GenerationBackend for DictLlm {
        fn generate(&self, prompt: &str) -> Result<String, BackendError> {
            let terms = prompt.rsplit(":  ").next().unwrap();
            Ok(terms
                .split(", ")
                .filter(|t| *t == "absolute")
                .map(|t| format!("{t} => absoluto"))
                .collect::<Vec<_>>()
                .join("\n"))
        }
    }

    fn expansions() -> ExpansionSet {
        ExpansionSet {
            strategy: ExpansionStrategy::FiveShot,
            entries: [("abs".to_string(), "absolute".to_string())].into_iter().collect(),
            unresolved: s(&["as"]),
        }
    }

    fn opts(t: &PromptTemplates) -> TranslateOptions<'_> {
        TranslateOptions {
            batch: BatchOptions { retry: RetryPolicy::no_backoff(), ..Default::default() },
            templates: t,
            glosses: None,
            reference_pairs: None,
        }
    }

    #[test]
    fn translate_with_mt() {
        let t = PromptTemplates::embedded();
        let mt = DictMt([("absolute", "absolue")].into_iter().collect());
        let set = translate_expansions(
            &s(&["abs", "as"]),
            &expansions(),
            TranslatorBackend::Mt(&mt),
            TranslationMethod::MtNoCntxt,
            &Language::new("fr"),
            &opts(&t),
        )
        .unwrap();
        assert_eq!(set.entries["abs"], "absolue");
        assert_eq!(set.entries["as"], "-");
        assert_eq!(set.sentinels().collect::<Vec<_>>(), vec!["as"]);
    }

    #[test]
    fn translate_with_llm() {
        let t = PromptTemplates::embedded();
        let set = translate_expansions(
            &s(&["abs", "as"]),
            &expansions(),
            TranslatorBackend::Llm(&DictLlm),
            TranslationMethod::LlmZero,
            &Language::new("es"),
            &opts(&t),
        )
        .unwrap();
        assert_eq!(set.entries["abs"], "absoluto");
        assert_eq!(set.entries["as"], "-");
    }

    #[test]
    fn backend_family_must_match() {
        let t = PromptTemplates::embedded();
        let err = translate_expansions(
            &s(&["abs"]),
            &expansions(),
            TranslatorBackend::Llm(&DictLlm),
            TranslationMethod::MtDef,
            &Language::new("es"),
            &opts(&t),
        )
        .unwrap_err();
        assert!(matches!(err, TermTransError::BackendMismatch { .. }));
    }

    #[test]
    fn method_names() {
        assert_eq!(TranslationMethod::parse("no-cntxt"), Some(TranslationMethod::MtNoCntxt));
        assert_eq!(TranslationMethod::parse("llm_all_other"), Some(TranslationMethod::LlmAllOther));
        assert_eq!(TranslationMethod::parse("5-shot"), Some(TranslationMethod::LlmFive));
        assert_eq!(TranslationMethod::parse("bogus"), None);
    }
}
