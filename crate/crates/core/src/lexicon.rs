//! Term lexicons: validated, bijective English → target mappings for one
//! language, with TSV persistence and conflict-checked merging.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::language::Language;
use crate::pytok::{is_identifier, PYTHON_KEYWORDS};

pub const TSV_HEADER: &str =
    "english\texpansion\tlanguage\ttranslation\tabbreviation\tprovenance\tconfidence";

const COLUMNS: [&str; 7] = [
    "english",
    "expansion",
    "language",
    "translation",
    "abbreviation",
    "provenance",
    "confidence",
];

const BUILTINS: &str = include_str!("../data/python_builtins.txt");

/// Expansion value meaning "no expansion; use the original term".
pub const SENTINEL: &str = "-";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LexiconError {
    #[error("invalid record for `{english}`: {reason}")]
    InvalidRecord { english: String, reason: String },
    #[error("record `{english}` has language `{found}`, expected `{expected}`")]
    LanguageMismatch {
        english: String,
        expected: Language,
        found: Language,
    },
    #[error("collision on `{on}`: {first_english} → {first_target} conflicts with {second_english} → {second_target}")]
    Collision {
        on: String,
        first_english: String,
        first_target: String,
        second_english: String,
        second_target: String,
    },
    #[error("line {line}, column `{column}`: {message}")]
    Format {
        line: usize,
        column: String,
        message: String,
    },
    #[error("line {line}: duplicate english term `{english}`")]
    DuplicateKey { english: String, line: usize },
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for LexiconError {
    fn from(e: std::io::Error) -> Self {
        LexiconError::Io(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Human,
    Pipeline,
    Corrected,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::Human => "human",
            Provenance::Pipeline => "pipeline",
            Provenance::Corrected => "corrected",
        }
    }
}

impl FromStr for Provenance {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "human" => Ok(Provenance::Human),
            "pipeline" => Ok(Provenance::Pipeline),
            "corrected" => Ok(Provenance::Corrected),
            other => Err(format!("unknown provenance `{other}`")),
        }
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TermClass {
    Keyword,
    Builtin,
    ModuleMember,
}

impl TermClass {
    pub fn classify(english: &str) -> Self {
        if PYTHON_KEYWORDS.contains(&english) {
            TermClass::Keyword
        } else if BUILTINS.lines().any(|b| b == english) {
            TermClass::Builtin
        } else {
            TermClass::ModuleMember
        }
    }
}

/// One English Python term and its localized form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermRecord {
    pub english: String,
    /// Unabbreviated English phrase, or [`SENTINEL`] when the term is used as is.
    pub expansion: String,
    pub language: Language,
    pub translation: String,
    pub abbreviation: Option<String>,
    pub provenance: Provenance,
    pub confidence: f64,
}

impl TermRecord {
    pub fn new(
        english: impl Into<String>,
        expansion: impl Into<String>,
        language: Language,
        translation: impl Into<String>,
    ) -> Self {
        TermRecord {
            english: english.into(),
            expansion: expansion.into(),
            language,
            translation: translation.into(),
            abbreviation: None,
            provenance: Provenance::Human,
            confidence: 1.0,
        }
    }

    pub fn with_abbreviation(mut self, abbreviation: impl Into<String>) -> Self {
        self.abbreviation = Some(abbreviation.into());
        self
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = provenance;
        self
    }

    pub fn with_confidence(mut self, confidence: f64) -> Self {
        self.confidence = confidence;
        self
    }

    /// The term that replaces `english` in code: the abbreviation when there
    /// is one, otherwise the translation.
    pub fn target(&self) -> &str {
        self.abbreviation.as_deref().unwrap_or(&self.translation)
    }

    /// Checks the structural invariants and rounds confidence to the three
    /// decimals the TSV format keeps.
    pub fn validate(&mut self) -> Result<(), LexiconError> {
        let invalid = |reason: &str| LexiconError::InvalidRecord {
            english: self.english.clone(),
            reason: reason.to_owned(),
        };
        if self.english.is_empty() || self.english.chars().any(char::is_whitespace) {
            return Err(invalid("english must be non-empty and contain no whitespace"));
        }
        if self.expansion.is_empty() || self.expansion.contains(['\t', '\n', '\r']) {
            return Err(invalid("expansion must be non-empty and contain no tab or line break"));
        }
        if self.translation.is_empty() || self.translation.chars().any(char::is_whitespace) {
            return Err(invalid("translation must be non-empty and contain no whitespace"));
        }
        if let Some(abbr) = &self.abbreviation {
            if abbr.is_empty() || abbr.chars().any(char::is_whitespace) {
                return Err(invalid("abbreviation must be non-empty and contain no whitespace"));
            }
            if abbr.chars().count() > self.translation.chars().count() {
                return Err(invalid("abbreviation is longer than translation"));
            }
        }
        if !(0.0..=1.0).contains(&self.confidence) {
            return Err(invalid("confidence must lie in [0, 1]"));
        }
        if self.language.code().is_empty() || self.language.code().contains(char::is_whitespace) {
            return Err(invalid("language code must be a non-empty tag"));
        }
        self.confidence = (self.confidence * 1000.0).round() / 1000.0;
        Ok(())
    }
}

/// A record left out of a lexicon because its target is not a usable identifier.
#[derive(Debug, Clone, PartialEq)]
pub struct FlaggedRecord {
    pub record: TermRecord,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LexiconBuild {
    pub lexicon: Lexicon,
    pub flagged: Vec<FlaggedRecord>,
}

/// Bijective mapping between English terms and target terms for one language.
///
/// Immutable once built; lookups in both directions are `O(log n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Lexicon {
    language: Language,
    entries: BTreeMap<String, TermRecord>,
    reverse: BTreeMap<String, String>,
    classes: BTreeMap<String, TermClass>,
}

impl Lexicon {
    pub fn empty(language: Language) -> Self {
        Lexicon {
            language,
            entries: BTreeMap::new(),
            reverse: BTreeMap::new(),
            classes: BTreeMap::new(),
        }
    }

    pub fn language(&self) -> &Language {
        &self.language
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn forward(&self, english: &str) -> Option<&str> {
        self.entries.get(english).map(TermRecord::target)
    }

    pub fn reverse(&self, target: &str) -> Option<&str> {
        self.reverse.get(target).map(String::as_str)
    }

    pub fn record(&self, english: &str) -> Option<&TermRecord> {
        self.entries.get(english)
    }

    pub fn term_class(&self, english: &str) -> Option<TermClass> {
        self.classes.get(english).copied()
    }

    /// Records in english-term order.
    pub fn records(&self) -> impl Iterator<Item = &TermRecord> {
        self.entries.values()
    }

    pub fn forward_pairs(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, r)| (k.as_str(), r.target()))
    }

    pub fn reverse_pairs(&self) -> impl Iterator<Item = (&str, &str)> {
        self.reverse.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    /// Inserts an already validated record, enforcing injectivity both ways.
    fn insert(&mut self, record: TermRecord) -> Result<(), LexiconError> {
        let target = record.target().to_owned();
        if let Some(existing) = self.entries.get(&record.english) {
            if existing.target() == target {
                return Ok(());
            }
            return Err(LexiconError::Collision {
                on: record.english.clone(),
                first_english: existing.english.clone(),
                first_target: existing.target().to_owned(),
                second_english: record.english.clone(),
                second_target: target,
            });
        }
        if let Some(other) = self.reverse.get(&target) {
            return Err(LexiconError::Collision {
                on: target.clone(),
                first_english: other.clone(),
                first_target: target.clone(),
                second_english: record.english.clone(),
                second_target: target,
            });
        }
        self.reverse.insert(target, record.english.clone());
        self.classes
            .insert(record.english.clone(), TermClass::classify(&record.english));
        self.entries.insert(record.english.clone(), record);
        Ok(())
    }
}

/// Builds a lexicon from `records`. Records whose target fails the identifier
/// rule are returned in `flagged` rather than entering the mapping.
pub fn build_lexicon(
    records: impl IntoIterator<Item = TermRecord>,
    language: &Language,
) -> Result<LexiconBuild, LexiconError> {
    let mut lexicon = Lexicon::empty(language.clone());
    let mut flagged = Vec::new();
    for mut record in records {
        if &record.language != language {
            return Err(LexiconError::LanguageMismatch {
                english: record.english,
                expected: language.clone(),
                found: record.language,
            });
        }
        record.validate()?;
        if !is_identifier(record.target()) {
            let reason = format!("`{}` is not a valid identifier", record.target());
            flagged.push(FlaggedRecord { record, reason });
            continue;
        }
        lexicon.insert(record)?;
    }
    Ok(LexiconBuild { lexicon, flagged })
}

/// Union of two lexicons of the same language. Identical entries collapse;
/// anything mapped differently is a collision.
pub fn merge_lexicons(a: &Lexicon, b: &Lexicon) -> Result<Lexicon, LexiconError> {
    let language = match (a.language.is_undetermined(), b.language.is_undetermined()) {
        (true, _) if a.is_empty() => b.language.clone(),
        (_, true) if b.is_empty() => a.language.clone(),
        _ if a.language == b.language => a.language.clone(),
        _ => {
            let english = b.records().next().map(|r| r.english.clone()).unwrap_or_default();
            return Err(LexiconError::LanguageMismatch {
                english,
                expected: a.language.clone(),
                found: b.language.clone(),
            });
        }
    };
    let mut merged = Lexicon::empty(language.clone());
    for record in a.records().chain(b.records()) {
        let mut record = record.clone();
        record.language = language.clone();
        merged.insert(record)?;
    }
    Ok(merged)
}

fn format_confidence(c: f64) -> String {
    let s = format!("{c:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s.is_empty() || s == "-" {
        "0".into()
    } else {
        s.to_owned()
    }
}

pub fn write_lexicon<W: Write>(lexicon: &Lexicon, mut sink: W) -> Result<(), LexiconError> {
    sink.write_all(lexicon_to_tsv(lexicon).as_bytes())?;
    Ok(())
}

/// Renders the TSV form; rows are in english-term order.
pub fn lexicon_to_tsv(lexicon: &Lexicon) -> String {
    let mut out = String::from(TSV_HEADER);
    out.push('\n');
    for r in lexicon.records() {
        let fields = [
            r.english.as_str(),
            r.expansion.as_str(),
            r.language.code(),
            r.translation.as_str(),
            r.abbreviation.as_deref().unwrap_or(""),
            r.provenance.as_str(),
            &format_confidence(r.confidence),
        ];
        out.push_str(&fields.join("\t"));
        out.push('\n');
    }
    out
}

pub fn read_lexicon<R: Read>(mut source: R) -> Result<Lexicon, LexiconError> {
    let mut bytes = Vec::new();
    source.read_to_end(&mut bytes)?;
    let text = String::from_utf8(bytes).map_err(|e| LexiconError::Format {
        line: 0,
        column: "-".into(),
        message: format!("not valid UTF-8: {e}"),
    })?;
    parse_lexicon_tsv(&text)
}

pub fn parse_lexicon_tsv(text: &str) -> Result<Lexicon, LexiconError> {
    let format_err = |line: usize, column: &str, message: String| LexiconError::Format {
        line,
        column: column.to_owned(),
        message,
    };
    if text.starts_with('\u{feff}') {
        return Err(format_err(1, "english", "byte order mark is not allowed".into()));
    }
    let body = text.strip_suffix('\n').unwrap_or(text);
    let mut lines = body.split('\n');
    match lines.next() {
        Some(TSV_HEADER) => {}
        _ => return Err(format_err(1, "header", format!("expected header `{TSV_HEADER}`"))),
    }

    let mut records: Vec<TermRecord> = Vec::new();
    let mut seen = BTreeSet::new();
    for (idx, line) in lines.enumerate() {
        let lineno = idx + 2;
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != COLUMNS.len() {
            let column = COLUMNS.get(fields.len()).copied().unwrap_or("confidence");
            return Err(format_err(
                lineno,
                column,
                format!("expected {} tab-separated fields, found {}", COLUMNS.len(), fields.len()),
            ));
        }
        for (field, column) in fields.iter().zip(COLUMNS) {
            if field.contains('\r') {
                return Err(format_err(lineno, column, "carriage return in field".into()));
            }
            if field.is_empty() && column != "abbreviation" {
                return Err(format_err(lineno, column, "empty field".into()));
            }
        }
        let provenance = fields[5]
            .parse::<Provenance>()
            .map_err(|m| format_err(lineno, "provenance", m))?;
        let confidence = fields[6]
            .parse::<f64>()
            .ok()
            .filter(|c| c.is_finite())
            .ok_or_else(|| format_err(lineno, "confidence", format!("`{}` is not a number", fields[6])))?;
        let english = fields[0].to_owned();
        if !seen.insert(english.clone()) {
            return Err(LexiconError::DuplicateKey { english, line: lineno });
        }
        let mut record = TermRecord {
            english,
            expansion: fields[1].to_owned(),
            language: Language::new(fields[2]),
            translation: fields[3].to_owned(),
            abbreviation: (!fields[4].is_empty()).then(|| fields[4].to_owned()),
            provenance,
            confidence,
        };
        record.validate().map_err(|e| match e {
            LexiconError::InvalidRecord { reason, .. } => {
                let column = COLUMNS
                    .iter()
                    .find(|c| reason.starts_with(**c))
                    .copied()
                    .unwrap_or("english");
                format_err(lineno, column, reason)
            }
            other => other,
        })?;
        if !is_identifier(record.target()) {
            let column = if record.abbreviation.is_some() { "abbreviation" } else { "translation" };
            return Err(format_err(
                lineno,
                column,
                format!("`{}` is not a valid identifier", record.target()),
            ));
        }
        records.push(record);
    }

    let language = records
        .first()
        .map_or_else(Language::undetermined, |r| r.language.clone());
    let build = build_lexicon(records, &language)?;
    debug_assert!(build.flagged.is_empty());
    Ok(build.lexicon)
}
