//! Syllable-based abbreviation of translated terms, and collision resolution
//! that grows clashing abbreviations back toward their full forms.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use thiserror::Error;

use crate::language::Language;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AbbrevError {
    #[error("`{word}` has characters outside the {script} script")]
    UnsupportedScript { word: String, script: String },
    #[error("nothing left of `{0}` after dropping skip words")]
    EmptyResult(String),
    #[error("`{abbreviation}` is not a per-word prefix of `{full}`")]
    NotAPrefix { full: String, abbreviation: String },
    #[error("{first} and {second} both translate to `{full}`")]
    IrreconcilableCollision { first: String, second: String, full: String },
    #[error("bad profile {source_name}, line {line}: {message}")]
    Profile { source_name: String, line: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Script {
    Latin,
    Greek,
}

impl Script {
    fn parse(s: &str) -> Option<Self> {
        match s {
            "latin" => Some(Script::Latin),
            "greek" => Some(Script::Greek),
            _ => None,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Script::Latin => "latin",
            Script::Greek => "greek",
        }
    }

    fn contains(self, c: char) -> bool {
        if !c.is_alphabetic() {
            return false;
        }
        let cp = c as u32;
        match self {
            Script::Latin => c.is_ascii_alphabetic() || (0xC0..=0x24F).contains(&cp) || (0x1E00..=0x1EFF).contains(&cp),
            Script::Greek => (0x370..=0x3FF).contains(&cp) || (0x1F00..=0x1FFF).contains(&cp),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LanguageProfile {
    pub language: Language,
    pub vowels: BTreeSet<char>,
    pub supports_syllabification: bool,
    pub skip_words: BTreeSet<String>,
    /// Letters a word may contain; `None` accepts any alphabetic character.
    pub script: Option<Script>,
}

const EMBEDDED_PROFILES: [(&str, &str); 8] = [
    ("latin", include_str!("../data/abbrev/latin.profile")),
    ("fr", include_str!("../data/abbrev/fr.profile")),
    ("es", include_str!("../data/abbrev/es.profile")),
    ("el", include_str!("../data/abbrev/el.profile")),
    ("hi", include_str!("../data/abbrev/hi.profile")),
    ("bn", include_str!("../data/abbrev/bn.profile")),
    ("ar", include_str!("../data/abbrev/ar.profile")),
    ("zh", include_str!("../data/abbrev/zh.profile")),
];

impl LanguageProfile {
    /// Parses `key=value` lines: `vowels`, `skip` (space separated),
    /// `syllabify` and `script`. Blank lines and `#` comments are ignored.
    pub fn parse(language: Language, text: &str, source_name: &str) -> Result<Self, AbbrevError> {
        let err = |line: usize, message: String| AbbrevError::Profile {
            source_name: source_name.to_owned(),
            line,
            message,
        };
        let mut profile = LanguageProfile {
            language,
            vowels: BTreeSet::new(),
            supports_syllabification: true,
            skip_words: BTreeSet::new(),
            script: None,
        };
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(i + 1, "expected key=value".into()))?;
            let value = value.trim();
            match key.trim() {
                "vowels" => profile.vowels = value.chars().filter(|c| !c.is_whitespace()).collect(),
                "skip" => profile.skip_words = value.split_whitespace().map(str::to_lowercase).collect(),
                "syllabify" => {
                    profile.supports_syllabification = match value {
                        "true" => true,
                        "false" => false,
                        other => return Err(err(i + 1, format!("syllabify must be true or false, got `{other}`"))),
                    }
                }
                "script" => {
                    profile.script =
                        Some(Script::parse(value).ok_or_else(|| err(i + 1, format!("unknown script `{value}`")))?)
                }
                other => return Err(err(i + 1, format!("unknown key `{other}`"))),
            }
        }
        if profile.supports_syllabification && profile.vowels.is_empty() {
            return Err(err(0, "a syllabifying profile needs vowels".into()));
        }
        Ok(profile)
    }

    pub fn load(language: Language, path: &Path) -> Result<Self, AbbrevError> {
        let text = std::fs::read_to_string(path).map_err(|e| AbbrevError::Profile {
            source_name: path.display().to_string(),
            line: 0,
            message: e.to_string(),
        })?;
        Self::parse(language, &text, &path.display().to_string())
    }

    /// Built-in profile for a language; unknown languages get the Latin default.
    pub fn for_language(language: &Language) -> Self {
        let text = EMBEDDED_PROFILES
            .iter()
            .find(|(code, _)| *code == language.primary())
            .map_or(EMBEDDED_PROFILES[0].1, |(_, t)| *t);
        Self::parse(language.clone(), text, language.code()).expect("embedded profiles are well-formed")
    }

    pub fn latin() -> Self {
        Self::parse(Language::undetermined(), EMBEDDED_PROFILES[0].1, "latin").expect("embedded profile")
    }

    fn is_vowel(&self, c: char) -> bool {
        self.vowels.contains(&c) || c.to_lowercase().any(|l| self.vowels.contains(&l))
    }

    fn check_script(&self, word: &str) -> Result<(), AbbrevError> {
        let ok = match self.script {
            Some(script) => word.chars().all(|c| script.contains(c)),
            None => word.chars().all(char::is_alphabetic),
        };
        if ok {
            Ok(())
        } else {
            Err(AbbrevError::UnsupportedScript {
                word: word.to_owned(),
                script: self.script.map_or("alphabetic", Script::name).to_owned(),
            })
        }
    }
}

/// Greedy split into consonant-run + vowel syllables. Trailing consonants
/// join the last syllable.
pub fn syllabify(word: &str, profile: &LanguageProfile) -> Result<Vec<String>, AbbrevError> {
    profile.check_script(word)?;
    let mut syllables: Vec<String> = Vec::new();
    let mut current = String::new();
    for c in word.chars() {
        current.push(c);
        if profile.is_vowel(c) {
            syllables.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        match syllables.last_mut() {
            Some(last) => last.push_str(&current),
            None => syllables.push(current),
        }
    }
    Ok(syllables)
}

/// First two syllables, plus the following character when it is a consonant.
pub fn abbreviate_word(word: &str, profile: &LanguageProfile) -> Result<String, AbbrevError> {
    if !profile.supports_syllabification {
        log::warn!("no syllabification for {}; keeping `{word}`", profile.language.code());
        return Ok(word.to_owned());
    }
    let syllables = syllabify(word, profile)?;
    if syllables.len() <= 2 {
        return Ok(word.to_owned());
    }
    let mut out = syllables[0].clone() + &syllables[1];
    if let Some(next) = word[out.len()..].chars().next() {
        if !profile.is_vowel(next) {
            out.push(next);
        }
    }
    Ok(out)
}

/// Drops skip words from an underscore-joined term and abbreviates the rest.
pub fn abbreviate_term(term: &str, profile: &LanguageProfile) -> Result<String, AbbrevError> {
    let kept: Vec<&str> = term
        .split('_')
        .filter(|w| !profile.skip_words.contains(&w.to_lowercase()))
        .collect();
    if kept.iter().all(|w| w.is_empty()) {
        return Err(AbbrevError::EmptyResult(term.to_owned()));
    }
    let words = kept
        .iter()
        .map(|w| if w.is_empty() { Ok(String::new()) } else { abbreviate_word(w, profile) })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(words.join("_"))
}

/// A full term and its current abbreviation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Proposal {
    pub full: String,
    pub abbreviation: String,
}

impl Proposal {
    pub fn new(full: impl Into<String>, abbreviation: impl Into<String>) -> Self {
        Proposal { full: full.into(), abbreviation: abbreviation.into() }
    }
}

/// Word-level view of a proposal: which words survived and how much of each is kept.
#[derive(Debug, Clone)]
struct Alignment {
    words: Vec<(String, usize)>,
}

impl Alignment {
    fn new(p: &Proposal) -> Option<Self> {
        let full: Vec<&str> = p.full.split('_').collect();
        let mut words = Vec::new();
        let mut at = 0;
        for part in p.abbreviation.split('_') {
            let idx = (at..full.len()).find(|&i| full[i].starts_with(part))?;
            words.push((full[idx].to_owned(), part.len()));
            at = idx + 1;
        }
        Some(Alignment { words })
    }

    fn render(&self) -> String {
        let parts: Vec<&str> = self.words.iter().map(|(w, n)| &w[..*n]).collect();
        parts.join("_")
    }

    /// Adds one character to the leftmost shortened word; false when nothing is left to add.
    fn extend(&mut self) -> bool {
        for (word, kept) in &mut self.words {
            if let Some(c) = word[*kept..].chars().next() {
                *kept += c.len_utf8();
                return true;
            }
        }
        false
    }
}

/// Makes abbreviations pairwise distinct by extending every member of a
/// clashing group one character per round from its own full form.
pub fn resolve_collisions<K: Ord + Clone + std::fmt::Display>(
    proposed: &BTreeMap<K, Proposal>,
) -> Result<BTreeMap<K, String>, AbbrevError> {
    let mut by_full: BTreeMap<&str, &K> = BTreeMap::new();
    for (k, p) in proposed {
        if let Some(prev) = by_full.insert(&p.full, k) {
            return Err(AbbrevError::IrreconcilableCollision {
                first: prev.to_string(),
                second: k.to_string(),
                full: p.full.clone(),
            });
        }
    }
    let mut state: BTreeMap<K, Alignment> = BTreeMap::new();
    for (k, p) in proposed {
        let a = Alignment::new(p).ok_or_else(|| AbbrevError::NotAPrefix {
            full: p.full.clone(),
            abbreviation: p.abbreviation.clone(),
        })?;
        state.insert(k.clone(), a);
    }
    loop {
        let mut groups: BTreeMap<String, Vec<K>> = BTreeMap::new();
        for (k, a) in &state {
            groups.entry(a.render()).or_default().push(k.clone());
        }
        let clashing: Vec<Vec<K>> = groups.into_values().filter(|g| g.len() > 1).collect();
        if clashing.is_empty() {
            return Ok(state.into_iter().map(|(k, a)| (k, a.render())).collect());
        }
        let mut progressed = false;
        for group in clashing {
            for k in group {
                progressed |= state.get_mut(&k).expect("grouped key").extend();
            }
        }
        if !progressed {
            // Fully restored and still equal: only possible when the full forms are
            // equal modulo the dropped words.
            let (first, second) = {
                let mut seen: BTreeMap<String, &K> = BTreeMap::new();
                let mut pair = None;
                for (k, a) in &state {
                    if let Some(prev) = seen.insert(a.render(), k) {
                        pair = Some((prev.clone(), k.clone()));
                        break;
                    }
                }
                pair.expect("a clash exists")
            };
            return Err(AbbrevError::IrreconcilableCollision {
                full: state[&first].render(),
                first: first.to_string(),
                second: second.to_string(),
            });
        }
    }
}
