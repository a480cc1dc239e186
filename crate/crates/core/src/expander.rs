//! Term expansion: turning abbreviated or concatenated Python terms into the
//! English phrases they stand for.

use std::collections::{BTreeMap, BTreeSet};

use crate::backends::{map_bounded, BackendError, GenerationBackend, RetryPolicy};
use crate::lexicon::SENTINEL;
pub use crate::prompts::ExpansionStrategy;
use crate::prompts::PromptTemplates;

pub const DEFAULT_BATCH_SIZE: usize = 50;

/// Splits on underscores, letter/digit boundaries, and lower→upper case
/// transitions. Never yields empty words.
pub fn split_identifier(term: &str) -> Vec<String> {
    let mut words = Vec::new();
    let mut current = String::new();
    let mut prev: Option<char> = None;
    for c in term.chars() {
        if c == '_' {
            if !current.is_empty() {
                words.push(std::mem::take(&mut current));
            }
            prev = None;
            continue;
        }
        if let Some(p) = prev {
            let camel = p.is_lowercase() && c.is_uppercase();
            let digit_edge = p.is_numeric() != c.is_numeric();
            if (camel || digit_edge) && !current.is_empty() {
                words.push(std::mem::take(&mut current));
            }
        }
        current.push(c);
        prev = Some(c);
    }
    if !current.is_empty() {
        words.push(current);
    }
    words
}

pub fn build_expansion_prompt(
    templates: &PromptTemplates,
    strategy: ExpansionStrategy,
    terms: &[String],
) -> String {
    let mut prompt = templates.expansion(strategy).to_owned();
    prompt.push_str(&terms.join(", "));
    prompt
}

/// Result of parsing a `term => value` response.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ArrowParse {
    pub entries: BTreeMap<String, String>,
    /// Expected terms with no usable line, in request order.
    pub unresolved: Vec<String>,
}

fn normalize_arrows(line: &str) -> String {
    line.replace(['⇒', '→'], "=>")
        .replace("＝＞", "=>")
        .replace("= >", "=>")
}

fn strip_list_marker(s: &str) -> &str {
    let s = s.trim_start();
    for marker in ["- ", "* ", "• ", "· "] {
        if let Some(rest) = s.strip_prefix(marker) {
            return rest.trim_start();
        }
    }
    let digits = s.chars().take_while(char::is_ascii_digit).count();
    if digits > 0 {
        let rest = &s[digits..];
        if let Some(rest) = rest.strip_prefix(". ").or_else(|| rest.strip_prefix(") ")) {
            return rest.trim_start();
        }
    }
    s
}

fn strip_decoration(s: &str) -> &str {
    let mut s = s.trim();
    loop {
        let before = s;
        for (open, close) in [("**", "**"), ("`", "`"), ("\"", "\""), ("'", "'"), ("«", "»")] {
            if s.len() >= open.len() + close.len() && s.starts_with(open) && s.ends_with(close) {
                s = s[open.len()..s.len() - close.len()].trim();
            }
        }
        if s == before {
            return s;
        }
    }
}

/// Extracts `term => value` lines for the expected terms. Total on any input:
/// every distinct expected term ends up in exactly one of `entries` or
/// `unresolved`. The first line for a term wins.
pub fn parse_arrow_response(response: &str, expected: &[String]) -> ArrowParse {
    let mut wanted: Vec<&str> = Vec::new();
    let mut seen = BTreeSet::new();
    for t in expected {
        if seen.insert(t.as_str()) {
            wanted.push(t);
        }
    }
    let by_lower: BTreeMap<String, Vec<&str>> = wanted.iter().fold(BTreeMap::new(), |mut m, t| {
        m.entry(t.to_lowercase()).or_insert_with(Vec::new).push(*t);
        m
    });

    let mut entries = BTreeMap::new();
    for raw in response.lines() {
        let line = normalize_arrows(raw);
        let Some((lhs, rhs)) = line.split_once("=>") else {
            continue;
        };
        let lhs = strip_decoration(strip_list_marker(lhs));
        let rhs = strip_decoration(rhs.trim().trim_end_matches([',', ';']));
        if rhs.is_empty() || rhs == SENTINEL {
            continue;
        }
        let key = if seen.contains(lhs) {
            Some(lhs)
        } else {
            match by_lower.get(&lhs.to_lowercase()) {
                Some(c) if c.len() == 1 => Some(c[0]),
                _ => None,
            }
        };
        if let Some(key) = key {
            entries.entry(key.to_owned()).or_insert_with(|| rhs.to_owned());
        }
    }
    let unresolved = wanted
        .iter()
        .filter(|t| !entries.contains_key(**t))
        .map(|t| (*t).to_owned())
        .collect();
    ArrowParse { entries, unresolved }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExpansionSet {
    pub strategy: ExpansionStrategy,
    pub entries: BTreeMap<String, String>,
    /// Terms that received the `-` sentinel.
    pub unresolved: Vec<String>,
}

impl ExpansionSet {
    /// The phrase to translate: the expansion, or the term itself when unresolved.
    pub fn resolved<'a>(&'a self, term: &'a str) -> &'a str {
        self.entries.get(term).map_or(term, String::as_str)
    }

    /// Expansion as stored in a lexicon record (`-` when unresolved).
    pub fn recorded<'a>(&'a self, term: &str) -> &'a str {
        self.entries.get(term).map_or(SENTINEL, String::as_str)
    }

    pub fn len(&self) -> usize {
        self.entries.len() + self.unresolved.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BatchOptions {
    pub batch_size: usize,
    pub parallelism: usize,
    pub retry: RetryPolicy,
}

impl Default for BatchOptions {
    fn default() -> Self {
        BatchOptions {
            batch_size: DEFAULT_BATCH_SIZE,
            parallelism: 4,
            retry: RetryPolicy::default(),
        }
    }
}

/// Distinct terms in first-seen order.
pub(crate) fn distinct(terms: &[String]) -> Vec<String> {
    let mut seen = BTreeSet::new();
    terms.iter().filter(|t| seen.insert(t.as_str())).cloned().collect()
}

pub fn expand_terms(
    terms: &[String],
    backend: &dyn GenerationBackend,
    templates: &PromptTemplates,
    strategy: ExpansionStrategy,
    options: &BatchOptions,
) -> Result<ExpansionSet, BackendError> {
    let terms = distinct(terms);
    let batches: Vec<&[String]> = terms.chunks(options.batch_size.max(1)).collect();
    let results = map_bounded(&batches, options.parallelism, |batch| {
        let prompt = build_expansion_prompt(templates, strategy, batch);
        options
            .retry
            .run(|| backend.generate(&prompt))
            .map(|response| parse_arrow_response(&response, batch))
    });

    let mut set = ExpansionSet {
        strategy,
        entries: BTreeMap::new(),
        unresolved: Vec::new(),
    };
    for parsed in results {
        let parsed = parsed?;
        set.entries.extend(parsed.entries);
        set.unresolved.extend(parsed.unresolved);
    }
    Ok(set)
}
