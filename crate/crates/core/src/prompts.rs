//! Prompt templates for expansion and LLM translation.
//!
//! The files under `prompts/` are the source of truth and are embedded at
//! build time; a directory with the same layout can replace them at runtime.

use std::path::Path;

use serde::{Deserialize, Serialize};

/// Expansion prompting strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExpansionStrategy {
    ZeroShot,
    ZeroMotive,
    OneShot,
    FiveShot,
}

impl ExpansionStrategy {
    pub const ALL: [ExpansionStrategy; 4] = [
        ExpansionStrategy::ZeroShot,
        ExpansionStrategy::ZeroMotive,
        ExpansionStrategy::OneShot,
        ExpansionStrategy::FiveShot,
    ];

    pub fn file_stem(self) -> &'static str {
        match self {
            ExpansionStrategy::ZeroShot => "zero_shot",
            ExpansionStrategy::ZeroMotive => "zero_motive",
            ExpansionStrategy::OneShot => "one_shot",
            ExpansionStrategy::FiveShot => "five_shot",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        let norm = s.trim().to_ascii_lowercase().replace(['-', '+'], "_");
        match norm.as_str() {
            "zero_shot" | "0_shot" => Some(ExpansionStrategy::ZeroShot),
            "zero_motive" | "0_motive" => Some(ExpansionStrategy::ZeroMotive),
            "one_shot" | "1_shot" => Some(ExpansionStrategy::OneShot),
            "five_shot" | "5_shot" => Some(ExpansionStrategy::FiveShot),
            _ => None,
        }
    }
}

/// Prompting strategy for LLM translation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TranslationStrategy {
    ZeroShot,
    ZeroMotive,
    OneShot,
    FiveShot,
    AllOther,
}

impl TranslationStrategy {
    pub const ALL: [TranslationStrategy; 5] = [
        TranslationStrategy::ZeroShot,
        TranslationStrategy::ZeroMotive,
        TranslationStrategy::OneShot,
        TranslationStrategy::FiveShot,
        TranslationStrategy::AllOther,
    ];

    pub fn file_stem(self) -> &'static str {
        match self {
            TranslationStrategy::ZeroShot => "zero_shot",
            TranslationStrategy::ZeroMotive => "zero_motive",
            TranslationStrategy::OneShot => "one_shot",
            TranslationStrategy::FiveShot => "five_shot",
            TranslationStrategy::AllOther => "all_other",
        }
    }
}

/// Placeholder for the target language's English name.
pub const LANGUAGE_SLOT: &str = "[language]";
/// Placeholder for the reference pairs in the all-other template.
pub const REFERENCE_SLOT: &str = "[set of English => French terms, separated by commas]";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptTemplates {
    expansion: [String; 4],
    translation: [String; 5],
}

impl Default for PromptTemplates {
    fn default() -> Self {
        Self::embedded()
    }
}

impl PromptTemplates {
    pub fn embedded() -> Self {
        PromptTemplates {
            expansion: [
                include_str!("../prompts/expansion/zero_shot.txt").to_owned(),
                include_str!("../prompts/expansion/zero_motive.txt").to_owned(),
                include_str!("../prompts/expansion/one_shot.txt").to_owned(),
                include_str!("../prompts/expansion/five_shot.txt").to_owned(),
            ],
            translation: [
                include_str!("../prompts/translation/zero_shot.txt").to_owned(),
                include_str!("../prompts/translation/zero_motive.txt").to_owned(),
                include_str!("../prompts/translation/one_shot.txt").to_owned(),
                include_str!("../prompts/translation/five_shot.txt").to_owned(),
                include_str!("../prompts/translation/all_other.txt").to_owned(),
            ],
        }
    }

    /// Loads `<dir>/expansion/<strategy>.txt` and `<dir>/translation/<strategy>.txt`.
    pub fn load_dir(dir: &Path) -> std::io::Result<Self> {
        let read = |sub: &str, stem: &str| std::fs::read_to_string(dir.join(sub).join(format!("{stem}.txt")));
        let mut t = Self::embedded();
        for (slot, s) in t.expansion.iter_mut().zip(ExpansionStrategy::ALL) {
            *slot = read("expansion", s.file_stem())?;
        }
        for (slot, s) in t.translation.iter_mut().zip(TranslationStrategy::ALL) {
            *slot = read("translation", s.file_stem())?;
        }
        Ok(t)
    }

    pub fn expansion(&self, strategy: ExpansionStrategy) -> &str {
        &self.expansion[strategy as usize]
    }

    pub fn translation(&self, strategy: TranslationStrategy) -> &str {
        &self.translation[strategy as usize]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn templates_end_where_terms_are_appended() {
        let t = PromptTemplates::embedded();
        assert!(t.expansion(ExpansionStrategy::ZeroShot).ends_with("separated by commas:  "));
        assert!(t.expansion(ExpansionStrategy::OneShot).ends_with("Please expand these terms: "));
        for s in TranslationStrategy::ALL {
            assert!(t.translation(s).contains(LANGUAGE_SLOT), "{s:?}");
        }
        assert!(t.translation(TranslationStrategy::AllOther).contains(REFERENCE_SLOT));
    }

    #[test]
    fn load_dir_matches_embedded() {
        let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("prompts");
        assert_eq!(PromptTemplates::load_dir(&dir).unwrap(), PromptTemplates::embedded());
    }

    #[test]
    fn strategy_names() {
        assert_eq!(ExpansionStrategy::parse("5-shot"), Some(ExpansionStrategy::FiveShot));
        assert_eq!(ExpansionStrategy::parse("0+Motive"), Some(ExpansionStrategy::ZeroMotive));
        assert_eq!(ExpansionStrategy::parse("one_shot"), Some(ExpansionStrategy::OneShot));
        assert_eq!(ExpansionStrategy::parse("seven"), None);
    }
}
