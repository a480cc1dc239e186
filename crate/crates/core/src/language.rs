use std::fmt;

use serde::{Deserialize, Serialize};

/// IETF-style language tag, stored lowercase (`fr`, `el`, `zh-hans`).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Language(String);

const NAMES: [(&str, &str); 9] = [
    ("en", "English"),
    ("es", "Spanish"),
    ("fr", "French"),
    ("el", "Greek"),
    ("hi", "Hindi"),
    ("bn", "Bengali"),
    ("zh", "Mandarin"),
    ("ar", "Arabic"),
    ("und", "Undetermined"),
];

impl Language {
    pub fn new(code: impl AsRef<str>) -> Self {
        Language(code.as_ref().trim().to_ascii_lowercase())
    }

    /// Placeholder language of a lexicon read from a header-only file.
    pub fn undetermined() -> Self {
        Language("und".into())
    }

    pub fn is_undetermined(&self) -> bool {
        self.0 == "und"
    }

    pub fn code(&self) -> &str {
        &self.0
    }

    /// Primary subtag, e.g. `zh` for `zh-hans`.
    pub fn primary(&self) -> &str {
        self.0.split(['-', '_']).next().unwrap_or(&self.0)
    }

    /// English name used inside prompts. Falls back to the code.
    pub fn display_name(&self) -> &str {
        NAMES
            .iter()
            .find(|(c, _)| *c == self.primary())
            .map_or(self.0.as_str(), |(_, n)| n)
    }

    /// Accepts either a code (`fr`) or an English name (`French`).
    pub fn from_code_or_name(s: &str) -> Self {
        let trimmed = s.trim();
        NAMES
            .iter()
            .find(|(_, n)| n.eq_ignore_ascii_case(trimmed))
            .map_or_else(|| Language::new(trimmed), |(c, _)| Language::new(c))
    }
}

impl fmt::Display for Language {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Language {
    fn from(s: &str) -> Self {
        Language::new(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names() {
        assert_eq!(Language::new("EL").display_name(), "Greek");
        assert_eq!(Language::new("zh-Hans").display_name(), "Mandarin");
        assert_eq!(Language::new("qq").display_name(), "qq");
        assert_eq!(Language::from_code_or_name("French"), Language::new("fr"));
        assert_eq!(Language::from_code_or_name("es"), Language::new("es"));
    }
}
