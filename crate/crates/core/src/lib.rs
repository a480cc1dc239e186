//! Reversible localization of Python's natural-language surface (keywords,
//! builtins, library members), and a pipeline that builds the term lexicons
//! it needs: expansion, translation, post-processing, and abbreviation.

pub mod abbrev;
pub mod backends;
pub mod expander;
pub mod language;
pub mod metrics;
pub mod pipeline;
pub mod lexicon;
pub mod prompts;
pub mod pytok;
pub mod rewriter;
pub mod termtrans;

pub use language::Language;
pub use lexicon::{build_lexicon, merge_lexicons, read_lexicon, write_lexicon, Lexicon, TermRecord};
pub use pytok::{render, scan, KeywordSet, LexError, Token, TokenKind, TokenStream};
