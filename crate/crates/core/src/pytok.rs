//! Lossless tokenizer for Python source.
//!
//! Every byte of the input belongs to exactly one token, so concatenating the
//! token texts reproduces the source. There is no grammar here: indentation is
//! plain whitespace and f-string interiors are a single opaque token.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use thiserror::Error;

/// Python 3.10 hard keywords. Soft keywords (`match`, `case`, `_`) are names.
pub const PYTHON_KEYWORDS: [&str; 35] = [
    "False", "None", "True", "and", "as", "assert", "async", "await", "break", "class",
    "continue", "def", "del", "elif", "else", "except", "finally", "for", "from", "global",
    "if", "import", "in", "is", "lambda", "nonlocal", "not", "or", "pass", "raise", "return",
    "try", "while", "with", "yield",
];

// Longest first so greedy matching picks `**=` over `**` over `*`.
const OPERATORS: [&str; 47] = [
    "**=", "//=", ">>=", "<<=", "...", "->", ":=", "**", "//", "<<", ">>", "<=", ">=", "==", "!=",
    "+=", "-=", "*=", "/=", "%=", "@=", "&=", "|=", "^=", "+", "-", "*", "/", "%", "@", "&", "|",
    "^", "~", "<", ">", "(", ")", "[", "]", "{", "}", ",", ":", ";", ".", "=",
];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LexError {
    #[error("unterminated string starting at byte {offset}")]
    UnterminatedString { offset: usize },
    #[error("invalid character {ch:?} at byte {offset}")]
    InvalidCharacter { offset: usize, ch: char },
    #[error("failed to read keyword file: {0}")]
    KeywordFile(String),
}

impl LexError {
    pub fn offset(&self) -> Option<usize> {
        match self {
            LexError::UnterminatedString { offset } | LexError::InvalidCharacter { offset, .. } => {
                Some(*offset)
            }
            LexError::KeywordFile(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TokenKind {
    Name,
    Keyword,
    String,
    FString,
    Comment,
    Number,
    Operator,
    Whitespace,
    Newline,
    LineContinuation,
}

impl TokenKind {
    /// Kinds that carry the natural-language surface of the code.
    pub fn is_word(self) -> bool {
        matches!(self, TokenKind::Name | TokenKind::Keyword)
    }
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            TokenKind::Name => "NAME",
            TokenKind::Keyword => "KEYWORD",
            TokenKind::String => "STRING",
            TokenKind::FString => "FSTRING",
            TokenKind::Comment => "COMMENT",
            TokenKind::Number => "NUMBER",
            TokenKind::Operator => "OPERATOR",
            TokenKind::Whitespace => "WHITESPACE",
            TokenKind::Newline => "NEWLINE",
            TokenKind::LineContinuation => "LINE_CONTINUATION",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Span {
    pub offset: usize,
    pub len: usize,
}

impl Span {
    pub fn end(&self) -> usize {
        self.offset + self.len
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    pub span: Span,
}

/// The set of words the scanner classifies as [`TokenKind::Keyword`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeywordSet {
    words: BTreeSet<String>,
}

impl KeywordSet {
    pub fn python310() -> Self {
        Self::from_words(PYTHON_KEYWORDS.iter().copied())
    }

    pub fn from_words<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        KeywordSet {
            words: words.into_iter().map(Into::into).collect(),
        }
    }

    /// Parses one keyword per line; blank lines are ignored.
    pub fn parse(text: &str) -> Self {
        Self::from_words(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty())
                .map(str::to_owned),
        )
    }

    pub fn load(path: &Path) -> Result<Self, LexError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LexError::KeywordFile(format!("{}: {e}", path.display())))?;
        Ok(Self::parse(&text))
    }

    pub fn contains(&self, word: &str) -> bool {
        self.words.contains(word)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.words.iter().map(String::as_str)
    }
}

impl Default for KeywordSet {
    fn default() -> Self {
        Self::python310()
    }
}

/// Tokens of one source text, partitioning `[0, source_len)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenStream {
    tokens: Vec<Token>,
    source_len: usize,
    keywords: Arc<KeywordSet>,
}

impl TokenStream {
    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn source_len(&self) -> usize {
        self.source_len
    }

    pub fn keywords(&self) -> &Arc<KeywordSet> {
        &self.keywords
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Builds a stream from token kinds and texts, laying spans out end to end.
    /// Word tokens are reclassified against `keywords`.
    pub fn from_parts<I>(parts: I, keywords: Arc<KeywordSet>) -> Self
    where
        I: IntoIterator<Item = (TokenKind, String)>,
    {
        let mut offset = 0;
        let tokens = parts
            .into_iter()
            .map(|(kind, text)| {
                let kind = if kind.is_word() {
                    if keywords.contains(&text) {
                        TokenKind::Keyword
                    } else {
                        TokenKind::Name
                    }
                } else {
                    kind
                };
                let span = Span {
                    offset,
                    len: text.len(),
                };
                offset += text.len();
                Token { kind, text, span }
            })
            .collect();
        TokenStream {
            tokens,
            source_len: offset,
            keywords,
        }
    }

    /// Checks contiguity, coverage, and the absence of empty tokens.
    pub fn is_partition(&self) -> bool {
        let mut expected = 0;
        for t in &self.tokens {
            if t.span.offset != expected || t.span.len == 0 || t.span.len != t.text.len() {
                return false;
            }
            expected = t.span.end();
        }
        expected == self.source_len
    }
}

pub fn scan(source: &str, keywords: &KeywordSet) -> Result<TokenStream, LexError> {
    scan_shared(source, Arc::new(keywords.clone()))
}

/// Like [`scan`], reusing an already shared keyword set.
pub fn scan_shared(source: &str, keywords: Arc<KeywordSet>) -> Result<TokenStream, LexError> {
    let mut scanner = Scanner {
        src: source,
        pos: 0,
        keywords: &keywords,
        tokens: Vec::new(),
    };
    scanner.run()?;
    let tokens = scanner.tokens;
    Ok(TokenStream {
        tokens,
        source_len: source.len(),
        keywords,
    })
}

pub fn render(stream: &TokenStream) -> String {
    let mut out = String::with_capacity(stream.source_len);
    for t in &stream.tokens {
        out.push_str(&t.text);
    }
    out
}

pub fn is_identifier_start(c: char) -> bool {
    c == '_' || unicode_ident::is_xid_start(c)
}

pub fn is_identifier_continue(c: char) -> bool {
    unicode_ident::is_xid_continue(c)
}

/// True when `s` is a single Python identifier.
pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if is_identifier_start(c) => chars.all(is_identifier_continue),
        _ => false,
    }
}

struct Scanner<'a> {
    src: &'a str,
    pos: usize,
    keywords: &'a KeywordSet,
    tokens: Vec<Token>,
}

impl<'a> Scanner<'a> {
    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn peek_at(&self, byte_offset: usize) -> Option<char> {
        self.src.get(self.pos + byte_offset..)?.chars().next()
    }

    fn push(&mut self, kind: TokenKind, end: usize) {
        debug_assert!(end > self.pos);
        self.tokens.push(Token {
            kind,
            text: self.src[self.pos..end].to_owned(),
            span: Span {
                offset: self.pos,
                len: end - self.pos,
            },
        });
        self.pos = end;
    }

    fn run(&mut self) -> Result<(), LexError> {
        while let Some(c) = self.peek() {
            let start = self.pos;
            match c {
                '\n' => self.push(TokenKind::Newline, start + 1),
                '\r' => {
                    let len = if self.rest().starts_with("\r\n") { 2 } else { 1 };
                    self.push(TokenKind::Newline, start + len);
                }
                ' ' | '\t' | '\x0c' | '\u{feff}' => {
                    let len = self
                        .rest()
                        .char_indices()
                        .find(|&(_, c)| !matches!(c, ' ' | '\t' | '\x0c' | '\u{feff}'))
                        .map_or(self.rest().len(), |(i, _)| i);
                    self.push(TokenKind::Whitespace, start + len);
                }
                '#' => {
                    let len = self
                        .rest()
                        .find(['\n', '\r'])
                        .unwrap_or(self.rest().len());
                    self.push(TokenKind::Comment, start + len);
                }
                '\\' => {
                    let after = &self.rest()[1..];
                    let nl = if after.starts_with("\r\n") {
                        2
                    } else if after.starts_with('\n') || after.starts_with('\r') {
                        1
                    } else {
                        return Err(LexError::InvalidCharacter {
                            offset: start,
                            ch: '\\',
                        });
                    };
                    self.push(TokenKind::LineContinuation, start + 1 + nl);
                }
                '\'' | '"' => {
                    let end = scan_string_body(self.src, start, false)?;
                    self.push(TokenKind::String, end);
                }
                c if c.is_ascii_digit() => {
                    let end = self.number_end();
                    self.push(TokenKind::Number, end);
                }
                '.' if self.peek_at(1).is_some_and(|c| c.is_ascii_digit()) => {
                    let end = self.number_end();
                    self.push(TokenKind::Number, end);
                }
                c if is_identifier_start(c) => self.word()?,
                _ => {
                    if let Some(op) = OPERATORS.iter().find(|op| self.rest().starts_with(**op)) {
                        self.push(TokenKind::Operator, start + op.len());
                    } else if c == '!' {
                        // conversion marker, only meaningful inside f-string replacement fields
                        self.push(TokenKind::Operator, start + 1);
                    } else {
                        return Err(LexError::InvalidCharacter { offset: start, ch: c });
                    }
                }
            }
        }
        Ok(())
    }

    fn word(&mut self) -> Result<(), LexError> {
        let start = self.pos;
        let len = self
            .rest()
            .char_indices()
            .skip(1)
            .find(|&(_, c)| !is_identifier_continue(c))
            .map_or(self.rest().len(), |(i, _)| i);
        let word = &self.rest()[..len];
        if let Some('\'' | '"') = self.peek_at(len) {
            if let Some(fstring) = string_prefix(word) {
                let end = scan_string_body(self.src, start + len, fstring)?;
                let kind = if fstring {
                    TokenKind::FString
                } else {
                    TokenKind::String
                };
                self.push(kind, end);
                return Ok(());
            }
        }
        let kind = if self.keywords.contains(word) {
            TokenKind::Keyword
        } else {
            TokenKind::Name
        };
        self.push(kind, start + len);
        Ok(())
    }

    fn number_end(&self) -> usize {
        let bytes = self.rest().as_bytes();
        let hex = bytes.len() > 1 && bytes[0] == b'0' && matches!(bytes[1], b'x' | b'X');
        let mut i = 0;
        while i < bytes.len() {
            let b = bytes[i];
            let exponent_sign = (b == b'+' || b == b'-')
                && !hex
                && i > 0
                && matches!(bytes[i - 1], b'e' | b'E')
                && bytes.get(i + 1).is_some_and(u8::is_ascii_digit);
            if b.is_ascii_alphanumeric() || b == b'_' || b == b'.' || exponent_sign {
                i += 1;
            } else {
                break;
            }
        }
        self.pos + i
    }
}

/// Returns `Some(is_fstring)` when `word` is a legal string prefix.
fn string_prefix(word: &str) -> Option<bool> {
    if word.len() > 2 {
        return None;
    }
    let lower = word.to_ascii_lowercase();
    match lower.as_str() {
        "r" | "u" | "b" | "br" | "rb" => Some(false),
        "f" | "fr" | "rf" => Some(true),
        _ => None,
    }
}

/// Scans a string literal whose opening quote is at `quote_at`; returns the
/// byte offset one past the closing quote.
fn scan_string_body(src: &str, quote_at: usize, fstring: bool) -> Result<usize, LexError> {
    let bytes = src.as_bytes();
    let q = bytes[quote_at];
    let triple = bytes.get(quote_at + 1) == Some(&q) && bytes.get(quote_at + 2) == Some(&q);
    // Token start is the prefix, but errors report the quote position.
    let unterminated = LexError::UnterminatedString { offset: quote_at };
    let mut i = quote_at + if triple { 3 } else { 1 };
    let mut depth = 0usize;
    while i < bytes.len() {
        let b = bytes[i];
        match b {
            b'\\' => {
                // An escaped line break is allowed even in single-quoted strings.
                i += 2;
                if bytes.get(i - 1) == Some(&b'\r') && bytes.get(i) == Some(&b'\n') {
                    i += 1;
                }
                continue;
            }
            b'\n' | b'\r' if !triple && depth == 0 => return Err(unterminated),
            _ if fstring && b == b'{' => {
                if depth == 0 && bytes.get(i + 1) == Some(&b'{') {
                    i += 2;
                    continue;
                }
                depth += 1;
            }
            _ if fstring && b == b'}' && depth > 0 => depth -= 1,
            b'\'' | b'"' if fstring && depth > 0 => {
                // A literal nested inside a replacement field.
                i = scan_string_body(src, i, false)?;
                continue;
            }
            _ if b == q => {
                if !triple {
                    return Ok(i + 1);
                }
                if bytes.get(i + 1) == Some(&q) && bytes.get(i + 2) == Some(&q) {
                    return Ok(i + 3);
                }
            }
            _ => {}
        }
        i += 1;
    }
    Err(unterminated)
}
