//! Token-level translation of code through a lexicon, and a harness that
//! checks a translated program still runs the same after restoring it.

use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::time::Duration;

use thiserror::Error;
use wait_timeout::ChildExt;

use crate::lexicon::Lexicon;
use crate::pytok::{render, scan_shared, KeywordSet, LexError, TokenKind, TokenStream};

pub const EXEC_TIMEOUT: Duration = Duration::from_secs(10);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// English → target language.
    Forward,
    /// Target language → English.
    Reverse,
}

impl Direction {
    fn lookup<'a>(self, lex: &'a Lexicon, word: &str) -> Option<&'a str> {
        match self {
            Direction::Forward => lex.forward(word),
            Direction::Reverse => lex.reverse(word),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RewriteReport {
    pub replaced: usize,
    pub untouched_names: usize,
    pub direction: Direction,
}

/// Replaces NAME and KEYWORD tokens found in the lexicon. Every other token is
/// copied verbatim; spans are laid out again over the new text.
pub fn rewrite_tokens(
    stream: &TokenStream,
    lex: &Lexicon,
    direction: Direction,
) -> (TokenStream, RewriteReport) {
    let mut report = RewriteReport {
        replaced: 0,
        untouched_names: 0,
        direction,
    };
    let parts: Vec<(TokenKind, String)> = stream
        .tokens()
        .iter()
        .map(|t| {
            if !t.kind.is_word() {
                return (t.kind, t.text.clone());
            }
            match direction.lookup(lex, &t.text) {
                Some(mapped) => {
                    report.replaced += 1;
                    (t.kind, mapped.to_owned())
                }
                None => {
                    report.untouched_names += 1;
                    (t.kind, t.text.clone())
                }
            }
        })
        .collect();
    let rewritten = TokenStream::from_parts(parts, stream.keywords().clone());
    (rewritten, report)
}

pub fn rewrite_source(
    source: &str,
    lex: &Lexicon,
    direction: Direction,
    keywords: &KeywordSet,
) -> Result<String, LexError> {
    rewrite_source_with_report(source, lex, direction, keywords).map(|(s, _)| s)
}

pub fn rewrite_source_with_report(
    source: &str,
    lex: &Lexicon,
    direction: Direction,
    keywords: &KeywordSet,
) -> Result<(String, RewriteReport), LexError> {
    let stream = scan_shared(source, std::sync::Arc::new(keywords.clone()))?;
    let (rewritten, report) = rewrite_tokens(&stream, lex, direction);
    Ok((render(&rewritten), report))
}

/// Names already spelled like a target term that is not itself an English key.
///
/// Forward translation leaves these alone, but reverse translation would turn
/// them into English, so a source containing any of them does not round-trip.
pub fn round_trip_hazards(stream: &TokenStream, lex: &Lexicon) -> Vec<String> {
    let mut hazards: Vec<String> = stream
        .tokens()
        .iter()
        .filter(|t| t.kind.is_word())
        .filter(|t| lex.reverse(&t.text).is_some() && lex.forward(&t.text).is_none())
        .map(|t| t.text.clone())
        .collect();
    hazards.sort();
    hazards.dedup();
    hazards
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("source does not lex: {0}")]
    Lex(#[from] LexError),
    #[error("failed to launch {interpreter}: {message}")]
    Launch { interpreter: PathBuf, message: String },
    #[error("{which} program timed out after {seconds}s")]
    Timeout { which: &'static str, seconds: u64 },
    #[error("scratch file error: {0}")]
    Scratch(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExecCheckResult {
    pub original_stdout: Vec<u8>,
    pub restored_stdout: Vec<u8>,
    pub equivalent: bool,
    /// Exit codes of the original and the restored program; `-1` when killed by a signal.
    pub interpreter_exit_codes: (i32, i32),
    /// The program as shown to the user, in the target language.
    pub translated: String,
}

/// Translates `source` forward, restores it, runs both the original and the
/// restored program, and compares stdout bytes and exit codes.
pub fn exec_check(
    source: &str,
    lex: &Lexicon,
    keywords: &KeywordSet,
    interpreter: &Path,
    scratch_dir: &Path,
) -> Result<ExecCheckResult, HarnessError> {
    exec_check_with_timeout(source, lex, keywords, interpreter, scratch_dir, EXEC_TIMEOUT)
}

pub fn exec_check_with_timeout(
    source: &str,
    lex: &Lexicon,
    keywords: &KeywordSet,
    interpreter: &Path,
    scratch_dir: &Path,
    timeout: Duration,
) -> Result<ExecCheckResult, HarnessError> {
    let translated = rewrite_source(source, lex, Direction::Forward, keywords)?;
    let restored = rewrite_source(&translated, lex, Direction::Reverse, keywords)?;

    let (original_stdout, original_code) =
        run_program(source, interpreter, scratch_dir, timeout, "original")?;
    let (restored_stdout, restored_code) =
        run_program(&restored, interpreter, scratch_dir, timeout, "restored")?;

    let equivalent = original_stdout == restored_stdout && original_code == restored_code;
    Ok(ExecCheckResult {
        original_stdout,
        restored_stdout,
        equivalent,
        interpreter_exit_codes: (original_code, restored_code),
        translated,
    })
}

fn run_program(
    program: &str,
    interpreter: &Path,
    scratch_dir: &Path,
    timeout: Duration,
    which: &'static str,
) -> Result<(Vec<u8>, i32), HarnessError> {
    let file = tempfile::Builder::new()
        .prefix(&format!("{which}-"))
        .suffix(".py")
        .tempfile_in(scratch_dir)
        .map_err(|e| HarnessError::Scratch(format!("{}: {e}", scratch_dir.display())))?;
    std::fs::write(file.path(), program)
        .map_err(|e| HarnessError::Scratch(format!("{}: {e}", file.path().display())))?;

    let launch_err = |e: std::io::Error| HarnessError::Launch {
        interpreter: interpreter.to_path_buf(),
        message: e.to_string(),
    };
    let mut child = Command::new(interpreter)
        .arg(file.path())
        .stdin(Stdio::null())
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
        .map_err(launch_err)?;

    // Drain stdout on a thread so a chatty program cannot block on a full pipe.
    let mut stdout = child.stdout.take().expect("stdout is piped");
    let reader = std::thread::spawn(move || {
        let mut buf = Vec::new();
        stdout.read_to_end(&mut buf).map(|_| buf)
    });

    let status = match child.wait_timeout(timeout).map_err(launch_err)? {
        Some(status) => status,
        None => {
            let _ = child.kill();
            let _ = child.wait();
            let _ = reader.join();
            return Err(HarnessError::Timeout {
                which,
                seconds: timeout.as_secs(),
            });
        }
    };
    let out = reader
        .join()
        .map_err(|_| HarnessError::Scratch("stdout reader panicked".into()))?
        .map_err(launch_err)?;
    Ok((out, status.code().unwrap_or(-1)))
}
