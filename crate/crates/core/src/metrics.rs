//! Exact-match accuracy, character n-gram F-score, and one-way ANOVA.

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricError {
    #[error("no pairs to score")]
    EmptyInput,
    #[error("invalid metric configuration: {0}")]
    Config(String),
    #[error("ANOVA needs at least two groups of at least two samples")]
    TooFewSamples,
    #[error("degenerate input: no within-group variance but groups differ")]
    DegenerateInput(Box<AnovaTable>),
    #[error("eval file line {line}: {message}")]
    Format { line: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricConfig {
    pub max_ngram_order: usize,
    pub beta: f64,
    pub strip_whitespace: bool,
}

impl Default for MetricConfig {
    fn default() -> Self {
        MetricConfig {
            max_ngram_order: 6,
            beta: 2.0,
            strip_whitespace: true,
        }
    }
}

impl MetricConfig {
    pub fn validate(&self) -> Result<(), MetricError> {
        if self.max_ngram_order == 0 {
            return Err(MetricError::Config("max_ngram_order must be at least 1".into()));
        }
        if self.beta.is_nan() || self.beta <= 0.0 || !self.beta.is_finite() {
            return Err(MetricError::Config("beta must be positive".into()));
        }
        Ok(())
    }
}

/// Percentage of pairs whose trimmed sides are byte-equal.
pub fn exact_match<H: AsRef<str>, R: AsRef<str>>(pairs: &[(H, R)]) -> Result<f64, MetricError> {
    if pairs.is_empty() {
        return Err(MetricError::EmptyInput);
    }
    let hits = pairs
        .iter()
        .filter(|(h, r)| h.as_ref().trim() == r.as_ref().trim())
        .count();
    Ok(100.0 * hits as f64 / pairs.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChrfBreakdown {
    /// `(order, chrP, chrR)` for each order that had n-grams on either side.
    pub per_order: Vec<(usize, f64, f64)>,
    pub precision: f64,
    pub recall: f64,
    pub score: f64,
}

/// Clipped match count and hypothesis/reference totals for one order.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct OrderCounts {
    matched: usize,
    hyp: usize,
    reference: usize,
}

fn prepare(text: &str, config: &MetricConfig) -> Vec<char> {
    if config.strip_whitespace {
        text.chars().filter(|c| !c.is_whitespace()).collect()
    } else {
        text.chars().collect()
    }
}

fn ngram_counts(chars: &[char], n: usize) -> HashMap<&[char], usize> {
    let mut counts = HashMap::new();
    if chars.len() >= n {
        for w in chars.windows(n) {
            *counts.entry(w).or_insert(0) += 1;
        }
    }
    counts
}

fn segment_counts(hyp: &str, reference: &str, config: &MetricConfig) -> Vec<OrderCounts> {
    let h = prepare(hyp, config);
    let r = prepare(reference, config);
    (1..=config.max_ngram_order)
        .map(|n| {
            let hc = ngram_counts(&h, n);
            let rc = ngram_counts(&r, n);
            let matched = hc
                .iter()
                .map(|(g, &c)| c.min(rc.get(g).copied().unwrap_or(0)))
                .sum();
            OrderCounts {
                matched,
                hyp: h.len().saturating_sub(n - 1),
                reference: r.len().saturating_sub(n - 1),
            }
        })
        .collect()
}

fn score_counts(counts: &[OrderCounts], beta: f64) -> ChrfBreakdown {
    let mut per_order = Vec::new();
    for (i, c) in counts.iter().enumerate() {
        if c.hyp == 0 && c.reference == 0 {
            continue;
        }
        let p = if c.hyp == 0 { 0.0 } else { c.matched as f64 / c.hyp as f64 };
        let r = if c.reference == 0 { 0.0 } else { c.matched as f64 / c.reference as f64 };
        per_order.push((i + 1, p, r));
    }
    if per_order.is_empty() {
        return ChrfBreakdown {
            per_order,
            precision: 1.0,
            recall: 1.0,
            score: 100.0,
        };
    }
    let k = per_order.len() as f64;
    let precision = per_order.iter().map(|o| o.1).sum::<f64>() / k;
    let recall = per_order.iter().map(|o| o.2).sum::<f64>() / k;
    let b2 = beta * beta;
    let denom = b2 * precision + recall;
    let score = if denom == 0.0 {
        0.0
    } else {
        100.0 * (1.0 + b2) * precision * recall / denom
    };
    ChrfBreakdown {
        per_order,
        precision,
        recall,
        score,
    }
}

pub fn chrf_segment(hypothesis: &str, reference: &str, config: &MetricConfig) -> ChrfBreakdown {
    score_counts(&segment_counts(hypothesis, reference, config), config.beta)
}

/// chrF over summed per-order counts of every pair.
pub fn chrf_corpus<H: AsRef<str>, R: AsRef<str>>(
    pairs: &[(H, R)],
    config: &MetricConfig,
) -> Result<f64, MetricError> {
    if pairs.is_empty() {
        return Err(MetricError::EmptyInput);
    }
    config.validate()?;
    let mut total = vec![OrderCounts::default(); config.max_ngram_order];
    for (h, r) in pairs {
        for (t, c) in total.iter_mut().zip(segment_counts(h.as_ref(), r.as_ref(), config)) {
            t.matched += c.matched;
            t.hyp += c.hyp;
            t.reference += c.reference;
        }
    }
    Ok(score_counts(&total, config.beta).score)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[allow(non_snake_case)]
pub struct AnovaTable {
    pub SSA: f64,
    pub SSE: f64,
    pub SST: f64,
    pub dfA: usize,
    pub dfE: usize,
    pub MSA: f64,
    pub MSE: f64,
    pub F: f64,
    pub p: f64,
}

impl AnovaTable {
    /// Completes a table from the between/within sums of squares and their degrees of freedom.
    #[allow(non_snake_case)]
    pub fn from_components(SSA: f64, dfA: usize, SSE: f64, dfE: usize) -> Result<Self, MetricError> {
        if dfA == 0 || dfE == 0 {
            return Err(MetricError::TooFewSamples);
        }
        let MSA = SSA / dfA as f64;
        let MSE = SSE / dfE as f64;
        let mut table = AnovaTable {
            SSA,
            SSE,
            SST: SSA + SSE,
            dfA,
            dfE,
            MSA,
            MSE,
            F: 0.0,
            p: 1.0,
        };
        if MSE == 0.0 {
            if SSA > 0.0 {
                table.F = f64::INFINITY;
                table.p = 0.0;
                return Err(MetricError::DegenerateInput(Box::new(table)));
            }
            return Ok(table);
        }
        table.F = MSA / MSE;
        table.p = f_upper_tail(table.F, dfA as f64, dfE as f64);
        Ok(table)
    }
}

pub fn anova_one_way(groups: &[Vec<f64>]) -> Result<AnovaTable, MetricError> {
    if groups.len() < 2 || groups.iter().any(|g| g.len() < 2) {
        return Err(MetricError::TooFewSamples);
    }
    let n: usize = groups.iter().map(Vec::len).sum();
    let grand = groups.iter().flatten().sum::<f64>() / n as f64;
    let mut ssa = 0.0;
    let mut sse = 0.0;
    for g in groups {
        let mean = g.iter().sum::<f64>() / g.len() as f64;
        ssa += g.len() as f64 * (mean - grand).powi(2);
        sse += g.iter().map(|x| (x - mean).powi(2)).sum::<f64>();
    }
    AnovaTable::from_components(ssa, groups.len() - 1, sse, n - groups.len())
}

/// P(X > f) for X ~ F(d1, d2).
pub fn f_upper_tail(f: f64, d1: f64, d2: f64) -> f64 {
    if f <= 0.0 {
        return 1.0;
    }
    if f.is_infinite() {
        return 0.0;
    }
    let x = d2 / (d2 + d1 * f);
    regularized_incomplete_beta(x, d2 / 2.0, d1 / 2.0).clamp(0.0, 1.0)
}

const BETA_EPS: f64 = 1e-12;
const BETA_MAX_ITER: usize = 200;

/// I_x(a, b).
pub fn regularized_incomplete_beta(x: f64, a: f64, b: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
    let front = ln_front.exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_continued_fraction(x, a, b) / a
    } else {
        1.0 - front * beta_continued_fraction(1.0 - x, b, a) / b
    }
}

// Modified Lentz evaluation.
fn beta_continued_fraction(x: f64, a: f64, b: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=BETA_MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < BETA_EPS {
            break;
        }
    }
    h
}

/// Lanczos approximation (g = 7, n = 9).
pub fn ln_gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = COEF[0];
    for (i, c) in COEF.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + G + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// One row of an evaluation file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvalRow {
    pub term: String,
    pub hypothesis: String,
    pub reference: String,
}

/// Parses `term<TAB>hypothesis<TAB>reference` lines; a header row starting with `term` is skipped.
pub fn parse_eval_tsv(text: &str) -> Result<Vec<EvalRow>, MetricError> {
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.is_empty() || (i == 0 && line == "term\thypothesis\treference") {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(MetricError::Format {
                line: i + 1,
                message: format!("expected 3 tab-separated fields, found {}", fields.len()),
            });
        }
        rows.push(EvalRow {
            term: fields[0].to_owned(),
            hypothesis: fields[1].to_owned(),
            reference: fields[2].to_owned(),
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub count: usize,
    pub exact_match: f64,
    pub chrf: f64,
    pub rows: Vec<(String, bool, f64)>,
}

pub fn evaluate(rows: &[EvalRow], config: &MetricConfig) -> Result<EvalReport, MetricError> {
    config.validate()?;
    let pairs: Vec<(&str, &str)> = rows
        .iter()
        .map(|r| (r.hypothesis.as_str(), r.reference.as_str()))
        .collect();
    Ok(EvalReport {
        count: rows.len(),
        exact_match: exact_match(&pairs)?,
        chrf: chrf_corpus(&pairs, config)?,
        rows: rows
            .iter()
            .map(|r| {
                (
                    r.term.clone(),
                    r.hypothesis.trim() == r.reference.trim(),
                    chrf_segment(&r.hypothesis, &r.reference, config).score,
                )
            })
            .collect(),
    })
}

impl EvalReport {
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("term\texact\tchrf\n");
        for (term, exact, chrf) in &self.rows {
            let _ = writeln!(out, "{term}\t{}\t{chrf:.2}", u8::from(*exact));
        }
        out
    }

    pub fn summary(&self) -> String {
        format!(
            "pairs: {}\nexact match: {:.1}\nchrF: {:.1}\n",
            self.count, self.exact_match, self.chrf
        )
    }
}
