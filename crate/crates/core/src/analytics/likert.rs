//! Summary of a five-point Likert item, including the neutral-split
//! halves of a diverging stacked bar.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use super::AnalyticsError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum LikertOption {
    SD,
    D,
    N,
    A,
    SA,
}

impl LikertOption {
    pub const ALL: [LikertOption; 5] = [
        LikertOption::SD,
        LikertOption::D,
        LikertOption::N,
        LikertOption::A,
        LikertOption::SA,
    ];
}

impl fmt::Display for LikertOption {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl FromStr for LikertOption {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.trim().to_ascii_lowercase().replace(['_', '-'], " ");
        Ok(match norm.as_str() {
            "sd" | "strongly disagree" => LikertOption::SD,
            "d" | "disagree" => LikertOption::D,
            "n" | "neutral" | "neither agree nor disagree" => LikertOption::N,
            "a" | "agree" => LikertOption::A,
            "sa" | "strongly agree" => LikertOption::SA,
            _ => return Err(format!("unknown Likert option `{}`", s.trim())),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LikertSummary {
    pub n: usize,
    pub counts: [usize; 5],
    /// Percentages in SD, D, N, A, SA order, rounded to 2 decimals.
    pub percentages: [f64; 5],
    /// Disagreement side of the diverging bar: SD, D, N/2.
    pub left: [f64; 3],
    /// Agreement side: N/2, A, SA.
    pub right: [f64; 3],
}

impl LikertSummary {
    pub fn percentage(&self, o: LikertOption) -> f64 {
        self.percentages[o as usize]
    }

    pub fn left_total(&self) -> f64 {
        self.left.iter().sum()
    }

    pub fn right_total(&self) -> f64 {
        self.right.iter().sum()
    }
}

fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

pub fn likert_from_counts(counts: [usize; 5]) -> Result<LikertSummary, AnalyticsError> {
    let n: usize = counts.iter().sum();
    if n == 0 {
        return Err(AnalyticsError::InvalidArgument("no Likert responses".into()));
    }
    let raw = counts.map(|c| 100.0 * c as f64 / n as f64);
    let half_n = raw[2] / 2.0;
    Ok(LikertSummary {
        n,
        counts,
        percentages: raw.map(round2),
        left: [round2(raw[0]), round2(raw[1]), round2(half_n)],
        right: [round2(half_n), round2(raw[3]), round2(raw[4])],
    })
}

pub fn likert_summary(responses: &[LikertOption]) -> Result<LikertSummary, AnalyticsError> {
    let mut counts = [0usize; 5];
    for r in responses {
        counts[*r as usize] += 1;
    }
    likert_from_counts(counts)
}

/// Parses response codes, one per line or comma-separated.
pub fn parse_responses(text: &str) -> Result<Vec<LikertOption>, AnalyticsError> {
    text.split([',', '\n'])
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse().map_err(AnalyticsError::Parse))
        .collect()
}
