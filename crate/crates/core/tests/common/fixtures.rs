//! Synthetic logs and label sets with hand-known answers.

use chrono::{DateTime, TimeZone, Utc};

use eipe_core::analytics::SoloLabel;
use eipe_core::{Attempt, VerdictKind};

pub fn at(seconds: i64) -> DateTime<Utc> {
    Utc.timestamp_opt(1_700_000_000 + seconds, 0).unwrap()
}

pub fn attempt(seq: u64, user: &str, problem: &str, index: u32, pass: bool, prompt: &str) -> Attempt {
    Attempt {
        attempt_id: format!("att-{seq:08}"),
        user_id: user.into(),
        problem_id: problem.into(),
        attempt_index: index,
        exploratory: false,
        prompt_text: prompt.into(),
        prompt_length: prompt.chars().count(),
        raw_completion: String::new(),
        extracted_source: None,
        verdict_kind: if pass { VerdictKind::Pass } else { VerdictKind::TestFail },
        case_results: Vec::new(),
        submitted_at: at(seq as i64),
        latency_ms: 5,
    }
}

/// Users on `problem` taking `attempts[u]` tries each, solving on the last
/// one when `solved[u]`.
pub fn log_for(problem: &str, attempts: &[u32], solved: &[bool]) -> Vec<Attempt> {
    let mut out = Vec::new();
    for (u, (&k, &s)) in attempts.iter().zip(solved).enumerate() {
        for i in 1..=k {
            let seq = out.len() as u64 + 1;
            out.push(attempt(seq, &format!("user{u}"), problem, i, s && i == k, "prompt"));
        }
    }
    out
}

/// Rows are rater A's label, columns rater B's, in `SoloLabel::ALL` order.
/// 100 items, chance-corrected agreement close to 0.79.
pub const KAPPA_CONFUSION: [[usize; 5]; 5] = [
    [8, 1, 0, 0, 0],
    [1, 10, 2, 0, 0],
    [0, 2, 19, 3, 0],
    [0, 0, 3, 40, 1],
    [0, 1, 0, 1, 8],
];

pub fn kappa_pairs() -> (Vec<SoloLabel>, Vec<SoloLabel>) {
    let (mut a, mut b) = (Vec::new(), Vec::new());
    for (i, row) in KAPPA_CONFUSION.iter().enumerate() {
        for (j, &c) in row.iter().enumerate() {
            for _ in 0..c {
                a.push(SoloLabel::ALL[i]);
                b.push(SoloLabel::ALL[j]);
            }
        }
    }
    (a, b)
}

/// Chance agreement as the fraction of all n² cross pairs that agree.
pub fn brute_force_kappa(a: &[SoloLabel], b: &[SoloLabel]) -> f64 {
    let n = a.len() as f64;
    let po = a.iter().zip(b).filter(|(x, y)| x == y).count() as f64 / n;
    let mut cross = 0usize;
    for x in a {
        for y in b {
            if x == y {
                cross += 1;
            }
        }
    }
    let pe = cross as f64 / (n * n);
    (po - pe) / (1.0 - pe)
}

/// Likert proportions as printed on the survey chart, SD..SA.
pub const LIKERT_ANCHORS: [f64; 5] = [1.05, 4.30, 26.16, 55.93, 11.63];
