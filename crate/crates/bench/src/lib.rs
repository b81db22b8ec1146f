//! Synthetic inputs for the benchmarks.

use std::path::PathBuf;

use chrono::{TimeZone, Utc};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use eipe_core::analytics::SoloLabel;
use eipe_core::{Attempt, VerdictKind};

pub fn bank_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../bank")
}

/// `users` students on `problems` tasks, each making 1 to 20 attempts and
/// solving on the last one about two times in three.
pub fn synthetic_log(users: usize, problems: usize, seed: u64) -> Vec<Attempt> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for p in 0..problems {
        for u in 0..users {
            let tries = rng.gen_range(1..=20u32);
            let solves = rng.gen_bool(0.66);
            for i in 1..=tries {
                let len = rng.gen_range(10..300);
                let prompt: String = "describe the loop ".chars().cycle().take(len).collect();
                let seq = out.len() as i64;
                out.push(Attempt {
                    attempt_id: format!("att-{seq:08}"),
                    user_id: format!("user{u}"),
                    problem_id: format!("task-{p}"),
                    attempt_index: i,
                    exploratory: false,
                    prompt_length: len,
                    prompt_text: prompt,
                    raw_completion: String::new(),
                    extracted_source: None,
                    verdict_kind: if solves && i == tries { VerdictKind::Pass } else { VerdictKind::TestFail },
                    case_results: Vec::new(),
                    submitted_at: Utc.timestamp_opt(1_700_000_000 + seq, 0).unwrap(),
                    latency_ms: 5,
                });
            }
        }
    }
    out
}

/// Two raters who agree on roughly 80% of `n` items.
pub fn synthetic_labels(n: usize, seed: u64) -> (Vec<SoloLabel>, Vec<SoloLabel>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let a = SoloLabel::ALL[rng.gen_range(0..5)];
            let b = if rng.gen_bool(0.8) { a } else { SoloLabel::ALL[rng.gen_range(0..5)] };
            (a, b)
        })
        .unzip()
}
