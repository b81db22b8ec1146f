//! Per-task attempt statistics in the shape of the course results table:
//! mean and spread of counted attempts per student, and percent solved.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::engine::Attempt;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TaskStats {
    pub problem_id: String,
    pub mean_attempts: f64,
    /// Population standard deviation.
    pub std_attempts: f64,
    pub percent_correct: f64,
    pub n_users: usize,
}

#[derive(Debug, Clone, Default)]
pub struct StatsOptions {
    /// Per-problem denominators for percent correct (e.g. enrolment) in
    /// place of the number of users who attempted.
    pub enrolled: Option<BTreeMap<String, usize>>,
}

/// Counted attempts each user needed (or spent, if never solved) per problem.
pub fn attempts_per_user(log: &[Attempt]) -> BTreeMap<String, BTreeMap<String, (u32, bool)>> {
    let mut out: BTreeMap<String, BTreeMap<String, (u32, bool)>> = BTreeMap::new();
    for a in log.iter().filter(|a| a.counted()) {
        let entry = out
            .entry(a.problem_id.clone())
            .or_default()
            .entry(a.user_id.clone())
            .or_default();
        if entry.1 {
            continue;
        }
        entry.0 += 1;
        entry.1 = a.passed();
    }
    out
}

pub fn task_stats(log: &[Attempt], opts: &StatsOptions) -> Vec<TaskStats> {
    attempts_per_user(log)
        .into_iter()
        .map(|(problem_id, users)| {
            let n = users.len();
            let counts: Vec<f64> = users.values().map(|(k, _)| *k as f64).collect();
            let mean = counts.iter().sum::<f64>() / n as f64;
            let var = counts.iter().map(|k| (k - mean).powi(2)).sum::<f64>() / n as f64;
            let solved = users.values().filter(|(_, s)| *s).count();
            let denom = opts
                .enrolled
                .as_ref()
                .and_then(|e| e.get(&problem_id).copied())
                .unwrap_or(n);
            let percent = if denom == 0 {
                0.0
            } else {
                100.0 * solved as f64 / denom as f64
            };
            TaskStats {
                problem_id,
                mean_attempts: mean,
                std_attempts: var.sqrt(),
                percent_correct: percent,
                n_users: n,
            }
        })
        .collect()
}

pub const SIGMA_FOOTNOTE: &str =
    "σ: population standard deviation of counted attempts per student.";

/// One table row: `<title>  <μ>  <σ>  <% correct>`.
pub fn format_row(title: &str, s: &TaskStats) -> String {
    format!(
        "{title}  {:.2}  {:.2}  {:.1}",
        s.mean_attempts, s.std_attempts, s.percent_correct
    )
}

/// Human-readable table with a header and the σ footnote. `titles` maps
/// problem ids to display names.
pub fn render_table(stats: &[TaskStats], titles: &BTreeMap<String, String>) -> String {
    let mut out = String::from("Task Description  μ  σ  % Correct\n");
    for s in stats {
        let title = titles.get(&s.problem_id).unwrap_or(&s.problem_id);
        let _ = writeln!(out, "{}", format_row(title, s));
    }
    out.push_str(SIGMA_FOOTNOTE);
    out.push('\n');
    out
}
