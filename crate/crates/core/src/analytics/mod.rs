//! Measurement instruments over attempt logs and human label files.
//!
//! Everything here is a pure function of its inputs except
//! [`prompt_reliability`], which generates and judges fresh completions.
//! Reports render both as plain-text tables and as CSV.

mod kappa;
mod lengths;
mod likert;
mod reliability;
mod sample;
mod solo;
mod stats;

use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

pub use kappa::{cohens_kappa, kappa_from_pairs, KappaReport};
pub use lengths::{histogram, length_distribution, Bin, LengthHistogram, DEFAULT_BIN_WIDTH};
pub use likert::{likert_from_counts, likert_summary, parse_responses, LikertOption, LikertSummary};
pub use reliability::{prompt_reliability, ReliabilityError, ReliabilityReport};
pub use sample::sample_for_coding;
pub use solo::{
    apply_tie_rule, by_rater, read_labels, reconcile, solo_crosstab, write_labels, CrosstabRow,
    LabelRecord, SoloCrosstab, SoloLabel, RECONCILED_RATER,
};
pub use stats::{
    attempts_per_user, format_row, render_table, task_stats, StatsOptions, TaskStats,
    SIGMA_FOOTNOTE,
};

use crate::harness::VerdictKind;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalyticsError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("unresolved labels: {0}")]
    UnresolvedLabels(String),
    #[error("labels refer to unknown attempts: {}", .0.join(", "))]
    UnknownAttempts(Vec<String>),
    #[error("raters labelled different items (only A: {only_a:?}, only B: {only_b:?})")]
    ItemSetMismatch {
        only_a: Vec<String>,
        only_b: Vec<String>,
    },
}

fn csv_string<T: Serialize>(rows: impl IntoIterator<Item = T>) -> String {
    let mut wtr = csv::Writer::from_writer(Vec::new());
    for r in rows {
        wtr.serialize(r).expect("report rows serialize");
    }
    String::from_utf8(wtr.into_inner().expect("in-memory writer")).expect("csv is utf-8")
}

pub fn task_stats_csv(stats: &[TaskStats]) -> String {
    csv_string(stats)
}

#[derive(Serialize)]
struct HistogramRow<'a> {
    group: &'a str,
    bin_start: usize,
    bin_end: usize,
    count: usize,
}

/// `group,bin_start,bin_end,count` rows.
pub fn length_distribution_csv(hists: &[LengthHistogram]) -> String {
    let rows = hists.iter().flat_map(|h| {
        h.bins.iter().map(|b| HistogramRow {
            group: &h.group,
            bin_start: b.bin_start,
            bin_end: b.bin_end,
            count: b.count,
        })
    });
    let out = csv_string(rows);
    if out.is_empty() {
        "group,bin_start,bin_end,count\n".to_string()
    } else {
        out
    }
}

pub fn length_distribution_table(hists: &[LengthHistogram]) -> String {
    let mut out = String::new();
    for h in hists {
        let median = h.median.map_or("-".to_string(), |m| format!("{m:.1}"));
        let _ = writeln!(out, "{} (n={}, median={median})", h.group, h.n);
        for b in &h.bins {
            let _ = writeln!(out, "  [{:>4}, {:>4})  {}", b.bin_start, b.bin_end, b.count);
        }
    }
    out
}

#[derive(Serialize)]
struct CrosstabCsvRow<'a> {
    group: &'a str,
    label: SoloLabel,
    correct_count: usize,
    incorrect_count: usize,
    proportion_correct: f64,
    proportion_incorrect: f64,
}

/// Overall rows under group `all`, then one block per group.
pub fn solo_crosstab_csv(t: &SoloCrosstab) -> String {
    let blocks = std::iter::once(("all", &t.overall))
        .chain(t.per_group.iter().map(|(g, r)| (g.as_str(), r)));
    csv_string(blocks.flat_map(|(g, rows)| {
        rows.iter().map(move |r| CrosstabCsvRow {
            group: g,
            label: r.label,
            correct_count: r.correct_count,
            incorrect_count: r.incorrect_count,
            proportion_correct: r.proportion_correct,
            proportion_incorrect: r.proportion_incorrect,
        })
    }))
}

pub fn solo_crosstab_table(t: &SoloCrosstab) -> String {
    let mut out = String::new();
    let blocks = std::iter::once(("all", &t.overall))
        .chain(t.per_group.iter().map(|(g, r)| (g.as_str(), r)));
    for (g, rows) in blocks {
        let _ = writeln!(out, "{g}");
        let _ = writeln!(out, "  {:<17} {:>7} {:>9} {:>8}", "label", "correct", "incorrect", "%correct");
        for r in rows {
            let _ = writeln!(
                out,
                "  {:<17} {:>7} {:>9} {:>8.1}",
                r.label.as_str(),
                r.correct_count,
                r.incorrect_count,
                100.0 * r.proportion_correct
            );
        }
    }
    out
}

#[derive(Serialize)]
struct KappaCsvRow {
    n_items: usize,
    observed_agreement: f64,
    expected_agreement: f64,
    kappa: Option<f64>,
}

pub fn kappa_csv(k: &KappaReport) -> String {
    csv_string([KappaCsvRow {
        n_items: k.n_items,
        observed_agreement: k.observed_agreement,
        expected_agreement: k.expected_agreement,
        kappa: k.kappa,
    }])
}

pub fn kappa_table(k: &KappaReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "items: {}", k.n_items);
    let _ = writeln!(out, "observed agreement: {:.4}", k.observed_agreement);
    let _ = writeln!(out, "expected agreement: {:.4}", k.expected_agreement);
    match k.kappa {
        Some(v) => {
            let _ = writeln!(out, "kappa: {v:.4}");
        }
        None => out.push_str("kappa: undefined (chance agreement is 1)\n"),
    }
    out.push_str("confusion (rows: rater A, columns: rater B)\n");
    let _ = write!(out, "  {:<17}", "");
    for l in SoloLabel::ALL {
        let _ = write!(out, " {:>5}", &l.as_str()[..4]);
    }
    out.push('\n');
    for (i, row) in k.confusion.iter().enumerate() {
        let _ = write!(out, "  {:<17}", SoloLabel::ALL[i].as_str());
        for c in row {
            let _ = write!(out, " {c:>5}");
        }
        out.push('\n');
    }
    out
}

#[derive(Serialize)]
struct LikertCsvRow {
    option: LikertOption,
    count: usize,
    percentage: f64,
}

pub fn likert_csv(s: &LikertSummary) -> String {
    csv_string(LikertOption::ALL.iter().map(|o| LikertCsvRow {
        option: *o,
        count: s.counts[*o as usize],
        percentage: s.percentages[*o as usize],
    }))
}

pub fn likert_table(s: &LikertSummary) -> String {
    let mut out = String::new();
    for o in LikertOption::ALL {
        let _ = writeln!(out, "{:<3} {:>6} {:>7.2}%", o.to_string(), s.counts[o as usize], s.percentages[o as usize]);
    }
    let _ = writeln!(
        out,
        "diverging: left {:.2}% (SD {:.2}, D {:.2}, N/2 {:.2}) | right {:.2}% (N/2 {:.2}, A {:.2}, SA {:.2})",
        s.left_total(),
        s.left[0],
        s.left[1],
        s.left[2],
        s.right_total(),
        s.right[0],
        s.right[1],
        s.right[2]
    );
    out
}

#[derive(Serialize)]
struct ReliabilityCsvRow<'a> {
    problem_id: &'a str,
    prompt_text: &'a str,
    n: u32,
    pass_count: u32,
    pass_rate: f64,
}

pub fn reliability_csv(r: &ReliabilityReport) -> String {
    csv_string([ReliabilityCsvRow {
        problem_id: &r.problem_id,
        prompt_text: &r.prompt_text,
        n: r.n,
        pass_count: r.pass_count,
        pass_rate: r.pass_rate,
    }])
}

pub fn reliability_table(r: &ReliabilityReport) -> String {
    let mut out = format!(
        "{}: {}/{} passed (pass rate {:.2})\n",
        r.problem_id, r.pass_count, r.n, r.pass_rate
    );
    for k in VerdictKind::ALL {
        if let Some(c) = r.histogram.get(&k) {
            let _ = writeln!(out, "  {k}: {c}");
        }
    }
    out
}
