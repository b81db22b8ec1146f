use std::collections::BTreeMap;

use serde::Serialize;

use super::AnalyticsError;
use crate::engine::Attempt;

pub const DEFAULT_BIN_WIDTH: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Bin {
    pub bin_start: usize,
    pub bin_end: usize,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LengthHistogram {
    pub group: String,
    /// Contiguous `[start, end)` bins from 0 through the longest prompt.
    pub bins: Vec<Bin>,
    pub median: Option<f64>,
    pub n: usize,
}

fn median(sorted: &[usize]) -> Option<f64> {
    let n = sorted.len();
    match n {
        0 => None,
        _ if n % 2 == 1 => Some(sorted[n / 2] as f64),
        _ => Some((sorted[n / 2 - 1] + sorted[n / 2]) as f64 / 2.0),
    }
}

/// Histogram of a set of prompt lengths.
pub fn histogram(group: &str, lengths: &[usize], bin_width: usize) -> Result<LengthHistogram, AnalyticsError> {
    if bin_width == 0 {
        return Err(AnalyticsError::InvalidArgument("bin width must be at least 1".into()));
    }
    let mut sorted = lengths.to_vec();
    sorted.sort_unstable();
    let bins = match sorted.last() {
        None => Vec::new(),
        Some(max) => {
            let mut counts = vec![0usize; max / bin_width + 1];
            for l in &sorted {
                counts[l / bin_width] += 1;
            }
            counts
                .into_iter()
                .enumerate()
                .map(|(k, count)| Bin {
                    bin_start: k * bin_width,
                    bin_end: (k + 1) * bin_width,
                    count,
                })
                .collect()
        }
    };
    Ok(LengthHistogram {
        group: group.to_string(),
        bins,
        median: median(&sorted),
        n: sorted.len(),
    })
}

/// Prompt-length histograms of counted attempts per group. `groups` maps
/// problem ids to groups (e.g. lab sessions); ungrouped problems stand alone.
pub fn length_distribution(
    log: &[Attempt],
    bin_width: usize,
    groups: Option<&BTreeMap<String, String>>,
) -> Result<Vec<LengthHistogram>, AnalyticsError> {
    if bin_width == 0 {
        return Err(AnalyticsError::InvalidArgument("bin width must be at least 1".into()));
    }
    let mut by_group: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for a in log.iter().filter(|a| a.counted()) {
        let g = groups
            .and_then(|g| g.get(&a.problem_id).cloned())
            .unwrap_or_else(|| a.problem_id.clone());
        by_group.entry(g).or_default().push(a.prompt_length);
    }
    by_group
        .iter()
        .map(|(g, ls)| histogram(g, ls, bin_width))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_example() {
        let h = histogram("A", &[10, 10, 30], 20).unwrap();
        assert_eq!(
            h.bins,
            vec![
                Bin { bin_start: 0, bin_end: 20, count: 2 },
                Bin { bin_start: 20, bin_end: 40, count: 1 },
            ]
        );
        assert_eq!(h.median, Some(10.0));
    }

    #[test]
    fn empty_group() {
        let h = histogram("A", &[], 10).unwrap();
        assert!(h.bins.is_empty());
        assert_eq!(h.median, None);
    }

    #[test]
    fn gaps_are_zero_bins() {
        let h = histogram("A", &[1, 25], 10).unwrap();
        assert_eq!(h.bins.iter().map(|b| b.count).collect::<Vec<_>>(), [1, 0, 1]);
        assert_eq!(h.median, Some(13.0));
    }

    #[test]
    fn zero_width_rejected() {
        assert!(histogram("A", &[1], 0).is_err());
    }
}
