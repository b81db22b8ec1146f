//! Cohen's kappa between two raters over the five SOLO categories.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::solo::{LabelRecord, SoloLabel};
use super::AnalyticsError;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KappaReport {
    pub n_items: usize,
    pub observed_agreement: f64,
    pub expected_agreement: f64,
    /// `None` when chance agreement is 1 and kappa is undefined.
    pub kappa: Option<f64>,
    /// `confusion[i][j]`: items rater A put in category `i` and rater B in `j`,
    /// categories in [`SoloLabel::ALL`] order.
    pub confusion: [[usize; 5]; 5],
}

impl KappaReport {
    pub fn undefined(&self) -> bool {
        self.kappa.is_none()
    }
}

/// Kappa over paired label vectors (`a[i]` and `b[i]` rate the same item).
pub fn kappa_from_pairs(a: &[SoloLabel], b: &[SoloLabel]) -> Result<KappaReport, AnalyticsError> {
    if a.len() != b.len() {
        return Err(AnalyticsError::InvalidArgument(format!(
            "label vectors differ in length ({} vs {})",
            a.len(),
            b.len()
        )));
    }
    if a.is_empty() {
        return Err(AnalyticsError::InvalidArgument("no items to compare".into()));
    }
    let mut confusion = [[0usize; 5]; 5];
    for (x, y) in a.iter().zip(b) {
        confusion[x.index()][y.index()] += 1;
    }
    let n = a.len();
    let agree: usize = (0..5).map(|k| confusion[k][k]).sum();
    let chance: usize = (0..5)
        .map(|k| {
            let row: usize = confusion[k].iter().sum();
            let col: usize = confusion.iter().map(|r| r[k]).sum();
            row * col
        })
        .sum();
    let p_o = agree as f64 / n as f64;
    let p_e = chance as f64 / (n as f64 * n as f64);
    let kappa = (chance != n * n).then(|| (p_o - p_e) / (1.0 - p_e));
    Ok(KappaReport {
        n_items: n,
        observed_agreement: p_o,
        expected_agreement: p_e,
        kappa,
        confusion,
    })
}

/// Kappa between two raters' label sets, which must cover the same
/// attempts.
pub fn cohens_kappa(a: &[LabelRecord], b: &[LabelRecord]) -> Result<KappaReport, AnalyticsError> {
    fn index(ls: &[LabelRecord]) -> BTreeMap<&str, SoloLabel> {
        ls.iter().map(|l| (l.attempt_id.as_str(), l.label)).collect()
    }
    let (ma, mb) = (index(a), index(b));
    let ka: BTreeSet<&str> = ma.keys().copied().collect();
    let kb: BTreeSet<&str> = mb.keys().copied().collect();
    if ka != kb {
        let only = |x: &BTreeSet<&str>, y: &BTreeSet<&str>| -> Vec<String> {
            x.difference(y).map(|s| s.to_string()).collect()
        };
        return Err(AnalyticsError::ItemSetMismatch {
            only_a: only(&ka, &kb),
            only_b: only(&kb, &ka),
        });
    }
    let (xs, ys): (Vec<_>, Vec<_>) = ma.iter().map(|(id, l)| (*l, mb[id])).unzip();
    kappa_from_pairs(&xs, &ys)
}
