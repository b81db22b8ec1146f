//! SOLO labels, label files, the multi-label tie rule, reconciliation and
//! the label × correctness cross-tab.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::AnalyticsError;
use crate::engine::Attempt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SoloLabel {
    Prestructural,
    Unistructural,
    Multistructural,
    Relational,
    DirectRecitation,
}

impl SoloLabel {
    pub const ALL: [SoloLabel; 5] = [
        SoloLabel::Prestructural,
        SoloLabel::Unistructural,
        SoloLabel::Multistructural,
        SoloLabel::Relational,
        SoloLabel::DirectRecitation,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SoloLabel::Prestructural => "Prestructural",
            SoloLabel::Unistructural => "Unistructural",
            SoloLabel::Multistructural => "Multistructural",
            SoloLabel::Relational => "Relational",
            SoloLabel::DirectRecitation => "DirectRecitation",
        }
    }
}

impl fmt::Display for SoloLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SoloLabel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm: String = s
            .chars()
            .filter(|c| !c.is_whitespace() && *c != '_' && *c != '-')
            .collect::<String>()
            .to_ascii_lowercase();
        Ok(match norm.as_str() {
            "prestructural" | "p" => SoloLabel::Prestructural,
            "unistructural" | "u" => SoloLabel::Unistructural,
            "multistructural" | "m" => SoloLabel::Multistructural,
            "relational" | "r" => SoloLabel::Relational,
            "directrecitation" | "dr" => SoloLabel::DirectRecitation,
            _ => return Err(format!("unknown SOLO label `{s}`")),
        })
    }
}

/// Resolves the labels one rater gave one response: a relational summary
/// wins over anything else present; otherwise the rater must have given a
/// single label.
pub fn apply_tie_rule(labels: &BTreeSet<SoloLabel>) -> Result<SoloLabel, AnalyticsError> {
    if labels.contains(&SoloLabel::Relational) {
        return Ok(SoloLabel::Relational);
    }
    match labels.iter().collect::<Vec<_>>().as_slice() {
        [only] => Ok(**only),
        [] => Err(AnalyticsError::InvalidArgument("no labels given".into())),
        many => Err(AnalyticsError::UnresolvedLabels(
            many.iter().map(|l| l.to_string()).collect::<Vec<_>>().join("+"),
        )),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelRecord {
    pub attempt_id: String,
    pub rater_id: String,
    pub label: SoloLabel,
}

#[derive(Debug, Deserialize)]
struct LabelRow {
    attempt_id: String,
    rater_id: String,
    label: String,
}

/// Reads a `attempt_id,rater_id,label` file. A label cell may list several
/// labels joined by `+` or `|`; the tie rule resolves them.
pub fn read_labels(reader: impl Read) -> Result<Vec<LabelRecord>, AnalyticsError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for (i, row) in rdr.deserialize::<LabelRow>().enumerate() {
        let line = i + 2;
        let row = row.map_err(|e| AnalyticsError::Parse(format!("label file line {line}: {e}")))?;
        let labels = row
            .label
            .split(['+', '|'])
            .map(str::parse)
            .collect::<Result<BTreeSet<SoloLabel>, _>>()
            .map_err(|e| AnalyticsError::Parse(format!("label file line {line}: {e}")))?;
        let label = apply_tie_rule(&labels)
            .map_err(|e| AnalyticsError::Parse(format!("label file line {line}: {e}")))?;
        if !seen.insert((row.attempt_id.clone(), row.rater_id.clone())) {
            return Err(AnalyticsError::Parse(format!(
                "label file line {line}: second label for attempt {} by rater {}",
                row.attempt_id, row.rater_id
            )));
        }
        out.push(LabelRecord {
            attempt_id: row.attempt_id,
            rater_id: row.rater_id,
            label,
        });
    }
    Ok(out)
}

pub fn write_labels(w: impl Write, labels: &[LabelRecord]) -> Result<(), AnalyticsError> {
    let mut wtr = csv::Writer::from_writer(w);
    for l in labels {
        wtr.serialize(l).map_err(|e| AnalyticsError::Parse(e.to_string()))?;
    }
    wtr.flush().map_err(|e| AnalyticsError::Parse(e.to_string()))
}

/// Labels given by one rater.
pub fn by_rater(labels: &[LabelRecord], rater_id: &str) -> Vec<LabelRecord> {
    labels.iter().filter(|l| l.rater_id == rater_id).cloned().collect()
}

pub const RECONCILED_RATER: &str = "reconciled";

/// Merges two raters' labels. Agreements and single-rater items pass
/// through; disagreements need an entry in `overrides`, which always wins.
pub fn reconcile(
    a: &[LabelRecord],
    b: &[LabelRecord],
    overrides: &[LabelRecord],
) -> Result<Vec<LabelRecord>, AnalyticsError> {
    let index = |ls: &[LabelRecord]| -> BTreeMap<String, SoloLabel> {
        ls.iter().map(|l| (l.attempt_id.clone(), l.label)).collect()
    };
    let (ma, mb, mo) = (index(a), index(b), index(overrides));
    let ids: BTreeSet<&String> = ma.keys().chain(mb.keys()).chain(mo.keys()).collect();
    let mut out = Vec::new();
    let mut unresolved = Vec::new();
    for id in ids {
        let label = match (mo.get(id), ma.get(id), mb.get(id)) {
            (Some(o), _, _) => *o,
            (None, Some(x), Some(y)) if x == y => *x,
            (None, Some(_), Some(_)) => {
                unresolved.push(id.clone());
                continue;
            }
            (None, Some(x), None) | (None, None, Some(x)) => *x,
            (None, None, None) => unreachable!(),
        };
        out.push(LabelRecord {
            attempt_id: id.clone(),
            rater_id: RECONCILED_RATER.to_string(),
            label,
        });
    }
    if !unresolved.is_empty() {
        return Err(AnalyticsError::UnresolvedLabels(format!(
            "raters disagree on {}",
            unresolved.join(", ")
        )));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrosstabRow {
    pub label: SoloLabel,
    pub correct_count: usize,
    pub incorrect_count: usize,
    pub proportion_correct: f64,
    pub proportion_incorrect: f64,
}

impl CrosstabRow {
    fn new(label: SoloLabel, correct: usize, incorrect: usize) -> Self {
        let total = correct + incorrect;
        let frac = |x: usize| if total == 0 { 0.0 } else { x as f64 / total as f64 };
        Self {
            label,
            correct_count: correct,
            incorrect_count: incorrect,
            proportion_correct: frac(correct),
            proportion_incorrect: frac(incorrect),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SoloCrosstab {
    pub overall: Vec<CrosstabRow>,
    pub per_group: BTreeMap<String, Vec<CrosstabRow>>,
}

fn rows(tally: &BTreeMap<SoloLabel, (usize, usize)>) -> Vec<CrosstabRow> {
    SoloLabel::ALL
        .iter()
        .map(|l| {
            let (c, i) = tally.get(l).copied().unwrap_or_default();
            CrosstabRow::new(*l, c, i)
        })
        .collect()
}

/// Joins one label per attempt with the attempt's verdict (Pass = correct).
/// `groups` maps problem id to a group such as a lab session.
pub fn solo_crosstab(
    labels: &[LabelRecord],
    log: &[Attempt],
    groups: Option<&BTreeMap<String, String>>,
) -> Result<SoloCrosstab, AnalyticsError> {
    let by_id: BTreeMap<&str, &Attempt> = log.iter().map(|a| (a.attempt_id.as_str(), a)).collect();
    let mut final_labels: BTreeMap<&str, SoloLabel> = BTreeMap::new();
    for l in labels {
        if let Some(prev) = final_labels.insert(&l.attempt_id, l.label) {
            if prev != l.label {
                return Err(AnalyticsError::UnresolvedLabels(format!(
                    "attempt {} has conflicting labels; reconcile first",
                    l.attempt_id
                )));
            }
        }
    }
    let unknown: Vec<String> = final_labels
        .keys()
        .filter(|id| !by_id.contains_key(*id))
        .map(|id| id.to_string())
        .collect();
    if !unknown.is_empty() {
        return Err(AnalyticsError::UnknownAttempts(unknown));
    }
    let mut overall: BTreeMap<SoloLabel, (usize, usize)> = BTreeMap::new();
    let mut grouped: BTreeMap<String, BTreeMap<SoloLabel, (usize, usize)>> = BTreeMap::new();
    for (id, label) in final_labels {
        let a = by_id[id];
        let group = groups
            .and_then(|g| g.get(&a.problem_id).cloned())
            .unwrap_or_else(|| a.problem_id.clone());
        for tally in [overall.entry(label).or_default(), grouped.entry(group).or_default().entry(label).or_default()] {
            if a.passed() {
                tally.0 += 1;
            } else {
                tally.1 += 1;
            }
        }
    }
    Ok(SoloCrosstab {
        overall: rows(&overall),
        per_group: grouped.iter().map(|(g, t)| (g.clone(), rows(t))).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(ls: &[SoloLabel]) -> BTreeSet<SoloLabel> {
        ls.iter().copied().collect()
    }

    #[test]
    fn tie_rule() {
        use SoloLabel::*;
        assert_eq!(apply_tie_rule(&set(&[Multistructural, Relational])).unwrap(), Relational);
        assert_eq!(apply_tie_rule(&set(&[Unistructural])).unwrap(), Unistructural);
        assert!(matches!(
            apply_tie_rule(&set(&[Prestructural, Multistructural])),
            Err(AnalyticsError::UnresolvedLabels(_))
        ));
        assert!(apply_tie_rule(&set(&[])).is_err());
    }

    #[test]
    fn label_names() {
        assert_eq!("Direct Recitation".parse::<SoloLabel>(), Ok(SoloLabel::DirectRecitation));
        assert_eq!("dr".parse::<SoloLabel>(), Ok(SoloLabel::DirectRecitation));
        assert_eq!("RELATIONAL".parse::<SoloLabel>(), Ok(SoloLabel::Relational));
        assert!("holistic".parse::<SoloLabel>().is_err());
    }

    #[test]
    fn label_file_with_tie() {
        let csv = "attempt_id,rater_id,label\na1,r1,Multistructural+Relational\na2,r1,U\n";
        let ls = read_labels(csv.as_bytes()).unwrap();
        assert_eq!(ls[0].label, SoloLabel::Relational);
        assert_eq!(ls[1].label, SoloLabel::Unistructural);
        let mut out = Vec::new();
        write_labels(&mut out, &ls).unwrap();
        assert_eq!(read_labels(out.as_slice()).unwrap(), ls);
    }

    #[test]
    fn label_file_rejects_duplicates() {
        let csv = "attempt_id,rater_id,label\na1,r1,R\na1,r1,M\n";
        assert!(read_labels(csv.as_bytes()).is_err());
    }

    #[test]
    fn reconciliation() {
        let rec = |id: &str, r: &str, l| LabelRecord {
            attempt_id: id.into(),
            rater_id: r.into(),
            label: l,
        };
        use SoloLabel::*;
        let a = vec![rec("1", "a", Relational), rec("2", "a", Unistructural), rec("3", "a", Prestructural)];
        let b = vec![rec("1", "b", Relational), rec("2", "b", Multistructural)];
        assert!(reconcile(&a, &b, &[]).is_err());
        let merged = reconcile(&a, &b, &[rec("2", "c", Multistructural)]).unwrap();
        let got: Vec<_> = merged.iter().map(|l| (l.attempt_id.as_str(), l.label)).collect();
        assert_eq!(got, [("1", Relational), ("2", Multistructural), ("3", Prestructural)]);
    }
}
