//! CSV ingestion (`score,label`) and JSON bin edges.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::Read;
use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::model::{BinEdges, Class, Record, ScoredDataset};

/// How the label column is treated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LabelMode {
    /// Drop labels (target data).
    Ignore,
    /// Map the two tags onto classes. `positive` names the tag for class
    /// `A`; when absent the lexicographically first tag is used.
    Classes { positive: Option<String> },
}

#[derive(Debug, Deserialize)]
struct Row {
    score: f64,
    #[serde(default)]
    label: Option<String>,
}

/// Reads a `score,label` CSV; the label column may be missing or empty.
pub fn read_scores<R: Read>(reader: R, name: &str, mode: &LabelMode) -> Result<ScoredDataset> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.get(0) != Some("score") {
        return Err(Error::invalid(format!(
            "{name}: expected header `score,label`, got `{}`",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut rows = Vec::new();
    for row in rdr.deserialize::<Row>() {
        let row = row?;
        let label = row.label.filter(|l| !l.is_empty());
        rows.push((row.score, label));
    }

    let records = match mode {
        LabelMode::Ignore => rows
            .into_iter()
            .map(|(score, _)| Record { score, label: None })
            .collect(),
        LabelMode::Classes { positive } => {
            let tags: BTreeSet<&str> = rows.iter().filter_map(|(_, l)| l.as_deref()).collect();
            if tags.len() > 2 {
                return Err(Error::invalid(format!(
                    "{name}: more than two label values: {tags:?}"
                )));
            }
            let positive = match positive {
                Some(p) => p.clone(),
                None => tags
                    .iter()
                    .next()
                    .map(|s| s.to_string())
                    .ok_or_else(|| Error::invalid(format!("{name}: no labels present")))?,
            };
            rows.into_iter()
                .map(|(score, label)| {
                    let label = label.map(|l| if l == positive { Class::A } else { Class::Ac });
                    Record { score, label }
                })
                .collect()
        }
    };
    ScoredDataset::new(name, records)
}

pub fn read_scores_file(path: &Path, mode: &LabelMode) -> Result<ScoredDataset> {
    let name = path.display().to_string();
    read_scores(File::open(path)?, &name, mode)
}

/// Bin edges from a JSON array of numbers.
pub fn read_edges_file(path: &Path) -> Result<BinEdges> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn classes() -> LabelMode {
        LabelMode::Classes { positive: None }
    }

    #[test]
    fn first_tag_is_class_a() {
        let csv = "score,label\n0.1,pos\n0.9,neg\n0.4, pos\n";
        let d = read_scores(csv.as_bytes(), "t", &classes()).unwrap();
        let labels: Vec<_> = d.records().iter().map(|r| r.label.unwrap()).collect();
        assert_eq!(labels, vec![Class::Ac, Class::A, Class::Ac]);

        let mode = LabelMode::Classes {
            positive: Some("pos".into()),
        };
        let d = read_scores(csv.as_bytes(), "t", &mode).unwrap();
        assert_eq!(d.records()[0].label, Some(Class::A));
    }

    #[test]
    fn label_column_optional() {
        let d = read_scores("score\n1.5\n-2e-3\n".as_bytes(), "t", &LabelMode::Ignore).unwrap();
        assert_eq!(d.scores().collect::<Vec<_>>(), vec![1.5, -0.002]);
        let d = read_scores("score,label\n1.5,\n2.5,x\n".as_bytes(), "t", &LabelMode::Ignore).unwrap();
        assert!(d.records().iter().all(|r| r.label.is_none()));
    }

    #[test]
    fn malformed_input() {
        assert!(read_scores("score,label\nabc,x\n".as_bytes(), "t", &classes()).is_err());
        assert!(read_scores("value,label\n1,x\n".as_bytes(), "t", &classes()).is_err());
        assert!(read_scores("score,label\n1,a\n2,b\n3,c\n".as_bytes(), "t", &classes()).is_err());
        assert!(read_scores("score,label\nNaN,a\n".as_bytes(), "t", &classes()).is_err());
    }
}
