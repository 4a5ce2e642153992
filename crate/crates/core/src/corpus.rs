//! Labeled document collections in the unified TSV layout
//!
//! ```text
//! doc_id <TAB> label[,label...] <TAB> train|test|- <TAB> text
//! ```

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::classifier::Mode;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TaskKind {
    Binary,
    Multiclass,
    Multilabel,
}

impl TaskKind {
    pub fn name(self) -> &'static str {
        match self {
            TaskKind::Binary => "binary",
            TaskKind::Multiclass => "multiclass",
            TaskKind::Multilabel => "multilabel",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "binary" => Some(TaskKind::Binary),
            "multiclass" => Some(TaskKind::Multiclass),
            "multilabel" => Some(TaskKind::Multilabel),
            _ => None,
        }
    }

    pub fn classifier_mode(self) -> Mode {
        match self {
            TaskKind::Binary => Mode::Binary,
            TaskKind::Multiclass => Mode::MulticlassOvr,
            TaskKind::Multilabel => Mode::MultilabelOvr,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitHint {
    Train,
    Test,
    Unassigned,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub id: String,
    pub labels: Vec<String>,
    pub split: SplitHint,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledCorpus {
    pub task: TaskKind,
    pub documents: Vec<Document>,
}

impl LabeledCorpus {
    /// Validates and wraps `documents`.
    pub fn new(task: TaskKind, documents: Vec<Document>) -> Result<Self> {
        let mut ids = BTreeSet::new();
        for (i, d) in documents.iter().enumerate() {
            if !ids.insert(d.id.as_str()) {
                return Err(Error::Parse {
                    line: i + 1,
                    message: format!("duplicate document id {:?}", d.id),
                });
            }
            if task != TaskKind::Multilabel && d.labels.len() != 1 {
                return Err(Error::Parse {
                    line: i + 1,
                    message: format!(
                        "{} task needs exactly one label, found {}",
                        task.name(),
                        d.labels.len()
                    ),
                });
            }
        }
        let corpus = Self { task, documents };
        if task == TaskKind::Binary {
            let n = corpus.classes().len();
            if n > 2 {
                return Err(Error::Labels(format!(
                    "binary task with {n} distinct labels"
                )));
            }
        }
        Ok(corpus)
    }

    /// Parses the TSV layout. Blank lines are skipped; line numbers in errors
    /// are 1-based.
    pub fn parse_tsv(input: &str, task: TaskKind) -> Result<Self> {
        let mut documents = Vec::new();
        let mut line_of = Vec::new();
        for (n, line) in input.lines().enumerate() {
            let lineno = n + 1;
            let line = line.strip_suffix('\r').unwrap_or(line);
            if line.trim().is_empty() {
                continue;
            }
            let mut fields = line.splitn(4, '\t');
            let (Some(id), Some(labels), Some(hint), Some(text)) =
                (fields.next(), fields.next(), fields.next(), fields.next())
            else {
                return Err(Error::Parse {
                    line: lineno,
                    message: "expected 4 tab-separated fields".into(),
                });
            };
            if id.is_empty() {
                return Err(Error::Parse {
                    line: lineno,
                    message: "empty document id".into(),
                });
            }
            let labels: Vec<String> = labels
                .split(',')
                .map(str::trim)
                .filter(|l| !l.is_empty())
                .map(ToString::to_string)
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect();
            if task != TaskKind::Multilabel && labels.len() != 1 {
                return Err(Error::Parse {
                    line: lineno,
                    message: format!(
                        "{} task needs exactly one label, found {}",
                        task.name(),
                        labels.len()
                    ),
                });
            }
            let split = match hint {
                "train" => SplitHint::Train,
                "test" => SplitHint::Test,
                "-" => SplitHint::Unassigned,
                other => {
                    return Err(Error::Parse {
                        line: lineno,
                        message: format!("split hint must be train, test or -, found {other:?}"),
                    })
                }
            };
            documents.push(Document {
                id: id.to_string(),
                labels,
                split,
                text: text.to_string(),
            });
            line_of.push(lineno);
        }
        if documents.is_empty() {
            return Err(Error::Empty("corpus"));
        }
        Self::new(task, documents).map_err(|e| match e {
            Error::Parse { line, message } => Error::Parse {
                line: line_of[line - 1],
                message,
            },
            other => other,
        })
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    /// Sorted distinct labels.
    pub fn classes(&self) -> Vec<&str> {
        self.documents
            .iter()
            .flat_map(|d| d.labels.iter().map(String::as_str))
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    }

    /// Number of documents carrying each label.
    pub fn class_counts(&self) -> BTreeMap<&str, usize> {
        let mut m = BTreeMap::new();
        for d in &self.documents {
            for l in &d.labels {
                *m.entry(l.as_str()).or_insert(0) += 1;
            }
        }
        m
    }

    /// Predefined (train, test) document indices, present when any document
    /// carries a train or test hint. Unassigned documents are left out of both.
    pub fn predefined_split(&self) -> Option<(Vec<usize>, Vec<usize>)> {
        if self
            .documents
            .iter()
            .all(|d| d.split == SplitHint::Unassigned)
        {
            return None;
        }
        let pick = |h| {
            self.documents
                .iter()
                .enumerate()
                .filter(|(_, d)| d.split == h)
                .map(|(i, _)| i)
                .collect::<Vec<_>>()
        };
        Some((pick(SplitHint::Train), pick(SplitHint::Test)))
    }

    /// Stratified cross-validation folds. Fails when the corpus already has a
    /// predefined split, which must be used instead.
    pub fn make_folds(&self, n_folds: usize, seed: u64) -> Result<crate::folds::FoldPlan> {
        if self.predefined_split().is_some() {
            return Err(Error::InvalidParameter(
                "corpus has a predefined train/test split; cross-validation does not apply".into(),
            ));
        }
        let strata: Vec<String> = self.documents.iter().map(|d| d.labels.join(",")).collect();
        crate::folds::make_folds(&strata, n_folds, seed)
    }
}
