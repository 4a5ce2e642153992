//! Corpus TSV files: `doc_id<TAB>label[,label...]<TAB>train|test|-<TAB>text`.

use std::path::Path;

use vlawe_core::{Error, LabeledCorpus, TaskKind};

use crate::error::{Result, VlaweError};

pub fn load_corpus(path: impl AsRef<Path>, task: TaskKind) -> Result<LabeledCorpus> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| VlaweError::io(path, e))?;
    parse_corpus(&text, path, task)
}

/// Loads a corpus and picks the task from its labels: several labels on any
/// document means multilabel, otherwise two classes is binary and more is
/// multiclass.
pub fn load_corpus_infer(path: impl AsRef<Path>) -> Result<LabeledCorpus> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| VlaweError::io(path, e))?;
    let loose = parse_corpus(&text, path, TaskKind::Multilabel)?;
    let task = infer_task(&loose);
    if task == TaskKind::Multilabel {
        return Ok(loose);
    }
    LabeledCorpus::new(task, loose.documents).map_err(|e| with_path(e, path))
}

pub fn infer_task(corpus: &LabeledCorpus) -> TaskKind {
    if corpus.documents.iter().any(|d| d.labels.len() != 1) {
        TaskKind::Multilabel
    } else if corpus.classes().len() <= 2 {
        TaskKind::Binary
    } else {
        TaskKind::Multiclass
    }
}

fn parse_corpus(text: &str, path: &Path, task: TaskKind) -> Result<LabeledCorpus> {
    LabeledCorpus::parse_tsv(text, task).map_err(|e| with_path(e, path))
}

fn with_path(e: Error, path: &Path) -> VlaweError {
    match e {
        Error::Parse { line, message } => VlaweError::Line {
            path: path.to_path_buf(),
            line,
            message,
        },
        Error::Empty(what) => VlaweError::format(path, format!("{what} is empty")),
        Error::Labels(message) => VlaweError::format(path, message),
        other => VlaweError::Core(other),
    }
}
