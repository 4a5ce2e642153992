//! Binary classifier file.
//!
//! ```text
//! "VLAWESV1"                 8-byte magic
//! mode                       u8 (0 binary, 1 multiclass-ovr, 2 multilabel-ovr)
//! feature_dim                u64
//! C                          f64
//! class count, classes       u64, then (u64 length + UTF-8 bytes) each
//! hyperplane count           u64
//! weights                    count * feature_dim f64, row-major
//! biases                     count f64
//! ```

use std::path::Path;

use vlawe_core::{ClassifierModel, Mode};

use crate::binio::{read_file, write_file, Reader, Writer};
use crate::error::{Result, VlaweError};

const MAGIC: &[u8; 8] = b"VLAWESV1";

/// A trained model together with the regularization it was trained with.
#[derive(Debug, Clone, PartialEq)]
pub struct SavedModel {
    pub model: ClassifierModel,
    pub c: f64,
}

fn mode_tag(m: Mode) -> u8 {
    match m {
        Mode::Binary => 0,
        Mode::MulticlassOvr => 1,
        Mode::MultilabelOvr => 2,
    }
}

pub fn encode_model(saved: &SavedModel) -> Vec<u8> {
    let m = &saved.model;
    let mut w = Writer::new(MAGIC);
    w.u8(mode_tag(m.mode()));
    w.u64(m.dim() as u64);
    w.f64(saved.c);
    w.u64(m.classes().len() as u64);
    for c in m.classes() {
        w.str(c);
    }
    w.u64(m.weights().len() as u64);
    for row in m.weights() {
        w.f64s(row);
    }
    w.f64s(m.biases());
    w.0
}

pub fn decode_model(bytes: &[u8], path: &Path) -> Result<SavedModel> {
    let mut r = Reader::new(bytes, path, MAGIC, "classifier")?;
    let mode = match r.u8("mode")? {
        0 => Mode::Binary,
        1 => Mode::MulticlassOvr,
        2 => Mode::MultilabelOvr,
        t => return Err(VlaweError::format(path, format!("unknown mode tag {t}"))),
    };
    let dim = r.usize("feature dimension")?;
    let c = r.f64("C")?;
    let n_classes = r.usize("class count")?;
    let classes = (0..n_classes)
        .map(|_| r.str("class name"))
        .collect::<Result<Vec<_>>>()?;
    let rows = r.usize("hyperplane count")?;
    let weights = (0..rows)
        .map(|_| r.f64s(dim, "weight matrix"))
        .collect::<Result<Vec<_>>>()?;
    let biases = r.f64s(rows, "biases")?;
    r.finish()?;
    Ok(SavedModel {
        model: ClassifierModel::from_parts(classes, mode, dim, weights, biases)?,
        c,
    })
}

pub fn save_model(saved: &SavedModel, path: impl AsRef<Path>) -> Result<()> {
    write_file(path.as_ref(), &encode_model(saved))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<SavedModel> {
    let path = path.as_ref();
    decode_model(&read_file(path)?, path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use vlawe_core::classifier::{train, ClassifierConfig};

    #[test]
    fn trained_model_round_trips() {
        let x = vec![
            vec![1.0, 0.2],
            vec![-1.0, 0.1],
            vec![0.3, 2.0],
            vec![0.0, -1.5],
        ];
        let y: Vec<Vec<String>> = ["a", "b", "c", "a"]
            .iter()
            .map(|s| vec![s.to_string()])
            .collect();
        let model = train(&x, &y, &ClassifierConfig::default(), Mode::MulticlassOvr).unwrap();
        let saved = SavedModel { model, c: 1.0 };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.bin");
        save_model(&saved, &path).unwrap();
        let back = load_model(&path).unwrap();
        assert_eq!(back, saved);
        let bits = |m: &ClassifierModel| -> Vec<u64> {
            m.weights().iter().flatten().map(|v| v.to_bits()).collect()
        };
        assert_eq!(bits(&back.model), bits(&saved.model));
    }

    #[test]
    fn truncated_model_is_rejected() {
        let model = ClassifierModel::from_parts(
            vec!["n".into(), "p".into()],
            Mode::Binary,
            3,
            vec![vec![1.0, 2.0, 3.0]],
            vec![0.5],
        )
        .unwrap();
        let bytes = encode_model(&SavedModel { model, c: 2.0 });
        for cut in [9, 20, bytes.len() - 1] {
            assert!(decode_model(&bytes[..cut], Path::new("m")).is_err());
        }
    }
}
