//! Accuracy and micro-averaged F1.

use crate::error::{Error, Result};
use crate::LabelSet;

fn check_lengths(pred: usize, gold: usize) -> Result<()> {
    if pred != gold {
        return Err(Error::DimensionMismatch {
            expected: gold,
            found: pred,
        });
    }
    if pred == 0 {
        return Err(Error::Empty("predictions"));
    }
    Ok(())
}

/// Fraction of predictions exactly equal to the gold label.
pub fn accuracy<T: PartialEq>(pred: &[T], gold: &[T]) -> Result<f64> {
    check_lengths(pred.len(), gold.len())?;
    let hits = pred.iter().zip(gold).filter(|(p, g)| p == g).count();
    Ok(hits as f64 / pred.len() as f64)
}

/// True positive, false positive and false negative counts pooled over every
/// (document, label) pair.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PooledCounts {
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
}

impl PooledCounts {
    pub fn from_sets(pred: &[LabelSet], gold: &[LabelSet]) -> Result<Self> {
        check_lengths(pred.len(), gold.len())?;
        let mut c = Self::default();
        for (p, g) in pred.iter().zip(gold) {
            let tp = p.intersection(g).count() as u64;
            c.tp += tp;
            c.fp += p.len() as u64 - tp;
            c.fn_ += g.len() as u64 - tp;
        }
        Ok(c)
    }

    pub fn precision(&self) -> f64 {
        ratio(self.tp, self.tp + self.fp)
    }

    pub fn recall(&self) -> f64 {
        ratio(self.tp, self.tp + self.fn_)
    }

    /// `2PR / (P + R)`, written as `2TP / (2TP + FP + FN)`; 0 when there are
    /// no true positives.
    pub fn f1(&self) -> f64 {
        if self.tp == 0 {
            return 0.0;
        }
        (2 * self.tp) as f64 / (2 * self.tp + self.fp + self.fn_) as f64
    }
}

fn ratio(a: u64, b: u64) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

pub fn micro_f1(pred: &[LabelSet], gold: &[LabelSet]) -> Result<f64> {
    PooledCounts::from_sets(pred, gold).map(|c| c.f1())
}
