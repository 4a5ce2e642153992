//! End-to-end evaluation: folds (or the predefined split), per-fold codebook,
//! encoding, optional PCA, classifier training and scoring.
//!
//! Everything fitted inside a fold (codebook, bag-of-words vocabulary, PCA,
//! classifier) sees only that fold's training documents. The run is split
//! into [`plan`], [`run_fold`] and [`assemble`] so callers can execute folds
//! concurrently; [`run_experiment`] chains them sequentially.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::classifier::{self, ClassifierConfig, ClassifierModel, SparseVector};
use crate::codebook::{train_codebook, Codebook, DedupMode, KMeansConfig, TrainingSet};
use crate::corpus::{LabeledCorpus, TaskKind};
use crate::embeddings::{resolve, tokenize, EmbeddingTable, TokenizedDocument};
use crate::encoder::{self, BowVocabulary, EncoderConfig};
use crate::error::{Error, Result};
use crate::metrics;
use crate::pca::PcaProjection;
use crate::seed::{derive, Stream};
use crate::LabelSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EncoderKind {
    Vlawe,
    Mean,
    Bow,
    Histogram,
}

impl EncoderKind {
    pub fn name(self) -> &'static str {
        match self {
            EncoderKind::Vlawe => "vlawe",
            EncoderKind::Mean => "mean",
            EncoderKind::Bow => "bow",
            EncoderKind::Histogram => "histogram",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "vlawe" => Some(EncoderKind::Vlawe),
            "mean" => Some(EncoderKind::Mean),
            "bow" => Some(EncoderKind::Bow),
            "histogram" => Some(EncoderKind::Histogram),
            _ => None,
        }
    }

    pub fn needs_codebook(self) -> bool {
        matches!(self, EncoderKind::Vlawe | EncoderKind::Histogram)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CodebookScope {
    /// Retrained on each fold's training documents.
    PerFold,
    /// Trained once on the whole corpus vocabulary.
    Shared,
}

impl CodebookScope {
    pub fn name(self) -> &'static str {
        match self {
            CodebookScope::PerFold => "per-fold",
            CodebookScope::Shared => "shared",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "per-fold" => Some(CodebookScope::PerFold),
            "shared" => Some(CodebookScope::Shared),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricKind {
    Accuracy,
    MicroF1,
}

impl MetricKind {
    pub fn for_task(task: TaskKind) -> Self {
        match task {
            TaskKind::Multilabel => MetricKind::MicroF1,
            _ => MetricKind::Accuracy,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            MetricKind::Accuracy => "accuracy",
            MetricKind::MicroF1 => "micro_f1",
        }
    }
}

/// Every knob of an evaluation run.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub k: usize,
    pub alpha: f64,
    pub l2_normalize: bool,
    pub c: f64,
    pub pca_dim: Option<usize>,
    pub n_folds: usize,
    pub seed: u64,
    pub encoder: EncoderKind,
    pub codebook_scope: CodebookScope,
    pub dedup: DedupMode,
    pub kmeans_max_iters: usize,
    pub kmeans_tolerance: f64,
    pub svm_tolerance: f64,
    pub svm_max_iters: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        let km = KMeansConfig::default();
        let svm = ClassifierConfig::default();
        Self {
            k: 10,
            alpha: 0.5,
            l2_normalize: true,
            c: svm.c,
            pca_dim: None,
            n_folds: 10,
            seed: 0,
            encoder: EncoderKind::Vlawe,
            codebook_scope: CodebookScope::PerFold,
            dedup: DedupMode::UniqueTypes,
            kmeans_max_iters: km.max_iters,
            kmeans_tolerance: km.rel_tolerance,
            svm_tolerance: svm.tolerance,
            svm_max_iters: svm.max_iters,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidParameter("k must be at least 1".into()));
        }
        EncoderConfig::new(self.alpha, self.l2_normalize)?;
        if self.c.is_nan() || self.c <= 0.0 || !self.c.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "C must be positive, got {}",
                self.c
            )));
        }
        if self.n_folds < 2 {
            return Err(Error::InvalidParameter("need at least 2 folds".into()));
        }
        if self.pca_dim == Some(0) {
            return Err(Error::InvalidParameter(
                "PCA dimension must be positive".into(),
            ));
        }
        if self.pca_dim.is_some() && self.encoder == EncoderKind::Bow {
            return Err(Error::InvalidParameter(
                "PCA is not available for the sparse bow encoder".into(),
            ));
        }
        Ok(())
    }

    pub fn encoder_config(&self) -> EncoderConfig {
        EncoderConfig {
            alpha: self.alpha,
            l2_normalize: self.l2_normalize,
        }
    }

    /// k-means settings for fold `fold`.
    pub fn kmeans_config(&self, fold: usize) -> KMeansConfig {
        KMeansConfig {
            max_iters: self.kmeans_max_iters,
            rel_tolerance: self.kmeans_tolerance,
            seed: derive(self.seed, Stream::KMeans, fold as u64),
        }
    }

    pub fn classifier_config(&self, fold: usize) -> ClassifierConfig {
        ClassifierConfig {
            c: self.c,
            tolerance: self.svm_tolerance,
            max_iters: self.svm_max_iters,
            seed: derive(self.seed, Stream::Solver, fold as u64),
        }
    }

    pub fn fold_seed(&self) -> u64 {
        derive(self.seed, Stream::Folds, 0)
    }
}

/// Tokenized corpus, computed once and shared by all folds.
#[derive(Debug, Clone)]
pub struct PreparedCorpus {
    pub task: TaskKind,
    pub ids: Vec<String>,
    pub documents: Vec<TokenizedDocument>,
    pub labels: Vec<Vec<String>>,
}

impl PreparedCorpus {
    pub fn new(corpus: &LabeledCorpus) -> Self {
        let documents = corpus
            .documents
            .iter()
            .map(|d| tokenize(&d.text).with_id(d.id.clone()))
            .collect();
        Self {
            task: corpus.task,
            ids: corpus.documents.iter().map(|d| d.id.clone()).collect(),
            documents,
            labels: corpus.documents.iter().map(|d| d.labels.clone()).collect(),
        }
    }

    fn gold(&self, i: usize) -> LabelSet {
        self.labels[i].iter().cloned().collect()
    }
}

/// Vocabulary coverage of a corpus against an embedding table.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CoverageStats {
    pub documents: usize,
    pub known_tokens: usize,
    pub oov_tokens: usize,
    /// Documents without a single in-vocabulary token; they encode to zero.
    pub empty_documents: usize,
}

pub fn coverage(corpus: &PreparedCorpus, table: &EmbeddingTable) -> CoverageStats {
    let mut s = CoverageStats::default();
    for d in &corpus.documents {
        let r = resolve(d, table);
        s.documents += 1;
        s.known_tokens += r.known_count();
        s.oov_tokens += r.oov_count;
        if r.known_count() == 0 {
            s.empty_documents += 1;
        }
    }
    s
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldSpec {
    pub index: usize,
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct ExperimentPlan {
    pub folds: Vec<FoldSpec>,
    /// True when the corpus's own train/test split is used.
    pub predefined: bool,
    pub stratified: bool,
    pub shared_codebook: Option<Codebook>,
}

/// Validates the configuration against the corpus and table, builds the folds
/// and, for the shared scope, trains the single codebook.
pub fn plan(
    corpus: &LabeledCorpus,
    prepared: &PreparedCorpus,
    table: &EmbeddingTable,
    cfg: &PipelineConfig,
) -> Result<ExperimentPlan> {
    cfg.validate()?;
    if corpus.is_empty() {
        return Err(Error::Empty("corpus"));
    }
    if table.is_empty() {
        return Err(Error::Empty("embedding table"));
    }
    let (folds, predefined, stratified) = match corpus.predefined_split() {
        Some((train, test)) => {
            if train.is_empty() || test.is_empty() {
                return Err(Error::InvalidParameter(
                    "predefined split needs both train and test documents".into(),
                ));
            }
            (
                alloc::vec![FoldSpec {
                    index: 0,
                    train,
                    test
                }],
                true,
                true,
            )
        }
        None => {
            let p = corpus.make_folds(cfg.n_folds, cfg.fold_seed())?;
            let folds = p
                .folds
                .into_iter()
                .enumerate()
                .map(|(index, f)| FoldSpec {
                    index,
                    train: f.train,
                    test: f.test,
                })
                .collect();
            (folds, false, p.stratified)
        }
    };
    let shared_codebook =
        if cfg.encoder.needs_codebook() && cfg.codebook_scope == CodebookScope::Shared {
            let data = TrainingSet::from_documents(&prepared.documents, table, cfg.dedup);
            Some(train_codebook(&data, cfg.k, &cfg.kmeans_config(0))?)
        } else {
            None
        };
    Ok(ExperimentPlan {
        folds,
        predefined,
        stratified,
        shared_codebook,
    })
}

enum Features {
    Dense(Vec<Vec<f64>>),
    Sparse(Vec<SparseVector>),
}

/// Everything one fold produced.
#[derive(Debug, Clone)]
pub struct FoldOutcome {
    pub index: usize,
    pub value: f64,
    pub codebook: Option<Codebook>,
    pub pca: Option<PcaProjection>,
    pub model: ClassifierModel,
    pub predictions: Vec<LabelSet>,
    pub feature_dim: usize,
}

/// Trains on `fold.train` and scores on `fold.test`. Test documents are only
/// encoded and predicted.
pub fn run_fold(
    prepared: &PreparedCorpus,
    table: &EmbeddingTable,
    cfg: &PipelineConfig,
    fold: &FoldSpec,
    shared_codebook: Option<&Codebook>,
) -> Result<FoldOutcome> {
    let train_docs: Vec<&TokenizedDocument> =
        fold.train.iter().map(|&i| &prepared.documents[i]).collect();
    let test_docs: Vec<&TokenizedDocument> =
        fold.test.iter().map(|&i| &prepared.documents[i]).collect();
    let enc = cfg.encoder_config();

    let codebook = match (cfg.encoder.needs_codebook(), shared_codebook) {
        (false, _) => None,
        (true, Some(cb)) => Some(cb.clone()),
        (true, None) => {
            let data = TrainingSet::from_documents(train_docs.iter().copied(), table, cfg.dedup);
            Some(train_codebook(
                &data,
                cfg.k,
                &cfg.kmeans_config(fold.index),
            )?)
        }
    };

    let (train_x, test_x) = match cfg.encoder {
        EncoderKind::Vlawe => {
            let cb = codebook.as_ref().unwrap();
            let enc_all = |docs: &[&TokenizedDocument]| -> Result<Vec<Vec<f64>>> {
                docs.iter()
                    .map(|d| encoder::encode(d, table, cb, &enc).map(|e| e.values))
                    .collect()
            };
            (
                Features::Dense(enc_all(&train_docs)?),
                Features::Dense(enc_all(&test_docs)?),
            )
        }
        EncoderKind::Histogram => {
            let cb = codebook.as_ref().unwrap();
            let enc_all = |docs: &[&TokenizedDocument]| -> Result<Vec<Vec<f64>>> {
                docs.iter()
                    .map(|d| {
                        let mut v: Vec<f64> = encoder::encode_histogram(d, table, cb)?
                            .into_iter()
                            .map(f64::from)
                            .collect();
                        encoder::power_normalize_in_place(&mut v, enc.alpha)?;
                        if enc.l2_normalize {
                            encoder::l2_normalize_in_place(&mut v);
                        }
                        Ok(v)
                    })
                    .collect()
            };
            (
                Features::Dense(enc_all(&train_docs)?),
                Features::Dense(enc_all(&test_docs)?),
            )
        }
        EncoderKind::Mean => {
            let enc_all = |docs: &[&TokenizedDocument]| -> Vec<Vec<f64>> {
                docs.iter()
                    .map(|d| encoder::encode_mean_baseline(d, table))
                    .collect()
            };
            (
                Features::Dense(enc_all(&train_docs)),
                Features::Dense(enc_all(&test_docs)),
            )
        }
        EncoderKind::Bow => {
            let vocab = BowVocabulary::fit(train_docs.iter().copied());
            let enc_all = |docs: &[&TokenizedDocument]| -> Vec<SparseVector> {
                docs.iter()
                    .map(|d| {
                        let mut v = vocab.transform(d);
                        if enc.l2_normalize {
                            encoder::l2_normalize_in_place(v.values_mut());
                        }
                        v
                    })
                    .collect()
            };
            (
                Features::Sparse(enc_all(&train_docs)),
                Features::Sparse(enc_all(&test_docs)),
            )
        }
    };

    let (train_x, test_x, pca) = match (cfg.pca_dim, train_x, test_x) {
        (Some(m), Features::Dense(tr), Features::Dense(te)) => {
            let p = PcaProjection::fit(&tr, m)?;
            let tr = tr.iter().map(|v| p.apply(v)).collect::<Result<Vec<_>>>()?;
            let te = te.iter().map(|v| p.apply(v)).collect::<Result<Vec<_>>>()?;
            (Features::Dense(tr), Features::Dense(te), Some(p))
        }
        (_, tr, te) => (tr, te, None),
    };

    let train_labels: Vec<Vec<String>> = fold
        .train
        .iter()
        .map(|&i| prepared.labels[i].clone())
        .collect();
    let ccfg = cfg.classifier_config(fold.index);
    let mode = prepared.task.classifier_mode();
    let (model, predictions) = match (&train_x, &test_x) {
        (Features::Dense(tr), Features::Dense(te)) => {
            let model = classifier::train(tr, &train_labels, &ccfg, mode)?;
            let preds = te
                .iter()
                .map(|v| model.predict(v))
                .collect::<Result<Vec<_>>>()?;
            (model, preds)
        }
        (Features::Sparse(tr), Features::Sparse(te)) => {
            let model = classifier::train(tr, &train_labels, &ccfg, mode)?;
            let preds = te
                .iter()
                .map(|v| model.predict(v))
                .collect::<Result<Vec<_>>>()?;
            (model, preds)
        }
        _ => unreachable!("train and test features share an encoder"),
    };

    let gold: Vec<LabelSet> = fold.test.iter().map(|&i| prepared.gold(i)).collect();
    let value = match MetricKind::for_task(prepared.task) {
        MetricKind::Accuracy => metrics::accuracy(&predictions, &gold)?,
        MetricKind::MicroF1 => metrics::micro_f1(&predictions, &gold)?,
    };
    Ok(FoldOutcome {
        index: fold.index,
        value,
        codebook,
        pca,
        feature_dim: model.dim(),
        model,
        predictions,
    })
}

/// Per-fold facts kept in the report.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldSummary {
    pub index: usize,
    pub train_size: usize,
    pub test_size: usize,
    pub value: f64,
    pub kmeans_seed: Option<u64>,
    pub codebook_inertia: Option<f64>,
    pub codebook_iterations: Option<usize>,
    pub solver_seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub metric: MetricKind,
    /// Mean over folds, or the single split's score.
    pub value: f64,
    /// Present for cross-validation, absent for a predefined split.
    pub per_fold: Option<Vec<f64>>,
    pub config: PipelineConfig,
    pub task: TaskKind,
    pub documents: usize,
    pub feature_dim: usize,
    pub stratified: bool,
    /// Seed of the fold shuffle; absent for a predefined split.
    pub fold_seed: Option<u64>,
    pub folds: Vec<FoldSummary>,
}

impl EvalReport {
    /// Population standard deviation of the fold scores, 0 without folds.
    pub fn fold_stddev(&self) -> f64 {
        match &self.per_fold {
            Some(v) if !v.is_empty() => {
                let n = v.len() as f64;
                let mean = v.iter().sum::<f64>() / n;
                libm::sqrt(v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n)
            }
            _ => 0.0,
        }
    }
}

/// Combines fold outcomes (in any order) into a report.
pub fn assemble(
    prepared: &PreparedCorpus,
    cfg: &PipelineConfig,
    plan: &ExperimentPlan,
    mut outcomes: Vec<FoldOutcome>,
) -> Result<EvalReport> {
    outcomes.sort_by_key(|o| o.index);
    if outcomes.len() != plan.folds.len()
        || outcomes
            .iter()
            .zip(&plan.folds)
            .any(|(o, f)| o.index != f.index)
    {
        return Err(Error::InvalidParameter(
            "fold outcomes do not match the plan".into(),
        ));
    }
    let values: Vec<f64> = outcomes.iter().map(|o| o.value).collect();
    let value = values.iter().sum::<f64>() / values.len() as f64;
    let folds = outcomes
        .iter()
        .zip(&plan.folds)
        .map(|(o, f)| FoldSummary {
            index: f.index,
            train_size: f.train.len(),
            test_size: f.test.len(),
            value: o.value,
            kmeans_seed: o.codebook.as_ref().map(|c| c.seed),
            codebook_inertia: o.codebook.as_ref().map(|c| c.inertia),
            codebook_iterations: o.codebook.as_ref().map(|c| c.iterations_run),
            solver_seed: cfg.classifier_config(f.index).seed,
        })
        .collect();
    Ok(EvalReport {
        metric: MetricKind::for_task(prepared.task),
        value,
        per_fold: if plan.predefined { None } else { Some(values) },
        config: cfg.clone(),
        task: prepared.task,
        documents: prepared.documents.len(),
        feature_dim: outcomes.first().map_or(0, |o| o.feature_dim),
        stratified: plan.stratified,
        fold_seed: if plan.predefined {
            None
        } else {
            Some(cfg.fold_seed())
        },
        folds,
    })
}

/// Runs every fold sequentially.
pub fn run_experiment(
    corpus: &LabeledCorpus,
    table: &EmbeddingTable,
    cfg: &PipelineConfig,
) -> Result<EvalReport> {
    let prepared = PreparedCorpus::new(corpus);
    let plan = plan(corpus, &prepared, table, cfg)?;
    let outcomes = plan
        .folds
        .iter()
        .map(|f| run_fold(&prepared, table, cfg, f, plan.shared_codebook.as_ref()))
        .collect::<Result<Vec<_>>>()?;
    assemble(&prepared, cfg, &plan, outcomes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Document, SplitHint};
    use alloc::string::ToString;
    use alloc::vec;

    // sentiment words share one cluster and differ only in the sign of their
    // residual; neutral words form the other cluster
    fn table() -> EmbeddingTable {
        let mut t = EmbeddingTable::new(2).unwrap();
        for (w, v) in [
            ("good", [10.0, 1.0]),
            ("great", [10.0, 1.2]),
            ("fine", [10.0, 0.8]),
            ("bad", [10.0, -1.0]),
            ("awful", [10.0, -1.2]),
            ("poor", [10.0, -0.8]),
            ("film", [-10.0, 0.5]),
            ("movie", [-10.0, -0.5]),
        ] {
            t.insert(w, &v).unwrap();
        }
        t
    }

    fn corpus(split: bool) -> LabeledCorpus {
        let pos = [
            "good film",
            "great movie",
            "fine film",
            "good great",
            "great fine movie",
            "fine good",
        ];
        let neg = [
            "bad film",
            "awful movie",
            "poor film",
            "bad awful",
            "awful poor movie",
            "poor bad",
        ];
        let mut docs = Vec::new();
        for (i, (p, n)) in pos.iter().zip(neg).enumerate() {
            let hint = match (split, i < 4) {
                (false, _) => SplitHint::Unassigned,
                (true, true) => SplitHint::Train,
                (true, false) => SplitHint::Test,
            };
            docs.push(Document {
                id: format!("p{i}"),
                labels: vec!["pos".to_string()],
                split: hint,
                text: p.to_string(),
            });
            docs.push(Document {
                id: format!("n{i}"),
                labels: vec!["neg".to_string()],
                split: hint,
                text: n.to_string(),
            });
        }
        LabeledCorpus::new(TaskKind::Binary, docs).unwrap()
    }

    fn small_cfg() -> PipelineConfig {
        PipelineConfig {
            k: 2,
            n_folds: 3,
            ..Default::default()
        }
    }

    #[test]
    fn cross_validation_report() {
        let r = run_experiment(&corpus(false), &table(), &small_cfg()).unwrap();
        let folds = r.per_fold.as_ref().unwrap();
        assert_eq!(folds.len(), 3);
        assert!((r.value - folds.iter().sum::<f64>() / 3.0).abs() < 1e-12);
        assert_eq!(r.value, 1.0);
        assert_eq!(r.feature_dim, 4);
        assert_eq!(r.metric, MetricKind::Accuracy);
    }

    #[test]
    fn predefined_split_report() {
        let r = run_experiment(&corpus(true), &table(), &small_cfg()).unwrap();
        assert!(r.per_fold.is_none());
        assert_eq!(r.folds.len(), 1);
        assert_eq!(r.folds[0].train_size, 8);
        assert_eq!(r.value, 1.0);
        assert_eq!(r.fold_stddev(), 0.0);
    }

    #[test]
    fn every_encoder_runs() {
        for encoder in [
            EncoderKind::Vlawe,
            EncoderKind::Mean,
            EncoderKind::Bow,
            EncoderKind::Histogram,
        ] {
            let cfg = PipelineConfig {
                encoder,
                ..small_cfg()
            };
            let r = run_experiment(&corpus(false), &table(), &cfg).unwrap();
            assert!((0.0..=1.0).contains(&r.value), "{encoder:?}");
        }
        let shared = PipelineConfig {
            codebook_scope: CodebookScope::Shared,
            ..small_cfg()
        };
        let r = run_experiment(&corpus(false), &table(), &shared).unwrap();
        let seeds: Vec<_> = r.folds.iter().map(|f| f.kmeans_seed).collect();
        assert!(seeds.windows(2).all(|w| w[0] == w[1]));
    }

    #[test]
    fn pca_variant() {
        let cfg = PipelineConfig {
            pca_dim: Some(2),
            ..small_cfg()
        };
        let r = run_experiment(&corpus(false), &table(), &cfg).unwrap();
        assert_eq!(r.feature_dim, 2);
        let bad = PipelineConfig {
            pca_dim: Some(2),
            encoder: EncoderKind::Bow,
            ..small_cfg()
        };
        assert!(run_experiment(&corpus(false), &table(), &bad).is_err());
    }

    #[test]
    fn too_large_k_fails() {
        let cfg = PipelineConfig {
            k: 50,
            ..small_cfg()
        };
        assert!(matches!(
            run_experiment(&corpus(false), &table(), &cfg),
            Err(Error::TooFewVectors { .. })
        ));
    }

    #[test]
    fn deterministic() {
        let a = run_experiment(&corpus(false), &table(), &small_cfg()).unwrap();
        let b = run_experiment(&corpus(false), &table(), &small_cfg()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn coverage_counts() {
        let p = PreparedCorpus::new(&corpus(false));
        let s = coverage(&p, &table());
        assert_eq!(s.documents, 12);
        assert_eq!(s.oov_tokens, 0);
        assert_eq!(s.empty_documents, 0);
    }
}
