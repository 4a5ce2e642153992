//! Command line: `codebook`, `encode`, `eval` and `sweep-k`.

use std::collections::{BTreeMap, HashSet};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use vlawe_core::codebook::train_codebook;
use vlawe_core::encoder::{self, l2_normalize_in_place, power_normalize_in_place};
use vlawe_core::experiment::{coverage, PreparedCorpus};
use vlawe_core::{
    CodebookScope, DedupMode, EmbeddingTable, EncoderKind, LabeledCorpus, PcaProjection,
    PipelineConfig, TaskKind, TrainingSet,
};

use crate::codebook_file::{load_codebook, save_codebook};
use crate::corpus_io::{load_corpus, load_corpus_infer};
use crate::dump::{write_dump, Dump};
use crate::error::{Result, VlaweError};
use crate::report::{opt, push_coverage, push_eval, Report};
use crate::runner::{evaluate, pool};
use crate::table_io::{load_table_filtered, LoadStats};

#[derive(Debug, Parser)]
#[command(
    name = "vlawe",
    version,
    about = "VLAWE document embeddings and text classification experiments"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train a codebook on the corpus vocabulary and save it.
    Codebook {
        #[command(flatten)]
        spec: SpecArgs,
        /// Codebook file to write.
        #[arg(long)]
        out: PathBuf,
    },
    /// Encode every corpus document and write a text dump.
    Encode {
        #[command(flatten)]
        spec: SpecArgs,
        /// Use this codebook instead of training one.
        #[arg(long)]
        codebook: Option<PathBuf>,
        /// Dump file to write.
        #[arg(long)]
        out: PathBuf,
    },
    /// Cross-validate (or use the corpus split) and report the score.
    Eval {
        #[command(flatten)]
        spec: SpecArgs,
        /// Also write the report here.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Repeat `eval` for several codebook sizes.
    SweepK {
        #[command(flatten)]
        spec: SpecArgs,
        /// Codebook sizes, e.g. `2-30` or `2,5,10`.
        #[arg(long)]
        ks: String,
        /// CSV file with columns k,metric,stddev.
        #[arg(long)]
        out: PathBuf,
        /// Also write the report here.
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TaskArg {
    Auto,
    Binary,
    Multiclass,
    Multilabel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EncoderArg {
    Vlawe,
    Mean,
    Bow,
    Histogram,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScopeArg {
    PerFold,
    Shared,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DedupArg {
    Types,
    Tokens,
}

#[derive(Debug, Clone, Args)]
pub struct SpecArgs {
    /// Word vector table, one `word v1 ... vd` row per line.
    #[arg(long, env = "VLAWE_EMBEDDINGS")]
    pub embeddings: PathBuf,
    /// Corpus TSV: id, labels, train|test|-, text.
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long, value_enum, default_value = "auto")]
    pub task: TaskArg,
    /// Codebook size.
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    /// Power normalization exponent.
    #[arg(long, default_value_t = 0.5)]
    pub alpha: f64,
    /// SVM regularization.
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
    #[arg(long)]
    pub pca_dim: Option<usize>,
    #[arg(long, default_value_t = 10)]
    pub folds: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "vlawe")]
    pub encoder: EncoderArg,
    #[arg(long, value_enum, default_value = "per-fold")]
    pub codebook_scope: ScopeArg,
    /// Same as `--codebook-scope shared`.
    #[arg(long)]
    pub shared_codebook: bool,
    /// Codebook training data: each distinct word once, or every token.
    #[arg(long, value_enum, default_value = "types")]
    pub dedup: DedupArg,
    /// Skip the final L2 normalization.
    #[arg(long)]
    pub no_l2: bool,
    /// Reject tables whose vectors do not have this many components.
    #[arg(long)]
    pub expected_dim: Option<usize>,
    #[arg(long, default_value_t = 100)]
    pub kmeans_max_iters: usize,
    #[arg(long, default_value_t = 1e-4)]
    pub kmeans_tolerance: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub svm_tolerance: f64,
    #[arg(long, default_value_t = 1000)]
    pub svm_max_iters: usize,
    /// Worker threads; defaults to one per core.
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Add wall-clock timings to the report.
    #[arg(long)]
    pub timings: bool,
}

impl SpecArgs {
    pub fn pipeline(&self) -> PipelineConfig {
        PipelineConfig {
            k: self.k,
            alpha: self.alpha,
            l2_normalize: !self.no_l2,
            c: self.c,
            pca_dim: self.pca_dim,
            n_folds: self.folds,
            seed: self.seed,
            encoder: match self.encoder {
                EncoderArg::Vlawe => EncoderKind::Vlawe,
                EncoderArg::Mean => EncoderKind::Mean,
                EncoderArg::Bow => EncoderKind::Bow,
                EncoderArg::Histogram => EncoderKind::Histogram,
            },
            codebook_scope: if self.shared_codebook || self.codebook_scope == ScopeArg::Shared {
                CodebookScope::Shared
            } else {
                CodebookScope::PerFold
            },
            dedup: match self.dedup {
                DedupArg::Types => DedupMode::UniqueTypes,
                DedupArg::Tokens => DedupMode::AllTokens,
            },
            kmeans_max_iters: self.kmeans_max_iters,
            kmeans_tolerance: self.kmeans_tolerance,
            svm_tolerance: self.svm_tolerance,
            svm_max_iters: self.svm_max_iters,
        }
    }
}

/// Loaded inputs shared by every command.
struct Inputs {
    corpus: LabeledCorpus,
    prepared: PreparedCorpus,
    table: EmbeddingTable,
    load: LoadStats,
}

fn load_inputs(spec: &SpecArgs) -> Result<Inputs> {
    let corpus = match spec.task {
        TaskArg::Auto => load_corpus_infer(&spec.corpus)?,
        TaskArg::Binary => load_corpus(&spec.corpus, TaskKind::Binary)?,
        TaskArg::Multiclass => load_corpus(&spec.corpus, TaskKind::Multiclass)?,
        TaskArg::Multilabel => load_corpus(&spec.corpus, TaskKind::Multilabel)?,
    };
    let prepared = PreparedCorpus::new(&corpus);
    let vocab: HashSet<String> = prepared
        .documents
        .iter()
        .flat_map(|d| d.tokens.iter().cloned())
        .collect();
    let (table, load) = load_table_filtered(&spec.embeddings, spec.expected_dim, Some(&vocab))?;
    Ok(Inputs {
        corpus,
        prepared,
        table,
        load,
    })
}

fn usage(msg: impl Into<String>) -> VlaweError {
    VlaweError::Usage(msg.into())
}

/// Checks the flag values that can be judged before any data is read.
fn validate_flags(cfg: &PipelineConfig) -> Result<()> {
    cfg.validate().map_err(|e| usage(e.to_string()))?;
    if cfg.kmeans_tolerance.is_nan()
        || cfg.kmeans_tolerance < 0.0
        || cfg.svm_tolerance.is_nan()
        || cfg.svm_tolerance <= 0.0
    {
        return Err(usage("tolerances must be non-negative (SVM: positive)"));
    }
    Ok(())
}

/// Width of the features handed to PCA.
fn feature_width(cfg: &PipelineConfig, d: usize) -> Option<usize> {
    match cfg.encoder {
        EncoderKind::Vlawe => Some(cfg.k * d),
        EncoderKind::Mean => Some(d),
        EncoderKind::Histogram => Some(cfg.k),
        EncoderKind::Bow => None,
    }
}

fn check_pca(cfg: &PipelineConfig, d: usize) -> Result<()> {
    if let (Some(m), Some(w)) = (cfg.pca_dim, feature_width(cfg, d)) {
        if m > w {
            return Err(usage(format!(
                "--pca-dim {m} exceeds the feature dimension {w}"
            )));
        }
    }
    Ok(())
}

fn echo_spec(
    r: &mut Report,
    command: &str,
    spec: &SpecArgs,
    cfg: &PipelineConfig,
    task: Option<TaskKind>,
) {
    r.push("command", command);
    r.push("spec.embeddings", spec.embeddings.display());
    r.push("spec.corpus", spec.corpus.display());
    r.push("spec.task", task.map_or("auto", TaskKind::name));
    r.push("spec.k", cfg.k);
    r.push("spec.alpha", cfg.alpha);
    r.push("spec.l2", cfg.l2_normalize);
    r.push("spec.c", cfg.c);
    r.push("spec.pca_dim", opt(cfg.pca_dim));
    r.push("spec.folds", cfg.n_folds);
    r.push("spec.seed", cfg.seed);
    r.push("spec.encoder", cfg.encoder.name());
    r.push("spec.codebook_scope", cfg.codebook_scope.name());
    r.push("spec.dedup", cfg.dedup.name());
    r.push("spec.expected_dim", opt(spec.expected_dim));
    r.push("spec.kmeans_max_iters", cfg.kmeans_max_iters);
    r.push("spec.kmeans_tolerance", cfg.kmeans_tolerance);
    r.push("spec.svm_tolerance", cfg.svm_tolerance);
    r.push("spec.svm_max_iters", cfg.svm_max_iters);
}

fn push_inputs(r: &mut Report, inputs: &Inputs) {
    r.push("data.documents", inputs.corpus.len());
    r.push("data.classes", inputs.corpus.classes().join(","));
    r.push("table.dim", inputs.table.dim());
    r.push("table.rows_kept", inputs.load.rows);
    r.push("table.rows_skipped", inputs.load.filtered);
    r.push("table.duplicates", inputs.load.duplicates);
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| VlaweError::io(path, e))
}

/// Parses `2-30`, `2,5,10` or mixtures such as `2-5,10`.
pub fn parse_ks(s: &str) -> Result<Vec<usize>> {
    let mut ks = Vec::new();
    for part in s.split(',').map(str::trim) {
        let bad = || usage(format!("invalid --ks entry {part:?}"));
        match part.split_once('-') {
            Some((a, b)) => {
                let a: usize = a.trim().parse().map_err(|_| bad())?;
                let b: usize = b.trim().parse().map_err(|_| bad())?;
                if a > b {
                    return Err(bad());
                }
                ks.extend(a..=b);
            }
            None => ks.push(part.parse().map_err(|_| bad())?),
        }
    }
    if ks.contains(&0) {
        return Err(usage("k must be at least 1"));
    }
    Ok(ks)
}

pub fn run(cli: Cli, out: &mut dyn Write) -> Result<()> {
    let started = Instant::now();
    let (text, timings) = match cli.command {
        Command::Codebook { spec, out: path } => (cmd_codebook(&spec, &path)?, spec.timings),
        Command::Encode {
            spec,
            codebook,
            out: path,
        } => (cmd_encode(&spec, codebook.as_deref(), &path)?, spec.timings),
        Command::Eval { spec, report } => {
            let r = cmd_eval(&spec, started)?;
            if let Some(p) = report {
                write_text(&p, &r)?;
            }
            (r, false)
        }
        Command::SweepK {
            spec,
            ks,
            out: path,
            report,
        } => {
            let r = cmd_sweep(&spec, &ks, &path, started)?;
            if let Some(p) = report {
                write_text(&p, &r)?;
            }
            (r, false)
        }
    };
    let mut text = text;
    if timings {
        text.push_str(&format!(
            "timing.total_seconds={}\n",
            started.elapsed().as_secs_f64()
        ));
    }
    out.write_all(text.as_bytes())
        .map_err(|e| VlaweError::io("<stdout>", e))
}

fn corpus_codebook(inputs: &Inputs, cfg: &PipelineConfig) -> Result<vlawe_core::Codebook> {
    let data = TrainingSet::from_documents(&inputs.prepared.documents, &inputs.table, cfg.dedup);
    Ok(train_codebook(&data, cfg.k, &cfg.kmeans_config(0))?)
}

fn cmd_codebook(spec: &SpecArgs, path: &Path) -> Result<String> {
    let cfg = spec.pipeline();
    validate_flags(&cfg)?;
    let inputs = load_inputs(spec)?;
    let cb = corpus_codebook(&inputs, &cfg)?;
    save_codebook(&cb, path)?;

    let mut r = Report::new();
    echo_spec(&mut r, "codebook", spec, &cfg, Some(inputs.corpus.task));
    push_inputs(&mut r, &inputs);
    r.push("codebook.path", path.display());
    r.push("codebook.k", cb.k());
    r.push("codebook.d", cb.dim());
    r.push("codebook.embedding_dim", cb.k() * cb.dim());
    r.push("codebook.seed", cb.seed);
    r.push("codebook.inertia", cb.inertia);
    r.push("codebook.iterations", cb.iterations_run);
    Ok(r.render())
}

fn cmd_encode(spec: &SpecArgs, codebook: Option<&Path>, path: &Path) -> Result<String> {
    let mut cfg = spec.pipeline();
    if cfg.encoder == EncoderKind::Bow {
        return Err(usage(
            "encode does not support the bow encoder; its vocabulary depends on the training fold",
        ));
    }
    let cb = codebook.map(load_codebook).transpose()?;
    if let Some(cb) = &cb {
        cfg.k = cb.k();
    }
    validate_flags(&cfg)?;
    let inputs = load_inputs(spec)?;
    let d = inputs.table.dim();
    check_pca(&cfg, d)?;
    let cb = match (cfg.encoder.needs_codebook(), cb) {
        (false, _) => None,
        (true, Some(cb)) => {
            if cb.dim() != d {
                return Err(VlaweError::Core(vlawe_core::Error::DimensionMismatch {
                    expected: cb.dim(),
                    found: d,
                }));
            }
            Some(cb)
        }
        (true, None) => Some(corpus_codebook(&inputs, &cfg)?),
    };

    let enc = cfg.encoder_config();
    let mut rows = Vec::with_capacity(inputs.prepared.documents.len());
    for doc in &inputs.prepared.documents {
        let v = match cfg.encoder {
            EncoderKind::Vlawe => {
                encoder::encode(doc, &inputs.table, cb.as_ref().unwrap(), &enc)?.values
            }
            EncoderKind::Mean => encoder::encode_mean_baseline(doc, &inputs.table),
            EncoderKind::Histogram => {
                let mut v: Vec<f64> =
                    encoder::encode_histogram(doc, &inputs.table, cb.as_ref().unwrap())?
                        .into_iter()
                        .map(f64::from)
                        .collect();
                power_normalize_in_place(&mut v, enc.alpha)?;
                if enc.l2_normalize {
                    l2_normalize_in_place(&mut v);
                }
                v
            }
            EncoderKind::Bow => unreachable!(),
        };
        rows.push(v);
    }
    if let Some(m) = cfg.pca_dim {
        let p = PcaProjection::fit(&rows, m)?;
        rows = rows
            .iter()
            .map(|v| p.apply(v))
            .collect::<vlawe_core::Result<_>>()?;
    }
    let zero_rows = rows.iter().filter(|v| v.iter().all(|x| *x == 0.0)).count();
    let dim = rows.first().map_or(0, Vec::len);

    let mut header = BTreeMap::new();
    header.insert("encoder".to_string(), cfg.encoder.name().to_string());
    header.insert(
        "k".to_string(),
        cb.as_ref()
            .map_or("none".to_string(), |c| c.k().to_string()),
    );
    header.insert("d".to_string(), d.to_string());
    header.insert("dim".to_string(), dim.to_string());
    header.insert("alpha".to_string(), cfg.alpha.to_string());
    header.insert("l2".to_string(), cfg.l2_normalize.to_string());
    header.insert("pca_dim".to_string(), opt(cfg.pca_dim));
    header.insert("rows".to_string(), rows.len().to_string());
    let dump = Dump {
        header,
        rows: inputs.prepared.ids.iter().cloned().zip(rows).collect(),
    };
    write_dump(path, &dump)?;

    let mut r = Report::new();
    echo_spec(&mut r, "encode", spec, &cfg, Some(inputs.corpus.task));
    r.push("spec.codebook", opt(codebook.map(|p| p.display())));
    push_inputs(&mut r, &inputs);
    push_coverage(&mut r, &coverage(&inputs.prepared, &inputs.table));
    r.push("encode.path", path.display());
    r.push("encode.rows", dump.rows.len());
    r.push("encode.dim", dim);
    r.push("encode.zero_rows", zero_rows);
    Ok(r.render())
}

fn warn_unstratified(stratified: bool, folds: usize) {
    if !stratified {
        eprintln!("warning: a class has fewer than {folds} documents; folds are not stratified");
    }
}

fn cmd_eval(spec: &SpecArgs, started: Instant) -> Result<String> {
    let cfg = spec.pipeline();
    validate_flags(&cfg)?;
    let pool = pool(spec.jobs)?;
    let inputs = load_inputs(spec)?;
    check_pca(&cfg, inputs.table.dim())?;
    let loaded = started.elapsed();
    let ev = evaluate(&pool, &inputs.corpus, &inputs.table, &cfg)?;
    warn_unstratified(ev.report.stratified, cfg.n_folds);

    let mut r = Report::new();
    echo_spec(&mut r, "eval", spec, &cfg, Some(inputs.corpus.task));
    push_inputs(&mut r, &inputs);
    push_coverage(&mut r, &ev.coverage);
    push_eval(&mut r, &ev.report);
    if spec.timings {
        r.push("timing.load_seconds", loaded.as_secs_f64());
        r.push(
            "timing.run_seconds",
            (started.elapsed() - loaded).as_secs_f64(),
        );
    }
    Ok(r.render())
}

fn cmd_sweep(spec: &SpecArgs, ks: &str, csv_path: &Path, started: Instant) -> Result<String> {
    let ks = parse_ks(ks)?;
    let base = spec.pipeline();
    validate_flags(&base)?;
    let pool = pool(spec.jobs)?;
    let inputs = load_inputs(spec)?;

    let mut r = Report::new();
    echo_spec(&mut r, "sweep-k", spec, &base, Some(inputs.corpus.task));
    r.push(
        "spec.ks",
        ks.iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>()
            .join(","),
    );
    push_inputs(&mut r, &inputs);
    push_coverage(&mut r, &coverage(&inputs.prepared, &inputs.table));

    let mut csv = String::from("k,metric,stddev\n");
    for &k in &ks {
        let cfg = PipelineConfig { k, ..base.clone() };
        check_pca(&cfg, inputs.table.dim())?;
        let ev = evaluate(&pool, &inputs.corpus, &inputs.table, &cfg)?;
        warn_unstratified(ev.report.stratified, cfg.n_folds);
        let sd = ev.report.fold_stddev();
        csv.push_str(&format!("{k},{},{sd}\n", ev.report.value));
        r.push(format!("sweep.{k}.metric"), ev.report.metric.name());
        r.push(format!("sweep.{k}.value"), ev.report.value);
        r.push(format!("sweep.{k}.stddev"), sd);
        if let Some(v) = &ev.report.per_fold {
            r.push(
                format!("sweep.{k}.per_fold"),
                v.iter()
                    .map(ToString::to_string)
                    .collect::<Vec<_>>()
                    .join(","),
            );
        }
    }
    write_text(csv_path, &csv)?;
    r.push("sweep.csv", csv_path.display());
    if spec.timings {
        r.push("timing.run_seconds", started.elapsed().as_secs_f64());
    }
    Ok(r.render())
}
