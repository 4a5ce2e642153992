//! Runs the folds of an experiment on a rayon pool.

use rayon::prelude::*;
use vlawe_core::experiment::{assemble, coverage, plan, run_fold, CoverageStats, PreparedCorpus};
use vlawe_core::{EmbeddingTable, EvalReport, LabeledCorpus, PipelineConfig};

use crate::error::{Result, VlaweError};

pub fn pool(jobs: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = jobs {
        if n == 0 {
            return Err(VlaweError::Usage("--jobs must be at least 1".into()));
        }
        b = b.num_threads(n);
    }
    b.build()
        .map_err(|e| VlaweError::Usage(format!("cannot start worker pool: {e}")))
}

pub struct Evaluation {
    pub report: EvalReport,
    pub coverage: CoverageStats,
}

/// Same result as [`vlawe_core::experiment::run_experiment`], with folds
/// spread over the pool.
pub fn evaluate(
    pool: &rayon::ThreadPool,
    corpus: &LabeledCorpus,
    table: &EmbeddingTable,
    cfg: &PipelineConfig,
) -> Result<Evaluation> {
    let prepared = PreparedCorpus::new(corpus);
    let plan = plan(corpus, &prepared, table, cfg)?;
    let outcomes = pool.install(|| {
        plan.folds
            .par_iter()
            .map(|f| run_fold(&prepared, table, cfg, f, plan.shared_codebook.as_ref()))
            .collect::<vlawe_core::Result<Vec<_>>>()
    })?;
    let report = assemble(&prepared, cfg, &plan, outcomes)?;
    Ok(Evaluation {
        report,
        coverage: coverage(&prepared, table),
    })
}
