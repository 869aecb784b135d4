//! Parallel LOSO driver. Produces exactly what the sequential core driver
//! produces, for any thread count.

use mrcst_core::pipeline::{aggregate, build_channels, run_fold, run_seed, summarize_runs, Channels, LosoOutcome, PipelineConfig};
use mrcst_core::{Label, SubjectSegment};
use rayon::prelude::*;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Core(#[from] mrcst_core::Error),
    #[error("cannot start worker pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

/// Runs `f` on a pool of `jobs` threads (0 = one per core).
pub fn with_pool<T: Send>(jobs: usize, f: impl FnOnce() -> T + Send) -> Result<T, RunError> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build()?;
    Ok(pool.install(f))
}

/// `runs` full LOSO sweeps; fold order is (run, subject) as in the input.
/// Call inside [`with_pool`] to bound the thread count.
pub fn evaluate(segments: &[SubjectSegment], cfg: &PipelineConfig, runs: usize, master_seed: u64) -> Result<LosoOutcome, RunError> {
    cfg.validate()?;
    if segments.len() < 2 {
        return Err(mrcst_core::Error::TooFewSubjects(segments.len()).into());
    }
    let pd = segments.iter().filter(|s| s.label == Label::Parkinson).count();
    if pd == 0 || pd == segments.len() {
        return Err(mrcst_core::Error::SingleClass.into());
    }
    let seeds: Vec<u64> = (0..runs).map(|r| run_seed(master_seed, r)).collect();
    let channels: Vec<Channels> = seeds
        .par_iter()
        .map(|&rs| build_channels(segments, cfg, rs))
        .collect::<Result<_, _>>()?;
    let jobs: Vec<(usize, usize)> = (0..runs)
        .flat_map(|r| (0..segments.len()).map(move |s| (r, s)))
        .collect();
    let folds = jobs
        .par_iter()
        .map(|&(r, s)| run_fold(&channels[r], s, cfg, r, seeds[r]))
        .collect::<Result<Vec<_>, _>>()?;
    let runs = summarize_runs(&folds, &seeds)?;
    let aggregate = aggregate(&runs);
    Ok(LosoOutcome {
        folds,
        runs,
        aggregate,
    })
}
