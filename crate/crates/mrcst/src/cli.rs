//! `mrcst transform | evaluate | ablation`.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;
use mrcst_core::classifier::ClassifierKind;
use mrcst_core::envelope::TrimMode;
use mrcst_core::normalize::{NormMethod, Normalizer};
use mrcst_core::pipeline::{build_channels, run_seed, FusionMode, Method, PipelineConfig};
use mrcst_core::{SubjectSegment, TransformedDataset};
use serde::Serialize;

use crate::config::{ConfigError, Overrides, RunConfig};
use crate::io::{self, DatasetFormat, LoadError};
use crate::report::{ablation_csv, AblationCell, EvaluationReport};
use crate::runner::{self, RunError};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Load(#[from] LoadError),
    #[error(transparent)]
    Run(#[from] RunError),
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    /// 2 for config errors and missing input; 1 for everything at run time.
    /// Usage errors exit with 2 from the argument parser.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Load(LoadError::NotFound(_)) => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "mrcst", version, about = "Multitype sample reconstruction for subject-grouped speech data")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the three reconstructed datasets (un-normalized) and a manifest.
    Transform {
        #[command(flatten)]
        common: CommonArgs,
        /// Debug only: min-max/z-score each file over all subjects before writing.
        #[arg(long, value_enum, default_value = "none")]
        normalized: GlobalNorm,
    },
    /// LOSO evaluation of one method and classifier.
    Evaluate {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// All method x classifier cells.
    Ablation {
        #[command(flatten)]
        common: CommonArgs,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GlobalNorm {
    None,
    Global,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FormatArg {
    Sakar,
    Maxlittle,
    Csv,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum TrimArg {
    Retained,
    Paper,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum NormArg {
    Minmax,
    Zscore,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MethodArg {
    None,
    Ef,
    Es,
    Et,
    Mrcst,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ClassifierArg {
    Svm,
    Rf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FusionModeArg {
    Score,
    Label,
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    #[arg(long)]
    pub q: Option<usize>,
    #[arg(long)]
    pub depth: Option<usize>,
    #[arg(long, value_enum)]
    pub trim: Option<TrimArg>,
    #[arg(long, value_enum)]
    pub norm: Option<NormArg>,
    #[arg(long, value_enum)]
    pub method: Option<MethodArg>,
    #[arg(long, value_enum)]
    pub classifier: Option<ClassifierArg>,
    #[arg(long)]
    pub runs: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub grid_step: Option<f64>,
    #[arg(long, value_enum)]
    pub fusion_mode: Option<FusionModeArg>,
    /// Fixed fusion weights `a1,a2,a3` (skips the grid search).
    #[arg(long, value_parser = parse_weights)]
    pub weights: Option<[f64; 3]>,
    /// Worker threads; 0 uses every core. Does not affect results.
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

fn parse_weights(s: &str) -> Result<[f64; 3], String> {
    let parts = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("`{p}`: {e}")))
        .collect::<Result<Vec<_>, _>>()?;
    <[f64; 3]>::try_from(parts).map_err(|p| format!("expected three comma-separated weights, got {}", p.len()))
}

impl CommonArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            input: self.input.clone(),
            format: self.format.map(|f| match f {
                FormatArg::Sakar => DatasetFormat::Sakar,
                FormatArg::Maxlittle => DatasetFormat::MaxLittle,
                FormatArg::Csv => DatasetFormat::Csv,
            }),
            q: self.q,
            depth: self.depth,
            trim: self.trim.map(|t| match t {
                TrimArg::Retained => TrimMode::Retained,
                TrimArg::Paper => TrimMode::FullDenominator,
            }),
            norm: self.norm.map(|n| match n {
                NormArg::Minmax => NormMethod::MinMax,
                NormArg::Zscore => NormMethod::ZScore,
            }),
            method: self.method.map(|m| match m {
                MethodArg::None => Method::None,
                MethodArg::Ef => Method::Ef,
                MethodArg::Es => Method::Es,
                MethodArg::Et => Method::Et,
                MethodArg::Mrcst => Method::Mrcst,
            }),
            classifier: self.classifier.map(|c| match c {
                ClassifierArg::Svm => ClassifierKind::Svm,
                ClassifierArg::Rf => ClassifierKind::Rf,
            }),
            runs: self.runs,
            seed: self.seed,
            grid_step: self.grid_step,
            fusion_mode: self.fusion_mode.map(|m| match m {
                FusionModeArg::Score => FusionMode::Score,
                FusionModeArg::Label => FusionMode::Label,
            }),
            weights: self.weights,
            out: self.out.clone(),
        }
    }

    fn resolve(&self) -> Result<RunConfig, CliError> {
        Ok(RunConfig::resolve(self.config.as_deref(), &self.overrides())?)
    }
}

fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|source| CliError::Write {
        path: path.to_path_buf(),
        source,
    })
}

fn prepare_out(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|source| CliError::Write {
        path: dir.to_path_buf(),
        source,
    })
}

fn load(cfg: &RunConfig) -> Result<Vec<SubjectSegment>, CliError> {
    let segments = io::load(&cfg.dataset.path, cfg.dataset.format)?;
    info!(
        "loaded {} subjects, {} rows from {}",
        segments.len(),
        segments.iter().map(SubjectSegment::n_rows).sum::<usize>(),
        cfg.dataset.path.display()
    );
    Ok(segments)
}

#[derive(Serialize)]
struct Manifest<'a> {
    config: &'a RunConfig,
    run_seed: u64,
    subjects: usize,
    input_rows: usize,
    normalized: &'static str,
    files: Vec<ManifestFile>,
}

#[derive(Serialize)]
struct ManifestFile {
    name: String,
    rows: usize,
    features: usize,
}

fn normalize_globally(data: &TransformedDataset, method: NormMethod) -> TransformedDataset {
    Normalizer::fit(data, method).apply(data)
}

pub fn cmd_transform(common: &CommonArgs, normalized: GlobalNorm) -> Result<(), CliError> {
    let cfg = common.resolve()?;
    let segments = load(&cfg)?;
    // all three channels regardless of the configured method
    let pipeline = PipelineConfig {
        method: Method::Mrcst,
        ..cfg.pipeline()
    };
    let rs = run_seed(cfg.seed, 0);
    let channels = runner::with_pool(common.jobs, || build_channels(&segments, &pipeline, rs))?.map_err(RunError::from)?;
    prepare_out(&cfg.out)?;
    let mut files = Vec::new();
    for (name, data) in ["ef", "es", "et"].iter().zip(&channels.datasets) {
        let data = match normalized {
            GlobalNorm::None => data.clone(),
            GlobalNorm::Global => normalize_globally(data, cfg.normalization),
        };
        let file = format!("{name}.csv");
        let path = cfg.out.join(&file);
        io::write_generic_csv_file(&path, &data).map_err(|source| CliError::Write { path, source })?;
        files.push(ManifestFile {
            name: file,
            rows: data.n_rows(),
            features: data.segments.first().map_or(0, SubjectSegment::n_features),
        });
    }
    let manifest = Manifest {
        config: &cfg,
        run_seed: rs,
        subjects: segments.len(),
        input_rows: segments.iter().map(SubjectSegment::n_rows).sum(),
        normalized: match normalized {
            GlobalNorm::None => "none",
            GlobalNorm::Global => "global",
        },
        files,
    };
    let mut json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    json.push('\n');
    write(&cfg.out.join("manifest.json"), &json)
}

pub fn evaluate_config(cfg: &RunConfig, segments: &[SubjectSegment], jobs: usize) -> Result<EvaluationReport, CliError> {
    let pipeline = cfg.pipeline();
    let outcome = runner::with_pool(jobs, || runner::evaluate(segments, &pipeline, cfg.runs, cfg.seed))??;
    Ok(EvaluationReport::new(cfg, cfg.method, cfg.classifier, segments.len(), outcome))
}

pub fn cmd_evaluate(common: &CommonArgs) -> Result<(), CliError> {
    let cfg = common.resolve()?;
    let segments = load(&cfg)?;
    let report = evaluate_config(&cfg, &segments, common.jobs)?;
    info!(
        "{} + {}: accuracy {:.2} ± {:.2}",
        cfg.method.as_str(),
        cfg.classifier.as_str(),
        report.accuracy_mean,
        report.accuracy_std
    );
    prepare_out(&cfg.out)?;
    write(&cfg.out.join("report.json"), &report.to_json())?;
    write(&cfg.out.join("folds.csv"), &report.folds_csv())
}

/// Every (method, classifier) cell, methods outer, svm before rf.
pub fn ablation_cells(cfg: &RunConfig, segments: &[SubjectSegment], jobs: usize) -> Result<Vec<AblationCell>, CliError> {
    let mut cells = Vec::new();
    for method in Method::ALL {
        for kind in [ClassifierKind::Svm, ClassifierKind::Rf] {
            let pipeline = cfg.pipeline_for(method, kind);
            let outcome = runner::with_pool(jobs, || runner::evaluate(segments, &pipeline, cfg.runs, cfg.seed))??;
            info!("{} + {}: accuracy {:.4}", method.as_str(), kind.as_str(), outcome.aggregate.accuracy_mean);
            cells.push(AblationCell {
                method,
                classifier: kind,
                aggregate: outcome.aggregate,
            });
        }
    }
    Ok(cells)
}

pub fn cmd_ablation(common: &CommonArgs) -> Result<(), CliError> {
    let cfg = common.resolve()?;
    let segments = load(&cfg)?;
    let cells = ablation_cells(&cfg, &segments, common.jobs)?;
    prepare_out(&cfg.out)?;
    write(&cfg.out.join("ablation.csv"), &ablation_csv(&cfg, &cells))?;
    let mut json = serde_json::to_string_pretty(&serde_json::json!({ "config": &cfg, "cells": &cells })).expect("serializes");
    json.push('\n');
    write(&cfg.out.join("ablation.json"), &json)
}

pub fn dispatch(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Transform { common, normalized } => cmd_transform(common, *normalized),
        Command::Evaluate { common } => cmd_evaluate(common),
        Command::Ablation { common } => cmd_ablation(common),
    }
}

/// Parses `args` and runs; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
