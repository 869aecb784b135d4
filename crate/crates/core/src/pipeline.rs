//! Leave-one-subject-out evaluation of a reconstruction method.
//!
//! Per run, every subject is transformed on its own (the operators never look
//! across subjects), so the derived channels are computed once and shared by
//! all folds. A fold then fits normalizers and classifiers on the training
//! subjects only, tunes fusion weights by an inner LOSO over those same
//! subjects, and scores the held-out subject.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::classifier::{self, svm, ClassifierSpec, Gram, TrainedModel};
use crate::clustering::{cluster_segment, envelope_clusters, ClusterParams};
use crate::convolution::convolve_clusters;
use crate::envelope::{envelope_segment, TrimMode};
use crate::error::{Error, Result};
use crate::fusion::{fuse, grid_search_weights, lattice, subject_decision, FusionWeights, TuningSubject};
use crate::metrics::{compute_metrics, ConfusionCounts, Metrics};
use crate::normalize::{NormMethod, Normalizer};
use crate::seed;
use crate::segment::{Label, SubjectSegment, TransformedDataset};

/// Which derived dataset(s) feed the classifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Method {
    /// Raw samples, no transformation.
    None,
    Ef,
    Es,
    Et,
    /// All three channels with weighted fusion.
    Mrcst,
}

impl Method {
    pub const ALL: [Method; 5] = [Method::None, Method::Ef, Method::Es, Method::Et, Method::Mrcst];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::None => "none",
            Method::Ef => "ef",
            Method::Es => "es",
            Method::Et => "et",
            Method::Mrcst => "mrcst",
        }
    }

    pub fn channel_names(self) -> &'static [&'static str] {
        match self {
            Method::None => &["raw"],
            Method::Ef => &["ef"],
            Method::Es => &["es"],
            Method::Et => &["et"],
            Method::Mrcst => &["ef", "es", "et"],
        }
    }
}

/// What each channel contributes to the fusion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum FusionMode {
    /// Mean of the channel's per-sample scores.
    #[default]
    Score,
    /// The channel's hard subject verdict as ±1.
    Label,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub method: Method,
    pub classifier: ClassifierSpec,
    pub trim: TrimMode,
    pub cluster: ClusterParams,
    pub norm: NormMethod,
    pub grid_step: f64,
    pub fusion_mode: FusionMode,
    /// Skip the weight search and use these weights.
    pub forced_weights: Option<FusionWeights>,
}

impl PipelineConfig {
    pub fn new(method: Method, classifier: ClassifierSpec) -> Self {
        Self {
            method,
            classifier,
            trim: TrimMode::Retained,
            cluster: ClusterParams::new(3, 1),
            norm: NormMethod::MinMax,
            grid_step: 0.1,
            fusion_mode: FusionMode::Score,
            forced_weights: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.classifier.validate()?;
        if self.cluster.q == 0 {
            return Err(Error::InvalidClusterCount { q: 0, rows: 0 });
        }
        if self.cluster.depth == 0 {
            return Err(Error::InvalidDepth(0));
        }
        lattice(self.grid_step)?;
        Ok(())
    }
}

/// Seed of run `run` under `master`.
pub fn run_seed(master: u64, run: usize) -> u64 {
    seed::derive(master, run as u64)
}

/// Derived rows of one subject for each channel of `method`.
pub fn transform_subject(segment: &SubjectSegment, cfg: &PipelineConfig, run_seed: u64) -> Result<Vec<SubjectSegment>> {
    if segment.rows.is_empty() {
        return Err(Error::EmptySegment(segment.subject_id.clone()));
    }
    let clustered = || cluster_segment(segment, &cfg.cluster, run_seed);
    Ok(match cfg.method {
        Method::None => vec![segment.clone()],
        Method::Ef => vec![envelope_segment(segment, cfg.trim)?],
        Method::Es => vec![envelope_clusters(&clustered()?, cfg.trim)?],
        Method::Et => vec![convolve_clusters(&clustered()?, cfg.trim)?],
        Method::Mrcst => {
            let y = clustered()?;
            vec![
                envelope_segment(segment, cfg.trim)?,
                envelope_clusters(&y, cfg.trim)?,
                convolve_clusters(&y, cfg.trim)?,
            ]
        }
    })
}

/// Per-channel derived datasets, subjects in input order.
#[derive(Debug, Clone, PartialEq)]
pub struct Channels {
    pub datasets: Vec<TransformedDataset>,
}

impl Channels {
    /// Assembles channels from per-subject outputs of [`transform_subject`].
    pub fn from_subjects(per_subject: Vec<Vec<SubjectSegment>>) -> Self {
        let width = per_subject.first().map_or(0, Vec::len);
        let mut datasets = vec![TransformedDataset::default(); width];
        for subject in per_subject {
            for (d, seg) in datasets.iter_mut().zip(subject) {
                d.segments.push(seg);
            }
        }
        Self { datasets }
    }

    pub fn n_subjects(&self) -> usize {
        self.datasets.first().map_or(0, TransformedDataset::n_subjects)
    }
}

pub fn build_channels(segments: &[SubjectSegment], cfg: &PipelineConfig, run_seed: u64) -> Result<Channels> {
    let per_subject = segments
        .iter()
        .map(|s| transform_subject(s, cfg, run_seed))
        .collect::<Result<Vec<_>>>()?;
    Ok(Channels::from_subjects(per_subject))
}

/// Everything fitted for one fold. Depends only on the training subjects.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldModels {
    pub normalizers: Vec<Normalizer>,
    pub models: Vec<TrainedModel>,
    pub weights: FusionWeights,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FoldRecord {
    pub run: usize,
    pub subject_id: String,
    pub true_label: Label,
    pub channel_scores: Vec<f64>,
    pub fused_score: f64,
    pub predicted: Label,
    pub weights: FusionWeights,
}

/// Normalized training rows of one channel, with the owning subject of each row.
struct ChannelData {
    rows: Vec<Vec<f64>>,
    labels: Vec<Label>,
    owner: Vec<usize>,
}

enum Trainer<'a> {
    Svm { params: &'a svm::SvmParams, gram: Gram },
    Generic(&'a ClassifierSpec),
}

impl Trainer<'_> {
    fn train(&self, data: &ChannelData, idx: &[usize], seed: u64) -> Result<TrainedModel> {
        let xs: Vec<&[f64]> = idx.iter().map(|&i| data.rows[i].as_slice()).collect();
        let labels: Vec<Label> = idx.iter().map(|&i| data.labels[i]).collect();
        match self {
            Trainer::Svm { params, gram } => {
                let sub = if idx.len() == gram.len() { gram.clone() } else { gram.subset(idx) };
                Ok(TrainedModel::Svm(svm::train_with_gram(params, &xs, &labels, &sub)?))
            }
            Trainer::Generic(spec) => classifier::train(spec, &xs, &labels, seed),
        }
    }
}

fn channel_value(model: &TrainedModel, normalizer: &Normalizer, rows: &[Vec<f64>], mode: FusionMode) -> Result<f64> {
    let mut scores = Vec::with_capacity(rows.len());
    for r in rows {
        let s = model.score(&normalizer.apply_row(r))?;
        scores.push(match mode {
            FusionMode::Score => s,
            FusionMode::Label => Label::from_score(s).sign(),
        });
    }
    let (label, mean) = subject_decision(&scores)?;
    Ok(match mode {
        FusionMode::Score => mean,
        FusionMode::Label => label.sign(),
    })
}

fn combine(values: &[f64], weights: &FusionWeights) -> f64 {
    match values {
        [v] => *v,
        [a, b, c] => fuse([*a, *b, *c], weights),
        _ => unreachable!("one or three channels"),
    }
}

fn has_both_classes<'a>(labels: impl Iterator<Item = &'a Label>) -> bool {
    let (mut pos, mut neg) = (false, false);
    for l in labels {
        match l {
            Label::Parkinson => pos = true,
            Label::Healthy => neg = true,
        }
    }
    pos && neg
}

/// Fits normalizers, classifiers and fusion weights for the fold that holds
/// out subject `held_out`. The held-out subject's rows are never read.
pub fn fit_fold(channels: &Channels, held_out: usize, cfg: &PipelineConfig, run_seed: u64) -> Result<FoldModels> {
    let n_subjects = channels.n_subjects();
    if n_subjects < 2 {
        return Err(Error::TooFewSubjects(n_subjects));
    }
    let reference = &channels.datasets[0].segments;
    let held_id = &reference[held_out].subject_id;
    let train_subjects: Vec<usize> = (0..n_subjects).filter(|&s| s != held_out).collect();
    if !has_both_classes(train_subjects.iter().map(|&s| &reference[s].label)) {
        return Err(Error::FoldLostClass(held_id.clone()));
    }
    let fold_seed = seed::derive_str(run_seed, held_id);

    let mut normalizers = Vec::with_capacity(channels.datasets.len());
    let mut models = Vec::with_capacity(channels.datasets.len());
    let mut prepared = Vec::with_capacity(channels.datasets.len());
    for (c, dataset) in channels.datasets.iter().enumerate() {
        let mut raw: Vec<&[f64]> = Vec::new();
        let mut labels = Vec::new();
        let mut owner = Vec::new();
        for &s in &train_subjects {
            let seg = &dataset.segments[s];
            for r in &seg.rows {
                raw.push(r);
                labels.push(seg.label);
                owner.push(s);
            }
        }
        let normalizer = Normalizer::fit_rows(&raw, cfg.norm);
        let data = ChannelData {
            rows: raw.iter().map(|r| normalizer.apply_row(r)).collect(),
            labels,
            owner,
        };
        let trainer = match &cfg.classifier {
            ClassifierSpec::Svm(params) => {
                let xs: Vec<&[f64]> = data.rows.iter().map(Vec::as_slice).collect();
                Trainer::Svm {
                    params,
                    gram: Gram::new(&xs, params),
                }
            }
            other => Trainer::Generic(other),
        };
        let all: Vec<usize> = (0..data.rows.len()).collect();
        models.push(trainer.train(&data, &all, seed::derive(fold_seed, c as u64))?);
        normalizers.push(normalizer);
        prepared.push((data, trainer));
    }

    let weights = if cfg.method != Method::Mrcst {
        FusionWeights::single(0)
    } else if let Some(w) = cfg.forced_weights {
        w
    } else {
        let mut tuning = Vec::with_capacity(train_subjects.len());
        for &t in &train_subjects {
            let t_id = &reference[t].subject_id;
            let mut values = [0.0; 3];
            for (c, (data, trainer)) in prepared.iter().enumerate() {
                let idx: Vec<usize> = (0..data.rows.len()).filter(|&i| data.owner[i] != t).collect();
                if !has_both_classes(idx.iter().map(|&i| &data.labels[i])) {
                    return Err(Error::FoldLostClass(t_id.clone()));
                }
                let inner_seed = seed::derive_str(seed::derive(fold_seed, c as u64), t_id);
                let model = trainer.train(data, &idx, inner_seed)?;
                let rows = &channels.datasets[c].segments[t].rows;
                values[c] = channel_value(&model, &normalizers[c], rows, cfg.fusion_mode)?;
            }
            tuning.push(TuningSubject {
                scores: values,
                label: reference[t].label,
            });
        }
        grid_search_weights(&tuning, cfg.grid_step)?
    };

    Ok(FoldModels {
        normalizers,
        models,
        weights,
    })
}

/// Scores the held-out subject with models fitted by [`fit_fold`].
pub fn evaluate_fold(
    channels: &Channels,
    held_out: usize,
    models: &FoldModels,
    cfg: &PipelineConfig,
    run: usize,
) -> Result<FoldRecord> {
    let reference = &channels.datasets[0].segments[held_out];
    let mut values = Vec::with_capacity(channels.datasets.len());
    for (c, dataset) in channels.datasets.iter().enumerate() {
        values.push(channel_value(
            &models.models[c],
            &models.normalizers[c],
            &dataset.segments[held_out].rows,
            cfg.fusion_mode,
        )?);
    }
    let fused = combine(&values, &models.weights);
    Ok(FoldRecord {
        run,
        subject_id: reference.subject_id.clone(),
        true_label: reference.label,
        channel_scores: values,
        fused_score: fused,
        predicted: Label::from_score(fused),
        weights: models.weights,
    })
}

pub fn run_fold(channels: &Channels, held_out: usize, cfg: &PipelineConfig, run: usize, run_seed: u64) -> Result<FoldRecord> {
    let models = fit_fold(channels, held_out, cfg, run_seed)?;
    evaluate_fold(channels, held_out, &models, cfg, run)
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RunSummary {
    pub run: usize,
    pub seed: u64,
    pub counts: ConfusionCounts,
    pub metrics: Metrics,
}

/// Mean and sample standard deviation over runs, as fractions.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Aggregate {
    pub accuracy_mean: f64,
    pub accuracy_std: f64,
    pub sensitivity_mean: Option<f64>,
    pub sensitivity_std: Option<f64>,
    pub specificity_mean: Option<f64>,
    pub specificity_std: Option<f64>,
}

fn mean_std(values: &[f64]) -> Option<(f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std = if values.len() > 1 {
        libm::sqrt(values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0))
    } else {
        0.0
    };
    Some((mean, std))
}

/// Per-run confusion counts from fold records (records must carry `run`).
pub fn summarize_runs(folds: &[FoldRecord], seeds: &[u64]) -> Result<Vec<RunSummary>> {
    let mut out = Vec::with_capacity(seeds.len());
    for (run, &seed) in seeds.iter().enumerate() {
        let mut counts = ConfusionCounts::default();
        for f in folds.iter().filter(|f| f.run == run) {
            counts.record(f.true_label, f.predicted);
        }
        out.push(RunSummary {
            run,
            seed,
            counts,
            metrics: compute_metrics(&counts)?,
        });
    }
    Ok(out)
}

pub fn aggregate(runs: &[RunSummary]) -> Aggregate {
    let acc: Vec<f64> = runs.iter().map(|r| r.metrics.accuracy).collect();
    let sens: Vec<f64> = runs.iter().filter_map(|r| r.metrics.sensitivity).collect();
    let spec: Vec<f64> = runs.iter().filter_map(|r| r.metrics.specificity).collect();
    let (accuracy_mean, accuracy_std) = mean_std(&acc).unwrap_or((f64::NAN, f64::NAN));
    let s = mean_std(&sens);
    let p = mean_std(&spec);
    Aggregate {
        accuracy_mean,
        accuracy_std,
        sensitivity_mean: s.map(|v| v.0),
        sensitivity_std: s.map(|v| v.1),
        specificity_mean: p.map(|v| v.0),
        specificity_std: p.map(|v| v.1),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LosoOutcome {
    pub folds: Vec<FoldRecord>,
    pub runs: Vec<RunSummary>,
    pub aggregate: Aggregate,
}

/// Sequential reference driver: `runs` repetitions of a full LOSO sweep.
pub fn run_loso(segments: &[SubjectSegment], cfg: &PipelineConfig, runs: usize, master_seed: u64) -> Result<LosoOutcome> {
    cfg.validate()?;
    if segments.len() < 2 {
        return Err(Error::TooFewSubjects(segments.len()));
    }
    if !has_both_classes(segments.iter().map(|s| &s.label)) {
        return Err(Error::SingleClass);
    }
    let seeds: Vec<u64> = (0..runs).map(|r| run_seed(master_seed, r)).collect();
    let mut folds = Vec::with_capacity(runs * segments.len());
    for (run, &rs) in seeds.iter().enumerate() {
        let channels = build_channels(segments, cfg, rs)?;
        for held_out in 0..segments.len() {
            folds.push(run_fold(&channels, held_out, cfg, run, rs)?);
        }
    }
    let run_summaries = summarize_runs(&folds, &seeds)?;
    let aggregate = aggregate(&run_summaries);
    Ok(LosoOutcome {
        folds,
        runs: run_summaries,
        aggregate,
    })
}
