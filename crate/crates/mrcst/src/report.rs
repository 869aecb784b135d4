//! Report files: report.json, folds.csv, ablation.csv.

use std::fmt::Write as _;

use mrcst_core::classifier::ClassifierKind;
use mrcst_core::pipeline::{Aggregate, FoldRecord, LosoOutcome, Method, RunSummary};
use serde::Serialize;

use crate::config::RunConfig;

/// How the numbers were counted; stored next to them.
pub const PROTOCOL: &str = "leave-one-subject-out; one verdict per subject from the mean of its sample scores; \
metrics in percent over subjects per run, then mean and sample std over runs";

fn pct(v: f64) -> f64 {
    100.0 * v
}

#[derive(Debug, Clone, Serialize)]
pub struct RunRow {
    pub run: usize,
    pub seed: u64,
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub accuracy: f64,
    pub sensitivity: Option<f64>,
    pub specificity: Option<f64>,
}

impl From<&RunSummary> for RunRow {
    fn from(r: &RunSummary) -> Self {
        RunRow {
            run: r.run,
            seed: r.seed,
            tp: r.counts.tp,
            fp: r.counts.fp,
            tn: r.counts.tn,
            fn_: r.counts.fn_,
            accuracy: pct(r.metrics.accuracy),
            sensitivity: r.metrics.sensitivity.map(pct),
            specificity: r.metrics.specificity.map(pct),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EvaluationReport {
    pub config: RunConfig,
    pub method: Method,
    pub classifier: ClassifierKind,
    pub accuracy_mean: f64,
    pub accuracy_std: f64,
    pub sensitivity_mean: Option<f64>,
    pub sensitivity_std: Option<f64>,
    pub specificity_mean: Option<f64>,
    pub specificity_std: Option<f64>,
    pub weights_per_fold: Vec<[f64; 3]>,
    pub folds: Vec<FoldRecord>,
    pub runs: Vec<RunRow>,
    pub subjects: usize,
    pub channels: Vec<&'static str>,
    pub protocol: &'static str,
}

impl EvaluationReport {
    pub fn new(config: &RunConfig, method: Method, classifier: ClassifierKind, subjects: usize, outcome: LosoOutcome) -> Self {
        let a = outcome.aggregate;
        EvaluationReport {
            config: config.clone(),
            method,
            classifier,
            accuracy_mean: pct(a.accuracy_mean),
            accuracy_std: pct(a.accuracy_std),
            sensitivity_mean: a.sensitivity_mean.map(pct),
            sensitivity_std: a.sensitivity_std.map(pct),
            specificity_mean: a.specificity_mean.map(pct),
            specificity_std: a.specificity_std.map(pct),
            weights_per_fold: outcome.folds.iter().map(|f| f.weights.as_array()).collect(),
            runs: outcome.runs.iter().map(RunRow::from).collect(),
            folds: outcome.folds,
            subjects,
            channels: method.channel_names().to_vec(),
            protocol: PROTOCOL,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// One row per fold, preceded by a `# config=` comment line.
    pub fn folds_csv(&self) -> String {
        let mut out = format!("# config={}\n", self.config.echo());
        out.push_str("run,subject_id,true_label,predicted,fused_score");
        for c in &self.channels {
            let _ = write!(out, ",score_{c}");
        }
        out.push_str(",w1,w2,w3\n");
        for f in &self.folds {
            let _ = write!(
                out,
                "{},{},{},{},{}",
                f.run,
                f.subject_id,
                f.true_label.as_u8(),
                f.predicted.as_u8(),
                f.fused_score
            );
            for s in &f.channel_scores {
                let _ = write!(out, ",{s}");
            }
            let [a, b, c] = f.weights.as_array();
            let _ = writeln!(out, ",{a},{b},{c}");
        }
        out
    }
}

fn mean_pm_std(mean: Option<f64>, std: Option<f64>) -> String {
    match (mean, std) {
        (Some(m), Some(s)) => format!("{:.2}±{:.2}", pct(m), pct(s)),
        _ => "NA".to_string(),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AblationCell {
    pub method: Method,
    pub classifier: ClassifierKind,
    pub aggregate: Aggregate,
}

/// `method,classifier,accuracy,sensitivity,specificity` with mean±std in percent.
pub fn ablation_csv(config: &RunConfig, cells: &[AblationCell]) -> String {
    let mut out = format!("# config={}\n", config.echo());
    out.push_str("method,classifier,accuracy,sensitivity,specificity\n");
    for c in cells {
        let a = &c.aggregate;
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            c.method.as_str(),
            c.classifier.as_str(),
            mean_pm_std(Some(a.accuracy_mean), Some(a.accuracy_std)),
            mean_pm_std(a.sensitivity_mean, a.sensitivity_std),
            mean_pm_std(a.specificity_mean, a.specificity_std),
        );
    }
    out
}
