//! Run configuration: JSON file, command-line overrides, defaults.

use std::path::{Path, PathBuf};

use mrcst_core::classifier::forest::ForestParams;
use mrcst_core::classifier::svm::SvmParams;
use mrcst_core::classifier::{ClassifierKind, ClassifierSpec};
use mrcst_core::clustering::{ClusterParams, KMeansOptions};
use mrcst_core::envelope::TrimMode;
use mrcst_core::fusion::{lattice, FusionWeights};
use mrcst_core::normalize::NormMethod;
use mrcst_core::pipeline::{FusionMode, Method, PipelineConfig};
use serde::{Deserialize, Serialize};

use crate::io::DatasetFormat;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("config field `{path}`: {msg}")]
    Field { path: String, msg: String },
}

impl ConfigError {
    fn field(path: &str, msg: impl Into<String>) -> Self {
        ConfigError::Field {
            path: path.to_string(),
            msg: msg.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetConfig {
    #[serde(default)]
    pub path: PathBuf,
    #[serde(default = "default_format")]
    pub format: DatasetFormat,
}

fn default_format() -> DatasetFormat {
    DatasetFormat::Csv
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OperatorConfig {
    /// Clusters per layer. `None` picks the per-format default.
    pub q: Option<usize>,
    pub depth: usize,
    pub trim: TrimMode,
    pub restarts: usize,
    pub max_iter: usize,
}

impl Default for OperatorConfig {
    fn default() -> Self {
        let km = KMeansOptions::default();
        Self {
            q: None,
            depth: 1,
            trim: TrimMode::Retained,
            restarts: km.restarts,
            max_iter: km.max_iter,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifierConfig {
    pub svm: SvmParams,
    pub rf: ForestParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FusionConfig {
    pub grid_step: f64,
    pub mode: FusionMode,
    /// Fixed weights; skips the grid search.
    pub weights: Option<[f64; 3]>,
}

impl Default for FusionConfig {
    fn default() -> Self {
        Self {
            grid_step: 0.1,
            mode: FusionMode::Score,
            weights: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub dataset: DatasetConfig,
    pub operators: OperatorConfig,
    pub normalization: NormMethod,
    pub classifiers: ClassifierConfig,
    pub fusion: FusionConfig,
    pub method: Method,
    pub classifier: ClassifierKind,
    pub runs: usize,
    pub seed: u64,
    /// Output directory. Not echoed into reports so that identical runs
    /// written to different places stay byte-identical.
    #[serde(skip_serializing)]
    pub out: PathBuf,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        Self {
            path: PathBuf::new(),
            format: default_format(),
        }
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            dataset: DatasetConfig::default(),
            operators: OperatorConfig::default(),
            normalization: NormMethod::MinMax,
            classifiers: ClassifierConfig::default(),
            fusion: FusionConfig::default(),
            method: Method::Mrcst,
            classifier: ClassifierKind::Svm,
            runs: 10,
            seed: 0,
            out: PathBuf::from("out"),
        }
    }
}

/// Default cluster count: 3 for the 26-row Sakar segments, 2 for the
/// 6-7-row MaxLittle segments.
pub fn default_q(format: DatasetFormat) -> usize {
    match format {
        DatasetFormat::MaxLittle => 2,
        DatasetFormat::Sakar | DatasetFormat::Csv => 3,
    }
}

/// Command-line values; `None` leaves the file or default value alone.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub input: Option<PathBuf>,
    pub format: Option<DatasetFormat>,
    pub q: Option<usize>,
    pub depth: Option<usize>,
    pub trim: Option<TrimMode>,
    pub norm: Option<NormMethod>,
    pub method: Option<Method>,
    pub classifier: Option<ClassifierKind>,
    pub runs: Option<usize>,
    pub seed: Option<u64>,
    pub grid_step: Option<f64>,
    pub fusion_mode: Option<FusionMode>,
    pub weights: Option<[f64; 3]>,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            ConfigError::Field {
                path,
                msg: e.into_inner().to_string(),
            }
        })
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }

    /// Flag > file > default, then fills per-format defaults and validates.
    pub fn resolve(file: Option<&Path>, o: &Overrides) -> Result<Self, ConfigError> {
        let mut cfg = match file {
            Some(p) => Self::from_file(p)?,
            None => Self::default(),
        };
        macro_rules! set {
            ($src:expr => $dst:expr) => {
                if let Some(v) = $src.clone() {
                    $dst = v;
                }
            };
        }
        set!(o.input => cfg.dataset.path);
        set!(o.format => cfg.dataset.format);
        set!(o.depth => cfg.operators.depth);
        set!(o.trim => cfg.operators.trim);
        set!(o.norm => cfg.normalization);
        set!(o.method => cfg.method);
        set!(o.classifier => cfg.classifier);
        set!(o.runs => cfg.runs);
        set!(o.seed => cfg.seed);
        set!(o.grid_step => cfg.fusion.grid_step);
        set!(o.fusion_mode => cfg.fusion.mode);
        set!(o.out => cfg.out);
        if o.q.is_some() {
            cfg.operators.q = o.q;
        }
        if o.weights.is_some() {
            cfg.fusion.weights = o.weights;
        }
        if cfg.operators.q.is_none() {
            cfg.operators.q = Some(default_q(cfg.dataset.format));
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.dataset.path.as_os_str().is_empty() {
            return Err(ConfigError::field("dataset.path", "no input given"));
        }
        if self.operators.q == Some(0) {
            return Err(ConfigError::field("operators.q", "must be >= 1"));
        }
        if self.operators.depth == 0 {
            return Err(ConfigError::field("operators.depth", "must be >= 1"));
        }
        if self.operators.restarts == 0 {
            return Err(ConfigError::field("operators.restarts", "must be >= 1"));
        }
        if self.operators.max_iter == 0 {
            return Err(ConfigError::field("operators.max_iter", "must be >= 1"));
        }
        if self.runs == 0 {
            return Err(ConfigError::field("runs", "must be >= 1"));
        }
        lattice(self.fusion.grid_step).map_err(|e| ConfigError::field("fusion.grid_step", e.to_string()))?;
        if let Some([a, b, c]) = self.fusion.weights {
            FusionWeights::new(a, b, c).map_err(|e| ConfigError::field("fusion.weights", e.to_string()))?;
        }
        self.classifiers
            .svm
            .validate()
            .map_err(|e| ConfigError::field("classifiers.svm", e.to_string()))?;
        self.classifiers
            .rf
            .validate()
            .map_err(|e| ConfigError::field("classifiers.rf", e.to_string()))?;
        Ok(())
    }

    pub fn q(&self) -> usize {
        self.operators.q.unwrap_or_else(|| default_q(self.dataset.format))
    }

    pub fn classifier_spec(&self, kind: ClassifierKind) -> ClassifierSpec {
        match kind {
            ClassifierKind::Svm => ClassifierSpec::Svm(self.classifiers.svm),
            ClassifierKind::Rf => ClassifierSpec::Forest(self.classifiers.rf),
        }
    }

    /// Pipeline settings for `method` and `kind` (the ablation varies both).
    pub fn pipeline_for(&self, method: Method, kind: ClassifierKind) -> PipelineConfig {
        let mut p = PipelineConfig::new(method, self.classifier_spec(kind));
        p.trim = self.operators.trim;
        p.cluster = ClusterParams {
            q: self.q(),
            depth: self.operators.depth,
            kmeans: KMeansOptions {
                restarts: self.operators.restarts,
                max_iter: self.operators.max_iter,
                ..KMeansOptions::default()
            },
        };
        p.norm = self.normalization;
        p.grid_step = self.fusion.grid_step;
        p.fusion_mode = self.fusion.mode;
        p.forced_weights = self
            .fusion
            .weights
            .map(|[a, b, c]| FusionWeights::new(a, b, c).expect("validated"));
        p
    }

    pub fn pipeline(&self) -> PipelineConfig {
        self.pipeline_for(self.method, self.classifier)
    }

    /// Canonical one-line JSON echo.
    pub fn echo(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }
}
