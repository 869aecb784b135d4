//! Base classifiers behind one train/score contract.
//!
//! Scores live in `[-1, 1]`; a sample is predicted PD iff its score is
//! strictly positive.

pub mod forest;
pub mod svm;

use alloc::string::String;
use core::fmt::Write;

use crate::error::{Error, Result};
use crate::segment::Label;

pub use forest::{Forest, ForestParams};
pub use svm::{Gram, SvmModel, SvmParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum ClassifierKind {
    Svm,
    Rf,
}

impl ClassifierKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ClassifierKind::Svm => "svm",
            ClassifierKind::Rf => "rf",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClassifierSpec {
    Svm(SvmParams),
    Forest(ForestParams),
    /// Always answers the given label. Used as a reference baseline.
    Constant(Label),
}

impl ClassifierSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            ClassifierSpec::Svm(p) => p.validate(),
            ClassifierSpec::Forest(p) => p.validate(),
            ClassifierSpec::Constant(_) => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TrainedModel {
    Svm(SvmModel),
    Forest(Forest),
    Constant { label: Label, n_features: usize },
}

/// Trains `spec` on `(xs, labels)`. `seed` drives the forest; the SVM is deterministic.
pub fn train(spec: &ClassifierSpec, xs: &[&[f64]], labels: &[Label], seed: u64) -> Result<TrainedModel> {
    if xs.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            expected: xs.len(),
            found: labels.len(),
        });
    }
    svm::check_classes(labels)?;
    let n = xs[0].len();
    if let Some(bad) = xs.iter().find(|r| r.len() != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: bad.len(),
        });
    }
    Ok(match spec {
        ClassifierSpec::Svm(p) => TrainedModel::Svm(svm::train(p, xs, labels)?),
        ClassifierSpec::Forest(p) => TrainedModel::Forest(forest::train(p, xs, labels, seed)?),
        ClassifierSpec::Constant(label) => TrainedModel::Constant {
            label: *label,
            n_features: n,
        },
    })
}

impl TrainedModel {
    pub fn n_features(&self) -> usize {
        match self {
            TrainedModel::Svm(m) => m.n_features,
            TrainedModel::Forest(f) => f.n_features,
            TrainedModel::Constant { n_features, .. } => *n_features,
        }
    }

    /// Score in `[-1, 1]`: `tanh` of the SVM decision value, or the affine
    /// map of the forest's PD vote fraction.
    pub fn score(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.n_features() {
            return Err(Error::DimensionMismatch {
                expected: self.n_features(),
                found: x.len(),
            });
        }
        Ok(match self {
            TrainedModel::Svm(m) => libm::tanh(m.decision(x)),
            TrainedModel::Forest(f) => f.score(x),
            TrainedModel::Constant { label, .. } => label.sign(),
        })
    }

    pub fn predict(&self, x: &[f64]) -> Result<Label> {
        self.score(x).map(Label::from_score)
    }

    /// Plain-text dump, one parameter per line. For debugging only.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        // writing to a String cannot fail
        let _ = self.write_dump(&mut out);
        out
    }

    fn write_dump(&self, out: &mut String) -> core::fmt::Result {
        writeln!(out, "n_features {}", self.n_features())?;
        match self {
            TrainedModel::Svm(m) => {
                writeln!(out, "kind svm")?;
                writeln!(out, "c {:?}", m.params.c)?;
                writeln!(out, "gamma {:?}", m.params.gamma)?;
                writeln!(out, "degree {}", m.params.degree)?;
                writeln!(out, "coef0 {:?}", m.params.coef0)?;
                writeln!(out, "rho {:?}", m.rho)?;
                writeln!(out, "support_vectors {}", m.support.len())?;
                for (k, (sv, c)) in m.support.iter().zip(&m.coef).enumerate() {
                    writeln!(out, "sv[{k}].coef {c:?}")?;
                    for (j, v) in sv.iter().enumerate() {
                        writeln!(out, "sv[{k}][{j}] {v:?}")?;
                    }
                }
            }
            TrainedModel::Forest(f) => {
                writeln!(out, "kind rf")?;
                writeln!(out, "trees {}", f.trees.len())?;
                for (t, tree) in f.trees.iter().enumerate() {
                    for (k, node) in tree.nodes.iter().enumerate() {
                        match node {
                            forest::Node::Leaf(l) => writeln!(out, "tree[{t}].node[{k}] leaf {}", l.as_u8())?,
                            forest::Node::Split {
                                feature,
                                threshold,
                                left,
                                right,
                            } => writeln!(
                                out,
                                "tree[{t}].node[{k}] split f{feature} <= {threshold:?} -> {left} {right}"
                            )?,
                        }
                    }
                }
            }
            TrainedModel::Constant { label, .. } => {
                writeln!(out, "kind constant")?;
                writeln!(out, "label {}", label.as_u8())?;
            }
        }
        Ok(())
    }
}
