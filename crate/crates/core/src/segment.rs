//! Subject-grouped sample model.
//!
//! A dataset is a list of [`SubjectSegment`]s: every row of a segment comes
//! from the same subject and carries that subject's label. Segments may hold
//! different numbers of rows; all rows of a dataset share one feature count.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Binary diagnosis label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(into = "u8", try_from = "u8"))]
pub enum Label {
    Healthy,
    Parkinson,
}

impl Label {
    pub fn from_u8(v: u8) -> Result<Self> {
        match v {
            0 => Ok(Label::Healthy),
            1 => Ok(Label::Parkinson),
            other => Err(Error::InvalidLabel(other)),
        }
    }

    pub fn as_u8(self) -> u8 {
        match self {
            Label::Healthy => 0,
            Label::Parkinson => 1,
        }
    }

    /// `+1.0` for PD, `-1.0` for healthy.
    pub fn sign(self) -> f64 {
        match self {
            Label::Healthy => -1.0,
            Label::Parkinson => 1.0,
        }
    }

    /// Decision rule shared by every scorer: PD iff strictly positive.
    pub fn from_score(score: f64) -> Self {
        if score > 0.0 {
            Label::Parkinson
        } else {
            Label::Healthy
        }
    }
}

impl From<Label> for u8 {
    fn from(l: Label) -> u8 {
        l.as_u8()
    }
}

impl TryFrom<u8> for Label {
    type Error = Error;
    fn try_from(v: u8) -> Result<Self> {
        Label::from_u8(v)
    }
}

/// One recorded sample before grouping.
#[derive(Debug, Clone, PartialEq)]
pub struct RawSample {
    pub subject_id: String,
    pub features: Vec<f64>,
    pub label: Label,
}

/// All rows recorded from one subject.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SubjectSegment {
    pub subject_id: String,
    pub label: Label,
    pub rows: Vec<Vec<f64>>,
}

impl SubjectSegment {
    /// Builds a segment, checking that it is non-empty and rectangular.
    pub fn new(subject_id: impl Into<String>, label: Label, rows: Vec<Vec<f64>>) -> Result<Self> {
        let subject_id = subject_id.into();
        let Some(first) = rows.first() else {
            return Err(Error::EmptySegment(subject_id));
        };
        let n = first.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: bad.len(),
            });
        }
        Ok(Self {
            subject_id,
            label,
            rows,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_features(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }
}

/// Groups samples by subject id, preserving first-appearance order of subjects
/// and file order of rows within a subject.
pub fn group_samples(samples: Vec<RawSample>) -> Result<Vec<SubjectSegment>> {
    let mut index: BTreeMap<String, usize> = BTreeMap::new();
    let mut segments: Vec<SubjectSegment> = Vec::new();
    let mut width: Option<usize> = None;
    for s in samples {
        let n = *width.get_or_insert(s.features.len());
        if s.features.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: s.features.len(),
            });
        }
        match index.get(&s.subject_id) {
            Some(&i) => {
                let seg = &mut segments[i];
                if seg.label != s.label {
                    return Err(Error::InconsistentLabel(s.subject_id));
                }
                seg.rows.push(s.features);
            }
            None => {
                index.insert(s.subject_id.clone(), segments.len());
                segments.push(SubjectSegment {
                    subject_id: s.subject_id,
                    label: s.label,
                    rows: alloc::vec![s.features],
                });
            }
        }
    }
    Ok(segments)
}

/// A derived dataset (E_f, E_s or E_t): reconstructed rows grouped by subject,
/// in the same subject order as the source segments.
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TransformedDataset {
    pub segments: Vec<SubjectSegment>,
}

impl TransformedDataset {
    pub fn n_rows(&self) -> usize {
        self.segments.iter().map(SubjectSegment::n_rows).sum()
    }

    pub fn n_subjects(&self) -> usize {
        self.segments.len()
    }

    /// Iterates `(subject_id, label, row)` over every derived sample.
    pub fn samples(&self) -> impl Iterator<Item = (&str, Label, &[f64])> {
        self.segments.iter().flat_map(|s| {
            s.rows
                .iter()
                .map(move |r| (s.subject_id.as_str(), s.label, r.as_slice()))
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn raw(id: &str, label: Label, f: f64) -> RawSample {
        RawSample {
            subject_id: id.into(),
            features: vec![f, f + 1.0],
            label,
        }
    }

    #[test]
    fn grouping_keeps_file_order() {
        let segs = group_samples(vec![
            raw("b", Label::Healthy, 0.0),
            raw("a", Label::Parkinson, 1.0),
            raw("b", Label::Healthy, 2.0),
        ])
        .unwrap();
        assert_eq!(segs.len(), 2);
        assert_eq!(segs[0].subject_id, "b");
        assert_eq!(segs[0].rows, vec![vec![0.0, 1.0], vec![2.0, 3.0]]);
        assert_eq!(segs[1].n_rows(), 1);
    }

    #[test]
    fn grouping_rejects_mixed_labels() {
        let err = group_samples(vec![
            raw("a", Label::Parkinson, 0.0),
            raw("a", Label::Healthy, 1.0),
        ])
        .unwrap_err();
        assert_eq!(err, Error::InconsistentLabel("a".into()));
    }

    #[test]
    fn segment_must_be_rectangular() {
        assert!(SubjectSegment::new("x", Label::Healthy, vec![]).is_err());
        assert!(SubjectSegment::new("x", Label::Healthy, vec![vec![1.0], vec![1.0, 2.0]]).is_err());
    }

    #[test]
    fn label_rules() {
        assert_eq!(Label::from_u8(2), Err(Error::InvalidLabel(2)));
        assert_eq!(Label::from_score(0.0), Label::Healthy);
        assert_eq!(Label::from_score(1e-300), Label::Parkinson);
    }
}
