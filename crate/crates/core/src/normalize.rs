//! Per-feature normalization fitted on training subjects only.

use alloc::vec::Vec;

use crate::segment::TransformedDataset;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum NormMethod {
    #[default]
    MinMax,
    ZScore,
}

/// Fitted offset/scale per feature. A scale of exactly `0.0` marks a feature
/// that was constant on the training data; it always maps to `0.0`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Normalizer {
    pub method: NormMethod,
    pub offset: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Normalizer {
    /// Fits on every derived row of `train`. Panics if `train` has no rows.
    pub fn fit(train: &TransformedDataset, method: NormMethod) -> Self {
        let rows: Vec<&[f64]> = train.samples().map(|(_, _, r)| r).collect();
        Self::fit_rows(&rows, method)
    }

    pub fn fit_rows(rows: &[&[f64]], method: NormMethod) -> Self {
        assert!(!rows.is_empty(), "normalizer needs at least one training row");
        let n = rows[0].len();
        let mut offset = Vec::with_capacity(n);
        let mut scale = Vec::with_capacity(n);
        for j in 0..n {
            let (o, s) = match method {
                NormMethod::MinMax => {
                    let (lo, hi) = rows.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
                        (lo.min(r[j]), hi.max(r[j]))
                    });
                    (lo, hi - lo)
                }
                NormMethod::ZScore => {
                    let count = rows.len() as f64;
                    let mean = rows.iter().map(|r| r[j]).sum::<f64>() / count;
                    let var = rows.iter().map(|r| (r[j] - mean) * (r[j] - mean)).sum::<f64>() / count;
                    (mean, libm::sqrt(var))
                }
            };
            offset.push(o);
            scale.push(if s > 0.0 && s.is_finite() { s } else { 0.0 });
        }
        Self {
            method,
            offset,
            scale,
        }
    }

    pub fn apply_row(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(self.offset.iter().zip(&self.scale))
            .map(|(&x, (&o, &s))| if s == 0.0 { 0.0 } else { (x - o) / s })
            .collect()
    }

    pub fn apply(&self, data: &TransformedDataset) -> TransformedDataset {
        let mut out = data.clone();
        for seg in &mut out.segments {
            for row in &mut seg.rows {
                *row = self.apply_row(row);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::segment::{Label, SubjectSegment};
    use alloc::vec;

    fn single_column(values: &[f64]) -> TransformedDataset {
        TransformedDataset {
            segments: vec![SubjectSegment::new(
                "s",
                Label::Healthy,
                values.iter().map(|&v| vec![v]).collect(),
            )
            .unwrap()],
        }
    }

    #[test]
    fn minmax_endpoints() {
        let d = single_column(&[2.0, 4.0]);
        let n = Normalizer::fit(&d, NormMethod::MinMax);
        let out = n.apply(&d);
        assert_eq!(out.segments[0].rows, vec![vec![0.0], vec![1.0]]);
    }

    #[test]
    fn constant_feature_maps_to_zero() {
        let d = single_column(&[5.0, 5.0, 5.0]);
        for m in [NormMethod::MinMax, NormMethod::ZScore] {
            let n = Normalizer::fit(&d, m);
            assert_eq!(n.scale, vec![0.0]);
            assert!(n.apply(&d).segments[0].rows.iter().all(|r| r[0] == 0.0));
        }
    }

    #[test]
    fn unseen_values_use_training_range() {
        let n = Normalizer::fit(&single_column(&[0.0, 10.0]), NormMethod::MinMax);
        assert_eq!(n.apply_row(&[20.0]), vec![(20.0 - 0.0) / (10.0 - 0.0)]);
    }

    #[test]
    fn zscore_moments() {
        let d = single_column(&[1.0, 2.0, 3.0, 4.0]);
        let n = Normalizer::fit(&d, NormMethod::ZScore);
        let vals: Vec<f64> = n.apply(&d).segments[0].rows.iter().map(|r| r[0]).collect();
        let mean = vals.iter().sum::<f64>() / 4.0;
        let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / 4.0;
        assert!(mean.abs() < 1e-12);
        assert!((var - 1.0).abs() < 1e-12);
    }
}
