//! Type A reconstruction: the subject envelope.
//!
//! A block of `G0` rows collapses into six rows, each computed feature by
//! feature over the sorted column: mean, median, 25% trimmed mean, standard
//! deviation, interquartile distance and mean absolute deviation.
//!
//! Every statistic is evaluated on the sorted column (sums included), so the
//! result does not depend on row order, bit for bit.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::segment::{SubjectSegment, TransformedDataset};

/// Number of envelope rows produced per block.
pub const ENVELOPE_ROWS: usize = 6;

/// Denominator used by the trimmed mean.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum TrimMode {
    /// Divide by the number of retained ranks (a true trimmed mean).
    #[default]
    Retained,
    /// Divide by `G0` even though only the inner ranks are summed.
    #[cfg_attr(feature = "serde", serde(rename = "paper"))]
    FullDenominator,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeStats {
    pub mean: Vec<f64>,
    pub median: Vec<f64>,
    pub trimmed_mean: Vec<f64>,
    pub std_dev: Vec<f64>,
    pub iqr: Vec<f64>,
    pub mad: Vec<f64>,
}

impl EnvelopeStats {
    /// The six rows in canonical order.
    pub fn into_rows(self) -> Vec<Vec<f64>> {
        alloc::vec![
            self.mean,
            self.median,
            self.trimmed_mean,
            self.std_dev,
            self.iqr,
            self.mad,
        ]
    }
}

/// Round half up. Inputs are non-negative.
pub fn round_index(x: f64) -> usize {
    libm::floor(x + 0.5) as usize
}

/// 1-based inclusive rank range summed by the trimmed mean.
pub fn trim_ranks(g0: usize) -> (usize, usize) {
    if g0 <= 2 {
        return (1, g0);
    }
    let k = round_index(0.25 * g0 as f64);
    (k.max(1), g0 - k)
}

/// 1-based ranks `(upper, lower)` whose difference is the interquartile distance.
pub fn quartile_ranks(g0: usize) -> (usize, usize) {
    let clamp = |r: usize| r.clamp(1, g0);
    (
        clamp(round_index(0.75 * g0 as f64)),
        clamp(round_index(0.25 * g0 as f64)),
    )
}

/// Computes the six envelope statistics of `rows` (a `G0 x N` block).
pub fn envelope_stats(rows: &[Vec<f64>], trim: TrimMode) -> Result<EnvelopeStats> {
    let g0 = rows.len();
    if g0 == 0 {
        return Err(Error::NoRows);
    }
    let n = rows[0].len();
    if let Some(bad) = rows.iter().find(|r| r.len() != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: bad.len(),
        });
    }

    let mut out = EnvelopeStats {
        mean: Vec::with_capacity(n),
        median: Vec::with_capacity(n),
        trimmed_mean: Vec::with_capacity(n),
        std_dev: Vec::with_capacity(n),
        iqr: Vec::with_capacity(n),
        mad: Vec::with_capacity(n),
    };
    let (lo, hi) = trim_ranks(g0);
    let (q3, q1) = quartile_ranks(g0);
    let denom = match trim {
        TrimMode::Retained => (hi - lo + 1) as f64,
        TrimMode::FullDenominator => g0 as f64,
    };
    let g = g0 as f64;

    let mut col = Vec::with_capacity(g0);
    for j in 0..n {
        col.clear();
        col.extend(rows.iter().map(|r| r[j]));
        col.sort_by(f64::total_cmp);
        // 1-based rank accessor
        let at = |r: usize| col[r - 1];

        let mean = col.iter().sum::<f64>() / g;
        let median = if g0 % 2 == 1 {
            at(g0.div_ceil(2))
        } else {
            (at(g0 / 2) + at(g0 / 2 + 1)) / 2.0
        };
        let trimmed = (lo..=hi).map(at).sum::<f64>() / denom;
        let std_dev = if g0 > 1 {
            libm::sqrt(col.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (g - 1.0))
        } else {
            0.0
        };
        let iqr = at(q3) - at(q1);
        let mad = col.iter().map(|x| libm::fabs(x - mean)).sum::<f64>() / g;

        out.mean.push(mean);
        out.median.push(median);
        out.trimmed_mean.push(trimmed);
        out.std_dev.push(std_dev);
        out.iqr.push(iqr);
        out.mad.push(mad);
    }
    Ok(out)
}

/// The six envelope rows of one segment, relabelled with the segment's subject.
pub fn envelope_segment(segment: &SubjectSegment, trim: TrimMode) -> Result<SubjectSegment> {
    if segment.rows.is_empty() {
        return Err(Error::EmptySegment(segment.subject_id.clone()));
    }
    Ok(SubjectSegment {
        subject_id: segment.subject_id.clone(),
        label: segment.label,
        rows: envelope_stats(&segment.rows, trim)?.into_rows(),
    })
}

/// Builds E_f: six envelope rows per subject.
pub fn transform_type_a(segments: &[SubjectSegment], trim: TrimMode) -> Result<TransformedDataset> {
    if segments.is_empty() {
        return Err(Error::TooFewSubjects(0));
    }
    Ok(TransformedDataset {
        segments: segments
            .iter()
            .map(|s| envelope_segment(s, trim))
            .collect::<Result<_>>()?,
    })
}
