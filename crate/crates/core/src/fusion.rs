//! Weighted decision fusion over the three reconstruction channels.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::segment::Label;

/// Convex weights `(α1, α2, α3)` for the E_f, E_s and E_t channels.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(try_from = "[f64; 3]", into = "[f64; 3]"))]
pub struct FusionWeights([f64; 3]);

impl FusionWeights {
    pub const SUM_TOLERANCE: f64 = 1e-12;

    pub fn new(a1: f64, a2: f64, a3: f64) -> Result<Self> {
        let ok = [a1, a2, a3].iter().all(|a| (0.0..=1.0).contains(a))
            && libm::fabs(a1 + a2 + a3 - 1.0) <= Self::SUM_TOLERANCE;
        if ok {
            Ok(Self([a1, a2, a3]))
        } else {
            Err(Error::InvalidWeights(a1, a2, a3))
        }
    }

    pub fn uniform() -> Self {
        Self([1.0 / 3.0; 3])
    }

    /// All mass on one channel.
    pub fn single(channel: usize) -> Self {
        let mut w = [0.0; 3];
        w[channel] = 1.0;
        Self(w)
    }

    pub fn as_array(&self) -> [f64; 3] {
        self.0
    }

    pub fn sum(&self) -> f64 {
        self.0[0] + self.0[1] + self.0[2]
    }
}

impl TryFrom<[f64; 3]> for FusionWeights {
    type Error = Error;
    fn try_from(w: [f64; 3]) -> Result<Self> {
        Self::new(w[0], w[1], w[2])
    }
}

impl From<FusionWeights> for [f64; 3] {
    fn from(w: FusionWeights) -> Self {
        w.0
    }
}

/// `Σ αᵢ Hᵢ`.
pub fn fuse(scores: [f64; 3], w: &FusionWeights) -> f64 {
    w.0[0] * scores[0] + w.0[1] * scores[1] + w.0[2] * scores[2]
}

/// Subject verdict from its per-sample scores: the mean score, PD iff > 0.
pub fn subject_decision(scores: &[f64]) -> Result<(Label, f64)> {
    if scores.is_empty() {
        return Err(Error::NoRows);
    }
    let mean = scores.iter().sum::<f64>() / scores.len() as f64;
    Ok((Label::from_score(mean), mean))
}

/// Channel scores and truth for one tuning subject.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TuningSubject {
    pub scores: [f64; 3],
    pub label: Label,
}

fn lattice_size(step: f64) -> Result<usize> {
    if !(step > 0.0 && step <= 1.0) {
        return Err(Error::InvalidGridStep(step));
    }
    let k = libm::round(1.0 / step);
    if libm::fabs(k * step - 1.0) > 1e-9 {
        return Err(Error::InvalidGridStep(step));
    }
    Ok(k as usize)
}

/// Simplex lattice points `(i, j, k)` with `i + j + k = 1/step`, ascending.
pub fn lattice(step: f64) -> Result<Vec<[usize; 3]>> {
    let k = lattice_size(step)?;
    let mut out = Vec::with_capacity((k + 1) * (k + 2) / 2);
    for i in 0..=k {
        for j in 0..=k - i {
            out.push([i, j, k - i - j]);
        }
    }
    Ok(out)
}

/// Picks the lattice weights with the highest subject accuracy on `tuning`.
///
/// Ties go to the point nearest `(⅓, ⅓, ⅓)`, then to the lexicographically
/// smallest. When every lattice point ties (or `tuning` is empty) the result
/// is exactly `(⅓, ⅓, ⅓)`.
pub fn grid_search_weights(tuning: &[TuningSubject], step: f64) -> Result<FusionWeights> {
    let points = lattice(step)?;
    if tuning.is_empty() {
        return Ok(FusionWeights::uniform());
    }
    let k = points[0][2];
    let denom = k as f64;
    let weights = |p: &[usize; 3]| FusionWeights([p[0] as f64 / denom, p[1] as f64 / denom, p[2] as f64 / denom]);
    // squared distance to the centroid, scaled by 9 to stay integral
    let spread = |p: &[usize; 3]| p.iter().map(|&v| (3 * v).abs_diff(k).pow(2)).sum::<usize>();

    let mut best: Option<([usize; 3], usize)> = None;
    let mut all_tie = true;
    for p in &points {
        let w = weights(p);
        let correct = tuning
            .iter()
            .filter(|t| Label::from_score(fuse(t.scores, &w)) == t.label)
            .count();
        match best {
            None => best = Some((*p, correct)),
            Some((bp, bc)) => {
                if correct != bc {
                    all_tie = false;
                }
                if correct > bc || (correct == bc && spread(p) < spread(&bp)) {
                    best = Some((*p, correct));
                }
            }
        }
    }
    if all_tie {
        return Ok(FusionWeights::uniform());
    }
    Ok(weights(&best.expect("lattice is non-empty").0))
}
