//! Leave-one-subject-out fold construction.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::segment::SubjectSegment;

/// One LOSO fold, expressed as indices into the segment list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fold {
    pub held_out: usize,
    pub train: Vec<usize>,
}

/// Returns one fold per subject; fold `i` holds out subject `i`.
pub fn split_loso(segments: &[SubjectSegment]) -> Result<Vec<Fold>> {
    loso_indices(segments.len())
}

pub fn loso_indices(n_subjects: usize) -> Result<Vec<Fold>> {
    if n_subjects < 2 {
        return Err(Error::TooFewSubjects(n_subjects));
    }
    Ok((0..n_subjects)
        .map(|held_out| Fold {
            held_out,
            train: (0..n_subjects).filter(|&j| j != held_out).collect(),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forty_subjects_forty_folds() {
        let folds = loso_indices(40).unwrap();
        assert_eq!(folds.len(), 40);
        assert!(folds.iter().all(|f| f.train.len() == 39));
    }

    #[test]
    fn partition_property() {
        let folds = loso_indices(7).unwrap();
        let mut tested = [0usize; 7];
        for f in &folds {
            tested[f.held_out] += 1;
            assert!(!f.train.contains(&f.held_out));
            let mut all: Vec<usize> = f.train.clone();
            all.push(f.held_out);
            all.sort_unstable();
            assert_eq!(all, (0..7).collect::<Vec<_>>());
        }
        assert!(tested.iter().all(|&c| c == 1));
    }

    #[test]
    fn needs_two_subjects() {
        assert_eq!(loso_indices(1), Err(Error::TooFewSubjects(1)));
        assert_eq!(loso_indices(2).unwrap().len(), 2);
    }
}
