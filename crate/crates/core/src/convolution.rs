//! Type C reconstruction: each cluster's rows convolved with the cluster's
//! own envelope.
//!
//! For a cluster `X` (`I x N`) and its envelope `T` (`M x N`), output row `m`
//! is `T[m] ⊙ colsum(X)`. Two routes compute it: the explicit index loop and
//! the block-diagonal matrix product `(x' U)^T`. They agree bit for bit.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::clustering::ClusteredSegment;
use crate::envelope::{envelope_stats, TrimMode, ENVELOPE_ROWS};
use crate::error::{Error, Result};
use crate::segment::{SubjectSegment, TransformedDataset};

/// A cluster `x` (`I x N`) paired with an envelope `t` (`M x N`).
#[derive(Debug, Clone, Copy)]
pub struct ConvolutionPair<'a> {
    pub x: &'a [Vec<f64>],
    pub t: &'a [Vec<f64>],
}

impl<'a> ConvolutionPair<'a> {
    pub fn new(x: &'a [Vec<f64>], t: &'a [Vec<f64>]) -> Result<Self> {
        if x.is_empty() || t.is_empty() {
            return Err(Error::EmptyOperand);
        }
        let n = x[0].len();
        for r in x.iter().chain(t) {
            if r.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: r.len(),
                });
            }
        }
        Ok(Self { x, t })
    }

    fn dims(&self) -> (usize, usize, usize) {
        (self.x.len(), self.t.len(), self.x[0].len())
    }
}

/// Explicit loop: `out[m][n] = sum_i t[m][n] * x[i][n]`.
pub fn convolve_loop(pair: &ConvolutionPair) -> Vec<Vec<f64>> {
    let (rows, m_rows, n) = pair.dims();
    let mut out = vec![vec![0.0; n]; m_rows];
    for m in 0..m_rows {
        for col in 0..n {
            let mut acc = 0.0;
            for i in 0..rows {
                acc += pair.t[m][col] * pair.x[i][col];
            }
            out[m][col] = acc;
        }
    }
    out
}

/// Stacks `copies` copies of `row`.
pub fn extend_matrix(row: &[f64], copies: usize) -> Vec<Vec<f64>> {
    vec![row.to_vec(); copies]
}

/// Matrix route. `x'` is the `1 x (I*N)` concatenation of the columns of `x`;
/// `u_m` is the `(I*N) x N` block diagonal whose `n`-th block is column `n` of
/// the extended envelope row; `U = [u_1 .. u_M]`.
pub fn convolve_matrix(pair: &ConvolutionPair) -> Vec<Vec<f64>> {
    let (rows, m_rows, n) = pair.dims();
    let len = rows * n;

    let x_prime: Vec<f64> = (0..n)
        .flat_map(|col| pair.x.iter().map(move |r| r[col]))
        .collect();

    // U is dense: (I*N) rows by (M*N) columns.
    let width = m_rows * n;
    let mut u = vec![0.0; len * width];
    for (m, t_row) in pair.t.iter().enumerate() {
        let extended = extend_matrix(t_row, rows);
        for col in 0..n {
            for (i, ext_row) in extended.iter().enumerate() {
                u[(col * rows + i) * width + m * n + col] = ext_row[col];
            }
        }
    }

    let mut product = vec![0.0; width];
    for (k, &xv) in x_prime.iter().enumerate() {
        let u_row = &u[k * width..(k + 1) * width];
        for (p, &uv) in product.iter_mut().zip(u_row) {
            *p += uv * xv;
        }
    }
    product.chunks(n).map(<[f64]>::to_vec).collect()
}

/// Builds E_t from the clustered dataset `y` and the matching E_s.
pub fn transform_type_c(y: &[ClusteredSegment], es: &TransformedDataset) -> Result<TransformedDataset> {
    if y.len() != es.segments.len() {
        return Err(Error::ClusterEnvelopeMismatch {
            subject: alloc::string::String::new(),
            detail: format!("{} clustered subjects vs {} envelope subjects", y.len(), es.segments.len()),
        });
    }
    let mut out = Vec::with_capacity(y.len());
    for (clustered, env) in y.iter().zip(&es.segments) {
        let mismatch = |detail| Error::ClusterEnvelopeMismatch {
            subject: clustered.subject_id.clone(),
            detail,
        };
        if clustered.subject_id != env.subject_id {
            return Err(mismatch(format!("envelope belongs to `{}`", env.subject_id)));
        }
        let q = clustered.clusters.len();
        if env.rows.len() != ENVELOPE_ROWS * q {
            return Err(mismatch(format!("{} envelope rows for {q} clusters", env.rows.len())));
        }
        let mut rows = Vec::with_capacity(ENVELOPE_ROWS * q);
        for (cluster, t) in clustered.clusters.iter().zip(env.rows.chunks(ENVELOPE_ROWS)) {
            let pair = ConvolutionPair::new(cluster, t)?;
            rows.extend(convolve_loop(&pair));
        }
        out.push(SubjectSegment {
            subject_id: clustered.subject_id.clone(),
            label: clustered.label,
            rows,
        });
    }
    Ok(TransformedDataset { segments: out })
}

/// Type C for a single clustered subject, computing the envelopes itself.
pub fn convolve_clusters(clustered: &ClusteredSegment, trim: TrimMode) -> Result<SubjectSegment> {
    let mut rows = Vec::with_capacity(ENVELOPE_ROWS * clustered.clusters.len());
    for cluster in &clustered.clusters {
        let t = envelope_stats(cluster, trim)?.into_rows();
        rows.extend(convolve_loop(&ConvolutionPair::new(cluster, &t)?));
    }
    Ok(SubjectSegment {
        subject_id: clustered.subject_id.clone(),
        label: clustered.label,
        rows,
    })
}
