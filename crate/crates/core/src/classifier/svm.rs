//! Polynomial-kernel SVM trained by sequential minimal optimization.
//!
//! The solver works on a precomputed kernel matrix and picks working pairs by
//! maximal violation for `i` and second-order gain for `j`, as in libsvm.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::segment::Label;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct SvmParams {
    /// Box penalty.
    pub c: f64,
    pub gamma: f64,
    pub degree: u32,
    pub coef0: f64,
    /// KKT violation tolerance.
    pub tolerance: f64,
    pub max_iter: usize,
}

impl Default for SvmParams {
    fn default() -> Self {
        Self {
            c: 10.0,
            gamma: 0.005,
            degree: 3,
            coef0: 1.0,
            tolerance: 1e-3,
            max_iter: 1_000_000,
        }
    }
}

impl SvmParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0) {
            return Err(Error::InvalidParameter("svm.c must be > 0"));
        }
        if !(self.gamma > 0.0) {
            return Err(Error::InvalidParameter("svm.gamma must be > 0"));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidParameter("svm.tolerance must be > 0"));
        }
        Ok(())
    }

    /// `(gamma * <a, b> + coef0) ^ degree`
    pub fn kernel(&self, a: &[f64], b: &[f64]) -> f64 {
        let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
        libm::pow(self.gamma * dot + self.coef0, f64::from(self.degree))
    }
}

/// Dense symmetric kernel matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Gram {
    n: usize,
    data: Vec<f64>,
}

impl Gram {
    pub fn new(rows: &[&[f64]], params: &SvmParams) -> Self {
        let n = rows.len();
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let k = params.kernel(rows[i], rows[j]);
                data[i * n + j] = k;
                data[j * n + i] = k;
            }
        }
        Self { n, data }
    }

    /// Restriction to the rows/columns in `idx`.
    pub fn subset(&self, idx: &[usize]) -> Self {
        let n = idx.len();
        let mut data = Vec::with_capacity(n * n);
        for &a in idx {
            let row = &self.data[a * self.n..(a + 1) * self.n];
            data.extend(idx.iter().map(|&b| row[b]));
        }
        Self { n, data }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }
}

/// Dual solution: multipliers, offset `rho` (decision = sum - rho) and bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoSolution {
    pub alpha: Vec<f64>,
    pub rho: f64,
    pub iterations: usize,
    pub converged: bool,
}

const TAU: f64 = 1e-12;

/// Solves `min ½ aᵀQa - eᵀa` s.t. `0 <= a <= c`, `yᵀa = 0`, with
/// `Q_ij = y_i y_j K_ij`. `y` holds ±1.
pub fn solve(gram: &Gram, y: &[f64], c: f64, eps: f64, max_iter: usize) -> SmoSolution {
    let n = gram.len();
    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    let diag: Vec<f64> = (0..n).map(|i| gram.row(i)[i]).collect();
    let up = |a: f64, yt: f64| (yt > 0.0 && a < c) || (yt < 0.0 && a > 0.0);
    let low = |a: f64, yt: f64| (yt > 0.0 && a > 0.0) || (yt < 0.0 && a < c);

    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        let mut gmax = f64::NEG_INFINITY;
        let mut i = usize::MAX;
        for t in 0..n {
            if up(alpha[t], y[t]) && -y[t] * grad[t] >= gmax {
                gmax = -y[t] * grad[t];
                i = t;
            }
        }
        if i == usize::MAX {
            converged = true;
            break;
        }
        let k_i = gram.row(i);
        let mut gmax2 = f64::NEG_INFINITY;
        let mut j = usize::MAX;
        let mut best = f64::INFINITY;
        for t in 0..n {
            if !low(alpha[t], y[t]) {
                continue;
            }
            let yg = y[t] * grad[t];
            if yg >= gmax2 {
                gmax2 = yg;
            }
            let b = gmax + yg;
            if b > 0.0 {
                let mut quad = diag[i] + diag[t] - 2.0 * k_i[t];
                if quad <= 0.0 {
                    quad = TAU;
                }
                let obj = -(b * b) / quad;
                if obj <= best {
                    best = obj;
                    j = t;
                }
            }
        }
        if gmax + gmax2 < eps || j == usize::MAX {
            converged = true;
            break;
        }
        iterations += 1;

        let (old_i, old_j) = (alpha[i], alpha[j]);
        let mut quad = diag[i] + diag[j] - 2.0 * k_i[j];
        if quad <= 0.0 {
            quad = TAU;
        }
        if y[i] != y[j] {
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }

        let d_i = (alpha[i] - old_i) * y[i];
        let d_j = (alpha[j] - old_j) * y[j];
        let k_j = gram.row(j);
        for t in 0..n {
            grad[t] += y[t] * (k_i[t] * d_i + k_j[t] * d_j);
        }
    }

    let rho = compute_rho(&alpha, &grad, y, c);
    SmoSolution {
        alpha,
        rho,
        iterations,
        converged,
    }
}

fn compute_rho(alpha: &[f64], grad: &[f64], y: &[f64], c: f64) -> f64 {
    let mut ub = f64::INFINITY;
    let mut lb = f64::NEG_INFINITY;
    let mut free = 0usize;
    let mut sum_free = 0.0;
    for t in 0..alpha.len() {
        let yg = y[t] * grad[t];
        if alpha[t] >= c {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            free += 1;
            sum_free += yg;
        }
    }
    if free > 0 {
        sum_free / free as f64
    } else {
        (ub + lb) / 2.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvmModel {
    pub params: SvmParams,
    pub n_features: usize,
    pub support: Vec<Vec<f64>>,
    /// `alpha_i * y_i` per support vector.
    pub coef: Vec<f64>,
    pub rho: f64,
}

impl SvmModel {
    pub fn decision(&self, x: &[f64]) -> f64 {
        self.support
            .iter()
            .zip(&self.coef)
            .map(|(sv, &c)| c * self.params.kernel(sv, x))
            .sum::<f64>()
            - self.rho
    }
}

pub(crate) fn check_classes(labels: &[Label]) -> Result<()> {
    if labels.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    let pos = labels.iter().filter(|&&l| l == Label::Parkinson).count();
    if pos == 0 || pos == labels.len() {
        return Err(Error::SingleClass);
    }
    Ok(())
}

pub fn train(params: &SvmParams, xs: &[&[f64]], labels: &[Label]) -> Result<SvmModel> {
    params.validate()?;
    check_classes(labels)?;
    let gram = Gram::new(xs, params);
    train_with_gram(params, xs, labels, &gram)
}

/// Trains on `xs` given their kernel matrix (already restricted to `xs`).
pub fn train_with_gram(params: &SvmParams, xs: &[&[f64]], labels: &[Label], gram: &Gram) -> Result<SvmModel> {
    params.validate()?;
    check_classes(labels)?;
    debug_assert_eq!(gram.len(), xs.len());
    let y: Vec<f64> = labels.iter().map(|l| l.sign()).collect();
    let sol = solve(gram, &y, params.c, params.tolerance, params.max_iter);
    let mut support = Vec::new();
    let mut coef = Vec::new();
    for (t, &a) in sol.alpha.iter().enumerate() {
        if a > 0.0 {
            support.push(xs[t].to_vec());
            coef.push(a * y[t]);
        }
    }
    Ok(SvmModel {
        params: *params,
        n_features: xs[0].len(),
        support,
        coef,
        rho: sol.rho,
    })
}
