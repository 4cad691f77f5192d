use serde::{Deserialize, Serialize};

use super::linalg::{dot, Matrix};
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SvmOptions {
    /// Misclassification cost.
    pub c: f64,
    /// Full-batch subgradient iterations per class.
    pub budget: usize,
}

impl Default for SvmOptions {
    fn default() -> Self {
        Self { c: 0.1, budget: 2000 }
    }
}

/// One-vs-rest linear SVM on standardized features.
#[derive(Debug, Clone, Serialize)]
pub struct LinearSvmModel<T> {
    pub classes: Vec<usize>,
    pub weights: Vec<Vec<T>>,
    pub biases: Vec<T>,
    pub mean: Vec<T>,
    pub scale: Vec<T>,
    pub c: f64,
    pub budget: usize,
}

impl<T: Real> LinearSvmModel<T> {
    fn standardize(&self, row: &[T]) -> Vec<T> {
        row.iter().zip(&self.mean).zip(&self.scale).map(|((&v, &m), &s)| (v - m) / s).collect()
    }

    pub fn scores(&self, row: &[T]) -> Vec<T> {
        let z = self.standardize(row);
        self.weights.iter().zip(&self.biases).map(|(w, &b)| dot(w, &z) + b).collect()
    }

    pub fn predict_one(&self, row: &[T]) -> usize {
        let s = self.scores(row);
        let mut best = 0;
        for k in 1..s.len() {
            if s[k] > s[best] {
                best = k;
            }
        }
        self.classes[best]
    }

    pub fn predict(&self, x: &Matrix<T>) -> Result<Vec<usize>> {
        if x.cols() != self.mean.len() {
            return Err(Error::invalid(format!("model expects {} features, got {}", self.mean.len(), x.cols())));
        }
        Ok((0..x.rows()).map(|i| self.predict_one(x.row(i))).collect())
    }
}

pub fn train_linear_svm<T: Real>(x: &Matrix<T>, labels: &[usize], options: SvmOptions) -> Result<LinearSvmModel<T>> {
    let (n, d) = (x.rows(), x.cols());
    if labels.len() != n {
        return Err(Error::invalid("label count differs from row count"));
    }
    if !(options.c > 0.0) || options.budget == 0 {
        return Err(Error::invalid("SVM needs a positive cost and iteration budget"));
    }
    let mut classes: Vec<usize> = labels.to_vec();
    classes.sort_unstable();
    classes.dedup();
    if classes.len() < 2 {
        return Err(Error::invalid("SVM training needs at least two classes"));
    }
    if (0..n).any(|i| x.row(i).iter().any(|v| !v.is_finite())) {
        return Err(Error::invalid("SVM input has non-finite values"));
    }
    let nf = T::from_usize_lossy(n);
    let mean: Vec<T> = (0..d).map(|j| (0..n).map(|i| x[(i, j)]).sum::<T>() / nf).collect();
    let scale: Vec<T> = (0..d)
        .map(|j| {
            let sd = ((0..n).map(|i| (x[(i, j)] - mean[j]).powi(2)).sum::<T>() / nf).sqrt();
            if sd > T::zero() { sd } else { T::one() }
        })
        .collect();
    let z: Vec<Vec<T>> = (0..n).map(|i| x.row(i).iter().zip(&mean).zip(&scale).map(|((&v, &m), &s)| (v - m) / s).collect()).collect();

    let mut weights = Vec::with_capacity(classes.len());
    let mut biases = Vec::with_capacity(classes.len());
    for &cls in &classes {
        let y: Vec<T> = labels.iter().map(|&l| if l == cls { T::one() } else { -T::one() }).collect();
        let (w, b) = subgradient(&z, &y, T::lit(options.c), options.budget);
        weights.push(w);
        biases.push(b);
    }
    Ok(LinearSvmModel { classes, weights, biases, mean, scale, c: options.c, budget: options.budget })
}

/// Minimizes `½|w|² + C Σ max(0, 1 - y(w·z + b))` with the step schedule
/// `1/(λt)`, `λ = 1/(Cn)`, projection onto a ball holding the optimum and
/// averaging over the second half of the run.
fn subgradient<T: Real>(z: &[Vec<T>], y: &[T], c: T, budget: usize) -> (Vec<T>, T) {
    let n = z.len();
    let d = z.first().map_or(0, Vec::len);
    let nf = T::from_usize_lossy(n);
    let lambda = T::one() / (c * nf);
    let radius = (T::one() / lambda).sqrt();
    let max_norm = z.iter().map(|r| dot(r, r).sqrt()).fold(T::zero(), T::max);
    let b_bound = T::one() + radius * max_norm;
    let mut w = vec![T::zero(); d];
    let mut b = T::zero();
    let mut w_avg = vec![T::zero(); d];
    let mut b_avg = T::zero();
    let start_avg = budget / 2 + 1;
    let mut g = vec![T::zero(); d];
    for t in 1..=budget {
        g.iter_mut().for_each(|v| *v = T::zero());
        let mut gb = T::zero();
        for (zi, &yi) in z.iter().zip(y) {
            if yi * (dot(&w, zi) + b) < T::one() {
                for (gj, &v) in g.iter_mut().zip(zi) {
                    *gj -= yi * v;
                }
                gb -= yi;
            }
        }
        let eta = T::one() / (lambda * T::from_usize_lossy(t));
        for (wj, gj) in w.iter_mut().zip(&g) {
            *wj -= eta * (lambda * *wj + *gj / nf);
        }
        b -= eta * gb / nf;
        let norm = dot(&w, &w).sqrt();
        if norm > radius {
            let s = radius / norm;
            w.iter_mut().for_each(|v| *v *= s);
        }
        b = b.max(-b_bound).min(b_bound);
        if t >= start_avg {
            let k = T::from_usize_lossy(t - start_avg + 1);
            for (a, &v) in w_avg.iter_mut().zip(&w) {
                *a += (v - *a) / k;
            }
            b_avg += (b - b_avg) / k;
        }
    }
    (w_avg, b_avg)
}
