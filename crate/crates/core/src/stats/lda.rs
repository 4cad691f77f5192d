use serde::{Deserialize, Serialize};

use super::linalg::{dot, Cholesky, Matrix};
use super::special::chi2_sf;
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Priors {
    #[default]
    Equal,
    Proportional,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default)]
pub struct LdaOptions {
    pub priors: Priors,
    /// Add a small ridge when the pooled covariance is singular.
    pub ridge: bool,
}

impl Default for LdaOptions {
    fn default() -> Self {
        Self { priors: Priors::Equal, ridge: true }
    }
}

/// Two-group Fisher discriminant. Group `true` is the high-risk group and
/// always receives the positive centroid.
#[derive(Debug, Clone, Serialize)]
pub struct DiscriminantResult<T> {
    pub variables: Vec<String>,
    pub n_low: usize,
    pub n_high: usize,
    /// Unstandardized canonical coefficients; scores have unit pooled
    /// within-group variance.
    pub canonical_weights: Vec<T>,
    pub canonical_constant: T,
    pub standardized_weights: Vec<T>,
    pub structure: Vec<T>,
    pub eigenvalue: T,
    pub canonical_correlation: T,
    pub wilks_lambda: T,
    pub chi_square: T,
    pub df: usize,
    pub p_value: T,
    pub centroid_low: T,
    pub centroid_high: T,
    pub priors: Priors,
    /// Ridge added to the pooled covariance diagonal, if any.
    pub ridge: Option<T>,
    pub resubstitution_accuracy: T,
    pub loo_accuracy: T,
    pub resubstitution_predictions: Vec<bool>,
    pub loo_predictions: Vec<bool>,
}

struct GroupStats<T> {
    n: [usize; 2],
    means: [Vec<T>; 2],
    /// Pooled within-group SSCP.
    w: Matrix<T>,
}

fn group_stats<T: Real>(x: &Matrix<T>, high: &[bool]) -> GroupStats<T> {
    let p = x.cols();
    let mut n = [0usize; 2];
    let mut sums = [vec![T::zero(); p], vec![T::zero(); p]];
    for i in 0..x.rows() {
        let g = high[i] as usize;
        n[g] += 1;
        for (s, &v) in sums[g].iter_mut().zip(x.row(i)) {
            *s += v;
        }
    }
    let means = [0, 1].map(|g| sums[g].iter().map(|&s| s / T::from_usize_lossy(n[g].max(1))).collect::<Vec<T>>());
    let mut centered = Matrix::zeros(x.rows(), p);
    for i in 0..x.rows() {
        let m = &means[high[i] as usize];
        for j in 0..p {
            centered[(i, j)] = x[(i, j)] - m[j];
        }
    }
    GroupStats { n, means, w: centered.gram() }
}

fn ridge_for<T: Real>(s: &Matrix<T>) -> T {
    T::lit(1e-8) * s.trace() / T::from_usize_lossy(s.rows())
}

/// Pooled covariance factor, with the ridge actually applied.
fn pooled<T: Real>(w: &Matrix<T>, df: usize, ridge: bool) -> Result<(Matrix<T>, Cholesky<T>, Option<T>)> {
    let mut s = w.clone();
    let scale = T::one() / T::from_usize_lossy(df);
    for i in 0..s.rows() {
        for j in 0..s.cols() {
            s[(i, j)] *= scale;
        }
    }
    if let Some(c) = Cholesky::new(&s) {
        return Ok((s, c, None));
    }
    if !ridge {
        return Err(Error::degenerate("pooled within-group covariance is singular (ridge disabled)"));
    }
    let eps = ridge_for(&s);
    s.add_diagonal(eps);
    match Cholesky::new(&s) {
        Some(c) => Ok((s, c, Some(eps))),
        None => Err(Error::degenerate("pooled within-group covariance is singular even with ridge")),
    }
}

fn log_prior_ratio<T: Real>(priors: Priors, n_low: usize, n_high: usize) -> T {
    match priors {
        Priors::Equal => T::zero(),
        Priors::Proportional => (T::from_usize_lossy(n_high) / T::from_usize_lossy(n_low)).ln(),
    }
}

/// Discriminant score `a·(x - midpoint) + ln(π_high/π_low)`; positive means high.
fn rule<T: Real>(a: &[T], m0: &[T], m1: &[T], log_prior: T, x: &[T]) -> bool {
    let s: T = (0..a.len()).map(|j| a[j] * (x[j] - (m0[j] + m1[j]) * T::lit(0.5))).sum();
    s + log_prior > T::zero()
}

fn check_inputs<T: Real>(x: &Matrix<T>, high: &[bool], names: &[String]) -> Result<()> {
    if high.len() != x.rows() || names.len() != x.cols() {
        return Err(Error::invalid("discriminant inputs disagree in size"));
    }
    if x.cols() == 0 {
        return Err(Error::invalid("no discriminating variables"));
    }
    let n_high = high.iter().filter(|&&h| h).count();
    let n_low = high.len() - n_high;
    if n_low < 2 || n_high < 2 {
        return Err(Error::degenerate(format!("each group needs at least 2 cases (low {n_low}, high {n_high})")));
    }
    if x.rows() < x.cols() + 3 {
        return Err(Error::degenerate(format!("{} cases are too few for {} variables", x.rows(), x.cols())));
    }
    for i in 0..x.rows() {
        if x.row(i).iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("case {i} has a non-finite value")));
        }
    }
    Ok(())
}

pub fn fit_lda<T: Real>(x: &Matrix<T>, high: &[bool], names: &[String], options: LdaOptions) -> Result<DiscriminantResult<T>> {
    check_inputs(x, high, names)?;
    let (n, p) = (x.rows(), x.cols());
    let gs = group_stats(x, high);
    let [n_low, n_high] = gs.n;
    let (s, chol, ridge) = pooled(&gs.w, n - 2, options.ridge)?;
    let d: Vec<T> = (0..p).map(|j| gs.means[1][j] - gs.means[0][j]).collect();
    let a = chol.solve(&d);
    let d2 = dot(&d, &a);
    if !(d2 > T::zero()) {
        return Err(Error::degenerate("group means coincide; no discriminant direction"));
    }
    let dist = d2.sqrt();
    let canonical_weights: Vec<T> = a.iter().map(|&v| v / dist).collect();
    let grand: Vec<T> = (0..p)
        .map(|j| (gs.means[0][j] * T::from_usize_lossy(n_low) + gs.means[1][j] * T::from_usize_lossy(n_high)) / T::from_usize_lossy(n))
        .collect();
    let canonical_constant = -dot(&canonical_weights, &grand);
    let standardized_weights = (0..p).map(|j| canonical_weights[j] * s[(j, j)].sqrt()).collect();
    let sc = s.matvec(&canonical_weights);
    let var_score = dot(&canonical_weights, &sc);
    let structure = (0..p).map(|j| sc[j] / (s[(j, j)] * var_score).sqrt()).collect();

    let nf = T::from_usize_lossy(n);
    let eigenvalue = T::from_usize_lossy(n_low) * T::from_usize_lossy(n_high) / (nf * T::from_usize_lossy(n - 2)) * d2;
    let wilks_lambda = T::one() / (T::one() + eigenvalue);
    let chi_square = -(nf - T::one() - T::from_usize_lossy(p + 2) * T::lit(0.5)) * wilks_lambda.ln();
    let p_value = T::lit(chi2_sf(chi_square.to_f64_lossy(), p as f64)?).max(T::min_positive_value());

    let log_prior = log_prior_ratio::<T>(options.priors, n_low, n_high);
    let resubstitution_predictions: Vec<bool> = (0..n).map(|i| rule(&a, &gs.means[0], &gs.means[1], log_prior, x.row(i))).collect();
    let loo_predictions = match ridge {
        None => loo_sherman_morrison(x, high, &gs, options.priors)?,
        Some(_) => loo_refit(x, high, options)?,
    };
    let centroid_low = dot(&canonical_weights, &gs.means[0]) + canonical_constant;
    let centroid_high = dot(&canonical_weights, &gs.means[1]) + canonical_constant;
    let accuracy = |pred: &[bool]| T::from_usize_lossy(pred.iter().zip(high).filter(|(a, b)| a == b).count()) / nf;

    Ok(DiscriminantResult {
        variables: names.to_vec(),
        n_low,
        n_high,
        canonical_weights,
        canonical_constant,
        standardized_weights,
        structure,
        eigenvalue,
        canonical_correlation: (eigenvalue / (T::one() + eigenvalue)).sqrt(),
        wilks_lambda,
        chi_square,
        df: p,
        p_value,
        centroid_low,
        centroid_high,
        priors: options.priors,
        ridge,
        resubstitution_accuracy: accuracy(&resubstitution_predictions),
        loo_accuracy: accuracy(&loo_predictions),
        resubstitution_predictions,
        loo_predictions,
    })
}

/// Leave-one-out predictions through rank-one downdates of the pooled SSCP.
fn loo_sherman_morrison<T: Real>(x: &Matrix<T>, high: &[bool], gs: &GroupStats<T>, priors: Priors) -> Result<Vec<bool>> {
    let (n, p) = (x.rows(), x.cols());
    let w_chol = Cholesky::new(&gs.w).ok_or_else(|| Error::degenerate("pooled within-group SSCP is singular"))?;
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let g = high[i] as usize;
        let ng = gs.n[g];
        let xi = x.row(i);
        let u: Vec<T> = (0..p).map(|j| xi[j] - gs.means[g][j]).collect();
        let c = T::from_usize_lossy(ng) / T::from_usize_lossy(ng - 1);
        let v = w_chol.solve(&u);
        let denom = T::one() - c * dot(&u, &v);
        if !(denom > T::lit(1e-12)) {
            return Err(Error::degenerate(format!("removing case {i} makes the pooled covariance singular")));
        }
        let mut means = gs.means.clone();
        for j in 0..p {
            means[g][j] = (gs.means[g][j] * T::from_usize_lossy(ng) - xi[j]) / T::from_usize_lossy(ng - 1);
        }
        let d: Vec<T> = (0..p).map(|j| means[1][j] - means[0][j]).collect();
        // W'^-1 d = W^-1 d + c v (vᵀd) / denom, then S'^-1 = (n - 3) W'^-1
        let wd = w_chol.solve(&d);
        let k = c * dot(&v, &d) / denom;
        let scale = T::from_usize_lossy(n - 3);
        let a: Vec<T> = (0..p).map(|j| (wd[j] + k * v[j]) * scale).collect();
        let mut counts = gs.n;
        counts[g] -= 1;
        let lp = log_prior_ratio::<T>(priors, counts[0], counts[1]);
        out.push(rule(&a, &means[0], &means[1], lp, xi));
    }
    Ok(out)
}

/// Leave-one-out by refitting; used when a ridge is in play.
fn loo_refit<T: Real>(x: &Matrix<T>, high: &[bool], options: LdaOptions) -> Result<Vec<bool>> {
    let n = x.rows();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let keep: Vec<usize> = (0..n).filter(|&k| k != i).collect();
        let xs = x.select_rows(&keep);
        let hs: Vec<bool> = keep.iter().map(|&k| high[k]).collect();
        let gs = group_stats(&xs, &hs);
        let (_, chol, _) = pooled(&gs.w, n - 3, options.ridge)?;
        let d: Vec<T> = (0..x.cols()).map(|j| gs.means[1][j] - gs.means[0][j]).collect();
        let a = chol.solve(&d);
        let lp = log_prior_ratio::<T>(options.priors, gs.n[0], gs.n[1]);
        out.push(rule(&a, &gs.means[0], &gs.means[1], lp, x.row(i)));
    }
    Ok(out)
}

/// Wilks' lambda `det(W) / det(T)` for a variable subset (empty subset → 1).
pub(crate) fn subset_lambda<T: Real>(w: &Matrix<T>, t: &Matrix<T>, subset: &[usize]) -> Option<T> {
    if subset.is_empty() {
        return Some(T::one());
    }
    let cw = Cholesky::new(&w.submatrix(subset))?;
    let ct = Cholesky::new(&t.submatrix(subset))?;
    Some((cw.ln_det() - ct.ln_det()).exp())
}

/// Pooled within-group and total SSCP matrices.
pub(crate) fn sscp<T: Real>(x: &Matrix<T>, high: &[bool]) -> (Matrix<T>, Matrix<T>) {
    let gs = group_stats(x, high);
    let all = vec![false; x.rows()];
    let total = group_stats(x, &all);
    (gs.w, total.w)
}
