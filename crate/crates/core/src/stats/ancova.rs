use serde::Serialize;

use super::linalg::Cholesky;
use super::ols::{fit_ols, DesignBuilder, DesignMatrix};
use super::special::f_sf;
use crate::error::{Error, Result};
use crate::scalar::{mean, Real};

pub const GROUP_COLUMN: &str = "group[high]";

#[derive(Debug, Clone)]
pub enum Covariate<T> {
    Continuous { name: String, values: Vec<T> },
    Categorical { name: String, levels: Vec<String> },
}

impl<T: Real> Covariate<T> {
    pub fn continuous(name: &str, values: Vec<T>) -> Self {
        Self::Continuous { name: name.to_string(), values }
    }

    pub fn categorical(name: &str, levels: Vec<String>) -> Self {
        Self::Categorical { name: name.to_string(), levels }
    }

    fn len(&self) -> usize {
        match self {
            Self::Continuous { values, .. } => values.len(),
            Self::Categorical { levels, .. } => levels.len(),
        }
    }

    fn add_to(&self, b: DesignBuilder<T>) -> DesignBuilder<T> {
        match self {
            Self::Continuous { name, values } => b.continuous(name, values),
            Self::Categorical { name, levels } => b.categorical(name, levels),
        }
    }
}

/// One row of the per-feature covariance analysis.
#[derive(Debug, Clone, Serialize)]
pub struct AncovaResult<T> {
    pub feature: String,
    pub n_low: usize,
    pub n_high: usize,
    pub raw_mean_low: T,
    pub raw_mean_high: T,
    pub adjusted_mean_low: T,
    pub adjusted_mean_high: T,
    pub f: T,
    pub df1: usize,
    pub df2: usize,
    pub p: T,
    pub partial_eta_sq: T,
}

fn group_counts(high: &[bool]) -> Result<(usize, usize)> {
    let n_high = high.iter().filter(|&&h| h).count();
    let n_low = high.len() - n_high;
    if n_low < 2 || n_high < 2 {
        return Err(Error::degenerate(format!("each group needs at least 2 cases (low {n_low}, high {n_high})")));
    }
    Ok((n_low, n_high))
}

fn design<T: Real>(high: &[bool], covariates: &[Covariate<T>]) -> Result<DesignMatrix<T>> {
    for c in covariates {
        if c.len() != high.len() {
            return Err(Error::invalid("covariate length differs from case count"));
        }
    }
    let mut b = DesignMatrix::builder(high.len()).intercept().indicator(GROUP_COLUMN, high);
    for c in covariates {
        b = c.add_to(b);
    }
    b.build()
}

/// Group effect on `y` adjusted for `covariates`, by comparing the full model
/// against the model without the group indicator.
pub fn ancova_feature<T: Real>(feature: &str, y: &[T], high: &[bool], covariates: &[Covariate<T>]) -> Result<AncovaResult<T>> {
    if y.len() != high.len() {
        return Err(Error::invalid("feature and group lengths differ"));
    }
    let (n_low, n_high) = group_counts(high)?;
    let m = mean(y).ok_or_else(|| Error::invalid("empty feature"))?;
    if y.iter().all(|&v| v == m) || y.iter().all(|&v| v == y[0]) {
        return Err(Error::degenerate(format!("feature '{feature}' is constant")));
    }
    let full = design(high, covariates)?;
    let reduced = full.without(&[GROUP_COLUMN])?;
    let fit_f = fit_ols(&full, y)?;
    let fit_r = fit_ols(&reduced, y)?;
    if !(fit_f.rss > T::zero()) {
        return Err(Error::degenerate(format!("feature '{feature}' is fitted exactly; no error variance")));
    }
    let ss_group = (fit_r.rss - fit_f.rss).max(T::zero());
    let df2 = fit_f.df_resid;
    let f = ss_group / (fit_f.rss / T::from_usize_lossy(df2));
    let p = f_sf(f, T::one(), T::from_usize_lossy(df2))?.max(T::min_positive_value());
    let partial_eta_sq = ss_group / (ss_group + fit_f.rss);

    // adjusted means at the column means of everything but the group term
    let x = full.matrix();
    let g = full.column_index(GROUP_COLUMN).expect("group column");
    let mut base = T::zero();
    for j in 0..full.cols() {
        if j == g {
            continue;
        }
        let col_mean = mean(&x.column(j)).expect("non-empty");
        base += fit_f.coefficients[j] * col_mean;
    }
    let group_mean = |want: bool| mean(&y.iter().zip(high).filter(|(_, &h)| h == want).map(|(&v, _)| v).collect::<Vec<_>>()).expect("group size checked");
    Ok(AncovaResult {
        feature: feature.to_string(),
        n_low,
        n_high,
        raw_mean_low: group_mean(false),
        raw_mean_high: group_mean(true),
        adjusted_mean_low: base,
        adjusted_mean_high: base + fit_f.coefficients[g],
        f,
        df1: 1,
        df2,
        p,
        partial_eta_sq,
    })
}

/// Omnibus Wilks-lambda test of the group effect across several features.
#[derive(Debug, Clone, Serialize)]
pub struct MancovaResult<T> {
    pub features: Vec<String>,
    pub wilks_lambda: T,
    pub f: T,
    pub df1: usize,
    pub df2: usize,
    pub p: T,
}

pub fn mancova<T: Real>(features: &[(String, Vec<T>)], high: &[bool], covariates: &[Covariate<T>]) -> Result<MancovaResult<T>> {
    group_counts(high)?;
    let m = features.len();
    if m == 0 {
        return Err(Error::invalid("no features for the omnibus test"));
    }
    let full = design(high, covariates)?;
    let reduced = full.without(&[GROUP_COLUMN])?;
    let mut res_f = Vec::with_capacity(m);
    let mut res_r = Vec::with_capacity(m);
    for (_, y) in features {
        if y.len() != high.len() {
            return Err(Error::invalid("feature and group lengths differ"));
        }
        res_f.push(fit_ols(&full, y)?.residuals);
        res_r.push(fit_ols(&reduced, y)?.residuals);
    }
    let df_e = full.rows() - full.cols();
    if df_e < m {
        return Err(Error::degenerate(format!("{m} features need at least {m} error degrees of freedom, have {df_e}")));
    }
    let sscp = |r: &[Vec<T>]| super::linalg::Matrix::from_columns(r).map(|x| x.gram());
    let e = sscp(&res_f)?;
    let t = sscp(&res_r)?;
    let (ce, ct) = match (Cholesky::new(&e), Cholesky::new(&t)) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(Error::degenerate("error SSCP matrix is singular")),
    };
    let wilks_lambda = (ce.ln_det() - ct.ln_det()).exp().min(T::one());
    // exact for a single-df hypothesis
    let df2 = df_e - m + 1;
    let f = (T::one() - wilks_lambda) / wilks_lambda * T::from_usize_lossy(df2) / T::from_usize_lossy(m);
    let p = f_sf(f, T::from_usize_lossy(m), T::from_usize_lossy(df2))?.max(T::min_positive_value());
    Ok(MancovaResult { features: features.iter().map(|(n, _)| n.clone()).collect(), wilks_lambda, f, df1: m, df2, p })
}

/// Benjamini-Hochberg adjusted p-values (same order as the input).
pub fn benjamini_hochberg<T: Real>(p: &[T]) -> Vec<T> {
    let n = p.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| p[a].partial_cmp(&p[b]).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(&b)));
    let mut out = vec![T::zero(); n];
    let mut running = T::one();
    for rank in (0..n).rev() {
        let i = order[rank];
        let q = p[i] * T::from_usize_lossy(n) / T::from_usize_lossy(rank + 1);
        running = running.min(q);
        out[i] = running;
    }
    out
}
