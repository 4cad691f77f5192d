use serde::{Deserialize, Serialize};

use super::lda::{sscp, subset_lambda};
use super::linalg::Matrix;
use super::special::f_sf;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Variables whose within-group variance is almost entirely explained by
/// those already entered are not eligible.
const MIN_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StepwiseOptions {
    pub p_enter: f64,
    pub p_remove: f64,
    pub max_steps: Option<usize>,
}

impl Default for StepwiseOptions {
    fn default() -> Self {
        Self { p_enter: 0.05, p_remove: 0.10, max_steps: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StepAction {
    Enter,
    Remove,
}

#[derive(Debug, Clone, Serialize)]
pub struct StepEvent<T> {
    pub step: usize,
    pub action: StepAction,
    pub variable: String,
    pub f: T,
    pub df1: usize,
    pub df2: usize,
    pub p: T,
    /// Wilks' lambda of the set after this step.
    pub wilks_lambda: T,
}

#[derive(Debug, Clone, Serialize)]
pub struct RetainedVariable<T> {
    pub variable: String,
    pub f_to_remove: T,
    pub sig_f_to_remove: T,
    /// Wilks' lambda of the final set without this variable.
    pub wilks_lambda_without: T,
}

#[derive(Debug, Clone, Serialize)]
pub struct StepwiseTrace<T> {
    pub n_cases: usize,
    pub options: StepwiseOptions,
    pub events: Vec<StepEvent<T>>,
    pub final_set: Vec<String>,
    pub retained: Vec<RetainedVariable<T>>,
    pub wilks_lambda: T,
}

struct Ctx<'a, T> {
    w: &'a Matrix<T>,
    t: &'a Matrix<T>,
    n: usize,
}

impl<T: Real> Ctx<'_, T> {
    fn lambda(&self, set: &[usize]) -> Option<T> {
        subset_lambda(self.w, self.t, set)
    }

    /// F-to-enter for `j` given `set`, with its df and p.
    fn f_enter(&self, set: &[usize], j: usize) -> Option<(T, usize, usize, T)> {
        let q = set.len();
        if self.n < q + 3 {
            return None;
        }
        let l0 = self.lambda(set)?;
        let mut with = set.to_vec();
        with.push(j);
        let l1 = self.lambda(&with)?;
        let df2 = self.n - 2 - q;
        let f = T::from_usize_lossy(df2) * (l0 - l1) / l1;
        let p = f_sf(f.max(T::zero()), T::one(), T::from_usize_lossy(df2)).ok()?;
        Some((f, 1, df2, p))
    }

    /// F-to-remove for member `j` of `set`.
    fn f_remove(&self, set: &[usize], j: usize) -> Option<(T, usize, usize, T, T)> {
        let q = set.len();
        let l = self.lambda(set)?;
        let without: Vec<usize> = set.iter().copied().filter(|&k| k != j).collect();
        let lw = self.lambda(&without)?;
        let df2 = self.n + 1 - 2 - q;
        let f = T::from_usize_lossy(df2) * (lw - l) / l;
        let p = f_sf(f.max(T::zero()), T::one(), T::from_usize_lossy(df2)).ok()?;
        Some((f, 1, df2, p, lw))
    }

    fn tolerance_ok(&self, set: &[usize], j: usize) -> bool {
        // within-group variance of j unexplained by the set, relative to its total
        let wjj = self.w[(j, j)];
        if !(wjj > T::zero()) {
            return false;
        }
        if set.is_empty() {
            return true;
        }
        let mut with = set.to_vec();
        with.push(j);
        let (Some(c_set), Some(c_with)) =
            (super::linalg::Cholesky::new(&self.w.submatrix(set)), super::linalg::Cholesky::new(&self.w.submatrix(&with)))
        else {
            return false;
        };
        let resid = (c_with.ln_det() - c_set.ln_det()).exp();
        resid / wjj >= T::lit(MIN_TOLERANCE)
    }
}

/// Stepwise variable selection by Wilks' lambda for two groups.
pub fn stepwise_lda<T: Real>(x: &Matrix<T>, high: &[bool], names: &[String], options: StepwiseOptions) -> Result<StepwiseTrace<T>> {
    let (n, p) = (x.rows(), x.cols());
    if p == 0 {
        return Err(Error::invalid("no candidate variables"));
    }
    if names.len() != p || high.len() != n {
        return Err(Error::invalid("stepwise inputs disagree in size"));
    }
    if !(options.p_enter > 0.0 && options.p_enter <= options.p_remove && options.p_remove <= 1.0) {
        return Err(Error::invalid(format!("need 0 < p_enter <= p_remove <= 1 (got {}, {})", options.p_enter, options.p_remove)));
    }
    let n_high = high.iter().filter(|&&h| h).count();
    if n_high < 2 || n - n_high < 2 {
        return Err(Error::degenerate(format!("each group needs at least 2 cases (low {}, high {n_high})", n - n_high)));
    }
    let (w, t) = sscp(x, high);
    let ctx = Ctx { w: &w, t: &t, n };
    let max_steps = options.max_steps.unwrap_or(4 * p + 4);
    let p_enter = T::lit(options.p_enter);
    let p_remove = T::lit(options.p_remove);
    let mut set: Vec<usize> = Vec::new();
    let mut events = Vec::new();

    'outer: while events.len() < max_steps {
        let mut best: Option<(usize, (T, usize, usize, T))> = None;
        for j in (0..p).filter(|j| !set.contains(j)) {
            if !ctx.tolerance_ok(&set, j) {
                continue;
            }
            if let Some(stat) = ctx.f_enter(&set, j) {
                if best.as_ref().is_none_or(|(_, b)| stat.0 > b.0) {
                    best = Some((j, stat));
                }
            }
        }
        let Some((j, (f, df1, df2, pv))) = best else { break };
        if pv > p_enter {
            break;
        }
        set.push(j);
        let lam = ctx.lambda(&set).unwrap_or(T::one());
        events.push(StepEvent { step: events.len() + 1, action: StepAction::Enter, variable: names[j].clone(), f, df1, df2, p: pv, wilks_lambda: lam });

        loop {
            if events.len() >= max_steps {
                break 'outer;
            }
            let mut worst: Option<(usize, (T, usize, usize, T, T))> = None;
            for &k in &set {
                if let Some(stat) = ctx.f_remove(&set, k) {
                    if worst.as_ref().is_none_or(|(_, b)| stat.0 < b.0) {
                        worst = Some((k, stat));
                    }
                }
            }
            match worst {
                Some((k, (f, df1, df2, pv, lw))) if pv > p_remove => {
                    set.retain(|&m| m != k);
                    events.push(StepEvent { step: events.len() + 1, action: StepAction::Remove, variable: names[k].clone(), f, df1, df2, p: pv, wilks_lambda: lw });
                }
                _ => break,
            }
        }
    }

    let retained = set
        .iter()
        .filter_map(|&k| {
            ctx.f_remove(&set, k).map(|(f, _, _, pv, lw)| RetainedVariable { variable: names[k].clone(), f_to_remove: f, sig_f_to_remove: pv, wilks_lambda_without: lw })
        })
        .collect();
    Ok(StepwiseTrace {
        n_cases: n,
        options,
        events,
        final_set: set.iter().map(|&k| names[k].clone()).collect(),
        retained,
        wilks_lambda: ctx.lambda(&set).unwrap_or(T::one()),
    })
}
