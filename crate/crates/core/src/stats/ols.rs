use std::collections::BTreeSet;

use super::linalg::{Matrix, Qr, QrOutcome};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Column-named design matrix for linear models.
#[derive(Debug, Clone)]
pub struct DesignMatrix<T> {
    names: Vec<String>,
    matrix: Matrix<T>,
}

impl<T: Real> DesignMatrix<T> {
    pub fn builder(rows: usize) -> DesignBuilder<T> {
        DesignBuilder { rows, names: Vec::new(), columns: Vec::new(), error: None }
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn matrix(&self) -> &Matrix<T> {
        &self.matrix
    }

    pub fn rows(&self) -> usize {
        self.matrix.rows()
    }

    pub fn cols(&self) -> usize {
        self.matrix.cols()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// The same design with the named columns removed.
    pub fn without(&self, drop: &[&str]) -> Result<Self> {
        for d in drop {
            if self.column_index(d).is_none() {
                return Err(Error::invalid(format!("design has no column '{d}'")));
            }
        }
        let keep: Vec<usize> = (0..self.cols()).filter(|&j| !drop.contains(&self.names[j].as_str())).collect();
        Ok(Self { names: keep.iter().map(|&j| self.names[j].clone()).collect(), matrix: self.matrix.select_columns(&keep) })
    }

    pub fn select_rows(&self, idx: &[usize]) -> Self {
        Self { names: self.names.clone(), matrix: self.matrix.select_rows(idx) }
    }
}

pub struct DesignBuilder<T> {
    rows: usize,
    names: Vec<String>,
    columns: Vec<Vec<T>>,
    error: Option<Error>,
}

impl<T: Real> DesignBuilder<T> {
    fn push(&mut self, name: String, column: Vec<T>) {
        if self.error.is_some() {
            return;
        }
        if column.len() != self.rows {
            self.error = Some(Error::invalid(format!("column '{name}' has {} rows, expected {}", column.len(), self.rows)));
        } else if column.iter().any(|v| !v.is_finite()) {
            self.error = Some(Error::invalid(format!("column '{name}' has non-finite values")));
        } else if self.names.contains(&name) {
            self.error = Some(Error::invalid(format!("duplicate column '{name}'")));
        } else {
            self.names.push(name);
            self.columns.push(column);
        }
    }

    pub fn intercept(mut self) -> Self {
        self.push("intercept".into(), vec![T::one(); self.rows]);
        self
    }

    pub fn continuous(mut self, name: &str, values: &[T]) -> Self {
        self.push(name.to_string(), values.to_vec());
        self
    }

    pub fn indicator(mut self, name: &str, values: &[bool]) -> Self {
        self.push(name.to_string(), values.iter().map(|&b| if b { T::one() } else { T::zero() }).collect());
        self
    }

    /// Reference-level dummy coding: levels are sorted and the first one is
    /// dropped. Columns are named `name[level]`.
    pub fn categorical<S: AsRef<str>>(mut self, name: &str, values: &[S]) -> Self {
        let levels: BTreeSet<&str> = values.iter().map(AsRef::as_ref).collect();
        for level in levels.into_iter().skip(1) {
            let col = values.iter().map(|v| if v.as_ref() == level { T::one() } else { T::zero() }).collect();
            self.push(format!("{name}[{level}]"), col);
        }
        self
    }

    pub fn build(self) -> Result<DesignMatrix<T>> {
        if let Some(e) = self.error {
            return Err(e);
        }
        Ok(DesignMatrix { matrix: Matrix::from_columns(&self.columns)?, names: self.names })
    }
}

#[derive(Debug, Clone)]
pub struct OlsFit<T> {
    pub coefficients: Vec<T>,
    pub rss: T,
    pub df_resid: usize,
    pub residuals: Vec<T>,
}

/// Least squares through Householder QR.
pub fn fit_ols<T: Real>(design: &DesignMatrix<T>, y: &[T]) -> Result<OlsFit<T>> {
    let (n, p) = (design.rows(), design.cols());
    if y.len() != n {
        return Err(Error::invalid(format!("response has {} values, design has {n} rows", y.len())));
    }
    if n <= p {
        return Err(Error::invalid(format!("need more rows than columns ({n} rows, {p} columns)")));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("response has non-finite values"));
    }
    let qr = match Qr::decompose(design.matrix())? {
        QrOutcome::Full(qr) => qr,
        QrOutcome::Deficient { column, depends_on } => {
            let mut columns: Vec<String> = depends_on.iter().map(|&j| design.names()[j].clone()).collect();
            columns.push(design.names()[column].clone());
            return Err(Error::RankDeficient { columns });
        }
    };
    let mut qty = y.to_vec();
    qr.apply_qt(&mut qty);
    let coefficients = qr.solve_r(&qty[..p]);
    let fitted = design.matrix().matvec(&coefficients);
    let residuals: Vec<T> = y.iter().zip(&fitted).map(|(&a, &b)| a - b).collect();
    let rss = qty[p..].iter().map(|&v| v * v).sum();
    Ok(OlsFit { coefficients, rss, df_resid: n - p, residuals })
}
