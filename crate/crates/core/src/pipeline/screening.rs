use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cohort::CohortTable;
use super::manifest::INTENSITY_COLUMNS;
use crate::error::{Error, Result};
use crate::features::{Feature, FeatureConfig};
use crate::splice::SpliceConfig;
use crate::stats::{
    ancova_feature, benjamini_hochberg, fit_lda, mancova, stepwise_lda, AncovaResult, Covariate, DiscriminantResult, LdaOptions, MancovaResult, Matrix,
    Priors, StepwiseOptions, StepwiseTrace,
};

pub const DISCLAIMER: &str = "SCREENING RESEARCH ONLY: not a clinical or diagnostic instrument.";
pub const COVARIATES: [&str; 4] = ["gad7", "wemwbs", "gender", "country"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScreeningConfig {
    /// Features tested for a group difference.
    pub features: Vec<String>,
    /// Significance level for passing a feature to the discriminant analysis.
    pub alpha: f64,
    pub priors: Priors,
    pub ridge: bool,
    pub stepwise: StepwiseOptions,
    /// Also run the omnibus multivariate test over all tested features.
    pub mancova: bool,
}

impl Default for ScreeningConfig {
    fn default() -> Self {
        Self {
            features: Feature::ACOUSTIC.iter().map(|f| f.name().to_string()).collect(),
            alpha: 0.05,
            priors: Priors::Equal,
            ridge: true,
            stepwise: StepwiseOptions::default(),
            mancova: false,
        }
    }
}

impl ScreeningConfig {
    pub fn feature_list(&self) -> Result<Vec<Feature>> {
        self.features.iter().map(|n| Feature::from_name(n).ok_or_else(|| Error::Validation(format!("unknown feature '{n}'")))).collect()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AncovaRow {
    #[serde(flatten)]
    pub result: AncovaResult<f64>,
    pub significant: bool,
    /// Benjamini-Hochberg adjusted p; supplementary, not used for selection.
    pub bh_q_supplementary: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DiscriminantSection {
    pub n_cases: usize,
    /// Variables ordered by absolute structure coefficient.
    pub structure_matrix: Vec<(String, f64)>,
    pub result: DiscriminantResult<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct StepwiseSection {
    pub candidates: Vec<String>,
    pub n_complete_cases: usize,
    pub trace: StepwiseTrace<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CohortSummary {
    pub n_participants: usize,
    pub n_low: usize,
    pub n_high: usize,
    pub n_recordings: usize,
    pub gender: BTreeMap<String, usize>,
    pub country: BTreeMap<String, usize>,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct ConfigEcho {
    pub seed: Option<u64>,
    pub screening: ScreeningConfig,
    pub features: Option<FeatureConfig>,
    pub splice: Option<SpliceConfig>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalysisReport {
    pub disclaimer: String,
    pub cohort: CohortSummary,
    pub covariates: Vec<String>,
    pub ancova: Vec<AncovaRow>,
    pub mancova: Option<MancovaResult<f64>>,
    pub discriminant: Option<DiscriminantSection>,
    pub stepwise: Option<StepwiseSection>,
    pub config: ConfigEcho,
    pub warnings: Vec<String>,
}

fn covariates(cohort: &CohortTable, idx: &[usize]) -> Vec<Covariate<f64>> {
    let rows: Vec<_> = idx.iter().map(|&i| &cohort.rows[i]).collect();
    vec![
        Covariate::continuous("gad7", rows.iter().map(|r| r.gad7 as f64).collect()),
        Covariate::continuous("wemwbs", rows.iter().map(|r| r.wemwbs as f64).collect()),
        Covariate::categorical("gender", rows.iter().map(|r| r.gender.clone()).collect()),
        Covariate::categorical("country", rows.iter().map(|r| r.country.clone()).collect()),
    ]
}

fn summary(cohort: &CohortTable) -> CohortSummary {
    let (n_low, n_high) = cohort.group_sizes();
    let mut gender = BTreeMap::new();
    let mut country = BTreeMap::new();
    for r in &cohort.rows {
        *gender.entry(r.gender.clone()).or_insert(0) += 1;
        *country.entry(r.country.clone()).or_insert(0) += 1;
    }
    CohortSummary { n_participants: cohort.len(), n_low, n_high, n_recordings: cohort.rows.iter().map(|r| r.n_recordings).sum(), gender, country }
}

/// Covariance analysis per feature, discriminant analysis on the
/// significant features and stepwise selection over emotion intensities.
pub fn run_screening(cohort: &CohortTable, config: &ScreeningConfig) -> Result<AnalysisReport> {
    let (n_low, n_high) = cohort.group_sizes();
    if n_low < 2 || n_high < 2 {
        return Err(Error::degenerate(format!("screening needs at least 2 participants per risk group (low {n_low}, high {n_high})")));
    }
    if !(config.alpha > 0.0 && config.alpha < 1.0) {
        return Err(Error::Validation(format!("alpha {} must lie in (0, 1)", config.alpha)));
    }
    let features = config.feature_list()?;
    let mut warnings = cohort.warnings.clone();

    let outcomes: Vec<(Feature, Result<AncovaResult<f64>>)> = features
        .par_iter()
        .map(|&f| {
            let idx: Vec<usize> = (0..cohort.len()).filter(|&i| cohort.rows[i].features.get(f).is_some()).collect();
            let y: Vec<f64> = idx.iter().map(|&i| cohort.rows[i].features.get(f).expect("filtered")).collect();
            let high: Vec<bool> = idx.iter().map(|&i| cohort.rows[i].label.is_high()).collect();
            (f, ancova_feature(f.name(), &y, &high, &covariates(cohort, &idx)))
        })
        .collect();
    let mut results = Vec::new();
    for (f, r) in outcomes {
        match r {
            Ok(r) => results.push(r),
            Err(e @ (Error::Degenerate(_) | Error::RankDeficient { .. })) => warnings.push(format!("{}: skipped: {e}", f.name())),
            Err(e) => return Err(e),
        }
    }
    let q = benjamini_hochberg(&results.iter().map(|r| r.p).collect::<Vec<_>>());
    let ancova: Vec<AncovaRow> =
        results.into_iter().zip(q).map(|(result, q)| AncovaRow { significant: result.p <= config.alpha, result, bh_q_supplementary: q }).collect();

    let mancova_result = if config.mancova { omnibus(cohort, &ancova, &mut warnings) } else { None };
    let significant: Vec<Feature> = ancova.iter().filter(|r| r.significant).filter_map(|r| Feature::from_name(&r.result.feature)).collect();
    let discriminant = if significant.is_empty() {
        warnings.push("no feature reached significance; discriminant analysis skipped".into());
        None
    } else {
        discriminant(cohort, &significant, config, &mut warnings)
    };
    let stepwise = stepwise(cohort, config, &mut warnings);

    Ok(AnalysisReport {
        disclaimer: DISCLAIMER.to_string(),
        cohort: summary(cohort),
        covariates: COVARIATES.iter().map(|s| s.to_string()).collect(),
        ancova,
        mancova: mancova_result,
        discriminant,
        stepwise,
        config: ConfigEcho { screening: config.clone(), ..Default::default() },
        warnings,
    })
}

fn complete_cases(cohort: &CohortTable, features: &[Feature]) -> Vec<usize> {
    (0..cohort.len()).filter(|&i| features.iter().all(|&f| cohort.rows[i].features.get(f).is_some())).collect()
}

fn omnibus(cohort: &CohortTable, rows: &[AncovaRow], warnings: &mut Vec<String>) -> Option<MancovaResult<f64>> {
    let feats: Vec<Feature> = rows.iter().filter_map(|r| Feature::from_name(&r.result.feature)).collect();
    let idx = complete_cases(cohort, &feats);
    let ys: Vec<(String, Vec<f64>)> = feats.iter().map(|&f| (f.name().to_string(), idx.iter().map(|&i| cohort.rows[i].features.get(f).expect("complete")).collect())).collect();
    let high: Vec<bool> = idx.iter().map(|&i| cohort.rows[i].label.is_high()).collect();
    match mancova(&ys, &high, &covariates(cohort, &idx)) {
        Ok(m) => Some(m),
        Err(e) => {
            warnings.push(format!("omnibus test skipped: {e}"));
            None
        }
    }
}

fn discriminant(cohort: &CohortTable, features: &[Feature], config: &ScreeningConfig, warnings: &mut Vec<String>) -> Option<DiscriminantSection> {
    let idx = complete_cases(cohort, features);
    let rows: Vec<Vec<f64>> = idx.iter().map(|&i| features.iter().map(|&f| cohort.rows[i].features.get(f).expect("complete")).collect()).collect();
    let high: Vec<bool> = idx.iter().map(|&i| cohort.rows[i].label.is_high()).collect();
    let names: Vec<String> = features.iter().map(|f| f.name().to_string()).collect();
    let fit = Matrix::from_rows(&rows).and_then(|x| fit_lda(&x, &high, &names, LdaOptions { priors: config.priors, ridge: config.ridge }));
    match fit {
        Ok(result) => {
            if let Some(eps) = result.ridge {
                warnings.push(format!("pooled covariance singular; ridge {eps:e} added to its diagonal"));
            }
            let mut structure_matrix: Vec<(String, f64)> = names.into_iter().zip(result.structure.iter().copied()).collect();
            structure_matrix.sort_by(|a, b| b.1.abs().total_cmp(&a.1.abs()));
            Some(DiscriminantSection { n_cases: idx.len(), structure_matrix, result })
        }
        Err(e) => {
            warnings.push(format!("discriminant analysis skipped: {e}"));
            None
        }
    }
}

fn stepwise(cohort: &CohortTable, config: &ScreeningConfig, warnings: &mut Vec<String>) -> Option<StepwiseSection> {
    // columns nobody answered are dropped before taking complete cases
    let used: Vec<usize> = (0..INTENSITY_COLUMNS.len()).filter(|&k| cohort.rows.iter().any(|r| r.intensities[k].is_some())).collect();
    if used.is_empty() {
        warnings.push("no emotion intensities recorded; stepwise analysis skipped".into());
        return None;
    }
    let idx: Vec<usize> = (0..cohort.len()).filter(|&i| used.iter().all(|&k| cohort.rows[i].intensities[k].is_some())).collect();
    let rows: Vec<Vec<f64>> = idx.iter().map(|&i| used.iter().map(|&k| cohort.rows[i].intensities[k].expect("complete")).collect()).collect();
    let high: Vec<bool> = idx.iter().map(|&i| cohort.rows[i].label.is_high()).collect();
    let names: Vec<String> = used.iter().map(|&k| INTENSITY_COLUMNS[k].to_string()).collect();
    let trace = Matrix::from_rows(&rows).and_then(|x| stepwise_lda(&x, &high, &names, config.stepwise));
    match trace {
        Ok(trace) => Some(StepwiseSection { candidates: names, n_complete_cases: idx.len(), trace }),
        Err(e) => {
            warnings.push(format!("stepwise analysis skipped: {e}"));
            None
        }
    }
}
