use std::path::PathBuf;

use rayon::prelude::*;

use super::manifest::{Intensities, ParticipantRecord, RiskLabel};
use crate::audio::read_wav;
use crate::error::Result;
use crate::features::{extract_feature_vector, FeatureConfig, FeatureVector};
use crate::scalar::mean_present;
use crate::splice::{derive_seed, splice, SpliceConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct CohortRow {
    pub participant_id: String,
    pub label: RiskLabel,
    pub phq8: u32,
    pub gad7: u32,
    pub wemwbs: u32,
    pub gender: String,
    pub country: String,
    pub features: FeatureVector<f64>,
    pub intensities: Intensities,
    /// Recordings that contributed to the averages.
    pub n_recordings: usize,
}

#[derive(Debug, Clone, Default)]
pub struct CohortTable {
    pub rows: Vec<CohortRow>,
    pub warnings: Vec<String>,
}

impl CohortTable {
    pub fn new(rows: Vec<CohortRow>) -> Self {
        Self { rows, warnings: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn group_sizes(&self) -> (usize, usize) {
        let high = self.rows.iter().filter(|r| r.label.is_high()).count();
        (self.rows.len() - high, high)
    }
}

pub fn average_intensities(sets: &[Intensities]) -> Intensities {
    let mut out = [None; 12];
    for (k, slot) in out.iter_mut().enumerate() {
        *slot = mean_present(sets.iter().map(|s| s[k]));
    }
    out
}

/// Cohort row from already-extracted per-recording features.
pub fn cohort_row(record: &ParticipantRecord, extracted: &[(FeatureVector<f64>, Intensities)]) -> CohortRow {
    let vectors: Vec<FeatureVector<f64>> = extracted.iter().map(|(v, _)| v.clone()).collect();
    let ints: Vec<Intensities> = extracted.iter().map(|(_, i)| *i).collect();
    CohortRow {
        participant_id: record.participant_id.clone(),
        label: record.label(),
        phq8: record.phq8,
        gad7: record.gad7,
        wemwbs: record.wemwbs,
        gender: record.gender.clone(),
        country: record.country.clone(),
        features: FeatureVector::average(&vectors),
        intensities: average_intensities(&ints),
        n_recordings: extracted.len(),
    }
}

fn extract_one(path: &PathBuf, config: &FeatureConfig, splice_cfg: Option<&SpliceConfig>, index: usize) -> Result<FeatureVector<f64>> {
    let buf = read_wav::<f64>(path)?;
    match splice_cfg {
        Some(cfg) => extract_feature_vector(&splice(&buf, &cfg.with_seed(derive_seed(cfg.seed, index as u64)))?, config),
        None => extract_feature_vector(&buf, config),
    }
}

/// Extracts every recording in parallel and averages per participant.
/// Recordings that fail are skipped; participants left with none are
/// dropped. Both are reported as warnings.
pub fn build_cohort(records: &[ParticipantRecord], config: &FeatureConfig, splice_cfg: Option<&SpliceConfig>) -> Result<CohortTable> {
    if let Some(cfg) = splice_cfg {
        cfg.validate()?;
    }
    let jobs: Vec<(usize, usize)> = records.iter().enumerate().flat_map(|(p, r)| (0..r.recordings.len()).map(move |k| (p, k))).collect();
    let results: Vec<Result<FeatureVector<f64>>> =
        jobs.par_iter().enumerate().map(|(g, &(p, k))| extract_one(&records[p].recordings[k].path, config, splice_cfg, g)).collect();

    let mut per_participant: Vec<Vec<(FeatureVector<f64>, Intensities)>> = vec![Vec::new(); records.len()];
    let mut warnings = Vec::new();
    for (&(p, k), r) in jobs.iter().zip(results) {
        let rec = &records[p].recordings[k];
        match r {
            Ok(v) => {
                for flag in &v.flags {
                    log::debug!("{}: {flag}", rec.path.display());
                }
                per_participant[p].push((v, rec.intensities));
            }
            Err(e) => {
                let msg = format!("{}: recording skipped: {e}", rec.path.display());
                log::warn!("{msg}");
                warnings.push(msg);
            }
        }
    }
    let mut rows = Vec::new();
    for (record, extracted) in records.iter().zip(&per_participant) {
        if extracted.is_empty() {
            let msg = format!("participant '{}' excluded: no extractable recordings", record.participant_id);
            log::warn!("{msg}");
            warnings.push(msg);
            continue;
        }
        rows.push(cohort_row(record, extracted));
    }
    Ok(CohortTable { rows, warnings })
}
