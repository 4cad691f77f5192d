//! Splice-robustness check: extract features on original and randomly
//! spliced versions of every recording and measure their agreement with the
//! concordance correlation coefficient.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::audio::{read_wav, AudioBuffer};
use crate::error::{Error, Result};
use crate::features::{analyze, Feature, FeatureConfig};
use crate::scalar::Real;
use crate::splice::{derive_seed, splice, SpliceConfig};

pub const DEFAULT_THRESHOLD: f64 = 0.95;
pub const MIN_CORPUS: usize = 10;
/// Name of the dynamic control descriptor in reports.
pub const F0_TREND_CONTROL: &str = "f0_trend_control";

fn moments<T: Real>(x: &[T], y: &[T]) -> Result<(T, T, T, T, T)> {
    if x.len() != y.len() {
        return Err(Error::invalid(format!("length mismatch: {} vs {}", x.len(), y.len())));
    }
    if x.len() < 2 {
        return Err(Error::invalid("need at least two paired values"));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::invalid("non-finite value in series"));
    }
    let n = T::from_usize_lossy(x.len());
    let mx = x.iter().copied().sum::<T>() / n;
    let my = y.iter().copied().sum::<T>() / n;
    let mut vx = T::zero();
    let mut vy = T::zero();
    let mut cxy = T::zero();
    for (&a, &b) in x.iter().zip(y) {
        vx += (a - mx) * (a - mx);
        vy += (b - my) * (b - my);
        cxy += (a - mx) * (b - my);
    }
    Ok((mx, my, vx / n, vy / n, cxy / n))
}

/// Concordance correlation coefficient with population (1/n) moments:
/// `2 cov / (var_x + var_y + (mean_x - mean_y)^2)`.
pub fn ccc<T: Real>(x: &[T], y: &[T]) -> Result<T> {
    let (mx, my, vx, vy, cxy) = moments(x, y)?;
    let denom = vx + vy + (mx - my) * (mx - my);
    if denom <= T::zero() {
        return Err(Error::degenerate("CCC undefined: both series constant and equal"));
    }
    Ok(T::lit(2.0) * cxy / denom)
}

pub fn pearson<T: Real>(x: &[T], y: &[T]) -> Result<T> {
    let (_, _, vx, vy, cxy) = moments(x, y)?;
    if vx <= T::zero() || vy <= T::zero() {
        return Err(Error::degenerate("Pearson r undefined for a constant series"));
    }
    Ok(cxy / (vx * vy).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureCcc {
    pub feature: String,
    pub ccc: Option<f64>,
    pub pearson_r: Option<f64>,
    /// Mean of (spliced - original).
    pub mean_difference: Option<f64>,
    pub n_pairs: usize,
    pub pass: bool,
    /// Dynamic control descriptor, not expected to pass.
    pub control: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CccReport {
    pub threshold: f64,
    pub corpus_size: usize,
    pub seed: u64,
    pub splice: SpliceConfig,
    pub features: Vec<FeatureCcc>,
    pub skipped: Vec<String>,
}

impl CccReport {
    pub fn get(&self, name: &str) -> Option<&FeatureCcc> {
        self.features.iter().find(|f| f.feature == name)
    }

    /// True when every listed feature passes.
    pub fn all_pass(&self, features: &[Feature]) -> bool {
        features.iter().all(|f| self.get(f.name()).is_some_and(|r| r.pass))
    }
}

fn summarize(name: &str, pairs: &[(f64, f64)], threshold: f64, control: bool) -> FeatureCcc {
    let (x, y): (Vec<f64>, Vec<f64>) = pairs.iter().copied().unzip();
    let c = ccc(&x, &y).ok();
    let r = pearson(&x, &y).ok();
    let md = (!pairs.is_empty()).then(|| pairs.iter().map(|(a, b)| b - a).sum::<f64>() / pairs.len() as f64);
    FeatureCcc {
        feature: name.to_string(),
        ccc: c,
        pearson_r: r,
        mean_difference: md,
        n_pairs: pairs.len(),
        pass: c.is_some_and(|v| v >= threshold),
        control,
    }
}

/// Robustness report over in-memory recordings. Recording `i` is spliced
/// with a seed derived from `splice_config.seed` and `i`.
pub fn robustness_report_buffers(
    recordings: &[(String, AudioBuffer<f64>)],
    splice_config: &SpliceConfig,
    feature_config: &FeatureConfig,
    threshold: f64,
) -> Result<CccReport> {
    splice_config.validate()?;
    let results: Vec<(String, Result<_>)> = recordings
        .par_iter()
        .enumerate()
        .map(|(i, (name, buf))| {
            let r = (|| {
                let cfg = splice_config.with_seed(derive_seed(splice_config.seed, i as u64));
                let spliced = splice(buf, &cfg)?;
                Ok((analyze(buf, feature_config)?, analyze(&spliced, feature_config)?))
            })();
            (name.clone(), r)
        })
        .collect();

    let mut skipped = Vec::new();
    let mut pairs = Vec::new();
    for (name, r) in results {
        match r {
            Ok(p) => pairs.push(p),
            Err(e) => {
                log::warn!("skipping {name}: {e}");
                skipped.push(format!("{name}: {e}"));
            }
        }
    }
    if pairs.len() < MIN_CORPUS {
        return Err(Error::invalid(format!(
            "robustness needs at least {MIN_CORPUS} usable recordings, got {}",
            pairs.len()
        )));
    }
    let mut features: Vec<FeatureCcc> = Feature::ACOUSTIC
        .iter()
        .map(|&f| {
            let p: Vec<(f64, f64)> = pairs.iter().filter_map(|(a, b)| Some((a.vector.get(f)?, b.vector.get(f)?))).collect();
            summarize(f.name(), &p, threshold, false)
        })
        .collect();
    let trend: Vec<(f64, f64)> = pairs.iter().filter_map(|(a, b)| Some((a.f0_trend?, b.f0_trend?))).collect();
    features.push(summarize(F0_TREND_CONTROL, &trend, threshold, true));
    Ok(CccReport { threshold, corpus_size: pairs.len(), seed: splice_config.seed, splice: *splice_config, features, skipped })
}

/// Lists `*.wav` files directly inside `dir`, sorted by name.
pub fn list_wavs(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x.eq_ignore_ascii_case("wav")))
        .collect();
    out.sort();
    Ok(out)
}

/// Robustness report over every WAV file in `corpus_dir`; unreadable files are skipped.
pub fn robustness_report(
    corpus_dir: impl AsRef<Path>,
    splice_config: &SpliceConfig,
    feature_config: &FeatureConfig,
    threshold: f64,
) -> Result<CccReport> {
    let mut loaded = Vec::new();
    let mut unreadable = Vec::new();
    for path in list_wavs(corpus_dir.as_ref())? {
        let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        match read_wav::<f64>(&path) {
            Ok(b) => loaded.push((name, b)),
            Err(e) => {
                log::warn!("skipping unreadable {name}: {e}");
                unreadable.push(format!("{name}: {e}"));
            }
        }
    }
    let mut report = robustness_report_buffers(&loaded, splice_config, feature_config, threshold)?;
    unreadable.extend(report.skipped);
    report.skipped = unreadable;
    Ok(report)
}
