use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::audio::read_wav;
use crate::error::{Error, Result};
use crate::features::{extract_feature_vector, Feature, FeatureConfig};
use crate::stats::{train_linear_svm, Matrix, SvmOptions};

pub const EMOTION_LABELS: [&str; 4] = ["neutral", "happy", "angry", "sad"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CrossDbConfig {
    pub svm: SvmOptions,
    /// Held-out share per class when a corpus has no split column.
    pub test_fraction: f64,
}

impl Default for CrossDbConfig {
    fn default() -> Self {
        Self { svm: SvmOptions::default(), test_fraction: 0.2 }
    }
}

/// A labelled corpus already reduced to feature rows (`None` = absent).
#[derive(Debug, Clone)]
pub struct CorpusFeatures {
    pub name: String,
    pub rows: Vec<Vec<Option<f64>>>,
    /// Indices into [`EMOTION_LABELS`].
    pub labels: Vec<usize>,
    pub splits: Vec<Option<Split>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CrossDbResult {
    pub corpora: Vec<String>,
    pub labels: Vec<String>,
    pub features: Vec<String>,
    /// `accuracy[i][j]`: trained on corpus i's training part, tested on corpus j's test part.
    pub accuracy: Vec<Vec<f64>>,
    /// Unweighted average recall over the classes present in the test part.
    pub uar: Vec<Vec<f64>>,
    pub n_train: Vec<usize>,
    pub n_test: Vec<usize>,
    pub seed: u64,
    pub config: CrossDbConfig,
    pub features_config: Option<FeatureConfig>,
    pub warnings: Vec<String>,
}

/// Train/test indices: the declared split when every row has one,
/// otherwise a seeded per-class hold-out.
fn partition(c: &CorpusFeatures, test_fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if c.splits.iter().all(Option::is_some) {
        let train: Vec<usize> = (0..c.rows.len()).filter(|&i| c.splits[i] == Some(Split::Train)).collect();
        let test: Vec<usize> = (0..c.rows.len()).filter(|&i| c.splits[i] == Some(Split::Test)).collect();
        if train.is_empty() || test.is_empty() {
            return Err(Error::Validation(format!("corpus '{}': declared split leaves an empty train or test part", c.name)));
        }
        return Ok((train, test));
    }
    if c.splits.iter().any(Option::is_some) {
        return Err(Error::Validation(format!("corpus '{}': split column is only partly filled", c.name)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut train, mut test) = (Vec::new(), Vec::new());
    let classes: BTreeSet<usize> = c.labels.iter().copied().collect();
    for k in classes {
        let mut idx: Vec<usize> = (0..c.rows.len()).filter(|&i| c.labels[i] == k).collect();
        idx.shuffle(&mut rng);
        let n_test = if idx.len() < 2 { 0 } else { ((idx.len() as f64 * test_fraction).round() as usize).clamp(1, idx.len() - 1) };
        test.extend_from_slice(&idx[..n_test]);
        train.extend_from_slice(&idx[n_test..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

/// Column means over `idx`, ignoring absent values (0 for an all-absent column).
fn column_means(c: &CorpusFeatures, idx: &[usize], d: usize) -> Vec<f64> {
    (0..d)
        .map(|j| {
            let v: Vec<f64> = idx.iter().filter_map(|&i| c.rows[i][j]).collect();
            if v.is_empty() { 0.0 } else { v.iter().sum::<f64>() / v.len() as f64 }
        })
        .collect()
}

fn impute(c: &CorpusFeatures, idx: &[usize], fill: &[f64]) -> Result<Matrix<f64>> {
    let rows: Vec<Vec<f64>> = idx.iter().map(|&i| c.rows[i].iter().zip(fill).map(|(v, &m)| v.unwrap_or(m)).collect()).collect();
    Matrix::from_rows(&rows)
}

fn scores(pred: &[usize], truth: &[usize]) -> (f64, f64) {
    let acc = pred.iter().zip(truth).filter(|(a, b)| a == b).count() as f64 / truth.len() as f64;
    let classes: BTreeSet<usize> = truth.iter().copied().collect();
    let recall: f64 = classes
        .iter()
        .map(|&k| {
            let n = truth.iter().filter(|&&t| t == k).count();
            let hit = pred.iter().zip(truth).filter(|(&p, &t)| t == k && p == k).count();
            hit as f64 / n as f64
        })
        .sum();
    (acc, recall / classes.len() as f64)
}

/// Full N x N grid over feature-level corpora.
pub fn crossdb_features(corpora: &[CorpusFeatures], feature_names: &[String], config: &CrossDbConfig, seed: u64) -> Result<CrossDbResult> {
    if corpora.len() < 2 {
        return Err(Error::Validation("cross-corpus evaluation needs at least two corpora".into()));
    }
    if !(config.test_fraction > 0.0 && config.test_fraction < 1.0) {
        return Err(Error::Validation(format!("test_fraction {} must lie in (0, 1)", config.test_fraction)));
    }
    let d = feature_names.len();
    let label_sets: Vec<BTreeSet<usize>> = corpora.iter().map(|c| c.labels.iter().copied().collect()).collect();
    for (c, set) in corpora.iter().zip(&label_sets) {
        if c.rows.len() != c.labels.len() || c.rows.len() != c.splits.len() || c.rows.iter().any(|r| r.len() != d) {
            return Err(Error::invalid(format!("corpus '{}' has inconsistent shapes", c.name)));
        }
        if set.len() < 2 {
            return Err(Error::Validation(format!("corpus '{}' has fewer than two labels", c.name)));
        }
        if *set != label_sets[0] {
            let names = |s: &BTreeSet<usize>| s.iter().map(|&k| EMOTION_LABELS[k]).collect::<Vec<_>>().join(",");
            return Err(Error::Validation(format!(
                "label-set mismatch: '{}' has {{{}}}, '{}' has {{{}}}",
                corpora[0].name,
                names(&label_sets[0]),
                c.name,
                names(set)
            )));
        }
    }
    // the same seed for every corpus, so identical corpora split identically
    let parts: Vec<(Vec<usize>, Vec<usize>)> = corpora.iter().map(|c| partition(c, config.test_fraction, seed)).collect::<Result<_>>()?;
    let n = corpora.len();
    let mut accuracy = vec![vec![0.0; n]; n];
    let mut uar = vec![vec![0.0; n]; n];
    for i in 0..n {
        let (train, _) = &parts[i];
        let fill = column_means(&corpora[i], train, d);
        let x = impute(&corpora[i], train, &fill)?;
        let y: Vec<usize> = train.iter().map(|&k| corpora[i].labels[k]).collect();
        let model = train_linear_svm(&x, &y, config.svm)?;
        for j in 0..n {
            let (_, test) = &parts[j];
            let xt = impute(&corpora[j], test, &fill)?;
            let truth: Vec<usize> = test.iter().map(|&k| corpora[j].labels[k]).collect();
            let (a, u) = scores(&model.predict(&xt)?, &truth);
            accuracy[i][j] = a;
            uar[i][j] = u;
        }
    }
    Ok(CrossDbResult {
        corpora: corpora.iter().map(|c| c.name.clone()).collect(),
        labels: label_sets[0].iter().map(|&k| EMOTION_LABELS[k].to_string()).collect(),
        features: feature_names.to_vec(),
        accuracy,
        uar,
        n_train: parts.iter().map(|p| p.0.len()).collect(),
        n_test: parts.iter().map(|p| p.1.len()).collect(),
        seed,
        config: config.clone(),
        features_config: None,
        warnings: Vec::new(),
    })
}

#[derive(Debug, Clone)]
pub struct CorpusEntry {
    pub path: PathBuf,
    pub label: usize,
    pub split: Option<Split>,
}

/// Reads a corpus manifest with columns `audio_path,label[,split]`.
pub fn load_corpus_manifest(path: impl AsRef<Path>) -> Result<Vec<CorpusEntry>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    let headers = rdr.headers()?.clone();
    let col = |n: &str| headers.iter().position(|h| h == n);
    let (Some(a), Some(l)) = (col("audio_path"), col("label")) else {
        return Err(Error::Validation(format!("{}: corpus manifest needs audio_path and label columns", path.display())));
    };
    let s = col("split");
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let row = i + 2;
        let label_raw = rec.get(l).unwrap_or("").to_ascii_lowercase();
        let label = EMOTION_LABELS
            .iter()
            .position(|&e| e == label_raw)
            .ok_or_else(|| Error::Validation(format!("{} row {row}: label '{label_raw}' not in {{{}}}", path.display(), EMOTION_LABELS.join(", "))))?;
        let split = match s.map(|k| rec.get(k).unwrap_or("").to_ascii_lowercase()).as_deref() {
            None | Some("") => None,
            Some("train") => Some(Split::Train),
            Some("test") => Some(Split::Test),
            Some(other) => return Err(Error::Validation(format!("{} row {row}: split '{other}' must be train or test", path.display()))),
        };
        let audio = PathBuf::from(rec.get(a).unwrap_or(""));
        out.push(CorpusEntry { path: if audio.is_absolute() { audio } else { base.join(audio) }, label, split });
    }
    if out.is_empty() {
        return Err(Error::Validation(format!("{}: corpus manifest has no rows", path.display())));
    }
    Ok(out)
}

/// Extracts features for every corpus and runs the grid. Unreadable files
/// are dropped with a warning.
pub fn run_crossdb(manifests: &[PathBuf], feature_config: &FeatureConfig, config: &CrossDbConfig, seed: u64) -> Result<CrossDbResult> {
    let features = Feature::ACOUSTIC;
    let mut corpora = Vec::new();
    let mut warnings = Vec::new();
    for m in manifests {
        let entries = load_corpus_manifest(m)?;
        let extracted: Vec<Result<Vec<Option<f64>>>> = entries
            .par_iter()
            .map(|e| {
                let buf = read_wav::<f64>(&e.path)?;
                let v = extract_feature_vector(&buf, feature_config)?;
                Ok(features.iter().map(|&f| v.get(f)).collect())
            })
            .collect();
        let mut c = CorpusFeatures {
            name: m.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| m.display().to_string()),
            rows: Vec::new(),
            labels: Vec::new(),
            splits: Vec::new(),
        };
        for (e, r) in entries.iter().zip(extracted) {
            match r {
                Ok(row) => {
                    c.rows.push(row);
                    c.labels.push(e.label);
                    c.splits.push(e.split);
                }
                Err(err) => warnings.push(format!("{}: skipped: {err}", e.path.display())),
            }
        }
        corpora.push(c);
    }
    let names: Vec<String> = features.iter().map(|f| f.name().to_string()).collect();
    let mut result = crossdb_features(&corpora, &names, config, seed)?;
    result.features_config = Some(feature_config.clone());
    result.warnings = warnings;
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_distr::{Distribution, Normal};

    fn corpus(name: &str, per_class: usize, spread: f64, seed: u64) -> CorpusFeatures {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let z = Normal::new(0.0, 1.0).unwrap();
        let centers = [[0.0, 0.0, 0.0], [spread, 0.0, 0.0], [0.0, spread, 0.0], [0.0, 0.0, spread]];
        let mut c = CorpusFeatures { name: name.into(), rows: Vec::new(), labels: Vec::new(), splits: Vec::new() };
        for (k, m) in centers.iter().enumerate() {
            for _ in 0..per_class {
                c.rows.push(m.iter().map(|&v| Some(v + z.sample(&mut rng))).collect());
                c.labels.push(k);
                c.splits.push(None);
            }
        }
        c
    }

    fn names() -> Vec<String> {
        ["a", "b", "c"].map(String::from).to_vec()
    }

    #[test]
    fn grid_shape_and_self_consistency() {
        let a = corpus("a", 25, 6.0, 1);
        let r = crossdb_features(&[a.clone(), a], &names(), &CrossDbConfig::default(), 3).unwrap();
        assert_eq!(r.accuracy.len(), 2);
        assert_eq!(r.accuracy[0].len(), 2);
        assert_eq!(r.accuracy[0][1], r.accuracy[0][0]);
        assert_eq!(r.accuracy[1][0], r.accuracy[1][1]);
        assert!(r.accuracy[0][0] >= 0.9);
        assert_eq!(r.n_test[0], 20);
    }

    #[test]
    fn label_mismatch() {
        let a = corpus("a", 10, 3.0, 1);
        let mut b = corpus("b", 10, 3.0, 2);
        b.labels.iter_mut().for_each(|l| *l = (*l).min(2));
        assert!(matches!(crossdb_features(&[a, b], &names(), &CrossDbConfig::default(), 0), Err(Error::Validation(_))));
    }

    #[test]
    fn missing_values_take_training_mean() {
        let mut a = corpus("a", 20, 5.0, 4);
        let b = corpus("b", 20, 5.0, 5);
        a.rows[3][1] = None;
        a.rows[40][0] = None;
        let r = crossdb_features(&[a, b], &names(), &CrossDbConfig::default(), 1).unwrap();
        assert!(r.accuracy.iter().flatten().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn declared_split_is_respected() {
        let mut a = corpus("a", 10, 5.0, 7);
        for (i, s) in a.splits.iter_mut().enumerate() {
            *s = Some(if i % 4 == 0 { Split::Test } else { Split::Train });
        }
        let b = corpus("b", 10, 5.0, 8);
        let r = crossdb_features(&[a, b], &names(), &CrossDbConfig::default(), 1).unwrap();
        assert_eq!(r.n_test[0], 10);
        assert_eq!(r.n_train[0], 30);
    }
}
