//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

mod common;

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution, Normal};

use common::{manifest_fixture, synthetic_cohort, marker_effects, CohortParams};
use voxrisk::audio::{write_wav, Spectrum, WavEncoding};
use voxrisk::features::{extract_feature_vector, f0_semitones, spectral_slope_band, Feature, FeatureConfig};
use voxrisk::pipeline::{crossdb_features, run_crossdb, run_screening, CorpusFeatures, CrossDbConfig, ScreeningConfig};
use voxrisk::robustness::{ccc, robustness_report};
use voxrisk::splice::SpliceConfig;
use voxrisk::stats::{f_cdf, fit_lda, fit_ols, train_linear_svm, DesignMatrix, LdaOptions, Matrix, Priors, SvmOptions};
use voxrisk::synth::{self, VoiceParams};

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

/// Folds sub-checks into one outcome, keeping every detail.
fn all(parts: Vec<Outcome>) -> Outcome {
    let pass = parts.iter().all(|p| p.pass);
    let detail = parts.iter().map(|p| format!("{}{}", if p.pass { "" } else { "[failed] " }, p.detail)).collect::<Vec<_>>().join("; ");
    Outcome { pass, detail }
}

// 1 ----------------------------------------------------------------------

fn splice_robustness() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let t0 = Instant::now();
    for (i, (_, buf)) in synth::corpus(36, 4.0, 16000, 7).into_iter().enumerate() {
        write_wav(dir.path().join(format!("utt{i:02}.wav")), &buf, WavEncoding::Pcm16).unwrap();
    }
    let report = robustness_report(dir.path(), &SpliceConfig::default().with_seed(7), &FeatureConfig::default(), 0.95).unwrap();
    let secs = t0.elapsed().as_secs_f64();
    let markers = Feature::RISK_MARKERS;
    let mut parts: Vec<Outcome> = markers
        .iter()
        .map(|f| {
            let c = report.get(f.name()).and_then(|r| r.ccc);
            check(c.is_some_and(|v| v >= 0.95), format!("{} {:.4}", f.name(), c.unwrap_or(f64::NAN)))
        })
        .collect();
    parts.push(check(report.corpus_size >= 30, format!("{} utterances", report.corpus_size)));
    parts.push(check(secs <= 120.0, format!("{secs:.1} s")));
    all(parts)
}

// 2 ----------------------------------------------------------------------

fn dsp_accuracy() -> Outcome {
    let cfg = FeatureConfig::default();
    let mut parts = Vec::new();

    let mut worst: f64 = 0.0;
    for f0 in (100..=400).step_by(25).map(f64::from) {
        for buf in [synth::sine(f0, 0.5, 1.5, 16000), synth::harmonic_series(f0, 8, 0.5, 6.0, 1.5, 16000)] {
            let got = extract_feature_vector(&buf, &cfg).unwrap().get(Feature::F0HzMean).unwrap();
            worst = worst.max((got / f0 - 1.0).abs());
        }
    }
    parts.push(check(worst <= 0.02, format!("F0 100-400 Hz worst error {:.3}%", 100.0 * worst)));

    let st = f0_semitones(220.0f64).unwrap();
    let sine = extract_feature_vector(&synth::sine(220.0, 0.5, 1.5, 16000), &cfg).unwrap();
    let st_mean = sine.get(Feature::F0SemitoneMean).unwrap();
    parts.push(check((st - 36.0).abs() <= 0.02 && (st_mean - 36.0).abs() <= 0.02, format!("220 Hz -> {st:.4} st (extracted {st_mean:.4})")));

    let buf = synth::utterance(&VoiceParams::default(), 3.0, 16000, 3);
    let loud = extract_feature_vector(&buf, &cfg).unwrap();
    let quiet = extract_feature_vector(&buf.scaled(0.25).unwrap(), &cfg).unwrap();
    let mfccs = [Feature::Mfcc1Mean, Feature::Mfcc2Mean, Feature::Mfcc3Mean, Feature::Mfcc4Mean];
    let gain_err = mfccs.iter().map(|&f| (loud.get(f).unwrap() - quiet.get(f).unwrap()).abs()).fold(0.0, f64::max);
    parts.push(check(gain_err <= 1e-6, format!("MFCC gain change {gain_err:.1e}")));

    let noise = extract_feature_vector(&synth::white_noise(0.1, 10.0, 16000, 5), &cfg).unwrap();
    let alpha = noise.get(Feature::AlphaRatioUvMean).unwrap();
    parts.push(check((alpha - 6.24).abs() <= 0.3, format!("flat-noise alpha ratio {alpha:.3} dB")));

    let n = 4096;
    let mags: Vec<f64> = (0..=n / 2).map(|k| 10f64.powf((0.02 * k as f64 * 16000.0 / n as f64) / 20.0 - 3.0)).collect();
    let s = Spectrum::from_magnitudes(mags, n, 16000).unwrap();
    let slope = spectral_slope_band(&s, 0.0, 500.0).unwrap();
    parts.push(check((slope - 0.02).abs() <= 1e-6, format!("ramp slope {slope:.8} dB/Hz")));
    all(parts)
}

// 3 ----------------------------------------------------------------------

fn lda_brute_force(x: &Matrix<f64>, high: &[bool]) -> (f64, f64) {
    let (n, p) = (x.rows(), x.cols());
    let fit = |idx: &[usize]| {
        let mut sums = [DVector::zeros(p), DVector::zeros(p)];
        let mut cnt = [0.0; 2];
        for &i in idx {
            sums[high[i] as usize] += DVector::from_row_slice(x.row(i));
            cnt[high[i] as usize] += 1.0;
        }
        let m = [&sums[0] / cnt[0], &sums[1] / cnt[1]];
        let mut w = DMatrix::zeros(p, p);
        for &i in idx {
            let u = DVector::from_row_slice(x.row(i)) - &m[high[i] as usize];
            w += &u * u.transpose();
        }
        (m, w, cnt)
    };
    let all_idx: Vec<usize> = (0..n).collect();
    let (m, w, cnt) = fit(&all_idx);
    let d = &m[1] - &m[0];
    let lambda = cnt[0] * cnt[1] / n as f64 * (d.transpose() * w.clone().try_inverse().unwrap() * &d)[(0, 0)];
    let mut correct = 0;
    for i in 0..n {
        let idx: Vec<usize> = (0..n).filter(|&k| k != i).collect();
        let (m, w, _) = fit(&idx);
        let a = (w / (n as f64 - 3.0)).try_inverse().unwrap() * (&m[1] - &m[0]);
        let pred = a.dot(&(DVector::from_row_slice(x.row(i)) - (&m[0] + &m[1]) * 0.5)) > 0.0;
        correct += (pred == high[i]) as usize;
    }
    (1.0 / (1.0 + lambda), correct as f64 / n as f64)
}

fn statistics_oracles() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let z = Normal::new(0.0, 1.0).unwrap();
    let mut parts = Vec::new();

    let cols: Vec<Vec<f64>> = (0..4).map(|_| (0..50).map(|_| z.sample(&mut rng)).collect()).collect();
    let y: Vec<f64> = (0..50).map(|i| 1.5 * cols[0][i] - 0.7 * cols[2][i] + z.sample(&mut rng)).collect();
    let mut b = DesignMatrix::builder(50);
    for (j, c) in cols.iter().enumerate() {
        b = b.continuous(&format!("x{j}"), c);
    }
    let fit = fit_ols(&b.build().unwrap(), &y).unwrap();
    let a = DMatrix::from_fn(50, 4, |i, j| cols[j][i]);
    let oracle = a.pseudo_inverse(1e-14).unwrap() * DVector::from_vec(y);
    let ols_err = (0..4).map(|j| (fit.coefficients[j] - oracle[j]).abs()).fold(0.0, f64::max);
    parts.push(check(ols_err <= 1e-8, format!("OLS vs pseudo-inverse {ols_err:.1e}")));

    let draws = 1_000_000;
    let mut worst_se: f64 = 0.0;
    for &(d1, d2) in &[(1.0, 50.0), (4.0, 100.0)] {
        let (c1, c2) = (ChiSquared::new(d1).unwrap(), ChiSquared::new(d2).unwrap());
        let sample: Vec<f64> = (0..draws).map(|_| (c1.sample(&mut rng) / d1) / (c2.sample(&mut rng) / d2)).collect();
        for &x in &[0.5, 1.0, 2.0, 4.0, 8.0] {
            let p = f_cdf(x, d1, d2).unwrap();
            let emp = sample.iter().filter(|&&v| v <= x).count() as f64 / draws as f64;
            let se = (p * (1.0 - p) / draws as f64).sqrt();
            worst_se = worst_se.max((emp - p).abs() / se);
        }
    }
    parts.push(check(worst_se <= 3.0, format!("F cdf vs 1e6 draws worst {worst_se:.2} SE")));

    let high: Vec<bool> = (0..40).map(|i| i % 5 < 2).collect();
    let rows: Vec<Vec<f64>> = (0..40).map(|i| (0..3).map(|j| z.sample(&mut rng) * (1.0 + j as f64) + if high[i] { 0.8 } else { 0.0 }).collect()).collect();
    let x = Matrix::from_rows(&rows).unwrap();
    let names: Vec<String> = ["a", "b", "c"].map(String::from).to_vec();
    let r = fit_lda(&x, &high, &names, LdaOptions { priors: Priors::Equal, ridge: true }).unwrap();
    let (lambda, loo) = lda_brute_force(&x, &high);
    let lda_err = (r.wilks_lambda - lambda).abs().max((r.loo_accuracy - loo).abs());
    parts.push(check(lda_err <= 1e-8, format!("LDA lambda {:.4} / LOO {:.3} vs brute force {lda_err:.1e}", r.wilks_lambda, r.loo_accuracy)));

    let (sigma, shift) = (1.7, 0.9);
    let xs: Vec<f64> = (0..1000).map(|i| if i % 2 == 0 { 5.0 - sigma } else { 5.0 + sigma }).collect();
    let ys: Vec<f64> = xs.iter().map(|v| v + shift).collect();
    let want = 2.0 * sigma * sigma / (2.0 * sigma * sigma + shift * shift);
    let ccc_err = (ccc(&xs, &ys).unwrap() - want).abs();
    parts.push(check(ccc_err <= 1e-12, format!("CCC closed form {ccc_err:.1e}")));
    all(parts)
}

// 4 ----------------------------------------------------------------------

/// Kolmogorov-Smirnov test of uniformity on [0, 1]; returns (D, p).
fn ks_uniform(values: &[f64]) -> (f64, f64) {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    let d = v.iter().enumerate().map(|(i, &x)| ((i as f64 + 1.0) / n - x).max(x - i as f64 / n)).fold(0.0, f64::max);
    let lam = (n.sqrt() + 0.12 + 0.11 / n.sqrt()) * d;
    let p: f64 = (1..=100).map(|k| 2.0 * (-1f64).powi(k - 1) * (-2.0 * (k as f64).powi(2) * lam * lam).exp()).sum();
    (d, p.clamp(0.0, 1.0))
}

fn calibration() -> Outcome {
    let cfg = ScreeningConfig::default();
    let n_features = cfg.features.len();
    let mut per_feature: Vec<Vec<f64>> = vec![Vec::new(); n_features];
    for seed in 0..500 {
        let report = run_screening(&synthetic_cohort(&CohortParams::null(60, 10_000 + seed)), &cfg).unwrap();
        for (k, row) in report.ancova.iter().enumerate() {
            per_feature[k].push(row.result.p);
        }
    }
    let pooled: Vec<f64> = per_feature.concat();
    let (d, p) = ks_uniform(&pooled);
    let rate = pooled.iter().filter(|&&v| v <= 0.05).count() as f64 / pooled.len() as f64;
    let worst = per_feature.iter().map(|ps| ks_uniform(ps).1).fold(1.0, f64::min);
    all(vec![
        check(pooled.len() == 500 * n_features, format!("{} p-values", pooled.len())),
        check(p > 0.01, format!("pooled KS D {d:.4}, p {p:.3}")),
        check(worst > 0.01 / n_features as f64, format!("smallest per-feature KS p {worst:.3} (Bonferroni over {n_features})")),
        check((rate - 0.05).abs() <= 0.02, format!("significant rate {:.2}%", 100.0 * rate)),
    ])
}

// 5 ----------------------------------------------------------------------

fn marker_cohort() -> Outcome {
    let params = CohortParams::reference_cohort(100, 0.65, 0);
    let cohort = synthetic_cohort(&params);
    let report = run_screening(&cohort, &ScreeningConfig::default()).unwrap();
    let mut parts = Vec::new();
    for e in marker_effects(0.65) {
        let row = report.ancova.iter().find(|r| r.result.feature == e.feature.name()).unwrap();
        let a = &row.result;
        let sign_ok = (a.adjusted_mean_high - a.adjusted_mean_low).signum() == (e.high - e.low).signum();
        parts.push(check(
            row.significant && sign_ok,
            format!("{} p {:.3} eta2 {:.3} ({:.2} vs {:.2})", a.feature, a.p, a.partial_eta_sq, a.adjusted_mean_low, a.adjusted_mean_high),
        ));
    }
    let f0 = report.ancova.iter().find(|r| r.result.feature == Feature::F0HzMean.name()).unwrap();
    parts.push(check(
        (f0.result.p / 0.004 - 1.0).abs() <= 0.1 && (f0.result.partial_eta_sq / 0.023 - 1.0).abs() <= 0.1,
        format!("F0 Hz shape check p {:.4} eta2 {:.4}", f0.result.p, f0.result.partial_eta_sq),
    ));
    match &report.discriminant {
        Some(d) => {
            let r = &d.result;
            parts.push(check((0.58..=0.70).contains(&r.loo_accuracy), format!("LOO {:.1}% (resub {:.1}%)", 100.0 * r.loo_accuracy, 100.0 * r.resubstitution_accuracy)));
            parts.push(check((0.90..=0.99).contains(&r.wilks_lambda), format!("Wilks lambda {:.3}", r.wilks_lambda)));
        }
        None => parts.push(check(false, "no discriminant analysis")),
    }
    let (lo, hi) = cohort.group_sizes();
    parts.push(check(cohort.len() == 363, format!("n {} (low {lo}, high {hi})", cohort.len())));
    all(parts)
}

// 6 ----------------------------------------------------------------------

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let manifest = manifest_fixture(dir.path());
    let bin = env!("CARGO_BIN_EXE_voxrisk");
    let run = |out: &str, jobs: &str| {
        Command::new(bin)
            .args(["--seed", "42", "--jobs", jobs, "screen", "--splice", "--manifest"])
            .arg(&manifest)
            .arg("--out")
            .arg(dir.path().join(out))
            .output()
            .unwrap()
    };
    let a = run("a.json", "1");
    let b = run("b.json", "4");
    if !a.status.success() || !b.status.success() {
        return check(false, format!("screen failed: {}", String::from_utf8_lossy(&a.stderr)));
    }
    let ja = std::fs::read(dir.path().join("a.json")).unwrap();
    let jb = std::fs::read(dir.path().join("b.json")).unwrap();
    let report: serde_json::Value = serde_json::from_slice(&ja).unwrap();
    let rows = report["ancova"].as_array().map_or(0, |a| a.len());
    check(ja == jb && rows == 13, format!("two runs (1 and 4 threads) {} bytes, {rows} ANCOVA rows, identical: {}", ja.len(), ja == jb))
}

// 7 ----------------------------------------------------------------------

fn emotion_voice(label: usize, rng: &mut ChaCha8Rng) -> VoiceParams {
    let mut v = VoiceParams::random(rng);
    v.f0_hz = rng.random_range(110.0..150.0);
    match label {
        1 => {
            v.f0_hz *= 1.6;
            v.accent_depth = 0.15;
            v.peak = 0.7;
        }
        2 => {
            v.f0_hz *= 1.3;
            v.open_quotient = 0.4;
            v.fricative_level = 0.5;
            v.peak = 0.9;
        }
        3 => {
            v.f0_hz *= 0.8;
            v.open_quotient = 0.8;
            v.breathiness = 0.08;
            v.accent_depth = 0.02;
            v.peak = 0.25;
        }
        _ => {
            v.accent_depth = 0.05;
            v.peak = 0.5;
        }
    }
    v
}

fn corpus_fixture(dir: &Path, name: &str, seed: u64) -> PathBuf {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let labels = ["neutral", "happy", "angry", "sad"];
    let mut csv = String::from("audio_path,label\n");
    for i in 0..48 {
        let label = i % 4;
        let file = format!("{name}_{i:02}.wav");
        let buf = synth::utterance(&emotion_voice(label, &mut rng), 2.0, 16000, seed * 1000 + i as u64);
        write_wav(dir.join(&file), &buf, WavEncoding::Pcm16).unwrap();
        csv += &format!("{file},{}\n", labels[label]);
    }
    let path = dir.join(format!("{name}.csv"));
    std::fs::write(&path, csv).unwrap();
    path
}

fn crossdb_shape() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let manifests = vec![corpus_fixture(dir.path(), "corpusA", 1), corpus_fixture(dir.path(), "corpusB", 2)];
    let mut parts = Vec::new();
    match run_crossdb(&manifests, &FeatureConfig::default(), &CrossDbConfig::default(), 5) {
        Ok(r) => {
            let full = r.accuracy.len() == 2 && r.accuracy.iter().all(|row| row.len() == 2 && row.iter().all(|v| (0.0..=1.0).contains(v)));
            let grid = r.accuracy.iter().map(|row| row.iter().map(|v| format!("{v:.2}")).collect::<Vec<_>>().join(" ")).collect::<Vec<_>>().join(" | ");
            parts.push(check(full && r.n_test.iter().all(|&t| t > 0), format!("2x2 grid [{grid}], test sizes {:?}", r.n_test)));
        }
        Err(e) => parts.push(check(false, format!("crossdb failed: {e}"))),
    }

    let mut rng = ChaCha8Rng::seed_from_u64(71);
    let z = Normal::new(0.0, 1.0).unwrap();
    let centers = [[0.0, 0.0], [6.0, 0.0], [0.0, 6.0], [6.0, 6.0]];
    let mut blob = |n: usize| {
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for (k, c) in centers.iter().enumerate() {
            for _ in 0..n {
                rows.push(vec![c[0] + z.sample(&mut rng), c[1] + z.sample(&mut rng)]);
                labels.push(k);
            }
        }
        (rows, labels)
    };
    let (train, train_y) = blob(40);
    let (test, test_y) = blob(40);
    let model = train_linear_svm(&Matrix::from_rows(&train).unwrap(), &train_y, SvmOptions { c: 0.1, ..Default::default() }).unwrap();
    let pred = model.predict(&Matrix::from_rows(&test).unwrap()).unwrap();
    let acc = pred.iter().zip(&test_y).filter(|(a, b)| a == b).count() as f64 / test_y.len() as f64;
    parts.push(check(acc >= 0.9, format!("SVM C=0.1 on separable blobs {:.1}%", 100.0 * acc)));

    let as_corpus = |name: &str, rows: &[Vec<f64>], labels: &[usize]| CorpusFeatures {
        name: name.into(),
        rows: rows.iter().map(|r| r.iter().map(|&v| Some(v)).collect()).collect(),
        labels: labels.to_vec(),
        splits: vec![None; labels.len()],
    };
    let grid = crossdb_features(&[as_corpus("x", &train, &train_y), as_corpus("y", &test, &test_y)], &["u".into(), "v".into()], &CrossDbConfig::default(), 5).unwrap();
    let min = grid.accuracy.iter().flatten().fold(1.0f64, |a, &b| a.min(b));
    parts.push(check(min >= 0.9, format!("feature-level blob grid min accuracy {:.1}%", 100.0 * min)));
    all(parts)
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 7] = [
        ("splice robustness (CCC >= 0.95, <= 2 min)", splice_robustness),
        ("DSP accuracy", dsp_accuracy),
        ("statistics oracles", statistics_oracles),
        ("null calibration", calibration),
        ("marker cohort end-to-end", marker_cohort),
        ("screen determinism", determinism),
        ("cross-corpus harness", crossdb_shape),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t0 = Instant::now();
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default();
            check(false, format!("panicked: {msg}"))
        });
        failed += !outcome.pass as usize;
        println!("criterion {}: {} - {name} [{:.1} s]: {}", i + 1, if outcome.pass { "PASS" } else { "FAIL" }, t0.elapsed().as_secs_f64(), outcome.detail);
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
