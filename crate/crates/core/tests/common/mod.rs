//! Shared fixtures for the integration tests.
#![allow(dead_code)]

use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use voxrisk::audio::{write_wav, WavEncoding};
use voxrisk::features::{Feature, FeatureVector};
use voxrisk::pipeline::{CohortRow, CohortTable, RiskLabel};
use voxrisk::stats::{fit_ols, DesignMatrix};
use voxrisk::synth::{self, VoiceParams};

/// Target group difference for one feature: covariate-adjusted means and
/// partial eta squared, realised exactly.
#[derive(Debug, Clone, Copy)]
pub struct Effect {
    pub feature: Feature,
    pub low: f64,
    pub high: f64,
    pub eta_sq: f64,
    /// Loading on the shared latent factor (sign included).
    pub loading: f64,
}

/// Target adjusted group means, effect sizes and directions of the voice markers.
pub fn marker_effects(latent: f64) -> Vec<Effect> {
    let e = |feature, low, high, eta_sq, sign: f64| Effect { feature, low, high, eta_sq, loading: sign * latent };
    vec![
        e(Feature::F0SemitoneMean, 33.77, 32.26, 0.022, -1.0),
        e(Feature::Mfcc2Mean, 8.19, 10.44, 0.030, 1.0),
        e(Feature::Mfcc4Mean, -2.85, -0.6, 0.015, 1.0),
        e(Feature::LogRelF0H1H2Mean, 7.38, 6.16, 0.013, -1.0),
        e(Feature::SlopeV0_500Mean, 0.025, 0.020, 0.012, -1.0),
        e(Feature::AlphaRatioUvMean, -11.51, -12.00, 0.015, -1.0),
        e(Feature::F0HzMean, 195.76, 183.91, 0.023, -1.0),
    ]
}

pub struct CohortParams {
    pub n: usize,
    pub n_high: usize,
    /// (level, count) pairs; counts must sum to `n`.
    pub gender: Vec<(&'static str, usize)>,
    pub countries: Vec<&'static str>,
    pub effects: Vec<Effect>,
    /// Shared variance between the two F0 features beyond the latent factor.
    pub pitch_coupling: f64,
    pub seed: u64,
}

impl CohortParams {
    /// 363 participants: 84.0% female, 14.1% male, 1.9% other; four countries.
    pub fn reference_cohort(n_high: usize, latent: f64, seed: u64) -> Self {
        Self {
            n: 363,
            n_high,
            gender: vec![("female", 305), ("male", 51), ("other", 7)],
            countries: vec!["BE", "DE", "ES", "GB"],
            effects: marker_effects(latent),
            pitch_coupling: 0.95,
            seed,
        }
    }

    pub fn null(n: usize, seed: u64) -> Self {
        let f = n * 84 / 100;
        let m = n * 14 / 100;
        Self {
            n,
            n_high: n * 2 / 5,
            gender: vec![("female", f), ("male", m), ("other", n - f - m)],
            countries: vec!["BE", "DE", "ES", "GB"],
            effects: Vec::new(),
            pitch_coupling: 0.0,
            seed,
        }
    }
}

fn design(high: &[bool], gad: &[f64], wem: &[f64], gender: &[String], country: &[String], with_group: bool) -> DesignMatrix<f64> {
    let mut b = DesignMatrix::builder(high.len()).intercept();
    if with_group {
        b = b.indicator("group[high]", high);
    }
    b.continuous("gad7", gad).continuous("wemwbs", wem).categorical("gender", gender).categorical("country", country).build().unwrap()
}

/// Builds a cohort table directly at the feature level.
pub fn synthetic_cohort(params: &CohortParams) -> CohortTable {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let z = Normal::new(0.0, 1.0).unwrap();
    let n = params.n;

    let mut gender: Vec<String> = params.gender.iter().flat_map(|&(g, c)| std::iter::repeat_n(g.to_string(), c)).collect();
    assert_eq!(gender.len(), n);
    gender.shuffle(&mut rng);
    let country: Vec<String> = (0..n).map(|i| params.countries[i % params.countries.len()].to_string()).collect();
    let mut high = vec![false; n];
    high[..params.n_high].iter_mut().for_each(|h| *h = true);
    high.shuffle(&mut rng);
    let phq: Vec<u32> = high.iter().map(|&h| if h { rng.random_range(10..=24) } else { rng.random_range(0..=9) }).collect();
    let gad: Vec<f64> = phq.iter().map(|&p| (2.0 + 0.6 * p as f64 + 3.0 * z.sample(&mut rng)).round().clamp(0.0, 21.0)).collect();
    let wem: Vec<f64> = phq.iter().map(|&p| (55.0 - 0.9 * p as f64 + 7.0 * z.sample(&mut rng)).round().clamp(14.0, 70.0)).collect();

    let full = design(&high, &gad, &wem, &gender, &country, true);
    let reduced = design(&high, &gad, &wem, &gender, &country, false);
    let g: Vec<f64> = high.iter().map(|&h| if h { 1.0 } else { 0.0 }).collect();
    // variance of the group indicator left after the covariates
    let g_resid_ss = fit_ols(&reduced, &g).unwrap().rss;

    let latent: Vec<f64> = (0..n).map(|_| z.sample(&mut rng)).collect();
    let pitch: Vec<f64> = (0..n).map(|_| z.sample(&mut rng)).collect();
    let mut values: Vec<(Feature, Vec<f64>)> = Vec::new();
    for e in &params.effects {
        let is_pitch = matches!(e.feature, Feature::F0HzMean | Feature::F0SemitoneMean);
        let raw: Vec<f64> = (0..n)
            .map(|i| {
                let shared = e.loading * latent[i];
                let own = if is_pitch {
                    let c = params.pitch_coupling;
                    c * pitch[i] + (1.0 - c * c).sqrt() * z.sample(&mut rng)
                } else {
                    z.sample(&mut rng)
                };
                shared + (1.0 - e.loading * e.loading).sqrt() * own
            })
            .collect();
        let resid = fit_ols(&full, &raw).unwrap().residuals;
        let delta = e.high - e.low;
        let ss_group = delta * delta * g_resid_ss;
        let target_rss = ss_group * (1.0 - e.eta_sq) / e.eta_sq;
        let scale = (target_rss / resid.iter().map(|v| v * v).sum::<f64>()).sqrt();
        values.push((e.feature, (0..n).map(|i| e.low + delta * g[i] + scale * resid[i]).collect()));
    }
    // remaining acoustic features carry no group effect
    for f in Feature::ACOUSTIC {
        if values.iter().any(|(g, _)| *g == f) {
            continue;
        }
        let (m, sd) = null_moments(f);
        values.push((f, (0..n).map(|_| m + sd * z.sample(&mut rng)).collect()));
    }

    let rows = (0..n)
        .map(|i| {
            let mut fv = FeatureVector::default();
            for (f, v) in &values {
                fv.set(*f, Some(v[i]));
            }
            CohortRow {
                participant_id: format!("p{i:03}"),
                label: RiskLabel::from_phq8(phq[i]),
                phq8: phq[i],
                gad7: gad[i] as u32,
                wemwbs: wem[i] as u32,
                gender: gender[i].clone(),
                country: country[i].clone(),
                features: fv,
                intensities: [None; 12],
                n_recordings: 1,
            }
        })
        .collect();
    CohortTable::new(rows)
}

fn null_moments(f: Feature) -> (f64, f64) {
    match f {
        Feature::F0HzMean => (190.0, 40.0),
        Feature::F0SemitoneMean => (33.5, 3.5),
        Feature::Mfcc1Mean => (20.0, 6.0),
        Feature::Mfcc2Mean => (9.0, 6.0),
        Feature::Mfcc3Mean => (1.0, 5.0),
        Feature::Mfcc4Mean => (-2.0, 8.0),
        Feature::LogRelF0H1H2Mean => (7.0, 4.5),
        Feature::SlopeV0_500Mean => (0.023, 0.018),
        Feature::SlopeV500_1500Mean => (-0.01, 0.006),
        Feature::AlphaRatioUvMean => (-11.7, 1.6),
        Feature::JitterLocalMean => (0.02, 0.008),
        Feature::ShimmerLocalMean => (0.1, 0.03),
        Feature::HnrMean => (8.0, 3.0),
        _ => (1.0, 0.1),
    }
}

/// Writes synthetic recordings and a participant manifest (14 participants,
/// one or two recordings each, both risk groups) into `dir`.
pub fn manifest_fixture(dir: &Path) -> PathBuf {
    let mut rng = ChaCha8Rng::seed_from_u64(61);
    let mut csv = String::from(
        "participant_id,gender,country,phq8,gad7,wemwbs,int_anxiety,int_sadness,int_shame,int_amusement,int_joy,int_pleasure,int_7,int_8,int_9,int_10,int_11,int_12,audio_path\n",
    );
    let mut k = 0;
    for p in 0..14 {
        let phq = if p % 3 == 0 { rng.random_range(10..=20) } else { rng.random_range(0..=9) };
        let gender = ["female", "male"][p % 2];
        let country = ["DE", "GB", "ES"][(p / 2) % 3];
        let gad = (phq / 2 + rng.random_range(0..4)).min(21);
        let wem = 50 - phq + rng.random_range(0..6);
        let params = VoiceParams::random(&mut rng);
        for _ in 0..(1 + p % 2) {
            let name = format!("rec{k:02}.wav");
            let buf = synth::utterance(&params, 2.5, 16000, 500 + k as u64);
            write_wav(dir.join(&name), &buf, WavEncoding::Pcm16).unwrap();
            let ints: Vec<String> = (0..6).map(|_| rng.random_range(0..=7).to_string()).collect();
            csv += &format!("p{p},{gender},{country},{phq},{gad},{wem},{},,,,,,,{name}\n", ints.join(","));
            k += 1;
        }
    }
    let path = dir.join("manifest.csv");
    std::fs::write(&path, csv).unwrap();
    path
}
