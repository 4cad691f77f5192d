use std::fmt;

use serde::{Deserialize, Serialize};

use super::harmonics::log_rel_f0_h1_h2;
use super::mel::{MelConfig, MelFilterbank};
use super::pitch::{detect_f0, f0_semitones, f0_trend, F0Contour};
use super::spectral::{alpha_ratio, spectral_slope_band};
use super::voice_quality::jitter_shimmer_hnr;
use crate::audio::{frame_signal, AudioBuffer, SpectrumAnalyzer, WindowKind};
use crate::error::{Error, Result};
use crate::scalar::{mean, Real};

/// Analysis settings. Spectral descriptors use short frames, F0 and the
/// harmonic levels use longer pitch frames at the same hop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeatureConfig {
    pub frame_s: f64,
    pub hop_s: f64,
    pub window: WindowKind,
    pub pitch_frame_s: f64,
    pub f0_min: f64,
    pub f0_max: f64,
    pub voicing_threshold: f64,
    pub mel: MelConfig,
    /// Spectral FFT size; defaults to the next power of two of the frame.
    pub fft_size: Option<usize>,
    /// FFT size for harmonic levels; defaults to 4x the pitch frame, rounded up.
    pub harmonic_fft_size: Option<usize>,
    pub min_duration_s: f64,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self {
            frame_s: 0.025,
            hop_s: 0.010,
            window: WindowKind::Hann,
            pitch_frame_s: 0.060,
            f0_min: 55.0,
            f0_max: 650.0,
            voicing_threshold: 0.45,
            mel: MelConfig::default(),
            fft_size: None,
            harmonic_fft_size: None,
            min_duration_s: 1.0,
        }
    }
}

/// Canonical per-recording functionals, in output column order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Feature {
    F0HzMean,
    F0SemitoneMean,
    Mfcc1Mean,
    Mfcc2Mean,
    Mfcc3Mean,
    Mfcc4Mean,
    LogRelF0H1H2Mean,
    SlopeV0_500Mean,
    SlopeV500_1500Mean,
    AlphaRatioUvMean,
    JitterLocalMean,
    ShimmerLocalMean,
    HnrMean,
    VoicedFraction,
    DurationS,
}

impl Feature {
    pub const ALL: [Feature; 15] = [
        Feature::F0HzMean,
        Feature::F0SemitoneMean,
        Feature::Mfcc1Mean,
        Feature::Mfcc2Mean,
        Feature::Mfcc3Mean,
        Feature::Mfcc4Mean,
        Feature::LogRelF0H1H2Mean,
        Feature::SlopeV0_500Mean,
        Feature::SlopeV500_1500Mean,
        Feature::AlphaRatioUvMean,
        Feature::JitterLocalMean,
        Feature::ShimmerLocalMean,
        Feature::HnrMean,
        Feature::VoicedFraction,
        Feature::DurationS,
    ];

    /// Acoustic parameters entered into group comparisons (excludes bookkeeping).
    pub const ACOUSTIC: [Feature; 13] = [
        Feature::F0HzMean,
        Feature::F0SemitoneMean,
        Feature::Mfcc1Mean,
        Feature::Mfcc2Mean,
        Feature::Mfcc3Mean,
        Feature::Mfcc4Mean,
        Feature::LogRelF0H1H2Mean,
        Feature::SlopeV0_500Mean,
        Feature::SlopeV500_1500Mean,
        Feature::AlphaRatioUvMean,
        Feature::JitterLocalMean,
        Feature::ShimmerLocalMean,
        Feature::HnrMean,
    ];

    /// The descriptors with reported risk-group differences.
    pub const RISK_MARKERS: [Feature; 7] = [
        Feature::F0SemitoneMean,
        Feature::Mfcc2Mean,
        Feature::Mfcc4Mean,
        Feature::LogRelF0H1H2Mean,
        Feature::SlopeV0_500Mean,
        Feature::AlphaRatioUvMean,
        Feature::F0HzMean,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Feature::F0HzMean => "f0_hz_mean",
            Feature::F0SemitoneMean => "f0_semitone_mean",
            Feature::Mfcc1Mean => "mfcc1_mean",
            Feature::Mfcc2Mean => "mfcc2_mean",
            Feature::Mfcc3Mean => "mfcc3_mean",
            Feature::Mfcc4Mean => "mfcc4_mean",
            Feature::LogRelF0H1H2Mean => "logRelF0_H1_H2_mean",
            Feature::SlopeV0_500Mean => "slope_v0_500_mean",
            Feature::SlopeV500_1500Mean => "slope_v500_1500_mean",
            Feature::AlphaRatioUvMean => "alpha_ratio_uv_mean",
            Feature::JitterLocalMean => "jitter_local_mean",
            Feature::ShimmerLocalMean => "shimmer_local_mean",
            Feature::HnrMean => "hnr_mean",
            Feature::VoicedFraction => "voiced_fraction",
            Feature::DurationS => "duration_s",
        }
    }

    pub fn unit(self) -> &'static str {
        match self {
            Feature::F0HzMean => "Hz",
            Feature::F0SemitoneMean => "semitones re 27.5 Hz",
            Feature::Mfcc1Mean | Feature::Mfcc2Mean | Feature::Mfcc3Mean | Feature::Mfcc4Mean => "unitless",
            Feature::LogRelF0H1H2Mean | Feature::AlphaRatioUvMean | Feature::HnrMean => "dB",
            Feature::SlopeV0_500Mean | Feature::SlopeV500_1500Mean => "dB/Hz",
            Feature::JitterLocalMean | Feature::ShimmerLocalMean | Feature::VoicedFraction => "ratio",
            Feature::DurationS => "s",
        }
    }

    pub fn from_name(name: &str) -> Option<Feature> {
        Feature::ALL.into_iter().find(|f| f.name() == name)
    }
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Why a functional is absent or was computed from fewer frames.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "flag", rename_all = "snake_case")]
pub enum FeatureFlag {
    NoVoicedFrames,
    NoUnvoicedFrames,
    TooFewPeriods,
    HarmonicsUnresolved { frames: usize },
    AlphaBandEmpty { frames: usize },
}

impl fmt::Display for FeatureFlag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FeatureFlag::NoVoicedFrames => f.write_str("no voiced frames: voiced-frame features absent"),
            FeatureFlag::NoUnvoicedFrames => f.write_str("no usable unvoiced frames: alpha ratio absent"),
            FeatureFlag::TooFewPeriods => f.write_str("fewer than 3 glottal periods: jitter/shimmer absent"),
            FeatureFlag::HarmonicsUnresolved { frames } => write!(f, "{frames} voiced frame(s) with unresolvable harmonics skipped"),
            FeatureFlag::AlphaBandEmpty { frames } => write!(f, "{frames} unvoiced frame(s) with an empty alpha-ratio band skipped"),
        }
    }
}

/// Named functionals of one recording; absent values are `None`, never 0.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector<T> {
    values: [Option<T>; Feature::ALL.len()],
    pub flags: Vec<FeatureFlag>,
}

impl<T: Real> Default for FeatureVector<T> {
    fn default() -> Self {
        Self { values: [None; Feature::ALL.len()], flags: Vec::new() }
    }
}

impl<T: Real> FeatureVector<T> {
    pub fn get(&self, f: Feature) -> Option<T> {
        self.values[f.index()]
    }

    pub fn set(&mut self, f: Feature, v: Option<T>) {
        self.values[f.index()] = v.filter(|x| x.is_finite());
    }

    pub fn iter(&self) -> impl Iterator<Item = (Feature, Option<T>)> + '_ {
        Feature::ALL.into_iter().map(move |f| (f, self.values[f.index()]))
    }

    /// Element-wise mean over the vectors where each feature is present.
    pub fn average(vectors: &[FeatureVector<T>]) -> FeatureVector<T> {
        let mut out = FeatureVector::default();
        for f in Feature::ALL {
            out.set(f, crate::scalar::mean_present(vectors.iter().map(|v| v.get(f))));
        }
        out
    }
}

/// Feature vector plus intermediate products useful for diagnostics.
#[derive(Debug, Clone)]
pub struct FeatureAnalysis<T> {
    pub vector: FeatureVector<T>,
    pub contour: F0Contour<T>,
    /// Whole-utterance F0 linear trend, Hz/s.
    pub f0_trend: Option<T>,
}

fn pow2_at_least(n: usize) -> usize {
    n.max(1).next_power_of_two()
}

/// Runs every descriptor over `buffer` and summarizes each by its mean.
pub fn analyze<T: Real>(buffer: &AudioBuffer<T>, config: &FeatureConfig) -> Result<FeatureAnalysis<T>> {
    buffer.require_band_rate()?;
    if buffer.duration_s() < config.min_duration_s {
        return Err(Error::invalid(format!(
            "recording too short: {:.3} s < {:.3} s",
            buffer.duration_s(),
            config.min_duration_s
        )));
    }
    let sr = buffer.sample_rate();
    let pitch_rect = frame_signal(buffer, config.pitch_frame_s, config.hop_s, WindowKind::Rectangular)?;
    let contour = detect_f0(&pitch_rect, config.f0_min, config.f0_max, config.voicing_threshold)?;
    drop(pitch_rect);

    let mut fv = FeatureVector::default();
    fv.set(Feature::DurationS, Some(T::lit(buffer.duration_s())));
    fv.set(Feature::VoicedFraction, Some(contour.voiced_fraction()));

    // F0 and harmonic levels on Gaussian-windowed pitch frames
    let voiced_f0: Vec<T> = contour.voiced_f0().collect();
    if voiced_f0.is_empty() {
        fv.flags.push(FeatureFlag::NoVoicedFrames);
    } else {
        fv.set(Feature::F0HzMean, mean(&voiced_f0));
        let st: Vec<T> = voiced_f0.iter().map(|&f| f0_semitones(f)).collect::<Result<_>>()?;
        fv.set(Feature::F0SemitoneMean, mean(&st));

        let pitch_gauss = frame_signal(buffer, config.pitch_frame_s, config.hop_s, WindowKind::Gaussian)?;
        let hsize = config.harmonic_fft_size.unwrap_or_else(|| pow2_at_least(4 * pitch_gauss.frame_len()));
        let mut analyzer = SpectrumAnalyzer::new(hsize)?;
        let reference = pitch_gauss.window_sum() / T::lit(2.0);
        let mut rel = Vec::new();
        let mut unresolved = 0usize;
        for (i, frame) in pitch_gauss.frames().iter().enumerate() {
            if !contour.is_voiced(i) {
                continue;
            }
            let spec = analyzer.analyze(frame, sr)?.with_reference(reference);
            match log_rel_f0_h1_h2(&spec, contour.f0()[i]) {
                Ok(v) => rel.push(v),
                Err(_) => unresolved += 1,
            }
        }
        if unresolved > 0 {
            fv.flags.push(FeatureFlag::HarmonicsUnresolved { frames: unresolved });
        }
        fv.set(Feature::LogRelF0H1H2Mean, mean(&rel));
    }

    // spectral descriptors on short frames, voicing taken from the nearest pitch frame
    let frames = frame_signal(buffer, config.frame_s, config.hop_s, config.window)?;
    let size = config.fft_size.unwrap_or_else(|| pow2_at_least(frames.frame_len()));
    let mut analyzer = SpectrumAnalyzer::new(size)?;
    let bank = MelFilterbank::new(&config.mel, size, sr)?;
    let reference = frames.window_sum() / T::lit(2.0);
    let offset = ((config.pitch_frame_s - config.frame_s) / (2.0 * config.hop_s)).round() as isize;
    let last_pitch = contour.len() as isize - 1;

    let n_cc = config.mel.n_coefficients.min(4);
    let mut cc_sums = vec![Vec::new(); n_cc];
    let mut slope_lo = Vec::new();
    let mut slope_mid = Vec::new();
    let mut alpha = Vec::new();
    let mut empty_band = 0usize;
    for (i, frame) in frames.frames().iter().enumerate() {
        let spec = analyzer.analyze(frame, sr)?.with_reference(reference);
        if spec.magnitudes().iter().all(|m| *m == T::zero()) {
            continue;
        }
        let cc = bank.mfcc(&spec)?;
        for (acc, c) in cc_sums.iter_mut().zip(cc) {
            acc.push(c);
        }
        let j = (i as isize - offset).clamp(0, last_pitch) as usize;
        if contour.is_voiced(j) {
            slope_lo.push(spectral_slope_band(&spec, 0.0, 500.0)?);
            slope_mid.push(spectral_slope_band(&spec, 500.0, 1500.0)?);
        } else {
            match alpha_ratio(&spec) {
                Ok(a) if !a.band_empty => alpha.push(a.value),
                Ok(_) | Err(_) => empty_band += 1,
            }
        }
    }
    let mfcc_features = [Feature::Mfcc1Mean, Feature::Mfcc2Mean, Feature::Mfcc3Mean, Feature::Mfcc4Mean];
    for (f, vals) in mfcc_features.iter().zip(&cc_sums) {
        fv.set(*f, mean(vals));
    }
    fv.set(Feature::SlopeV0_500Mean, mean(&slope_lo));
    fv.set(Feature::SlopeV500_1500Mean, mean(&slope_mid));
    fv.set(Feature::AlphaRatioUvMean, mean(&alpha));
    if empty_band > 0 {
        fv.flags.push(FeatureFlag::AlphaBandEmpty { frames: empty_band });
    }
    if alpha.is_empty() {
        fv.flags.push(FeatureFlag::NoUnvoicedFrames);
    }

    let vq = jitter_shimmer_hnr(buffer, &contour);
    fv.set(Feature::JitterLocalMean, vq.jitter_local);
    fv.set(Feature::ShimmerLocalMean, vq.shimmer_local);
    fv.set(Feature::HnrMean, vq.hnr_db);
    if vq.jitter_local.is_none() && !voiced_f0.is_empty() {
        fv.flags.push(FeatureFlag::TooFewPeriods);
    }

    let f0_trend = f0_trend(&contour);
    Ok(FeatureAnalysis { vector: fv, contour, f0_trend })
}

/// Canonical feature vector of one recording.
pub fn extract_feature_vector<T: Real>(buffer: &AudioBuffer<T>, config: &FeatureConfig) -> Result<FeatureVector<T>> {
    analyze(buffer, config).map(|a| a.vector)
}
