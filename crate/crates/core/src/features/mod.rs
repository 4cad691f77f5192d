//! Acoustic low-level descriptors and their per-recording functionals.

mod extract;
mod harmonics;
mod mel;
mod pitch;
mod spectral;
mod voice_quality;

pub use extract::{analyze, extract_feature_vector, Feature, FeatureAnalysis, FeatureConfig, FeatureFlag, FeatureVector};
pub use harmonics::{harmonic_amplitude, log_rel_f0_h1_h2};
pub use mel::{cepstrum_from_energies, hz_to_mel, mel_to_hz, mfcc, MelConfig, MelFilterbank};
pub use pitch::{detect_f0, f0_semitones, f0_trend, F0Contour, NsdfAnalyzer, PitchEstimate, F0_SEARCH_FLOOR_HZ};
pub use spectral::{alpha_ratio, spectral_slope_band, AlphaRatio, ALPHA_HIGH_BAND, ALPHA_LOW_BAND};
pub use voice_quality::{jitter_shimmer_hnr, VoiceQuality};
