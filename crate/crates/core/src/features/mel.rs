//! Mel-frequency cepstral coefficients.
//!
//! Triangular filters on the mel scale `2595 log10(1 + f/700)`, natural log of
//! filter energies floored at -120 dB, orthonormal DCT-II. Coefficient 0 is
//! dropped.

use serde::{Deserialize, Serialize};

use crate::audio::{Spectrum, DB_FLOOR};
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MelConfig {
    pub n_filters: usize,
    pub n_coefficients: usize,
    pub fmin: f64,
    /// Upper edge; `None` means `min(8000, Nyquist)`.
    pub fmax: Option<f64>,
}

impl Default for MelConfig {
    fn default() -> Self {
        Self { n_filters: 26, n_coefficients: 4, fmin: 20.0, fmax: None }
    }
}

impl MelConfig {
    pub fn resolved_fmax(&self, sample_rate: u32) -> f64 {
        self.fmax.unwrap_or_else(|| (f64::from(sample_rate) / 2.0).min(8000.0))
    }
}

pub fn hz_to_mel(f: f64) -> f64 {
    2595.0 * (1.0 + f / 700.0).log10()
}

pub fn mel_to_hz(m: f64) -> f64 {
    700.0 * (10f64.powf(m / 2595.0) - 1.0)
}

/// Filterbank weights precomputed for one FFT size and sample rate.
#[derive(Debug, Clone)]
pub struct MelFilterbank<T> {
    /// Per filter: first bin and weights.
    filters: Vec<(usize, Vec<T>)>,
    n_coefficients: usize,
    fft_size: usize,
    sample_rate: u32,
}

impl<T: Real> MelFilterbank<T> {
    pub fn new(config: &MelConfig, fft_size: usize, sample_rate: u32) -> Result<Self> {
        let nyq = f64::from(sample_rate) / 2.0;
        let fmax = config.resolved_fmax(sample_rate);
        if fmax > nyq + 1e-9 {
            return Err(Error::invalid(format!("mel fmax {fmax} Hz exceeds Nyquist {nyq} Hz")));
        }
        if !(config.fmin >= 0.0 && config.fmin < fmax) {
            return Err(Error::invalid(format!("mel fmin {} must be below fmax {fmax}", config.fmin)));
        }
        if config.n_filters == 0 || config.n_coefficients == 0 || config.n_coefficients >= config.n_filters {
            return Err(Error::invalid("need 0 < n_coefficients < n_filters"));
        }
        let (mlo, mhi) = (hz_to_mel(config.fmin), hz_to_mel(fmax));
        let edges: Vec<f64> = (0..config.n_filters + 2)
            .map(|i| mel_to_hz(mlo + (mhi - mlo) * i as f64 / (config.n_filters + 1) as f64))
            .collect();
        let res = f64::from(sample_rate) / fft_size as f64;
        let n_bins = fft_size / 2 + 1;
        let filters = edges
            .windows(3)
            .map(|e| {
                let (lo, mid, hi) = (e[0], e[1], e[2]);
                let first = (lo / res).ceil() as usize;
                let last = ((hi / res).floor() as usize).min(n_bins - 1);
                let weights = (first..=last)
                    .map(|k| {
                        let f = k as f64 * res;
                        let w = if f <= mid { (f - lo) / (mid - lo) } else { (hi - f) / (hi - mid) };
                        T::lit(w.max(0.0))
                    })
                    .collect();
                (first, weights)
            })
            .collect();
        Ok(Self { filters, n_coefficients: config.n_coefficients, fft_size, sample_rate })
    }

    pub fn n_filters(&self) -> usize {
        self.filters.len()
    }

    /// Filter energies from the spectrum's relative power.
    pub fn energies(&self, spectrum: &Spectrum<T>) -> Result<Vec<T>> {
        if spectrum.fft_size() != self.fft_size || spectrum.sample_rate() != self.sample_rate {
            return Err(Error::invalid("spectrum does not match the filterbank geometry"));
        }
        Ok(self
            .filters
            .iter()
            .map(|(first, w)| w.iter().enumerate().map(|(j, &wj)| wj * spectrum.power(first + j)).sum())
            .collect())
    }

    /// Coefficients 1..=n_coefficients.
    pub fn mfcc(&self, spectrum: &Spectrum<T>) -> Result<Vec<T>> {
        Ok(cepstrum_from_energies(&self.energies(spectrum)?, self.n_coefficients))
    }
}

/// Log-compresses filter energies and applies the orthonormal DCT-II,
/// returning coefficients `1..=n_coefficients`.
pub fn cepstrum_from_energies<T: Real>(energies: &[T], n_coefficients: usize) -> Vec<T> {
    let floor = T::lit(10f64.powf(DB_FLOOR / 10.0));
    let logs: Vec<T> = energies.iter().map(|&e| e.max(floor).ln()).collect();
    let n = logs.len();
    let scale = T::lit((2.0 / n as f64).sqrt());
    (1..=n_coefficients)
        .map(|k| {
            scale
                * logs
                    .iter()
                    .enumerate()
                    .map(|(i, &l)| l * T::lit((std::f64::consts::PI * k as f64 * (i as f64 + 0.5) / n as f64).cos()))
                    .sum::<T>()
        })
        .collect()
}

/// One-shot MFCC of a spectrum.
pub fn mfcc<T: Real>(spectrum: &Spectrum<T>, config: &MelConfig) -> Result<Vec<T>> {
    MelFilterbank::new(config, spectrum.fft_size(), spectrum.sample_rate())?.mfcc(spectrum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::audio::magnitude_spectrum;

    #[test]
    fn mel_scale_round_trip() {
        for f in [0.0, 100.0, 700.0, 1000.0, 8000.0] {
            assert!((mel_to_hz(hz_to_mel(f)) - f).abs() < 1e-9);
        }
        assert!((hz_to_mel(1000.0) - 999.985).abs() < 0.01);
    }

    #[test]
    fn equal_energies_give_zero_cepstrum() {
        let c = cepstrum_from_energies(&[0.37f64; 26], 4);
        assert!(c.iter().all(|v| v.abs() < 1e-9), "{c:?}");
    }

    #[test]
    fn fmax_above_nyquist_is_rejected() {
        let cfg = MelConfig { fmax: Some(9000.0), ..Default::default() };
        assert!(MelFilterbank::<f64>::new(&cfg, 512, 16000).is_err());
        assert!(MelFilterbank::<f64>::new(&MelConfig::default(), 512, 16000).is_ok());
        let bad = MelConfig { n_coefficients: 30, ..Default::default() };
        assert!(MelFilterbank::<f64>::new(&bad, 512, 16000).is_err());
    }

    #[test]
    fn gain_only_moves_c0() {
        let x: Vec<f64> = (0..400).map(|i| ((i * 37 % 101) as f64 / 101.0 - 0.5) * 0.05).collect();
        let y: Vec<f64> = x.iter().map(|v| v * 10.0).collect();
        let a = mfcc(&magnitude_spectrum(&x, 512, 16000).unwrap(), &MelConfig::default()).unwrap();
        let b = mfcc(&magnitude_spectrum(&y, 512, 16000).unwrap(), &MelConfig::default()).unwrap();
        for (p, q) in a.iter().zip(&b) {
            assert!((p - q).abs() < 1e-6);
        }
    }

    /// Step-by-step oracle: explicit triangle evaluation per bin, explicit
    /// log and an explicit DCT matrix, written without the filterbank type.
    #[test]
    fn matches_hand_built_oracle() {
        let sr = 16000u32;
        let n = 512usize;
        // vowel-like envelope: three resonance bumps on a falling tilt
        let mags: Vec<f64> = (0..=n / 2)
            .map(|k| {
                let f = k as f64 * 16000.0 / 512.0;
                let bump = |c: f64, w: f64| (-((f - c) / w).powi(2)).exp();
                0.05 * (1.0 / (1.0 + f / 500.0)) * (0.2 + bump(700.0, 120.0) + 0.6 * bump(1200.0, 150.0) + 0.3 * bump(2500.0, 200.0))
            })
            .collect();
        let spec = Spectrum::from_magnitudes(mags.clone(), n, sr).unwrap();
        let got = mfcc(&spec, &MelConfig::default()).unwrap();

        let mel = |f: f64| 2595.0 * (1.0 + f / 700.0).log10();
        let imel = |m: f64| 700.0 * (10f64.powf(m / 2595.0) - 1.0);
        let pts: Vec<f64> = (0..28).map(|i| imel(mel(20.0) + (mel(8000.0) - mel(20.0)) * i as f64 / 27.0)).collect();
        let mut logs = [0.0f64; 26];
        for m in 0..26 {
            let mut e = 0.0;
            for (k, mag) in mags.iter().enumerate() {
                let f = k as f64 * 31.25;
                let w = if f >= pts[m] && f <= pts[m + 1] {
                    (f - pts[m]) / (pts[m + 1] - pts[m])
                } else if f > pts[m + 1] && f <= pts[m + 2] {
                    (pts[m + 2] - f) / (pts[m + 2] - pts[m + 1])
                } else {
                    0.0
                };
                e += w * mag * mag;
            }
            logs[m] = e.max(1e-12).ln();
        }
        for c in 1..=4 {
            let mut v = 0.0;
            for (i, l) in logs.iter().enumerate() {
                v += l * (std::f64::consts::PI * c as f64 * (i as f64 + 0.5) / 26.0).cos();
            }
            v *= (2.0f64 / 26.0).sqrt();
            assert!((v - got[c - 1]).abs() < 1e-8, "c{c}: {v} vs {}", got[c - 1]);
        }
    }
}
