//! Audio buffers, WAV I/O, framing and magnitude spectra.

mod frames;
mod spectrum;
mod wav;

pub use frames::{frame_signal, window, FrameSequence, WindowKind};
pub use spectrum::{magnitude_spectrum, Spectrum, SpectrumAnalyzer, DB_FLOOR};
pub use wav::{read_wav, read_wav_with_encoding, write_wav, WavEncoding};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Lowest sample rate whose Nyquist frequency still covers the 5 kHz upper
/// edge of the alpha-ratio band.
pub const MIN_BAND_SAMPLE_RATE: u32 = 11_025;

/// Mono PCM samples in [-1, 1] at a fixed sample rate.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioBuffer<T> {
    samples: Vec<T>,
    sample_rate: u32,
}

impl<T: Real> AudioBuffer<T> {
    /// Validates that every sample is finite and within [-1, 1].
    pub fn new(samples: Vec<T>, sample_rate: u32) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::invalid("sample rate must be positive"));
        }
        if let Some(i) = samples.iter().position(|s| !s.is_finite()) {
            return Err(Error::invalid(format!("non-finite sample at index {i}")));
        }
        if let Some(i) = samples.iter().position(|s| s.abs() > T::one()) {
            log::warn!("rejecting clipped input: |sample| > 1 at index {i}");
            return Err(Error::invalid(format!(
                "clipped input: sample {i} has magnitude {} > 1",
                samples[i].abs()
            )));
        }
        Ok(Self { samples, sample_rate })
    }

    pub fn samples(&self) -> &[T] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<T> {
        self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / f64::from(self.sample_rate)
    }

    pub fn nyquist(&self) -> f64 {
        f64::from(self.sample_rate) / 2.0
    }

    pub fn rms(&self) -> T {
        if self.samples.is_empty() {
            return T::zero();
        }
        let e: T = self.samples.iter().map(|&s| s * s).sum();
        (e / T::from_usize_lossy(self.samples.len())).sqrt()
    }

    /// Multiplies every sample by `gain`; fails if the result clips.
    pub fn scaled(&self, gain: T) -> Result<Self> {
        Self::new(self.samples.iter().map(|&s| s * gain).collect(), self.sample_rate)
    }

    /// Errors unless the rate is high enough for band features reaching 5 kHz.
    pub fn require_band_rate(&self) -> Result<()> {
        if self.sample_rate < MIN_BAND_SAMPLE_RATE {
            return Err(Error::invalid(format!(
                "sample rate {} Hz is below {MIN_BAND_SAMPLE_RATE} Hz: alphaRatio needs the 1-5 kHz band below Nyquist",
                self.sample_rate
            )));
        }
        Ok(())
    }

    /// Converts to another scalar type.
    pub fn cast<U: Real>(&self) -> AudioBuffer<U> {
        AudioBuffer {
            samples: self.samples.iter().map(|s| U::lit(s.to_f64_lossy())).collect(),
            sample_rate: self.sample_rate,
        }
    }
}
