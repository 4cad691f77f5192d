use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Floor applied to every dB conversion.
pub const DB_FLOOR: f64 = -120.0;

/// One-sided magnitude spectrum, `fft_size / 2 + 1` bins.
#[derive(Debug, Clone)]
pub struct Spectrum<T> {
    magnitudes: Vec<T>,
    fft_size: usize,
    sample_rate: u32,
    reference: T,
}

impl<T: Real> Spectrum<T> {
    /// Builds a spectrum from precomputed magnitudes (e.g. a synthetic test spectrum).
    pub fn from_magnitudes(magnitudes: Vec<T>, fft_size: usize, sample_rate: u32) -> Result<Self> {
        if magnitudes.len() != fft_size / 2 + 1 {
            return Err(Error::invalid(format!(
                "expected {} bins for fft size {fft_size}, got {}",
                fft_size / 2 + 1,
                magnitudes.len()
            )));
        }
        if magnitudes.iter().any(|m| !(m.is_finite() && *m >= T::zero())) {
            return Err(Error::invalid("magnitudes must be finite and non-negative"));
        }
        Ok(Self { magnitudes, fft_size, sample_rate, reference: T::one() })
    }

    /// Sets the linear magnitude that maps to 0 dB.
    pub fn with_reference(mut self, reference: T) -> Self {
        self.reference = reference;
        self
    }

    pub fn magnitudes(&self) -> &[T] {
        &self.magnitudes
    }

    pub fn len(&self) -> usize {
        self.magnitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.magnitudes.is_empty()
    }

    pub fn fft_size(&self) -> usize {
        self.fft_size
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn reference(&self) -> T {
        self.reference
    }

    pub fn nyquist(&self) -> f64 {
        f64::from(self.sample_rate) / 2.0
    }

    /// Hz per bin.
    pub fn resolution(&self) -> f64 {
        f64::from(self.sample_rate) / self.fft_size as f64
    }

    pub fn bin_frequency(&self, k: usize) -> f64 {
        k as f64 * self.resolution()
    }

    /// Magnitude relative to the reference level.
    pub fn relative(&self, k: usize) -> T {
        self.magnitudes[k] / self.reference
    }

    /// Relative power (squared relative magnitude).
    pub fn power(&self, k: usize) -> T {
        let r = self.relative(k);
        r * r
    }

    /// `20 log10(magnitude / reference)`, floored at [`DB_FLOOR`].
    pub fn db(&self, k: usize) -> T {
        amplitude_db(self.relative(k))
    }

    /// Inclusive bin range covering `[lo_hz, hi_hz]`, clipped to the spectrum.
    pub fn bins_in(&self, lo_hz: f64, hi_hz: f64) -> std::ops::RangeInclusive<usize> {
        let res = self.resolution();
        let lo = (lo_hz / res).ceil().max(0.0) as usize;
        let hi = ((hi_hz / res).floor() as usize).min(self.magnitudes.len() - 1);
        lo..=hi
    }
}

pub(crate) fn amplitude_db<T: Real>(ratio: T) -> T {
    let floor = T::lit(DB_FLOOR);
    if ratio <= T::zero() {
        return floor;
    }
    (T::lit(20.0) * ratio.log10()).max(floor)
}

/// Reusable FFT plan for one transform size.
pub struct SpectrumAnalyzer<T: Real> {
    fft: Arc<dyn Fft<T>>,
    fft_size: usize,
    buf: Vec<Complex<T>>,
    scratch: Vec<Complex<T>>,
}

impl<T: Real> SpectrumAnalyzer<T> {
    pub fn new(fft_size: usize) -> Result<Self> {
        if fft_size == 0 || !fft_size.is_power_of_two() {
            return Err(Error::invalid(format!("fft size {fft_size} is not a power of two")));
        }
        let fft = FftPlanner::new().plan_fft_forward(fft_size);
        let scratch = vec![Complex::default(); fft.get_inplace_scratch_len()];
        Ok(Self { fft, fft_size, buf: vec![Complex::default(); fft_size], scratch })
    }

    pub fn fft_size(&self) -> usize {
        self.fft_size
    }

    /// Full complex DFT of the zero-padded frame.
    pub fn transform(&mut self, frame: &[T]) -> Result<&[Complex<T>]> {
        if frame.len() > self.fft_size {
            return Err(Error::invalid(format!(
                "frame of {} samples exceeds fft size {}",
                frame.len(),
                self.fft_size
            )));
        }
        for (i, c) in self.buf.iter_mut().enumerate() {
            *c = Complex::new(frame.get(i).copied().unwrap_or_else(T::zero), T::zero());
        }
        self.fft.process_with_scratch(&mut self.buf, &mut self.scratch);
        Ok(&self.buf)
    }

    pub fn analyze(&mut self, frame: &[T], sample_rate: u32) -> Result<Spectrum<T>> {
        let n = self.fft_size;
        let spec = self.transform(frame)?;
        let magnitudes = spec[..=n / 2].iter().map(|c| c.norm()).collect();
        Ok(Spectrum { magnitudes, fft_size: n, sample_rate, reference: T::one() })
    }
}

/// One-sided magnitude spectrum of `frame`, zero-padded to `fft_size`.
pub fn magnitude_spectrum<T: Real>(frame: &[T], fft_size: usize, sample_rate: u32) -> Result<Spectrum<T>> {
    SpectrumAnalyzer::new(fft_size)?.analyze(frame, sample_rate)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn tone(freq: f64, amp: f64, n: usize, sr: f64) -> Vec<f64> {
        (0..n).map(|i| amp * (2.0 * PI * freq * i as f64 / sr).sin()).collect()
    }

    #[test]
    fn exact_bin_tone_has_single_peak() {
        let sr = 16000.0;
        let n = 1024;
        let k0 = 32;
        let f = k0 as f64 * sr / n as f64;
        let s = magnitude_spectrum(&tone(f, 0.5, n, sr), n, 16000).unwrap();
        assert_eq!(s.len(), n / 2 + 1);
        let peak = s.magnitudes()[k0];
        assert!((s.bin_frequency(k0) - f).abs() < 1e-9);
        for (k, &m) in s.magnitudes().iter().enumerate() {
            if k != k0 {
                assert!(m <= 1e-10 * peak, "bin {k}: {m}");
            }
        }
    }

    #[test]
    fn zero_frame_and_bad_size() {
        let s = magnitude_spectrum(&[0.0f64; 100], 128, 16000).unwrap();
        assert!(s.magnitudes().iter().all(|&m| m == 0.0));
        assert_eq!(s.db(3), DB_FLOOR);
        assert!(magnitude_spectrum(&[0.0f64; 100], 100, 16000).is_err());
        assert!(magnitude_spectrum(&[0.0f64; 300], 256, 16000).is_err());
    }

    #[test]
    fn two_tones_equal_magnitude() {
        // 200 Hz and 3000 Hz fall exactly on bins for sr=16000, n=640 -> resolution 25 Hz;
        // use a power-of-two size with exact bins instead: sr=12800, n=512 -> 25 Hz bins.
        let sr = 12800.0;
        let n = 512;
        let x: Vec<f64> = tone(200.0, 0.3, n, sr).iter().zip(tone(3000.0, 0.3, n, sr)).map(|(a, b)| a + b).collect();
        let s = magnitude_spectrum(&x, n, 12800).unwrap();
        let (a, b) = (s.magnitudes()[8], s.magnitudes()[120]);
        // analytic DFT magnitude of an on-bin sine: amp * n / 2
        let expected = 0.3 * n as f64 / 2.0;
        assert!((a - expected).abs() / expected < 0.01);
        assert!((a - b).abs() / a < 0.01);
    }

    #[test]
    fn parseval_holds() {
        let n = 256;
        let x: Vec<f64> = (0..200).map(|i| ((i * 7919) % 97) as f64 / 97.0 - 0.5).collect();
        let mut a = SpectrumAnalyzer::new(n).unwrap();
        let full = a.transform(&x).unwrap();
        let two_sided: f64 = full.iter().map(|c| c.norm_sqr()).sum();
        let time: f64 = x.iter().map(|v| v * v).sum();
        assert!(((two_sided / n as f64) - time).abs() / time < 1e-6);
    }

    #[test]
    fn bins_in_band() {
        let s = Spectrum::from_magnitudes(vec![1.0f64; 257], 512, 16000).unwrap();
        let r = s.bins_in(0.0, 500.0);
        assert_eq!((*r.start(), *r.end()), (0, 16));
        let r = s.bins_in(1000.0, 5000.0);
        assert_eq!((*r.start(), *r.end()), (32, 160));
    }
}
