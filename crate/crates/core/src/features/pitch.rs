//! Frame-wise F0 from the normalized square difference function.
//!
//! For a frame `x` of length `N` and lag `t`,
//! `nsdf(t) = 2 * sum x[i] x[i+t] / sum (x[i]^2 + x[i+t]^2)` over the overlap.
//! It lies in [-1, 1] and equals 1 - d(t)/m(t) where d is the difference
//! function. The first local maximum within 90% of the best peak in the lag
//! range is refined by parabolic interpolation.

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::Serialize;
use std::sync::Arc;

use crate::audio::FrameSequence;
use crate::error::{Error, Result};
use crate::scalar::Real;

pub const F0_SEARCH_FLOOR_HZ: f64 = 55.0;

const PEAK_FRACTION: f64 = 0.9;

/// Per-frame F0 (0 = unvoiced) and voicing strength.
#[derive(Debug, Clone, Serialize)]
pub struct F0Contour<T> {
    f0: Vec<T>,
    voicing: Vec<T>,
    hop_s: f64,
    frame_length_s: f64,
    threshold: f64,
}

impl<T: Real> F0Contour<T> {
    pub fn len(&self) -> usize {
        self.f0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.f0.is_empty()
    }

    /// F0 in Hz; zero for unvoiced frames.
    pub fn f0(&self) -> &[T] {
        &self.f0
    }

    /// Peak value of the normalized autocorrelation, clamped to [0, 1].
    pub fn voicing(&self) -> &[T] {
        &self.voicing
    }

    pub fn is_voiced(&self, i: usize) -> bool {
        self.f0[i] > T::zero()
    }

    pub fn voiced_count(&self) -> usize {
        self.f0.iter().filter(|f| **f > T::zero()).count()
    }

    pub fn voiced_fraction(&self) -> T {
        if self.f0.is_empty() {
            return T::zero();
        }
        T::from_usize_lossy(self.voiced_count()) / T::from_usize_lossy(self.f0.len())
    }

    pub fn hop_s(&self) -> f64 {
        self.hop_s
    }

    pub fn frame_length_s(&self) -> f64 {
        self.frame_length_s
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    /// Centre time of frame `i` in seconds.
    pub fn time_s(&self, i: usize) -> f64 {
        i as f64 * self.hop_s + self.frame_length_s / 2.0
    }

    /// Voiced F0 values in frame order.
    pub fn voiced_f0(&self) -> impl Iterator<Item = T> + '_ {
        self.f0.iter().copied().filter(|f| *f > T::zero())
    }
}

/// FFT-backed NSDF evaluator for frames of a fixed length.
pub struct NsdfAnalyzer<T: Real> {
    frame_len: usize,
    fwd: Arc<dyn Fft<T>>,
    inv: Arc<dyn Fft<T>>,
    buf: Vec<Complex<T>>,
    scratch: Vec<Complex<T>>,
    nsdf: Vec<T>,
}

/// Outcome of a single-frame pitch search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PitchEstimate<T> {
    pub f0: T,
    /// Interpolated NSDF peak height.
    pub clarity: T,
}

impl<T: Real> NsdfAnalyzer<T> {
    pub fn new(frame_len: usize) -> Self {
        let n = (2 * frame_len).next_power_of_two();
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        let scratch_len = fwd.get_inplace_scratch_len().max(inv.get_inplace_scratch_len());
        Self {
            frame_len,
            fwd,
            inv,
            buf: vec![Complex::default(); n],
            scratch: vec![Complex::default(); scratch_len],
            nsdf: vec![T::zero(); frame_len],
        }
    }

    /// NSDF for lags `0..frame_len`; all zeros for a silent frame.
    pub fn nsdf(&mut self, frame: &[T]) -> &[T] {
        assert_eq!(frame.len(), self.frame_len, "frame length changed");
        let n = self.buf.len();
        for (i, c) in self.buf.iter_mut().enumerate() {
            *c = Complex::new(frame.get(i).copied().unwrap_or_else(T::zero), T::zero());
        }
        self.fwd.process_with_scratch(&mut self.buf, &mut self.scratch);
        for c in &mut self.buf {
            *c = Complex::new(c.norm_sqr(), T::zero());
        }
        self.inv.process_with_scratch(&mut self.buf, &mut self.scratch);
        let scale = T::from_usize_lossy(n);
        let mut m = T::lit(2.0) * frame.iter().map(|&v| v * v).sum::<T>();
        let two = T::lit(2.0);
        for tau in 0..self.frame_len {
            if tau > 0 {
                let a = frame[tau - 1];
                let b = frame[self.frame_len - tau];
                m = (m - a * a - b * b).max(T::zero());
            }
            let r = self.buf[tau].re / scale;
            self.nsdf[tau] = if m > T::epsilon() * T::lit(1e-6) { (two * r / m).max(-T::one()).min(T::one()) } else { T::zero() };
        }
        &self.nsdf
    }

    /// Best pitch candidate with F0 in `[fmin, fmax]`, if any interior NSDF peak exists.
    pub fn estimate(&mut self, frame: &[T], sample_rate: u32, fmin: f64, fmax: f64) -> Option<PitchEstimate<T>> {
        let sr = f64::from(sample_rate);
        let len = self.frame_len;
        let d = self.nsdf(frame);
        let lo = ((sr / fmax).floor() as usize).max(1);
        let hi = ((sr / fmin).ceil() as usize).min(len.saturating_sub(2));
        if lo >= hi {
            return None;
        }
        let peaks: Vec<usize> = (lo..=hi).filter(|&t| d[t] > T::zero() && d[t] > d[t - 1] && d[t] >= d[t + 1]).collect();
        let best = peaks.iter().map(|&t| d[t]).fold(T::zero(), T::max);
        if best <= T::zero() {
            return None;
        }
        let cut = best * T::lit(PEAK_FRACTION);
        let t = *peaks.iter().find(|&&t| d[t] >= cut)?;
        let (a, b, c) = (d[t - 1], d[t], d[t + 1]);
        let denom = a - T::lit(2.0) * b + c;
        let (shift, height) = if denom < T::zero() {
            let delta = T::lit(0.5) * (a - c) / denom;
            (delta, b - T::lit(0.25) * (a - c) * delta)
        } else {
            (T::zero(), b)
        };
        let lag = T::from_usize_lossy(t) + shift;
        let f0 = T::lit(sr) / lag;
        if f0.to_f64_lossy() < fmin || f0.to_f64_lossy() > fmax {
            return None;
        }
        Some(PitchEstimate { f0, clarity: height.max(T::zero()).min(T::one()) })
    }
}

/// Runs the pitch search on every frame and applies the voicing threshold.
///
/// `frames` should be rectangular-windowed; the NSDF already normalizes for
/// energy so no taper is needed.
pub fn detect_f0<T: Real>(frames: &FrameSequence<T>, fmin: f64, fmax: f64, voicing_threshold: f64) -> Result<F0Contour<T>> {
    if frames.is_empty() {
        return Err(Error::invalid("pitch detection needs at least one frame"));
    }
    let nyq = f64::from(frames.sample_rate()) / 2.0;
    if fmin < F0_SEARCH_FLOOR_HZ || fmin >= fmax || fmax > nyq / 2.0 {
        return Err(Error::invalid(format!(
            "F0 search range [{fmin}, {fmax}] Hz must satisfy {F0_SEARCH_FLOOR_HZ} <= fmin < fmax <= Nyquist/2 ({})",
            nyq / 2.0
        )));
    }
    if !(0.0..=1.0).contains(&voicing_threshold) {
        return Err(Error::invalid("voicing threshold must lie in [0, 1]"));
    }
    let mut analyzer = NsdfAnalyzer::new(frames.frame_len());
    let mut f0 = Vec::with_capacity(frames.len());
    let mut voicing = Vec::with_capacity(frames.len());
    for frame in frames.frames() {
        match analyzer.estimate(frame, frames.sample_rate(), fmin, fmax) {
            Some(est) => {
                voicing.push(est.clarity);
                f0.push(if est.clarity.to_f64_lossy() >= voicing_threshold { est.f0 } else { T::zero() });
            }
            None => {
                voicing.push(T::zero());
                f0.push(T::zero());
            }
        }
    }
    Ok(F0Contour { f0, voicing, hop_s: frames.hop_s(), frame_length_s: frames.frame_length_s(), threshold: voicing_threshold })
}

/// Semitones relative to 27.5 Hz.
pub fn f0_semitones<T: Real>(f0_hz: T) -> Result<T> {
    if !(f0_hz > T::zero()) || !f0_hz.is_finite() {
        return Err(Error::invalid(format!("semitone conversion needs a positive frequency, got {f0_hz}")));
    }
    Ok(T::lit(12.0) * (f0_hz / T::lit(27.5)).log2())
}

/// Least-squares slope of voiced F0 (Hz) against time (s) across the whole contour.
///
/// This is a dynamic descriptor: random splicing scrambles it.
pub fn f0_trend<T: Real>(contour: &F0Contour<T>) -> Option<T> {
    let pts: Vec<(f64, f64)> = (0..contour.len())
        .filter(|&i| contour.is_voiced(i))
        .map(|i| (contour.time_s(i), contour.f0()[i].to_f64_lossy()))
        .collect();
    if pts.len() < 3 {
        return None;
    }
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let mf = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - mf)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
    (sxx > 0.0).then(|| T::lit(sxy / sxx))
}
