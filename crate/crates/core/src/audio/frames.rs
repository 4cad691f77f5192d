use serde::{Deserialize, Serialize};

use super::AudioBuffer;
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WindowKind {
    Rectangular,
    Hann,
    Hamming,
    /// Gaussian with sigma = 0.4 of the half-length.
    Gaussian,
}

/// Symmetric window of length `n`.
pub fn window<T: Real>(kind: WindowKind, n: usize) -> Vec<T> {
    if n == 1 {
        return vec![T::one()];
    }
    let denom = (n - 1) as f64;
    (0..n)
        .map(|i| {
            let x = i as f64;
            let w = match kind {
                WindowKind::Rectangular => 1.0,
                WindowKind::Hann => 0.5 - 0.5 * (2.0 * std::f64::consts::PI * x / denom).cos(),
                WindowKind::Hamming => 0.54 - 0.46 * (2.0 * std::f64::consts::PI * x / denom).cos(),
                WindowKind::Gaussian => {
                    let half = denom / 2.0;
                    let u = (x - half) / (0.4 * half);
                    (-0.5 * u * u).exp()
                }
            };
            T::lit(w)
        })
        .collect()
}

/// Equal-length windowed blocks cut from a signal at a fixed hop.
#[derive(Debug, Clone)]
pub struct FrameSequence<T> {
    frames: Vec<Vec<T>>,
    frame_len: usize,
    hop: usize,
    sample_rate: u32,
    window_kind: WindowKind,
    window_sum: T,
}

impl<T: Real> FrameSequence<T> {
    pub fn frames(&self) -> &[Vec<T>] {
        &self.frames
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn frame_len(&self) -> usize {
        self.frame_len
    }

    pub fn hop(&self) -> usize {
        self.hop
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn window_kind(&self) -> WindowKind {
        self.window_kind
    }

    pub fn frame_length_s(&self) -> f64 {
        self.frame_len as f64 / f64::from(self.sample_rate)
    }

    pub fn hop_s(&self) -> f64 {
        self.hop as f64 / f64::from(self.sample_rate)
    }

    /// First sample index of frame `i`.
    pub fn start(&self, i: usize) -> usize {
        i * self.hop
    }

    /// Centre of frame `i` in seconds.
    pub fn center_s(&self, i: usize) -> f64 {
        (self.start(i) as f64 + self.frame_len as f64 / 2.0) / f64::from(self.sample_rate)
    }

    /// Sum of the window coefficients (coherent gain times length).
    pub fn window_sum(&self) -> T {
        self.window_sum
    }
}

/// Cuts `buffer` into windowed frames.
///
/// A frame longer than the signal yields an empty sequence.
pub fn frame_signal<T: Real>(
    buffer: &AudioBuffer<T>,
    frame_length_s: f64,
    hop_s: f64,
    window_kind: WindowKind,
) -> Result<FrameSequence<T>> {
    if !(hop_s > 0.0) || !hop_s.is_finite() {
        return Err(Error::invalid(format!("hop must be positive, got {hop_s}")));
    }
    if !(frame_length_s > 0.0) || !frame_length_s.is_finite() {
        return Err(Error::invalid(format!("frame length must be positive, got {frame_length_s}")));
    }
    if hop_s > frame_length_s {
        return Err(Error::invalid(format!("hop {hop_s} s exceeds frame length {frame_length_s} s")));
    }
    let sr = f64::from(buffer.sample_rate());
    let frame_len = ((frame_length_s * sr).round() as usize).max(1);
    let hop = ((hop_s * sr).round() as usize).max(1);
    let win = window::<T>(window_kind, frame_len);
    let window_sum = win.iter().copied().sum();
    let x = buffer.samples();
    let count = if x.len() >= frame_len { (x.len() - frame_len) / hop + 1 } else { 0 };
    let frames = (0..count)
        .map(|i| {
            let s = i * hop;
            x[s..s + frame_len].iter().zip(&win).map(|(&a, &w)| a * w).collect()
        })
        .collect();
    Ok(FrameSequence { frames, frame_len, hop, sample_rate: buffer.sample_rate(), window_kind, window_sum })
}
