//! Cycle-level perturbation measures and harmonics-to-noise ratio.

use crate::audio::AudioBuffer;
use crate::scalar::Real;

use super::pitch::F0Contour;

/// Upper clamp for the autocorrelation peak so HNR stays finite (100 dB).
const MAX_R: f64 = 1.0 - 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VoiceQuality<T> {
    /// Mean absolute period difference over mean period.
    pub jitter_local: Option<T>,
    /// Mean absolute peak-amplitude difference over mean amplitude.
    pub shimmer_local: Option<T>,
    /// Mean over voiced frames of `10 log10(r / (1 - r))`.
    pub hnr_db: Option<T>,
    /// Number of glottal periods located.
    pub n_periods: usize,
}

/// A located glottal cycle peak: sub-sample position and amplitude.
#[derive(Debug, Clone, Copy)]
struct Pulse {
    pos: f64,
    amp: f64,
}

fn refine(x: &[f64], i: usize) -> Pulse {
    if i == 0 || i + 1 >= x.len() {
        return Pulse { pos: i as f64, amp: x[i] };
    }
    let (a, b, c) = (x[i - 1], x[i], x[i + 1]);
    let denom = a - 2.0 * b + c;
    if denom >= 0.0 {
        return Pulse { pos: i as f64, amp: b };
    }
    let d = (0.5 * (a - c) / denom).clamp(-0.5, 0.5);
    Pulse { pos: i as f64 + d, amp: b - 0.25 * (a - c) * d }
}

fn argmax(x: &[f64], lo: usize, hi: usize) -> usize {
    (lo..hi).fold(lo, |best, i| if x[i] > x[best] { i } else { best })
}

/// Locates glottal cycle peaks inside each run of voiced frames, stepping one
/// local period at a time and taking the signal maximum within ±30% of it.
fn locate_pulses<T: Real>(buffer: &AudioBuffer<T>, contour: &F0Contour<T>) -> Vec<Vec<Pulse>> {
    let x: Vec<f64> = buffer.samples().iter().map(|s| s.to_f64_lossy()).collect();
    let sr = f64::from(buffer.sample_rate());
    let hop = contour.hop_s() * sr;
    let frame_len = contour.frame_length_s() * sr;
    let mut runs = Vec::new();
    let mut i = 0;
    while i < contour.len() {
        if !contour.is_voiced(i) {
            i += 1;
            continue;
        }
        let a = i;
        while i < contour.len() && contour.is_voiced(i) {
            i += 1;
        }
        let b = i - 1;
        let start = (a as f64 * hop).round() as usize;
        let end = ((b as f64 * hop + frame_len).round() as usize).min(x.len());
        let period_at = |pos: f64| {
            let centre = ((pos - frame_len / 2.0) / hop).round().clamp(a as f64, b as f64) as usize;
            sr / contour.f0()[centre].to_f64_lossy()
        };
        let t0 = period_at(start as f64);
        let first_end = (start + t0.ceil() as usize).min(end);
        if first_end <= start {
            continue;
        }
        let mut pulses = vec![refine(&x, argmax(&x, start, first_end))];
        loop {
            let p = pulses.last().expect("non-empty").pos;
            let t = period_at(p);
            if !(t.is_finite() && t > 0.0) {
                break;
            }
            let lo = (p + 0.7 * t).ceil() as usize;
            let hi = (p + 1.3 * t).floor() as usize + 1;
            if hi > end || lo >= hi {
                break;
            }
            pulses.push(refine(&x, argmax(&x, lo, hi)));
        }
        runs.push(pulses);
    }
    runs
}

/// Jitter and shimmer from located cycles, HNR from the contour's voicing strengths.
///
/// Measures needing fewer than three periods come back as `None`.
pub fn jitter_shimmer_hnr<T: Real>(buffer: &AudioBuffer<T>, contour: &F0Contour<T>) -> VoiceQuality<T> {
    let runs = locate_pulses(buffer, contour);
    let mut periods = Vec::new();
    let mut period_diffs = Vec::new();
    let mut amps = Vec::new();
    let mut amp_diffs = Vec::new();
    for run in &runs {
        let p: Vec<f64> = run.windows(2).map(|w| w[1].pos - w[0].pos).collect();
        period_diffs.extend(p.windows(2).map(|w| (w[1] - w[0]).abs()));
        periods.extend(p);
        let a: Vec<f64> = run.iter().map(|q| q.amp).collect();
        if a.len() >= 2 {
            amp_diffs.extend(a.windows(2).map(|w| (w[1] - w[0]).abs()));
            amps.extend(a);
        }
    }
    let n_periods = periods.len();
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let (jitter_local, shimmer_local) = if n_periods >= 3 && !period_diffs.is_empty() {
        let ma = mean(&amps);
        let shimmer = (ma > 0.0).then(|| T::lit(mean(&amp_diffs) / ma));
        (Some(T::lit(mean(&period_diffs) / mean(&periods))), shimmer)
    } else {
        (None, None)
    };
    let hnr: Vec<f64> = (0..contour.len())
        .filter(|&i| contour.is_voiced(i))
        .map(|i| {
            let r = contour.voicing()[i].to_f64_lossy().clamp(1e-10, MAX_R);
            10.0 * (r / (1.0 - r)).log10()
        })
        .collect();
    let hnr_db = (!hnr.is_empty()).then(|| T::lit(mean(&hnr)));
    VoiceQuality { jitter_local, shimmer_local, hnr_db, n_periods }
}
