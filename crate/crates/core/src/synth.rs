//! Deterministic synthetic signals: test tones, pulse trains and a small
//! source-filter voice model used to build desk corpora.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::audio::AudioBuffer;

fn buffer(samples: Vec<f64>, sr: u32) -> AudioBuffer<f64> {
    AudioBuffer::new(samples, sr).expect("synthetic signal within full scale")
}

fn n_samples(secs: f64, sr: u32) -> usize {
    (secs * f64::from(sr)).round() as usize
}

pub fn sine(freq: f64, amp: f64, secs: f64, sr: u32) -> AudioBuffer<f64> {
    let s = f64::from(sr);
    buffer((0..n_samples(secs, sr)).map(|i| amp * (2.0 * PI * freq * i as f64 / s).sin()).collect(), sr)
}

/// Sum of sines `(freq, amp)`.
pub fn tones(parts: &[(f64, f64)], secs: f64, sr: u32) -> AudioBuffer<f64> {
    let s = f64::from(sr);
    buffer(
        (0..n_samples(secs, sr))
            .map(|i| parts.iter().map(|&(f, a)| a * (2.0 * PI * f * i as f64 / s).sin()).sum())
            .collect(),
        sr,
    )
}

/// Gaussian white noise with standard deviation `sd`, clipped to full scale.
pub fn white_noise(sd: f64, secs: f64, sr: u32, seed: u64) -> AudioBuffer<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = Normal::new(0.0, sd).expect("valid sd");
    buffer((0..n_samples(secs, sr)).map(|_| d.sample(&mut rng).clamp(-1.0, 1.0)).collect(), sr)
}

pub fn sawtooth(freq: f64, amp: f64, secs: f64, sr: u32) -> AudioBuffer<f64> {
    let s = f64::from(sr);
    buffer(
        (0..n_samples(secs, sr))
            .map(|i| {
                let ph = (freq * i as f64 / s).fract();
                amp * (2.0 * ph - 1.0)
            })
            .collect(),
        sr,
    )
}

/// Sine whose frequency moves linearly from `f_start` to `f_end`.
pub fn glide(f_start: f64, f_end: f64, amp: f64, secs: f64, sr: u32) -> AudioBuffer<f64> {
    let s = f64::from(sr);
    let n = n_samples(secs, sr);
    let mut phase = 0.0;
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let f = f_start + (f_end - f_start) * i as f64 / n as f64;
        out.push(amp * (2.0 * PI * phase).sin());
        phase = (phase + f / s).fract();
    }
    buffer(out, sr)
}

/// Pulses of height `amp` separated by the given periods (samples), cycled.
///
/// `width` 1 gives unit impulses; wider pulses are Hann bumps of `width`
/// samples (odd widths keep the peak on a sample).
pub fn pulse_train(periods: &[usize], width: usize, amp: f64, secs: f64, sr: u32) -> AudioBuffer<f64> {
    let n = n_samples(secs, sr);
    let shape: Vec<f64> = if width <= 1 {
        vec![1.0]
    } else {
        (0..width).map(|i| 0.5 - 0.5 * (2.0 * PI * (i as f64 + 0.5) / width as f64).cos()).collect()
    };
    let peak = shape.iter().fold(0.0f64, |m, v| m.max(*v));
    let mut out = vec![0.0; n];
    let mut pos = 0usize;
    let mut k = 0usize;
    while pos < n {
        for (j, v) in shape.iter().enumerate() {
            if let Some(o) = out.get_mut(pos + j) {
                *o += amp * v / peak;
            }
        }
        pos += periods[k % periods.len()];
        k += 1;
    }
    buffer(out, sr)
}

/// Sum of `n_harmonics` cosines at multiples of `f0`, harmonic `h` (1-based)
/// with amplitude `amp * 10^(-(h-1) rolloff_db / 20)`.
pub fn harmonic_series(f0: f64, n_harmonics: usize, amp: f64, rolloff_db: f64, secs: f64, sr: u32) -> AudioBuffer<f64> {
    let parts: Vec<(f64, f64)> = (1..=n_harmonics)
        .map(|h| (f0 * h as f64, amp * 10f64.powf(-((h - 1) as f64) * rolloff_db / 20.0)))
        .collect();
    tones(&parts, secs, sr)
}

/// Two-pole resonator.
#[derive(Debug, Clone)]
struct Resonator {
    a1: f64,
    a2: f64,
    gain: f64,
    y1: f64,
    y2: f64,
}

impl Resonator {
    fn new(freq: f64, bandwidth: f64, sr: f64) -> Self {
        let r = (-PI * bandwidth / sr).exp();
        let theta = 2.0 * PI * freq / sr;
        let a1 = 2.0 * r * theta.cos();
        let a2 = -r * r;
        // unity gain at DC-ish reference keeps cascades bounded
        let gain = 1.0 - a1 - a2;
        Self { a1, a2, gain, y1: 0.0, y2: 0.0 }
    }

    fn process(&mut self, x: f64) -> f64 {
        let y = self.gain * x + self.a1 * self.y1 + self.a2 * self.y2;
        self.y2 = self.y1;
        self.y1 = y;
        y
    }
}

/// Speaker and style parameters for [`utterance`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VoiceParams {
    /// Mean F0 in Hz.
    pub f0_hz: f64,
    /// Linear F0 change over the utterance, Hz per second.
    pub f0_declination: f64,
    /// Depth of per-syllable pitch accents relative to F0.
    pub accent_depth: f64,
    /// Cycle-to-cycle random period perturbation (relative sd).
    pub jitter: f64,
    /// Cycle-to-cycle random amplitude perturbation (relative sd).
    pub shimmer: f64,
    /// Formant frequency multiplier (vocal tract length).
    pub formant_scale: f64,
    /// Glottal open quotient in (0, 1); larger is breathier with steeper tilt.
    pub open_quotient: f64,
    /// Aspiration noise relative to the voiced source.
    pub breathiness: f64,
    /// Centre frequency of fricative noise, Hz.
    pub fricative_hz: f64,
    /// Fricative loudness relative to vowels.
    pub fricative_level: f64,
    /// Fraction of syllables carrying a fricative onset.
    pub fricative_rate: f64,
    /// Background noise standard deviation.
    pub background: f64,
    /// Peak output level.
    pub peak: f64,
}

impl Default for VoiceParams {
    fn default() -> Self {
        Self {
            f0_hz: 180.0,
            f0_declination: -10.0,
            accent_depth: 0.08,
            jitter: 0.004,
            shimmer: 0.03,
            formant_scale: 1.0,
            open_quotient: 0.6,
            breathiness: 0.02,
            fricative_hz: 4500.0,
            fricative_level: 0.3,
            fricative_rate: 0.5,
            background: 0.0005,
            peak: 0.6,
        }
    }
}

impl VoiceParams {
    /// Draws a random speaker; all parameters spread over plausible adult ranges.
    pub fn random(rng: &mut impl Rng) -> Self {
        Self {
            f0_hz: rng.random_range(95.0..260.0),
            f0_declination: rng.random_range(-45.0..25.0),
            accent_depth: rng.random_range(0.03..0.12),
            jitter: rng.random_range(0.001..0.01),
            shimmer: rng.random_range(0.01..0.06),
            formant_scale: rng.random_range(0.85..1.2),
            open_quotient: rng.random_range(0.4..0.8),
            breathiness: rng.random_range(0.005..0.06),
            fricative_hz: rng.random_range(2500.0..6000.0),
            fricative_level: rng.random_range(0.1..0.5),
            fricative_rate: rng.random_range(0.2..0.8),
            background: rng.random_range(0.0002..0.002),
            peak: rng.random_range(0.3..0.8),
        }
    }
}

const VOWELS: [[f64; 3]; 5] = [
    [730.0, 1090.0, 2440.0],
    [530.0, 1840.0, 2480.0],
    [270.0, 2290.0, 3010.0],
    [570.0, 840.0, 2410.0],
    [300.0, 870.0, 2240.0],
];

/// Rosenberg glottal flow pulse at phase `ph` in [0, 1).
fn glottal_flow(ph: f64, oq: f64) -> f64 {
    let tp = 0.6 * oq;
    if ph < tp {
        let u = ph / tp;
        3.0 * u * u - 2.0 * u * u * u
    } else if ph < oq {
        let u = (ph - tp) / (oq - tp);
        (0.5 * PI * u).cos()
    } else {
        0.0
    }
}

/// Speech-like utterance: syllables of vowels (glottal source through three
/// formant resonators) with optional fricative onsets and short pauses.
pub fn utterance(params: &VoiceParams, secs: f64, sr: u32, seed: u64) -> AudioBuffer<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = f64::from(sr);
    let n = n_samples(secs, sr);
    let gauss = Normal::new(0.0, 1.0).expect("unit normal");

    // syllable plan: (start, end, kind) with kind 0 = pause, 1 = fricative, 2 = vowel(index)
    #[derive(Clone, Copy)]
    enum Kind {
        Pause,
        Fricative,
        Vowel(usize),
    }
    let mut plan: Vec<(usize, usize, Kind)> = Vec::new();
    let mut pos = 0usize;
    while pos < n {
        if rng.random_bool(params.fricative_rate.clamp(0.0, 1.0)) {
            let len = n_samples(rng.random_range(0.06..0.14), sr);
            plan.push((pos, (pos + len).min(n), Kind::Fricative));
            pos += len;
        }
        if pos >= n {
            break;
        }
        let len = n_samples(rng.random_range(0.14..0.32), sr);
        plan.push((pos, (pos + len).min(n), Kind::Vowel(rng.random_range(0..VOWELS.len()))));
        pos += len;
        if rng.random_bool(0.25) && pos < n {
            let len = n_samples(rng.random_range(0.05..0.2), sr);
            plan.push((pos, (pos + len).min(n), Kind::Pause));
            pos += len;
        }
    }

    let mut out = vec![0.0f64; n];
    let mut phase = 0.0f64;
    let mut period_jit = 0.0f64;
    let mut amp_jit = 1.0f64;
    let mut prev_flow = 0.0f64;
    let mut fric_res = Resonator::new(params.fricative_hz.min(0.45 * s), params.fricative_hz * 0.5, s);
    for &(a, b, kind) in &plan {
        match kind {
            Kind::Pause => {}
            Kind::Fricative => {
                let len = (b - a).max(1) as f64;
                let mut w_prev = 0.0;
                for (i, o) in out[a..b].iter_mut().enumerate() {
                    let env = (PI * i as f64 / len).sin();
                    let w = gauss.sample(&mut rng);
                    // first difference tilts the noise upward before the resonator
                    *o += params.fricative_level * env * fric_res.process(w - w_prev) * 0.5;
                    w_prev = w;
                }
            }
            Kind::Vowel(v) => {
                let mut res: Vec<Resonator> = VOWELS[v]
                    .iter()
                    .enumerate()
                    .map(|(k, &f)| Resonator::new((f * params.formant_scale).min(0.45 * s), 60.0 + 40.0 * k as f64, s))
                    .collect();
                let accent = 1.0 + params.accent_depth * rng.random_range(-1.0..1.0);
                let len = (b - a).max(1) as f64;
                for i in a..b {
                    let t = i as f64 / s;
                    let f0 = (params.f0_hz + params.f0_declination * (t - secs / 2.0)) * accent;
                    let f0 = f0.clamp(70.0, 400.0) * (1.0 + period_jit);
                    phase += f0 / s;
                    if phase >= 1.0 {
                        phase -= 1.0;
                        period_jit = params.jitter * gauss.sample(&mut rng);
                        amp_jit = 1.0 + params.shimmer * gauss.sample(&mut rng);
                    }
                    let flow = glottal_flow(phase, params.open_quotient.clamp(0.2, 0.95)) * amp_jit;
                    // lip radiation: differentiate the flow
                    let src = (flow - prev_flow) * 8.0 + params.breathiness * gauss.sample(&mut rng);
                    prev_flow = flow;
                    let mut y = src;
                    for r in &mut res {
                        y = r.process(y);
                    }
                    let rel = (i - a) as f64 / len;
                    let env = (PI * rel).sin().powf(0.5);
                    out[i] += env * y;
                }
            }
        }
    }
    let peak = out.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let gain = if peak > 0.0 { params.peak / peak } else { 0.0 };
    for o in &mut out {
        *o = (*o * gain + params.background * gauss.sample(&mut rng)).clamp(-1.0, 1.0);
    }
    buffer(out, sr)
}

/// A corpus of `count` utterances from random speakers.
pub fn corpus(count: usize, secs: f64, sr: u32, seed: u64) -> Vec<(VoiceParams, AudioBuffer<f64>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let p = VoiceParams::random(&mut rng);
            let b = utterance(&p, secs, sr, crate::splice::derive_seed(seed, i as u64));
            (p, b)
        })
        .collect()
}
