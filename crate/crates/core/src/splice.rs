//! Random-splicing anonymizer.
//!
//! The signal is cut at random points into segments of bounded length, the
//! segments are shuffled with a seeded Fisher-Yates permutation and glued
//! back together with short equal-power raised-cosine crossfades. Word order
//! and intonation contours are destroyed while local spectra survive.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::audio::{read_wav_with_encoding, write_wav, AudioBuffer};
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpliceConfig {
    pub seg_min_s: f64,
    pub seg_max_s: f64,
    pub crossfade_s: f64,
    pub seed: u64,
}

impl Default for SpliceConfig {
    fn default() -> Self {
        Self { seg_min_s: 0.6, seg_max_s: 1.2, crossfade_s: 0.010, seed: 0 }
    }
}

impl SpliceConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.seg_min_s > 0.0 && self.seg_min_s <= self.seg_max_s && self.seg_max_s.is_finite()) {
            return Err(Error::invalid(format!(
                "segment bounds must satisfy 0 < seg_min ({}) <= seg_max ({})",
                self.seg_min_s, self.seg_max_s
            )));
        }
        if !(self.crossfade_s >= 0.0 && self.crossfade_s < self.seg_min_s / 2.0) {
            return Err(Error::invalid(format!(
                "crossfade {} s must be non-negative and below half the minimum segment ({} s)",
                self.crossfade_s,
                self.seg_min_s / 2.0
            )));
        }
        Ok(())
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// Auditable record of where a signal was cut and how the pieces were reordered.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplicePlan {
    /// Segment boundaries in sample indices, original order; first is 0, last is the signal length.
    pub boundaries: Vec<usize>,
    /// Output position `j` holds original segment `permutation[j]`.
    pub permutation: Vec<usize>,
    pub sample_rate: u32,
    pub config: SpliceConfig,
}

impl SplicePlan {
    pub fn n_segments(&self) -> usize {
        self.permutation.len()
    }

    pub fn n_samples(&self) -> usize {
        *self.boundaries.last().unwrap_or(&0)
    }

    pub fn segment(&self, i: usize) -> std::ops::Range<usize> {
        self.boundaries[i]..self.boundaries[i + 1]
    }

    /// Checks the structural invariants (monotone boundaries, bijective permutation).
    pub fn validate(&self) -> Result<()> {
        let b = &self.boundaries;
        if b.len() < 2 || b[0] != 0 || b.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("plan boundaries must start at 0 and be strictly increasing"));
        }
        let n = b.len() - 1;
        let mut seen = vec![false; n];
        if self.permutation.len() != n {
            return Err(Error::invalid("plan permutation length differs from segment count"));
        }
        for &p in &self.permutation {
            if p >= n || std::mem::replace(&mut seen[p], true) {
                return Err(Error::invalid("plan permutation is not a bijection"));
            }
        }
        Ok(())
    }
}

/// Draws segment boundaries and a permutation for `buffer`.
///
/// Segment lengths are uniform in `[seg_min, seg_max]` samples. Near the end
/// the draw is narrowed so that no segment falls below `seg_min`; when that is
/// impossible the final segment absorbs the remainder.
pub fn plan_splice<T: Real>(buffer: &AudioBuffer<T>, config: &SpliceConfig) -> Result<SplicePlan> {
    config.validate()?;
    let sr = f64::from(buffer.sample_rate());
    let n = buffer.len();
    let seg_min = ((config.seg_min_s * sr).round() as usize).max(1);
    let seg_max = ((config.seg_max_s * sr).round() as usize).max(seg_min);
    if n < seg_min {
        return Err(Error::invalid(format!(
            "signal too short to splice: {:.3} s < minimum segment {:.3} s",
            buffer.duration_s(),
            config.seg_min_s
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut boundaries = vec![0usize];
    let mut pos = 0usize;
    while pos < n {
        let remaining = n - pos;
        let len = if remaining <= seg_max {
            remaining
        } else {
            let hi = seg_max.min(remaining - seg_min);
            if hi >= seg_min {
                rng.random_range(seg_min..=hi)
            } else {
                remaining
            }
        };
        pos += len;
        boundaries.push(pos);
    }
    let mut permutation: Vec<usize> = (0..boundaries.len() - 1).collect();
    permutation.shuffle(&mut rng);
    Ok(SplicePlan { boundaries, permutation, sample_rate: buffer.sample_rate(), config: *config })
}

/// Reassembles `buffer` in plan order with equal-power crossfades of
/// `crossfade_s` seconds between adjacent output segments.
pub fn apply_splice<T: Real>(buffer: &AudioBuffer<T>, plan: &SplicePlan, crossfade_s: f64) -> Result<AudioBuffer<T>> {
    plan.validate()?;
    if plan.n_samples() != buffer.len() || plan.sample_rate != buffer.sample_rate() {
        return Err(Error::invalid(format!(
            "plan covers {} samples at {} Hz but buffer has {} samples at {} Hz",
            plan.n_samples(),
            plan.sample_rate,
            buffer.len(),
            buffer.sample_rate()
        )));
    }
    if !(crossfade_s >= 0.0) {
        return Err(Error::invalid("crossfade must be non-negative"));
    }
    let x = buffer.samples();
    let min_seg = (0..plan.n_segments()).map(|i| plan.segment(i).len()).min().unwrap_or(0);
    let fade = ((crossfade_s * f64::from(buffer.sample_rate())).round() as usize).min(min_seg / 2);
    let (fade_in, fade_out): (Vec<T>, Vec<T>) = (0..fade)
        .map(|i| {
            let t = (i as f64 + 0.5) / fade as f64 * std::f64::consts::FRAC_PI_2;
            (T::lit(t.sin()), T::lit(t.cos()))
        })
        .unzip();

    let mut out: Vec<T> = Vec::with_capacity(x.len());
    for (j, &seg) in plan.permutation.iter().enumerate() {
        let piece = &x[plan.segment(seg)];
        if j == 0 || fade == 0 {
            out.extend_from_slice(piece);
            continue;
        }
        let tail = out.len() - fade;
        for i in 0..fade {
            out[tail + i] = out[tail + i] * fade_out[i] + piece[i] * fade_in[i];
        }
        out.extend_from_slice(&piece[fade..]);
    }
    // equal-power sums of correlated material can exceed full scale
    for s in &mut out {
        *s = s.max(-T::one()).min(T::one());
    }
    AudioBuffer::new(out, buffer.sample_rate())
}

/// Loads, splices and writes a WAV file, keeping the input encoding.
pub fn splice_file(in_path: impl AsRef<Path>, out_path: impl AsRef<Path>, config: &SpliceConfig) -> Result<SplicePlan> {
    let (buffer, encoding) = read_wav_with_encoding::<f64>(in_path)?;
    let plan = plan_splice(&buffer, config)?;
    let spliced = apply_splice(&buffer, &plan, config.crossfade_s)?;
    write_wav(out_path, &spliced, encoding)?;
    Ok(plan)
}

/// Convenience: plan and apply in one step.
pub fn splice<T: Real>(buffer: &AudioBuffer<T>, config: &SpliceConfig) -> Result<AudioBuffer<T>> {
    let plan = plan_splice(buffer, config)?;
    apply_splice(buffer, &plan, config.crossfade_s)
}

/// SplitMix64 step; derives independent per-item seeds from a master seed.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
