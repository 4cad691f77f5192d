use crate::audio::Spectrum;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Level in dB of harmonic `k` of `f0`, where `k = 0` is the peak at F0 itself
/// and `k` sits at `(k + 1) * f0`.
///
/// The highest bin within `±f0/4` of the nominal frequency is taken and refined
/// by a parabola through the neighbouring dB values.
pub fn harmonic_amplitude<T: Real>(spectrum: &Spectrum<T>, f0: T, k: usize) -> Result<T> {
    let f0 = f0.to_f64_lossy();
    if !(f0 > 0.0) {
        return Err(Error::invalid("harmonic search needs a positive F0"));
    }
    let centre = (k + 1) as f64 * f0;
    let half = f0 / 4.0;
    if centre + half > spectrum.nyquist() {
        return Err(Error::invalid(format!("harmonic {k} at {centre:.1} Hz is above Nyquist")));
    }
    let bins = spectrum.bins_in(centre - half, centre + half);
    if bins.is_empty() {
        return Err(Error::invalid(format!("harmonic {k} window holds no spectral bin")));
    }
    let m = spectrum.magnitudes();
    let best = bins.clone().fold(*bins.start(), |b, i| if m[i] > m[b] { i } else { b });
    let peak = spectrum.db(best);
    if best == 0 || best + 1 >= spectrum.len() || m[best - 1] <= T::zero() || m[best + 1] <= T::zero() {
        return Ok(peak);
    }
    let (a, b, c) = (spectrum.db(best - 1), peak, spectrum.db(best + 1));
    let denom = a - T::lit(2.0) * b + c;
    if denom >= T::zero() {
        return Ok(peak);
    }
    let delta = T::lit(0.5) * (a - c) / denom;
    Ok(b - T::lit(0.25) * (a - c) * delta)
}

/// `(H1 - H2) - H0` in dB: the first-to-second harmonic level difference
/// normalized by the level of the F0 peak.
pub fn log_rel_f0_h1_h2<T: Real>(spectrum: &Spectrum<T>, f0: T) -> Result<T> {
    let h0 = harmonic_amplitude(spectrum, f0, 0)?;
    let h1 = harmonic_amplitude(spectrum, f0, 1)?;
    let h2 = harmonic_amplitude(spectrum, f0, 2)?;
    Ok((h1 - h2) - h0)
}
