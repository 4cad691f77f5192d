use crate::audio::{Spectrum, DB_FLOOR};
use crate::error::{Error, Result};
use crate::scalar::Real;

pub const ALPHA_LOW_BAND: (f64, f64) = (50.0, 1000.0);
pub const ALPHA_HIGH_BAND: (f64, f64) = (1000.0, 5000.0);

/// OLS slope (dB per Hz) of bin level against bin frequency over `[lo_hz, hi_hz]`.
///
/// The DC bin is never used.
pub fn spectral_slope_band<T: Real>(spectrum: &Spectrum<T>, lo_hz: f64, hi_hz: f64) -> Result<T> {
    if hi_hz > spectrum.nyquist() + 1e-9 || lo_hz >= hi_hz {
        return Err(Error::invalid(format!(
            "slope band [{lo_hz}, {hi_hz}] Hz must be ordered and below Nyquist {}",
            spectrum.nyquist()
        )));
    }
    let bins = spectrum.bins_in(lo_hz, hi_hz);
    let first = (*bins.start()).max(1);
    let last = *bins.end();
    if last < first || last - first + 1 < 4 {
        return Err(Error::invalid(format!("fewer than 4 bins in [{lo_hz}, {hi_hz}] Hz")));
    }
    let n = T::from_usize_lossy(last - first + 1);
    let freqs: Vec<T> = (first..=last).map(|k| T::lit(spectrum.bin_frequency(k))).collect();
    let levels: Vec<T> = (first..=last).map(|k| spectrum.db(k)).collect();
    let mf = freqs.iter().copied().sum::<T>() / n;
    let ml = levels.iter().copied().sum::<T>() / n;
    let mut sxy = T::zero();
    let mut sxx = T::zero();
    for (&f, &l) in freqs.iter().zip(&levels) {
        sxy += (f - mf) * (l - ml);
        sxx += (f - mf) * (f - mf);
    }
    Ok(sxy / sxx)
}

/// Alpha ratio of one frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaRatio<T> {
    /// dB; equals the floor when the high band is empty.
    pub value: T,
    pub band_empty: bool,
}

/// `10 log10(P[1-5 kHz] / P[50 Hz-1 kHz))` from bin powers.
pub fn alpha_ratio<T: Real>(spectrum: &Spectrum<T>) -> Result<AlphaRatio<T>> {
    if spectrum.nyquist() < ALPHA_HIGH_BAND.1 {
        return Err(Error::invalid(format!(
            "alpha ratio needs Nyquist >= 5000 Hz, spectrum has {}",
            spectrum.nyquist()
        )));
    }
    let mut low = T::zero();
    let mut high = T::zero();
    for k in 0..spectrum.len() {
        let f = spectrum.bin_frequency(k);
        if f >= ALPHA_LOW_BAND.0 && f < ALPHA_LOW_BAND.1 {
            low += spectrum.power(k);
        } else if f >= ALPHA_HIGH_BAND.0 && f <= ALPHA_HIGH_BAND.1 {
            high += spectrum.power(k);
        }
    }
    if low <= T::zero() {
        return Err(Error::invalid("alpha ratio undefined: no energy in the 50-1000 Hz band"));
    }
    if high <= T::zero() {
        return Ok(AlphaRatio { value: T::lit(DB_FLOOR), band_empty: true });
    }
    Ok(AlphaRatio { value: (T::lit(10.0) * (high / low).log10()).max(T::lit(DB_FLOOR)), band_empty: false })
}
