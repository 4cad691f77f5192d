use std::path::Path;

use hound::{SampleFormat, WavReader, WavSpec, WavWriter};

use super::AudioBuffer;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// On-disk sample encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WavEncoding {
    Pcm16,
    Float32,
}

fn wav_err(path: &Path, message: impl Into<String>) -> Error {
    Error::Wav { path: path.to_path_buf(), message: message.into() }
}

/// Reads a PCM16 or float32 WAV file, averaging stereo channels to mono.
pub fn read_wav<T: Real>(path: impl AsRef<Path>) -> Result<AudioBuffer<T>> {
    read_wav_with_encoding(path).map(|(b, _)| b)
}

pub fn read_wav_with_encoding<T: Real>(path: impl AsRef<Path>) -> Result<(AudioBuffer<T>, WavEncoding)> {
    let path = path.as_ref();
    let reader = WavReader::open(path).map_err(|e| match e {
        hound::Error::IoError(io) if io.kind() == std::io::ErrorKind::NotFound => Error::io(path, io),
        other => wav_err(path, format!("malformed or truncated header: {other}")),
    })?;
    let spec = reader.spec();
    if spec.channels == 0 || spec.channels > 2 {
        return Err(wav_err(path, format!("unsupported channel count {}", spec.channels)));
    }
    let channels = usize::from(spec.channels);
    let (interleaved, encoding): (Vec<f64>, WavEncoding) = match (spec.sample_format, spec.bits_per_sample) {
        (SampleFormat::Int, 16) => {
            let v = reader
                .into_samples::<i16>()
                .map(|s| s.map(|s| f64::from(s) / 32768.0))
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| wav_err(path, format!("truncated payload: {e}")))?;
            (v, WavEncoding::Pcm16)
        }
        (SampleFormat::Float, 32) => {
            let v = reader
                .into_samples::<f32>()
                .map(|s| s.map(f64::from))
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| wav_err(path, format!("truncated payload: {e}")))?;
            (v, WavEncoding::Float32)
        }
        (fmt, bits) => {
            return Err(wav_err(
                path,
                format!("unsupported encoding {fmt:?} {bits}-bit (expected PCM16 or float32)"),
            ))
        }
    };
    if interleaved.is_empty() {
        return Err(wav_err(path, "zero-length payload"));
    }
    let mono: Vec<T> = interleaved
        .chunks(channels)
        .map(|c| T::lit(c.iter().sum::<f64>() / c.len() as f64))
        .collect();
    let buf = AudioBuffer::new(mono, spec.sample_rate).map_err(|e| wav_err(path, e.to_string()))?;
    Ok((buf, encoding))
}

/// Writes a mono WAV file. PCM16 output is rounded to the nearest code.
pub fn write_wav<T: Real>(path: impl AsRef<Path>, buffer: &AudioBuffer<T>, encoding: WavEncoding) -> Result<()> {
    let path = path.as_ref();
    let spec = WavSpec {
        channels: 1,
        sample_rate: buffer.sample_rate(),
        bits_per_sample: match encoding {
            WavEncoding::Pcm16 => 16,
            WavEncoding::Float32 => 32,
        },
        sample_format: match encoding {
            WavEncoding::Pcm16 => SampleFormat::Int,
            WavEncoding::Float32 => SampleFormat::Float,
        },
    };
    let to_err = |e: hound::Error| match e {
        hound::Error::IoError(io) => Error::io(path, io),
        other => wav_err(path, other.to_string()),
    };
    let mut w = WavWriter::create(path, spec).map_err(to_err)?;
    for &s in buffer.samples() {
        let s = s.to_f64_lossy();
        match encoding {
            WavEncoding::Pcm16 => {
                let code = (s * 32768.0).round().clamp(-32768.0, 32767.0) as i16;
                w.write_sample(code).map_err(to_err)?;
            }
            WavEncoding::Float32 => w.write_sample(s as f32).map_err(to_err)?,
        }
    }
    w.finalize().map_err(to_err)
}
