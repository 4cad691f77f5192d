//! Writes a synthetic desk corpus and a demo participant manifest.
//!
//! ```text
//! cargo run --example demo_data -- /tmp/voxrisk-demo
//! voxrisk robustness --corpus /tmp/voxrisk-demo/corpus --out ccc.json
//! voxrisk screen --manifest /tmp/voxrisk-demo/manifest.csv --out report.json --text-out report.txt
//! ```

use std::fmt::Write as _;
use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use voxrisk::audio::{write_wav, WavEncoding};
use voxrisk::synth::{self, VoiceParams};

fn main() -> voxrisk::Result<()> {
    let root = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "voxrisk-demo".into()));
    let corpus = root.join("corpus");
    let audio = root.join("audio");
    for d in [&corpus, &audio] {
        std::fs::create_dir_all(d).map_err(|e| voxrisk::Error::io(d, e))?;
    }

    for (i, (_, buf)) in synth::corpus(36, 4.0, 16000, 1).into_iter().enumerate() {
        write_wav(corpus.join(format!("utt{i:02}.wav")), &buf, WavEncoding::Pcm16)?;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut csv = String::from("participant_id,gender,country,phq8,gad7,wemwbs,");
    csv += "int_anxiety,int_sadness,int_shame,int_amusement,int_joy,int_pleasure,int_7,int_8,int_9,int_10,int_11,int_12,audio_path\n";
    for p in 0..40 {
        let high = p % 3 == 0;
        let phq: u32 = if high { rng.random_range(10..=20) } else { rng.random_range(0..=9) };
        let gad = (phq / 2 + rng.random_range(0..4)).min(21);
        let wem = 55 - phq + rng.random_range(0..8);
        let gender = if rng.random_bool(0.8) { "female" } else { "male" };
        let country = ["BE", "DE", "ES", "GB"][rng.random_range(0..4)];
        let mut voice = VoiceParams::random(&mut rng);
        if high {
            voice.f0_hz *= 0.95;
        }
        for r in 0..2 {
            let name = format!("p{p:02}_{r}.wav");
            write_wav(audio.join(&name), &synth::utterance(&voice, 3.0, 16000, 100 * p + r), WavEncoding::Pcm16)?;
            let anxiety = (if high { 4 } else { 2 }) + rng.random_range(0..3);
            let mut row = format!("P{p:02},{gender},{country},{phq},{gad},{wem},{anxiety}");
            for _ in 0..5 {
                let _ = write!(row, ",{}", rng.random_range(0..=7));
            }
            let _ = writeln!(csv, "{row},,,,,,,audio/{name}");
        }
    }
    let manifest = root.join("manifest.csv");
    std::fs::write(&manifest, csv).map_err(|e| voxrisk::Error::io(&manifest, e))?;
    println!("wrote {} and {}", corpus.display(), manifest.display());
    Ok(())
}
