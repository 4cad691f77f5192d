use std::collections::BTreeMap;
use std::io::Read;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};

/// Emotion intensity columns; the last six are unnamed monitor emotions.
pub const INTENSITY_COLUMNS: [&str; 12] = [
    "int_anxiety",
    "int_sadness",
    "int_shame",
    "int_amusement",
    "int_joy",
    "int_pleasure",
    "int_7",
    "int_8",
    "int_9",
    "int_10",
    "int_11",
    "int_12",
];

pub const MANIFEST_COLUMNS: [&str; 6] = ["participant_id", "gender", "country", "phq8", "gad7", "wemwbs"];

pub const PHQ8_RANGE: (u32, u32) = (0, 24);
pub const GAD7_RANGE: (u32, u32) = (0, 21);
pub const WEMWBS_RANGE: (u32, u32) = (14, 70);
pub const INTENSITY_RANGE: (f64, f64) = (0.0, 7.0);
pub const PHQ8_CUTOFF: u32 = 10;

pub type Intensities = [Option<f64>; 12];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RiskLabel {
    Low,
    High,
}

impl RiskLabel {
    pub fn from_phq8(score: u32) -> Self {
        if score >= PHQ8_CUTOFF { RiskLabel::High } else { RiskLabel::Low }
    }

    pub fn is_high(self) -> bool {
        self == RiskLabel::High
    }
}

/// One recording session: the audio plus that day's intensity ratings.
#[derive(Debug, Clone, PartialEq)]
pub struct Recording {
    pub path: PathBuf,
    pub intensities: Intensities,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParticipantRecord {
    pub participant_id: String,
    pub gender: String,
    pub country: String,
    pub phq8: u32,
    pub gad7: u32,
    pub wemwbs: u32,
    pub recordings: Vec<Recording>,
}

impl ParticipantRecord {
    pub fn label(&self) -> RiskLabel {
        RiskLabel::from_phq8(self.phq8)
    }
}

fn score(row: usize, name: &str, raw: &str, (lo, hi): (u32, u32)) -> Result<u32> {
    let v: u32 = raw.trim().parse().map_err(|_| Error::Validation(format!("row {row}: {name} '{raw}' is not a non-negative integer")))?;
    if v < lo || v > hi {
        return Err(Error::Validation(format!("row {row}: {name} = {v} outside range {lo}-{hi}")));
    }
    Ok(v)
}

fn intensity(row: usize, name: &str, raw: &str) -> Result<Option<f64>> {
    let raw = raw.trim();
    if raw.is_empty() || raw.eq_ignore_ascii_case("na") {
        return Ok(None);
    }
    let v: f64 = raw.parse().map_err(|_| Error::Validation(format!("row {row}: {name} '{raw}' is not a number")))?;
    let (lo, hi) = INTENSITY_RANGE;
    if !(lo..=hi).contains(&v) {
        return Err(Error::Validation(format!("row {row}: {name} = {v} outside range {lo}-{hi}")));
    }
    Ok(Some(v))
}

/// Reads a manifest; relative audio paths resolve against its directory.
pub fn load_manifest(path: impl AsRef<Path>) -> Result<Vec<ParticipantRecord>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    parse_manifest(file, &base)
}

pub fn parse_manifest(reader: impl Read, base_dir: &Path) -> Result<Vec<ParticipantRecord>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let mut missing: Vec<&str> = MANIFEST_COLUMNS.iter().chain(&INTENSITY_COLUMNS).chain(&["audio_path"]).copied().filter(|c| col(c).is_none()).collect();
    missing.dedup();
    if !missing.is_empty() {
        return Err(Error::Validation(format!("manifest is missing column(s): {}", missing.join(", "))));
    }
    let idx = |name: &str| col(name).expect("checked above");

    let mut order: Vec<String> = Vec::new();
    let mut by_id: BTreeMap<String, ParticipantRecord> = BTreeMap::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 2; // header is row 1
        let rec = rec?;
        let get = |name: &str| rec.get(idx(name)).unwrap_or("");
        let id = get("participant_id").to_string();
        if id.is_empty() {
            return Err(Error::Validation(format!("row {row}: empty participant_id")));
        }
        let audio = get("audio_path");
        if audio.is_empty() {
            return Err(Error::Validation(format!("row {row}: empty audio_path")));
        }
        let mut intensities = [None; 12];
        for (k, name) in INTENSITY_COLUMNS.iter().enumerate() {
            intensities[k] = intensity(row, name, get(name))?;
        }
        let audio = PathBuf::from(audio);
        let recording = Recording { path: if audio.is_absolute() { audio } else { base_dir.join(audio) }, intensities };
        let candidate = ParticipantRecord {
            participant_id: id.clone(),
            gender: get("gender").to_string(),
            country: get("country").to_string(),
            phq8: score(row, "phq8", get("phq8"), PHQ8_RANGE)?,
            gad7: score(row, "gad7", get("gad7"), GAD7_RANGE)?,
            wemwbs: score(row, "wemwbs", get("wemwbs"), WEMWBS_RANGE)?,
            recordings: Vec::new(),
        };
        if candidate.gender.is_empty() || candidate.country.is_empty() {
            return Err(Error::Validation(format!("row {row}: gender and country are required")));
        }
        match by_id.get_mut(&id) {
            Some(existing) => {
                let same = existing.gender == candidate.gender
                    && existing.country == candidate.country
                    && existing.phq8 == candidate.phq8
                    && existing.gad7 == candidate.gad7
                    && existing.wemwbs == candidate.wemwbs;
                if !same {
                    return Err(Error::Validation(format!("row {row}: participant '{id}' repeats with conflicting demographics or scores")));
                }
                existing.recordings.push(recording);
            }
            None => {
                order.push(id.clone());
                let mut p = candidate;
                p.recordings.push(recording);
                by_id.insert(id, p);
            }
        }
    }
    Ok(order.into_iter().map(|id| by_id.remove(&id).expect("inserted")).collect())
}
