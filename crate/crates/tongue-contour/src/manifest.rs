//! Corpus manifest: a JSON array of entries, iterated in file order.

use std::collections::HashSet;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use tongue_contour_core::Split;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ManifestEntry {
    pub id: String,
    pub image_path: PathBuf,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prob_path: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truth_contour_path: Option<PathBuf>,
    pub speaker: String,
    pub split: Split,
}

// Split is read as a plain string so a bad value can name its entry.
#[derive(Deserialize)]
struct RawEntry {
    id: String,
    image_path: PathBuf,
    #[serde(default)]
    prob_path: Option<PathBuf>,
    #[serde(default)]
    truth_contour_path: Option<PathBuf>,
    speaker: String,
    split: String,
}

#[derive(Debug, Error)]
pub enum ManifestError {
    #[error("manifest is not a valid entry array: {0}")]
    Json(#[from] serde_json::Error),
    #[error("entry {index} ({id:?}): duplicate id")]
    DuplicateId { index: usize, id: String },
    #[error("entry {index} ({id:?}): invalid split {value:?}, expected train, valid, test or unassigned")]
    InvalidSplit { index: usize, id: String, value: String },
}

pub fn read_manifest(text: &str) -> Result<Vec<ManifestEntry>, ManifestError> {
    let raw: Vec<RawEntry> = serde_json::from_str(text)?;
    let mut seen = HashSet::new();
    raw.into_iter()
        .enumerate()
        .map(|(index, e)| {
            if !seen.insert(e.id.clone()) {
                return Err(ManifestError::DuplicateId { index, id: e.id });
            }
            let split = e.split.parse().map_err(|()| ManifestError::InvalidSplit {
                index,
                id: e.id.clone(),
                value: e.split.clone(),
            })?;
            Ok(ManifestEntry {
                id: e.id,
                image_path: e.image_path,
                prob_path: e.prob_path,
                truth_contour_path: e.truth_contour_path,
                speaker: e.speaker,
                split,
            })
        })
        .collect()
}

pub fn write_manifest(entries: &[ManifestEntry]) -> String {
    let mut out = serde_json::to_string_pretty(entries).expect("entries serialize");
    out.push('\n');
    out
}
