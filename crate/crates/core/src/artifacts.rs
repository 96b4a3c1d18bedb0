//! Campaign output directories and their manifest.
//!
//! ```text
//! out/
//!   manifest.json     every other file with its SHA-256
//!   config.ini        the configuration that produced the campaign
//!   pool.jsonl        channels then videos
//!   schedule.json     scheduled run specs
//!   pairing.json      matched pairs, exclusions, unpaired runs
//!   runs/<run>.jsonl  one watch log per run
//! ```
//!
//! The manifest has no timestamps: one configuration always yields the
//! same bytes.

use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::harness::{Campaign, Exclusion, MatchedPair, RunSpec};
use crate::model::{read_pool_jsonl, read_run_jsonl, run_to_jsonl_bytes, write_pool_jsonl, ChannelRecord, ExperimentRun, ModelError, RunId, VideoRecord};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Error)]
pub enum ArtifactError {
    #[error("missing artifact {0}")]
    MissingArtifact(String),
    #[error("digest mismatch for {0}")]
    DigestMismatch(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ArtifactError + '_ {
    move |source| ArtifactError::Io {
        path: path.display().to_string(),
        source,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArtifactEntry {
    pub kind: String,
    /// Relative to the manifest's directory, `/`-separated.
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub master_seed: u64,
    pub runs: usize,
    pub matched_pairs: usize,
    pub exclusions: usize,
    pub artifacts: Vec<ArtifactEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pairing {
    pub pairs: Vec<MatchedPair>,
    pub exclusions: Vec<Exclusion>,
    pub unpaired: Vec<RunId>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

struct Writer<'a> {
    root: &'a Path,
    entries: Vec<ArtifactEntry>,
}

impl Writer<'_> {
    fn put(&mut self, kind: &str, rel: &str, bytes: &[u8]) -> Result<(), ArtifactError> {
        let path = self.root.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(io_err(parent))?;
        }
        fs::write(&path, bytes).map_err(io_err(&path))?;
        self.entries.push(ArtifactEntry {
            kind: kind.into(),
            path: rel.into(),
            sha256: sha256_hex(bytes),
            bytes: bytes.len() as u64,
        });
        Ok(())
    }
}

/// Writes a campaign directory and returns its manifest.
pub fn write_campaign(
    dir: &Path,
    config_text: &str,
    master_seed: u64,
    videos: &[VideoRecord],
    channels: &[ChannelRecord],
    campaign: &Campaign,
) -> Result<Manifest, ArtifactError> {
    let mut w = Writer {
        root: dir,
        entries: Vec::new(),
    };
    w.put("config", "config.ini", config_text.as_bytes())?;
    let mut pool = Vec::new();
    write_pool_jsonl(videos, channels, &mut pool)?;
    w.put("pool", "pool.jsonl", &pool)?;
    w.put("schedule", "schedule.json", &serde_json::to_vec_pretty(&campaign.specs)?)?;
    let pairing = Pairing {
        pairs: campaign.pairs.clone(),
        exclusions: campaign.exclusions.clone(),
        unpaired: campaign.unpaired.clone(),
    };
    w.put("pairing", "pairing.json", &serde_json::to_vec_pretty(&pairing)?)?;
    for run in &campaign.runs {
        w.put("run_log", &format!("runs/{}.jsonl", run.run_id), &run_to_jsonl_bytes(run))?;
    }
    let manifest = Manifest {
        tool: "puppet-audit".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        master_seed,
        runs: campaign.runs.len(),
        matched_pairs: campaign.pairs.len(),
        exclusions: campaign.exclusions.len(),
        artifacts: w.entries,
    };
    let path = dir.join(MANIFEST_FILE);
    let mut bytes = serde_json::to_vec_pretty(&manifest)?;
    bytes.push(b'\n');
    fs::write(&path, bytes).map_err(io_err(&path))?;
    Ok(manifest)
}

/// A campaign loaded back from disk, with every digest verified.
#[derive(Debug, Clone)]
pub struct LoadedCampaign {
    pub manifest: Manifest,
    pub root: PathBuf,
    pub config_text: String,
    pub videos: Vec<VideoRecord>,
    pub channels: Vec<ChannelRecord>,
    pub specs: Vec<RunSpec>,
    pub runs: Vec<ExperimentRun>,
    pub pairing: Pairing,
}

fn read_checked(root: &Path, entry: &ArtifactEntry) -> Result<Vec<u8>, ArtifactError> {
    let path = root.join(&entry.path);
    if !path.is_file() {
        return Err(ArtifactError::MissingArtifact(entry.path.clone()));
    }
    let bytes = fs::read(&path).map_err(io_err(&path))?;
    if sha256_hex(&bytes) != entry.sha256 {
        return Err(ArtifactError::DigestMismatch(entry.path.clone()));
    }
    Ok(bytes)
}

pub fn read_manifest(path: &Path) -> Result<Manifest, ArtifactError> {
    if !path.is_file() {
        return Err(ArtifactError::MissingArtifact(path.display().to_string()));
    }
    let f = fs::File::open(path).map_err(io_err(path))?;
    Ok(serde_json::from_reader(BufReader::new(f))?)
}

/// Loads the campaign a manifest describes.
pub fn load_campaign(manifest_path: &Path) -> Result<LoadedCampaign, ArtifactError> {
    let manifest = read_manifest(manifest_path)?;
    let root = manifest_path.parent().unwrap_or(Path::new(".")).to_path_buf();
    let one = |kind: &str| -> Result<Vec<u8>, ArtifactError> {
        let e = manifest
            .artifacts
            .iter()
            .find(|e| e.kind == kind)
            .ok_or_else(|| ArtifactError::MissingArtifact(kind.to_string()))?;
        read_checked(&root, e)
    };
    let config_text = String::from_utf8_lossy(&one("config")?).into_owned();
    let (videos, channels) = read_pool_jsonl(&one("pool")?[..])?;
    let specs: Vec<RunSpec> = serde_json::from_slice(&one("schedule")?)?;
    let pairing: Pairing = serde_json::from_slice(&one("pairing")?)?;
    let mut runs = Vec::new();
    for e in manifest.artifacts.iter().filter(|e| e.kind == "run_log") {
        runs.push(read_run_jsonl(&read_checked(&root, e)?[..])?);
    }
    runs.sort_by(|a, b| a.run_id.cmp(&b.run_id));
    Ok(LoadedCampaign {
        manifest,
        root,
        config_text,
        videos,
        channels,
        specs,
        runs,
        pairing,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sha256_reference() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
