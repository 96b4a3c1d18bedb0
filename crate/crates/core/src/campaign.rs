//! End-to-end drivers: configuration to campaign directory, campaign
//! directory to report tables.

use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::analysis::pipeline::{analyze, AnalysisResults};
use crate::analysis::AnalysisError;
use crate::artifacts::{load_campaign, write_campaign, ArtifactError, LoadedCampaign, Manifest};
use crate::config::{CampaignConfig, ConfigError};
use crate::harness::{run_campaign, HarnessError};
use crate::misinfo::{misinfo_report, read_corpus, read_transcripts, HashedBagOfTokens, MisinfoError};
use crate::model::{ChannelRecord, VideoRecord};
use crate::report::{write_tables, ReportError};
use crate::sim::{generate_pool, Recommender, SimError, World};

#[derive(Debug, Error)]
pub enum CampaignError {
    #[error("config: {0}")]
    Config(#[from] ConfigError),
    #[error("pool: {0}")]
    Sim(#[from] SimError),
    #[error("campaign: {0}")]
    Harness(#[from] HarnessError),
    #[error("artifact: {0}")]
    Artifact(#[from] ArtifactError),
    #[error("analysis: {0}")]
    Analysis(#[from] AnalysisError),
    #[error("report: {0}")]
    Report(#[from] ReportError),
    #[error("misinfo: {0}")]
    Misinfo(#[from] MisinfoError),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

impl CampaignError {
    /// 2 for configuration problems, 3 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CampaignError::Config(_) => 2,
            _ => 3,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CampaignError::Config(_) => "config",
            CampaignError::Sim(_) => "pool",
            CampaignError::Harness(_) => "campaign",
            CampaignError::Artifact(ArtifactError::MissingArtifact(_)) => "missing_artifact",
            CampaignError::Artifact(_) => "artifact",
            CampaignError::Analysis(_) => "analysis",
            CampaignError::Report(_) => "report",
            CampaignError::Misinfo(_) => "misinfo",
            CampaignError::Io { .. } => "io",
        }
    }
}

fn io_error(path: &Path, e: std::io::Error) -> CampaignError {
    CampaignError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

fn thread_pool(workers: usize) -> Result<rayon::ThreadPool, CampaignError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| HarnessError::WorkerPool(e.to_string()).into())
}

pub fn generate(cfg: &CampaignConfig) -> Result<(Vec<VideoRecord>, Vec<ChannelRecord>), CampaignError> {
    Ok(generate_pool(&cfg.pool)?)
}

/// Generates the pool, runs every scheduled bot, pairs the runs and writes
/// the campaign directory.
pub fn run_to_dir(cfg: &CampaignConfig, config_text: &str, dir: &Path, workers: usize) -> Result<Manifest, CampaignError> {
    let (videos, channels) = generate(cfg)?;
    let platform = Recommender::new(World::new(videos.clone(), channels.clone())?, cfg.recommender.clone())?;
    let campaign = run_campaign(&platform, &cfg.campaign, cfg.master_seed, workers)?;
    Ok(write_campaign(dir, config_text, cfg.master_seed, &videos, &channels, &campaign)?)
}

/// Runs the analysis pipeline on a loaded campaign with the options from
/// its stored configuration.
pub fn analyze_loaded(loaded: &LoadedCampaign, workers: usize) -> Result<(CampaignConfig, AnalysisResults), CampaignError> {
    let cfg = CampaignConfig::parse(&loaded.config_text)?;
    let world = World::new(loaded.videos.clone(), loaded.channels.clone())?;
    let results = thread_pool(workers)?.install(|| analyze(&world, &loaded.runs, &loaded.pairing.pairs, &cfg.analysis))?;
    Ok((cfg, results))
}

/// Transcript screening inputs for a report.
#[derive(Debug, Clone, Default)]
pub struct MisinfoInputs {
    pub corpus: PathBuf,
    pub transcripts: PathBuf,
}

/// Analyzes the campaign behind `manifest_path` and writes the selected
/// tables (all when `select` is `None`) into `out_dir`.
pub fn emit_report(
    manifest_path: &Path,
    select: Option<&[String]>,
    out_dir: &Path,
    workers: usize,
    misinfo: Option<&MisinfoInputs>,
) -> Result<Vec<PathBuf>, CampaignError> {
    let loaded = load_campaign(manifest_path)?;
    let (cfg, results) = analyze_loaded(&loaded, workers)?;
    let want_misinfo = select.is_none_or(|s| s.iter().any(|t| t == "misinfo"));
    let tables: Option<Vec<String>> = select.map(|s| s.iter().filter(|t| *t != "misinfo").cloned().collect());
    let mut paths = write_tables(&results, out_dir, tables.as_deref())?;
    let inputs = misinfo.cloned().or_else(|| {
        Some(MisinfoInputs {
            corpus: cfg.misinfo.corpus.as_ref()?.into(),
            transcripts: cfg.misinfo.transcripts.as_ref()?.into(),
        })
    });
    match inputs {
        Some(m) if want_misinfo => {
            let open = |p: &Path| fs::File::open(p).map_err(|e| io_error(p, e));
            let ratings: Vec<&str> = cfg.misinfo.ratings.iter().map(String::as_str).collect();
            let corpus = read_corpus(open(&m.corpus)?, &ratings)?;
            let transcripts = read_transcripts(open(&m.transcripts)?)?;
            let report = thread_pool(workers)?
                .install(|| misinfo_report(&transcripts, &corpus, &cfg.misinfo.thresholds, &HashedBagOfTokens::default()))?;
            let path = out_dir.join("misinfo.csv");
            fs::write(&path, report.to_csv()).map_err(|e| io_error(&path, e))?;
            paths.push(path);
        }
        None if select.is_some() && want_misinfo => {
            return Err(ConfigError {
                location: "misinfo".into(),
                message: "the misinfo table needs a corpus and transcripts".into(),
            }
            .into());
        }
        _ => {}
    }
    Ok(paths)
}
