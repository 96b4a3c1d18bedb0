use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use puppet_audit::artifacts::{load_campaign, sha256_hex, MANIFEST_FILE};
use puppet_audit::campaign::{analyze_loaded, emit_report, generate, run_to_dir, CampaignError, MisinfoInputs};
use puppet_audit::config::{CampaignConfig, ConfigError};
use puppet_audit::harness::{schedule_cohorts, CampaignSpec};
use puppet_audit::misinfo::{cosine_similarity, EmbeddingVector};
use puppet_audit::model::{validate_watch_log, write_pool_jsonl, LogLimits};
use puppet_audit::report::{write_tables, TABLES};

/// Sock-puppet audits of a simulated recommendation platform.
///
/// Exit codes: 0 success, 2 configuration error, 3 data error. Failures
/// print one JSON error record on stderr.
#[derive(Parser)]
#[command(name = "puppet-audit", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the content pool and write it as JSON Lines.
    GenPool {
        #[arg(long)]
        config: PathBuf,
        /// Output file [default: <output.dir>/pool.jsonl]
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a full campaign and write its logs and manifest.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Campaign directory [default: output.dir from the config]
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads [default: campaign.workers from the config]
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Analyze a campaign, write every table and print a JSON summary.
    Analyze {
        #[arg(long)]
        manifest: PathBuf,
        /// Table directory [default: <campaign dir>/tables]
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        workers: usize,
    },
    /// Write selected report tables for a campaign.
    Report {
        #[arg(long)]
        manifest: PathBuf,
        /// Comma-separated table names, or "all".
        #[arg(long, value_delimiter = ',', default_value = "all")]
        tables: Vec<String>,
        /// Table directory [default: <campaign dir>/tables]
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        /// Headline corpus (tab-separated headline, rating).
        #[arg(long, requires = "transcripts")]
        corpus: Option<PathBuf>,
        /// Transcripts (tab-separated stance, text).
        #[arg(long, requires = "corpus")]
        transcripts: Option<PathBuf>,
    },
    /// Run a one-week campaign and check protocol and determinism invariants.
    Selftest {
        #[arg(long, default_value_t = 2)]
        workers: usize,
    },
    /// List the report tables.
    Tables,
}

const SELFTEST_CONFIG: &str = "\
[campaign]
master_seed = 20241105
weeks = 1

[pool]
n_videos = 6000
n_channels = 120

[recommender]
copartisan_boost_dem = 1.3
copartisan_boost_rep = 2.0

[analysis]
metrics = likes, combined_lspc
recency = none, exponential
reps = 20
verified_sweep = 0.5, 0.9
mc_trials = 20
topic_min_count = 20
";

fn load_config(path: &Path) -> Result<(CampaignConfig, String), CampaignError> {
    let text = fs::read_to_string(path).map_err(|e| ConfigError {
        location: path.display().to_string(),
        message: e.to_string(),
    })?;
    Ok((CampaignConfig::parse(&text)?, text))
}

fn campaign_root(manifest: &Path) -> PathBuf {
    manifest.parent().unwrap_or(Path::new(".")).to_path_buf()
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> CampaignError + '_ {
    move |e| CampaignError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

fn execute(cli: Cli) -> Result<(), CampaignError> {
    match cli.command {
        Command::GenPool { config, out } => {
            let (cfg, _) = load_config(&config)?;
            let out = out.unwrap_or_else(|| Path::new(&cfg.output.dir).join("pool.jsonl"));
            let (videos, channels) = generate(&cfg)?;
            if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
                fs::create_dir_all(parent).map_err(io(parent))?;
            }
            let mut buf = Vec::new();
            write_pool_jsonl(&videos, &channels, &mut buf).map_err(puppet_audit::artifacts::ArtifactError::from)?;
            fs::write(&out, &buf).map_err(io(&out))?;
            println!(
                "{}",
                json!({"pool": out, "videos": videos.len(), "channels": channels.len(), "sha256": sha256_hex(&buf)})
            );
        }
        Command::Run { config, out, workers } => {
            let (cfg, text) = load_config(&config)?;
            let dir = out.unwrap_or_else(|| PathBuf::from(&cfg.output.dir));
            let m = run_to_dir(&cfg, &text, &dir, workers.unwrap_or(cfg.workers))?;
            println!(
                "{}",
                json!({"manifest": dir.join(MANIFEST_FILE), "runs": m.runs, "matched_pairs": m.matched_pairs, "exclusions": m.exclusions})
            );
        }
        Command::Analyze { manifest, out, workers } => {
            let loaded = load_campaign(&manifest)?;
            let (_, results) = analyze_loaded(&loaded, workers)?;
            let dir = out.unwrap_or_else(|| campaign_root(&manifest).join("tables"));
            let written = write_tables(&results, &dir, None)?;
            let tests: Vec<_> = results
                .t_tests
                .iter()
                .map(|t| json!({"comparison": t.comparison, "mean_a": t.mean_a, "mean_b": t.mean_b, "t": t.t, "p": t.p}))
                .collect();
            println!(
                "{}",
                json!({"tables": written.len(), "dir": dir, "matched_pairs": results.pair_skews.len(), "pooled_skew": results.pooled_skew, "t_tests": tests})
            );
        }
        Command::Report {
            manifest,
            tables,
            out,
            workers,
            corpus,
            transcripts,
        } => {
            let dir = out.unwrap_or_else(|| campaign_root(&manifest).join("tables"));
            let select = if tables.iter().any(|t| t == "all") { None } else { Some(tables) };
            if let Some(s) = &select {
                if let Some(bad) = s.iter().find(|t| *t != "misinfo" && !TABLES.contains(&t.as_str())) {
                    return Err(ConfigError {
                        location: "--tables".into(),
                        message: format!("unknown table {bad:?}"),
                    }
                    .into());
                }
            }
            let misinfo = corpus.zip(transcripts).map(|(corpus, transcripts)| MisinfoInputs { corpus, transcripts });
            let written = emit_report(&manifest, select.as_deref(), &dir, workers, misinfo.as_ref())?;
            println!("{}", json!({"written": written}));
        }
        Command::Selftest { workers } => return selftest(workers),
        Command::Tables => {
            for t in TABLES {
                println!("{t}");
            }
        }
    }
    Ok(())
}

fn selftest(workers: usize) -> Result<(), CampaignError> {
    let mut failures = 0;
    let mut check = |name: &str, ok: bool, detail: serde_json::Value| {
        failures += usize::from(!ok);
        println!("{}", json!({"check": name, "ok": ok, "detail": detail}));
    };

    let full = schedule_cohorts(&CampaignSpec::default(), 0)?;
    check("default_schedule_567", full.len() == 567, json!(full.len()));

    let cfg = CampaignConfig::parse(SELFTEST_CONFIG)?;
    let scratch = std::env::temp_dir().join(format!("puppet-audit-selftest-{}", std::process::id()));
    let (a, b) = (scratch.join("a"), scratch.join("b"));
    let ma = run_to_dir(&cfg, SELFTEST_CONFIG, &a, 1)?;
    let mb = run_to_dir(&cfg, SELFTEST_CONFIG, &b, workers)?;
    let bytes = |d: &Path| fs::read(d.join(MANIFEST_FILE)).unwrap_or_default();
    check("manifest_determinism", ma == mb && bytes(&a) == bytes(&b), json!({"workers": [1, workers]}));

    let loaded = load_campaign(&a.join(MANIFEST_FILE))?;
    let known = puppet_audit::sim::World::new(loaded.videos.clone(), loaded.channels.clone())?.video_ids();
    let limits = LogLimits {
        conditioning_cap: (cfg.campaign.conditioning_channels_per_run * cfg.campaign.videos_per_channel) as u32,
        recommendation_cap: cfg.campaign.rec_cap as u32,
    };
    let violations: usize = loaded
        .runs
        .iter()
        .map(|r| validate_watch_log(r, Some(&known), limits).violations.len())
        .sum();
    check("watch_logs_valid", violations == 0, json!({"runs": loaded.runs.len(), "violations": violations}));

    let min = cfg.campaign.min_pair_length;
    let pairs_ok = loaded.pairing.pairs.iter().all(|p| p.n >= min) && loaded.pairing.exclusions.iter().all(|e| e.n < min);
    check(
        "pair_rule",
        pairs_ok,
        json!({"pairs": loaded.pairing.pairs.len(), "exclusions": loaded.pairing.exclusions.len()}),
    );

    let ra = emit_report(&a.join(MANIFEST_FILE), None, &a.join("tables"), 1, None)?;
    let rb = emit_report(&b.join(MANIFEST_FILE), None, &b.join("tables"), workers, None)?;
    let same = ra.len() == rb.len()
        && ra.iter().zip(&rb).all(|(x, y)| fs::read(x).ok().is_some_and(|bx| Some(bx) == fs::read(y).ok()));
    check("report_determinism", same, json!({"tables": ra.len()}));

    let u = EmbeddingVector::new(vec![1.0, 2.0, 3.0]).map_err(CampaignError::from)?;
    let v = EmbeddingVector::new(vec![4.0, 5.0, 6.0]).map_err(CampaignError::from)?;
    let c = cosine_similarity(&u, &v)?;
    check("cosine_fixture", (c - 0.974632).abs() < 1e-6, json!(c));

    let _ = fs::remove_dir_all(&scratch);
    if failures > 0 {
        return Err(CampaignError::Io {
            path: "selftest".into(),
            message: format!("{failures} check(s) failed"),
        });
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let code = e.exit_code();
            eprintln!("{}", json!({"error": e.kind(), "message": e.to_string(), "exit_code": code}));
            ExitCode::from(code as u8)
        }
    }
}
