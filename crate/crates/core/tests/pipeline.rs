use std::fs;
use std::path::Path;

use puppet_audit::analysis::pipeline::AnalysisResults;
use puppet_audit::artifacts::{load_campaign, ArtifactError, MANIFEST_FILE};
use puppet_audit::campaign::{analyze_loaded, emit_report, run_to_dir, CampaignError};
use puppet_audit::config::CampaignConfig;
use puppet_audit::report::{banner, columns, render, TABLES};
use serde::Serialize;

const SMALL: &str = "\
[campaign]
master_seed = 4242
weeks = 2

[pool]
n_videos = 6000
n_channels = 120

[recommender]
copartisan_boost_dem = 1.2
copartisan_boost_rep = 1.8

[analysis]
metrics = likes, combined_lspc
recency = none, linear
reps = 10
verified_sweep = 0.6
mc_trials = 20
topic_min_count = 10
";

fn run(text: &str, dir: &Path) -> AnalysisResults {
    let cfg = CampaignConfig::parse(text).unwrap();
    run_to_dir(&cfg, text, dir, 2).unwrap();
    let loaded = load_campaign(&dir.join(MANIFEST_FILE)).unwrap();
    assert_eq!(loaded.config_text, text);
    analyze_loaded(&loaded, 2).unwrap().1
}

fn header<T: Serialize>(rows: &[T]) -> Option<Vec<String>> {
    let mut w = csv::WriterBuilder::new().has_headers(true).from_writer(vec![]);
    w.serialize(rows.first()?).unwrap();
    let text = String::from_utf8(w.into_inner().unwrap()).unwrap();
    Some(text.lines().next()?.split(',').map(str::to_string).collect())
}

fn serde_headers(r: &AnalysisResults) -> Vec<(&'static str, Option<Vec<String>>)> {
    vec![
        ("run_scores", header(&r.run_scores)),
        ("pair_skews", header(&r.pair_skews)),
        ("skew_by_week", header(&r.skew_by_week)),
        ("monthly_content", header(&r.monthly_content)),
        ("t_tests", header(&r.t_tests)),
        ("trends", header(&r.trends)),
        ("counterfactuals", header(&r.counterfactuals)),
        ("verified_sweep", header(&r.verified_sweep)),
        ("sensitivity", header(&r.sensitivity)),
        ("mismatch_channels", header(&r.mismatch_channels)),
        ("mismatch_test", header(&r.mismatch_test)),
        ("regression", header(&r.regression)),
        ("vif", header(&r.vif)),
        ("partisanship", header(&r.partisanship)),
        ("topics", header(&r.topics)),
        ("agreement", header(&r.agreement)),
        ("channel_classes", header(&r.channel_classes)),
        ("comments", header(&r.comments)),
        ("rolling_political", header(&r.rolling_political)),
    ]
}

#[test]
fn small_campaign_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let r = run(SMALL, dir.path());
    assert!(!r.pair_skews.is_empty());
    let skews: Vec<f64> = r.pair_skews.iter().filter_map(|p| p.skew).collect();
    assert!(skews.iter().all(|s| (-1.0..=1.0).contains(s)));
    let pooled = r.pooled_skew.unwrap();
    let mean = skews.iter().sum::<f64>() / skews.len() as f64;
    assert!((pooled - mean).abs() < 1e-12);

    let headers = serde_headers(&r);
    assert_eq!(headers.len() + 1, TABLES.len(), "every table but summary is covered");
    for (name, got) in headers {
        let want: Vec<String> = columns(name).unwrap().iter().map(|c| c.to_string()).collect();
        let got = got.unwrap_or_else(|| panic!("{name} is empty in the smoke campaign"));
        assert_eq!(got, want, "{name}");
    }

    for name in TABLES {
        let bytes = render(&r, name).unwrap();
        let text = String::from_utf8(bytes).unwrap();
        let mut lines = text.lines();
        assert_eq!(format!("{}\n", lines.next().unwrap()), banner(name));
        assert_eq!(lines.next().unwrap(), columns(name).unwrap().join(","));
    }
}

#[test]
fn no_pairs_gives_header_only_tables() {
    let text = SMALL.replace("weeks = 2", "weeks = 1\nmin_pair_length = 100000");
    let dir = tempfile::tempdir().unwrap();
    let r = run(&text, dir.path());
    assert!(r.pair_skews.is_empty());
    assert_eq!(r.pooled_skew, None);
    let out = dir.path().join("tables");
    let written = emit_report(&dir.path().join(MANIFEST_FILE), None, &out, 1, None).unwrap();
    assert_eq!(written.len(), TABLES.len());
    let pair = fs::read_to_string(out.join("pair_skews.csv")).unwrap();
    assert_eq!(pair.lines().count(), 2);
}

#[test]
fn tampered_and_missing_artifacts_are_reported() {
    let dir = tempfile::tempdir().unwrap();
    let text = SMALL.replace("weeks = 2", "weeks = 1");
    let cfg = CampaignConfig::parse(&text).unwrap();
    run_to_dir(&cfg, &text, dir.path(), 1).unwrap();
    let manifest = dir.path().join(MANIFEST_FILE);

    let runs = dir.path().join("runs");
    let victim = fs::read_dir(&runs).unwrap().next().unwrap().unwrap().path();
    let original = fs::read(&victim).unwrap();
    fs::write(&victim, b"{}\n").unwrap();
    assert!(matches!(load_campaign(&manifest), Err(ArtifactError::DigestMismatch(_))));

    fs::remove_file(&victim).unwrap();
    assert!(matches!(load_campaign(&manifest), Err(ArtifactError::MissingArtifact(_))));
    let e = emit_report(&manifest, None, &dir.path().join("t"), 1, None).unwrap_err();
    assert_eq!((e.kind(), e.exit_code()), ("missing_artifact", 3));

    fs::write(&victim, original).unwrap();
    load_campaign(&manifest).unwrap();
}

#[test]
fn misinfo_table_needs_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let text = SMALL.replace("weeks = 2", "weeks = 1");
    let cfg = CampaignConfig::parse(&text).unwrap();
    run_to_dir(&cfg, &text, dir.path(), 1).unwrap();
    let manifest = dir.path().join(MANIFEST_FILE);
    let out = dir.path().join("t");
    let e = emit_report(&manifest, Some(&["misinfo".to_string()]), &out, 1, None).unwrap_err();
    assert!(matches!(e, CampaignError::Config(_)));
    assert_eq!(e.exit_code(), 2);

    let corpus = dir.path().join("corpus.tsv");
    let transcripts = dir.path().join("transcripts.tsv");
    fs::write(&corpus, "ballots were counted twice\tFalse\n").unwrap();
    fs::write(&transcripts, "pro_republican\tballots were counted twice\nneutral\tcooking pasta\n").unwrap();
    let inputs = puppet_audit::campaign::MisinfoInputs { corpus, transcripts };
    let written = emit_report(&manifest, Some(&["misinfo".to_string(), "summary".to_string()]), &out, 1, Some(&inputs)).unwrap();
    assert_eq!(written.len(), 2);
    let csv = fs::read_to_string(out.join("misinfo.csv")).unwrap();
    assert!(csv.contains("pro_republican,1,100"), "{csv}");
}

#[test]
fn shipped_configs_parse() {
    for text in [include_str!("../../../configs/default.ini"), include_str!("../../../configs/smoke.ini")] {
        CampaignConfig::parse(text).unwrap();
    }
    let smoke = CampaignConfig::parse(include_str!("../../../configs/smoke.ini")).unwrap();
    assert_eq!(smoke.output.dir, "out/smoke");
}
