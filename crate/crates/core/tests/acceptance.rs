//! Acceptance checks AC1 to AC9, one PASS/FAIL line each.
//!
//! Run with `cargo test -p puppet-audit --test acceptance`.

mod common;

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use puppet_audit::analysis::pipeline::{analyze, AnalysisOptions, AnalysisResults};
use puppet_audit::analysis::{
    counterfactual_skew, logistic_fit, logistic_log_likelihood, pca_first_component_weights, rep_skews, required_scaling,
    sensitivity_curve, vif_scores, vif_screen, CounterfactualModelSpec, FamilyParams, Metric, Recency, SensitivitySpec,
    WeightedSampler,
};
use puppet_audit::campaign::{emit_report, run_to_dir};
use puppet_audit::config::CampaignConfig;
use puppet_audit::harness::{run_campaign, schedule_cohorts, truncated_recommendations, Campaign, CampaignSpec};
use puppet_audit::labeling::{
    accuracy, cohen_kappa, cohen_kappa_labels, f1_macro, fleiss_kappa, fleiss_kappa_counts, krippendorff_alpha_nominal,
    LabelError,
};
use puppet_audit::misinfo::{
    cosine_similarity, misinfo_report, parse_corpus, EmbeddingVector, HashedBagOfTokens, Transcript,
};
use puppet_audit::model::{Alignment, Leaning, StanceLabel};
use puppet_audit::seed::rng_from;
use puppet_audit::sim::{generate_pool, ContentPoolSpec, Recommender, RecommenderParams, World};
use rand::Rng;

type Check = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn campaign_with(boost_dem: f64, boost_rep: f64, seed: u64) -> (World, Campaign) {
    let (videos, channels) = generate_pool(&ContentPoolSpec {
        seed,
        ..ContentPoolSpec::default()
    })
    .expect("pool");
    let params = RecommenderParams {
        copartisan_boost_dem: boost_dem,
        copartisan_boost_rep: boost_rep,
        ..RecommenderParams::default()
    };
    let platform = Recommender::new(World::new(videos.clone(), channels.clone()).unwrap(), params).unwrap();
    let campaign = run_campaign(&platform, &CampaignSpec::default(), seed, workers()).expect("campaign");
    (World::new(videos, channels).unwrap(), campaign)
}

fn t_row<'a>(r: &'a AnalysisResults, name: &str) -> Result<&'a puppet_audit::analysis::pipeline::TTestRow, String> {
    r.t_tests.iter().find(|t| t.comparison == name).ok_or(format!("no {name} t-test"))
}

fn ac1(asym: &(World, Campaign)) -> Check {
    let start = Instant::now();
    let (world, campaign) = asym;
    let results = analyze(world, &campaign.runs, &campaign.pairs, &AnalysisOptions::new(11)).map_err(|e| e.to_string())?;
    let elapsed_analysis = start.elapsed();
    ensure(results.pair_skews.len() >= 30, || format!("{} matched pairs", results.pair_skews.len()))?;
    let co = t_row(&results, "copartisan_share")?;
    let content = t_row(&results, "ideological_content")?;
    let p_content = content.p.ok_or("content t-test has no p")?;
    ensure(content.mean_a > content.mean_b && p_content < 0.01, || {
        format!("content rep {:.4} vs dem {:.4}, p {p_content:e}", content.mean_a, content.mean_b)
    })?;

    let sym = campaign_with(1.5, 1.5, 11);
    let sym_results = analyze(&sym.0, &sym.1.runs, &sym.1.pairs, &AnalysisOptions::new(11)).map_err(|e| e.to_string())?;
    let pooled = sym_results.pooled_skew.ok_or("no pooled skew")?;
    ensure(pooled.abs() < 0.02, || format!("symmetric pooled skew {pooled:.4}"))?;
    Ok(format!(
        "pairs {}, ideological content rep {:.3} vs dem {:.3} (Welch p {p_content:.1e}), copartisan share rep {:.3} vs dem {:.3}, symmetric pooled skew {pooled:+.4}, analysis {:.1}s",
        results.pair_skews.len(),
        content.mean_a,
        content.mean_b,
        co.mean_a,
        co.mean_b,
        elapsed_analysis.as_secs_f64()
    ))
}

fn ac2() -> Check {
    let mut worst: f64 = 0.0;
    for i in 0..100u64 {
        let pool = common::random_pool(1000 + i, 8 + (i as usize % 40));
        let metric = Metric::ALL[i as usize % Metric::ALL.len()];
        let recency = [Recency::None, Recency::Linear, Recency::exponential()][i as usize % 3];
        let spec = CounterfactualModelSpec {
            reps: 100,
            ..CounterfactualModelSpec::new(metric, recency)
        };
        let week = 3;
        let weights = common::oracle_weights(&pool, metric, recency, spec.verified_weight, week);
        let alignments: Vec<Alignment> = pool.iter().map(|p| p.alignment()).collect();
        let closed = common::closed_form_skew(&alignments, &weights);
        let r = counterfactual_skew(&pool, &spec, week, 40, &mut rng_from(i)).map_err(|e| format!("pool {i}: {e}"))?;
        ensure((r.expected - closed).abs() < 1e-8, || format!("pool {i}: expected {} vs oracle {closed}", r.expected))?;
        let z = (r.mean - closed).abs() / r.std_error;
        worst = worst.max(z);
        ensure(z < 4.0, || format!("pool {i} ({}): |mean - closed| = {z:.2} SE", spec.label()))?;
    }

    // Ordered outcomes of 2 draws from 3 videos.
    let weights = [3.0, 1.0, 2.0];
    let sampler = WeightedSampler::new(&weights).unwrap();
    let reps = 60_000;
    let mut counts = [[0usize; 3]; 3];
    let mut rng = rng_from(5);
    for _ in 0..reps {
        counts[sampler.sample(&mut rng)][sampler.sample(&mut rng)] += 1;
    }
    let mut cells = 0;
    for (a, row) in counts.iter().enumerate() {
        for (b, c) in row.iter().enumerate() {
            let p = weights[a] * weights[b] / 36.0;
            let sigma = (p * (1.0 - p) / reps as f64).sqrt();
            let f = *c as f64 / reps as f64;
            ensure((f - p).abs() <= 3.0 * sigma, || format!("outcome ({a},{b}): {f:.4} vs {p:.4}"))?;
            cells += 1;
        }
    }

    use Alignment::*;
    let cases: [(&[Alignment], &[f64], usize); 3] = [
        (&[RepAligned, DemAligned, Neutral], &[3.0, 1.0, 2.0], 2),
        (&[RepAligned, DemAligned, DemAligned, Neutral], &[1.0, 2.0, 0.5, 4.0], 3),
        (&[RepAligned, RepAligned, DemAligned, Neutral], &[5.0, 1.0, 1.0, 1.0], 1),
    ];
    for (k, (al, w, n)) in cases.iter().enumerate() {
        let exact = common::enumerate_net_counts(al, w, *n);
        let skews = rep_skews(al, w, *n, reps, &mut rng_from(100 + k as u64)).unwrap();
        let mut freq: BTreeMap<i64, usize> = BTreeMap::new();
        for s in skews {
            *freq.entry((s * *n as f64).round() as i64).or_default() += 1;
        }
        for (net, p) in &exact {
            let f = *freq.get(net).unwrap_or(&0) as f64 / reps as f64;
            let sigma = (p * (1.0 - p) / reps as f64).sqrt();
            ensure((f - p).abs() <= 3.0 * sigma, || format!("case {k} net {net}: {f:.4} vs {p:.4}"))?;
            cells += 1;
        }
        ensure(freq.keys().all(|k| exact.contains_key(k)), || format!("case {k}: impossible outcome"))?;
    }
    Ok(format!("100 pools within 4 SE (max {worst:.2}), {cells} enumerated cells within 3 sigma"))
}

fn ac3() -> Check {
    let n = 2000;
    let alignments = common::alternating(n);
    let families = [
        (FamilyParams::Normal { mean: 10.0, sd: 1.0 }, 0.25),
        (FamilyParams::Lognormal { mean: 1.0, sigma: 0.5 }, 0.13),
        (FamilyParams::Poisson { mean: 2.0, resolution: 100.0 }, 0.035),
        (FamilyParams::Binomial { mean: 0.3, trials: 200 }, 0.008),
    ];
    let mut out = Vec::new();
    for (f, (params, gap)) in families.iter().enumerate() {
        let name = params.family().as_str();
        let grid: Vec<f64> = (-4..=40).map(|i| i as f64 * gap / 4.0).collect();
        let curve = sensitivity_curve(&alignments, *params, &grid, 200, &mut rng_from(7)).map_err(|e| e.to_string())?;
        ensure(curve.windows(2).all(|w| w[1] >= w[0] - 1e-12), || format!("{name}: s(delta) not monotone"))?;
        let mut ks = Vec::new();
        for (j, k) in [1.0, 3.0, 9.4].into_iter().enumerate() {
            let target = common::planted_skew(&alignments, *params, k * gap, 2000, 2000, 31 * f as u64 + j as u64);
            let spec = SensitivitySpec {
                params: *params,
                target_skew: target,
                mc_trials: 1000,
                search_tolerance: 1e-5,
            };
            let r = required_scaling(&alignments, &spec, *gap, &mut rng_from(99)).map_err(|e| format!("{name} k={k}: {e}"))?;
            ensure((r.k - k).abs() <= 0.1 * k, || format!("{name}: planted k={k}, recovered {:.3}", r.k))?;
            ks.push(format!("{:.2}", r.k));
        }
        out.push(format!("{name} [{}]", ks.join(", ")));
    }
    Ok(format!("recovered k for planted 1, 3, 9.4: {}", out.join("; ")))
}

fn ac4() -> Check {
    let close = |a: f64, b: f64, what: &str| ensure((a - b).abs() < 1e-9, || format!("{what}: {a} vs {b}"));
    // Cohen: 50 items, two raters.
    let m = vec![vec![20, 5], vec![10, 15]];
    let po = 35.0 / 50.0;
    let pe = (25.0 * 30.0 + 25.0 * 20.0) / 2500.0;
    close(cohen_kappa(&m).unwrap(), (po - pe) / (1.0 - pe), "cohen")?;
    close(accuracy(&m).unwrap(), 0.7, "accuracy")?;
    close(f1_macro(&m).unwrap(), (40.0 / 55.0 + 30.0 / 45.0) / 2.0, "macro-F1")?;

    // Fleiss: 10 subjects, 14 raters, 5 categories.
    let t: Vec<Vec<u64>> = vec![
        vec![0, 0, 0, 0, 14],
        vec![0, 2, 6, 4, 2],
        vec![0, 0, 3, 5, 6],
        vec![0, 3, 9, 2, 0],
        vec![2, 2, 8, 1, 1],
        vec![7, 7, 0, 0, 0],
        vec![3, 2, 6, 3, 0],
        vec![2, 5, 3, 2, 2],
        vec![6, 5, 2, 1, 0],
        vec![0, 2, 2, 3, 7],
    ];
    let raters = 14.0;
    let p_bar = t
        .iter()
        .map(|row| row.iter().map(|&c| (c * c) as f64).sum::<f64>() - raters)
        .sum::<f64>()
        / (10.0 * raters * (raters - 1.0));
    let p_e: f64 = (0..5)
        .map(|j| (t.iter().map(|r| r[j]).sum::<u64>() as f64 / 140.0).powi(2))
        .sum();
    close(fleiss_kappa_counts(&t).unwrap(), (p_bar - p_e) / (1.0 - p_e), "fleiss")?;

    // Krippendorff nominal with missing values: 4 coders, 12 units.
    let d = |v: &[i32]| v.iter().map(|&x| if x == 0 { None } else { Some(x) }).collect::<Vec<_>>();
    let r = vec![
        d(&[1, 2, 3, 3, 2, 1, 4, 1, 2, 0, 0, 0]),
        d(&[1, 2, 3, 3, 2, 2, 4, 1, 2, 5, 0, 3]),
        d(&[0, 3, 3, 3, 2, 3, 4, 2, 2, 5, 1, 0]),
        d(&[1, 2, 3, 3, 2, 4, 4, 1, 2, 5, 1, 0]),
    ];
    let alpha = krippendorff_alpha_nominal(&r).unwrap();
    close(alpha, krippendorff_oracle(&r), "krippendorff")?;
    ensure((alpha - 0.743).abs() < 5e-4, || format!("published 0.743, got {alpha}"))?;

    let same = vec![vec!["a", "b", "b", "c"], vec!["a", "b", "b", "c"], vec!["a", "b", "b", "c"]];
    ensure(fleiss_kappa(&same) == Ok(1.0), || "fleiss perfect".into())?;
    ensure(cohen_kappa_labels(&same[0], &same[1]) == Ok(1.0), || "cohen perfect".into())?;
    let so: Vec<Vec<Option<&str>>> = same.iter().map(|r| r.iter().copied().map(Some).collect()).collect();
    ensure(krippendorff_alpha_nominal(&so) == Ok(1.0), || "alpha perfect".into())?;

    let flat = vec![vec!["x"; 5], vec!["x"; 5]];
    ensure(fleiss_kappa(&flat) == Err(LabelError::DegenerateAgreement), || "fleiss degenerate".into())?;
    ensure(cohen_kappa_labels(&flat[0], &flat[1]) == Err(LabelError::DegenerateAgreement), || "cohen degenerate".into())?;
    ensure(
        matches!(fleiss_kappa(&flat[..1]), Err(LabelError::InsufficientData(_))),
        || "single rater".into(),
    )?;
    Ok("Cohen, accuracy, macro-F1, Fleiss, Krippendorff match hand values to 1e-9; perfect = 1.0; degenerate errors".into())
}

/// Nominal alpha from the coincidence matrix: each unit with `m >= 2`
/// values adds `1 / (m - 1)` for every ordered pair of values from
/// different coders.
fn krippendorff_oracle(r: &[Vec<Option<i32>>]) -> f64 {
    let mut o: BTreeMap<(i32, i32), f64> = BTreeMap::new();
    for u in 0..r[0].len() {
        let vals: Vec<i32> = r.iter().filter_map(|row| row[u]).collect();
        let m = vals.len();
        if m < 2 {
            continue;
        }
        for i in 0..m {
            for j in 0..m {
                if i != j {
                    *o.entry((vals[i], vals[j])).or_default() += 1.0 / (m - 1) as f64;
                }
            }
        }
    }
    let mut marg: BTreeMap<i32, f64> = BTreeMap::new();
    for ((c, _), v) in &o {
        *marg.entry(*c).or_default() += v;
    }
    let n: f64 = marg.values().sum();
    let observed: f64 = o.iter().filter(|((a, b), _)| a != b).map(|(_, v)| v).sum();
    let expected: f64 = marg
        .iter()
        .flat_map(|(a, na)| marg.iter().filter(move |(b, _)| *b != a).map(move |(_, nb)| na * nb))
        .sum::<f64>()
        / (n - 1.0);
    1.0 - observed / expected
}

fn ac5() -> Check {
    let beta = [0.5, -1.0];
    let (x, y) = common::logistic_data(&beta, 5000, 42);
    let names = vec!["intercept".to_string(), "x".to_string()];
    let fit = logistic_fit(&x, &names, &y, 0.0).map_err(|e| e.to_string())?;
    for (t, b) in fit.terms.iter().zip(beta) {
        ensure((t.coefficient - b).abs() < 3.0 * t.std_error, || format!("{}: {} vs {b}", t.name, t.coefficient))?;
        ensure(t.odds_ratio == t.coefficient.exp(), || "odds ratio".into())?;
    }
    let b = DVector::from_iterator(2, fit.terms.iter().map(|t| t.coefficient));
    let p = (&x * &b).map(|e| 1.0 / (1.0 + (-e).exp()));
    let score = x.transpose() * (DVector::from_vec(y.clone()) - p);
    let score_max = score.amax();
    ensure(score_max < 1e-8, || format!("score {score_max:e}"))?;

    let at = DVector::from_vec(vec![0.2, -0.4]);
    let p = (&x * &at).map(|e| 1.0 / (1.0 + (-e).exp()));
    let analytic = x.transpose() * (DVector::from_vec(y.clone()) - p);
    let mut worst: f64 = 0.0;
    for j in 0..2 {
        let h = 1e-5;
        let mut up = at.clone();
        up[j] += h;
        let mut dn = at.clone();
        dn[j] -= h;
        let fd = (logistic_log_likelihood(&x, &y, &up, 0.0) - logistic_log_likelihood(&x, &y, &dn, 0.0)) / (2.0 * h);
        let rel = (fd - analytic[j]).abs() / analytic[j].abs();
        worst = worst.max(rel);
    }
    ensure(worst < 1e-5, || format!("finite difference rel error {worst:e}"))?;

    let mut rng = rng_from(3);
    let n = 200;
    let x1: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
    let x3: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
    let dup = DMatrix::from_fn(n, 3, |i, j| [x1[i], x1[i], x3[i]][j]);
    let v = vif_scores(&dup).map_err(|e| e.to_string())?;
    ensure(v[0].is_infinite() && v[1].is_infinite(), || format!("duplicate VIF {v:?}"))?;
    let screen = vif_screen(&dup, 5.0).map_err(|e| e.to_string())?;
    ensure(screen.dropped.len() == 1 && screen.vif.iter().all(|v| *v < 5.0), || format!("{screen:?}"))?;

    let noisy = DMatrix::from_fn(n, 3, |i, j| [x1[i], x1[i] + 0.1 * x3[i].sin(), x3[i]][j]);
    let v = vif_scores(&noisy).map_err(|e| e.to_string())?;
    for j in 0..3 {
        let others: Vec<usize> = (0..3).filter(|k| *k != j).collect();
        let a = DMatrix::from_fn(n, 3, |i, c| if c == 0 { 1.0 } else { noisy[(i, others[c - 1])] });
        let target = noisy.column(j).into_owned();
        let coef = a.clone().svd(true, true).solve(&target, 1e-14).unwrap();
        let resid = &target - &a * coef;
        let mean = target.mean();
        let tss: f64 = target.iter().map(|t| (t - mean).powi(2)).sum();
        let oracle = 1.0 / (resid.norm_squared() / tss);
        ensure((v[j] - oracle).abs() < 1e-8 * oracle.max(1.0), || format!("VIF {j}: {} vs {oracle}", v[j]))?;
    }
    Ok(format!(
        "beta ({:.3}, {:.3}) within 3 SE, score {score_max:.1e}, FD rel {worst:.1e}, duplicate VIF inf and screened",
        fit.terms[0].coefficient, fit.terms[1].coefficient
    ))
}

fn ac6() -> Check {
    let mut rng = rng_from(8);
    let col: Vec<f64> = (0..30).map(|_| rng.random()).collect();
    let dup = DMatrix::from_fn(30, 2, |i, _| col[i]);
    let w = pca_first_component_weights(&dup).map_err(|e| e.to_string())?;
    ensure(w == vec![0.5, 0.5], || format!("duplicate columns gave {w:?}"))?;
    let mut worst: f64 = 0.0;
    for trial in 0..40 {
        let cols = 3 + trial % 4;
        let rows = 20 + trial * 3;
        let mix: Vec<f64> = (0..cols).map(|_| rng.random_range(0.2..1.0)).collect();
        let shared: Vec<f64> = (0..rows).map(|_| rng.random()).collect();
        let m = DMatrix::from_fn(rows, cols, |i, j| mix[j] * shared[i] + 0.5 * rng.random::<f64>());
        let w = pca_first_component_weights(&m).map_err(|e| e.to_string())?;
        let oracle = common::pca_oracle(&m);
        for (a, b) in w.iter().zip(&oracle) {
            worst = worst.max((a - b).abs());
        }
        let sum: f64 = w.iter().sum();
        ensure((sum - 1.0).abs() < 1e-12, || format!("weights sum to {sum}"))?;
    }
    ensure(worst < 1e-8, || format!("max deviation from dense eigensolve {worst:e}"))?;
    Ok(format!("duplicate columns exactly [0.5, 0.5]; 40 fixtures within {worst:.1e} of dense eigensolve"))
}

fn ac7(asym: &(World, Campaign)) -> Check {
    let spec = CampaignSpec::default();
    let schedule = schedule_cohorts(&spec, 0).map_err(|e| e.to_string())?;
    ensure(schedule.len() == 567, || format!("{} scheduled runs", schedule.len()))?;
    let campaign = &asym.1;
    ensure(campaign.runs.len() == 567, || format!("{} runs", campaign.runs.len()))?;
    let cond_cap = (spec.conditioning_channels_per_run * spec.videos_per_channel) as u32;
    let max_cond = campaign.runs.iter().map(|r| r.conditioning_count).max().unwrap_or(0);
    let max_rec = campaign.runs.iter().map(|r| r.recommendation_count()).max().unwrap_or(0);
    ensure(cond_cap == 400 && max_cond == 400, || format!("conditioning max {max_cond}"))?;
    ensure(max_rec == 1200, || format!("recommendation max {max_rec}"))?;
    let controls_ok = campaign
        .runs
        .iter()
        .filter(|r| r.condition.leaning == Leaning::NeutralControl)
        .all(|r| r.conditioning_count == 0);
    ensure(controls_ok, || "control run was conditioned".into())?;
    let by_id = |id: &puppet_audit::model::RunId| campaign.runs.iter().find(|r| &r.run_id == id).unwrap();
    for p in &campaign.pairs {
        let (d, r) = (by_id(&p.dem_run), by_id(&p.rep_run));
        ensure(
            p.n >= 150
                && truncated_recommendations(d, p.n).len() == p.n
                && truncated_recommendations(r, p.n).len() == p.n
                && p.n == d.recommendation_count().min(r.recommendation_count()),
            || format!("pair {} / {}", p.dem_run, p.rep_run),
        )?;
    }
    ensure(campaign.exclusions.iter().all(|e| e.n < 150), || "exclusion with n >= 150".into())?;
    Ok(format!(
        "567 runs, conditioning cap {max_cond}, recommendation cap {max_rec}, {} pairs >= 150, {} exclusions all < 150",
        campaign.pairs.len(),
        campaign.exclusions.len()
    ))
}

fn ac8() -> Check {
    let u = EmbeddingVector::new(vec![1.0, 2.0, 3.0]).unwrap();
    let v = EmbeddingVector::new(vec![4.0, 5.0, 6.0]).unwrap();
    let c = cosine_similarity(&u, &v).map_err(|e| e.to_string())?;
    ensure((c - 0.974632).abs() <= 1e-6, || format!("cosine {c}"))?;

    let words = [
        "ballot", "fraud", "vote", "border", "tax", "economy", "secret", "plan", "rigged", "machines", "mail", "dead",
        "voters", "illegal", "aliens", "stolen", "election", "cheat", "count", "poll",
    ];
    let mut rng = rng_from(12);
    let mut sentence = |len: usize| -> String { (0..len).map(|_| words[rng.random_range(0..words.len())]).collect::<Vec<_>>().join(" ") };
    let corpus_text: String = (0..60).map(|_| format!("{}\tFalse\n", sentence(6))).collect();
    let corpus = parse_corpus(&corpus_text).unwrap();
    let mut transcripts: Vec<Transcript> = (0..500)
        .map(|i| Transcript {
            stance: StanceLabel::ALL[i % 5],
            text: sentence(4 + i % 20),
        })
        .collect();
    transcripts.push(Transcript {
        stance: StanceLabel::AntiDemocrat,
        text: corpus.headlines[0].text.clone(),
    });
    let thresholds: Vec<f64> = (0..=20).map(|i| -0.2 + 0.06 * i as f64).chain([1.0]).collect();
    let report = misinfo_report(&transcripts, &corpus, &thresholds, &HashedBagOfTokens::default()).map_err(|e| e.to_string())?;
    for row in &report.rows {
        ensure(row.matches.windows(2).all(|w| w[1] <= w[0]), || format!("{} counts increase", row.stance))?;
    }
    let anti_dem = &report.rows[StanceLabel::AntiDemocrat.index()];
    ensure(*anti_dem.matches.last().unwrap() >= 1, || "identical transcript missed at 1.0".into())?;
    let exact = misinfo_report(&transcripts[500..], &corpus, &[1.0], &HashedBagOfTokens::default()).unwrap();
    ensure(exact.rows[StanceLabel::AntiDemocrat.index()].matches == vec![1], || "identical match".into())?;
    Ok(format!("cosine {c:.6}; {} thresholds monotone for 5 stances; identical text matches at 1.0", thresholds.len()))
}

fn read_tree(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(p.strip_prefix(dir).unwrap().display().to_string(), fs::read(&p).unwrap());
            }
        }
    }
    out
}

fn ac9() -> Check {
    let text = "[campaign]\nmaster_seed = 99\nweeks = 3\n[pool]\nn_videos = 8000\n[recommender]\ncopartisan_boost_rep = 1.6\n";
    let cfg = CampaignConfig::parse(text).map_err(|e| e.to_string())?;
    let tmp = tempfile::tempdir().unwrap();
    let mut trees = Vec::new();
    for (i, w) in [1usize, 4, 1].into_iter().enumerate() {
        let dir = tmp.path().join(format!("exec{i}"));
        run_to_dir(&cfg, text, &dir, w).map_err(|e| e.to_string())?;
        emit_report(&dir.join("manifest.json"), None, &dir.join("tables"), w, None).map_err(|e| e.to_string())?;
        trees.push(read_tree(&dir));
    }
    let csvs = trees[0].keys().filter(|k| k.ends_with(".csv")).count();
    ensure(csvs >= 20, || format!("only {csvs} tables"))?;
    for (i, t) in trees.iter().enumerate().skip(1) {
        ensure(t.keys().eq(trees[0].keys()), || format!("execution {i} wrote different files"))?;
        for (k, v) in t {
            ensure(trees[0][k] == *v, || format!("execution {i}: {k} differs"))?;
        }
    }
    Ok(format!("{} files ({csvs} CSV tables) byte-identical across 3 executions with 1 and 4 workers", trees[0].len()))
}

fn main() {
    let started = Instant::now();
    let t = Instant::now();
    let asym = campaign_with(1.3, 2.0, 11);
    let campaign_secs = t.elapsed().as_secs_f64();
    let mut failed = 0;
    let mut report = |id: &str, f: &dyn Fn() -> Check| {
        let t = Instant::now();
        let r = f();
        let secs = t.elapsed().as_secs_f64();
        match r {
            Ok(msg) => println!("{id} PASS ({secs:.1}s) {msg}"),
            Err(msg) => {
                failed += 1;
                println!("{id} FAIL ({secs:.1}s) {msg}");
            }
        }
    };
    report("AC1", &|| {
        let t = Instant::now();
        let r = ac1(&asym)?;
        let total = campaign_secs + t.elapsed().as_secs_f64();
        ensure(total < 300.0, || format!("campaign plus analysis took {total:.0}s"))?;
        Ok(format!("{r}; campaign {campaign_secs:.1}s"))
    });
    report("AC2", &ac2);
    report("AC3", &ac3);
    report("AC4", &ac4);
    report("AC5", &ac5);
    report("AC6", &ac6);
    report("AC7", &|| ac7(&asym));
    report("AC8", &ac8);
    report("AC9", &ac9);
    println!("acceptance: {} of 9 passed in {:.0}s", 9 - failed, started.elapsed().as_secs_f64());
    if failed > 0 {
        std::process::exit(1);
    }
}
