use std::collections::HashSet;

use proptest::prelude::*;
use puppet_audit::misinfo::{
    cosine_similarity, misinfo_report, parse_corpus, read_transcripts, tokens, Embedder, EmbeddingVector,
    HashedBagOfTokens, MisinfoError, Transcript,
};
use puppet_audit::model::StanceLabel;

fn vector(n: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-100.0f64..100.0, n)
}

fn words() -> impl Strategy<Value = Vec<String>> {
    proptest::collection::vec("[a-z]{3,8}", 1..12)
}

const CORPUS: &str = "\
headline\trating
ballots were counted twice in the county\tFalse
voting machines switched millions of votes\tPants on Fire
the senator never voted for that bill\tMostly False
turnout reached a record high\tTrue
";

#[test]
fn corpus_keeps_only_accepted_ratings() {
    let c = parse_corpus(CORPUS).unwrap();
    assert_eq!(c.headlines.len(), 3);
    assert_eq!(c.skipped, 1);
}

#[test]
fn report_counts_matching_transcripts() {
    let corpus = parse_corpus(CORPUS).unwrap();
    let transcripts = read_transcripts(
        "\
pro_republican\tvoting machines switched millions of votes
pro_republican\ta video about cooking pasta at home
pro_democrat\tlet us talk about the weather today
"
        .as_bytes(),
    )
    .unwrap();
    let r = misinfo_report(&transcripts, &corpus, &[0.5, 0.99], &HashedBagOfTokens::default()).unwrap();
    let row = |s| r.rows.iter().find(|x| x.stance == s).unwrap();
    assert_eq!(row(StanceLabel::ProRepublican).n_transcripts, 2);
    assert_eq!(row(StanceLabel::ProRepublican).matches, vec![1, 1]);
    assert_eq!(row(StanceLabel::ProRepublican).percent, vec![50.0, 50.0]);
    assert_eq!(row(StanceLabel::ProDemocrat).matches, vec![0, 0]);
    assert_eq!(row(StanceLabel::Neutral).n_transcripts, 0);
    assert_eq!(row(StanceLabel::Neutral).percent, vec![0.0, 0.0]);

    let csv = String::from_utf8(r.to_csv()).unwrap();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with('#'));
    assert_eq!(lines.next().unwrap(), "stance,n_transcripts,pct_ge_0.5,pct_ge_0.99");
}

#[test]
fn report_rejects_bad_inputs() {
    let corpus = parse_corpus(CORPUS).unwrap();
    let t = vec![Transcript {
        stance: StanceLabel::Neutral,
        text: "hello".into(),
    }];
    let e = HashedBagOfTokens::default();
    assert_eq!(misinfo_report(&t, &corpus, &[0.9, 0.8], &e).unwrap_err(), MisinfoError::BadThresholds);
    assert_eq!(misinfo_report(&t, &corpus, &[1.5], &e).unwrap_err(), MisinfoError::BadThresholds);
    let empty = parse_corpus("x\tTrue\n").unwrap();
    assert_eq!(misinfo_report(&t, &empty, &[0.5], &e).unwrap_err(), MisinfoError::EmptyCorpus);
    assert_eq!(e.embed(" ,.; ").unwrap_err(), MisinfoError::EmptyText);
}

#[test]
fn cosine_errors() {
    let z = EmbeddingVector::new(vec![0.0, 0.0]).unwrap();
    let u = EmbeddingVector::new(vec![1.0, 0.0]).unwrap();
    let w = EmbeddingVector::new(vec![1.0, 0.0, 0.0]).unwrap();
    assert_eq!(cosine_similarity(&u, &z), Err(MisinfoError::ZeroVector));
    assert_eq!(cosine_similarity(&u, &w), Err(MisinfoError::DimMismatch(2, 3)));
    assert_eq!(EmbeddingVector::new(vec![f64::NAN]), Err(MisinfoError::NonFinite));
}

proptest! {
    #[test]
    fn cosine_is_symmetric_and_scale_invariant(u in vector(8), v in vector(8), c in 0.01f64..100.0) {
        prop_assume!(u.iter().any(|x| *x != 0.0) && v.iter().any(|x| *x != 0.0));
        let a = EmbeddingVector::new(u.clone()).unwrap();
        let b = EmbeddingVector::new(v).unwrap();
        let scaled = EmbeddingVector::new(u.iter().map(|x| x * c).collect()).unwrap();
        let s = cosine_similarity(&a, &b).unwrap();
        prop_assert!((-1.0..=1.0).contains(&s));
        prop_assert_eq!(s, cosine_similarity(&b, &a).unwrap());
        prop_assert!((cosine_similarity(&scaled, &b).unwrap() - s).abs() < 1e-12);
        prop_assert!((cosine_similarity(&a, &a).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn disjoint_buckets_give_zero(a in words(), b in words()) {
        let e = HashedBagOfTokens::default();
        let ba: HashSet<usize> = a.iter().map(|t| e.bucket(t)).collect();
        let bb: HashSet<usize> = b.iter().map(|t| e.bucket(t)).collect();
        prop_assume!(ba.is_disjoint(&bb));
        let s = cosine_similarity(&e.embed(&a.join(" ")).unwrap(), &e.embed(&b.join(" ")).unwrap()).unwrap();
        prop_assert_eq!(s, 0.0);
    }

    #[test]
    fn embedding_ignores_case_and_order(a in words()) {
        let e = HashedBagOfTokens::default();
        let mut rev = a.clone();
        rev.reverse();
        let x = e.embed(&a.join(" ")).unwrap();
        let y = e.embed(&rev.join(", ").to_uppercase()).unwrap();
        prop_assert!((cosine_similarity(&x, &y).unwrap() - 1.0).abs() < 1e-12);
        prop_assert!((x.norm() - 1.0).abs() < 1e-12);
        prop_assert_eq!(tokens(&a.join(" ")).count(), a.len());
    }

    #[test]
    fn match_counts_fall_as_thresholds_rise(texts in proptest::collection::vec(words(), 1..12), mut ts in proptest::collection::vec(-1.0f64..1.0, 1..6)) {
        ts.sort_by(f64::total_cmp);
        let corpus = parse_corpus(CORPUS).unwrap();
        let transcripts: Vec<Transcript> = texts
            .iter()
            .enumerate()
            .map(|(i, w)| Transcript { stance: StanceLabel::ALL[i % 5], text: w.join(" ") })
            .collect();
        let r = misinfo_report(&transcripts, &corpus, &ts, &HashedBagOfTokens::default()).unwrap();
        for row in &r.rows {
            prop_assert!(row.matches.windows(2).all(|w| w[0] >= w[1]));
            prop_assert!(row.matches.iter().all(|m| *m <= row.n_transcripts));
        }
    }
}
