//! Agreement statistics. Multi-rater inputs are `raters × items` matrices of
//! categorical ratings; pairwise metrics take a confusion matrix with the
//! reference rater on rows.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::LabelError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgreementMetric {
    FleissKappa,
    KrippendorffAlphaNominal,
    CohenKappa,
    Accuracy,
    F1Macro,
}

impl AgreementMetric {
    pub fn as_str(self) -> &'static str {
        match self {
            AgreementMetric::FleissKappa => "fleiss_kappa",
            AgreementMetric::KrippendorffAlphaNominal => "krippendorff_alpha",
            AgreementMetric::CohenKappa => "cohen_kappa",
            AgreementMetric::Accuracy => "accuracy",
            AgreementMetric::F1Macro => "f1_macro",
        }
    }
}

/// Fleiss' kappa over a complete `raters × items` matrix.
pub fn fleiss_kappa<C: Ord + Clone>(ratings: &[Vec<C>]) -> Result<f64, LabelError> {
    if ratings.len() < 2 {
        return Err(LabelError::InsufficientData("Fleiss kappa needs at least two raters".into()));
    }
    let n_items = ratings[0].len();
    if ratings.iter().any(|r| r.len() != n_items) {
        return Err(LabelError::Shape("raters rated different numbers of items".into()));
    }
    let cats: BTreeMap<&C, usize> = ratings
        .iter()
        .flatten()
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .enumerate()
        .map(|(i, c)| (c, i))
        .collect();
    let mut counts = vec![vec![0u64; cats.len()]; n_items];
    for rater in ratings {
        for (item, c) in rater.iter().enumerate() {
            counts[item][cats[c]] += 1;
        }
    }
    fleiss_kappa_counts(&counts)
}

/// Fleiss' kappa from an `items × categories` table of rating counts. Every
/// item must have the same number of ratings.
pub fn fleiss_kappa_counts(counts: &[Vec<u64>]) -> Result<f64, LabelError> {
    let Some(first) = counts.first() else {
        return Err(LabelError::InsufficientData("no items".into()));
    };
    let n: u64 = first.iter().sum();
    if n < 2 {
        return Err(LabelError::InsufficientData("Fleiss kappa needs at least two raters".into()));
    }
    let k = first.len();
    if counts.iter().any(|row| row.len() != k || row.iter().sum::<u64>() != n) {
        return Err(LabelError::Shape("every item needs the same number of ratings".into()));
    }
    let items = counts.len() as f64;
    let nf = n as f64;
    let p_bar = counts
        .iter()
        .map(|row| {
            let sq: u64 = row.iter().map(|c| c * c).sum();
            (sq - n) as f64 / (n * (n - 1)) as f64
        })
        .sum::<f64>()
        / items;
    let p_e: f64 = (0..k)
        .map(|j| {
            let pj = counts.iter().map(|row| row[j]).sum::<u64>() as f64 / (items * nf);
            pj * pj
        })
        .sum();
    if (1.0 - p_e).abs() < 1e-15 {
        return Err(LabelError::DegenerateAgreement);
    }
    Ok((p_bar - p_e) / (1.0 - p_e))
}

/// Krippendorff's alpha for nominal data. `None` marks a missing rating;
/// units with fewer than two ratings are not pairable and are skipped.
pub fn krippendorff_alpha_nominal<C: Ord + Clone>(ratings: &[Vec<Option<C>>]) -> Result<f64, LabelError> {
    if ratings.len() < 2 {
        return Err(LabelError::InsufficientData("alpha needs at least two raters".into()));
    }
    let n_units = ratings[0].len();
    if ratings.iter().any(|r| r.len() != n_units) {
        return Err(LabelError::Shape("raters rated different numbers of units".into()));
    }
    // Coincidence matrix, kept sparse.
    let mut o: BTreeMap<(&C, &C), f64> = BTreeMap::new();
    for u in 0..n_units {
        let vals: Vec<&C> = ratings.iter().filter_map(|r| r[u].as_ref()).collect();
        let m = vals.len();
        if m < 2 {
            continue;
        }
        let w = 1.0 / (m - 1) as f64;
        for (i, a) in vals.iter().enumerate() {
            for (j, b) in vals.iter().enumerate() {
                if i != j {
                    *o.entry((*a, *b)).or_default() += w;
                }
            }
        }
    }
    let mut marg: BTreeMap<&C, f64> = BTreeMap::new();
    for (&(a, _), v) in &o {
        *marg.entry(a).or_default() += v;
    }
    let n: f64 = marg.values().sum();
    if n < 2.0 {
        return Err(LabelError::InsufficientData("fewer than two pairable values".into()));
    }
    let disagree: f64 = o.iter().filter(|((a, b), _)| a != b).map(|(_, v)| v).sum();
    let total_sq: f64 = marg.values().map(|v| v * v).sum();
    let expected = n * n - total_sq;
    if expected <= 0.0 {
        return Err(LabelError::DegenerateAgreement);
    }
    Ok(1.0 - (n - 1.0) * disagree / expected)
}

/// Square confusion matrix over the union of both raters' categories, in
/// sorted category order.
pub fn confusion_matrix<C: Ord + Clone>(reference: &[C], other: &[C]) -> Result<(Vec<C>, Vec<Vec<u64>>), LabelError> {
    if reference.len() != other.len() {
        return Err(LabelError::Shape("raters rated different numbers of items".into()));
    }
    let cats: Vec<C> = reference
        .iter()
        .chain(other)
        .cloned()
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .collect();
    let mut m = vec![vec![0u64; cats.len()]; cats.len()];
    for (a, b) in reference.iter().zip(other) {
        let i = cats.binary_search(a).expect("category present");
        let j = cats.binary_search(b).expect("category present");
        m[i][j] += 1;
    }
    Ok((cats, m))
}

fn check_square(m: &[Vec<u64>]) -> Result<f64, LabelError> {
    if m.iter().any(|r| r.len() != m.len()) {
        return Err(LabelError::Shape("confusion matrix must be square".into()));
    }
    let total: u64 = m.iter().flatten().sum();
    if total == 0 {
        return Err(LabelError::InsufficientData("empty confusion matrix".into()));
    }
    Ok(total as f64)
}

pub fn cohen_kappa(confusion: &[Vec<u64>]) -> Result<f64, LabelError> {
    let n = check_square(confusion)?;
    let k = confusion.len();
    let p_o = (0..k).map(|i| confusion[i][i]).sum::<u64>() as f64 / n;
    let p_e: f64 = (0..k)
        .map(|i| {
            let row: u64 = confusion[i].iter().sum();
            let col: u64 = confusion.iter().map(|r| r[i]).sum();
            row as f64 * col as f64
        })
        .sum::<f64>()
        / (n * n);
    if (1.0 - p_e).abs() < 1e-15 {
        return Err(LabelError::DegenerateAgreement);
    }
    Ok((p_o - p_e) / (1.0 - p_e))
}

pub fn cohen_kappa_labels<C: Ord + Clone>(a: &[C], b: &[C]) -> Result<f64, LabelError> {
    cohen_kappa(&confusion_matrix(a, b)?.1)
}

pub fn accuracy(confusion: &[Vec<u64>]) -> Result<f64, LabelError> {
    let n = check_square(confusion)?;
    Ok((0..confusion.len()).map(|i| confusion[i][i]).sum::<u64>() as f64 / n)
}

/// Unweighted mean of per-category F1 over the categories that occur in
/// either rater's labels. Rows are the reference labels.
pub fn f1_macro(confusion: &[Vec<u64>]) -> Result<f64, LabelError> {
    check_square(confusion)?;
    let mut sum = 0.0;
    let mut present = 0usize;
    for i in 0..confusion.len() {
        let tp = confusion[i][i] as f64;
        let row: u64 = confusion[i].iter().sum();
        let col: u64 = confusion.iter().map(|r| r[i]).sum();
        if row + col == 0 {
            continue;
        }
        present += 1;
        // 2tp / (2tp + fp + fn)
        sum += 2.0 * tp / (row + col) as f64;
    }
    Ok(sum / present as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn cohen_hand_example() {
        let m = vec![vec![20, 5], vec![10, 15]];
        assert!((cohen_kappa(&m).unwrap() - 0.4).abs() < 1e-12);
        assert!((accuracy(&m).unwrap() - 0.7).abs() < 1e-12);
        // class 0: 2*20/(25+30) = 8/11, class 1: 2*15/(25+20) = 2/3
        assert!((f1_macro(&m).unwrap() - 23.0 / 33.0).abs() < 1e-12);
    }

    #[test]
    fn fleiss_wikipedia_table() {
        // 10 subjects, 14 raters, 5 categories.
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
        // Row agreement numerators sum to 688 over 10 * 14 * 13; category
        // totals are 20, 28, 39, 21, 32 out of 140.
        let p_bar = 688.0 / 1820.0;
        let p_e = (20.0f64 * 20.0 + 28.0 * 28.0 + 39.0 * 39.0 + 21.0 * 21.0 + 32.0 * 32.0) / (140.0 * 140.0);
        let hand = (p_bar - p_e) / (1.0 - p_e);
        let k = fleiss_kappa_counts(&t).unwrap();
        assert!((k - hand).abs() < 1e-9, "{k} vs {hand}");
    }

    #[test]
    fn krippendorff_reference_with_missing() {
        let d = |v: &[i32]| v.iter().map(|&x| if x == 0 { None } else { Some(x) }).collect::<Vec<_>>();
        let r = vec![
            d(&[1, 2, 3, 3, 2, 1, 4, 1, 2, 0, 0, 0]),
            d(&[1, 2, 3, 3, 2, 2, 4, 1, 2, 5, 0, 3]),
            d(&[0, 3, 3, 3, 2, 3, 4, 2, 2, 5, 1, 0]),
            d(&[1, 2, 3, 3, 2, 4, 4, 1, 2, 5, 1, 0]),
        ];
        // Published value 0.743 for this 4-coder, 12-unit reliability table.
        let a = krippendorff_alpha_nominal(&r).unwrap();
        assert!((a - 0.743421052631579).abs() < 1e-9, "{a}");
    }

    #[test]
    fn perfect_agreement_is_exactly_one() {
        let r = vec![vec![1, 2, 2, 3, 1], vec![1, 2, 2, 3, 1], vec![1, 2, 2, 3, 1]];
        assert_eq!(fleiss_kappa(&r).unwrap(), 1.0);
        let ro: Vec<Vec<Option<i32>>> = r.iter().map(|x| x.iter().copied().map(Some).collect()).collect();
        assert_eq!(krippendorff_alpha_nominal(&ro).unwrap(), 1.0);
        assert_eq!(cohen_kappa_labels(&r[0], &r[1]).unwrap(), 1.0);
    }

    #[test]
    fn degenerate_inputs() {
        let r = vec![vec!["x"; 4], vec!["x"; 4]];
        assert_eq!(fleiss_kappa(&r), Err(LabelError::DegenerateAgreement));
        assert_eq!(cohen_kappa_labels(&r[0], &r[1]), Err(LabelError::DegenerateAgreement));
        let ro = vec![vec![Some("x"); 4], vec![Some("x"); 4]];
        assert_eq!(krippendorff_alpha_nominal(&ro), Err(LabelError::DegenerateAgreement));
        assert!(matches!(fleiss_kappa(&r[..1]), Err(LabelError::InsufficientData(_))));
    }

    proptest! {
        #[test]
        fn cohen_is_rater_symmetric(cells in proptest::collection::vec(0u64..30, 9)) {
            let m: Vec<Vec<u64>> = cells.chunks(3).map(|c| c.to_vec()).collect();
            let t: Vec<Vec<u64>> = (0..3).map(|i| (0..3).map(|j| m[j][i]).collect()).collect();
            match (cohen_kappa(&m), cohen_kappa(&t)) {
                (Ok(a), Ok(b)) => prop_assert!((a - b).abs() < 1e-12),
                (a, b) => prop_assert_eq!(a, b),
            }
        }

        #[test]
        fn alpha_ignores_category_names(
            raw in proptest::collection::vec(proptest::option::weighted(0.8, 0u8..4), 24),
            perm in Just([3u8, 0, 2, 1]),
        ) {
            let r: Vec<Vec<Option<u8>>> = raw.chunks(8).map(|c| c.to_vec()).collect();
            let relabeled: Vec<Vec<Option<u8>>> =
                r.iter().map(|row| row.iter().map(|v| v.map(|x| perm[x as usize] + 10)).collect()).collect();
            match (krippendorff_alpha_nominal(&r), krippendorff_alpha_nominal(&relabeled)) {
                (Ok(a), Ok(b)) => prop_assert!((a - b).abs() < 1e-12),
                (a, b) => prop_assert_eq!(a, b),
            }
        }

        #[test]
        fn kappas_are_bounded(raw in proptest::collection::vec(0u8..3, 30)) {
            let r: Vec<Vec<u8>> = raw.chunks(10).map(|c| c.to_vec()).collect();
            if let Ok(k) = fleiss_kappa(&r) {
                prop_assert!((-1.0..=1.0).contains(&k));
            }
            if let Ok(k) = cohen_kappa_labels(&r[0], &r[1]) {
                prop_assert!((-1.0..=1.0 + 1e-12).contains(&k));
            }
        }
    }
}
