use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::model::{ExperimentRun, Leaning, RunId, UsState, WatchEvent};

/// A Democrat run and a Republican run from the same week and state, both
/// truncated to their first `n` recommendations.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchedPair {
    pub dem_run: RunId,
    pub rep_run: RunId,
    pub week: u32,
    pub state: UsState,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exclusion {
    pub dem_run: RunId,
    pub rep_run: RunId,
    pub week: u32,
    pub state: UsState,
    pub n: usize,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairingOutcome {
    pub pairs: Vec<MatchedPair>,
    pub exclusions: Vec<Exclusion>,
    pub unpaired: Vec<RunId>,
}

/// Pairs Democrat and Republican runs of one week and state.
///
/// Both sides are sorted by recommendation count, longest first (run id
/// breaks ties), and paired in that order. A pair keeps `n = min` of the two
/// lengths; pairs with `n < min_pair_length` are excluded. Runs left over on
/// the larger side stay unpaired. Control runs are ignored.
pub fn pair_match(runs: &[&ExperimentRun], min_pair_length: usize) -> PairingOutcome {
    let side = |leaning: Leaning| {
        let mut v: Vec<(usize, &ExperimentRun)> = runs
            .iter()
            .filter(|r| r.condition.leaning == leaning)
            .map(|r| (r.recommendation_count(), *r))
            .collect();
        v.sort_by(|a, b| b.0.cmp(&a.0).then_with(|| a.1.run_id.cmp(&b.1.run_id)));
        v
    };
    let dem = side(Leaning::Democrat);
    let rep = side(Leaning::Republican);
    let mut out = PairingOutcome::default();
    for (&(ld, d), &(lr, r)) in dem.iter().zip(&rep) {
        let n = ld.min(lr);
        if n >= min_pair_length {
            out.pairs.push(MatchedPair {
                dem_run: d.run_id.clone(),
                rep_run: r.run_id.clone(),
                week: d.week,
                state: d.condition.state,
                n,
            });
        } else {
            out.exclusions.push(Exclusion {
                dem_run: d.run_id.clone(),
                rep_run: r.run_id.clone(),
                week: d.week,
                state: d.condition.state,
                n,
                reason: format!("below {min_pair_length}"),
            });
        }
    }
    let paired = dem.len().min(rep.len());
    out.unpaired
        .extend(dem[paired..].iter().chain(&rep[paired..]).map(|(_, r)| r.run_id.clone()));
    out.unpaired.sort();
    out
}

/// Applies [`pair_match`] to every (week, state) group of a campaign.
pub fn pair_campaign(runs: &[ExperimentRun], min_pair_length: usize) -> PairingOutcome {
    let mut groups: BTreeMap<(u32, UsState), Vec<&ExperimentRun>> = BTreeMap::new();
    for r in runs {
        groups.entry((r.week, r.condition.state)).or_default().push(r);
    }
    let mut out = PairingOutcome::default();
    for group in groups.values() {
        let o = pair_match(group, min_pair_length);
        out.pairs.extend(o.pairs);
        out.exclusions.extend(o.exclusions);
        out.unpaired.extend(o.unpaired);
    }
    out
}

/// The first `n` recommendation events of a run.
pub fn truncated_recommendations(run: &ExperimentRun, n: usize) -> Vec<&WatchEvent> {
    run.recommendations().take(n).collect()
}
