//! Second discovery phase: candidate places, replay scores and the hybrid
//! system net.

use std::collections::{BTreeSet, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::activity::ActivityId;
use crate::causal_graph::{CausalGraph, GraphParams};
use crate::error::{NetError, ParamError};
use crate::event_log::EventLog;
use crate::net::{HybridSystemNet, PetriNet, PlaceCandidate};
use crate::stats::DirectlyFollowsTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Redundancy {
    /// Keep every candidate passing the threshold.
    #[default]
    All,
    /// Drop a place when a strictly larger accepted place contains it.
    MaximalOnly,
}

/// Limits on the size of enumerated candidate places.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bounds {
    pub max_inputs: usize,
    pub max_outputs: usize,
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds { max_inputs: 4, max_outputs: 4 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DiscoveryParams {
    #[serde(flatten)]
    pub graph: GraphParams,
    /// Minimal fraction of activated traces a place must fit.
    pub t_replay: f64,
    pub max_inputs: usize,
    pub max_outputs: usize,
    pub redundancy: Redundancy,
    /// Candidates whose global score is below this are not replayed.
    pub glob_floor: Option<f64>,
}

impl Default for DiscoveryParams {
    fn default() -> Self {
        let bounds = Bounds::default();
        DiscoveryParams {
            graph: GraphParams::default(),
            t_replay: 0.9,
            max_inputs: bounds.max_inputs,
            max_outputs: bounds.max_outputs,
            redundancy: Redundancy::All,
            glob_floor: None,
        }
    }
}

impl DiscoveryParams {
    pub fn bounds(&self) -> Bounds {
        Bounds { max_inputs: self.max_inputs, max_outputs: self.max_outputs }
    }

    pub fn errors(&self) -> Vec<ParamError> {
        let mut errors = self.graph.errors();
        if !(0.0..=1.0).contains(&self.t_replay) {
            errors.push(ParamError::new("t_replay", "must lie in [0, 1]"));
        }
        if self.max_inputs == 0 {
            errors.push(ParamError::new("max_inputs", "must be at least 1"));
        }
        if self.max_outputs == 0 {
            errors.push(ParamError::new("max_outputs", "must be at least 1"));
        }
        if let Some(f) = self.glob_floor {
            if !(0.0..=1.0).contains(&f) {
                errors.push(ParamError::new("glob_floor", "must lie in [0, 1]"));
            }
        }
        errors
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        match self.errors().into_iter().next() {
            Some(e) => Err(e),
            None => Ok(()),
        }
    }
}

/// All `(I,O)` with `I × O` inside the strong relations, within `bounds`,
/// ordered by sorted inputs and then sorted outputs.
pub fn enumerate_candidates(graph: &CausalGraph, bounds: Bounds) -> Vec<PlaceCandidate> {
    let activities: Vec<ActivityId> = graph.activities().iter().copied().collect();
    let index: HashMap<ActivityId, usize> = activities.iter().enumerate().map(|(i, &a)| (a, i)).collect();
    let n = activities.len();
    // successor sets as sorted index lists
    let mut succ: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (a, b) in graph.strong() {
        succ[index[a]].push(index[b]);
    }
    for s in &mut succ {
        s.sort_unstable();
    }

    let mut out = Vec::new();
    let mut inputs = Vec::new();
    for first in 0..n {
        if !succ[first].is_empty() {
            inputs.push(first);
            grow_inputs(&activities, &succ, bounds, &mut inputs, succ[first].clone(), &mut out);
            inputs.pop();
        }
    }
    out
}

fn grow_inputs(
    activities: &[ActivityId],
    succ: &[Vec<usize>],
    bounds: Bounds,
    inputs: &mut Vec<usize>,
    common: Vec<usize>,
    out: &mut Vec<PlaceCandidate>,
) {
    let ins: Vec<ActivityId> = inputs.iter().map(|&i| activities[i]).collect();
    let mut outputs = Vec::new();
    for k in 0..common.len() {
        outputs.push(common[k]);
        grow_outputs(activities, &ins, bounds, &common, k, &mut outputs, out);
        outputs.pop();
    }
    if inputs.len() == bounds.max_inputs {
        return;
    }
    let last = *inputs.last().expect("non-empty inputs");
    for next in last + 1..succ.len() {
        let narrowed: Vec<usize> = common.iter().copied().filter(|c| succ[next].binary_search(c).is_ok()).collect();
        if narrowed.is_empty() {
            continue;
        }
        inputs.push(next);
        grow_inputs(activities, succ, bounds, inputs, narrowed, out);
        inputs.pop();
    }
}

fn grow_outputs(
    activities: &[ActivityId],
    ins: &[ActivityId],
    bounds: Bounds,
    common: &[usize],
    at: usize,
    outputs: &mut Vec<usize>,
    out: &mut Vec<PlaceCandidate>,
) {
    out.push(PlaceCandidate::new(ins.iter().copied(), outputs.iter().map(|&o| activities[o])));
    if outputs.len() == bounds.max_outputs {
        return;
    }
    for k in at + 1..common.len() {
        outputs.push(common[k]);
        grow_outputs(activities, ins, bounds, common, k, outputs, out);
        outputs.pop();
    }
}

/// Replays `trace` on the single place `p` starting empty: whether the
/// place never goes negative and ends empty, and whether the trace touches
/// it at all.
pub fn check_replayable(p: &PlaceCandidate, trace: &[ActivityId]) -> (bool, bool) {
    let mut tokens: u64 = 0;
    let mut activated = false;
    for a in trace {
        let consumes = p.outputs().contains(a);
        let produces = p.inputs().contains(a);
        if consumes {
            activated = true;
            if tokens == 0 {
                return (false, true);
            }
            tokens -= 1;
        }
        if produces {
            activated = true;
            tokens += 1;
        }
    }
    (tokens == 0, activated)
}

/// Replay scores of one candidate, with the counts they derive from. Counts
/// are weighted by variant multiplicity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlaceScore {
    pub freq: f64,
    /// Undefined when no trace activates the place.
    pub rel: Option<f64>,
    pub glob: f64,
    pub fitting_activated: u64,
    pub activated: u64,
    pub fitting: u64,
    pub total: u64,
}

impl PlaceScore {
    /// Whether the place is admitted at `t_replay`; never for an undefined
    /// relative score.
    pub fn passes(&self, t_replay: f64) -> bool {
        self.rel.is_some_and(|r| r >= t_replay)
    }
}

/// `1 - |#I - #O| / max(#I, #O)`, taken as 1 when neither side occurs.
pub fn glob_score(p: &PlaceCandidate, table: &DirectlyFollowsTable) -> f64 {
    let i = table.count_set(p.inputs());
    let o = table.count_set(p.outputs());
    let max = i.max(o);
    if max == 0 {
        1.0
    } else {
        1.0 - i.abs_diff(o) as f64 / max as f64
    }
}

pub fn score(p: &PlaceCandidate, log: &EventLog) -> PlaceScore {
    let table = DirectlyFollowsTable::build(log);
    ReplayIndex::new(log).score(p, &table)
}

/// Variants of a log as dense index sequences, so replaying a candidate
/// needs only a membership lookup per event.
struct ReplayIndex {
    variants: Vec<(Vec<u32>, u64)>,
    width: usize,
}

impl ReplayIndex {
    fn new(log: &EventLog) -> Self {
        let variants: Vec<(Vec<u32>, u64)> = log
            .variants()
            .iter()
            .map(|v| (v.trace.iter().map(|a| a.index()).collect(), v.count))
            .collect();
        let width = variants.iter().flat_map(|(t, _)| t.iter()).max().map_or(0, |&m| m as usize + 1);
        ReplayIndex { variants, width }
    }

    fn score(&self, p: &PlaceCandidate, table: &DirectlyFollowsTable) -> PlaceScore {
        // bit 0: consumes (output transition), bit 1: produces (input transition)
        let mut role = vec![0u8; self.width];
        for a in p.outputs() {
            if let Some(r) = role.get_mut(a.index() as usize) {
                *r |= 1;
            }
        }
        for a in p.inputs() {
            if let Some(r) = role.get_mut(a.index() as usize) {
                *r |= 2;
            }
        }
        let (mut fitting, mut activated, mut fitting_activated, mut total) = (0, 0, 0, 0);
        for (trace, count) in &self.variants {
            total += count;
            let (fits, act) = replay_roles(&role, trace);
            if fits {
                fitting += count;
            }
            if act {
                activated += count;
                if fits {
                    fitting_activated += count;
                }
            }
        }
        PlaceScore {
            freq: if total == 0 { 1.0 } else { fitting as f64 / total as f64 },
            rel: (activated > 0).then(|| fitting_activated as f64 / activated as f64),
            glob: glob_score(p, table),
            fitting_activated,
            activated,
            fitting,
            total,
        }
    }
}

fn replay_roles(role: &[u8], trace: &[u32]) -> (bool, bool) {
    let mut tokens: u64 = 0;
    let mut activated = false;
    for &a in trace {
        let r = role[a as usize];
        if r == 0 {
            continue;
        }
        activated = true;
        if r & 1 != 0 {
            if tokens == 0 {
                return (false, true);
            }
            tokens -= 1;
        }
        if r & 2 != 0 {
            tokens += 1;
        }
    }
    (tokens == 0, activated)
}

/// One evaluated candidate of a discovery run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateReport {
    pub place: PlaceCandidate,
    pub label: String,
    /// Absent when the candidate was pruned by the global-score floor.
    pub score: Option<PlaceScore>,
    pub glob: f64,
    pub accepted: bool,
}

#[derive(Debug, Clone)]
pub struct Discovery {
    pub net: HybridSystemNet,
    pub candidates: Vec<CandidateReport>,
}

impl Discovery {
    pub fn places(&self) -> impl Iterator<Item = &CandidateReport> {
        self.candidates.iter().filter(|c| c.accepted)
    }
}

/// Builds the hybrid system net of `graph`: every candidate whose relative
/// score on the log restricted to the graph's activities reaches
/// `t_replay` becomes a place; strong relations not realised by a place
/// become sure arcs and weak relations unsure arcs.
pub fn discover_hybrid_net(
    log: &EventLog,
    graph: &CausalGraph,
    params: &DiscoveryParams,
) -> Result<Discovery, DiscoveryError> {
    params.validate()?;
    let projected = log.project(graph.activities()).map_err(|e| DiscoveryError::Net(NetError::Invalid(e.to_string())))?;
    let table = DirectlyFollowsTable::build(&projected);
    let index = ReplayIndex::new(&projected);

    let candidates = enumerate_candidates(graph, params.bounds());
    let mut reports: Vec<CandidateReport> = candidates
        .into_par_iter()
        .map(|place| {
            let glob = glob_score(&place, &table);
            let pruned = params.glob_floor.is_some_and(|f| glob < f);
            let score = (!pruned).then(|| index.score(&place, &table));
            let accepted = score.as_ref().is_some_and(|s| s.passes(params.t_replay));
            CandidateReport { label: place.to_string(), place, score, glob, accepted }
        })
        .collect();

    if params.redundancy == Redundancy::MaximalOnly {
        let accepted: Vec<PlaceCandidate> = reports.iter().filter(|r| r.accepted).map(|r| r.place.clone()).collect();
        for r in reports.iter_mut().filter(|r| r.accepted) {
            if accepted.iter().any(|q| r.place.is_strictly_within(q)) {
                r.accepted = false;
            }
        }
    }

    let places: Vec<PlaceCandidate> = reports.iter().filter(|r| r.accepted).map(|r| r.place.clone()).collect();
    let net = PetriNet::with_places(graph.activities().iter().copied(), places)?;
    let connected = net.connected_pairs();
    let sure: BTreeSet<_> = graph.strong().difference(&connected).copied().collect();
    let hsn = HybridSystemNet::with_endpoints(net, sure, graph.weak().clone())?;
    Ok(Discovery { net: hsn, candidates: reports })
}

#[derive(Debug, thiserror::Error)]
pub enum DiscoveryError {
    #[error("invalid parameter {}: {}", .0.field, .0.message)]
    Param(#[from] ParamError),
    #[error(transparent)]
    Net(#[from] NetError),
}
