use std::collections::BTreeSet;

use serde::Serialize;

use super::{Flow, HybridSystemNet, Marking, PlaceId};
use crate::activity::ActivityId;
use crate::causal_graph::{CausalGraph, Pair};
use crate::event_log::EventLog;

/// Outcome of checking a log, a causal graph and a hybrid system net
/// against each other. Each flag is one requirement; `violations` explains
/// the failed ones.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConsistencyReport {
    /// Transitions equal the graph's activities, all of which occur in the log.
    pub transitions_match_activities: bool,
    /// Source and sink exist and touch exactly `p_▷ → ▷` and `□ → p_□`.
    pub endpoint_places: bool,
    /// Initial marking `[p_▷]`, final marking `[p_□]`.
    pub endpoint_markings: bool,
    /// Every other place has inputs and outputs.
    pub internal_places_connected: bool,
    /// Strong relations are exactly the place connections plus sure arcs,
    /// and those two are disjoint.
    pub strong_relations_covered: bool,
    /// Weak relations are exactly the unsure arcs.
    pub weak_relations_covered: bool,
    pub violations: Vec<String>,
}

impl ConsistencyReport {
    pub fn is_consistent(&self) -> bool {
        self.transitions_match_activities
            && self.endpoint_places
            && self.endpoint_markings
            && self.internal_places_connected
            && self.strong_relations_covered
            && self.weak_relations_covered
    }
}

pub fn validate_consistency(log: &EventLog, graph: &CausalGraph, hsn: &HybridSystemNet) -> ConsistencyReport {
    let mut violations = Vec::new();
    let net = hsn.net();

    let occurring: BTreeSet<ActivityId> =
        log.variants().iter().flat_map(|v| v.trace.iter().copied()).collect();
    let mut transitions_match_activities = true;
    if net.transitions() != graph.activities() {
        transitions_match_activities = false;
        violations.push("transitions differ from the causal graph's activities".to_string());
    }
    if let Some(a) = graph.activities().iter().find(|a| !occurring.contains(a)) {
        transitions_match_activities = false;
        violations.push(format!("activity {a} does not occur in the log"));
    }

    let endpoints = [PlaceId::Source, PlaceId::Sink];
    let mut endpoint_places = endpoints.iter().all(|p| net.places().contains(p));
    if !endpoint_places {
        violations.push("source or sink place missing".to_string());
    }
    let touching: BTreeSet<&Flow> = net
        .arcs()
        .iter()
        .filter(|arc| match arc {
            Flow::PlaceToTransition(p, _) | Flow::TransitionToPlace(_, p) => endpoints.contains(p),
        })
        .collect();
    let required = [
        Flow::PlaceToTransition(PlaceId::Source, ActivityId::START),
        Flow::TransitionToPlace(ActivityId::END, PlaceId::Sink),
    ];
    if touching != required.iter().collect() {
        endpoint_places = false;
        violations.push("source/sink arcs are not exactly p_▷→▷ and □→p_□".to_string());
    }

    let initial: Marking = [PlaceId::Source].into_iter().collect();
    let final_marking: Marking = [PlaceId::Sink].into_iter().collect();
    let endpoint_markings = hsn.initial_marking() == &initial && hsn.final_marking() == &final_marking;
    if !endpoint_markings {
        violations.push("markings are not [p_▷] and [p_□]".to_string());
    }

    let mut internal_places_connected = true;
    for p in net.places().iter().filter(|p| !endpoints.contains(p)) {
        if net.place_inputs(p).is_empty() || net.place_outputs(p).is_empty() {
            internal_places_connected = false;
            violations.push(format!("place {p} has an empty preset or postset"));
        }
    }

    let connected = net.connected_pairs();
    let covered: BTreeSet<Pair> = connected.union(hsn.sure()).copied().collect();
    let overlap: Vec<&Pair> = connected.intersection(hsn.sure()).collect();
    let strong_relations_covered = &covered == graph.strong() && overlap.is_empty();
    if &covered != graph.strong() {
        violations.push("place connections and sure arcs do not equal the strong relations".to_string());
    }
    if let Some(p) = overlap.first() {
        violations.push(format!("sure arc {p:?} duplicates a place connection"));
    }

    let weak_relations_covered = hsn.unsure() == graph.weak();
    if !weak_relations_covered {
        violations.push("unsure arcs do not equal the weak relations".to_string());
    }

    ConsistencyReport {
        transitions_match_activities,
        endpoint_places,
        endpoint_markings,
        internal_places_connected,
        strong_relations_covered,
        weak_relations_covered,
        violations,
    }
}
