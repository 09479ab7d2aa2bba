//! Petri nets, markings and hybrid system nets.
//!
//! Arc weights are always one. Only the normal (place) arcs carry
//! semantics; sure and unsure arcs between transitions are annotations.

mod consistency;
mod export;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::activity::ActivityId;
use crate::causal_graph::Pair;
use crate::error::NetError;

pub use self::consistency::{validate_consistency, ConsistencyReport};
pub use self::export::{NetArc, NetDump, PlaceDump, TokenCount};

/// A place identified by its input and output transitions.
///
/// Both sides are kept sorted and free of duplicates, so two places with
/// the same connections are the same place.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PlaceCandidate {
    inputs: Vec<ActivityId>,
    outputs: Vec<ActivityId>,
}

impl PlaceCandidate {
    pub fn new(inputs: impl IntoIterator<Item = ActivityId>, outputs: impl IntoIterator<Item = ActivityId>) -> Self {
        let mut inputs: Vec<ActivityId> = inputs.into_iter().collect();
        let mut outputs: Vec<ActivityId> = outputs.into_iter().collect();
        inputs.sort();
        inputs.dedup();
        outputs.sort();
        outputs.dedup();
        PlaceCandidate { inputs, outputs }
    }

    /// Parses `"a,b->c"`; whitespace around labels is ignored.
    pub fn parse(spec: &str) -> Result<Self, String> {
        let (lhs, rhs) = spec
            .split_once("->")
            .ok_or_else(|| format!("expected `inputs->outputs`, got {spec:?}"))?;
        let side = |s: &str| -> Vec<ActivityId> {
            s.split(',').map(str::trim).filter(|l| !l.is_empty()).map(ActivityId::intern).collect()
        };
        let place = PlaceCandidate::new(side(lhs), side(rhs));
        if place.inputs.is_empty() || place.outputs.is_empty() {
            return Err(format!("place {spec:?} needs at least one input and one output"));
        }
        Ok(place)
    }

    pub fn inputs(&self) -> &[ActivityId] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[ActivityId] {
        &self.outputs
    }

    /// `I × O`.
    pub fn pairs(&self) -> impl Iterator<Item = Pair> + '_ {
        self.inputs.iter().flat_map(move |&a| self.outputs.iter().map(move |&b| (a, b)))
    }

    /// True when `self` is contained in `other` on both sides and differs.
    pub fn is_strictly_within(&self, other: &PlaceCandidate) -> bool {
        self != other
            && self.inputs.iter().all(|a| other.inputs.binary_search(a).is_ok())
            && self.outputs.iter().all(|a| other.outputs.binary_search(a).is_ok())
    }
}

impl fmt::Display for PlaceCandidate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |xs: &[ActivityId]| xs.iter().map(|a| a.name().to_string()).collect::<Vec<_>>().join(",");
        write!(f, "({{{}}},{{{}}})", join(&self.inputs), join(&self.outputs))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PlaceId {
    /// Initially marked place feeding the start activity.
    Source,
    /// Place filled by the end activity, marked at the end.
    Sink,
    Internal(PlaceCandidate),
}

impl fmt::Display for PlaceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PlaceId::Source => f.write_str("p_▷"),
            PlaceId::Sink => f.write_str("p_□"),
            PlaceId::Internal(p) => p.fmt(f),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Flow {
    PlaceToTransition(PlaceId, ActivityId),
    TransitionToPlace(ActivityId, PlaceId),
}

/// Multiset of places.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Marking(BTreeMap<PlaceId, u64>);

impl Marking {
    pub fn empty() -> Self {
        Marking::default()
    }

    pub fn tokens(&self, p: &PlaceId) -> u64 {
        self.0.get(p).copied().unwrap_or(0)
    }

    pub fn add(&mut self, p: PlaceId, n: u64) {
        if n > 0 {
            *self.0.entry(p).or_insert(0) += n;
        }
    }

    /// Removes one token; false if the place was empty.
    fn take(&mut self, p: &PlaceId) -> bool {
        match self.0.get_mut(p) {
            Some(n) => {
                *n -= 1;
                if *n == 0 {
                    self.0.remove(p);
                }
                true
            }
            None => false,
        }
    }

    /// Total number of tokens.
    pub fn size(&self) -> u64 {
        self.0.values().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&PlaceId, u64)> {
        self.0.iter().map(|(p, &n)| (p, n))
    }
}

impl FromIterator<PlaceId> for Marking {
    fn from_iter<I: IntoIterator<Item = PlaceId>>(iter: I) -> Self {
        let mut m = Marking::empty();
        for p in iter {
            m.add(p, 1);
        }
        m
    }
}

/// Places, transitions (activities) and the flow relation between them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PetriNet {
    places: BTreeSet<PlaceId>,
    transitions: BTreeSet<ActivityId>,
    arcs: BTreeSet<Flow>,
}

impl PetriNet {
    pub fn new(
        places: impl IntoIterator<Item = PlaceId>,
        transitions: impl IntoIterator<Item = ActivityId>,
        arcs: impl IntoIterator<Item = Flow>,
    ) -> Result<Self, NetError> {
        let net = PetriNet {
            places: places.into_iter().collect(),
            transitions: transitions.into_iter().collect(),
            arcs: arcs.into_iter().collect(),
        };
        for arc in &net.arcs {
            let (p, t) = match arc {
                Flow::PlaceToTransition(p, t) | Flow::TransitionToPlace(t, p) => (p, t),
            };
            if !net.places.contains(p) {
                return Err(NetError::Invalid(format!("arc references unknown place {p}")));
            }
            if !net.transitions.contains(t) {
                return Err(NetError::UnknownTransition(*t));
            }
        }
        Ok(net)
    }

    /// A net whose internal places are wired exactly as their ids say,
    /// plus the source and sink places attached to `▷` and `□`.
    pub fn with_places(
        transitions: impl IntoIterator<Item = ActivityId>,
        internal: impl IntoIterator<Item = PlaceCandidate>,
    ) -> Result<Self, NetError> {
        let internal: Vec<PlaceCandidate> = internal.into_iter().collect();
        let mut arcs = vec![
            Flow::PlaceToTransition(PlaceId::Source, ActivityId::START),
            Flow::TransitionToPlace(ActivityId::END, PlaceId::Sink),
        ];
        for p in &internal {
            for &t in p.inputs() {
                arcs.push(Flow::TransitionToPlace(t, PlaceId::Internal(p.clone())));
            }
            for &t in p.outputs() {
                arcs.push(Flow::PlaceToTransition(PlaceId::Internal(p.clone()), t));
            }
        }
        let places = [PlaceId::Source, PlaceId::Sink]
            .into_iter()
            .chain(internal.into_iter().map(PlaceId::Internal));
        PetriNet::new(places, transitions, arcs)
    }

    pub fn places(&self) -> &BTreeSet<PlaceId> {
        &self.places
    }

    pub fn transitions(&self) -> &BTreeSet<ActivityId> {
        &self.transitions
    }

    pub fn arcs(&self) -> &BTreeSet<Flow> {
        &self.arcs
    }

    pub fn internal_places(&self) -> impl Iterator<Item = &PlaceId> {
        self.places.iter().filter(|p| matches!(p, PlaceId::Internal(_)))
    }

    /// Input places of `t`.
    pub fn preset(&self, t: ActivityId) -> impl Iterator<Item = &PlaceId> {
        self.arcs.iter().filter_map(move |a| match a {
            Flow::PlaceToTransition(p, u) if *u == t => Some(p),
            _ => None,
        })
    }

    /// Output places of `t`.
    pub fn postset(&self, t: ActivityId) -> impl Iterator<Item = &PlaceId> {
        self.arcs.iter().filter_map(move |a| match a {
            Flow::TransitionToPlace(u, p) if *u == t => Some(p),
            _ => None,
        })
    }

    /// Transitions producing into `p`.
    pub fn place_inputs(&self, p: &PlaceId) -> BTreeSet<ActivityId> {
        self.arcs
            .iter()
            .filter_map(|a| match a {
                Flow::TransitionToPlace(t, q) if q == p => Some(*t),
                _ => None,
            })
            .collect()
    }

    /// Transitions consuming from `p`.
    pub fn place_outputs(&self, p: &PlaceId) -> BTreeSet<ActivityId> {
        self.arcs
            .iter()
            .filter_map(|a| match a {
                Flow::PlaceToTransition(q, t) if q == p => Some(*t),
                _ => None,
            })
            .collect()
    }

    fn check_transition(&self, t: ActivityId) -> Result<(), NetError> {
        if self.transitions.contains(&t) {
            Ok(())
        } else {
            Err(NetError::UnknownTransition(t))
        }
    }

    /// Every input place of `t` holds a token (vacuously true for an empty
    /// preset).
    pub fn enabled(&self, marking: &Marking, t: ActivityId) -> Result<bool, NetError> {
        self.check_transition(t)?;
        Ok(self.preset(t).all(|p| marking.tokens(p) >= 1))
    }

    pub fn fire(&self, marking: &Marking, t: ActivityId) -> Result<Marking, NetError> {
        if !self.enabled(marking, t)? {
            return Err(NetError::NotEnabled(t));
        }
        let mut next = marking.clone();
        for p in self.preset(t) {
            next.take(p);
        }
        for p in self.postset(t) {
            next.add(p.clone(), 1);
        }
        Ok(next)
    }

    /// Pairs of transitions connected through some place.
    pub fn connected_pairs(&self) -> BTreeSet<Pair> {
        let mut producers: HashMap<&PlaceId, Vec<ActivityId>> = HashMap::new();
        let mut consumers: HashMap<&PlaceId, Vec<ActivityId>> = HashMap::new();
        for arc in &self.arcs {
            match arc {
                Flow::TransitionToPlace(t, p) => producers.entry(p).or_default().push(*t),
                Flow::PlaceToTransition(p, t) => consumers.entry(p).or_default().push(*t),
            }
        }
        let mut pairs = BTreeSet::new();
        for (p, ins) in &producers {
            if let Some(outs) = consumers.get(p) {
                for &a in ins {
                    for &b in outs {
                        pairs.insert((a, b));
                    }
                }
            }
        }
        pairs
    }
}

/// A Petri net with sure and unsure arcs and initial/final markings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HybridSystemNet {
    net: PetriNet,
    sure: BTreeSet<Pair>,
    unsure: BTreeSet<Pair>,
    initial: Marking,
    final_marking: Marking,
}

impl HybridSystemNet {
    /// Checks that annotations and markings refer to existing nodes. The
    /// remaining well-formedness rules are reported by
    /// [`validate_consistency`] rather than enforced here.
    pub fn new(
        net: PetriNet,
        sure: BTreeSet<Pair>,
        unsure: BTreeSet<Pair>,
        initial: Marking,
        final_marking: Marking,
    ) -> Result<Self, NetError> {
        for &(a, b) in sure.iter().chain(&unsure) {
            net.check_transition(a)?;
            net.check_transition(b)?;
        }
        for (p, _) in initial.iter().chain(final_marking.iter()) {
            if !net.places.contains(p) {
                return Err(NetError::Invalid(format!("marking references unknown place {p}")));
            }
        }
        Ok(HybridSystemNet { net, sure, unsure, initial, final_marking })
    }

    /// The usual shape: `[p_▷]` initially, `[p_□]` at the end.
    pub fn with_endpoints(net: PetriNet, sure: BTreeSet<Pair>, unsure: BTreeSet<Pair>) -> Result<Self, NetError> {
        Self::new(net, sure, unsure, [PlaceId::Source].into_iter().collect(), [PlaceId::Sink].into_iter().collect())
    }

    pub fn net(&self) -> &PetriNet {
        &self.net
    }

    pub fn sure(&self) -> &BTreeSet<Pair> {
        &self.sure
    }

    pub fn unsure(&self) -> &BTreeSet<Pair> {
        &self.unsure
    }

    pub fn initial_marking(&self) -> &Marking {
        &self.initial
    }

    pub fn final_marking(&self) -> &Marking {
        &self.final_marking
    }

    /// Whether firing `trace` from the initial marking ends exactly in the
    /// final marking. Sure and unsure arcs play no role.
    pub fn in_behavior(&self, trace: &[ActivityId]) -> Result<bool, NetError> {
        let compiled = CompiledNet::new(self);
        if let Some(&t) = trace.iter().find(|t| compiled.transition(**t).is_none()) {
            return Err(NetError::UnknownTransition(t));
        }
        Ok(compiled.accepts(trace))
    }
}

/// Index-based form of a system net used for fast replay.
///
/// Places interact only through shared transitions and arcs have weight
/// one, so firing a sequence succeeds iff every place individually never
/// goes negative; the token vector tracks all places at once.
#[derive(Debug, Clone)]
pub(crate) struct CompiledNet {
    transitions: HashMap<ActivityId, usize>,
    order: Vec<ActivityId>,
    consume: Vec<Vec<usize>>,
    produce: Vec<Vec<usize>>,
    initial: Vec<u64>,
    target: Vec<u64>,
    places: Vec<PlaceId>,
}

impl CompiledNet {
    pub(crate) fn new(hsn: &HybridSystemNet) -> Self {
        let places: Vec<PlaceId> = hsn.net.places.iter().cloned().collect();
        let place_index: HashMap<&PlaceId, usize> = places.iter().enumerate().map(|(i, p)| (p, i)).collect();
        let order: Vec<ActivityId> = hsn.net.transitions.iter().copied().collect();
        let transitions: HashMap<ActivityId, usize> = order.iter().enumerate().map(|(i, &t)| (t, i)).collect();
        let mut consume = vec![Vec::new(); order.len()];
        let mut produce = vec![Vec::new(); order.len()];
        for arc in &hsn.net.arcs {
            match arc {
                Flow::PlaceToTransition(p, t) => consume[transitions[t]].push(place_index[p]),
                Flow::TransitionToPlace(t, p) => produce[transitions[t]].push(place_index[p]),
            }
        }
        let vector = |m: &Marking| places.iter().map(|p| m.tokens(p)).collect::<Vec<u64>>();
        CompiledNet {
            initial: vector(&hsn.initial),
            target: vector(&hsn.final_marking),
            transitions,
            order,
            consume,
            produce,
            places,
        }
    }

    pub(crate) fn transition(&self, t: ActivityId) -> Option<usize> {
        self.transitions.get(&t).copied()
    }

    pub(crate) fn initial(&self) -> Vec<u64> {
        self.initial.clone()
    }

    pub(crate) fn places(&self) -> &[PlaceId] {
        &self.places
    }

    /// Fires transition `t` in place; false (marking untouched) if disabled.
    pub(crate) fn fire(&self, tokens: &mut [u64], t: usize) -> bool {
        if self.consume[t].iter().any(|&p| tokens[p] == 0) {
            return false;
        }
        for &p in &self.consume[t] {
            tokens[p] -= 1;
        }
        for &p in &self.produce[t] {
            tokens[p] += 1;
        }
        true
    }

    pub(crate) fn enabled(&self, tokens: &[u64]) -> impl Iterator<Item = ActivityId> + '_ {
        let tokens = tokens.to_vec();
        (0..self.order.len())
            .filter(move |&t| self.consume[t].iter().all(|&p| tokens[p] > 0))
            .map(|t| self.order[t])
    }

    pub(crate) fn is_final(&self, tokens: &[u64]) -> bool {
        tokens == self.target.as_slice()
    }

    /// Replays `trace` on place `p` alone, starting from and ending in its
    /// initial and final token counts.
    pub(crate) fn place_fits(&self, p: usize, trace: &[ActivityId]) -> bool {
        let mut tokens = self.initial[p];
        for &a in trace {
            let Some(t) = self.transition(a) else { return false };
            if self.consume[t].contains(&p) {
                if tokens == 0 {
                    return false;
                }
                tokens -= 1;
            }
            if self.produce[t].contains(&p) {
                tokens += 1;
            }
        }
        tokens == self.target[p]
    }

    /// Unknown activities make the trace non-fitting.
    pub(crate) fn accepts(&self, trace: &[ActivityId]) -> bool {
        let mut tokens = self.initial();
        for &a in trace {
            match self.transition(a) {
                Some(t) if self.fire(&mut tokens, t) => {}
                _ => return false,
            }
        }
        self.is_final(&tokens)
    }
}
