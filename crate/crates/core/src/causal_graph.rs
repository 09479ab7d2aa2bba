//! First discovery phase: a causal graph with strong and weak relations.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::activity::ActivityId;
use crate::dot::{escape, node_id};
use crate::error::ParamError;
use crate::event_log::EventLog;
use crate::stats::{CausalityParams, DirectlyFollowsTable, Rel1Numerator};

pub type Pair = (ActivityId, ActivityId);

/// Thresholds and measure parameters of causal-graph discovery.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GraphParams {
    /// Minimal number of occurrences for an activity to be kept.
    pub t_freq: u64,
    pub c: f64,
    pub w: f64,
    pub rel1_numerator: Rel1Numerator,
    /// Lower bound of strong causality.
    pub t_rs: f64,
    /// Lower bound of weak causality; never above `t_rs`.
    pub t_rw: f64,
}

impl Default for GraphParams {
    fn default() -> Self {
        GraphParams { t_freq: 1, c: 1.0, w: 0.2, rel1_numerator: Rel1Numerator::Literal, t_rs: 0.8, t_rw: 0.75 }
    }
}

impl GraphParams {
    pub fn causality(&self) -> CausalityParams {
        CausalityParams { c: self.c, w: self.w, rel1_numerator: self.rel1_numerator }
    }

    /// Every violated constraint, one entry per field.
    pub fn errors(&self) -> Vec<ParamError> {
        let mut errors = Vec::new();
        if self.t_freq == 0 {
            errors.push(ParamError::new("t_freq", "must be a positive integer"));
        }
        if let Err(e) = self.causality().validate() {
            errors.push(e);
        }
        let unit = 0.0..=1.0;
        if !unit.contains(&self.t_rs) {
            errors.push(ParamError::new("t_rs", "must lie in [0, 1]"));
        }
        if !unit.contains(&self.t_rw) {
            errors.push(ParamError::new("t_rw", "must lie in [0, 1]"));
        }
        if self.t_rs < self.t_rw {
            errors.push(ParamError::new("t_rs", "must be at least t_rw"));
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

/// Activities with strong and weak causal relations; the two relations are
/// disjoint and only mention member activities.
#[derive(Debug, Clone, PartialEq)]
pub struct CausalGraph {
    activities: BTreeSet<ActivityId>,
    strong: BTreeSet<Pair>,
    weak: BTreeSet<Pair>,
    frequencies: BTreeMap<ActivityId, u64>,
    strengths: BTreeMap<Pair, f64>,
}

impl CausalGraph {
    /// Builds a graph by hand, checking its invariants.
    pub fn new(
        activities: BTreeSet<ActivityId>,
        strong: BTreeSet<Pair>,
        weak: BTreeSet<Pair>,
    ) -> Result<Self, String> {
        if !activities.contains(&ActivityId::START) || !activities.contains(&ActivityId::END) {
            return Err("activities must include the start and end activities".into());
        }
        if let Some(p) = strong.intersection(&weak).next() {
            return Err(format!("pair {p:?} is both strong and weak"));
        }
        if let Some(p) = strong
            .iter()
            .chain(&weak)
            .find(|(a, b)| !activities.contains(a) || !activities.contains(b))
        {
            return Err(format!("pair {p:?} mentions an unknown activity"));
        }
        Ok(CausalGraph { activities, strong, weak, frequencies: BTreeMap::new(), strengths: BTreeMap::new() })
    }

    pub fn activities(&self) -> &BTreeSet<ActivityId> {
        &self.activities
    }

    pub fn strong(&self) -> &BTreeSet<Pair> {
        &self.strong
    }

    pub fn weak(&self) -> &BTreeSet<Pair> {
        &self.weak
    }

    /// Causality value of a related pair, when the graph was discovered.
    pub fn strength(&self, pair: Pair) -> Option<f64> {
        self.strengths.get(&pair).copied()
    }

    pub fn frequency(&self, a: ActivityId) -> Option<u64> {
        self.frequencies.get(&a).copied()
    }

    pub fn to_dump(&self) -> GraphDump {
        let edge = |&(from, to): &Pair| GraphEdge { from, to, causality: self.strength((from, to)) };
        GraphDump {
            activities: self
                .activities
                .iter()
                .map(|&a| GraphNode { activity: a, frequency: self.frequency(a) })
                .collect(),
            strong: self.strong.iter().map(edge).collect(),
            weak: self.weak.iter().map(edge).collect(),
        }
    }

    pub fn from_dump(dump: &GraphDump) -> Result<Self, String> {
        let mut g = CausalGraph::new(
            dump.activities.iter().map(|n| n.activity).collect(),
            dump.strong.iter().map(|e| (e.from, e.to)).collect(),
            dump.weak.iter().map(|e| (e.from, e.to)).collect(),
        )?;
        g.frequencies = dump.activities.iter().filter_map(|n| Some((n.activity, n.frequency?))).collect();
        g.strengths = dump
            .strong
            .iter()
            .chain(&dump.weak)
            .filter_map(|e| Some(((e.from, e.to), e.causality?)))
            .collect();
        Ok(g)
    }

    /// Graphviz rendering: solid arcs for strong relations, dashed arcs
    /// labelled `?` for weak ones.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph causal_graph {\n  rankdir=LR;\n  node [shape=box, style=rounded];\n");
        for &a in &self.activities {
            let label = match self.frequency(a) {
                Some(f) => format!("{}\\n{}", escape(&a.name()), f),
                None => escape(&a.name()),
            };
            let _ = writeln!(out, "  {} [label=\"{}\"];", node_id("a", &a.name()), label);
        }
        for &(a, b) in &self.strong {
            let _ = writeln!(out, "  {} -> {};", node_id("a", &a.name()), node_id("a", &b.name()));
        }
        for &(a, b) in &self.weak {
            let _ = writeln!(
                out,
                "  {} -> {} [style=dashed, label=\"?\"];",
                node_id("a", &a.name()),
                node_id("a", &b.name())
            );
        }
        out.push_str("}\n");
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphDump {
    pub activities: Vec<GraphNode>,
    pub strong: Vec<GraphEdge>,
    pub weak: Vec<GraphEdge>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphNode {
    pub activity: ActivityId,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub frequency: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphEdge {
    pub from: ActivityId,
    pub to: ActivityId,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub causality: Option<f64>,
}

/// A log restricted to the activities meeting a frequency threshold,
/// together with its counters. Depends only on `t_freq`, so callers that
/// vary the other parameters can reuse it.
#[derive(Debug, Clone)]
pub struct FrequencyProjection {
    pub t_freq: u64,
    pub activities: BTreeSet<ActivityId>,
    pub log: EventLog,
    pub table: DirectlyFollowsTable,
}

impl FrequencyProjection {
    /// `full_table` must have been built from `log`.
    pub fn new(log: &EventLog, full_table: &DirectlyFollowsTable, t_freq: u64) -> Self {
        let mut activities: BTreeSet<ActivityId> = log
            .alphabet()
            .iter()
            .copied()
            .filter(|&a| full_table.count(a) >= t_freq)
            .collect();
        activities.insert(ActivityId::START);
        activities.insert(ActivityId::END);
        let projected = log.project(&activities).expect("endpoints are always kept");
        let table = DirectlyFollowsTable::build(&projected);
        FrequencyProjection { t_freq, activities, log: projected, table }
    }
}

pub fn discover_causal_graph(log: &EventLog, params: &GraphParams) -> Result<CausalGraph, ParamError> {
    params.validate()?;
    let projection = FrequencyProjection::new(log, &DirectlyFollowsTable::build(log), params.t_freq);
    discover_from_projection(&projection, params)
}

/// Classifies every ordered pair (self-pairs included) of the projected
/// activities by its causality value.
pub fn discover_from_projection(
    projection: &FrequencyProjection,
    params: &GraphParams,
) -> Result<CausalGraph, ParamError> {
    params.validate()?;
    if projection.t_freq != params.t_freq {
        return Err(ParamError::new("t_freq", "does not match the cached projection"));
    }
    let causality = params.causality();
    let table = &projection.table;
    let mut strong = BTreeSet::new();
    let mut weak = BTreeSet::new();
    let mut strengths = BTreeMap::new();
    for &a in &projection.activities {
        for &b in &projection.activities {
            let value = table.causality(a, b, &causality);
            if value >= params.t_rs {
                strong.insert((a, b));
            } else if value >= params.t_rw {
                weak.insert((a, b));
            } else {
                continue;
            }
            strengths.insert((a, b), value);
        }
    }
    let frequencies = projection.activities.iter().map(|&a| (a, table.count(a))).collect();
    Ok(CausalGraph { activities: projection.activities.clone(), strong, weak, frequencies, strengths })
}
