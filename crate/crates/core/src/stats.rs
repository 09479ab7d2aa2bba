//! Directly-follows counters and the causal-strength measures built on them.

use std::collections::HashMap;
use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::activity::ActivityId;
use crate::error::ParamError;
use crate::event_log::EventLog;

/// How the numerator of [`DirectlyFollowsTable::rel1`] is formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rel1Numerator {
    /// `#(a,b) + #(a,b)`.
    #[default]
    Literal,
    /// `#(a,b) + #(b,a)`.
    Symmetric,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CausalityParams {
    /// Smoothing constant of `rel2`, strictly positive.
    pub c: f64,
    /// Weight of `rel1` against `rel2`, in `[0, 1]`.
    pub w: f64,
    pub rel1_numerator: Rel1Numerator,
}

impl Default for CausalityParams {
    fn default() -> Self {
        CausalityParams { c: 1.0, w: 0.5, rel1_numerator: Rel1Numerator::Literal }
    }
}

impl CausalityParams {
    pub fn validate(&self) -> Result<(), ParamError> {
        if !(self.c.is_finite() && self.c > 0.0) {
            return Err(ParamError::new("c", "must be a positive real"));
        }
        if !(0.0..=1.0).contains(&self.w) {
            return Err(ParamError::new("w", "must lie in [0, 1]"));
        }
        Ok(())
    }
}

/// Occurrence and directly-follows counts of a log, weighted by
/// multiplicity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectlyFollowsTable {
    activities: Vec<ActivityId>,
    index: HashMap<ActivityId, usize>,
    occurrences: Vec<u64>,
    follows: Vec<u64>,
    successors: Vec<u64>,
    predecessors: Vec<u64>,
}

impl DirectlyFollowsTable {
    pub fn build(log: &EventLog) -> Self {
        let activities: Vec<ActivityId> = log.alphabet().iter().copied().collect();
        let index: HashMap<ActivityId, usize> =
            activities.iter().enumerate().map(|(i, &a)| (a, i)).collect();
        let n = activities.len();
        let mut occurrences = vec![0u64; n];
        let mut follows = vec![0u64; n * n];
        let mut successors = vec![0u64; n];
        let mut predecessors = vec![0u64; n];
        for variant in log.variants() {
            let k = variant.count;
            let positions: Vec<usize> = variant.trace.iter().map(|a| index[a]).collect();
            for &i in &positions {
                occurrences[i] += k;
            }
            for w in positions.windows(2) {
                follows[w[0] * n + w[1]] += k;
                successors[w[0]] += k;
                predecessors[w[1]] += k;
            }
        }
        DirectlyFollowsTable { activities, index, occurrences, follows, successors, predecessors }
    }

    /// Activities covered by the table, in sorted order.
    pub fn activities(&self) -> &[ActivityId] {
        &self.activities
    }

    fn idx(&self, a: ActivityId) -> Option<usize> {
        self.index.get(&a).copied()
    }

    /// `#(a,L)`.
    pub fn count(&self, a: ActivityId) -> u64 {
        self.idx(a).map_or(0, |i| self.occurrences[i])
    }

    /// `#(X,L)`.
    pub fn count_set<'a>(&self, xs: impl IntoIterator<Item = &'a ActivityId>) -> u64 {
        xs.into_iter().map(|&a| self.count(a)).sum()
    }

    /// `#(a,b,L)`.
    pub fn follows(&self, a: ActivityId, b: ActivityId) -> u64 {
        match (self.idx(a), self.idx(b)) {
            (Some(i), Some(j)) => self.follows[i * self.activities.len() + j],
            _ => 0,
        }
    }

    /// `#(a,*,L)`.
    pub fn successors(&self, a: ActivityId) -> u64 {
        self.idx(a).map_or(0, |i| self.successors[i])
    }

    /// `#(*,b,L)`.
    pub fn predecessors(&self, b: ActivityId) -> u64 {
        self.idx(b).map_or(0, |i| self.predecessors[i])
    }

    pub fn rel1(&self, a: ActivityId, b: ActivityId) -> f64 {
        self.rel1_with(a, b, Rel1Numerator::Literal)
    }

    /// Strength of `(a,b)` relative to the split of `a` and the join of `b`.
    /// Zero when neither has any neighbour.
    pub fn rel1_with(&self, a: ActivityId, b: ActivityId, numerator: Rel1Numerator) -> f64 {
        let ab = self.follows(a, b);
        let num = match numerator {
            Rel1Numerator::Literal => 2 * ab,
            Rel1Numerator::Symmetric => ab + self.follows(b, a),
        };
        let den = self.successors(a) + self.predecessors(b);
        if den == 0 {
            0.0
        } else {
            num as f64 / den as f64
        }
    }

    /// Heuristic-miner style dependency, clipped at zero; self-pairs measure
    /// loop strength.
    pub fn rel2(&self, a: ActivityId, b: ActivityId, c: f64) -> f64 {
        let ab = self.follows(a, b) as f64;
        if a == b {
            return ab / (ab + c);
        }
        let ba = self.follows(b, a) as f64;
        if ab - ba > 0.0 {
            (ab - ba) / (ab + ba + c)
        } else {
            0.0
        }
    }

    pub fn causality(&self, a: ActivityId, b: ActivityId, params: &CausalityParams) -> f64 {
        params.w * self.rel1_with(a, b, params.rel1_numerator) + (1.0 - params.w) * self.rel2(a, b, params.c)
    }

    pub fn to_dump(&self) -> TableDump {
        let n = self.activities.len();
        let mut pairs = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let count = self.follows[i * n + j];
                if count > 0 {
                    pairs.push(PairCount { from: self.activities[i], to: self.activities[j], count });
                }
            }
        }
        TableDump {
            activities: (0..n)
                .map(|i| ActivityCounts {
                    activity: self.activities[i],
                    count: self.occurrences[i],
                    successors: self.successors[i],
                    predecessors: self.predecessors[i],
                })
                .collect(),
            pairs,
        }
    }

    /// Tab-separated directly-follows pairs with a header row.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("from\tto\tcount\n");
        for p in self.to_dump().pairs {
            let _ = writeln!(out, "{}\t{}\t{}", p.from, p.to, p.count);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableDump {
    pub activities: Vec<ActivityCounts>,
    pub pairs: Vec<PairCount>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActivityCounts {
    pub activity: ActivityId,
    pub count: u64,
    pub successors: u64,
    pub predecessors: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairCount {
    pub from: ActivityId,
    pub to: ActivityId,
    pub count: u64,
}
