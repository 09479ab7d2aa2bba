//! Independent reference implementations used to cross-check the engine.
//! They follow the definitions literally and favour clarity over speed.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use hybrid_miner::net::{Flow, PlaceId};
use hybrid_miner::{ActivityId, CausalGraph, EventLog, HybridSystemNet, PlaceCandidate};

pub fn id(s: &str) -> ActivityId {
    ActivityId::intern(s)
}

/// All non-empty subsets of `xs`, as sorted vectors.
pub fn subsets(xs: &[ActivityId]) -> Vec<Vec<ActivityId>> {
    let n = xs.len();
    (1u32..(1 << n))
        .map(|mask| {
            let mut s: Vec<ActivityId> = (0..n).filter(|i| mask & (1 << i) != 0).map(|i| xs[i]).collect();
            s.sort();
            s
        })
        .collect()
}

/// Every `(I,O)` with `I × O` inside the strong relations, by exhaustive
/// subset search.
pub fn brute_force_candidates(graph: &CausalGraph, max_in: usize, max_out: usize) -> BTreeSet<PlaceCandidate> {
    let acts: Vec<ActivityId> = graph.activities().iter().copied().collect();
    let subs = subsets(&acts);
    let mut out = BTreeSet::new();
    for i in &subs {
        if i.len() > max_in {
            continue;
        }
        for o in &subs {
            if o.len() > max_out {
                continue;
            }
            if i.iter().all(|a| o.iter().all(|b| graph.strong().contains(&(*a, *b)))) {
                out.insert(PlaceCandidate::new(i.iter().copied(), o.iter().copied()));
            }
        }
    }
    out
}

/// Literal prefix-count check: for every position k, inputs strictly before
/// k outnumber or equal outputs up to and including k; totals are equal.
pub fn prefix_counting(p: &PlaceCandidate, trace: &[ActivityId]) -> (bool, bool) {
    let is_in = |a: &ActivityId| p.inputs().contains(a);
    let is_out = |a: &ActivityId| p.outputs().contains(a);
    let mut fits = true;
    for k in 0..trace.len() {
        let produced = trace[..k].iter().filter(|a| is_in(a)).count();
        let consumed = trace[..=k].iter().filter(|a| is_out(a)).count();
        if produced < consumed {
            fits = false;
        }
    }
    let total_in = trace.iter().filter(|a| is_in(a)).count();
    let total_out = trace.iter().filter(|a| is_out(a)).count();
    fits &= total_in == total_out;
    let activated = trace.iter().any(|a| is_in(a) || is_out(a));
    (fits, activated)
}

/// Explicit token game over a map of place names to counts, built straight
/// from the arc list.
pub fn simulate(hsn: &HybridSystemNet, trace: &[ActivityId]) -> bool {
    let key = |p: &PlaceId| p.to_string();
    let mut marking: BTreeMap<String, i64> = BTreeMap::new();
    for (p, n) in hsn.initial_marking().iter() {
        *marking.entry(key(p)).or_default() += n as i64;
    }
    for &t in trace {
        if !hsn.net().transitions().contains(&t) {
            return false;
        }
        let pre: Vec<String> = hsn
            .net()
            .arcs()
            .iter()
            .filter_map(|f| match f {
                Flow::PlaceToTransition(p, u) if *u == t => Some(key(p)),
                _ => None,
            })
            .collect();
        if pre.iter().any(|p| marking.get(p).copied().unwrap_or(0) < 1) {
            return false;
        }
        for p in pre {
            *marking.entry(p).or_default() -= 1;
        }
        for f in hsn.net().arcs() {
            if let Flow::TransitionToPlace(u, p) = f {
                if *u == t {
                    *marking.entry(key(p)).or_default() += 1;
                }
            }
        }
    }
    marking.retain(|_, n| *n != 0);
    let mut target: BTreeMap<String, i64> = BTreeMap::new();
    for (p, n) in hsn.final_marking().iter() {
        *target.entry(key(p)).or_default() += n as i64;
    }
    marking == target
}

/// Escaping-edges precision by enumerating every prefix of every fitting
/// variant and querying the net's own enabling rule transition by
/// transition.
pub fn brute_force_precision(hsn: &HybridSystemNet, log: &EventLog) -> f64 {
    let log = log.project(hsn.net().transitions()).unwrap();
    let net = hsn.net();
    let (mut escaping, mut enabled) = (0u64, 0u64);
    for v in log.variants() {
        if !simulate(hsn, &v.trace) {
            continue;
        }
        let mut m = hsn.initial_marking().clone();
        for k in 0..=v.trace.len() {
            let prefix = &v.trace[..k];
            let observed: BTreeSet<ActivityId> = log
                .variants()
                .iter()
                .filter(|w| w.trace.len() > k && &w.trace[..k] == prefix)
                .map(|w| w.trace[k])
                .collect();
            for &t in net.transitions() {
                if net.enabled(&m, t).unwrap() {
                    enabled += v.count;
                    if !observed.contains(&t) {
                        escaping += v.count;
                    }
                }
            }
            if k < v.trace.len() {
                m = net.fire(&m, v.trace[k]).unwrap();
            }
        }
    }
    if enabled == 0 {
        1.0
    } else {
        1.0 - escaping as f64 / enabled as f64
    }
}

/// Whether `to` can be reached from `from` by following place connections.
pub fn place_path(hsn: &HybridSystemNet, from: ActivityId, to: ActivityId) -> bool {
    let pairs = hsn.net().connected_pairs();
    let mut seen = BTreeSet::new();
    let mut stack = vec![from];
    while let Some(a) = stack.pop() {
        for &(x, y) in &pairs {
            if x == a && seen.insert(y) {
                if y == to {
                    return true;
                }
                stack.push(y);
            }
        }
    }
    false
}
