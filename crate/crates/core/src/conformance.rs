//! Trace-level fitness and an escaping-edges precision for hybrid system
//! nets. Only places carry behaviour; sure and unsure arcs are ignored.

use std::collections::{BTreeSet, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::activity::ActivityId;
use crate::error::NetError;
use crate::event_log::EventLog;
use crate::net::{CompiledNet, HybridSystemNet};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariantVerdict {
    /// The variant after projection onto the net's transitions.
    pub trace: Vec<ActivityId>,
    pub count: u64,
    pub fitting: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlaceViolations {
    pub place: String,
    /// Cases this place alone cannot replay.
    pub cases: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QualityReport {
    pub fitness_trace: f64,
    pub precision_escaping: f64,
    pub fitting_cases: u64,
    pub total_cases: u64,
    pub verdicts: Vec<VariantVerdict>,
    pub place_violations: Vec<PlaceViolations>,
}

/// Restricts the log to the net's transitions.
fn project_onto(hsn: &HybridSystemNet, log: &EventLog) -> Result<EventLog, NetError> {
    log.project(hsn.net().transitions())
        .map_err(|_| NetError::Invalid("net lacks the start or end transition".into()))
}

/// Per-variant fitting verdicts on the projected log, in log order.
pub fn classify(hsn: &HybridSystemNet, log: &EventLog) -> Result<Vec<VariantVerdict>, NetError> {
    let projected = project_onto(hsn, log)?;
    Ok(verdicts_on(&CompiledNet::new(hsn), &projected))
}

fn verdicts_on(compiled: &CompiledNet, log: &EventLog) -> Vec<VariantVerdict> {
    log.variants()
        .par_iter()
        .map(|v| VariantVerdict { trace: v.trace.to_vec(), count: v.count, fitting: compiled.accepts(&v.trace) })
        .collect()
}

/// Weighted fraction of fitting cases.
pub fn fitness(hsn: &HybridSystemNet, log: &EventLog) -> Result<f64, NetError> {
    Ok(fitness_of(&classify(hsn, log)?))
}

fn fitness_of(verdicts: &[VariantVerdict]) -> f64 {
    let total: u64 = verdicts.iter().map(|v| v.count).sum();
    let fitting: u64 = verdicts.iter().filter(|v| v.fitting).map(|v| v.count).sum();
    if total == 0 {
        1.0
    } else {
        fitting as f64 / total as f64
    }
}

/// `1 - escaping / enabled`, summing over every prefix state of every
/// fitting case the transitions the net enables and those of them the log
/// never continues with. Transitions without input places are enabled
/// everywhere. Returns 1 when nothing fits.
pub fn precision_escaping_edges(hsn: &HybridSystemNet, log: &EventLog) -> Result<f64, NetError> {
    let projected = project_onto(hsn, log)?;
    let compiled = CompiledNet::new(hsn);
    Ok(precision_on(&compiled, &projected))
}

fn precision_on(compiled: &CompiledNet, log: &EventLog) -> f64 {
    // prefix automaton: state = prefix, continuations = observed next activities
    let mut continuations: HashMap<&[ActivityId], BTreeSet<ActivityId>> = HashMap::new();
    for v in log.variants() {
        let t = v.trace.as_slice();
        for k in 0..=t.len() {
            let next = continuations.entry(&t[..k]).or_default();
            if k < t.len() {
                next.insert(t[k]);
            }
        }
    }
    let (escaping, enabled) = log
        .variants()
        .par_iter()
        .filter(|v| compiled.accepts(&v.trace))
        .map(|v| {
            let t = v.trace.as_slice();
            let mut tokens = compiled.initial();
            let (mut esc, mut en) = (0u64, 0u64);
            for k in 0..=t.len() {
                let observed = &continuations[&t[..k]];
                for a in compiled.enabled(&tokens) {
                    en += 1;
                    if !observed.contains(&a) {
                        esc += 1;
                    }
                }
                if k < t.len() {
                    let fired = compiled.fire(&mut tokens, compiled.transition(t[k]).expect("fitting trace"));
                    debug_assert!(fired);
                }
            }
            (esc * v.count, en * v.count)
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    if enabled == 0 {
        1.0
    } else {
        1.0 - escaping as f64 / enabled as f64
    }
}

/// Fitness, precision, verdicts, and for every place the number of cases
/// it would reject on its own.
pub fn evaluate(hsn: &HybridSystemNet, log: &EventLog) -> Result<QualityReport, NetError> {
    let projected = project_onto(hsn, log)?;
    let compiled = CompiledNet::new(hsn);
    let verdicts = verdicts_on(&compiled, &projected);
    let place_violations = compiled
        .places()
        .iter()
        .enumerate()
        .map(|(i, p)| PlaceViolations {
            place: p.to_string(),
            cases: projected
                .variants()
                .iter()
                .filter(|v| !compiled.place_fits(i, &v.trace))
                .map(|v| v.count)
                .sum(),
        })
        .collect();
    let total_cases = projected.case_count();
    let fitting_cases = verdicts.iter().filter(|v| v.fitting).map(|v| v.count).sum();
    Ok(QualityReport {
        fitness_trace: fitness_of(&verdicts),
        precision_escaping: precision_on(&compiled, &projected),
        fitting_cases,
        total_cases,
        verdicts,
        place_violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::l1;
    use crate::net::{PetriNet, PlaceCandidate};

    fn id(s: &str) -> ActivityId {
        ActivityId::intern(s)
    }

    fn ids(xs: &[&str]) -> Vec<ActivityId> {
        xs.iter().map(|s| id(s)).collect()
    }

    fn net(transitions: &[&str], places: &[(&[&str], &[&str])]) -> HybridSystemNet {
        let ps = places.iter().map(|(i, o)| PlaceCandidate::new(ids(i), ids(o)));
        let n = PetriNet::with_places(ids(transitions), ps).unwrap();
        HybridSystemNet::with_endpoints(n, BTreeSet::new(), BTreeSet::new()).unwrap()
    }

    const L1_ACTS: &[&str] = &["▷", "□", "a", "b", "c", "d", "e"];

    #[test]
    fn place_free_net_fits_everything() {
        let hsn = net(L1_ACTS, &[]);
        assert_eq!(fitness(&hsn, &l1()).unwrap(), 1.0);
        assert!(classify(&hsn, &l1()).unwrap().iter().all(|v| v.fitting));
        assert!(precision_escaping_edges(&hsn, &l1()).unwrap() < 1.0);
    }

    #[test]
    fn single_place_fits_eighty_percent() {
        let hsn = net(L1_ACTS, &[(&["a"], &["b"])]);
        let verdicts = classify(&hsn, &l1()).unwrap();
        let fitting: u64 = verdicts.iter().filter(|v| v.fitting).map(|v| v.count).sum();
        assert_eq!(fitting, 80);
        assert!((fitness(&hsn, &l1()).unwrap() - 0.8).abs() < 1e-15);
        let report = evaluate(&hsn, &l1()).unwrap();
        let p = report.place_violations.iter().find(|p| p.place == "({a},{b})").unwrap();
        assert_eq!(p.cases, 20);
        assert_eq!(report.fitting_cases + 20, report.total_cases);
    }

    #[test]
    fn log_activities_outside_the_net_are_projected_away() {
        let hsn = net(&["▷", "□", "a", "d"], &[(&["a"], &["d"])]);
        assert_eq!(fitness(&hsn, &l1()).unwrap(), 1.0);
    }

    #[test]
    fn exact_net_has_full_precision() {
        let log = EventLog::from_str_traces([(vec!["a", "b"], 3)]).unwrap();
        let hsn = net(&["▷", "□", "a", "b"], &[(&["▷"], &["a"]), (&["a"], &["b"]), (&["b"], &["□"])]);
        assert_eq!(precision_escaping_edges(&hsn, &log).unwrap(), 1.0);
        assert_eq!(fitness(&hsn, &log).unwrap(), 1.0);
    }

    #[test]
    fn place_free_precision_by_hand() {
        let log = EventLog::from_str_traces([(vec!["a"], 1), (vec!["b"], 1)]).unwrap();
        let hsn = net(&["▷", "□", "a", "b"], &[]);
        // per variant: start state enables all 4 (3 escape), after ▷ 3 (□ escapes),
        // after a/b 3 (2 escape), final state 3 (all escape): 9 of 13
        let p = precision_escaping_edges(&hsn, &log).unwrap();
        assert!((p - 4.0 / 13.0).abs() < 1e-15);
    }

    #[test]
    fn missing_endpoint_transition_is_an_error() {
        let n = PetriNet::new([], ids(&["a"]), []).unwrap();
        let hsn = HybridSystemNet::new(n, BTreeSet::new(), BTreeSet::new(), Default::default(), Default::default()).unwrap();
        assert!(fitness(&hsn, &l1()).is_err());
    }
}
