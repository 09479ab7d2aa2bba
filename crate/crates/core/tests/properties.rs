mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;

use common::{brute_force_precision, simulate};
use hybrid_miner::net::PlaceId;
use hybrid_miner::{
    discover_causal_graph, discover_hybrid_net, fitness, precision_escaping_edges, score, ActivityId,
    CausalityParams, DirectlyFollowsTable, DiscoveryParams, EventLog, GraphParams, HybridSystemNet, PetriNet,
    PlaceCandidate, Rel1Numerator,
};

const LABELS: [&str; 5] = ["p0", "p1", "p2", "p3", "p4"];

fn build_log(raw: &[(Vec<usize>, u64)]) -> EventLog {
    EventLog::from_str_traces(raw.iter().map(|(t, n)| (t.iter().map(|&i| LABELS[i]).collect::<Vec<_>>(), *n))).unwrap()
}

fn arb_log() -> impl Strategy<Value = EventLog> {
    prop::collection::vec((prop::collection::vec(0usize..5, 0..8), 1u64..20), 1..8).prop_map(|raw| build_log(&raw))
}

fn arb_subset() -> impl Strategy<Value = BTreeSet<ActivityId>> {
    prop::collection::btree_set(0usize..5, 0..5)
        .prop_map(|s| s.into_iter().map(|i| ActivityId::intern(LABELS[i])).collect())
}

fn arb_place() -> impl Strategy<Value = PlaceCandidate> {
    let side = prop::collection::btree_set(0usize..7, 1..4).prop_map(|s| {
        s.into_iter()
            .map(|i| match i {
                5 => ActivityId::START,
                6 => ActivityId::END,
                i => ActivityId::intern(LABELS[i]),
            })
            .collect::<Vec<_>>()
    });
    (side.clone(), side).prop_map(|(i, o)| PlaceCandidate::new(i, o))
}

fn arb_graph_params() -> impl Strategy<Value = GraphParams> {
    (1u64..5, 0.1f64..3.0, 0.0f64..=1.0, 0.0f64..=1.0, 0.0f64..=1.0).prop_map(|(t_freq, c, w, x, y)| GraphParams {
        t_freq,
        c,
        w,
        rel1_numerator: Rel1Numerator::Literal,
        t_rs: x.max(y),
        t_rw: x.min(y),
    })
}

fn with_endpoints(keep: &BTreeSet<ActivityId>) -> BTreeSet<ActivityId> {
    let mut k = keep.clone();
    k.insert(ActivityId::START);
    k.insert(ActivityId::END);
    k
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn projection_is_idempotent_and_keeps_cases(log in arb_log(), keep in arb_subset()) {
        let keep = with_endpoints(&keep);
        let once = log.project(&keep).unwrap();
        prop_assert_eq!(once.project(&keep).unwrap(), once.clone());
        prop_assert_eq!(once.case_count(), log.case_count());
        prop_assert!(once.validate().is_ok());
    }

    #[test]
    fn projection_onto_own_alphabet_is_identity(log in arb_log()) {
        prop_assert_eq!(log.project(log.alphabet()).unwrap(), log);
    }

    #[test]
    fn table_rows_and_columns_sum_to_counters(log in arb_log()) {
        let t = DirectlyFollowsTable::build(&log);
        for &a in t.activities() {
            let row: u64 = t.activities().iter().map(|&b| t.follows(a, b)).sum();
            let col: u64 = t.activities().iter().map(|&b| t.follows(b, a)).sum();
            prop_assert_eq!(row, t.successors(a));
            prop_assert_eq!(col, t.predecessors(a));
        }
        prop_assert_eq!(t.successors(ActivityId::END), 0);
        prop_assert_eq!(t.predecessors(ActivityId::START), 0);
        prop_assert_eq!(t.count(ActivityId::START), log.case_count());
    }

    #[test]
    fn measures_lie_in_unit_interval(log in arb_log(), c in 0.01f64..10.0) {
        let t = DirectlyFollowsTable::build(&log);
        for &a in t.activities() {
            for &b in t.activities() {
                for m in [Rel1Numerator::Literal, Rel1Numerator::Symmetric] {
                    let r1 = t.rel1_with(a, b, m);
                    prop_assert!((0.0..=1.0).contains(&r1), "rel1 {}", r1);
                }
                let r2 = t.rel2(a, b, c);
                prop_assert!((0.0..=1.0).contains(&r2), "rel2 {}", r2);
            }
        }
    }

    #[test]
    fn causality_is_affine_in_w(log in arb_log()) {
        let t = DirectlyFollowsTable::build(&log);
        for &a in t.activities() {
            for &b in t.activities() {
                for w in [0.0, 0.25, 0.5, 0.75, 1.0] {
                    let p = CausalityParams { c: 1.0, w, rel1_numerator: Rel1Numerator::Literal };
                    let expected = w * t.rel1(a, b) + (1.0 - w) * t.rel2(a, b, 1.0);
                    prop_assert!((t.causality(a, b, &p) - expected).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn scaling_multiplicities(raw in prop::collection::vec((prop::collection::vec(0usize..5, 0..8), 1u64..20), 1..8), k in 2u64..6) {
        let log = build_log(&raw);
        let scaled_raw: Vec<(Vec<usize>, u64)> = raw.iter().map(|(t, n)| (t.clone(), n * k)).collect();
        let scaled = build_log(&scaled_raw);
        let (t, s) = (DirectlyFollowsTable::build(&log), DirectlyFollowsTable::build(&scaled));
        for &a in t.activities() {
            for &b in t.activities() {
                prop_assert!((t.rel1(a, b) - s.rel1(a, b)).abs() < 1e-12);
                prop_assert!(s.rel2(a, b, 1.0) + 1e-12 >= t.rel2(a, b, 1.0));
            }
        }
    }

    #[test]
    fn raising_t_rs_only_demotes(log in arb_log(), gp in arb_graph_params(), bump in 0.0f64..0.5) {
        let low = discover_causal_graph(&log, &gp).unwrap();
        let high_params = GraphParams { t_rs: (gp.t_rs + bump).min(1.0), ..gp };
        let high = discover_causal_graph(&log, &high_params).unwrap();
        prop_assert!(high.strong().is_subset(low.strong()));
        let union = |g: &hybrid_miner::CausalGraph| g.strong().union(g.weak()).copied().collect::<BTreeSet<_>>();
        prop_assert_eq!(union(&low), union(&high));
    }

    #[test]
    fn raising_t_freq_never_adds_activities(log in arb_log(), gp in arb_graph_params(), bump in 0u64..10) {
        let low = discover_causal_graph(&log, &gp).unwrap();
        let high = discover_causal_graph(&log, &GraphParams { t_freq: gp.t_freq + bump, ..gp }).unwrap();
        prop_assert!(high.activities().is_subset(low.activities()));
    }

    #[test]
    fn raising_t_replay_shrinks_the_place_set(log in arb_log(), gp in arb_graph_params(), a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
        let graph = discover_causal_graph(&log, &gp).unwrap();
        let run = |t_replay| {
            let d = discover_hybrid_net(&log, &graph, &DiscoveryParams { graph: gp, t_replay, ..Default::default() }).unwrap();
            d.places().map(|c| c.place.clone()).collect::<BTreeSet<_>>()
        };
        let (lo, hi) = (a.min(b), a.max(b));
        prop_assert!(run(hi).is_subset(&run(lo)));
    }

    #[test]
    fn perfect_threshold_gives_perfect_fitness(log in arb_log(), gp in arb_graph_params()) {
        let graph = discover_causal_graph(&log, &gp).unwrap();
        let d = discover_hybrid_net(&log, &graph, &DiscoveryParams { graph: gp, t_replay: 1.0, ..Default::default() }).unwrap();
        prop_assert_eq!(fitness(&d.net, &log).unwrap(), 1.0);
    }

    #[test]
    fn glob_matches_counter_arithmetic(log in arb_log(), p in arb_place()) {
        let t = DirectlyFollowsTable::build(&log);
        let i: u64 = p.inputs().iter().map(|&a| t.count(a)).sum();
        let o: u64 = p.outputs().iter().map(|&a| t.count(a)).sum();
        let expected = if i.max(o) == 0 { 1.0 } else { 1.0 - (i as f64 - o as f64).abs() / i.max(o) as f64 };
        prop_assert!((score(&p, &log).glob - expected).abs() < 1e-12);
    }

    #[test]
    fn non_inhibiting_place_scores_one(log in arb_log(), p in arb_place()) {
        let s = score(&p, &log);
        if s.fitting == s.total && s.activated > 0 {
            prop_assert_eq!(s.freq, 1.0);
            prop_assert_eq!(s.rel, Some(1.0));
            prop_assert_eq!(s.glob, 1.0);
        }
        prop_assert_eq!(s.freq, s.fitting as f64 / s.total as f64);
    }

    #[test]
    fn adding_a_place_never_raises_fitness(log in arb_log(), ps in prop::collection::vec(arb_place(), 0..4), extra in arb_place()) {
        let transitions: BTreeSet<ActivityId> = log.alphabet().clone();
        let keep = |p: &PlaceCandidate| p.inputs().iter().chain(p.outputs()).all(|a| transitions.contains(a));
        let ps: Vec<PlaceCandidate> = ps.into_iter().filter(|p| keep(p)).collect();
        if !keep(&extra) {
            return Ok(());
        }
        let net = |places: Vec<PlaceCandidate>| {
            let n = PetriNet::with_places(transitions.iter().copied(), places).unwrap();
            HybridSystemNet::with_endpoints(n, BTreeSet::new(), BTreeSet::new()).unwrap()
        };
        let base = fitness(&net(ps.clone()), &log).unwrap();
        let mut more = ps;
        more.push(extra);
        prop_assert!(fitness(&net(more), &log).unwrap() <= base);
    }

    #[test]
    fn precision_matches_prefix_oracle(log in arb_log(), ps in prop::collection::vec(arb_place(), 0..3)) {
        let transitions: BTreeSet<ActivityId> = log.alphabet().clone();
        let ps: Vec<PlaceCandidate> = ps
            .into_iter()
            .filter(|p| p.inputs().iter().chain(p.outputs()).all(|a| transitions.contains(a)))
            .collect();
        let n = PetriNet::with_places(transitions.iter().copied(), ps).unwrap();
        let hsn = HybridSystemNet::with_endpoints(n, BTreeSet::new(), BTreeSet::new()).unwrap();
        let got = precision_escaping_edges(&hsn, &log).unwrap();
        prop_assert!((0.0..=1.0).contains(&got));
        prop_assert!((got - brute_force_precision(&hsn, &log)).abs() < 1e-12);
    }

    #[test]
    fn firing_conserves_tokens_per_arc(p in arb_place(), t_idx in 0usize..7) {
        let transitions: Vec<ActivityId> = [ActivityId::START, ActivityId::END]
            .into_iter()
            .chain(LABELS.iter().map(|l| ActivityId::intern(l)))
            .collect();
        let net = PetriNet::with_places(transitions.clone(), [p.clone()]).unwrap();
        let t = transitions[t_idx];
        let mut m = hybrid_miner::Marking::empty();
        m.add(PlaceId::Internal(p), 2);
        m.add(PlaceId::Source, 1);
        if net.enabled(&m, t).unwrap() {
            let next = net.fire(&m, t).unwrap();
            let pre = net.preset(t).count() as u64;
            let post = net.postset(t).count() as u64;
            prop_assert_eq!(next.size() + pre, m.size() + post);
        }
    }

    #[test]
    fn behaviour_agrees_with_token_game(log in arb_log(), ps in prop::collection::vec(arb_place(), 1..4)) {
        let transitions: Vec<ActivityId> = [ActivityId::START, ActivityId::END]
            .into_iter()
            .chain(LABELS.iter().map(|l| ActivityId::intern(l)))
            .collect();
        let n = PetriNet::with_places(transitions, ps).unwrap();
        let hsn = HybridSystemNet::with_endpoints(n, BTreeSet::new(), BTreeSet::new()).unwrap();
        for v in log.variants() {
            prop_assert_eq!(hsn.in_behavior(&v.trace).unwrap(), simulate(&hsn, &v.trace));
        }
    }
}
