//! Discovery of hybrid process models from event logs.
//!
//! The pipeline has two phases. A causal graph with strong and weak
//! relations is derived from directly-follows statistics
//! ([`causal_graph::discover_causal_graph`]); then candidate places built
//! from the strong relations are scored by replay and the survivors form a
//! hybrid system net, whose remaining strong relations become sure arcs and
//! weak relations unsure arcs ([`discovery::discover_hybrid_net`]).

pub mod activity;
pub mod causal_graph;
pub mod conformance;
pub mod discovery;
mod dot;
pub mod error;
pub mod event_log;
pub mod fixtures;
pub mod net;
pub mod stats;
pub mod synthetic;

pub use activity::ActivityId;
pub use causal_graph::{discover_causal_graph, CausalGraph, GraphParams};
pub use conformance::{classify, evaluate, fitness, precision_escaping_edges, QualityReport};
pub use discovery::{
    check_replayable, discover_hybrid_net, enumerate_candidates, score, Bounds, Discovery, DiscoveryParams,
    PlaceScore, Redundancy,
};
pub use error::{LogError, NetError, ParamError};
pub use event_log::{EventLog, Trace};
pub use net::{validate_consistency, ConsistencyReport, HybridSystemNet, Marking, PetriNet, PlaceCandidate, PlaceId};
pub use stats::{CausalityParams, DirectlyFollowsTable, Rel1Numerator};
