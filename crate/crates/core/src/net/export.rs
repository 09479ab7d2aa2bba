//! JSON, Graphviz and PNML representations of hybrid system nets.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write;

use quick_xml::escape::escape;
use serde::{Deserialize, Serialize};

use super::{Flow, HybridSystemNet, Marking, PetriNet, PlaceCandidate, PlaceId};
use crate::activity::ActivityId;
use crate::causal_graph::Pair;
use crate::dot;
use crate::error::NetError;

/// Tool name used for the PNML extension carrying sure/unsure arcs.
pub const PNML_TOOL: &str = "hybrid-miner";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetDump {
    pub transitions: Vec<ActivityId>,
    pub places: Vec<PlaceDump>,
    pub arcs: Vec<NetArc>,
    pub sure: Vec<Pair>,
    pub unsure: Vec<Pair>,
    pub initial_marking: Vec<TokenCount>,
    pub final_marking: Vec<TokenCount>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PlaceDump {
    Source { id: String },
    Sink { id: String },
    Internal { id: String, inputs: Vec<ActivityId>, outputs: Vec<ActivityId> },
}

impl PlaceDump {
    fn id(&self) -> &str {
        match self {
            PlaceDump::Source { id } | PlaceDump::Sink { id } | PlaceDump::Internal { id, .. } => id,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArcDirection {
    /// Place to transition.
    Consume,
    /// Transition to place.
    Produce,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetArc {
    pub place: String,
    pub transition: ActivityId,
    pub direction: ArcDirection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TokenCount {
    pub place: String,
    pub tokens: u64,
}

/// Stable identifiers: `source`, `sink`, and `p1..pn` for internal places in
/// sorted order.
fn place_ids(net: &PetriNet) -> HashMap<&PlaceId, String> {
    let mut n = 0;
    net.places()
        .iter()
        .map(|p| {
            let id = match p {
                PlaceId::Source => "source".to_string(),
                PlaceId::Sink => "sink".to_string(),
                PlaceId::Internal(_) => {
                    n += 1;
                    format!("p{n}")
                }
            };
            (p, id)
        })
        .collect()
}

impl HybridSystemNet {
    pub fn to_dump(&self) -> NetDump {
        let net = self.net();
        let ids = place_ids(net);
        let marking = |m: &Marking| {
            m.iter().map(|(p, tokens)| TokenCount { place: ids[p].clone(), tokens }).collect()
        };
        NetDump {
            transitions: net.transitions().iter().copied().collect(),
            places: net
                .places()
                .iter()
                .map(|p| match p {
                    PlaceId::Source => PlaceDump::Source { id: ids[p].clone() },
                    PlaceId::Sink => PlaceDump::Sink { id: ids[p].clone() },
                    PlaceId::Internal(c) => PlaceDump::Internal {
                        id: ids[p].clone(),
                        inputs: c.inputs().to_vec(),
                        outputs: c.outputs().to_vec(),
                    },
                })
                .collect(),
            arcs: net
                .arcs()
                .iter()
                .map(|arc| match arc {
                    Flow::PlaceToTransition(p, t) => {
                        NetArc { place: ids[p].clone(), transition: *t, direction: ArcDirection::Consume }
                    }
                    Flow::TransitionToPlace(t, p) => {
                        NetArc { place: ids[p].clone(), transition: *t, direction: ArcDirection::Produce }
                    }
                })
                .collect(),
            sure: self.sure().iter().copied().collect(),
            unsure: self.unsure().iter().copied().collect(),
            initial_marking: marking(self.initial_marking()),
            final_marking: marking(self.final_marking()),
        }
    }

    pub fn from_dump(dump: &NetDump) -> Result<Self, NetError> {
        let mut by_id: HashMap<&str, PlaceId> = HashMap::new();
        for p in &dump.places {
            let place = match p {
                PlaceDump::Source { .. } => PlaceId::Source,
                PlaceDump::Sink { .. } => PlaceId::Sink,
                PlaceDump::Internal { inputs, outputs, .. } => {
                    PlaceId::Internal(PlaceCandidate::new(inputs.iter().copied(), outputs.iter().copied()))
                }
            };
            if by_id.insert(p.id(), place).is_some() {
                return Err(NetError::Invalid(format!("duplicate place id {:?}", p.id())));
            }
        }
        let lookup = |id: &str| {
            by_id
                .get(id)
                .cloned()
                .ok_or_else(|| NetError::Invalid(format!("unknown place id {id:?}")))
        };
        let arcs = dump
            .arcs
            .iter()
            .map(|a| {
                let p = lookup(&a.place)?;
                Ok(match a.direction {
                    ArcDirection::Consume => Flow::PlaceToTransition(p, a.transition),
                    ArcDirection::Produce => Flow::TransitionToPlace(a.transition, p),
                })
            })
            .collect::<Result<Vec<_>, NetError>>()?;
        let marking = |tokens: &[TokenCount]| -> Result<Marking, NetError> {
            let mut m = Marking::empty();
            for t in tokens {
                m.add(lookup(&t.place)?, t.tokens);
            }
            Ok(m)
        };
        let net = PetriNet::new(by_id.values().cloned(), dump.transitions.iter().copied(), arcs)?;
        HybridSystemNet::new(
            net,
            dump.sure.iter().copied().collect(),
            dump.unsure.iter().copied().collect(),
            marking(&dump.initial_marking)?,
            marking(&dump.final_marking)?,
        )
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_dump()).expect("net dump serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, NetError> {
        Self::from_dump(&serde_json::from_str(text)?)
    }

    /// Graphviz: boxes for transitions, circles for places, solid arcs for
    /// place connections and sure arcs, dashed `?` arcs for unsure ones.
    pub fn to_dot(&self) -> String {
        let net = self.net();
        let ids = place_ids(net);
        let mut out = String::from("digraph hybrid_net {\n  rankdir=LR;\n");
        for &t in net.transitions() {
            let _ = writeln!(out, "  {} [shape=box, label=\"{}\"];", dot::node_id("t", &t.name()), dot::escape(&t.name()));
        }
        for p in net.places() {
            let tokens = self.initial_marking().tokens(p);
            let label = if tokens > 0 { "&bull;".repeat(tokens as usize) } else { String::new() };
            let _ = writeln!(
                out,
                "  {} [shape=circle, label=\"{}\", tooltip=\"{}\"];",
                dot::node_id("p", &ids[p]),
                label,
                dot::escape(&p.to_string())
            );
        }
        for arc in net.arcs() {
            let (from, to) = match arc {
                Flow::PlaceToTransition(p, t) => (dot::node_id("p", &ids[p]), dot::node_id("t", &t.name())),
                Flow::TransitionToPlace(t, p) => (dot::node_id("t", &t.name()), dot::node_id("p", &ids[p])),
            };
            let _ = writeln!(out, "  {from} -> {to};");
        }
        for &(a, b) in self.sure() {
            let _ = writeln!(out, "  {} -> {} [color=blue];", dot::node_id("t", &a.name()), dot::node_id("t", &b.name()));
        }
        for &(a, b) in self.unsure() {
            let _ = writeln!(
                out,
                "  {} -> {} [style=dashed, label=\"?\"];",
                dot::node_id("t", &a.name()),
                dot::node_id("t", &b.name())
            );
        }
        out.push_str("}\n");
        out
    }

    /// PNML place/transition net of the formal part. Sure and unsure arcs
    /// travel in a `toolspecific` element.
    pub fn to_pnml(&self) -> String {
        let net = self.net();
        let ids = place_ids(net);
        let tids: HashMap<ActivityId, String> =
            net.transitions().iter().enumerate().map(|(i, &t)| (t, format!("t{}", i + 1))).collect();
        let mut out = String::new();
        out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<pnml>\n");
        out.push_str("  <net id=\"net1\" type=\"http://www.pnml.org/version-2009/grammar/ptnet\">\n");
        out.push_str("    <name><text>hybrid system net</text></name>\n    <page id=\"page1\">\n");
        for p in net.places() {
            let _ = write!(out, "      <place id=\"{}\"><name><text>{}</text></name>", ids[p], escape(p.to_string()));
            let tokens = self.initial_marking().tokens(p);
            if tokens > 0 {
                let _ = write!(out, "<initialMarking><text>{tokens}</text></initialMarking>");
            }
            out.push_str("</place>\n");
        }
        for &t in net.transitions() {
            let _ = writeln!(
                out,
                "      <transition id=\"{}\"><name><text>{}</text></name></transition>",
                tids[&t],
                escape(t.name().as_ref())
            );
        }
        for (i, arc) in net.arcs().iter().enumerate() {
            let (source, target) = match arc {
                Flow::PlaceToTransition(p, t) => (ids[p].clone(), tids[t].clone()),
                Flow::TransitionToPlace(t, p) => (tids[t].clone(), ids[p].clone()),
            };
            let _ = writeln!(out, "      <arc id=\"a{}\" source=\"{source}\" target=\"{target}\"/>", i + 1);
        }
        out.push_str("    </page>\n    <finalmarkings>\n      <marking>\n");
        for (p, tokens) in self.final_marking().iter() {
            let _ = writeln!(out, "        <place idref=\"{}\"><text>{tokens}</text></place>", ids[p]);
        }
        out.push_str("      </marking>\n    </finalmarkings>\n");
        let _ = writeln!(out, "    <toolspecific tool=\"{PNML_TOOL}\" version=\"1.0\">");
        for (kind, pairs) in [("sureArc", self.sure()), ("unsureArc", self.unsure())] {
            for (a, b) in pairs {
                let _ = writeln!(out, "      <{kind} source=\"{}\" target=\"{}\"/>", tids[a], tids[b]);
            }
        }
        out.push_str("    </toolspecific>\n  </net>\n</pnml>\n");
        out
    }

    /// Transitions connected by some chain of places, i.e. the transitive
    /// closure of the place connections starting from `from`.
    pub fn reachable_through_places(&self, from: ActivityId) -> BTreeSet<ActivityId> {
        let pairs = self.net().connected_pairs();
        let mut seen = BTreeSet::new();
        let mut stack = vec![from];
        while let Some(a) = stack.pop() {
            for &(x, y) in pairs.range((a, ActivityId::START)..) {
                if x != a {
                    break;
                }
                if seen.insert(y) {
                    stack.push(y);
                }
            }
        }
        seen
    }
}
