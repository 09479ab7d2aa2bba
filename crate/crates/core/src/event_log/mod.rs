//! Event logs as multisets of traces bracketed by artificial start and end
//! activities.

mod csv;
mod xes;

use std::collections::{BTreeSet, HashMap};
use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::activity::ActivityId;
use crate::error::LogError;

pub use self::csv::{parse_csv, write_csv, ColumnMapping};
pub use self::xes::{parse_xes, write_xes, XesOptions};

/// A case: `<▷, a1, ..., an, □>` with the endpoints occurring nowhere else.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Trace(Vec<ActivityId>);

impl Trace {
    /// Wraps an already bracketed sequence after checking its shape.
    pub fn new(activities: Vec<ActivityId>) -> Result<Self, LogError> {
        let n = activities.len();
        let shaped = n >= 2
            && activities[0] == ActivityId::START
            && activities[n - 1] == ActivityId::END
            && activities[1..n - 1].iter().all(|a| !a.is_endpoint());
        if !shaped {
            return Err(LogError::MalformedTrace(render(&activities)));
        }
        Ok(Trace(activities))
    }

    /// Brackets a raw sequence, which must not contain the endpoints.
    pub fn from_raw(raw: &[ActivityId]) -> Result<Self, LogError> {
        if let Some(a) = raw.iter().find(|a| a.is_endpoint()) {
            return Err(LogError::ReservedLabel { label: a.name().to_string() });
        }
        let mut v = Vec::with_capacity(raw.len() + 2);
        v.push(ActivityId::START);
        v.extend_from_slice(raw);
        v.push(ActivityId::END);
        Ok(Trace(v))
    }

    /// Activities strictly between the endpoints.
    pub fn inner(&self) -> &[ActivityId] {
        &self.0[1..self.0.len() - 1]
    }

    pub fn as_slice(&self) -> &[ActivityId] {
        &self.0
    }

    fn project(&self, keep: &BTreeSet<ActivityId>) -> Trace {
        Trace(self.0.iter().copied().filter(|a| keep.contains(a)).collect())
    }
}

impl Deref for Trace {
    type Target = [ActivityId];

    fn deref(&self) -> &[ActivityId] {
        &self.0
    }
}

fn render(seq: &[ActivityId]) -> String {
    let names: Vec<String> = seq.iter().map(|a| a.name().to_string()).collect();
    format!("<{}>", names.join(","))
}

/// A distinct trace together with its multiplicity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Variant {
    pub trace: Trace,
    pub count: u64,
}

/// Non-empty multiset of traces.
///
/// Variants are kept in order of first occurrence, which makes every
/// derived artifact deterministic for a given input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventLog {
    variants: Vec<Variant>,
    alphabet: BTreeSet<ActivityId>,
}

impl EventLog {
    pub fn variants(&self) -> &[Variant] {
        &self.variants
    }

    pub fn alphabet(&self) -> &BTreeSet<ActivityId> {
        &self.alphabet
    }

    /// Number of cases, i.e. the sum of multiplicities.
    pub fn case_count(&self) -> u64 {
        self.variants.iter().map(|v| v.count).sum()
    }

    /// Number of events including the artificial endpoints.
    pub fn event_count(&self) -> u64 {
        self.variants.iter().map(|v| v.count * v.trace.len() as u64).sum()
    }

    /// Number of events excluding the artificial endpoints.
    pub fn raw_event_count(&self) -> u64 {
        self.event_count() - 2 * self.case_count()
    }

    /// Projects every trace onto `keep`, merging variants that become equal.
    pub fn project(&self, keep: &BTreeSet<ActivityId>) -> Result<EventLog, LogError> {
        if !keep.contains(&ActivityId::START) || !keep.contains(&ActivityId::END) {
            return Err(LogError::ProjectionDropsEndpoints);
        }
        let mut builder = EventLogBuilder::default();
        for v in &self.variants {
            builder.push(v.trace.project(keep), v.count);
        }
        let mut log = builder.build()?;
        log.alphabet = self.alphabet.intersection(keep).copied().collect();
        Ok(log)
    }

    /// Checks the structural invariants every log must satisfy.
    pub fn validate(&self) -> Result<(), LogError> {
        if self.variants.is_empty() {
            return Err(LogError::Empty);
        }
        let mut seen = BTreeSet::new();
        for v in &self.variants {
            if v.count == 0 {
                return Err(LogError::MalformedTrace("zero multiplicity".into()));
            }
            Trace::new(v.trace.0.clone())?;
            if !seen.insert(&v.trace) {
                return Err(LogError::MalformedTrace(format!("duplicate variant {}", render(&v.trace))));
            }
            if let Some(a) = v.trace.iter().find(|a| !self.alphabet.contains(a)) {
                return Err(LogError::MalformedTrace(format!("{a} not in alphabet")));
            }
        }
        if !self.alphabet.contains(&ActivityId::START) || !self.alphabet.contains(&ActivityId::END) {
            return Err(LogError::MalformedTrace("alphabet lacks endpoints".into()));
        }
        Ok(())
    }

    /// Serializable form: `{alphabet: [...], variants: [{trace: [...], count: n}]}`.
    pub fn to_dump(&self) -> LogDump {
        LogDump {
            alphabet: self.alphabet.iter().map(|a| a.name().to_string()).collect(),
            variants: self
                .variants
                .iter()
                .map(|v| VariantDump {
                    trace: v.trace.iter().map(|a| a.name().to_string()).collect(),
                    count: v.count,
                })
                .collect(),
        }
    }

    pub fn from_dump(dump: &LogDump) -> Result<EventLog, LogError> {
        let mut builder = EventLogBuilder::default();
        for v in &dump.variants {
            let seq: Vec<ActivityId> = v.trace.iter().map(|s| ActivityId::intern(s)).collect();
            builder.push_raw(&seq, v.count)?;
        }
        let mut log = builder.build()?;
        log.alphabet.extend(dump.alphabet.iter().map(|s| ActivityId::intern(s)));
        Ok(log)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_dump()).expect("log dump serializes")
    }

    pub fn from_json(bytes: &[u8]) -> Result<EventLog, LogError> {
        let dump: LogDump = serde_json::from_slice(bytes)?;
        Self::from_dump(&dump)
    }

    /// Convenience constructor from string traces; see [`augment_endpoints`].
    pub fn from_str_traces<'a, I, T>(traces: I) -> Result<EventLog, LogError>
    where
        I: IntoIterator<Item = (T, u64)>,
        T: IntoIterator<Item = &'a str>,
    {
        augment_endpoints(
            traces
                .into_iter()
                .map(|(t, n)| (t.into_iter().map(ActivityId::intern).collect::<Vec<_>>(), n)),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogDump {
    pub alphabet: Vec<String>,
    pub variants: Vec<VariantDump>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VariantDump {
    pub trace: Vec<String>,
    pub count: u64,
}

/// Accumulates traces into variants.
#[derive(Debug, Default)]
pub struct EventLogBuilder {
    index: HashMap<Trace, usize>,
    variants: Vec<Variant>,
}

impl EventLogBuilder {
    pub fn push(&mut self, trace: Trace, count: u64) {
        if count == 0 {
            return;
        }
        match self.index.get(&trace) {
            Some(&i) => self.variants[i].count += count,
            None => {
                self.index.insert(trace.clone(), self.variants.len());
                self.variants.push(Variant { trace, count });
            }
        }
    }

    /// Adds a raw sequence: bracketed if it has no endpoints, otherwise it
    /// must already be a well-formed trace.
    pub fn push_raw(&mut self, seq: &[ActivityId], count: u64) -> Result<(), LogError> {
        let trace = match seq.iter().find(|a| a.is_endpoint()) {
            Some(a) => Trace::new(seq.to_vec())
                .map_err(|_| LogError::ReservedLabel { label: a.name().to_string() })?,
            None => Trace::from_raw(seq)?,
        };
        self.push(trace, count);
        Ok(())
    }

    pub fn build(self) -> Result<EventLog, LogError> {
        if self.variants.is_empty() {
            return Err(LogError::Empty);
        }
        let alphabet = self.variants.iter().flat_map(|v| v.trace.iter().copied()).collect();
        Ok(EventLog { variants: self.variants, alphabet })
    }
}

/// Turns raw activity sequences into a log, bracketing each with `▷` and `□`.
///
/// Sequences that already carry the endpoints in the right positions pass
/// through unchanged; endpoints anywhere else are rejected.
pub fn augment_endpoints<I>(raw: I) -> Result<EventLog, LogError>
where
    I: IntoIterator<Item = (Vec<ActivityId>, u64)>,
{
    let mut builder = EventLogBuilder::default();
    for (seq, count) in raw {
        builder.push_raw(&seq, count)?;
    }
    builder.build()
}
