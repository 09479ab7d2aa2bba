//! Process-wide activity interner.
//!
//! Activities are referred to by a small integer handle everywhere in the
//! engine. Interning is global so that logs, graphs and nets built from
//! different sources agree on identifiers without translation tables.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, OnceLock, RwLock};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Label of the artificial start activity.
pub const START_LABEL: &str = "▷";
/// Label of the artificial end activity.
pub const END_LABEL: &str = "□";

#[derive(Default)]
struct Interner {
    names: Vec<Arc<str>>,
    ids: HashMap<Arc<str>, u32>,
}

fn interner() -> &'static RwLock<Interner> {
    static INTERNER: OnceLock<RwLock<Interner>> = OnceLock::new();
    INTERNER.get_or_init(|| {
        let mut i = Interner::default();
        for label in [START_LABEL, END_LABEL] {
            let name: Arc<str> = Arc::from(label);
            i.ids.insert(name.clone(), i.names.len() as u32);
            i.names.push(name);
        }
        RwLock::new(i)
    })
}

/// Interned activity label.
///
/// Ordering is by label (with the start and end activities first), so any
/// sorted collection of activities has the same order in every process
/// regardless of interning history.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct ActivityId(u32);

impl ActivityId {
    pub const START: ActivityId = ActivityId(0);
    pub const END: ActivityId = ActivityId(1);

    /// Interns `label`, returning the existing id if it was seen before.
    pub fn intern(label: &str) -> ActivityId {
        if let Some(id) = Self::lookup(label) {
            return id;
        }
        let mut guard = interner().write().expect("activity interner poisoned");
        if let Some(&id) = guard.ids.get(label) {
            return ActivityId(id);
        }
        let id = guard.names.len() as u32;
        let name: Arc<str> = Arc::from(label);
        guard.ids.insert(name.clone(), id);
        guard.names.push(name);
        ActivityId(id)
    }

    pub fn lookup(label: &str) -> Option<ActivityId> {
        let guard = interner().read().expect("activity interner poisoned");
        guard.ids.get(label).map(|&id| ActivityId(id))
    }

    pub fn name(self) -> Arc<str> {
        let guard = interner().read().expect("activity interner poisoned");
        guard.names[self.0 as usize].clone()
    }

    pub fn is_endpoint(self) -> bool {
        self == Self::START || self == Self::END
    }

    pub fn index(self) -> u32 {
        self.0
    }
}

/// Returns true for the two labels reserved for the artificial endpoints.
pub fn is_reserved_label(label: &str) -> bool {
    label == START_LABEL || label == END_LABEL
}

impl Ord for ActivityId {
    fn cmp(&self, other: &Self) -> Ordering {
        if self.0 == other.0 {
            return Ordering::Equal;
        }
        match (self.0 < 2, other.0 < 2) {
            (true, true) => self.0.cmp(&other.0),
            (true, false) => Ordering::Less,
            (false, true) => Ordering::Greater,
            (false, false) => {
                let guard = interner().read().expect("activity interner poisoned");
                guard.names[self.0 as usize].cmp(&guard.names[other.0 as usize])
            }
        }
    }
}

impl PartialOrd for ActivityId {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for ActivityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", &*self.name())
    }
}

impl fmt::Display for ActivityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl From<&str> for ActivityId {
    fn from(label: &str) -> Self {
        ActivityId::intern(label)
    }
}

impl Serialize for ActivityId {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.name())
    }
}

impl<'de> Deserialize<'de> for ActivityId {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let label = String::deserialize(deserializer)?;
        Ok(ActivityId::intern(&label))
    }
}
