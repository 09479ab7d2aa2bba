//! The two small logs used throughout the documentation and tests.

use crate::activity::ActivityId;
use crate::event_log::{augment_endpoints, EventLog};

/// `[<a,b,c,d>^45, <a,c,b,d>^35, <a,e,d>^20]`.
pub fn l1() -> EventLog {
    EventLog::from_str_traces([
        (vec!["a", "b", "c", "d"], 45),
        (vec!["a", "c", "b", "d"], 35),
        (vec!["a", "e", "d"], 20),
    ])
    .expect("fixture is well formed")
}

/// `[<c,d>^1000, <a,b>^100, <b,a>^10, <a^1000>]`: unbalanced traces where
/// the global score disagrees with the replay scores.
pub fn l2() -> EventLog {
    let a = ActivityId::intern("a");
    let s = |xs: &[&str]| xs.iter().map(|x| ActivityId::intern(x)).collect::<Vec<_>>();
    augment_endpoints([
        (s(&["c", "d"]), 1000),
        (s(&["a", "b"]), 100),
        (s(&["b", "a"]), 10),
        (vec![a; 1000], 1),
    ])
    .expect("fixture is well formed")
}
