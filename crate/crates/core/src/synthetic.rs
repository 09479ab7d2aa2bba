//! Seeded log generators: an order-handling process and small random
//! process-like logs for property tests.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::activity::ActivityId;
use crate::event_log::{EventLog, EventLogBuilder};

pub const PLACE_ORDER: &str = "place order";
pub const SEND_INVOICE: &str = "send invoice";
pub const SEND_REMINDER: &str = "send reminder";
pub const PAY: &str = "pay";
pub const CANCEL_ORDER: &str = "cancel order";
pub const MAKE_DELIVERY: &str = "make delivery";
pub const CONFIRM_PAYMENT: &str = "confirm payment";
pub const ARCHIVE_ORDER: &str = "archive order";

/// Case count the stratum sizes below are calibrated for.
pub const REFERENCE_CASES: usize = 12_666;

// Strata at the reference size; other sizes scale them proportionally.
const EARLY_PAY: usize = 37;
const MULTI_REMINDER: usize = 3_189;
const MULTI_REMINDERS_TOTAL: usize = 7_001;
const SINGLE_REMINDER: usize = 2_500;
const CANCELLED: usize = 2_444;

/// Order handling: place order, send invoice, any number of reminders,
/// then either cancel or pay followed by delivery and payment confirmation
/// in either order, and finally archiving. A few cases pay before the
/// invoice is sent.
///
/// At the reference size the log has exactly 80,609 events.
pub fn order_handling(cases: usize, seed: u64) -> EventLog {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = |n: usize| ((n as f64) * cases as f64 / REFERENCE_CASES as f64).round() as usize;
    let early = scale(EARLY_PAY).min(cases);
    let multi = scale(MULTI_REMINDER).min(cases - early);
    let single = scale(SINGLE_REMINDER).min(cases - early - multi);
    let extra = scale(MULTI_REMINDERS_TOTAL).saturating_sub(2 * multi);
    let cancelled = scale(CANCELLED).min(cases - early);

    // reminders per case; early-pay cases come first and never get any
    let mut reminders = vec![0usize; cases];
    for r in &mut reminders[early..early + multi] {
        *r = 2;
    }
    for r in &mut reminders[early + multi..early + multi + single] {
        *r = 1;
    }
    if multi > 0 {
        for _ in 0..extra {
            reminders[early + rng.gen_range(0..multi)] += 1;
        }
    }
    let mut cancel = vec![false; cases];
    let mut regular: Vec<usize> = (early..cases).collect();
    regular.shuffle(&mut rng);
    for &i in &regular[..cancelled] {
        cancel[i] = true;
    }
    let mut order: Vec<usize> = (0..cases).collect();
    order.shuffle(&mut rng);

    let a = |s: &str| ActivityId::intern(s);
    let mut builder = EventLogBuilder::default();
    for i in order {
        let mut trace = vec![a(PLACE_ORDER)];
        if i < early {
            trace.push(a(PAY));
            trace.push(a(SEND_INVOICE));
        } else {
            trace.push(a(SEND_INVOICE));
            trace.extend(std::iter::repeat_n(a(SEND_REMINDER), reminders[i]));
            trace.push(a(if cancel[i] { CANCEL_ORDER } else { PAY }));
        }
        if !cancel[i] {
            let mut tail = [a(MAKE_DELIVERY), a(CONFIRM_PAYMENT)];
            if rng.gen_bool(0.5) {
                tail.swap(0, 1);
            }
            trace.extend(tail);
        }
        trace.push(a(ARCHIVE_ORDER));
        builder.push_raw(&trace, 1).expect("generated labels are not reserved");
    }
    builder.build().expect("at least one case")
}

/// Shape of a random log.
#[derive(Debug, Clone, Copy)]
pub struct RandomLogSpec {
    pub activities: usize,
    pub variants: usize,
    pub max_count: u64,
}

impl Default for RandomLogSpec {
    fn default() -> Self {
        RandomLogSpec { activities: 6, variants: 10, max_count: 40 }
    }
}

/// A log whose variants are noisy copies of one random activity order:
/// steps are skipped, repeated, or swapped with their neighbour.
/// Activities are labelled `{prefix}0`, `{prefix}1`, ...
pub fn random_log(spec: RandomLogSpec, prefix: &str, rng: &mut impl Rng) -> EventLog {
    let mut base: Vec<ActivityId> =
        (0..spec.activities.max(1)).map(|i| ActivityId::intern(&format!("{prefix}{i}"))).collect();
    base.shuffle(rng);
    let mut builder = EventLogBuilder::default();
    for _ in 0..spec.variants.max(1) {
        let mut trace = Vec::new();
        for &a in &base {
            if rng.gen_bool(0.2) {
                continue;
            }
            trace.push(a);
            if rng.gen_bool(0.1) {
                trace.push(a);
            }
        }
        for k in 1..trace.len() {
            if rng.gen_bool(0.15) {
                trace.swap(k - 1, k);
            }
        }
        builder.push_raw(&trace, rng.gen_range(1..=spec.max_count.max(1))).expect("labels are not reserved");
    }
    builder.build().expect("at least one variant")
}
