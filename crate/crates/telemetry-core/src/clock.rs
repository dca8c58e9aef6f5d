//! Process-wide hybrid clock.
//!
//! Record timestamps need two properties at once: differences must be exact
//! monotonic durations (latency is a duration, not a wall time), and absolute
//! values must be meaningful epoch nanoseconds so files from different runs
//! line up. A single wall-clock anchor is captured on first use and all later
//! readings advance it by the monotonic elapsed time.

use std::sync::OnceLock;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

struct Anchor {
    wall_ns: u64,
    mono: Instant,
}

static ANCHOR: OnceLock<Anchor> = OnceLock::new();

fn anchor() -> &'static Anchor {
    ANCHOR.get_or_init(|| Anchor {
        wall_ns: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .expect("system clock before epoch")
            .as_nanos() as u64,
        mono: Instant::now(),
    })
}

/// Current time as epoch nanoseconds, monotone within this process.
pub fn now_ns() -> u64 {
    let a = anchor();
    a.wall_ns + a.mono.elapsed().as_nanos() as u64
}

/// Epoch nanoseconds to epoch milliseconds (API layers speak milliseconds).
pub fn ns_to_ms(ns: u64) -> i64 {
    (ns / 1_000_000) as i64
}

/// Epoch milliseconds to epoch nanoseconds.
pub fn ms_to_ns(ms: i64) -> u64 {
    (ms as u64) * 1_000_000
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monotone() {
        let a = now_ns();
        let b = now_ns();
        assert!(b >= a);
        assert!(a > 0);
    }

    #[test]
    fn ms_round_trip() {
        let ns = now_ns();
        let ms = ns_to_ms(ns);
        assert!(ms_to_ns(ms) <= ns);
        assert!(ns - ms_to_ns(ms) < 1_000_000);
    }
}
