//! Probe buffer: the shared queue between a processing path and its
//! collector.
//!
//! Exactly one producer context calls [`ProbeEmitter::emit`] and exactly one
//! collector context drains. Overflow is an outcome, not an error: a full
//! queue drops the record and counts it, because collection must never delay
//! the processing path.

use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::thread::Thread;
use std::time::Duration;

use telemetry_core::TelemetryRecord;

use crate::spsc;

/// Emit result as seen by the producer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmitOutcome {
    Accepted,
    /// Queue full; the record was discarded and counted.
    Dropped,
    /// This probe is disabled; nothing was recorded or counted.
    Disabled,
}

#[derive(Debug, Default)]
struct Shared {
    enqueued: AtomicU64,
    dropped: AtomicU64,
    drained: AtomicU64,
    /// True while the collector is parked waiting for records.
    collector_parked: AtomicBool,
    collector_thread: Mutex<Option<Thread>>,
}

/// Counter snapshot. `enqueued == drained + in_queue + dropped` holds at
/// every quiescent point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProbeStats {
    pub enqueued: u64,
    pub drained: u64,
    pub dropped: u64,
}

impl ProbeStats {
    pub fn in_queue(&self) -> u64 {
        self.enqueued - self.drained - self.dropped
    }
}

/// Read-only handle onto a probe's counters; cheap to clone and share.
#[derive(Clone)]
pub struct ProbeStatsHandle {
    shared: Arc<Shared>,
}

impl ProbeStatsHandle {
    pub fn stats(&self) -> ProbeStats {
        // Drained is read first so a concurrent enqueue can never make the
        // in-queue derivation underflow.
        let drained = self.shared.drained.load(Ordering::Acquire);
        let dropped = self.shared.dropped.load(Ordering::Acquire);
        let enqueued = self.shared.enqueued.load(Ordering::Acquire);
        ProbeStats { enqueued, drained, dropped }
    }
}

/// Create a probe buffer with room for `capacity` records.
pub fn probe_buffer(capacity: usize) -> (ProbeEmitter, ProbeDrainer) {
    let (tx, rx) = spsc::ring(capacity);
    let shared = Arc::new(Shared::default());
    (
        ProbeEmitter { inner: Some(EmitterInner { tx, shared: Arc::clone(&shared) }) },
        ProbeDrainer { rx, shared },
    )
}

struct EmitterInner {
    tx: spsc::Producer<TelemetryRecord>,
    shared: Arc<Shared>,
}

/// Producer side. Owned by exactly one processing context.
pub struct ProbeEmitter {
    /// `None` is a disabled probe: every emit is a no-op.
    inner: Option<EmitterInner>,
}

impl ProbeEmitter {
    /// A probe that discards everything; used to run with collection off.
    pub fn disabled() -> Self {
        ProbeEmitter { inner: None }
    }

    pub fn is_enabled(&self) -> bool {
        self.inner.is_some()
    }

    /// Append one record. Never blocks; a full queue drops the record.
    #[inline]
    pub fn emit(&mut self, record: TelemetryRecord) -> EmitOutcome {
        let Some(inner) = self.inner.as_mut() else {
            return EmitOutcome::Disabled;
        };
        let outcome = match inner.tx.push(record) {
            Ok(()) => {
                inner.shared.enqueued.fetch_add(1, Ordering::Release);
                EmitOutcome::Accepted
            }
            Err(_) => {
                inner.shared.enqueued.fetch_add(1, Ordering::Release);
                inner.shared.dropped.fetch_add(1, Ordering::Release);
                EmitOutcome::Dropped
            }
        };
        // Wake a parked collector. The flag keeps the common case to one
        // relaxed load.
        if inner.shared.collector_parked.load(Ordering::Relaxed)
            && inner.shared.collector_parked.swap(false, Ordering::AcqRel)
        {
            if let Some(t) = inner.shared.collector_thread.lock().unwrap().as_ref() {
                t.unpark();
            }
        }
        outcome
    }

    pub fn stats_handle(&self) -> Option<ProbeStatsHandle> {
        self.inner
            .as_ref()
            .map(|i| ProbeStatsHandle { shared: Arc::clone(&i.shared) })
    }
}

/// Consumer side. Owned by exactly one collector context.
pub struct ProbeDrainer {
    rx: spsc::Consumer<TelemetryRecord>,
    shared: Arc<Shared>,
}

impl ProbeDrainer {
    /// Remove up to `max` records in emit order, appending them to `out`.
    pub fn drain_batch_into(&mut self, out: &mut Vec<TelemetryRecord>, max: usize) -> usize {
        let n = self.rx.pop_batch(out, max);
        if n > 0 {
            self.shared.drained.fetch_add(n as u64, Ordering::Release);
        }
        n
    }

    /// As [`drain_batch_into`](Self::drain_batch_into) but allocating.
    pub fn drain_batch(&mut self, max: usize) -> Vec<TelemetryRecord> {
        let mut out = Vec::new();
        self.drain_batch_into(&mut out, max);
        out
    }

    pub fn is_empty(&self) -> bool {
        self.rx.is_empty()
    }

    pub fn stats_handle(&self) -> ProbeStatsHandle {
        ProbeStatsHandle { shared: Arc::clone(&self.shared) }
    }

    /// Park the calling thread until records arrive or `timeout` passes.
    /// Returns immediately when the queue is non-empty.
    pub fn park_for_records(&self, timeout: Duration) {
        {
            let mut slot = self.shared.collector_thread.lock().unwrap();
            if slot.is_none() {
                *slot = Some(std::thread::current());
            }
        }
        self.shared.collector_parked.store(true, Ordering::Release);
        if !self.rx.is_empty() {
            self.shared.collector_parked.store(false, Ordering::Release);
            return;
        }
        std::thread::park_timeout(timeout);
        self.shared.collector_parked.store(false, Ordering::Release);
    }
}
