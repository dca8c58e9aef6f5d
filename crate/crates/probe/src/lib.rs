//! Inline data probes.
//!
//! The processing path appends records to a bounded SPSC buffer as they are
//! generated; an independent collector thread drains the buffer, writes JSON
//! record files, and maintains the counter tables read by the exposition
//! endpoint. The producer side never blocks and never waits on the
//! collector.

pub mod buffer;
pub mod collector;
pub mod counters;
pub mod rules;
pub mod spsc;

pub use buffer::{probe_buffer, EmitOutcome, ProbeDrainer, ProbeEmitter, ProbeStats, ProbeStatsHandle};
pub use collector::{
    spawn_collector, CollectorHandle, CollectorSummary, CounterContext, FlushObserver,
    Granularity, ProbeConfig,
};
pub use counters::CounterTable;
pub use rules::{update_counters, AggregationRule, RecordMatch, RuleAction, RuleError};

/// Metric names under which every probe exports its own stats.
pub const PROBE_ENQUEUED_METRIC: &str = "probe_records_enqueued_total";
pub const PROBE_DROPPED_METRIC: &str = "probe_records_dropped_total";
