//! The collector thread: the independent half of the parallel architecture.
//!
//! It drains the probe buffer, writes each batch as one JSON array to the
//! probe's record file, folds the batch into the counter table, and parks
//! until more records arrive. A record is durable at most `flush_interval`
//! after its emit (normally much sooner, since emit wakes a parked
//! collector).

use std::path::PathBuf;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::thread::JoinHandle;
use std::time::Duration;

use telemetry_core::{RecordFileWriter, TelemetryRecord};

use crate::buffer::ProbeDrainer;
use crate::counters::CounterTable;
use crate::rules::{update_counters, AggregationRule};

/// How much of each record the collector keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Granularity {
    /// Everything the processing path recorded.
    #[default]
    FullMetadata,
    /// Only numeric signal-processing fields; strings are dropped. Used for
    /// real-time layers where full metadata is too expensive.
    KeyDataOnly,
}

/// Probe configuration shared by producer and collector sides.
#[derive(Debug, Clone)]
pub struct ProbeConfig {
    /// Buffer capacity in records.
    pub capacity: usize,
    /// Upper bound between a record's emit and its durability.
    pub flush_interval: Duration,
    /// Record file this probe appends to.
    pub sink_path: PathBuf,
    pub granularity: Granularity,
}

impl ProbeConfig {
    pub fn new(sink_path: impl Into<PathBuf>) -> Self {
        ProbeConfig {
            capacity: 65_536,
            flush_interval: Duration::from_millis(100),
            sink_path: sink_path.into(),
            granularity: Granularity::FullMetadata,
        }
    }

    pub fn with_capacity(mut self, capacity: usize) -> Self {
        assert!(capacity >= 1);
        self.capacity = capacity;
        self
    }

    pub fn with_flush_interval(mut self, interval: Duration) -> Self {
        assert!(interval > Duration::ZERO);
        self.flush_interval = interval;
        self
    }

    pub fn with_granularity(mut self, granularity: Granularity) -> Self {
        self.granularity = granularity;
        self
    }
}

/// Counter table plus the rules that drive it.
#[derive(Clone)]
pub struct CounterContext {
    pub table: Arc<CounterTable>,
    pub rules: Arc<Vec<AggregationRule>>,
}

/// Callback invoked after a batch becomes durable; used by the latency
/// harness to timestamp storage.
pub trait FlushObserver: Send + Sync {
    fn on_durable(&self, records: &[TelemetryRecord], t_durable_ns: u64);
}

#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct CollectorSummary {
    pub flushed_records: u64,
    pub flushed_batches: u64,
    pub io_errors: u64,
}

pub struct CollectorHandle {
    shutdown: Arc<AtomicBool>,
    thread: JoinHandle<CollectorSummary>,
}

impl CollectorHandle {
    /// Signal shutdown, wait for the remaining records to drain and flush,
    /// and return the run summary.
    pub fn shutdown(self) -> CollectorSummary {
        self.shutdown.store(true, Ordering::Release);
        self.thread.thread().unpark();
        self.thread.join().expect("collector panicked")
    }
}

const MAX_BATCH: usize = 8_192;

/// Start the collection thread for one probe.
pub fn spawn_collector(
    drainer: ProbeDrainer,
    config: ProbeConfig,
    counters: Option<CounterContext>,
    observer: Option<Arc<dyn FlushObserver>>,
) -> CollectorHandle {
    let shutdown = Arc::new(AtomicBool::new(false));
    let flag = Arc::clone(&shutdown);
    let thread = std::thread::Builder::new()
        .name(format!(
            "collector:{}",
            config.sink_path.file_stem().and_then(|s| s.to_str()).unwrap_or("probe")
        ))
        .spawn(move || run(drainer, config, counters, observer, flag))
        .expect("spawn collector thread");
    CollectorHandle { shutdown, thread }
}

fn run(
    mut drainer: ProbeDrainer,
    config: ProbeConfig,
    counters: Option<CounterContext>,
    observer: Option<Arc<dyn FlushObserver>>,
    shutdown: Arc<AtomicBool>,
) -> CollectorSummary {
    let mut summary = CollectorSummary::default();
    // The file is opened on first use so idle probes leave no trace.
    let mut writer: Option<RecordFileWriter> = None;
    // Records drained but not yet durable; retained across IO errors.
    let mut pending: Vec<TelemetryRecord> = Vec::new();

    loop {
        let before = pending.len();
        drainer.drain_batch_into(&mut pending, MAX_BATCH - before.min(MAX_BATCH));
        if config.granularity == Granularity::KeyDataOnly {
            for rec in &mut pending[before..] {
                rec.retain_numeric_fields();
            }
        }

        if pending.is_empty() {
            if shutdown.load(Ordering::Acquire) && drainer.is_empty() {
                break;
            }
            drainer.park_for_records(config.flush_interval);
            continue;
        }

        let flushed = (|| -> Result<(), telemetry_core::RecordFileError> {
            if writer.is_none() {
                writer = Some(RecordFileWriter::open(&config.sink_path)?);
            }
            writer.as_mut().unwrap().append_array(&pending)?;
            Ok(())
        })();

        match flushed {
            Ok(()) => {
                let t_durable = telemetry_core::clock::now_ns();
                if let Some(ctx) = &counters {
                    update_counters(&ctx.table, &pending, &ctx.rules);
                }
                if let Some(obs) = &observer {
                    obs.on_durable(&pending, t_durable);
                }
                summary.flushed_records += pending.len() as u64;
                summary.flushed_batches += 1;
                pending.clear();
            }
            Err(e) => {
                // Keep the batch and retry next interval.
                summary.io_errors += 1;
                log::warn!("probe flush failed, retrying: {e}");
                writer = None;
                if shutdown.load(Ordering::Acquire) && summary.io_errors > 100 {
                    // Shutting down against a persistently broken sink;
                    // abandon rather than spin forever.
                    break;
                }
                std::thread::park_timeout(config.flush_interval);
            }
        }
    }
    summary
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::buffer::probe_buffer;
    use std::borrow::Cow;
    use telemetry_core::{read_record_arrays, KpiSource, RecordOrigin, Scalar};

    fn rec(n: i64) -> TelemetryRecord {
        TelemetryRecord::new(
            telemetry_core::clock::now_ns(),
            RecordOrigin::new("ne-0", KpiSource::Upf, "ev"),
            vec![
                (Cow::Borrowed("n"), Scalar::Int(n)),
                (Cow::Borrowed("tag"), Scalar::from("text")),
            ],
        )
    }

    #[test]
    fn collects_all_emitted_records() {
        let dir = tempfile::tempdir().unwrap();
        let sink = dir.path().join("ne-0.json");
        let (mut tx, rx) = probe_buffer(1024);
        let handle = spawn_collector(rx, ProbeConfig::new(&sink), None, None);
        for i in 0..100 {
            tx.emit(rec(i));
        }
        let summary = handle.shutdown();
        assert_eq!(summary.flushed_records, 100);
        let total: usize = read_record_arrays(&sink).unwrap().iter().map(Vec::len).sum();
        assert_eq!(total, 100);
    }

    #[test]
    fn idle_collector_writes_nothing() {
        let dir = tempfile::tempdir().unwrap();
        let sink = dir.path().join("idle.json");
        let (_tx, rx) = probe_buffer(16);
        let config = ProbeConfig::new(&sink).with_flush_interval(Duration::from_millis(5));
        let handle = spawn_collector(rx, config, None, None);
        std::thread::sleep(Duration::from_millis(60)); // ~10 intervals
        let summary = handle.shutdown();
        assert_eq!(summary.flushed_batches, 0);
        assert!(!sink.exists(), "no traffic must leave no file");
    }

    #[test]
    fn shutdown_drains_undrained_records() {
        let dir = tempfile::tempdir().unwrap();
        let sink = dir.path().join("ne-0.json");
        let (mut tx, rx) = probe_buffer(1024);
        // Long interval: records sit undrained unless shutdown drains them.
        let config = ProbeConfig::new(&sink).with_flush_interval(Duration::from_secs(3600));
        let handle = spawn_collector(rx, config, None, None);
        std::thread::sleep(Duration::from_millis(20)); // let the collector park
        for i in 0..7 {
            tx.emit(rec(i));
        }
        let summary = handle.shutdown();
        assert_eq!(summary.flushed_records, 7);
        let total: usize = read_record_arrays(&sink).unwrap().iter().map(Vec::len).sum();
        assert_eq!(total, 7);
    }

    #[test]
    fn key_data_only_strips_strings() {
        let dir = tempfile::tempdir().unwrap();
        let sink = dir.path().join("phy.json");
        let (mut tx, rx) = probe_buffer(64);
        let config = ProbeConfig::new(&sink).with_granularity(Granularity::KeyDataOnly);
        let handle = spawn_collector(rx, config, None, None);
        tx.emit(rec(5));
        handle.shutdown();
        let records = telemetry_core::read_records_flat(&sink).unwrap();
        assert_eq!(records.len(), 1);
        assert!(records[0].field("n").is_some());
        assert!(records[0].field("tag").is_none(), "strings must be dropped");
    }

    #[test]
    fn io_error_retries_without_losing_records() {
        let dir = tempfile::tempdir().unwrap();
        let blocked = dir.path().join("missing").join("ne-0.json");
        // Parent directory is created by the writer, so to force an IO error
        // the path itself must be unusable: make `missing` a *file*.
        std::fs::write(dir.path().join("missing"), b"in the way").unwrap();

        let (mut tx, rx) = probe_buffer(64);
        let config = ProbeConfig::new(&blocked).with_flush_interval(Duration::from_millis(5));
        let handle = spawn_collector(rx, config, None, None);
        tx.emit(rec(1));
        std::thread::sleep(Duration::from_millis(40));
        // Unblock the sink; the retried flush must deliver the record.
        std::fs::remove_file(dir.path().join("missing")).unwrap();
        std::thread::sleep(Duration::from_millis(60));
        let summary = handle.shutdown();
        assert!(summary.io_errors >= 1);
        assert_eq!(summary.flushed_records, 1);
        let records = telemetry_core::read_records_flat(&blocked).unwrap();
        assert_eq!(records.len(), 1);
    }

    #[test]
    fn emit_to_durable_latency_is_bounded() {
        struct Capture(std::sync::Mutex<Vec<(u64, u64)>>);
        impl FlushObserver for Capture {
            fn on_durable(&self, records: &[TelemetryRecord], t: u64) {
                let mut g = self.0.lock().unwrap();
                for r in records {
                    g.push((r.timestamp_ns, t));
                }
            }
        }
        let dir = tempfile::tempdir().unwrap();
        let sink = dir.path().join("lat.json");
        let (mut tx, rx) = probe_buffer(64);
        let observer = Arc::new(Capture(std::sync::Mutex::new(Vec::new())));
        let config = ProbeConfig::new(&sink).with_flush_interval(Duration::from_millis(100));
        let handle = spawn_collector(rx, config, None, Some(observer.clone()));
        std::thread::sleep(Duration::from_millis(10));
        tx.emit(rec(1));
        std::thread::sleep(Duration::from_millis(150));
        handle.shutdown();
        let seen = observer.0.lock().unwrap();
        assert_eq!(seen.len(), 1);
        let (emit_ns, durable_ns) = seen[0];
        // Bound: flush_interval plus generous scheduling slack.
        assert!(durable_ns - emit_ns < 200_000_000, "latency {}ns", durable_ns - emit_ns);
    }
}
