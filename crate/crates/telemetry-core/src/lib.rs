//! Shared domain types for the testbed's telemetry pipeline.
//!
//! This crate holds what every other component agrees on: the KPI registry
//! (the full metric taxonomy, loaded from `data/kpi_manifest.csv`), the
//! telemetry record and its canonical JSON encoding, the on-disk record-file
//! layout, and the clock used to timestamp everything.

pub mod clock;
pub mod record;
pub mod recordfile;
pub mod registry;

pub use record::{
    parse_record, serialize_record, FieldKey, RecordError, RecordOrigin, Scalar, TelemetryRecord,
};
pub use recordfile::{
    append_array, read_record_arrays, read_record_arrays_strict, read_records_flat,
    RecordFileError, RecordFileWriter,
};
pub use registry::{
    KpiDescriptor, KpiId, KpiKind, KpiRegistry, KpiSource, RegistryError, FULL_MANIFEST_CSV,
};
