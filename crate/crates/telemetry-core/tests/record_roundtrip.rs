//! Round-trip property: parse(serialize(r)) == r for arbitrary valid records.

use std::borrow::Cow;

use proptest::collection::vec;
use proptest::prelude::*;
use telemetry_core::{parse_record, serialize_record, RecordOrigin, Scalar, TelemetryRecord};
use telemetry_core::{KpiSource, read_record_arrays, append_array};

fn arb_source() -> impl Strategy<Value = KpiSource> {
    prop::sample::select(KpiSource::ALL.to_vec())
}

fn arb_scalar() -> impl Strategy<Value = Scalar> {
    prop_oneof![
        any::<i64>().prop_map(Scalar::Int),
        // Finite floats only; NaN/Inf are rejected by construction.
        any::<f64>()
            .prop_filter("finite", |f| f.is_finite())
            .prop_map(Scalar::Float),
        ".{0,24}".prop_map(Scalar::Str),
        any::<bool>().prop_map(Scalar::Bool),
    ]
}

prop_compose! {
    fn arb_record()(
        ts in 1u64..=u64::MAX / 2,
        ne in "[a-z]{2,6}-[0-9]",
        source in arb_source(),
        event in "[a-z_]{1,16}",
        keys in prop::collection::hash_set("[a-df-r][a-z0-9_]{0,10}", 0..8),
        values in vec(arb_scalar(), 8),
    ) -> TelemetryRecord {
        let fields = keys
            .into_iter()
            .zip(values)
            .map(|(k, v)| (Cow::Owned(k) as Cow<'static, str>, v))
            .collect();
        TelemetryRecord::new(ts, RecordOrigin::new(ne, source, event), fields)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn parse_inverts_serialize(rec in arb_record()) {
        let json = serialize_record(&rec).unwrap();
        let parsed = parse_record(&json).unwrap();
        prop_assert_eq!(parsed, rec);
    }
}

proptest! {
    #[test]
    fn file_round_trip(batches in vec(vec(arb_record(), 1..4), 1..5)) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("records.json");
        for batch in &batches {
            append_array(&path, batch).unwrap();
        }
        let read = read_record_arrays(&path).unwrap();
        prop_assert_eq!(read, batches);
    }
}
