//! Telemetry records and their canonical JSON encoding.
//!
//! A record is one timestamped key-value event produced while processing one
//! request (core network) or one layer pass (radio stack). Each record
//! serializes to exactly one JSON object with a fixed envelope
//! (`ts`, `ne`, `component`, `event`) followed by the record's fields in
//! order.

use std::borrow::Cow;
use std::fmt::Write as _;
use std::sync::Arc;

use thiserror::Error;

use crate::registry::KpiSource;

/// Field keys are almost always compile-time constants in the simulators;
/// parsed records own their keys.
pub type FieldKey = Cow<'static, str>;

/// Scalar field value: the smallest set covering the taxonomy's examples.
#[derive(Debug, Clone, PartialEq)]
pub enum Scalar {
    Int(i64),
    Float(f64),
    Str(String),
    Bool(bool),
}

impl Scalar {
    pub fn as_i64(&self) -> Option<i64> {
        match self {
            Scalar::Int(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Scalar::Int(v) => Some(*v as f64),
            Scalar::Float(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Scalar::Str(s) => Some(s),
            _ => None,
        }
    }

    pub fn is_numeric(&self) -> bool {
        matches!(self, Scalar::Int(_) | Scalar::Float(_))
    }
}

impl From<i64> for Scalar {
    fn from(v: i64) -> Self {
        Scalar::Int(v)
    }
}

impl From<u64> for Scalar {
    fn from(v: u64) -> Self {
        Scalar::Int(v as i64)
    }
}

impl From<f64> for Scalar {
    fn from(v: f64) -> Self {
        Scalar::Float(v)
    }
}

impl From<&str> for Scalar {
    fn from(v: &str) -> Self {
        Scalar::Str(v.to_string())
    }
}

impl From<String> for Scalar {
    fn from(v: String) -> Self {
        Scalar::Str(v)
    }
}

impl From<bool> for Scalar {
    fn from(v: bool) -> Self {
        Scalar::Bool(v)
    }
}

/// Which network element and event produced a record.
#[derive(Debug, Clone, PartialEq)]
pub struct RecordOrigin {
    /// Network element id, e.g. "amf-0" or "bs-1". Shared, since every record
    /// from one probe carries the same id.
    pub ne_id: Arc<str>,
    pub component: KpiSource,
    pub event: Cow<'static, str>,
}

impl RecordOrigin {
    pub fn new(ne_id: impl Into<Arc<str>>, component: KpiSource, event: impl Into<Cow<'static, str>>) -> Self {
        RecordOrigin { ne_id: ne_id.into(), component, event: event.into() }
    }
}

/// One telemetry event. `timestamp_ns` is epoch nanoseconds from
/// [`crate::clock::now_ns`]; field keys must be unique and must not collide
/// with the envelope keys.
#[derive(Debug, Clone, PartialEq)]
pub struct TelemetryRecord {
    pub timestamp_ns: u64,
    pub origin: RecordOrigin,
    pub fields: Vec<(FieldKey, Scalar)>,
}

const ENVELOPE_KEYS: [&str; 4] = ["ts", "ne", "component", "event"];

impl TelemetryRecord {
    pub fn new(timestamp_ns: u64, origin: RecordOrigin, fields: Vec<(FieldKey, Scalar)>) -> Self {
        debug_assert!(timestamp_ns > 0);
        debug_assert!(fields
            .iter()
            .all(|(k, _)| !ENVELOPE_KEYS.contains(&k.as_ref())));
        TelemetryRecord { timestamp_ns, origin, fields }
    }

    pub fn field(&self, key: &str) -> Option<&Scalar> {
        self.fields.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }

    /// Drop non-numeric fields, the reduced form used for real-time layers
    /// where only key signal-processing data is kept.
    pub fn retain_numeric_fields(&mut self) {
        self.fields.retain(|(_, v)| v.is_numeric());
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum RecordError {
    #[error("non-finite float in field {0:?}")]
    NonFiniteFloat(String),
    #[error("record field key {0:?} collides with an envelope key")]
    ReservedFieldKey(String),
    #[error("malformed JSON: {0}")]
    MalformedJson(String),
    #[error("missing envelope field {0:?}")]
    MissingEnvelopeField(&'static str),
    #[error("envelope field {0:?} has the wrong type")]
    BadEnvelopeField(&'static str),
    #[error("field {0:?} is not a scalar")]
    NonScalarField(String),
}

fn push_json_str(out: &mut String, s: &str) {
    if s.bytes().all(|b| (0x20..0x7f).contains(&b) && b != b'"' && b != b'\\') {
        out.push('"');
        out.push_str(s);
        out.push('"');
    } else {
        // Rare path: delegate escaping.
        out.push_str(&serde_json::to_string(s).expect("string serialization"));
    }
}

fn push_scalar(out: &mut String, key: &str, v: &Scalar) -> Result<(), RecordError> {
    match v {
        Scalar::Int(i) => {
            write!(out, "{i}").unwrap();
        }
        Scalar::Float(f) => {
            if !f.is_finite() {
                return Err(RecordError::NonFiniteFloat(key.to_string()));
            }
            // serde_json's float syntax (always round-trips, keeps the
            // int/float distinction via a trailing ".0").
            out.push_str(&serde_json::to_string(f).expect("finite float"));
        }
        Scalar::Str(s) => push_json_str(out, s),
        Scalar::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
    }
    Ok(())
}

/// Serialize one record to its canonical single-object JSON form.
pub fn serialize_record(rec: &TelemetryRecord) -> Result<String, RecordError> {
    let mut out = String::with_capacity(96 + rec.fields.len() * 24);
    serialize_record_into(rec, &mut out)?;
    Ok(out)
}

/// As [`serialize_record`], appending to a caller-owned buffer.
pub fn serialize_record_into(rec: &TelemetryRecord, out: &mut String) -> Result<(), RecordError> {
    out.push_str("{\"ts\":");
    write!(out, "{}", rec.timestamp_ns).unwrap();
    out.push_str(",\"ne\":");
    push_json_str(out, &rec.origin.ne_id);
    out.push_str(",\"component\":\"");
    out.push_str(rec.origin.component.as_str());
    out.push_str("\",\"event\":");
    push_json_str(out, &rec.origin.event);
    for (key, value) in &rec.fields {
        if ENVELOPE_KEYS.contains(&key.as_ref()) {
            return Err(RecordError::ReservedFieldKey(key.to_string()));
        }
        out.push(',');
        push_json_str(out, key);
        out.push(':');
        push_scalar(out, key, value)?;
    }
    out.push('}');
    Ok(())
}

fn scalar_from_value(key: &str, v: serde_json::Value) -> Result<Scalar, RecordError> {
    match v {
        serde_json::Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok(Scalar::Int(i))
            } else if let Some(f) = n.as_f64() {
                Ok(Scalar::Float(f))
            } else {
                Err(RecordError::NonScalarField(key.to_string()))
            }
        }
        serde_json::Value::String(s) => Ok(Scalar::Str(s)),
        serde_json::Value::Bool(b) => Ok(Scalar::Bool(b)),
        _ => Err(RecordError::NonScalarField(key.to_string())),
    }
}

/// Parse one canonical JSON object back into a record. Inverse of
/// [`serialize_record`] for records satisfying the type invariants.
pub fn parse_record(text: &str) -> Result<TelemetryRecord, RecordError> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| RecordError::MalformedJson(e.to_string()))?;
    record_from_value(value)
}

pub(crate) fn record_from_value(value: serde_json::Value) -> Result<TelemetryRecord, RecordError> {
    let serde_json::Value::Object(mut map) = value else {
        return Err(RecordError::MalformedJson("expected a JSON object".into()));
    };
    let ts = map
        .shift_remove("ts")
        .ok_or(RecordError::MissingEnvelopeField("ts"))?
        .as_u64()
        .ok_or(RecordError::BadEnvelopeField("ts"))?;
    let ne = match map.shift_remove("ne").ok_or(RecordError::MissingEnvelopeField("ne"))? {
        serde_json::Value::String(s) => s,
        _ => return Err(RecordError::BadEnvelopeField("ne")),
    };
    let component = match map
        .shift_remove("component")
        .ok_or(RecordError::MissingEnvelopeField("component"))?
    {
        serde_json::Value::String(s) => s
            .parse::<KpiSource>()
            .map_err(|_| RecordError::BadEnvelopeField("component"))?,
        _ => return Err(RecordError::BadEnvelopeField("component")),
    };
    let event = match map
        .shift_remove("event")
        .ok_or(RecordError::MissingEnvelopeField("event"))?
    {
        serde_json::Value::String(s) => s,
        _ => return Err(RecordError::BadEnvelopeField("event")),
    };
    let mut fields = Vec::with_capacity(map.len());
    for (key, v) in map {
        let scalar = scalar_from_value(&key, v)?;
        fields.push((Cow::Owned(key), scalar));
    }
    Ok(TelemetryRecord {
        timestamp_ns: ts,
        origin: RecordOrigin::new(ne, component, event),
        fields,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> TelemetryRecord {
        TelemetryRecord::new(
            1,
            RecordOrigin::new("amf-0", KpiSource::Amf, "registration"),
            vec![(Cow::Borrowed("result"), Scalar::from("success"))],
        )
    }

    #[test]
    fn canonical_form() {
        let json = serialize_record(&sample()).unwrap();
        assert_eq!(
            json,
            r#"{"ts":1,"ne":"amf-0","component":"AMF","event":"registration","result":"success"}"#
        );
    }

    #[test]
    fn empty_fields_has_only_envelope() {
        let rec = TelemetryRecord::new(
            42,
            RecordOrigin::new("upf-0", KpiSource::Upf, "forward"),
            vec![],
        );
        let json = serialize_record(&rec).unwrap();
        assert_eq!(json, r#"{"ts":42,"ne":"upf-0","component":"UPF","event":"forward"}"#);
        assert_eq!(parse_record(&json).unwrap(), rec);
    }

    #[test]
    fn parse_inverts_serialize() {
        let rec = sample();
        assert_eq!(parse_record(&serialize_record(&rec).unwrap()).unwrap(), rec);
    }

    #[test]
    fn non_finite_rejected() {
        let mut rec = sample();
        rec.fields.push((Cow::Borrowed("x"), Scalar::Float(f64::NAN)));
        assert_eq!(
            serialize_record(&rec),
            Err(RecordError::NonFiniteFloat("x".into()))
        );
        rec.fields.pop();
        rec.fields.push((Cow::Borrowed("y"), Scalar::Float(f64::INFINITY)));
        assert!(matches!(
            serialize_record(&rec),
            Err(RecordError::NonFiniteFloat(_))
        ));
    }

    #[test]
    fn reserved_key_rejected() {
        let mut rec = sample();
        rec.fields = vec![(Cow::Borrowed("ts"), Scalar::Int(5))];
        assert_eq!(
            serialize_record(&rec),
            Err(RecordError::ReservedFieldKey("ts".into()))
        );
    }

    #[test]
    fn empty_object_missing_envelope() {
        assert_eq!(
            parse_record("{}"),
            Err(RecordError::MissingEnvelopeField("ts"))
        );
    }

    #[test]
    fn truncated_text_malformed() {
        let json = serialize_record(&sample()).unwrap();
        assert!(matches!(
            parse_record(&json[..json.len() - 2]),
            Err(RecordError::MalformedJson(_))
        ));
    }

    #[test]
    fn int_float_distinction_survives() {
        let rec = TelemetryRecord::new(
            7,
            RecordOrigin::new("bs-0", KpiSource::Phy, "pass"),
            vec![
                (Cow::Borrowed("i"), Scalar::Int(5)),
                (Cow::Borrowed("f"), Scalar::Float(5.0)),
                (Cow::Borrowed("neg"), Scalar::Int(-3)),
                (Cow::Borrowed("frac"), Scalar::Float(0.1)),
            ],
        );
        let parsed = parse_record(&serialize_record(&rec).unwrap()).unwrap();
        assert_eq!(parsed, rec);
    }

    #[test]
    fn string_escaping() {
        let rec = TelemetryRecord::new(
            9,
            RecordOrigin::new("amf-0", KpiSource::Amf, "odd \"event\"\n"),
            vec![(Cow::Borrowed("msg"), Scalar::from("tab\there, quote \" done"))],
        );
        let parsed = parse_record(&serialize_record(&rec).unwrap()).unwrap();
        assert_eq!(parsed, rec);
    }

    #[test]
    fn key_data_only_drops_strings() {
        let mut rec = sample();
        rec.fields.push((Cow::Borrowed("snr"), Scalar::Float(12.5)));
        rec.retain_numeric_fields();
        assert_eq!(rec.fields.len(), 1);
        assert_eq!(rec.fields[0].0, "snr");
    }
}
