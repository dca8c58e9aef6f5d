//! Aggregation rules: how raw records become exposed statistics.
//!
//! Each rule matches records by event name and field values, then either
//! counts matches, sums a numeric field, or copies a field into a gauge
//! (last write wins within a batch).

use std::borrow::Cow;

use thiserror::Error;

use telemetry_core::{KpiId, KpiKind, KpiRegistry, Scalar, TelemetryRecord};

use crate::counters::CounterTable;

#[derive(Debug, Error, PartialEq)]
pub enum RuleError {
    #[error("rule targets unknown KPI {0:?}")]
    UnknownKpi(String),
    #[error("rule action needs a {expected:?} but {name} is a {actual:?}")]
    KindMismatch { name: String, expected: KpiKind, actual: KpiKind },
}

/// Predicate over records.
#[derive(Debug, Clone, Default)]
pub struct RecordMatch {
    /// Event name to match, or any event when `None`.
    pub event: Option<Cow<'static, str>>,
    /// Every listed field must be present and equal.
    pub field_equals: Vec<(Cow<'static, str>, Scalar)>,
}

impl RecordMatch {
    pub fn event(name: impl Into<Cow<'static, str>>) -> Self {
        RecordMatch { event: Some(name.into()), field_equals: Vec::new() }
    }

    pub fn any() -> Self {
        RecordMatch::default()
    }

    pub fn with_field(mut self, key: impl Into<Cow<'static, str>>, value: impl Into<Scalar>) -> Self {
        self.field_equals.push((key.into(), value.into()));
        self
    }

    pub fn matches(&self, rec: &TelemetryRecord) -> bool {
        if let Some(event) = &self.event {
            if rec.origin.event != *event {
                return false;
            }
        }
        self.field_equals
            .iter()
            .all(|(k, want)| rec.field(k) == Some(want))
    }
}

#[derive(Debug, Clone)]
pub enum RuleAction {
    /// Counter += 1 per matching record.
    CountMatches,
    /// Counter += the named numeric field of each matching record.
    SumField(Cow<'static, str>),
    /// Gauge = the named numeric field; the last matching record wins.
    SetGaugeToField(Cow<'static, str>),
}

#[derive(Debug, Clone)]
pub struct AggregationRule {
    pub kpi: KpiId,
    pub matcher: RecordMatch,
    pub action: RuleAction,
}

impl AggregationRule {
    /// Build a rule against the registry, checking the target exists and the
    /// action fits its kind.
    pub fn new(
        registry: &KpiRegistry,
        kpi_name: &str,
        matcher: RecordMatch,
        action: RuleAction,
    ) -> Result<Self, RuleError> {
        let kpi = registry
            .lookup(kpi_name)
            .ok_or_else(|| RuleError::UnknownKpi(kpi_name.to_string()))?;
        let actual = registry.descriptor(kpi).kind;
        let expected = match action {
            RuleAction::CountMatches | RuleAction::SumField(_) => KpiKind::Counter,
            RuleAction::SetGaugeToField(_) => KpiKind::Gauge,
        };
        if actual != expected {
            return Err(RuleError::KindMismatch {
                name: kpi_name.to_string(),
                expected,
                actual,
            });
        }
        Ok(AggregationRule { kpi, matcher, action })
    }
}

/// Fold a record batch into the table under the given rules.
pub fn update_counters(table: &CounterTable, records: &[TelemetryRecord], rules: &[AggregationRule]) {
    if records.is_empty() {
        return;
    }
    for rule in rules {
        match &rule.action {
            RuleAction::CountMatches => {
                let n = records.iter().filter(|r| rule.matcher.matches(r)).count();
                if n > 0 {
                    table.add(rule.kpi, n as f64);
                }
            }
            RuleAction::SumField(key) => {
                let sum: f64 = records
                    .iter()
                    .filter(|r| rule.matcher.matches(r))
                    .filter_map(|r| r.field(key).and_then(Scalar::as_f64))
                    .sum();
                if sum != 0.0 {
                    table.add(rule.kpi, sum);
                }
            }
            RuleAction::SetGaugeToField(key) => {
                if let Some(v) = records
                    .iter()
                    .rev()
                    .find(|r| rule.matcher.matches(r))
                    .and_then(|r| r.field(key))
                    .and_then(Scalar::as_f64)
                {
                    table.set(rule.kpi, v);
                }
            }
        }
    }
}
