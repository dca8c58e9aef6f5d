//! KPI registry: the metric taxonomy every component registers against.
//!
//! The full manifest (one row per metric, `name,source,function,kind`) ships
//! in `data/kpi_manifest.csv` and is embedded here. The registry is populated
//! once at startup and read-only afterwards.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Full KPI manifest as shipped under `data/kpi_manifest.csv`.
pub const FULL_MANIFEST_CSV: &str = include_str!("../../../data/kpi_manifest.csv");

/// Where a metric is produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KpiSource {
    Amf,
    Smf,
    Upf,
    Pdcp,
    Rlc,
    Mac,
    Phy,
    Kube,
    Docker,
    Kernel,
}

impl KpiSource {
    pub const ALL: [KpiSource; 10] = [
        KpiSource::Amf,
        KpiSource::Smf,
        KpiSource::Upf,
        KpiSource::Pdcp,
        KpiSource::Rlc,
        KpiSource::Mac,
        KpiSource::Phy,
        KpiSource::Kube,
        KpiSource::Docker,
        KpiSource::Kernel,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            KpiSource::Amf => "AMF",
            KpiSource::Smf => "SMF",
            KpiSource::Upf => "UPF",
            KpiSource::Pdcp => "PDCP",
            KpiSource::Rlc => "RLC",
            KpiSource::Mac => "MAC",
            KpiSource::Phy => "PHY",
            KpiSource::Kube => "KUBE",
            KpiSource::Docker => "DOCKER",
            KpiSource::Kernel => "KERNEL",
        }
    }
}

impl fmt::Display for KpiSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for KpiSource {
    type Err = RegistryError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "AMF" => Ok(KpiSource::Amf),
            "SMF" => Ok(KpiSource::Smf),
            "UPF" => Ok(KpiSource::Upf),
            "PDCP" => Ok(KpiSource::Pdcp),
            "RLC" => Ok(KpiSource::Rlc),
            "MAC" => Ok(KpiSource::Mac),
            "PHY" => Ok(KpiSource::Phy),
            "KUBE" => Ok(KpiSource::Kube),
            "DOCKER" => Ok(KpiSource::Docker),
            "KERNEL" => Ok(KpiSource::Kernel),
            other => Err(RegistryError::UnknownSource(other.to_string())),
        }
    }
}

/// Metric kind. Counters are monotonically non-decreasing within one process
/// lifetime; gauges move freely.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KpiKind {
    Counter,
    Gauge,
}

impl KpiKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            KpiKind::Counter => "counter",
            KpiKind::Gauge => "gauge",
        }
    }
}

impl FromStr for KpiKind {
    type Err = RegistryError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "counter" => Ok(KpiKind::Counter),
            "gauge" => Ok(KpiKind::Gauge),
            other => Err(RegistryError::UnknownKind(other.to_string())),
        }
    }
}

/// One registry entry, mirroring one manifest row.
#[derive(Debug, Clone, PartialEq)]
pub struct KpiDescriptor {
    pub name: String,
    pub source: KpiSource,
    /// Function category, e.g. "Registration Management".
    pub function: String,
    pub kind: KpiKind,
    pub help: String,
}

impl KpiDescriptor {
    pub fn new(
        name: impl Into<String>,
        source: KpiSource,
        function: impl Into<String>,
        kind: KpiKind,
    ) -> Self {
        let name = name.into();
        let function = function.into();
        let help = format!("{} {} ({})", source.as_str(), function, name);
        KpiDescriptor { name, source, function, kind, help }
    }
}

/// Stable handle to a registered KPI; indexes the registry's entry table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct KpiId(pub u32);

#[derive(Debug, Error, PartialEq)]
pub enum RegistryError {
    #[error("duplicate KPI name: {0}")]
    DuplicateName(String),
    #[error("malformed KPI name: {0:?}")]
    MalformedName(String),
    #[error("unknown KPI source: {0:?}")]
    UnknownSource(String),
    #[error("unknown KPI kind: {0:?}")]
    UnknownKind(String),
    #[error("manifest line {line}: {reason}")]
    ManifestLine { line: usize, reason: String },
    #[error("unknown KPI: {0}")]
    UnknownKpi(String),
}

/// Metric names start with a lowercase letter; later characters may include
/// uppercase to accommodate taxonomy names like `phy_rx_total_gain_dB`.
pub fn name_is_well_formed(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_lowercase() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Write-once metric taxonomy. Populate during startup, then share read-only.
#[derive(Debug, Default)]
pub struct KpiRegistry {
    entries: Vec<KpiDescriptor>,
    by_name: HashMap<String, KpiId>,
}

impl KpiRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registry populated with the full embedded manifest.
    pub fn with_full_manifest() -> Self {
        Self::from_manifest_csv(FULL_MANIFEST_CSV).expect("embedded manifest is valid")
    }

    pub fn register(&mut self, desc: KpiDescriptor) -> Result<KpiId, RegistryError> {
        if !name_is_well_formed(&desc.name) {
            return Err(RegistryError::MalformedName(desc.name));
        }
        if self.by_name.contains_key(&desc.name) {
            return Err(RegistryError::DuplicateName(desc.name));
        }
        let id = KpiId(self.entries.len() as u32);
        self.by_name.insert(desc.name.clone(), id);
        self.entries.push(desc);
        Ok(id)
    }

    pub fn lookup(&self, name: &str) -> Option<KpiId> {
        self.by_name.get(name).copied()
    }

    pub fn require(&self, name: &str) -> Result<KpiId, RegistryError> {
        self.lookup(name)
            .ok_or_else(|| RegistryError::UnknownKpi(name.to_string()))
    }

    pub fn descriptor(&self, id: KpiId) -> &KpiDescriptor {
        &self.entries[id.0 as usize]
    }

    pub fn get(&self, name: &str) -> Option<&KpiDescriptor> {
        self.lookup(name).map(|id| self.descriptor(id))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (KpiId, &KpiDescriptor)> {
        self.entries
            .iter()
            .enumerate()
            .map(|(i, d)| (KpiId(i as u32), d))
    }

    /// Entry count per (source, function) pair, for manifest completeness
    /// checks.
    pub fn counts_by_function(&self) -> HashMap<(KpiSource, String), usize> {
        let mut counts = HashMap::new();
        for d in &self.entries {
            *counts.entry((d.source, d.function.clone())).or_insert(0) += 1;
        }
        counts
    }

    /// Parse a manifest in the `name,source,function,kind` CSV layout.
    /// Lines starting with `#` are comments.
    pub fn from_manifest_csv(text: &str) -> Result<Self, RegistryError> {
        let mut reg = KpiRegistry::new();
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split(',');
            let (name, source, function, kind) = match (
                parts.next(),
                parts.next(),
                parts.next(),
                parts.next(),
                parts.next(),
            ) {
                (Some(n), Some(s), Some(f), Some(k), None) => (n, s, f, k),
                _ => {
                    return Err(RegistryError::ManifestLine {
                        line: idx + 1,
                        reason: "expected 4 comma-separated fields".into(),
                    })
                }
            };
            let desc = KpiDescriptor::new(name, source.parse()?, function, kind.parse()?);
            reg.register(desc).map_err(|e| RegistryError::ManifestLine {
                line: idx + 1,
                reason: e.to_string(),
            })?;
        }
        Ok(reg)
    }
}
