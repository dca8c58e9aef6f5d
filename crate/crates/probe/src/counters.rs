//! Counter tables: the statistical face of the raw records.
//!
//! The collector folds drained records into one table per network element;
//! the exposition endpoint reads it concurrently. Values are f64 bits in
//! atomics, so readers see internally consistent values per counter without
//! any cross-counter snapshot.

use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};

use telemetry_core::{KpiId, KpiKind, KpiRegistry};

struct Slot {
    bits: AtomicU64,
    active: AtomicBool,
}

/// Per-NE value table indexed by [`KpiId`].
pub struct CounterTable {
    slots: Vec<Slot>,
    last_update_ns: AtomicU64,
}

impl CounterTable {
    /// One slot per registry entry, all starting inactive at 0.
    pub fn new(registry: &KpiRegistry) -> Self {
        let slots = (0..registry.len())
            .map(|_| Slot { bits: AtomicU64::new(0f64.to_bits()), active: AtomicBool::new(false) })
            .collect();
        CounterTable { slots, last_update_ns: AtomicU64::new(0) }
    }

    /// Mark a KPI as driven by this NE so it renders even while still 0.
    pub fn activate(&self, id: KpiId) {
        self.slots[id.0 as usize].active.store(true, Ordering::Release);
    }

    /// Counter increment. `delta` must be non-negative; counters never
    /// decrease within a process lifetime.
    pub fn add(&self, id: KpiId, delta: f64) {
        debug_assert!(delta >= 0.0, "counter decrement");
        let slot = &self.slots[id.0 as usize];
        let mut cur = slot.bits.load(Ordering::Relaxed);
        loop {
            let next = (f64::from_bits(cur) + delta).to_bits();
            match slot.bits.compare_exchange_weak(cur, next, Ordering::AcqRel, Ordering::Relaxed) {
                Ok(_) => break,
                Err(actual) => cur = actual,
            }
        }
        slot.active.store(true, Ordering::Release);
        self.touch();
    }

    /// Gauge assignment.
    pub fn set(&self, id: KpiId, value: f64) {
        let slot = &self.slots[id.0 as usize];
        slot.bits.store(value.to_bits(), Ordering::Release);
        slot.active.store(true, Ordering::Release);
        self.touch();
    }

    /// Current value, or `None` when the KPI has never been driven here.
    pub fn get(&self, id: KpiId) -> Option<f64> {
        let slot = &self.slots[id.0 as usize];
        if slot.active.load(Ordering::Acquire) {
            Some(f64::from_bits(slot.bits.load(Ordering::Acquire)))
        } else {
            None
        }
    }

    pub fn last_update_ns(&self) -> u64 {
        self.last_update_ns.load(Ordering::Acquire)
    }

    /// All active (id, value) pairs in id order.
    pub fn active_values(&self) -> Vec<(KpiId, f64)> {
        self.slots
            .iter()
            .enumerate()
            .filter(|(_, s)| s.active.load(Ordering::Acquire))
            .map(|(i, s)| (KpiId(i as u32), f64::from_bits(s.bits.load(Ordering::Acquire))))
            .collect()
    }

    fn touch(&self) {
        self.last_update_ns
            .store(telemetry_core::clock::now_ns(), Ordering::Release);
    }
}

/// Validates at construction that a rule's target exists and that its action
/// fits the KPI kind.
pub fn check_kind(registry: &KpiRegistry, id: KpiId, wants: KpiKind) -> bool {
    registry.descriptor(id).kind == wants
}

#[cfg(test)]
mod tests {
    use super::*;
    use telemetry_core::{KpiDescriptor, KpiSource};

    fn small_registry() -> (KpiRegistry, KpiId, KpiId) {
        let mut reg = KpiRegistry::new();
        let c = reg
            .register(KpiDescriptor::new("c_total", KpiSource::Amf, "F", KpiKind::Counter))
            .unwrap();
        let g = reg
            .register(KpiDescriptor::new("g_now", KpiSource::Amf, "F", KpiKind::Gauge))
            .unwrap();
        (reg, c, g)
    }

    #[test]
    fn add_and_set() {
        let (reg, c, g) = small_registry();
        let table = CounterTable::new(&reg);
        assert_eq!(table.get(c), None);
        table.add(c, 3.0);
        table.add(c, 2.0);
        table.set(g, 7.5);
        table.set(g, 1.5);
        assert_eq!(table.get(c), Some(5.0));
        assert_eq!(table.get(g), Some(1.5));
        assert_eq!(table.active_values(), vec![(c, 5.0), (g, 1.5)]);
        assert!(table.last_update_ns() > 0);
    }

    #[test]
    fn activation_renders_zero() {
        let (reg, c, _) = small_registry();
        let table = CounterTable::new(&reg);
        table.activate(c);
        assert_eq!(table.get(c), Some(0.0));
    }
}
