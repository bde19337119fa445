//! Year-indexed parameter series.
//!
//! Capacities and costs are stored as sparse `year -> value` maps with
//! step-forward semantics: the value for a year is the one recorded for the
//! latest year at or before it. Years before the first record read as zero
//! (the asset does not exist yet). An empty series carries no value at all,
//! which callers interpret per parameter (unbounded link, no port limit, ...).

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Model year.
pub type Year = u16;

/// Sparse step-forward series of yearly values.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct YearSeries(BTreeMap<Year, f64>);

impl YearSeries {
    pub fn new() -> Self {
        Self(BTreeMap::new())
    }

    /// A series holding one value from `year` onwards.
    pub fn constant_from(year: Year, value: f64) -> Self {
        let mut s = Self::new();
        s.set(year, value);
        s
    }

    pub fn set(&mut self, year: Year, value: f64) {
        self.0.insert(year, value);
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Value in force in `year`; `None` only for an empty series.
    pub fn at(&self, year: Year) -> Option<f64> {
        if self.0.is_empty() {
            return None;
        }
        Some(
            self.0
                .range(..=year)
                .next_back()
                .map(|(_, v)| *v)
                .unwrap_or(0.0),
        )
    }

    /// Recorded `(year, value)` pairs in ascending year order.
    pub fn iter(&self) -> impl Iterator<Item = (Year, f64)> + '_ {
        self.0.iter().map(|(y, v)| (*y, *v))
    }

    pub fn values_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.0.values_mut()
    }

    /// Holds every year after `to_year` at the value in force in `to_year`.
    pub fn freeze_after(&mut self, to_year: Year) {
        let Some(frozen) = self.at(to_year) else {
            return;
        };
        self.0.retain(|y, _| *y <= to_year);
        self.0.insert(to_year, frozen);
    }

    /// Caps every year after `to_year` at the value in force in `to_year`.
    /// Unlike [`freeze_after`](Self::freeze_after), later reductions are kept.
    pub fn cap_after(&mut self, to_year: Year) {
        let Some(cap) = self.at(to_year) else {
            return;
        };
        self.0.insert(to_year, cap);
        for (_, v) in self.0.range_mut(to_year + 1..) {
            *v = v.min(cap);
        }
    }

    pub fn scale(&mut self, factor: f64) {
        self.0.values_mut().for_each(|v| *v *= factor);
    }

    pub fn last_year(&self) -> Option<Year> {
        self.0.keys().next_back().copied()
    }

    /// Sets the value in force from `year` onwards, dropping later records.
    pub fn set_from(&mut self, year: Year, value: f64) {
        self.0.retain(|y, _| *y < year);
        self.0.insert(year, value);
    }

    pub fn min_value(&self) -> Option<f64> {
        self.0.values().copied().reduce(f64::min)
    }
}

impl FromIterator<(Year, f64)> for YearSeries {
    fn from_iter<I: IntoIterator<Item = (Year, f64)>>(iter: I) -> Self {
        Self(iter.into_iter().collect())
    }
}
