//! Transport tariffs.
//!
//! Rates are configured in CNY as published; LP coefficients are USD at a
//! single configured exchange rate.

use super::SupplyError;
use crate::network::{Link, NodeKind, TransportMode};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// MWh per PJ.
pub const MWH_PER_PJ: f64 = 1e15 / 3.6e9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineTariff {
    /// CNY/t·km
    pub rate: f64,
    /// CNY/t
    pub handling: f64,
}

/// Handling charge for links between two node kinds. `None` matches any kind.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HandlingRule {
    #[serde(default, with = "kind_or_any")]
    pub from: Option<NodeKind>,
    #[serde(default, with = "kind_or_any")]
    pub to: Option<NodeKind>,
    pub cny: f64,
}

mod kind_or_any {
    use crate::network::NodeKind;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<NodeKind>, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(v.map(NodeKind::as_str).unwrap_or("*"))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<NodeKind>, D::Error> {
        let s = String::deserialize(d)?;
        if s == "*" {
            return Ok(None);
        }
        s.parse().map(Some).map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tariff {
    /// CNY per USD.
    pub exchange_rate: f64,
    /// Distance rates by mode, CNY/t·km.
    pub rates: BTreeMap<TransportMode, f64>,
    /// Handling charges, most specific rule wins.
    pub handling: Vec<HandlingRule>,
    /// Handling charge when no rule matches, CNY/t.
    pub default_handling: f64,
    /// Per-line overrides keyed by lowercase line name.
    pub lines: BTreeMap<String, LineTariff>,
    /// UHV transmission cost, CNY per MWh per 1000 km.
    pub uhv_cny_per_mwh_1000km: f64,
}

impl Default for Tariff {
    fn default() -> Self {
        use NodeKind::*;
        let rule = |from, to, cny| HandlingRule { from, to, cny };
        let line = |rate, handling| LineTariff { rate, handling };
        Self {
            exchange_rate: 6.9,
            rates: BTreeMap::from([
                (TransportMode::Rail, 0.131),
                (TransportMode::Truck, 0.25),
                (TransportMode::RiverBarge, 0.08),
                (TransportMode::OceanShip, 0.02),
            ]),
            handling: vec![
                rule(Some(Port), None, 25.0),
                rule(Some(Mine), Some(NavWaypointOcean), 25.0),
                rule(Some(NavWaypointOcean), Some(Port), 0.0),
                rule(Some(NavWaypointRiver), Some(Port), 0.0),
                rule(Some(NavWaypointOcean), Some(NavWaypointOcean), 0.0),
                rule(Some(NavWaypointOcean), Some(NavWaypointRiver), 0.0),
                rule(Some(NavWaypointRiver), Some(NavWaypointOcean), 0.0),
                rule(Some(NavWaypointRiver), Some(NavWaypointRiver), 0.0),
                rule(Some(RailwayStop), Some(RailwayStop), 0.0),
                rule(Some(CityCenter), Some(CityCenter), 0.0),
            ],
            default_handling: 16.3,
            lines: BTreeMap::from([
                ("haoji".to_string(), line(0.184, 0.0)),
                ("menghua".to_string(), line(0.184, 0.0)),
                ("mengji".to_string(), line(0.184, 0.0)),
                ("wari".to_string(), line(0.184, 0.0)),
                ("shuohuang".to_string(), line(0.12, 16.3)),
            ]),
            uhv_cny_per_mwh_1000km: 35.0,
        }
    }
}

impl Tariff {
    pub fn check(&self) -> Result<(), SupplyError> {
        let negative = self.rates.values().any(|r| *r < 0.0)
            || self.handling.iter().any(|h| h.cny < 0.0)
            || self.lines.values().any(|l| l.rate < 0.0 || l.handling < 0.0)
            || self.default_handling < 0.0
            || self.uhv_cny_per_mwh_1000km < 0.0;
        if negative {
            return Err(SupplyError::Config("tariff: negative rate".into()));
        }
        if !(self.exchange_rate > 0.0) {
            return Err(SupplyError::Config("tariff: exchange rate must be positive".into()));
        }
        Ok(())
    }

    pub fn to_usd(&self, cny: f64) -> f64 {
        cny / self.exchange_rate
    }

    pub fn to_cny(&self, usd: f64) -> f64 {
        usd * self.exchange_rate
    }

    fn line_override(&self, link: &Link) -> Option<&LineTariff> {
        if link.mode != TransportMode::Rail {
            return None;
        }
        self.lines.get(&link.line.as_deref()?.to_ascii_lowercase())
    }

    /// Handling charge for a move from `from` to `to`, CNY/t.
    pub fn handling_cny(&self, from: NodeKind, to: NodeKind) -> f64 {
        let pick = |f: Option<NodeKind>, t: Option<NodeKind>| {
            self.handling.iter().find(|r| r.from == f && r.to == t).map(|r| r.cny)
        };
        pick(Some(from), Some(to))
            .or_else(|| pick(Some(from), None))
            .or_else(|| pick(None, Some(to)))
            .unwrap_or(self.default_handling)
    }

    /// UHV transmission cost for a line of `km`, CNY per PJ delivered.
    pub fn uhv_cny_per_pj(&self, km: f64) -> f64 {
        self.uhv_cny_per_mwh_1000km * km / 1000.0 * MWH_PER_PJ
    }
}

/// Unit cost of a link in CNY: per tonne for coal-carrying modes, per PJ
/// for UHV, zero for functional links.
pub fn link_unit_cost_cny(
    link: &Link,
    from: NodeKind,
    to: NodeKind,
    tariff: &Tariff,
) -> Result<f64, SupplyError> {
    match link.mode {
        TransportMode::Functional => Ok(0.0),
        TransportMode::Uhv => Ok(tariff.uhv_cny_per_pj(link.distance_km)),
        mode => {
            if let Some(line) = tariff.line_override(link) {
                return Ok(line.handling + line.rate * link.distance_km);
            }
            let rate = tariff
                .rates
                .get(&mode)
                .ok_or_else(|| SupplyError::Config(format!("tariff: no rate for mode {mode}")))?;
            Ok(tariff.handling_cny(from, to) + rate * link.distance_km)
        }
    }
}

/// [`link_unit_cost_cny`] converted to USD.
pub fn link_unit_cost(link: &Link, from: NodeKind, to: NodeKind, tariff: &Tariff) -> Result<f64, SupplyError> {
    Ok(tariff.to_usd(link_unit_cost_cny(link, from, to, tariff)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn published_rail_examples() {
        let t = Tariff::default();
        let rail = Link::new("a", "b", TransportMode::Rail, 500.0);
        let c = link_unit_cost_cny(&rail, NodeKind::RailwayStop, NodeKind::PowerPlant, &t).unwrap();
        assert!((c - 81.8).abs() < 1e-9);
        let haoji = rail.clone().on_line("Haoji");
        let c = link_unit_cost_cny(&haoji, NodeKind::RailwayStop, NodeKind::RailwayStop, &t).unwrap();
        assert!((c - 92.0).abs() < 1e-9);
    }

    #[test]
    fn truck_after_rail() {
        let t = Tariff::default();
        let truck = Link::new("a", "b", TransportMode::Truck, 100.0);
        let c = link_unit_cost_cny(&truck, NodeKind::RailwayStop, NodeKind::PowerPlant, &t).unwrap();
        assert!((c - 41.3).abs() < 1e-9);
    }

    #[test]
    fn port_handling_and_functional() {
        let t = Tariff::default();
        let ship = Link::new("p", "w", TransportMode::OceanShip, 1000.0);
        let c = link_unit_cost_cny(&ship, NodeKind::Port, NodeKind::NavWaypointOcean, &t).unwrap();
        assert!((c - 45.0).abs() < 1e-9);
        let f = Link::new("p", "u", TransportMode::Functional, 0.0);
        assert_eq!(link_unit_cost_cny(&f, NodeKind::PowerPlant, NodeKind::PowerPlantUnit, &t).unwrap(), 0.0);
    }

    #[test]
    fn uhv_cost_per_pj() {
        let t = Tariff::default();
        let uhv = Link::new("a", "b", TransportMode::Uhv, 2000.0);
        let c = link_unit_cost_cny(&uhv, NodeKind::ProvPowerDemand, NodeKind::ProvPowerDemand, &t).unwrap();
        // 70 CNY/MWh over 2000 km, 277,777.8 MWh per PJ
        assert!((c - 70.0 * 1e6 / 3.6).abs() < 1e-6);
    }

    #[test]
    fn missing_mode_is_config_error() {
        let mut t = Tariff::default();
        t.rates.remove(&TransportMode::RiverBarge);
        let barge = Link::new("a", "b", TransportMode::RiverBarge, 10.0);
        assert!(link_unit_cost(&barge, NodeKind::Port, NodeKind::Port, &t).is_err());
    }

    #[test]
    fn toml_round_trip() {
        let t = Tariff::default();
        let text = toml::to_string(&t).unwrap();
        let back: Tariff = toml::from_str(&text).unwrap();
        assert_eq!(back, t);
    }

    proptest! {
        #[test]
        fn currency_round_trip(cny in 0.0f64..1e6, rate in 0.5f64..20.0) {
            let t = Tariff { exchange_rate: rate, ..Tariff::default() };
            let back = t.to_cny(t.to_usd(cny));
            prop_assert!((back - cny).abs() <= 1e-9 * cny.max(1e-300));
        }

        #[test]
        fn costs_nonnegative(km in 0.0f64..5000.0, m in 0usize..6, f in 0usize..12, to in 0usize..12) {
            let t = Tariff::default();
            let link = Link::new("a", "b", TransportMode::ALL[m], km);
            let c = link_unit_cost(&link, NodeKind::ALL[f], NodeKind::ALL[to], &t).unwrap();
            prop_assert!(c >= 0.0);
        }
    }
}
