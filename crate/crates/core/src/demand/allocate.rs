use super::{DemandError, Sector};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Nonnegative weights by region (province code or city node id).
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ProxyTable {
    pub sector: Option<Sector>,
    pub weights: BTreeMap<String, f64>,
}

impl ProxyTable {
    pub fn new(weights: impl IntoIterator<Item = (String, f64)>) -> Self {
        Self {
            sector: None,
            weights: weights.into_iter().collect(),
        }
    }
}

/// Splits `national` proportionally to the proxy weights.
pub fn allocate_sector(national: f64, proxy: &ProxyTable) -> Result<BTreeMap<String, f64>, DemandError> {
    if let Some((r, w)) = proxy.weights.iter().find(|(_, w)| !(**w >= 0.0)) {
        return Err(DemandError::Domain(format!("negative proxy weight {w} for {r}")));
    }
    let total: f64 = proxy.weights.values().sum();
    if !(total > 0.0) {
        return Err(DemandError::Domain(format!(
            "proxy for {} has zero total weight",
            proxy.sector.map(|s| s.as_str()).unwrap_or("allocation")
        )));
    }
    Ok(proxy
        .weights
        .iter()
        .map(|(r, w)| (r.clone(), national * w / total))
        .collect())
}

/// Province-then-city allocation. `cities` maps each city to its province
/// and its weight within that province. Provinces receiving demand must
/// have at least one city with positive weight.
pub fn allocate_two_stage(
    national: f64,
    provinces: &ProxyTable,
    cities: &BTreeMap<String, (String, f64)>,
) -> Result<BTreeMap<String, f64>, DemandError> {
    let by_province = allocate_sector(national, provinces)?;
    let mut out = BTreeMap::new();
    for (province, qty) in by_province {
        let members = ProxyTable {
            sector: provinces.sector,
            weights: cities
                .iter()
                .filter(|(_, (p, _))| *p == province)
                .map(|(c, (_, w))| (c.clone(), *w))
                .collect(),
        };
        if qty == 0.0 && members.weights.values().all(|w| *w == 0.0) {
            continue;
        }
        let split = allocate_sector(qty, &members)
            .map_err(|_| DemandError::Domain(format!("province {province}: no city with positive weight")))?;
        out.extend(split);
    }
    Ok(out)
}

/// Heating proxy by province: HDD x population. A province without an HDD
/// value borrows the HDD of its designated neighbour.
pub fn heating_weights(
    hdd: &BTreeMap<String, Option<f64>>,
    population: &BTreeMap<String, f64>,
    neighbour: &BTreeMap<String, String>,
) -> Result<ProxyTable, DemandError> {
    let mut weights = BTreeMap::new();
    for (province, pop) in population {
        let own = hdd.get(province).copied().flatten();
        let value = match own {
            Some(v) => v,
            None => {
                let n = neighbour.get(province).ok_or_else(|| {
                    DemandError::Missing(format!("HDD for {province} and no neighbour to borrow from"))
                })?;
                hdd.get(n)
                    .copied()
                    .flatten()
                    .ok_or_else(|| DemandError::Missing(format!("HDD for {province}'s neighbour {n}")))?
            }
        };
        weights.insert(province.clone(), value * pop);
    }
    Ok(ProxyTable {
        sector: Some(Sector::Heating),
        weights,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn proportional_split() {
        let p = ProxyTable::new([("a".to_string(), 3.0), ("b".to_string(), 1.0)]);
        let out = allocate_sector(100.0, &p).unwrap();
        assert_eq!(out["a"], 75.0);
        assert_eq!(out["b"], 25.0);
        assert!(allocate_sector(1.0, &ProxyTable::new([("a".to_string(), 0.0)])).is_err());
    }

    #[test]
    fn hdd_neighbour_substitution() {
        let hdd = BTreeMap::from([("HE".to_string(), Some(2500.0)), ("BJ".to_string(), None)]);
        let pop = BTreeMap::from([("HE".to_string(), 2.0), ("BJ".to_string(), 1.0)]);
        let nb = BTreeMap::from([("BJ".to_string(), "HE".to_string())]);
        let w = heating_weights(&hdd, &pop, &nb).unwrap();
        assert_eq!(w.weights["BJ"], 2500.0);
        assert_eq!(w.weights["HE"], 5000.0);
        assert!(heating_weights(&hdd, &pop, &BTreeMap::new()).is_err());
    }

    #[test]
    fn two_stage() {
        let prov = ProxyTable::new([("P".to_string(), 1.0), ("Q".to_string(), 1.0)]);
        let cities = BTreeMap::from([
            ("p1".to_string(), ("P".to_string(), 1.0)),
            ("p2".to_string(), ("P".to_string(), 3.0)),
            ("q1".to_string(), ("Q".to_string(), 5.0)),
        ]);
        let out = allocate_two_stage(80.0, &prov, &cities).unwrap();
        assert_eq!(out["p1"], 10.0);
        assert_eq!(out["p2"], 30.0);
        assert_eq!(out["q1"], 40.0);
    }

    proptest! {
        #[test]
        fn allocation_conserves_total(
            national in 0.0f64..1e6,
            w in proptest::collection::vec(0.0f64..100.0, 1..30),
        ) {
            prop_assume!(w.iter().sum::<f64>() > 0.0);
            let p = ProxyTable::new(w.iter().enumerate().map(|(i, v)| (format!("r{i}"), *v)));
            let out = allocate_sector(national, &p).unwrap();
            let s: f64 = out.values().sum();
            prop_assert!((s - national).abs() <= 1e-9 * national.max(1.0));
        }
    }
}
