use super::DemandError;
use crate::supply::PJ_PER_TWH;
use std::collections::BTreeMap;

/// Share of the `thermal` statistical category from sources other than
/// coal, gas and biomass.
pub const OTHER_SOURCES_SHARE: f64 = 0.025;

/// Coal-fired generation by province and the national diagnostics of the
/// subtraction.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PowerBreakdown {
    /// PJ electricity.
    pub by_province: BTreeMap<String, f64>,
    /// Provinces whose residual was negative and clamped to zero.
    pub clamped: Vec<String>,
    /// National coal-fired share of thermal generation.
    pub coal_share: f64,
}

/// Splits national gas-fired generation over provinces by capacity share.
pub fn gas_generation_from_shares(national_twh: f64, shares: &BTreeMap<String, f64>) -> BTreeMap<String, f64> {
    shares.iter().map(|(p, s)| (p.clone(), national_twh * s)).collect()
}

/// Coal-fired generation, PJ: `(thermal - gas - biomass) x (1 - 2.5%) x 3.6`.
/// Inputs are TWh by province; missing gas or biomass entries count as zero.
pub fn provincial_coal_power(
    thermal: &BTreeMap<String, f64>,
    gas: &BTreeMap<String, f64>,
    biomass: &BTreeMap<String, f64>,
) -> Result<PowerBreakdown, DemandError> {
    let mut out = PowerBreakdown::default();
    let mut total_thermal = 0.0;
    for (province, &th) in thermal {
        if !(th >= 0.0) {
            return Err(DemandError::Domain(format!("{province}: negative thermal generation {th}")));
        }
        total_thermal += th;
        let residual = th - gas.get(province).unwrap_or(&0.0) - biomass.get(province).unwrap_or(&0.0);
        let pj = if residual < 0.0 {
            log::warn!("{province}: gas and biomass exceed thermal generation, clamped to zero");
            out.clamped.push(province.clone());
            0.0
        } else {
            residual * (1.0 - OTHER_SOURCES_SHARE) * PJ_PER_TWH
        };
        out.by_province.insert(province.clone(), pj);
    }
    let coal_pj: f64 = out.by_province.values().sum();
    out.coal_share = if total_thermal > 0.0 {
        coal_pj / (total_thermal * PJ_PER_TWH)
    } else {
        0.0
    };
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one(p: &str, v: f64) -> BTreeMap<String, f64> {
        BTreeMap::from([(p.to_string(), v)])
    }

    #[test]
    fn formula_example() {
        let out = provincial_coal_power(&one("GD", 100.0), &one("GD", 10.0), &one("GD", 5.0)).unwrap();
        assert!((out.by_province["GD"] - 298.35).abs() < 1e-9);
        assert!((out.coal_share - 0.82875).abs() < 1e-12);
    }

    #[test]
    fn zero_and_clamp() {
        let out = provincial_coal_power(&one("A", 0.0), &BTreeMap::new(), &BTreeMap::new()).unwrap();
        assert_eq!(out.by_province["A"], 0.0);
        let out = provincial_coal_power(&one("A", 5.0), &one("A", 10.0), &BTreeMap::new()).unwrap();
        assert_eq!(out.by_province["A"], 0.0);
        assert_eq!(out.clamped, vec!["A".to_string()]);
    }

    #[test]
    fn national_twh_to_pj() {
        // 4,694 TWh of coal-fired generation
        assert!((4694.0 * PJ_PER_TWH - 16898.0).abs() < 1.0);
    }

    #[test]
    fn gas_from_shares() {
        let shares = BTreeMap::from([("A".to_string(), 0.25), ("B".to_string(), 0.75)]);
        let g = gas_generation_from_shares(200.0, &shares);
        assert_eq!(g["A"], 50.0);
        assert_eq!(g["B"], 150.0);
    }
}
