use super::{coking_demand, CokingDemand, CokingMix, DemandError, Sector};
use crate::supply::KCAL_TO_PJ;
use crate::years::Year;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// National thermal coal consumption by industry, PJ. Steel is kept out of
/// the table: it is replaced by the coking-mix tonnage.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct IndustryBalance {
    pub year: Year,
    pub pj: BTreeMap<Sector, f64>,
}

impl IndustryBalance {
    /// Converts reported Mt to PJ with each industry's average CV (kcal/kg).
    pub fn from_mass(
        year: Year,
        mt: &BTreeMap<Sector, f64>,
        cv: &BTreeMap<Sector, f64>,
    ) -> Result<Self, DemandError> {
        let mut pj = BTreeMap::new();
        for (&sector, &mass) in mt.iter().filter(|(s, _)| **s != Sector::Steel) {
            let kcal = cv
                .get(&sector)
                .ok_or_else(|| DemandError::Missing(format!("calorific value for {sector}")))?;
            pj.insert(sector, mass * kcal * 1e9 * KCAL_TO_PJ);
        }
        Ok(Self { year, pj })
    }

    pub fn total(&self) -> f64 {
        self.pj.values().sum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdjustedBalance {
    pub year: Year,
    pub pj: BTreeMap<Sector, f64>,
    /// Primary energy implied by coal-fired generation, PJ.
    pub implied_power: f64,
    /// Amount removed from `other` uses, PJ.
    pub other_reduction: f64,
    pub steel: CokingDemand,
}

impl AdjustedBalance {
    pub fn total(&self) -> f64 {
        self.pj.values().sum()
    }
}

/// Replaces the power industry's reported consumption with the primary
/// energy implied by coal-fired generation (`power_pj / fleet_eff`) and
/// takes the difference out of `other` uses, keeping the national total.
pub fn balance_adjust(
    table: &IndustryBalance,
    power_pj: f64,
    fleet_eff: f64,
    primary_steel_mt: f64,
    mix: &CokingMix,
) -> Result<AdjustedBalance, DemandError> {
    if !(fleet_eff > 0.0 && fleet_eff <= 1.0) {
        return Err(DemandError::Domain(format!("fleet efficiency {fleet_eff} not in (0, 1]")));
    }
    for sector in [Sector::PowerGen, Sector::Other] {
        if !table.pj.contains_key(&sector) {
            return Err(DemandError::Missing(format!("{sector} row of the {} balance", table.year)));
        }
    }
    let implied = power_pj / fleet_eff;
    let reported_power = table.pj[&Sector::PowerGen];
    let reported_other = table.pj[&Sector::Other];
    let added = implied - reported_power;
    let other = reported_other - added;
    if other < 0.0 {
        return Err(DemandError::NegativeOther {
            year: table.year,
            other,
            reported: reported_other,
            added,
        });
    }
    let mut pj = table.pj.clone();
    pj.insert(Sector::PowerGen, implied);
    pj.insert(Sector::Other, other);
    Ok(AdjustedBalance {
        year: table.year,
        pj,
        implied_power: implied,
        other_reduction: added,
        steel: coking_demand(primary_steel_mt, mix),
    })
}
