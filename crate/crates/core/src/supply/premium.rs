//! Coal-quality price premia.

use serde::{Deserialize, Serialize};

use super::{CvBin, SupplyError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CokingMode {
    Step,
    Linear,
}

/// One CSR group of the coking premium curve, `[csr_from, csr_to)`; the
/// last group also includes its upper edge.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CsrGroup {
    pub csr_from: f64,
    pub csr_to: f64,
    pub premium: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PremiumModel {
    /// $/t per 1000 kcal/kg above the benchmark.
    pub thermal_rate: f64,
    pub benchmark_cv: f64,
    /// Price-to-CV slope excluding the premium, $/t per 1000 kcal/kg.
    /// Informational; not part of the effective cost.
    pub base_slope: f64,
    pub coking_mode: CokingMode,
    pub coking_curve: Vec<CsrGroup>,
    /// Mid-grade CSR carrying zero premium in both modes.
    pub reference_csr: f64,
}

impl Default for PremiumModel {
    fn default() -> Self {
        let group = |csr_from, csr_to, premium| CsrGroup {
            csr_from,
            csr_to,
            premium,
        };
        Self {
            thermal_rate: 8.0,
            benchmark_cv: 5500.0,
            base_slope: 15.0,
            coking_mode: CokingMode::Step,
            coking_curve: vec![
                group(0.0, 50.0, -10.0),
                group(50.0, 60.0, 0.0),
                group(60.0, 65.0, 8.0),
                group(65.0, 70.0, 20.0),
                group(70.0, 100.0, 40.0),
            ],
            reference_csr: 55.0,
        }
    }
}

impl PremiumModel {
    pub fn check(&self) -> Result<(), SupplyError> {
        let bad = |m: &str| Err(SupplyError::Config(format!("premium model: {m}")));
        if self.coking_curve.is_empty() {
            return bad("coking curve is empty");
        }
        for pair in self.coking_curve.windows(2) {
            if pair[0].csr_to != pair[1].csr_from {
                return bad("coking curve groups must be contiguous");
            }
            if pair[1].premium < pair[0].premium {
                return bad("coking premium must be nondecreasing in CSR");
            }
        }
        if self.coking_curve.iter().any(|g| g.csr_to <= g.csr_from) {
            return bad("empty CSR group");
        }
        if self.thermal_rate < 0.0 {
            return bad("negative thermal rate");
        }
        Ok(())
    }

    /// $/t relative to the benchmark CV; negative below it.
    pub fn thermal_premium(&self, bin: CvBin) -> f64 {
        self.thermal_rate * (f64::from(bin.kcal()) - self.benchmark_cv) / 1000.0
    }

    pub fn coking_premium(&self, csr: f64) -> f64 {
        self.coking_premium_in(csr, self.coking_mode)
    }

    /// Step mode looks the CSR up in the group table. Linear mode follows the
    /// straight line through the reference grade (premium 0) and the middle
    /// of the top group (top premium).
    pub fn coking_premium_in(&self, csr: f64, mode: CokingMode) -> f64 {
        let top = self.coking_curve.last().expect("checked non-empty curve");
        match mode {
            CokingMode::Step => self
                .coking_curve
                .iter()
                .find(|g| csr >= g.csr_from && csr < g.csr_to)
                .map(|g| g.premium)
                .unwrap_or(if csr < self.coking_curve[0].csr_from {
                    self.coking_curve[0].premium
                } else {
                    top.premium
                }),
            CokingMode::Linear => {
                let top_mid = (top.csr_from + top.csr_to) / 2.0;
                top.premium * (csr - self.reference_csr) / (top_mid - self.reference_csr)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn thermal_examples() {
        let m = PremiumModel::default();
        assert_eq!(m.thermal_premium(CvBin::new(5500).unwrap()), 0.0);
        assert_eq!(m.thermal_premium(CvBin::new(6500).unwrap()), 8.0);
        assert_eq!(m.thermal_premium(CvBin::new(4500).unwrap()), -8.0);
    }

    #[test]
    fn coking_examples() {
        let m = PremiumModel::default();
        m.check().unwrap();
        assert_eq!(m.coking_premium_in(75.0, CokingMode::Step), 40.0);
        assert_eq!(m.coking_premium_in(100.0, CokingMode::Step), 40.0);
        assert_eq!(m.coking_premium_in(55.0, CokingMode::Step), 0.0);
        assert_eq!(m.coking_premium_in(55.0, CokingMode::Linear), 0.0);
        // halfway between the anchor (55) and the top-group middle (85)
        assert!((m.coking_premium_in(70.0, CokingMode::Linear) - 20.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn premia_monotone(a in 0.0f64..100.0, b in 0.0f64..100.0) {
            let m = PremiumModel::default();
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            for mode in [CokingMode::Step, CokingMode::Linear] {
                prop_assert!(m.coking_premium_in(lo, mode) <= m.coking_premium_in(hi, mode));
            }
        }

        #[test]
        fn thermal_monotone(i in 0usize..17, j in 0usize..17) {
            let m = PremiumModel::default();
            let bins: Vec<CvBin> = CvBin::all_real().collect();
            let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
            prop_assert!(m.thermal_premium(bins[lo]) <= m.thermal_premium(bins[hi]));
        }
    }
}
