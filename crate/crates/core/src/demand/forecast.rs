use super::DemandError;
use crate::years::Year;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

const RELATIVE_TOL: f64 = 1e-9;

/// Result of [`forecast_offset`].
#[derive(Clone, Debug, PartialEq)]
pub struct Offset {
    /// Added to every province's growth rate.
    pub delta: f64,
    /// Growth rate applied per province, floored at -100%.
    pub rates: BTreeMap<String, f64>,
    pub projected: BTreeMap<String, f64>,
}

fn project(base: &BTreeMap<String, f64>, growth: &BTreeMap<String, f64>, n: u32, delta: f64) -> f64 {
    base.iter()
        .map(|(p, b)| b * (1.0 + growth.get(p).copied().unwrap_or(0.0) + delta).max(0.0).powi(n as i32))
        .sum()
}

/// Finds the uniform shift `delta` of provincial growth rates such that the
/// provinces projected `n` years ahead add up to `target`.
pub fn forecast_offset(
    base: &BTreeMap<String, f64>,
    growth: &BTreeMap<String, f64>,
    n: u32,
    target: f64,
) -> Result<Offset, DemandError> {
    if !base.values().any(|b| *b > 0.0) || base.values().any(|b| !(*b >= 0.0)) {
        return Err(DemandError::Domain("forecast base needs a positive province and no negatives".into()));
    }
    if !(target > 0.0) {
        return Err(DemandError::Domain(format!("forecast target {target} must be positive")));
    }
    let residual = |d: f64| (project(base, growth, n, d) - target) / target;
    let finish = |delta: f64| {
        let rates: BTreeMap<String, f64> = base
            .keys()
            .map(|p| (p.clone(), (growth.get(p).copied().unwrap_or(0.0) + delta).max(-1.0)))
            .collect();
        let projected = base
            .iter()
            .map(|(p, b)| (p.clone(), b * (1.0 + rates[p]).powi(n as i32)))
            .collect();
        Offset {
            delta,
            rates,
            projected,
        }
    };
    if n == 0 {
        return if residual(0.0).abs() <= RELATIVE_TOL {
            Ok(finish(0.0))
        } else {
            Err(DemandError::NoOffset {
                lo: 0.0,
                hi: 0.0,
                target,
                at_lo: project(base, growth, 0, 0.0),
                at_hi: project(base, growth, 0, 0.0),
            })
        };
    }

    let (mut lo, mut hi) = (-0.5, 0.5);
    if residual(lo) > 0.0 || residual(hi) < 0.0 {
        lo -= 1.0;
        hi += 1.0;
        if residual(lo) > 0.0 || residual(hi) < 0.0 {
            return Err(DemandError::NoOffset {
                lo,
                hi,
                target,
                at_lo: project(base, growth, n, lo),
                at_hi: project(base, growth, n, hi),
            });
        }
    }
    // bisect well past the reporting tolerance so delta itself is accurate
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if residual(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let delta = if residual(lo).abs() <= residual(hi).abs() { lo } else { hi };
    if residual(delta).abs() > RELATIVE_TOL {
        return Err(DemandError::NoOffset {
            lo,
            hi,
            target,
            at_lo: project(base, growth, n, lo),
            at_hi: project(base, growth, n, hi),
        });
    }
    Ok(finish(delta))
}

/// Same compound growth for every province.
pub fn flat_growth(base: &BTreeMap<String, f64>, cagr: f64, n: u32) -> Result<BTreeMap<String, f64>, DemandError> {
    if !(cagr > -1.0) {
        return Err(DemandError::Domain(format!("growth rate {cagr} must exceed -100%")));
    }
    let f = (1.0 + cagr).powi(n as i32);
    Ok(base.iter().map(|(p, b)| (p.clone(), b * f)).collect())
}

/// Scales every province by the same factor to reach `target`.
pub fn uniform_scale(base: &BTreeMap<String, f64>, target: f64) -> Result<BTreeMap<String, f64>, DemandError> {
    let total: f64 = base.values().sum();
    if !(total > 0.0) {
        return Err(DemandError::Domain("cannot scale an all-zero base".into()));
    }
    Ok(base.iter().map(|(p, b)| (p.clone(), b * target / total)).collect())
}

/// Reduction weighted by relative GDP: a province with GDP index `r` (1 =
/// national average) changes by `r` times the national average percentage,
/// scaled by one closing factor so the national total hits `target`.
/// Provinces that would go negative are held at zero and the remainder is
/// spread over the others.
pub fn gdp_weighted(
    base: &BTreeMap<String, f64>,
    gdp_index: &BTreeMap<String, f64>,
    target: f64,
) -> Result<BTreeMap<String, f64>, DemandError> {
    let total: f64 = base.values().sum();
    if !(total > 0.0) || !(target >= 0.0) {
        return Err(DemandError::Domain("GDP-weighted reduction needs a positive base and target".into()));
    }
    let index = |p: &str| {
        gdp_index
            .get(p)
            .copied()
            .ok_or_else(|| DemandError::Missing(format!("GDP index for {p}")))
    };
    for p in base.keys() {
        if !(index(p)? >= 0.0) {
            return Err(DemandError::Domain(format!("negative GDP index for {p}")));
        }
    }
    let national_change = target / total - 1.0;
    let mut zeroed: Vec<&String> = Vec::new();
    loop {
        // new_p = b_p (1 + lambda r_p c); choose lambda to close the total
        let mut fixed = 0.0;
        let mut weighted = 0.0;
        for (p, b) in base.iter().filter(|(p, _)| !zeroed.contains(p)) {
            fixed += b;
            weighted += b * index(p)? * national_change;
        }
        let lambda = if weighted == 0.0 { 0.0 } else { (target - fixed) / weighted };
        let mut out = BTreeMap::new();
        let mut newly_zero = Vec::new();
        for (p, b) in base {
            let v = if zeroed.contains(&p) {
                0.0
            } else {
                b * (1.0 + lambda * index(p)? * national_change)
            };
            if v < 0.0 {
                newly_zero.push(p);
            }
            out.insert(p.clone(), v.max(0.0));
        }
        if newly_zero.is_empty() {
            let reached: f64 = out.values().sum();
            if (reached - target).abs() > RELATIVE_TOL * target.max(1.0) {
                return Err(DemandError::Domain(format!(
                    "GDP-weighted reduction cannot reach {target} (got {reached})"
                )));
            }
            return Ok(out);
        }
        zeroed.extend(newly_zero);
    }
}

/// Named national demand trajectories.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DemandPreset {
    /// High demand.
    Sps,
    /// Low demand.
    Sds,
}

impl std::str::FromStr for DemandPreset {
    type Err = DemandError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "sps" => Ok(DemandPreset::Sps),
            "sds" => Ok(DemandPreset::Sds),
            other => Err(DemandError::Domain(format!("unknown demand preset `{other}`"))),
        }
    }
}

/// Preset national levels (Mt) for the base year and two target years.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PresetRatios {
    pub years: [Year; 3],
    pub power: [f64; 3],
    pub steel: [f64; 3],
    pub other: [f64; 3],
}

impl DemandPreset {
    pub fn table(self) -> PresetRatios {
        match self {
            DemandPreset::Sps => PresetRatios {
                years: [2019, 2025, 2030],
                power: [2263.0, 2348.0, 2324.0],
                steel: [732.0, 679.0, 562.0],
                other: [837.0, 822.0, 832.0],
            },
            DemandPreset::Sds => PresetRatios {
                years: [2019, 2025, 2030],
                power: [2263.0, 2001.0, 1481.0],
                steel: [732.0, 612.0, 481.0],
                other: [837.0, 783.0, 649.0],
            },
        }
    }
}

impl PresetRatios {
    fn ratio(levels: &[f64; 3], years: &[Year; 3], year: Year) -> f64 {
        let base = levels[0];
        if year <= years[0] {
            return 1.0;
        }
        // geometric interpolation between anchors, flat beyond the last
        for i in 0..2 {
            if year <= years[i + 1] {
                let span = f64::from(years[i + 1] - years[i]);
                let t = f64::from(year - years[i]) / span;
                return levels[i] / base * (levels[i + 1] / levels[i]).powf(t);
            }
        }
        levels[2] / base
    }

    /// `(power, steel, other)` relative to the base year.
    pub fn ratios(&self, year: Year) -> (f64, f64, f64) {
        (
            Self::ratio(&self.power, &self.years, year),
            Self::ratio(&self.steel, &self.years, year),
            Self::ratio(&self.other, &self.years, year),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn map(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn identity_offset() {
        let o = forecast_offset(&map(&[("A", 100.0)]), &map(&[("A", 0.02)]), 1, 102.0).unwrap();
        assert!(o.delta.abs() < 1e-12);
    }

    #[test]
    fn two_point_reduction() {
        let base = map(&[("GD", 100.0), ("XJ", 40.0)]);
        let g = map(&[("GD", 0.022), ("XJ", 0.088)]);
        let target = 100.0 * 1.002f64.powi(6) + 40.0 * 1.068f64.powi(6);
        let o = forecast_offset(&base, &g, 6, target).unwrap();
        assert!((o.delta + 0.02).abs() < 1e-9);
        assert!((o.rates["GD"] - 0.002).abs() < 1e-9);
        assert!((o.rates["XJ"] - 0.068).abs() < 1e-9);
    }

    #[test]
    fn closed_form_with_common_rate() {
        let base = map(&[("A", 30.0), ("B", 70.0)]);
        let g = map(&[("A", 0.03), ("B", 0.03)]);
        let o = forecast_offset(&base, &g, 11, 80.0).unwrap();
        let want = (0.8f64).powf(1.0 / 11.0) - 1.0 - 0.03;
        assert!((o.delta - want).abs() < 1e-9);
    }

    #[test]
    fn unreachable_target_fails() {
        let base = map(&[("A", 1.0)]);
        let err = forecast_offset(&base, &map(&[("A", 0.0)]), 1, 1e6).unwrap_err();
        assert!(matches!(err, DemandError::NoOffset { .. }));
    }

    #[test]
    fn random_fixtures_hit_target() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let k = rng.gen_range(1..12);
            let base: BTreeMap<String, f64> = (0..k).map(|i| (format!("p{i}"), rng.gen_range(1.0..500.0))).collect();
            let g: BTreeMap<String, f64> = (0..k).map(|i| (format!("p{i}"), rng.gen_range(-0.05..0.1))).collect();
            let n = rng.gen_range(1..12);
            let total: f64 = base.values().sum();
            let target = total * rng.gen_range(0.5..1.6);
            let o = forecast_offset(&base, &g, n, target).unwrap();
            let s: f64 = o.projected.values().sum();
            assert!((s - target).abs() / target <= 1e-9);
        }
    }

    #[test]
    fn flat_growth_examples() {
        let base = map(&[("A", 100.0), ("B", 50.0)]);
        assert_eq!(flat_growth(&base, 0.0, 6).unwrap(), base);
        let out = flat_growth(&base, -0.011, 6).unwrap();
        // 100 x 0.989^6 = 93.578
        assert!((out["A"] - 100.0 * 0.989f64.powi(6)).abs() < 1e-12);
        assert!((out["A"] - 93.57).abs() < 0.01);
        assert!((out["A"] / out["B"] - 2.0).abs() < 1e-12);
        assert!(flat_growth(&base, -1.0, 1).is_err());
    }

    #[test]
    fn gdp_weighted_doubles_reduction() {
        let base = map(&[("rich", 100.0), ("avg", 100.0), ("poor", 100.0)]);
        let idx = map(&[("rich", 2.0), ("avg", 1.0), ("poor", 0.0)]);
        let out = gdp_weighted(&base, &idx, 270.0).unwrap();
        let s: f64 = out.values().sum();
        assert!((s - 270.0).abs() < 1e-9);
        let cut = |p: &str| 100.0 - out[p];
        assert!((cut("rich") - 2.0 * cut("avg")).abs() < 1e-9);
        assert_eq!(cut("poor"), 0.0);
    }

    #[test]
    fn gdp_weighted_clamps_at_zero() {
        let base = map(&[("rich", 10.0), ("poor", 100.0)]);
        let idx = map(&[("rich", 10.0), ("poor", 0.5)]);
        let out = gdp_weighted(&base, &idx, 60.0).unwrap();
        assert_eq!(out["rich"], 0.0);
        assert!((out["poor"] - 60.0).abs() < 1e-9);
    }

    #[test]
    fn preset_ratios() {
        let t = DemandPreset::Sps.table();
        let (p, s, o) = t.ratios(2025);
        assert!((p - 2348.0 / 2263.0).abs() < 1e-12);
        assert!((s - 679.0 / 732.0).abs() < 1e-12);
        assert!((o - 822.0 / 837.0).abs() < 1e-12);
        assert_eq!(t.ratios(2019), (1.0, 1.0, 1.0));
        let (p, _, _) = DemandPreset::Sds.table().ratios(2035);
        assert!((p - 1481.0 / 2263.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn offset_monotone_in_target(t1 in 50.0f64..200.0, t2 in 50.0f64..200.0) {
            let base = map(&[("A", 60.0), ("B", 40.0)]);
            let g = map(&[("A", 0.01), ("B", 0.05)]);
            let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
            let a = forecast_offset(&base, &g, 6, lo).unwrap();
            let b = forecast_offset(&base, &g, 6, hi).unwrap();
            prop_assert!(a.delta <= b.delta + 1e-12);
        }
    }
}
