//! Location-normalized collaboration performance per university and sector.
//!
//! A university's expected intra-regional supply is the share of its home
//! region's demand it would capture if demand split proportionally to staff;
//! the expected extra-regional supply distributes every other region's
//! extra-regional demand over the staff outside that region. Realized over
//! expected supply gives the intra/extra performance indicators; quadrant
//! classification median-splits the (intra, extra) plane.

use crate::collab::{CollabLedger, Locality};
use crate::error::{Error, Result};
use crate::ids::{RegionId, SdsId, UniversityId};
use crate::market::{annual_extra_regional_demand, annual_regional_demand};
use crate::registry::Registry;
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// Default weight of the extra-regional component in overall performance.
pub const DEFAULT_WEIGHT_EXTRA: f64 = 0.5;

/// Per-(university, sector) indicator row. Performance values are `None`
/// where the indicator is undefined: intra when the home region has no
/// demand or the university no staff, extra when the expected supply is
/// zero, overall when either component is undefined.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerformanceRow {
    pub university_id: UniversityId,
    pub sds_id: SdsId,
    pub region_id: RegionId,
    pub annual_regional_demand: f64,
    pub annual_intra_supply: f64,
    pub expected_intra_supply: f64,
    pub intra_performance: Option<f64>,
    pub annual_extra_supply: f64,
    pub expected_extra_supply: f64,
    pub extra_performance: Option<f64>,
    pub overall_performance: Option<f64>,
}

/// Annual regional demand times the university's share of regional staff;
/// zero when the region has no staff at all.
pub fn expected_intra_supply(
    registry: &Registry,
    ledger: &CollabLedger,
    university: &UniversityId,
    sds: &SdsId,
) -> Result<f64> {
    let region = registry.university_region(university)?.clone();
    let staff = registry.staff_count(university, sds)?;
    let regional = registry.regional_staff(&region, sds)?;
    if regional == 0.0 {
        return Ok(0.0);
    }
    let demand = annual_regional_demand(ledger, registry, &region, sds)?;
    Ok(demand * staff / regional)
}

/// Sum over every other region of its annual extra-regional demand times the
/// university's share of the staff outside that region. A region whose
/// complement staff is zero contributes nothing and raises a data warning.
pub fn expected_extra_supply(
    registry: &Registry,
    ledger: &CollabLedger,
    university: &UniversityId,
    sds: &SdsId,
) -> Result<f64> {
    let home = registry.university_region(university)?.clone();
    let staff = registry.staff_count(university, sds)?;
    if staff == 0.0 {
        return Ok(0.0);
    }
    let national = registry.national_staff(sds);
    let mut expected = 0.0;
    for region in registry.regions() {
        if region.id == home {
            continue;
        }
        let complement = national - registry.regional_staff(&region.id, sds)?;
        if complement <= 0.0 {
            log::warn!(
                "region '{}' holds all staff for sds '{sds}'; its extra-regional demand cannot be distributed",
                region.id
            );
            continue;
        }
        let demand = annual_extra_regional_demand(ledger, registry, &region.id, sds)?;
        expected += demand * staff / complement;
    }
    Ok(expected)
}

/// Supply over expected supply; `None` when the home region's demand or the
/// university's staff is zero.
pub fn intra_performance(
    annual_regional_demand: f64,
    staff: f64,
    annual_intra_supply: f64,
    expected_intra_supply: f64,
) -> Option<f64> {
    if annual_regional_demand == 0.0 || staff == 0.0 {
        return None;
    }
    Some(annual_intra_supply / expected_intra_supply)
}

/// Supply over expected supply; `None` when the expected supply is zero.
pub fn extra_performance(annual_extra_supply: f64, expected_extra_supply: f64) -> Option<f64> {
    if expected_extra_supply == 0.0 {
        return None;
    }
    Some(annual_extra_supply / expected_extra_supply)
}

/// Weighted mean of the two components; `None` if either is undefined.
pub fn overall_performance(
    intra: Option<f64>,
    extra: Option<f64>,
    weight_extra: f64,
) -> Option<f64> {
    match (intra, extra) {
        (Some(i), Some(e)) => Some((1.0 - weight_extra) * i + weight_extra * e),
        _ => None,
    }
}

/// Compute the full indicator table for one sector: one row per university
/// active in it (staffed or with at least one event), sorted by university
/// id.
pub fn performance_table(
    registry: &Registry,
    ledger: &CollabLedger,
    sds: &SdsId,
    weight_extra: f64,
) -> Result<Vec<PerformanceRow>> {
    registry.sds_entry(sds)?;
    if !(0.0..=1.0).contains(&weight_extra) {
        return Err(Error::Validation(format!(
            "weight_extra must lie in [0, 1], got {weight_extra}"
        )));
    }
    let years = ledger.window.years();
    let mut supply: BTreeMap<UniversityId, (u64, u64)> = BTreeMap::new();
    for event in &ledger.sds_events {
        if event.sds_id != *sds {
            continue;
        }
        let entry = supply.entry(event.university_id.clone()).or_default();
        match event.locality {
            Locality::Intra => entry.0 += 1,
            Locality::Extra => entry.1 += 1,
        }
    }
    let mut active: BTreeSet<UniversityId> = supply.keys().cloned().collect();
    for u in registry.universities() {
        if registry.staff_count(&u.id, sds)? > 0.0 {
            active.insert(u.id.clone());
        }
    }
    let mut rows = Vec::with_capacity(active.len());
    for university in active {
        let region = registry.university_region(&university)?.clone();
        let staff = registry.staff_count(&university, sds)?;
        let demand = annual_regional_demand(ledger, registry, &region, sds)?;
        let (intra_count, extra_count) = supply.get(&university).copied().unwrap_or((0, 0));
        let annual_intra_supply = intra_count as f64 / years;
        let annual_extra_supply = extra_count as f64 / years;
        let expected_intra = expected_intra_supply(registry, ledger, &university, sds)?;
        let expected_extra = expected_extra_supply(registry, ledger, &university, sds)?;
        let intra = intra_performance(demand, staff, annual_intra_supply, expected_intra);
        let extra = extra_performance(annual_extra_supply, expected_extra);
        rows.push(PerformanceRow {
            university_id: university,
            sds_id: sds.clone(),
            region_id: region,
            annual_regional_demand: demand,
            annual_intra_supply,
            expected_intra_supply: expected_intra,
            intra_performance: intra,
            annual_extra_supply,
            expected_extra_supply: expected_extra,
            extra_performance: extra,
            overall_performance: overall_performance(intra, extra, weight_extra),
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Quadrant {
    I,
    II,
    III,
    IV,
}

impl fmt::Display for Quadrant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Quadrant::I => "I",
            Quadrant::II => "II",
            Quadrant::III => "III",
            Quadrant::IV => "IV",
        };
        f.write_str(s)
    }
}

/// Median split of the performance plane over the classified population.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuadrantReport {
    pub median_intra: f64,
    pub median_extra: f64,
    /// (university, intra, extra, quadrant), sorted by university id.
    pub assignments: Vec<(UniversityId, f64, f64, Quadrant)>,
}

impl QuadrantReport {
    pub fn quadrant_of(&self, university: &UniversityId) -> Option<Quadrant> {
        self.assignments
            .iter()
            .find(|(u, _, _, _)| u == university)
            .map(|(_, _, _, q)| *q)
    }
}

fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    }
}

/// Classify the population of rows with defined intra performance and at
/// least one collaboration. Rows whose extra performance is undefined cannot
/// be positioned on the vertical axis and are excluded with a warning. On
/// each axis, values at or above the median go to the high side.
pub fn quadrant_classify(rows: &[PerformanceRow]) -> Result<QuadrantReport> {
    let mut population: Vec<(&UniversityId, f64, f64)> = Vec::new();
    for row in rows {
        let Some(intra) = row.intra_performance else {
            continue;
        };
        if row.annual_intra_supply + row.annual_extra_supply <= 0.0 {
            continue;
        }
        let Some(extra) = row.extra_performance else {
            log::warn!(
                "university '{}' has undefined extra performance; excluded from quadrants",
                row.university_id
            );
            continue;
        };
        population.push((&row.university_id, intra, extra));
    }
    if population.is_empty() {
        return Err(Error::Computation(
            "quadrant classification requires a non-empty population".into(),
        ));
    }
    let mut xs: Vec<f64> = population.iter().map(|(_, x, _)| *x).collect();
    let mut ys: Vec<f64> = population.iter().map(|(_, _, y)| *y).collect();
    xs.sort_by(|a, b| a.total_cmp(b));
    ys.sort_by(|a, b| a.total_cmp(b));
    let median_intra = median(&xs);
    let median_extra = median(&ys);
    let assignments = population
        .into_iter()
        .map(|(u, x, y)| {
            let quadrant = match (x >= median_intra, y >= median_extra) {
                (true, true) => Quadrant::II,
                (false, true) => Quadrant::I,
                (false, false) => Quadrant::III,
                (true, false) => Quadrant::IV,
            };
            (u.clone(), x, y, quadrant)
        })
        .collect();
    Ok(QuadrantReport {
        median_intra,
        median_extra,
        assignments,
    })
}
