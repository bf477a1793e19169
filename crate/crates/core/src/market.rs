//! Regional market aggregates and demand/supply correspondence indicators.
//!
//! Demand is denominated in sector-enterprise events: the annual regional
//! demand for a sector is the mean yearly number of sds-enterprise events
//! whose seat lies in the region. The degree of correspondence compares
//! `alpha` researchers-per-collaboration worth of staff against that demand;
//! positive values indicate a surplus of supply, negative a shortage.

use crate::collab::{CollabLedger, Locality};
use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::ids::{RegionId, SdsId, UniversityId};
use crate::registry::Registry;
use crate::report::{competition_rank, weighted_mean, RankDirection};
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet};

/// Default researchers-per-collaboration coefficient.
pub const DEFAULT_ALPHA: f64 = 0.5;

/// Raw per-region event counts feeding the market table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RegionCounts {
    pub region_id: RegionId,
    /// Universities of the region with at least one ue event.
    pub n_universities: u64,
    /// Ue events whose university is in the region.
    pub university_collabs: u64,
    /// Seats of the region with at least one ue event.
    pub n_enterprises: u64,
    /// Ue events whose seat is in the region.
    pub enterprise_collabs: u64,
    /// Ue events with both sides in the region.
    pub intra_collabs: u64,
}

/// One row of the regional market table with derived shares and ranks.
/// Percentage columns are `None` where their denominator is zero.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarketRow {
    pub region_id: RegionId,
    pub n_universities: u64,
    pub university_collabs: u64,
    /// Percent of the national ue event total (university side).
    pub university_share: f64,
    pub rank_university_collabs: Option<u64>,
    pub n_enterprises: u64,
    pub enterprise_collabs: u64,
    /// Percent of the national ue event total (enterprise side).
    pub enterprise_share: f64,
    pub rank_enterprise_collabs: Option<u64>,
    pub intra_collabs: u64,
    /// Intra events as percent of the region's university collaborations.
    pub intra_share_university: Option<f64>,
    pub rank_intra_share_university: Option<u64>,
    /// Intra events as percent of the region's enterprise collaborations.
    pub intra_share_enterprise: Option<f64>,
    pub rank_intra_share_enterprise: Option<u64>,
}

/// Summary line of the market table: totals plus the share-weighted means of
/// the two intra percentage columns (weights are each region's share of the
/// national collaboration total on the corresponding side).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarketSummary {
    pub total_university_collabs: u64,
    pub total_enterprise_collabs: u64,
    pub total_intra_collabs: u64,
    pub weighted_intra_share_university: Option<f64>,
    pub weighted_intra_share_enterprise: Option<f64>,
}

/// Derive the market table from per-region counts. Regions with zero events
/// on both sides are omitted; rows come out sorted by region id.
pub fn market_rows_from_counts(counts: &[RegionCounts]) -> Vec<MarketRow> {
    let mut counts: Vec<&RegionCounts> = counts
        .iter()
        .filter(|c| c.university_collabs > 0 || c.enterprise_collabs > 0)
        .collect();
    if counts.is_empty() {
        return Vec::new();
    }
    counts.sort_by(|a, b| a.region_id.cmp(&b.region_id));

    let total_university: u64 = counts.iter().map(|c| c.university_collabs).sum();
    let total_enterprise: u64 = counts.iter().map(|c| c.enterprise_collabs).sum();

    let pct = |part: u64, whole: u64| -> Option<f64> {
        (whole > 0).then(|| part as f64 / whole as f64 * 100.0)
    };

    let intra_share_university: Vec<Option<f64>> = counts
        .iter()
        .map(|c| pct(c.intra_collabs, c.university_collabs))
        .collect();
    let intra_share_enterprise: Vec<Option<f64>> = counts
        .iter()
        .map(|c| pct(c.intra_collabs, c.enterprise_collabs))
        .collect();

    let rank_counts = |extract: fn(&RegionCounts) -> u64| -> Vec<Option<u64>> {
        let values: Vec<Option<f64>> = counts.iter().map(|c| Some(extract(c) as f64)).collect();
        competition_rank(&values, RankDirection::Descending)
            .expect("count columns always carry defined values")
    };
    let rank_univ = rank_counts(|c| c.university_collabs);
    let rank_ent = rank_counts(|c| c.enterprise_collabs);
    let rank_intra_u = competition_rank(&intra_share_university, RankDirection::Descending)
        .unwrap_or_else(|_| vec![None; counts.len()]);
    let rank_intra_e = competition_rank(&intra_share_enterprise, RankDirection::Descending)
        .unwrap_or_else(|_| vec![None; counts.len()]);

    counts
        .iter()
        .enumerate()
        .map(|(i, c)| MarketRow {
            region_id: c.region_id.clone(),
            n_universities: c.n_universities,
            university_collabs: c.university_collabs,
            university_share: pct(c.university_collabs, total_university).unwrap_or(0.0),
            rank_university_collabs: rank_univ[i],
            n_enterprises: c.n_enterprises,
            enterprise_collabs: c.enterprise_collabs,
            enterprise_share: pct(c.enterprise_collabs, total_enterprise).unwrap_or(0.0),
            rank_enterprise_collabs: rank_ent[i],
            intra_collabs: c.intra_collabs,
            intra_share_university: intra_share_university[i],
            rank_intra_share_university: rank_intra_u[i],
            intra_share_enterprise: intra_share_enterprise[i],
            rank_intra_share_enterprise: rank_intra_e[i],
        })
        .collect()
}

/// Totals and weighted means over a derived market table.
pub fn market_summary(rows: &[MarketRow]) -> MarketSummary {
    let total_university: u64 = rows.iter().map(|r| r.university_collabs).sum();
    let total_enterprise: u64 = rows.iter().map(|r| r.enterprise_collabs).sum();
    let total_intra: u64 = rows.iter().map(|r| r.intra_collabs).sum();
    let univ_values: Vec<Option<f64>> = rows.iter().map(|r| r.intra_share_university).collect();
    let univ_weights: Vec<f64> = rows.iter().map(|r| r.university_collabs as f64).collect();
    let ent_values: Vec<Option<f64>> = rows.iter().map(|r| r.intra_share_enterprise).collect();
    let ent_weights: Vec<f64> = rows.iter().map(|r| r.enterprise_collabs as f64).collect();
    MarketSummary {
        total_university_collabs: total_university,
        total_enterprise_collabs: total_enterprise,
        total_intra_collabs: total_intra,
        weighted_intra_share_university: weighted_mean(&univ_values, &univ_weights).ok(),
        weighted_intra_share_enterprise: weighted_mean(&ent_values, &ent_weights).ok(),
    }
}

/// Count ue events per region and derive the market table.
pub fn regional_market_table(ledger: &CollabLedger, registry: &Registry) -> Result<Vec<MarketRow>> {
    #[derive(Default)]
    struct Acc {
        universities: BTreeSet<UniversityId>,
        university_collabs: u64,
        seats: BTreeSet<crate::ids::SeatId>,
        enterprise_collabs: u64,
        intra: u64,
    }
    let mut per_region: BTreeMap<RegionId, Acc> = BTreeMap::new();
    for event in &ledger.ue_events {
        let u_region = registry.university_region(&event.university_id)?.clone();
        let s_region = registry.seat_region(&event.seat_id)?.clone();
        {
            let acc = per_region.entry(u_region.clone()).or_default();
            acc.universities.insert(event.university_id.clone());
            acc.university_collabs += 1;
            if event.locality == Locality::Intra {
                acc.intra += 1;
            }
        }
        let acc = per_region.entry(s_region).or_default();
        acc.seats.insert(event.seat_id.clone());
        acc.enterprise_collabs += 1;
    }
    let counts: Vec<RegionCounts> = per_region
        .into_iter()
        .map(|(region_id, acc)| RegionCounts {
            region_id,
            n_universities: acc.universities.len() as u64,
            university_collabs: acc.university_collabs,
            n_enterprises: acc.seats.len() as u64,
            enterprise_collabs: acc.enterprise_collabs,
            intra_collabs: acc.intra,
        })
        .collect();
    Ok(market_rows_from_counts(&counts))
}

/// Mean annual number of sds-enterprise events between enterprises of the
/// region and universities anywhere.
pub fn annual_regional_demand(
    ledger: &CollabLedger,
    registry: &Registry,
    region: &RegionId,
    sds: &SdsId,
) -> Result<f64> {
    registry.region(region)?;
    let mut count = 0u64;
    for event in &ledger.sds_events {
        if event.sds_id == *sds && registry.seat_region(&event.seat_id)? == region {
            count += 1;
        }
    }
    Ok(count as f64 / ledger.window.years())
}

/// Mean annual number of sds-enterprise events between enterprises of the
/// region and extra-regional universities.
pub fn annual_extra_regional_demand(
    ledger: &CollabLedger,
    registry: &Registry,
    region: &RegionId,
    sds: &SdsId,
) -> Result<f64> {
    registry.region(region)?;
    let mut count = 0u64;
    for event in &ledger.sds_events {
        if event.sds_id == *sds
            && event.locality == Locality::Extra
            && registry.seat_region(&event.seat_id)? == region
        {
            count += 1;
        }
    }
    Ok(count as f64 / ledger.window.years())
}

/// `alpha * staff - annual regional demand` for the university's home region.
pub fn university_correspondence(
    registry: &Registry,
    ledger: &CollabLedger,
    university: &UniversityId,
    sds: &SdsId,
    alpha: f64,
) -> Result<f64> {
    let region = registry.university_region(university)?.clone();
    let staff = registry.staff_count(university, sds)?;
    let demand = annual_regional_demand(ledger, registry, &region, sds)?;
    Ok(alpha * staff - demand)
}

/// `alpha * regional staff - annual regional demand`.
pub fn region_correspondence(
    registry: &Registry,
    ledger: &CollabLedger,
    region: &RegionId,
    sds: &SdsId,
    alpha: f64,
) -> Result<f64> {
    let staff = registry.regional_staff(region, sds)?;
    let demand = annual_regional_demand(ledger, registry, region, sds)?;
    Ok(alpha * staff - demand)
}

/// One row of the correspondence table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrespondenceRow {
    pub university_id: UniversityId,
    pub sds_id: SdsId,
    pub region_id: RegionId,
    pub staff: f64,
    /// Percent of the national staff total for the sector.
    pub staff_share: Option<f64>,
    pub annual_regional_demand: f64,
    /// Percent of the summed regional demands for the sector.
    pub demand_share: Option<f64>,
    pub university_correspondence: f64,
    pub region_correspondence: f64,
}

/// Correspondence rows for every university active in the sector (staffed or
/// with at least one event), sorted by university id.
pub fn correspondence_table(
    registry: &Registry,
    ledger: &CollabLedger,
    sds: &SdsId,
    alpha: f64,
) -> Result<Vec<CorrespondenceRow>> {
    registry.sds_entry(sds)?;
    let mut active: BTreeSet<UniversityId> = BTreeSet::new();
    for u in registry.universities() {
        if registry.staff_count(&u.id, sds)? > 0.0 {
            active.insert(u.id.clone());
        }
    }
    for event in &ledger.sds_events {
        if event.sds_id == *sds {
            active.insert(event.university_id.clone());
        }
    }
    let national_staff = registry.national_staff(sds);
    let mut demand_cache: BTreeMap<RegionId, f64> = BTreeMap::new();
    for region in registry.regions() {
        demand_cache.insert(
            region.id.clone(),
            annual_regional_demand(ledger, registry, &region.id, sds)?,
        );
    }
    let total_demand: f64 = demand_cache.values().sum();
    let mut rows = Vec::with_capacity(active.len());
    for university in active {
        let region = registry.university_region(&university)?.clone();
        let staff = registry.staff_count(&university, sds)?;
        let demand = demand_cache[&region];
        rows.push(CorrespondenceRow {
            university_id: university.clone(),
            sds_id: sds.clone(),
            region_id: region.clone(),
            staff,
            staff_share: (national_staff > 0.0).then(|| staff / national_staff * 100.0),
            annual_regional_demand: demand,
            demand_share: (total_demand > 0.0).then(|| demand / total_demand * 100.0),
            university_correspondence: alpha * staff - demand,
            region_correspondence: region_correspondence(registry, ledger, &region, sds, alpha)?,
        });
    }
    Ok(rows)
}

/// Reciprocal of the mean number of distinct university authors per accepted
/// co-publication; with `sds` given, restricted to publications carrying at
/// least one author of that sector (counting only that sector's authors).
pub fn calibrate_alpha(corpus: &Corpus, sds: Option<&SdsId>) -> Result<f64> {
    let mut publications = 0u64;
    let mut authors = 0u64;
    for publication in &corpus.publications {
        let count = match sds {
            None => publication.university_author_count(&corpus.in_scope_sds),
            Some(sds) => {
                let only: BTreeSet<SdsId> = [sds.clone()].into_iter().collect();
                publication.university_author_count(&only)
            }
        };
        if count > 0 {
            publications += 1;
            authors += count as u64;
        }
    }
    if publications == 0 || authors == 0 {
        return Err(Error::Computation(
            "alpha calibration requires at least one in-scope publication".into(),
        ));
    }
    Ok(publications as f64 / authors as f64)
}
