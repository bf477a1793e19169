//! Ranking and summary statistics, the regional focus view, and the emitters
//! producing byte-deterministic CSV / JSON / plot-data artifacts.
//!
//! CSV output is RFC-4180 with a fixed, documented column order per table
//! kind; real numbers are rounded half-up to two decimals and undefined
//! values print as the literal `NA`. The JSON mirror carries unrounded
//! values with `null` for undefined. Column orders and schema versions are
//! documented in `docs/schemas.md`.

use crate::collab::{CollabLedger, Locality};
use crate::error::{Error, Result};
use crate::ids::{RegionId, SdsId, SeatId, UniversityId};
use crate::market::{MarketRow, MarketSummary};
use crate::performance::{PerformanceRow, QuadrantReport};
use crate::registry::Registry;
use serde::Serialize;
use std::collections::BTreeMap;
use std::io::Write;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RankDirection {
    Descending,
    Ascending,
}

/// Competition ranking: equal values share a rank and the next distinct
/// value's rank is one plus the count of strictly better keys, so three
/// leaders print 1, 1, 1 and the runner-up prints 4. Undefined values
/// receive an undefined rank.
pub fn competition_rank(
    values: &[Option<f64>],
    direction: RankDirection,
) -> Result<Vec<Option<u64>>> {
    let defined: Vec<f64> = values.iter().copied().flatten().collect();
    if defined.is_empty() {
        return Err(Error::Computation(
            "ranking requires at least one defined value".into(),
        ));
    }
    Ok(values
        .iter()
        .map(|v| {
            v.map(|value| {
                let better = defined
                    .iter()
                    .filter(|&&other| match direction {
                        RankDirection::Descending => other > value,
                        RankDirection::Ascending => other < value,
                    })
                    .count();
                better as u64 + 1
            })
        })
        .collect())
}

/// Weighted mean over the defined values; an undefined value is excluded
/// together with its weight.
pub fn weighted_mean(values: &[Option<f64>], weights: &[f64]) -> Result<f64> {
    if values.len() != weights.len() {
        return Err(Error::Computation(format!(
            "weighted mean got {} values but {} weights",
            values.len(),
            weights.len()
        )));
    }
    let mut numerator = 0.0;
    let mut total_weight = 0.0;
    for (value, &weight) in values.iter().zip(weights) {
        if weight < 0.0 {
            return Err(Error::Computation(format!(
                "weights must be non-negative, got {weight}"
            )));
        }
        if let Some(v) = value {
            numerator += weight * v;
            total_weight += weight;
        }
    }
    if total_weight == 0.0 {
        return Err(Error::Computation(
            "weighted mean over zero total weight".into(),
        ));
    }
    Ok(numerator / total_weight)
}

/// Round half away from zero to two decimals, the rounding used in CSV
/// output.
pub fn round2(value: f64) -> f64 {
    let rounded = (value.abs() * 100.0 + 0.5).floor() / 100.0 * value.signum();
    if rounded == 0.0 {
        0.0
    } else {
        rounded
    }
}

fn fmt2(value: f64) -> String {
    format!("{:.2}", round2(value))
}

fn fmt2_opt(value: Option<f64>) -> String {
    value.map(fmt2).unwrap_or_else(|| "NA".to_owned())
}

fn fmt_rank(rank: Option<u64>) -> String {
    rank.map(|r| r.to_string()).unwrap_or_else(|| "NA".to_owned())
}

/// Everything drawn in the regional focus view for one (region, sector):
/// the region's enterprise seats with their event tallies, its universities
/// with staff, and the per-pair collaboration edges from both market sides.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionFocus {
    pub region_id: RegionId,
    pub sds_id: SdsId,
    pub enterprises: Vec<FocusSeat>,
    pub universities: Vec<FocusUniversity>,
    pub edges: Vec<FocusEdge>,
}

/// A seat of the focus region with at least one event.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FocusSeat {
    pub seat_id: SeatId,
    pub total: u64,
    pub intra: u64,
    pub extra: u64,
}

/// A university of the focus region active in the sector.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FocusUniversity {
    pub university_id: UniversityId,
    pub staff: f64,
    pub intra_events: u64,
    pub extra_events: u64,
}

/// One (university, seat) link touching the focus region on either side.
/// `partner_region_id` is the region of whichever end lies outside.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FocusEdge {
    pub university_id: UniversityId,
    pub seat_id: SeatId,
    pub locality: Locality,
    pub partner_region_id: Option<RegionId>,
    pub count: u64,
}

/// Build the focus view from the sector-level events touching the region.
pub fn region_focus(
    ledger: &CollabLedger,
    registry: &Registry,
    region: &RegionId,
    sds: &SdsId,
) -> Result<RegionFocus> {
    registry.region(region)?;
    registry.sds_entry(sds)?;
    let mut seats: BTreeMap<SeatId, (u64, u64)> = BTreeMap::new();
    let mut university_events: BTreeMap<UniversityId, (u64, u64)> = BTreeMap::new();
    let mut edges: BTreeMap<(UniversityId, SeatId), (Locality, Option<RegionId>, u64)> =
        BTreeMap::new();
    for event in &ledger.sds_events {
        if event.sds_id != *sds {
            continue;
        }
        let u_region = registry.university_region(&event.university_id)?;
        let s_region = registry.seat_region(&event.seat_id)?;
        let seat_side = s_region == region;
        let university_side = u_region == region;
        if !seat_side && !university_side {
            continue;
        }
        if seat_side {
            let entry = seats.entry(event.seat_id.clone()).or_default();
            match event.locality {
                Locality::Intra => entry.0 += 1,
                Locality::Extra => entry.1 += 1,
            }
        }
        if university_side {
            let entry = university_events
                .entry(event.university_id.clone())
                .or_default();
            match event.locality {
                Locality::Intra => entry.0 += 1,
                Locality::Extra => entry.1 += 1,
            }
        }
        let partner = match event.locality {
            Locality::Intra => None,
            Locality::Extra => Some(if seat_side {
                u_region.clone()
            } else {
                s_region.clone()
            }),
        };
        let edge = edges
            .entry((event.university_id.clone(), event.seat_id.clone()))
            .or_insert((event.locality, partner, 0));
        edge.2 += 1;
    }
    let mut universities = Vec::new();
    for u in registry.universities_in_region(region) {
        let staff = registry.staff_count(u, sds)?;
        let (intra_events, extra_events) = university_events.get(u).copied().unwrap_or((0, 0));
        if staff > 0.0 || intra_events + extra_events > 0 {
            universities.push(FocusUniversity {
                university_id: u.clone(),
                staff,
                intra_events,
                extra_events,
            });
        }
    }
    universities.sort_by(|a, b| a.university_id.cmp(&b.university_id));
    Ok(RegionFocus {
        region_id: region.clone(),
        sds_id: sds.clone(),
        enterprises: seats
            .into_iter()
            .map(|(seat_id, (intra, extra))| FocusSeat {
                seat_id,
                total: intra + extra,
                intra,
                extra,
            })
            .collect(),
        universities,
        edges: edges
            .into_iter()
            .map(|((university_id, seat_id), (locality, partner_region_id, count))| FocusEdge {
                university_id,
                seat_id,
                locality,
                partner_region_id,
                count,
            })
            .collect(),
    })
}

/// Output encodings. Plot data is a flat CSV meant for external charting and
/// exists only for the quadrant and focus artifacts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
    PlotData,
}

/// A computed table ready for emission.
#[derive(Debug, Clone, Copy)]
pub enum Artifact<'a> {
    Market(&'a [MarketRow], &'a MarketSummary),
    Correspondence(&'a [crate::market::CorrespondenceRow]),
    Performance(&'a [PerformanceRow]),
    Quadrants(&'a QuadrantReport),
    Focus(&'a RegionFocus),
}

impl Artifact<'_> {
    pub fn kind(&self) -> &'static str {
        match self {
            Artifact::Market(..) => "market",
            Artifact::Correspondence(_) => "correspondence",
            Artifact::Performance(_) => "performance",
            Artifact::Quadrants(_) => "quadrants",
            Artifact::Focus(_) => "focus",
        }
    }

    pub fn schema_version(&self) -> u32 {
        1
    }
}

/// Render the artifact into `out`. Identical inputs produce identical bytes.
pub fn emit(artifact: Artifact<'_>, format: Format, out: &mut dyn Write) -> Result<()> {
    match format {
        Format::Csv => emit_csv(artifact, out),
        Format::Json => emit_json(artifact, out),
        Format::PlotData => emit_plotdata(artifact, out),
    }
}

fn emit_csv(artifact: Artifact<'_>, out: &mut dyn Write) -> Result<()> {
    let mut writer = csv::WriterBuilder::new().from_writer(out);
    match artifact {
        Artifact::Market(rows, _) => {
            writer.write_record([
                "region_id",
                "n_universities",
                "university_collabs",
                "university_share",
                "rank_university_collabs",
                "n_enterprises",
                "enterprise_collabs",
                "enterprise_share",
                "rank_enterprise_collabs",
                "intra_collabs",
                "intra_share_university",
                "rank_intra_share_university",
                "intra_share_enterprise",
                "rank_intra_share_enterprise",
            ])?;
            for r in rows {
                writer.write_record([
                    r.region_id.as_str().to_owned(),
                    r.n_universities.to_string(),
                    r.university_collabs.to_string(),
                    fmt2(r.university_share),
                    fmt_rank(r.rank_university_collabs),
                    r.n_enterprises.to_string(),
                    r.enterprise_collabs.to_string(),
                    fmt2(r.enterprise_share),
                    fmt_rank(r.rank_enterprise_collabs),
                    r.intra_collabs.to_string(),
                    fmt2_opt(r.intra_share_university),
                    fmt_rank(r.rank_intra_share_university),
                    fmt2_opt(r.intra_share_enterprise),
                    fmt_rank(r.rank_intra_share_enterprise),
                ])?;
            }
        }
        Artifact::Correspondence(rows) => {
            writer.write_record([
                "university_id",
                "sds_id",
                "region_id",
                "staff",
                "staff_share",
                "annual_regional_demand",
                "demand_share",
                "university_correspondence",
                "region_correspondence",
            ])?;
            for r in rows {
                writer.write_record([
                    r.university_id.as_str().to_owned(),
                    r.sds_id.as_str().to_owned(),
                    r.region_id.as_str().to_owned(),
                    fmt2(r.staff),
                    fmt2_opt(r.staff_share),
                    fmt2(r.annual_regional_demand),
                    fmt2_opt(r.demand_share),
                    fmt2(r.university_correspondence),
                    fmt2(r.region_correspondence),
                ])?;
            }
        }
        Artifact::Performance(rows) => {
            writer.write_record([
                "university_id",
                "sds_id",
                "region_id",
                "annual_regional_demand",
                "annual_intra_supply",
                "expected_intra_supply",
                "intra_performance",
                "annual_extra_supply",
                "expected_extra_supply",
                "extra_performance",
                "overall_performance",
            ])?;
            for r in rows {
                writer.write_record([
                    r.university_id.as_str().to_owned(),
                    r.sds_id.as_str().to_owned(),
                    r.region_id.as_str().to_owned(),
                    fmt2(r.annual_regional_demand),
                    fmt2(r.annual_intra_supply),
                    fmt2(r.expected_intra_supply),
                    fmt2_opt(r.intra_performance),
                    fmt2(r.annual_extra_supply),
                    fmt2(r.expected_extra_supply),
                    fmt2_opt(r.extra_performance),
                    fmt2_opt(r.overall_performance),
                ])?;
            }
        }
        Artifact::Quadrants(report) => {
            writer.write_record(["university_id", "intra_performance", "extra_performance", "quadrant"])?;
            for (u, x, y, q) in &report.assignments {
                writer.write_record([
                    u.as_str().to_owned(),
                    fmt2(*x),
                    fmt2(*y),
                    q.to_string(),
                ])?;
            }
        }
        Artifact::Focus(focus) => {
            writer.write_record([
                "record",
                "university_id",
                "seat_id",
                "partner_region_id",
                "staff",
                "intra",
                "extra",
                "count",
            ])?;
            for u in &focus.universities {
                writer.write_record([
                    "university".to_owned(),
                    u.university_id.as_str().to_owned(),
                    String::new(),
                    String::new(),
                    fmt2(u.staff),
                    u.intra_events.to_string(),
                    u.extra_events.to_string(),
                    String::new(),
                ])?;
            }
            for s in &focus.enterprises {
                writer.write_record([
                    "enterprise".to_owned(),
                    String::new(),
                    s.seat_id.as_str().to_owned(),
                    String::new(),
                    String::new(),
                    s.intra.to_string(),
                    s.extra.to_string(),
                    s.total.to_string(),
                ])?;
            }
            for e in &focus.edges {
                writer.write_record([
                    "edge".to_owned(),
                    e.university_id.as_str().to_owned(),
                    e.seat_id.as_str().to_owned(),
                    e.partner_region_id
                        .as_ref()
                        .map(|r| r.as_str().to_owned())
                        .unwrap_or_default(),
                    String::new(),
                    String::new(),
                    String::new(),
                    e.count.to_string(),
                ])?;
            }
        }
    }
    writer.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct JsonDoc<T: Serialize> {
    schema: &'static str,
    version: u32,
    #[serde(flatten)]
    body: T,
}

fn write_json<T: Serialize>(kind: &'static str, version: u32, body: T, out: &mut dyn Write) -> Result<()> {
    let doc = JsonDoc {
        schema: kind,
        version,
        body,
    };
    serde_json::to_writer(&mut *out, &doc)
        .map_err(|e| Error::Internal(format!("json serialization: {e}")))?;
    out.write_all(b"\n")?;
    Ok(())
}

fn emit_json(artifact: Artifact<'_>, out: &mut dyn Write) -> Result<()> {
    #[derive(Serialize)]
    struct MarketBody<'a> {
        rows: &'a [MarketRow],
        summary: &'a MarketSummary,
    }
    #[derive(Serialize)]
    struct Rows<'a, T: Serialize> {
        rows: &'a [T],
    }
    let version = artifact.schema_version();
    match artifact {
        Artifact::Market(rows, summary) => {
            write_json("market", version, MarketBody { rows, summary }, out)
        }
        Artifact::Correspondence(rows) => write_json("correspondence", version, Rows { rows }, out),
        Artifact::Performance(rows) => write_json("performance", version, Rows { rows }, out),
        Artifact::Quadrants(report) => write_json("quadrants", version, report, out),
        Artifact::Focus(focus) => write_json("focus", version, focus, out),
    }
}

fn emit_plotdata(artifact: Artifact<'_>, out: &mut dyn Write) -> Result<()> {
    match artifact {
        Artifact::Quadrants(report) => {
            let mut writer = csv::WriterBuilder::new().from_writer(out);
            writer.write_record(["x", "y", "label"])?;
            for (u, x, y, _) in &report.assignments {
                // unrounded coordinates; rounding is the renderer's choice
                writer.write_record([x.to_string(), y.to_string(), u.as_str().to_owned()])?;
            }
            writer.flush()?;
            Ok(())
        }
        Artifact::Focus(_) => emit_csv(artifact, out),
        other => Err(Error::Validation(format!(
            "plot data output is not defined for the {} table",
            other.kind()
        ))),
    }
}
