//! Entity catalog every downstream computation resolves against: regions,
//! universities, enterprise seats, disciplinary sectors and staff rosters.
//!
//! The registry is immutable after loading and safe to share across workers.

use crate::error::{Error, Result};
use crate::ids::{RegionId, SdsId, SeatId, UniversityId};
use indexmap::IndexMap;
use serde::Deserialize;
use std::collections::HashMap;
use std::fs::File;
use std::path::Path;

#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    pub id: RegionId,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct University {
    pub id: UniversityId,
    pub name: String,
    pub region_id: RegionId,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnterpriseSeat {
    pub id: SeatId,
    pub name: String,
    pub region_id: RegionId,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sds {
    pub id: SdsId,
    pub name: String,
    pub discipline: String,
}

/// One staff roster entry: triennium-averaged researcher headcount of a
/// university in one sector. Counts are reals because of the averaging.
#[derive(Debug, Clone, PartialEq)]
pub struct StaffEntry {
    pub university_id: UniversityId,
    pub sds_id: SdsId,
    pub researcher_count: f64,
}

/// Validated, immutable entity catalog.
///
/// Referential integrity holds by construction: every `region_id` resolves,
/// every staff entry references a known university and sector. A missing
/// roster key means a staff count of zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Registry {
    regions: IndexMap<RegionId, Region>,
    universities: IndexMap<UniversityId, University>,
    seats: IndexMap<SeatId, EnterpriseSeat>,
    sds: IndexMap<SdsId, Sds>,
    staff: HashMap<(UniversityId, SdsId), f64>,
    universities_by_region: HashMap<RegionId, Vec<UniversityId>>,
}

impl Registry {
    /// Build a registry from in-memory parts, checking id uniqueness and
    /// referential integrity.
    pub fn from_parts(
        regions: Vec<Region>,
        universities: Vec<University>,
        seats: Vec<EnterpriseSeat>,
        sds: Vec<Sds>,
        staff: Vec<StaffEntry>,
    ) -> Result<Self> {
        let mut region_map = IndexMap::new();
        for r in regions {
            if region_map.insert(r.id.clone(), r.clone()).is_some() {
                return Err(Error::Validation(format!("duplicate region id '{}'", r.id)));
            }
        }
        let mut university_map = IndexMap::new();
        let mut universities_by_region: HashMap<RegionId, Vec<UniversityId>> = HashMap::new();
        for u in universities {
            if !region_map.contains_key(&u.region_id) {
                return Err(Error::Validation(format!(
                    "university '{}' references unknown region '{}'",
                    u.id, u.region_id
                )));
            }
            universities_by_region
                .entry(u.region_id.clone())
                .or_default()
                .push(u.id.clone());
            if university_map.insert(u.id.clone(), u.clone()).is_some() {
                return Err(Error::Validation(format!(
                    "duplicate university id '{}'",
                    u.id
                )));
            }
        }
        let mut seat_map = IndexMap::new();
        for s in seats {
            if !region_map.contains_key(&s.region_id) {
                return Err(Error::Validation(format!(
                    "enterprise seat '{}' references unknown region '{}'",
                    s.id, s.region_id
                )));
            }
            if seat_map.insert(s.id.clone(), s.clone()).is_some() {
                return Err(Error::Validation(format!(
                    "duplicate enterprise seat id '{}'",
                    s.id
                )));
            }
        }
        let mut sds_map = IndexMap::new();
        for s in sds {
            if sds_map.insert(s.id.clone(), s.clone()).is_some() {
                return Err(Error::Validation(format!("duplicate sds id '{}'", s.id)));
            }
        }
        let mut staff_map = HashMap::new();
        for entry in staff {
            if !university_map.contains_key(&entry.university_id) {
                return Err(Error::Validation(format!(
                    "staff entry references unknown university '{}'",
                    entry.university_id
                )));
            }
            if !sds_map.contains_key(&entry.sds_id) {
                return Err(Error::Validation(format!(
                    "staff entry references unknown sds '{}'",
                    entry.sds_id
                )));
            }
            if entry.researcher_count.is_nan() || entry.researcher_count < 0.0 {
                return Err(Error::Validation(format!(
                    "staff count for ({}, {}) must be a non-negative number, got {}",
                    entry.university_id, entry.sds_id, entry.researcher_count
                )));
            }
            let key = (entry.university_id.clone(), entry.sds_id.clone());
            if staff_map.insert(key, entry.researcher_count).is_some() {
                return Err(Error::Validation(format!(
                    "duplicate staff entry for ({}, {})",
                    entry.university_id, entry.sds_id
                )));
            }
        }
        Ok(Registry {
            regions: region_map,
            universities: university_map,
            seats: seat_map,
            sds: sds_map,
            staff: staff_map,
            universities_by_region,
        })
    }

    pub fn regions(&self) -> impl Iterator<Item = &Region> {
        self.regions.values()
    }

    pub fn universities(&self) -> impl Iterator<Item = &University> {
        self.universities.values()
    }

    pub fn seats(&self) -> impl Iterator<Item = &EnterpriseSeat> {
        self.seats.values()
    }

    pub fn sds(&self) -> impl Iterator<Item = &Sds> {
        self.sds.values()
    }

    pub fn region(&self, id: &RegionId) -> Result<&Region> {
        self.regions
            .get(id)
            .ok_or_else(|| Error::unknown_id("region", id.as_str()))
    }

    pub fn university(&self, id: &UniversityId) -> Result<&University> {
        self.universities
            .get(id)
            .ok_or_else(|| Error::unknown_id("university", id.as_str()))
    }

    pub fn seat(&self, id: &SeatId) -> Result<&EnterpriseSeat> {
        self.seats
            .get(id)
            .ok_or_else(|| Error::unknown_id("enterprise seat", id.as_str()))
    }

    pub fn sds_entry(&self, id: &SdsId) -> Result<&Sds> {
        self.sds
            .get(id)
            .ok_or_else(|| Error::unknown_id("sds", id.as_str()))
    }

    pub fn has_university(&self, id: &UniversityId) -> bool {
        self.universities.contains_key(id)
    }

    pub fn has_seat(&self, id: &SeatId) -> bool {
        self.seats.contains_key(id)
    }

    pub fn has_sds(&self, id: &SdsId) -> bool {
        self.sds.contains_key(id)
    }

    pub fn university_region(&self, id: &UniversityId) -> Result<&RegionId> {
        Ok(&self.university(id)?.region_id)
    }

    pub fn seat_region(&self, id: &SeatId) -> Result<&RegionId> {
        Ok(&self.seat(id)?.region_id)
    }

    /// Universities located in `region`, in catalog order.
    pub fn universities_in_region(&self, region: &RegionId) -> &[UniversityId] {
        self.universities_by_region
            .get(region)
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    /// Roster headcount of one university in one sector; 0 when the roster
    /// has no entry for the pair.
    pub fn staff_count(&self, university: &UniversityId, sds: &SdsId) -> Result<f64> {
        self.university(university)?;
        Ok(self
            .staff
            .get(&(university.clone(), sds.clone()))
            .copied()
            .unwrap_or(0.0))
    }

    /// Total headcount in `sds` over all universities of `region`.
    pub fn regional_staff(&self, region: &RegionId, sds: &SdsId) -> Result<f64> {
        self.region(region)?;
        Ok(self
            .universities_in_region(region)
            .iter()
            .map(|u| {
                self.staff
                    .get(&(u.clone(), sds.clone()))
                    .copied()
                    .unwrap_or(0.0)
            })
            .sum())
    }

    /// Total headcount in `sds` over all regions.
    pub fn national_staff(&self, sds: &SdsId) -> f64 {
        self.staff
            .iter()
            .filter(|((_, s), _)| s == sds)
            .map(|(_, count)| count)
            .sum()
    }

    /// Copy of the registry with every staff count multiplied by `factor`.
    /// Used for sensitivity checks; the expected-supply indicators are
    /// invariant under this scaling.
    pub fn scale_staff(&self, factor: f64) -> Registry {
        let mut scaled = self.clone();
        for count in scaled.staff.values_mut() {
            *count *= factor;
        }
        scaled
    }
}

#[derive(Debug, Deserialize)]
struct RegionRow {
    id: String,
    name: String,
}

#[derive(Debug, Deserialize)]
struct UniversityRow {
    id: String,
    name: String,
    region_id: String,
}

#[derive(Debug, Deserialize)]
struct SeatRow {
    id: String,
    name: String,
    region_id: String,
}

#[derive(Debug, Deserialize)]
struct SdsRow {
    id: String,
    name: String,
    discipline: String,
}

#[derive(Debug, Deserialize)]
struct StaffRow {
    university_id: String,
    sds_id: String,
    researcher_count: f64,
}

fn read_rows<T: serde::de::DeserializeOwned>(dir: &Path, file: &str) -> Result<Vec<(u64, T)>> {
    let path = dir.join(file);
    let handle = File::open(&path).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        ))
    })?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(handle);
    let mut rows = Vec::new();
    for record in reader.deserialize::<T>() {
        match record {
            Ok(row) => {
                // csv positions are byte-based; recompute the 1-based data
                // line from the row count (header is line 1).
                let line = rows.len() as u64 + 2;
                rows.push((line, row));
            }
            Err(e) => {
                let line = e
                    .position()
                    .map(|p| p.line())
                    .unwrap_or(rows.len() as u64 + 2);
                return Err(Error::Parse {
                    file: file.to_owned(),
                    line,
                    message: e.to_string(),
                });
            }
        }
    }
    Ok(rows)
}

fn check_unique(kind: &str, file: &str, rows: &[(u64, &str)]) -> Result<()> {
    let mut seen: HashMap<&str, u64> = HashMap::new();
    for (line, id) in rows {
        if let Some(first) = seen.insert(id, *line) {
            return Err(Error::Validation(format!(
                "duplicate {kind} id '{id}' in {file} (rows at lines {first} and {line})"
            )));
        }
    }
    Ok(())
}

/// Load and validate a registry from a directory of CSV files:
/// `regions.csv`, `universities.csv`, `enterprises.csv`, `sds.csv` and
/// `staff.csv`, each UTF-8 with a header row.
pub fn load_registry(dir: impl AsRef<Path>) -> Result<Registry> {
    let dir = dir.as_ref();
    let regions = read_rows::<RegionRow>(dir, "regions.csv")?;
    let universities = read_rows::<UniversityRow>(dir, "universities.csv")?;
    let seats = read_rows::<SeatRow>(dir, "enterprises.csv")?;
    let sds = read_rows::<SdsRow>(dir, "sds.csv")?;
    let staff = read_rows::<StaffRow>(dir, "staff.csv")?;

    check_unique(
        "region",
        "regions.csv",
        &regions.iter().map(|(l, r)| (*l, r.id.as_str())).collect::<Vec<_>>(),
    )?;
    check_unique(
        "university",
        "universities.csv",
        &universities.iter().map(|(l, r)| (*l, r.id.as_str())).collect::<Vec<_>>(),
    )?;
    check_unique(
        "enterprise seat",
        "enterprises.csv",
        &seats.iter().map(|(l, r)| (*l, r.id.as_str())).collect::<Vec<_>>(),
    )?;
    check_unique(
        "sds",
        "sds.csv",
        &sds.iter().map(|(l, r)| (*l, r.id.as_str())).collect::<Vec<_>>(),
    )?;

    Registry::from_parts(
        regions
            .into_iter()
            .map(|(_, r)| Region {
                id: RegionId::new(r.id),
                name: r.name,
            })
            .collect(),
        universities
            .into_iter()
            .map(|(_, r)| University {
                id: UniversityId::new(r.id),
                name: r.name,
                region_id: RegionId::new(r.region_id),
            })
            .collect(),
        seats
            .into_iter()
            .map(|(_, r)| EnterpriseSeat {
                id: SeatId::new(r.id),
                name: r.name,
                region_id: RegionId::new(r.region_id),
            })
            .collect(),
        sds.into_iter()
            .map(|(_, r)| Sds {
                id: SdsId::new(r.id),
                name: r.name,
                discipline: r.discipline,
            })
            .collect(),
        staff
            .into_iter()
            .map(|(_, r)| StaffEntry {
                university_id: UniversityId::new(r.university_id),
                sds_id: SdsId::new(r.sds_id),
                researcher_count: r.researcher_count,
            })
            .collect(),
    )
}
