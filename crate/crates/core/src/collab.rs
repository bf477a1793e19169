//! Collaboration event extraction.
//!
//! A publication with `m` distinct universities and `n` distinct enterprise
//! seats among its authors yields `m * n` university-enterprise events. At
//! the sector level it yields one event per (university, sds, seat) triple
//! where the (university, sds) pair has at least one co-author, i.e.
//! `(sum over universities of their distinct sds count) * n` events.
//!
//! Events are sets: listing the same seat or the same (university, sds) pair
//! twice on one publication contributes once. Locality is resolved at build
//! time and stored on the event, so downstream aggregation never re-derives
//! geography.

use crate::corpus::{Corpus, Publication, Window};
use crate::error::{Error, Result};
use crate::ids::{PublicationId, SdsId, SeatId, UniversityId};
use crate::registry::Registry;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::io::BufRead;

/// Whether the university and the enterprise seat of an event share a region.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Locality {
    Intra,
    Extra,
}

/// One university-enterprise collaboration on one publication.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct UeCollab {
    pub publication_id: PublicationId,
    pub university_id: UniversityId,
    pub seat_id: SeatId,
    pub locality: Locality,
}

/// One sector-enterprise collaboration on one publication.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SdsCollab {
    pub publication_id: PublicationId,
    pub university_id: UniversityId,
    pub sds_id: SdsId,
    pub seat_id: SeatId,
    pub locality: Locality,
}

/// The extracted event sets for a corpus, ordered by publication, university,
/// sector and seat ids.
#[derive(Debug, Clone, PartialEq)]
pub struct CollabLedger {
    pub window: Window,
    pub ue_events: Vec<UeCollab>,
    pub sds_events: Vec<SdsCollab>,
}

/// `Intra` iff both entities are in the same region.
pub fn locality_flag(
    university: &UniversityId,
    seat: &SeatId,
    registry: &Registry,
) -> Result<Locality> {
    let u_region = registry.university_region(university)?;
    let s_region = registry.seat_region(seat)?;
    Ok(if u_region == s_region {
        Locality::Intra
    } else {
        Locality::Extra
    })
}

/// University-enterprise events of one accepted publication: the Cartesian
/// product of its distinct in-scope universities and distinct seats.
pub fn ue_collabs(
    publication: &Publication,
    registry: &Registry,
    in_scope: &BTreeSet<SdsId>,
) -> Result<BTreeSet<UeCollab>> {
    let universities = publication.universities(in_scope);
    let seats = publication.seats();
    let mut events = BTreeSet::new();
    for university in &universities {
        for seat in &seats {
            events.insert(UeCollab {
                publication_id: publication.id.clone(),
                university_id: (*university).clone(),
                seat_id: (*seat).clone(),
                locality: locality_flag(university, seat, registry)?,
            });
        }
    }
    Ok(events)
}

/// Sector-enterprise events of one accepted publication: one event per
/// (university, sds) pair with at least one co-author, times each seat.
pub fn sds_collabs(
    publication: &Publication,
    registry: &Registry,
    in_scope: &BTreeSet<SdsId>,
) -> Result<BTreeSet<SdsCollab>> {
    let pairs = publication.university_sds_pairs(in_scope);
    let seats = publication.seats();
    let mut events = BTreeSet::new();
    for (university, sds) in &pairs {
        for seat in &seats {
            events.insert(SdsCollab {
                publication_id: publication.id.clone(),
                university_id: (*university).clone(),
                sds_id: (*sds).clone(),
                seat_id: (*seat).clone(),
                locality: locality_flag(university, seat, registry)?,
            });
        }
    }
    Ok(events)
}

/// Extract both event sets for every publication of the corpus.
///
/// Per-publication extraction runs in parallel; the merged ledger is sorted
/// by (publication, university, sds, seat) and therefore identical for any
/// worker count.
pub fn build_ledger(corpus: &Corpus, registry: &Registry) -> Result<CollabLedger> {
    let per_publication: Vec<(BTreeSet<UeCollab>, BTreeSet<SdsCollab>)> = corpus
        .publications
        .par_iter()
        .map(|p| {
            Ok((
                ue_collabs(p, registry, &corpus.in_scope_sds)?,
                sds_collabs(p, registry, &corpus.in_scope_sds)?,
            ))
        })
        .collect::<Result<_>>()?;

    let mut ue_events = BTreeSet::new();
    let mut sds_events = BTreeSet::new();
    for (ue, sds) in per_publication {
        for event in ue {
            if !ue_events.insert(event) {
                return Err(Error::Internal("duplicate ue event in ledger".into()));
            }
        }
        for event in sds {
            if !sds_events.insert(event) {
                return Err(Error::Internal("duplicate sds event in ledger".into()));
            }
        }
    }
    Ok(CollabLedger {
        window: corpus.window,
        ue_events: ue_events.into_iter().collect(),
        sds_events: sds_events.into_iter().collect(),
    })
}

const LEDGER_SCHEMA: &str = "collab-ledger";
const LEDGER_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct LedgerHeader {
    schema: String,
    version: u32,
    window: Window,
    ue_events: usize,
    sds_events: usize,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum LedgerLine {
    Ue(UeCollab),
    Sds(SdsCollab),
}

impl CollabLedger {
    /// Serialize to the line-delimited export format: a header line with the
    /// schema version and window, then one line per event.
    pub fn export_jsonl(&self) -> Result<String> {
        let mut out = String::new();
        let header = LedgerHeader {
            schema: LEDGER_SCHEMA.to_owned(),
            version: LEDGER_VERSION,
            window: self.window,
            ue_events: self.ue_events.len(),
            sds_events: self.sds_events.len(),
        };
        out.push_str(&serde_json::to_string(&header).map_err(internal)?);
        out.push('\n');
        for event in &self.ue_events {
            out.push_str(
                &serde_json::to_string(&LedgerLine::Ue(event.clone())).map_err(internal)?,
            );
            out.push('\n');
        }
        for event in &self.sds_events {
            out.push_str(
                &serde_json::to_string(&LedgerLine::Sds(event.clone())).map_err(internal)?,
            );
            out.push('\n');
        }
        Ok(out)
    }

    /// Parse an exported ledger, validating the schema header, referential
    /// integrity against the registry and stored locality flags.
    pub fn import_jsonl(reader: impl BufRead, registry: &Registry, source: &str) -> Result<Self> {
        let mut lines = reader.lines().enumerate();
        let header: LedgerHeader = match lines.next() {
            Some((_, line)) => serde_json::from_str(&line?).map_err(|e| Error::Parse {
                file: source.to_owned(),
                line: 1,
                message: format!("invalid ledger header: {e}"),
            })?,
            None => {
                return Err(Error::Parse {
                    file: source.to_owned(),
                    line: 1,
                    message: "empty ledger file".into(),
                })
            }
        };
        if header.schema != LEDGER_SCHEMA || header.version != LEDGER_VERSION {
            return Err(Error::Validation(format!(
                "unsupported ledger schema '{}' version {} in {source}",
                header.schema, header.version
            )));
        }
        let mut ue_events = Vec::new();
        let mut sds_events = Vec::new();
        for (idx, line) in lines {
            let line_no = idx as u64 + 1;
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let event: LedgerLine = serde_json::from_str(&line).map_err(|e| Error::Parse {
                file: source.to_owned(),
                line: line_no,
                message: e.to_string(),
            })?;
            match event {
                LedgerLine::Ue(e) => {
                    let expected = locality_flag(&e.university_id, &e.seat_id, registry)?;
                    if expected != e.locality {
                        return Err(Error::Validation(format!(
                            "{source} line {line_no}: stored locality contradicts registry geography"
                        )));
                    }
                    ue_events.push(e);
                }
                LedgerLine::Sds(e) => {
                    let expected = locality_flag(&e.university_id, &e.seat_id, registry)?;
                    if expected != e.locality {
                        return Err(Error::Validation(format!(
                            "{source} line {line_no}: stored locality contradicts registry geography"
                        )));
                    }
                    sds_events.push(e);
                }
            }
        }
        if ue_events.len() != header.ue_events || sds_events.len() != header.sds_events {
            return Err(Error::Validation(format!(
                "{source}: event counts do not match header ({}/{} declared, {}/{} found)",
                header.ue_events,
                header.sds_events,
                ue_events.len(),
                sds_events.len()
            )));
        }
        ue_events.sort();
        sds_events.sort();
        Ok(CollabLedger {
            window: header.window,
            ue_events,
            sds_events,
        })
    }
}

fn internal(e: serde_json::Error) -> Error {
    Error::Internal(format!("ledger serialization: {e}"))
}
