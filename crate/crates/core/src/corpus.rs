//! Publication ingestion: parse line-delimited records, resolve author
//! attributions against the registry and filter to the dataset definition
//! (articles and reviews inside the year window, co-authored by at least one
//! in-scope university scientist and one domestic enterprise seat).

use crate::error::{Error, Result};
use crate::ids::{PublicationId, SdsId, SeatId, UniversityId};
use crate::registry::Registry;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::io::BufRead;

/// Inclusive year range of the observation period.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub start: i32,
    pub end: i32,
}

impl Window {
    pub fn new(start: i32, end: i32) -> Result<Self> {
        if start > end {
            return Err(Error::Validation(format!(
                "empty year window {start}..{end}"
            )));
        }
        Ok(Window { start, end })
    }

    pub fn contains(&self, year: i32) -> bool {
        (self.start..=self.end).contains(&year)
    }

    /// Number of years covered, used as the denominator of annual means.
    pub fn years(&self) -> f64 {
        f64::from(self.end - self.start + 1)
    }
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.start, self.end)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DocType {
    Article,
    Review,
    Other,
}

impl DocType {
    fn parse(raw: &str) -> DocType {
        match raw {
            "article" => DocType::Article,
            "review" => DocType::Review,
            _ => DocType::Other,
        }
    }
}

/// Resolved affiliation of one author.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum AttributionKind {
    University {
        university_id: UniversityId,
        sds_id: SdsId,
    },
    Enterprise {
        seat_id: SeatId,
    },
    Foreign,
    Other,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Attribution {
    pub author_key: String,
    #[serde(flatten)]
    pub kind: AttributionKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Publication {
    pub id: PublicationId,
    pub year: i32,
    pub doc_type: DocType,
    pub attributions: Vec<Attribution>,
}

impl Publication {
    /// Distinct (university, sds) pairs among in-scope university
    /// attributions. Author multiplicity never inflates the set.
    pub fn university_sds_pairs(
        &self,
        in_scope: &BTreeSet<SdsId>,
    ) -> BTreeSet<(&UniversityId, &SdsId)> {
        self.attributions
            .iter()
            .filter_map(|a| match &a.kind {
                AttributionKind::University {
                    university_id,
                    sds_id,
                } if in_scope.contains(sds_id) => Some((university_id, sds_id)),
                _ => None,
            })
            .collect()
    }

    /// Distinct universities with at least one in-scope author.
    pub fn universities(&self, in_scope: &BTreeSet<SdsId>) -> BTreeSet<&UniversityId> {
        self.university_sds_pairs(in_scope)
            .into_iter()
            .map(|(u, _)| u)
            .collect()
    }

    /// Distinct enterprise seats among attributions.
    pub fn seats(&self) -> BTreeSet<&SeatId> {
        self.attributions
            .iter()
            .filter_map(|a| match &a.kind {
                AttributionKind::Enterprise { seat_id } => Some(seat_id),
                _ => None,
            })
            .collect()
    }

    /// Distinct author keys with an in-scope university attribution.
    pub fn university_author_count(&self, in_scope: &BTreeSet<SdsId>) -> usize {
        self.attributions
            .iter()
            .filter(|a| match &a.kind {
                AttributionKind::University { sds_id, .. } => in_scope.contains(sds_id),
                _ => false,
            })
            .map(|a| a.author_key.as_str())
            .collect::<BTreeSet<_>>()
            .len()
    }
}

/// Why a publication was rejected by the dataset filter; the first failing
/// predicate wins.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectReason {
    BadDocType,
    YearOutOfWindow,
    NoInScopeUniversity,
    NoDomesticEnterprise,
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            RejectReason::BadDocType => "bad_doc_type",
            RejectReason::YearOutOfWindow => "year_out_of_window",
            RejectReason::NoInScopeUniversity => "no_in_scope_university",
            RejectReason::NoDomesticEnterprise => "no_domestic_enterprise",
        };
        f.write_str(s)
    }
}

/// The filtered dataset together with its rejection log.
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    pub window: Window,
    pub in_scope_sds: BTreeSet<SdsId>,
    pub publications: Vec<Publication>,
    pub rejections: Vec<(PublicationId, RejectReason)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorpusSummary {
    pub accepted: usize,
    pub rejected: usize,
    pub rejected_by_reason: BTreeMap<String, usize>,
}

impl Corpus {
    pub fn summary(&self) -> CorpusSummary {
        let mut by_reason = BTreeMap::new();
        for (_, reason) in &self.rejections {
            *by_reason.entry(reason.to_string()).or_insert(0) += 1;
        }
        CorpusSummary {
            accepted: self.publications.len(),
            rejected: self.rejections.len(),
            rejected_by_reason: by_reason,
        }
    }
}

/// Raw wire form of one publication line before resolution.
#[derive(Debug, Deserialize, Serialize)]
pub struct PublicationRecord {
    pub id: String,
    pub year: i32,
    pub doc_type: String,
    pub authors: Vec<AuthorRecord>,
}

/// Raw wire form of one author entry.
#[derive(Debug, Deserialize, Serialize)]
pub struct AuthorRecord {
    pub name: String,
    pub affiliation: AffiliationRecord,
}

/// Raw wire form of an affiliation, keyed by institution ids.
#[derive(Debug, Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum AffiliationRecord {
    University {
        university_id: String,
        #[serde(skip_serializing_if = "Option::is_none")]
        sds_id: Option<String>,
    },
    Enterprise {
        seat_id: String,
    },
    Foreign,
    Other,
}

/// Result of ingesting a record stream: all parsed publications with
/// resolved attributions, plus the degradation warnings raised on the way.
#[derive(Debug)]
pub struct Ingested {
    pub publications: Vec<Publication>,
    pub warnings: Vec<String>,
}

/// Resolve one raw author record against the registry.
///
/// Unknown institution ids degrade the attribution to `Other` and return a
/// warning; a university attribution without an sds id is a hard error.
pub fn resolve_attribution(
    author: &AuthorRecord,
    registry: &Registry,
) -> Result<(Attribution, Option<String>)> {
    let author_key = author.name.clone();
    let (kind, warning) = match &author.affiliation {
        AffiliationRecord::University {
            university_id,
            sds_id,
        } => {
            let sds_id = sds_id.as_ref().ok_or_else(|| {
                Error::Validation(format!(
                    "university attribution for author '{}' is missing sds_id",
                    author.name
                ))
            })?;
            let university_id = UniversityId::new(university_id.clone());
            let sds_id = SdsId::new(sds_id.clone());
            if !registry.has_university(&university_id) {
                (
                    AttributionKind::Other,
                    Some(format!(
                        "unknown university id '{university_id}' downgraded to other"
                    )),
                )
            } else if !registry.has_sds(&sds_id) {
                (
                    AttributionKind::Other,
                    Some(format!("unknown sds id '{sds_id}' downgraded to other")),
                )
            } else {
                (
                    AttributionKind::University {
                        university_id,
                        sds_id,
                    },
                    None,
                )
            }
        }
        AffiliationRecord::Enterprise { seat_id } => {
            let seat_id = SeatId::new(seat_id.clone());
            if !registry.has_seat(&seat_id) {
                (
                    AttributionKind::Other,
                    Some(format!(
                        "unknown enterprise seat id '{seat_id}' downgraded to other"
                    )),
                )
            } else {
                (AttributionKind::Enterprise { seat_id }, None)
            }
        }
        AffiliationRecord::Foreign => (AttributionKind::Foreign, None),
        AffiliationRecord::Other => (AttributionKind::Other, None),
    };
    Ok((Attribution { author_key, kind }, warning))
}

/// Parse a line-delimited publication stream, one JSON record per line.
///
/// Returns every record with attributions resolved. Blank lines are skipped.
/// Duplicate publication ids are a validation error citing both lines.
pub fn ingest_publications(
    reader: impl BufRead,
    registry: &Registry,
    source: &str,
) -> Result<Ingested> {
    let mut publications = Vec::new();
    let mut warnings = Vec::new();
    let mut seen: HashMap<PublicationId, u64> = HashMap::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx as u64 + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: PublicationRecord =
            serde_json::from_str(&line).map_err(|e| Error::Parse {
                file: source.to_owned(),
                line: line_no,
                message: e.to_string(),
            })?;
        if record.authors.is_empty() {
            return Err(Error::Parse {
                file: source.to_owned(),
                line: line_no,
                message: format!("publication '{}' has no authors", record.id),
            });
        }
        let id = PublicationId::new(record.id);
        if let Some(first) = seen.insert(id.clone(), line_no) {
            return Err(Error::Validation(format!(
                "duplicate publication id '{id}' in {source} (lines {first} and {line_no})"
            )));
        }
        let mut attributions = Vec::with_capacity(record.authors.len());
        for author in &record.authors {
            let (attribution, warning) = resolve_attribution(author, registry)?;
            if let Some(w) = warning {
                let w = format!("{source} line {line_no} ({id}): {w}");
                log::warn!("{w}");
                warnings.push(w);
            }
            attributions.push(attribution);
        }
        publications.push(Publication {
            id,
            year: record.year,
            doc_type: DocType::parse(&record.doc_type),
            attributions,
        });
    }
    Ok(Ingested {
        publications,
        warnings,
    })
}

/// Apply the dataset predicate. A publication is accepted iff its document
/// type is article or review, its year falls in the window, and it carries
/// at least one in-scope university attribution and at least one domestic
/// enterprise attribution. Rejection is not an error; each rejected record
/// is logged with the first failing predicate.
pub fn filter_dataset(
    publications: Vec<Publication>,
    window: Window,
    in_scope_sds: BTreeSet<SdsId>,
) -> Corpus {
    let mut accepted = Vec::new();
    let mut rejections = Vec::new();
    for publication in publications {
        let verdict = classify(&publication, window, &in_scope_sds);
        match verdict {
            None => accepted.push(publication),
            Some(reason) => rejections.push((publication.id, reason)),
        }
    }
    Corpus {
        window,
        in_scope_sds,
        publications: accepted,
        rejections,
    }
}

fn classify(
    publication: &Publication,
    window: Window,
    in_scope: &BTreeSet<SdsId>,
) -> Option<RejectReason> {
    if publication.doc_type == DocType::Other {
        return Some(RejectReason::BadDocType);
    }
    if !window.contains(publication.year) {
        return Some(RejectReason::YearOutOfWindow);
    }
    if publication.universities(in_scope).is_empty() {
        return Some(RejectReason::NoInScopeUniversity);
    }
    if publication.seats().is_empty() {
        return Some(RejectReason::NoDomesticEnterprise);
    }
    None
}

/// Serialize publications back to the line-delimited input format.
/// Byte-deterministic for a given publication list.
pub fn export_publications_jsonl(publications: &[Publication]) -> Result<String> {
    let mut out = String::new();
    for p in publications {
        let record = PublicationRecord {
            id: p.id.as_str().to_owned(),
            year: p.year,
            doc_type: match p.doc_type {
                DocType::Article => "article".to_owned(),
                DocType::Review => "review".to_owned(),
                DocType::Other => "other".to_owned(),
            },
            authors: p
                .attributions
                .iter()
                .map(|a| AuthorRecord {
                    name: a.author_key.clone(),
                    affiliation: match &a.kind {
                        AttributionKind::University {
                            university_id,
                            sds_id,
                        } => AffiliationRecord::University {
                            university_id: university_id.as_str().to_owned(),
                            sds_id: Some(sds_id.as_str().to_owned()),
                        },
                        AttributionKind::Enterprise { seat_id } => {
                            AffiliationRecord::Enterprise {
                                seat_id: seat_id.as_str().to_owned(),
                            }
                        }
                        AttributionKind::Foreign => AffiliationRecord::Foreign,
                        AttributionKind::Other => AffiliationRecord::Other,
                    },
                })
                .collect(),
        };
        out.push_str(
            &serde_json::to_string(&record)
                .map_err(|e| Error::Internal(format!("publication serialization: {e}")))?,
        );
        out.push('\n');
    }
    Ok(out)
}
