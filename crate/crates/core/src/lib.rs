//! Deterministic analytics engine for university-industry research
//! collaboration, measured through co-authorship of scientific publications.
//!
//! The pipeline turns an entity registry (regions, universities, enterprise
//! seats, disciplinary sectors, staff rosters) and a stream of publication
//! records into:
//!
//! * collaboration event ledgers at the university-enterprise and
//!   sector-enterprise granularities, each event flagged intra- or
//!   extra-regional ([`collab`]);
//! * the regional market table: collaboration counts, national shares and
//!   intra-regional percentages with competition ranks ([`market`]);
//! * degree-of-correspondence indicators between regional industry demand
//!   and university supply ([`market`]);
//! * location-normalized intra/extra-regional performance per university
//!   and sector, with median-split quadrant classification ([`performance`]);
//! * ranked, byte-deterministic CSV/JSON artifacts ([`report`]).
//!
//! Every counting formula is cross-checked against a brute-force enumeration
//! oracle over seeded synthetic corpora ([`oracle`]).

pub mod collab;
pub mod corpus;
mod error;
pub mod ids;
pub mod market;
pub mod oracle;
pub mod performance;
pub mod registry;
pub mod report;

pub use collab::{build_ledger, CollabLedger, Locality, SdsCollab, UeCollab};
pub use corpus::{filter_dataset, ingest_publications, Corpus, Publication, Window};
pub use error::{Error, Result};
pub use ids::{PublicationId, RegionId, SdsId, SeatId, UniversityId};
pub use registry::{load_registry, Registry};
