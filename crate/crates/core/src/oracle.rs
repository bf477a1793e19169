//! Independent verification machinery: seeded synthetic corpora, a
//! brute-force event extractor that never uses the closed-form counting
//! rules, ledger comparison, and the conservation checks tying demand,
//! expected supply and staff scaling together.

use crate::collab::{CollabLedger, Locality, SdsCollab, UeCollab};
use crate::corpus::{
    filter_dataset, Attribution, AttributionKind, Corpus, DocType, Publication, Window,
};
use crate::error::{Error, Result};
use crate::ids::{RegionId, SdsId, UniversityId};
use crate::market::{annual_extra_regional_demand, annual_regional_demand};
use crate::performance::{expected_extra_supply, expected_intra_supply};
use crate::registry::{EnterpriseSeat, Region, Registry, Sds, StaffEntry, University};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::BTreeSet;

/// Parameters of one synthetic corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthParams {
    pub seed: u64,
    pub n_regions: usize,
    pub n_universities: usize,
    pub n_seats: usize,
    pub n_sds: usize,
    pub n_publications: usize,
    pub window: Window,
    /// Upper bound on extra authors beyond the guaranteed university and
    /// enterprise author of each publication.
    pub max_extra_authors: usize,
    /// Relative odds of the extra-author kinds
    /// (university, enterprise, foreign, other).
    pub kind_weights: [f64; 4],
}

impl SynthParams {
    /// Compact corpus for sweep testing, sized from the seed.
    pub fn sweep(seed: u64, max_publications: usize) -> SynthParams {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_5eed);
        let n_regions = rng.gen_range(2..=5);
        SynthParams {
            seed,
            n_regions,
            // every region gets at least one university
            n_universities: rng.gen_range(n_regions..=n_regions + 6),
            n_seats: rng.gen_range(1..=8),
            n_sds: rng.gen_range(1..=3),
            n_publications: rng.gen_range(1..=max_publications.max(1)),
            window: Window::new(2001, 2003).expect("static window"),
            max_extra_authors: 6,
            kind_weights: [3.0, 2.0, 1.0, 1.0],
        }
    }

    fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("n_regions", self.n_regions),
            ("n_universities", self.n_universities),
            ("n_seats", self.n_seats),
            ("n_sds", self.n_sds),
        ] {
            if v == 0 {
                return Err(Error::Validation(format!(
                    "synthetic corpus needs {name} >= 1"
                )));
            }
        }
        if self.kind_weights.iter().any(|w| *w < 0.0)
            || self.kind_weights.iter().sum::<f64>() <= 0.0
        {
            return Err(Error::Validation(
                "attribution kind weights must be non-negative and sum above zero".into(),
            ));
        }
        Ok(())
    }
}

fn pick_kind(rng: &mut ChaCha8Rng, weights: &[f64; 4]) -> usize {
    let total: f64 = weights.iter().sum();
    let mut draw = rng.gen_range(0.0..total);
    for (i, w) in weights.iter().enumerate() {
        if draw < *w {
            return i;
        }
        draw -= w;
    }
    3
}

/// Deterministically generate a registry and a corpus that passes the
/// dataset filter in full: every publication is an article or review inside
/// the window with at least one in-scope university author and one seat.
/// Universities are spread round-robin over regions and the staff roster
/// covers every (university, sds) pair with a positive count.
pub fn gen_corpus(params: &SynthParams) -> Result<(Registry, Corpus)> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);

    let regions: Vec<Region> = (0..params.n_regions)
        .map(|i| Region {
            id: format!("R{i:02}").into(),
            name: format!("Region {i:02}"),
        })
        .collect();
    let universities: Vec<University> = (0..params.n_universities)
        .map(|i| University {
            id: format!("U{i:03}").into(),
            name: format!("University {i:03}"),
            region_id: regions[i % params.n_regions].id.clone(),
        })
        .collect();
    let seats: Vec<EnterpriseSeat> = (0..params.n_seats)
        .map(|i| EnterpriseSeat {
            id: format!("E{i:03}").into(),
            name: format!("Seat {i:03}"),
            region_id: regions[rng.gen_range(0..params.n_regions)].id.clone(),
        })
        .collect();
    let sds: Vec<Sds> = (0..params.n_sds)
        .map(|i| Sds {
            id: format!("S{i:02}").into(),
            name: format!("Sector {i:02}"),
            discipline: "Synthetic".into(),
        })
        .collect();
    let mut staff = Vec::with_capacity(params.n_universities * params.n_sds);
    for u in &universities {
        for s in &sds {
            staff.push(StaffEntry {
                university_id: u.id.clone(),
                sds_id: s.id.clone(),
                researcher_count: f64::from(rng.gen_range(1..=30u32)),
            });
        }
    }

    let mut publications = Vec::with_capacity(params.n_publications);
    for p in 0..params.n_publications {
        let mut attributions = Vec::new();
        let mut author = 0usize;
        let mut next_author = |prefix: &str| {
            author += 1;
            format!("{prefix}-{p:04}-{author}")
        };
        // guaranteed in-scope university author and enterprise author
        attributions.push(Attribution {
            author_key: next_author("a"),
            kind: AttributionKind::University {
                university_id: universities[rng.gen_range(0..params.n_universities)].id.clone(),
                sds_id: sds[rng.gen_range(0..params.n_sds)].id.clone(),
            },
        });
        attributions.push(Attribution {
            author_key: next_author("a"),
            kind: AttributionKind::Enterprise {
                seat_id: seats[rng.gen_range(0..params.n_seats)].id.clone(),
            },
        });
        for _ in 0..rng.gen_range(0..=params.max_extra_authors) {
            let kind = match pick_kind(&mut rng, &params.kind_weights) {
                0 => AttributionKind::University {
                    university_id: universities[rng.gen_range(0..params.n_universities)]
                        .id
                        .clone(),
                    sds_id: sds[rng.gen_range(0..params.n_sds)].id.clone(),
                },
                1 => AttributionKind::Enterprise {
                    seat_id: seats[rng.gen_range(0..params.n_seats)].id.clone(),
                },
                2 => AttributionKind::Foreign,
                _ => AttributionKind::Other,
            };
            attributions.push(Attribution {
                author_key: next_author("a"),
                kind,
            });
        }
        publications.push(Publication {
            id: format!("P{p:05}").into(),
            year: rng.gen_range(params.window.start..=params.window.end),
            doc_type: if rng.gen_bool(0.8) {
                DocType::Article
            } else {
                DocType::Review
            },
            attributions,
        });
    }

    let registry = Registry::from_parts(regions, universities, seats, sds, staff)?;
    let in_scope: BTreeSet<SdsId> = registry.sds().map(|s| s.id.clone()).collect();
    let n = publications.len();
    let corpus = filter_dataset(publications, params.window, in_scope);
    if corpus.publications.len() != n {
        return Err(Error::Internal(format!(
            "synthetic corpus must pass the dataset filter in full, {} of {n} accepted",
            corpus.publications.len()
        )));
    }
    Ok((registry, corpus))
}

/// Extract both event sets by direct enumeration over attribution pairs and
/// triples with explicit deduplication. No distinct-set products or count
/// formulas: this is the oracle the formula path is checked against.
pub fn brute_force_ledger(corpus: &Corpus, registry: &Registry) -> Result<CollabLedger> {
    let mut ue_events: BTreeSet<UeCollab> = BTreeSet::new();
    let mut sds_events: BTreeSet<SdsCollab> = BTreeSet::new();
    for publication in &corpus.publications {
        for first in &publication.attributions {
            let AttributionKind::University {
                university_id,
                sds_id,
            } = &first.kind
            else {
                continue;
            };
            if !corpus.in_scope_sds.contains(sds_id) {
                continue;
            }
            for second in &publication.attributions {
                let AttributionKind::Enterprise { seat_id } = &second.kind else {
                    continue;
                };
                let u_region = registry.university_region(university_id)?;
                let s_region = registry.seat_region(seat_id)?;
                let locality = if u_region == s_region {
                    Locality::Intra
                } else {
                    Locality::Extra
                };
                ue_events.insert(UeCollab {
                    publication_id: publication.id.clone(),
                    university_id: university_id.clone(),
                    seat_id: seat_id.clone(),
                    locality,
                });
                sds_events.insert(SdsCollab {
                    publication_id: publication.id.clone(),
                    university_id: university_id.clone(),
                    sds_id: sds_id.clone(),
                    seat_id: seat_id.clone(),
                    locality,
                });
            }
        }
    }
    Ok(CollabLedger {
        window: corpus.window,
        ue_events: ue_events.into_iter().collect(),
        sds_events: sds_events.into_iter().collect(),
    })
}

/// Events present in one ledger but not the other.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct LedgerDiff {
    pub missing_ue: Vec<UeCollab>,
    pub extra_ue: Vec<UeCollab>,
    pub missing_sds: Vec<SdsCollab>,
    pub extra_sds: Vec<SdsCollab>,
}

impl LedgerDiff {
    pub fn is_empty(&self) -> bool {
        self.missing_ue.is_empty()
            && self.extra_ue.is_empty()
            && self.missing_sds.is_empty()
            && self.extra_sds.is_empty()
    }
}

/// Compare event sets; `missing_*` are in `a` but not `b`, `extra_*` the
/// reverse.
pub fn compare_ledgers(a: &CollabLedger, b: &CollabLedger) -> LedgerDiff {
    let a_ue: BTreeSet<_> = a.ue_events.iter().collect();
    let b_ue: BTreeSet<_> = b.ue_events.iter().collect();
    let a_sds: BTreeSet<_> = a.sds_events.iter().collect();
    let b_sds: BTreeSet<_> = b.sds_events.iter().collect();
    LedgerDiff {
        missing_ue: a_ue.difference(&b_ue).map(|e| (*e).clone()).collect(),
        extra_ue: b_ue.difference(&a_ue).map(|e| (*e).clone()).collect(),
        missing_sds: a_sds.difference(&b_sds).map(|e| (*e).clone()).collect(),
        extra_sds: b_sds.difference(&a_sds).map(|e| (*e).clone()).collect(),
    }
}

/// Check the per-publication closed-form counting laws against the ledger:
/// `|ue| = m * n` and `|sds| = (sum of distinct sectors per university) * n`.
/// Returns one message per violated law.
pub fn check_count_laws(corpus: &Corpus, ledger: &CollabLedger) -> Vec<String> {
    let mut violations = Vec::new();
    for publication in &corpus.publications {
        let m = publication.universities(&corpus.in_scope_sds).len();
        let n = publication.seats().len();
        let pair_total: usize = publication.university_sds_pairs(&corpus.in_scope_sds).len();
        let ue = ledger
            .ue_events
            .iter()
            .filter(|e| e.publication_id == publication.id)
            .count();
        let sds = ledger
            .sds_events
            .iter()
            .filter(|e| e.publication_id == publication.id)
            .count();
        if ue != m * n {
            violations.push(format!(
                "publication {}: {ue} ue events, expected m*n = {}*{}",
                publication.id, m, n
            ));
        }
        if sds != pair_total * n {
            violations.push(format!(
                "publication {}: {sds} sds events, expected {pair_total}*{n}",
                publication.id
            ));
        }
    }
    violations
}

const REL_TOL: f64 = 1e-9;

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= REL_TOL * a.abs().max(b.abs()).max(1.0)
}

/// Demand/supply conservation over one corpus:
/// regional demands times window years reproduce the sector event total;
/// expected intra supplies of a staffed region sum to its demand; expected
/// extra supplies sum to the extra demand total whenever every region's
/// complement staff is positive; and both expected supplies are invariant
/// under global staff rescaling. Returns one message per violation.
pub fn check_conservation(registry: &Registry, ledger: &CollabLedger) -> Result<Vec<String>> {
    let mut violations = Vec::new();
    let years = ledger.window.years();
    let sectors: Vec<SdsId> = registry.sds().map(|s| s.id.clone()).collect();
    let regions: Vec<RegionId> = registry.regions().map(|r| r.id.clone()).collect();
    let universities: Vec<UniversityId> = registry.universities().map(|u| u.id.clone()).collect();
    let scaled: Vec<(f64, Registry)> = [0.5, 2.0, 10.0]
        .iter()
        .map(|&c| (c, registry.scale_staff(c)))
        .collect();

    for sds in &sectors {
        let event_total = ledger
            .sds_events
            .iter()
            .filter(|e| e.sds_id == *sds)
            .count() as f64;
        let demand_sum: f64 = regions
            .iter()
            .map(|r| annual_regional_demand(ledger, registry, r, sds).map(|d| d * years))
            .sum::<Result<f64>>()?;
        if !close(demand_sum, event_total) {
            violations.push(format!(
                "sds {sds}: regional demands * years = {demand_sum}, events = {event_total}"
            ));
        }

        for region in &regions {
            let staff = registry.regional_staff(region, sds)?;
            if staff <= 0.0 {
                continue;
            }
            let demand = annual_regional_demand(ledger, registry, region, sds)?;
            let expected_sum: f64 = registry
                .universities_in_region(region)
                .iter()
                .map(|u| expected_intra_supply(registry, ledger, u, sds))
                .sum::<Result<f64>>()?;
            if !close(expected_sum, demand) {
                violations.push(format!(
                    "sds {sds} region {region}: expected intra sum {expected_sum} != demand {demand}"
                ));
            }
        }

        let national = registry.national_staff(sds);
        let every_complement_positive = regions
            .iter()
            .map(|r| registry.regional_staff(r, sds))
            .collect::<Result<Vec<_>>>()?
            .iter()
            .all(|rs| national - rs > 0.0);
        if every_complement_positive {
            let extra_total: f64 = regions
                .iter()
                .map(|r| annual_extra_regional_demand(ledger, registry, r, sds))
                .sum::<Result<f64>>()?;
            let expected_total: f64 = universities
                .iter()
                .map(|u| expected_extra_supply(registry, ledger, u, sds))
                .sum::<Result<f64>>()?;
            if !close(expected_total, extra_total) {
                violations.push(format!(
                    "sds {sds}: expected extra sum {expected_total} != extra demand {extra_total}"
                ));
            }
        }

        for (factor, scaled_registry) in &scaled {
            for u in &universities {
                let base_intra = expected_intra_supply(registry, ledger, u, sds)?;
                let scaled_intra = expected_intra_supply(scaled_registry, ledger, u, sds)?;
                if !close(base_intra, scaled_intra) {
                    violations.push(format!(
                        "sds {sds} university {u}: expected intra not invariant under staff scale {factor}"
                    ));
                }
                let base_extra = expected_extra_supply(registry, ledger, u, sds)?;
                let scaled_extra = expected_extra_supply(scaled_registry, ledger, u, sds)?;
                if !close(base_extra, scaled_extra) {
                    violations.push(format!(
                        "sds {sds} university {u}: expected extra not invariant under staff scale {factor}"
                    ));
                }
            }
        }
    }
    Ok(violations)
}

/// Outcome of one seed of the verification sweep.
#[derive(Debug, Clone, Serialize)]
pub struct SeedReport {
    pub seed: u64,
    pub publications: usize,
    pub ledger_mismatches: usize,
    pub count_law_violations: usize,
    pub conservation_violations: usize,
}

impl SeedReport {
    pub fn is_clean(&self) -> bool {
        self.ledger_mismatches == 0
            && self.count_law_violations == 0
            && self.conservation_violations == 0
    }
}

/// Generate one corpus, build the formula ledger and the brute-force ledger,
/// and run every check against them.
pub fn verify_seed(seed: u64, max_publications: usize) -> Result<SeedReport> {
    let params = SynthParams::sweep(seed, max_publications);
    let (registry, corpus) = gen_corpus(&params)?;
    let ledger = crate::collab::build_ledger(&corpus, &registry)?;
    let brute = brute_force_ledger(&corpus, &registry)?;
    let diff = compare_ledgers(&ledger, &brute);
    let laws = check_count_laws(&corpus, &ledger);
    let conservation = check_conservation(&registry, &ledger)?;
    Ok(SeedReport {
        seed,
        publications: corpus.publications.len(),
        ledger_mismatches: diff.missing_ue.len()
            + diff.extra_ue.len()
            + diff.missing_sds.len()
            + diff.extra_sds.len(),
        count_law_violations: laws.len(),
        conservation_violations: conservation.len(),
    })
}
