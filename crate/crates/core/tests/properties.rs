//! Property tests for the counting model and the statistics utilities.

use collabmarket::collab::{build_ledger, sds_collabs, ue_collabs};
use collabmarket::corpus::{
    filter_dataset, Attribution, AttributionKind, DocType, Publication, Window,
};
use collabmarket::registry::{EnterpriseSeat, Region, Registry, Sds, StaffEntry, University};
use collabmarket::report::{competition_rank, weighted_mean, RankDirection};
use collabmarket::SdsId;
use proptest::prelude::*;
use std::collections::BTreeSet;

const N_REGIONS: usize = 3;
const N_UNIVERSITIES: usize = 4;
const N_SEATS: usize = 4;
const N_SDS: usize = 3;

fn registry() -> Registry {
    Registry::from_parts(
        (0..N_REGIONS)
            .map(|i| Region {
                id: format!("R{i}").into(),
                name: format!("R{i}"),
            })
            .collect(),
        (0..N_UNIVERSITIES)
            .map(|i| University {
                id: format!("U{i}").into(),
                name: format!("U{i}"),
                region_id: format!("R{}", i % N_REGIONS).into(),
            })
            .collect(),
        (0..N_SEATS)
            .map(|i| EnterpriseSeat {
                id: format!("E{i}").into(),
                name: format!("E{i}"),
                region_id: format!("R{}", (i + 1) % N_REGIONS).into(),
            })
            .collect(),
        (0..N_SDS)
            .map(|i| Sds {
                id: format!("S{i}").into(),
                name: format!("S{i}"),
                discipline: "D".into(),
            })
            .collect(),
        (0..N_UNIVERSITIES)
            .flat_map(|u| {
                (0..N_SDS).map(move |s| StaffEntry {
                    university_id: format!("U{u}").into(),
                    sds_id: format!("S{s}").into(),
                    researcher_count: 1.0,
                })
            })
            .collect(),
    )
    .unwrap()
}

fn scope() -> BTreeSet<SdsId> {
    (0..N_SDS).map(|i| SdsId::new(format!("S{i}"))).collect()
}

/// Attribution as an index tuple: university authors, enterprise authors and
/// inert authors, in arbitrary interleaving.
#[derive(Debug, Clone)]
enum RawAuthor {
    University(usize, usize),
    Enterprise(usize),
    Foreign,
}

fn author_strategy() -> impl Strategy<Value = RawAuthor> {
    prop_oneof![
        ((0..N_UNIVERSITIES), (0..N_SDS)).prop_map(|(u, s)| RawAuthor::University(u, s)),
        (0..N_SEATS).prop_map(RawAuthor::Enterprise),
        Just(RawAuthor::Foreign),
    ]
}

fn publication_strategy() -> impl Strategy<Value = Publication> {
    proptest::collection::vec(author_strategy(), 1..12).prop_map(|authors| {
        let attributions = authors
            .into_iter()
            .enumerate()
            .map(|(i, a)| Attribution {
                author_key: format!("a{i}"),
                kind: match a {
                    RawAuthor::University(u, s) => AttributionKind::University {
                        university_id: format!("U{u}").into(),
                        sds_id: format!("S{s}").into(),
                    },
                    RawAuthor::Enterprise(e) => AttributionKind::Enterprise {
                        seat_id: format!("E{e}").into(),
                    },
                    RawAuthor::Foreign => AttributionKind::Foreign,
                },
            })
            .collect();
        Publication {
            id: "P".into(),
            year: 2001,
            doc_type: DocType::Article,
            attributions,
        }
    })
}

proptest! {
    /// |ue| = m * n, |sds| = (sum of distinct sectors per university) * n,
    /// the sds events project onto the ue events, and |sds| >= |ue|.
    #[test]
    fn counting_laws_hold(publication in publication_strategy()) {
        let registry = registry();
        let scope = scope();
        let ue = ue_collabs(&publication, &registry, &scope).unwrap();
        let sds = sds_collabs(&publication, &registry, &scope).unwrap();
        let m = publication.universities(&scope).len();
        let n = publication.seats().len();
        let pairs = publication.university_sds_pairs(&scope).len();
        prop_assert_eq!(ue.len(), m * n);
        prop_assert_eq!(sds.len(), pairs * n);
        prop_assert!(sds.len() >= ue.len());
        let projected: BTreeSet<_> = sds
            .iter()
            .map(|e| (e.university_id.clone(), e.seat_id.clone()))
            .collect();
        let ue_pairs: BTreeSet<_> = ue
            .iter()
            .map(|e| (e.university_id.clone(), e.seat_id.clone()))
            .collect();
        prop_assert_eq!(projected, ue_pairs);
    }

    /// The accepted set does not depend on input order.
    #[test]
    fn filtering_is_order_independent(
        publications in proptest::collection::vec(publication_strategy(), 0..20),
        seed in any::<u64>(),
    ) {
        let window = Window::new(2001, 2003).unwrap();
        let publications: Vec<Publication> = publications
            .into_iter()
            .enumerate()
            .map(|(i, mut p)| {
                p.id = format!("P{i}").into();
                p
            })
            .collect();
        let accepted_ids = |ps: Vec<Publication>| -> BTreeSet<String> {
            filter_dataset(ps, window, scope())
                .publications
                .iter()
                .map(|p| p.id.as_str().to_owned())
                .collect()
        };
        let forward = accepted_ids(publications.clone());
        let mut shuffled = publications;
        // cheap deterministic shuffle
        let len = shuffled.len();
        if len > 1 {
            for i in 0..len {
                let j = (seed as usize).wrapping_mul(31).wrapping_add(i * 7) % len;
                shuffled.swap(i, j);
            }
        }
        prop_assert_eq!(forward, accepted_ids(shuffled));
    }

    /// Conservation over corpora: both sides of the ue ledger sum to the
    /// same total, and intra counts agree whichever side groups them.
    #[test]
    fn ledger_conservation(
        publications in proptest::collection::vec(publication_strategy(), 0..20),
    ) {
        let registry = registry();
        let window = Window::new(2001, 2003).unwrap();
        let publications: Vec<Publication> = publications
            .into_iter()
            .enumerate()
            .map(|(i, mut p)| {
                p.id = format!("P{i}").into();
                p
            })
            .collect();
        let corpus = filter_dataset(publications, window, scope());
        let ledger = build_ledger(&corpus, &registry).unwrap();
        let by_university: usize = (0..N_UNIVERSITIES)
            .map(|u| {
                let id = format!("U{u}");
                ledger.ue_events.iter().filter(|e| e.university_id.as_str() == id).count()
            })
            .sum();
        let by_seat: usize = (0..N_SEATS)
            .map(|e| {
                let id = format!("E{e}");
                ledger.ue_events.iter().filter(|ev| ev.seat_id.as_str() == id).count()
            })
            .sum();
        prop_assert_eq!(by_university, ledger.ue_events.len());
        prop_assert_eq!(by_seat, ledger.ue_events.len());
        let intra_by_university_region: usize = (0..N_REGIONS)
            .map(|r| {
                let id = format!("R{r}");
                ledger
                    .ue_events
                    .iter()
                    .filter(|e| {
                        e.locality == collabmarket::Locality::Intra
                            && registry.university_region(&e.university_id).unwrap().as_str() == id
                    })
                    .count()
            })
            .sum();
        let intra_by_seat_region: usize = (0..N_REGIONS)
            .map(|r| {
                let id = format!("R{r}");
                ledger
                    .ue_events
                    .iter()
                    .filter(|e| {
                        e.locality == collabmarket::Locality::Intra
                            && registry.seat_region(&e.seat_id).unwrap().as_str() == id
                    })
                    .count()
            })
            .sum();
        prop_assert_eq!(intra_by_university_region, intra_by_seat_region);
    }

    /// Ranks are a pure function of the value multiset: every rank equals
    /// one plus the number of strictly better defined values, and permuting
    /// the input permutes the ranks identically.
    #[test]
    fn competition_rank_properties(
        values in proptest::collection::vec(
            proptest::option::weighted(0.8, (0u32..20).prop_map(|v| v as f64 / 2.0)),
            1..24,
        ),
    ) {
        prop_assume!(values.iter().any(Option::is_some));
        let ranks = competition_rank(&values, RankDirection::Descending).unwrap();
        for (value, rank) in values.iter().zip(&ranks) {
            match (value, rank) {
                (Some(v), Some(r)) => {
                    let better = values
                        .iter()
                        .flatten()
                        .filter(|other| **other > *v)
                        .count() as u64;
                    prop_assert_eq!(*r, better + 1);
                }
                (None, None) => {}
                other => prop_assert!(false, "mismatched definedness: {:?}", other),
            }
        }
        let mut reversed = values.clone();
        reversed.reverse();
        let mut reversed_ranks = competition_rank(&reversed, RankDirection::Descending).unwrap();
        reversed_ranks.reverse();
        prop_assert_eq!(ranks, reversed_ranks);
    }

    /// With equal weights the weighted mean is the arithmetic mean.
    #[test]
    fn weighted_mean_with_equal_weights_is_mean(
        values in proptest::collection::vec((0u32..1000).prop_map(|v| v as f64 / 10.0), 1..30),
        weight in 0.1f64..10.0,
    ) {
        let wrapped: Vec<Option<f64>> = values.iter().copied().map(Some).collect();
        let weights = vec![weight; values.len()];
        let wm = weighted_mean(&wrapped, &weights).unwrap();
        let mean: f64 = values.iter().sum::<f64>() / values.len() as f64;
        prop_assert!((wm - mean).abs() <= 1e-9 * mean.abs().max(1.0));
    }
}
