//! End-to-end pipeline checks on the bundled biochemistry fixture.

use collabmarket::collab::{build_ledger, CollabLedger, Locality};
use collabmarket::corpus::{filter_dataset, ingest_publications, Window};
use collabmarket::market::{annual_extra_regional_demand, annual_regional_demand, calibrate_alpha};
use collabmarket::registry::load_registry;
use collabmarket::report::region_focus;
use collabmarket::{RegionId, Registry, SdsId};
use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;

fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/biochem")
}

fn load_fixture() -> (Registry, CollabLedger) {
    let dir = fixture_dir();
    let registry = load_registry(&dir).unwrap();
    let reader = BufReader::new(File::open(dir.join("publications.jsonl")).unwrap());
    let ingested = ingest_publications(reader, &registry, "publications.jsonl").unwrap();
    assert!(ingested.warnings.is_empty());
    let corpus = filter_dataset(
        ingested.publications,
        Window::new(2001, 2003).unwrap(),
        registry.sds().map(|s| s.id.clone()).collect(),
    );
    assert!(corpus.rejections.is_empty());
    let ledger = build_ledger(&corpus, &registry).unwrap();
    (registry, ledger)
}

#[test]
fn fixture_registry_shape() {
    let registry = load_registry(fixture_dir()).unwrap();
    assert_eq!(registry.regions().count(), 19);
    assert_eq!(registry.universities().count(), 49);
    let sds = SdsId::new("BIO/10");
    let staffed = registry
        .universities()
        .filter(|u| registry.staff_count(&u.id, &sds).unwrap() > 0.0)
        .count();
    assert_eq!(staffed, 49);
    // spot values
    assert_eq!(registry.staff_count(&"U35".into(), &sds).unwrap(), 64.0);
    assert_eq!(registry.staff_count(&"U03".into(), &sds).unwrap(), 1.0);
    assert_eq!(
        registry.regional_staff(&RegionId::new("VEN"), &sds).unwrap(),
        51.0
    );
    assert_eq!(
        registry.regional_staff(&RegionId::new("LOM"), &sds).unwrap(),
        133.0
    );
    assert_eq!(registry.national_staff(&sds), 864.0);
}

#[test]
fn fixture_event_totals() {
    let (_, ledger) = load_fixture();
    assert_eq!(ledger.sds_events.len(), 98);
    assert_eq!(ledger.ue_events.len(), 98);
    let intra = ledger
        .sds_events
        .iter()
        .filter(|e| e.locality == Locality::Intra)
        .count();
    assert_eq!(intra, 45);
}

#[test]
fn fixture_regional_demands() {
    let (registry, ledger) = load_fixture();
    let sds = SdsId::new("BIO/10");
    let demand = |r: &str| {
        annual_regional_demand(&ledger, &registry, &RegionId::new(r), &sds).unwrap()
    };
    assert!((demand("LAZ") - 13.0 / 3.0).abs() < 1e-12);
    assert!((demand("LOM") - 8.0).abs() < 1e-12);
    assert!((demand("MOL") - 0.0).abs() < 1e-12);
    let extra = |r: &str| {
        annual_extra_regional_demand(&ledger, &registry, &RegionId::new(r), &sds).unwrap()
    };
    assert!((extra("LAZ") - 3.0).abs() < 1e-12);
    assert!(extra("LOM") <= demand("LOM"));
}

#[test]
fn fixture_alpha_calibration() {
    let dir = fixture_dir();
    let registry = load_registry(&dir).unwrap();
    let reader = BufReader::new(File::open(dir.join("publications.jsonl")).unwrap());
    let ingested = ingest_publications(reader, &registry, "publications.jsonl").unwrap();
    let corpus = filter_dataset(
        ingested.publications,
        Window::new(2001, 2003).unwrap(),
        registry.sds().map(|s| s.id.clone()).collect(),
    );
    // each fixture publication has exactly one academic author
    let alpha = calibrate_alpha(&corpus, None).unwrap();
    assert!((alpha - 1.0).abs() < 1e-12);
    let alpha = calibrate_alpha(&corpus, Some(&SdsId::new("BIO/10"))).unwrap();
    assert!((alpha - 1.0).abs() < 1e-12);
}

#[test]
fn ledger_round_trips_through_export() {
    let (registry, ledger) = load_fixture();
    let exported = ledger.export_jsonl().unwrap();
    let imported = CollabLedger::import_jsonl(exported.as_bytes(), &registry, "x").unwrap();
    assert_eq!(ledger, imported);
    assert_eq!(exported, imported.export_jsonl().unwrap());
}

#[test]
fn lazio_focus_matches_expected_shape() {
    let (registry, ledger) = load_fixture();
    let sds = SdsId::new("BIO/10");
    let focus = region_focus(&ledger, &registry, &RegionId::new("LAZ"), &sds).unwrap();
    // seven enterprise seats, 13 events of which 4 intra and 9 extra
    assert_eq!(focus.enterprises.len(), 7);
    let total: u64 = focus.enterprises.iter().map(|s| s.total).sum();
    let intra: u64 = focus.enterprises.iter().map(|s| s.intra).sum();
    let extra: u64 = focus.enterprises.iter().map(|s| s.extra).sum();
    assert_eq!((total, intra, extra), (13, 4, 9));
    // four universities active in the sector
    assert_eq!(focus.universities.len(), 4);
    // Tor Vergata links one local seat and three extra-regional seats
    let tor_vergata: Vec<_> = focus
        .edges
        .iter()
        .filter(|e| e.university_id.as_str() == "U36")
        .collect();
    let local = tor_vergata
        .iter()
        .filter(|e| e.locality == Locality::Intra)
        .count();
    let extra_seats = tor_vergata
        .iter()
        .filter(|e| e.locality == Locality::Extra)
        .count();
    assert_eq!((local, extra_seats), (1, 3));
    // demand-side reconciliation: seat totals equal demand times years
    let demand = annual_regional_demand(&ledger, &registry, &RegionId::new("LAZ"), &sds).unwrap();
    assert!((total as f64 - demand * ledger.window.years()).abs() < 1e-9);
}

#[test]
fn csv_matches_json_after_rounding() {
    use collabmarket::market::{correspondence_table, market_summary, regional_market_table};
    use collabmarket::performance::performance_table;
    use collabmarket::report::{emit, round2, Artifact, Format};

    let (registry, ledger) = load_fixture();
    let sds = SdsId::new("BIO/10");
    let perf = performance_table(&registry, &ledger, &sds, 0.5).unwrap();
    let corr = correspondence_table(&registry, &ledger, &sds, 0.5).unwrap();
    let market = regional_market_table(&ledger, &registry).unwrap();
    let summary = market_summary(&market);
    for artifact in [
        Artifact::Performance(&perf),
        Artifact::Correspondence(&corr),
        Artifact::Market(&market, &summary),
    ] {
        let mut csv_bytes = Vec::new();
        emit(artifact, Format::Csv, &mut csv_bytes).unwrap();
        let mut json_bytes = Vec::new();
        emit(artifact, Format::Json, &mut json_bytes).unwrap();
        let json: serde_json::Value = serde_json::from_slice(&json_bytes).unwrap();
        let rows = json["rows"].as_array().unwrap();

        let mut reader = csv::Reader::from_reader(csv_bytes.as_slice());
        let headers = reader.headers().unwrap().clone();
        let records: Vec<csv::StringRecord> =
            reader.records().map(|r| r.unwrap()).collect();
        assert_eq!(records.len(), rows.len());
        for (record, row) in records.iter().zip(rows) {
            for (header, cell) in headers.iter().zip(record.iter()) {
                let value = &row[header];
                match value {
                    serde_json::Value::Null => assert_eq!(cell, "NA", "{header}"),
                    serde_json::Value::Number(n) => {
                        let parsed: f64 = cell.parse().unwrap();
                        let unrounded = n.as_f64().unwrap();
                        assert!(
                            (parsed - round2(unrounded)).abs() < 1e-9,
                            "{header}: csv {parsed} vs rounded json {unrounded}"
                        );
                    }
                    serde_json::Value::String(s) => assert_eq!(cell, s, "{header}"),
                    other => panic!("unexpected json cell {other:?}"),
                }
            }
        }
    }
}

#[test]
fn empty_market_table_emits_header_only() {
    use collabmarket::market::{market_summary, regional_market_table};
    use collabmarket::report::{emit, Artifact, Format};

    let (registry, mut ledger) = load_fixture();
    ledger.ue_events.clear();
    ledger.sds_events.clear();
    let rows = regional_market_table(&ledger, &registry).unwrap();
    assert!(rows.is_empty());
    let summary = market_summary(&rows);
    let mut bytes = Vec::new();
    emit(Artifact::Market(&rows, &summary), Format::Csv, &mut bytes).unwrap();
    let text = String::from_utf8(bytes).unwrap();
    assert_eq!(text.lines().count(), 1);
    assert!(text.starts_with("region_id,"));
}

#[test]
fn eventless_region_focus_is_empty() {
    let (registry, ledger) = load_fixture();
    let focus = region_focus(
        &ledger,
        &registry,
        &RegionId::new("MOL"),
        &SdsId::new("BIO/10"),
    )
    .unwrap();
    assert!(focus.enterprises.is_empty());
    assert!(focus.universities.is_empty());
    assert!(focus.edges.is_empty());
}
