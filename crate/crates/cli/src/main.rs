//! Command line front end: ingest publications into a persisted event
//! ledger, then derive the market, correspondence, performance, quadrant and
//! focus tables from it. Every flag has a `COLLABMARKET_*` environment
//! variable equivalent; flags take precedence over the environment, the
//! environment over defaults. Identical inputs and flags produce
//! byte-identical artifacts for any `--jobs` value.

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use collabmarket::collab::{build_ledger, CollabLedger};
use collabmarket::corpus::{filter_dataset, ingest_publications, Corpus, Window};
use collabmarket::market::{
    calibrate_alpha, correspondence_table, market_summary, regional_market_table, DEFAULT_ALPHA,
};
use collabmarket::oracle::{gen_corpus, verify_seed, SynthParams};
use collabmarket::performance::{performance_table, quadrant_classify, DEFAULT_WEIGHT_EXTRA};
use collabmarket::registry::load_registry;
use collabmarket::report::{emit, region_focus, Artifact, Format};
use collabmarket::{Error, RegionId, Registry, Result, SdsId};
use rayon::prelude::*;
use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

const TABLE_HELP: &str = "\
Table kinds and column schemas (all schema version 1):
  market          region_id,n_universities,university_collabs,university_share,
                  rank_university_collabs,n_enterprises,enterprise_collabs,
                  enterprise_share,rank_enterprise_collabs,intra_collabs,
                  intra_share_university,rank_intra_share_university,
                  intra_share_enterprise,rank_intra_share_enterprise
  correspondence  university_id,sds_id,region_id,staff,staff_share,
                  annual_regional_demand,demand_share,university_correspondence,
                  region_correspondence
  performance     university_id,sds_id,region_id,annual_regional_demand,
                  annual_intra_supply,expected_intra_supply,intra_performance,
                  annual_extra_supply,expected_extra_supply,extra_performance,
                  overall_performance
  quadrants       university_id,intra_performance,extra_performance,quadrant
                  (plot data: x,y,label)
  focus           record,university_id,seat_id,partner_region_id,staff,intra,extra,count

CSV cells are rounded half-up to two decimals and undefined values print as
NA; the JSON mirrors carry unrounded values with null for undefined. See
docs/schemas.md for the full format notes.";

#[derive(Parser)]
#[command(name = "collabmarket", version, about = "University-industry collaboration analytics", after_long_help = TABLE_HELP)]
struct Cli {
    /// Worker threads for parallel stages (0 = automatic). Output bytes do
    /// not depend on this.
    #[arg(long, global = true, env = "COLLABMARKET_JOBS", default_value_t = 0)]
    jobs: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RegistryArg {
    /// Directory holding regions.csv, universities.csv, enterprises.csv,
    /// sds.csv and staff.csv.
    #[arg(long, env = "COLLABMARKET_REGISTRY")]
    registry: PathBuf,
}

#[derive(Args)]
struct LedgerArg {
    /// Event ledger written by `ingest`.
    #[arg(long, env = "COLLABMARKET_LEDGER")]
    ledger: PathBuf,
}

#[derive(Args)]
struct OutputArgs {
    /// Output encoding.
    #[arg(long, value_enum, env = "COLLABMARKET_FORMAT", default_value_t = OutputFormat::Csv)]
    format: OutputFormat,

    /// Destination path, `-` for stdout.
    #[arg(long, default_value = "-")]
    out: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Csv,
    Json,
    Plotdata,
}

impl From<OutputFormat> for Format {
    fn from(f: OutputFormat) -> Format {
        match f {
            OutputFormat::Csv => Format::Csv,
            OutputFormat::Json => Format::Json,
            OutputFormat::Plotdata => Format::PlotData,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Parse publications, validate and filter them, and write the event
    /// ledger plus a corpus summary.
    Ingest {
        #[command(flatten)]
        registry: RegistryArg,

        /// Line-delimited publication records.
        #[arg(long, env = "COLLABMARKET_PUBLICATIONS")]
        publications: PathBuf,

        /// Observation window, `START:END` inclusive or a single year.
        #[arg(long, env = "COLLABMARKET_WINDOW", value_parser = parse_window)]
        window: Window,

        /// Comma-separated sds ids in scope (default: every sds in the
        /// registry).
        #[arg(long, env = "COLLABMARKET_SDS_SCOPE", value_delimiter = ',')]
        sds_scope: Vec<String>,

        /// Ledger destination.
        #[arg(long)]
        out: PathBuf,

        /// Corpus summary destination, `-` for stdout.
        #[arg(long, default_value = "-")]
        summary: PathBuf,
    },

    /// Regional market table from the university-enterprise events.
    Market {
        #[command(flatten)]
        registry: RegistryArg,
        #[command(flatten)]
        ledger: LedgerArg,
        #[command(flatten)]
        output: OutputArgs,
    },

    /// Degree-of-correspondence table for one sector.
    Correspondence {
        #[command(flatten)]
        registry: RegistryArg,
        #[command(flatten)]
        ledger: LedgerArg,

        /// Sector to analyze.
        #[arg(long, env = "COLLABMARKET_SDS")]
        sds: String,

        /// Researchers-per-collaboration coefficient.
        #[arg(long, env = "COLLABMARKET_ALPHA", default_value_t = DEFAULT_ALPHA)]
        alpha: f64,

        /// Calibrate alpha from this publication file instead of using
        /// --alpha (reciprocal of the mean distinct university authors per
        /// accepted publication).
        #[arg(long)]
        calibrate_from: Option<PathBuf>,

        #[command(flatten)]
        output: OutputArgs,
    },

    /// Performance table and quadrant classification for one sector.
    Performance {
        #[command(flatten)]
        registry: RegistryArg,
        #[command(flatten)]
        ledger: LedgerArg,

        /// Sector to analyze.
        #[arg(long, env = "COLLABMARKET_SDS")]
        sds: String,

        /// Weight of the extra-regional component in overall performance.
        #[arg(long, env = "COLLABMARKET_WEIGHT_EXTRA", default_value_t = DEFAULT_WEIGHT_EXTRA)]
        weight_extra: f64,

        /// Quadrant report destination (JSON with unrounded medians).
        #[arg(long)]
        quadrants: Option<PathBuf>,

        /// Quadrant plot data destination (x,y,label CSV).
        #[arg(long)]
        quadrants_plot: Option<PathBuf>,

        #[command(flatten)]
        output: OutputArgs,
    },

    /// Collaboration geography of one region in one sector.
    Focus {
        #[command(flatten)]
        registry: RegistryArg,
        #[command(flatten)]
        ledger: LedgerArg,

        /// Region to focus on.
        #[arg(long, env = "COLLABMARKET_REGION")]
        region: String,

        /// Sector to analyze.
        #[arg(long, env = "COLLABMARKET_SDS")]
        sds: String,

        #[command(flatten)]
        output: OutputArgs,
    },

    /// Generate a seeded synthetic registry and publication file.
    Synth {
        /// Generator seed.
        #[arg(long)]
        seed: u64,

        /// Number of publications.
        #[arg(long, default_value_t = 50)]
        pubs: usize,

        /// Entity pool sizes.
        #[arg(long, default_value_t = 4)]
        regions: usize,
        #[arg(long, default_value_t = 8)]
        universities: usize,
        #[arg(long, default_value_t = 6)]
        seats: usize,
        #[arg(long, default_value_t = 3)]
        sds_count: usize,

        /// Destination directory for the registry CSVs and
        /// publications.jsonl.
        #[arg(long)]
        out_dir: PathBuf,
    },

    /// Cross-check the counting formulas against brute-force enumeration
    /// over seeded synthetic corpora and print a JSON summary.
    Verify {
        /// Number of seeds to sweep.
        #[arg(long, default_value_t = 1000)]
        seeds: u64,

        /// Publication cap per corpus.
        #[arg(long, default_value_t = 50)]
        pubs: usize,
    },
}

fn parse_window(raw: &str) -> std::result::Result<Window, String> {
    let (start, end) = match raw.split_once(':') {
        Some((a, b)) => (a, b),
        None => (raw, raw),
    };
    let start: i32 = start
        .trim()
        .parse()
        .map_err(|_| format!("invalid year '{start}'"))?;
    let end: i32 = end
        .trim()
        .parse()
        .map_err(|_| format!("invalid year '{end}'"))?;
    Window::new(start, end).map_err(|e| e.to_string())
}

fn open_reader(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn write_output(path: &Path, bytes: &[u8]) -> Result<()> {
    if path.as_os_str() == "-" {
        std::io::stdout().write_all(bytes)?;
        return Ok(());
    }
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    std::fs::write(path, bytes).map_err(|e| {
        Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
    })
}

fn emit_to(path: &Path, artifact: Artifact<'_>, format: Format) -> Result<()> {
    let mut buffer = Vec::new();
    emit(artifact, format, &mut buffer)?;
    write_output(path, &buffer)
}

fn load_ledger(path: &Path, registry: &Registry) -> Result<CollabLedger> {
    CollabLedger::import_jsonl(open_reader(path)?, registry, &path.display().to_string())
}

fn scope_from(registry: &Registry, sds_scope: &[String]) -> Result<BTreeSet<SdsId>> {
    if sds_scope.is_empty() {
        return Ok(registry.sds().map(|s| s.id.clone()).collect());
    }
    let mut scope = BTreeSet::new();
    for raw in sds_scope {
        let id = SdsId::new(raw.clone());
        registry.sds_entry(&id)?;
        scope.insert(id);
    }
    Ok(scope)
}

fn load_corpus(
    registry: &Registry,
    publications: &Path,
    window: Window,
    sds_scope: &[String],
) -> Result<(Corpus, Vec<String>)> {
    let ingested = ingest_publications(
        open_reader(publications)?,
        registry,
        &publications.display().to_string(),
    )?;
    let scope = scope_from(registry, sds_scope)?;
    let corpus = filter_dataset(ingested.publications, window, scope);
    Ok((corpus, ingested.warnings))
}

fn corpus_summary_csv(corpus: &Corpus, warnings: usize) -> String {
    let summary = corpus.summary();
    let mut out = String::from("metric,count\n");
    out.push_str(&format!("ingested,{}\n", summary.accepted + summary.rejected));
    out.push_str(&format!("accepted,{}\n", summary.accepted));
    out.push_str(&format!("rejected,{}\n", summary.rejected));
    for (reason, count) in &summary.rejected_by_reason {
        out.push_str(&format!("rejected_{reason},{count}\n"));
    }
    out.push_str(&format!("warnings,{warnings}\n"));
    out
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Ingest {
            registry,
            publications,
            window,
            sds_scope,
            out,
            summary,
        } => {
            let registry = load_registry(&registry.registry)?;
            let (corpus, warnings) = load_corpus(&registry, &publications, window, &sds_scope)?;
            let ledger = build_ledger(&corpus, &registry)?;
            write_output(&out, ledger.export_jsonl()?.as_bytes())?;
            write_output(&summary, corpus_summary_csv(&corpus, warnings.len()).as_bytes())
        }
        Command::Market {
            registry,
            ledger,
            output,
        } => {
            let registry = load_registry(&registry.registry)?;
            let ledger = load_ledger(&ledger.ledger, &registry)?;
            let rows = regional_market_table(&ledger, &registry)?;
            let summary = market_summary(&rows);
            emit_to(&output.out, Artifact::Market(&rows, &summary), output.format.into())
        }
        Command::Correspondence {
            registry,
            ledger,
            sds,
            alpha,
            calibrate_from,
            output,
        } => {
            let registry = load_registry(&registry.registry)?;
            let ledger = load_ledger(&ledger.ledger, &registry)?;
            let sds = SdsId::new(sds);
            let alpha = match calibrate_from {
                None => {
                    if !(alpha > 0.0) {
                        return Err(Error::Validation(format!(
                            "alpha must be positive, got {alpha}"
                        )));
                    }
                    alpha
                }
                Some(path) => {
                    let (corpus, _) =
                        load_corpus(&registry, &path, ledger.window, &[])?;
                    calibrate_alpha(&corpus, Some(&sds))?
                }
            };
            let rows = correspondence_table(&registry, &ledger, &sds, alpha)?;
            emit_to(&output.out, Artifact::Correspondence(&rows), output.format.into())
        }
        Command::Performance {
            registry,
            ledger,
            sds,
            weight_extra,
            quadrants,
            quadrants_plot,
            output,
        } => {
            let registry = load_registry(&registry.registry)?;
            let ledger = load_ledger(&ledger.ledger, &registry)?;
            let sds = SdsId::new(sds);
            let rows = performance_table(&registry, &ledger, &sds, weight_extra)?;
            emit_to(&output.out, Artifact::Performance(&rows), output.format.into())?;
            if quadrants.is_some() || quadrants_plot.is_some() {
                let report = quadrant_classify(&rows)?;
                if let Some(path) = quadrants {
                    emit_to(&path, Artifact::Quadrants(&report), Format::Json)?;
                }
                if let Some(path) = quadrants_plot {
                    emit_to(&path, Artifact::Quadrants(&report), Format::PlotData)?;
                }
            }
            Ok(())
        }
        Command::Focus {
            registry,
            ledger,
            region,
            sds,
            output,
        } => {
            let registry = load_registry(&registry.registry)?;
            let ledger = load_ledger(&ledger.ledger, &registry)?;
            let focus = region_focus(
                &ledger,
                &registry,
                &RegionId::new(region),
                &SdsId::new(sds),
            )?;
            emit_to(&output.out, Artifact::Focus(&focus), output.format.into())
        }
        Command::Synth {
            seed,
            pubs,
            regions,
            universities,
            seats,
            sds_count,
            out_dir,
        } => {
            let params = SynthParams {
                seed,
                n_regions: regions,
                n_universities: universities,
                n_seats: seats,
                n_sds: sds_count,
                n_publications: pubs,
                window: Window::new(2001, 2003)?,
                max_extra_authors: 6,
                kind_weights: [3.0, 2.0, 1.0, 1.0],
            };
            let (registry, corpus) = gen_corpus(&params)?;
            std::fs::create_dir_all(&out_dir)?;
            write_registry_csvs(&registry, &out_dir)?;
            write_output(
                &out_dir.join("publications.jsonl"),
                collabmarket::corpus::export_publications_jsonl(&corpus.publications)?.as_bytes(),
            )
        }
        Command::Verify { seeds, pubs } => {
            let reports = (0..seeds)
                .into_par_iter()
                .map(|seed| verify_seed(seed, pubs))
                .collect::<Result<Vec<_>>>()?;
            let mismatches: usize = reports.iter().map(|r| r.ledger_mismatches).sum();
            let law_violations: usize = reports.iter().map(|r| r.count_law_violations).sum();
            let conservation_violations: usize =
                reports.iter().map(|r| r.conservation_violations).sum();
            let dirty: Vec<u64> = reports
                .iter()
                .filter(|r| !r.is_clean())
                .map(|r| r.seed)
                .collect();
            let summary = serde_json::json!({
                "seeds": seeds,
                "max_publications": pubs,
                "mismatches": mismatches,
                "count_law_violations": law_violations,
                "conservation_violations": conservation_violations,
                "failing_seeds": dirty,
                "status": if dirty.is_empty() { "ok" } else { "mismatch" },
            });
            println!("{summary}");
            if dirty.is_empty() {
                Ok(())
            } else {
                Err(Error::Validation(format!(
                    "oracle sweep found {} failing seeds",
                    dirty.len()
                )))
            }
        }
    }
}

fn write_registry_csvs(registry: &Registry, dir: &Path) -> Result<()> {
    let mut regions = String::from("id,name\n");
    for r in registry.regions() {
        regions.push_str(&format!("{},{}\n", r.id, r.name));
    }
    let mut universities = String::from("id,name,region_id\n");
    for u in registry.universities() {
        universities.push_str(&format!("{},{},{}\n", u.id, u.name, u.region_id));
    }
    let mut seats = String::from("id,name,region_id\n");
    for s in registry.seats() {
        seats.push_str(&format!("{},{},{}\n", s.id, s.name, s.region_id));
    }
    let mut sds = String::from("id,name,discipline\n");
    for s in registry.sds() {
        sds.push_str(&format!("{},{},{}\n", s.id, s.name, s.discipline));
    }
    let mut staff = String::from("university_id,sds_id,researcher_count\n");
    for u in registry.universities() {
        for s in registry.sds() {
            let count = registry.staff_count(&u.id, &s.id)?;
            if count > 0.0 {
                staff.push_str(&format!("{},{},{}\n", u.id, s.id, count));
            }
        }
    }
    write_output(&dir.join("regions.csv"), regions.as_bytes())?;
    write_output(&dir.join("universities.csv"), universities.as_bytes())?;
    write_output(&dir.join("enterprises.csv"), seats.as_bytes())?;
    write_output(&dir.join("sds.csv"), sds.as_bytes())?;
    write_output(&dir.join("staff.csv"), staff.as_bytes())
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // --help and --version are not errors
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                std::process::exit(0);
            }
            let _ = e.print();
            eprintln!("error: usage: {}", one_line(&e.to_string()));
            std::process::exit(1);
        }
    };
    let outcome = if cli.jobs == 0 {
        run(cli.command)
    } else {
        match rayon::ThreadPoolBuilder::new().num_threads(cli.jobs).build() {
            Ok(pool) => pool.install(|| run(cli.command)),
            Err(e) => Err(Error::Internal(format!("thread pool: {e}"))),
        }
    };
    match outcome {
        Ok(()) => {}
        Err(e) => {
            eprintln!("error: {}: {}", e.kind(), one_line(&e.to_string()));
            std::process::exit(e.exit_code());
        }
    }
}

fn one_line(message: &str) -> String {
    message.split_whitespace().collect::<Vec<_>>().join(" ")
}
