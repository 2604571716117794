use std::collections::BTreeSet;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use textreuse::config::ConfigOverrides;
use textreuse::pipeline::{self, Report, ReportOptions};

#[derive(Parser)]
#[command(version, about = "Text-reuse detection over a JSONL corpus")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    config: ConfigOverrides,
}

#[derive(Subcommand)]
enum Command {
    /// Parse the corpus into the output directory.
    Ingest,
    /// Build the fingerprint index.
    Index,
    /// Compute all-pairs overlap records and flags.
    Scan,
    /// Screen a batch of new submissions and emit admin notes.
    Screen {
        /// JSONL file of new records.
        batch: PathBuf,
    },
    /// Write report tables.
    Report {
        #[arg(value_enum)]
        name: Report,
        /// Restrict citation reports to these countries (comma separated).
        #[arg(long, value_delimiter = ',')]
        countries: Vec<String>,
    },
    /// Export the overlap network of the given authors.
    ExportNetwork {
        #[arg(long = "author", required = true)]
        authors: Vec<String>,
    },
    /// Run ingest, index, scan and every report.
    Run,
    /// Print the effective configuration as TOML.
    DumpConfig,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<(), Box<dyn std::error::Error>> {
    let cfg = cli.config.resolve()?;
    match cli.command {
        Command::Ingest => {
            let r = pipeline::cmd_ingest(&cfg)?;
            println!("ingested {} documents, {} errors", r.ingested, r.errors.len());
        }
        Command::Index => {
            let s = pipeline::cmd_index(&cfg)?;
            println!("indexed {} documents, {} distinct hashes, {} common", s.documents, s.distinct_hashes, s.common_hashes);
        }
        Command::Scan => {
            let s = pipeline::cmd_scan(&cfg)?;
            println!("{} overlap records, {} flagged documents", s.records, s.flagged);
        }
        Command::Screen { batch } => {
            let s = pipeline::cmd_screen(&cfg, &batch)?;
            println!("screened {}, flagged {}, {} errors", s.screened, s.flagged, s.errors.len());
        }
        Command::Report { name, countries } => {
            let countries: BTreeSet<String> = countries.into_iter().map(|c| c.to_ascii_uppercase()).collect();
            let opts = ReportOptions { countries: (!countries.is_empty()).then_some(countries) };
            for path in pipeline::cmd_report(&cfg, name, &opts)? {
                println!("{}", path.display());
            }
        }
        Command::ExportNetwork { authors } => {
            let net = pipeline::cmd_export_network(&cfg, &authors)?;
            println!("{} nodes, {} edges", net.nodes.len(), net.edges.len());
        }
        Command::Run => {
            for o in pipeline::run_all(&cfg, &ReportOptions::default())? {
                match o.error {
                    None => println!("{}: ok", o.report),
                    Some(e) => println!("{}: skipped ({e})", o.report),
                }
            }
        }
        Command::DumpConfig => print!("{}", cfg.to_toml()),
    }
    Ok(())
}
