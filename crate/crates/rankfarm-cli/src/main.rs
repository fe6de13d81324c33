//! Command-line front end: validate templates, run the match+rank pipeline,
//! export radar data, or serve the HTTP broker.
//!
//! Exit codes are a stable contract: 0 ok, 2 validation failure, 3 empty
//! functional match, 4 io/config problem, 5 internal error. Diagnostics go
//! to stderr as `ERROR <code>: <detail>`, one per line.

use std::io::Write;
use std::net::SocketAddr;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use rankfarm_core::{
    ahp_rank_with, kiviat_export, load_hierarchy, load_offerings, load_requirements,
    match_offerings, render_kiviat, render_report, Error, LoadMode, RankConfig, ReportFormat,
    ReportSection, RequirementSet, SubVectorSet,
};

#[derive(Parser)]
#[command(name = "rankfarm", version, about = "Rank cloud renderfarm services by functional fit and weighted QoS")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Text,
    Json,
    Csv,
}

impl From<FormatArg> for ReportFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Text => ReportFormat::Text,
            FormatArg::Json => ReportFormat::Json,
            FormatArg::Csv => ReportFormat::Csv,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ShowArg {
    Sub,
    Top,
    Groups,
    Final,
    All,
}

impl From<ShowArg> for ReportSection {
    fn from(s: ShowArg) -> Self {
        match s {
            ShowArg::Sub => ReportSection::Sub,
            ShowArg::Top => ReportSection::Top,
            ShowArg::Groups => ReportSection::Groups,
            ShowArg::Final => ReportSection::Final,
            ShowArg::All => ReportSection::All,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Load and validate the hierarchy and offerings templates.
    Validate {
        #[arg(long)]
        hierarchy: PathBuf,
        #[arg(long)]
        offerings: PathBuf,
        /// Reject weights that need renormalization instead of repairing them.
        #[arg(long)]
        strict: bool,
    },
    /// Match offerings against the requirements and print the ranking report.
    Rank {
        #[arg(long)]
        hierarchy: PathBuf,
        #[arg(long)]
        offerings: PathBuf,
        #[arg(long)]
        requirements: PathBuf,
        #[arg(long, value_enum, default_value = "text")]
        format: FormatArg,
        /// Report sections to print (text/csv; json always carries all).
        #[arg(long, value_enum, default_value = "all")]
        show: ShowArg,
        #[arg(long)]
        strict: bool,
        /// Replace computed sub-level vectors with the ones in this file.
        #[arg(long)]
        inject: Option<PathBuf>,
        #[arg(long, default_value_t = 1e-12)]
        eigen_tol: f64,
        #[arg(long, default_value_t = 1000)]
        eigen_max_iter: usize,
        /// Smoothing for close/exact tendency deviations.
        #[arg(long, default_value_t = 1e-9)]
        epsilon: f64,
    },
    /// Export per-service radar-chart data from the ranking.
    Kiviat {
        #[arg(long)]
        hierarchy: PathBuf,
        #[arg(long)]
        offerings: PathBuf,
        /// Optional; defaults to no constraints and hierarchy weights.
        #[arg(long)]
        requirements: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "json")]
        format: FormatArg,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        strict: bool,
        #[arg(long)]
        inject: Option<PathBuf>,
    },
    /// Run the JSON-over-HTTP broker until interrupted.
    Serve {
        /// Listen address; falls back to RANKFARM_ADDR, then 127.0.0.1:8080.
        #[arg(long)]
        addr: Option<String>,
        /// Registry snapshot file, loaded on start and written on shutdown;
        /// falls back to RANKFARM_SNAPSHOT.
        #[arg(long)]
        snapshot: Option<PathBuf>,
    },
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Io(_) | Error::UnsupportedFormat(_) => 4,
        Error::EmptyMatch => 3,
        Error::NoConvergence { .. } => 5,
        _ => 2,
    }
}

fn mode(strict: bool) -> LoadMode {
    if strict {
        LoadMode::Strict
    } else {
        LoadMode::Lenient
    }
}

fn print_warnings(warnings: &[String]) {
    for w in warnings {
        eprintln!("warning: {w}");
    }
}

fn write_output(bytes: &[u8], out: Option<&PathBuf>) -> Result<(), Error> {
    match out {
        None => {
            std::io::stdout().write_all(bytes)?;
            Ok(())
        }
        Some(path) => {
            std::fs::write(path, bytes)?;
            Ok(())
        }
    }
}

fn run(command: Command) -> Result<(), Error> {
    match command {
        Command::Validate {
            hierarchy,
            offerings,
            strict,
        } => {
            let (h, warnings) = load_hierarchy(&hierarchy, mode(strict))?;
            print_warnings(&warnings);
            let catalog = load_offerings(&offerings, &h)?;
            eprintln!(
                "ok: {} services validated against {} attributes",
                catalog.offerings.len(),
                h.sub_level.len()
            );
            Ok(())
        }
        Command::Rank {
            hierarchy,
            offerings,
            requirements,
            format,
            show,
            strict,
            inject,
            eigen_tol,
            eigen_max_iter,
            epsilon,
        } => {
            let (h, warnings) = load_hierarchy(&hierarchy, mode(strict))?;
            print_warnings(&warnings);
            let catalog = load_offerings(&offerings, &h)?;
            let requirements = load_requirements(&requirements, &h)?;
            let injected = inject.as_ref().map(SubVectorSet::load).transpose()?;
            let matched = match_offerings(&catalog, &requirements.functional);
            let config = RankConfig {
                eigen_tol,
                eigen_max_iter,
                epsilon,
            };
            if matched.matched.is_empty() {
                for rejection in &matched.rejected {
                    eprintln!(
                        "rejected {} ({:?}): {}",
                        rejection.service_id, rejection.reason, rejection.detail
                    );
                }
            }
            let report = ahp_rank_with(
                &catalog,
                &matched.matched,
                &requirements,
                injected.as_ref(),
                &config,
            )?;
            let bytes = render_report(&report, format.into(), show.into())?;
            write_output(&bytes, None)
        }
        Command::Kiviat {
            hierarchy,
            offerings,
            requirements,
            format,
            out,
            strict,
            inject,
        } => {
            let (h, warnings) = load_hierarchy(&hierarchy, mode(strict))?;
            print_warnings(&warnings);
            let catalog = load_offerings(&offerings, &h)?;
            let requirements = match requirements {
                Some(path) => load_requirements(&path, &h)?,
                None => RequirementSet::default(),
            };
            let injected = inject.as_ref().map(SubVectorSet::load).transpose()?;
            let matched = match_offerings(&catalog, &requirements.functional);
            let report = ahp_rank_with(
                &catalog,
                &matched.matched,
                &requirements,
                injected.as_ref(),
                &RankConfig::default(),
            )?;
            let records = kiviat_export(&report);
            let bytes = render_kiviat(&records, format.into())?;
            write_output(&bytes, out.as_ref())
        }
        Command::Serve { addr, snapshot } => {
            let addr = addr
                .or_else(|| std::env::var("RANKFARM_ADDR").ok())
                .unwrap_or_else(|| "127.0.0.1:8080".to_string());
            let addr: SocketAddr = addr.parse().map_err(|e| {
                Error::Io(std::io::Error::new(
                    std::io::ErrorKind::InvalidInput,
                    format!("invalid listen address {addr:?}: {e}"),
                ))
            })?;
            let snapshot = snapshot.or_else(|| std::env::var("RANKFARM_SNAPSHOT").ok().map(Into::into));
            let runtime = tokio::runtime::Runtime::new()?;
            runtime.block_on(rankfarm_broker::serve(addr, snapshot))?;
            Ok(())
        }
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            if matches!(err.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{err}");
                std::process::exit(0);
            }
            eprint!("{err}");
            std::process::exit(4);
        }
    };
    match run(cli.command) {
        Ok(()) => {}
        Err(err) => {
            eprintln!("ERROR {}: {err}", err.code());
            std::process::exit(exit_code(&err));
        }
    }
}
