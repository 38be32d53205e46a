//! Command-line front end: run seeded experiments from JSON configs into
//! CSV, chart the CSVs as SVG, and print the simulability regime table.
//! Exit codes: 0 success, 1 breached numerical check, 2 bad config or IO.

mod config;
mod csvout;
mod err;
mod experiments;
mod plot;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use err::Fail;

#[derive(Parser)]
#[command(
    name = "photonsi",
    version,
    about = "multi-photon interferometer pipelines with read-and-replace channels"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the experiment described by a JSON config; results go to --out
    /// as CSV, or to stdout.
    Run {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Chart columns of a result CSV as an SVG line plot.
    Plot {
        csv: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Column for the horizontal axis.
        #[arg(long)]
        x: String,
        /// Columns to draw, comma separated.
        #[arg(long)]
        y: String,
        /// Group rows by this column into one line per value.
        #[arg(long)]
        series: Option<String>,
        /// Also write <out>.dat and <out>.gp sidecars for gnuplot.
        #[arg(long)]
        gnuplot: bool,
    },
    /// Print the simulability regime table as CSV.
    Regimes,
    /// Parse and check a config without running it.
    Validate { config: PathBuf },
}

fn read(path: &PathBuf) -> Result<String, Fail> {
    fs::read_to_string(path).map_err(|e| Fail::Config(format!("{}: {e}", path.display())))
}

fn real_main() -> Result<(), Fail> {
    match Cli::parse().cmd {
        Cmd::Run { config, out } => {
            let cfg = config::parse_config(&read(&config)?)?;
            let rendered = experiments::run(&cfg)?.render();
            match out {
                Some(path) => fs::write(&path, rendered.as_bytes())
                    .map_err(|e| Fail::Config(format!("{}: {e}", path.display())))?,
                None => print!("{rendered}"),
            }
            Ok(())
        }
        Cmd::Plot { csv, out, x, y, series, gnuplot } => {
            plot::run(&csv, &out, &x, &y, series.as_deref(), gnuplot)
        }
        Cmd::Regimes => {
            let mut table = String::from("channel_growth,photon_growth,verdict\n");
            for (c, p, v) in photonsi::probestim::regime_table() {
                table.push_str(&format!("{},{},{}\n", c.label(), p.label(), v.label()));
            }
            print!("{table}");
            Ok(())
        }
        Cmd::Validate { config } => {
            let cfg = config::parse_config(&read(&config)?)?;
            println!("ok: {}", experiments::summary(&cfg)?);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match real_main() {
        Ok(()) => ExitCode::SUCCESS,
        Err(fail) => {
            eprintln!("error: {fail}");
            ExitCode::from(fail.exit_code())
        }
    }
}
