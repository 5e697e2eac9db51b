//! `eavesdrop`: run the protocol, emit information curves and analyse
//! transcripts for signs of an eavesdropper.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::commands::CurveKind;
use crate::config::{parse_k_list, Format, RunConfig};
use crate::error::CliError;

#[derive(Debug, Clone)]
struct KList(Vec<usize>);

fn k_list(text: &str) -> Result<KList, String> {
    parse_k_list(text).map(KList)
}

#[derive(Debug, Parser)]
#[command(name = "eavesdrop", version, about)]
struct Cli {
    /// TOML file with run settings; flags override it
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Number of shots N
    #[arg(long, global = true)]
    shots: Option<usize>,
    /// Bit-announcement probability p_a
    #[arg(long = "p-announce", global = true)]
    p_announce: Option<f64>,
    /// Apparatus mismatch probability D
    #[arg(long = "apparatus-D", global = true)]
    apparatus_d: Option<f64>,
    /// Strength d of an eavesdropping attack
    #[arg(long = "attack-d", global = true)]
    attack_d: Option<f64>,
    /// Message bit b
    #[arg(long, global = true, value_parser = clap::value_parser!(u8).range(0..=1))]
    bit: Option<u8>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Spacing of the d grid (curves) or of the posterior grid (detect, simulate)
    #[arg(long = "grid-step", global = true)]
    grid_step: Option<f64>,
    /// Extra announcement counts k for eve_info, comma separated
    #[arg(long = "k-list", global = true, value_parser = k_list)]
    k_list: Option<KList>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the protocol, write the transcript and its detection report
    Simulate,
    /// Emit a table of information curves
    Curves {
        #[arg(value_enum)]
        kind: CurveKind,
    },
    /// Recompute the detection report from a transcript
    Detect { path: PathBuf },
}

impl Cli {
    fn run_config(&self) -> Result<RunConfig, CliError> {
        let base = match &self.config {
            Some(path) => RunConfig::from_file(path)?,
            None => RunConfig::default(),
        };
        let flags = RunConfig {
            n_shots: self.shots,
            p_announce: self.p_announce,
            apparatus_d: self.apparatus_d,
            attack_d: self.attack_d,
            message_bit: self.bit,
            seed: self.seed,
            output_path: self.out.clone(),
            format: self.format,
            grid_step: self.grid_step,
            k_list: self.k_list.as_ref().map(|k| k.0.clone()),
        };
        let merged = base.overlay(flags);
        merged.validate()?;
        Ok(merged)
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let config = cli.run_config()?;
    match &cli.command {
        Command::Simulate => commands::simulate(&config),
        Command::Curves { kind } => commands::curves(*kind, &config),
        Command::Detect { path } => commands::detect(path, &config),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("eavesdrop: {e}");
            e.exit_code()
        }
    }
}
