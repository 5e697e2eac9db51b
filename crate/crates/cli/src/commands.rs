use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use eavesdrop_core::channel::ChannelParams;
use eavesdrop_core::detection::{detection_report, DetectionOptions, DEFAULT_GRID_STEP};
use eavesdrop_core::infotheory::{fuchs_bound, mutual_info_bc, mutual_info_be_k};
use eavesdrop_core::protocol::{bob_aggregate_decode, run_protocol_seeded, ProtocolConfig};
use eavesdrop_core::transcript::{read_transcript, write_transcript, TranscriptView};
use eavesdrop_core::{build_probe_attack, Bit, DetectionReport};
use serde_json::{Map, Value};

use crate::config::{Format, RunConfig};
use crate::error::CliError;
use crate::output::{format_number, io_error, open_output, to_rounded_json, Table};

pub const DEFAULT_SHOTS: usize = 1000;
pub const DEFAULT_P_ANNOUNCE: f64 = 0.1;
pub const DEFAULT_CURVE_SHOTS: usize = 10;
pub const DEFAULT_CURVE_P_ANNOUNCE: f64 = 0.5;
pub const DEFAULT_CURVE_STEP: f64 = 0.01;
pub const DEFAULT_K_LIST: [usize; 4] = [1, 3, 5, 7];

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum CurveKind {
    EveInfo,
    BcInfo,
    FuchsBound,
}

pub fn report_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".report.json");
    PathBuf::from(name)
}

fn detection_options(config: &RunConfig) -> DetectionOptions {
    DetectionOptions {
        grid_step: config.grid_step.unwrap_or(DEFAULT_GRID_STEP),
        ..DetectionOptions::default()
    }
}

fn write_report(report: &DetectionReport, out: &mut dyn Write) -> Result<(), CliError> {
    writeln!(out, "{}", to_rounded_json(report)?).map_err(io_error)?;
    out.flush().map_err(io_error)
}

pub fn simulate(config: &RunConfig) -> Result<(), CliError> {
    let out = config
        .output_path
        .clone()
        .ok_or_else(|| CliError::Config("`output_path` is required (use --out)".into()))?;
    let apparatus = ChannelParams::symmetric(config.apparatus_d.unwrap_or(0.0))?;
    let protocol = ProtocolConfig::new(
        config.n_shots.unwrap_or(DEFAULT_SHOTS),
        config.p_announce.unwrap_or(DEFAULT_P_ANNOUNCE),
        apparatus,
        config.seed.unwrap_or(0),
    )?;
    let bit = Bit::from_u8(config.message_bit.unwrap_or(0)).unwrap_or_default();
    let attack = config.attack_d.map(build_probe_attack).transpose()?;
    let transcript = run_protocol_seeded(&protocol, bit, attack.as_ref())?;

    let mut sink = open_output(Some(&out))?;
    write_transcript(&transcript, TranscriptView::Full, &mut sink)?;
    drop(sink);

    let report = detection_report(&transcript, &detection_options(config))?;
    let report_file = report_path(&out);
    write_report(&report, open_output(Some(&report_file))?.as_mut())?;

    // Bob's per-shot error rate is at least the apparatus rate and at most 1/2
    let assumed = report.d_mean.unwrap_or(0.0).max(report.apparatus_d).min(0.5);
    let decode = bob_aggregate_decode(&transcript, assumed)?;
    println!("decoded bit: {}", decode.bit);
    println!("confidence: {}", format_number(decode.confidence));
    println!("decodable shots: {} read 0, {} read 1", decode.votes[0], decode.votes[1]);
    println!("transcript: {}", out.display());
    println!("report: {}", report_file.display());
    Ok(())
}

pub fn detect(path: &Path, config: &RunConfig) -> Result<(), CliError> {
    let file = File::open(path).map_err(|e| CliError::Io(format!("cannot open {}: {e}", path.display())))?;
    let transcript = read_transcript(BufReader::new(file)).map_err(|e| match e {
        eavesdrop_core::Error::Parse { .. } | eavesdrop_core::Error::MissingPrivateFields { .. } => {
            CliError::Parse(format!("{}: {e}", path.display()))
        }
        other => CliError::from(other),
    })?;
    let report = detection_report(&transcript, &detection_options(config))?;
    write_report(&report, open_output(config.output_path.as_deref())?.as_mut())
}

fn strength_grid(step: f64) -> Vec<f64> {
    let intervals = (0.5 / step).round().max(1.0) as usize;
    (0..=intervals).map(|i| 0.5 * i as f64 / intervals as f64).collect()
}

pub fn curves(kind: CurveKind, config: &RunConfig) -> Result<(), CliError> {
    let grid = strength_grid(config.grid_step.unwrap_or(DEFAULT_CURVE_STEP));
    let mut params = Map::new();
    params.insert("grid_step".into(), Value::from(config.grid_step.unwrap_or(DEFAULT_CURVE_STEP)));
    let (name, columns, rows) = match kind {
        CurveKind::EveInfo => {
            let mut ks: Vec<usize> = DEFAULT_K_LIST.to_vec();
            ks.extend(config.k_list.iter().flatten());
            ks.sort_unstable();
            ks.dedup();
            params.insert("k_list".into(), Value::from(ks.clone()));
            let mut columns = vec!["d".to_string()];
            columns.extend(ks.iter().map(|k| format!("I_{k}")));
            let mut rows = Vec::with_capacity(grid.len());
            for &d in &grid {
                let mut row = vec![d];
                for &k in &ks {
                    row.push(mutual_info_be_k(k, d)?);
                }
                rows.push(row);
            }
            ("eve_info", columns, rows)
        }
        CurveKind::BcInfo => {
            let n = config.n_shots.unwrap_or(DEFAULT_CURVE_SHOTS);
            let pa = config.p_announce.unwrap_or(DEFAULT_CURVE_P_ANNOUNCE);
            params.insert("n_shots".into(), Value::from(n));
            params.insert("p_announce".into(), Value::from(pa));
            let mut rows = Vec::with_capacity(grid.len());
            for &d in &grid {
                rows.push(vec![d, mutual_info_bc(n, pa, d)?.value]);
            }
            ("bc_info", vec!["D".to_string(), "I_BC".to_string()], rows)
        }
        CurveKind::FuchsBound => {
            let mut rows = Vec::with_capacity(grid.len());
            for &d in &grid {
                rows.push(vec![d, fuchs_bound(d)?]);
            }
            ("fuchs_bound", vec!["d".to_string(), "bound".to_string()], rows)
        }
    };
    let table = Table {
        kind: name.to_string(),
        params,
        columns,
        rows,
    };
    let mut out = open_output(config.output_path.as_deref())?;
    table.write(config.format.unwrap_or(Format::Csv), out.as_mut())
}
