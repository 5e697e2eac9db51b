//! Run configuration: an optional TOML file overlaid with command-line flags.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    JsonLines,
}

/// Every setting a command may read. Unset fields fall back to per-command defaults.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub n_shots: Option<usize>,
    pub p_announce: Option<f64>,
    #[serde(rename = "apparatus_D")]
    pub apparatus_d: Option<f64>,
    pub attack_d: Option<f64>,
    pub message_bit: Option<u8>,
    pub seed: Option<u64>,
    pub output_path: Option<PathBuf>,
    pub format: Option<Format>,
    pub grid_step: Option<f64>,
    pub k_list: Option<Vec<usize>>,
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {}", path.display(), e.message())))
    }

    /// Fields set in `flags` replace those in `self`.
    pub fn overlay(self, flags: RunConfig) -> Self {
        Self {
            n_shots: flags.n_shots.or(self.n_shots),
            p_announce: flags.p_announce.or(self.p_announce),
            apparatus_d: flags.apparatus_d.or(self.apparatus_d),
            attack_d: flags.attack_d.or(self.attack_d),
            message_bit: flags.message_bit.or(self.message_bit),
            seed: flags.seed.or(self.seed),
            output_path: flags.output_path.or(self.output_path),
            format: flags.format.or(self.format),
            grid_step: flags.grid_step.or(self.grid_step),
            k_list: flags.k_list.or(self.k_list),
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.n_shots == Some(0) {
            return Err(field("n_shots", "must be at least 1"));
        }
        if let Some(p) = self.p_announce {
            if !(0.0..=1.0).contains(&p) {
                return Err(field("p_announce", format!("{p} is not a probability")));
            }
        }
        for (name, value) in [("apparatus_D", self.apparatus_d), ("attack_d", self.attack_d)] {
            if let Some(v) = value {
                if !(0.0..=0.5).contains(&v) {
                    return Err(field(name, format!("{v} is outside [0, 0.5]")));
                }
            }
        }
        if let Some(b) = self.message_bit {
            if b > 1 {
                return Err(field("message_bit", format!("{b} is not 0 or 1")));
            }
        }
        if let Some(step) = self.grid_step {
            if !(step > 0.0 && step <= 0.5) {
                return Err(field("grid_step", format!("{step} must be in (0, 0.5]")));
            }
        }
        if let Some(ks) = &self.k_list {
            if ks.is_empty() {
                return Err(field("k_list", "is empty"));
            }
        }
        Ok(())
    }
}

fn field(name: &str, problem: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("`{name}` {problem}"))
}

pub fn parse_k_list(text: &str) -> Result<Vec<usize>, String> {
    text.split(',')
        .map(|part| {
            part.trim()
                .parse::<usize>()
                .map_err(|_| format!("`{}` is not a non-negative integer", part.trim()))
        })
        .collect()
}
