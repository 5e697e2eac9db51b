//! Line-delimited JSON transcripts.
//!
//! The first line is a header object carrying the run configuration; each
//! following line is one shot:
//!
//! ```text
//! {"type":"header","version":1,"n_shots":2,"p_announce":0.5,"apparatus":{...},"seed":7,"message_bit":1,"attack_strength":null}
//! {"index":0,"prepared":"rho+","basis":"s1","kind":"bit","value":1,"alice_m":1}
//! {"index":1,"prepared":"rho0","basis":"s1","kind":"result","value":-1,"alice_m":-1}
//! ```
//!
//! `prepared`, `alice_m` and `eve_outcome` are private records and are left
//! out of a public transcript.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::channel::ChannelParams;
use crate::eavesdropper::EveOutcome;
use crate::error::{Error, Result};
use crate::protocol::{Announcement, AnnouncementKind, Payload, ProtocolConfig, ShotRecord, Transcript};
use crate::qubit::{Basis, Bit, Outcome, Preparation};

pub const TRANSCRIPT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TranscriptView {
    /// Every record, including each party's private data.
    Full,
    /// Only what was said on the public channel.
    Public,
}

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    #[serde(rename = "type")]
    kind: String,
    version: u32,
    n_shots: usize,
    p_announce: f64,
    apparatus: ChannelParams,
    seed: u64,
    message_bit: Bit,
    attack_strength: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ShotLine {
    index: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    prepared: Option<Preparation>,
    basis: Basis,
    kind: AnnouncementKind,
    value: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    alice_m: Option<Outcome>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    eve_outcome: Option<EveOutcome>,
}

pub fn write_transcript<W: Write>(transcript: &Transcript, view: TranscriptView, mut out: W) -> Result<()> {
    let c = &transcript.config;
    let header = Header {
        kind: "header".into(),
        version: TRANSCRIPT_VERSION,
        n_shots: c.n_shots,
        p_announce: c.p_announce,
        apparatus: c.apparatus,
        seed: c.seed,
        message_bit: transcript.message_bit,
        attack_strength: transcript.attack_strength,
    };
    writeln!(out, "{}", to_json(&header)?)?;
    let private = view == TranscriptView::Full;
    for shot in &transcript.shots {
        let line = ShotLine {
            index: shot.index,
            prepared: private.then_some(shot.prepared),
            basis: shot.announcement.basis,
            kind: shot.announcement.kind(),
            value: shot.announcement.value(),
            alice_m: private.then_some(shot.alice_m),
            eve_outcome: if private { shot.eve_outcome } else { None },
        };
        writeln!(out, "{}", to_json(&line)?)?;
    }
    out.flush()?;
    Ok(())
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string(value).map_err(|e| Error::Io(e.to_string()))
}

fn parse_error(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

/// Reads a full transcript. Bob's `prepared` records must be present.
pub fn read_transcript<R: BufRead>(input: R) -> Result<Transcript> {
    let mut lines = input.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, first) = lines.next().ok_or_else(|| parse_error(1, "empty transcript"))?;
    let header: Header = serde_json::from_str(&first?).map_err(|e| parse_error(1, e.to_string()))?;
    if header.kind != "header" {
        return Err(parse_error(1, format!("expected a header line, found type `{}`", header.kind)));
    }
    if header.version != TRANSCRIPT_VERSION {
        return Err(parse_error(
            1,
            format!("unsupported transcript version {}", header.version),
        ));
    }
    let config = ProtocolConfig::new(header.n_shots, header.p_announce, header.apparatus, header.seed)
        .map_err(|e| parse_error(1, e.to_string()))?;
    let b = header.message_bit;

    let mut shots = Vec::with_capacity(header.n_shots);
    let mut last_line = 1;
    for (number, text) in lines {
        let text = text?;
        last_line = number;
        if text.trim().is_empty() {
            continue;
        }
        let raw: ShotLine = serde_json::from_str(&text).map_err(|e| parse_error(number, e.to_string()))?;
        if raw.index != shots.len() {
            return Err(parse_error(
                number,
                format!("expected shot index {}, found {}", shots.len(), raw.index),
            ));
        }
        let payload = match raw.kind {
            AnnouncementKind::Bit => u8::try_from(raw.value)
                .ok()
                .and_then(Bit::from_u8)
                .map(Payload::Bit),
            AnnouncementKind::Result => Outcome::from_value(raw.value).map(Payload::Result),
        }
        .ok_or_else(|| parse_error(number, format!("value {} does not fit kind {:?}", raw.value, raw.kind)))?;
        let prepared = raw.prepared.ok_or(Error::MissingPrivateFields {
            line: number,
            field: "prepared",
        })?;
        let implied_m = match payload {
            Payload::Result(m) => m,
            Payload::Bit(a) => {
                if a == b {
                    Outcome::Plus
                } else {
                    Outcome::Minus
                }
            }
        };
        if let Some(m) = raw.alice_m {
            if m != implied_m {
                return Err(parse_error(number, "alice_m contradicts the announcement"));
            }
        }
        shots.push(ShotRecord {
            index: raw.index,
            prepared,
            announcement: Announcement {
                basis: raw.basis,
                payload,
            },
            alice_m: implied_m,
            eve_outcome: raw.eve_outcome,
        });
    }
    if shots.len() != config.n_shots {
        return Err(parse_error(
            last_line + 1,
            format!("expected {} shots, found {}", config.n_shots, shots.len()),
        ));
    }
    Ok(Transcript {
        config,
        message_bit: b,
        shots,
        attack_strength: header.attack_strength,
    })
}
