//! One run of the messaging protocol: Bob prepares, Alice measures and
//! announces, and Bob decodes the message bit from the announcements.
//!
//! Every random choice in a run comes from one generator, drawn per shot in
//! this order: preparation, basis, Born outcome, announcement type, and
//! (only on bit-announcements with an attack present) Eve's POVM outcome.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{apply_symmetric_noise, apply_symmetric_noise_to_particle, mismatch_probability, ChannelParams};
use crate::eavesdropper::{eve_outcome_distribution, sample_outcome, EveOutcome, ProbeAttack, DEGENERATE_BRANCH};
use crate::error::{check_probability, check_strength, Error, Result};
use crate::qmath::{born_probability, partial_trace_second, DensityMatrix};
use crate::qubit::{Basis, Bit, Outcome, Preparation};

/// Run parameters shared by Alice and Bob before the first shot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProtocolConfig {
    /// `N`
    pub n_shots: usize,
    /// `p_a`
    pub p_announce: f64,
    pub apparatus: ChannelParams,
    pub seed: u64,
}

impl ProtocolConfig {
    pub fn new(n_shots: usize, p_announce: f64, apparatus: ChannelParams, seed: u64) -> Result<Self> {
        let config = Self {
            n_shots,
            p_announce,
            apparatus,
            seed,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_shots == 0 {
            return Err(Error::InvalidConfig("n_shots must be at least 1".into()));
        }
        check_probability("p_announce", self.p_announce)?;
        self.apparatus.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AnnouncementKind {
    Bit,
    Result,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Payload {
    /// `a = (b + (1 − m)/2) mod 2`
    Bit(Bit),
    Result(Outcome),
}

/// What Alice says publicly after a shot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Announcement {
    pub basis: Basis,
    pub payload: Payload,
}

impl Announcement {
    pub fn kind(&self) -> AnnouncementKind {
        match self.payload {
            Payload::Bit(_) => AnnouncementKind::Bit,
            Payload::Result(_) => AnnouncementKind::Result,
        }
    }

    pub fn bit(&self) -> Option<Bit> {
        match self.payload {
            Payload::Bit(a) => Some(a),
            Payload::Result(_) => None,
        }
    }

    pub fn outcome(&self) -> Option<Outcome> {
        match self.payload {
            Payload::Result(m) => Some(m),
            Payload::Bit(_) => None,
        }
    }

    /// Announced value as written in transcripts: `a ∈ {0, 1}` or `m ∈ {+1, −1}`.
    pub fn value(&self) -> i64 {
        match self.payload {
            Payload::Bit(a) => i64::from(a.as_u8()),
            Payload::Result(m) => i64::from(m.value()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShotRecord {
    pub index: usize,
    /// Bob's private record.
    pub prepared: Preparation,
    pub announcement: Announcement,
    /// Alice's private outcome.
    pub alice_m: Outcome,
    /// Eve's private record, present on attacked bit-announcement shots.
    pub eve_outcome: Option<EveOutcome>,
}

impl ShotRecord {
    pub fn matching_basis(&self) -> bool {
        self.prepared.matches(self.announcement.basis)
    }

    /// Alice's outcome contradicts Bob's preparation on a matching basis.
    pub fn is_mismatch(&self) -> bool {
        self.matching_basis() && self.alice_m != self.prepared.ideal_outcome()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transcript {
    pub config: ProtocolConfig,
    pub message_bit: Bit,
    pub shots: Vec<ShotRecord>,
    pub attack_strength: Option<f64>,
}

impl Transcript {
    pub fn bit_announcements(&self) -> usize {
        self.shots
            .iter()
            .filter(|s| s.announcement.kind() == AnnouncementKind::Bit)
            .count()
    }
}

/// Uniform over the four preparations.
pub fn bob_prepare<R: Rng + ?Sized>(rng: &mut R) -> Preparation {
    Preparation::ALL[rng.random_range(0..4)]
}

fn draw_basis<R: Rng + ?Sized>(rng: &mut R) -> Basis {
    Basis::ALL[rng.random_range(0..2)]
}

fn draw_outcome<R: Rng + ?Sized>(p_plus: f64, rng: &mut R) -> Outcome {
    if rng.random::<f64>() < p_plus {
        Outcome::Plus
    } else {
        Outcome::Minus
    }
}

fn snap(p: f64) -> f64 {
    if p < DEGENERATE_BRANCH {
        0.0
    } else if p > 1.0 - DEGENERATE_BRANCH {
        1.0
    } else {
        p
    }
}

/// Alice picks σ1 or σ3 with equal probability and measures.
pub fn alice_measure<R: Rng + ?Sized>(arriving: &DensityMatrix, rng: &mut R) -> Result<(Basis, Outcome)> {
    if arriving.dim() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "Alice measures a qubit, got dimension {}",
            arriving.dim()
        )));
    }
    let basis = draw_basis(rng);
    let p_plus = born_probability(arriving, &basis.projector(Outcome::Plus))?;
    Ok((basis, draw_outcome(snap(p_plus), rng)))
}

/// With probability `p_announce` Alice blends `b` with `m` into a
/// bit-announcement, otherwise she announces `m` itself.
pub fn alice_announce<R: Rng + ?Sized>(
    b: Bit,
    m: Outcome,
    basis: Basis,
    p_announce: f64,
    rng: &mut R,
) -> Announcement {
    let payload = if rng.random::<f64>() < p_announce {
        Payload::Bit(b.xor(m.as_bit()))
    } else {
        Payload::Result(m)
    };
    Announcement { basis, payload }
}

/// Bob's reading of one shot: only a bit-announcement on a matching basis
/// tells him anything, and he assumes Alice found the ideal outcome.
pub fn bob_decode_shot(prepared: Preparation, announcement: &Announcement) -> Option<Bit> {
    let a = announcement.bit()?;
    prepared
        .matches(announcement.basis)
        .then(|| a.xor(prepared.ideal_outcome().as_bit()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AggregateDecode {
    pub bit: Bit,
    /// Posterior probability of `bit`.
    pub confidence: f64,
    /// Per-shot decodes reading 0 and 1.
    pub votes: [usize; 2],
}

/// Combines every per-shot decode into a posterior over `b`, with each
/// decode wrong independently with probability `assumed_mismatch`.
pub fn bob_aggregate_decode(transcript: &Transcript, assumed_mismatch: f64) -> Result<AggregateDecode> {
    check_strength(assumed_mismatch)?;
    let mut votes = [0usize; 2];
    for shot in &transcript.shots {
        if let Some(b) = bob_decode_shot(shot.prepared, &shot.announcement) {
            votes[usize::from(b.as_u8())] += 1;
        }
    }
    // log posterior odds of 0 against 1: (n0 − n1)·ln((1 − D)/D), with 0·∞ = 0
    let lead = votes[0] as f64 - votes[1] as f64;
    let log_odds = if lead == 0.0 {
        0.0
    } else {
        lead * ((1.0 - assumed_mismatch).ln() - assumed_mismatch.ln())
    };
    let bit = if log_odds < 0.0 { Bit::One } else { Bit::Zero };
    let confidence = 1.0 / (1.0 + (-log_odds.abs()).exp());
    Ok(AggregateDecode {
        bit,
        confidence,
        votes,
    })
}

/// Everything about a preparation that does not depend on the shot's draws.
struct PreparedBranches {
    p_plus: [f64; 2],
    // [basis][outcome]
    eve: [[Option<[f64; 4]>; 2]; 2],
}

fn basis_slot(basis: Basis) -> usize {
    match basis {
        Basis::Sigma1 => 0,
        Basis::Sigma3 => 1,
    }
}

fn outcome_slot(m: Outcome) -> usize {
    match m {
        Outcome::Plus => 0,
        Outcome::Minus => 1,
    }
}

fn branches(prep: Preparation, mismatch: f64, attack: Option<&ProbeAttack>) -> Result<PreparedBranches> {
    let mut eve = [[None; 2]; 2];
    let forwarded = match attack {
        None => apply_symmetric_noise(&prep.density(), mismatch)?,
        Some(attack) => {
            let joint = apply_symmetric_noise_to_particle(attack.joint_state(prep), mismatch)?;
            for basis in Basis::ALL {
                for m in Outcome::ALL {
                    eve[basis_slot(basis)][outcome_slot(m)] =
                        match eve_outcome_distribution(&joint, basis, m, attack) {
                            Ok(dist) => Some(dist),
                            Err(Error::DegenerateBranch(_)) => None,
                            Err(e) => return Err(e),
                        };
                }
            }
            DensityMatrix::from_matrix_unchecked(partial_trace_second(joint.matrix(), 4)?)
        }
    };
    let mut p_plus = [0.0; 2];
    for basis in Basis::ALL {
        p_plus[basis_slot(basis)] = snap(born_probability(&forwarded, &basis.projector(Outcome::Plus))?);
    }
    Ok(PreparedBranches { p_plus, eve })
}

/// Runs `config.n_shots` shots carrying message bit `b`, optionally with
/// every particle passing through `attack` on its way to Alice.
pub fn run_protocol<R: Rng + ?Sized>(
    config: &ProtocolConfig,
    b: Bit,
    attack: Option<&ProbeAttack>,
    rng: &mut R,
) -> Result<Transcript> {
    config.validate()?;
    let mismatch = mismatch_probability(&config.apparatus)?;
    let tables = Preparation::ALL
        .iter()
        .map(|&p| branches(p, mismatch, attack))
        .collect::<Result<Vec<_>>>()?;

    let mut shots = Vec::with_capacity(config.n_shots);
    for index in 0..config.n_shots {
        let prepared = bob_prepare(rng);
        let table = &tables[prepared.index()];
        let basis = draw_basis(rng);
        let alice_m = draw_outcome(table.p_plus[basis_slot(basis)], rng);
        let announcement = alice_announce(b, alice_m, basis, config.p_announce, rng);
        let eve_outcome = match (attack, announcement.kind()) {
            (Some(_), AnnouncementKind::Bit) => {
                let dist = table.eve[basis_slot(basis)][outcome_slot(alice_m)]
                    .ok_or(Error::DegenerateBranch(0.0))?;
                Some(sample_outcome(&dist, rng.random::<f64>()))
            }
            _ => None,
        };
        shots.push(ShotRecord {
            index,
            prepared,
            announcement,
            alice_m,
            eve_outcome,
        });
    }
    Ok(Transcript {
        config: *config,
        message_bit: b,
        shots,
        attack_strength: attack.map(ProbeAttack::strength),
    })
}

/// [`run_protocol`] with a ChaCha8 generator seeded from `config.seed`.
pub fn run_protocol_seeded(config: &ProtocolConfig, b: Bit, attack: Option<&ProbeAttack>) -> Result<Transcript> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    run_protocol(config, b, attack, &mut rng)
}
