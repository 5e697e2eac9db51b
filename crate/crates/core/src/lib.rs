//! Simulation and information analysis of a quantum messaging protocol in
//! which Alice sends Bob a single bit through announcements about her own
//! measurements, while Bob watches the channel for an eavesdropper.
//!
//! The crate is organised bottom up:
//!
//! - [`qmath`]: states, operators and POVMs on 2, 4 and 8 dimensional spaces
//! - [`channel`]: apparatus noise and the depolarizing map
//! - [`eavesdropper`]: the optimal symmetric probe attack
//! - [`protocol`]: shots, announcements and decoding
//! - [`transcript`]: line-delimited JSON transcripts
//! - [`infotheory`]: mutual information of Alice and Eve about the bit
//! - [`detection`]: mismatch statistics and bounds on Eve's information

pub mod channel;
pub mod detection;
pub mod eavesdropper;
pub mod error;
pub mod infotheory;
pub mod protocol;
pub mod qmath;
pub mod qubit;
pub mod transcript;

pub use channel::ChannelParams;
pub use detection::{DetectionOptions, DetectionReport, MismatchSummary, Posterior};
pub use eavesdropper::{build_probe_attack, EveOutcome, EventSet, ProbeAttack};
pub use error::{Error, Result};
pub use infotheory::{EventDistribution, MiResult};
pub use protocol::{Announcement, AnnouncementKind, Payload, ProtocolConfig, ShotRecord, Transcript};
pub use qmath::{ComplexMatrix, DensityMatrix, Povm, StateVector};
pub use qubit::{Basis, Bit, Outcome, Preparation};
