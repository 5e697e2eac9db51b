//! Criterion benchmarks for eavesdrop-core.

use eavesdrop_core::channel::ChannelParams;
use eavesdrop_core::protocol::{run_protocol_seeded, ProtocolConfig};
use eavesdrop_core::{build_probe_attack, Bit, Transcript};

/// A seeded run with an attack of strength `d` and a slightly noisy apparatus.
pub fn attacked_transcript(n_shots: usize, d: f64) -> Transcript {
    let apparatus = ChannelParams::symmetric(0.01).expect("valid strength");
    let config = ProtocolConfig::new(n_shots, 0.1, apparatus, 42).expect("valid config");
    let attack = build_probe_attack(d).expect("valid strength");
    run_protocol_seeded(&config, Bit::One, Some(&attack)).expect("protocol runs")
}
