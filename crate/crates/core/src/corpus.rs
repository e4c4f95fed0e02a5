// SPDX-License-Identifier: Apache-2.0

//! Bundled example modules, used by tests, golden files and the CLI demos.

pub const PIPELINED_CHECKSUM: &str = include_str!("../corpus/pipelined_checksum.visc");
pub const ID: &str = include_str!("../corpus/id.visc");
pub const CHAIN_SCALE: &str = include_str!("../corpus/chain_scale.visc");
pub const CHAIN_MIX: &str = include_str!("../corpus/chain_mix.visc");
pub const CHAIN_FOLD: &str = include_str!("../corpus/chain_fold.visc");
pub const VECTOR_STATS: &str = include_str!("../corpus/vector_stats.visc");
pub const ACCUMULATE: &str = include_str!("../corpus/accumulate.visc");
pub const DELAY_LINE: &str = include_str!("../corpus/delay_line.visc");
pub const LOOKUP: &str = include_str!("../corpus/lookup.visc");
pub const RELAY: &str = include_str!("../corpus/relay.visc");

/// `(module name, source)` for every bundled module.
pub const ALL: &[(&str, &str)] = &[
    ("pipelined_checksum", PIPELINED_CHECKSUM),
    ("id", ID),
    ("chain_scale", CHAIN_SCALE),
    ("chain_mix", CHAIN_MIX),
    ("chain_fold", CHAIN_FOLD),
    ("vector_stats", VECTOR_STATS),
    ("accumulate", ACCUMULATE),
    ("delay_line", DELAY_LINE),
    ("lookup", LOOKUP),
    ("relay", RELAY),
];

/// The three-stage arithmetic chain, in pipeline order.
pub const ARITHMETIC_CHAIN: &[&str] = &[CHAIN_SCALE, CHAIN_MIX, CHAIN_FOLD];
