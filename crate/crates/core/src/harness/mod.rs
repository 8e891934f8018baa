//! Experiment driver, verification suites and persistence.

pub mod experiment;
pub mod io;
pub mod verify;

pub use experiment::{fit_slope, run, AggregateResult, ExperimentConfig, HorizonStats, SlopeFit};
pub use io::{parse_sequence_csv, read_sequence, sequence_to_csv, write_sequence};
pub use verify::{verify, Check, Suite, VerifyOptions, VerifyReport};

/// Render a float with 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(x: f64) -> String {
    if x == 0.0 {
        // Normalize -0 so equal values always print identically.
        return "0.0000000000000000e0".to_string();
    }
    format!("{x:.16e}")
}

fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for replication `rep` at horizon `t`: three chained SplitMix64
/// finalizer rounds over `master`, `t` and `rep`. Depends only on its inputs,
/// never on scheduling.
pub fn derive_seed(master: u64, t: u64, rep: u64) -> u64 {
    mix64(mix64(mix64(master) ^ t) ^ rep)
}
