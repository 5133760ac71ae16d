//! Run seed derivation.
//!
//! `run_seed = fold(splitmix64(master_seed), [problem_id, dimension, instance_id, repetition],
//! |h, v| splitmix64(h ^ v))`. This mixing is part of the output contract: changing it
//! changes every recorded trajectory.

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 step: add the golden gamma, then the standard finalizer.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn mix_seed(master_seed: u64, problem_id: u32, dimension: usize, instance_id: u32, repetition: u32) -> u64 {
    [
        problem_id as u64,
        dimension as u64,
        instance_id as u64,
        repetition as u64,
    ]
    .into_iter()
    .fold(splitmix64(master_seed), |h, v| splitmix64(h ^ v))
}
