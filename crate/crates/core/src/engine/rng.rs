use rand::{RngCore, SeedableRng};
use rand_xoshiro::{SplitMix64, Xoshiro256PlusPlus};

/// Random stream handed to sampling code.
pub type Stream = Xoshiro256PlusPlus;

/// Stream id reserved for the commit priority permutation of a tick.
pub const COMMIT_STREAM: i64 = -1;
/// Stream id reserved for initial agent placement.
pub const SPAWN_STREAM: i64 = -2;

fn mix(x: u64) -> u64 {
    SplitMix64::seed_from_u64(x).next_u64()
}

/// Counter-based stream for `(seed, tick, agent_id)`. The same triple always
/// yields the same sequence, independent of the order streams are created in.
pub fn rng_stream(seed: u64, tick: u64, agent_id: i64) -> Stream {
    let key = mix(mix(mix(seed) ^ tick) ^ agent_id as u64);
    Xoshiro256PlusPlus::seed_from_u64(key)
}
