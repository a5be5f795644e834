//! Seeding conventions.
//!
//! Every episode owns one 64-bit seed. The agent and the environment draw from
//! two ChaCha streams of that seed, so the click draws of an episode are the
//! same whichever agent is being evaluated.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const AGENT_STREAM: u64 = 1;
const ENV_STREAM: u64 = 2;

/// Agent-side and environment-side generators for one episode.
pub fn episode_streams(seed: u64) -> (ChaCha8Rng, ChaCha8Rng) {
    (stream(seed, AGENT_STREAM), stream(seed, ENV_STREAM))
}

/// Generator for the `index`-th independent trial of a Monte-Carlo experiment.
pub fn trial_stream(seed: u64, index: u64) -> ChaCha8Rng {
    stream(seed, index)
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Worker count from `TOPRANK_THREADS`; `0`, unset or unparsable means let rayon decide.
pub fn configured_threads() -> usize {
    std::env::var("TOPRANK_THREADS")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(0)
}

/// Runs `f` inside a rayon pool sized by [`configured_threads`].
pub fn with_pool<R: Send>(f: impl FnOnce() -> R + Send) -> R {
    match rayon::ThreadPoolBuilder::new()
        .num_threads(configured_threads())
        .build()
    {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}
