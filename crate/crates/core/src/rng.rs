use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator for one independent unit of work: same `(seed, stream)` pair,
/// same draws, regardless of which thread runs it.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
