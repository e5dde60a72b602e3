use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::Result;

/// Items per generator substream. Fixed, so the mapping from item index to
/// random draws does not depend on the worker count.
pub const CHUNK: usize = 1024;

/// Substream families, one per kind of sampled object.
#[derive(Debug, Clone, Copy)]
#[repr(u32)]
pub(crate) enum Family {
    Sample = 1,
    Minimize,
    Pairs,
    Triples,
    Simplex,
    AboveOne,
    BelowOne,
    TailEqual,
    Classify,
}

/// ChaCha8 seeded with `seed`, on stream `(family, sub, chunk)`.
pub(crate) fn stream_rng(seed: u64, family: Family, sub: u32, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let stream = ((family as u64) << 56) | ((sub as u64) << 32) | chunk;
    rng.set_stream(stream);
    rng
}

/// `f(rng, i)` for `i in 0..count`, in index order. Chunk `c` draws from its
/// own substream, so the output is identical for any worker count.
pub(crate) fn map_seeded<T, F>(seed: u64, family: Family, sub: u32, count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng, usize) -> T + Sync,
{
    let f = &f;
    (0..count.div_ceil(CHUNK))
        .into_par_iter()
        .flat_map_iter(|c| {
            let mut rng = stream_rng(seed, family, sub, c as u64);
            let hi = ((c + 1) * CHUNK).min(count);
            (c * CHUNK..hi).map(move |i| f(&mut rng, i)).collect::<Vec<_>>()
        })
        .collect()
}

/// Runs `job` on a pool of `threads` workers, or on the global pool.
pub fn with_threads<T, F>(threads: Option<usize>, job: F) -> Result<T>
where
    T: Send,
    F: FnOnce() -> T + Send,
{
    match threads {
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(t.max(1)).build()?;
            Ok(pool.install(job))
        }
        None => Ok(job()),
    }
}
