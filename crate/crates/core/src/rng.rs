//! Seeded random streams.
//!
//! Every Monte Carlo engine splits its draws into fixed-size row blocks and
//! seeds one ChaCha8 stream per block, so results depend only on
//! `(seed, m)` and never on the number of worker threads.

use alloc::vec::Vec;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Rows per Monte Carlo block.
pub const BLOCK_ROWS: usize = 1 << 16;

const STREAM_MIX: u64 = 0x9E37_79B9_7F4A_7C15;

/// Seed of stream `index` derived from `base`: the base seed XOR a spread
/// copy of the index, so that `(s, 1)` and `(s ^ 1, 0)` do not coincide.
pub fn stream_seed(base: u64, index: u64) -> u64 {
    base ^ index.wrapping_mul(STREAM_MIX)
}

pub fn stream_rng(base: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(stream_seed(base, index))
}

/// Run `f(block_index, rows, rng)` over the blocks covering `m` rows and
/// collect the results in block order.
pub(crate) fn map_blocks<T, F>(seed: u64, m: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64, usize, &mut ChaCha8Rng) -> T + Sync,
{
    let blocks = m.div_ceil(BLOCK_ROWS);
    let run = |b: usize| {
        let rows = if b + 1 == blocks {
            m - b * BLOCK_ROWS
        } else {
            BLOCK_ROWS
        };
        let mut rng = stream_rng(seed, b as u64);
        f(b as u64, rows, &mut rng)
    };
    #[cfg(feature = "std")]
    {
        use rayon::prelude::*;
        (0..blocks).into_par_iter().map(run).collect()
    }
    #[cfg(not(feature = "std"))]
    {
        (0..blocks).map(run).collect()
    }
}

/// Draw from the open interval (0, 1).
#[inline]
pub(crate) fn open01<R: rand::Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(rand::distr::Open01)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn streams_are_distinct_and_reproducible() {
        let a: u64 = stream_rng(42, 0).random();
        let b: u64 = stream_rng(42, 1).random();
        let c: u64 = stream_rng(42, 0).random();
        assert_ne!(a, b);
        assert_eq!(a, c);
        assert_ne!(stream_seed(42, 1), stream_seed(43, 0));
    }

    #[test]
    fn blocks_cover_all_rows_in_order() {
        let m = 3 * BLOCK_ROWS + 17;
        let sizes = map_blocks(7, m, |b, rows, _| (b, rows));
        assert_eq!(sizes.len(), 4);
        assert_eq!(sizes.iter().map(|s| s.1).sum::<usize>(), m);
        assert!(sizes.iter().enumerate().all(|(i, s)| s.0 == i as u64));
        assert_eq!(sizes[3].1, 17);
    }
}
