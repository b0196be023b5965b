//! Keyed random substreams.
//!
//! Every random draw in the crate comes from a ChaCha stream whose key is
//! derived from a user seed plus a path of integers naming the purpose (for
//! example `[EPSILON, i, j, row]`). Streams for different keys are
//! independent, so enlarging one block or reordering work never perturbs the
//! draws of another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

pub mod tag {
    pub const PSI: u64 = 0x7073_6900;
    pub const EPSILON: u64 = 0x6570_7300;
    pub const SPARSIFY: u64 = 0x7370_6172;
    pub const EXTERNAL: u64 = 0x6578_7400;
    pub const FICTIONAL: u64 = 0x6669_6374;
    pub const BOOTSTRAP: u64 = 0x626f_6f74;
    pub const KMEANS: u64 = 0x6b6d_6e73;
    pub const SPECTRAL: u64 = 0x7370_6563;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives the 256-bit key for `seed` and `path`.
pub fn derive_key(seed: u64, path: &[u64]) -> [u8; 32] {
    let mut state = splitmix64(seed ^ 0x5eed_0f50_c1a1_0000);
    for &p in path {
        state = splitmix64(state ^ splitmix64(p.wrapping_add(0x1234_5678_9abc_def1)));
    }
    let mut key = [0u8; 32];
    for (k, chunk) in key.chunks_mut(8).enumerate() {
        let word = splitmix64(state.wrapping_add(k as u64 + 1));
        chunk.copy_from_slice(&word.to_le_bytes());
    }
    key
}

pub fn substream(seed: u64, path: &[u64]) -> StreamRng {
    StreamRng::from_seed(derive_key(seed, path))
}
