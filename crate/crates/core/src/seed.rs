//! Named seed derivation.
//!
//! Every random stream is derived from one root seed plus a label and the
//! integer coordinates of the work item, so results do not depend on the
//! order in which independent items are executed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn derive_seed(root: u64, label: &str, coords: &[u64]) -> u64 {
    // FNV-1a over the label, then mix in the root and each coordinate.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    let mut s = splitmix64(root ^ h);
    for &c in coords {
        s = splitmix64(s ^ c);
    }
    s
}

pub fn rng_for(root: u64, label: &str, coords: &[u64]) -> SimRng {
    SimRng::seed_from_u64(derive_seed(root, label, coords))
}
