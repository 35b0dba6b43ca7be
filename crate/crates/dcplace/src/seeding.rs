//! Stable seed derivation. Child seeds are produced by folding context
//! values through a splitmix64 step, giving well-mixed, platform-independent
//! streams (unlike `DefaultHasher`, whose output may change between Rust
//! releases).

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}

/// Derives a child seed from a master seed and a list of context values
/// (cell coordinates, node ids, draw indices). Order-sensitive.
pub fn derive_seed(master: u64, context: &[u64]) -> u64 {
    let mut acc = splitmix64(master);
    for &c in context {
        acc = splitmix64(acc ^ c);
    }
    acc
}
