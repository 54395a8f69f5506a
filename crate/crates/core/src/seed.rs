/// Derives an independent-looking child seed for stream `stream` of `seed`
/// (SplitMix64 finalizer over the combined words).
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::derive_seed;

    #[test]
    fn streams_differ() {
        let a = derive_seed(7, 0);
        assert_ne!(a, derive_seed(7, 1));
        assert_ne!(a, derive_seed(8, 0));
        assert_eq!(a, derive_seed(7, 0));
    }
}
