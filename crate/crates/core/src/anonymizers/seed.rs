//! Bit-exact per-utterance seed derivation.

pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

/// `splitmix64(global ^ fnv1a64(speaker | scope_key | method))`.
pub fn derive_seed(global: u64, speaker_id: &str, scope_key: &str, method: &str) -> u64 {
    let key = format!("{speaker_id}|{scope_key}|{method}");
    splitmix64(global ^ fnv1a64(key.as_bytes()))
}
