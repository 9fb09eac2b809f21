/// Little-endian bits of `value`, truncated or zero-extended to `width`.
pub fn u64_to_bits(value: u64, width: usize) -> Vec<bool> {
    (0..width).map(|i| i < 64 && (value >> i) & 1 == 1).collect()
}

/// Little-endian bits to an integer; bits past 64 are ignored.
pub fn bits_to_u64(bits: &[bool]) -> u64 {
    bits.iter()
        .take(64)
        .enumerate()
        .fold(0, |acc, (i, &b)| acc | (u64::from(b) << i))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip() {
        for v in 0..64u64 {
            assert_eq!(bits_to_u64(&u64_to_bits(v, 6)), v);
        }
        assert_eq!(u64_to_bits(5, 4), vec![true, false, true, false]);
        assert_eq!(bits_to_u64(&u64_to_bits(0xff, 4)), 0xf);
    }
}
