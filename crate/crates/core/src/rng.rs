//! Seeded, splittable randomness. Every random draw in the crate flows from an
//! explicit 64-bit seed through labelled child streams.

use num_bigint::BigUint;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};

#[derive(Clone, Debug)]
pub struct DetRng {
    inner: ChaCha20Rng,
}

impl DetRng {
    pub fn from_seed(seed: u64) -> Self {
        Self::derive(seed, "root")
    }

    /// Independent stream for `(seed, label)`.
    pub fn derive(seed: u64, label: &str) -> Self {
        let mut h = Sha256::new();
        h.update(seed.to_le_bytes());
        h.update(label.as_bytes());
        let digest = h.finalize();
        let mut key = [0u8; 32];
        key.copy_from_slice(&digest);
        Self {
            inner: ChaCha20Rng::from_seed(key),
        }
    }

    /// Child stream; advances the parent by one word.
    pub fn split(&mut self, label: &str) -> Self {
        let s = self.inner.next_u64();
        Self::derive(s, label)
    }

    /// Uniform integer in `[0, 2^bits)`.
    pub fn below_pow2(&mut self, bits: u32) -> BigUint {
        if bits == 0 {
            return BigUint::default();
        }
        let words = bits.div_ceil(32) as usize;
        let mut digits: Vec<u32> = (0..words).map(|_| self.inner.next_u32()).collect();
        let spare = words as u32 * 32 - bits;
        if spare > 0 {
            let last = digits.last_mut().expect("at least one word");
            *last &= u32::MAX >> spare;
        }
        BigUint::new(digits)
    }

    /// Uniform integer with exactly `bits` bits (top bit set).
    pub fn exact_bits(&mut self, bits: u32) -> BigUint {
        assert!(bits > 0, "exact_bits needs a positive length");
        let mut x = self.below_pow2(bits - 1);
        x.set_bit(u64::from(bits - 1), true);
        x
    }

    pub fn bit(&mut self) -> bool {
        self.inner.gen()
    }

    pub fn range(&mut self, lo: u64, hi_inclusive: u64) -> u64 {
        self.inner.gen_range(lo..=hi_inclusive)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    pub fn index(&mut self, len: usize) -> usize {
        self.inner.gen_range(0..len)
    }
}

impl RngCore for DetRng {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }
    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }
    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.inner.fill_bytes(dest)
    }
    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> Result<(), rand::Error> {
        self.inner.try_fill_bytes(dest)
    }
}
