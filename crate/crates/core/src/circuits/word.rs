use serde::{Deserialize, Serialize};
use std::ops::Range;

use crate::error::{Error, Result};
use crate::rng::DetRng;
use crate::she::{Ciphertext, CiphertextRepr, Encryptor, ParamProfile, SecretKey};

/// Little-endian vector of encrypted bits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EncWord {
    bits: Vec<Ciphertext>,
}

impl EncWord {
    /// # Panics
    /// If `bits` is empty.
    pub fn from_bits(bits: Vec<Ciphertext>) -> Self {
        assert!(!bits.is_empty(), "an encrypted word needs at least one bit");
        Self { bits }
    }

    pub fn encrypt<E: Encryptor + ?Sized>(enc: &E, value: u64, width: usize, rng: &mut DetRng) -> Result<Self> {
        Self::encrypt_bits(enc, &PlainWord::from_u64(value, width).bits, rng)
    }

    pub fn encrypt_bits<E: Encryptor + ?Sized>(enc: &E, bits: &[bool], rng: &mut DetRng) -> Result<Self> {
        let bits = bits
            .iter()
            .map(|&b| enc.encrypt_bit(b, rng))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_bits(bits))
    }

    /// Literal all-zero word.
    pub fn zeros(profile: ParamProfile, width: usize) -> Self {
        Self::from_bits(vec![Ciphertext::literal_zero(profile); width])
    }

    /// Value-less word for ledger prediction.
    pub fn shadow(profile: ParamProfile, width: usize, noise_bits: u32) -> Self {
        Self::from_bits(vec![Ciphertext::shadow(profile, noise_bits); width])
    }

    /// Noiseless literal encoding of public bits.
    pub fn literal(profile: ParamProfile, bits: &[bool]) -> Self {
        Self::from_bits(
            bits.iter()
                .map(|&b| {
                    if b {
                        Ciphertext::literal_one(profile)
                    } else {
                        Ciphertext::literal_zero(profile)
                    }
                })
                .collect(),
        )
    }

    /// Shadow copy keeping each bit's ledger entry.
    pub fn to_shadow(&self) -> Self {
        Self::from_bits(self.bits.iter().map(Ciphertext::to_shadow).collect())
    }

    /// Extends with literal zeros (or truncates) to `width`.
    pub fn resized(&self, width: usize) -> Self {
        let mut bits = self.bits.clone();
        let profile = *bits[0].profile();
        bits.resize(width, Ciphertext::literal_zero(profile));
        Self::from_bits(bits)
    }

    pub fn width(&self) -> usize {
        self.bits.len()
    }

    pub fn bits(&self) -> &[Ciphertext] {
        &self.bits
    }

    pub fn into_bits(self) -> Vec<Ciphertext> {
        self.bits
    }

    pub fn bit(&self, i: usize) -> &Ciphertext {
        &self.bits[i]
    }

    pub fn slice(&self, r: Range<usize>) -> Self {
        Self::from_bits(self.bits[r].to_vec())
    }

    pub fn concat(&self, hi: &EncWord) -> Self {
        let mut bits = self.bits.clone();
        bits.extend(hi.bits.iter().cloned());
        Self::from_bits(bits)
    }

    /// Largest ledger entry among the bits.
    pub fn max_noise(&self) -> u32 {
        self.bits.iter().map(Ciphertext::noise_bits).max().unwrap_or(0)
    }

    pub fn decrypt_bits(&self, sk: &SecretKey) -> Result<Vec<bool>> {
        self.bits.iter().map(|c| sk.decrypt(c)).collect()
    }

    pub fn force_decrypt_bits(&self, sk: &SecretKey) -> Vec<bool> {
        self.bits.iter().map(|c| sk.force_decrypt(c)).collect()
    }

    /// # Errors
    /// `Format` if the width exceeds 64 bits, plus decryption errors.
    pub fn decrypt(&self, sk: &SecretKey) -> Result<u64> {
        if self.width() > 64 {
            return Err(Error::Format(format!("{}-bit word does not fit in u64", self.width())));
        }
        Ok(PlainWord::from_bits(self.decrypt_bits(sk)?).to_u64())
    }

    pub fn to_repr(&self) -> EncWordRepr {
        EncWordRepr {
            width: self.width(),
            bits: self.bits.iter().map(Ciphertext::to_hex).collect(),
            noise_bits: self.bits.iter().map(Ciphertext::noise_bits).collect(),
        }
    }

    pub fn from_repr(repr: &EncWordRepr, profile: ParamProfile) -> Result<Self> {
        if repr.width != repr.bits.len() || repr.width != repr.noise_bits.len() || repr.width == 0 {
            return Err(Error::Format("encrypted word width does not match its bit list".into()));
        }
        let bits = repr
            .bits
            .iter()
            .zip(&repr.noise_bits)
            .map(|(v, &n)| {
                Ciphertext::from_repr(
                    &CiphertextRepr {
                        value: v.clone(),
                        noise_bits: n,
                    },
                    profile,
                )
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_bits(bits))
    }

    /// Compact binary form: `u32` width, then per bit a `u32` noise ledger,
    /// a `u32` byte length and the big-endian value, all integers little
    /// endian.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(&(self.width() as u32).to_le_bytes());
        for c in &self.bits {
            let v = c.value().to_bytes_be();
            out.extend_from_slice(&c.noise_bits().to_le_bytes());
            out.extend_from_slice(&(v.len() as u32).to_le_bytes());
            out.extend_from_slice(&v);
        }
        out
    }

    pub fn from_bytes(bytes: &[u8], profile: ParamProfile) -> Result<Self> {
        let mut at = 0usize;
        let mut take = |n: usize| -> Result<&[u8]> {
            let s = bytes
                .get(at..at + n)
                .ok_or_else(|| Error::Format("truncated encrypted word".into()))?;
            at += n;
            Ok(s)
        };
        let u32_at = |s: &[u8]| u32::from_le_bytes(s.try_into().expect("four bytes"));
        let width = u32_at(take(4)?) as usize;
        if width == 0 {
            return Err(Error::Format("encrypted word width is zero".into()));
        }
        let mut bits = Vec::with_capacity(width);
        for _ in 0..width {
            let noise = u32_at(take(4)?);
            let len = u32_at(take(4)?) as usize;
            let v = num_bigint::BigUint::from_bytes_be(take(len)?);
            bits.push(Ciphertext::new(v, noise, profile));
        }
        if at != bytes.len() {
            return Err(Error::Format("trailing bytes after encrypted word".into()));
        }
        Ok(Self::from_bits(bits))
    }
}

/// Serialized `EncWord`: hex ciphertexts, index 0 first.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncWordRepr {
    pub width: usize,
    pub bits: Vec<String>,
    pub noise_bits: Vec<u32>,
}

/// Little-endian vector of plaintext bits.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PlainWord {
    pub bits: Vec<bool>,
}

impl PlainWord {
    pub fn from_u64(value: u64, width: usize) -> Self {
        Self {
            bits: (0..width).map(|i| i < 64 && (value >> i) & 1 == 1).collect(),
        }
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    pub fn width(&self) -> usize {
        self.bits.len()
    }

    /// Low 64 bits as an integer.
    pub fn to_u64(&self) -> u64 {
        self.bits
            .iter()
            .take(64)
            .enumerate()
            .fold(0, |acc, (i, &b)| acc | (u64::from(b) << i))
    }
}

/// Either operand kind accepted by the word circuits.
#[derive(Clone, Copy, Debug)]
pub enum Operand<'a> {
    Enc(&'a EncWord),
    Plain(&'a PlainWord),
}

impl Operand<'_> {
    pub fn width(&self) -> usize {
        match self {
            Operand::Enc(w) => w.width(),
            Operand::Plain(w) => w.width(),
        }
    }

    pub(crate) fn bit(&self, i: usize) -> super::bit::Bit {
        match self {
            Operand::Enc(w) => super::bit::Bit::Enc(w.bit(i).clone()),
            Operand::Plain(w) => super::bit::Bit::Plain(w.bits[i]),
        }
    }
}

impl<'a> From<&'a EncWord> for Operand<'a> {
    fn from(w: &'a EncWord) -> Self {
        Operand::Enc(w)
    }
}

impl<'a> From<&'a PlainWord> for Operand<'a> {
    fn from(w: &'a PlainWord) -> Self {
        Operand::Plain(w)
    }
}

pub(crate) fn same_width(a: usize, b: usize) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::WidthMismatch { left: a, right: b })
    }
}

/// Bits needed to represent `n`.
pub fn bits_for(n: u64) -> usize {
    (64 - n.leading_zeros() as usize).max(1)
}
