use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::params::ParamProfile;
use crate::bigmul::Multiplier;
use crate::error::{Error, Result};

/// One encrypted bit together with its ledger entry.
///
/// `noise_bits` bounds the magnitude of the centred residue modulo the secret
/// key: `|centered(value mod p)| < 2^noise_bits`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ciphertext {
    pub(crate) value: BigUint,
    pub(crate) noise_bits: u32,
    pub(crate) profile: ParamProfile,
    pub(crate) zhint: Option<Vec<BigUint>>,
}

impl Ciphertext {
    pub(crate) fn new(value: BigUint, noise_bits: u32, profile: ParamProfile) -> Self {
        Self {
            value,
            noise_bits,
            profile,
            zhint: None,
        }
    }

    /// Exact integer zero. Decrypts to 0 under every key.
    pub fn literal_zero(profile: ParamProfile) -> Self {
        Self::new(BigUint::zero(), 0, profile)
    }

    /// Exact integer one. Decrypts to 1 under every key.
    pub fn literal_one(profile: ParamProfile) -> Self {
        Self::new(BigUint::one(), 1, profile)
    }

    /// Value-less stand-in used to predict ledger growth without arithmetic.
    pub fn shadow(profile: ParamProfile, noise_bits: u32) -> Self {
        Self::new(BigUint::zero(), noise_bits, profile)
    }

    /// Shadow with this ciphertext's ledger entry.
    pub fn to_shadow(&self) -> Self {
        Self::shadow(self.profile, self.noise_bits)
    }

    pub fn value(&self) -> &BigUint {
        &self.value
    }

    pub fn noise_bits(&self) -> u32 {
        self.noise_bits
    }

    pub fn profile(&self) -> &ParamProfile {
        &self.profile
    }

    pub fn zhint(&self) -> Option<&[BigUint]> {
        self.zhint.as_deref()
    }

    pub fn is_decryptable(&self) -> bool {
        self.profile.decryptable(self.noise_bits)
    }

    pub fn bit_len(&self) -> u64 {
        self.value.bits()
    }

    /// Lowercase big-endian hex with a `0x` prefix.
    pub fn to_hex(&self) -> String {
        to_hex(&self.value)
    }

    pub fn to_repr(&self) -> CiphertextRepr {
        CiphertextRepr {
            value: self.to_hex(),
            noise_bits: self.noise_bits,
        }
    }

    pub fn from_repr(repr: &CiphertextRepr, profile: ParamProfile) -> Result<Self> {
        Ok(Self::new(from_hex(&repr.value)?, repr.noise_bits, profile))
    }

    pub(crate) fn with_value(mut self, value: BigUint) -> Self {
        self.value = value;
        self
    }

    pub(crate) fn without_hint(mut self) -> Self {
        self.zhint = None;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CiphertextRepr {
    pub value: String,
    pub noise_bits: u32,
}

pub fn to_hex(x: &BigUint) -> String {
    format!("0x{}", x.to_str_radix(16))
}

pub fn from_hex(s: &str) -> Result<BigUint> {
    let digits = s
        .strip_prefix("0x")
        .ok_or_else(|| Error::Format(format!("hex value `{s}` lacks the 0x prefix")))?;
    BigUint::parse_bytes(digits.as_bytes(), 16)
        .ok_or_else(|| Error::Format(format!("invalid hex value `{s}`")))
}

fn same_profile(a: &Ciphertext, b: &Ciphertext) -> Result<()> {
    if a.profile == b.profile {
        Ok(())
    } else {
        Err(Error::ProfileMismatch)
    }
}

pub(crate) fn add_ledger(n1: u32, n2: u32) -> u32 {
    n1.max(n2).saturating_add(1)
}

pub(crate) fn mul_ledger(n1: u32, n2: u32) -> u32 {
    if n1 == 0 || n2 == 0 {
        // one factor is an exact zero
        return 0;
    }
    n1.saturating_add(n2).saturating_add(1)
}

/// Homomorphic XOR: integer sum.
pub fn he_add(c1: &Ciphertext, c2: &Ciphertext) -> Result<Ciphertext> {
    same_profile(c1, c2)?;
    Ok(Ciphertext::new(
        &c1.value + &c2.value,
        add_ledger(c1.noise_bits, c2.noise_bits),
        c1.profile,
    ))
}

/// Homomorphic AND: integer product.
pub fn he_mul(c1: &Ciphertext, c2: &Ciphertext) -> Result<Ciphertext> {
    he_mul_with(&Multiplier::default(), c1, c2)
}

pub fn he_mul_with(m: &Multiplier, c1: &Ciphertext, c2: &Ciphertext) -> Result<Ciphertext> {
    same_profile(c1, c2)?;
    Ok(Ciphertext::new(
        m.mul(&c1.value, &c2.value),
        mul_ledger(c1.noise_bits, c2.noise_bits),
        c1.profile,
    ))
}

/// `p ⊕ m`. Adding 1 is the NOT gate.
pub fn mixed_add(p: bool, c: &Ciphertext) -> Ciphertext {
    if p {
        Ciphertext::new(&c.value + 1u32, add_ledger(c.noise_bits, 1), c.profile)
    } else {
        Ciphertext::new(c.value.clone(), c.noise_bits, c.profile)
    }
}

/// `p ∧ m`. Multiplying by 0 gives the literal zero.
pub fn mixed_mul(p: bool, c: &Ciphertext) -> Ciphertext {
    if p {
        Ciphertext::new(c.value.clone(), c.noise_bits, c.profile)
    } else {
        Ciphertext::literal_zero(c.profile)
    }
}

/// `c mod p` mapped into `(-p/2, p/2]`, as (magnitude, negative).
pub fn centered_residue(value: &BigUint, p: &BigUint) -> (BigUint, bool) {
    let r = value % p;
    if (&r << 1u32) > *p {
        (p - r, true)
    } else {
        (r, false)
    }
}

/// Parity of the centred residue.
pub(crate) fn centered_parity(value: &BigUint, p: &BigUint) -> bool {
    let (mag, _) = centered_residue(value, p);
    mag.bit(0)
}
