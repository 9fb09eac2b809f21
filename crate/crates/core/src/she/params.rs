use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileName {
    ProfileA,
    ProfileB,
    ProfileVod,
    Custom,
}

impl ProfileName {
    pub fn as_str(&self) -> &'static str {
        match self {
            ProfileName::ProfileA => "profile_a",
            ProfileName::ProfileB => "profile_b",
            ProfileName::ProfileVod => "profile_vod",
            ProfileName::Custom => "custom",
        }
    }
}

impl fmt::Display for ProfileName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ProfileName {
    type Err = Error;

    /// Accepts both the long names and the short CLI forms (`a`, `b`, `vod`).
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "a" | "profile_a" => Ok(ProfileName::ProfileA),
            "b" | "profile_b" => Ok(ProfileName::ProfileB),
            "vod" | "profile_vod" => Ok(ProfileName::ProfileVod),
            "custom" => Ok(ProfileName::Custom),
            other => Err(Error::InvalidProfile(format!("unknown profile `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// `c = m + 2r + p·q`; only the secret-key holder encrypts.
    #[default]
    Symmetric,
    /// `c = m + 2r + Σ zeros[i]` over a random subset of public zero encryptions.
    Asymmetric,
}

impl FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "symmetric" | "sym" => Ok(Mode::Symmetric),
            "asymmetric" | "asym" => Ok(Mode::Asymmetric),
            other => Err(Error::InvalidProfile(format!("unknown mode `{other}`"))),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Symmetric => "symmetric",
            Mode::Asymmetric => "asymmetric",
        })
    }
}

/// Bit lengths derived from the security parameter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ParamProfile {
    pub lambda: u32,
    pub sk_bits: u32,
    pub q_bits: u32,
    pub r_bits: u32,
    pub mode: Mode,
    pub name: ProfileName,
}

fn pow(lambda: u32, e: u32) -> Result<u32> {
    lambda
        .checked_pow(e)
        .ok_or_else(|| Error::InvalidProfile(format!("lambda {lambda}^{e} overflows")))
}

impl ParamProfile {
    /// One of the named presets.
    ///
    /// `profile_a` at small λ has `λ² ≤ λ + 2`, which leaves no room for fresh
    /// noise; there `r_bits` is clamped to `sk_bits - 3`.
    pub fn preset(name: ProfileName, lambda: u32, mode: Mode) -> Result<Self> {
        if lambda < 2 {
            return Err(Error::InvalidLambda(lambda));
        }
        let (sk_bits, q_bits, r_bits) = match name {
            ProfileName::ProfileA => {
                let sk = pow(lambda, 2)?;
                (sk, pow(lambda, 5)?, lambda.min(sk - 3))
            }
            ProfileName::ProfileB => (pow(lambda, 5)?, pow(lambda, 2)?, lambda),
            ProfileName::ProfileVod => {
                let l4 = pow(lambda, 4)?;
                (l4.div_ceil(2), l4 / 2, lambda)
            }
            ProfileName::Custom => {
                return Err(Error::InvalidProfile(
                    "custom profiles need explicit bit lengths".into(),
                ))
            }
        };
        let p = Self {
            lambda,
            sk_bits,
            q_bits,
            r_bits,
            mode,
            name,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn custom(lambda: u32, sk_bits: u32, q_bits: u32, r_bits: u32, mode: Mode) -> Result<Self> {
        if lambda < 2 {
            return Err(Error::InvalidLambda(lambda));
        }
        let p = Self {
            lambda,
            sk_bits,
            q_bits,
            r_bits,
            mode,
            name: ProfileName::Custom,
        };
        p.validate()?;
        Ok(p)
    }

    fn validate(&self) -> Result<()> {
        if self.sk_bits <= self.r_bits + 2 {
            return Err(Error::InvalidProfile(format!(
                "sk_bits ({}) must exceed r_bits + 2 ({})",
                self.sk_bits,
                self.r_bits + 2
            )));
        }
        if self.q_bits == 0 {
            return Err(Error::InvalidProfile("q_bits must be positive".into()));
        }
        Ok(())
    }

    /// Number of public zero encryptions generated in asymmetric mode.
    pub fn zero_count(&self) -> usize {
        match self.mode {
            Mode::Symmetric => 0,
            Mode::Asymmetric => 2 * self.lambda as usize,
        }
    }

    /// Ledger value of a fresh encryption.
    pub fn fresh_noise_bits(&self) -> u32 {
        let base = self.r_bits + 1;
        match self.mode {
            Mode::Symmetric => base,
            // Up to zero_count extra `2r` terms from the subset sum.
            Mode::Asymmetric => base + ceil_log2(self.zero_count() as u64 + 1),
        }
    }

    /// Noise bounds strictly below this many bits decrypt correctly.
    pub fn noise_limit(&self) -> u32 {
        self.sk_bits - 1
    }

    pub fn decryptable(&self, noise_bits: u32) -> bool {
        noise_bits < self.noise_limit()
    }

    /// Largest multiplicative depth `d` with `(r_bits + 1)·2^d + d < sk_bits - 1`.
    pub fn capacity(&self) -> u32 {
        let limit = u64::from(self.noise_limit());
        let base = u64::from(self.r_bits) + 1;
        let mut d = 0u32;
        while d < 62 && (base << (d + 1)) + u64::from(d + 1) < limit {
            d += 1;
        }
        d
    }

    pub(crate) fn squash_alpha(&self) -> usize {
        self.lambda as usize
    }

    pub(crate) fn squash_beta(&self) -> usize {
        5 * self.lambda as usize
    }

    /// Upper bound on the bit length of a fresh ciphertext value.
    pub fn fresh_value_bits(&self) -> u32 {
        self.sk_bits + self.q_bits + 1 + ceil_log2(self.zero_count() as u64 + 1)
    }
}

pub(crate) fn ceil_log2(x: u64) -> u32 {
    if x <= 1 {
        0
    } else {
        64 - (x - 1).leading_zeros()
    }
}
