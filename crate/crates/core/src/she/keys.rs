use num_bigint::BigUint;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::cipher::{centered_parity, centered_residue, from_hex, to_hex, Ciphertext};
use super::params::{Mode, ParamProfile, ProfileName};
use crate::error::{Error, Result};
use crate::rng::DetRng;

/// Secret subset of the squashing hint.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SquashSecret {
    pub s: Vec<bool>,
    pub kappa: u32,
}

/// Public squashing vector: `y_i` is the fixed-point value `y_i / 2^kappa` in `[0, 2)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SquashHint {
    pub y: Vec<BigUint>,
    pub kappa: u32,
    pub alpha: usize,
    pub beta: usize,
}

impl SquashHint {
    /// Largest ciphertext bit length whose hint rounds exactly.
    pub fn max_cipher_bits(&self, sk_bits: u32) -> u64 {
        u64::from(self.kappa).saturating_sub(u64::from(sk_bits) + 4)
    }

    fn modulus_bits(&self) -> u64 {
        u64::from(self.kappa) + 1
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SecretKey {
    pub(crate) profile: ParamProfile,
    pub(crate) p: BigUint,
    pub(crate) squash: Option<SquashSecret>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PublicKey {
    pub(crate) profile: ParamProfile,
    pub(crate) zeros: Vec<BigUint>,
    pub(crate) squash: Option<SquashHint>,
    /// `p·q0`; reducing by it leaves the residue mod `p` untouched.
    pub(crate) x0: Option<BigUint>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KeyPair {
    pub sk: SecretKey,
    pub pk: PublicKey,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct KeyOptions {
    pub squash: bool,
    pub publish_x0: bool,
}

/// Randomness drawn by one encryption, for test instrumentation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EncRandomness {
    pub r: BigUint,
    pub q: BigUint,
    pub subset: Vec<usize>,
}

/// Exact noise measurement with the secret key.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NoiseProbe {
    pub residue_bits: u64,
    pub parity_ok: bool,
}

/// Anything that can produce fresh encryptions.
pub trait Encryptor {
    fn profile(&self) -> &ParamProfile;
    fn encrypt_bit(&self, m: bool, rng: &mut DetRng) -> Result<Ciphertext>;
}

/// Key generation with a preset profile, symmetric mode, no squashing.
pub fn keygen(lambda: u32, name: ProfileName, seed: u64) -> Result<KeyPair> {
    let profile = ParamProfile::preset(name, lambda, Mode::Symmetric)?;
    keygen_with(profile, KeyOptions::default(), seed)
}

pub fn keygen_with(profile: ParamProfile, opts: KeyOptions, seed: u64) -> Result<KeyPair> {
    let mut rng = DetRng::derive(seed, "keygen");
    let mut p = rng.exact_bits(profile.sk_bits);
    p.set_bit(0, true);

    let mut zrng = rng.split("zeros");
    let zeros = (0..profile.zero_count())
        .map(|_| {
            let r = zrng.below_pow2(profile.r_bits);
            let q = zrng.exact_bits(profile.q_bits);
            (r << 1u32) + &p * q
        })
        .collect();

    let mut xrng = rng.split("x0");
    let x0 = opts
        .publish_x0
        .then(|| &p * xrng.exact_bits(profile.q_bits));

    let (squash_sk, squash_pk) = if opts.squash {
        let (s, h) = squash_material(&profile, &p, &mut rng.split("squash"));
        (Some(s), Some(h))
    } else {
        (None, None)
    };

    Ok(KeyPair {
        sk: SecretKey {
            profile,
            p,
            squash: squash_sk,
        },
        pk: PublicKey {
            profile,
            zeros,
            squash: squash_pk,
            x0,
        },
    })
}

fn squash_material(profile: &ParamProfile, p: &BigUint, rng: &mut DetRng) -> (SquashSecret, SquashHint) {
    let alpha = profile.squash_alpha();
    let beta = profile.squash_beta();
    let hint_bits = 2 * profile.fresh_value_bits();
    let kappa = profile.sk_bits + hint_bits + 4;
    let modulus_bits = kappa + 1;
    let modulus = BigUint::from(1u32) << modulus_bits;

    // random α-subset of [0, β)
    let mut idx: Vec<usize> = (0..beta).collect();
    for i in 0..alpha {
        let j = i + rng.index(beta - i);
        idx.swap(i, j);
    }
    let mut chosen = idx[..alpha].to_vec();
    chosen.sort_unstable();
    let mut s = vec![false; beta];
    for &i in &chosen {
        s[i] = true;
    }

    // round(2^κ / p)
    let target = ((BigUint::from(1u32) << (kappa + 1)) / p + 1u32) >> 1u32;
    let mut y: Vec<BigUint> = (0..beta).map(|_| rng.below_pow2(modulus_bits)).collect();
    let last = *chosen.last().expect("alpha >= 1");
    let others: BigUint = chosen[..alpha - 1].iter().map(|&i| &y[i]).sum();
    let others = others % &modulus;
    y[last] = (&target + &modulus - others) % &modulus;

    (
        SquashSecret { s, kappa },
        SquashHint {
            y,
            kappa,
            alpha,
            beta,
        },
    )
}

impl SecretKey {
    pub fn profile(&self) -> &ParamProfile {
        &self.profile
    }

    pub fn p(&self) -> &BigUint {
        &self.p
    }

    pub fn squash(&self) -> Option<&SquashSecret> {
        self.squash.as_ref()
    }

    fn check(&self, c: &Ciphertext) -> Result<()> {
        if c.profile != self.profile {
            return Err(Error::ProfileMismatch);
        }
        Ok(())
    }

    pub fn decrypt(&self, c: &Ciphertext) -> Result<bool> {
        self.check(c)?;
        if !c.is_decryptable() {
            return Err(Error::NoiseOverflow {
                noise_bits: c.noise_bits,
                limit: self.profile.noise_limit(),
            });
        }
        Ok(centered_parity(&c.value, &self.p))
    }

    /// Decrypts regardless of the ledger, for instrumentation.
    pub fn force_decrypt(&self, c: &Ciphertext) -> bool {
        centered_parity(&c.value, &self.p)
    }

    /// `LSB(c) ⊕ LSB(round(Σ s_i·z_i))`.
    pub fn decrypt_squashed(&self, c: &Ciphertext) -> Result<bool> {
        self.check(c)?;
        let s = self.squash.as_ref().ok_or(Error::MissingHint)?;
        let z = c.zhint.as_ref().ok_or(Error::MissingHint)?;
        if z.len() != s.s.len() {
            return Err(Error::MissingHint);
        }
        let sum: BigUint = z
            .iter()
            .zip(&s.s)
            .filter(|(_, &on)| on)
            .map(|(zi, _)| zi)
            .sum();
        let k = s.kappa;
        let half = BigUint::from(1u32) << (k - 1);
        let rounded = (sum + half) >> k;
        Ok(c.value.bit(0) ^ rounded.bit(0))
    }

    pub fn measure_noise(&self, c: &Ciphertext, intended: bool) -> NoiseProbe {
        let (mag, _) = centered_residue(&c.value, &self.p);
        NoiseProbe {
            residue_bits: mag.bits(),
            parity_ok: mag.bit(0) == intended,
        }
    }
}

impl PublicKey {
    pub fn profile(&self) -> &ParamProfile {
        &self.profile
    }

    pub fn zeros(&self) -> &[BigUint] {
        &self.zeros
    }

    pub fn squash(&self) -> Option<&SquashHint> {
        self.squash.as_ref()
    }

    pub fn x0(&self) -> Option<&BigUint> {
        self.x0.as_ref()
    }

    /// Computes `z_i = c·y_i mod 2^(κ+1)` and attaches it to a copy of `c`.
    pub fn attach_hint(&self, c: &Ciphertext) -> Result<Ciphertext> {
        let h = self.squash.as_ref().ok_or(Error::MissingHint)?;
        let limit = h.max_cipher_bits(self.profile.sk_bits);
        if c.value.bits() > limit {
            return Err(Error::HintPrecision {
                bits: c.value.bits(),
                limit,
            });
        }
        let mask_bits = h.modulus_bits();
        let z = h
            .y
            .iter()
            .map(|yi| truncate(&c.value * yi, mask_bits))
            .collect();
        let mut out = c.clone();
        out.zhint = Some(z);
        Ok(out)
    }

    /// Asymmetric encryption: `m + 2r + Σ` over a random half-density subset of zeros.
    pub fn encrypt_logged(&self, m: bool, rng: &mut DetRng) -> Result<(Ciphertext, EncRandomness)> {
        if self.profile.mode != Mode::Asymmetric {
            return Err(Error::SecretKeyRequired);
        }
        let r = rng.below_pow2(self.profile.r_bits);
        let subset: Vec<usize> = (0..self.zeros.len()).filter(|_| rng.bit()).collect();
        let mut value = (&r << 1u32) + u32::from(m);
        for &i in &subset {
            value += &self.zeros[i];
        }
        let c = Ciphertext::new(value, self.profile.fresh_noise_bits(), self.profile);
        let c = self.finish(c)?;
        Ok((
            c,
            EncRandomness {
                r,
                q: BigUint::zero(),
                subset,
            },
        ))
    }

    fn finish(&self, c: Ciphertext) -> Result<Ciphertext> {
        if self.squash.is_some() {
            self.attach_hint(&c)
        } else {
            Ok(c)
        }
    }
}

fn truncate(x: BigUint, bits: u64) -> BigUint {
    if x.bits() <= bits {
        return x;
    }
    let mut digits = x.to_u64_digits();
    let words = bits.div_ceil(64) as usize;
    digits.truncate(words);
    let spare = words as u64 * 64 - bits;
    if spare > 0 {
        if let Some(last) = digits.last_mut() {
            *last &= u64::MAX >> spare;
        }
    }
    let limbs: Vec<u32> = digits
        .iter()
        .flat_map(|&d| [d as u32, (d >> 32) as u32])
        .collect();
    BigUint::new(limbs)
}

impl Encryptor for PublicKey {
    fn profile(&self) -> &ParamProfile {
        &self.profile
    }

    fn encrypt_bit(&self, m: bool, rng: &mut DetRng) -> Result<Ciphertext> {
        self.encrypt_logged(m, rng).map(|(c, _)| c)
    }
}

impl KeyPair {
    pub fn profile(&self) -> &ParamProfile {
        &self.sk.profile
    }

    /// Fresh encryption; symmetric mode uses `k = p`.
    pub fn encrypt(&self, m: bool, rng: &mut DetRng) -> Ciphertext {
        self.encrypt_logged(m, rng).0
    }

    pub fn encrypt_logged(&self, m: bool, rng: &mut DetRng) -> (Ciphertext, EncRandomness) {
        let profile = self.sk.profile;
        match profile.mode {
            Mode::Asymmetric => self
                .pk
                .encrypt_logged(m, rng)
                .expect("asymmetric keys encrypt publicly with sound hint sizes"),
            Mode::Symmetric => {
                let r = rng.below_pow2(profile.r_bits);
                let q = rng.exact_bits(profile.q_bits);
                let value = (&r << 1u32) + u32::from(m) + &self.sk.p * &q;
                let c = Ciphertext::new(value, profile.fresh_noise_bits(), profile);
                let c = self
                    .pk
                    .finish(c)
                    .expect("fresh ciphertexts fit the hint precision");
                (
                    c,
                    EncRandomness {
                        r,
                        q,
                        subset: Vec::new(),
                    },
                )
            }
        }
    }

    pub fn decrypt(&self, c: &Ciphertext) -> Result<bool> {
        self.sk.decrypt(c)
    }

    /// Decrypt-then-reencrypt. A test utility, not bootstrapping.
    pub fn trusted_refresh(&self, c: &Ciphertext, rng: &mut DetRng) -> Result<Ciphertext> {
        let m = self.sk.decrypt(c)?;
        Ok(self.encrypt(m, rng))
    }
}

impl Encryptor for KeyPair {
    fn profile(&self) -> &ParamProfile {
        &self.sk.profile
    }

    fn encrypt_bit(&self, m: bool, rng: &mut DetRng) -> Result<Ciphertext> {
        Ok(self.encrypt(m, rng))
    }
}

/// JSON key file. `sk_hex` and `s` are absent in a public export.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeyFile {
    pub lambda: u32,
    pub profile: ProfileName,
    pub mode: Mode,
    pub sk_bits: u32,
    pub q_bits: u32,
    pub r_bits: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sk_hex: Option<String>,
    pub zeros_hex: Vec<String>,
    pub y_fixedpoint_hex: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<Vec<usize>>,
    pub alpha: usize,
    pub beta: usize,
    pub kappa: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0_hex: Option<String>,
}

impl KeyFile {
    pub fn from_keys(keys: &KeyPair) -> Self {
        let mut f = Self::from_public(&keys.pk);
        f.sk_hex = Some(to_hex(&keys.sk.p));
        f.s = keys
            .sk
            .squash
            .as_ref()
            .map(|sq| sq.s.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i).collect());
        f
    }

    pub fn from_public(pk: &PublicKey) -> Self {
        let p = pk.profile;
        let (y, alpha, beta, kappa) = match &pk.squash {
            Some(h) => (h.y.iter().map(to_hex).collect(), h.alpha, h.beta, h.kappa),
            None => (Vec::new(), p.squash_alpha(), p.squash_beta(), 0),
        };
        Self {
            lambda: p.lambda,
            profile: p.name,
            mode: p.mode,
            sk_bits: p.sk_bits,
            q_bits: p.q_bits,
            r_bits: p.r_bits,
            sk_hex: None,
            zeros_hex: pk.zeros.iter().map(to_hex).collect(),
            y_fixedpoint_hex: y,
            s: None,
            alpha,
            beta,
            kappa,
            x0_hex: pk.x0.as_ref().map(to_hex),
        }
    }

    pub fn profile(&self) -> Result<ParamProfile> {
        let p = match self.profile {
            ProfileName::Custom => {
                ParamProfile::custom(self.lambda, self.sk_bits, self.q_bits, self.r_bits, self.mode)?
            }
            name => ParamProfile::preset(name, self.lambda, self.mode)?,
        };
        if (p.sk_bits, p.q_bits, p.r_bits) != (self.sk_bits, self.q_bits, self.r_bits) {
            return Err(Error::Format("bit lengths disagree with the named profile".into()));
        }
        Ok(p)
    }

    pub fn public_key(&self) -> Result<PublicKey> {
        let profile = self.profile()?;
        let zeros = self
            .zeros_hex
            .iter()
            .map(|z| from_hex(z))
            .collect::<Result<Vec<_>>>()?;
        let squash = if self.y_fixedpoint_hex.is_empty() {
            None
        } else {
            if self.y_fixedpoint_hex.len() != self.beta {
                return Err(Error::Format("hint vector length differs from beta".into()));
            }
            Some(SquashHint {
                y: self
                    .y_fixedpoint_hex
                    .iter()
                    .map(|y| from_hex(y))
                    .collect::<Result<Vec<_>>>()?,
                kappa: self.kappa,
                alpha: self.alpha,
                beta: self.beta,
            })
        };
        Ok(PublicKey {
            profile,
            zeros,
            squash,
            x0: self.x0_hex.as_deref().map(from_hex).transpose()?,
        })
    }

    pub fn key_pair(&self) -> Result<KeyPair> {
        let pk = self.public_key()?;
        let sk_hex = self
            .sk_hex
            .as_deref()
            .ok_or_else(|| Error::Format("key file holds no secret key".into()))?;
        let p = from_hex(sk_hex)?;
        if !p.bit(0) || p.bits() != u64::from(pk.profile.sk_bits) {
            return Err(Error::Format("secret key is not an odd sk_bits-bit integer".into()));
        }
        let squash = match (&self.s, &pk.squash) {
            (Some(idx), Some(h)) => {
                let mut s = vec![false; h.beta];
                for &i in idx {
                    *s.get_mut(i)
                        .ok_or_else(|| Error::Format("squash index out of range".into()))? = true;
                }
                if s.iter().filter(|&&b| b).count() != h.alpha {
                    return Err(Error::Format("squash subset weight differs from alpha".into()));
                }
                Some(SquashSecret { s, kappa: h.kappa })
            }
            (None, None) => None,
            _ => return Err(Error::Format("squash subset and hint must come together".into())),
        };
        Ok(KeyPair {
            sk: SecretKey {
                profile: pk.profile,
                p,
                squash,
            },
            pk,
        })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("key file serializes");
        s.push('\n');
        s
    }
}
