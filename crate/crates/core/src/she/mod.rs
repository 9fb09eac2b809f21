//! Somewhat-homomorphic encryption over the integers.

mod cipher;
mod keys;
mod params;

pub use cipher::{
    centered_residue, from_hex, he_add, he_mul, he_mul_with, mixed_add, mixed_mul, to_hex, Ciphertext,
    CiphertextRepr,
};
pub use keys::{
    keygen, keygen_with, EncRandomness, Encryptor, KeyFile, KeyOptions, KeyPair, NoiseProbe, PublicKey,
    SecretKey, SquashHint, SquashSecret,
};
pub use params::{Mode, ParamProfile, ProfileName};

pub(crate) use cipher::{add_ledger, mul_ledger};
