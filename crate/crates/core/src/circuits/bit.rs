use crate::error::Result;
use crate::eval::Evaluator;
use crate::she::{Ciphertext, ParamProfile};

/// A wire carrying either a public constant or a ciphertext. Constant-constant
/// gates fold locally and are not counted.
#[derive(Clone, Debug)]
pub(crate) enum Bit {
    Plain(bool),
    Enc(Ciphertext),
}

impl Bit {
    pub(crate) fn into_cipher(self, profile: ParamProfile) -> Ciphertext {
        match self {
            Bit::Enc(c) => c,
            Bit::Plain(false) => Ciphertext::literal_zero(profile),
            Bit::Plain(true) => Ciphertext::literal_one(profile),
        }
    }
}

pub(crate) fn xor(ev: &mut Evaluator, a: &Bit, b: &Bit) -> Result<Bit> {
    Ok(match (a, b) {
        (Bit::Plain(x), Bit::Plain(y)) => Bit::Plain(x ^ y),
        (Bit::Plain(p), Bit::Enc(c)) | (Bit::Enc(c), Bit::Plain(p)) => Bit::Enc(ev.mixed_add(*p, c)?),
        (Bit::Enc(x), Bit::Enc(y)) => Bit::Enc(ev.add(x, y)?),
    })
}

pub(crate) fn and(ev: &mut Evaluator, a: &Bit, b: &Bit) -> Result<Bit> {
    Ok(match (a, b) {
        (Bit::Plain(x), Bit::Plain(y)) => Bit::Plain(x & y),
        (Bit::Plain(p), Bit::Enc(c)) | (Bit::Enc(c), Bit::Plain(p)) => Bit::Enc(ev.mixed_mul(*p, c)?),
        (Bit::Enc(x), Bit::Enc(y)) => Bit::Enc(ev.mul(x, y)?),
    })
}

pub(crate) fn not(ev: &mut Evaluator, a: &Bit) -> Result<Bit> {
    Ok(match a {
        Bit::Plain(x) => Bit::Plain(!x),
        Bit::Enc(c) => Bit::Enc(ev.not(c)?),
    })
}

/// Full adder: `(a ⊕ b ⊕ c, ab ⊕ c(a ⊕ b))`.
pub(crate) fn full_add(ev: &mut Evaluator, a: &Bit, b: &Bit, c: &Bit) -> Result<(Bit, Bit)> {
    let t = xor(ev, a, b)?;
    let s = xor(ev, &t, c)?;
    let g = and(ev, a, b)?;
    let h = and(ev, c, &t)?;
    let carry = xor(ev, &g, &h)?;
    Ok((s, carry))
}

/// Full adder that skips the sum bit.
pub(crate) fn carry_only(ev: &mut Evaluator, a: &Bit, b: &Bit, c: &Bit) -> Result<Bit> {
    let t = xor(ev, a, b)?;
    let g = and(ev, a, b)?;
    let h = and(ev, c, &t)?;
    xor(ev, &g, &h)
}
