use super::bit::{and, full_add, not, xor, Bit};
use super::word::{same_width, EncWord, Operand};
use crate::error::{Error, Result};
use crate::eval::Evaluator;
use crate::she::Ciphertext;

fn to_word(ev: &Evaluator, bits: Vec<Bit>) -> EncWord {
    let profile = *ev.profile();
    EncWord::from_bits(bits.into_iter().map(|b| b.into_cipher(profile)).collect())
}

/// Ripple-carry sum, one bit wider than the inputs.
pub fn add_words<'a>(ev: &mut Evaluator, a: impl Into<Operand<'a>>, b: impl Into<Operand<'a>>) -> Result<EncWord> {
    let (a, b) = (a.into(), b.into());
    same_width(a.width(), b.width())?;
    let mut out = Vec::with_capacity(a.width() + 1);
    let (a0, b0) = (a.bit(0), b.bit(0));
    out.push(xor(ev, &a0, &b0)?);
    let mut carry = and(ev, &a0, &b0)?;
    for i in 1..a.width() {
        let (s, c) = full_add(ev, &a.bit(i), &b.bit(i), &carry)?;
        out.push(s);
        carry = c;
    }
    out.push(carry);
    Ok(to_word(ev, out))
}

/// `a − b` in two's complement, one bit wider than the inputs (top bit is the sign).
pub fn sub_words<'a>(ev: &mut Evaluator, a: impl Into<Operand<'a>>, b: impl Into<Operand<'a>>) -> Result<EncWord> {
    let (a, b) = (a.into(), b.into());
    same_width(a.width(), b.width())?;
    let w = a.width();
    let mut out = Vec::with_capacity(w + 1);
    let mut carry = Bit::Plain(true);
    for i in 0..=w {
        let (ai, bi) = if i < w {
            (a.bit(i), b.bit(i))
        } else {
            (Bit::Plain(false), Bit::Plain(false))
        };
        let nb = not(ev, &bi)?;
        if i < w {
            let (s, c) = full_add(ev, &ai, &nb, &carry)?;
            out.push(s);
            carry = c;
        } else {
            // sign bit: 0 ⊕ 1 ⊕ carry
            let t = xor(ev, &ai, &nb)?;
            out.push(xor(ev, &t, &carry)?);
        }
    }
    Ok(to_word(ev, out))
}

/// Bitwise NOT followed by `+1`.
pub fn twos_complement(ev: &mut Evaluator, a: &EncWord) -> Result<EncWord> {
    let mut out = Vec::with_capacity(a.width());
    let mut carry = Bit::Plain(true);
    for c in a.bits() {
        let n = not(ev, &Bit::Enc(c.clone()))?;
        out.push(xor(ev, &n, &carry)?);
        carry = and(ev, &n, &carry)?;
    }
    Ok(to_word(ev, out))
}

/// `|a|` for a two's-complement word: `mux(sign, −a, a)`.
pub fn abs_value(ev: &mut Evaluator, a: &EncWord) -> Result<EncWord> {
    if a.width() < 2 {
        return Err(Error::TooNarrow {
            width: a.width(),
            min: 2,
        });
    }
    let sign = a.bit(a.width() - 1).clone();
    let neg = twos_complement(ev, a)?;
    super::logic::blind_mux(ev, &sign, &neg, a)
}

/// `|a − b|`, `w` bits wide: both two's-complement differences are formed
/// from the inputs and the sign of `a − b` picks the non-negative one.
///
/// Equal to `abs_value(sub_words(a, b))` truncated to `w` bits, but the
/// negation no longer rides on top of the first subtraction's carry chain,
/// which keeps the ledger growth to one chain instead of two.
pub fn abs_diff<'a>(ev: &mut Evaluator, a: impl Into<Operand<'a>>, b: impl Into<Operand<'a>>) -> Result<EncWord> {
    let (a, b) = (a.into(), b.into());
    same_width(a.width(), b.width())?;
    let w = a.width();
    let ab = sub_words(ev, a, b)?;
    let ba = sub_words(ev, b, a)?;
    let sign = ab.bit(w).clone();
    super::logic::blind_mux(ev, &sign, &ba.slice(0..w), &ab.slice(0..w))
}

/// Schoolbook shift-and-add product, `2w` bits wide.
///
/// `w²` partial-product ANDs, then the running sum absorbs one row per step:
/// the first step adds a `(w−1)`-bit window to a `w`-bit row, later steps are
/// `w`-bit ripple additions. For `w ≥ 2` that is `w² + 2(w−1) + (w−2)(2w−1)`
/// multiplications and `(3w−4) + (w−2)(3w−2)` additions; `w = 1` is one AND.
pub fn mul_words(ev: &mut Evaluator, a: &EncWord, b: &EncWord) -> Result<EncWord> {
    same_width(a.width(), b.width())?;
    let w = a.width();
    let partial = |ev: &mut Evaluator, j: usize| -> Result<Vec<Ciphertext>> {
        a.bits().iter().map(|ai| ev.mul(ai, b.bit(j))).collect()
    };
    let mut acc = partial(ev, 0)?;
    for j in 1..w {
        let pp = partial(ev, j)?;
        let sum = ripple(ev, &acc[j..], &pp)?;
        acc.truncate(j);
        acc.extend(sum);
    }
    acc.resize(2 * w, Ciphertext::literal_zero(*ev.profile()));
    Ok(EncWord::from_bits(acc))
}

/// Sum of a short and a long bit vector (`short.len() ≤ long.len()`), one bit
/// wider than `long`. Positions past `short` use half adders.
fn ripple(ev: &mut Evaluator, short: &[Ciphertext], long: &[Ciphertext]) -> Result<Vec<Ciphertext>> {
    let mut out = Vec::with_capacity(long.len() + 1);
    let mut carry: Option<Ciphertext> = None;
    for (i, y) in long.iter().enumerate() {
        let (s, c) = match (short.get(i), carry.take()) {
            (Some(x), None) => (ev.add(x, y)?, ev.mul(x, y)?),
            (Some(x), Some(c)) => {
                let t = ev.add(x, y)?;
                let s = ev.add(&t, &c)?;
                let g = ev.mul(x, y)?;
                let h = ev.mul(&c, &t)?;
                (s, ev.add(&g, &h)?)
            }
            (None, Some(c)) => (ev.add(y, &c)?, ev.mul(y, &c)?),
            (None, None) => (y.clone(), Ciphertext::literal_zero(*ev.profile())),
        };
        out.push(s);
        carry = Some(c);
    }
    out.push(carry.unwrap_or_else(|| Ciphertext::literal_zero(*ev.profile())));
    Ok(out)
}
