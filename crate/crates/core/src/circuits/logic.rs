use super::bit::{and, carry_only, not, xor, Bit};
use super::word::{same_width, EncWord, Operand};
use crate::error::{Error, Result};
use crate::eval::Evaluator;
use crate::she::Ciphertext;

fn product(ev: &mut Evaluator, factors: Vec<Bit>) -> Result<Bit> {
    let mut acc = Bit::Plain(true);
    for f in &factors {
        acc = and(ev, &acc, f)?;
    }
    Ok(acc)
}

fn xnor(ev: &mut Evaluator, a: &Bit, b: &Bit) -> Result<Bit> {
    match (a, b) {
        (Bit::Enc(_), Bit::Plain(p)) => xor(ev, a, &Bit::Plain(!p)),
        (Bit::Plain(p), Bit::Enc(_)) => xor(ev, &Bit::Plain(!p), b),
        _ => {
            let t = xor(ev, a, b)?;
            not(ev, &t)
        }
    }
}

/// `∏(1 ⊕ a_i ⊕ b_i)`: 1 iff the words are equal.
pub fn eq_word<'a>(ev: &mut Evaluator, a: impl Into<Operand<'a>>, b: impl Into<Operand<'a>>) -> Result<Ciphertext> {
    let (a, b) = (a.into(), b.into());
    same_width(a.width(), b.width())?;
    let factors = (0..a.width())
        .map(|i| xnor(ev, &a.bit(i), &b.bit(i)))
        .collect::<Result<Vec<_>>>()?;
    Ok(product(ev, factors)?.into_cipher(*ev.profile()))
}

/// `∏(1 ⊕ care_i·(a_i ⊕ b_i))`: positions with `care = 0` always match.
pub fn eq_word_masked<'a>(
    ev: &mut Evaluator,
    a: impl Into<Operand<'a>>,
    b: impl Into<Operand<'a>>,
    care: impl Into<Operand<'a>>,
) -> Result<Ciphertext> {
    let (a, b, care) = (a.into(), b.into(), care.into());
    same_width(a.width(), b.width())?;
    same_width(a.width(), care.width())?;
    let factors = (0..a.width())
        .map(|i| {
            let d = xor(ev, &a.bit(i), &b.bit(i))?;
            let m = and(ev, &care.bit(i), &d)?;
            not(ev, &m)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(product(ev, factors)?.into_cipher(*ev.profile()))
}

/// 1 iff `a ≥ b`: the carry out of `a + ¬b + 1`, i.e. the complemented sign of `a − b`.
pub fn sub_compare<'a>(ev: &mut Evaluator, a: impl Into<Operand<'a>>, b: impl Into<Operand<'a>>) -> Result<Ciphertext> {
    let (a, b) = (a.into(), b.into());
    same_width(a.width(), b.width())?;
    let mut carry = Bit::Plain(true);
    for i in 0..a.width() {
        let nb = not(ev, &b.bit(i))?;
        carry = carry_only(ev, &a.bit(i), &nb, &carry)?;
    }
    Ok(carry.into_cipher(*ev.profile()))
}

/// 1 iff `a > b`.
pub fn gt_compare<'a>(ev: &mut Evaluator, a: impl Into<Operand<'a>>, b: impl Into<Operand<'a>>) -> Result<Ciphertext> {
    let ge = sub_compare(ev, b, a)?;
    ev.not(&ge)
}

/// 1 iff `a < b`.
pub fn lt_compare<'a>(ev: &mut Evaluator, a: impl Into<Operand<'a>>, b: impl Into<Operand<'a>>) -> Result<Ciphertext> {
    let ge = sub_compare(ev, a, b)?;
    ev.not(&ge)
}

#[derive(Clone, Debug)]
pub struct SplitCompare {
    /// `B″ ⊕ B′·¬B″` with both parts as `≥`: the OR of the half comparisons.
    pub literal_bit: Ciphertext,
    /// `B″ ⊕ (E″ ∧ B′)` with `B″` strict on the high half: exactly `a ≥ b`.
    pub corrected_bit: Ciphertext,
}

/// Compares low and high halves separately.
pub fn split_compare(ev: &mut Evaluator, a: &EncWord, b: &EncWord) -> Result<SplitCompare> {
    same_width(a.width(), b.width())?;
    let w = a.width();
    if w % 2 != 0 {
        return Err(Error::OddWidth(w));
    }
    let h = w / 2;
    let (a_lo, a_hi) = (a.slice(0..h), a.slice(h..w));
    let (b_lo, b_hi) = (b.slice(0..h), b.slice(h..w));

    let ge_lo = sub_compare(ev, &a_lo, &b_lo)?;
    let ge_hi = sub_compare(ev, &a_hi, &b_hi)?;
    let not_ge_hi = ev.not(&ge_hi)?;
    let t = ev.mul(&ge_lo, &not_ge_hi)?;
    let literal_bit = ev.add(&ge_hi, &t)?;

    let gt_hi = gt_compare(ev, &a_hi, &b_hi)?;
    let eq_hi = eq_word(ev, &a_hi, &b_hi)?;
    let tail = ev.mul(&eq_hi, &ge_lo)?;
    let corrected_bit = ev.add(&gt_hi, &tail)?;
    Ok(SplitCompare {
        literal_bit,
        corrected_bit,
    })
}

/// `a` where `sel = 1`, `b` where `sel = 0`, computed as `b ⊕ sel·(a ⊕ b)`.
pub fn blind_mux(ev: &mut Evaluator, sel: &Ciphertext, a: &EncWord, b: &EncWord) -> Result<EncWord> {
    same_width(a.width(), b.width())?;
    let bits = a
        .bits()
        .iter()
        .zip(b.bits())
        .map(|(x, y)| {
            let d = ev.add(x, y)?;
            let m = ev.mul(sel, &d)?;
            ev.add(y, &m)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EncWord::from_bits(bits))
}

/// Passkey swap: `sel = 1` keeps the order, `sel = 0` exchanges.
pub fn blind_swap(ev: &mut Evaluator, sel: &Ciphertext, a: &EncWord, b: &EncWord) -> Result<(EncWord, EncWord)> {
    same_width(a.width(), b.width())?;
    let not_sel = ev.not(sel)?;
    let mut na = Vec::with_capacity(a.width());
    let mut nb = Vec::with_capacity(a.width());
    for (x, y) in a.bits().iter().zip(b.bits()) {
        let d = ev.add(x, y)?;
        let m = ev.mul(&not_sel, &d)?;
        na.push(ev.add(x, &m)?);
        nb.push(ev.add(y, &m)?);
    }
    Ok((EncWord::from_bits(na), EncWord::from_bits(nb)))
}
