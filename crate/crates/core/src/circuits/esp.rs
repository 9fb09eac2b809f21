use super::bit::{and, xor, Bit};
use super::word::{bits_for, EncWord};
use crate::error::Result;
use crate::eval::Evaluator;
use crate::she::Ciphertext;

/// How prefix popcounts are formed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum PrefixStrategy {
    /// Running sum: one encrypted increment per indicator.
    Ripple,
    /// An independent symmetric-polynomial popcount for every prefix.
    #[default]
    Esp,
}

/// Hamming weight via elementary symmetric polynomials.
///
/// `e_j ← e_j ⊕ e_{j−1}·x` over every input; bit `k` of the weight is
/// `e_{2^k} mod 2`.
pub fn popcount_esp(ev: &mut Evaluator, bits: &[Ciphertext]) -> Result<EncWord> {
    popcount_esp_width(ev, bits, bits_for(bits.len() as u64))
}

/// As [`popcount_esp`], producing exactly `width` output bits.
pub fn popcount_esp_width(ev: &mut Evaluator, bits: &[Ciphertext], width: usize) -> Result<EncWord> {
    let needed = bits_for(bits.len() as u64).min(width);
    let top = 1usize << (needed - 1);
    let mut e: Vec<Bit> = vec![Bit::Plain(false); top + 1];
    e[0] = Bit::Plain(true);
    for (i, x) in bits.iter().enumerate() {
        let x = Bit::Enc(x.clone());
        for j in (1..=top.min(i + 1)).rev() {
            let t = and(ev, &e[j - 1], &x)?;
            e[j] = xor(ev, &e[j], &t)?;
        }
    }
    let profile = *ev.profile();
    let out = (0..width)
        .map(|k| {
            let idx = 1usize << k.min(63);
            if k < needed {
                e[idx].clone().into_cipher(profile)
            } else {
                Ciphertext::literal_zero(profile)
            }
        })
        .collect();
    Ok(EncWord::from_bits(out))
}

/// `Σ 2^{w_i}·x_i` for bits `x_i` with weight exponents `w_i`, `width` bits wide.
///
/// Each bit is treated as `2^{w_i}` copies of itself; since
/// `(1 + x·t)^{2^w} ≡ 1 + x·t^{2^w} (mod 2)`, the update is
/// `e_j ← e_j ⊕ e_{j−2^w}·x` and bit `k` of the sum is again `e_{2^k}`.
/// The polynomial degree of every output bit stays at most the number of
/// inputs, unlike a chain of ripple adders.
pub fn weighted_sum_esp(ev: &mut Evaluator, items: &[(Ciphertext, u32)], width: usize) -> Result<EncWord> {
    let profile = *ev.profile();
    let total: u128 = items.iter().map(|(_, w)| 1u128 << w).sum();
    let needed = (bits_for_u128(total)).min(width);
    if needed == 0 {
        return Ok(EncWord::zeros(profile, width));
    }
    let top = 1usize << (needed - 1);
    let mut e: Vec<Bit> = vec![Bit::Plain(false); top + 1];
    e[0] = Bit::Plain(true);
    let mut reach = 0usize;
    for (x, w) in items {
        let step = match 1usize.checked_shl(*w) {
            Some(s) if s <= top => s,
            _ => continue,
        };
        let x = Bit::Enc(x.clone());
        reach = (reach + step).min(top);
        for j in (step..=reach).rev() {
            let t = and(ev, &e[j - step], &x)?;
            e[j] = xor(ev, &e[j], &t)?;
        }
    }
    let out = (0..width)
        .map(|k| {
            if k < needed {
                e[1usize << k].clone().into_cipher(profile)
            } else {
                Ciphertext::literal_zero(profile)
            }
        })
        .collect();
    Ok(EncWord::from_bits(out))
}

fn bits_for_u128(n: u128) -> usize {
    (128 - n.leading_zeros()) as usize
}

/// Popcount of every prefix, each `⌈log2(n+1)⌉` bits wide.
pub fn prefix_sums(ev: &mut Evaluator, bits: &[Ciphertext], strategy: PrefixStrategy) -> Result<Vec<EncWord>> {
    prefix_sums_width(ev, bits, strategy, bits_for(bits.len() as u64))
}

pub fn prefix_sums_width(
    ev: &mut Evaluator,
    bits: &[Ciphertext],
    strategy: PrefixStrategy,
    width: usize,
) -> Result<Vec<EncWord>> {
    match strategy {
        PrefixStrategy::Esp => (1..=bits.len())
            .map(|k| popcount_esp_width(ev, &bits[..k], width))
            .collect(),
        PrefixStrategy::Ripple => {
            let profile = *ev.profile();
            let mut acc: Vec<Bit> = vec![Bit::Plain(false); width];
            let mut out = Vec::with_capacity(bits.len());
            for x in bits {
                let mut carry = Bit::Enc(x.clone());
                for slot in acc.iter_mut() {
                    let s = xor(ev, slot, &carry)?;
                    carry = and(ev, slot, &carry)?;
                    *slot = s;
                }
                out.push(EncWord::from_bits(
                    acc.iter().cloned().map(|b| b.into_cipher(profile)).collect(),
                ));
            }
            Ok(out)
        }
    }
}
