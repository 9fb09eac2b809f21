//! Big-integer multiplication with a Karatsuba split above a limb threshold.
//!
//! Operands below the threshold (counted in 64-bit limbs) go through a
//! schoolbook product with 128-bit accumulators. Above it the longer operand
//! is split in half and the three-product Karatsuba recurrence is applied;
//! very unbalanced operands are first cut into chunks of the shorter length.

use num_bigint::BigUint;

/// Default Karatsuba cut-over, in 64-bit limbs.
pub const DEFAULT_THRESHOLD: usize = 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Multiplier {
    threshold: usize,
}

impl Default for Multiplier {
    fn default() -> Self {
        Self {
            threshold: DEFAULT_THRESHOLD,
        }
    }
}

impl Multiplier {
    /// A threshold below 2 limbs would recurse forever; it is clamped.
    pub fn with_threshold(threshold: usize) -> Self {
        Self {
            threshold: threshold.max(2),
        }
    }

    pub fn threshold(&self) -> usize {
        self.threshold
    }

    pub fn mul(&self, a: &BigUint, b: &BigUint) -> BigUint {
        let x = a.to_u64_digits();
        let y = b.to_u64_digits();
        if x.is_empty() || y.is_empty() {
            return BigUint::default();
        }
        from_limbs(karatsuba(&x, &y, self.threshold))
    }
}

/// Multiplies with the default threshold.
pub fn mul(a: &BigUint, b: &BigUint) -> BigUint {
    Multiplier::default().mul(a, b)
}

fn from_limbs(limbs: Vec<u64>) -> BigUint {
    let mut digits = Vec::with_capacity(limbs.len() * 2);
    for l in limbs {
        digits.push(l as u32);
        digits.push((l >> 32) as u32);
    }
    BigUint::new(digits)
}

fn trim(v: &mut Vec<u64>) {
    while v.last() == Some(&0) {
        v.pop();
    }
}

pub(crate) fn schoolbook(a: &[u64], b: &[u64]) -> Vec<u64> {
    let mut out = vec![0u64; a.len() + b.len()];
    for (i, &ai) in a.iter().enumerate() {
        if ai == 0 {
            continue;
        }
        let mut carry: u128 = 0;
        for (j, &bj) in b.iter().enumerate() {
            let t = ai as u128 * bj as u128 + out[i + j] as u128 + carry;
            out[i + j] = t as u64;
            carry = t >> 64;
        }
        let mut k = i + b.len();
        while carry != 0 {
            let t = out[k] as u128 + carry;
            out[k] = t as u64;
            carry = t >> 64;
            k += 1;
        }
    }
    out
}

/// `acc[offset..] += x`, growing `acc` as needed.
fn add_at(acc: &mut Vec<u64>, x: &[u64], offset: usize) {
    if acc.len() < offset + x.len() + 1 {
        acc.resize(offset + x.len() + 1, 0);
    }
    let mut carry = 0u64;
    for (i, &xi) in x.iter().enumerate() {
        let (s1, c1) = acc[offset + i].overflowing_add(xi);
        let (s2, c2) = s1.overflowing_add(carry);
        acc[offset + i] = s2;
        carry = (c1 as u64) + (c2 as u64);
    }
    let mut k = offset + x.len();
    while carry != 0 {
        if k == acc.len() {
            acc.push(0);
        }
        let (s, c) = acc[k].overflowing_add(carry);
        acc[k] = s;
        carry = c as u64;
        k += 1;
    }
}

/// `acc -= x`; requires `acc >= x`.
fn sub_in_place(acc: &mut [u64], x: &[u64]) {
    let mut borrow = 0u64;
    for i in 0..acc.len() {
        let xi = x.get(i).copied().unwrap_or(0);
        if i >= x.len() && borrow == 0 {
            break;
        }
        let (d1, b1) = acc[i].overflowing_sub(xi);
        let (d2, b2) = d1.overflowing_sub(borrow);
        acc[i] = d2;
        borrow = (b1 as u64) + (b2 as u64);
    }
    debug_assert_eq!(borrow, 0, "karatsuba middle term went negative");
}

fn sum(a: &[u64], b: &[u64]) -> Vec<u64> {
    let mut out = a.to_vec();
    add_at(&mut out, b, 0);
    trim(&mut out);
    out
}

fn karatsuba(a: &[u64], b: &[u64], threshold: usize) -> Vec<u64> {
    let (a, b) = if a.len() >= b.len() { (a, b) } else { (b, a) };
    if b.is_empty() {
        return Vec::new();
    }
    if b.len() <= threshold {
        let mut out = schoolbook(a, b);
        trim(&mut out);
        return out;
    }
    if a.len() >= 2 * b.len() {
        let mut out = vec![0u64; a.len() + b.len() + 1];
        for (k, chunk) in a.chunks(b.len()).enumerate() {
            let p = karatsuba(chunk, b, threshold);
            add_at(&mut out, &p, k * b.len());
        }
        trim(&mut out);
        return out;
    }

    // a.len() < 2 * b.len(), so b extends past the split point.
    let m = a.len() / 2;
    let (a0, a1) = a.split_at(m);
    let (b0, b1) = b.split_at(m);
    let z0 = karatsuba(a0, b0, threshold);
    let z2 = karatsuba(a1, b1, threshold);
    let mut z1 = karatsuba(&sum(a0, a1), &sum(b0, b1), threshold);
    sub_in_place(&mut z1, &z0);
    sub_in_place(&mut z1, &z2);
    trim(&mut z1);

    let mut out = z0;
    add_at(&mut out, &z1, m);
    add_at(&mut out, &z2, 2 * m);
    trim(&mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn big(limbs: &[u64]) -> BigUint {
        from_limbs(limbs.to_vec())
    }

    #[test]
    fn zero_and_one() {
        let x = big(&[7, 9, 11]);
        assert_eq!(mul(&x, &BigUint::default()), BigUint::default());
        assert_eq!(mul(&x, &BigUint::from(1u8)), x);
    }

    #[test]
    fn all_ones_limbs_carry_through() {
        let x = big(&vec![u64::MAX; 80]);
        let y = big(&vec![u64::MAX; 75]);
        assert_eq!(Multiplier::with_threshold(4).mul(&x, &y), &x * &y);
    }

    #[test]
    fn unbalanced_operands() {
        let x = big(&(1..300u64).map(|i| i.wrapping_mul(0x9e37_79b9_7f4a_7c15)).collect::<Vec<_>>());
        let y = big(&[3, 5, 0, 0, 8]);
        assert_eq!(Multiplier::with_threshold(2).mul(&x, &y), &x * &y);
    }

    proptest! {
        #[test]
        fn matches_reference_product(
            a in proptest::collection::vec(any::<u64>(), 0..120),
            b in proptest::collection::vec(any::<u64>(), 0..120),
            t in 2usize..40,
        ) {
            let (x, y) = (big(&a), big(&b));
            prop_assert_eq!(Multiplier::with_threshold(t).mul(&x, &y), &x * &y);
        }
    }
}
