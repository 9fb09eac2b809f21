use serde::{Deserialize, Serialize};

use crate::circuits::{star, EncWord};
use crate::error::{Error, Result};
use crate::eval::Evaluator;
use crate::rng::DetRng;
use crate::she::{Ciphertext, CiphertextRepr, Encryptor, ParamProfile};

/// Width of a trust value.
pub const TRUST_BITS: usize = 4;

/// Public skeleton of the per-hop adder. Its interface is an XOR gate then
/// an AND gate over `(acc_i, trust_i)` for each of the four trust bits; a
/// fixed carry chain follows, and the upper accumulator bits only absorb
/// the carry.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdderShape {
    pub acc_bits: usize,
}

impl AdderShape {
    pub fn gate_count(&self) -> usize {
        2 * TRUST_BITS.min(self.acc_bits)
    }

    /// Star selector of gate `g`: `false` for XOR, `true` for AND.
    pub fn selector(&self, g: usize) -> bool {
        g % 2 == 1
    }
}

/// One Star gate's wires: the encrypted selector and both inputs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StarTriple {
    pub s: Ciphertext,
    pub x: Ciphertext,
    pub y: Ciphertext,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StarTripleRepr {
    pub s: CiphertextRepr,
    pub x: CiphertextRepr,
    pub y: CiphertextRepr,
}

/// Wire triples for the next hop's input gates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AdapterBundle {
    pub triples: Vec<StarTriple>,
}

impl AdapterBundle {
    pub fn ciphertext_count(&self) -> usize {
        3 * self.triples.len()
    }

    pub fn to_repr(&self) -> Vec<StarTripleRepr> {
        self.triples
            .iter()
            .map(|t| StarTripleRepr {
                s: t.s.to_repr(),
                x: t.x.to_repr(),
                y: t.y.to_repr(),
            })
            .collect()
    }

    pub fn from_repr(r: &[StarTripleRepr], profile: ParamProfile) -> Result<Self> {
        let triples = r
            .iter()
            .map(|t| {
                Ok(StarTriple {
                    s: Ciphertext::from_repr(&t.s, profile)?,
                    x: Ciphertext::from_repr(&t.x, profile)?,
                    y: Ciphertext::from_repr(&t.y, profile)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { triples })
    }
}

/// Packs `acc` into the next hop's input gates. `X` carries the accumulator
/// bit, `Y` a noiseless zero that the receiver shifts by its plaintext trust
/// bit, and `S` the freshly encrypted gate kind.
pub fn adapt<E: Encryptor + ?Sized>(enc: &E, acc: &EncWord, shape: &AdderShape, rng: &mut DetRng) -> Result<AdapterBundle> {
    if acc.width() != shape.acc_bits {
        return Err(Error::ShapeMismatch(format!(
            "accumulator has {} bits, the adder skeleton expects {}",
            acc.width(),
            shape.acc_bits
        )));
    }
    let triples = (0..shape.gate_count())
        .map(|g| {
            Ok(StarTriple {
                s: enc.encrypt_bit(shape.selector(g), rng)?,
                x: acc.bit(g / 2).clone(),
                y: Ciphertext::literal_zero(*enc.profile()),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AdapterBundle { triples })
}

fn bundle_core(
    ev: &mut Evaluator,
    bundle: &AdapterBundle,
    upper: &[Ciphertext],
    shape: &AdderShape,
    trust: u8,
) -> Result<EncWord> {
    let mut outs = Vec::with_capacity(bundle.triples.len());
    for (g, t) in bundle.triples.iter().enumerate() {
        let y = ev.mixed_add((trust >> (g / 2)) & 1 == 1, &t.y)?;
        outs.push(star(ev, &t.s, &t.x, &y)?);
    }
    let mut sum = Vec::with_capacity(shape.acc_bits);
    let mut carry: Option<Ciphertext> = None;
    for pg in outs.chunks(2) {
        let (p, g) = (&pg[0], &pg[1]);
        match carry {
            None => {
                sum.push(p.clone());
                carry = Some(g.clone());
            }
            Some(c) => {
                sum.push(ev.add(p, &c)?);
                let cp = ev.mul(&c, p)?;
                carry = Some(ev.add(g, &cp)?);
            }
        }
    }
    for a in upper {
        let c = carry.take().expect("the interface has at least one gate pair");
        sum.push(ev.add(a, &c)?);
        carry = Some(ev.mul(a, &c)?);
    }
    Ok(EncWord::from_bits(sum))
}

/// Runs the received gates with the local trust value and the public carry
/// chain over the accumulator's upper bits `acc[4..]`; equals `hop_update`
/// on the adapted accumulator.
pub fn evaluate_bundle(
    ev: &mut Evaluator,
    bundle: &AdapterBundle,
    acc: &EncWord,
    shape: &AdderShape,
    trust: u8,
) -> Result<EncWord> {
    if acc.width() != shape.acc_bits {
        return Err(Error::ShapeMismatch(format!(
            "accumulator has {} bits, the adder skeleton expects {}",
            acc.width(),
            shape.acc_bits
        )));
    }
    if bundle.triples.len() != shape.gate_count() {
        return Err(Error::ShapeMismatch(format!(
            "bundle has {} gates, the adder skeleton has {}",
            bundle.triples.len(),
            shape.gate_count()
        )));
    }
    if !(1..=10).contains(&trust) {
        return Err(Error::Format(format!("trust {trust} is outside 1..=10")));
    }
    if !ev.is_ledger_only() {
        let shadow = AdapterBundle {
            triples: bundle
                .triples
                .iter()
                .map(|t| StarTriple {
                    s: t.s.to_shadow(),
                    x: t.x.to_shadow(),
                    y: t.y.to_shadow(),
                })
                .collect(),
        };
        let upper: Vec<Ciphertext> = acc.bits()[shape.gate_count() / 2..].iter().map(Ciphertext::to_shadow).collect();
        let out = bundle_core(&mut ev.ledger_twin(), &shadow, &upper, shape, trust)?;
        let profile = *ev.profile();
        if !profile.decryptable(out.max_noise()) {
            return Err(Error::NoiseOverflow {
                noise_bits: out.max_noise(),
                limit: profile.noise_limit(),
            });
        }
    }
    bundle_core(ev, bundle, &acc.bits()[shape.gate_count() / 2..], shape, trust)
}
