use serde::{Deserialize, Serialize};

use super::Eta;
use crate::circuits::{EncWord, EncWordRepr, PlainWord};
use crate::error::{Error, Result};
use crate::rng::DetRng;
use crate::she::{Ciphertext, CiphertextRepr, Encryptor, ParamProfile};
use blindgate_oracle::CmpOp;

/// Client request envelope for the generic circuit.
#[derive(Clone, Debug)]
pub struct Datagram {
    pub column: String,
    /// Column summed into [`QueryResult::sum`](super::QueryResult), if any.
    pub sum_column: Option<String>,
    /// Equality branch switcher.
    pub f1: Ciphertext,
    /// Greater-than branch switcher.
    pub f2: Ciphertext,
    /// Less-than branch switcher.
    pub f3: Ciphertext,
    /// Write flag.
    pub f4: Ciphertext,
    pub v: EncWord,
    pub care: EncWord,
    pub eta: Eta,
    pub update: EncWord,
}

/// Plain description of a request, encrypted by [`Datagram::build`].
#[derive(Clone, Debug)]
pub struct DatagramSpec<'a> {
    pub column: &'a str,
    pub sum_column: Option<&'a str>,
    pub op: CmpOp,
    pub write: bool,
    pub value: &'a [bool],
    pub care: &'a [bool],
    pub n: u64,
    pub index_width: usize,
    pub encrypt_eta: bool,
    /// Record written to matching rows; all zeros deletes.
    pub update: &'a [bool],
}

impl Datagram {
    pub fn build<E: Encryptor + ?Sized>(enc: &E, spec: &DatagramSpec<'_>, rng: &mut DetRng) -> Result<Self> {
        let flag = |b: bool, rng: &mut DetRng| enc.encrypt_bit(b, rng);
        let eta_plain = PlainWord::from_u64(spec.n, spec.index_width);
        Ok(Self {
            column: spec.column.to_string(),
            sum_column: spec.sum_column.map(str::to_string),
            f1: flag(spec.op == CmpOp::Eq, rng)?,
            f2: flag(spec.op == CmpOp::Gt, rng)?,
            f3: flag(spec.op == CmpOp::Lt, rng)?,
            f4: flag(spec.write, rng)?,
            v: EncWord::encrypt_bits(enc, spec.value, rng)?,
            care: EncWord::encrypt_bits(enc, spec.care, rng)?,
            eta: if spec.encrypt_eta {
                Eta::Enc(EncWord::encrypt_bits(enc, &eta_plain.bits, rng)?)
            } else {
                Eta::Plain(eta_plain)
            },
            update: EncWord::encrypt_bits(enc, spec.update, rng)?,
        })
    }

    pub(crate) fn to_shadow(&self) -> Self {
        Self {
            column: self.column.clone(),
            sum_column: self.sum_column.clone(),
            f1: self.f1.to_shadow(),
            f2: self.f2.to_shadow(),
            f3: self.f3.to_shadow(),
            f4: self.f4.to_shadow(),
            v: self.v.to_shadow(),
            care: self.care.to_shadow(),
            eta: self.eta.to_shadow(),
            update: self.update.to_shadow(),
        }
    }

    pub fn to_repr(&self) -> DatagramRepr {
        DatagramRepr {
            column: self.column.clone(),
            sum_column: self.sum_column.clone(),
            flags: [&self.f1, &self.f2, &self.f3, &self.f4].map(Ciphertext::to_repr).to_vec(),
            criterion: self.v.to_repr(),
            care_mask: self.care.to_repr(),
            eta: match &self.eta {
                Eta::Enc(w) => EtaRepr::Enc(w.to_repr()),
                Eta::Plain(w) => EtaRepr::Plain(w.to_u64()),
            },
            eta_width: self.eta.width(),
            update_payload: self.update.to_repr(),
        }
    }

    pub fn from_repr(repr: &DatagramRepr, profile: ParamProfile) -> Result<Self> {
        if repr.flags.len() != 4 {
            return Err(Error::Format("datagram needs four flags".into()));
        }
        let f = |i: usize| Ciphertext::from_repr(&repr.flags[i], profile);
        Ok(Self {
            column: repr.column.clone(),
            sum_column: repr.sum_column.clone(),
            f1: f(0)?,
            f2: f(1)?,
            f3: f(2)?,
            f4: f(3)?,
            v: EncWord::from_repr(&repr.criterion, profile)?,
            care: EncWord::from_repr(&repr.care_mask, profile)?,
            eta: match &repr.eta {
                EtaRepr::Enc(w) => Eta::Enc(EncWord::from_repr(w, profile)?),
                EtaRepr::Plain(n) => Eta::Plain(PlainWord::from_u64(*n, repr.eta_width)),
            },
            update: EncWord::from_repr(&repr.update_payload, profile)?,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EtaRepr {
    Plain(u64),
    Enc(EncWordRepr),
}

/// JSON form: flags `[F1, F2, F3, F4]`, criterion, care mask, index and payload.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatagramRepr {
    pub column: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sum_column: Option<String>,
    pub flags: Vec<CiphertextRepr>,
    pub criterion: EncWordRepr,
    pub care_mask: EncWordRepr,
    pub eta: EtaRepr,
    pub eta_width: usize,
    pub update_payload: EncWordRepr,
}
