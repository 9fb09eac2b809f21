use serde::{Deserialize, Serialize};

use crate::circuits::{EncWord, EncWordRepr, PlainWord};
use crate::error::Result;
use crate::rng::DetRng;
use crate::she::{Encryptor, ParamProfile};

/// Search radius, public or encrypted.
#[derive(Clone, Debug)]
pub enum Radius {
    Plain(PlainWord),
    Enc(EncWord),
}

impl Radius {
    pub fn width(&self) -> usize {
        match self {
            Radius::Plain(w) => w.width(),
            Radius::Enc(w) => w.width(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct LbsRequest {
    pub pos_x: EncWord,
    pub pos_y: EncWord,
    pub category: EncWord,
    pub radius: Radius,
    /// Number of result slots.
    pub k: usize,
}

impl LbsRequest {
    /// Encrypts a plaintext query; the radius is encrypted when `hide_radius`.
    pub fn encrypt<E: Encryptor + ?Sized>(
        enc: &E,
        coord_bits: usize,
        cat_bits: usize,
        q: &blindgate_oracle::LbsQuery,
        hide_radius: bool,
        rng: &mut DetRng,
    ) -> Result<Self> {
        let dw = super::distance_bits(coord_bits);
        Ok(Self {
            pos_x: EncWord::encrypt(enc, q.x, coord_bits, rng)?,
            pos_y: EncWord::encrypt(enc, q.y, coord_bits, rng)?,
            category: EncWord::encrypt(enc, q.category, cat_bits, rng)?,
            radius: if hide_radius {
                Radius::Enc(EncWord::encrypt(enc, q.radius, dw, rng)?)
            } else {
                Radius::Plain(PlainWord::from_u64(q.radius, dw))
            },
            k: q.k,
        })
    }

    pub(crate) fn to_shadow(&self) -> Self {
        Self {
            pos_x: self.pos_x.to_shadow(),
            pos_y: self.pos_y.to_shadow(),
            category: self.category.to_shadow(),
            radius: match &self.radius {
                Radius::Plain(p) => Radius::Plain(p.clone()),
                Radius::Enc(w) => Radius::Enc(w.to_shadow()),
            },
            k: self.k,
        }
    }

    pub fn to_repr(&self) -> LbsRequestRepr {
        LbsRequestRepr {
            pos_x: self.pos_x.to_repr(),
            pos_y: self.pos_y.to_repr(),
            category: self.category.to_repr(),
            radius: match &self.radius {
                Radius::Plain(p) => RadiusRepr::Plain {
                    value: p.to_u64(),
                    width: p.width(),
                },
                Radius::Enc(w) => RadiusRepr::Enc(w.to_repr()),
            },
            k: self.k,
        }
    }

    pub fn from_repr(r: &LbsRequestRepr, profile: ParamProfile) -> Result<Self> {
        Ok(Self {
            pos_x: EncWord::from_repr(&r.pos_x, profile)?,
            pos_y: EncWord::from_repr(&r.pos_y, profile)?,
            category: EncWord::from_repr(&r.category, profile)?,
            radius: match &r.radius {
                RadiusRepr::Plain { value, width } => Radius::Plain(PlainWord::from_u64(*value, *width)),
                RadiusRepr::Enc(w) => Radius::Enc(EncWord::from_repr(w, profile)?),
            },
            k: r.k,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RadiusRepr {
    Plain { value: u64, width: usize },
    Enc(EncWordRepr),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LbsRequestRepr {
    pub pos_x: EncWordRepr,
    pub pos_y: EncWordRepr,
    pub category: EncWordRepr,
    pub radius: RadiusRepr,
    pub k: usize,
}

/// `k` masked target slots; zero where nothing qualified.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LbsResponse {
    pub targets: Vec<EncWord>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LbsResponseRepr {
    pub targets: Vec<EncWordRepr>,
}

impl LbsResponse {
    pub fn to_repr(&self) -> LbsResponseRepr {
        LbsResponseRepr {
            targets: self.targets.iter().map(EncWord::to_repr).collect(),
        }
    }

    pub fn from_repr(r: &LbsResponseRepr, profile: ParamProfile) -> Result<Self> {
        Ok(Self {
            targets: r
                .targets
                .iter()
                .map(|w| EncWord::from_repr(w, profile))
                .collect::<Result<Vec<_>>>()?,
        })
    }
}
