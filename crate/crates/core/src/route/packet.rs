use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::adapter::{AdapterBundle, StarTripleRepr};
use crate::circuits::{EncWord, EncWordRepr};
use crate::error::Result;
use crate::she::{KeyFile, ParamProfile, PublicKey};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PacketKind {
    #[serde(rename = "RR")]
    Rr,
    #[serde(rename = "RP")]
    Rp,
}

/// Route request or reply.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Packet {
    pub kind: PacketKind,
    pub source: usize,
    pub dest: usize,
    pub path: Vec<usize>,
    pub acc_trust: EncWord,
    pub adapter_bundle: AdapterBundle,
    /// Fingerprint of the source's public key.
    pub pk_ref: String,
}

#[derive(Serialize, Deserialize)]
struct PacketRepr {
    #[serde(rename = "type")]
    kind: PacketKind,
    source: usize,
    dest: usize,
    path: Vec<usize>,
    acc_trust: EncWordRepr,
    adapter_bundle: Vec<StarTripleRepr>,
    pk_ref: String,
}

impl Packet {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&PacketRepr {
            kind: self.kind,
            source: self.source,
            dest: self.dest,
            path: self.path.clone(),
            acc_trust: self.acc_trust.to_repr(),
            adapter_bundle: self.adapter_bundle.to_repr(),
            pk_ref: self.pk_ref.clone(),
        })?)
    }

    pub fn from_json(text: &str, profile: ParamProfile) -> Result<Self> {
        let r: PacketRepr = serde_json::from_str(text)?;
        Ok(Self {
            kind: r.kind,
            source: r.source,
            dest: r.dest,
            path: r.path,
            acc_trust: EncWord::from_repr(&r.acc_trust, profile)?,
            adapter_bundle: AdapterBundle::from_repr(&r.adapter_bundle, profile)?,
            pk_ref: r.pk_ref,
        })
    }
}

/// SHA-256 of the public key file, hex encoded.
pub fn pk_fingerprint(pk: &PublicKey) -> String {
    let json = KeyFile::from_public(pk).to_json();
    Sha256::digest(json.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}
