//! Blind video retrieval: the provider selects a stream for an encrypted
//! 10-bit id by touching every stored video, and never learns which one was
//! asked for.

use std::collections::BTreeSet;
use std::io::{BufRead, Write};
use std::path::Path;

use rand::RngCore;
use serde::{Deserialize, Serialize};

use blindgate_oracle::{Video, VideoStore};

use crate::circuits::{eq_word, EncWord, PlainWord};
use crate::error::{Error, Result};
use crate::eval::Evaluator;
use crate::rng::DetRng;
use crate::she::{from_hex, Ciphertext, Encryptor, ParamProfile};

/// Width of a video id.
pub const ID_BITS: usize = 10;

/// Baseline bandwidth of the reference stream, in MB/s.
pub const REFERENCE_BW: f64 = 2.5;

/// Size of the reference video, in MB.
pub const REFERENCE_MB: f64 = 100.0;

/// `count` pseudo-random videos of `size` bytes with ids `0..count`.
pub fn pseudo_store(count: usize, size: usize, seed: u64) -> Result<VideoStore> {
    if count > 1 << ID_BITS {
        return Err(Error::Format(format!("{count} videos do not fit {ID_BITS}-bit ids")));
    }
    let mut rng = DetRng::derive(seed, "videos");
    let videos = (0..count)
        .map(|id| {
            let mut bytes = vec![0u8; size];
            rng.fill_bytes(&mut bytes);
            Video { id: id as u16, bytes }
        })
        .collect();
    Ok(VideoStore { videos })
}

fn validate(store: &VideoStore) -> Result<()> {
    let mut seen = BTreeSet::new();
    for v in &store.videos {
        if usize::from(v.id) >= 1 << ID_BITS {
            return Err(Error::Format(format!("video id {} does not fit {ID_BITS} bits", v.id)));
        }
        if !seen.insert(v.id) {
            return Err(Error::Format(format!("duplicate video id {}", v.id)));
        }
    }
    Ok(())
}

fn stream_bits(bytes: &[u8], len: usize) -> impl Iterator<Item = bool> + '_ {
    (0..len * 8).map(move |j| bytes.get(j / 8).is_some_and(|b| (b >> (j % 8)) & 1 == 1))
}

fn select(ev: &mut Evaluator, store: &VideoStore, enc_id: &EncWord) -> Result<Vec<Ciphertext>> {
    let ids: Vec<PlainWord> = store
        .videos
        .iter()
        .map(|v| PlainWord::from_u64(u64::from(v.id), ID_BITS))
        .collect();
    let hits = ev.map_items(&ids, |ev, _, id| eq_word(ev, enc_id, id))?;
    let len = store.stream_len();
    let profile = *ev.profile();
    let mut out = vec![Ciphertext::literal_zero(profile); len * 8];
    for (v, hit) in store.videos.iter().zip(&hits) {
        for (acc, bit) in out.iter_mut().zip(stream_bits(&v.bytes, len)) {
            let term = ev.mixed_mul(bit, hit)?;
            *acc = ev.add(acc, &term)?;
        }
    }
    Ok(out)
}

/// `Σ_v I_v · V`, one ciphertext per stream bit (LSB first within each
/// byte), where `I_v` is the blind equality of `enc_id` with video `v`'s id.
/// Shorter videos are zero padded to the longest. An absent id yields an
/// all-zero stream.
pub fn request_video(ev: &mut Evaluator, store: &VideoStore, enc_id: &EncWord) -> Result<Vec<Ciphertext>> {
    if enc_id.width() != ID_BITS {
        return Err(Error::WidthMismatch {
            left: enc_id.width(),
            right: ID_BITS,
        });
    }
    validate(store)?;
    if !ev.is_ledger_only() {
        let mut twin = ev.ledger_twin();
        let out = select(&mut twin, store, &enc_id.to_shadow())?;
        let noise = out.iter().map(Ciphertext::noise_bits).max().unwrap_or(0);
        if !ev.profile().decryptable(noise) {
            return Err(Error::NoiseOverflow {
                noise_bits: noise,
                limit: ev.profile().noise_limit(),
            });
        }
    }
    select(ev, store, enc_id)
}

/// Decrypted stream bits packed back into bytes.
pub fn decrypt_stream(sk: &crate::she::SecretKey, stream: &[Ciphertext]) -> Result<Vec<u8>> {
    if stream.len() % 8 != 0 {
        return Err(Error::Format(format!("stream of {} bits is not whole bytes", stream.len())));
    }
    stream
        .chunks(8)
        .map(|byte| {
            byte.iter()
                .enumerate()
                .try_fold(0u8, |acc, (i, c)| Ok(acc | u8::from(sk.decrypt(c)?) << i))
        })
        .collect()
}

/// Writes the stream as its bit count on the first line, then one
/// `<hex> <noise_bits>` line per ciphertext.
pub fn write_stream<W: Write>(mut w: W, stream: &[Ciphertext]) -> Result<()> {
    writeln!(w, "{}", stream.len())?;
    for c in stream {
        writeln!(w, "{} {}", c.to_hex(), c.noise_bits())?;
    }
    Ok(())
}

pub fn read_stream<R: BufRead>(r: R, profile: ParamProfile) -> Result<Vec<Ciphertext>> {
    let mut lines = r.lines();
    let head = lines.next().ok_or_else(|| Error::Format("empty stream".into()))??;
    let n: usize = head
        .trim()
        .parse()
        .map_err(|_| Error::Format(format!("bad stream length `{head}`")))?;
    let mut out = Vec::with_capacity(n);
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let (hex, noise) = line
            .split_once(' ')
            .ok_or_else(|| Error::Format(format!("bad stream line `{line}`")))?;
        let noise = noise
            .trim()
            .parse()
            .map_err(|_| Error::Format(format!("bad noise field `{noise}`")))?;
        out.push(Ciphertext::new(from_hex(hex)?, noise, profile));
    }
    if out.len() != n {
        return Err(Error::Format(format!("stream announces {n} ciphertexts but holds {}", out.len())));
    }
    Ok(out)
}

#[derive(Serialize, Deserialize)]
struct ManifestEntry {
    id: u16,
    file: String,
    bytes: usize,
}

#[derive(Serialize, Deserialize)]
struct Manifest {
    videos: Vec<ManifestEntry>,
}

/// One `<id>.bin` per video plus `manifest.json`.
pub fn write_store(dir: &Path, store: &VideoStore) -> Result<()> {
    validate(store)?;
    std::fs::create_dir_all(dir)?;
    let mut videos = Vec::new();
    for v in &store.videos {
        let file = format!("{}.bin", v.id);
        std::fs::write(dir.join(&file), &v.bytes)?;
        videos.push(ManifestEntry {
            id: v.id,
            file,
            bytes: v.bytes.len(),
        });
    }
    let manifest = serde_json::to_string_pretty(&Manifest { videos })?;
    std::fs::write(dir.join("manifest.json"), manifest)?;
    Ok(())
}

pub fn read_store(dir: &Path) -> Result<VideoStore> {
    let manifest: Manifest = serde_json::from_slice(&std::fs::read(dir.join("manifest.json"))?)?;
    let mut videos = Vec::with_capacity(manifest.videos.len());
    for e in manifest.videos {
        let bytes = std::fs::read(dir.join(&e.file))?;
        if bytes.len() != e.bytes {
            return Err(Error::Format(format!(
                "{} holds {} bytes, the manifest says {}",
                e.file,
                bytes.len(),
                e.bytes
            )));
        }
        videos.push(Video { id: e.id, bytes });
    }
    let store = VideoStore { videos };
    validate(&store)?;
    Ok(store)
}

/// Encrypted stream size and bandwidth for one security level.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StreamEstimate {
    pub lambda: u32,
    pub original_mb: f64,
    pub encrypted_mb: f64,
    pub original_bw: f64,
    pub required_bw: f64,
}

impl StreamEstimate {
    /// Size and bandwidth in whole megabytes, rounded down.
    pub fn whole(&self) -> (u64, u64) {
        (self.encrypted_mb.floor() as u64, self.required_bw.floor() as u64)
    }
}

/// Every bit becomes a ciphertext of about `λ⁴` bits, so size and bandwidth
/// both scale by `λ⁴`.
pub fn estimate_stream(original_mb: f64, original_bw: f64, lambda: u32) -> StreamEstimate {
    let f = f64::from(lambda).powi(4);
    StreamEstimate {
        lambda,
        original_mb,
        encrypted_mb: original_mb * f,
        original_bw,
        required_bw: original_bw * f,
    }
}

/// Cache size in MB for `length_s` seconds at `bandwidth_bits_per_s`.
pub fn estimate_cache(length_s: f64, bandwidth_bits_per_s: f64) -> f64 {
    length_s * bandwidth_bits_per_s / (8.0 * 1024.0 * 1024.0)
}

/// Mean bit length of `samples` fresh encryptions, i.e. the ciphertext
/// expansion per plaintext bit.
pub fn measured_expansion<E: Encryptor + ?Sized>(enc: &E, samples: usize, rng: &mut DetRng) -> Result<f64> {
    let mut total = 0u64;
    for _ in 0..samples {
        let m = rng.bit();
        total += enc.encrypt_bit(m, rng)?.bit_len();
    }
    Ok(total as f64 / samples.max(1) as f64)
}
