//! Location-based service over a plaintext point-of-interest store: the
//! client's position, category and radius stay encrypted end to end.

mod request;

pub use request::{LbsRequest, LbsRequestRepr, LbsResponse, LbsResponseRepr, Radius, RadiusRepr};

use blindgate_oracle::{u64_to_bits, PoiStore, Target};

use crate::circuits::{
    abs_diff, add_words, bits_for, blind_swap, eq_word, prefix_sums_width, sub_compare, EncWord, PlainWord,
    PrefixStrategy,
};
use crate::error::{Error, Result};
use crate::eval::Evaluator;
use crate::she::{Ciphertext, ParamProfile};

/// How in-range targets are chosen for the result slots.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum FilterMode {
    /// Ball membership plus prefix counts; results in store order.
    #[default]
    Coverage,
    /// Full bubble sort by distance, then the first `k` in-range entries.
    Sort,
}

/// Width of a distance word for `coord_bits`-bit coordinates.
pub fn distance_bits(coord_bits: usize) -> usize {
    coord_bits + 1
}

/// Width of an encoded target `x | y | payload`.
pub fn target_bits(store: &PoiStore) -> usize {
    2 * store.coord_bits + store.payload_bits
}

pub fn encode_target(store: &PoiStore, t: &Target) -> Vec<bool> {
    let mut bits = u64_to_bits(t.x, store.coord_bits);
    bits.extend(u64_to_bits(t.y, store.coord_bits));
    bits.extend(u64_to_bits(t.payload, store.payload_bits));
    bits
}

pub fn decode_target(store: &PoiStore, bits: &[bool]) -> Target {
    let c = store.coord_bits;
    Target {
        x: blindgate_oracle::bits_to_u64(&bits[..c]),
        y: blindgate_oracle::bits_to_u64(&bits[c..2 * c]),
        payload: blindgate_oracle::bits_to_u64(&bits[2 * c..]),
    }
}

/// Checks widths, value ranges and code uniqueness.
pub fn validate_store(store: &PoiStore) -> Result<()> {
    let fits = |v: u64, w: usize| w >= 64 || v >> w == 0;
    if store.coord_bits == 0 || store.cat_bits == 0 || store.payload_bits == 0 {
        return Err(Error::Format("store widths must be positive".into()));
    }
    let mut codes = std::collections::BTreeSet::new();
    for c in &store.categories {
        if !fits(c.code, store.cat_bits) {
            return Err(Error::Format(format!("category code {} exceeds {} bits", c.code, store.cat_bits)));
        }
        if !codes.insert(c.code) {
            return Err(Error::Format(format!("duplicate category code {}", c.code)));
        }
        for t in &c.targets {
            if !fits(t.x, store.coord_bits) || !fits(t.y, store.coord_bits) || !fits(t.payload, store.payload_bits) {
                return Err(Error::Format(format!("target {t:?} does not fit the store widths")));
            }
        }
    }
    Ok(())
}

/// `I_C[j] = [code_j = request]` for every category.
pub fn match_category(ev: &mut Evaluator, store: &PoiStore, category: &EncWord) -> Result<Vec<Ciphertext>> {
    if category.width() != store.cat_bits {
        return Err(Error::WidthMismatch {
            left: category.width(),
            right: store.cat_bits,
        });
    }
    let codes: Vec<PlainWord> = store
        .categories
        .iter()
        .map(|c| PlainWord::from_u64(c.code, store.cat_bits))
        .collect();
    ev.map_items(&codes, |ev, _, code| eq_word(ev, category, code))
}

/// `|bx − ax| + |by − ay|`, one bit wider than the coordinates.
pub fn manhattan(ev: &mut Evaluator, ax: &EncWord, ay: &EncWord, bx: &PlainWord, by: &PlainWord) -> Result<EncWord> {
    let w = ax.width();
    for other in [ay.width(), bx.width(), by.width()] {
        if other != w {
            return Err(Error::WidthMismatch { left: w, right: other });
        }
    }
    let dx = abs_diff(ev, bx, ax)?;
    let dy = abs_diff(ev, by, ay)?;
    add_words(ev, &dx, &dy)
}

/// Result of [`coverage_filter`].
#[derive(Clone, Debug)]
pub struct Coverage {
    /// `L[i] = [dist_i ≤ P]`.
    pub in_range: Vec<Ciphertext>,
    /// The `j`-th in-range target, or zeros.
    pub selected: Vec<EncWord>,
}

fn radius_ge(ev: &mut Evaluator, radius: &Radius, d: &EncWord) -> Result<Ciphertext> {
    match radius {
        Radius::Plain(p) => sub_compare(ev, p, d),
        Radius::Enc(p) => sub_compare(ev, p, d),
    }
}

/// Ball membership, prefix counts and slot selection over plaintext targets.
pub fn coverage_filter(
    ev: &mut Evaluator,
    dists: &[EncWord],
    targets: &[Vec<bool>],
    radius: &Radius,
    k: usize,
) -> Result<Coverage> {
    if dists.len() != targets.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} distances for {} targets",
            dists.len(),
            targets.len()
        )));
    }
    let tw = targets.first().map_or(0, Vec::len);
    if let Some(d) = dists.first() {
        if d.width() != radius.width() {
            return Err(Error::WidthMismatch {
                left: radius.width(),
                right: d.width(),
            });
        }
    }
    let in_range = ev.map_items(dists, |ev, _, d| radius_ge(ev, radius, d))?;
    let profile = *ev.profile();
    let sw = bits_for(dists.len() as u64);
    let sums = prefix_sums_width(ev, &in_range, PrefixStrategy::Esp, sw)?;
    let mut selected = Vec::with_capacity(k);
    for slot in 1..=k {
        if slot > dists.len() {
            selected.push(EncWord::zeros(profile, tw.max(1)));
            continue;
        }
        let want = PlainWord::from_u64(slot as u64, sw);
        let items: Vec<(&Ciphertext, (&EncWord, &Vec<bool>))> =
            in_range.iter().zip(sums.iter().zip(targets)).collect();
        let parts = ev.map_items(&items, |ev, _, (l, (s, t))| {
            let hit = eq_word(ev, *s, &want)?;
            let l2 = ev.mul(l, &hit)?;
            t.iter().map(|&b| ev.mixed_mul(b, &l2)).collect::<Result<Vec<_>>>()
        })?;
        selected.push(fold_xor(ev, parts, tw, profile)?);
    }
    Ok(Coverage { in_range, selected })
}

fn fold_xor(ev: &mut Evaluator, parts: Vec<Vec<Ciphertext>>, width: usize, profile: ParamProfile) -> Result<EncWord> {
    let mut acc = vec![Ciphertext::literal_zero(profile); width.max(1)];
    let mut first = true;
    for p in parts {
        if first {
            acc = p;
            first = false;
            continue;
        }
        for (a, b) in acc.iter_mut().zip(&p) {
            *a = ev.add(a, b)?;
        }
    }
    Ok(EncWord::from_bits(acc))
}

/// Re-encryption hook used between sorting passes.
pub type Refresh<'a> = dyn FnMut(&EncWord) -> Result<EncWord> + 'a;

/// A sortable `(distance, payload)` pair.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SortItem {
    pub dist: EncWord,
    pub payload: EncWord,
}

fn sort_pass(ev: &mut Evaluator, items: &mut [EncWord], dw: usize) -> Result<()> {
    for i in 0..items.len().saturating_sub(1) {
        let keep = sub_compare(ev, &items[i + 1].slice(0..dw), &items[i].slice(0..dw))?;
        let (a, b) = blind_swap(ev, &keep, &items[i], &items[i + 1])?;
        items[i] = a;
        items[i + 1] = b;
    }
    Ok(())
}

fn pack(items: &[SortItem]) -> Result<(Vec<EncWord>, usize)> {
    let first = items.first().ok_or_else(|| Error::ShapeMismatch("nothing to sort".into()))?;
    let (dw, pw) = (first.dist.width(), first.payload.width());
    let packed = items
        .iter()
        .map(|it| {
            if it.dist.width() != dw || it.payload.width() != pw {
                return Err(Error::WidthMismatch {
                    left: it.dist.width() + it.payload.width(),
                    right: dw + pw,
                });
            }
            Ok(it.dist.concat(&it.payload))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((packed, dw))
}

fn unpack(words: Vec<EncWord>, dw: usize) -> Vec<SortItem> {
    words
        .into_iter()
        .map(|w| SortItem {
            dist: w.slice(0..dw),
            payload: w.slice(dw..w.width()),
        })
        .collect()
}

fn check_noise(profile: &ParamProfile, noise: u32) -> Result<()> {
    if profile.decryptable(noise) {
        Ok(())
    } else {
        Err(Error::NoiseOverflow {
            noise_bits: noise,
            limit: profile.noise_limit(),
        })
    }
}

/// `N` full passes of adjacent compare-and-swap, ascending by distance.
///
/// The swap fires only when the later distance is strictly smaller, so equal
/// distances keep their order. The whole sort is checked against the ledger
/// before any gate runs; ledger-only evaluators skip the refusal.
pub fn blind_sort(ev: &mut Evaluator, items: &[SortItem]) -> Result<Vec<SortItem>> {
    let (mut words, dw) = pack(items)?;
    let mut twin = ev.ledger_twin();
    let mut shadow: Vec<EncWord> = words.iter().map(EncWord::to_shadow).collect();
    for _ in 0..shadow.len() {
        sort_pass(&mut twin, &mut shadow, dw)?;
    }
    if !ev.is_ledger_only() {
        check_noise(ev.profile(), shadow.iter().map(EncWord::max_noise).max().unwrap_or(0))?;
    }
    for _ in 0..words.len() {
        sort_pass(ev, &mut words, dw)?;
    }
    Ok(unpack(words, dw))
}

/// [`blind_sort`] with `refresh` applied to both outputs of every
/// compare-and-swap, for deployments with a trusted re-encryption service.
/// Each step is checked against the ledger on its own; the gate sequence is
/// the same as the unrefreshed sort.
pub fn blind_sort_refreshed(
    ev: &mut Evaluator,
    items: &[SortItem],
    refresh: &mut Refresh<'_>,
) -> Result<Vec<SortItem>> {
    let (mut words, dw) = pack(items)?;
    let n = words.len();
    for _ in 0..n {
        for i in 0..n.saturating_sub(1) {
            let mut pair = [words[i].clone(), words[i + 1].clone()];
            if !ev.is_ledger_only() {
                let mut twin = ev.ledger_twin();
                let mut shadow = pair.clone().map(|w| w.to_shadow());
                sort_pass(&mut twin, &mut shadow, dw)?;
                check_noise(ev.profile(), shadow.iter().map(EncWord::max_noise).max().unwrap_or(0))?;
            }
            sort_pass(ev, &mut pair, dw)?;
            let [a, b] = pair;
            words[i] = refresh(&a)?;
            words[i + 1] = refresh(&b)?;
        }
    }
    Ok(unpack(words, dw))
}

/// Intermediate values of one [`respond`] run, for noise probing.
#[derive(Clone, Debug)]
pub struct Stages {
    pub category: Vec<Ciphertext>,
    pub distances: Vec<Vec<EncWord>>,
    pub in_range: Vec<Vec<Ciphertext>>,
    pub slots: Vec<Vec<EncWord>>,
}

fn check_request(store: &PoiStore, req: &LbsRequest) -> Result<()> {
    let c = store.coord_bits;
    for w in [req.pos_x.width(), req.pos_y.width()] {
        if w != c {
            return Err(Error::WidthMismatch { left: w, right: c });
        }
    }
    if req.category.width() != store.cat_bits {
        return Err(Error::WidthMismatch {
            left: req.category.width(),
            right: store.cat_bits,
        });
    }
    if req.radius.width() != distance_bits(c) {
        return Err(Error::WidthMismatch {
            left: req.radius.width(),
            right: distance_bits(c),
        });
    }
    Ok(())
}

fn category_slots(
    ev: &mut Evaluator,
    store: &PoiStore,
    req: &LbsRequest,
    targets: &[Target],
    dists: &[EncWord],
    mode: FilterMode,
    refresh: Option<&mut Refresh<'_>>,
) -> Result<(Vec<Ciphertext>, Vec<EncWord>)> {
    if targets.is_empty() {
        // nothing to filter, and the slot width cannot come from a target
        let zero = EncWord::zeros(*ev.profile(), target_bits(store));
        return Ok((Vec::new(), vec![zero; req.k]));
    }
    let encoded: Vec<Vec<bool>> = targets.iter().map(|t| encode_target(store, t)).collect();
    match mode {
        FilterMode::Coverage => {
            let cov = coverage_filter(ev, dists, &encoded, &req.radius, req.k)?;
            Ok((cov.in_range, cov.selected))
        }
        FilterMode::Sort => {
            let profile = *ev.profile();
            let items: Vec<SortItem> = dists
                .iter()
                .zip(&encoded)
                .map(|(d, t)| SortItem {
                    dist: d.clone(),
                    payload: EncWord::literal(profile, t),
                })
                .collect();
            let sorted = match refresh {
                Some(r) => blind_sort_refreshed(ev, &items, r)?,
                None => blind_sort(ev, &items)?,
            };
            let in_range = sorted
                .iter()
                .map(|it| radius_ge(ev, &req.radius, &it.dist))
                .collect::<Result<Vec<_>>>()?;
            let tw = target_bits(store);
            let mut slots = Vec::with_capacity(req.k);
            for j in 0..req.k {
                match sorted.get(j) {
                    Some(it) => {
                        let bits = it
                            .payload
                            .bits()
                            .iter()
                            .map(|b| ev.mul(&in_range[j], b))
                            .collect::<Result<Vec<_>>>()?;
                        slots.push(EncWord::from_bits(bits));
                    }
                    None => slots.push(EncWord::zeros(profile, tw)),
                }
            }
            Ok((in_range, slots))
        }
    }
}

fn respond_core(
    ev: &mut Evaluator,
    store: &PoiStore,
    req: &LbsRequest,
    mode: FilterMode,
    mut refresh: Option<&mut Refresh<'_>>,
) -> Result<(LbsResponse, Stages)> {
    let profile = *ev.profile();
    let tw = target_bits(store);
    let category = match_category(ev, store, &req.category)?;
    let mut stages = Stages {
        category: category.clone(),
        distances: Vec::new(),
        in_range: Vec::new(),
        slots: Vec::new(),
    };
    let mut out: Vec<EncWord> = vec![EncWord::zeros(profile, tw); req.k];
    for (cat, ic) in store.categories.iter().zip(&category) {
        let coords: Vec<(PlainWord, PlainWord)> = cat
            .targets
            .iter()
            .map(|t| {
                (
                    PlainWord::from_u64(t.x, store.coord_bits),
                    PlainWord::from_u64(t.y, store.coord_bits),
                )
            })
            .collect();
        let dists = ev.map_items(&coords, |ev, _, (bx, by)| manhattan(ev, &req.pos_x, &req.pos_y, bx, by))?;
        let (in_range, slots) = category_slots(ev, store, req, &cat.targets, &dists, mode, refresh.as_deref_mut())?;
        for (acc, slot) in out.iter_mut().zip(&slots) {
            let bits = acc
                .bits()
                .iter()
                .zip(slot.bits())
                .map(|(a, s)| {
                    let masked = ev.mul(ic, s)?;
                    ev.add(a, &masked)
                })
                .collect::<Result<Vec<_>>>()?;
            *acc = EncWord::from_bits(bits);
        }
        stages.distances.push(dists);
        stages.in_range.push(in_range);
        stages.slots.push(slots);
    }
    Ok((LbsResponse { targets: out }, stages))
}

/// Category match, distances, filtering, then `R″ = I_C·R′` folded across
/// categories. Checked against the ledger before any gate runs.
pub fn respond(ev: &mut Evaluator, store: &PoiStore, req: &LbsRequest) -> Result<LbsResponse> {
    respond_with(ev, store, req, FilterMode::Coverage).map(|(r, _)| r)
}

/// [`respond`] with an explicit filter, also returning every stage.
pub fn respond_with(
    ev: &mut Evaluator,
    store: &PoiStore,
    req: &LbsRequest,
    mode: FilterMode,
) -> Result<(LbsResponse, Stages)> {
    validate_store(store)?;
    check_request(store, req)?;
    if !ev.is_ledger_only() {
        check_noise(ev.profile(), predict_noise(ev, store, req, mode)?)?;
    }
    respond_core(ev, store, req, mode, None)
}

/// Sort-mode [`respond`] with a trusted per-pass refresh. Each sorting pass
/// is checked on its own and the final slots are checked before returning.
pub fn respond_sorted_refreshed(
    ev: &mut Evaluator,
    store: &PoiStore,
    req: &LbsRequest,
    refresh: &mut Refresh<'_>,
) -> Result<(LbsResponse, Stages)> {
    validate_store(store)?;
    check_request(store, req)?;
    let (resp, stages) = respond_core(ev, store, req, FilterMode::Sort, Some(refresh))?;
    if !ev.is_ledger_only() {
        check_noise(ev.profile(), resp.targets.iter().map(EncWord::max_noise).max().unwrap_or(0))?;
    }
    Ok((resp, stages))
}

/// Peak ledger noise of a response, computed on shadows.
pub fn predict_noise(ev: &Evaluator, store: &PoiStore, req: &LbsRequest, mode: FilterMode) -> Result<u32> {
    let mut twin = ev.ledger_twin();
    let shadow = req.to_shadow();
    let (resp, _) = respond_core(&mut twin, store, &shadow, mode, None)?;
    Ok(resp.targets.iter().map(EncWord::max_noise).max().unwrap_or(0))
}

/// Largest number of targets in a single category that a fresh request can
/// be answered over without overflowing, searched up to `limit`.
pub fn supported_targets(profile: ParamProfile, coord_bits: usize, k: usize, limit: usize) -> Result<usize> {
    let fresh = profile.fresh_noise_bits();
    let mut best = 0;
    for n in 1..=limit {
        let store = PoiStore {
            coord_bits,
            cat_bits: 1,
            payload_bits: 1,
            categories: vec![blindgate_oracle::Category {
                code: 0,
                targets: vec![Target { x: 0, y: 0, payload: 1 }; n],
            }],
        };
        let req = LbsRequest {
            pos_x: EncWord::shadow(profile, coord_bits, fresh),
            pos_y: EncWord::shadow(profile, coord_bits, fresh),
            category: EncWord::shadow(profile, 1, fresh),
            radius: Radius::Enc(EncWord::shadow(profile, distance_bits(coord_bits), fresh)),
            k,
        };
        let ev = Evaluator::ledger_only(profile);
        if profile.decryptable(predict_noise(&ev, &store, &req, FilterMode::Coverage)?) {
            best = n;
        } else {
            break;
        }
    }
    Ok(best)
}

/// Ledger noise of a single category match, for `cat_bits`-bit codes.
pub fn category_noise(profile: ParamProfile, cat_bits: usize) -> Result<u32> {
    let mut ev = Evaluator::ledger_only(profile);
    let w = EncWord::shadow(profile, cat_bits, profile.fresh_noise_bits());
    let c = eq_word(&mut ev, &w, &PlainWord::from_u64(0, cat_bits))?;
    Ok(c.noise_bits())
}
