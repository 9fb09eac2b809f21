//! Trust-based route discovery over an in-process ad-hoc network. Trust is
//! accumulated under the source's public key; only the source can read it.

mod adapter;
mod packet;

pub use adapter::{adapt, evaluate_bundle, AdapterBundle, AdderShape, StarTriple, StarTripleRepr, TRUST_BITS};
pub use packet::{pk_fingerprint, Packet, PacketKind};

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use blindgate_oracle::{Network, Node};

use crate::circuits::{add_words, EncWord, PlainWord};
use crate::error::{Error, Result};
use crate::eval::Evaluator;
use crate::meter::OpCounter;
use crate::rng::DetRng;
use crate::she::{KeyPair, ParamProfile};

const TOPOLOGY_ATTEMPTS: u32 = 64;

/// Accumulator width for up to `max_hops` trust values of at most 10.
pub fn acc_bits(max_hops: usize) -> usize {
    let m = max_hops.max(1);
    4 + (usize::BITS - (m - 1).leading_zeros()) as usize
}

/// Random connected graph on `n` nodes with every degree in `1..=degree`
/// and per-direction trust drawn uniformly from `1..=10`.
pub fn build_topology(n: usize, degree: usize, seed: u64) -> Result<Network> {
    if n < 2 {
        return Err(Error::ShapeMismatch(format!("a network needs at least 2 nodes, got {n}")));
    }
    if degree == 0 {
        return Err(Error::ShapeMismatch("degree must be positive".into()));
    }
    let mut rng = DetRng::derive(seed, "topology");
    for _ in 0..TOPOLOGY_ATTEMPTS {
        let adj = random_adjacency(n, degree, &mut rng);
        if connected(&adj) {
            let nodes = adj
                .into_iter()
                .enumerate()
                .map(|(id, neighbors)| {
                    let trust: BTreeMap<usize, u8> = neighbors.iter().map(|&v| (v, rng.range(1, 10) as u8)).collect();
                    Node { id, neighbors, trust }
                })
                .collect();
            return Ok(Network { nodes });
        }
    }
    Err(Error::Disconnected(TOPOLOGY_ATTEMPTS))
}

fn random_adjacency(n: usize, degree: usize, rng: &mut DetRng) -> Vec<BTreeSet<usize>> {
    let mut adj = vec![BTreeSet::new(); n];
    // a random tree keeps most attempts connected; extra edges fill up to `degree`
    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        order.swap(i, rng.index(i + 1));
    }
    for i in 1..n {
        let open: Vec<usize> = order[..i].iter().copied().filter(|&u| adj[u].len() < degree).collect();
        if open.is_empty() {
            break;
        }
        let u = open[rng.index(open.len())];
        let v = order[i];
        adj[u].insert(v);
        adj[v].insert(u);
    }
    for _ in 0..n * degree {
        let (u, v) = (rng.index(n), rng.index(n));
        if u != v && adj[u].len() < degree && adj[v].len() < degree {
            adj[u].insert(v);
            adj[v].insert(u);
        }
    }
    adj
}

fn connected(adj: &[BTreeSet<usize>]) -> bool {
    let mut seen = vec![false; adj.len()];
    let mut queue = VecDeque::from([0]);
    seen[0] = true;
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                queue.push_back(v);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

/// `acc + trust` with a mixed plain/encrypted ripple adder, truncated to the
/// accumulator width.
pub fn hop_update(ev: &mut Evaluator, acc: &EncWord, trust: u8) -> Result<EncWord> {
    let w = acc.width();
    if !(1..=10).contains(&trust) {
        return Err(Error::Format(format!("trust {trust} is outside 1..=10")));
    }
    let t = PlainWord::from_u64(u64::from(trust), w);
    if !ev.is_ledger_only() {
        let mut twin = ev.ledger_twin();
        let out = add_words(&mut twin, &acc.to_shadow(), &t)?;
        check(ev.profile(), out.slice(0..w).max_noise())?;
    }
    Ok(add_words(ev, acc, &t)?.slice(0..w))
}

fn check(profile: &ParamProfile, noise: u32) -> Result<()> {
    if profile.decryptable(noise) {
        Ok(())
    } else {
        Err(Error::NoiseOverflow {
            noise_bits: noise,
            limit: profile.noise_limit(),
        })
    }
}

/// Everything observed during one discovery run.
#[derive(Clone, Debug)]
pub struct RouteTrace {
    /// Every packet in send order: RRs hop by hop, then the RP.
    pub packets: Vec<Packet>,
    /// Homomorphic work done by each forwarding node.
    pub hop_ops: Vec<OpCounter>,
}

/// Greedy most-trusted-neighbour discovery from `source` to `dest`.
///
/// The source owns `keys`; forwarding nodes see only the public key and the
/// packets. Each forwarder evaluates the received adapter bundle with its
/// local trust in the chosen neighbour and adapts the result for the next
/// hop. The destination returns the accumulated value in the RP.
pub fn discover_route(
    net: &Network,
    source: usize,
    dest: usize,
    keys: &KeyPair,
    max_hops: usize,
    rng: &mut DetRng,
) -> Result<RouteTrace> {
    let n = net.nodes.len();
    for id in [source, dest] {
        if id >= n {
            return Err(Error::NoRoute(id));
        }
    }
    if source == dest {
        return Err(Error::ShapeMismatch("source and destination coincide".into()));
    }
    let pk = &keys.pk;
    let shape = AdderShape {
        acc_bits: acc_bits(max_hops),
    };
    let pk_ref = pk_fingerprint(pk);
    let acc = EncWord::encrypt(pk, 0, shape.acc_bits, rng)?;
    let bundle = adapt(pk, &acc, &shape, rng)?;
    let mut rr = Packet {
        kind: PacketKind::Rr,
        source,
        dest,
        path: vec![source],
        acc_trust: acc,
        adapter_bundle: bundle,
        pk_ref,
    };
    let mut packets = Vec::new();
    let mut hop_ops = Vec::new();
    let mut visited = BTreeSet::from([source]);
    let mut at = source;
    while at != dest {
        if rr.path.len() > max_hops {
            return Err(Error::NoRoute(at));
        }
        let next = net.next_hop(at, dest, &visited).ok_or(Error::NoRoute(at))?;
        let mut ev = Evaluator::for_key(pk);
        let acc = evaluate_bundle(&mut ev, &rr.adapter_bundle, &rr.acc_trust, &shape, net.trust(at, next))?;
        hop_ops.push(ev.ops());
        let bundle = adapt(pk, &acc, &shape, rng)?;
        visited.insert(next);
        let mut path = rr.path.clone();
        path.push(next);
        packets.push(rr.clone());
        rr = Packet {
            path,
            acc_trust: acc,
            adapter_bundle: bundle,
            ..rr
        };
        at = next;
    }
    packets.push(rr.clone());
    packets.push(Packet {
        kind: PacketKind::Rp,
        adapter_bundle: AdapterBundle { triples: Vec::new() },
        ..rr
    });
    Ok(RouteTrace { packets, hop_ops })
}

impl RouteTrace {
    pub fn reply(&self) -> &Packet {
        self.packets.last().expect("a trace ends with the reply")
    }

    /// Path and decrypted total, as seen by the source.
    pub fn open(&self, keys: &KeyPair) -> Result<(Vec<usize>, u64)> {
        let rp = self.reply();
        Ok((rp.path.clone(), rp.acc_trust.decrypt(&keys.sk)?))
    }
}
