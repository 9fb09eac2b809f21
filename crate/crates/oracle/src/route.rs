use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Node {
    pub id: usize,
    pub neighbors: BTreeSet<usize>,
    /// Trust this node places in each neighbour, in `1..=10`.
    pub trust: BTreeMap<usize, u8>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Network {
    pub nodes: Vec<Node>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RouteError {
    #[error("greedy walk stalled at node {0}")]
    NoRoute(usize),
    #[error("node {0} is not in the network")]
    UnknownNode(usize),
}

impl Network {
    /// Greedy next hop: the destination when adjacent, otherwise the most
    /// trusted unvisited neighbour (ties to the smaller id).
    pub fn next_hop(&self, at: usize, dest: usize, visited: &BTreeSet<usize>) -> Option<usize> {
        let node = &self.nodes[at];
        if node.neighbors.contains(&dest) {
            return Some(dest);
        }
        node.neighbors
            .iter()
            .filter(|v| !visited.contains(v))
            .max_by(|a, b| node.trust[a].cmp(&node.trust[b]).then(b.cmp(a)))
            .copied()
    }

    pub fn trust(&self, from: usize, to: usize) -> u8 {
        self.nodes[from].trust[&to]
    }
}

/// Path and trust sum of the greedy walk from `s` to `d`.
pub fn oracle_route(net: &Network, s: usize, d: usize) -> Result<(Vec<usize>, u64), RouteError> {
    for id in [s, d] {
        if id >= net.nodes.len() {
            return Err(RouteError::UnknownNode(id));
        }
    }
    let mut path = vec![s];
    let mut visited = BTreeSet::from([s]);
    let mut total = 0u64;
    let mut at = s;
    while at != d {
        let next = net.next_hop(at, d, &visited).ok_or(RouteError::NoRoute(at))?;
        total += u64::from(net.trust(at, next));
        visited.insert(next);
        path.push(next);
        at = next;
    }
    Ok((path, total))
}
