use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Target {
    pub x: u64,
    pub y: u64,
    pub payload: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Category {
    pub code: u64,
    pub targets: Vec<Target>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PoiStore {
    pub coord_bits: usize,
    pub cat_bits: usize,
    #[serde(default = "default_payload_bits")]
    pub payload_bits: usize,
    pub categories: Vec<Category>,
}

fn default_payload_bits() -> usize {
    8
}

impl PoiStore {
    /// Most targets in any category.
    pub fn max_targets(&self) -> usize {
        self.categories.iter().map(|c| c.targets.len()).max().unwrap_or(0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LbsQuery {
    pub x: u64,
    pub y: u64,
    pub category: u64,
    pub radius: u64,
    /// Number of result slots.
    pub k: usize,
}

pub fn manhattan(ax: u64, ay: u64, bx: u64, by: u64) -> u64 {
    ax.abs_diff(bx) + ay.abs_diff(by)
}

/// In-range targets of the requested category in store order, truncated or
/// zero-padded to `k` slots.
pub fn oracle_lbs(store: &PoiStore, q: &LbsQuery) -> Vec<Target> {
    let zero = Target {
        x: 0,
        y: 0,
        payload: 0,
    };
    let mut out: Vec<Target> = store
        .categories
        .iter()
        .filter(|c| c.code == q.category)
        .flat_map(|c| c.targets.iter())
        .filter(|t| manhattan(q.x, q.y, t.x, t.y) <= q.radius)
        .copied()
        .take(q.k)
        .collect();
    out.resize(q.k, zero);
    out
}

/// As [`oracle_lbs`] but ranked by distance, ties in store order.
pub fn oracle_lbs_nearest(store: &PoiStore, q: &LbsQuery) -> Vec<Target> {
    let zero = Target {
        x: 0,
        y: 0,
        payload: 0,
    };
    let mut hits: Vec<Target> = store
        .categories
        .iter()
        .filter(|c| c.code == q.category)
        .flat_map(|c| c.targets.iter())
        .filter(|t| manhattan(q.x, q.y, t.x, t.y) <= q.radius)
        .copied()
        .collect();
    hits.sort_by_key(|t| manhattan(q.x, q.y, t.x, t.y));
    hits.truncate(q.k);
    hits.resize(q.k, zero);
    hits
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radius_zero_selects_colocated_point() {
        let t = |x, y, payload| Target { x, y, payload };
        let store = PoiStore {
            coord_bits: 3,
            cat_bits: 2,
            payload_bits: 4,
            categories: vec![Category {
                code: 1,
                targets: vec![t(0, 0, 1), t(1, 1, 2), t(3, 3, 3)],
            }],
        };
        let q = |radius| LbsQuery {
            x: 1,
            y: 1,
            category: 1,
            radius,
            k: 3,
        };
        assert_eq!(oracle_lbs(&store, &q(0)), vec![t(1, 1, 2), t(0, 0, 0), t(0, 0, 0)]);
        assert_eq!(oracle_lbs(&store, &q(2)), vec![t(0, 0, 1), t(1, 1, 2), t(0, 0, 0)]);
        let mut other = q(8);
        other.category = 2;
        assert_eq!(oracle_lbs(&store, &other), vec![t(0, 0, 0); 3]);
    }
}
