//! Plaintext reference semantics for every blind circuit and pipeline.
//!
//! Nothing here touches key material; encrypted engines are tested by
//! decrypting their outputs and comparing against these functions.

pub mod bits;
pub mod lbs;
pub mod route;
pub mod sql;
pub mod vod;

pub use bits::{bits_to_u64, u64_to_bits};
pub use lbs::{manhattan, oracle_lbs, oracle_lbs_nearest, Category, LbsQuery, PoiStore, Target};
pub use route::{oracle_route, Network, Node, RouteError};
pub use sql::{oracle_sql, CmpOp, Column, ColumnKind, PlainTable, Predicate, SchemaError, SqlOp, SqlOutcome, TableSchema};
pub use vod::{oracle_vod, Video, VideoStore};

/// Bubble sort by key with `N` full passes; a later element moves forward only
/// when strictly smaller, so equal keys keep their order.
pub fn oracle_sort<T: Clone>(items: &[T], key: impl Fn(&T) -> u64) -> Vec<T> {
    let mut v = items.to_vec();
    let n = v.len();
    for _ in 0..n {
        for i in 0..n.saturating_sub(1) {
            if key(&v[i + 1]) < key(&v[i]) {
                v.swap(i, i + 1);
            }
        }
    }
    v
}

/// Hamming weight.
pub fn popcount(bits: &[bool]) -> u64 {
    bits.iter().filter(|&&b| b).count() as u64
}

/// Star gate truth function.
pub fn star(s: bool, x: bool, y: bool) -> bool {
    (s & x & y) ^ (!s & (x ^ y))
}
