use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use std::ops::Range;
use thiserror::Error;

use crate::bits::bits_to_u64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnKind {
    Int,
    /// Fixed-width, 8 bits per character, zero padded.
    Text,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub width_bits: usize,
    #[serde(default = "default_kind")]
    pub kind: ColumnKind,
}

fn default_kind() -> ColumnKind {
    ColumnKind::Int
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SchemaError {
    #[error("column `{0}` has zero width")]
    ZeroWidth(String),
    #[error("duplicate column `{0}`")]
    Duplicate(String),
    #[error("text column `{0}` width is not a multiple of 8")]
    TextWidth(String),
    #[error("schema has no columns")]
    Empty,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableSchema {
    pub columns: Vec<Column>,
}

impl TableSchema {
    pub fn new(columns: Vec<Column>) -> Result<Self, SchemaError> {
        let s = Self { columns };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), SchemaError> {
        if self.columns.is_empty() {
            return Err(SchemaError::Empty);
        }
        let mut seen = HashSet::new();
        for c in &self.columns {
            if c.width_bits == 0 {
                return Err(SchemaError::ZeroWidth(c.name.clone()));
            }
            if c.kind == ColumnKind::Text && c.width_bits % 8 != 0 {
                return Err(SchemaError::TextWidth(c.name.clone()));
            }
            if !seen.insert(c.name.as_str()) {
                return Err(SchemaError::Duplicate(c.name.clone()));
            }
        }
        Ok(())
    }

    pub fn record_width(&self) -> usize {
        self.columns.iter().map(|c| c.width_bits).sum()
    }

    /// Bit range of a column inside a record.
    pub fn column_range(&self, name: &str) -> Option<Range<usize>> {
        let mut start = 0;
        for c in &self.columns {
            if c.name == name {
                return Some(start..start + c.width_bits);
            }
            start += c.width_bits;
        }
        None
    }

    pub fn column(&self, name: &str) -> Option<&Column> {
        self.columns.iter().find(|c| c.name == name)
    }
}

/// Rows are little-endian records: column 0 occupies the lowest bits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlainTable {
    pub schema: TableSchema,
    pub rows: Vec<Vec<bool>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CmpOp {
    Eq,
    Gt,
    Lt,
}

/// `WHERE column OP value`; for `Eq`, positions with `care = false` always match.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Predicate {
    pub column: String,
    pub op: CmpOp,
    pub value: Vec<bool>,
    pub care: Vec<bool>,
}

impl Predicate {
    pub fn eq(column: &str, value: Vec<bool>) -> Self {
        let care = vec![true; value.len()];
        Self {
            column: column.to_string(),
            op: CmpOp::Eq,
            value,
            care,
        }
    }

    pub fn matches(&self, field: &[bool]) -> bool {
        match self.op {
            CmpOp::Eq => field
                .iter()
                .zip(&self.value)
                .zip(&self.care)
                .all(|((f, v), c)| !c || f == v),
            CmpOp::Gt => bits_to_u64(field) > bits_to_u64(&self.value),
            CmpOp::Lt => bits_to_u64(field) < bits_to_u64(&self.value),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SqlOp {
    /// The `n`-th match (1-based).
    Select { n: usize },
    Update { payload: Vec<bool> },
    Delete,
    Count,
    Avg { target: String },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SqlOutcome {
    Record(Vec<bool>),
    Table(Vec<Vec<bool>>),
    Count(u64),
    Avg { sum: u64, count: u64 },
}

/// Direct iteration in row order.
///
/// # Panics
/// If a named column is absent from the schema.
pub fn oracle_sql(table: &PlainTable, op: &SqlOp, pred: &Predicate) -> SqlOutcome {
    let range = table
        .schema
        .column_range(&pred.column)
        .expect("predicate column exists");
    let hits: Vec<bool> = table.rows.iter().map(|r| pred.matches(&r[range.clone()])).collect();
    let width = table.schema.record_width();
    match op {
        SqlOp::Select { n } => {
            let row = table
                .rows
                .iter()
                .zip(&hits)
                .filter(|(_, &h)| h)
                .nth(n.wrapping_sub(1))
                .filter(|_| *n >= 1)
                .map(|(r, _)| r.clone());
            SqlOutcome::Record(row.unwrap_or_else(|| vec![false; width]))
        }
        SqlOp::Update { payload } => SqlOutcome::Table(
            table
                .rows
                .iter()
                .zip(&hits)
                .map(|(r, &h)| if h { payload.clone() } else { r.clone() })
                .collect(),
        ),
        SqlOp::Delete => SqlOutcome::Table(
            table
                .rows
                .iter()
                .zip(&hits)
                .map(|(r, &h)| if h { vec![false; width] } else { r.clone() })
                .collect(),
        ),
        SqlOp::Count => SqlOutcome::Count(hits.iter().filter(|&&h| h).count() as u64),
        SqlOp::Avg { target } => {
            let tr = table.schema.column_range(target).expect("target column exists");
            let sum = table
                .rows
                .iter()
                .zip(&hits)
                .filter(|(_, &h)| h)
                .map(|(r, _)| bits_to_u64(&r[tr.clone()]))
                .sum();
            SqlOutcome::Avg {
                sum,
                count: hits.iter().filter(|&&h| h).count() as u64,
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::u64_to_bits;

    fn table(keys: &[u64]) -> PlainTable {
        let schema = TableSchema::new(vec![
            Column {
                name: "k".into(),
                width_bits: 3,
                kind: ColumnKind::Int,
            },
            Column {
                name: "v".into(),
                width_bits: 4,
                kind: ColumnKind::Int,
            },
        ])
        .unwrap();
        let rows = keys
            .iter()
            .enumerate()
            .map(|(i, &k)| {
                let mut r = u64_to_bits(k, 3);
                r.extend(u64_to_bits(i as u64 + 1, 4));
                r
            })
            .collect();
        PlainTable { schema, rows }
    }

    #[test]
    fn select_second_duplicate() {
        let t = table(&[2, 2, 5]);
        let p = Predicate::eq("k", u64_to_bits(2, 3));
        assert_eq!(
            oracle_sql(&t, &SqlOp::Select { n: 2 }, &p),
            SqlOutcome::Record(t.rows[1].clone())
        );
        assert_eq!(
            oracle_sql(&t, &SqlOp::Select { n: 3 }, &p),
            SqlOutcome::Record(vec![false; 7])
        );
    }

    #[test]
    fn delete_without_match_is_identity() {
        let t = table(&[1, 2, 3]);
        let p = Predicate::eq("k", u64_to_bits(7, 3));
        assert_eq!(oracle_sql(&t, &SqlOp::Delete, &p), SqlOutcome::Table(t.rows.clone()));
    }

    #[test]
    fn avg_and_count() {
        let t = table(&[1, 4, 1]);
        let p = Predicate::eq("k", u64_to_bits(1, 3));
        assert_eq!(
            oracle_sql(&t, &SqlOp::Avg { target: "v".into() }, &p),
            SqlOutcome::Avg { sum: 4, count: 2 }
        );
        assert_eq!(oracle_sql(&t, &SqlOp::Count, &p), SqlOutcome::Count(2));
    }

    #[test]
    fn wildcard_and_order_predicates() {
        let mut p = Predicate::eq("k", u64_to_bits(0b100, 3));
        p.care = vec![false, false, true];
        assert!(p.matches(&u64_to_bits(0b111, 3)));
        assert!(!p.matches(&u64_to_bits(0b011, 3)));
        p.op = CmpOp::Gt;
        assert!(p.matches(&u64_to_bits(5, 3)));
        assert!(!p.matches(&u64_to_bits(4, 3)));
        p.op = CmpOp::Lt;
        assert!(p.matches(&u64_to_bits(3, 3)));
    }

    #[test]
    fn schema_validation() {
        let col = |n: &str, w| Column {
            name: n.into(),
            width_bits: w,
            kind: ColumnKind::Int,
        };
        assert_eq!(TableSchema::new(vec![]), Err(SchemaError::Empty));
        assert!(matches!(
            TableSchema::new(vec![col("a", 1), col("a", 2)]),
            Err(SchemaError::Duplicate(_))
        ));
        assert!(matches!(TableSchema::new(vec![col("a", 0)]), Err(SchemaError::ZeroWidth(_))));
        let s = TableSchema::new(vec![col("a", 3), col("b", 5)]).unwrap();
        assert_eq!(s.column_range("b"), Some(3..8));
        assert_eq!(s.record_width(), 8);
    }
}
