//! Blind SQL over encrypted tables: per-operation circuits and a single
//! flag-driven generic circuit.

mod datagram;
mod table;

pub use datagram::{Datagram, DatagramRepr, DatagramSpec, EtaRepr};
pub use table::{decode_record, encode_field, parse_schema, read_csv, EncTable};

use std::ops::Range;

use crate::circuits::{
    blind_mux, bits_for, eq_word, eq_word_masked, gt_compare, lt_compare, popcount_esp_width,
    prefix_sums_width, weighted_sum_esp, EncWord, PlainWord, PrefixStrategy,
};
use crate::error::{Error, Result};
use crate::eval::Evaluator;
use crate::meter::OpCounter;
use crate::circuits::same_width_pub as same_width;
use crate::she::Ciphertext;

/// Match index `n`, public or encrypted.
#[derive(Clone, Debug)]
pub enum Eta {
    Plain(PlainWord),
    Enc(EncWord),
}

impl Eta {
    pub fn width(&self) -> usize {
        match self {
            Eta::Plain(w) => w.width(),
            Eta::Enc(w) => w.width(),
        }
    }

    fn to_shadow(&self) -> Self {
        match self {
            Eta::Plain(w) => Eta::Plain(w.clone()),
            Eta::Enc(w) => Eta::Enc(w.to_shadow()),
        }
    }

    fn matches(&self, ev: &mut Evaluator, s: &EncWord) -> Result<Ciphertext> {
        match self {
            Eta::Plain(w) => eq_word(ev, s, w),
            Eta::Enc(w) => eq_word(ev, s, w),
        }
    }
}

/// Width of the match index for a table of `rows` rows.
pub fn index_width(rows: usize) -> usize {
    bits_for(rows as u64)
}

#[derive(Clone, Debug)]
pub struct QueryResult {
    /// Folded result record; all zeros when nothing matched.
    pub record: EncWord,
    pub count: EncWord,
    pub sum: Option<EncWord>,
}

fn column(table: &EncTable, name: &str) -> Result<Range<usize>> {
    table
        .schema
        .column_range(name)
        .ok_or_else(|| Error::UnknownColumn(name.to_string()))
}

fn field(row: &EncWord, r: &Range<usize>) -> EncWord {
    row.slice(r.clone())
}

fn require_rows(table: &EncTable) -> Result<()> {
    if table.rows.is_empty() {
        return Err(Error::Format("table has no rows".into()));
    }
    Ok(())
}

/// Runs `f` in ledger-only mode on shadow inputs and refuses if any output
/// would be undecryptable. Ledger-only evaluators never refuse.
fn predict<T>(ev: &Evaluator, f: impl FnOnce(&mut Evaluator) -> Result<T>, noise: impl Fn(&T) -> u32) -> Result<()> {
    if ev.is_ledger_only() {
        return Ok(());
    }
    let mut twin = ev.ledger_twin();
    let out = f(&mut twin)?;
    let n = noise(&out);
    let profile = ev.profile();
    if profile.decryptable(n) {
        Ok(())
    } else {
        Err(Error::NoiseOverflow {
            noise_bits: n,
            limit: profile.noise_limit(),
        })
    }
}

fn indicators(ev: &mut Evaluator, table: &EncTable, r: &Range<usize>, v: &EncWord) -> Result<Vec<Ciphertext>> {
    ev.map_items(&table.rows, |ev, _, row| eq_word(ev, &field(row, r), v))
}

/// `Σ_R I′_R·R` where `I′_R = I_R·[S_R = η]`.
fn fold_selected(
    ev: &mut Evaluator,
    table: &EncTable,
    ind: &[Ciphertext],
    eta: &Eta,
) -> Result<(EncWord, EncWord)> {
    let iw = eta.width();
    let sums = prefix_sums_width(ev, ind, PrefixStrategy::Esp, iw)?;
    let pairs: Vec<(&EncWord, (&Ciphertext, &EncWord))> = table.rows.iter().zip(ind.iter().zip(&sums)).collect();
    let masked = ev.map_items(&pairs, |ev, _, (row, (i, s))| {
        let hit = eta.matches(ev, s)?;
        let sel = ev.mul(i, &hit)?;
        let bits = row
            .bits()
            .iter()
            .map(|b| ev.mul(&sel, b))
            .collect::<Result<Vec<_>>>()?;
        Ok(EncWord::from_bits(bits))
    })?;
    let record = fold_xor(ev, masked)?;
    let count = sums.last().expect("non-empty table").clone();
    Ok((record, count))
}

fn fold_xor(ev: &mut Evaluator, words: Vec<EncWord>) -> Result<EncWord> {
    let mut it = words.into_iter();
    let mut acc = it.next().expect("at least one word").into_bits();
    for w in it {
        for (a, b) in acc.iter_mut().zip(w.bits()) {
            *a = ev.add(a, b)?;
        }
    }
    Ok(EncWord::from_bits(acc))
}

fn check_eta(table: &EncTable, eta: &Eta) -> Result<()> {
    let want = index_width(table.rows.len());
    if eta.width() != want {
        return Err(Error::WidthMismatch {
            left: eta.width(),
            right: want,
        });
    }
    Ok(())
}

fn select_core(ev: &mut Evaluator, table: &EncTable, r: &Range<usize>, v: &EncWord, eta: &Eta) -> Result<QueryResult> {
    let ind = indicators(ev, table, r, v)?;
    let (record, count) = fold_selected(ev, table, &ind, eta)?;
    Ok(QueryResult {
        record,
        count,
        sum: None,
    })
}

/// The `n`-th record whose `column` equals `v`, or all zeros.
pub fn select_nth(ev: &mut Evaluator, table: &EncTable, column_name: &str, v: &EncWord, eta: &Eta) -> Result<QueryResult> {
    require_rows(table)?;
    let r = column(table, column_name)?;
    same_width(r.len(), v.width())?;
    check_eta(table, eta)?;
    let (st, sv, se) = (table.to_shadow(), v.to_shadow(), eta.to_shadow());
    predict(ev, |tw| select_core(tw, &st, &r, &sv, &se), |q| q.record.max_noise().max(q.count.max_noise()))?;
    select_core(ev, table, &r, v, eta)
}

fn update_core(ev: &mut Evaluator, table: &EncTable, r: &Range<usize>, v: &EncWord, u: &EncWord) -> Result<EncTable> {
    let rows = ev.map_items(&table.rows, |ev, _, row| {
        let i = eq_word(ev, &field(row, r), v)?;
        let ni = ev.not(&i)?;
        let bits = row
            .bits()
            .iter()
            .zip(u.bits())
            .map(|(x, y)| {
                let keep = ev.mul(&ni, x)?;
                let put = ev.mul(&i, y)?;
                ev.add(&keep, &put)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(EncWord::from_bits(bits))
    })?;
    Ok(EncTable {
        schema: table.schema.clone(),
        rows,
    })
}

/// `R′ = Ī_R·R + I_R·U` on every row.
pub fn update_where(ev: &mut Evaluator, table: &EncTable, column_name: &str, v: &EncWord, u: &EncWord) -> Result<EncTable> {
    require_rows(table)?;
    let r = column(table, column_name)?;
    same_width(r.len(), v.width())?;
    same_width(table.schema.record_width(), u.width())?;
    let (st, sv, su) = (table.to_shadow(), v.to_shadow(), u.to_shadow());
    predict(ev, |tw| update_core(tw, &st, &r, &sv, &su), EncTable::max_noise)?;
    update_core(ev, table, &r, v, u)
}

fn delete_core(ev: &mut Evaluator, table: &EncTable, r: &Range<usize>, v: &EncWord) -> Result<EncTable> {
    let rows = ev.map_items(&table.rows, |ev, _, row| {
        let i = eq_word(ev, &field(row, r), v)?;
        let ni = ev.not(&i)?;
        let bits = row
            .bits()
            .iter()
            .map(|x| ev.mul(&ni, x))
            .collect::<Result<Vec<_>>>()?;
        Ok(EncWord::from_bits(bits))
    })?;
    Ok(EncTable {
        schema: table.schema.clone(),
        rows,
    })
}

/// `R′ = Ī_R·R`: matching rows become zero.
pub fn delete_where(ev: &mut Evaluator, table: &EncTable, column_name: &str, v: &EncWord) -> Result<EncTable> {
    require_rows(table)?;
    let r = column(table, column_name)?;
    same_width(r.len(), v.width())?;
    let (st, sv) = (table.to_shadow(), v.to_shadow());
    predict(ev, |tw| delete_core(tw, &st, &r, &sv), EncTable::max_noise)?;
    delete_core(ev, table, &r, v)
}

fn count_core(ev: &mut Evaluator, table: &EncTable, r: &Range<usize>, v: &EncWord) -> Result<EncWord> {
    let ind = indicators(ev, table, r, v)?;
    popcount_esp_width(ev, &ind, index_width(table.rows.len()))
}

/// Number of matching rows.
pub fn count_where(ev: &mut Evaluator, table: &EncTable, column_name: &str, v: &EncWord) -> Result<EncWord> {
    require_rows(table)?;
    let r = column(table, column_name)?;
    same_width(r.len(), v.width())?;
    let (st, sv) = (table.to_shadow(), v.to_shadow());
    predict(ev, |tw| count_core(tw, &st, &r, &sv), EncWord::max_noise)?;
    count_core(ev, table, &r, v)
}

/// `Σ I_R·value_R` over `target`, `target width + index width` bits wide.
fn masked_sum(ev: &mut Evaluator, table: &EncTable, ind: &[Ciphertext], target: &Range<usize>) -> Result<EncWord> {
    let width = target.len() + index_width(table.rows.len());
    let pairs: Vec<(&EncWord, &Ciphertext)> = table.rows.iter().zip(ind).collect();
    let masked = ev.map_items(&pairs, |ev, _, (row, i)| {
        row.bits()[target.clone()]
            .iter()
            .enumerate()
            .map(|(b, x)| Ok((ev.mul(i, x)?, b as u32)))
            .collect::<Result<Vec<_>>>()
    })?;
    let items: Vec<(Ciphertext, u32)> = masked.into_iter().flatten().collect();
    weighted_sum_esp(ev, &items, width)
}

fn avg_core(
    ev: &mut Evaluator,
    table: &EncTable,
    r: &Range<usize>,
    v: &EncWord,
    t: &Range<usize>,
) -> Result<(EncWord, EncWord)> {
    let ind = indicators(ev, table, r, v)?;
    let sum = masked_sum(ev, table, &ind, t)?;
    let count = popcount_esp_width(ev, &ind, index_width(table.rows.len()))?;
    Ok((sum, count))
}

/// Encrypted `(Σ matched values, count)`; the client divides after decryption.
pub fn avg_where(
    ev: &mut Evaluator,
    table: &EncTable,
    column_name: &str,
    v: &EncWord,
    target: &str,
) -> Result<(EncWord, EncWord)> {
    require_rows(table)?;
    let r = column(table, column_name)?;
    let t = column(table, target)?;
    same_width(r.len(), v.width())?;
    let (st, sv) = (table.to_shadow(), v.to_shadow());
    predict(
        ev,
        |tw| avg_core(tw, &st, &r, &sv, &t),
        |(s, c)| s.max_noise().max(c.max_noise()),
    )?;
    avg_core(ev, table, &r, v, &t)
}

fn generic_core(ev: &mut Evaluator, table: &EncTable, d: &Datagram) -> Result<(QueryResult, EncTable)> {
    let r = column(table, &d.column)?;
    let t = d.sum_column.as_deref().map(|c| column(table, c)).transpose()?;
    let ind = ev.map_items(&table.rows, |ev, _, row| {
        let f = field(row, &r);
        let eq = eq_word_masked(ev, &f, &d.v, &d.care)?;
        let gt = gt_compare(ev, &f, &d.v)?;
        let lt = lt_compare(ev, &f, &d.v)?;
        let a = ev.mul(&d.f1, &eq)?;
        let b = ev.mul(&d.f2, &gt)?;
        let c = ev.mul(&d.f3, &lt)?;
        let ab = ev.add(&a, &b)?;
        ev.add(&ab, &c)
    })?;
    let (record, count) = fold_selected(ev, table, &ind, &d.eta)?;
    let sum = t.map(|t| masked_sum(ev, table, &ind, &t)).transpose()?;
    let pairs: Vec<(&EncWord, &Ciphertext)> = table.rows.iter().zip(&ind).collect();
    let rows = ev.map_items(&pairs, |ev, _, (row, i)| {
        let written = blind_mux(ev, &d.f4, &d.update, row)?;
        blind_mux(ev, i, &written, row)
    })?;
    Ok((
        QueryResult {
            record,
            count,
            sum,
        },
        EncTable {
            schema: table.schema.clone(),
            rows,
        },
    ))
}

/// One circuit for every operation: the localizer blends equality, greater
/// and less branches with the encrypted switchers `F1..F3`; the creator emits
/// the result stream `I′·R` and storage rows `mux(I, mux(F4, U, R), R)`.
/// The gate sequence depends only on the schema, the row count and the
/// datagram's public column names. The masked sum is computed only when the
/// datagram names a `sum_column`, since its adder chain dominates the noise.
pub fn generic_execute(ev: &mut Evaluator, table: &EncTable, d: &Datagram) -> Result<(QueryResult, EncTable, OpCounter)> {
    require_rows(table)?;
    let r = column(table, &d.column)?;
    if let Some(c) = &d.sum_column {
        column(table, c)?;
    }
    same_width(r.len(), d.v.width())?;
    same_width(r.len(), d.care.width())?;
    same_width(table.schema.record_width(), d.update.width())?;
    check_eta(table, &d.eta)?;
    let (st, sd) = (table.to_shadow(), d.to_shadow());
    predict(
        ev,
        |tw| generic_core(tw, &st, &sd),
        |(q, t)| {
            let sum = q.sum.as_ref().map_or(0, EncWord::max_noise);
            q.record.max_noise().max(q.count.max_noise()).max(t.max_noise()).max(sum)
        },
    )?;
    let before = ev.ops();
    let (q, t) = generic_core(ev, table, d)?;
    let after = ev.ops();
    let used = OpCounter {
        adds: after.adds - before.adds,
        muls: after.muls - before.muls,
        mixed_adds: after.mixed_adds - before.mixed_adds,
        mixed_muls: after.mixed_muls - before.mixed_muls,
    };
    Ok((q, t, used))
}
