//! Timed sweeps with exact gate counts and noise probes. Wall times are
//! whatever the machine gives; counts and noise are deterministic.

use std::io::Write;
use std::time::Instant;

use serde::Serialize;

use blindgate::circuits::{mul_words, EncWord};
use blindgate::query::{delete_where, generic_execute, select_nth, update_where, Datagram, DatagramSpec, EncTable, Eta};
use blindgate::rng::DetRng;
use blindgate::route::{build_topology, discover_route};
use blindgate::she::{keygen_with, Ciphertext, KeyOptions, KeyPair, Mode, ParamProfile, ProfileName, SecretKey};
use blindgate::{Evaluator, OpCounter, Result};
use blindgate_oracle::{CmpOp, Column, ColumnKind, PlainTable, TableSchema};

/// One measured configuration. `adds` and `muls` include the mixed
/// plain/encrypted variants.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchRow {
    pub lambda: u32,
    pub circuit: String,
    pub records: usize,
    pub adds: u64,
    pub muls: u64,
    pub wall_ms: f64,
    pub predicted_noise_bits: u32,
    pub measured_noise_bits: u64,
}

impl BenchRow {
    fn new(lambda: u32, circuit: &str, records: usize, ops: OpCounter, wall_ms: f64) -> Self {
        Self {
            lambda,
            circuit: circuit.to_string(),
            records,
            adds: ops.all_adds(),
            muls: ops.all_muls(),
            wall_ms,
            predicted_noise_bits: 0,
            measured_noise_bits: 0,
        }
    }

    fn probe(mut self, sk: &SecretKey, outputs: &[(&Ciphertext, bool)]) -> Self {
        for &(c, intended) in outputs {
            self.predicted_noise_bits = self.predicted_noise_bits.max(c.noise_bits());
            self.measured_noise_bits = self.measured_noise_bits.max(sk.measure_noise(c, intended).residue_bits);
        }
        self
    }
}

pub fn write_csv<W: Write>(out: W, rows: &[BenchRow]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

fn keys(lambda: u32, name: ProfileName, mode: Mode, seed: u64) -> Result<KeyPair> {
    let profile = ParamProfile::preset(name, lambda, mode)?;
    let opts = KeyOptions {
        squash: false,
        publish_x0: true,
    };
    keygen_with(profile, opts, seed)
}

/// Closed-form `(adds, muls)` of the schoolbook `n × n` multiplier.
pub fn mul_gate_formula(n: usize) -> (u64, u64) {
    let n = n as u64;
    if n <= 1 {
        return (0, n);
    }
    let muls = n * n + 2 * (n - 1) + (n - 2) * (2 * n - 1);
    let adds = (3 * n - 4) + (n - 2) * (3 * n - 2);
    (adds, muls)
}

/// Encrypted `n × n → 2n` multiplication for each `n`, timed as the best of
/// `reps` runs.
pub fn bench_mul_curve(lambda: u32, name: ProfileName, bits: &[usize], reps: usize, seed: u64) -> Result<Vec<BenchRow>> {
    let k = keys(lambda, name, Mode::Symmetric, seed)?;
    let mut rng = DetRng::derive(seed, "bench-mul");
    let mut rows = Vec::with_capacity(bits.len());
    for &n in bits {
        let mask = (1u64 << n) - 1;
        let (x, y) = (rng.next_u64() & mask, rng.next_u64() & mask);
        let a = EncWord::encrypt(&k, x, n, &mut rng)?;
        let b = EncWord::encrypt(&k, y, n, &mut rng)?;
        let mut best = f64::INFINITY;
        let mut last = None;
        for _ in 0..reps.max(1) {
            let mut ev = Evaluator::for_key(&k.pk);
            let t = Instant::now();
            let out = mul_words(&mut ev, &a, &b)?;
            best = best.min(t.elapsed().as_secs_f64() * 1e3);
            last = Some((out, ev.ops()));
        }
        let (out, ops) = last.expect("at least one repetition");
        let product = x * y;
        let expect: Vec<bool> = (0..2 * n).map(|i| (product >> i) & 1 == 1).collect();
        let probes: Vec<_> = out.bits().iter().zip(expect).collect();
        rows.push(BenchRow::new(lambda, "mul", n, ops, best).probe(&k.sk, &probes));
    }
    Ok(rows)
}

/// Greedy route from node 0 to the last node of a seeded topology, under
/// asymmetric profile_b. `records` is the hop count.
pub fn bench_route(lambda: u32, nodes: usize, degree: usize, seed: u64) -> Result<BenchRow> {
    let k = keys(lambda, ProfileName::ProfileB, Mode::Asymmetric, seed)?;
    let net = build_topology(nodes, degree, seed)?;
    let mut rng = DetRng::derive(seed, "bench-route");
    let t = Instant::now();
    let trace = discover_route(&net, 0, nodes - 1, &k, nodes - 1, &mut rng)?;
    let ms = t.elapsed().as_secs_f64() * 1e3;
    let ops = trace.hop_ops.iter().fold(OpCounter::default(), |a, &b| a.merge(b));
    let (path, total) = trace.open(&k)?;
    let acc = &trace.reply().acc_trust;
    let probes: Vec<_> = acc.bits().iter().enumerate().map(|(i, c)| (c, (total >> i) & 1 == 1)).collect();
    Ok(BenchRow::new(lambda, "route", path.len() - 1, ops, ms).probe(&k.sk, &probes))
}

/// Schema used by the SQL sweep: an 8-bit id, a 7-bit age and a two
/// character city.
pub fn bench_schema() -> TableSchema {
    let col = |name: &str, width_bits, kind| Column {
        name: name.into(),
        width_bits,
        kind,
    };
    TableSchema {
        columns: vec![
            col("id", 8, ColumnKind::Int),
            col("age", 7, ColumnKind::Int),
            col("city", 16, ColumnKind::Text),
        ],
    }
}

fn bench_table(rows: usize, rng: &mut DetRng) -> PlainTable {
    let schema = bench_schema();
    let w = schema.record_width();
    let rows = (0..rows)
        .map(|i| {
            let mut r: Vec<bool> = (0..w).map(|_| rng.bit()).collect();
            // ids repeat every four rows so matches are plentiful
            for (b, slot) in r.iter_mut().take(8).enumerate() {
                *slot = ((i % 4) >> b) & 1 == 1;
            }
            r
        })
        .collect();
    PlainTable { schema, rows }
}

/// SELECT, UPDATE and DELETE over `rows` records through the dedicated
/// circuits and through the generic datagram circuit.
pub fn bench_sql(lambda: u32, rows: usize, seed: u64) -> Result<Vec<BenchRow>> {
    let k = keys(lambda, ProfileName::ProfileB, Mode::Symmetric, seed)?;
    let mut rng = DetRng::derive(seed, "bench-sql");
    let plain = bench_table(rows, &mut rng);
    let table = EncTable::encrypt(&k, &plain, &mut rng)?;
    let width = plain.schema.record_width();
    let v = EncWord::encrypt(&k, 1, 8, &mut rng)?;
    let u = EncWord::encrypt_bits(&k, &vec![true; width], &mut rng)?;
    let iw = blindgate::query::index_width(rows);
    let eta = Eta::Plain(blindgate::circuits::PlainWord::from_u64(1, iw));
    let mut out = Vec::new();

    // a ledger-only pass counts gates and noise; the real pass is timed and
    // probed only when the ledger says it decrypts
    let mut timed = |circuit: &str, f: &mut dyn FnMut(&mut Evaluator) -> Result<Vec<Ciphertext>>| -> Result<()> {
        let mut twin = Evaluator::ledger_only(*k.pk.profile());
        let predicted = f(&mut twin)?.iter().map(Ciphertext::noise_bits).max().unwrap_or(0);
        let mut row = BenchRow::new(lambda, circuit, rows, twin.ops(), f64::NAN);
        row.predicted_noise_bits = predicted;
        if k.pk.profile().decryptable(predicted) {
            let mut ev = Evaluator::for_key(&k.pk);
            let t = Instant::now();
            let outs = f(&mut ev)?;
            row.wall_ms = t.elapsed().as_secs_f64() * 1e3;
            let plain = outs.iter().map(|c| k.sk.decrypt(c)).collect::<Result<Vec<_>>>()?;
            let probes: Vec<_> = outs.iter().zip(plain).collect();
            row = row.probe(&k.sk, &probes);
        }
        out.push(row);
        Ok(())
    };
    let cells = |t: EncTable| t.rows.into_iter().flat_map(EncWord::into_bits).collect::<Vec<_>>();
    timed("select", &mut |ev| Ok(select_nth(ev, &table, "id", &v, &eta)?.record.into_bits()))?;
    timed("update", &mut |ev| Ok(cells(update_where(ev, &table, "id", &v, &u)?)))?;
    timed("delete", &mut |ev| Ok(cells(delete_where(ev, &table, "id", &v)?)))?;
    for (name, write, fill) in [
        ("generic-select", false, false),
        ("generic-update", true, true),
        ("generic-delete", true, false),
    ] {
        let value: Vec<bool> = (0..8).map(|i| i == 0).collect();
        let update = vec![fill; width];
        let spec = DatagramSpec {
            column: "id",
            sum_column: None,
            op: CmpOp::Eq,
            write,
            value: &value,
            care: &[true; 8],
            n: 1,
            index_width: iw,
            encrypt_eta: true,
            update: &update,
        };
        let d = Datagram::build(&k, &spec, &mut rng)?;
        timed(name, &mut |ev| {
            let (res, tab, _) = generic_execute(ev, &table, &d)?;
            let mut outs = res.record.into_bits();
            outs.extend(cells(tab));
            Ok(outs)
        })?;
    }
    Ok(out)
}
