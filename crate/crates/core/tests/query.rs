use blindgate::circuits::{EncWord, PlainWord};
use blindgate::query::*;
use blindgate::rng::DetRng;
use blindgate::she::*;
use blindgate::{Error, Evaluator};
use blindgate_oracle::{
    bits_to_u64, oracle_sql, u64_to_bits, CmpOp, Column, ColumnKind, PlainTable, Predicate, SqlOp, SqlOutcome,
    TableSchema,
};
use proptest::prelude::*;

struct Fx {
    keys: KeyPair,
    rng: DetRng,
}

impl Fx {
    fn new(lambda: u32, seed: u64) -> Self {
        let p = ParamProfile::preset(ProfileName::ProfileB, lambda, Mode::Symmetric).unwrap();
        let opts = KeyOptions {
            squash: false,
            publish_x0: true,
        };
        Self {
            keys: keygen_with(p, opts, seed).unwrap(),
            rng: DetRng::from_seed(seed ^ 0xdb),
        }
    }

    fn ev(&self) -> Evaluator {
        Evaluator::for_key(&self.keys.pk)
    }

    fn table(&mut self, t: &PlainTable) -> EncTable {
        EncTable::encrypt(&self.keys, t, &mut self.rng).unwrap()
    }

    fn word(&mut self, bits: &[bool]) -> EncWord {
        EncWord::encrypt_bits(&self.keys, bits, &mut self.rng).unwrap()
    }

    fn bits(&self, w: &EncWord) -> Vec<bool> {
        w.decrypt_bits(&self.keys.sk).unwrap()
    }

    fn rows(&self, t: &EncTable) -> Vec<Vec<bool>> {
        t.decrypt(&self.keys.sk).unwrap().rows
    }
}

fn schema(cols: &[(&str, usize)]) -> TableSchema {
    TableSchema::new(
        cols.iter()
            .map(|(n, w)| Column {
                name: n.to_string(),
                width_bits: *w,
                kind: ColumnKind::Int,
            })
            .collect(),
    )
    .unwrap()
}

/// Two-column table `k` (key) and `v` (value).
fn kv_table(kw: usize, vw: usize, rows: &[(u64, u64)]) -> PlainTable {
    PlainTable {
        schema: schema(&[("k", kw), ("v", vw)]),
        rows: rows
            .iter()
            .map(|&(k, v)| {
                let mut r = u64_to_bits(k, kw);
                r.extend(u64_to_bits(v, vw));
                r
            })
            .collect(),
    }
}

fn record(outcome: SqlOutcome) -> Vec<bool> {
    match outcome {
        SqlOutcome::Record(r) => r,
        other => panic!("expected a record, got {other:?}"),
    }
}

fn rows_of(outcome: SqlOutcome) -> Vec<Vec<bool>> {
    match outcome {
        SqlOutcome::Table(t) => t,
        other => panic!("expected a table, got {other:?}"),
    }
}

fn eta(fx: &mut Fx, n: u64, rows: usize, encrypted: bool) -> Eta {
    let w = PlainWord::from_u64(n, index_width(rows));
    if encrypted {
        Eta::Enc(fx.word(&w.bits))
    } else {
        Eta::Plain(w)
    }
}

#[test]
fn select_examples() {
    let mut fx = Fx::new(4, 1);
    let plain = kv_table(3, 3, &[(1, 4), (2, 5), (3, 6)]);
    let t = fx.table(&plain);
    for encrypted in [false, true] {
        let v = fx.word(&u64_to_bits(2, 3));
        let e = eta(&mut fx, 1, 3, encrypted);
        let q = select_nth(&mut fx.ev(), &t, "k", &v, &e).unwrap();
        assert_eq!(fx.bits(&q.record), plain.rows[1]);
        assert_eq!(q.count.decrypt(&fx.keys.sk).unwrap(), 1);

        let v = fx.word(&u64_to_bits(7, 3));
        let q = select_nth(&mut fx.ev(), &t, "k", &v, &e).unwrap();
        assert!(fx.bits(&q.record).iter().all(|b| !b));
    }

    let dup = kv_table(3, 3, &[(2, 1), (2, 2), (5, 3)]);
    let t = fx.table(&dup);
    let v = fx.word(&u64_to_bits(2, 3));
    let e = eta(&mut fx, 2, 3, true);
    let q = select_nth(&mut fx.ev(), &t, "k", &v, &e).unwrap();
    assert_eq!(fx.bits(&q.record), dup.rows[1]);
}

#[test]
fn update_and_delete_examples() {
    let mut fx = Fx::new(4, 2);
    let plain = kv_table(3, 3, &[(1, 4), (2, 5), (3, 6)]);
    let t = fx.table(&plain);
    let payload = kv_table(3, 3, &[(7, 7)]).rows[0].clone();
    let u = fx.word(&payload);

    let v = fx.word(&u64_to_bits(2, 3));
    let out = update_where(&mut fx.ev(), &t, "k", &v, &u).unwrap();
    assert_eq!(fx.rows(&out), vec![plain.rows[0].clone(), payload.clone(), plain.rows[2].clone()]);

    let deleted = delete_where(&mut fx.ev(), &t, "k", &v).unwrap();
    assert_eq!(fx.rows(&deleted), vec![plain.rows[0].clone(), vec![false; 6], plain.rows[2].clone()]);

    let zero = fx.word(&[false; 6]);
    let via_update = update_where(&mut fx.ev(), &t, "k", &v, &zero).unwrap();
    assert_eq!(fx.rows(&via_update), fx.rows(&deleted));

    let none = fx.word(&u64_to_bits(0, 3));
    assert_eq!(fx.rows(&update_where(&mut fx.ev(), &t, "k", &none, &u).unwrap()), plain.rows);
    assert_eq!(fx.rows(&delete_where(&mut fx.ev(), &t, "k", &none).unwrap()), plain.rows);

    let same = kv_table(3, 3, &[(4, 1), (4, 2)]);
    let t = fx.table(&same);
    let v = fx.word(&u64_to_bits(4, 3));
    let out = update_where(&mut fx.ev(), &t, "k", &v, &u).unwrap();
    assert_eq!(fx.rows(&out), vec![payload.clone(), payload]);
}

#[test]
fn count_and_avg_examples() {
    let mut fx = Fx::new(4, 3);
    let keys = [1, 5, 2, 5, 0, 3, 5, 7, 6, 4];
    let plain = kv_table(3, 2, &keys.map(|k| (k, 0)));
    let t = fx.table(&plain);
    let v = fx.word(&u64_to_bits(5, 3));
    assert_eq!(count_where(&mut fx.ev(), &t, "k", &v).unwrap().decrypt(&fx.keys.sk).unwrap(), 3);

    let people = PlainTable {
        schema: schema(&[("id", 2), ("age", 7)]),
        rows: [(1, 54), (2, 33), (1, 20)]
            .iter()
            .map(|&(i, a)| [u64_to_bits(i, 2), u64_to_bits(a, 7)].concat())
            .collect(),
    };
    let t = fx.table(&people);
    let v = fx.word(&u64_to_bits(1, 2));
    let (sum, count) = avg_where(&mut fx.ev(), &t, "id", &v, "age").unwrap();
    let (s, c) = (sum.decrypt(&fx.keys.sk).unwrap(), count.decrypt(&fx.keys.sk).unwrap());
    assert_eq!((s, c), (74, 2));
    assert_eq!(s / c, 37);

    let v = fx.word(&u64_to_bits(3, 2));
    let (sum, count) = avg_where(&mut fx.ev(), &t, "id", &v, "age").unwrap();
    assert_eq!(sum.decrypt(&fx.keys.sk).unwrap(), 0);
    assert_eq!(count.decrypt(&fx.keys.sk).unwrap(), 0);
}

struct Request {
    op: CmpOp,
    write: bool,
    value: u64,
    care: u64,
    n: u64,
    update: Vec<bool>,
}

fn datagram(fx: &mut Fx, t: &PlainTable, r: &Request, encrypt_eta: bool) -> Datagram {
    let kw = t.schema.columns[0].width_bits;
    let spec = DatagramSpec {
        column: "k",
        sum_column: None,
        op: r.op,
        write: r.write,
        value: &u64_to_bits(r.value, kw),
        care: &u64_to_bits(r.care, kw),
        n: r.n,
        index_width: index_width(t.rows.len()),
        encrypt_eta,
        update: &r.update,
    };
    Datagram::build(&fx.keys, &spec, &mut fx.rng).unwrap()
}

fn predicate(t: &PlainTable, r: &Request) -> Predicate {
    let kw = t.schema.columns[0].width_bits;
    Predicate {
        column: "k".into(),
        op: r.op,
        value: u64_to_bits(r.value, kw),
        care: u64_to_bits(r.care, kw),
    }
}

#[test]
fn generic_matches_specialised_circuits() {
    let mut fx = Fx::new(4, 4);
    let plain = kv_table(3, 3, &[(2, 1), (6, 2), (2, 3)]);
    let t = fx.table(&plain);
    let payload = kv_table(3, 3, &[(5, 5)]).rows[0].clone();

    let read = Request {
        op: CmpOp::Eq,
        write: false,
        value: 2,
        care: 7,
        n: 2,
        update: vec![false; 6],
    };
    let d = datagram(&mut fx, &plain, &read, false);
    let (q, stored, _) = generic_execute(&mut fx.ev(), &t, &d).unwrap();
    let v = fx.word(&u64_to_bits(2, 3));
    let e = eta(&mut fx, 2, 3, false);
    let direct = select_nth(&mut fx.ev(), &t, "k", &v, &e).unwrap();
    assert_eq!(fx.bits(&q.record), fx.bits(&direct.record));
    assert_eq!(fx.rows(&stored), plain.rows);

    let write = Request {
        update: payload.clone(),
        write: true,
        ..read
    };
    let d = datagram(&mut fx, &plain, &write, true);
    let (_, stored, _) = generic_execute(&mut fx.ev(), &t, &d).unwrap();
    let u = fx.word(&payload);
    let direct = update_where(&mut fx.ev(), &t, "k", &v, &u).unwrap();
    assert_eq!(fx.rows(&stored), fx.rows(&direct));
}

#[test]
fn generic_op_count_is_flag_independent() {
    let mut fx = Fx::new(4, 5);
    let plain = kv_table(3, 3, &[(2, 1), (6, 2), (2, 3), (1, 0)]);
    let t = fx.table(&plain);
    let w = plain.schema.record_width();
    let shapes = [
        (CmpOp::Eq, false, vec![false; w]),
        (CmpOp::Eq, true, vec![true; w]),
        (CmpOp::Eq, true, vec![false; w]),
        (CmpOp::Gt, false, vec![false; w]),
        (CmpOp::Lt, true, vec![false; w]),
    ];
    let mut counts = Vec::new();
    let mut traces = Vec::new();
    for (op, write, update) in shapes {
        let r = Request {
            op,
            write,
            value: 2,
            care: 7,
            n: 1,
            update,
        };
        let d = datagram(&mut fx, &plain, &r, true);
        let mut ev = fx.ev().with_trace();
        let (_, _, ops) = generic_execute(&mut ev, &t, &d).unwrap();
        counts.push(ops);
        traces.push(ev.trace().unwrap().to_vec());
    }
    assert!(counts.windows(2).all(|w| w[0] == w[1]), "{counts:?}");
    assert!(traces.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn select_trace_is_data_oblivious() {
    let mut fx = Fx::new(4, 6);
    let mut traces = Vec::new();
    for (rows, key, n) in [([(1, 1), (2, 2), (3, 3)], 2, 1), ([(7, 0), (7, 7), (0, 5)], 7, 3)] {
        let plain = kv_table(3, 3, &rows);
        let t = fx.table(&plain);
        let v = fx.word(&u64_to_bits(key, 3));
        let e = eta(&mut fx, n, 3, true);
        let mut ev = fx.ev().with_trace();
        select_nth(&mut ev, &t, "k", &v, &e).unwrap();
        traces.push(ev.trace().unwrap().to_vec());
    }
    assert_eq!(traces[0], traces[1]);
}

#[test]
fn exhaustive_three_rows() {
    let mut fx = Fx::new(4, 7);
    let plain = kv_table(3, 2, &[(3, 1), (5, 2), (3, 3)]);
    let t = fx.table(&plain);
    let payload = kv_table(3, 2, &[(6, 3)]).rows[0].clone();
    let u = fx.word(&payload);
    for value in 0..8 {
        let v = fx.word(&u64_to_bits(value, 3));
        let pred = Predicate::eq("k", u64_to_bits(value, 3));
        for n in 0..4 {
            let e = eta(&mut fx, n, 3, n % 2 == 1);
            let q = select_nth(&mut fx.ev(), &t, "k", &v, &e).unwrap();
            let want = record(oracle_sql(&plain, &SqlOp::Select { n: n as usize }, &pred));
            assert_eq!(fx.bits(&q.record), want, "v={value} n={n}");
        }
        let up = update_where(&mut fx.ev(), &t, "k", &v, &u).unwrap();
        let want = rows_of(oracle_sql(&plain, &SqlOp::Update { payload: payload.clone() }, &pred));
        assert_eq!(fx.rows(&up), want);
        let del = delete_where(&mut fx.ev(), &t, "k", &v).unwrap();
        assert_eq!(fx.rows(&del), rows_of(oracle_sql(&plain, &SqlOp::Delete, &pred)));
        let c = count_where(&mut fx.ev(), &t, "k", &v).unwrap();
        assert_eq!(
            SqlOutcome::Count(c.decrypt(&fx.keys.sk).unwrap()),
            oracle_sql(&plain, &SqlOp::Count, &pred)
        );
    }
}

#[test]
fn relational_and_wildcard_generic() {
    let mut fx = Fx::new(4, 8);
    let plain = kv_table(3, 2, &[(1, 1), (6, 2), (4, 3)]);
    let t = fx.table(&plain);
    for (op, care) in [(CmpOp::Gt, 7), (CmpOp::Lt, 7), (CmpOp::Eq, 0b011), (CmpOp::Eq, 0)] {
        for n in 1..3 {
            let r = Request {
                op,
                write: false,
                value: 4,
                care,
                n,
                update: vec![false; 5],
            };
            let d = datagram(&mut fx, &plain, &r, false);
            let (q, _, _) = generic_execute(&mut fx.ev(), &t, &d).unwrap();
            let want = record(oracle_sql(&plain, &SqlOp::Select { n: n as usize }, &predicate(&plain, &r)));
            assert_eq!(fx.bits(&q.record), want, "{op:?} care={care:b} n={n}");
        }
    }
}

#[test]
fn errors_are_reported() {
    let mut fx = Fx::new(3, 9);
    let plain = kv_table(3, 5, &[(1, 1); 10]);
    let t = fx.table(&plain);
    let v = fx.word(&u64_to_bits(1, 3));
    let e = eta(&mut fx, 1, 10, true);
    assert!(matches!(
        select_nth(&mut fx.ev(), &t, "nope", &v, &e),
        Err(Error::UnknownColumn(c)) if c == "nope"
    ));
    let short = fx.word(&[true; 2]);
    assert!(matches!(
        delete_where(&mut fx.ev(), &t, "k", &short),
        Err(Error::WidthMismatch { .. })
    ));
    let mut ev = fx.ev();
    assert!(matches!(
        select_nth(&mut ev, &t, "k", &v, &e),
        Err(Error::NoiseOverflow { .. })
    ));
    assert_eq!(ev.ops().total(), 0, "prediction runs before any real gate");
}

#[test]
fn parallel_rows_agree_with_serial() {
    let mut fx = Fx::new(4, 10);
    let plain = kv_table(3, 3, &[(1, 1), (2, 2), (1, 3), (4, 4)]);
    let t = fx.table(&plain);
    let v = fx.word(&u64_to_bits(1, 3));
    let e = eta(&mut fx, 2, 4, true);
    let mut serial = fx.ev();
    let a = select_nth(&mut serial, &t, "k", &v, &e).unwrap();
    let mut par = fx.ev().with_parallel(true);
    let b = select_nth(&mut par, &t, "k", &v, &e).unwrap();
    assert_eq!(a.record, b.record);
    assert_eq!(serial.ops(), par.ops());
}

#[test]
fn formats_roundtrip() {
    let mut fx = Fx::new(3, 11);
    let s = parse_schema(r#"{"columns":[{"name":"id","width_bits":4},{"name":"city","width_bits":16,"kind":"text"}]}"#)
        .unwrap();
    let csv = "city,id\nNY,3\nLA,12\n";
    let plain = read_csv(&s, csv.as_bytes()).unwrap();
    assert_eq!(decode_record(&s, &plain.rows[1]), vec!["12", "LA"]);
    assert!(read_csv(&s, "id\n1\n".as_bytes()).is_err());

    let t = fx.table(&plain);
    let mut buf = Vec::new();
    t.write_jsonl(&mut buf).unwrap();
    assert_eq!(buf.iter().filter(|&&b| b == b'\n').count(), 2);
    let back = EncTable::read_jsonl(s.clone(), *fx.keys.pk.profile(), buf.as_slice()).unwrap();
    assert_eq!(back, t);

    let r = Request {
        op: CmpOp::Eq,
        write: true,
        value: 3,
        care: 15,
        n: 1,
        update: vec![true; 20],
    };
    let spec = DatagramSpec {
        column: "id",
        sum_column: Some("id"),
        op: r.op,
        write: r.write,
        value: &u64_to_bits(r.value, 4),
        care: &u64_to_bits(r.care, 4),
        n: r.n,
        index_width: 2,
        encrypt_eta: true,
        update: &r.update,
    };
    let d = Datagram::build(&fx.keys, &spec, &mut fx.rng).unwrap();
    let json = serde_json::to_string(&d.to_repr()).unwrap();
    let back = Datagram::from_repr(&serde_json::from_str(&json).unwrap(), *fx.keys.pk.profile()).unwrap();
    assert_eq!(back.to_repr(), d.to_repr());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn random_tables_match_oracle(
        seed in any::<u64>(),
        keys in prop::collection::vec((0u64..8, 0u64..32), 10),
        value in 0u64..8,
        n in 0u64..11,
    ) {
        let mut fx = Fx::new(4, seed);
        let plain = kv_table(3, 5, &keys);
        let t = fx.table(&plain);
        let v = fx.word(&u64_to_bits(value, 3));
        let pred = Predicate::eq("k", u64_to_bits(value, 3));
        let e = eta(&mut fx, n, 10, true);
        let q = select_nth(&mut fx.ev(), &t, "k", &v, &e).unwrap();
        prop_assert_eq!(fx.bits(&q.record), record(oracle_sql(&plain, &SqlOp::Select { n: n as usize }, &pred)));
        let del = delete_where(&mut fx.ev(), &t, "k", &v).unwrap();
        prop_assert_eq!(fx.rows(&del), rows_of(oracle_sql(&plain, &SqlOp::Delete, &pred)));
        let c = count_where(&mut fx.ev(), &t, "k", &v).unwrap();
        prop_assert_eq!(bits_to_u64(&fx.bits(&c)), plain.rows.iter().filter(|r| pred.matches(&r[..3])).count() as u64);
    }
}
