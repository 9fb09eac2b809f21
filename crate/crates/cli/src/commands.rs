use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use blindgate::circuits::{EncWord, EncWordRepr, PlainWord};
use blindgate::lbs::{decode_target, respond_with, FilterMode, LbsRequest};
use blindgate::query::{
    avg_where, count_where, decode_record, delete_where, encode_field, generic_execute, index_width, parse_schema,
    read_csv, select_nth, update_where, Datagram, DatagramSpec, EncTable, Eta,
};
use blindgate::rng::DetRng;
use blindgate::route::{build_topology, discover_route};
use blindgate::she::{keygen_with, Ciphertext, KeyFile, KeyOptions, KeyPair, Mode, ParamProfile, ProfileName, SecretKey};
use blindgate::vod::{self, ID_BITS};
use blindgate::{Evaluator, OpCounter};
use blindgate_oracle::{
    oracle_lbs, oracle_lbs_nearest, oracle_route, oracle_sql, oracle_vod, CmpOp, ColumnKind, LbsQuery, Network,
    PlainTable, PoiStore, Predicate, SqlOp, SqlOutcome,
};

use crate::bench::{bench_mul_curve, bench_route, bench_sql, write_csv, BenchRow};
use crate::{
    read_text, write_atomic, BenchArgs, BenchCircuit, Cli, CliError, CliResult, Command, DecryptArgs, EncryptArgs, EstimateArgs,
    KeygenArgs, LbsArgs, LbsModeArg, RouteArgs, SqlArgs, SqlOpArg, VodAction,
};

pub fn execute(cli: &Cli, out: &mut dyn Write) -> CliResult<()> {
    if cli.threads != 1 {
        // a second build in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global();
    }
    match &cli.command {
        Command::Keygen(a) => keygen(cli, a, out),
        Command::Encrypt(a) => encrypt(cli, a, out),
        Command::Decrypt(a) => decrypt(a, out),
        Command::Sql(a) => sql(cli, a, out),
        Command::Lbs(a) => lbs(cli, a, out),
        Command::Route(a) => route(cli, a, out),
        Command::Vod(a) => match &a.action {
            VodAction::Store { dir, count, size } => {
                let store = vod::pseudo_store(*count, *size, cli.seed)?;
                vod::write_store(dir, &store)?;
                writeln!(out, "wrote {count} videos of {size} bytes to {}", dir.display())?;
                Ok(())
            }
            VodAction::Fetch {
                key,
                dir,
                id,
                out: bytes_out,
                stream,
            } => vod_fetch(cli, key, dir, *id, bytes_out, stream.as_deref(), out),
        },
        Command::Bench(a) => bench(cli, a, out),
        Command::Estimate(a) => estimate(cli, a, out),
    }
}

fn profile_name(cli: &Cli) -> CliResult<ProfileName> {
    cli.profile.parse().map_err(|e: blindgate::Error| CliError::Usage(e.to_string()))
}

fn lambdas(cli: &Cli, list: &[u32]) -> Vec<u32> {
    if list.is_empty() {
        vec![cli.lambda]
    } else {
        list.to_vec()
    }
}

fn evaluator(cli: &Cli, keys: &KeyPair) -> Evaluator {
    Evaluator::for_key(&keys.pk).with_parallel(cli.threads != 1)
}

fn load_keys(path: &Path) -> CliResult<KeyPair> {
    let file: KeyFile = serde_json::from_str(&read_text(path)?)?;
    Ok(file.key_pair()?)
}

fn ops_line(ops: OpCounter) -> String {
    format!(
        "ops: adds={} muls={} mixed_adds={} mixed_muls={}",
        ops.adds, ops.muls, ops.mixed_adds, ops.mixed_muls
    )
}

/// CSV goes to `--csv` when given, otherwise nowhere.
fn emit_csv(cli: &Cli, text: &str) -> CliResult<()> {
    match &cli.csv {
        Some(p) => write_atomic(p, text.as_bytes()),
        None => Ok(()),
    }
}

fn keygen(cli: &Cli, a: &KeygenArgs, out: &mut dyn Write) -> CliResult<()> {
    let mode = if a.asymmetric { Mode::Asymmetric } else { Mode::Symmetric };
    let profile = ParamProfile::preset(profile_name(cli)?, cli.lambda, mode)?;
    let opts = KeyOptions {
        squash: a.squash,
        publish_x0: !a.no_x0,
    };
    let keys = keygen_with(profile, opts, cli.seed)?;
    write_atomic(&a.out, KeyFile::from_keys(&keys).to_json().as_bytes())?;
    if let Some(p) = &a.public_out {
        write_atomic(p, KeyFile::from_public(&keys.pk).to_json().as_bytes())?;
    }
    writeln!(
        out,
        "{} λ={} {}: sk {} bits, q {} bits, noise limit {} bits",
        profile.name,
        profile.lambda,
        profile.mode,
        profile.sk_bits,
        profile.q_bits,
        profile.noise_limit()
    )?;
    Ok(())
}

fn encrypt(cli: &Cli, a: &EncryptArgs, out: &mut dyn Write) -> CliResult<()> {
    if a.width == 0 || a.width > 64 || (a.width < 64 && a.value >> a.width != 0) {
        return Err(CliError::Usage(format!("{} does not fit in {} bits", a.value, a.width)));
    }
    let file: KeyFile = serde_json::from_str(&read_text(&a.key)?)?;
    let mut rng = DetRng::derive(cli.seed, "encrypt");
    let word = match file.sk_hex {
        Some(_) => EncWord::encrypt(&file.key_pair()?, a.value, a.width, &mut rng)?,
        None => EncWord::encrypt(&file.public_key()?, a.value, a.width, &mut rng)?,
    };
    write_atomic(&a.out, serde_json::to_string(&word.to_repr())?.as_bytes())?;
    writeln!(out, "encrypted {} bits, {} bits of ciphertext", a.width, word.bits().iter().map(Ciphertext::bit_len).sum::<u64>())?;
    Ok(())
}

fn decrypt(a: &DecryptArgs, out: &mut dyn Write) -> CliResult<()> {
    let keys = load_keys(&a.key)?;
    let repr: EncWordRepr = serde_json::from_str(&read_text(&a.input)?)?;
    let word = EncWord::from_repr(&repr, *keys.pk.profile())?;
    writeln!(out, "{}", word.decrypt(&keys.sk)?)?;
    Ok(())
}

struct Filter {
    column: String,
    op: CmpOp,
    value: Vec<bool>,
    care: Vec<bool>,
}

fn parse_filter(plain: &PlainTable, text: &str) -> CliResult<Filter> {
    let at = text
        .find(['=', '>', '<'])
        .ok_or_else(|| CliError::Usage(format!("`{text}` is not `column=value`, `column>value` or `column<value`")))?;
    let (name, rest) = text.split_at(at);
    let op = match &rest[..1] {
        "=" => CmpOp::Eq,
        ">" => CmpOp::Gt,
        _ => CmpOp::Lt,
    };
    let (name, value) = (name.trim(), &rest[1..]);
    let col = plain
        .schema
        .column(name)
        .ok_or_else(|| blindgate::Error::UnknownColumn(name.to_string()))?;
    let w = col.width_bits;
    let wild = value == "*" || (col.kind == ColumnKind::Text && value.contains('_'));
    if wild && op != CmpOp::Eq {
        return Err(CliError::Usage("wildcards only apply to equality".into()));
    }
    let (value, care) = if value == "*" {
        (vec![false; w], vec![false; w])
    } else if col.kind == ColumnKind::Text {
        let bits = encode_field(ColumnKind::Text, w, &value.replace('_', "\0"))?;
        let mut care = vec![true; w];
        for (i, ch) in value.bytes().enumerate() {
            if ch == b'_' {
                care[8 * i..8 * i + 8].fill(false);
            }
        }
        (bits, care)
    } else {
        (encode_field(ColumnKind::Int, w, value)?, vec![true; w])
    };
    Ok(Filter {
        column: name.to_string(),
        op,
        value,
        care,
    })
}

fn parse_record(plain: &PlainTable, text: &str) -> CliResult<Vec<bool>> {
    let fields: Vec<&str> = text.split(',').collect();
    if fields.len() != plain.schema.columns.len() {
        return Err(CliError::Usage(format!(
            "--set needs {} comma-separated fields",
            plain.schema.columns.len()
        )));
    }
    let mut bits = Vec::new();
    for (c, f) in plain.schema.columns.iter().zip(fields) {
        bits.extend(encode_field(c.kind, c.width_bits, f)?);
    }
    Ok(bits)
}

fn dec_bits(sk: &SecretKey, w: &EncWord) -> CliResult<Vec<bool>> {
    Ok(w.decrypt_bits(sk)?)
}

fn sql(cli: &Cli, a: &SqlArgs, out: &mut dyn Write) -> CliResult<()> {
    let keys = load_keys(&a.key)?;
    let schema = parse_schema(&read_text(&a.schema)?)?;
    let file = std::fs::File::open(&a.table).map_err(|source| CliError::File {
        path: a.table.clone(),
        source,
    })?;
    let plain = read_csv(&schema, file)?;
    let f = parse_filter(&plain, &a.filter)?;
    let width = schema.record_width();
    let payload = match (a.op, &a.set) {
        (SqlOpArg::Update, Some(s)) => parse_record(&plain, s)?,
        (SqlOpArg::Update, None) => return Err(CliError::Usage("update needs --set".into())),
        _ => vec![false; width],
    };
    let target = match (a.op, &a.target) {
        (SqlOpArg::Avg, Some(t)) => {
            if schema.column(t).is_none() {
                return Err(blindgate::Error::UnknownColumn(t.clone()).into());
            }
            Some(t.clone())
        }
        (SqlOpArg::Avg, None) => return Err(CliError::Usage("avg needs --target".into())),
        _ => None,
    };
    if a.index == 0 {
        return Err(CliError::Usage("--index counts from 1".into()));
    }
    let sql_op = match a.op {
        SqlOpArg::Select => SqlOp::Select { n: a.index as usize },
        SqlOpArg::Update => SqlOp::Update {
            payload: payload.clone(),
        },
        SqlOpArg::Delete => SqlOp::Delete,
        SqlOpArg::Count => SqlOp::Count,
        SqlOpArg::Avg => SqlOp::Avg {
            target: target.clone().unwrap_or_default(),
        },
    };
    let pred = Predicate {
        column: f.column.clone(),
        op: f.op,
        value: f.value.clone(),
        care: f.care.clone(),
    };
    let expected = oracle_sql(&plain, &sql_op, &pred);

    let mut rng = DetRng::derive(cli.seed, "sql");
    let table = EncTable::encrypt(&keys, &plain, &mut rng)?;
    let mut ev = evaluator(cli, &keys);
    let generic = a.generic || f.op != CmpOp::Eq || f.care.iter().any(|&c| !c);
    let sk = &keys.sk;
    let (got, enc_table) = if generic {
        let iw = index_width(plain.rows.len());
        if a.index >> iw != 0 {
            return Err(CliError::Usage(format!("--index {} exceeds the row count", a.index)));
        }
        let spec = DatagramSpec {
            column: &f.column,
            sum_column: target.as_deref(),
            op: f.op,
            write: matches!(a.op, SqlOpArg::Update | SqlOpArg::Delete),
            value: &f.value,
            care: &f.care,
            n: a.index,
            index_width: iw,
            encrypt_eta: true,
            update: &payload,
        };
        let d = Datagram::build(&keys, &spec, &mut rng)?;
        let (res, tab, _) = generic_execute(&mut ev, &table, &d)?;
        let count = res.count.decrypt(sk)?;
        let got = match a.op {
            SqlOpArg::Select => SqlOutcome::Record(dec_bits(sk, &res.record)?),
            SqlOpArg::Update | SqlOpArg::Delete => SqlOutcome::Table(tab.decrypt(sk)?.rows),
            SqlOpArg::Count => SqlOutcome::Count(count),
            SqlOpArg::Avg => {
                let sum = res.sum.as_ref().expect("a sum column was named").decrypt(sk)?;
                SqlOutcome::Avg { sum, count }
            }
        };
        (got, Some(tab))
    } else {
        let v = EncWord::encrypt_bits(&keys, &f.value, &mut rng)?;
        match a.op {
            SqlOpArg::Select => {
                let eta = Eta::Plain(PlainWord::from_u64(a.index, index_width(plain.rows.len()).max(bits_of(a.index))));
                let res = select_nth(&mut ev, &table, &f.column, &v, &eta)?;
                (SqlOutcome::Record(dec_bits(sk, &res.record)?), None)
            }
            SqlOpArg::Update => {
                let u = EncWord::encrypt_bits(&keys, &payload, &mut rng)?;
                let tab = update_where(&mut ev, &table, &f.column, &v, &u)?;
                (SqlOutcome::Table(tab.decrypt(sk)?.rows), Some(tab))
            }
            SqlOpArg::Delete => {
                let tab = delete_where(&mut ev, &table, &f.column, &v)?;
                (SqlOutcome::Table(tab.decrypt(sk)?.rows), Some(tab))
            }
            SqlOpArg::Count => (
                SqlOutcome::Count(count_where(&mut ev, &table, &f.column, &v)?.decrypt(sk)?),
                None,
            ),
            SqlOpArg::Avg => {
                let t = target.as_deref().expect("checked above");
                let (sum, count) = avg_where(&mut ev, &table, &f.column, &v, t)?;
                (
                    SqlOutcome::Avg {
                        sum: sum.decrypt(sk)?,
                        count: count.decrypt(sk)?,
                    },
                    None,
                )
            }
        }
    };

    let mut text = String::new();
    match &got {
        SqlOutcome::Record(bits) => writeln!(text, "{}", decode_record(&schema, bits).join(",")).unwrap(),
        SqlOutcome::Table(rows) => {
            let names: Vec<&str> = schema.columns.iter().map(|c| c.name.as_str()).collect();
            writeln!(text, "{}", names.join(",")).unwrap();
            for r in rows {
                writeln!(text, "{}", decode_record(&schema, r).join(",")).unwrap();
            }
        }
        SqlOutcome::Count(n) => writeln!(text, "{n}").unwrap(),
        SqlOutcome::Avg { sum, count } if *count == 0 => writeln!(text, "no match (sum {sum}, count 0)").unwrap(),
        SqlOutcome::Avg { sum, count } => {
            writeln!(text, "{} (sum {sum}, count {count})", *sum as f64 / *count as f64).unwrap()
        }
    }
    out.write_all(text.as_bytes())?;
    writeln!(out, "{}", ops_line(ev.ops()))?;
    if let (Some(p), Some(tab)) = (&a.out, &enc_table) {
        let mut buf = Vec::new();
        tab.write_jsonl(&mut buf)?;
        write_atomic(p, &buf)?;
    }
    if got != expected {
        return Err(CliError::OracleMismatch(format!("expected {expected:?}")));
    }
    Ok(())
}

fn flat(ws: &[Vec<EncWord>]) -> Vec<&Ciphertext> {
    ws.iter().flatten().flat_map(|w| w.bits().iter()).collect()
}

fn bits_of(n: u64) -> usize {
    (u64::BITS - n.leading_zeros()) as usize
}

fn stage_row(sk: &SecretKey, name: &str, cts: &[&Ciphertext]) -> CliResult<String> {
    let mut predicted = 0;
    let mut measured = 0;
    for c in cts {
        predicted = predicted.max(c.noise_bits());
        let m = sk.decrypt(c)?;
        measured = measured.max(sk.measure_noise(c, m).residue_bits);
    }
    Ok(format!("{name},{predicted},{measured}\n"))
}

fn lbs(cli: &Cli, a: &LbsArgs, out: &mut dyn Write) -> CliResult<()> {
    let keys = load_keys(&a.key)?;
    let store: PoiStore = serde_json::from_str(&read_text(&a.store)?)?;
    let q = LbsQuery {
        x: a.x,
        y: a.y,
        category: a.category,
        radius: a.radius,
        k: a.k,
    };
    let mut rng = DetRng::derive(cli.seed, "lbs");
    let req = LbsRequest::encrypt(&keys, store.coord_bits, store.cat_bits, &q, a.hide_radius, &mut rng)?;
    let mut ev = evaluator(cli, &keys);
    let mode = match a.mode {
        LbsModeArg::Coverage => FilterMode::Coverage,
        LbsModeArg::Sort => FilterMode::Sort,
    };
    let (resp, stages) = respond_with(&mut ev, &store, &req, mode)?;
    let mut got = Vec::with_capacity(resp.targets.len());
    for t in &resp.targets {
        let target = decode_target(&store, &t.decrypt_bits(&keys.sk)?);
        writeln!(out, "{},{},{}", target.x, target.y, target.payload)?;
        got.push(target);
    }
    writeln!(out, "{}", ops_line(ev.ops()))?;

    let sk = &keys.sk;
    let mut csv = String::from("stage,predicted_noise_bits,measured_noise_bits\n");
    csv += &stage_row(sk, "category", &stages.category.iter().collect::<Vec<_>>())?;
    csv += &stage_row(sk, "distance", &flat(&stages.distances))?;
    csv += &stage_row(sk, "in_range", &stages.in_range.iter().flatten().collect::<Vec<_>>())?;
    csv += &stage_row(sk, "slots", &flat(&stages.slots))?;
    csv += &stage_row(sk, "response", &resp.targets.iter().flat_map(|w| w.bits().iter()).collect::<Vec<_>>())?;
    emit_csv(cli, &csv)?;

    let expected = match mode {
        FilterMode::Coverage => oracle_lbs(&store, &q),
        FilterMode::Sort => oracle_lbs_nearest(&store, &q),
    };
    if got != expected {
        return Err(CliError::OracleMismatch(format!("expected {expected:?}")));
    }
    Ok(())
}

fn route(cli: &Cli, a: &RouteArgs, out: &mut dyn Write) -> CliResult<()> {
    let keys = match &a.key {
        Some(p) => load_keys(p)?,
        None => {
            let profile = ParamProfile::preset(profile_name(cli)?, cli.lambda, Mode::Asymmetric)?;
            let opts = KeyOptions {
                squash: false,
                publish_x0: true,
            };
            keygen_with(profile, opts, cli.seed)?
        }
    };
    let net: Network = match &a.topology {
        Some(p) => serde_json::from_str(&read_text(p)?)?,
        None => build_topology(a.nodes, a.degree, cli.seed)?,
    };
    if let Some(p) = &a.save_topology {
        write_atomic(p, serde_json::to_string_pretty(&net)?.as_bytes())?;
    }
    let n = net.nodes.len();
    let dest = a.dest.unwrap_or(n.saturating_sub(1));
    let max_hops = a.max_hops.unwrap_or(n.saturating_sub(1)).max(1);
    let mut rng = DetRng::derive(cli.seed, "route");
    let t = Instant::now();
    let trace = discover_route(&net, a.source, dest, &keys, max_hops, &mut rng)?;
    let ms = t.elapsed().as_secs_f64() * 1e3;
    let (path, total) = trace.open(&keys)?;
    let hops = path.len() - 1;
    let names: Vec<String> = path.iter().map(usize::to_string).collect();
    writeln!(out, "path: {}", names.join(" -> "))?;
    writeln!(out, "total trust: {total}")?;
    writeln!(out, "hops: {hops}")?;
    if let Some(first) = trace.hop_ops.first() {
        writeln!(out, "per hop {}", ops_line(*first))?;
    }
    if let Some(p) = &a.packets {
        let mut buf = String::new();
        for pkt in &trace.packets {
            buf += &pkt.to_json()?;
            buf.push('\n');
        }
        write_atomic(p, buf.as_bytes())?;
    }
    emit_csv(
        cli,
        &format!("lambda,nodes,hops,wall_ms\n{},{n},{hops},{ms:.3}\n", keys.pk.profile().lambda),
    )?;
    let expected = oracle_route(&net, a.source, dest).map_err(|e| CliError::OracleMismatch(e.to_string()))?;
    if expected != (path, total) {
        return Err(CliError::OracleMismatch(format!("expected {expected:?}")));
    }
    Ok(())
}

fn vod_fetch(
    cli: &Cli,
    key: &Path,
    dir: &Path,
    id: u64,
    bytes_out: &Path,
    stream_out: Option<&Path>,
    out: &mut dyn Write,
) -> CliResult<()> {
    if id >> ID_BITS != 0 {
        return Err(CliError::Usage(format!("video ids have {ID_BITS} bits")));
    }
    let keys = load_keys(key)?;
    let store = vod::read_store(dir)?;
    let mut rng = DetRng::derive(cli.seed, "vod");
    let enc = EncWord::encrypt(&keys, id, ID_BITS, &mut rng)?;
    let mut ev = evaluator(cli, &keys);
    let stream = vod::request_video(&mut ev, &store, &enc)?;
    if let Some(p) = stream_out {
        let mut buf = Vec::new();
        vod::write_stream(&mut buf, &stream)?;
        write_atomic(p, &buf)?;
    }
    let bytes = vod::decrypt_stream(&keys.sk, &stream)?;
    write_atomic(bytes_out, &bytes)?;
    let cipher_bits: u64 = stream.iter().map(Ciphertext::bit_len).sum();
    writeln!(
        out,
        "video {id}: {} bytes, {} bytes encrypted",
        bytes.len(),
        cipher_bits.div_ceil(8)
    )?;
    writeln!(out, "{}", ops_line(ev.ops()))?;
    if bytes != oracle_vod(&store, id as u16) {
        return Err(CliError::OracleMismatch("stream differs from the stored video".into()));
    }
    Ok(())
}

fn bench(cli: &Cli, a: &BenchArgs, out: &mut dyn Write) -> CliResult<()> {
    let mut rows: Vec<BenchRow> = Vec::new();
    for lambda in lambdas(cli, &a.lambdas) {
        match a.circuit {
            BenchCircuit::Mul => rows.extend(bench_mul_curve(lambda, profile_name(cli)?, &a.sizes, a.reps, cli.seed)?),
            BenchCircuit::Sql => {
                for &n in &a.sizes {
                    rows.extend(bench_sql(lambda, n, cli.seed)?);
                }
            }
            BenchCircuit::Route => {
                for &n in &a.sizes {
                    rows.push(bench_route(lambda, n, 5, cli.seed)?);
                }
            }
        }
    }
    let mut buf = Vec::new();
    write_csv(&mut buf, &rows)?;
    match &cli.csv {
        Some(p) => write_atomic(p, &buf)?,
        None => out.write_all(&buf)?,
    }
    Ok(())
}

fn estimate(cli: &Cli, a: &EstimateArgs, out: &mut dyn Write) -> CliResult<()> {
    if a.size_mb < 0.0 || a.bw < 0.0 || a.length_s < 0.0 {
        return Err(CliError::Usage("sizes must not be negative".into()));
    }
    let mut csv = String::from("lambda,original_mb,encrypted_mb,required_mb_per_s,cache_mb\n");
    for lambda in lambdas(cli, &a.lambdas) {
        let e = vod::estimate_stream(a.size_mb, a.bw, lambda);
        let (mb, bw) = e.whole();
        let cache = vod::estimate_cache(a.length_s, e.required_bw * 8.0 * 1024.0 * 1024.0);
        writeln!(out, "λ={lambda}: {mb} MB, {bw} MB/s")?;
        writeln!(csv, "{lambda},{},{mb},{bw},{cache}", a.size_mb).unwrap();
    }
    emit_csv(cli, &csv)
}
