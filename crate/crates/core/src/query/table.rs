use std::io::{BufRead, Read, Write};

use blindgate_oracle::{ColumnKind, PlainTable, TableSchema};

use crate::circuits::{EncWord, EncWordRepr};
use crate::error::{Error, Result};
use crate::rng::DetRng;
use crate::she::{Encryptor, ParamProfile, SecretKey};

/// Bit-encoded table of encrypted records.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EncTable {
    pub schema: TableSchema,
    pub rows: Vec<EncWord>,
}

impl EncTable {
    pub fn encrypt<E: Encryptor + ?Sized>(enc: &E, table: &PlainTable, rng: &mut DetRng) -> Result<Self> {
        let rows = table
            .rows
            .iter()
            .map(|r| EncWord::encrypt_bits(enc, r, rng))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            schema: table.schema.clone(),
            rows,
        })
    }

    pub fn decrypt(&self, sk: &SecretKey) -> Result<PlainTable> {
        Ok(PlainTable {
            schema: self.schema.clone(),
            rows: self
                .rows
                .iter()
                .map(|r| r.decrypt_bits(sk))
                .collect::<Result<Vec<_>>>()?,
        })
    }

    pub fn to_shadow(&self) -> Self {
        Self {
            schema: self.schema.clone(),
            rows: self.rows.iter().map(EncWord::to_shadow).collect(),
        }
    }

    pub fn max_noise(&self) -> u32 {
        self.rows.iter().map(EncWord::max_noise).max().unwrap_or(0)
    }

    /// One serialized row per line.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<()> {
        for r in &self.rows {
            serde_json::to_writer(&mut out, &r.to_repr())?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn read_jsonl<R: BufRead>(schema: TableSchema, profile: ParamProfile, input: R) -> Result<Self> {
        let width = schema.record_width();
        let mut rows = Vec::new();
        for line in input.lines() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let repr: EncWordRepr = serde_json::from_str(&line)?;
            let row = EncWord::from_repr(&repr, profile)?;
            if row.width() != width {
                return Err(Error::WidthMismatch {
                    left: row.width(),
                    right: width,
                });
            }
            rows.push(row);
        }
        Ok(Self { schema, rows })
    }
}

/// Encodes one field value into its little-endian column bits.
pub fn encode_field(kind: ColumnKind, width: usize, text: &str) -> Result<Vec<bool>> {
    match kind {
        ColumnKind::Int => {
            let v: u64 = text
                .trim()
                .parse()
                .map_err(|_| Error::Format(format!("`{text}` is not an unsigned integer")))?;
            if width < 64 && v >> width != 0 {
                return Err(Error::Format(format!("{v} does not fit in {width} bits")));
            }
            Ok((0..width).map(|i| i < 64 && (v >> i) & 1 == 1).collect())
        }
        ColumnKind::Text => {
            let bytes = text.as_bytes();
            if bytes.len() * 8 > width {
                return Err(Error::Format(format!("`{text}` is longer than {} bytes", width / 8)));
            }
            let mut bits = Vec::with_capacity(width);
            for i in 0..width / 8 {
                let b = bytes.get(i).copied().unwrap_or(0);
                bits.extend((0..8).map(|k| (b >> k) & 1 == 1));
            }
            Ok(bits)
        }
    }
}

/// Renders a record's fields back to text.
pub fn decode_record(schema: &TableSchema, bits: &[bool]) -> Vec<String> {
    let mut at = 0;
    schema
        .columns
        .iter()
        .map(|c| {
            let field = &bits[at..at + c.width_bits];
            at += c.width_bits;
            match c.kind {
                ColumnKind::Int => blindgate_oracle::bits_to_u64(field).to_string(),
                ColumnKind::Text => {
                    let bytes: Vec<u8> = field
                        .chunks(8)
                        .map(|ch| ch.iter().enumerate().fold(0u8, |a, (k, &b)| a | (u8::from(b) << k)))
                        .take_while(|&b| b != 0)
                        .collect();
                    String::from_utf8_lossy(&bytes).into_owned()
                }
            }
        })
        .collect()
}

/// Reads a CSV with a header row; columns are matched by name.
pub fn read_csv<R: Read>(schema: &TableSchema, input: R) -> Result<PlainTable> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let headers = rdr.headers().map_err(|e| Error::Format(e.to_string()))?.clone();
    let positions = schema
        .columns
        .iter()
        .map(|c| {
            headers
                .iter()
                .position(|h| h == c.name)
                .ok_or_else(|| Error::UnknownColumn(c.name.clone()))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::Format(e.to_string()))?;
        let mut bits = Vec::with_capacity(schema.record_width());
        for (c, &pos) in schema.columns.iter().zip(&positions) {
            let text = rec.get(pos).unwrap_or("");
            bits.extend(encode_field(c.kind, c.width_bits, text)?);
        }
        rows.push(bits);
    }
    Ok(PlainTable {
        schema: schema.clone(),
        rows,
    })
}

pub fn parse_schema(json: &str) -> Result<TableSchema> {
    let schema: TableSchema = serde_json::from_str(json)?;
    schema.validate().map_err(|e| Error::Format(e.to_string()))?;
    Ok(schema)
}
