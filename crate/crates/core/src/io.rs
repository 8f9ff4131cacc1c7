//! Table and coefficient file formats.
//!
//! * CSV: header `Ki,Li,Kf,Lf,value`, one canonical entry per row.
//! * JSON: `{irrep, basis, entries: [{Ki,Li,Kf,Lf,value}], meta: {version, warnings}}`.
//! * Coupling coefficients: a `su3cg λ μ` header, then
//!   `alpha_K L beta_K Lp value` lines; `#` starts a comment.

use std::io::{BufRead, Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kbasis::CgCoefficients;
use crate::su3::{IrrepLabel, KLState};
use crate::table::{BasisChoice, ReducedMatrixTable};

/// How values are printed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ValueFormat {
    /// Significant digits; `0` prints the shortest string that parses back exactly.
    pub precision: usize,
    pub scientific: bool,
}

impl Default for ValueFormat {
    fn default() -> Self {
        ValueFormat { precision: 9, scientific: false }
    }
}

impl ValueFormat {
    pub fn exact() -> Self {
        ValueFormat { precision: 0, scientific: false }
    }

    pub fn format(&self, v: f64) -> String {
        if self.precision == 0 {
            return format!("{v}");
        }
        if self.scientific {
            return format!("{:.*e}", self.precision - 1, v);
        }
        if v == 0.0 {
            return "0".to_string();
        }
        let magnitude = v.abs().log10().floor() as i64;
        let decimals = (self.precision as i64 - 1 - magnitude).max(0) as usize;
        format!("{v:.decimals$}")
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[allow(non_snake_case)]
struct Row {
    Ki: u32,
    Li: u32,
    Kf: u32,
    Lf: u32,
    value: f64,
}

pub fn write_csv<W: Write>(table: &ReducedMatrixTable, fmt: ValueFormat, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["Ki", "Li", "Kf", "Lf", "value"]).map_err(csv_err)?;
    for (bra, ket, v) in table.entries() {
        w.write_record([
            ket.k.to_string(),
            ket.l.to_string(),
            bra.k.to_string(),
            bra.l.to_string(),
            fmt.format(v),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn csv_string(table: &ReducedMatrixTable, fmt: ValueFormat) -> String {
    let mut buf = Vec::new();
    write_csv(table, fmt, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("csv output is utf-8")
}

fn csv_err(e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
    Error::Parse { line, msg: e.to_string() }
}

pub fn read_csv<R: Read>(input: R, irrep: IrrepLabel, basis: BasisChoice) -> Result<ReducedMatrixTable> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let mut t = ReducedMatrixTable::new(irrep, basis);
    for row in r.deserialize::<Row>() {
        let row = row.map_err(csv_err)?;
        t.insert(KLState::new(row.Kf, row.Lf), KLState::new(row.Ki, row.Li), row.value);
    }
    Ok(t)
}

#[derive(Debug, Serialize, Deserialize)]
pub struct JsonMeta {
    pub version: String,
    pub warnings: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct JsonTable {
    irrep: IrrepLabel,
    basis: BasisChoice,
    entries: Vec<Row>,
    meta: JsonMeta,
}

pub fn json_string(table: &ReducedMatrixTable, warnings: &[String]) -> String {
    let doc = JsonTable {
        irrep: table.irrep,
        basis: table.basis,
        entries: table
            .entries()
            .map(|(bra, ket, value)| Row { Ki: ket.k, Li: ket.l, Kf: bra.k, Lf: bra.l, value })
            .collect(),
        meta: JsonMeta { version: env!("CARGO_PKG_VERSION").to_string(), warnings: warnings.to_vec() },
    };
    serde_json::to_string_pretty(&doc).expect("table serializes") + "\n"
}

pub fn read_json<R: Read>(input: R) -> Result<(ReducedMatrixTable, JsonMeta)> {
    let doc: JsonTable = serde_json::from_reader(input)?;
    let mut t = ReducedMatrixTable::new(doc.irrep, doc.basis);
    for e in doc.entries {
        t.insert(KLState::new(e.Kf, e.Lf), KLState::new(e.Ki, e.Li), e.value);
    }
    Ok((t, doc.meta))
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

/// Parse a coupling-coefficient file.
pub fn read_cg<R: BufRead>(input: R) -> Result<CgCoefficients> {
    let mut out = CgCoefficients::default();
    for (n, line) in input.lines().enumerate() {
        let lineno = n + 1;
        let line = line?;
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let fields: Vec<&str> = body.split_whitespace().collect();
        if fields[0] == "su3cg" {
            if out.irrep.is_some() {
                return Err(parse_err(lineno, "duplicate su3cg header"));
            }
            if fields.len() != 3 {
                return Err(parse_err(lineno, "header must be `su3cg <lambda> <mu>`"));
            }
            let num = |s: &str| s.parse::<u32>().map_err(|_| parse_err(lineno, format!("bad irrep label `{s}`")));
            out.irrep = Some(IrrepLabel::new(num(fields[1])?, num(fields[2])?));
            continue;
        }
        if out.irrep.is_none() {
            return Err(parse_err(lineno, "data before the su3cg header"));
        }
        if fields.len() != 5 {
            return Err(parse_err(lineno, format!("expected 5 fields, found {}", fields.len())));
        }
        let int = |s: &str| s.parse::<u32>().map_err(|_| parse_err(lineno, format!("bad integer `{s}`")));
        let (alpha, l, beta, lp) = (int(fields[0])?, int(fields[1])?, int(fields[2])?, int(fields[3])?);
        let value: f64 = fields[4].parse().map_err(|_| parse_err(lineno, format!("bad value `{}`", fields[4])))?;
        if !value.is_finite() {
            return Err(parse_err(lineno, "value is not finite"));
        }
        let key = (KLState::new(alpha, l), KLState::new(beta, lp));
        if out.values.insert(key, (value, lineno)).is_some() {
            return Err(parse_err(lineno, "duplicate coefficient"));
        }
    }
    if out.irrep.is_none() {
        return Err(parse_err(0, "missing su3cg header"));
    }
    Ok(out)
}

/// Write coefficients with 17 significant digits.
pub fn write_cg<W: Write>(cg: &CgCoefficients, mut out: W) -> Result<()> {
    let irrep = cg.irrep.ok_or_else(|| parse_err(0, "coefficients carry no irrep"))?;
    writeln!(out, "# ((lambda mu) alpha L; (11) 2 || (lambda mu) beta Lp)")?;
    writeln!(out, "su3cg {} {}", irrep.lambda, irrep.mu)?;
    for (&(ket, bra), &(v, _)) in &cg.values {
        writeln!(out, "{} {} {} {} {:.16e}", ket.k, ket.l, bra.k, bra.l, v)?;
    }
    Ok(())
}
