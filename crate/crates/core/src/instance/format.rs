//! Line-oriented instance files.
//!
//! ```text
//! DMDGP <n> <K>
//! INIT <v> <c1> … <cK>     (v = 1…K)
//! EDGE <u> <v> <d>
//! ```
//!
//! `#` starts a comment. Reals are written with 17 significant digits.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use thiserror::Error;

use super::{DgpInstance, InstanceError};
use crate::embedding::fmt_real;
use crate::geometry::Point;

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("missing DMDGP header")]
    MissingHeader,
    #[error("missing INIT line for vertex {0}")]
    MissingInit(usize),
    #[error("line {line}: {source}")]
    Instance { line: usize, source: InstanceError },
    #[error(transparent)]
    Io(#[from] io::Error),
}

pub fn write_instance<W: Write>(inst: &DgpInstance, mut w: W) -> io::Result<()> {
    writeln!(w, "DMDGP {} {}", inst.n(), inst.dim())?;
    for (i, p) in inst.initial().iter().enumerate() {
        write!(w, "INIT {}", i + 1)?;
        for c in p.coords() {
            write!(w, " {}", fmt_real(*c))?;
        }
        writeln!(w)?;
    }
    for (u, v, d) in inst.edges() {
        writeln!(w, "EDGE {u} {v} {}", fmt_real(d))?;
    }
    Ok(())
}

pub fn to_instance_string(inst: &DgpInstance) -> String {
    let mut buf = Vec::new();
    write_instance(inst, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("instance output is ASCII")
}

pub fn write_instance_file(inst: &DgpInstance, path: impl AsRef<Path>) -> io::Result<()> {
    fs::write(path, to_instance_string(inst))
}

pub fn read_instance(path: impl AsRef<Path>) -> Result<DgpInstance, ParseError> {
    parse_instance(&fs::read_to_string(path)?)
}

pub fn parse_instance(text: &str) -> Result<DgpInstance, ParseError> {
    let malformed = |line: usize, message: &str| ParseError::Malformed {
        line,
        message: message.to_string(),
    };
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, raw)| (i + 1, raw.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());

    let (hline, header) = lines.next().ok_or(ParseError::MissingHeader)?;
    let mut tok = header.split_whitespace();
    if tok.next() != Some("DMDGP") {
        return Err(ParseError::MissingHeader);
    }
    let mut int = |what: &str| -> Result<usize, ParseError> {
        tok.next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| malformed(hline, &format!("header: bad or missing {what}")))
    };
    let n = int("n")?;
    let k = int("K")?;
    if tok.next().is_some() {
        return Err(malformed(hline, "header: trailing tokens"));
    }

    let mut initial: Vec<Option<Point>> = vec![None; k];
    let mut edges: Vec<(usize, usize, usize, f64)> = Vec::new();
    for (lineno, line) in lines {
        let mut tok = line.split_whitespace();
        let record = tok.next().unwrap_or_default();
        let fields: Vec<&str> = tok.collect();
        match record {
            "INIT" => {
                if fields.len() != k + 1 {
                    return Err(malformed(lineno, &format!("INIT needs a vertex and {k} coordinates")));
                }
                let v: usize = fields[0].parse().map_err(|_| malformed(lineno, "bad INIT vertex"))?;
                if v < 1 || v > k {
                    return Err(malformed(lineno, &format!("INIT vertex {v} outside 1..={k}")));
                }
                if initial[v - 1].is_some() {
                    return Err(malformed(lineno, &format!("duplicate INIT for vertex {v}")));
                }
                let coords = fields[1..]
                    .iter()
                    .map(|t| t.parse::<f64>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|_| malformed(lineno, "bad INIT coordinate"))?;
                initial[v - 1] = Some(Point::new(coords));
            }
            "EDGE" => {
                if fields.len() != 3 {
                    return Err(malformed(lineno, "EDGE needs u v d"));
                }
                let u: usize = fields[0].parse().map_err(|_| malformed(lineno, "bad EDGE vertex"))?;
                let v: usize = fields[1].parse().map_err(|_| malformed(lineno, "bad EDGE vertex"))?;
                let d: f64 = fields[2].parse().map_err(|_| malformed(lineno, "bad EDGE distance"))?;
                edges.push((lineno, u, v, d));
            }
            "DMDGP" => return Err(malformed(lineno, "repeated header")),
            other => return Err(malformed(lineno, &format!("unknown record {other:?}"))),
        }
    }

    let initial = initial
        .into_iter()
        .enumerate()
        .map(|(i, p)| p.ok_or(ParseError::MissingInit(i + 1)))
        .collect::<Result<Vec<_>, _>>()?;
    let mut inst = DgpInstance::new(n, k, initial).map_err(|source| ParseError::Instance { line: hline, source })?;
    for (line, u, v, d) in edges {
        inst.add_edge(u, v, d)
            .map_err(|source| ParseError::Instance { line, source })?;
    }
    Ok(inst)
}
