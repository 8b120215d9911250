//! Line-oriented text format:
//!
//! ```text
//! # key = value
//! vertices N
//! positions D
//! v x_1 … x_D
//! edges M
//! u v c
//! ```
//!
//! The position block is optional. Reals are written in shortest
//! round-trip form, so reading back reproduces every bit.

use std::io::{BufRead, Write};

use super::WeightedNetwork;
use crate::error::{Error, Result};

/// A network plus the `# key = value` header lines.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct NetworkDocument {
    pub metadata: Vec<(String, String)>,
    pub network: WeightedNetwork,
}

impl NetworkDocument {
    pub fn new(network: WeightedNetwork) -> Self {
        NetworkDocument {
            metadata: Vec::new(),
            network,
        }
    }

    pub fn with_meta(mut self, key: impl Into<String>, value: impl ToString) -> Self {
        self.metadata.push((key.into(), value.to_string()));
        self
    }

    pub fn meta(&self, key: &str) -> Option<&str> {
        self.metadata
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }
}

pub fn write_network<W: Write>(out: &mut W, doc: &NetworkDocument) -> Result<()> {
    for (k, v) in &doc.metadata {
        writeln!(out, "# {k} = {v}")?;
    }
    let net = &doc.network;
    writeln!(out, "vertices {}", net.vertex_count())?;
    if let Some(p) = net.positions() {
        writeln!(out, "positions {}", p.dim())?;
        for v in 0..net.vertex_count() {
            write!(out, "{v}")?;
            for c in p.of(v) {
                write!(out, " {c}")?;
            }
            writeln!(out)?;
        }
    }
    writeln!(out, "edges {}", net.edges().len())?;
    for e in net.edges() {
        writeln!(out, "{} {} {}", e.u, e.v, e.conductance)?;
    }
    Ok(())
}

fn parse_field<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T> {
    let tok = tok.ok_or_else(|| Error::parse(line, format!("missing {what}")))?;
    tok.parse()
        .map_err(|_| Error::parse(line, format!("cannot parse {what} from '{tok}'")))
}

fn expect_keyword<'a>(
    lines: &mut impl Iterator<Item = (usize, String)>,
    keyword: &str,
) -> Result<(usize, Option<String>)> {
    let (no, text) = lines
        .next()
        .ok_or_else(|| Error::parse(0, format!("unexpected end of input, expected '{keyword}'")))?;
    let mut toks = text.split_whitespace();
    if toks.next() != Some(keyword) {
        return Err(Error::parse(no, format!("expected '{keyword}'")));
    }
    Ok((no, toks.next().map(str::to_string)))
}

pub fn read_network<R: BufRead>(input: R) -> Result<NetworkDocument> {
    let mut metadata = Vec::new();
    let mut body = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        let no = i + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(comment) = trimmed.strip_prefix('#') {
            if let Some((k, v)) = comment.split_once('=') {
                metadata.push((k.trim().to_string(), v.trim().to_string()));
            }
            continue;
        }
        body.push((no, trimmed.to_string()));
    }
    let mut lines = body.into_iter().peekable();
    let (no, n) = expect_keyword(&mut lines, "vertices")?;
    let n: usize = parse_field(n.as_deref(), no, "vertex count")?;
    let mut net = WeightedNetwork::new(n);

    if lines.peek().is_some_and(|(_, t)| t.starts_with("positions")) {
        let (no, d) = expect_keyword(&mut lines, "positions")?;
        let d: usize = parse_field(d.as_deref(), no, "position dimension")?;
        let mut coords = vec![Vec::new(); n];
        let mut seen = vec![false; n];
        for _ in 0..n {
            let (no, text) = lines
                .next()
                .ok_or_else(|| Error::parse(no, "position table ends early"))?;
            let mut toks = text.split_whitespace();
            let v: usize = parse_field(toks.next(), no, "vertex")?;
            if v >= n || seen[v] {
                return Err(Error::parse(no, format!("bad or repeated vertex {v}")));
            }
            seen[v] = true;
            coords[v] = (0..d)
                .map(|_| parse_field(toks.next(), no, "coordinate"))
                .collect::<Result<_>>()?;
            if toks.next().is_some() {
                return Err(Error::parse(no, "trailing tokens"));
            }
        }
        net.set_positions(d, coords)?;
    }

    let (no, m) = expect_keyword(&mut lines, "edges")?;
    let m: usize = parse_field(m.as_deref(), no, "edge count")?;
    for _ in 0..m {
        let (no, text) = lines
            .next()
            .ok_or_else(|| Error::parse(no, "edge list ends early"))?;
        let mut toks = text.split_whitespace();
        let u: usize = parse_field(toks.next(), no, "endpoint")?;
        let v: usize = parse_field(toks.next(), no, "endpoint")?;
        let c: f64 = parse_field(toks.next(), no, "conductance")?;
        if toks.next().is_some() {
            return Err(Error::parse(no, "trailing tokens"));
        }
        net.add_edge(u, v, c).map_err(|e| Error::parse(no, e.to_string()))?;
    }
    if let Some((no, _)) = lines.next() {
        return Err(Error::parse(no, "content after the edge list"));
    }
    Ok(NetworkDocument { metadata, network: net })
}
