//! Plain-text input formats.
//!
//! * forest: header `n m`, then `m` lines `u v [weight]`
//! * vertex weights: lines `v w`
//! * batch: lines `+ u v [w]` (link) or `- u v` (cut)
//! * chains: one sequence per line, tokens `id:value`
//! * values: whitespace-separated integers
//! * queries: lines `connected u v`, `repr v`, `subtree r u`, `pathmax u v`
//!
//! Blank lines and lines starting with `#` are ignored everywhere.

use std::path::Path;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

fn parse_err(line: usize, message: impl Into<String>) -> FormatError {
    FormatError::Parse {
        line,
        message: message.into(),
    }
}

pub fn read(path: &Path) -> Result<String, FormatError> {
    std::fs::read_to_string(path).map_err(|source| FormatError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Non-blank, non-comment lines with 1-based line numbers.
fn lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn num<T: FromStr>(line: usize, tok: Option<&str>, what: &str) -> Result<T, FormatError> {
    let tok = tok.ok_or_else(|| parse_err(line, format!("missing {what}")))?;
    tok.parse()
        .map_err(|_| parse_err(line, format!("bad {what} {tok:?}")))
}

fn done<'a>(line: usize, mut toks: impl Iterator<Item = &'a str>) -> Result<(), FormatError> {
    match toks.next() {
        Some(t) => Err(parse_err(line, format!("unexpected {t:?}"))),
        None => Ok(()),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ForestFile {
    pub n: u32,
    pub edges: Vec<(u32, u32, i64)>,
}

pub fn parse_forest(text: &str) -> Result<ForestFile, FormatError> {
    let mut it = lines(text);
    let (l, header) = it
        .next()
        .ok_or_else(|| parse_err(1, "missing header `n m`"))?;
    let mut toks = header.split_whitespace();
    let n: u32 = num(l, toks.next(), "vertex count")?;
    let m: usize = num(l, toks.next(), "edge count")?;
    done(l, toks)?;
    let mut edges = Vec::with_capacity(m);
    for (l, line) in it {
        let mut toks = line.split_whitespace();
        let u = num(l, toks.next(), "endpoint")?;
        let v = num(l, toks.next(), "endpoint")?;
        let w = match toks.next() {
            Some(t) => num(l, Some(t), "weight")?,
            None => 0,
        };
        done(l, toks)?;
        edges.push((u, v, w));
    }
    if edges.len() != m {
        return Err(parse_err(
            l,
            format!("header promises {m} edges, found {}", edges.len()),
        ));
    }
    Ok(ForestFile { n, edges })
}

/// Weights for vertices `0..n`; unlisted vertices weigh zero.
pub fn parse_weights(text: &str, n: u32) -> Result<Vec<i64>, FormatError> {
    let mut out = vec![0; n as usize];
    for (l, line) in lines(text) {
        let mut toks = line.split_whitespace();
        let v: u32 = num(l, toks.next(), "vertex")?;
        let w = num(l, toks.next(), "weight")?;
        done(l, toks)?;
        *out.get_mut(v as usize)
            .ok_or_else(|| parse_err(l, format!("vertex {v} out of range")))? = w;
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BatchOp {
    Link(u32, u32, i64),
    Cut(u32, u32),
}

pub fn parse_batch(text: &str) -> Result<Vec<BatchOp>, FormatError> {
    lines(text)
        .map(|(l, line)| {
            let mut toks = line.split_whitespace();
            let op = toks.next().unwrap_or_default();
            let u = num(l, toks.next(), "endpoint")?;
            let v = num(l, toks.next(), "endpoint")?;
            let out = match op {
                "+" => {
                    let w = match toks.next() {
                        Some(t) => num(l, Some(t), "weight")?,
                        None => 0,
                    };
                    BatchOp::Link(u, v, w)
                }
                "-" => BatchOp::Cut(u, v),
                _ => return Err(parse_err(l, format!("expected `+` or `-`, got {op:?}"))),
            };
            done(l, toks)?;
            Ok(out)
        })
        .collect()
}

pub fn parse_chains(text: &str) -> Result<Vec<Vec<(u32, i64)>>, FormatError> {
    lines(text)
        .map(|(l, line)| {
            line.split_whitespace()
                .map(|tok| {
                    let (id, value) = tok
                        .split_once(':')
                        .ok_or_else(|| parse_err(l, format!("expected id:value, got {tok:?}")))?;
                    Ok((num(l, Some(id), "id")?, num(l, Some(value), "value")?))
                })
                .collect()
        })
        .collect()
}

pub fn parse_values(text: &str) -> Result<Vec<i64>, FormatError> {
    lines(text)
        .flat_map(|(l, line)| {
            line.split_whitespace()
                .map(move |t| num(l, Some(t), "value"))
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Query {
    Connected(u32, u32),
    Repr(u32),
    Subtree { root: u32, vertex: u32 },
    PathMax(u32, u32),
}

impl FromStr for Query {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let toks: Vec<&str> = s.split_whitespace().collect();
        let ids: Result<Vec<u32>, _> = toks.iter().skip(1).map(|t| t.parse::<u32>()).collect();
        let ids = ids.map_err(|_| format!("bad vertex in {s:?}"))?;
        match (toks.first().copied(), &ids[..]) {
            (Some("connected"), &[u, v]) => Ok(Query::Connected(u, v)),
            (Some("repr"), &[v]) => Ok(Query::Repr(v)),
            (Some("subtree"), &[root, vertex]) => Ok(Query::Subtree { root, vertex }),
            (Some("pathmax"), &[u, v]) => Ok(Query::PathMax(u, v)),
            _ => Err(format!("bad query {s:?}")),
        }
    }
}

pub fn parse_queries(text: &str) -> Result<Vec<Query>, FormatError> {
    lines(text)
        .map(|(l, line)| line.parse().map_err(|m: String| parse_err(l, m)))
        .collect()
}

/// Renders a forest in the format `parse_forest` reads.
pub fn write_forest(n: u32, edges: &[(u32, u32, i64)]) -> String {
    let mut s = format!("{n} {}\n", edges.len());
    for (u, v, w) in edges {
        s.push_str(&format!("{u} {v} {w}\n"));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forest_file() {
        let f = parse_forest("# tiny\n3 2\n0 1 5\n\n1 2\n").unwrap();
        assert_eq!(
            f,
            ForestFile {
                n: 3,
                edges: vec![(0, 1, 5), (1, 2, 0)]
            }
        );
        assert_eq!(parse_forest(&write_forest(3, &f.edges)).unwrap(), f);
        assert!(matches!(
            parse_forest("3 2\n0 1\n"),
            Err(FormatError::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_forest("3 1\n0 x\n"),
            Err(FormatError::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn other_formats() {
        assert_eq!(parse_weights("0 4\n2 -1\n", 3).unwrap(), [4, 0, -1]);
        assert!(parse_weights("5 1\n", 3).is_err());
        assert_eq!(
            parse_batch("+ 0 1 3\n- 2 3\n+ 4 5\n").unwrap(),
            [
                BatchOp::Link(0, 1, 3),
                BatchOp::Cut(2, 3),
                BatchOp::Link(4, 5, 0)
            ]
        );
        assert!(parse_batch("* 0 1\n").is_err());
        assert_eq!(
            parse_chains("0:5 2:-1\n1:7\n").unwrap(),
            [vec![(0, 5), (2, -1)], vec![(1, 7)]]
        );
        assert_eq!(parse_values("1 2\n3\n").unwrap(), [1, 2, 3]);
        assert_eq!(
            parse_queries("connected 3 9\nrepr 4\nsubtree 0 2\npathmax 1 2\n").unwrap(),
            [
                Query::Connected(3, 9),
                Query::Repr(4),
                Query::Subtree { root: 0, vertex: 2 },
                Query::PathMax(1, 2)
            ]
        );
        assert!("repr 1 2".parse::<Query>().is_err());
    }
}
