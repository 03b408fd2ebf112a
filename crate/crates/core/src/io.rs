//! Plain-text formats.
//!
//! Hypergraph: header `r n e`, then one edge per line as space-separated
//! vertex ids, edges sorted lexicographically. Cycle family: one copy per
//! line as edge indexes into the host's canonical order. Container family:
//! manifest `count n r`, then per container a line with its edge count
//! followed by its edge indexes. Lines starting with `#` and blank lines are
//! ignored by the readers.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::bitset::BitSet;
use crate::cycles::CycleFamily;
use crate::error::{Error, Result};
use crate::hypergraph::{Hypergraph, Vertex};

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

/// Non-comment lines with their 1-based line numbers.
fn content_lines(r: impl Read) -> Result<Vec<(usize, String)>> {
    let mut out = Vec::new();
    for (i, line) in BufReader::new(r).lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if !t.is_empty() && !t.starts_with('#') {
            out.push((i + 1, t.to_string()));
        }
    }
    Ok(out)
}

fn numbers<T: std::str::FromStr>(line: usize, s: &str) -> Result<Vec<T>> {
    s.split_whitespace()
        .map(|tok| tok.parse().map_err(|_| parse_err(line, format!("not a number: {tok:?}"))))
        .collect()
}

pub fn write_hypergraph(mut w: impl Write, g: &Hypergraph) -> Result<()> {
    writeln!(w, "{} {} {}", g.uniformity(), g.vertex_count(), g.edge_count())?;
    for e in g.edges() {
        let line: Vec<String> = e.iter().map(Vertex::to_string).collect();
        writeln!(w, "{}", line.join(" "))?;
    }
    Ok(())
}

pub fn read_hypergraph(r: impl Read) -> Result<Hypergraph> {
    let lines = content_lines(r)?;
    let Some((hl, header)) = lines.first() else {
        return Err(parse_err(1, "missing header `r n e`"));
    };
    let head: Vec<usize> = numbers(*hl, header)?;
    let [r, n, e] = head[..] else {
        return Err(parse_err(*hl, "header must be `r n e`"));
    };
    if lines.len() - 1 != e {
        return Err(parse_err(*hl, format!("header declares {e} edges, found {}", lines.len() - 1)));
    }
    let mut edges = Vec::with_capacity(e);
    for (ln, s) in &lines[1..] {
        let edge: Vec<Vertex> = numbers(*ln, s)?;
        if edge.len() != r {
            return Err(parse_err(*ln, format!("expected {r} vertices, found {}", edge.len())));
        }
        edges.push(edge);
    }
    Hypergraph::from_edges(r, n, edges)
}

pub fn load_hypergraph(path: impl AsRef<Path>) -> Result<Hypergraph> {
    read_hypergraph(File::open(path)?)
}

pub fn save_hypergraph(path: impl AsRef<Path>, g: &Hypergraph) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_hypergraph(&mut w, g)?;
    w.flush()?;
    Ok(())
}

pub fn write_cycle_family(mut w: impl Write, family: &CycleFamily) -> Result<()> {
    for c in family.copies() {
        let line: Vec<String> = c.iter().map(u32::to_string).collect();
        writeln!(w, "{}", line.join(" "))?;
    }
    Ok(())
}

pub fn read_cycle_family(r: impl Read, k: usize, host_edges: usize) -> Result<CycleFamily> {
    let mut copies = Vec::new();
    for (ln, s) in content_lines(r)? {
        let c: Vec<u32> = numbers(ln, &s)?;
        if c.len() != k {
            return Err(parse_err(ln, format!("expected {k} edge indexes, found {}", c.len())));
        }
        if let Some(&x) = c.iter().find(|&&x| x as usize >= host_edges) {
            return Err(parse_err(ln, format!("edge index {x} outside host of {host_edges} edges")));
        }
        copies.push(c);
    }
    Ok(CycleFamily::new(k, host_edges, copies))
}

pub fn write_container_family(mut w: impl Write, n: usize, r: usize, containers: &[BitSet]) -> Result<()> {
    writeln!(w, "{} {} {}", containers.len(), n, r)?;
    for c in containers {
        let mut line = vec![c.count().to_string()];
        line.extend(c.iter().map(|i| i.to_string()));
        writeln!(w, "{}", line.join(" "))?;
    }
    Ok(())
}

/// Returns `(n, r, containers)`; containers index a host with `host_edges` edges.
pub fn read_container_family(r: impl Read, host_edges: usize) -> Result<(usize, usize, Vec<BitSet>)> {
    let lines = content_lines(r)?;
    let Some((hl, header)) = lines.first() else {
        return Err(parse_err(1, "missing manifest `count n r`"));
    };
    let head: Vec<usize> = numbers(*hl, header)?;
    let [count, n, rr] = head[..] else {
        return Err(parse_err(*hl, "manifest must be `count n r`"));
    };
    if lines.len() - 1 != count {
        return Err(parse_err(*hl, format!("manifest declares {count} containers, found {}", lines.len() - 1)));
    }
    let mut out = Vec::with_capacity(count);
    for (ln, s) in &lines[1..] {
        let v: Vec<usize> = numbers(*ln, s)?;
        let Some((&size, idx)) = v.split_first() else {
            return Err(parse_err(*ln, "empty container line"));
        };
        if idx.len() != size {
            return Err(parse_err(*ln, format!("declares {size} edges, lists {}", idx.len())));
        }
        if let Some(&x) = idx.iter().find(|&&x| x >= host_edges) {
            return Err(parse_err(*ln, format!("edge index {x} outside host of {host_edges} edges")));
        }
        out.push(BitSet::from_indices(host_edges, idx.iter().copied()));
    }
    Ok((n, rr, out))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hypergraph_round_trip_is_canonical() {
        let g = Hypergraph::from_edges(3, 6, [[5, 1, 2], [0, 1, 2], [3, 4, 5]]).unwrap();
        let mut buf = Vec::new();
        write_hypergraph(&mut buf, &g).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), "3 6 3\n0 1 2\n1 2 5\n3 4 5\n");
        assert_eq!(read_hypergraph(&buf[..]).unwrap(), g);
    }

    #[test]
    fn parse_errors_name_the_line() {
        let err = read_hypergraph("3 5 2\n0 1 2\n# note\n0 1\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 4, .. }), "{err}");
        let err = read_hypergraph("3 5 2\n0 1 2\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        assert!(read_hypergraph("3 5 1\n0 1 9\n".as_bytes()).is_err());
    }

    #[test]
    fn container_round_trip() {
        let cs = vec![BitSet::from_indices(10, [0, 3, 9]), BitSet::new(10)];
        let mut buf = Vec::new();
        write_container_family(&mut buf, 5, 2, &cs).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), "2 5 2\n3 0 3 9\n0\n");
        let (n, r, back) = read_container_family(&buf[..], 10).unwrap();
        assert_eq!((n, r), (5, 2));
        assert_eq!(back, cs);
    }

    #[test]
    fn cycle_family_round_trip() {
        let f = CycleFamily::new(4, 6, vec![vec![0, 1, 2, 3], vec![1, 2, 4, 5]]);
        let mut buf = Vec::new();
        write_cycle_family(&mut buf, &f).unwrap();
        let back = read_cycle_family(&buf[..], 4, 6).unwrap();
        assert_eq!(back.copies(), f.copies());
        assert!(read_cycle_family("0 1 2\n".as_bytes(), 4, 6).is_err());
    }
}
