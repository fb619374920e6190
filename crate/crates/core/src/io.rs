//! Edge-list text format.
//!
//! One undirected edge per line, `u v w`, with integer vertex ids and a
//! positive decimal conductance. Lines starting with `#` are comments. A
//! comment of the form `# boundary: 3 17 42` records the frontier vertices;
//! readers that do not know the directive still see a valid comment.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;

const BOUNDARY_DIRECTIVE: &str = "boundary:";

pub fn read_edge_list<R: BufRead>(reader: R) -> Result<WeightedGraph> {
    let mut edges = Vec::new();
    let mut frontier = Vec::new();
    let mut max_id = 0usize;

    for (index, line) in reader.lines().enumerate() {
        let line = line?;
        let number = index + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(comment) = trimmed.strip_prefix('#') {
            if let Some(list) = comment.trim().strip_prefix(BOUNDARY_DIRECTIVE) {
                for token in list.split_whitespace() {
                    frontier.push(parse_id(token, number)?);
                }
            }
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(Error::Parse {
                line: number,
                message: format!("expected `u v w`, found {} fields", fields.len()),
            });
        }
        let u = parse_id(fields[0], number)?;
        let v = parse_id(fields[1], number)?;
        let w: f64 = fields[2].parse().map_err(|_| Error::Parse {
            line: number,
            message: format!("bad weight `{}`", fields[2]),
        })?;
        if !(w.is_finite() && w > 0.0) {
            return Err(Error::Parse {
                line: number,
                message: format!("weight must be positive, got {w}"),
            });
        }
        max_id = max_id.max(u).max(v);
        edges.push((u, v, w));
    }

    if edges.is_empty() {
        return Err(Error::Parse {
            line: 0,
            message: "no edges".into(),
        });
    }
    WeightedGraph::from_edges(max_id + 1, edges)?.with_frontier(frontier)
}

fn parse_id(token: &str, line: usize) -> Result<usize> {
    token.parse().map_err(|_| Error::Parse {
        line,
        message: format!("bad vertex id `{token}`"),
    })
}

pub fn write_edge_list<W: Write>(g: &WeightedGraph, mut out: W) -> Result<()> {
    writeln!(out, "# vertices {} edges {}", g.vertex_count(), g.edge_count())?;
    if !g.frontier().is_empty() {
        let ids: Vec<String> = g.frontier().iter().map(|v| v.to_string()).collect();
        writeln!(out, "# {BOUNDARY_DIRECTIVE} {}", ids.join(" "))?;
    }
    for (u, v, w) in g.edges() {
        writeln!(out, "{u} {v} {w}")?;
    }
    out.flush()?;
    Ok(())
}

pub fn load(path: impl AsRef<Path>) -> Result<WeightedGraph> {
    read_edge_list(BufReader::new(File::open(path)?))
}

pub fn save(g: &WeightedGraph, path: impl AsRef<Path>) -> Result<()> {
    write_edge_list(g, BufWriter::new(File::create(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_boundary() {
        let text = "# a triangle\n# boundary: 2\n0 1 1.5\n1 2 1\n\n2 0 0.25\n";
        let g = read_edge_list(text.as_bytes()).unwrap();
        assert_eq!(g.vertex_count(), 3);
        assert_eq!(g.edge_count(), 3);
        assert_eq!(g.frontier(), &[2]);
        assert_eq!(g.conductance(0, 2), Some(0.25));
    }

    #[test]
    fn round_trip_is_exact() {
        let g = WeightedGraph::from_edges(4, [(0, 1, 0.1), (1, 2, 1.0 / 3.0), (2, 3, 7.0)])
            .unwrap()
            .with_frontier(vec![3])
            .unwrap();
        let mut buf = Vec::new();
        write_edge_list(&g, &mut buf).unwrap();
        let back = read_edge_list(buf.as_slice()).unwrap();
        assert_eq!(back.edges().collect::<Vec<_>>(), g.edges().collect::<Vec<_>>());
        assert_eq!(back.frontier(), g.frontier());
    }

    #[test]
    fn rejects_malformed_lines() {
        assert!(matches!(
            read_edge_list("0 1\n".as_bytes()),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            read_edge_list("0 1 -2\n".as_bytes()),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            read_edge_list("0 1 1\n2 3 1\n".as_bytes()),
            Err(Error::Disconnected { .. })
        ));
    }
}
