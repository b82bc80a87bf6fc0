//! Text formats: the graph file format and robber move scripts.
//!
//! Graph files: line 1 holds the vertex count `n`; each following line is
//! either `u v` (a base edge) or `u v L` (an edge with its subdivision
//! length). Indices are 0-based, `#` starts a comment, blank lines are
//! skipped. Length and no-length lines must not be mixed.

use crate::error::ParseError;
use crate::graph::Graph;
use crate::subdivision::SubdividedGraph;

/// Parses the graph text format. Returns the graph and, when every edge
/// line carried one, the per-edge lengths in canonical edge order.
pub fn parse_graph_text(text: &str) -> Result<(Graph, Option<Vec<u32>>), ParseError> {
    let mut n: Option<u32> = None;
    let mut raw_edges: Vec<(u32, u32, Option<u32>, usize)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = match raw.find('#') {
            Some(p) => &raw[..p],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if n.is_none() {
            if fields.len() != 1 {
                return Err(ParseError::at(lineno, "expected the vertex count"));
            }
            let v: u32 = fields[0]
                .parse()
                .map_err(|_| ParseError::at(lineno, format!("bad vertex count {:?}", fields[0])))?;
            n = Some(v);
            continue;
        }
        let parse_u32 = |s: &str| -> Result<u32, ParseError> {
            s.parse()
                .map_err(|_| ParseError::at(lineno, format!("bad number {s:?}")))
        };
        match fields.len() {
            2 => raw_edges.push((parse_u32(fields[0])?, parse_u32(fields[1])?, None, lineno)),
            3 => raw_edges.push((
                parse_u32(fields[0])?,
                parse_u32(fields[1])?,
                Some(parse_u32(fields[2])?),
                lineno,
            )),
            _ => return Err(ParseError::at(lineno, "expected 'u v' or 'u v L'")),
        }
    }
    let n = n.ok_or(ParseError::Empty)?;

    let with_lengths = raw_edges.iter().filter(|e| e.2.is_some()).count();
    if with_lengths != 0 && with_lengths != raw_edges.len() {
        let line = raw_edges
            .iter()
            .find(|e| (e.2.is_some()) != (with_lengths == raw_edges.len()))
            .map(|e| e.3)
            .unwrap_or(1);
        return Err(ParseError::MixedLengths { line });
    }

    let edges: Vec<(u32, u32)> = raw_edges.iter().map(|&(u, v, _, _)| (u, v)).collect();
    let g = match Graph::new(n, &edges) {
        Ok(g) => g,
        Err(e) => {
            // Attribute the error to the first offending line.
            let line = raw_edges.first().map(|e| e.3).unwrap_or(1);
            let msg = e.to_string();
            let line = raw_edges
                .iter()
                .find(|&&(u, v, _, _)| {
                    Graph::new(n, &[(u, v)]).is_err()
                        || raw_edges
                            .iter()
                            .filter(|&&(a, b, _, _)| {
                                (a.min(b), a.max(b)) == (u.min(v), u.max(v))
                            })
                            .count()
                            > 1
                })
                .map(|e| e.3)
                .unwrap_or(line);
            return Err(ParseError::at(line, msg));
        }
    };
    if !g.is_connected() {
        return Err(ParseError::Disconnected);
    }

    let lengths = if with_lengths == raw_edges.len() && !raw_edges.is_empty() {
        // Reorder lengths to canonical edge order.
        let mut by_edge = vec![0u32; g.edge_count()];
        for &(u, v, len, line) in &raw_edges {
            let idx = g
                .edge_index(u, v)
                .ok_or_else(|| ParseError::at(line, "edge vanished during canonicalization"))?;
            by_edge[idx] = len.unwrap();
        }
        Some(by_edge)
    } else {
        None
    };
    Ok((g, lengths))
}

/// Parses a robber script: one textual vertex per non-comment line, the
/// first being the start position.
pub fn parse_robber_script(
    s: &SubdividedGraph,
    text: &str,
) -> Result<(u32, Vec<u32>), ParseError> {
    let mut positions = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(p) => &raw[..p],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let v = s
            .parse_vertex(line)
            .map_err(|e| ParseError::at(i + 1, e))?;
        positions.push(v);
    }
    if positions.is_empty() {
        return Err(ParseError::Empty);
    }
    let start = positions.remove(0);
    Ok((start, positions))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_plain_graph() {
        let (g, lengths) = parse_graph_text("3\n0 1\n1 2\n").unwrap();
        assert_eq!(g.vertex_count(), 3);
        assert_eq!(g.edges(), &[(0, 1), (1, 2)]);
        assert!(lengths.is_none());
    }

    #[test]
    fn parses_lengths() {
        let (g, lengths) = parse_graph_text("3\n0 1 6\n1 2 7\n").unwrap();
        assert_eq!(g.edges(), &[(0, 1), (1, 2)]);
        assert_eq!(lengths, Some(vec![6, 7]));
    }

    #[test]
    fn rejects_loop_with_line_number() {
        let err = parse_graph_text("2\n0 0\n").unwrap_err();
        assert_eq!(
            err,
            ParseError::at(2, "loop edge 0-0 not allowed".to_string())
        );
    }

    #[test]
    fn rejects_mixed_lengths() {
        assert!(matches!(
            parse_graph_text("3\n0 1 6\n1 2\n"),
            Err(ParseError::MixedLengths { .. })
        ));
    }

    #[test]
    fn rejects_disconnected() {
        assert_eq!(
            parse_graph_text("4\n0 1\n2 3\n"),
            Err(ParseError::Disconnected)
        );
    }

    #[test]
    fn comments_and_blanks() {
        let (g, _) = parse_graph_text("# a path\n3\n\n0 1 # first\n1 2\n").unwrap();
        assert_eq!(g.edge_count(), 2);
    }
}
