//! The `bpmosp v1` text format.
//!
//! ```text
//! bpmosp v1
//! # comments and blank lines may follow the header anywhere
//! 5 2 2 2            n M k_1 .. k_M
//! 1 2 1 2 | 2 4      u v party-1 weights | party-2 weights
//! ```

use std::fmt::Write as _;

use super::InstanceError;
use crate::shortestpath::{GraphBuilder, WeightedDigraph};

pub const HEADER: &str = "bpmosp v1";

/// Renders `g`, with each of `comments` on its own `# ` line after the
/// header.
pub fn write_instance(g: &WeightedDigraph, comments: &[String]) -> String {
    let mut out = String::new();
    out.push_str(HEADER);
    out.push('\n');
    for c in comments {
        let _ = writeln!(out, "# {c}");
    }
    let _ = write!(out, "{} {}", g.n(), g.party_count());
    for k in g.party_dims() {
        let _ = write!(out, " {k}");
    }
    out.push('\n');
    for e in g.edges() {
        let _ = write!(out, "{} {}", e.from, e.to);
        for (m, w) in e.weights.parties().iter().enumerate() {
            if m > 0 {
                out.push_str(" |");
            }
            for x in w.values() {
                let _ = write!(out, " {x}");
            }
        }
        out.push('\n');
    }
    out
}

fn number(token: &str, line: usize, what: &str) -> Result<u64, InstanceError> {
    token.parse::<u64>().map_err(|_| InstanceError::Malformed {
        line,
        reason: format!("{what} must be a non-negative integer, got {token:?}"),
    })
}

/// Parses and validates an instance. Errors carry 1-based line numbers.
pub fn parse_instance(text: &str) -> Result<WeightedDigraph, InstanceError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    match lines.next() {
        Some((_, HEADER)) => {}
        Some((line, found)) => {
            return Err(InstanceError::Header {
                line,
                found: found.to_string(),
            })
        }
        None => {
            return Err(InstanceError::Header {
                line: 1,
                found: String::new(),
            })
        }
    }
    let mut content = lines.filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (size_line, sizes) = content.next().ok_or(InstanceError::Malformed {
        line: 2,
        reason: "missing size line `n M k_1 .. k_M`".to_string(),
    })?;
    let fields: Vec<u64> = sizes
        .split_whitespace()
        .map(|t| number(t, size_line, "size field"))
        .collect::<Result<_, _>>()?;
    let malformed_sizes = || InstanceError::Malformed {
        line: size_line,
        reason: "size line must read `n M k_1 .. k_M`".to_string(),
    };
    if fields.len() < 3 {
        return Err(malformed_sizes());
    }
    let (n, parties) = (fields[0] as usize, fields[1] as usize);
    if fields.len() != 2 + parties {
        return Err(malformed_sizes());
    }
    let dims: Vec<usize> = fields[2..].iter().map(|&k| k as usize).collect();
    let mut builder = GraphBuilder::new(n, dims).map_err(|source| InstanceError::Graph {
        line: size_line,
        source,
    })?;

    for (line, text) in content {
        let groups: Vec<&str> = text.split('|').collect();
        if groups.len() != parties {
            return Err(InstanceError::Malformed {
                line,
                reason: format!(
                    "expected {parties} weight groups separated by '|', found {}",
                    groups.len()
                ),
            });
        }
        let mut head = groups[0].split_whitespace();
        let from = head
            .next()
            .ok_or_else(|| InstanceError::Malformed {
                line,
                reason: "missing source vertex".to_string(),
            })
            .and_then(|t| number(t, line, "vertex"))? as usize;
        let to = head
            .next()
            .ok_or_else(|| InstanceError::Malformed {
                line,
                reason: "missing target vertex".to_string(),
            })
            .and_then(|t| number(t, line, "vertex"))? as usize;
        let mut weights = vec![head.map(|t| number(t, line, "weight")).collect::<Result<Vec<_>, _>>()?];
        for g in &groups[1..] {
            weights.push(
                g.split_whitespace()
                    .map(|t| number(t, line, "weight"))
                    .collect::<Result<Vec<_>, _>>()?,
            );
        }
        builder
            .add_edge(from, to, weights)
            .map_err(|source| InstanceError::Graph { line, source })?;
    }
    builder.build().map_err(|source| InstanceError::Graph {
        line: size_line,
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::fixture_graph;

    #[test]
    fn fixture_round_trips() {
        let g = fixture_graph();
        let text = write_instance(&g, &["five-vertex example".to_string()]);
        assert_eq!(text.lines().filter(|l| l.contains('|')).count(), 7);
        assert_eq!(parse_instance(&text).unwrap(), g);
    }

    fn err_line(text: &str) -> (usize, String) {
        let e = parse_instance(text).unwrap_err();
        (e.line().unwrap_or(0), e.to_string())
    }

    #[test]
    fn rejects_bad_input_with_line_numbers() {
        assert_eq!(err_line("bpmosp v2\n").0, 1);
        let zero = "bpmosp v1\n3 2 1 1\n1 2 0 | 1\n2 3 1 | 1\n";
        assert_eq!(err_line(zero).0, 3);
        let dup = "bpmosp v1\n# c\n3 2 1 1\n1 2 1 | 1\n1 2 1 | 1\n";
        let (line, msg) = err_line(dup);
        assert_eq!(line, 5);
        assert!(msg.contains("duplicate"), "{msg}");
        let unreachable = "bpmosp v1\n4 2 1 1\n1 2 1 | 1\n2 3 1 | 1\n";
        let (line, msg) = err_line(unreachable);
        assert_eq!(line, 2);
        assert!(msg.contains("unreachable"), "{msg}");
        let negative = "bpmosp v1\n2 2 1 1\n1 2 -3 | 1\n";
        assert_eq!(err_line(negative).0, 3);
        let groups = "bpmosp v1\n2 2 1 1\n1 2 3 1\n";
        assert_eq!(err_line(groups).0, 3);
        let loop_ = "bpmosp v1\n2 2 1 1\n1 2 1 | 1\n2 2 1 | 1\n";
        assert_eq!(err_line(loop_).0, 4);
    }
}
