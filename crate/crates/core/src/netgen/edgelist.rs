//! Plain-text edge lists: one `i j [weight]` per line, `#` comments.

use std::fmt::Write as _;
use std::path::Path;

use super::{Network, NetworkError};

/// Parses an edge list. `n` defaults to one past the largest index seen.
pub fn parse_edge_list(text: &str, n: Option<usize>) -> Result<Network, NetworkError> {
    let mut edges = Vec::new();
    let mut max_index = None::<usize>;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parse_err = |reason: String| NetworkError::Parse {
            line: lineno + 1,
            reason,
        };
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() < 2 || fields.len() > 3 {
            return Err(parse_err(format!(
                "expected `i j [weight]`, got {} fields",
                fields.len()
            )));
        }
        let i: usize = fields[0]
            .parse()
            .map_err(|_| parse_err(format!("bad index `{}`", fields[0])))?;
        let j: usize = fields[1]
            .parse()
            .map_err(|_| parse_err(format!("bad index `{}`", fields[1])))?;
        let w: f64 = match fields.get(2) {
            Some(s) => s
                .parse()
                .map_err(|_| parse_err(format!("bad weight `{s}`")))?,
            None => 1.0,
        };
        max_index = Some(max_index.map_or(i.max(j), |m| m.max(i).max(j)));
        edges.push((i, j, w));
    }
    let n = match (n, max_index) {
        (Some(n), _) => n,
        (None, Some(m)) => m + 1,
        (None, None) => return Err(NetworkError::Empty),
    };
    Network::from_edges(n, &edges)
}

pub fn read_edge_list(path: &Path, n: Option<usize>) -> Result<Network, NetworkError> {
    let text = std::fs::read_to_string(path).map_err(|source| NetworkError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_edge_list(&text, n)
}

/// Serializes with an `# n = ...` header so isolated trailing agents survive a
/// round trip through [`parse_edge_list`] with `n` taken from the header.
pub fn format_edge_list(net: &Network) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# n = {}", net.n());
    for (i, j, w) in net.edges() {
        let _ = writeln!(out, "{i} {j} {w}");
    }
    out
}

/// Reads the `# n = ...` header written by [`format_edge_list`], if any.
pub fn header_agent_count(text: &str) -> Option<usize> {
    text.lines()
        .filter_map(|l| l.trim().strip_prefix('#'))
        .find_map(|l| {
            l.trim()
                .strip_prefix("n =")
                .and_then(|v| v.trim().parse().ok())
        })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_default_weight() {
        let net = parse_edge_list("# comment\n0 1\n1 2 2.5\n\n", None).unwrap();
        assert_eq!(net.n(), 3);
        assert_eq!(net.weight(0, 1), 1.0);
        assert_eq!(net.weight(2, 1), 2.5);
    }

    #[test]
    fn reports_line_numbers() {
        let err = parse_edge_list("0 1\n1 x\n", None).unwrap_err();
        assert!(matches!(err, NetworkError::Parse { line: 2, .. }), "{err}");
    }

    #[test]
    fn round_trip_keeps_isolated_agents() {
        let net = Network::from_edges(5, &[(0, 1, 3.0), (1, 2, 0.5)]).unwrap();
        let text = format_edge_list(&net);
        let back = parse_edge_list(&text, header_agent_count(&text)).unwrap();
        assert_eq!(back, net);
    }
}
