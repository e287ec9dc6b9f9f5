//! Text format for decompositions.
//!
//! ```text
//! # strategy combined
//! # edges 8
//! # mu 4
//! # alpha 4
//! # remainder
//! 0 1 5 4
//! 2 3 7 6
//! ```
//!
//! Header lines start with `#`; every other non-blank line is one cycle given
//! as space-separated edge ids. `mu` and `alpha` are informational and
//! checked on load.

use std::fmt::Write as _;

use super::decompose::{CycleDecomposition, Strategy};
use crate::error::{Error, Result};

impl CycleDecomposition {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# strategy {}", self.strategy);
        let _ = writeln!(out, "# edges {}", self.edges);
        if let Ok(m) = self.metrics() {
            let _ = writeln!(out, "# mu {}", m.mu);
            let _ = writeln!(out, "# alpha {}", m.alpha);
        }
        let rem: Vec<String> = self.remainder.iter().map(usize::to_string).collect();
        if rem.is_empty() {
            out.push_str("# remainder\n");
        } else {
            let _ = writeln!(out, "# remainder {}", rem.join(" "));
        }
        for c in &self.cycles {
            let ids: Vec<String> = c.iter().map(usize::to_string).collect();
            let _ = writeln!(out, "{}", ids.join(" "));
        }
        out
    }

    /// Parses the text format. Structural checks against a graph are done by
    /// [`CycleDecomposition::validate`].
    pub fn parse(text: &str) -> Result<Self> {
        let mut strategy = None;
        let mut edges = None;
        let mut mu = None;
        let mut alpha = None;
        let mut remainder = Vec::new();
        let mut cycles = Vec::new();
        let ids = |s: &str, line: usize| -> Result<Vec<usize>> {
            s.split_whitespace()
                .map(|t| t.parse::<usize>().map_err(|e| Error::Parse { line, message: format!("bad edge id {t:?}: {e}") }))
                .collect()
        };
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let raw = raw.trim();
            if raw.is_empty() {
                continue;
            }
            if let Some(header) = raw.strip_prefix('#') {
                let header = header.trim();
                let (key, value) = header.split_once(char::is_whitespace).unwrap_or((header, ""));
                let value = value.trim();
                let num = |v: &str| -> Result<f64> {
                    v.parse::<f64>().map_err(|e| Error::Parse { line, message: format!("bad {key}: {e}") })
                };
                match key {
                    "strategy" => strategy = Some(value.parse::<Strategy>().map_err(|e| Error::Parse { line, message: e.to_string() })?),
                    "edges" => edges = Some(num(value)? as usize),
                    "mu" => mu = Some(num(value)?),
                    "alpha" => alpha = Some(num(value)?),
                    "remainder" => remainder = ids(value, line)?,
                    _ => {}
                }
                continue;
            }
            cycles.push(ids(raw, line)?);
        }
        let strategy = strategy.ok_or_else(|| Error::Parse { line: 0, message: "missing '# strategy' header".into() })?;
        let edges = edges.ok_or_else(|| Error::Parse { line: 0, message: "missing '# edges' header".into() })?;
        let dec = CycleDecomposition { strategy, cycles, remainder, edges, warnings: Vec::new() };
        if let (Ok(m), Some(mu), Some(alpha)) = (dec.metrics(), mu, alpha) {
            if (m.mu - mu).abs() > 1e-9 * m.mu || (m.alpha - alpha).abs() > 1e-9 * m.alpha {
                return Err(Error::InvalidDecomposition(format!(
                    "header metrics (mu {mu}, alpha {alpha}) disagree with the cycles (mu {}, alpha {})",
                    m.mu, m.alpha
                )));
            }
        }
        Ok(dec)
    }
}

#[cfg(test)]
mod tests {
    use crate::collection::presets;
    use crate::graph::{decompose_bfs_peel, decompose_kirkman, CycleDecomposition, IncidenceGraph};

    #[test]
    fn round_trip_complete() {
        let coll = presets::all_pairs(9).unwrap();
        let dec = decompose_kirkman(&coll, 1).unwrap();
        let back = CycleDecomposition::parse(&dec.to_text()).unwrap();
        assert_eq!(back, dec);
        back.validate(&IncidenceGraph::build(&coll)).unwrap();
        assert_eq!(back.metrics().unwrap(), dec.metrics().unwrap());
    }

    #[test]
    fn round_trip_with_remainder() {
        let coll = presets::big_cycle(4).unwrap();
        let dec = decompose_bfs_peel(&IncidenceGraph::build(&coll)).unwrap();
        assert_eq!(CycleDecomposition::parse(&dec.to_text()).unwrap(), dec);
    }

    #[test]
    fn rejects_bad_headers() {
        assert!(CycleDecomposition::parse("0 1 2 3\n").is_err());
        assert!(CycleDecomposition::parse("# strategy nope\n# edges 4\n").is_err());
        assert!(CycleDecomposition::parse("# strategy combined\n# edges 4\n# mu 5\n# alpha 4\n0 1 2 3\n").is_err());
        assert!(CycleDecomposition::parse("# strategy combined\n# edges 4\n0 x 2 3\n").is_err());
    }
}
