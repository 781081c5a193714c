use serde::{Deserialize, Serialize};

use super::graph::{is_chordal, is_connected, is_planar};
use super::FilteredGraph;
use crate::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Outcome of every structural check on a filtered graph.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub checks: Vec<Check>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<bool> {
        self.checks.iter().find(|c| c.name == name).map(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<&str> {
        self.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect()
    }
}

/// Re-derives the TMFG invariants from the edge list alone.
pub fn verify<T: Scalar>(graph: &FilteredGraph<T>) -> VerificationReport {
    let n = graph.len();
    let pairs = graph.edge_pairs();
    let mut checks = Vec::new();
    let mut push = |name: &str, passed: bool, detail: String| {
        checks.push(Check { name: name.to_string(), passed, detail });
    };

    let mut sorted = pairs.clone();
    sorted.sort_unstable();
    sorted.dedup();
    let well_formed = sorted.len() == pairs.len() && pairs.iter().all(|&(i, j)| i < j && j < n);
    push("simple", well_formed, format!("{} edges, {} distinct", pairs.len(), sorted.len()));

    let expected = if n >= 3 { 3 * n - 6 } else { n.saturating_sub(1) };
    push("edge_count", sorted.len() == expected, format!("{} edges, expected {expected}", sorted.len()));

    push("connected", is_connected(n, &sorted), String::new());

    let mut degree = vec![0usize; n];
    for &(i, j) in &sorted {
        if j < n {
            degree[i] += 1;
            degree[j] += 1;
        }
    }
    let low: Vec<usize> = (0..n).filter(|v| !graph.seed.contains(v) && degree[*v] < 3).collect();
    push("min_degree", low.is_empty(), format!("non-seed vertices with degree < 3: {low:?}"));

    push("planar", is_planar(n, &sorted), String::new());
    push("chordal", is_chordal(n, &sorted), String::new());

    VerificationReport { checks }
}
