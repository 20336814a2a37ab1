//! The JSON instance format consumed by `run` and produced by `gen`.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use localcolor_core::Graph;

use crate::CliError;

/// A self-contained coloring instance: an (optionally oriented) graph, a
/// proper input coloring `psi` with palette `m`, and optional per-vertex
/// color lists drawn from `[0, colorspace)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceDoc {
    pub n: usize,
    /// Input palette size; `psi[v] < m` for every vertex.
    pub m: u32,
    /// Size of the color space the lists draw from.
    pub colorspace: u64,
    /// When set, `edges` are kept with the given orientation; otherwise
    /// every edge is oriented from the lower to the higher endpoint.
    #[serde(default)]
    pub directed: bool,
    pub edges: Vec<(usize, usize)>,
    pub psi: Vec<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lists: Option<Vec<Vec<u32>>>,
}

impl InstanceDoc {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read input {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("malformed instance {}: {e}", path.display())))
    }

    pub fn graph(&self) -> Result<Graph, CliError> {
        let built = if self.directed {
            Graph::from_directed_edges(self.n, &self.edges, self.psi.clone(), self.m)
        } else {
            Graph::from_edges(self.n, &self.edges, self.psi.clone(), self.m)
        };
        built.map_err(|e| CliError::Failure(format!("bad instance: {e}")))
    }

    /// The lists, or a usage error naming the protocol that needs them.
    pub fn lists_for(&self, protocol: &str) -> Result<&[Vec<u32>], CliError> {
        match &self.lists {
            Some(lists) => Ok(lists),
            None => Err(CliError::Usage(format!("{protocol} needs an instance with lists"))),
        }
    }
}
