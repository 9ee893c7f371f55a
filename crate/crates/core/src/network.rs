use serde::{Deserialize, Serialize};

use crate::ctm::{PathSpec, RoadGeometry};
use crate::error::{invalid, Result};

/// Parallel single-bottleneck roads sharing one origin and one destination,
/// ordered by strictly increasing free-flow latency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkSpec {
    paths: Vec<PathSpec>,
}

impl NetworkSpec {
    pub fn new(paths: Vec<PathSpec>) -> Result<Self> {
        if paths.is_empty() {
            return Err(invalid("a network needs at least one path"));
        }
        for (p, path) in paths.iter().enumerate() {
            if path.bottleneck().is_none() {
                return Err(invalid(format!("path {p} is not a single-bottleneck road")));
            }
        }
        for (p, pair) in paths.windows(2).enumerate() {
            let (a, b) = (pair[0].free_flow_latency(), pair[1].free_flow_latency());
            if !(a < b) {
                return Err(invalid(format!(
                    "free-flow latencies must strictly increase: path {p} has {a}, path {} has {b}",
                    p + 1
                )));
            }
        }
        Ok(Self { paths })
    }

    pub fn from_geometries(geometries: &[RoadGeometry]) -> Result<Self> {
        let paths = geometries
            .iter()
            .enumerate()
            .map(|(p, g)| {
                PathSpec::single_bottleneck(g).map_err(|e| invalid(format!("path {p}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(paths)
    }

    pub fn paths(&self) -> &[PathSpec] {
        &self.paths
    }

    pub fn path(&self, p: usize) -> &PathSpec {
        &self.paths[p]
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    /// Total cell count.
    pub fn cell_count(&self) -> usize {
        self.paths.iter().map(PathSpec::len).sum()
    }

    /// Total lane count, i.e. the number of closure flags.
    pub fn lane_count(&self) -> usize {
        self.paths.iter().map(PathSpec::lane_count).sum()
    }
}
