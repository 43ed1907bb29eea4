use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{step_edge, ProgramPoint, StepEdge};
use crate::cpg::{Cpg, EdgeKind, NodeId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Backward,
    Forward,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Dependency {
    #[serde(flatten)]
    pub point: ProgramPoint,
    pub variable: String,
    pub hop: u32,
    pub edge: StepEdge,
}

/// Definitions feeding `start` (backward) or uses fed by it (forward), up to
/// `depth` REACHING_DEF hops. `variable` restricts the first hop.
pub fn get_data_dependencies(
    cpg: &Cpg,
    start: NodeId,
    direction: Direction,
    depth: u32,
    variable: Option<&str>,
) -> Vec<Dependency> {
    let mut found: BTreeMap<(NodeId, String), (u32, StepEdge)> = BTreeMap::new();
    let mut expanded = BTreeSet::from([start]);
    let mut frontier = vec![start];
    for hop in 1..=depth {
        let mut next = Vec::new();
        for &n in &frontier {
            let edges: Vec<_> = match direction {
                Direction::Backward => cpg.in_edges_of(n, EdgeKind::ReachingDef).collect(),
                Direction::Forward => cpg.out_edges_of(n, EdgeKind::ReachingDef).collect(),
            };
            for e in edges {
                let var = e.variable.clone().unwrap_or_default();
                if hop == 1 && variable.is_some_and(|v| v != var) {
                    continue;
                }
                let other = match direction {
                    Direction::Backward => e.src,
                    Direction::Forward => e.dst,
                };
                found.entry((other, var)).or_insert((hop, step_edge(cpg, e.src, e.dst)));
                if expanded.insert(other) {
                    next.push(other);
                }
            }
        }
        frontier = next;
    }
    let mut out: Vec<Dependency> = found
        .into_iter()
        .map(|((node, variable), (hop, edge))| Dependency {
            point: ProgramPoint::of(cpg, node),
            variable,
            hop,
            edge,
        })
        .collect();
    out.sort_by(|a, b| {
        let key = |d: &Dependency| {
            let n = cpg.node(d.point.node_id);
            (d.hop, n.file, n.line, n.col, n.id)
        };
        key(a).cmp(&key(b)).then_with(|| a.variable.cmp(&b.variable))
    });
    out
}
