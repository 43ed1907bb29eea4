use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{method_name, AnalysisError, Direction};
use crate::cpg::{Cpg, EdgeKind, NodeId, NodeKind};
use crate::glob::Glob;

pub const MAX_EXPANSION_DEPTH: u32 = 3;

/// A node filter with an optional single edge expansion.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StructuredQuery {
    #[serde(default)]
    pub kind: Option<String>,
    #[serde(default)]
    pub name_glob: Option<String>,
    #[serde(default)]
    pub code_contains: Option<String>,
    #[serde(default)]
    pub expand: Option<Expansion>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expansion {
    pub edge_kind: String,
    pub direction: Direction,
    #[serde(default = "one")]
    pub depth: u32,
}

fn one() -> u32 {
    1
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct QueryNode {
    pub node_id: NodeId,
    pub kind: NodeKind,
    pub name: Option<String>,
    pub code: String,
    pub file: String,
    pub line: u32,
    pub method: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct QueryResult {
    pub nodes: Vec<QueryNode>,
    pub total: usize,
    pub truncated: bool,
}

/// Filters nodes, then (if requested) replaces them with the nodes reached
/// over one edge kind within `depth` hops. For dependence and flow edges,
/// expressions are first lifted to their enclosing statement.
pub fn run_structured_query(cpg: &Cpg, query: &StructuredQuery, limit: usize) -> Result<QueryResult, AnalysisError> {
    let kind = match &query.kind {
        Some(k) => Some(NodeKind::parse(k).ok_or_else(|| AnalysisError::Query(format!("unknown node kind '{k}'")))?),
        None => None,
    };
    let expand = match &query.expand {
        Some(x) => {
            let edge = EdgeKind::parse(&x.edge_kind)
                .ok_or_else(|| AnalysisError::Query(format!("unknown edge kind '{}'", x.edge_kind)))?;
            if x.depth == 0 || x.depth > MAX_EXPANSION_DEPTH {
                return Err(AnalysisError::Query(format!(
                    "expansion depth must be between 1 and {MAX_EXPANSION_DEPTH}"
                )));
            }
            Some((edge, x.direction, x.depth))
        }
        None => None,
    };
    let glob = query.name_glob.as_deref().map(Glob::new);
    let selected: Vec<NodeId> = cpg
        .nodes()
        .iter()
        .filter(|n| kind.is_none_or(|k| n.kind == k))
        .filter(|n| {
            glob.as_ref()
                .is_none_or(|g| n.name.as_deref().is_some_and(|name| g.matches(name)))
        })
        .filter(|n| query.code_contains.as_deref().is_none_or(|c| n.code.contains(c)))
        .map(|n| n.id)
        .collect();

    let result: BTreeSet<NodeId> = match expand {
        None => selected.into_iter().collect(),
        Some((edge, direction, depth)) => {
            let lift = matches!(edge, EdgeKind::ReachingDef | EdgeKind::Cdg | EdgeKind::Cfg);
            let mut frontier: BTreeSet<NodeId> = selected
                .into_iter()
                .map(|n| if lift { cpg.statement_of(n).unwrap_or(n) } else { n })
                .collect();
            let mut seen = frontier.clone();
            let mut reached = BTreeSet::new();
            for _ in 0..depth {
                let mut next = BTreeSet::new();
                for &n in &frontier {
                    let others: Vec<NodeId> = match direction {
                        Direction::Forward => cpg.out_edges_of(n, edge).map(|e| e.dst).collect(),
                        Direction::Backward => cpg.in_edges_of(n, edge).map(|e| e.src).collect(),
                    };
                    for o in others {
                        reached.insert(o);
                        if seen.insert(o) {
                            next.insert(o);
                        }
                    }
                }
                frontier = next;
            }
            reached
        }
    };
    let total = result.len();
    let nodes = result
        .into_iter()
        .take(limit)
        .map(|id| {
            let n = cpg.node(id);
            QueryNode {
                node_id: id,
                kind: n.kind,
                name: n.name.clone(),
                code: n.code.clone(),
                file: cpg.file(n.file).path.clone(),
                line: n.line,
                method: method_name(cpg, id),
            }
        })
        .collect::<Vec<_>>();
    Ok(QueryResult {
        truncated: nodes.len() < total,
        nodes,
        total,
    })
}
