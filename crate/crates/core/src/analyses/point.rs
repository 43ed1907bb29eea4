use serde::Serialize;

use super::{method_name, AnalysisError};
use crate::cpg::{Cpg, NodeId, NodeKind};

/// A resolved location in the program.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ProgramPoint {
    pub file: String,
    pub line: u32,
    pub col: u32,
    pub node_id: NodeId,
    pub method: Option<String>,
    pub code: String,
}

impl ProgramPoint {
    pub fn of(cpg: &Cpg, id: NodeId) -> Self {
        let node = cpg.node(id);
        ProgramPoint {
            file: cpg.file(node.file).path.clone(),
            line: node.line,
            col: node.col,
            node_id: id,
            method: method_name(cpg, id),
            code: node.code.clone(),
        }
    }
}

fn is_statement(cpg: &Cpg, id: NodeId) -> bool {
    cpg.is_cfg_node(id) && !matches!(cpg.node(id).kind, NodeKind::Method | NodeKind::MethodReturn)
}

fn depth(cpg: &Cpg, mut id: NodeId) -> usize {
    let mut d = 0;
    while let Some(p) = cpg.parent(id) {
        d += 1;
        id = p;
    }
    d
}

/// Candidate nodes on a line in preference order: statements (outermost and
/// leftmost first), then parameters, then methods.
pub(crate) fn candidates_at(cpg: &Cpg, file: u32, line: u32) -> Vec<NodeId> {
    let on_line = cpg.nodes_at_line(file, line);
    let rank = |id: NodeId| match cpg.node(id).kind {
        _ if is_statement(cpg, id) => Some(0),
        NodeKind::Param => Some(1),
        NodeKind::Method => Some(2),
        _ => None,
    };
    let mut out: Vec<(usize, u32, usize, NodeId)> = on_line
        .iter()
        .filter_map(|&id| rank(id).map(|r| (r, cpg.node(id).col, depth(cpg, id), id)))
        .collect();
    out.sort();
    out.into_iter().map(|(.., id)| id).collect()
}

/// Resolves `file:line` (and optionally a column) to a node. Without a
/// column the outermost statement starting on the line wins, with ties going
/// to the earliest column. With a column, the innermost statement or
/// parameter whose span contains the position wins.
pub fn resolve_point(cpg: &Cpg, file: &str, line: u32, col: Option<u32>) -> Result<NodeId, AnalysisError> {
    let unresolved = || AnalysisError::UnresolvedPoint {
        file: file.to_string(),
        line,
    };
    let fidx = cpg.file_index(file).ok_or_else(unresolved)?;
    match col {
        None => candidates_at(cpg, fidx, line).first().copied().ok_or_else(unresolved),
        Some(col) => {
            let pos = (line, col);
            cpg.nodes()
                .iter()
                .filter(|n| n.file == fidx && (is_statement(cpg, n.id) || n.kind == NodeKind::Param))
                .filter(|n| (n.line, n.col) <= pos && pos <= (n.end_line, n.end_col))
                .max_by_key(|n| (n.line, n.col, depth(cpg, n.id)))
                .map(|n| n.id)
                .ok_or_else(unresolved)
        }
    }
}
