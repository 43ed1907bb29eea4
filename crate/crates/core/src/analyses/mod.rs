//! Analysis tools over a built [`Cpg`]. Every operation is a pure, read-only
//! function of the graph and returns plain serializable data.

mod bounds;
mod calls;
mod deps;
mod navigation;
mod point;
mod query;
mod slice;
mod taint;

pub use bounds::{find_bounds_checks, size_arguments, BoundsCheck, BoundsReport};
pub use calls::{check_reachability, get_call_graph, CallGraph, CallGraphEdge, CallGraphMethod, Reachability};
pub use deps::{get_data_dependencies, Dependency, Direction};
pub use navigation::{
    get_code_snippet, get_codebase_summary, get_method_source, list_calls, list_methods, search_literals, CallSite,
    CodebaseSummary, LiteralHit, LiteralKind, MethodSource, MethodSummary, Snippet,
};
pub use point::{resolve_point, ProgramPoint};
pub use query::{run_structured_query, Expansion, QueryNode, QueryResult, StructuredQuery};
pub use slice::{get_program_slice, slice_points, Slice, SliceLine};
pub use taint::{
    find_taint_flows, find_taint_sinks, find_taint_sources, ArgSelector, PathStep, SinkSpec, SourceSinkConfig,
    StepEdge, TaintPath, TaintSink, TaintSource,
};

use serde_json::{json, Value};
use thiserror::Error;

use crate::cpg::{Cpg, EdgeKind, NodeId, NodeKind};
use crate::frontend::Location;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalysisError {
    #[error("no program point at {file}:{line}")]
    UnresolvedPoint { file: String, line: u32 },
    #[error("unknown method '{0}'")]
    UnknownMethod(String),
    #[error("method name '{name}' is defined {} times", candidates.len())]
    AmbiguousMethod { name: String, candidates: Vec<Location> },
    #[error("{0}")]
    NotABoundsContext(String),
    #[error("{0}")]
    Range(String),
    #[error("{0}")]
    Query(String),
    #[error("{0}")]
    Config(String),
}

impl AnalysisError {
    pub fn code(&self) -> &'static str {
        match self {
            AnalysisError::UnresolvedPoint { .. } => "unresolved_point",
            AnalysisError::UnknownMethod(_) => "unknown_method",
            AnalysisError::AmbiguousMethod { .. } => "ambiguous_method",
            AnalysisError::NotABoundsContext(_) => "not_a_bounds_context",
            AnalysisError::Range(_) => "range_error",
            AnalysisError::Query(_) => "query_error",
            AnalysisError::Config(_) => "config_error",
        }
    }

    pub fn detail(&self) -> Value {
        match self {
            AnalysisError::UnresolvedPoint { file, line } => json!({ "file": file, "line": line }),
            AnalysisError::UnknownMethod(name) => json!({ "name": name }),
            AnalysisError::AmbiguousMethod { name, candidates } => {
                json!({ "name": name, "candidates": candidates })
            }
            _ => Value::Null,
        }
    }
}

/// True when `node` is `root` or lies in its AST subtree.
pub(crate) fn is_within(cpg: &Cpg, mut node: NodeId, root: NodeId) -> bool {
    loop {
        if node == root {
            return true;
        }
        match cpg.parent(node) {
            Some(p) => node = p,
            None => return false,
        }
    }
}

/// Name of the method a node belongs to.
pub(crate) fn method_name(cpg: &Cpg, id: NodeId) -> Option<String> {
    cpg.method_of(id).map(|m| m.name.clone())
}

/// Lines of the CDG governors of `id`, sorted.
pub(crate) fn governor_lines(cpg: &Cpg, id: NodeId) -> Vec<u32> {
    let mut lines: Vec<u32> = cpg
        .in_edges_of(id, EdgeKind::Cdg)
        .map(|e| cpg.node(e.src).line)
        .collect();
    lines.sort();
    lines.dedup();
    lines
}

/// Classifies a REACHING_DEF edge as intra-procedural or one of the two
/// binding kinds.
pub(crate) fn step_edge(cpg: &Cpg, src: NodeId, dst: NodeId) -> StepEdge {
    if cpg.node(dst).kind == NodeKind::Param {
        StepEdge::ParamBinding
    } else if cpg.node(src).kind == NodeKind::MethodReturn {
        StepEdge::ReturnBinding
    } else {
        StepEdge::ReachingDef
    }
}

#[cfg(test)]
mod tests;
