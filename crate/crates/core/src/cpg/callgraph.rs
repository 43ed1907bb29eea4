//! Call resolution and inter-procedural binding edges.

use std::collections::BTreeMap;

use super::dataflow::{contains_call, identifiers, ReachingSets, RETURN_VAR};
use super::{Cpg, CpgEdge, EdgeKind, NodeId, NodeKind};

/// CALL and ARG edges. Calls resolve by name; when several methods share the
/// name, one in the caller's file wins, else the first in id order. Calls to
/// undefined names get ARG edges only.
pub(crate) fn call_edges(cpg: &Cpg) -> Vec<CpgEdge> {
    let mut by_name: BTreeMap<&str, Vec<NodeId>> = BTreeMap::new();
    for &m in cpg.nodes_of_kind(NodeKind::Method) {
        if let Some(name) = cpg.node(m).name.as_deref() {
            by_name.entry(name).or_default().push(m);
        }
    }
    let mut edges = Vec::new();
    for &call in cpg.nodes_of_kind(NodeKind::Call) {
        let node = cpg.node(call);
        for &arg in cpg.children(call) {
            edges.push(CpgEdge {
                src: call,
                dst: arg,
                kind: EdgeKind::Arg,
                variable: None,
            });
        }
        let Some(candidates) = node.name.as_deref().and_then(|n| by_name.get(n)) else {
            continue;
        };
        let target = candidates
            .iter()
            .copied()
            .find(|&m| cpg.node(m).file == node.file)
            .unwrap_or(candidates[0]);
        edges.push(CpgEdge {
            src: call,
            dst: target,
            kind: EdgeKind::Call,
            variable: None,
        });
    }
    edges
}

/// Parameter-binding edges (definitions feeding argument `i` to the callee's
/// Param `i`) and return-binding edges (callee exit to the call-site
/// statement). Both are REACHING_DEF edges; context-insensitive.
pub(crate) fn binding_edges(cpg: &Cpg, reaching: &BTreeMap<NodeId, ReachingSets>) -> Vec<CpgEdge> {
    let mut edges = Vec::new();
    for &call in cpg.nodes_of_kind(NodeKind::Call) {
        let Some(callee) = cpg.callee_of(call) else {
            continue;
        };
        let Some(stmt) = cpg.statement_of(call) else {
            continue;
        };
        let Some(caller) = cpg.node(call).method else {
            continue;
        };
        let callee_info = cpg.method(callee).expect("CALL edges target methods");
        let in_set = &reaching[&caller][&stmt];
        for (&arg, &param) in cpg.children(call).iter().zip(&callee_info.params) {
            let pname = cpg.node(param).name.clone();
            let vars: Vec<String> = identifiers(cpg, arg)
                .into_iter()
                .filter_map(|i| cpg.node(i).name.clone())
                .collect();
            for (site, var) in in_set {
                if vars.contains(var) {
                    edges.push(CpgEdge {
                        src: *site,
                        dst: param,
                        kind: EdgeKind::ReachingDef,
                        variable: pname.clone(),
                    });
                }
            }
            if contains_call(cpg, arg) {
                edges.push(CpgEdge {
                    src: stmt,
                    dst: param,
                    kind: EdgeKind::ReachingDef,
                    variable: pname.clone(),
                });
            }
        }
        edges.push(CpgEdge {
            src: callee_info.exit,
            dst: stmt,
            kind: EdgeKind::ReachingDef,
            variable: Some(RETURN_VAR.to_string()),
        });
    }
    edges
}
