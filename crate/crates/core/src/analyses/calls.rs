use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, VecDeque};

use serde::Serialize;

use super::AnalysisError;
use crate::cpg::{Cpg, NodeId, NodeKind};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CallGraphMethod {
    pub name: String,
    pub file: String,
    pub depth: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CallGraphEdge {
    pub caller: String,
    pub callee: String,
    pub file: String,
    pub line: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CallGraph {
    pub root: String,
    pub methods: Vec<CallGraphMethod>,
    pub edges: Vec<CallGraphEdge>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Reachability {
    pub from: String,
    pub to: String,
    pub reachable: bool,
    pub path: Option<Vec<String>>,
}

fn roots(cpg: &Cpg, name: &str) -> Result<Vec<NodeId>, AnalysisError> {
    let ids: Vec<NodeId> = cpg.methods_named(name).iter().map(|m| m.id).collect();
    if ids.is_empty() {
        return Err(AnalysisError::UnknownMethod(name.to_string()));
    }
    Ok(ids)
}

/// Resolved calls made inside each method, in id order.
fn calls_by_method(cpg: &Cpg) -> BTreeMap<NodeId, Vec<(NodeId, NodeId)>> {
    let mut map: BTreeMap<NodeId, Vec<(NodeId, NodeId)>> = BTreeMap::new();
    for &call in cpg.nodes_of_kind(NodeKind::Call) {
        if let (Some(m), Some(callee)) = (cpg.node(call).method, cpg.callee_of(call)) {
            map.entry(m).or_default().push((call, callee));
        }
    }
    map
}

fn name(cpg: &Cpg, id: NodeId) -> String {
    cpg.node(id).name.clone().unwrap_or_default()
}

/// Methods reachable from `root` within `depth` calls, and the call edges
/// leaving every method closer than `depth`. Each call site yields one edge.
pub fn get_call_graph(cpg: &Cpg, root: &str, depth: u32) -> Result<CallGraph, AnalysisError> {
    let calls = calls_by_method(cpg);
    let mut dist: BTreeMap<NodeId, u32> = BTreeMap::new();
    let mut order = Vec::new();
    let mut queue = VecDeque::new();
    for r in roots(cpg, root)? {
        dist.insert(r, 0);
        order.push(r);
        queue.push_back(r);
    }
    let mut edges = Vec::new();
    while let Some(m) = queue.pop_front() {
        let d = dist[&m];
        if d >= depth {
            continue;
        }
        for &(call, callee) in calls.get(&m).into_iter().flatten() {
            let site = cpg.node(call);
            edges.push(CallGraphEdge {
                caller: name(cpg, m),
                callee: name(cpg, callee),
                file: cpg.file(site.file).path.clone(),
                line: site.line,
            });
            if let Entry::Vacant(e) = dist.entry(callee) {
                e.insert(d + 1);
                order.push(callee);
                queue.push_back(callee);
            }
        }
    }
    Ok(CallGraph {
        root: root.to_string(),
        methods: order
            .into_iter()
            .map(|m| CallGraphMethod {
                name: name(cpg, m),
                file: cpg.file(cpg.node(m).file).path.clone(),
                depth: dist[&m],
            })
            .collect(),
        edges,
    })
}

/// Whether a chain of calls leads from `from` to `to`, with a shortest
/// witness.
pub fn check_reachability(cpg: &Cpg, from: &str, to: &str) -> Result<Reachability, AnalysisError> {
    let starts = roots(cpg, from)?;
    roots(cpg, to)?;
    let calls = calls_by_method(cpg);
    let mut prev: BTreeMap<NodeId, Option<NodeId>> = BTreeMap::new();
    let mut queue = VecDeque::new();
    for s in starts {
        prev.insert(s, None);
        queue.push_back(s);
    }
    while let Some(m) = queue.pop_front() {
        if cpg.node(m).name.as_deref() == Some(to) {
            let mut path = vec![name(cpg, m)];
            let mut cur = m;
            while let Some(Some(p)) = prev.get(&cur) {
                path.push(name(cpg, *p));
                cur = *p;
            }
            path.reverse();
            return Ok(Reachability {
                from: from.to_string(),
                to: to.to_string(),
                reachable: true,
                path: Some(path),
            });
        }
        for &(_, callee) in calls.get(&m).into_iter().flatten() {
            if let Entry::Vacant(e) = prev.entry(callee) {
                e.insert(Some(m));
                queue.push_back(callee);
            }
        }
    }
    Ok(Reachability {
        from: from.to_string(),
        to: to.to_string(),
        reachable: false,
        path: None,
    })
}
