//! Statement-level def/use facts and reaching definitions.
//!
//! Definitions:
//! - assignments and initialized declarations define their target (strong);
//! - an assignment to an array element defines the whole array (weak: it
//!   does not kill earlier definitions);
//! - a call argument that is a bare array name is a weak definition of that
//!   array, since the callee may write through it;
//! - parameters are defined at method entry;
//! - `return e` defines the pseudo-variable [`RETURN_VAR`].
//!
//! The method exit uses [`RETURN_VAR`] and every array parameter, which is
//! how callee writes flow back to call sites.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use super::{AnalysisWarning, Cpg, CpgEdge, EdgeKind, MethodInfo, NodeId, NodeKind};

pub const RETURN_VAR: &str = "<return>";

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Def {
    pub var: String,
    pub strong: bool,
    /// Node the definition is attributed to (the statement, or the Param
    /// node for parameter definitions made at entry).
    pub site: NodeId,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NodeFacts {
    pub defs: Vec<Def>,
    pub uses: BTreeSet<String>,
}

pub(crate) struct MethodFacts {
    pub facts: BTreeMap<NodeId, NodeFacts>,
    pub warnings: Vec<AnalysisWarning>,
}

/// Identifier nodes in the subtree rooted at `root`, including `root`.
pub(crate) fn identifiers(cpg: &Cpg, root: NodeId) -> Vec<NodeId> {
    std::iter::once(root)
        .chain(cpg.descendants(root))
        .filter(|&n| cpg.node(n).kind == NodeKind::Identifier)
        .collect()
}

pub(crate) fn contains_call(cpg: &Cpg, root: NodeId) -> bool {
    std::iter::once(root)
        .chain(cpg.descendants(root))
        .any(|n| cpg.node(n).kind == NodeKind::Call)
}

/// Expression subtrees evaluated by a statement node itself (for control
/// structures, only the condition).
pub(crate) fn own_expressions(cpg: &Cpg, stmt: NodeId) -> Vec<NodeId> {
    let node = cpg.node(stmt);
    let kids = cpg.children(stmt);
    match node.kind {
        NodeKind::Local if node.is_array() => Vec::new(),
        NodeKind::Local | NodeKind::Assign | NodeKind::Return => kids.to_vec(),
        NodeKind::ControlStructure => kids.first().copied().into_iter().collect(),
        NodeKind::Call | NodeKind::Operator | NodeKind::Identifier | NodeKind::Literal => {
            vec![stmt]
        }
        _ => Vec::new(),
    }
}

fn name_of(cpg: &Cpg, id: NodeId) -> String {
    cpg.node(id).name.clone().unwrap_or_default()
}

pub(crate) fn method_facts(cpg: &Cpg, method: NodeId) -> MethodFacts {
    let Some(info) = cpg.method(method) else {
        return MethodFacts {
            facts: BTreeMap::new(),
            warnings: Vec::new(),
        };
    };
    let mut arrays = BTreeSet::new();
    let mut declared = BTreeSet::new();
    for node in cpg.nodes().iter().filter(|n| n.method == Some(method)) {
        if matches!(node.kind, NodeKind::Param | NodeKind::Local) {
            let name = node.name.clone().unwrap_or_default();
            if node.is_array() {
                arrays.insert(name.clone());
            }
            declared.insert(name);
        }
    }

    let mut facts = BTreeMap::new();
    let mut undeclared: BTreeMap<String, NodeId> = BTreeMap::new();
    for &n in &info.cfg_nodes {
        let mut f = NodeFacts::default();
        let node = cpg.node(n);
        match node.kind {
            NodeKind::Method => {
                for &p in &info.params {
                    f.defs.push(Def {
                        var: name_of(cpg, p),
                        strong: true,
                        site: p,
                    });
                }
            }
            NodeKind::MethodReturn => {
                f.uses.insert(RETURN_VAR.to_string());
                for &p in &info.params {
                    if cpg.node(p).is_array() {
                        f.uses.insert(name_of(cpg, p));
                    }
                }
            }
            _ => {
                let mut non_uses = BTreeSet::new();
                if node.kind == NodeKind::Assign {
                    let target = cpg.children(n)[0];
                    let mut base = target;
                    while cpg.node(base).kind == NodeKind::Operator && cpg.node(base).name.as_deref() == Some("[]") {
                        base = cpg.children(base)[0];
                    }
                    if cpg.node(base).kind == NodeKind::Identifier {
                        non_uses.insert(base);
                        f.defs.push(Def {
                            var: name_of(cpg, base),
                            strong: base == target,
                            site: n,
                        });
                    }
                }
                if node.kind == NodeKind::Local && !node.is_array() && !cpg.children(n).is_empty() {
                    f.defs.push(Def {
                        var: name_of(cpg, n),
                        strong: true,
                        site: n,
                    });
                }
                if node.kind == NodeKind::Return && !cpg.children(n).is_empty() {
                    f.defs.push(Def {
                        var: RETURN_VAR.to_string(),
                        strong: true,
                        site: n,
                    });
                }
                for root in own_expressions(cpg, n) {
                    for id in std::iter::once(root).chain(cpg.descendants(root)) {
                        let expr = cpg.node(id);
                        if expr.kind == NodeKind::Identifier && !non_uses.contains(&id) {
                            let name = name_of(cpg, id);
                            if !declared.contains(&name) {
                                undeclared.entry(name.clone()).or_insert(id);
                            }
                            f.uses.insert(name);
                        }
                        if expr.kind == NodeKind::Call {
                            for &arg in cpg.children(id) {
                                let a = cpg.node(arg);
                                if a.kind == NodeKind::Identifier {
                                    let name = name_of(cpg, arg);
                                    if arrays.contains(&name) {
                                        f.defs.push(Def {
                                            var: name,
                                            strong: false,
                                            site: n,
                                        });
                                    }
                                }
                            }
                        }
                    }
                }
                f.defs.sort();
                // A strong definition subsumes weak ones of the same variable.
                let strong: BTreeSet<String> = f.defs.iter().filter(|d| d.strong).map(|d| d.var.clone()).collect();
                f.defs.retain(|d| d.strong || !strong.contains(&d.var));
                f.defs.dedup();
            }
        }
        facts.insert(n, f);
    }

    let warnings = undeclared
        .into_iter()
        .map(|(name, at)| AnalysisWarning {
            location: cpg.location(at),
            message: format!("use of undeclared identifier '{name}' in {}", info.name),
        })
        .collect();
    MethodFacts { facts, warnings }
}

/// Definitions reaching the entry of each CFG node, as (site, variable).
pub(crate) type ReachingSets = BTreeMap<NodeId, BTreeSet<(NodeId, String)>>;

/// Classic forward may-analysis iterated to a fixpoint.
pub(crate) fn reaching_definitions(info: &MethodInfo, cpg: &Cpg) -> ReachingSets {
    let empty = NodeFacts::default();
    let facts = |n: NodeId| cpg.facts(n).unwrap_or(&empty);
    let mut in_sets: ReachingSets = info.cfg_nodes.iter().map(|&n| (n, BTreeSet::new())).collect();
    let mut out_sets: ReachingSets = in_sets.clone();

    let mut queue: VecDeque<NodeId> = info.cfg_nodes.iter().copied().collect();
    let mut queued: BTreeSet<NodeId> = queue.iter().copied().collect();
    while let Some(n) = queue.pop_front() {
        queued.remove(&n);
        let mut input = BTreeSet::new();
        for p in info.predecessors(n) {
            input.extend(out_sets[p].iter().cloned());
        }
        let f = facts(n);
        let killed: BTreeSet<&str> = f.defs.iter().filter(|d| d.strong).map(|d| d.var.as_str()).collect();
        let mut output: BTreeSet<(NodeId, String)> = input
            .iter()
            .filter(|(_, v)| !killed.contains(v.as_str()))
            .cloned()
            .collect();
        output.extend(f.defs.iter().map(|d| (d.site, d.var.clone())));
        in_sets.insert(n, input);
        if output != out_sets[&n] {
            out_sets.insert(n, output);
            for &s in info.successors(n) {
                if queued.insert(s) {
                    queue.push_back(s);
                }
            }
        }
    }
    in_sets
}

/// REACHING_DEF edges of one method from its reaching sets.
pub(crate) fn reaching_def_edges(info: &MethodInfo, cpg: &Cpg, sets: &ReachingSets) -> Vec<CpgEdge> {
    let mut edges = Vec::new();
    for &n in &info.cfg_nodes {
        let Some(f) = cpg.facts(n) else { continue };
        for (site, var) in &sets[&n] {
            if !f.uses.contains(var) {
                continue;
            }
            // A parameter reaching exit unchanged carries nothing back.
            if n == info.exit && cpg.node(*site).kind == NodeKind::Param {
                continue;
            }
            edges.push(CpgEdge {
                src: *site,
                dst: n,
                kind: EdgeKind::ReachingDef,
                variable: Some(var.clone()),
            });
        }
    }
    edges
}
