//! Reference implementations used to cross-check the analyses. Each works
//! from the raw edge list and the textbook definition, trading speed for
//! obviousness: path enumeration instead of fixpoints, reachability
//! instead of dominator trees, whole-set iteration instead of worklists.

use std::collections::{BTreeMap, BTreeSet};

use codebadger_core::analyses::SourceSinkConfig;
use codebadger_core::cpg::{Cpg, EdgeKind, MethodInfo, NodeId, NodeKind};

use crate::corpus::FlowPair;

/// CFG successors of one method, read from CFG edges.
pub fn cfg_successors(cpg: &Cpg, m: &MethodInfo) -> BTreeMap<NodeId, Vec<NodeId>> {
    let mut succ: BTreeMap<NodeId, Vec<NodeId>> = m.cfg_nodes.iter().map(|&n| (n, Vec::new())).collect();
    for e in cpg.edges().iter().filter(|e| e.kind == EdgeKind::Cfg) {
        if let Some(v) = succ.get_mut(&e.src) {
            v.push(e.dst);
        }
    }
    succ
}

fn reachable(succ: &BTreeMap<NodeId, Vec<NodeId>>, from: NodeId, removed: Option<NodeId>) -> BTreeSet<NodeId> {
    let mut seen = BTreeSet::new();
    if Some(from) == removed {
        return seen;
    }
    let mut stack = vec![from];
    seen.insert(from);
    while let Some(n) = stack.pop() {
        for &s in succ.get(&n).into_iter().flatten() {
            if Some(s) != removed && seen.insert(s) {
                stack.push(s);
            }
        }
    }
    seen
}

/// `d` dominates `n` iff removing `d` disconnects `n` from the entry.
pub fn dominators(cpg: &Cpg, m: &MethodInfo) -> BTreeMap<NodeId, BTreeSet<NodeId>> {
    let succ = cfg_successors(cpg, m);
    let live = reachable(&succ, m.entry(), None);
    let mut dom: BTreeMap<NodeId, BTreeSet<NodeId>> = live.iter().map(|&n| (n, BTreeSet::new())).collect();
    for &d in &live {
        let without = reachable(&succ, m.entry(), Some(d));
        for &n in &live {
            if n == d || !without.contains(&n) {
                dom.get_mut(&n).unwrap().insert(d);
            }
        }
    }
    dom
}

/// `p` post-dominates `n` iff removing `p` disconnects `n` from the exit.
/// Only nodes that can reach the exit are keys.
pub fn postdominators(cpg: &Cpg, m: &MethodInfo) -> BTreeMap<NodeId, BTreeSet<NodeId>> {
    let succ = cfg_successors(cpg, m);
    let reaches_exit: Vec<NodeId> = m
        .cfg_nodes
        .iter()
        .copied()
        .filter(|&n| reachable(&succ, n, None).contains(&m.exit))
        .collect();
    let mut pdom = BTreeMap::new();
    for &n in &reaches_exit {
        let set: BTreeSet<NodeId> = m
            .cfg_nodes
            .iter()
            .copied()
            .filter(|&p| p == n || !reachable(&succ, n, Some(p)).contains(&m.exit))
            .collect();
        pdom.insert(n, set);
    }
    pdom
}

/// Control dependences by definition: `y` depends on `x` when some
/// successor of `x` is post-dominated by `y` while `x` itself is not
/// strictly post-dominated by `y`. Self-dependences are omitted.
pub fn control_dependences(cpg: &Cpg, m: &MethodInfo) -> BTreeSet<(NodeId, NodeId)> {
    let succ = cfg_successors(cpg, m);
    let pdom = postdominators(cpg, m);
    let mut out = BTreeSet::new();
    for (&x, succs) in &succ {
        let Some(px) = pdom.get(&x) else { continue };
        for &y in &m.cfg_nodes {
            if y == x || px.contains(&y) {
                continue;
            }
            if succs.iter().any(|s| pdom.get(s).is_some_and(|ps| ps.contains(&y))) {
                out.insert((x, y));
            }
        }
    }
    out
}

/// CDG edges the graph holds for one method.
pub fn cdg_edges(cpg: &Cpg, m: &MethodInfo) -> BTreeSet<(NodeId, NodeId)> {
    cpg.edges()
        .iter()
        .filter(|e| e.kind == EdgeKind::Cdg && m.is_cfg_node(e.src))
        .map(|e| (e.src, e.dst))
        .collect()
}

pub type RdEdge = (NodeId, NodeId, String);

/// Reaching definitions by path enumeration: a definition of `v` at `s`
/// reaches a use of `v` at `u` when some CFG path from `s` to `u` has no
/// intermediate node that strongly defines `v`. Parameter definitions are
/// made at the entry; a parameter reaching the exit unchanged is not an
/// edge.
pub fn reaching_definitions(cpg: &Cpg, m: &MethodInfo) -> BTreeSet<RdEdge> {
    let succ = cfg_successors(cpg, m);
    let facts = |n: NodeId| cpg.facts(n).cloned().unwrap_or_default();
    let kills = |n: NodeId, v: &str| facts(n).defs.iter().any(|d| d.strong && d.var == v);
    let mut out = BTreeSet::new();
    for &s in &m.cfg_nodes {
        for def in facts(s).defs {
            for &u in &m.cfg_nodes {
                if !facts(u).uses.contains(&def.var) {
                    continue;
                }
                if u == m.exit && cpg.node(def.site).kind == NodeKind::Param {
                    continue;
                }
                if clear_path_exists(&succ, s, u, &|n| kills(n, &def.var)) {
                    out.insert((def.site, u, def.var.clone()));
                }
            }
        }
    }
    out
}

/// Depth-first enumeration of simple paths `from -> ... -> to` (at least one
/// edge; `to` may equal `from`) whose interior avoids `blocked`.
fn clear_path_exists(
    succ: &BTreeMap<NodeId, Vec<NodeId>>,
    from: NodeId,
    to: NodeId,
    blocked: &dyn Fn(NodeId) -> bool,
) -> bool {
    fn walk(
        succ: &BTreeMap<NodeId, Vec<NodeId>>,
        at: NodeId,
        to: NodeId,
        visited: &mut Vec<NodeId>,
        blocked: &dyn Fn(NodeId) -> bool,
    ) -> bool {
        for &n in succ.get(&at).into_iter().flatten() {
            if n == to {
                return true;
            }
            if visited.contains(&n) || blocked(n) {
                continue;
            }
            visited.push(n);
            if walk(succ, n, to, visited, blocked) {
                return true;
            }
            visited.pop();
        }
        false
    }
    walk(succ, from, to, &mut vec![from], blocked)
}

/// Intra-procedural REACHING_DEF edges the graph holds for one method.
/// Binding edges (into a Param, or out of a MethodReturn) are excluded.
pub fn reaching_def_edges(cpg: &Cpg, m: &MethodInfo) -> BTreeSet<RdEdge> {
    cpg.edges()
        .iter()
        .filter(|e| e.kind == EdgeKind::ReachingDef)
        .filter(|e| cpg.node(e.dst).kind != NodeKind::Param && cpg.node(e.src).kind != NodeKind::MethodReturn)
        .filter(|e| m.is_cfg_node(e.dst))
        .map(|e| (e.src, e.dst, e.variable.clone().unwrap_or_default()))
        .collect()
}

fn ast_parents(cpg: &Cpg) -> BTreeMap<NodeId, NodeId> {
    cpg.edges()
        .iter()
        .filter(|e| e.kind == EdgeKind::Ast)
        .map(|e| (e.dst, e.src))
        .collect()
}

fn cfg_node_set(cpg: &Cpg) -> BTreeSet<NodeId> {
    cpg.methods().iter().flat_map(|m| m.cfg_nodes.iter().copied()).collect()
}

/// Nearest enclosing CFG node by climbing AST edges through expressions.
/// `None` for expressions in unreachable statements.
fn enclosing_statement(
    cpg: &Cpg,
    parents: &BTreeMap<NodeId, NodeId>,
    cfg: &BTreeSet<NodeId>,
    mut n: NodeId,
) -> Option<NodeId> {
    loop {
        if cfg.contains(&n) {
            return Some(n);
        }
        if !matches!(
            cpg.node(n).kind,
            NodeKind::Call | NodeKind::Identifier | NodeKind::Literal | NodeKind::Operator
        ) {
            return None;
        }
        n = *parents.get(&n)?;
    }
}

fn subtree(cpg: &Cpg, root: NodeId) -> Vec<NodeId> {
    let mut out = vec![root];
    let mut i = 0;
    while i < out.len() {
        out.extend(cpg.children(out[i]).iter().copied());
        i += 1;
    }
    out
}

fn callee(cpg: &Cpg, call: NodeId) -> Option<NodeId> {
    cpg.edges()
        .iter()
        .find(|e| e.kind == EdgeKind::Call && e.src == call)
        .map(|e| e.dst)
}

struct Sink {
    call: NodeId,
    stmt: NodeId,
    names: BTreeSet<String>,
    callees: BTreeSet<NodeId>,
    arg_nodes: BTreeSet<NodeId>,
}

/// Taint flows by brute force: every simple path over REACHING_DEF edges
/// from a source call's statement, where the last edge may return to an
/// already visited node. A sink is reached when the last edge's variable
/// names an identifier in a relevant argument, or the edge returns from a
/// method that a relevant argument calls. A source nested inside a
/// relevant argument reaches that sink directly.
pub fn taint_pairs(cpg: &Cpg, config: &SourceSinkConfig) -> BTreeSet<FlowPair> {
    let parents = ast_parents(cpg);
    let cfg = cfg_node_set(cpg);
    let calls: Vec<NodeId> = cpg
        .nodes()
        .iter()
        .filter(|n| n.kind == NodeKind::Call)
        .map(|n| n.id)
        .collect();
    let name = |n: NodeId| cpg.node(n).name.clone().unwrap_or_default();

    let mut sinks: Vec<Sink> = Vec::new();
    for &c in &calls {
        let Some(spec) = config.sink_for(&name(c)) else {
            continue;
        };
        let Some(stmt) = enclosing_statement(cpg, &parents, &cfg, c) else {
            continue;
        };
        let args = cpg.children(c);
        let mut sink = Sink {
            call: c,
            stmt,
            names: BTreeSet::new(),
            callees: BTreeSet::new(),
            arg_nodes: BTreeSet::new(),
        };
        for i in spec.relevant(args.len()) {
            for n in subtree(cpg, args[i]) {
                sink.arg_nodes.insert(n);
                match cpg.node(n).kind {
                    NodeKind::Identifier => {
                        sink.names.insert(name(n));
                    }
                    NodeKind::Call => sink.callees.extend(callee(cpg, n)),
                    _ => {}
                }
            }
        }
        sinks.push(sink);
    }

    let mut rd: BTreeMap<NodeId, Vec<(NodeId, NodeId, String)>> = BTreeMap::new();
    for e in cpg.edges().iter().filter(|e| e.kind == EdgeKind::ReachingDef) {
        rd.entry(e.src)
            .or_default()
            .push((e.src, e.dst, e.variable.clone().unwrap_or_default()));
    }

    let position = |n: NodeId| {
        let node = cpg.node(n);
        (cpg.file(node.file).path.clone(), node.line)
    };
    let mut out = BTreeSet::new();
    for &src in calls.iter().filter(|&&c| config.is_source(&name(c))) {
        let Some(start) = enclosing_statement(cpg, &parents, &cfg, src) else {
            continue;
        };
        let mut reached: BTreeSet<NodeId> = sinks
            .iter()
            .filter(|k| k.stmt == start && k.arg_nodes.contains(&src))
            .map(|k| k.call)
            .collect();
        let mut visited = vec![start];
        enumerate(cpg, &rd, &sinks, start, &mut visited, &mut reached);
        for k in reached {
            let (sf, sl) = position(src);
            let (kf, kl) = position(k);
            out.insert(FlowPair {
                source_file: sf,
                source_line: sl,
                sink_file: kf,
                sink_line: kl,
            });
        }
    }
    out
}

fn enumerate(
    cpg: &Cpg,
    rd: &BTreeMap<NodeId, Vec<(NodeId, NodeId, String)>>,
    sinks: &[Sink],
    at: NodeId,
    visited: &mut Vec<NodeId>,
    reached: &mut BTreeSet<NodeId>,
) {
    for (src, dst, var) in rd.get(&at).into_iter().flatten() {
        let returning = (cpg.node(*src).kind == NodeKind::MethodReturn)
            .then(|| cpg.node(*src).method)
            .flatten();
        for k in sinks.iter().filter(|k| k.stmt == *dst) {
            if k.names.contains(var) || returning.is_some_and(|m| k.callees.contains(&m)) {
                reached.insert(k.call);
            }
        }
        if visited.contains(dst) {
            continue;
        }
        visited.push(*dst);
        enumerate(cpg, rd, sinks, *dst, visited, reached);
        visited.pop();
    }
}

/// Backward-slice reference. Direct dependencies of a node are the
/// sources of REACHING_DEF edges into it, plus the sources of CDG edges
/// into it or, when there are none, the statements calling its method.
pub struct SliceOracle {
    deps: BTreeMap<NodeId, BTreeSet<NodeId>>,
}

impl SliceOracle {
    pub fn new(cpg: &Cpg) -> Self {
        let parents = ast_parents(cpg);
        let cfg = cfg_node_set(cpg);
        let mut deps: BTreeMap<NodeId, BTreeSet<NodeId>> = BTreeMap::new();
        let mut control: BTreeMap<NodeId, BTreeSet<NodeId>> = BTreeMap::new();
        let mut callers: BTreeMap<NodeId, BTreeSet<NodeId>> = BTreeMap::new();
        for e in cpg.edges() {
            match e.kind {
                EdgeKind::ReachingDef => {
                    deps.entry(e.dst).or_default().insert(e.src);
                }
                EdgeKind::Cdg => {
                    control.entry(e.dst).or_default().insert(e.src);
                }
                EdgeKind::Call => {
                    callers
                        .entry(e.dst)
                        .or_default()
                        .extend(enclosing_statement(cpg, &parents, &cfg, e.src));
                }
                _ => {}
            }
        }
        for node in cpg.nodes() {
            let n = node.id;
            let extra = match control.get(&n) {
                Some(c) => c.clone(),
                None => {
                    let method = if node.kind == NodeKind::Method {
                        Some(n)
                    } else {
                        node.method
                    };
                    method.and_then(|m| callers.get(&m).cloned()).unwrap_or_default()
                }
            };
            deps.entry(n).or_default().extend(extra);
        }
        SliceOracle { deps }
    }

    pub fn dependencies(&self, n: NodeId) -> &BTreeSet<NodeId> {
        &self.deps[&n]
    }

    /// Least fixpoint of `S = {c} ∪ deps(S)`, computed by re-expanding the
    /// whole set until it stops growing.
    pub fn slice(&self, criterion: NodeId) -> BTreeSet<NodeId> {
        let mut set = BTreeSet::from([criterion]);
        loop {
            let mut next = set.clone();
            for n in &set {
                next.extend(self.dependencies(*n).iter().copied());
            }
            if next == set {
                return set;
            }
            set = next;
        }
    }

    pub fn is_closed(&self, set: &BTreeSet<NodeId>) -> bool {
        set.iter().all(|n| self.dependencies(*n).is_subset(set))
    }

    /// Points of `set` other than `criterion` whose removal leaves a closed
    /// set; empty for a minimal slice.
    pub fn removable(&self, set: &BTreeSet<NodeId>, criterion: NodeId) -> Vec<NodeId> {
        set.iter()
            .copied()
            .filter(|&p| p != criterion)
            .filter(|&p| !set.iter().any(|&x| x != p && self.dependencies(x).contains(&p)))
            .collect()
    }
}
