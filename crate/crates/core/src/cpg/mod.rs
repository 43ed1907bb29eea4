//! The code property graph: AST, CFG, data dependence (REACHING_DEF),
//! control dependence (CDG) and call relations over one node table.
//!
//! A `Cpg` is immutable once built. Only the node table, edge table, source
//! files and build report are stored; every index, the per-method CFG views,
//! dominator trees and def/use facts are derived from those on construction
//! or load.

mod build;
mod callgraph;
mod cdg;
mod cfg;
mod dataflow;
pub mod dominators;
mod serial;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::frontend::{FrontendError, Location, SourceFile};
use crate::glob::Glob;

pub use build::build_cpg;
pub use dataflow::{Def, NodeFacts, RETURN_VAR};
pub use dominators::DomTree;
pub use serial::{CacheError, CacheHeader, CACHE_FORMAT, CACHE_VERSION, DIGEST_ALGORITHM};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl std::fmt::Display for NodeId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Node kinds. `Operator` covers binary, unary and indexing expressions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum NodeKind {
    Method,
    Param,
    Local,
    Call,
    Identifier,
    Literal,
    Operator,
    Assign,
    ControlStructure,
    Return,
    MethodReturn,
    Block,
}

impl NodeKind {
    pub const ALL: [NodeKind; 12] = [
        NodeKind::Method,
        NodeKind::Param,
        NodeKind::Local,
        NodeKind::Call,
        NodeKind::Identifier,
        NodeKind::Literal,
        NodeKind::Operator,
        NodeKind::Assign,
        NodeKind::ControlStructure,
        NodeKind::Return,
        NodeKind::MethodReturn,
        NodeKind::Block,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            NodeKind::Method => "Method",
            NodeKind::Param => "Param",
            NodeKind::Local => "Local",
            NodeKind::Call => "Call",
            NodeKind::Identifier => "Identifier",
            NodeKind::Literal => "Literal",
            NodeKind::Operator => "Operator",
            NodeKind::Assign => "Assign",
            NodeKind::ControlStructure => "ControlStructure",
            NodeKind::Return => "Return",
            NodeKind::MethodReturn => "MethodReturn",
            NodeKind::Block => "Block",
        }
    }

    pub fn parse(name: &str) -> Option<NodeKind> {
        NodeKind::ALL.into_iter().find(|k| k.as_str() == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum EdgeKind {
    Ast,
    Cfg,
    ReachingDef,
    Cdg,
    Call,
    Arg,
    Contains,
}

impl EdgeKind {
    pub const ALL: [EdgeKind; 7] = [
        EdgeKind::Ast,
        EdgeKind::Cfg,
        EdgeKind::ReachingDef,
        EdgeKind::Cdg,
        EdgeKind::Call,
        EdgeKind::Arg,
        EdgeKind::Contains,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EdgeKind::Ast => "AST",
            EdgeKind::Cfg => "CFG",
            EdgeKind::ReachingDef => "REACHING_DEF",
            EdgeKind::Cdg => "CDG",
            EdgeKind::Call => "CALL",
            EdgeKind::Arg => "ARG",
            EdgeKind::Contains => "CONTAINS",
        }
    }

    pub fn parse(name: &str) -> Option<EdgeKind> {
        EdgeKind::ALL.into_iter().find(|k| k.as_str() == name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CpgNode {
    pub id: NodeId,
    pub kind: NodeKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub code: String,
    /// Index into [`Cpg::files`].
    pub file: u32,
    pub line: u32,
    pub col: u32,
    pub end_line: u32,
    pub end_col: u32,
    /// Enclosing method; `None` only for Method nodes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<NodeId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub type_name: Option<String>,
    /// Position among AST siblings.
    pub order: u32,
}

impl CpgNode {
    pub fn is_array(&self) -> bool {
        self.type_name.as_deref().is_some_and(|t| t.contains('['))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CpgEdge {
    pub src: NodeId,
    pub dst: NodeId,
    pub kind: EdgeKind,
    /// Variable carried by REACHING_DEF edges.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variable: Option<String>,
}

impl CpgEdge {
    fn sort_key(&self) -> (EdgeKind, NodeId, NodeId, Option<&str>) {
        (self.kind, self.src, self.dst, self.variable.as_deref())
    }
}

fn is_expression(kind: NodeKind) -> bool {
    matches!(
        kind,
        NodeKind::Call | NodeKind::Identifier | NodeKind::Literal | NodeKind::Operator
    )
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnalysisWarning {
    pub location: Location,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BuildReport {
    pub errors: Vec<FrontendError>,
    pub warnings: Vec<AnalysisWarning>,
}

/// Per-method view of the CFG plus dominator trees.
#[derive(Debug, Clone)]
pub struct MethodInfo {
    pub id: NodeId,
    pub exit: NodeId,
    pub name: String,
    pub file: u32,
    pub params: Vec<NodeId>,
    /// CFG nodes including entry (the Method node) and exit, sorted by id.
    pub cfg_nodes: Vec<NodeId>,
    pub succs: BTreeMap<NodeId, Vec<NodeId>>,
    pub preds: BTreeMap<NodeId, Vec<NodeId>>,
    pub dom: DomTree,
    pub pdom: DomTree,
}

impl MethodInfo {
    pub fn entry(&self) -> NodeId {
        self.id
    }

    pub fn successors(&self, n: NodeId) -> &[NodeId] {
        self.succs.get(&n).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn predecessors(&self, n: NodeId) -> &[NodeId] {
        self.preds.get(&n).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn is_cfg_node(&self, n: NodeId) -> bool {
        self.cfg_nodes.binary_search(&n).is_ok()
    }
}

#[derive(Debug, Clone, Default)]
struct CpgIndex {
    by_kind: BTreeMap<NodeKind, Vec<NodeId>>,
    by_name: BTreeMap<String, Vec<NodeId>>,
    by_line: BTreeMap<(u32, u32), Vec<NodeId>>,
    out_edges: Vec<Vec<u32>>,
    in_edges: Vec<Vec<u32>>,
    children: Vec<Vec<NodeId>>,
    parent: Vec<Option<NodeId>>,
    methods: Vec<MethodInfo>,
    method_slot: BTreeMap<NodeId, usize>,
    statement_of: Vec<Option<NodeId>>,
    facts: BTreeMap<NodeId, NodeFacts>,
}

#[derive(Debug, Clone)]
pub struct Cpg {
    files: Vec<SourceFile>,
    nodes: Vec<CpgNode>,
    edges: Vec<CpgEdge>,
    report: BuildReport,
    index: CpgIndex,
}

impl PartialEq for Cpg {
    fn eq(&self, other: &Self) -> bool {
        self.files == other.files
            && self.nodes == other.nodes
            && self.edges == other.edges
            && self.report == other.report
    }
}

impl Cpg {
    /// Assembles a graph from its stored parts and derives every index.
    pub(crate) fn from_parts(
        files: Vec<SourceFile>,
        nodes: Vec<CpgNode>,
        mut edges: Vec<CpgEdge>,
        report: BuildReport,
    ) -> Cpg {
        edges.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
        edges.dedup();
        let mut cpg = Cpg {
            files,
            nodes,
            edges,
            report,
            index: CpgIndex::default(),
        };
        cpg.rebuild_index();
        cpg
    }

    fn rebuild_index(&mut self) {
        let n = self.nodes.len();
        let mut idx = CpgIndex {
            out_edges: vec![Vec::new(); n],
            in_edges: vec![Vec::new(); n],
            children: vec![Vec::new(); n],
            parent: vec![None; n],
            statement_of: vec![None; n],
            ..CpgIndex::default()
        };
        for node in &self.nodes {
            idx.by_kind.entry(node.kind).or_default().push(node.id);
            if let Some(name) = &node.name {
                idx.by_name.entry(name.clone()).or_default().push(node.id);
            }
            idx.by_line.entry((node.file, node.line)).or_default().push(node.id);
        }
        for (i, edge) in self.edges.iter().enumerate() {
            idx.out_edges[edge.src.index()].push(i as u32);
            idx.in_edges[edge.dst.index()].push(i as u32);
            if edge.kind == EdgeKind::Ast {
                idx.children[edge.src.index()].push(edge.dst);
                idx.parent[edge.dst.index()] = Some(edge.src);
            }
        }
        for kids in &mut idx.children {
            kids.sort_by_key(|c| self.nodes[c.index()].order);
        }
        self.index = idx;

        let mut cfg_edges: BTreeMap<NodeId, Vec<(NodeId, NodeId)>> = BTreeMap::new();
        for e in self.edges.iter().filter(|e| e.kind == EdgeKind::Cfg) {
            let owner = self.nodes[e.src.index()].method.unwrap_or(e.src);
            cfg_edges.entry(owner).or_default().push((e.src, e.dst));
        }
        let methods: Vec<NodeId> = self.nodes_of_kind(NodeKind::Method).to_vec();
        for m in methods {
            let info = self.method_info(m, cfg_edges.get(&m).map(Vec::as_slice).unwrap_or(&[]));
            let slot = self.index.methods.len();
            self.index.method_slot.insert(m, slot);
            for &c in &info.cfg_nodes {
                self.index.statement_of[c.index()] = Some(c);
            }
            self.index.methods.push(info);
        }
        // Expression nodes map to their enclosing CFG statement.
        for node in &self.nodes {
            if self.index.statement_of[node.id.index()].is_some() || !is_expression(node.kind) {
                continue;
            }
            let mut cur = self.index.parent[node.id.index()];
            while let Some(p) = cur {
                if self.index.statement_of[p.index()] == Some(p) {
                    if self.nodes[p.index()].kind != NodeKind::ControlStructure || self.in_condition(p, node.id) {
                        self.index.statement_of[node.id.index()] = Some(p);
                    }
                    break;
                }
                if !is_expression(self.nodes[p.index()].kind) {
                    break;
                }
                cur = self.index.parent[p.index()];
            }
        }
        for i in 0..self.index.methods.len() {
            let method = self.index.methods[i].id;
            for (node, facts) in dataflow::method_facts(self, method).facts {
                self.index.facts.insert(node, facts);
            }
        }
    }

    fn in_condition(&self, control: NodeId, node: NodeId) -> bool {
        let Some(&cond) = self.index.children[control.index()].first() else {
            return false;
        };
        let mut cur = Some(node);
        while let Some(c) = cur {
            if c == cond {
                return true;
            }
            if c == control {
                return false;
            }
            cur = self.index.parent[c.index()];
        }
        false
    }

    fn method_info(&self, method: NodeId, cfg_edges: &[(NodeId, NodeId)]) -> MethodInfo {
        let exit = self
            .children(method)
            .iter()
            .copied()
            .find(|c| self.node(*c).kind == NodeKind::MethodReturn)
            .expect("every method has a MethodReturn child");
        let params: Vec<NodeId> = self
            .children(method)
            .iter()
            .copied()
            .filter(|c| self.node(*c).kind == NodeKind::Param)
            .collect();
        let mut succs: BTreeMap<NodeId, Vec<NodeId>> = BTreeMap::new();
        let mut preds: BTreeMap<NodeId, Vec<NodeId>> = BTreeMap::new();
        let mut cfg_nodes: BTreeSet<NodeId> = [method, exit].into();
        for &(src, dst) in cfg_edges {
            succs.entry(src).or_default().push(dst);
            preds.entry(dst).or_default().push(src);
            cfg_nodes.insert(src);
            cfg_nodes.insert(dst);
        }
        let dom = DomTree::compute(method, |n| succs.get(&n).cloned().unwrap_or_default());
        let pdom = DomTree::compute(exit, |n| preds.get(&n).cloned().unwrap_or_default());
        MethodInfo {
            id: method,
            exit,
            name: self.node(method).name.clone().unwrap_or_default(),
            file: self.node(method).file,
            params,
            cfg_nodes: cfg_nodes.into_iter().collect(),
            succs,
            preds,
            dom,
            pdom,
        }
    }

    pub fn files(&self) -> &[SourceFile] {
        &self.files
    }

    pub fn file(&self, idx: u32) -> &SourceFile {
        &self.files[idx as usize]
    }

    pub fn file_index(&self, path: &str) -> Option<u32> {
        self.files.iter().position(|f| f.path == path).map(|i| i as u32)
    }

    pub fn nodes(&self) -> &[CpgNode] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> &CpgNode {
        &self.nodes[id.index()]
    }

    pub fn edges(&self) -> &[CpgEdge] {
        &self.edges
    }

    pub fn report(&self) -> &BuildReport {
        &self.report
    }

    pub fn nodes_of_kind(&self, kind: NodeKind) -> &[NodeId] {
        self.index.by_kind.get(&kind).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn nodes_named(&self, name: &str) -> &[NodeId] {
        self.index.by_name.get(name).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Nodes whose name matches `pattern`, in id order.
    pub fn nodes_matching(&self, pattern: &Glob) -> Vec<NodeId> {
        let mut out: Vec<NodeId> = self
            .index
            .by_name
            .iter()
            .filter(|(name, _)| pattern.matches(name))
            .flat_map(|(_, ids)| ids.iter().copied())
            .collect();
        out.sort();
        out
    }

    /// Nodes starting on `line` of file `file`, in id order.
    pub fn nodes_at_line(&self, file: u32, line: u32) -> &[NodeId] {
        self.index.by_line.get(&(file, line)).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn out_edges(&self, id: NodeId) -> impl Iterator<Item = &CpgEdge> + '_ {
        self.index.out_edges[id.index()]
            .iter()
            .map(move |&i| &self.edges[i as usize])
    }

    pub fn in_edges(&self, id: NodeId) -> impl Iterator<Item = &CpgEdge> + '_ {
        self.index.in_edges[id.index()]
            .iter()
            .map(move |&i| &self.edges[i as usize])
    }

    pub fn out_edges_of(&self, id: NodeId, kind: EdgeKind) -> impl Iterator<Item = &CpgEdge> + '_ {
        self.out_edges(id).filter(move |e| e.kind == kind)
    }

    pub fn in_edges_of(&self, id: NodeId, kind: EdgeKind) -> impl Iterator<Item = &CpgEdge> + '_ {
        self.in_edges(id).filter(move |e| e.kind == kind)
    }

    /// AST children in source order.
    pub fn children(&self, id: NodeId) -> &[NodeId] {
        &self.index.children[id.index()]
    }

    pub fn parent(&self, id: NodeId) -> Option<NodeId> {
        self.index.parent[id.index()]
    }

    /// All AST descendants of `id` (excluding `id`), in pre-order.
    pub fn descendants(&self, id: NodeId) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut stack: Vec<NodeId> = self.children(id).iter().rev().copied().collect();
        while let Some(n) = stack.pop() {
            out.push(n);
            stack.extend(self.children(n).iter().rev());
        }
        out
    }

    pub fn methods(&self) -> &[MethodInfo] {
        &self.index.methods
    }

    pub fn method(&self, id: NodeId) -> Option<&MethodInfo> {
        self.index.method_slot.get(&id).map(|&i| &self.index.methods[i])
    }

    /// Method containing `id` (or `id` itself when it is a Method).
    pub fn method_of(&self, id: NodeId) -> Option<&MethodInfo> {
        let node = self.node(id);
        match node.kind {
            NodeKind::Method => self.method(id),
            _ => node.method.and_then(|m| self.method(m)),
        }
    }

    pub fn methods_named(&self, name: &str) -> Vec<&MethodInfo> {
        self.nodes_named(name)
            .iter()
            .filter_map(|&id| self.method(id))
            .collect()
    }

    /// The CFG statement node that `id` belongs to. CFG nodes map to
    /// themselves; Params and unreachable statements map to `None`.
    pub fn statement_of(&self, id: NodeId) -> Option<NodeId> {
        self.index.statement_of[id.index()]
    }

    pub fn is_cfg_node(&self, id: NodeId) -> bool {
        self.statement_of(id) == Some(id)
    }

    /// Def/use facts for a CFG node.
    pub fn facts(&self, id: NodeId) -> Option<&NodeFacts> {
        self.index.facts.get(&id)
    }

    pub fn location(&self, id: NodeId) -> Location {
        let node = self.node(id);
        Location::new(&self.file(node.file).path, node.line, node.col)
    }

    /// Call nodes invoking `method` (targets of CALL edges).
    pub fn call_sites_of(&self, method: NodeId) -> Vec<NodeId> {
        self.in_edges_of(method, EdgeKind::Call).map(|e| e.src).collect()
    }

    /// Callee method of a call node, when defined.
    pub fn callee_of(&self, call: NodeId) -> Option<NodeId> {
        self.out_edges_of(call, EdgeKind::Call).map(|e| e.dst).next()
    }

    /// Call nodes whose callee is not defined in the codebase.
    pub fn is_external_call(&self, call: NodeId) -> bool {
        self.node(call).kind == NodeKind::Call && self.callee_of(call).is_none()
    }
}
