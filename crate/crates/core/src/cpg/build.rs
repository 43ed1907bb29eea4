use std::collections::BTreeMap;

use super::callgraph::{binding_edges, call_edges};
use super::cdg::control_dependences;
use super::cfg::build_cfg;
use super::dataflow::{method_facts, reaching_def_edges, reaching_definitions};
use super::{BuildReport, Cpg, CpgEdge, CpgNode, EdgeKind, NodeId, NodeKind};
use crate::frontend::{parse, Ast, AstId, AstKind, SourceFile};

/// Parses `files` and builds the full graph. Files that fail to parse are
/// kept (for snippets) but contribute no nodes; their errors are recorded in
/// the build report. Node ids follow a pre-order walk over files in the given
/// order, so identical inputs always yield identical graphs.
pub fn build_cpg(mut files: Vec<SourceFile>) -> Cpg {
    files.sort_by(|a, b| a.path.cmp(&b.path));
    let outcome = parse(&files);
    let mut lowering = Lowering {
        ast: &outcome.ast,
        nodes: Vec::new(),
        edges: Vec::new(),
    };
    for &unit in &outcome.ast.units {
        for (order, &f) in outcome.ast.node(unit).children.iter().enumerate() {
            lowering.lower(f, None, None, order as u32);
        }
    }
    let Lowering {
        nodes,
        edges: ast_edges,
        ..
    } = lowering;
    let report = BuildReport {
        errors: outcome.errors,
        warnings: Vec::new(),
    };

    // Stage 1: syntax only, enough to derive the CFGs.
    let syntax = Cpg::from_parts(files, nodes, ast_edges, report);
    let mut edges = syntax.edges.clone();
    for &m in syntax.nodes_of_kind(NodeKind::Method) {
        edges.extend(build_cfg(&syntax, m).into_iter().map(|(src, dst)| CpgEdge {
            src,
            dst,
            kind: EdgeKind::Cfg,
            variable: None,
        }));
    }
    let Cpg {
        files,
        nodes,
        mut report,
        ..
    } = syntax;

    // Stage 2: CFG views, dominators and def/use facts are now indexed.
    let mut flow = Cpg::from_parts(files, nodes, edges, BuildReport::default());
    let mut reaching = BTreeMap::new();
    let mut extra = Vec::new();
    for info in flow.methods() {
        report.warnings.extend(method_facts(&flow, info.id).warnings);
        let sets = reaching_definitions(info, &flow);
        extra.extend(reaching_def_edges(info, &flow, &sets));
        reaching.insert(info.id, sets);
        extra.extend(control_dependences(info).into_iter().map(|(src, dst)| CpgEdge {
            src,
            dst,
            kind: EdgeKind::Cdg,
            variable: None,
        }));
        extra.extend(info.cfg_nodes.iter().filter(|&&n| n != info.id).map(|&n| CpgEdge {
            src: info.id,
            dst: n,
            kind: EdgeKind::Contains,
            variable: None,
        }));
    }
    // Call resolution needs to be visible before binding edges are derived.
    let calls = call_edges(&flow);
    flow.edges.extend(calls.iter().cloned());
    flow = Cpg::from_parts(flow.files, flow.nodes, flow.edges, BuildReport::default());
    extra.extend(binding_edges(&flow, &reaching));

    let Cpg {
        files,
        nodes,
        mut edges,
        ..
    } = flow;
    edges.extend(extra);
    Cpg::from_parts(files, nodes, edges, report)
}

struct Lowering<'a> {
    ast: &'a Ast,
    nodes: Vec<CpgNode>,
    edges: Vec<CpgEdge>,
}

impl Lowering<'_> {
    fn lower(&mut self, ast_id: AstId, parent: Option<NodeId>, method: Option<NodeId>, order: u32) -> NodeId {
        let a = self.ast.node(ast_id);
        if a.kind == AstKind::ExprStmt {
            return self.lower(a.children[0], parent, method, order);
        }
        let kind = match a.kind {
            AstKind::FunctionDef => NodeKind::Method,
            AstKind::Param => NodeKind::Param,
            AstKind::VarDecl => NodeKind::Local,
            AstKind::Assign => NodeKind::Assign,
            AstKind::BinaryOp | AstKind::UnaryOp | AstKind::ArrayIndex => NodeKind::Operator,
            AstKind::Call => NodeKind::Call,
            AstKind::Identifier => NodeKind::Identifier,
            AstKind::IntLiteral | AstKind::StringLiteral => NodeKind::Literal,
            AstKind::If | AstKind::While => NodeKind::ControlStructure,
            AstKind::Return => NodeKind::Return,
            AstKind::Block => NodeKind::Block,
            AstKind::TranslationUnit | AstKind::ExprStmt => unreachable!("not lowered"),
        };
        let id = NodeId(self.nodes.len() as u32);
        let type_name = match a.kind {
            AstKind::IntLiteral => Some("int".to_string()),
            AstKind::StringLiteral => Some("string".to_string()),
            _ => a.type_name.clone(),
        };
        self.nodes.push(CpgNode {
            id,
            kind,
            name: a.name.clone(),
            code: a.code.clone(),
            file: a.span.file as u32,
            line: a.span.start_line,
            col: a.span.start_col,
            end_line: a.span.end_line,
            end_col: a.span.end_col,
            method,
            type_name,
            order,
        });
        if let Some(p) = parent {
            self.edges.push(CpgEdge {
                src: p,
                dst: id,
                kind: EdgeKind::Ast,
                variable: None,
            });
        }
        let child_method = if kind == NodeKind::Method { Some(id) } else { method };
        let children = a.children.clone();
        for (i, &c) in children.iter().enumerate() {
            self.lower(c, Some(id), child_method, i as u32);
        }
        if kind == NodeKind::Method {
            let ret_type = a.type_name.clone().unwrap_or_default();
            let exit = NodeId(self.nodes.len() as u32);
            self.nodes.push(CpgNode {
                id: exit,
                kind: NodeKind::MethodReturn,
                name: None,
                code: ret_type.clone(),
                file: a.span.file as u32,
                line: a.span.start_line,
                col: a.span.start_col,
                end_line: a.span.start_line,
                end_col: a.span.start_col + ret_type.len().saturating_sub(1) as u32,
                method: Some(id),
                type_name: Some(ret_type),
                order: children.len() as u32,
            });
            self.edges.push(CpgEdge {
                src: id,
                dst: exit,
                kind: EdgeKind::Ast,
                variable: None,
            });
        }
        id
    }
}
