use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::Serialize;

use super::{method_name, ProgramPoint};
use crate::cpg::{Cpg, EdgeKind, NodeId, NodeKind};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SliceLine {
    pub file: String,
    pub line: u32,
    pub method: Option<String>,
    pub code: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Slice {
    pub criterion: ProgramPoint,
    pub points: Vec<NodeId>,
    pub lines: Vec<SliceLine>,
    pub code: String,
}

/// Nodes `id` directly depends on: definitions reaching it (including
/// parameter and return bindings) and the branches governing it. A node
/// with no governing branch inside its method is governed by the statements
/// that call its method.
fn dependencies(cpg: &Cpg, id: NodeId, out: &mut Vec<NodeId>) {
    out.extend(cpg.in_edges_of(id, EdgeKind::ReachingDef).map(|e| e.src));
    let before = out.len();
    out.extend(cpg.in_edges_of(id, EdgeKind::Cdg).map(|e| e.src));
    if out.len() == before {
        if let Some(m) = cpg.method_of(id) {
            out.extend(cpg.call_sites_of(m.id).into_iter().filter_map(|c| cpg.statement_of(c)));
        }
    }
}

/// Backward slice: the worklist closure of [`dependencies`] from the
/// criterion.
pub fn slice_points(cpg: &Cpg, criterion: NodeId) -> BTreeSet<NodeId> {
    let mut points = BTreeSet::from([criterion]);
    let mut work = vec![criterion];
    let mut deps = Vec::new();
    while let Some(n) = work.pop() {
        deps.clear();
        dependencies(cpg, n, &mut deps);
        for &d in &deps {
            if points.insert(d) {
                work.push(d);
            }
        }
    }
    points
}

pub fn get_program_slice(cpg: &Cpg, criterion: NodeId) -> Slice {
    let points = slice_points(cpg, criterion);
    let mut by_line: BTreeMap<(u32, u32), Option<String>> = BTreeMap::new();
    for &p in &points {
        let node = cpg.node(p);
        let method = match node.kind {
            NodeKind::Method => node.name.clone(),
            _ => method_name(cpg, p),
        };
        by_line.entry((node.file, node.line)).or_insert(method);
    }
    let lines: Vec<SliceLine> = by_line
        .into_iter()
        .map(|((file, line), method)| {
            let f = cpg.file(file);
            SliceLine {
                file: f.path.clone(),
                line,
                method,
                code: f.line_text(line as usize).unwrap_or_default().trim_end().to_string(),
            }
        })
        .collect();
    let mut code = String::new();
    let mut group: Option<(&Option<String>, &str)> = None;
    for l in &lines {
        let key = (&l.method, l.file.as_str());
        if group != Some(key) {
            let name = l.method.as_deref().unwrap_or("?");
            let _ = writeln!(code, "// {name} ({})", l.file);
            group = Some(key);
        }
        let _ = writeln!(code, "{}:{}: {}", l.file, l.line, l.code);
    }
    Slice {
        criterion: ProgramPoint::of(cpg, criterion),
        points: points.into_iter().collect(),
        lines,
        code,
    }
}
