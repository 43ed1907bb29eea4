use std::collections::BTreeSet;

use serde::Serialize;

use super::point::candidates_at;
use super::{get_data_dependencies, resolve_point, AnalysisError, Direction, ProgramPoint};
use crate::cpg::{Cpg, NodeId, NodeKind};
use crate::glob::Glob;

const RELATIONS: [&str; 6] = ["<", "<=", ">", ">=", "==", "!="];

/// Calls whose arguments at the given positions carry a size or length.
/// Earlier entries win.
const SIZE_CALLS: &[(&str, &[usize])] = &[
    ("memcpy", &[2]),
    ("memmove", &[2]),
    ("memset", &[2]),
    ("strncpy", &[2]),
    ("strncat", &[2]),
    ("read", &[2]),
    ("recv", &[2]),
    ("fread", &[1, 2]),
    ("calloc", &[0, 1]),
    ("realloc", &[1]),
    ("snprintf", &[1]),
    ("*alloc", &[0]),
    ("*Malloc", &[0]),
];

/// Size-argument positions for a call to `name`, if it is size-carrying.
pub fn size_arguments(name: &str) -> Option<&'static [usize]> {
    SIZE_CALLS
        .iter()
        .find(|(pattern, _)| Glob::new(*pattern).matches(name))
        .map(|&(_, args)| args)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BoundsCheck {
    pub check: ProgramPoint,
    pub relation: String,
    pub variables: Vec<String>,
    /// The check's statement runs before every execution of the access.
    pub dominates_access: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BoundsReport {
    pub access: ProgramPoint,
    pub tracked: Vec<String>,
    pub checks: Vec<BoundsCheck>,
}

fn ident_names(cpg: &Cpg, root: NodeId) -> BTreeSet<String> {
    std::iter::once(root)
        .chain(cpg.descendants(root))
        .filter(|&n| cpg.node(n).kind == NodeKind::Identifier)
        .filter_map(|n| cpg.node(n).name.clone())
        .collect()
}

/// Index and size variables used by the statement `stmt` itself.
fn index_variables(cpg: &Cpg, stmt: NodeId) -> BTreeSet<String> {
    let mut vars = BTreeSet::new();
    for n in std::iter::once(stmt).chain(cpg.descendants(stmt)) {
        if cpg.statement_of(n) != Some(stmt) {
            continue;
        }
        let node = cpg.node(n);
        let kids = cpg.children(n);
        match node.kind {
            NodeKind::Operator if node.name.as_deref() == Some("[]") && kids.len() == 2 => {
                vars.extend(ident_names(cpg, kids[1]));
            }
            NodeKind::Call => {
                if let Some(args) = node.name.as_deref().and_then(size_arguments) {
                    for &i in args.iter().filter(|&&i| i < kids.len()) {
                        vars.extend(ident_names(cpg, kids[i]));
                    }
                }
            }
            _ => {}
        }
    }
    vars
}

/// Relational checks on the index or size variables of the access at
/// `file:line` (or the statement containing `col`), and whether each one
/// dominates the access.
pub fn find_bounds_checks(cpg: &Cpg, file: &str, line: u32, col: Option<u32>) -> Result<BoundsReport, AnalysisError> {
    let candidates = match col {
        Some(_) => vec![resolve_point(cpg, file, line, col)?],
        None => {
            let fidx = cpg.file_index(file).ok_or_else(|| AnalysisError::UnresolvedPoint {
                file: file.to_string(),
                line,
            })?;
            candidates_at(cpg, fidx, line)
        }
    };
    if candidates.is_empty() {
        return Err(AnalysisError::UnresolvedPoint {
            file: file.to_string(),
            line,
        });
    }
    let found = candidates.iter().find_map(|&c| {
        let stmt = cpg.statement_of(c)?;
        let vars = index_variables(cpg, stmt);
        (!vars.is_empty()).then_some((stmt, vars))
    });
    let Some((access, direct)) = found else {
        return Err(AnalysisError::NotABoundsContext(format!(
            "no array index or size argument at {file}:{line}"
        )));
    };

    // Variables the index depends on, through up to two definitions.
    let mut tracked = direct.clone();
    let mut level: BTreeSet<NodeId> = BTreeSet::new();
    for d in get_data_dependencies(cpg, access, Direction::Backward, 1, None) {
        if direct.contains(&d.variable) {
            level.insert(d.point.node_id);
        }
    }
    for &def in &level {
        for d in get_data_dependencies(cpg, def, Direction::Backward, 1, None) {
            tracked.insert(d.variable);
        }
    }
    tracked.retain(|v| !v.starts_with('<'));

    let info = cpg.method_of(access).expect("statements belong to methods");
    let mut checks = Vec::new();
    for n in cpg.descendants(info.id) {
        let node = cpg.node(n);
        if node.kind != NodeKind::Operator || !RELATIONS.contains(&node.name.as_deref().unwrap_or_default()) {
            continue;
        }
        let Some(stmt) = cpg.statement_of(n) else {
            continue;
        };
        let variables: Vec<String> = ident_names(cpg, n).intersection(&tracked).cloned().collect();
        if variables.is_empty() {
            continue;
        }
        checks.push(BoundsCheck {
            check: ProgramPoint::of(cpg, n),
            relation: node.name.clone().unwrap_or_default(),
            variables,
            dominates_access: info.dom.strictly_dominates(stmt, access),
        });
    }
    Ok(BoundsReport {
        access: ProgramPoint::of(cpg, access),
        tracked: tracked.into_iter().collect(),
        checks,
    })
}
