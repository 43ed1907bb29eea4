use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::AnalysisError;
use crate::cpg::{Cpg, NodeId, NodeKind};
use crate::glob::Glob;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MethodSummary {
    pub name: String,
    pub file: String,
    pub start_line: u32,
    pub end_line: u32,
    pub params: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MethodSource {
    pub name: String,
    pub file: String,
    pub start_line: u32,
    pub end_line: u32,
    /// Exact source text of the definition.
    pub source: String,
    /// The definition's full lines, each prefixed with its line number.
    pub numbered: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CallSite {
    pub caller: String,
    pub callee: String,
    pub file: String,
    pub line: u32,
    pub col: u32,
    pub args: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Snippet {
    pub file: String,
    pub start_line: u32,
    pub end_line: u32,
    pub code: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LiteralKind {
    Int,
    String,
    Any,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LiteralHit {
    pub value: String,
    pub kind: LiteralKind,
    pub file: String,
    pub line: u32,
    pub col: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CodebaseSummary {
    pub files: usize,
    pub methods: usize,
    pub call_sites: usize,
    pub loc: usize,
    pub external_callees: Vec<String>,
}

fn summary_of(cpg: &Cpg, id: NodeId) -> MethodSummary {
    let node = cpg.node(id);
    MethodSummary {
        name: node.name.clone().unwrap_or_default(),
        file: cpg.file(node.file).path.clone(),
        start_line: node.line,
        end_line: node.end_line,
        params: cpg.method(id).map_or(0, |m| m.params.len()),
    }
}

/// Methods whose name matches `pattern`, by file then start line.
pub fn list_methods(cpg: &Cpg, pattern: &Glob) -> Vec<MethodSummary> {
    let mut ids: Vec<NodeId> = cpg
        .methods()
        .iter()
        .filter(|m| pattern.matches(&m.name))
        .map(|m| m.id)
        .collect();
    ids.sort_by_key(|&id| {
        let n = cpg.node(id);
        (n.file, n.line, n.col)
    });
    ids.into_iter().map(|id| summary_of(cpg, id)).collect()
}

fn offset(cpg: &Cpg, file: u32, line: u32, col: u32) -> usize {
    cpg.file(file).line_ranges()[line as usize - 1].0 + col as usize - 1
}

/// Source of the method called `name`, optionally restricted to one file.
pub fn get_method_source(cpg: &Cpg, name: &str, file: Option<&str>) -> Result<MethodSource, AnalysisError> {
    let matches: Vec<NodeId> = cpg
        .methods_named(name)
        .iter()
        .map(|m| m.id)
        .filter(|&id| file.is_none_or(|f| cpg.file(cpg.node(id).file).path == f))
        .collect();
    let id = match matches.as_slice() {
        [] => return Err(AnalysisError::UnknownMethod(name.to_string())),
        [one] => *one,
        many => {
            return Err(AnalysisError::AmbiguousMethod {
                name: name.to_string(),
                candidates: many.iter().map(|&m| cpg.location(m)).collect(),
            })
        }
    };
    let node = cpg.node(id);
    let f = cpg.file(node.file);
    let start = offset(cpg, node.file, node.line, node.col);
    let end = offset(cpg, node.file, node.end_line, node.end_col) + 1;
    let mut numbered = String::new();
    for line in node.line..=node.end_line {
        let text = f.line_text(line as usize).unwrap_or_default();
        let _ = writeln!(numbered, "{line:>4} | {text}");
    }
    Ok(MethodSource {
        name: name.to_string(),
        file: f.path.clone(),
        start_line: node.line,
        end_line: node.end_line,
        source: f.content[start..end].to_string(),
        numbered,
    })
}

/// Call sites whose callee matches `pattern`, optionally only those inside
/// methods named `within`.
pub fn list_calls(cpg: &Cpg, pattern: &Glob, within: Option<&str>) -> Result<Vec<CallSite>, AnalysisError> {
    if let Some(w) = within {
        if cpg.methods_named(w).is_empty() {
            return Err(AnalysisError::UnknownMethod(w.to_string()));
        }
    }
    let mut out: Vec<(u32, NodeId, CallSite)> = Vec::new();
    for &call in cpg.nodes_of_kind(NodeKind::Call) {
        let node = cpg.node(call);
        let callee = node.name.clone().unwrap_or_default();
        let caller = cpg.method_of(call).map(|m| m.name.clone()).unwrap_or_default();
        if !pattern.matches(&callee) || within.is_some_and(|w| w != caller) {
            continue;
        }
        let site = CallSite {
            caller,
            callee,
            file: cpg.file(node.file).path.clone(),
            line: node.line,
            col: node.col,
            args: cpg.children(call).iter().map(|&a| cpg.node(a).code.clone()).collect(),
        };
        out.push((node.file, call, site));
    }
    out.sort_by_key(|(file, call, site)| (*file, site.line, site.col, *call));
    Ok(out.into_iter().map(|(.., s)| s).collect())
}

/// Verbatim lines `start_line..=end_line` (1-based) of `file`.
pub fn get_code_snippet(cpg: &Cpg, file: &str, start_line: u32, end_line: u32) -> Result<Snippet, AnalysisError> {
    let idx = cpg
        .file_index(file)
        .ok_or_else(|| AnalysisError::Range(format!("unknown file '{file}'")))?;
    let f = cpg.file(idx);
    let code = f
        .lines_verbatim(start_line as usize, end_line as usize)
        .ok_or_else(|| {
            AnalysisError::Range(format!(
                "lines {start_line}-{end_line} out of range for '{file}' ({} lines)",
                f.line_count()
            ))
        })?;
    Ok(Snippet {
        file: file.to_string(),
        start_line,
        end_line,
        code: code.to_string(),
    })
}

fn decode_string(code: &str) -> String {
    let inner = code.strip_prefix('"').and_then(|s| s.strip_suffix('"')).unwrap_or(code);
    let mut out = String::new();
    let mut chars = inner.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('n') => out.push('\n'),
            Some('t') => out.push('\t'),
            Some(other) => out.push(other),
            None => {}
        }
    }
    out
}

/// Literals whose value matches `pattern`. String values are decoded
/// before matching.
pub fn search_literals(cpg: &Cpg, pattern: &Glob, kind: LiteralKind) -> Vec<LiteralHit> {
    let mut hits = Vec::new();
    for &lit in cpg.nodes_of_kind(NodeKind::Literal) {
        let node = cpg.node(lit);
        let (lit_kind, value) = if node.code.starts_with('"') {
            (LiteralKind::String, decode_string(&node.code))
        } else {
            (LiteralKind::Int, node.code.clone())
        };
        if (kind != LiteralKind::Any && kind != lit_kind) || !pattern.matches(&value) {
            continue;
        }
        hits.push((
            (node.file, node.line, node.col, lit),
            LiteralHit {
                value,
                kind: lit_kind,
                file: cpg.file(node.file).path.clone(),
                line: node.line,
                col: node.col,
            },
        ));
    }
    hits.sort_by_key(|(k, _)| *k);
    hits.into_iter().map(|(_, h)| h).collect()
}

pub fn get_codebase_summary(cpg: &Cpg) -> CodebaseSummary {
    let calls = cpg.nodes_of_kind(NodeKind::Call);
    let external: BTreeSet<String> = calls
        .iter()
        .filter(|&&c| cpg.is_external_call(c))
        .filter_map(|&c| cpg.node(c).name.clone())
        .collect();
    CodebaseSummary {
        files: cpg.files().len(),
        methods: cpg.methods().len(),
        call_sites: calls.len(),
        loc: cpg.files().iter().map(|f| f.line_count()).sum(),
        external_callees: external.into_iter().collect(),
    }
}
