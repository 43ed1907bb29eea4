//! Mini-C frontend: source loading, lexing, and parsing into an AST with
//! exact source locations.

pub mod ast;
pub mod lexer;
pub mod parser;
pub mod source;

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use walkdir::WalkDir;

pub use ast::{Ast, AstId, AstKind, AstNode, Span};
pub use lexer::{tokenize, Token, TokenKind};
pub use parser::{parse, ParseOutcome};
pub use source::SourceFile;

use crate::glob::Glob;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Location {
    pub file: String,
    pub line: u32,
    pub col: u32,
}

impl Location {
    pub fn new(file: &str, line: u32, col: u32) -> Self {
        Location {
            file: file.to_string(),
            line,
            col,
        }
    }
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FrontendError {
    #[error("{location}: lex error: {message}")]
    Lex { location: Location, message: String },
    #[error("{location}: parse error: expected {expected}, found {found}")]
    Parse {
        location: Location,
        expected: String,
        found: String,
    },
}

impl FrontendError {
    pub fn location(&self) -> &Location {
        match self {
            FrontendError::Lex { location, .. } | FrontendError::Parse { location, .. } => location,
        }
    }
}

/// Reads every file under `root` whose file name matches `pattern`, sorted
/// lexicographically by relative path (with `/` separators). Symlinks are not
/// followed, so nothing outside `root` is read.
pub fn load_sources(root: &Path, pattern: &Glob) -> std::io::Result<Vec<SourceFile>> {
    let mut files = Vec::new();
    for entry in WalkDir::new(root).follow_links(false) {
        let entry = entry.map_err(std::io::Error::other)?;
        if !entry.file_type().is_file() {
            continue;
        }
        let name = entry.file_name().to_string_lossy();
        if !pattern.matches(&name) {
            continue;
        }
        let rel = entry
            .path()
            .strip_prefix(root)
            .map_err(std::io::Error::other)?
            .components()
            .map(|c| c.as_os_str().to_string_lossy().into_owned())
            .collect::<Vec<_>>()
            .join("/");
        let content = std::fs::read_to_string(entry.path())?;
        files.push(SourceFile::new(rel, content));
    }
    files.sort_by(|a, b| a.path.cmp(&b.path));
    Ok(files)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn load_sources_sorted_and_filtered() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::create_dir(dir.path().join("sub")).unwrap();
        std::fs::write(dir.path().join("z.c"), "int z() { return 0; }").unwrap();
        std::fs::write(dir.path().join("sub/a.c"), "int a() { return 0; }").unwrap();
        std::fs::write(dir.path().join("notes.txt"), "hello").unwrap();
        let files = load_sources(dir.path(), &Glob::new("*.c")).unwrap();
        let paths: Vec<_> = files.iter().map(|f| f.path.as_str()).collect();
        assert_eq!(paths, ["sub/a.c", "z.c"]);
    }

    fn check_locations(src: &str) {
        let file = SourceFile::new("p.c", src);
        let out = parse(std::slice::from_ref(&file));
        for node in &out.ast.nodes {
            assert_eq!(&file.content[node.span.start..node.span.end], node.code);
            let (line, col) = file.position(node.span.start);
            assert_eq!((node.span.start_line, node.span.start_col), (line, col));
        }
        // Concatenated function code reproduces each function's text.
        for f in out.ast.functions() {
            assert!(src.contains(&f.code));
        }
    }

    fn stmt() -> impl Strategy<Value = String> {
        let var = prop::sample::select(vec!["a", "b", "c", "n"]);
        let leaf = prop_oneof![
            (var.clone(), 0..100i64).prop_map(|(v, k)| format!("{v} = {k};")),
            (var.clone(), var.clone()).prop_map(|(v, w)| format!("{v} = {w} + 1;")),
            var.clone().prop_map(|v| format!("sink({v});")),
            var.clone().prop_map(|v| format!("int {v}x = read(0, buf, {v});")),
        ];
        leaf.prop_recursive(3, 16, 3, move |inner| {
            prop_oneof![
                (inner.clone(), inner.clone()).prop_map(|(t, e)| format!("if (a < b) {{ {t} }} else {{\n{e} }}")),
                inner.clone().prop_map(|b| format!("while (n > 0)\n {{ {b} }}")),
                prop::collection::vec(inner, 1..4).prop_map(|v| v.join("\n  ")),
            ]
        })
    }

    proptest! {
        #[test]
        fn node_code_matches_location(body in prop::collection::vec(stmt(), 0..6)) {
            let src = format!("int f(int a, int b) {{\n  {}\n}}\nint g() {{ return 0; }}\n", body.join("\n  "));
            check_locations(&src);
        }

        #[test]
        fn parse_is_deterministic(body in prop::collection::vec(stmt(), 0..6)) {
            let src = format!("int f() {{ {} }}", body.join(" "));
            let files = [SourceFile::new("p.c", src)];
            let a = parse(&files);
            let b = parse(&files);
            prop_assert_eq!(a.ast, b.ast);
        }
    }
}
