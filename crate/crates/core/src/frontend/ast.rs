use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AstKind {
    TranslationUnit,
    FunctionDef,
    Param,
    VarDecl,
    Assign,
    BinaryOp,
    UnaryOp,
    Call,
    Identifier,
    IntLiteral,
    StringLiteral,
    ArrayIndex,
    If,
    While,
    Return,
    Block,
    ExprStmt,
}

impl AstKind {
    pub fn is_expression(self) -> bool {
        matches!(
            self,
            AstKind::BinaryOp
                | AstKind::UnaryOp
                | AstKind::Call
                | AstKind::Identifier
                | AstKind::IntLiteral
                | AstKind::StringLiteral
                | AstKind::ArrayIndex
        )
    }
}

pub type AstId = usize;

/// Byte span plus 1-based start/end positions. `end_col` is the column of the
/// last byte of the node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Span {
    pub file: usize,
    pub start: usize,
    pub end: usize,
    pub start_line: u32,
    pub start_col: u32,
    pub end_line: u32,
    pub end_col: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AstNode {
    pub id: AstId,
    pub kind: AstKind,
    /// Identifier, callee, declared, or function name; operator symbol for
    /// operator nodes (`[]` for array indexing).
    pub name: Option<String>,
    /// Declared type: `int`, `char[8]`, `char[]`; return type for functions.
    pub type_name: Option<String>,
    pub children: Vec<AstId>,
    pub code: String,
    pub span: Span,
}

/// Parsed codebase: one TranslationUnit per successfully parsed file. The
/// `Ast` value itself plays the role of the synthetic root.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Ast {
    pub nodes: Vec<AstNode>,
    pub units: Vec<AstId>,
}

impl Ast {
    pub fn node(&self, id: AstId) -> &AstNode {
        &self.nodes[id]
    }

    pub fn children(&self, id: AstId) -> impl Iterator<Item = &AstNode> + '_ {
        self.nodes[id].children.iter().map(move |&c| &self.nodes[c])
    }

    /// Every FunctionDef in file order.
    pub fn functions(&self) -> impl Iterator<Item = &AstNode> + '_ {
        self.units
            .iter()
            .flat_map(move |&u| self.children(u))
            .filter(|n| n.kind == AstKind::FunctionDef)
    }

    pub fn preorder(&self, root: AstId) -> Vec<AstId> {
        let mut out = Vec::new();
        let mut stack = vec![root];
        while let Some(id) = stack.pop() {
            out.push(id);
            stack.extend(self.nodes[id].children.iter().rev());
        }
        out
    }
}
