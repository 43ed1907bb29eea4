use super::ast::{Ast, AstId, AstKind, AstNode, Span};
use super::lexer::{tokenize, Keyword, Token, TokenKind};
use super::source::SourceFile;
use super::{FrontendError, Location};

/// Result of parsing a codebase. Files that fail to lex or parse contribute no
/// nodes; their errors are collected in `errors` in file order.
#[derive(Debug, Clone, Default)]
pub struct ParseOutcome {
    pub ast: Ast,
    pub errors: Vec<FrontendError>,
    /// Indexes (into the input slice) of files that parsed.
    pub parsed_files: Vec<usize>,
}

pub fn parse(files: &[SourceFile]) -> ParseOutcome {
    let mut outcome = ParseOutcome::default();
    for (file_idx, file) in files.iter().enumerate() {
        match parse_file(file) {
            Ok(unit) => {
                let id = flatten(&mut outcome.ast, unit, file_idx, file);
                outcome.ast.units.push(id);
                outcome.parsed_files.push(file_idx);
            }
            Err(e) => outcome.errors.push(e),
        }
    }
    outcome
}

/// Parser output before ids are assigned.
struct PNode {
    kind: AstKind,
    name: Option<String>,
    type_name: Option<String>,
    children: Vec<PNode>,
    start: usize,
    end: usize,
}

impl PNode {
    fn new(kind: AstKind, start: usize, end: usize) -> Self {
        PNode {
            kind,
            name: None,
            type_name: None,
            children: Vec::new(),
            start,
            end,
        }
    }

    fn named(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    fn typed(mut self, type_name: impl Into<String>) -> Self {
        self.type_name = Some(type_name.into());
        self
    }

    fn with(mut self, children: Vec<PNode>) -> Self {
        self.children = children;
        self
    }
}

/// Assigns ids in pre-order.
fn flatten(ast: &mut Ast, node: PNode, file_idx: usize, file: &SourceFile) -> AstId {
    let id = ast.nodes.len();
    let (start_line, start_col) = file.position(node.start);
    let (end_line, end_col) = file.position(node.end.saturating_sub(1).max(node.start));
    ast.nodes.push(AstNode {
        id,
        kind: node.kind,
        name: node.name,
        type_name: node.type_name,
        children: Vec::new(),
        code: file.content[node.start..node.end].to_string(),
        span: Span {
            file: file_idx,
            start: node.start,
            end: node.end,
            start_line,
            start_col,
            end_line,
            end_col,
        },
    });
    let children: Vec<AstId> = node
        .children
        .into_iter()
        .map(|c| flatten(ast, c, file_idx, file))
        .collect();
    ast.nodes[id].children = children;
    id
}

fn parse_file(file: &SourceFile) -> Result<PNode, FrontendError> {
    let tokens = tokenize(file)?;
    let mut parser = Parser { file, tokens, pos: 0 };
    let mut functions = Vec::new();
    while !parser.at_end() {
        functions.push(parser.function()?);
    }
    Ok(PNode::new(AstKind::TranslationUnit, 0, file.content.len()).with(functions))
}

struct Parser<'a> {
    file: &'a SourceFile,
    tokens: Vec<Token>,
    pos: usize,
}

type PResult<T> = Result<T, FrontendError>;

/// Binary operator precedence levels, loosest first.
const BINARY_LEVELS: [&[&str]; 6] = [
    &["||"],
    &["&&"],
    &["==", "!="],
    &["<", "<=", ">", ">="],
    &["+", "-"],
    &["*", "/", "%"],
];

impl<'a> Parser<'a> {
    fn at_end(&self) -> bool {
        self.pos >= self.tokens.len()
    }

    fn peek(&self) -> Option<&TokenKind> {
        self.tokens.get(self.pos).map(|t| &t.kind)
    }

    fn advance(&mut self) -> &Token {
        let tok = &self.tokens[self.pos];
        self.pos += 1;
        tok
    }

    /// End offset of the most recently consumed token.
    fn last_end(&self) -> usize {
        self.tokens[self.pos - 1].end
    }

    fn error(&self, expected: &str) -> FrontendError {
        let (location, found) = match self.tokens.get(self.pos) {
            Some(tok) => (
                Location::new(&self.file.path, tok.line, tok.col),
                format!("'{}'", &self.file.content[tok.start..tok.end]),
            ),
            None => {
                let (line, col) = self.file.position(self.file.content.len());
                (Location::new(&self.file.path, line, col), "end of input".to_string())
            }
        };
        FrontendError::Parse {
            location,
            expected: expected.to_string(),
            found,
        }
    }

    fn is_punct(&self, c: char) -> bool {
        self.peek() == Some(&TokenKind::Punct(c))
    }

    fn is_op(&self, op: &str) -> bool {
        matches!(self.peek(), Some(TokenKind::Op(o)) if *o == op)
    }

    fn is_keyword(&self, kw: Keyword) -> bool {
        self.peek() == Some(&TokenKind::Keyword(kw))
    }

    fn is_type(&self) -> bool {
        self.is_keyword(Keyword::Int) || self.is_keyword(Keyword::Char)
    }

    fn expect_punct(&mut self, c: char) -> PResult<usize> {
        if self.is_punct(c) {
            let start = self.advance().start;
            Ok(start)
        } else {
            Err(self.error(&format!("'{c}'")))
        }
    }

    fn expect_ident(&mut self, what: &str) -> PResult<(String, usize)> {
        match self.peek() {
            Some(TokenKind::Ident(name)) => {
                let name = name.clone();
                let start = self.advance().start;
                Ok((name, start))
            }
            _ => Err(self.error(what)),
        }
    }

    fn type_keyword(&mut self) -> PResult<(&'static str, usize)> {
        match self.peek() {
            Some(TokenKind::Keyword(kw @ (Keyword::Int | Keyword::Char))) => {
                let name = kw.as_str();
                let start = self.advance().start;
                Ok((name, start))
            }
            _ => Err(self.error("type")),
        }
    }

    fn function(&mut self) -> PResult<PNode> {
        let (ret_type, start) = self.type_keyword()?;
        let (name, _) = self.expect_ident("function name")?;
        self.expect_punct('(')?;
        let mut children = Vec::new();
        if !self.is_punct(')') {
            loop {
                if !self.is_type() {
                    return Err(self.error("parameter or ')'"));
                }
                children.push(self.param()?);
                if self.is_punct(',') {
                    self.advance();
                } else {
                    break;
                }
            }
        }
        self.expect_punct(')')?;
        children.push(self.block()?);
        Ok(PNode::new(AstKind::FunctionDef, start, self.last_end())
            .named(name)
            .typed(ret_type)
            .with(children))
    }

    fn param(&mut self) -> PResult<PNode> {
        let (ty, start) = self.type_keyword()?;
        let (name, _) = self.expect_ident("parameter name")?;
        let mut type_name = ty.to_string();
        if self.is_punct('[') {
            self.advance();
            let size = match self.peek() {
                Some(TokenKind::Int(n)) => {
                    let n = *n;
                    self.advance();
                    n.to_string()
                }
                _ => String::new(),
            };
            self.expect_punct(']')?;
            type_name = format!("{ty}[{size}]");
        }
        Ok(PNode::new(AstKind::Param, start, self.last_end())
            .named(name)
            .typed(type_name))
    }

    fn block(&mut self) -> PResult<PNode> {
        let start = self.expect_punct('{')?;
        let mut stmts = Vec::new();
        while !self.is_punct('}') {
            if self.at_end() {
                return Err(self.error("'}'"));
            }
            stmts.push(self.statement()?);
        }
        self.advance();
        Ok(PNode::new(AstKind::Block, start, self.last_end()).with(stmts))
    }

    fn statement(&mut self) -> PResult<PNode> {
        match self.peek() {
            Some(TokenKind::Punct('{')) => self.block(),
            Some(TokenKind::Keyword(Keyword::If)) => {
                let start = self.advance().start;
                self.expect_punct('(')?;
                let (cond, _, _) = self.expr()?;
                self.expect_punct(')')?;
                let mut children = vec![cond, self.statement()?];
                if self.is_keyword(Keyword::Else) {
                    self.advance();
                    children.push(self.statement()?);
                }
                Ok(PNode::new(AstKind::If, start, self.last_end())
                    .named("if")
                    .with(children))
            }
            Some(TokenKind::Keyword(Keyword::While)) => {
                let start = self.advance().start;
                self.expect_punct('(')?;
                let (cond, _, _) = self.expr()?;
                self.expect_punct(')')?;
                let body = self.statement()?;
                Ok(PNode::new(AstKind::While, start, self.last_end())
                    .named("while")
                    .with(vec![cond, body]))
            }
            Some(TokenKind::Keyword(Keyword::Return)) => {
                let start = self.advance().start;
                let mut children = Vec::new();
                if !self.is_punct(';') {
                    children.push(self.expr()?.0);
                }
                let end = self.last_end();
                self.expect_punct(';')?;
                Ok(PNode::new(AstKind::Return, start, end).named("return").with(children))
            }
            Some(TokenKind::Keyword(Keyword::Int | Keyword::Char)) => self.declaration(),
            Some(_) => self.simple_statement(),
            None => Err(self.error("statement")),
        }
    }

    fn declaration(&mut self) -> PResult<PNode> {
        let (ty, start) = self.type_keyword()?;
        let (name, _) = self.expect_ident("variable name")?;
        let mut type_name = ty.to_string();
        let mut children = Vec::new();
        if self.is_punct('[') {
            self.advance();
            match self.peek() {
                Some(TokenKind::Int(n)) => {
                    let n = *n;
                    let tok = self.advance();
                    children.push(PNode::new(AstKind::IntLiteral, tok.start, tok.end));
                    type_name = format!("{ty}[{n}]");
                }
                _ => return Err(self.error("constant array size")),
            }
            self.expect_punct(']')?;
        }
        if self.is_op("=") {
            if children.len() == 1 {
                return Err(self.error("';'"));
            }
            self.advance();
            children.push(self.expr()?.0);
        }
        let end = self.last_end();
        self.expect_punct(';')?;
        Ok(PNode::new(AstKind::VarDecl, start, end)
            .named(name)
            .typed(type_name)
            .with(children))
    }

    fn simple_statement(&mut self) -> PResult<PNode> {
        let (target, start, _) = self.expr()?;
        if self.is_op("=") {
            if !matches!(target.kind, AstKind::Identifier | AstKind::ArrayIndex) {
                return Err(self.error("';'"));
            }
            self.advance();
            let (value, _, end) = self.expr()?;
            self.expect_punct(';')?;
            let name = match target.kind {
                AstKind::Identifier => target.name.clone(),
                _ => target.children.first().and_then(|b| b.name.clone()),
            };
            let mut node = PNode::new(AstKind::Assign, start, end).with(vec![target, value]);
            node.name = name;
            return Ok(node);
        }
        self.expect_punct(';')?;
        Ok(PNode::new(AstKind::ExprStmt, start, self.last_end()).with(vec![target]))
    }

    /// Returns the expression node plus its outer extent (including any
    /// enclosing parentheses).
    fn expr(&mut self) -> PResult<(PNode, usize, usize)> {
        self.binary(0)
    }

    fn binary(&mut self, level: usize) -> PResult<(PNode, usize, usize)> {
        if level == BINARY_LEVELS.len() {
            return self.unary();
        }
        let (mut lhs, start, mut end) = self.binary(level + 1)?;
        loop {
            let op = match self.peek() {
                Some(TokenKind::Op(op)) if BINARY_LEVELS[level].contains(op) => *op,
                _ => break,
            };
            self.advance();
            let (rhs, _, rhs_end) = self.binary(level + 1)?;
            end = rhs_end;
            lhs = PNode::new(AstKind::BinaryOp, start, end).named(op).with(vec![lhs, rhs]);
        }
        Ok((lhs, start, end))
    }

    fn unary(&mut self) -> PResult<(PNode, usize, usize)> {
        if self.is_op("-") || self.is_op("!") {
            let tok = self.advance();
            let (start, op) = (tok.start, if tok.kind == TokenKind::Op("-") { "-" } else { "!" });
            let (operand, _, end) = self.unary()?;
            let node = PNode::new(AstKind::UnaryOp, start, end).named(op).with(vec![operand]);
            return Ok((node, start, end));
        }
        self.postfix()
    }

    fn postfix(&mut self) -> PResult<(PNode, usize, usize)> {
        let (mut node, start, mut end) = self.primary()?;
        while self.is_punct('[') {
            self.advance();
            let (index, _, _) = self.expr()?;
            self.expect_punct(']')?;
            end = self.last_end();
            node = PNode::new(AstKind::ArrayIndex, start, end)
                .named("[]")
                .with(vec![node, index]);
        }
        Ok((node, start, end))
    }

    fn primary(&mut self) -> PResult<(PNode, usize, usize)> {
        let Some(kind) = self.peek().cloned() else {
            return Err(self.error("expression"));
        };
        match kind {
            TokenKind::Int(_) => {
                let tok = self.advance();
                let (s, e) = (tok.start, tok.end);
                Ok((PNode::new(AstKind::IntLiteral, s, e), s, e))
            }
            TokenKind::Str(_) => {
                let tok = self.advance();
                let (s, e) = (tok.start, tok.end);
                Ok((PNode::new(AstKind::StringLiteral, s, e), s, e))
            }
            TokenKind::Ident(name) => {
                let tok = self.advance();
                let (start, ident_end) = (tok.start, tok.end);
                if !self.is_punct('(') {
                    let node = PNode::new(AstKind::Identifier, start, ident_end).named(name);
                    return Ok((node, start, ident_end));
                }
                self.advance();
                let mut args = Vec::new();
                if !self.is_punct(')') {
                    loop {
                        args.push(self.expr()?.0);
                        if self.is_punct(',') {
                            self.advance();
                        } else {
                            break;
                        }
                    }
                }
                if !self.is_punct(')') {
                    return Err(self.error("',' or ')'"));
                }
                self.advance();
                let end = self.last_end();
                let node = PNode::new(AstKind::Call, start, end).named(name).with(args);
                Ok((node, start, end))
            }
            TokenKind::Punct('(') => {
                let start = self.advance().start;
                let (inner, _, _) = self.expr()?;
                if !self.is_punct(')') {
                    return Err(self.error("')'"));
                }
                self.advance();
                Ok((inner, start, self.last_end()))
            }
            _ => Err(self.error("expression")),
        }
    }
}
