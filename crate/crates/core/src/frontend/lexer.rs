use std::fmt;

use super::source::SourceFile;
use super::{FrontendError, Location};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Keyword {
    Int,
    Char,
    If,
    Else,
    While,
    Return,
}

impl Keyword {
    fn from_ident(text: &str) -> Option<Keyword> {
        Some(match text {
            "int" => Keyword::Int,
            "char" => Keyword::Char,
            "if" => Keyword::If,
            "else" => Keyword::Else,
            "while" => Keyword::While,
            "return" => Keyword::Return,
            _ => return None,
        })
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Keyword::Int => "int",
            Keyword::Char => "char",
            Keyword::If => "if",
            Keyword::Else => "else",
            Keyword::While => "while",
            Keyword::Return => "return",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokenKind {
    Keyword(Keyword),
    Ident(String),
    Int(i64),
    /// Decoded string value; the token span covers the quotes.
    Str(String),
    Op(&'static str),
    Punct(char),
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TokenKind::Keyword(k) => write!(f, "kw:{}", k.as_str()),
            TokenKind::Ident(name) => write!(f, "id:{name}"),
            TokenKind::Int(v) => write!(f, "int:{v}"),
            TokenKind::Str(s) => write!(f, "str:{s:?}"),
            TokenKind::Op(op) => write!(f, "op:{op}"),
            TokenKind::Punct(c) => write!(f, "punct:{c}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    /// Byte range in the file content.
    pub start: usize,
    pub end: usize,
    pub line: u32,
    pub col: u32,
}

// Longest match first.
const OPERATORS: [&str; 15] = [
    "<=", ">=", "==", "!=", "&&", "||", "=", "+", "-", "*", "/", "%", "<", ">", "!",
];

pub fn tokenize(file: &SourceFile) -> Result<Vec<Token>, FrontendError> {
    let src = file.content.as_bytes();
    let mut tokens = Vec::new();
    let mut pos = 0;

    let err = |offset: usize, message: String| {
        let (line, col) = file.position(offset);
        FrontendError::Lex {
            location: Location::new(&file.path, line, col),
            message,
        }
    };

    while pos < src.len() {
        let c = src[pos];
        if c.is_ascii_whitespace() {
            pos += 1;
            continue;
        }
        if c == b'/' && src.get(pos + 1) == Some(&b'/') {
            while pos < src.len() && src[pos] != b'\n' {
                pos += 1;
            }
            continue;
        }
        if c == b'/' && src.get(pos + 1) == Some(&b'*') {
            let open = pos;
            pos += 2;
            loop {
                if pos + 1 >= src.len() {
                    return Err(err(open, "unterminated block comment".into()));
                }
                if src[pos] == b'*' && src[pos + 1] == b'/' {
                    pos += 2;
                    break;
                }
                pos += 1;
            }
            continue;
        }

        let start = pos;
        let kind = if c.is_ascii_alphabetic() || c == b'_' {
            while pos < src.len() && (src[pos].is_ascii_alphanumeric() || src[pos] == b'_') {
                pos += 1;
            }
            let text = &file.content[start..pos];
            match Keyword::from_ident(text) {
                Some(kw) => TokenKind::Keyword(kw),
                None => TokenKind::Ident(text.to_string()),
            }
        } else if c.is_ascii_digit() {
            while pos < src.len() && src[pos].is_ascii_digit() {
                pos += 1;
            }
            if pos < src.len() && (src[pos].is_ascii_alphabetic() || src[pos] == b'_') {
                return Err(err(pos, "malformed integer literal".into()));
            }
            let text = &file.content[start..pos];
            let value = text
                .parse::<i64>()
                .map_err(|_| err(start, format!("integer literal out of range: {text}")))?;
            TokenKind::Int(value)
        } else if c == b'"' {
            pos += 1;
            let mut value = String::new();
            loop {
                match src.get(pos) {
                    None | Some(b'\n') => return Err(err(start, "unterminated string literal".into())),
                    Some(b'"') => {
                        pos += 1;
                        break;
                    }
                    Some(b'\\') => {
                        let escaped = match src.get(pos + 1) {
                            Some(b'n') => '\n',
                            Some(b't') => '\t',
                            Some(b'\\') => '\\',
                            Some(b'"') => '"',
                            None | Some(b'\n') => return Err(err(start, "unterminated string literal".into())),
                            Some(_) => {
                                let ch = file.content[pos + 1..].chars().next().unwrap_or('?');
                                return Err(err(pos, format!("unknown escape sequence \\{ch}")));
                            }
                        };
                        value.push(escaped);
                        pos += 2;
                    }
                    Some(_) => {
                        let ch = file.content[pos..].chars().next().expect("in bounds");
                        value.push(ch);
                        pos += ch.len_utf8();
                    }
                }
            }
            TokenKind::Str(value)
        } else if matches!(c, b';' | b',' | b'(' | b')' | b'{' | b'}' | b'[' | b']') {
            pos += 1;
            TokenKind::Punct(c as char)
        } else if let Some(op) = OPERATORS.iter().find(|op| src[pos..].starts_with(op.as_bytes())) {
            pos += op.len();
            TokenKind::Op(op)
        } else {
            let ch = file.content[pos..].chars().next().expect("in bounds");
            return Err(err(pos, format!("illegal character {ch:?}")));
        };

        let (line, col) = file.position(start);
        tokens.push(Token {
            kind,
            start,
            end: pos,
            line,
            col,
        });
    }
    Ok(tokens)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn render(src: &str) -> Vec<String> {
        tokenize(&SourceFile::new("t.c", src))
            .unwrap()
            .into_iter()
            .map(|t| t.kind.to_string())
            .collect()
    }

    #[test]
    fn empty_input() {
        assert!(render("").is_empty());
    }

    #[test]
    fn simple_declaration() {
        assert_eq!(render("int x = 1;"), ["kw:int", "id:x", "op:=", "int:1", "punct:;"]);
    }

    #[test]
    fn comments_are_skipped() {
        assert_eq!(render("/* a */ x"), ["id:x"]);
        assert_eq!(render("x // trailing\ny"), ["id:x", "id:y"]);
    }

    #[test]
    fn multi_char_operators() {
        assert_eq!(
            render("a<=b&&c!=d||!e"),
            ["id:a", "op:<=", "id:b", "op:&&", "id:c", "op:!=", "id:d", "op:||", "op:!", "id:e"]
        );
    }

    #[test]
    fn string_escapes_decode() {
        let toks = tokenize(&SourceFile::new("t.c", r#""a\n\"b\\""#)).unwrap();
        assert_eq!(toks[0].kind, TokenKind::Str("a\n\"b\\".into()));
        assert_eq!((toks[0].start, toks[0].end), (0, 10));
    }

    #[test]
    fn token_locations() {
        let toks = tokenize(&SourceFile::new("t.c", "int\n  x;")).unwrap();
        assert_eq!((toks[1].line, toks[1].col), (2, 3));
    }

    #[test]
    fn lex_errors() {
        for bad in ["int @", "\"abc", "/* open", "\"bad \\q\"", "x & y", "12ab"] {
            let e = tokenize(&SourceFile::new("t.c", bad)).unwrap_err();
            assert!(matches!(e, FrontendError::Lex { .. }), "{bad}");
        }
    }

    #[test]
    fn unterminated_comment_location() {
        let e = tokenize(&SourceFile::new("t.c", "x\n  /* never")).unwrap_err();
        match e {
            FrontendError::Lex { location, .. } => assert_eq!((location.line, location.col), (2, 3)),
            other => panic!("{other:?}"),
        }
    }
}
