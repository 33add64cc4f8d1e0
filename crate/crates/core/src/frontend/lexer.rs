use std::fmt;

use crate::span::Span;

use super::ParseError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Int(i64),
    Kw(Kw),
    Assign,
    Colon,
    Semi,
    Comma,
    Dot,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Plus,
    Minus,
    Star,
    Eof,
}

macro_rules! keywords {
    ($($variant:ident => $text:literal),* $(,)?) => {
        #[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
        pub enum Kw { $($variant),* }

        impl Kw {
            pub fn lookup(s: &str) -> Option<Kw> {
                match s { $($text => Some(Kw::$variant),)* _ => None }
            }

            pub fn as_str(self) -> &'static str {
                match self { $(Kw::$variant => $text),* }
            }
        }
    };
}

keywords! {
    Class => "class",
    Inherit => "inherit",
    Feature => "feature",
    Deferred => "deferred",
    Do => "do",
    Rescue => "rescue",
    Require => "require",
    Ensure => "ensure",
    Then => "then",
    Else => "else",
    Elseif => "elseif",
    Invariant => "invariant",
    From => "from",
    Until => "until",
    Loop => "loop",
    Check => "check",
    End => "end",
    Create => "create",
    Pure => "pure",
    Modify => "modify",
    Redefine => "redefine",
    Local => "local",
    If => "if",
    Old => "old",
    Not => "not",
    And => "and",
    Or => "or",
    Implies => "implies",
    Raise => "raise",
    Root => "root",
    True => "True",
    False => "False",
    Void => "Void",
    Current => "Current",
    Result => "Result",
    ExcV => "ExcV",
    Retry => "Retry",
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "identifier `{s}`"),
            Tok::Int(n) => write!(f, "integer `{n}`"),
            Tok::Kw(k) => write!(f, "`{}`", k.as_str()),
            Tok::Eof => f.write_str("end of file"),
            other => write!(f, "`{}`", other.symbol()),
        }
    }
}

impl Tok {
    pub fn symbol(&self) -> &'static str {
        match self {
            Tok::Assign => ":=",
            Tok::Colon => ":",
            Tok::Semi => ";",
            Tok::Comma => ",",
            Tok::Dot => ".",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::Eq => "=",
            Tok::Ne => "/=",
            Tok::Lt => "<",
            Tok::Le => "<=",
            Tok::Gt => ">",
            Tok::Ge => ">=",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::Kw(k) => k.as_str(),
            Tok::Ident(_) => "identifier",
            Tok::Int(_) => "integer",
            Tok::Eof => "end of file",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

/// Splits source text into tokens. `--` starts a comment running to the end
/// of the line.
pub fn lex(src: &str) -> Result<Vec<Token>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let (mut i, mut line, mut line_start) = (0usize, 1u32, 0usize);
    while i < bytes.len() {
        let c = bytes[i];
        if c == b'\n' {
            line += 1;
            i += 1;
            line_start = i;
            continue;
        }
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if c == b'-' && bytes.get(i + 1) == Some(&b'-') {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        let start = i;
        let col = src[line_start..start].chars().count() as u32 + 1;
        let tok = if c.is_ascii_alphabetic() {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            let word = &src[start..i];
            Kw::lookup(word).map_or_else(|| Tok::Ident(word.to_string()), Tok::Kw)
        } else if c.is_ascii_digit() {
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let text = &src[start..i];
            let n = text.parse::<i64>().map_err(|_| ParseError {
                span: Span::new(line, col, start, i),
                message: format!("integer literal `{text}` out of range"),
                expected: Vec::new(),
            })?;
            Tok::Int(n)
        } else {
            let two = bytes.get(i + 1).copied();
            let (tok, len) = match (c, two) {
                (b':', Some(b'=')) => (Tok::Assign, 2),
                (b'/', Some(b'=')) => (Tok::Ne, 2),
                (b'<', Some(b'=')) => (Tok::Le, 2),
                (b'>', Some(b'=')) => (Tok::Ge, 2),
                (b':', _) => (Tok::Colon, 1),
                (b';', _) => (Tok::Semi, 1),
                (b',', _) => (Tok::Comma, 1),
                (b'.', _) => (Tok::Dot, 1),
                (b'(', _) => (Tok::LParen, 1),
                (b')', _) => (Tok::RParen, 1),
                (b'{', _) => (Tok::LBrace, 1),
                (b'}', _) => (Tok::RBrace, 1),
                (b'=', _) => (Tok::Eq, 1),
                (b'<', _) => (Tok::Lt, 1),
                (b'>', _) => (Tok::Gt, 1),
                (b'+', _) => (Tok::Plus, 1),
                (b'-', _) => (Tok::Minus, 1),
                (b'*', _) => (Tok::Star, 1),
                _ => {
                    let ch = src[start..].chars().next().unwrap_or('?');
                    return Err(ParseError {
                        span: Span::new(line, col, start, start + ch.len_utf8()),
                        message: format!("unexpected character `{ch}`"),
                        expected: Vec::new(),
                    });
                }
            };
            i += len;
            tok
        };
        out.push(Token { tok, span: Span::new(line, col, start, i) });
    }
    let col = src[line_start..].chars().count() as u32 + 1;
    out.push(Token { tok: Tok::Eof, span: Span::new(line, col, src.len(), src.len()) });
    Ok(out)
}
