//! Hand-written lexer. `//` comments run to end of line.

use super::program::{Diagnostic, Span};

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Ident(String),
    Int(i64),
    Str(String),
    // keywords
    Func,
    Var,
    If,
    Else,
    While,
    Return,
    Print,
    True,
    False,
    TyInt,
    TyBool,
    TyString,
    // punctuation and operators
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Comma,
    Colon,
    Semi,
    Assign,
    Plus,
    Minus,
    Star,
    Slash,
    Percent,
    Lt,
    Le,
    Gt,
    Ge,
    EqEq,
    Ne,
    AndAnd,
    OrOr,
    Bang,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(n) => format!("identifier `{n}`"),
            Tok::Int(v) => format!("integer `{v}`"),
            Tok::Str(_) => "string literal".to_string(),
            Tok::Func => "`func`".to_string(),
            Tok::Var => "`var`".to_string(),
            Tok::If => "`if`".to_string(),
            Tok::Else => "`else`".to_string(),
            Tok::While => "`while`".to_string(),
            Tok::Return => "`return`".to_string(),
            Tok::Print => "`print`".to_string(),
            Tok::True => "`true`".to_string(),
            Tok::False => "`false`".to_string(),
            Tok::TyInt => "`int`".to_string(),
            Tok::TyBool => "`bool`".to_string(),
            Tok::TyString => "`string`".to_string(),
            Tok::LParen => "`(`".to_string(),
            Tok::RParen => "`)`".to_string(),
            Tok::LBrace => "`{`".to_string(),
            Tok::RBrace => "`}`".to_string(),
            Tok::LBracket => "`[`".to_string(),
            Tok::RBracket => "`]`".to_string(),
            Tok::Comma => "`,`".to_string(),
            Tok::Colon => "`:`".to_string(),
            Tok::Semi => "`;`".to_string(),
            Tok::Assign => "`=`".to_string(),
            Tok::Plus => "`+`".to_string(),
            Tok::Minus => "`-`".to_string(),
            Tok::Star => "`*`".to_string(),
            Tok::Slash => "`/`".to_string(),
            Tok::Percent => "`%`".to_string(),
            Tok::Lt => "`<`".to_string(),
            Tok::Le => "`<=`".to_string(),
            Tok::Gt => "`>`".to_string(),
            Tok::Ge => "`>=`".to_string(),
            Tok::EqEq => "`==`".to_string(),
            Tok::Ne => "`!=`".to_string(),
            Tok::AndAnd => "`&&`".to_string(),
            Tok::OrOr => "`||`".to_string(),
            Tok::Bang => "`!`".to_string(),
            Tok::Eof => "end of input".to_string(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

pub fn lex(source: &str) -> Result<Vec<Token>, Diagnostic> {
    let bytes = source.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0usize;
    let mut line = 1u32;
    let mut col = 1u32;

    macro_rules! span_at {
        ($start:expr, $end:expr, $line:expr, $col:expr) => {
            Span::new($start, $end, $line, $col)
        };
    }

    while i < bytes.len() {
        let c = bytes[i];
        match c {
            b' ' | b'\t' | b'\r' => {
                i += 1;
                col += 1;
            }
            b'\n' => {
                i += 1;
                line += 1;
                col = 1;
            }
            b'/' if i + 1 < bytes.len() && bytes[i + 1] == b'/' => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
            }
            b'0'..=b'9' => {
                let start = i;
                let (sl, sc) = (line, col);
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                    col += 1;
                }
                let text = &source[start..i];
                let value: i64 = text.parse().map_err(|_| {
                    Diagnostic::new(
                        span_at!(start, i, sl, sc),
                        format!("integer literal `{text}` out of range"),
                    )
                })?;
                tokens.push(Token { tok: Tok::Int(value), span: span_at!(start, i, sl, sc) });
            }
            b'"' => {
                let start = i;
                let (sl, sc) = (line, col);
                i += 1;
                col += 1;
                let mut value = String::new();
                loop {
                    if i >= bytes.len() || bytes[i] == b'\n' {
                        return Err(Diagnostic::new(
                            span_at!(start, i, sl, sc),
                            "unterminated string literal",
                        ));
                    }
                    match bytes[i] {
                        b'"' => {
                            i += 1;
                            col += 1;
                            break;
                        }
                        b'\\' => {
                            if i + 1 >= bytes.len() {
                                return Err(Diagnostic::new(
                                    span_at!(start, i, sl, sc),
                                    "unterminated string literal",
                                ));
                            }
                            match bytes[i + 1] {
                                b'n' => value.push('\n'),
                                b'"' => value.push('"'),
                                b'\\' => value.push('\\'),
                                other => {
                                    return Err(Diagnostic::new(
                                        span_at!(i, i + 2, line, col),
                                        format!("unknown escape `\\{}`", other as char),
                                    ));
                                }
                            }
                            i += 2;
                            col += 2;
                        }
                        _ => {
                            // Consume one UTF-8 scalar.
                            let ch_len = source[i..].chars().next().map_or(1, char::len_utf8);
                            value.push_str(&source[i..i + ch_len]);
                            i += ch_len;
                            col += 1;
                        }
                    }
                }
                tokens.push(Token { tok: Tok::Str(value), span: span_at!(start, i, sl, sc) });
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                let start = i;
                let (sl, sc) = (line, col);
                while i < bytes.len()
                    && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                    col += 1;
                }
                let text = &source[start..i];
                let tok = match text {
                    "func" => Tok::Func,
                    "var" => Tok::Var,
                    "if" => Tok::If,
                    "else" => Tok::Else,
                    "while" => Tok::While,
                    "return" => Tok::Return,
                    "print" => Tok::Print,
                    "true" => Tok::True,
                    "false" => Tok::False,
                    "int" => Tok::TyInt,
                    "bool" => Tok::TyBool,
                    "string" => Tok::TyString,
                    _ => Tok::Ident(text.to_string()),
                };
                tokens.push(Token { tok, span: span_at!(start, i, sl, sc) });
            }
            _ => {
                let (sl, sc) = (line, col);
                let start = i;
                let push2 = |tok: Tok, tokens: &mut Vec<Token>, i: &mut usize, col: &mut u32| {
                    tokens.push(Token { tok, span: span_at!(start, start + 2, sl, sc) });
                    *i += 2;
                    *col += 2;
                };
                let next = if i + 1 < bytes.len() { bytes[i + 1] } else { 0 };
                match (c, next) {
                    (b'<', b'=') => push2(Tok::Le, &mut tokens, &mut i, &mut col),
                    (b'>', b'=') => push2(Tok::Ge, &mut tokens, &mut i, &mut col),
                    (b'=', b'=') => push2(Tok::EqEq, &mut tokens, &mut i, &mut col),
                    (b'!', b'=') => push2(Tok::Ne, &mut tokens, &mut i, &mut col),
                    (b'&', b'&') => push2(Tok::AndAnd, &mut tokens, &mut i, &mut col),
                    (b'|', b'|') => push2(Tok::OrOr, &mut tokens, &mut i, &mut col),
                    _ => {
                        let tok = match c {
                            b'(' => Tok::LParen,
                            b')' => Tok::RParen,
                            b'{' => Tok::LBrace,
                            b'}' => Tok::RBrace,
                            b'[' => Tok::LBracket,
                            b']' => Tok::RBracket,
                            b',' => Tok::Comma,
                            b':' => Tok::Colon,
                            b';' => Tok::Semi,
                            b'=' => Tok::Assign,
                            b'+' => Tok::Plus,
                            b'-' => Tok::Minus,
                            b'*' => Tok::Star,
                            b'/' => Tok::Slash,
                            b'%' => Tok::Percent,
                            b'<' => Tok::Lt,
                            b'>' => Tok::Gt,
                            b'!' => Tok::Bang,
                            other => {
                                return Err(Diagnostic::new(
                                    span_at!(i, i + 1, line, col),
                                    format!("unexpected character `{}`", other as char),
                                ));
                            }
                        };
                        tokens.push(Token { tok, span: span_at!(start, start + 1, sl, sc) });
                        i += 1;
                        col += 1;
                    }
                }
            }
        }
    }
    tokens.push(Token {
        tok: Tok::Eof,
        span: Span::new(bytes.len(), bytes.len(), line, col),
    });
    Ok(tokens)
}
