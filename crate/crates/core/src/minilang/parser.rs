//! Recursive descent parser producing the unchecked AST. Syntax errors carry
//! the offending position and the expected-token set.

use super::ast::*;
use super::lexer::{Tok, Token};
use super::program::{Diagnostic, Span, StatementId};

pub struct SourceProgram {
    pub functions: Vec<FunctionDecl>,
    pub globals: Vec<GlobalDecl>,
}

pub fn parse_tokens(tokens: Vec<Token>) -> Result<SourceProgram, Diagnostic> {
    let mut p = Parser { tokens, pos: 0 };
    p.parse_program()
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

const UNASSIGNED: StatementId = StatementId(u32::MAX);

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn peek_span(&self) -> Span {
        self.tokens[self.pos].span
    }

    fn advance(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: &Tok, expected: &str) -> Result<Token, Diagnostic> {
        if std::mem::discriminant(self.peek()) == std::mem::discriminant(want) {
            Ok(self.advance())
        } else {
            Err(self.unexpected(expected))
        }
    }

    fn unexpected(&self, expected: &str) -> Diagnostic {
        Diagnostic::new(
            self.peek_span(),
            format!("syntax error: found {}, expected {expected}", self.peek().describe()),
        )
    }

    fn parse_program(&mut self) -> Result<SourceProgram, Diagnostic> {
        let mut functions = Vec::new();
        let mut globals = Vec::new();
        loop {
            match self.peek() {
                Tok::Eof => break,
                Tok::Func => functions.push(self.parse_function()?),
                Tok::Var => globals.push(self.parse_global()?),
                _ => return Err(self.unexpected("`func`, `var`, or end of input")),
            }
        }
        Ok(SourceProgram { functions, globals })
    }

    fn parse_type(&mut self) -> Result<Type, Diagnostic> {
        match self.peek().clone() {
            Tok::TyInt => {
                self.advance();
                if matches!(self.peek(), Tok::LBracket) {
                    self.advance();
                    let len_tok = self.expect(&Tok::Int(0), "array length")?;
                    let len = match len_tok.tok {
                        Tok::Int(v) if v > 0 => v as usize,
                        Tok::Int(_) => {
                            return Err(Diagnostic::new(
                                len_tok.span,
                                "array length must be positive",
                            ))
                        }
                        _ => unreachable!(),
                    };
                    self.expect(&Tok::RBracket, "`]`")?;
                    Ok(Type::IntArray(len))
                } else {
                    Ok(Type::Int)
                }
            }
            Tok::TyBool => {
                self.advance();
                Ok(Type::Bool)
            }
            Tok::TyString => {
                self.advance();
                Ok(Type::Str)
            }
            _ => Err(self.unexpected("a type (`int`, `bool`, `string`, or `int[N]`)")),
        }
    }

    fn parse_global(&mut self) -> Result<GlobalDecl, Diagnostic> {
        let start = self.expect(&Tok::Var, "`var`")?.span;
        let name_tok = self.expect(&Tok::Ident(String::new()), "a variable name")?;
        let name = match name_tok.tok {
            Tok::Ident(n) => n,
            _ => unreachable!(),
        };
        self.expect(&Tok::Colon, "`:`")?;
        let ty = self.parse_type()?;
        let init = if matches!(self.peek(), Tok::Assign) {
            self.advance();
            let lit_span = self.peek_span();
            let lit = match self.advance().tok {
                Tok::Int(v) => Literal::Int(v),
                Tok::True => Literal::Bool(true),
                Tok::False => Literal::Bool(false),
                Tok::Str(s) => Literal::Str(s),
                _ => {
                    return Err(Diagnostic::new(
                        lit_span,
                        "global initializers must be literals",
                    ))
                }
            };
            Some(lit)
        } else {
            None
        };
        self.expect(&Tok::Semi, "`;`")?;
        Ok(GlobalDecl { name, ty, init, span: start })
    }

    fn parse_function(&mut self) -> Result<FunctionDecl, Diagnostic> {
        let start = self.expect(&Tok::Func, "`func`")?.span;
        let name_tok = self.expect(&Tok::Ident(String::new()), "a function name")?;
        let name = match name_tok.tok {
            Tok::Ident(n) => n,
            _ => unreachable!(),
        };
        self.expect(&Tok::LParen, "`(`")?;
        let mut params = Vec::new();
        if !matches!(self.peek(), Tok::RParen) {
            loop {
                let p_tok = self.expect(&Tok::Ident(String::new()), "a parameter name")?;
                let p_name = match p_tok.tok {
                    Tok::Ident(n) => n,
                    _ => unreachable!(),
                };
                self.expect(&Tok::Colon, "`:`")?;
                let ty = self.parse_type()?;
                if !ty.is_scalar() {
                    return Err(Diagnostic::new(p_tok.span, "parameters must be scalar"));
                }
                params.push((p_name, ty));
                if matches!(self.peek(), Tok::Comma) {
                    self.advance();
                } else {
                    break;
                }
            }
        }
        self.expect(&Tok::RParen, "`)`")?;
        let ret = if matches!(self.peek(), Tok::Colon) {
            self.advance();
            let span = self.peek_span();
            let ty = self.parse_type()?;
            if !ty.is_scalar() {
                return Err(Diagnostic::new(span, "return type must be scalar"));
            }
            Some(ty)
        } else {
            None
        };
        let body = self.parse_block()?;
        Ok(FunctionDecl { name, params, ret, body, span: start, locals: Vec::new() })
    }

    fn parse_block(&mut self) -> Result<Vec<Stmt>, Diagnostic> {
        self.expect(&Tok::LBrace, "`{`")?;
        let mut stmts = Vec::new();
        while !matches!(self.peek(), Tok::RBrace) {
            stmts.push(self.parse_stmt()?);
        }
        self.expect(&Tok::RBrace, "`}`")?;
        Ok(stmts)
    }

    fn parse_stmt(&mut self) -> Result<Stmt, Diagnostic> {
        let span = self.peek_span();
        match self.peek().clone() {
            Tok::Var => {
                self.advance();
                let name_tok = self.expect(&Tok::Ident(String::new()), "a variable name")?;
                let name = match name_tok.tok {
                    Tok::Ident(n) => n,
                    _ => unreachable!(),
                };
                self.expect(&Tok::Colon, "`:`")?;
                let ty = self.parse_type()?;
                let init = if matches!(self.peek(), Tok::Assign) {
                    self.advance();
                    Some(self.parse_expr()?)
                } else {
                    None
                };
                self.expect(&Tok::Semi, "`;`")?;
                Ok(Stmt { id: UNASSIGNED, span, kind: StmtKind::Decl { name, ty, init } })
            }
            Tok::If => {
                self.advance();
                self.expect(&Tok::LParen, "`(`")?;
                let cond = self.parse_expr()?;
                self.expect(&Tok::RParen, "`)`")?;
                let then_branch = self.parse_block()?;
                let else_branch = if matches!(self.peek(), Tok::Else) {
                    self.advance();
                    if matches!(self.peek(), Tok::If) {
                        // `else if` chains become a single-statement else block.
                        vec![self.parse_stmt()?]
                    } else {
                        self.parse_block()?
                    }
                } else {
                    Vec::new()
                };
                Ok(Stmt { id: UNASSIGNED, span, kind: StmtKind::If { cond, then_branch, else_branch } })
            }
            Tok::While => {
                self.advance();
                self.expect(&Tok::LParen, "`(`")?;
                let cond = self.parse_expr()?;
                self.expect(&Tok::RParen, "`)`")?;
                let body = self.parse_block()?;
                Ok(Stmt { id: UNASSIGNED, span, kind: StmtKind::While { cond, body } })
            }
            Tok::Return => {
                self.advance();
                let value = if matches!(self.peek(), Tok::Semi) {
                    None
                } else {
                    Some(self.parse_expr()?)
                };
                self.expect(&Tok::Semi, "`;`")?;
                Ok(Stmt { id: UNASSIGNED, span, kind: StmtKind::Return(value) })
            }
            Tok::Print => {
                self.advance();
                self.expect(&Tok::LParen, "`(`")?;
                let value = self.parse_expr()?;
                self.expect(&Tok::RParen, "`)`")?;
                self.expect(&Tok::Semi, "`;`")?;
                Ok(Stmt { id: UNASSIGNED, span, kind: StmtKind::Print(value) })
            }
            Tok::Ident(_) => {
                let name_tok = self.advance();
                let target = match name_tok.tok {
                    Tok::Ident(n) => n,
                    _ => unreachable!(),
                };
                let index = if matches!(self.peek(), Tok::LBracket) {
                    self.advance();
                    let idx = self.parse_expr()?;
                    self.expect(&Tok::RBracket, "`]`")?;
                    Some(idx)
                } else {
                    None
                };
                self.expect(&Tok::Assign, "`=`")?;
                let value = self.parse_expr()?;
                self.expect(&Tok::Semi, "`;`")?;
                Ok(Stmt { id: UNASSIGNED, span, kind: StmtKind::Assign { target, index, value } })
            }
            _ => Err(self.unexpected(
                "a statement (`var`, `if`, `while`, `return`, `print`, or an assignment)",
            )),
        }
    }

    fn parse_expr(&mut self) -> Result<Expr, Diagnostic> {
        self.parse_binary(1)
    }

    fn parse_binary(&mut self, min_prec: u8) -> Result<Expr, Diagnostic> {
        let mut lhs = self.parse_unary()?;
        loop {
            let op = match self.peek() {
                Tok::OrOr => BinOp::Or,
                Tok::AndAnd => BinOp::And,
                Tok::EqEq => BinOp::Eq,
                Tok::Ne => BinOp::Ne,
                Tok::Lt => BinOp::Lt,
                Tok::Le => BinOp::Le,
                Tok::Gt => BinOp::Gt,
                Tok::Ge => BinOp::Ge,
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                Tok::Percent => BinOp::Rem,
                _ => break,
            };
            let prec = op.precedence();
            if prec < min_prec {
                break;
            }
            self.advance();
            let rhs = self.parse_binary(prec + 1)?;
            let span = Span::new(lhs.span.start, rhs.span.end, lhs.span.line, lhs.span.col);
            lhs = Expr {
                kind: ExprKind::Binary { op, lhs: Box::new(lhs), rhs: Box::new(rhs) },
                span,
            };
        }
        Ok(lhs)
    }

    fn parse_unary(&mut self) -> Result<Expr, Diagnostic> {
        if matches!(self.peek(), Tok::Bang) {
            let start = self.advance().span;
            let inner = self.parse_unary()?;
            let span = Span::new(start.start, inner.span.end, start.line, start.col);
            return Ok(Expr { kind: ExprKind::Not(Box::new(inner)), span });
        }
        self.parse_primary()
    }

    fn parse_primary(&mut self) -> Result<Expr, Diagnostic> {
        let span = self.peek_span();
        match self.peek().clone() {
            Tok::Int(v) => {
                let end = self.advance().span.end;
                Ok(Expr {
                    kind: ExprKind::Literal(Literal::Int(v)),
                    span: Span::new(span.start, end, span.line, span.col),
                })
            }
            Tok::True => {
                self.advance();
                Ok(Expr { kind: ExprKind::Literal(Literal::Bool(true)), span })
            }
            Tok::False => {
                self.advance();
                Ok(Expr { kind: ExprKind::Literal(Literal::Bool(false)), span })
            }
            Tok::Str(s) => {
                self.advance();
                Ok(Expr { kind: ExprKind::Literal(Literal::Str(s)), span })
            }
            Tok::LParen => {
                self.advance();
                let inner = self.parse_expr()?;
                let end = self.expect(&Tok::RParen, "`)`")?.span.end;
                Ok(Expr { kind: inner.kind, span: Span::new(span.start, end, span.line, span.col) })
            }
            Tok::Ident(name) => {
                self.advance();
                match self.peek() {
                    Tok::LParen => {
                        self.advance();
                        let mut args = Vec::new();
                        if !matches!(self.peek(), Tok::RParen) {
                            loop {
                                args.push(self.parse_expr()?);
                                if matches!(self.peek(), Tok::Comma) {
                                    self.advance();
                                } else {
                                    break;
                                }
                            }
                        }
                        let end = self.expect(&Tok::RParen, "`)`")?.span.end;
                        Ok(Expr {
                            kind: ExprKind::Call { function: name, args },
                            span: Span::new(span.start, end, span.line, span.col),
                        })
                    }
                    Tok::LBracket => {
                        self.advance();
                        let index = self.parse_expr()?;
                        let end = self.expect(&Tok::RBracket, "`]`")?.span.end;
                        Ok(Expr {
                            kind: ExprKind::Index { array: name, index: Box::new(index) },
                            span: Span::new(span.start, end, span.line, span.col),
                        })
                    }
                    _ => Ok(Expr { kind: ExprKind::Var(name), span }),
                }
            }
            _ => Err(self.unexpected("an expression")),
        }
    }
}
