//! Static checks and identifier assignment.
//!
//! Checks: exactly one `main` (integer parameters only), no duplicate
//! declarations, declaration-before-use, and full type checking. Shadowing is
//! rejected: within a function, parameter and local names are unique and may
//! not collide with globals, so every name in scope is unambiguous.
//!
//! Statement identifiers are dense and 0-based, assigned in function order and
//! pre-order within each function. Predicate identifiers follow statement
//! order over the `if`/`while` statements.

use std::collections::BTreeMap;

use super::ast::*;
use super::parser::SourceProgram;
use super::program::*;
use super::fnv1a64;

pub fn check_and_assign(src: &mut SourceProgram, source: &str) -> Result<Program, Diagnostics> {
    let mut diags = Vec::new();

    // Global table.
    let mut global_types: BTreeMap<String, Type> = BTreeMap::new();
    for g in &src.globals {
        if global_types.contains_key(&g.name) {
            diags.push(Diagnostic::new(g.span, format!("duplicate global `{}`", g.name)));
            continue;
        }
        if let Some(init) = &g.init {
            let lit_ty = match init {
                Literal::Int(_) => Type::Int,
                Literal::Bool(_) => Type::Bool,
                Literal::Str(_) => Type::Str,
            };
            if g.ty != lit_ty {
                diags.push(Diagnostic::new(
                    g.span,
                    format!("global `{}` declared `{}` but initialized with `{lit_ty}`", g.name, g.ty),
                ));
            }
        }
        global_types.insert(g.name.clone(), g.ty);
    }

    // Function signatures.
    let mut func_sigs: BTreeMap<String, (Vec<Type>, Option<Type>)> = BTreeMap::new();
    for f in &src.functions {
        if func_sigs.contains_key(&f.name) {
            diags.push(Diagnostic::new(f.span, format!("duplicate function `{}`", f.name)));
            continue;
        }
        func_sigs.insert(f.name.clone(), (f.params.iter().map(|(_, t)| *t).collect(), f.ret));
    }

    let main_idx = src.functions.iter().position(|f| f.name == "main");
    match main_idx {
        None => diags.push(Diagnostic::new(
            Span::new(0, 0, 1, 1),
            "missing `main` function".to_string(),
        )),
        Some(i) => {
            let f = &src.functions[i];
            for (name, ty) in &f.params {
                if *ty != Type::Int {
                    diags.push(Diagnostic::new(
                        f.span,
                        format!("`main` parameter `{name}` must be `int` (test arguments are integers)"),
                    ));
                }
            }
        }
    }

    // Per-function checks and identifier assignment.
    let mut statement_table = Vec::new();
    let mut predicate_table = Vec::new();
    for (fi, f) in src.functions.iter_mut().enumerate() {
        let func_id = FuncId(fi as u32);
        let mut ck = FuncChecker {
            globals: &global_types,
            funcs: &func_sigs,
            ret: f.ret,
            names: BTreeMap::new(),
            visible: Vec::new(),
            locals: Vec::new(),
            diags: &mut diags,
        };
        for (name, ty) in &f.params {
            if ck.names.contains_key(name) {
                ck.diags.push(Diagnostic::new(
                    f.span,
                    format!("duplicate parameter `{name}` in function `{}`", f.name),
                ));
            } else if global_types.contains_key(name) {
                ck.diags.push(Diagnostic::new(
                    f.span,
                    format!("parameter `{name}` shadows a global"),
                ));
            }
            ck.names.insert(name.clone(), *ty);
            ck.visible.push(name.clone());
        }
        ck.check_block(&mut f.body);
        f.locals = ck.locals;
        assign_ids(&mut f.body, func_id, &mut statement_table, &mut predicate_table);
    }

    if !diags.is_empty() {
        return Err(Diagnostics(diags));
    }

    let main = FuncId(main_idx.expect("diagnosed above") as u32);
    Ok(Program {
        functions: std::mem::take(&mut src.functions),
        globals: std::mem::take(&mut src.globals),
        statement_table,
        predicate_table,
        source_digest: fnv1a64(source.as_bytes()),
        source: source.to_string(),
        main,
    })
}

fn assign_ids(
    body: &mut [Stmt],
    func: FuncId,
    statements: &mut Vec<StatementInfo>,
    predicates: &mut Vec<PredicateInfo>,
) {
    for stmt in body {
        let id = StatementId(statements.len() as u32);
        stmt.id = id;
        let (kind, cond_span) = match &stmt.kind {
            StmtKind::Decl { .. } => (StatementKind::Decl, None),
            StmtKind::Assign { .. } => (StatementKind::Assign, None),
            StmtKind::If { cond, .. } => (StatementKind::If, Some(cond.span)),
            StmtKind::While { cond, .. } => (StatementKind::While, Some(cond.span)),
            StmtKind::Return(_) => (StatementKind::Return, None),
            StmtKind::Print(_) => (StatementKind::Print, None),
        };
        let predicate = cond_span.map(|cond_span| {
            let pid = PredicateId(predicates.len() as u32);
            predicates.push(PredicateInfo { statement: id, function: func, cond_span });
            pid
        });
        statements.push(StatementInfo { kind, function: func, span: stmt.span, predicate });
        match &mut stmt.kind {
            StmtKind::If { then_branch, else_branch, .. } => {
                assign_ids(then_branch, func, statements, predicates);
                assign_ids(else_branch, func, statements, predicates);
            }
            StmtKind::While { body, .. } => {
                assign_ids(body, func, statements, predicates);
            }
            _ => {}
        }
    }
}

struct FuncChecker<'a> {
    globals: &'a BTreeMap<String, Type>,
    funcs: &'a BTreeMap<String, (Vec<Type>, Option<Type>)>,
    ret: Option<Type>,
    /// Every name declared so far in this function (params + locals), for
    /// duplicate detection; never removed.
    names: BTreeMap<String, Type>,
    /// Names currently in scope, in declaration order (popped at block exit).
    visible: Vec<String>,
    locals: Vec<(String, Type)>,
    diags: &'a mut Vec<Diagnostic>,
}

impl FuncChecker<'_> {
    fn lookup(&self, name: &str) -> Option<Type> {
        if self.visible.iter().any(|n| n == name) {
            return self.names.get(name).copied();
        }
        self.globals.get(name).copied()
    }

    fn check_block(&mut self, block: &mut [Stmt]) {
        let scope_mark = self.visible.len();
        for stmt in block.iter_mut() {
            self.check_stmt(stmt);
        }
        self.visible.truncate(scope_mark);
    }

    fn check_stmt(&mut self, stmt: &mut Stmt) {
        let span = stmt.span;
        match &mut stmt.kind {
            StmtKind::Decl { name, ty, init } => {
                if let Some(init) = init {
                    // The initializer is evaluated before the name enters scope.
                    if let Some(init_ty) = self.check_expr(init) {
                        if !ty.is_scalar() {
                            self.diags.push(Diagnostic::new(
                                span,
                                "array declarations take no initializer".to_string(),
                            ));
                        } else if init_ty != *ty {
                            self.diags.push(Diagnostic::new(
                                span,
                                format!("`{name}` declared `{ty}` but initialized with `{init_ty}`"),
                            ));
                        }
                    }
                }
                if self.names.contains_key(name.as_str()) {
                    self.diags.push(Diagnostic::new(span, format!("duplicate declaration of `{name}`")));
                } else if self.globals.contains_key(name.as_str()) {
                    self.diags.push(Diagnostic::new(span, format!("`{name}` shadows a global")));
                } else {
                    self.names.insert(name.clone(), *ty);
                    self.locals.push((name.clone(), *ty));
                }
                self.visible.push(name.clone());
            }
            StmtKind::Assign { target, index, value } => {
                let target_ty = self.lookup(target);
                if target_ty.is_none() {
                    self.diags.push(Diagnostic::new(
                        span,
                        format!("use of undeclared variable `{target}`"),
                    ));
                }
                let value_ty = self.check_expr(value);
                match (target_ty, index) {
                    (Some(Type::IntArray(_)), Some(idx)) => {
                        if let Some(t) = self.check_expr(idx) {
                            if t != Type::Int {
                                self.diags.push(Diagnostic::new(idx.span, "array index must be `int`"));
                            }
                        }
                        if let Some(t) = value_ty {
                            if t != Type::Int {
                                self.diags.push(Diagnostic::new(
                                    value.span,
                                    "array elements are `int`".to_string(),
                                ));
                            }
                        }
                    }
                    (Some(Type::IntArray(_)), None) => {
                        self.diags.push(Diagnostic::new(
                            span,
                            format!("cannot assign whole array `{target}`"),
                        ));
                    }
                    (Some(ty), None) => {
                        if let Some(t) = value_ty {
                            if t != ty {
                                self.diags.push(Diagnostic::new(
                                    value.span,
                                    format!("cannot assign `{t}` to `{target}` of type `{ty}`"),
                                ));
                            }
                        }
                    }
                    (Some(ty), Some(_)) => {
                        self.diags.push(Diagnostic::new(
                            span,
                            format!("`{target}` of type `{ty}` cannot be indexed"),
                        ));
                    }
                    (None, _) => {}
                }
            }
            StmtKind::If { cond, then_branch, else_branch } => {
                self.check_cond(cond);
                self.check_block(then_branch);
                self.check_block(else_branch);
            }
            StmtKind::While { cond, body } => {
                self.check_cond(cond);
                self.check_block(body);
            }
            StmtKind::Return(value) => match (self.ret, value) {
                (None, Some(v)) => {
                    self.check_expr(v);
                    self.diags.push(Diagnostic::new(
                        span,
                        "function has no return type but returns a value".to_string(),
                    ));
                }
                (Some(ty), Some(v)) => {
                    if let Some(t) = self.check_expr(v) {
                        if t != ty {
                            self.diags.push(Diagnostic::new(
                                v.span,
                                format!("return type mismatch: expected `{ty}`, found `{t}`"),
                            ));
                        }
                    }
                }
                (Some(ty), None) => {
                    self.diags.push(Diagnostic::new(
                        span,
                        format!("function must return `{ty}`"),
                    ));
                }
                (None, None) => {}
            },
            StmtKind::Print(value) => {
                if let Some(t) = self.check_expr(value) {
                    if !t.is_scalar() {
                        self.diags.push(Diagnostic::new(value.span, "cannot print an array"));
                    }
                }
            }
        }
    }

    fn check_cond(&mut self, cond: &Expr) {
        if let Some(t) = self.check_expr(cond) {
            if t != Type::Bool {
                self.diags.push(Diagnostic::new(
                    cond.span,
                    format!("condition must be `bool`, found `{t}`"),
                ));
            }
        }
    }

    /// Type of an expression, or `None` if a diagnostic was already emitted.
    fn check_expr(&mut self, expr: &Expr) -> Option<Type> {
        match &expr.kind {
            ExprKind::Literal(Literal::Int(_)) => Some(Type::Int),
            ExprKind::Literal(Literal::Bool(_)) => Some(Type::Bool),
            ExprKind::Literal(Literal::Str(_)) => Some(Type::Str),
            ExprKind::Var(name) => {
                let ty = self.lookup(name);
                if ty.is_none() {
                    self.diags.push(Diagnostic::new(
                        expr.span,
                        format!("use of undeclared variable `{name}`"),
                    ));
                }
                ty
            }
            ExprKind::Index { array, index } => {
                let arr_ty = self.lookup(array);
                if let Some(t) = self.check_expr(index) {
                    if t != Type::Int {
                        self.diags.push(Diagnostic::new(index.span, "array index must be `int`"));
                    }
                }
                match arr_ty {
                    Some(Type::IntArray(_)) => Some(Type::Int),
                    Some(ty) => {
                        self.diags.push(Diagnostic::new(
                            expr.span,
                            format!("`{array}` of type `{ty}` cannot be indexed"),
                        ));
                        None
                    }
                    None => {
                        self.diags.push(Diagnostic::new(
                            expr.span,
                            format!("use of undeclared variable `{array}`"),
                        ));
                        None
                    }
                }
            }
            ExprKind::Binary { op, lhs, rhs } => {
                let lt = self.check_expr(lhs);
                let rt = self.check_expr(rhs);
                let (lt, rt) = (lt?, rt?);
                match op {
                    BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div | BinOp::Rem => {
                        if lt != Type::Int || rt != Type::Int {
                            self.diags.push(Diagnostic::new(
                                expr.span,
                                format!("`{}` requires `int` operands", op.symbol()),
                            ));
                            None
                        } else {
                            Some(Type::Int)
                        }
                    }
                    BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => {
                        if lt != Type::Int || rt != Type::Int {
                            self.diags.push(Diagnostic::new(
                                expr.span,
                                format!("`{}` requires `int` operands", op.symbol()),
                            ));
                            None
                        } else {
                            Some(Type::Bool)
                        }
                    }
                    BinOp::Eq | BinOp::Ne => {
                        if lt != rt || !lt.is_scalar() {
                            self.diags.push(Diagnostic::new(
                                expr.span,
                                format!("`{}` requires two scalars of the same type", op.symbol()),
                            ));
                            None
                        } else {
                            Some(Type::Bool)
                        }
                    }
                    BinOp::And | BinOp::Or => {
                        if lt != Type::Bool || rt != Type::Bool {
                            self.diags.push(Diagnostic::new(
                                expr.span,
                                format!("`{}` requires `bool` operands", op.symbol()),
                            ));
                            None
                        } else {
                            Some(Type::Bool)
                        }
                    }
                }
            }
            ExprKind::Not(inner) => {
                if let Some(t) = self.check_expr(inner) {
                    if t != Type::Bool {
                        self.diags.push(Diagnostic::new(inner.span, "`!` requires a `bool` operand"));
                    }
                }
                Some(Type::Bool)
            }
            ExprKind::Call { function, args } => {
                for a in args {
                    self.check_expr(a);
                }
                match self.funcs.get(function) {
                    None => {
                        self.diags.push(Diagnostic::new(
                            expr.span,
                            format!("call to unknown function `{function}`"),
                        ));
                        None
                    }
                    Some((param_tys, ret)) => {
                        if args.len() != param_tys.len() {
                            self.diags.push(Diagnostic::new(
                                expr.span,
                                format!(
                                    "`{function}` takes {} argument(s), {} given",
                                    param_tys.len(),
                                    args.len()
                                ),
                            ));
                        } else {
                            for (a, want) in args.iter().zip(param_tys) {
                                // Re-deriving the argument type is cheap; diagnostics
                                // above already cover unknown names.
                                if let Some(got) = self.peek_type(a) {
                                    if got != *want {
                                        self.diags.push(Diagnostic::new(
                                            a.span,
                                            format!("argument type mismatch: expected `{want}`, found `{got}`"),
                                        ));
                                    }
                                }
                            }
                        }
                        if ret.is_none() {
                            self.diags.push(Diagnostic::new(
                                expr.span,
                                format!("`{function}` has no return type and cannot be used in an expression"),
                            ));
                        }
                        *ret
                    }
                }
            }
        }
    }

    /// Silent type derivation (no diagnostics) for argument checking.
    fn peek_type(&self, expr: &Expr) -> Option<Type> {
        match &expr.kind {
            ExprKind::Literal(Literal::Int(_)) => Some(Type::Int),
            ExprKind::Literal(Literal::Bool(_)) => Some(Type::Bool),
            ExprKind::Literal(Literal::Str(_)) => Some(Type::Str),
            ExprKind::Var(name) => self.lookup(name),
            ExprKind::Index { .. } => Some(Type::Int),
            ExprKind::Binary { op, .. } => match op {
                BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div | BinOp::Rem => Some(Type::Int),
                _ => Some(Type::Bool),
            },
            ExprKind::Not(_) => Some(Type::Bool),
            ExprKind::Call { function, .. } => self.funcs.get(function).and_then(|(_, r)| *r),
        }
    }
}
