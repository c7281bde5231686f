//! Feature schemas: which program variables are captured at a predicate site
//! and how raw values reduce to 64-bit numeric features.
//!
//! Four variable categories are collected for a predicate p, in order:
//! values used directly in p's condition (including every function-call
//! result evaluated inside it), formal parameters of the enclosing function,
//! scalar locals and globals used or defined in the function, and arrays used
//! or defined in the function (reduced by an order-sensitive fold). A variable
//! belonging to several categories keeps the lowest one. Within a category,
//! descriptors are ordered by name.
//!
//! Reductions: ints are used as-is, bools map to 0/1, strings reduce to their
//! FNV-1a 64-bit digest, arrays to an FNV-1a fold over element bytes. A value
//! captured before its declaration executed yields the sentinel `i64::MIN`.

use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

use crate::minilang::{
    fnv1a64, Expr, ExprKind, PredicateId, Program, StatementId, Stmt, StmtKind,
};

/// Sentinel feature value for variables with no value at capture time.
pub const UNINITIALIZED_SENTINEL: i64 = i64::MIN;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VarCategory {
    UsedInPredicate,
    FormalParam,
    LocalOrGlobal,
    ArrayReduced,
}

/// Where the interpreter reads a feature from at capture time.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum CaptureSource {
    /// Local (first) or global variable, by name.
    Var(String),
    /// Result of the call expression starting at this source offset within
    /// the predicate's condition; missing when short-circuit evaluation
    /// skipped the call.
    CallResult { site_start: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureDescriptor {
    pub name: String,
    pub category: VarCategory,
    pub source: CaptureSource,
}

/// Ordered feature layout for one predicate. Identical for every snapshot of
/// that predicate; derived statically from the program.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSchema {
    pub predicate: PredicateId,
    pub descriptors: Vec<FeatureDescriptor>,
}

impl FeatureSchema {
    pub fn len(&self) -> usize {
        self.descriptors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.descriptors.is_empty()
    }

    /// Call-site offsets the interpreter must record while evaluating the
    /// condition.
    pub fn call_sites(&self) -> impl Iterator<Item = usize> + '_ {
        self.descriptors.iter().filter_map(|d| match d.source {
            CaptureSource::CallResult { site_start } => Some(site_start),
            CaptureSource::Var(_) => None,
        })
    }
}

/// A raw captured value, before numeric reduction.
#[derive(Debug, Clone, PartialEq)]
pub enum Captured {
    Missing,
    Int(i64),
    Bool(bool),
    Str(String),
    Array(Vec<i64>),
}

/// Reduce captured values to the numeric feature vector, in schema order.
pub fn featurize(captured: &[Captured]) -> Vec<i64> {
    captured.iter().map(reduce).collect()
}

fn reduce(c: &Captured) -> i64 {
    match c {
        Captured::Missing => UNINITIALIZED_SENTINEL,
        Captured::Int(v) => *v,
        Captured::Bool(b) => i64::from(*b),
        Captured::Str(s) => fnv1a64(s.as_bytes()) as i64,
        Captured::Array(a) => fold_array(a) as i64,
    }
}

/// Order-sensitive 64-bit fold over array elements.
pub fn fold_array(elements: &[i64]) -> u64 {
    let mut bytes = Vec::with_capacity(elements.len() * 8);
    for e in elements {
        bytes.extend_from_slice(&e.to_le_bytes());
    }
    fnv1a64(&bytes)
}

/// Build the capture schema for one predicate.
pub fn build_schema(program: &Program, predicate: PredicateId) -> FeatureSchema {
    let info = program.predicate(predicate);
    let function = program.function(info.function);
    let cond = find_condition(&function.body, info.statement)
        .expect("predicate table points at a branch statement");

    // Category 1: names and call results used directly in the condition.
    let mut used_names = BTreeSet::new();
    let mut call_sites = Vec::new();
    collect_cond_uses(cond, &mut used_names, &mut call_sites);

    // Categories 3 and 4: locals plus referenced globals, split scalar/array.
    let mut referenced = BTreeSet::new();
    for stmt in &function.body {
        collect_stmt_names(stmt, &mut referenced);
    }
    let mut scalar_vars = BTreeSet::new();
    let mut array_vars = BTreeSet::new();
    for (name, ty) in &function.locals {
        if ty.is_scalar() {
            scalar_vars.insert(name.clone());
        } else {
            array_vars.insert(name.clone());
        }
    }
    for g in &program.globals {
        if referenced.contains(&g.name) {
            if g.ty.is_scalar() {
                scalar_vars.insert(g.name.clone());
            } else {
                array_vars.insert(g.name.clone());
            }
        }
    }

    let mut seen = BTreeSet::new();
    let mut descriptors = Vec::new();
    let push = |name: String, category: VarCategory, source: CaptureSource,
                    seen: &mut BTreeSet<String>,
                    out: &mut Vec<FeatureDescriptor>| {
        if seen.insert(name.clone()) {
            out.push(FeatureDescriptor { name, category, source });
        }
    };

    for name in &used_names {
        push(
            name.clone(),
            VarCategory::UsedInPredicate,
            CaptureSource::Var(name.clone()),
            &mut seen,
            &mut descriptors,
        );
    }
    for (k, (fname, site_start)) in call_sites.iter().enumerate() {
        push(
            format!("call:{fname}#{k}"),
            VarCategory::UsedInPredicate,
            CaptureSource::CallResult { site_start: *site_start },
            &mut seen,
            &mut descriptors,
        );
    }
    for (name, _) in &function.params {
        push(
            name.clone(),
            VarCategory::FormalParam,
            CaptureSource::Var(name.clone()),
            &mut seen,
            &mut descriptors,
        );
    }
    for name in &scalar_vars {
        push(
            name.clone(),
            VarCategory::LocalOrGlobal,
            CaptureSource::Var(name.clone()),
            &mut seen,
            &mut descriptors,
        );
    }
    for name in &array_vars {
        push(
            name.clone(),
            VarCategory::ArrayReduced,
            CaptureSource::Var(name.clone()),
            &mut seen,
            &mut descriptors,
        );
    }

    // Stable order: category ascending, then name; call-site descriptors keep
    // their pre-order site index inside category 1.
    descriptors.sort_by(|a, b| (a.category, &a.name).cmp(&(b.category, &b.name)));
    FeatureSchema { predicate, descriptors }
}

fn find_condition(body: &[Stmt], id: StatementId) -> Option<&Expr> {
    for stmt in body {
        match &stmt.kind {
            StmtKind::If { cond, then_branch, else_branch } => {
                if stmt.id == id {
                    return Some(cond);
                }
                if let Some(c) = find_condition(then_branch, id) {
                    return Some(c);
                }
                if let Some(c) = find_condition(else_branch, id) {
                    return Some(c);
                }
            }
            StmtKind::While { cond, body } => {
                if stmt.id == id {
                    return Some(cond);
                }
                if let Some(c) = find_condition(body, id) {
                    return Some(c);
                }
            }
            _ => {}
        }
    }
    None
}

/// Variable names plus call sites (function name, span start) in pre-order.
fn collect_cond_uses(
    expr: &Expr,
    names: &mut BTreeSet<String>,
    calls: &mut Vec<(String, usize)>,
) {
    match &expr.kind {
        ExprKind::Literal(_) => {}
        ExprKind::Var(name) => {
            names.insert(name.clone());
        }
        ExprKind::Index { array, index } => {
            names.insert(array.clone());
            collect_cond_uses(index, names, calls);
        }
        ExprKind::Binary { lhs, rhs, .. } => {
            collect_cond_uses(lhs, names, calls);
            collect_cond_uses(rhs, names, calls);
        }
        ExprKind::Not(inner) => collect_cond_uses(inner, names, calls),
        ExprKind::Call { function, args } => {
            calls.push((function.clone(), expr.span.start));
            for a in args {
                collect_cond_uses(a, names, calls);
            }
        }
    }
}

/// All variable names used or defined anywhere in a statement.
fn collect_stmt_names(stmt: &Stmt, names: &mut BTreeSet<String>) {
    match &stmt.kind {
        StmtKind::Decl { name, init, .. } => {
            names.insert(name.clone());
            if let Some(e) = init {
                collect_expr_names(e, names);
            }
        }
        StmtKind::Assign { target, index, value } => {
            names.insert(target.clone());
            if let Some(e) = index {
                collect_expr_names(e, names);
            }
            collect_expr_names(value, names);
        }
        StmtKind::If { cond, then_branch, else_branch } => {
            collect_expr_names(cond, names);
            for s in then_branch.iter().chain(else_branch) {
                collect_stmt_names(s, names);
            }
        }
        StmtKind::While { cond, body } => {
            collect_expr_names(cond, names);
            for s in body {
                collect_stmt_names(s, names);
            }
        }
        StmtKind::Return(Some(e)) | StmtKind::Print(e) => collect_expr_names(e, names),
        StmtKind::Return(None) => {}
    }
}

fn collect_expr_names(expr: &Expr, names: &mut BTreeSet<String>) {
    match &expr.kind {
        ExprKind::Literal(_) => {}
        ExprKind::Var(name) => {
            names.insert(name.clone());
        }
        ExprKind::Index { array, index } => {
            names.insert(array.clone());
            collect_expr_names(index, names);
        }
        ExprKind::Binary { lhs, rhs, .. } => {
            collect_expr_names(lhs, names);
            collect_expr_names(rhs, names);
        }
        ExprKind::Not(inner) => collect_expr_names(inner, names),
        ExprKind::Call { args, .. } => {
            for a in args {
                collect_expr_names(a, names);
            }
        }
    }
}
