//! Tree-walking interpreter with instrumentation hooks.
//!
//! Each statement execution is one step against the budget; a loop guard
//! re-evaluation is another execution of the `while` statement. Dynamic
//! control-dependence events pick the most recently executed static parent,
//! so a loop guard's re-evaluation emits the self-edge while its first
//! evaluation is attributed to the enclosing predicate (or nothing).

use std::collections::BTreeMap;

use crate::graphs::{build_cdg, Cdg};
use crate::learner::schema::{featurize, Captured, CaptureSource};
use crate::minilang::{
    BinOp, Expr, ExprKind, Literal, PredicateId, Program, StatementId, Stmt, StmtKind,
    TestCase, Type, Verdict,
};

use super::{
    CdEvent, ExecConfig, ExecutionResult, FailureKind, Hooks, OccurrenceCounts, RuntimeErrorKind,
    StateSnapshot,
};

#[derive(Debug, Clone, PartialEq)]
enum Value {
    Int(i64),
    Bool(bool),
    Str(String),
    Array(Vec<i64>),
}

impl Value {
    fn default_of(ty: &Type) -> Value {
        match ty {
            Type::Int => Value::Int(0),
            Type::Bool => Value::Bool(false),
            Type::Str => Value::Str(String::new()),
            Type::IntArray(n) => Value::Array(vec![0; *n]),
        }
    }

    fn render(&self) -> String {
        match self {
            Value::Int(v) => v.to_string(),
            Value::Bool(b) => if *b { "true" } else { "false" }.to_string(),
            Value::Str(s) => s.clone(),
            Value::Array(_) => unreachable!("arrays are rejected by the checker in print"),
        }
    }

    fn as_int(&self) -> i64 {
        match self {
            Value::Int(v) => *v,
            _ => unreachable!("type checked"),
        }
    }

    fn as_bool(&self) -> bool {
        match self {
            Value::Bool(b) => *b,
            _ => unreachable!("type checked"),
        }
    }

    fn capture(&self) -> Captured {
        match self {
            Value::Int(v) => Captured::Int(*v),
            Value::Bool(b) => Captured::Bool(*b),
            Value::Str(s) => Captured::Str(s.clone()),
            Value::Array(a) => Captured::Array(a.clone()),
        }
    }
}

enum Flow {
    Normal,
    Return(Option<Value>),
}

enum Halt {
    Error(RuntimeErrorKind),
    StepLimit,
}

type Exec<T> = Result<T, Halt>;

pub(super) fn run(
    program: &Program,
    test: &TestCase,
    hooks: Hooks<'_>,
    config: &ExecConfig,
) -> (ExecutionResult, OccurrenceCounts) {
    // The static CDG drives dynamic event attribution.
    let cdg = build_cdg(program).expect("checked programs lower to well-formed CFGs");
    let mut interp = Interp {
        program,
        parents: parents_by_statement(program, &cdg),
        hooks,
        config,
        globals: BTreeMap::new(),
        output: String::new(),
        steps: 0,
        occurrences: vec![0; program.predicate_count()],
        events: Vec::new(),
        snapshots: Vec::new(),
        coverage: vec![false; program.statement_count()],
        last_exec: vec![None; program.statement_count()],
        call_depth: 0,
    };

    for g in &program.globals {
        let value = match &g.init {
            Some(Literal::Int(v)) => Value::Int(*v),
            Some(Literal::Bool(b)) => Value::Bool(*b),
            Some(Literal::Str(s)) => Value::Str(s.clone()),
            None => Value::default_of(&g.ty),
        };
        interp.globals.insert(g.name.clone(), value);
    }

    let outcome = interp.call_main(test);
    let failure_kind = match outcome {
        Ok(()) => {
            if interp.output == test.expected {
                FailureKind::None
            } else {
                FailureKind::WrongOutput
            }
        }
        Err(Halt::Error(kind)) => FailureKind::RuntimeError(kind),
        Err(Halt::StepLimit) => FailureKind::StepLimit,
    };
    let verdict = if failure_kind == FailureKind::None { Verdict::Pass } else { Verdict::Fail };

    let completed = matches!(failure_kind, FailureKind::None | FailureKind::WrongOutput);
    let counts = OccurrenceCounts {
        counts: interp
            .occurrences
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(i, &c)| (PredicateId(i as u32), c))
            .collect(),
        completed,
    };
    let captured_any =
        interp.hooks.deciders.is_some() || interp.hooks.snapshot_schemas.is_some();
    let result = ExecutionResult {
        verdict,
        output: interp.output,
        events: config.record_events.then_some(interp.events),
        snapshots: captured_any.then_some(interp.snapshots),
        steps: interp.steps,
        failure_kind,
        coverage: config.record_coverage.then_some(interp.coverage),
    };
    (result, counts)
}

/// Static CDG parents per statement, ascending by id.
fn parents_by_statement(program: &Program, cdg: &Cdg) -> Vec<Vec<StatementId>> {
    (0..program.statement_count())
        .map(|i| cdg.parents_of(StatementId(i as u32)).to_vec())
        .collect()
}

struct Interp<'a> {
    program: &'a Program,
    parents: Vec<Vec<StatementId>>,
    hooks: Hooks<'a>,
    config: &'a ExecConfig,
    globals: BTreeMap<String, Value>,
    output: String,
    steps: u64,
    occurrences: Vec<u32>,
    events: Vec<CdEvent>,
    snapshots: Vec<StateSnapshot>,
    coverage: Vec<bool>,
    last_exec: Vec<Option<u64>>,
    call_depth: usize,
}

type Frame = BTreeMap<String, Value>;

impl Interp<'_> {
    fn call_main(&mut self, test: &TestCase) -> Exec<()> {
        let main = self.program.function(self.program.main);
        if main.params.len() != test.args.len() {
            return Err(Halt::Error(RuntimeErrorKind::ArgumentCountMismatch));
        }
        let mut frame: Frame = main
            .params
            .iter()
            .zip(&test.args)
            .map(|((name, _), &v)| (name.clone(), Value::Int(v)))
            .collect();
        match self.exec_block(&main.body, &mut frame)? {
            Flow::Normal | Flow::Return(_) => Ok(()),
        }
    }

    /// Account one statement execution: budget, coverage, event emission.
    fn step_statement(&mut self, id: StatementId) -> Exec<()> {
        self.steps += 1;
        if self.steps > self.config.step_budget {
            return Err(Halt::StepLimit);
        }
        let t = self.steps;
        self.coverage[id.index()] = true;
        if self.config.record_events {
            let parent = self.parents[id.index()]
                .iter()
                .filter_map(|&p| self.last_exec[p.index()].map(|ts| (ts, p)))
                .max_by_key(|&(ts, _)| ts)
                .map(|(_, p)| p);
            if let Some(parent) = parent {
                self.events.push(CdEvent { timestamp: t, parent, child: id });
            }
        }
        self.last_exec[id.index()] = Some(t);
        Ok(())
    }

    fn exec_block(&mut self, stmts: &[Stmt], frame: &mut Frame) -> Exec<Flow> {
        for stmt in stmts {
            match self.exec_stmt(stmt, frame)? {
                Flow::Normal => {}
                ret => return Ok(ret),
            }
        }
        Ok(Flow::Normal)
    }

    fn exec_stmt(&mut self, stmt: &Stmt, frame: &mut Frame) -> Exec<Flow> {
        match &stmt.kind {
            StmtKind::Decl { name, ty, init } => {
                self.step_statement(stmt.id)?;
                let value = match init {
                    Some(e) => self.eval(e, frame, &mut None)?,
                    None => Value::default_of(ty),
                };
                frame.insert(name.clone(), value);
                Ok(Flow::Normal)
            }
            StmtKind::Assign { target, index, value } => {
                self.step_statement(stmt.id)?;
                let rhs = self.eval(value, frame, &mut None)?;
                match index {
                    None => {
                        self.store(target, rhs, frame);
                    }
                    Some(idx_expr) => {
                        let idx = self.eval(idx_expr, frame, &mut None)?.as_int();
                        let arr = match frame.get_mut(target) {
                            Some(v) => v,
                            None => self
                                .globals
                                .get_mut(target)
                                .expect("checked: assignment target exists"),
                        };
                        match arr {
                            Value::Array(elems) => {
                                let len = elems.len() as i64;
                                if idx < 0 || idx >= len {
                                    return Err(Halt::Error(RuntimeErrorKind::IndexOutOfBounds));
                                }
                                elems[idx as usize] = rhs.as_int();
                            }
                            _ => unreachable!("type checked"),
                        }
                    }
                }
                Ok(Flow::Normal)
            }
            StmtKind::If { cond, then_branch, else_branch } => {
                self.step_statement(stmt.id)?;
                let taken = self.eval_predicate(stmt.id, cond, frame)?;
                if taken {
                    self.exec_block(then_branch, frame)
                } else {
                    self.exec_block(else_branch, frame)
                }
            }
            StmtKind::While { cond, body } => loop {
                self.step_statement(stmt.id)?;
                let taken = self.eval_predicate(stmt.id, cond, frame)?;
                if !taken {
                    return Ok(Flow::Normal);
                }
                match self.exec_block(body, frame)? {
                    Flow::Normal => {}
                    ret => return Ok(ret),
                }
            },
            StmtKind::Return(value) => {
                self.step_statement(stmt.id)?;
                let v = match value {
                    Some(e) => Some(self.eval(e, frame, &mut None)?),
                    None => None,
                };
                Ok(Flow::Return(v))
            }
            StmtKind::Print(value) => {
                self.step_statement(stmt.id)?;
                let v = self.eval(value, frame, &mut None)?;
                self.output.push_str(&v.render());
                self.output.push('\n');
                Ok(Flow::Normal)
            }
        }
    }

    fn store(&mut self, name: &str, value: Value, frame: &mut Frame) {
        if let Some(slot) = frame.get_mut(name) {
            *slot = value;
        } else {
            let slot = self.globals.get_mut(name).expect("checked: target exists");
            *slot = value;
        }
    }

    fn load(&self, name: &str, frame: &Frame) -> Value {
        frame
            .get(name)
            .or_else(|| self.globals.get(name))
            .expect("checked: variable exists")
            .clone()
    }

    /// Evaluate a predicate's condition, applying occurrence counting, state
    /// capture, plan/decider negation (exclusive-or), and snapshot recording.
    fn eval_predicate(&mut self, stmt: StatementId, cond: &Expr, frame: &mut Frame) -> Exec<bool> {
        let pid = self
            .program
            .predicate_of(stmt)
            .expect("branch statements are predicates");
        self.occurrences[pid.index()] += 1;
        let occurrence = self.occurrences[pid.index()];

        let decider = self.hooks.deciders.and_then(|d| d.get(&pid)).copied();
        let snapshot_schema = self.hooks.snapshot_schemas.and_then(|s| s.get(&pid));
        let schema = decider.map(|(s, _)| s).or(snapshot_schema);

        let plan_negates =
            self.hooks.plan.is_some_and(|plan| plan.selects(pid, occurrence));

        let Some(schema) = schema else {
            let value = self.eval(cond, frame, &mut None)?.as_bool();
            return Ok(value ^ plan_negates);
        };

        // Variables are captured before the condition runs; call results are
        // recorded while it runs (short-circuited calls stay missing).
        let mut pre: Vec<Option<Captured>> = Vec::with_capacity(schema.len());
        for d in &schema.descriptors {
            pre.push(match &d.source {
                CaptureSource::Var(name) => Some(
                    frame
                        .get(name)
                        .or_else(|| self.globals.get(name))
                        .map_or(Captured::Missing, Value::capture),
                ),
                CaptureSource::CallResult { .. } => None,
            });
        }
        let mut call_results: BTreeMap<usize, Captured> = BTreeMap::new();
        let value = {
            let mut cap = Some(&mut call_results);
            self.eval(cond, frame, &mut cap)?.as_bool()
        };
        let captured: Vec<Captured> = schema
            .descriptors
            .iter()
            .zip(pre)
            .map(|(d, pre)| match (&d.source, pre) {
                (CaptureSource::Var(_), Some(c)) => c,
                (CaptureSource::CallResult { site_start }, _) => {
                    call_results.get(site_start).cloned().unwrap_or(Captured::Missing)
                }
                (CaptureSource::Var(_), None) => unreachable!(),
            })
            .collect();
        let features = featurize(&captured);

        let mut negate = plan_negates;
        if let Some((_, decider)) = decider {
            negate ^= decider.should_negate(occurrence, &features);
        }
        let record = decider.is_some()
            || self.hooks.snapshot_schemas.is_some_and(|s| s.contains_key(&pid));
        if record {
            self.snapshots.push(StateSnapshot {
                predicate: pid,
                occurrence,
                values: features,
                negated: negate,
            });
        }
        Ok(value ^ negate)
    }

    fn eval(
        &mut self,
        expr: &Expr,
        frame: &mut Frame,
        cap: &mut Option<&mut BTreeMap<usize, Captured>>,
    ) -> Exec<Value> {
        match &expr.kind {
            ExprKind::Literal(Literal::Int(v)) => Ok(Value::Int(*v)),
            ExprKind::Literal(Literal::Bool(b)) => Ok(Value::Bool(*b)),
            ExprKind::Literal(Literal::Str(s)) => Ok(Value::Str(s.clone())),
            ExprKind::Var(name) => Ok(self.load(name, frame)),
            ExprKind::Index { array, index } => {
                let idx = self.eval(index, frame, cap)?.as_int();
                let arr = self.load(array, frame);
                match arr {
                    Value::Array(elems) => {
                        if idx < 0 || idx >= elems.len() as i64 {
                            Err(Halt::Error(RuntimeErrorKind::IndexOutOfBounds))
                        } else {
                            Ok(Value::Int(elems[idx as usize]))
                        }
                    }
                    _ => unreachable!("type checked"),
                }
            }
            ExprKind::Binary { op, lhs, rhs } => match op {
                BinOp::And => {
                    let l = self.eval(lhs, frame, cap)?.as_bool();
                    if !l {
                        return Ok(Value::Bool(false));
                    }
                    Ok(Value::Bool(self.eval(rhs, frame, cap)?.as_bool()))
                }
                BinOp::Or => {
                    let l = self.eval(lhs, frame, cap)?.as_bool();
                    if l {
                        return Ok(Value::Bool(true));
                    }
                    Ok(Value::Bool(self.eval(rhs, frame, cap)?.as_bool()))
                }
                _ => {
                    let l = self.eval(lhs, frame, cap)?;
                    let r = self.eval(rhs, frame, cap)?;
                    self.eval_binop(*op, l, r)
                }
            },
            ExprKind::Not(inner) => Ok(Value::Bool(!self.eval(inner, frame, cap)?.as_bool())),
            ExprKind::Call { function, args } => {
                let mut arg_values = Vec::with_capacity(args.len());
                for a in args {
                    arg_values.push(self.eval(a, frame, cap)?);
                }
                let result = self.call(function, arg_values)?;
                if let Some(map) = cap.as_deref_mut() {
                    map.insert(expr.span.start, result.capture());
                }
                Ok(result)
            }
        }
    }

    fn eval_binop(&mut self, op: BinOp, l: Value, r: Value) -> Exec<Value> {
        use RuntimeErrorKind::*;
        Ok(match op {
            BinOp::Add => Value::Int(
                l.as_int().checked_add(r.as_int()).ok_or(Halt::Error(IntegerOverflow))?,
            ),
            BinOp::Sub => Value::Int(
                l.as_int().checked_sub(r.as_int()).ok_or(Halt::Error(IntegerOverflow))?,
            ),
            BinOp::Mul => Value::Int(
                l.as_int().checked_mul(r.as_int()).ok_or(Halt::Error(IntegerOverflow))?,
            ),
            BinOp::Div => {
                let (a, b) = (l.as_int(), r.as_int());
                if b == 0 {
                    return Err(Halt::Error(DivisionByZero));
                }
                Value::Int(a.checked_div(b).ok_or(Halt::Error(IntegerOverflow))?)
            }
            BinOp::Rem => {
                let (a, b) = (l.as_int(), r.as_int());
                if b == 0 {
                    return Err(Halt::Error(RemainderByZero));
                }
                Value::Int(a.checked_rem(b).ok_or(Halt::Error(IntegerOverflow))?)
            }
            BinOp::Lt => Value::Bool(l.as_int() < r.as_int()),
            BinOp::Le => Value::Bool(l.as_int() <= r.as_int()),
            BinOp::Gt => Value::Bool(l.as_int() > r.as_int()),
            BinOp::Ge => Value::Bool(l.as_int() >= r.as_int()),
            BinOp::Eq => Value::Bool(l == r),
            BinOp::Ne => Value::Bool(l != r),
            BinOp::And | BinOp::Or => unreachable!("short-circuit handled in eval"),
        })
    }

    fn call(&mut self, name: &str, args: Vec<Value>) -> Exec<Value> {
        if self.call_depth >= self.config.max_call_depth {
            return Err(Halt::Error(RuntimeErrorKind::CallDepthExceeded));
        }
        let (_, function) = self
            .program
            .function_by_name(name)
            .expect("checked: called functions exist");
        let mut frame: Frame = function
            .params
            .iter()
            .zip(args)
            .map(|((pname, _), v)| (pname.clone(), v))
            .collect();
        self.call_depth += 1;
        let flow = self.exec_block(&function.body, &mut frame);
        self.call_depth -= 1;
        match flow? {
            Flow::Return(Some(v)) => Ok(v),
            Flow::Return(None) | Flow::Normal => {
                // The checker only lets calls reach functions with a declared
                // return type, so falling off the end is a runtime error.
                Err(Halt::Error(RuntimeErrorKind::MissingReturnValue))
            }
        }
    }
}
