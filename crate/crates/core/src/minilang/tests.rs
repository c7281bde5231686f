use super::*;

fn parse_ok(src: &str) -> Program {
    match parse(src) {
        Ok(p) => p,
        Err(d) => panic!("expected parse to succeed, got:\n{d}"),
    }
}

fn parse_err(src: &str) -> String {
    match parse(src) {
        Ok(_) => panic!("expected diagnostics"),
        Err(d) => d.to_string(),
    }
}

#[test]
fn straight_line_program() {
    let p = parse_ok("func main(a:int){ print(a); }");
    assert_eq!(p.functions.len(), 1);
    assert_eq!(p.statement_count(), 1);
    assert_eq!(p.predicate_count(), 0);
    assert!(predicate_sites(&p).is_empty());
}

#[test]
fn single_if_yields_one_predicate() {
    let p = parse_ok("func main(a:int){ if (a < 0) { print(0); } else { print(a); } }");
    assert_eq!(p.predicate_count(), 1);
    let info = p.predicate(PredicateId(0));
    assert_eq!(p.statement(info.statement).kind, StatementKind::If);
    assert_eq!(info.statement, StatementId(0));
}

#[test]
fn predicate_ids_follow_function_then_preorder() {
    // Two functions, each with one while and one if. Expected statement layout:
    //   f: s0 while, s1 if (inside), s2 print, s3 return
    //   main: s4 while, s5 if, s6 print
    let src = "\
func f(x:int): int {
  while (x > 0) {
    if (x > 10) {
      print(x);
    }
  }
  return x;
}
func main(a:int) {
  while (a > 0) {
    if (a > 5) {
      print(a);
    }
  }
}";
    let p = parse_ok(src);
    assert_eq!(p.predicate_count(), 4);
    let stmts: Vec<StatementId> =
        (0..4).map(|i| p.predicate(PredicateId(i)).statement).collect();
    assert_eq!(stmts, vec![StatementId(0), StatementId(1), StatementId(4), StatementId(5)]);
    assert_eq!(p.statement(StatementId(0)).kind, StatementKind::While);
    assert_eq!(p.statement(StatementId(1)).kind, StatementKind::If);
    assert_eq!(p.statement(StatementId(4)).kind, StatementKind::While);
    assert_eq!(p.statement(StatementId(5)).kind, StatementKind::If);
}

#[test]
fn if_inside_while_orders_while_first() {
    let p = parse_ok("func main(a:int){ while (a > 0) { if (a > 2) { print(a); } a = a - 1; } }");
    let sites = predicate_sites(&p);
    assert_eq!(sites.len(), 2);
    assert_eq!(p.statement(p.predicate(sites[0]).statement).kind, StatementKind::While);
    assert_eq!(p.statement(p.predicate(sites[1]).statement).kind, StatementKind::If);
}

#[test]
fn predicates_are_exactly_branch_statements() {
    let src = "\
func main(a:int) {
  var i: int = 0;
  while (i < a) {
    if (i % 2 == 0) { print(i); } else { i = i + 1; }
    i = i + 1;
  }
  print(i);
}";
    let p = parse_ok(src);
    for (sid, info) in p.statement_table.iter().enumerate() {
        let is_branch = matches!(info.kind, StatementKind::If | StatementKind::While);
        assert_eq!(info.predicate.is_some(), is_branch, "statement {sid}");
    }
    for pid in predicate_sites(&p) {
        let stmt = p.predicate(pid).statement;
        assert!(matches!(p.statement(stmt).kind, StatementKind::If | StatementKind::While));
        assert_eq!(p.statement(stmt).predicate, Some(pid));
    }
}

#[test]
fn parse_is_deterministic() {
    let src = "func main(a:int){ if (a < 0) { print(0); } else { print(a); } }";
    let p1 = parse_ok(src);
    let p2 = parse_ok(src);
    assert_eq!(p1.source_digest, p2.source_digest);
    assert_eq!(p1.statement_table, p2.statement_table);
    assert_eq!(p1.predicate_table, p2.predicate_table);
}

#[test]
fn trailing_comment_preserves_ids() {
    let src = "func main(a:int){ if (a < 0) { print(0); } else { print(a); } }";
    let with_comment = format!("{src}\n// trailing comment\n");
    let p1 = parse_ok(src);
    let p2 = parse_ok(&with_comment);
    assert_eq!(p1.statement_table.len(), p2.statement_table.len());
    for (a, b) in p1.statement_table.iter().zip(&p2.statement_table) {
        assert_eq!(a.kind, b.kind);
        assert_eq!(a.predicate, b.predicate);
    }
    assert_eq!(p1.predicate_table.len(), p2.predicate_table.len());
    // The digest is a content digest, so it does change.
    assert_ne!(p1.source_digest, p2.source_digest);
}

#[test]
fn diagnostics_carry_positions() {
    let msg = parse_err("func main(a:int){ print(b); }");
    assert!(msg.contains("undeclared variable `b`"), "{msg}");
    assert!(msg.starts_with("1:"), "{msg}");
}

#[test]
fn syntax_error_names_expected_tokens() {
    let msg = parse_err("func main(a:int){ if a < 0 { print(0); } }");
    assert!(msg.contains("expected `(`"), "{msg}");
}

#[test]
fn missing_main_rejected() {
    let msg = parse_err("func helper(a:int): int { return a; }");
    assert!(msg.contains("missing `main`"), "{msg}");
}

#[test]
fn duplicate_declaration_rejected() {
    let msg = parse_err("func main(a:int){ var x: int; var x: int; }");
    assert!(msg.contains("duplicate declaration of `x`"), "{msg}");
}

#[test]
fn use_before_declaration_rejected() {
    let msg = parse_err("func main(a:int){ x = 1; var x: int; }");
    assert!(msg.contains("undeclared variable `x`"), "{msg}");
}

#[test]
fn out_of_scope_use_rejected() {
    let msg = parse_err("func main(a:int){ if (a > 0) { var x: int = 1; } print(x); }");
    assert!(msg.contains("undeclared variable `x`"), "{msg}");
}

#[test]
fn type_mismatches_rejected() {
    let msg = parse_err("func main(a:int){ if (a) { print(a); } }");
    assert!(msg.contains("condition must be `bool`"), "{msg}");
    let msg = parse_err("func main(a:int){ var s: string = \"x\"; print(s + 1); }");
    assert!(msg.contains("requires `int` operands"), "{msg}");
    let msg = parse_err("func main(a:int){ var b: bool = a < \"s\"; }");
    assert!(msg.contains("requires `int` operands"), "{msg}");
}

#[test]
fn main_params_must_be_int() {
    let msg = parse_err("func main(s:string){ print(s); }");
    assert!(msg.contains("must be `int`"), "{msg}");
}

#[test]
fn condition_span_recovers_source_text() {
    let src = "func main(a:int){ if (a<5) { print(0); } else { print(a); } }";
    let p = parse_ok(src);
    let span = p.predicate(PredicateId(0)).cond_span;
    assert_eq!(&src[span.start..span.end], "a<5");
}

#[test]
fn expression_render_is_canonical() {
    let p = parse_ok("func main(a:int){ if (a<5 && (a+1)*2 > 0) { print(0); } }");
    let cond = match &p.functions[p.main.index()].body[0].kind {
        StmtKind::If { cond, .. } => cond.render(),
        _ => unreachable!(),
    };
    assert_eq!(cond, "a < 5 && (a + 1) * 2 > 0");
}

#[test]
fn fnv_digest_matches_reference_vectors() {
    // Published FNV-1a test vectors.
    assert_eq!(fnv1a64(b""), 0xcbf29ce484222325);
    assert_eq!(fnv1a64(b"a"), 0xaf63dc4c8601ec8c);
    assert_eq!(fnv1a64(b"foobar"), 0x85944171f73967e8);
}
