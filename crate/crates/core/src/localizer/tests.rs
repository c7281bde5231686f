use super::*;
use crate::graphs::{Cdg, Chain};
use crate::minilang::{parse, PredicateId, Program, StatementId, TestCase, Verdict};
use crate::runtime::{run_baseline, CdEvent, ExecConfig};
use proptest::prelude::*;
use std::collections::BTreeMap;
use std::time::{Duration, Instant};

fn program(src: &str) -> Program {
    parse(src).expect("test program parses")
}

fn s(id: u32) -> StatementId {
    StatementId(id)
}

fn ev(timestamp: u64, parent: u32, child: u32) -> CdEvent {
    CdEvent { timestamp, parent: s(parent), child: s(child) }
}

fn suite(program: &Program, cases: Vec<TestCase>) -> crate::minilang::TestSuite {
    run_baseline(program, cases, &ExecConfig::default())
}

#[test]
fn single_edge_chain_coverage() {
    let chain = Chain::new(vec![s(0), s(1)]);
    let (covered, count) = chain_covered(&chain, &[ev(1, 0, 1)]);
    assert!(covered);
    assert_eq!(count, 1);
}

#[test]
fn order_violation_is_not_covered() {
    let chain = Chain::new(vec![s(0), s(1), s(2)]);
    // Edges out of order: (1,2) happens before (0,1).
    let (covered, count) = chain_covered(&chain, &[ev(1, 1, 2), ev(2, 0, 1)]);
    assert!(!covered);
    assert_eq!(count, 0);
}

#[test]
fn disjoint_match_counting() {
    let chain = Chain::new(vec![s(0), s(1)]);
    let events = [ev(1, 0, 1), ev(2, 0, 1), ev(3, 0, 1)];
    assert_eq!(chain_covered(&chain, &events), (true, 3));

    let chain2 = Chain::new(vec![s(0), s(1), s(2)]);
    let events2 = [ev(1, 0, 1), ev(2, 1, 2), ev(3, 0, 1)];
    assert_eq!(chain_covered(&chain2, &events2), (true, 1));
}

proptest! {
    // Greedy subsequence matching agrees with exhaustive time-instant search.
    #[test]
    fn greedy_equals_exhaustive(seed in 0u64..300) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let n_events = rng.gen_range(0..50);
        let events: Vec<CdEvent> = (0..n_events)
            .map(|i| ev(i as u64 + 1, rng.gen_range(0..4), rng.gen_range(0..4)))
            .collect();
        let len = rng.gen_range(1..=4usize);
        let nodes: Vec<StatementId> = (0..=len).map(|_| s(rng.gen_range(0..4))).collect();
        let chain = Chain::new(nodes);
        let greedy = chain_covered(&chain, &events).0;
        let exhaustive = oracle::exhaustive_chain_covered(&chain, &events);
        prop_assert_eq!(greedy, exhaustive);
    }
}

fn matrix_from(
    chains: Vec<Chain>,
    covered: Vec<Vec<bool>>,
    verdicts: Vec<Verdict>,
) -> ChainCoverageMatrix {
    let counts = covered
        .iter()
        .map(|row| row.iter().map(|c| u32::from(*c)).collect())
        .collect();
    ChainCoverageMatrix { chains, covered, counts, verdicts }
}

#[test]
fn ochiai_hand_cases() {
    use Verdict::{Fail, Pass};
    // 3 failing, 5 passing; chain covered by all failing, no passing → M = 1.
    let verdicts = vec![Fail, Fail, Fail, Pass, Pass, Pass, Pass, Pass];
    let all_failing = vec![true, true, true, false, false, false, false, false];
    // a_ef = 3, a_ep = 1 → 3 / sqrt(3 · 4).
    let one_passing = vec![true, true, true, true, false, false, false, false];
    // a_ef = 0 → defined as 0.
    let no_failing = vec![false, false, false, true, true, false, false, false];
    let m = matrix_from(
        vec![
            Chain::new(vec![s(0), s(1)]),
            Chain::new(vec![s(0), s(2)]),
            Chain::new(vec![s(0), s(3)]),
        ],
        vec![all_failing, one_passing, no_failing],
        verdicts,
    );
    let scores = ochiai(&m).unwrap();
    let by_chain: BTreeMap<&Chain, f64> = scores.iter().map(|cs| (&cs.chain, cs.m)).collect();
    assert!((by_chain[&Chain::new(vec![s(0), s(1)])] - 1.0).abs() < 1e-12);
    let expected = 3.0 / (3.0f64 * 4.0).sqrt();
    assert!((by_chain[&Chain::new(vec![s(0), s(2)])] - expected).abs() < 1e-12);
    assert!((expected - 0.866_025_403_784_438_6).abs() < 1e-12);
    assert_eq!(by_chain[&Chain::new(vec![s(0), s(3)])], 0.0);
}

#[test]
fn ochiai_requires_failing_tests() {
    let m = matrix_from(
        vec![Chain::new(vec![s(0), s(1)])],
        vec![vec![true]],
        vec![Verdict::Pass],
    );
    assert!(matches!(ochiai(&m), Err(LocalizeError::NoFailingTests)));
}

proptest! {
    // 0 ≤ M ≤ 1, and M = 1 exactly when all failing tests cover the chain and
    // no passing test does.
    #[test]
    fn ochiai_bounds(cov in proptest::collection::vec(any::<bool>(), 6),
                     fail_mask in proptest::collection::vec(any::<bool>(), 6)) {
        prop_assume!(fail_mask.iter().any(|f| *f));
        let verdicts: Vec<Verdict> = fail_mask
            .iter()
            .map(|f| if *f { Verdict::Fail } else { Verdict::Pass })
            .collect();
        let m = matrix_from(
            vec![Chain::new(vec![s(0), s(1)])],
            vec![cov.clone()],
            verdicts,
        );
        let scores = ochiai(&m).unwrap();
        let score = scores[0].m;
        prop_assert!((0.0..=1.0 + 1e-15).contains(&score));
        let a_ef = cov.iter().zip(&fail_mask).filter(|(c, f)| **c && **f).count();
        let a_ep = cov.iter().zip(&fail_mask).filter(|(c, f)| **c && !**f).count();
        let total_f = fail_mask.iter().filter(|f| **f).count();
        let perfect = a_ef == total_f && a_ep == 0;
        prop_assert_eq!(score >= 1.0 - 1e-12, perfect);
    }
}

#[test]
fn profile_straight_line_is_empty() {
    let p = program("func main(a:int){ print(a); }");
    let sweet = suite(&p, vec![TestCase::new(vec![1], "1\n")]);
    let m = profile_suite(&p, &sweet, 1, &LocalizeConfig::default()).unwrap();
    assert!(m.is_empty());
}

#[test]
fn profile_buggy_max_covers_disjoint_branch_chains() {
    // Always prints `a`; (1,2) takes the then-branch and fails, the other two
    // take the else-branch and pass.
    let p = program("func main(a:int, b:int){ if (a < b) { print(a); } else { print(a); } }");
    let sweet = suite(
        &p,
        vec![
            TestCase::new(vec![1, 2], "2\n"),
            TestCase::new(vec![2, 1], "2\n"),
            TestCase::new(vec![0, 0], "0\n"),
        ],
    );
    assert_eq!(sweet.verdicts, vec![Verdict::Fail, Verdict::Pass, Verdict::Pass]);
    let m = profile_suite(&p, &sweet, 1, &LocalizeConfig::default()).unwrap();
    let then_chain = Chain::new(vec![s(0), s(1)]);
    let else_chain = Chain::new(vec![s(0), s(2)]);
    let idx_then = m.chains.iter().position(|c| *c == then_chain).unwrap();
    let idx_else = m.chains.iter().position(|c| *c == else_chain).unwrap();
    assert_eq!(m.covered[idx_then], vec![true, false, false]);
    assert_eq!(m.covered[idx_else], vec![false, true, true]);
}

#[test]
fn localize_exits_at_length_one_with_perfect_chain() {
    let p = program("func main(a:int){ if (a < 0) { print(1); } else { print(2); } }");
    let sweet = suite(
        &p,
        vec![
            TestCase::new(vec![-1], "9\n"), // fails, covers the then-branch
            TestCase::new(vec![1], "2\n"),  // passes, covers the else-branch
        ],
    );
    let out = localize(&p, &sweet, &LocalizeConfig::default()).unwrap();
    assert_eq!(out.exit, LocalizeExit::PerfectScore);
    assert_eq!(out.length_reached, 1);
    assert!(out.scores.iter().any(|cs| cs.chain == Chain::new(vec![s(0), s(1)])));
    assert!(out.scores.iter().all(|cs| cs.m >= 1.0 - 1e-12));
}

#[test]
fn localize_needs_length_two_for_iteration_bug() {
    // Wrong only when the loop iterates at least twice, which only the
    // length-2 chain (guard, guard, body) expresses.
    let p = program(
        "func main(n:int){ var i: int = 0; var t: int = 0; while (i < n) { t = t + i; i = i + 1; } print(t); }",
    );
    let sweet = suite(
        &p,
        vec![
            TestCase::new(vec![0], "0\n"),
            TestCase::new(vec![1], "0\n"),
            TestCase::new(vec![2], "2\n"),
            TestCase::new(vec![3], "6\n"),
        ],
    );
    assert_eq!(
        sweet.verdicts,
        vec![Verdict::Pass, Verdict::Pass, Verdict::Fail, Verdict::Fail]
    );
    let out = localize(&p, &sweet, &LocalizeConfig::default()).unwrap();
    assert_eq!(out.exit, LocalizeExit::PerfectScore);
    assert_eq!(out.length_reached, 2);
    let guard = s(2);
    assert!(out
        .scores
        .iter()
        .any(|cs| cs.chain.nodes()[0] == guard && cs.chain.nodes()[1] == guard));
}

#[test]
fn localize_rejects_degenerate_inputs() {
    let p = program("func main(a:int){ print(a); }");
    let all_pass = suite(&p, vec![TestCase::new(vec![1], "1\n")]);
    assert!(matches!(
        localize(&p, &all_pass, &LocalizeConfig::default()),
        Err(LocalizeError::NoFailingTests)
    ));

    let failing = suite(&p, vec![TestCase::new(vec![1], "2\n")]);
    assert!(matches!(
        localize(&p, &failing, &LocalizeConfig::default()),
        Err(LocalizeError::NothingToLocalize)
    ));
}

#[test]
fn infeasible_cap_falls_back_to_last_completed_length() {
    // Nested loops: 5 walks at length 1, 7 at length 2, 9 at length 3.
    let p = program(
        "func main(n:int, m:int){
           var i: int = 0;
           while (i < n) {
             var j: int = 0;
             while (j < m) { j = j + 1; }
             i = i + 1;
           }
           print(i);
         }",
    );
    // Identical arguments with different expectations: every covered chain is
    // covered by both a failing and a passing run, so no score reaches 1.0.
    let sweet = suite(
        &p,
        vec![TestCase::new(vec![2, 1], "2\n"), TestCase::new(vec![2, 1], "nope\n")],
    );
    assert_eq!(sweet.verdicts, vec![Verdict::Pass, Verdict::Fail]);

    let mut config = LocalizeConfig::default();
    config.max_static_chains = 2; // trips enumeration immediately at length 1
    let err = localize(&p, &sweet, &config);
    assert!(matches!(err, Err(LocalizeError::InfeasibleAtFirstLength(_))));

    // A cap that only trips at length 3 falls back to the length-2 top-k.
    let mut config = LocalizeConfig::default();
    config.max_static_chains = 8;
    let out = localize(&p, &sweet, &config).unwrap();
    assert_eq!(out.length_reached, 2);
    assert!(matches!(out.exit, LocalizeExit::Infeasible { at_length: 3, .. }));
}

// ---- causal effect ----

/// The coincidental-correctness matrix: failing tests induce the chain
/// e1→e2→e_bug→e3→e4 with early exits, and some passing tests cover e_bug and
/// e_3. Statements 0..5 stand for e1, e2, e_bug, e3, e4.
fn coincidental_fixture() -> (Cdg, Vec<Vec<bool>>, Vec<Verdict>) {
    let cdg = Cdg::from_edges([(s(0), s(1)), (s(1), s(2)), (s(2), s(3)), (s(3), s(4))]);
    let rows: Vec<[u8; 5]> = vec![
        [1, 1, 1, 1, 1], // F: full chain
        [1, 1, 1, 0, 0], // F: fails before e3
        [1, 1, 1, 1, 0], // F: fails before e4
        [1, 1, 1, 0, 0], // P: coincidental on e_bug
        [1, 1, 1, 0, 0], // P: coincidental on e_bug
        [1, 1, 1, 1, 0], // P: coincidental on e_bug, e3
        [1, 1, 1, 1, 1], // P: coincidental on the whole chain
        [1, 1, 0, 0, 0], // P: covers only the prefix
    ];
    let coverage = rows
        .into_iter()
        .map(|r| r.into_iter().map(|v| v == 1).collect())
        .collect();
    let verdicts = vec![
        Verdict::Fail,
        Verdict::Fail,
        Verdict::Fail,
        Verdict::Pass,
        Verdict::Pass,
        Verdict::Pass,
        Verdict::Pass,
        Verdict::Pass,
    ];
    (cdg, coverage, verdicts)
}

#[test]
fn causal_ordering_on_coincidental_matrix() {
    let (cdg, coverage, verdicts) = coincidental_fixture();
    let bug = causal_effect(s(2), &cdg, &coverage, &verdicts);
    let e3 = causal_effect(s(3), &cdg, &coverage, &verdicts);
    let e4 = causal_effect(s(4), &cdg, &coverage, &verdicts);

    // Hand-solved least squares: 3/7, 1/6, 0.
    assert!((bug.tau - 3.0 / 7.0).abs() < 1e-9, "tau_bug = {}", bug.tau);
    assert!((e3.tau - 1.0 / 6.0).abs() < 1e-9, "tau_e3 = {}", e3.tau);
    assert!(e4.tau.abs() < 1e-9, "tau_e4 = {}", e4.tau);
    assert!(bug.tau > e3.tau && e3.tau > e4.tau);

    // e_bug's confounder (e2) is constant and dropped; e3 and e4 keep theirs.
    assert!(bug.beta.is_none());
    assert!(e3.beta.is_some());
    assert!(e4.beta.is_some());
    assert!(!bug.degenerate && !e3.degenerate && !e4.degenerate);
}

#[test]
fn perfect_fit_when_outcome_equals_coverage() {
    // Y ≡ T with a constant confounder: the confounder is dropped and the fit
    // is exact: τ = 1, α = 0.
    let cdg = Cdg::from_edges([(s(0), s(1))]);
    let coverage = vec![
        vec![true, true],
        vec![true, false],
        vec![true, true],
        vec![true, false],
    ];
    let verdicts = vec![Verdict::Fail, Verdict::Pass, Verdict::Fail, Verdict::Pass];
    let fit = causal_effect(s(1), &cdg, &coverage, &verdicts);
    assert!((fit.tau - 1.0).abs() < 1e-12);
    assert!(fit.alpha.abs() < 1e-12);
    assert!(fit.beta.is_none());
    assert!(!fit.degenerate);
}

#[test]
fn constant_coverage_is_degenerate() {
    let cdg = Cdg::from_edges([(s(0), s(1))]);
    let coverage = vec![vec![true, true]; 4];
    let verdicts = vec![Verdict::Fail, Verdict::Pass, Verdict::Pass, Verdict::Pass];
    let fit = causal_effect(s(1), &cdg, &coverage, &verdicts);
    assert_eq!(fit.tau, 0.0);
    assert!(fit.degenerate);
}

proptest! {
    // On non-degenerate fits the residual is orthogonal to every regressor.
    #[test]
    fn residuals_are_orthogonal(
        t_bits in proptest::collection::vec(any::<bool>(), 6..20),
        c_bits in proptest::collection::vec(any::<bool>(), 20),
        y_bits in proptest::collection::vec(any::<bool>(), 20),
    ) {
        let n = t_bits.len();
        let cdg = Cdg::from_edges([(s(0), s(1))]);
        let coverage: Vec<Vec<bool>> = (0..n)
            .map(|i| vec![c_bits[i], t_bits[i]])
            .collect();
        let verdicts: Vec<Verdict> = (0..n)
            .map(|i| if y_bits[i] { Verdict::Fail } else { Verdict::Pass })
            .collect();
        let fit = causal_effect(s(1), &cdg, &coverage, &verdicts);
        prop_assume!(!fit.degenerate);
        let t: Vec<f64> = (0..n).map(|i| f64::from(t_bits[i])).collect();
        let c: Vec<f64> = (0..n).map(|i| f64::from(c_bits[i])).collect();
        let y: Vec<f64> = (0..n).map(|i| f64::from(y_bits[i])).collect();
        let c_opt = fit.beta.map(|_| c.as_slice());
        for dot in residual_orthogonality(&fit, &t, c_opt, &y) {
            prop_assert!(dot.abs() < 1e-9, "residual dot = {dot}");
        }
    }
}

// ---- refine ----

fn fit(stmt: u32, tau: f64) -> (StatementId, CausalModelFit) {
    (s(stmt), CausalModelFit { statement: s(stmt), alpha: 0.0, tau, beta: None, degenerate: false })
}

fn score(nodes: &[u32], m: f64) -> ChainScore {
    ChainScore { chain: Chain::new(nodes.iter().map(|&n| s(n)).collect()), m }
}

#[test]
fn refine_selects_single_candidate() {
    let p = program("func main(a:int){ if (a < 0) { print(1); } else { print(2); } }");
    let fits: BTreeMap<_, _> = [fit(0, 0.9), fit(1, 0.1)].into_iter().collect();
    let out = refine(&p, &[score(&[0, 1], 1.0)], &fits);
    assert_eq!(out.top_chains.len(), 1);
    assert_eq!(out.pred_list, vec![(PredicateId(0), 0.9)]);
}

#[test]
fn refine_keeps_three_largest_by_max_tau() {
    let p = program(
        "func main(a:int){
           if (a > 0) { if (a > 1) { if (a > 2) { if (a > 3) { if (a > 4) { print(9); } } } } }
         }",
    );
    let fits: BTreeMap<_, _> =
        [fit(0, 0.1), fit(1, 0.5), fit(2, 0.3), fit(3, 0.9), fit(4, 0.7)].into_iter().collect();
    let chains =
        vec![score(&[0, 1], 0.5), score(&[1, 2], 0.5), score(&[2, 3], 0.5), score(&[3, 4], 0.5)];
    let out = refine(&p, &chains, &fits);
    assert_eq!(out.top_chains.len(), 3);
    // Max taus: (0,1)→0.5, (1,2)→0.5, (2,3)→0.9, (3,4)→0.9: the 0.1 chain is
    // out only if it ranks below the top three — chains (2,3) and (3,4) lead.
    let max_taus: Vec<f64> = out
        .top_chains
        .iter()
        .map(|cs| cs.chain.nodes().iter().map(|n| fits[n].tau).fold(f64::MIN, f64::max))
        .collect();
    assert!(max_taus[0] >= max_taus[1] && max_taus[1] >= max_taus[2]);
    assert_eq!(max_taus[0], 0.9);
}

#[test]
fn refine_breaks_tau_ties_by_score() {
    let p = program(
        "func main(a:int){ if (a > 0) { if (a > 1) { print(1); } } if (a > 2) { if (a > 3) { print(2); } } }",
    );
    let fits: BTreeMap<_, _> =
        [fit(0, 0.5), fit(1, 0.5), fit(3, 0.5), fit(4, 0.5)].into_iter().collect();
    let low_m = score(&[0, 1], 0.3);
    let high_m = score(&[3, 4], 0.8);
    let out = refine(&p, &[low_m, high_m.clone()], &fits);
    assert_eq!(out.top_chains[0], high_m);
}

#[test]
fn refine_output_is_bounded_subset() {
    let p = program("func main(a:int){ if (a > 0) { print(1); } }");
    let fits: BTreeMap<_, _> = [fit(0, 0.2), fit(1, 0.1)].into_iter().collect();
    let input = vec![score(&[0, 1], 0.9), score(&[0, 0], 0.2)];
    let out = refine(&p, &input, &fits);
    assert!(out.top_chains.len() <= 3);
    for c in &out.top_chains {
        assert!(input.contains(c));
    }
}

#[test]
fn profiling_budget_error_shape() {
    // A zero budget reports infeasibility for that length.
    let p = program("func main(a:int){ if (a > 0) { print(1); } else { print(2); } }");
    let sweet = suite(&p, vec![TestCase::new(vec![1], "1\n"), TestCase::new(vec![-1], "x\n")]);
    let traces = record_traces(&p, &sweet, &ExecConfig::default());
    let cdg = crate::graphs::build_cdg(&p).unwrap();
    let chains = crate::graphs::enumerate_chains(&cdg, 1, 1000).unwrap();
    let started = Instant::now() - Duration::from_secs(5);
    let err = profile_traces(chains, &traces, 1, Duration::from_secs(1), started);
    assert!(matches!(err, Err(LocalizeError::ProfilingInfeasible { length: 1, .. })));
}
