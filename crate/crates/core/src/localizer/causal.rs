//! Per-statement causal-effect estimation.
//!
//! For statement s, ordinary least squares fits Y = α + τ·T + β·C over the
//! suite, where Y indicates failure, T indicates that the test covered s, and
//! C that it covered s's direct control predecessor; β adjusts away the
//! confounding the predecessor induces. τ is the causal-effect estimate. When
//! s has no control predecessor the model is Y = α + τ·T.
//!
//! Degenerate designs resolve conservatively: a constant T yields τ = 0 with
//! the degenerate flag; a constant C, or one collinear with {1, T}, is
//! dropped and the two-regressor model refitted.

use serde::Serialize;

use crate::graphs::Cdg;
use crate::minilang::{StatementId, Verdict};

/// Fitted model for one statement. `beta` is absent when the statement has no
/// control predecessor or when the confounder column was dropped.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CausalModelFit {
    pub statement: StatementId,
    pub alpha: f64,
    pub tau: f64,
    pub beta: Option<f64>,
    pub degenerate: bool,
}

/// Fit the causal model for `statement` from per-test statement coverage and
/// verdicts. The control predecessor is the statement's smallest non-self
/// parent in the static control dependence graph.
pub fn causal_effect(
    statement: StatementId,
    cdg: &Cdg,
    coverage: &[Vec<bool>],
    verdicts: &[Verdict],
) -> CausalModelFit {
    let n = verdicts.len();
    let y: Vec<f64> =
        verdicts.iter().map(|v| if *v == Verdict::Fail { 1.0 } else { 0.0 }).collect();
    let t: Vec<f64> =
        (0..n).map(|i| if coverage[i][statement.index()] { 1.0 } else { 0.0 }).collect();

    let parent = cdg.parents_of(statement).iter().copied().find(|&p| p != statement);
    let c: Option<Vec<f64>> = parent.map(|p| {
        (0..n).map(|i| if coverage[i][p.index()] { 1.0 } else { 0.0 }).collect()
    });

    if is_constant(&t) {
        // No variation in coverage: the effect is unidentifiable.
        let alpha = mean(&y);
        return CausalModelFit { statement, alpha, tau: 0.0, beta: None, degenerate: true };
    }

    let usable_confounder = c.as_ref().is_some_and(|c| !is_constant(c) && !in_span_of_t(c, &t));
    if usable_confounder {
        let c = c.expect("checked above");
        let (alpha, tau, beta) = fit_three(&t, &c, &y);
        CausalModelFit { statement, alpha, tau, beta: Some(beta), degenerate: false }
    } else {
        let (alpha, tau) = fit_two(&t, &y);
        CausalModelFit { statement, alpha, tau, beta: None, degenerate: false }
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn is_constant(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[0] == w[1])
}

/// For 0/1 columns, C lies in span{1, T} exactly when C is constant on the
/// T = 0 tests and constant on the T = 1 tests.
fn in_span_of_t(c: &[f64], t: &[f64]) -> bool {
    let mut on_zero: Option<f64> = None;
    let mut on_one: Option<f64> = None;
    for (&cv, &tv) in c.iter().zip(t) {
        let slot = if tv == 0.0 { &mut on_zero } else { &mut on_one };
        match slot {
            None => *slot = Some(cv),
            Some(prev) => {
                if *prev != cv {
                    return false;
                }
            }
        }
    }
    true
}

/// Least squares for Y = α + τ·T via the 2×2 normal equations.
fn fit_two(t: &[f64], y: &[f64]) -> (f64, f64) {
    let n = t.len() as f64;
    let st: f64 = t.iter().sum();
    let stt: f64 = t.iter().map(|v| v * v).sum();
    let sy: f64 = y.iter().sum();
    let sty: f64 = t.iter().zip(y).map(|(a, b)| a * b).sum();
    let det = n * stt - st * st;
    debug_assert!(det.abs() > 0.0, "caller ruled out constant T");
    let tau = (n * sty - st * sy) / det;
    let alpha = (sy - tau * st) / n;
    (alpha, tau)
}

/// Least squares for Y = α + τ·T + β·C via the 3×3 normal equations with
/// partial-pivot Gaussian elimination.
#[allow(clippy::needless_range_loop)]
fn fit_three(t: &[f64], c: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = t.len() as f64;
    let st: f64 = t.iter().sum();
    let sc: f64 = c.iter().sum();
    let stt: f64 = t.iter().map(|v| v * v).sum();
    let scc: f64 = c.iter().map(|v| v * v).sum();
    let stc: f64 = t.iter().zip(c).map(|(a, b)| a * b).sum();
    let sy: f64 = y.iter().sum();
    let sty: f64 = t.iter().zip(y).map(|(a, b)| a * b).sum();
    let scy: f64 = c.iter().zip(y).map(|(a, b)| a * b).sum();

    let mut m = [
        [n, st, sc, sy],
        [st, stt, stc, sty],
        [sc, stc, scc, scy],
    ];
    for col in 0..3 {
        let pivot = (col..3)
            .max_by(|&a, &b| {
                m[a][col].abs().partial_cmp(&m[b][col].abs()).expect("finite")
            })
            .expect("non-empty");
        m.swap(col, pivot);
        debug_assert!(m[col][col].abs() > 0.0, "caller ruled out rank deficiency");
        for row in col + 1..3 {
            let factor = m[row][col] / m[col][col];
            for k in col..4 {
                m[row][k] -= factor * m[col][k];
            }
        }
    }
    let mut sol = [0.0f64; 3];
    for row in (0..3).rev() {
        let mut acc = m[row][3];
        for k in row + 1..3 {
            acc -= m[row][k] * sol[k];
        }
        sol[row] = acc / m[row][row];
    }
    (sol[0], sol[1], sol[2])
}

/// Residual dot products against each regressor; all near zero on a correct
/// non-degenerate fit. Exposed for the orthogonality property tests.
pub fn residual_orthogonality(
    fit: &CausalModelFit,
    t: &[f64],
    c: Option<&[f64]>,
    y: &[f64],
) -> Vec<f64> {
    let residual: Vec<f64> = (0..y.len())
        .map(|i| {
            let mut pred = fit.alpha + fit.tau * t[i];
            if let (Some(beta), Some(c)) = (fit.beta, c) {
                pred += beta * c[i];
            }
            y[i] - pred
        })
        .collect();
    let mut dots = vec![residual.iter().sum::<f64>()];
    dots.push(residual.iter().zip(t).map(|(r, v)| r * v).sum());
    if let (Some(_), Some(c)) = (fit.beta, c) {
        dots.push(residual.iter().zip(c).map(|(r, v)| r * v).sum());
    }
    dots
}
