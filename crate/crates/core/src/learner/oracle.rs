//! Reference dual solver for kernel classifiers: exhaustive pairwise
//! coordinate ascent with no working-set heuristics and no error cache,
//! recomputing gradients from the definitions. Verifies the production SMO
//! path and shares no code with it.
//!
//! For a pair (i, j), the feasible direction αᵢ ← αᵢ + yᵢ·t, αⱼ ← αⱼ − yⱼ·t
//! preserves Σ αy; the exact maximizing step is t* = slope / η with
//! slope = (yᵢ − f₀(i)) − (yⱼ − f₀(j)) and η = K(i,i) + K(j,j) − 2K(i,j),
//! clipped to both box constraints.

use super::svm::KernelKind;

pub struct ReferenceSolution {
    pub alphas: Vec<f64>,
    pub bias: f64,
}

impl ReferenceSolution {
    pub fn decision_value(
        &self,
        x: &[Vec<f64>],
        y: &[f64],
        kernel: KernelKind,
        point: &[f64],
    ) -> f64 {
        let mut f = self.bias;
        for i in 0..x.len() {
            if self.alphas[i] > 0.0 {
                f += self.alphas[i] * y[i] * kernel.apply(&x[i], point);
            }
        }
        f
    }
}

pub fn reference_dual_solve(
    x: &[Vec<f64>],
    y: &[f64],
    box_c: &[f64],
    kernel: KernelKind,
) -> ReferenceSolution {
    let n = x.len();
    let k: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| kernel.apply(&x[i], &x[j])).collect())
        .collect();
    let mut alphas = vec![0.0f64; n];

    // f₀(i) = Σⱼ αⱼyⱼK(i,j), recomputed from scratch on every use.
    let f0 = |alphas: &[f64], i: usize| -> f64 {
        (0..n).map(|j| alphas[j] * y[j] * k[i][j]).sum::<f64>()
    };

    for _sweep in 0..20_000 {
        let mut moved = 0.0f64;
        for i in 0..n {
            for j in i + 1..n {
                let eta = k[i][i] + k[j][j] - 2.0 * k[i][j];
                if eta <= 1e-12 {
                    continue;
                }
                let slope =
                    (y[i] - f0(&alphas, i)) - (y[j] - f0(&alphas, j));
                let mut t = slope / eta;
                let (lo_i, hi_i) = if y[i] > 0.0 {
                    (-alphas[i], box_c[i] - alphas[i])
                } else {
                    (alphas[i] - box_c[i], alphas[i])
                };
                let (lo_j, hi_j) = if y[j] > 0.0 {
                    (alphas[j] - box_c[j], alphas[j])
                } else {
                    (-alphas[j], box_c[j] - alphas[j])
                };
                t = t.clamp(lo_i.max(lo_j), hi_i.min(hi_j));
                if t.abs() < 1e-14 {
                    continue;
                }
                alphas[i] += y[i] * t;
                alphas[j] -= y[j] * t;
                moved += t.abs();
            }
        }
        if moved < 1e-12 {
            break;
        }
    }

    // Bias: average y − f₀ over margin vectors; with none, the midpoint of
    // the interval the bound KKT inequalities leave for b.
    let margin: Vec<usize> = (0..n)
        .filter(|&i| alphas[i] > 1e-9 && alphas[i] < box_c[i] - 1e-9)
        .collect();
    let bias = if !margin.is_empty() {
        margin.iter().map(|&i| y[i] - f0(&alphas, i)).sum::<f64>() / margin.len() as f64
    } else {
        let mut lo = f64::NEG_INFINITY;
        let mut hi = f64::INFINITY;
        for i in 0..n {
            let target = y[i] - f0(&alphas, i);
            let at_zero = alphas[i] <= 1e-9;
            let at_box = alphas[i] >= box_c[i] - 1e-9;
            match (at_zero, at_box, y[i] > 0.0) {
                (true, _, true) | (_, true, false) => lo = lo.max(target),
                (true, _, false) | (_, true, true) => hi = hi.min(target),
                _ => {}
            }
        }
        match (lo.is_finite(), hi.is_finite()) {
            (true, true) => (lo + hi) / 2.0,
            (true, false) => lo,
            (false, true) => hi,
            (false, false) => 0.0,
        }
    };

    ReferenceSolution { alphas, bias }
}
