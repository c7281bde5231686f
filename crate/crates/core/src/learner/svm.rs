//! Kernel classifiers trained by sequential minimal optimization.
//!
//! The decision function is sign(Σᵢ αᵢyᵢK(xᵢ, x) + b) over standardized
//! features. Class imbalance is handled with per-class box constraints
//! inversely proportional to class size. Training is deterministic for a
//! fixed seed, and serialized models round-trip bit-exactly (numeric fields
//! are stored as decimal strings).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::minilang::PredicateId;
use crate::runtime::{NegationDecider, OccurrenceSelection};

/// Captured snapshots labeled NEGATE (`ns`) and DON'T-NEGATE (`dns`) for one
/// predicate, as featurized vectors.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TrainingSet {
    pub predicate: PredicateId,
    pub ns: Vec<Vec<i64>>,
    pub dns: Vec<Vec<i64>>,
}

impl TrainingSet {
    pub fn total(&self) -> usize {
        self.ns.len() + self.dns.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum KernelKind {
    RadialBasis {
        #[serde(with = "f64_str")]
        gamma: f64,
    },
    Linear,
}

impl KernelKind {
    pub fn apply(&self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            KernelKind::RadialBasis { gamma } => {
                let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
                (-gamma * d2).exp()
            }
            KernelKind::Linear => a.iter().zip(b).map(|(x, y)| x * y).sum(),
        }
    }
}

/// A trained negation decider. Immutable once trained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case")]
pub enum ClassifierModel {
    /// Always answers the same; the fallback when training data has one class.
    Constant { negate: bool },
    /// Memorizes an occurrence selection, ignoring program state. Exists to
    /// make plan-equivalent oracles expressible as patches.
    Lookup { selection: OccurrenceSelection },
    /// Kernel classifier.
    Svm(SvmModel),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub kernel: KernelKind,
    #[serde(with = "f64_str")]
    pub c: f64,
    /// Standardized support vectors.
    #[serde(with = "f64_mat_str")]
    pub support_vectors: Vec<Vec<f64>>,
    /// αᵢyᵢ for each support vector.
    #[serde(with = "f64_vec_str")]
    pub coefficients: Vec<f64>,
    #[serde(with = "f64_str")]
    pub bias: f64,
    /// Per-feature standardization: x ↦ (x − mean) / std.
    #[serde(with = "f64_vec_str")]
    pub feature_means: Vec<f64>,
    /// Constant features keep std 1.
    #[serde(with = "f64_vec_str")]
    pub feature_stds: Vec<f64>,
    pub training_seed: u64,
}

impl SvmModel {
    fn standardize(&self, raw: &[i64]) -> Vec<f64> {
        raw.iter()
            .zip(self.feature_means.iter().zip(&self.feature_stds))
            .map(|(&x, (m, s))| (x as f64 - m) / s)
            .collect()
    }

    /// Raw decision value, positive means NEGATE.
    pub fn decision_value(&self, raw: &[i64]) -> f64 {
        let x = self.standardize(raw);
        let mut f = self.bias;
        for (sv, coef) in self.support_vectors.iter().zip(&self.coefficients) {
            f += coef * self.kernel.apply(sv, &x);
        }
        f
    }
}

impl ClassifierModel {
    pub fn decide(&self, occurrence: u32, features: &[i64]) -> bool {
        match self {
            ClassifierModel::Constant { negate } => *negate,
            ClassifierModel::Lookup { selection } => selection.contains(occurrence),
            ClassifierModel::Svm(m) => m.decision_value(features) > 0.0,
        }
    }
}

impl NegationDecider for ClassifierModel {
    fn should_negate(&self, occurrence: u32, features: &[i64]) -> bool {
        self.decide(occurrence, features)
    }
}

/// Training hyperparameters. `gamma: None` selects 1/(d · Var(features)) on
/// the standardized matrix.
#[derive(Debug, Clone)]
pub struct TrainConfig {
    pub use_rbf: bool,
    pub c: f64,
    pub gamma: Option<f64>,
    /// KKT tolerance at convergence.
    pub tol: f64,
    pub seed: u64,
    /// Record the dual objective after every update (test instrumentation).
    pub track_objective: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            use_rbf: true,
            c: 1.0,
            gamma: None,
            tol: 1e-3,
            seed: 42,
            track_objective: false,
        }
    }
}

/// Train a classifier for one predicate's training set. One-class sets yield
/// the constant classifier for the present class.
pub fn train(ts: &TrainingSet, config: &TrainConfig) -> ClassifierModel {
    train_detailed(ts, config).model
}

/// Training output plus solver diagnostics (dual variables, labels, box
/// constraints, standardized features) for invariant checks.
pub struct TrainOutcome {
    pub model: ClassifierModel,
    /// Dual objective after each successful pair update (when tracked).
    pub objective_trace: Vec<f64>,
    pub alphas: Vec<f64>,
    pub labels: Vec<f64>,
    pub box_c: Vec<f64>,
    pub standardized: Vec<Vec<f64>>,
    pub bias: f64,
    pub kernel: Option<KernelKind>,
}

impl TrainOutcome {
    fn constant(negate: bool) -> Self {
        TrainOutcome {
            model: ClassifierModel::Constant { negate },
            objective_trace: Vec::new(),
            alphas: Vec::new(),
            labels: Vec::new(),
            box_c: Vec::new(),
            standardized: Vec::new(),
            bias: 0.0,
            kernel: None,
        }
    }
}

pub fn train_detailed(ts: &TrainingSet, config: &TrainConfig) -> TrainOutcome {
    if ts.ns.is_empty() {
        return TrainOutcome::constant(false);
    }
    if ts.dns.is_empty() {
        return TrainOutcome::constant(true);
    }

    let n = ts.total();
    let dim = ts.ns[0].len();
    let raw: Vec<&[i64]> =
        ts.ns.iter().map(Vec::as_slice).chain(ts.dns.iter().map(Vec::as_slice)).collect();
    let labels: Vec<f64> = std::iter::repeat_n(1.0, ts.ns.len())
        .chain(std::iter::repeat_n(-1.0, ts.dns.len()))
        .collect();

    // Standardize per dimension; constant dimensions keep scale 1.
    let mut means = vec![0.0; dim];
    let mut stds = vec![1.0; dim];
    for d in 0..dim {
        let mean = raw.iter().map(|x| x[d] as f64).sum::<f64>() / n as f64;
        let var = raw.iter().map(|x| (x[d] as f64 - mean).powi(2)).sum::<f64>() / n as f64;
        means[d] = mean;
        stds[d] = if var > 0.0 { var.sqrt() } else { 1.0 };
    }
    let x: Vec<Vec<f64>> = raw
        .iter()
        .map(|row| {
            row.iter()
                .enumerate()
                .map(|(d, &v)| (v as f64 - means[d]) / stds[d])
                .collect()
        })
        .collect();

    let gamma = config.gamma.unwrap_or_else(|| {
        let total_mean = x.iter().flatten().sum::<f64>() / (n * dim) as f64;
        let total_var =
            x.iter().flatten().map(|v| (v - total_mean).powi(2)).sum::<f64>() / (n * dim) as f64;
        if total_var > 0.0 { 1.0 / (dim as f64 * total_var) } else { 1.0 / dim as f64 }
    });
    let kernel = if config.use_rbf {
        KernelKind::RadialBasis { gamma }
    } else {
        KernelKind::Linear
    };

    // Per-class box constraints: C · n / (2 · n_class).
    let n_pos = ts.ns.len() as f64;
    let n_neg = ts.dns.len() as f64;
    let c_pos = config.c * n as f64 / (2.0 * n_pos);
    let c_neg = config.c * n as f64 / (2.0 * n_neg);
    let box_c: Vec<f64> =
        labels.iter().map(|&y| if y > 0.0 { c_pos } else { c_neg }).collect();

    let smo = Smo {
        x: &x,
        y: &labels,
        box_c: &box_c,
        kernel,
        tol: config.tol,
        seed: config.seed,
        track_objective: config.track_objective,
    };
    let solved = smo.solve();

    let mut support_vectors = Vec::new();
    let mut coefficients = Vec::new();
    for i in 0..n {
        if solved.alphas[i] > 1e-12 {
            support_vectors.push(x[i].clone());
            coefficients.push(solved.alphas[i] * labels[i]);
        }
    }

    TrainOutcome {
        model: ClassifierModel::Svm(SvmModel {
            kernel,
            c: config.c,
            support_vectors,
            coefficients,
            bias: solved.bias,
            feature_means: means,
            feature_stds: stds,
            training_seed: config.seed,
        }),
        objective_trace: solved.objective_trace,
        alphas: solved.alphas,
        labels,
        box_c,
        standardized: x,
        bias: solved.bias,
        kernel: Some(kernel),
    }
}

/// Internal SMO solver state over the standardized matrix.
struct Smo<'a> {
    x: &'a [Vec<f64>],
    y: &'a [f64],
    box_c: &'a [f64],
    kernel: KernelKind,
    tol: f64,
    seed: u64,
    track_objective: bool,
}

pub(crate) struct SmoSolution {
    pub alphas: Vec<f64>,
    pub bias: f64,
    pub objective_trace: Vec<f64>,
}

const ALPHA_EPS: f64 = 1e-12;

impl Smo<'_> {
    fn solve(&self) -> SmoSolution {
        let n = self.x.len();
        let k: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| self.kernel.apply(&self.x[i], &self.x[j])).collect())
            .collect();

        let mut st = SmoState {
            alphas: vec![0.0; n],
            bias: 0.0,
            errors: self.y.iter().map(|y| -y).collect(),
            objective_trace: Vec::new(),
        };
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);

        let mut examine_all = true;
        let mut changed = 0usize;
        let mut epochs = 0usize;
        // Platt's outer loop: alternate full sweeps with non-bound sweeps
        // until a full sweep changes nothing.
        while (changed > 0 || examine_all) && epochs < 10_000 {
            epochs += 1;
            changed = 0;
            for i2 in 0..n {
                if examine_all || self.non_bound(&st.alphas, i2) {
                    changed += usize::from(self.examine(i2, &k, &mut st, &mut rng));
                }
            }
            if examine_all {
                examine_all = false;
            } else if changed == 0 {
                examine_all = true;
            }
        }
        SmoSolution { alphas: st.alphas, bias: st.bias, objective_trace: st.objective_trace }
    }

    fn non_bound(&self, alphas: &[f64], i: usize) -> bool {
        alphas[i] > ALPHA_EPS && alphas[i] < self.box_c[i] - ALPHA_EPS
    }

    fn examine(
        &self,
        i2: usize,
        k: &[Vec<f64>],
        st: &mut SmoState,
        rng: &mut ChaCha8Rng,
    ) -> bool {
        let n = self.x.len();
        let y2 = self.y[i2];
        let a2 = st.alphas[i2];
        let e2 = st.errors[i2];
        let r2 = e2 * y2;
        let violates =
            (r2 < -self.tol && a2 < self.box_c[i2] - ALPHA_EPS) || (r2 > self.tol && a2 > ALPHA_EPS);
        if !violates {
            return false;
        }

        // Second-choice heuristic: largest |E1 − E2| among non-bound points.
        let non_bound: Vec<usize> = (0..n).filter(|&i| self.non_bound(&st.alphas, i)).collect();
        if non_bound.len() > 1 {
            let i1 = *non_bound
                .iter()
                .max_by(|&&a, &&b| {
                    let da = (st.errors[a] - e2).abs();
                    let db = (st.errors[b] - e2).abs();
                    da.partial_cmp(&db).expect("errors are finite").then(b.cmp(&a))
                })
                .expect("non-empty");
            if self.take_step(i1, i2, k, st) {
                return true;
            }
        }
        // Fall back to scanning non-bound points from a seeded start.
        if !non_bound.is_empty() {
            let start = rng.gen_range(0..non_bound.len());
            for off in 0..non_bound.len() {
                let i1 = non_bound[(start + off) % non_bound.len()];
                if self.take_step(i1, i2, k, st) {
                    return true;
                }
            }
        }
        // Finally scan everything.
        let start = rng.gen_range(0..n);
        for off in 0..n {
            let i1 = (start + off) % n;
            if self.take_step(i1, i2, k, st) {
                return true;
            }
        }
        false
    }

    fn take_step(&self, i1: usize, i2: usize, k: &[Vec<f64>], st: &mut SmoState) -> bool {
        if i1 == i2 {
            return false;
        }
        let (y1, y2) = (self.y[i1], self.y[i2]);
        let (a1, a2) = (st.alphas[i1], st.alphas[i2]);
        let (e1, e2) = (st.errors[i1], st.errors[i2]);
        let (c1, c2) = (self.box_c[i1], self.box_c[i2]);
        let s = y1 * y2;

        let (low, high) = if (y1 - y2).abs() > f64::EPSILON {
            ((a2 - a1).max(0.0), (c1 - a1 + a2).min(c2))
        } else {
            ((a1 + a2 - c1).max(0.0), (a1 + a2).min(c2))
        };
        if high - low < ALPHA_EPS {
            return false;
        }

        let (k11, k12, k22) = (k[i1][i1], k[i1][i2], k[i2][i2]);
        let eta = k11 + k22 - 2.0 * k12;
        let mut a2_new = if eta > ALPHA_EPS {
            (a2 + y2 * (e1 - e2) / eta).clamp(low, high)
        } else {
            // Degenerate curvature: evaluate the objective at both clip ends.
            let f1 = y1 * (e1 + st.bias) - a1 * k11 - s * a2 * k12;
            let f2 = y2 * (e2 + st.bias) - s * a1 * k12 - a2 * k22;
            let l1 = a1 + s * (a2 - low);
            let h1 = a1 + s * (a2 - high);
            let obj_low = l1 * f1 + low * f2 + 0.5 * l1 * l1 * k11 + 0.5 * low * low * k22
                + s * low * l1 * k12;
            let obj_high = h1 * f1 + high * f2 + 0.5 * h1 * h1 * k11 + 0.5 * high * high * k22
                + s * high * h1 * k12;
            if obj_low < obj_high - 1e-12 {
                low
            } else if obj_high < obj_low - 1e-12 {
                high
            } else {
                return false;
            }
        };
        if (a2_new - a2).abs() < ALPHA_EPS * (a2_new + a2 + ALPHA_EPS) {
            return false;
        }
        if a2_new < ALPHA_EPS {
            a2_new = 0.0;
        } else if a2_new > c2 - ALPHA_EPS {
            a2_new = c2;
        }
        let mut a1_new = a1 + s * (a2 - a2_new);
        if a1_new < ALPHA_EPS {
            a1_new = 0.0;
        } else if a1_new > c1 - ALPHA_EPS {
            a1_new = c1;
        }

        let b1 = st.bias - e1 - y1 * (a1_new - a1) * k11 - y2 * (a2_new - a2) * k12;
        let b2 = st.bias - e2 - y1 * (a1_new - a1) * k12 - y2 * (a2_new - a2) * k22;
        let bias_new = if a1_new > ALPHA_EPS && a1_new < c1 - ALPHA_EPS {
            b1
        } else if a2_new > ALPHA_EPS && a2_new < c2 - ALPHA_EPS {
            b2
        } else {
            (b1 + b2) / 2.0
        };

        let delta_b = bias_new - st.bias;
        let delta_1 = y1 * (a1_new - a1);
        let delta_2 = y2 * (a2_new - a2);
        for (i, err) in st.errors.iter_mut().enumerate() {
            *err += delta_1 * k[i1][i] + delta_2 * k[i2][i] + delta_b;
        }
        st.alphas[i1] = a1_new;
        st.alphas[i2] = a2_new;
        st.bias = bias_new;
        if self.track_objective {
            st.objective_trace.push(dual_objective(&st.alphas, self.y, k));
        }
        true
    }
}

struct SmoState {
    alphas: Vec<f64>,
    bias: f64,
    errors: Vec<f64>,
    objective_trace: Vec<f64>,
}

/// Dual objective W(α) = Σα − ½ ΣΣ αᵢαⱼyᵢyⱼK(i,j).
#[allow(clippy::needless_range_loop)]
pub(crate) fn dual_objective(alphas: &[f64], y: &[f64], k: &[Vec<f64>]) -> f64 {
    let n = alphas.len();
    let mut obj: f64 = alphas.iter().sum();
    for i in 0..n {
        if alphas[i] == 0.0 {
            continue;
        }
        for j in 0..n {
            obj -= 0.5 * alphas[i] * alphas[j] * y[i] * y[j] * k[i][j];
        }
    }
    obj
}

/// Serialize f64 as its shortest round-trip decimal string.
mod f64_str {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format!("{v:?}"))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        let text = String::deserialize(d)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

mod f64_vec_str {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        let texts = Vec::<String>::deserialize(d)?;
        texts.iter().map(|t| t.parse().map_err(serde::de::Error::custom)).collect()
    }
}

mod f64_mat_str {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[Vec<f64>], s: S) -> Result<S::Ok, S::Error> {
        v.iter()
            .map(|row| row.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>())
            .collect::<Vec<_>>()
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<f64>>, D::Error> {
        let rows = Vec::<Vec<String>>::deserialize(d)?;
        rows.iter()
            .map(|row| row.iter().map(|t| t.parse().map_err(serde::de::Error::custom)).collect())
            .collect()
    }
}
