//! Markov chains, Bayes-inverted time reversal, and the trajectory-level
//! entropy-production functional with exact and Monte Carlo estimators.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::info::{Axis, JointDist, ProbVec, TransitionMatrix};

/// Exact-enumeration cap on the full trajectory space.
pub const ENUMERATION_LIMIT: usize = 1_000_000;

/// A finite-horizon Markov chain: initial law plus one kernel per step.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MarkovChainSpec {
    pub initial: ProbVec,
    pub steps: Vec<TransitionMatrix>,
}

impl MarkovChainSpec {
    pub fn new(initial: ProbVec, steps: Vec<TransitionMatrix>) -> Result<Self> {
        if steps.is_empty() {
            return Err(Error::Precondition("chain needs at least one step".into()));
        }
        let mut dim = initial.len();
        for (k, step) in steps.iter().enumerate() {
            if step.cols() != dim {
                return Err(Error::DimensionMismatch(format!(
                    "step {k} expects {} input states, previous stage has {dim}",
                    step.cols()
                )));
            }
            dim = step.rows();
        }
        Ok(Self { initial, steps })
    }

    /// Number of time slices, `horizon + 1`.
    pub fn n_times(&self) -> usize {
        self.steps.len() + 1
    }

    /// State-space dimension at time `k`.
    pub fn dim_at(&self, k: usize) -> usize {
        if k == 0 {
            self.initial.len()
        } else {
            self.steps[k - 1].rows()
        }
    }

    /// Marginal distribution at time `k` by iterated kernel application.
    pub fn marginal_at(&self, k: usize) -> Result<ProbVec> {
        let mut p = self.initial.clone();
        for step in &self.steps[..k] {
            p = step.apply(&p)?;
        }
        Ok(p)
    }

    /// Probability of a full trajectory `a_0 .. a_tau`.
    pub fn trajectory_prob(&self, values: &[usize]) -> Result<f64> {
        if values.len() != self.n_times() {
            return Err(Error::DimensionMismatch(format!(
                "trajectory length {} vs {} time slices",
                values.len(),
                self.n_times()
            )));
        }
        let mut w = self.initial.probs()[values[0]];
        for (k, step) in self.steps.iter().enumerate() {
            w *= step.get(values[k + 1], values[k]);
        }
        Ok(w)
    }

    /// Conditional path probability `P(a_1..a_tau | a_0)`.
    pub fn path_prob_given_start(&self, values: &[usize]) -> f64 {
        self.steps
            .iter()
            .enumerate()
            .map(|(k, step)| step.get(values[k + 1], values[k]))
            .product()
    }

    fn total_size(&self) -> usize {
        (0..self.n_times()).try_fold(1usize, |acc, k| acc.checked_mul(self.dim_at(k))).unwrap_or(usize::MAX)
    }
}

/// Joint distribution over all time slices, exact enumeration.
///
/// Axes are named `a0, a1, ..`; errors out above [`ENUMERATION_LIMIT`] states.
pub fn chain_joint(spec: &MarkovChainSpec) -> Result<JointDist> {
    let size = spec.total_size();
    if size > ENUMERATION_LIMIT {
        return Err(Error::StateSpaceOverflow { size, limit: ENUMERATION_LIMIT });
    }
    let axes: Vec<Axis> =
        (0..spec.n_times()).map(|k| Axis::new(format!("a{k}"), spec.dim_at(k))).collect();
    let mut table = vec![0.0; size];
    let mut values = vec![0usize; spec.n_times()];
    for (flat, slot) in table.iter_mut().enumerate() {
        let mut rem = flat;
        for k in (0..spec.n_times()).rev() {
            values[k] = rem % spec.dim_at(k);
            rem /= spec.dim_at(k);
        }
        *slot = spec.trajectory_prob(&values)?;
    }
    JointDist::new(axes, table)
}

/// A reversed column that had no forward support and was filled uniformly.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FlaggedColumn {
    /// Index of the reversed step (0 = the step leaving the reversed initial).
    pub step: usize,
    /// The conditioning state whose reversed column is undefined.
    pub state: usize,
}

/// Output of [`reverse_chain`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReversalResult {
    pub chain: MarkovChainSpec,
    /// Columns where Bayes inversion was undefined; filled with uniform.
    pub flagged: Vec<FlaggedColumn>,
}

/// Time reversal by Bayes inversion: the reversed chain starts from the
/// forward final marginal and runs kernels `P(a_k | a_{k+1}) =
/// P(a_{k+1}|a_k) P_k(a_k) / P_{k+1}(a_{k+1})`.
///
/// Columns conditioned on a zero-probability state are undefined; they are
/// filled with a uniform distribution and flagged, and downstream identity
/// checks skip trajectories that pass through them.
pub fn reverse_chain(spec: &MarkovChainSpec) -> Result<ReversalResult> {
    let tau = spec.steps.len();
    let marginals: Vec<ProbVec> =
        (0..=tau).map(|k| spec.marginal_at(k)).collect::<Result<_>>()?;
    let initial = marginals[tau].clone();
    let mut steps = Vec::with_capacity(tau);
    let mut flagged = Vec::new();
    // Reversed step r maps time tau-r to time tau-r-1 (forward labels).
    for r in 0..tau {
        let k = tau - 1 - r; // forward step index being inverted
        let fwd = &spec.steps[k];
        let rows = fwd.cols(); // reversed output = forward input space
        let cols = fwd.rows(); // reversed input = forward output space
        let mut data = vec![0.0; rows * cols];
        for to in 0..cols {
            let p_to = marginals[k + 1].probs()[to];
            if p_to <= 0.0 {
                flagged.push(FlaggedColumn { step: r, state: to });
                for from in 0..rows {
                    data[from * cols + to] = 1.0 / rows as f64;
                }
                continue;
            }
            for from in 0..rows {
                data[from * cols + to] = fwd.get(to, from) * marginals[k].probs()[from] / p_to;
            }
            // Renormalize away accumulated round-off.
            let s: f64 = (0..rows).map(|from| data[from * cols + to]).sum();
            for from in 0..rows {
                data[from * cols + to] /= s;
            }
        }
        steps.push(TransitionMatrix::new(rows, cols, data)?);
    }
    Ok(ReversalResult { chain: MarkovChainSpec::new(initial, steps)?, flagged })
}

/// Enumerates every positive-probability forward trajectory and verifies the
/// path-ratio identity `P(a_0) / P(a_tau) = P*(path|a_tau) / P(path|a_0)`.
/// Returns the maximum absolute error.
pub fn ratio_identity_check(spec: &MarkovChainSpec) -> Result<f64> {
    let rev = reverse_chain(spec)?;
    let p0 = spec.marginal_at(0)?;
    let ptau = spec.marginal_at(spec.steps.len())?;
    let mut max_err: f64 = 0.0;
    for_each_trajectory(spec, &mut |values, weight| {
        if weight <= 0.0 {
            return;
        }
        let lhs = p0.probs()[values[0]] / ptau.probs()[*values.last().unwrap()];
        let fwd_path = spec.path_prob_given_start(values);
        let mut rev_values: Vec<usize> = values.to_vec();
        rev_values.reverse();
        let rev_path = rev.chain.path_prob_given_start(&rev_values);
        max_err = max_err.max((lhs - rev_path / fwd_path).abs());
    })?;
    Ok(max_err)
}

/// Calls `f(values, weight)` for every trajectory in the enumerable space.
fn for_each_trajectory(
    spec: &MarkovChainSpec,
    f: &mut impl FnMut(&[usize], f64),
) -> Result<()> {
    let size = spec.total_size();
    if size > ENUMERATION_LIMIT {
        return Err(Error::StateSpaceOverflow { size, limit: ENUMERATION_LIMIT });
    }
    let n = spec.n_times();
    let mut values = vec![0usize; n];
    for flat in 0..size {
        let mut rem = flat;
        for k in (0..n).rev() {
            values[k] = rem % spec.dim_at(k);
            rem /= spec.dim_at(k);
        }
        let w = spec.trajectory_prob(&values)?;
        f(&values, w);
    }
    Ok(())
}

/// A Markov chain over a composite state `(th, x)` with a distinguished
/// hidden sub-axis `th` and observed sub-axis `x`.
///
/// The composite index is `a = th * dim_x + x` (hidden axis major), constant
/// across all time slices.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StructuredChainSpec {
    pub chain: MarkovChainSpec,
    pub dim_th: usize,
    pub dim_x: usize,
    /// Optional per-step notes on which sub-axes the step reads and writes.
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub step_io: Vec<StepIo>,
}

/// Which sub-axes a step reads and writes (documentation metadata).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StepIo {
    pub reads: Vec<String>,
    pub writes: Vec<String>,
}

impl StructuredChainSpec {
    pub fn new(chain: MarkovChainSpec, dim_th: usize, dim_x: usize) -> Result<Self> {
        let composite = dim_th * dim_x;
        for k in 0..chain.n_times() {
            if chain.dim_at(k) != composite {
                return Err(Error::DimensionMismatch(format!(
                    "time {k} has dim {}, sub-axes give {composite}",
                    chain.dim_at(k)
                )));
            }
        }
        Ok(Self { chain, dim_th, dim_x, step_io: Vec::new() })
    }

    #[inline]
    pub fn split(&self, a: usize) -> (usize, usize) {
        (a / self.dim_x, a % self.dim_x)
    }

    #[inline]
    pub fn join(&self, th: usize, x: usize) -> usize {
        th * self.dim_x + x
    }

    /// Conditional entropy `H(th|x)` of the marginal at time `k`, in nats.
    pub fn cond_entropy_at(&self, k: usize) -> Result<f64> {
        let p = self.chain.marginal_at(k)?;
        let joint = JointDist::new(
            vec![Axis::new("th", self.dim_th), Axis::new("x", self.dim_x)],
            p.probs().to_vec(),
        )?;
        joint.cond_entropy(&["th"], &["x"])
    }

    /// Probability of the observed path `x_0..x_tau` jointly, by a forward
    /// sweep over the hidden axis (the observed process alone need not be
    /// Markov).
    fn x_path_prob(chain: &MarkovChainSpec, dim_th: usize, dim_x: usize, xs: &[usize]) -> f64 {
        let mut v: Vec<f64> =
            (0..dim_th).map(|th| chain.initial.probs()[th * dim_x + xs[0]]).collect();
        for (k, step) in chain.steps.iter().enumerate() {
            let mut next = vec![0.0; dim_th];
            for (th_to, slot) in next.iter_mut().enumerate() {
                for th_from in 0..dim_th {
                    *slot += step.get(th_to * dim_x + xs[k + 1], th_from * dim_x + xs[k])
                        * v[th_from];
                }
            }
            v = next;
        }
        v.iter().sum()
    }
}

/// A single trajectory with its forward probability.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Trajectory {
    pub values: Vec<usize>,
    pub weight: f64,
}

/// The per-trajectory entropy-production functional: the log-ratio of the
/// reversed to forward joint path conditionals, corrected by the ratio of
/// forward to reversed observed-path conditionals.
///
/// Its forward average equals the change in `H(th|x)` between the endpoints.
pub fn sigma_hat(spec: &StructuredChainSpec, values: &[usize]) -> Result<f64> {
    let chain = &spec.chain;
    if values.len() != chain.n_times() {
        return Err(Error::DimensionMismatch(format!(
            "trajectory length {} vs {} time slices",
            values.len(),
            chain.n_times()
        )));
    }
    let w = chain.trajectory_prob(values)?;
    if w <= 0.0 {
        return Err(Error::ZeroProbabilityTrajectory);
    }
    let rev = reverse_chain(chain)?;
    let mut rev_values: Vec<usize> = values.to_vec();
    rev_values.reverse();

    let fwd_path = chain.path_prob_given_start(values);
    let rev_path = rev.chain.path_prob_given_start(&rev_values);

    let xs: Vec<usize> = values.iter().map(|&a| spec.split(a).1).collect();
    let mut rev_xs: Vec<usize> = xs.clone();
    rev_xs.reverse();

    let p_x0 = marginal_x(chain, spec, 0, xs[0])?;
    let p_xtau = marginal_x(chain, spec, chain.steps.len(), *xs.last().unwrap())?;
    let fwd_x_path =
        StructuredChainSpec::x_path_prob(chain, spec.dim_th, spec.dim_x, &xs) / p_x0;
    let rev_x_path =
        StructuredChainSpec::x_path_prob(&rev.chain, spec.dim_th, spec.dim_x, &rev_xs) / p_xtau;

    Ok((rev_path / fwd_path).ln() + (fwd_x_path / rev_x_path).ln())
}

fn marginal_x(
    chain: &MarkovChainSpec,
    spec: &StructuredChainSpec,
    k: usize,
    x: usize,
) -> Result<f64> {
    let p = chain.marginal_at(k)?;
    Ok((0..spec.dim_th).map(|th| p.probs()[spec.join(th, x)]).sum())
}

/// Estimation mode for [`estimate_sigma`].
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum SigmaMode {
    Exact,
    MonteCarlo { n_samples: usize, seed: u64 },
}

/// Entropy-production statistics over the forward trajectory ensemble.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SigmaHatReport {
    pub mean_sigma: f64,
    /// Reported as measured; the paper-level equality to 1 is conjectural and
    /// never asserted.
    pub mean_exp_neg_sigma: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub std_error: Option<f64>,
    pub n_samples: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub per_trajectory: Option<Vec<(Trajectory, f64)>>,
}

/// Kahan-compensated accumulator.
#[derive(Default)]
struct Kahan {
    sum: f64,
    comp: f64,
}

impl Kahan {
    fn add(&mut self, x: f64) {
        let y = x - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }
}

/// Estimates `<sigma_hat>` and `<exp(-sigma_hat)>` either by exact
/// enumeration (compensated summation over all positive-probability
/// trajectories) or by seeded Monte Carlo sampling of the forward chain.
pub fn estimate_sigma(
    spec: &StructuredChainSpec,
    mode: SigmaMode,
    keep_trajectories: bool,
) -> Result<SigmaHatReport> {
    match mode {
        SigmaMode::Exact => {
            let mut mean = Kahan::default();
            let mut mean_exp = Kahan::default();
            let mut per = if keep_trajectories { Some(Vec::new()) } else { None };
            let mut count = 0usize;
            let mut first_err: Option<Error> = None;
            for_each_trajectory(&spec.chain, &mut |values, weight| {
                if weight <= 0.0 || first_err.is_some() {
                    return;
                }
                match sigma_hat(spec, values) {
                    Ok(s) => {
                        mean.add(weight * s);
                        mean_exp.add(weight * (-s).exp());
                        count += 1;
                        if let Some(list) = per.as_mut() {
                            list.push((Trajectory { values: values.to_vec(), weight }, s));
                        }
                    }
                    Err(e) => first_err = Some(e),
                }
            })?;
            if let Some(e) = first_err {
                return Err(e);
            }
            Ok(SigmaHatReport {
                mean_sigma: mean.sum,
                mean_exp_neg_sigma: mean_exp.sum,
                std_error: None,
                n_samples: count,
                per_trajectory: per,
            })
        }
        SigmaMode::MonteCarlo { n_samples, seed } => {
            if n_samples == 0 {
                return Err(Error::Precondition("need at least one sample".into()));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut sum = Kahan::default();
            let mut sum_sq = Kahan::default();
            let mut sum_exp = Kahan::default();
            for _ in 0..n_samples {
                let values = sample_trajectory(&spec.chain, &mut rng);
                let s = sigma_hat(spec, &values)?;
                sum.add(s);
                sum_sq.add(s * s);
                sum_exp.add((-s).exp());
            }
            let n = n_samples as f64;
            let mean = sum.sum / n;
            let var = (sum_sq.sum / n - mean * mean).max(0.0);
            Ok(SigmaHatReport {
                mean_sigma: mean,
                mean_exp_neg_sigma: sum_exp.sum / n,
                std_error: Some((var / n).sqrt()),
                n_samples,
                per_trajectory: None,
            })
        }
    }
}

/// Draws one trajectory from the forward chain.
fn sample_trajectory(chain: &MarkovChainSpec, rng: &mut impl Rng) -> Vec<usize> {
    let mut values = Vec::with_capacity(chain.n_times());
    values.push(sample_index(chain.initial.probs(), rng));
    for step in &chain.steps {
        let from = *values.last().unwrap();
        let col: Vec<f64> = (0..step.rows()).map(|to| step.get(to, from)).collect();
        values.push(sample_index(&col, rng));
    }
    values
}

fn sample_index(probs: &[f64], rng: &mut impl Rng) -> usize {
    let mut u: f64 = rng.gen::<f64>();
    for (i, &p) in probs.iter().enumerate() {
        u -= p;
        if u <= 0.0 {
            return i;
        }
    }
    probs.len() - 1
}

// ---------------------------------------------------------------------------
// Random chain samplers for property sweeps
// ---------------------------------------------------------------------------

/// Random column-stochastic matrix with flat-Dirichlet columns.
pub fn random_stochastic(rows: usize, cols: usize, rng: &mut impl Rng) -> TransitionMatrix {
    let mut data = vec![0.0; rows * cols];
    for x in 0..cols {
        let raw: Vec<f64> =
            (0..rows).map(|_| -rng.gen_range(f64::EPSILON..1.0_f64).ln()).collect();
        let mass: f64 = raw.iter().sum();
        for (y, w) in raw.iter().enumerate() {
            data[y * cols + x] = w / mass;
        }
    }
    TransitionMatrix::new(rows, cols, data).expect("Dirichlet columns are stochastic")
}

/// Random doubly-stochastic matrix via Sinkhorn normalization of a positive
/// random matrix (100 iterations, tolerance 1e-12).
pub fn random_doubly_stochastic(n: usize, rng: &mut impl Rng) -> TransitionMatrix {
    let mut data: Vec<f64> = (0..n * n).map(|_| rng.gen_range(0.1..1.0)).collect();
    for _ in 0..100 {
        for y in 0..n {
            let s: f64 = data[y * n..(y + 1) * n].iter().sum();
            for x in 0..n {
                data[y * n + x] /= s;
            }
        }
        for x in 0..n {
            let s: f64 = (0..n).map(|y| data[y * n + x]).sum();
            for y in 0..n {
                data[y * n + x] /= s;
            }
        }
        let dev = (0..n)
            .map(|y| ((0..n).map(|x| data[y * n + x]).sum::<f64>() - 1.0).abs())
            .fold(0.0f64, f64::max);
        if dev < 1e-12 {
            break;
        }
    }
    TransitionMatrix::new(n, n, data).expect("Sinkhorn output is doubly stochastic")
}

/// Random flat-Dirichlet distribution.
pub fn random_distribution(n: usize, rng: &mut impl Rng) -> ProbVec {
    let raw: Vec<f64> = (0..n).map(|_| -rng.gen_range(f64::EPSILON..1.0_f64).ln()).collect();
    let mass: f64 = raw.iter().sum();
    ProbVec::new(raw.iter().map(|w| w / mass).collect()).expect("normalized")
}

/// Random member of the family whose hidden-axis dynamics are doubly
/// stochastic within each observed block and whose observed axis moves by a
/// permutation: steps of the form `(th, x) -> (D_x th, perm(x))`.
///
/// The forward average of [`sigma_hat`] is provably non-negative on this
/// family.
pub fn random_block_doubly_stochastic_chain(
    dim_th: usize,
    dim_x: usize,
    n_steps: usize,
    rng: &mut impl Rng,
) -> StructuredChainSpec {
    let composite = dim_th * dim_x;
    let initial = random_distribution(composite, rng);
    let mut steps = Vec::with_capacity(n_steps);
    for _ in 0..n_steps {
        // random permutation of the observed axis
        let mut perm: Vec<usize> = (0..dim_x).collect();
        for i in (1..dim_x).rev() {
            let j = rng.gen_range(0..=i);
            perm.swap(i, j);
        }
        let blocks: Vec<TransitionMatrix> =
            (0..dim_x).map(|_| random_doubly_stochastic(dim_th, rng)).collect();
        let mut data = vec![0.0; composite * composite];
        for x in 0..dim_x {
            for th_from in 0..dim_th {
                for th_to in 0..dim_th {
                    let from = th_from * dim_x + x;
                    let to = th_to * dim_x + perm[x];
                    data[to * composite + from] = blocks[x].get(th_to, th_from);
                }
            }
        }
        steps.push(TransitionMatrix::new(composite, composite, data).expect("stochastic"));
    }
    StructuredChainSpec::new(
        MarkovChainSpec::new(initial, steps).expect("consistent dims"),
        dim_th,
        dim_x,
    )
    .expect("consistent dims")
}
