//! Classical and quantum information-theoretic kernel.
//!
//! Finite probability distributions, multi-axis joint distributions,
//! density matrices over named tensor factors, and the entropic
//! functionals built on them. All entropies are in nats.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Mass / trace tolerance for distribution and state validation.
pub const MASS_TOL: f64 = 1e-12;
/// Hermiticity / trace tolerance for density matrices.
pub const HERM_TOL: f64 = 1e-10;
/// Eigenvalues below this floor contribute nothing to `-x ln x` terms.
pub const EIG_FLOOR: f64 = 1e-14;

/// `x ln x` with the continuity convention `0 ln 0 = 0`.
#[inline]
pub fn xlnx(x: f64) -> f64 {
    if x <= EIG_FLOOR {
        0.0
    } else {
        x * x.ln()
    }
}

/// A finite probability distribution.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProbVec {
    probs: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    labels: Option<Vec<String>>,
}

impl ProbVec {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidDistribution("empty vector".into()));
        }
        for &p in &probs {
            if !(p >= -MASS_TOL) {
                return Err(Error::InvalidDistribution(format!("negative entry {p}")));
            }
        }
        let mass: f64 = probs.iter().sum();
        if (mass - 1.0).abs() > MASS_TOL {
            return Err(Error::InvalidDistribution(format!("mass {mass} != 1")));
        }
        Ok(Self { probs: probs.iter().map(|&p| p.max(0.0)).collect(), labels: None })
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.probs.len() {
            return Err(Error::DimensionMismatch("label count != dimension".into()));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn uniform(n: usize) -> Self {
        Self { probs: vec![1.0 / n as f64; n], labels: None }
    }

    /// Point mass on state `k`.
    pub fn delta(n: usize, k: usize) -> Self {
        let mut probs = vec![0.0; n];
        probs[k] = 1.0;
        Self { probs, labels: None }
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }
}

/// Shannon entropy `-sum p ln p` in nats.
pub fn shannon_entropy(p: &ProbVec) -> f64 {
    -p.probs.iter().map(|&x| xlnx(x)).sum::<f64>()
}

/// Kullback-Leibler divergence `sum p ln(p/q)` in nats.
///
/// Returns `f64::INFINITY` when `p` puts mass outside the support of `q`;
/// that is a legitimate answer, not an error.
pub fn kl_divergence(p: &ProbVec, q: &ProbVec) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch(format!("{} vs {}", p.len(), q.len())));
    }
    let mut d = 0.0;
    for (&pi, &qi) in p.probs.iter().zip(&q.probs) {
        if pi <= EIG_FLOOR {
            continue;
        }
        if qi <= EIG_FLOOR {
            return Ok(f64::INFINITY);
        }
        d += pi * (pi / qi).ln();
    }
    Ok(d)
}

/// One named axis of a joint distribution.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Axis {
    pub name: String,
    pub size: usize,
}

impl Axis {
    pub fn new(name: impl Into<String>, size: usize) -> Self {
        Self { name: name.into(), size }
    }
}

/// A joint distribution over named discrete axes, stored row-major.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct JointDist {
    axes: Vec<Axis>,
    table: Vec<f64>,
}

impl JointDist {
    pub fn new(axes: Vec<Axis>, table: Vec<f64>) -> Result<Self> {
        let size: usize = axes.iter().map(|a| a.size).product();
        if table.len() != size {
            return Err(Error::DimensionMismatch(format!(
                "table length {} != axis product {}",
                table.len(),
                size
            )));
        }
        for &p in &table {
            if !(p >= -MASS_TOL) {
                return Err(Error::InvalidDistribution(format!("negative entry {p}")));
            }
        }
        let mass: f64 = table.iter().sum();
        if (mass - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidDistribution(format!("mass {mass} != 1")));
        }
        Ok(Self { axes, table: table.iter().map(|&p| p.max(0.0)).collect() })
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    fn axis_pos(&self, name: &str) -> Result<usize> {
        self.axes
            .iter()
            .position(|a| a.name == name)
            .ok_or_else(|| Error::UnknownAxis(name.into()))
    }

    fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1usize; self.axes.len()];
        for i in (0..self.axes.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * self.axes[i + 1].size;
        }
        strides
    }

    /// Decompose a flat index into per-axis indices.
    fn unravel(&self, mut flat: usize) -> Vec<usize> {
        let strides = self.strides();
        let mut idx = vec![0usize; self.axes.len()];
        for (i, &s) in strides.iter().enumerate() {
            idx[i] = flat / s;
            flat %= s;
        }
        idx
    }

    /// Marginal over the named axes, preserving their order in `self`.
    pub fn marginal(&self, keep: &[&str]) -> Result<JointDist> {
        let mut keep_pos: Vec<usize> = Vec::with_capacity(keep.len());
        for name in keep {
            let p = self.axis_pos(name)?;
            if keep_pos.contains(&p) {
                return Err(Error::AxisOverlap(format!("duplicate axis `{name}`")));
            }
            keep_pos.push(p);
        }
        keep_pos.sort_unstable();
        let out_axes: Vec<Axis> = keep_pos.iter().map(|&p| self.axes[p].clone()).collect();
        let out_size: usize = out_axes.iter().map(|a| a.size).product();
        let mut out = vec![0.0; out_size.max(1)];
        let mut out_strides = vec![1usize; keep_pos.len()];
        for i in (0..keep_pos.len().saturating_sub(1)).rev() {
            out_strides[i] = out_strides[i + 1] * out_axes[i + 1].size;
        }
        for (flat, &p) in self.table.iter().enumerate() {
            let idx = self.unravel(flat);
            let mut o = 0usize;
            for (k, &pos) in keep_pos.iter().enumerate() {
                o += idx[pos] * out_strides[k];
            }
            out[o] += p;
        }
        Ok(JointDist { axes: out_axes, table: out })
    }

    /// Entropy of the whole joint table, in nats.
    pub fn entropy(&self) -> f64 {
        -self.table.iter().map(|&x| xlnx(x)).sum::<f64>()
    }

    /// Entropy of the marginal over the named axes.
    pub fn marginal_entropy(&self, axes: &[&str]) -> Result<f64> {
        Ok(self.marginal(axes)?.entropy())
    }

    fn check_disjoint(a: &[&str], b: &[&str]) -> Result<()> {
        for x in a {
            if b.contains(x) {
                return Err(Error::AxisOverlap(format!("axis `{x}` in both sets")));
            }
        }
        Ok(())
    }

    /// Conditional entropy `H(target | given) = H(target, given) - H(given)`.
    pub fn cond_entropy(&self, target: &[&str], given: &[&str]) -> Result<f64> {
        Self::check_disjoint(target, given)?;
        let both: Vec<&str> = target.iter().chain(given.iter()).cloned().collect();
        let h_both = self.marginal_entropy(&both)?;
        let h_given = if given.is_empty() { 0.0 } else { self.marginal_entropy(given)? };
        Ok(h_both - h_given)
    }

    /// Mutual information `H(a) + H(b) - H(a, b)`.
    pub fn mutual_info(&self, a: &[&str], b: &[&str]) -> Result<f64> {
        Self::check_disjoint(a, b)?;
        let both: Vec<&str> = a.iter().chain(b.iter()).cloned().collect();
        Ok(self.marginal_entropy(a)? + self.marginal_entropy(b)? - self.marginal_entropy(&both)?)
    }
}

/// A column-stochastic transition matrix, entry `[y][x] = P(y|x)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TransitionMatrix {
    /// Row-major `rows x cols` matrix; column `x` is the distribution of the output.
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl TransitionMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "data length {} != {rows}x{cols}",
                data.len()
            )));
        }
        for &p in &data {
            if !(-MASS_TOL..=1.0 + MASS_TOL).contains(&p) {
                return Err(Error::NotStochastic(format!("entry {p} outside [0,1]")));
            }
        }
        for x in 0..cols {
            let s: f64 = (0..rows).map(|y| data[y * cols + x]).sum();
            if (s - 1.0).abs() > MASS_TOL {
                return Err(Error::NotStochastic(format!("column {x} sums to {s}")));
            }
        }
        Ok(Self { rows, cols, data })
    }

    pub fn identity(n: usize) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        Self { rows: n, cols: n, data }
    }

    /// Deterministic map `x -> f(x)` as a stochastic matrix.
    pub fn deterministic(rows: usize, cols: usize, f: impl Fn(usize) -> usize) -> Self {
        let mut data = vec![0.0; rows * cols];
        for x in 0..cols {
            data[f(x) * cols + x] = 1.0;
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, y: usize, x: usize) -> f64 {
        self.data[y * self.cols + x]
    }

    /// True iff rows also sum to one (within `MASS_TOL`).
    pub fn is_doubly_stochastic(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|y| {
                let s: f64 = (0..self.cols).map(|x| self.get(y, x)).sum();
                (s - 1.0).abs() <= MASS_TOL
            })
    }

    /// Apply to a distribution: `(Mv)(y) = sum_x P(y|x) v(x)`.
    pub fn apply(&self, v: &ProbVec) -> Result<ProbVec> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "vector length {} != cols {}",
                v.len(),
                self.cols
            )));
        }
        let mut out = vec![0.0; self.rows];
        for y in 0..self.rows {
            for x in 0..self.cols {
                out[y] += self.get(y, x) * v.probs()[x];
            }
        }
        ProbVec::new(out)
    }

    /// Matrix product `self * other`.
    pub fn compose(&self, other: &TransitionMatrix) -> Result<TransitionMatrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "cols {} != rows {}",
                self.cols, other.rows
            )));
        }
        let mut data = vec![0.0; self.rows * other.cols];
        for y in 0..self.rows {
            for x in 0..other.cols {
                let mut s = 0.0;
                for k in 0..self.cols {
                    s += self.get(y, k) * other.get(k, x);
                }
                data[y * other.cols + x] = s;
            }
        }
        TransitionMatrix::new(self.rows, other.cols, data)
    }
}

/// One named tensor factor of a density matrix.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Factor {
    pub name: String,
    pub dim: usize,
}

impl Factor {
    pub fn new(name: impl Into<String>, dim: usize) -> Self {
        Self { name: name.into(), dim }
    }
}

/// A density matrix over a tensor-factored index set.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    factors: Vec<Factor>,
    mat: DMatrix<Complex64>,
}

impl DensityMatrix {
    pub fn new(factors: Vec<Factor>, mat: DMatrix<Complex64>) -> Result<Self> {
        let dim: usize = factors.iter().map(|f| f.dim).product();
        if mat.nrows() != dim || mat.ncols() != dim {
            return Err(Error::DimensionMismatch(format!(
                "matrix {}x{} vs factor product {dim}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        let herm_dev = (&mat - mat.adjoint()).norm();
        if herm_dev > HERM_TOL {
            return Err(Error::NotHermitian(herm_dev));
        }
        let tr: Complex64 = mat.trace();
        if (tr.re - 1.0).abs() > HERM_TOL || tr.im.abs() > HERM_TOL {
            return Err(Error::InvalidDensityMatrix(format!("trace {tr} != 1")));
        }
        let min_eig = mat
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        if min_eig < -HERM_TOL {
            return Err(Error::InvalidDensityMatrix(format!("negative eigenvalue {min_eig}")));
        }
        Ok(Self { factors, mat })
    }

    /// State |psi><psi| from an amplitude vector over the given factors.
    pub fn from_pure(factors: Vec<Factor>, amps: &[Complex64]) -> Result<Self> {
        let dim: usize = factors.iter().map(|f| f.dim).product();
        if amps.len() != dim {
            return Err(Error::DimensionMismatch(format!(
                "amplitude length {} != {dim}",
                amps.len()
            )));
        }
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidDensityMatrix(format!("norm^2 {norm} != 1")));
        }
        let mut mat = DMatrix::zeros(dim, dim);
        for i in 0..dim {
            for j in 0..dim {
                mat[(i, j)] = amps[i] * amps[j].conj();
            }
        }
        Ok(Self { factors, mat })
    }

    /// Diagonal density matrix from a probability vector, single factor.
    pub fn from_probs(factor: Factor, p: &ProbVec) -> Result<Self> {
        if factor.dim != p.len() {
            return Err(Error::DimensionMismatch("factor dim != prob length".into()));
        }
        let mat = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            p.len(),
            p.probs().iter().map(|&x| Complex64::new(x, 0.0)),
        ));
        Self::new(vec![factor], mat)
    }

    /// Tensor product, concatenating factor lists.
    pub fn tensor(&self, other: &DensityMatrix) -> Result<DensityMatrix> {
        for f in &self.factors {
            if other.factors.iter().any(|g| g.name == f.name) {
                return Err(Error::AxisOverlap(format!("factor `{}` in both states", f.name)));
            }
        }
        let mat = self.mat.kronecker(&other.mat);
        let mut factors = self.factors.clone();
        factors.extend(other.factors.iter().cloned());
        Ok(DensityMatrix { factors, mat })
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.mat
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    fn factor_pos(&self, name: &str) -> Result<usize> {
        self.factors
            .iter()
            .position(|f| f.name == name)
            .ok_or_else(|| Error::UnknownAxis(name.into()))
    }

    fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1usize; self.factors.len()];
        for i in (0..self.factors.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * self.factors[i + 1].dim;
        }
        strides
    }

    fn unravel(&self, mut flat: usize) -> Vec<usize> {
        let strides = self.strides();
        let mut idx = vec![0usize; self.factors.len()];
        for (i, &s) in strides.iter().enumerate() {
            idx[i] = flat / s;
            flat %= s;
        }
        idx
    }

    /// Eigenvalues, clipped to `[0, inf)`.
    pub fn eigenvalues(&self) -> Vec<f64> {
        self.mat
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .map(|&v| v.max(0.0))
            .collect()
    }

    /// Von Neumann entropy in nats.
    pub fn vn_entropy(&self) -> f64 {
        -self.eigenvalues().iter().map(|&v| xlnx(v)).sum::<f64>()
    }

    /// Trace over every factor not in `keep`; result preserves factor order.
    pub fn partial_trace(&self, keep: &[&str]) -> Result<DensityMatrix> {
        let mut keep_pos: Vec<usize> = Vec::with_capacity(keep.len());
        for name in keep {
            let p = self.factor_pos(name)?;
            if keep_pos.contains(&p) {
                return Err(Error::AxisOverlap(format!("duplicate factor `{name}`")));
            }
            keep_pos.push(p);
        }
        keep_pos.sort_unstable();
        let out_factors: Vec<Factor> = keep_pos.iter().map(|&p| self.factors[p].clone()).collect();
        let out_dim: usize = out_factors.iter().map(|f| f.dim).product::<usize>().max(1);
        let trace_pos: Vec<usize> =
            (0..self.factors.len()).filter(|p| !keep_pos.contains(p)).collect();

        let mut out_strides = vec![1usize; keep_pos.len()];
        for i in (0..keep_pos.len().saturating_sub(1)).rev() {
            out_strides[i] = out_strides[i + 1] * out_factors[i + 1].dim;
        }

        let mut out = DMatrix::zeros(out_dim, out_dim);
        let n = self.dim();
        for i in 0..n {
            let ii = self.unravel(i);
            let oi: usize =
                keep_pos.iter().enumerate().map(|(k, &p)| ii[p] * out_strides[k]).sum();
            'cols: for j in 0..n {
                let jj = self.unravel(j);
                for &p in &trace_pos {
                    if ii[p] != jj[p] {
                        continue 'cols;
                    }
                }
                let oj: usize =
                    keep_pos.iter().enumerate().map(|(k, &p)| jj[p] * out_strides[k]).sum();
                out[(oi, oj)] += self.mat[(i, j)];
            }
        }
        Ok(DensityMatrix { factors: out_factors, mat: out })
    }

    /// `S(A|B) = S(AB) - S(B)` on the named factor sets.
    pub fn cond_entropy(&self, target: &[&str], given: &[&str]) -> Result<f64> {
        for t in target {
            if given.contains(t) {
                return Err(Error::AxisOverlap(format!("factor `{t}` in both sets")));
            }
        }
        let both: Vec<&str> = target.iter().chain(given.iter()).cloned().collect();
        let s_both = self.partial_trace(&both)?.vn_entropy();
        let s_given =
            if given.is_empty() { 0.0 } else { self.partial_trace(given)?.vn_entropy() };
        Ok(s_both - s_given)
    }

    /// `S(A:B) = S(A) + S(B) - S(AB)` on the named factor sets.
    pub fn mutual_info(&self, a: &[&str], b: &[&str]) -> Result<f64> {
        for x in a {
            if b.contains(x) {
                return Err(Error::AxisOverlap(format!("factor `{x}` in both sets")));
            }
        }
        let both: Vec<&str> = a.iter().chain(b.iter()).cloned().collect();
        Ok(self.partial_trace(a)?.vn_entropy() + self.partial_trace(b)?.vn_entropy()
            - self.partial_trace(&both)?.vn_entropy())
    }

    /// Zero the off-diagonal blocks of the named factor, making it classical.
    ///
    /// Returns the branch decomposition; branches with weight below
    /// `EIG_FLOOR` are kept with zero weight so indices stay aligned.
    pub fn classicalize(&self, axis: &str) -> Result<HybridState> {
        let pos = self.factor_pos(axis)?;
        let axis_dim = self.factors[pos].dim;
        let rest: Vec<&str> = self
            .factors
            .iter()
            .enumerate()
            .filter(|(p, _)| *p != pos)
            .map(|(_, f)| f.name.as_str())
            .collect();
        let rest_factors: Vec<Factor> =
            self.factors.iter().filter(|f| f.name != axis).cloned().collect();
        let rest_dim: usize = rest_factors.iter().map(|f| f.dim).product::<usize>().max(1);
        let _ = rest;

        let n = self.dim();
        let mut branches = Vec::with_capacity(axis_dim);
        for c in 0..axis_dim {
            // Collect the block where the classical factor equals c on both sides.
            let mut block = DMatrix::<Complex64>::zeros(rest_dim, rest_dim);
            let mut rest_strides = vec![1usize; rest_factors.len()];
            for i in (0..rest_factors.len().saturating_sub(1)).rev() {
                rest_strides[i] = rest_strides[i + 1] * rest_factors[i + 1].dim;
            }
            for i in 0..n {
                let ii = self.unravel(i);
                if ii[pos] != c {
                    continue;
                }
                let oi: usize = ii
                    .iter()
                    .enumerate()
                    .filter(|(p, _)| *p != pos)
                    .enumerate()
                    .map(|(k, (_, &v))| v * rest_strides[k])
                    .sum();
                for j in 0..n {
                    let jj = self.unravel(j);
                    if jj[pos] != c {
                        continue;
                    }
                    let oj: usize = jj
                        .iter()
                        .enumerate()
                        .filter(|(p, _)| *p != pos)
                        .enumerate()
                        .map(|(k, (_, &v))| v * rest_strides[k])
                        .sum();
                    block[(oi, oj)] = self.mat[(i, j)];
                }
            }
            let weight = block.trace().re.max(0.0);
            branches.push(Branch { value: c, weight, state_mat: block, factors: rest_factors.clone() });
        }
        Ok(HybridState { axis: Factor::new(axis, axis_dim), axis_pos: pos, branches })
    }
}

/// One classical branch of a [`HybridState`].
#[derive(Clone, Debug)]
pub struct Branch {
    pub value: usize,
    pub weight: f64,
    state_mat: DMatrix<Complex64>,
    factors: Vec<Factor>,
}

impl Branch {
    /// Normalized branch state; `None` for zero-weight branches.
    pub fn state(&self) -> Option<DensityMatrix> {
        if self.weight <= EIG_FLOOR {
            return None;
        }
        let mat = self.state_mat.map(|z| z / Complex64::new(self.weight, 0.0));
        Some(DensityMatrix { factors: self.factors.clone(), mat })
    }

    /// Entropy of the normalized branch state (0 for zero-weight branches).
    pub fn entropy(&self) -> f64 {
        match self.state() {
            Some(s) => s.vn_entropy(),
            None => 0.0,
        }
    }
}

/// Block-diagonal decomposition of a density matrix along one classical factor.
#[derive(Clone, Debug)]
pub struct HybridState {
    pub axis: Factor,
    axis_pos: usize,
    pub branches: Vec<Branch>,
}

impl HybridState {
    /// Branch weights as a distribution.
    pub fn weights(&self) -> Result<ProbVec> {
        ProbVec::new(self.branches.iter().map(|b| b.weight).collect())
    }

    /// Reassemble the block-diagonal density matrix (classicalized form).
    pub fn block_diagonal(&self) -> Result<DensityMatrix> {
        let rest_factors = &self.branches[0].factors;
        let mut factors: Vec<Factor> = Vec::with_capacity(rest_factors.len() + 1);
        for (p, f) in rest_factors.iter().enumerate() {
            if p == self.axis_pos {
                factors.push(self.axis.clone());
            }
            factors.push(f.clone());
        }
        if self.axis_pos == rest_factors.len() {
            factors.push(self.axis.clone());
        }
        let dim: usize = factors.iter().map(|f| f.dim).product();
        let mut mat = DMatrix::<Complex64>::zeros(dim, dim);

        let mut strides = vec![1usize; factors.len()];
        for i in (0..factors.len() - 1).rev() {
            strides[i] = strides[i + 1] * factors[i + 1].dim;
        }
        let rest_dim: usize = rest_factors.iter().map(|f| f.dim).product::<usize>().max(1);
        let mut rest_strides = vec![1usize; rest_factors.len()];
        for i in (0..rest_factors.len().saturating_sub(1)).rev() {
            rest_strides[i] = rest_strides[i + 1] * rest_factors[i + 1].dim;
        }
        let full_index = |c: usize, rest_flat: usize| -> usize {
            let mut out = 0usize;
            let mut rem = rest_flat;
            let mut k = 0usize;
            for (p, &s) in strides.iter().enumerate() {
                if p == self.axis_pos {
                    out += c * s;
                } else {
                    let v = rem / rest_strides[k];
                    rem %= rest_strides[k];
                    out += v * s;
                    k += 1;
                }
            }
            out
        };
        for b in &self.branches {
            for i in 0..rest_dim {
                for j in 0..rest_dim {
                    mat[(full_index(b.value, i), full_index(b.value, j))] = b.state_mat[(i, j)];
                }
            }
        }
        Ok(DensityMatrix { factors, mat })
    }

    /// `H(weights) + sum_c p(c) S(rho_c)`, the entropy of the block-diagonal form.
    pub fn entropy(&self) -> Result<f64> {
        let h = shannon_entropy(&self.weights()?);
        let avg: f64 = self.branches.iter().map(|b| b.weight * b.entropy()).sum();
        Ok(h + avg)
    }
}

/// Quantum relative entropy `Tr rho (ln rho - ln sigma)`.
///
/// Returns `f64::INFINITY` when the support of `rho` is not contained in the
/// support of `sigma`.
pub fn q_relative_entropy(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch(format!("{} vs {}", rho.dim(), sigma.dim())));
    }
    let support_tol = 1e-12;
    // Tr rho ln rho
    let tr_rho_ln_rho: f64 = rho.eigenvalues().iter().map(|&v| xlnx(v)).sum();

    // Tr rho ln sigma via sigma's eigenbasis; infinite if rho has weight on
    // sigma's kernel.
    let eig = sigma.mat.clone().symmetric_eigen();
    let mut tr_rho_ln_sigma = 0.0;
    for k in 0..sigma.dim() {
        let v = eig.eigenvectors.column(k);
        let w = (v.adjoint() * &rho.mat * v)[(0, 0)].re;
        let mu = eig.eigenvalues[k].max(0.0);
        if mu <= support_tol {
            if w > 1e-10 {
                return Ok(f64::INFINITY);
            }
            continue;
        }
        tr_rho_ln_sigma += w * mu.ln();
    }
    Ok(tr_rho_ln_rho - tr_rho_ln_sigma)
}

#[cfg(test)]
mod tests {
    use super::*;

    const LN2: f64 = std::f64::consts::LN_2;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn shannon_entropy_basics() {
        assert_eq!(shannon_entropy(&ProbVec::new(vec![1.0, 0.0]).unwrap()), 0.0);
        let h = shannon_entropy(&ProbVec::new(vec![0.5, 0.5]).unwrap());
        assert!((h - LN2).abs() < 1e-12);
        // Gibbs weights of a two-level system at beta = 1 for levels 0, 1.
        let h = shannon_entropy(&ProbVec::new(vec![0.7311, 0.2689]).unwrap());
        assert!((h - 0.5823).abs() < 1e-3, "{h}");
    }

    #[test]
    fn probvec_rejects_bad_input() {
        assert!(ProbVec::new(vec![0.5, -0.5, 1.0]).is_err());
        assert!(ProbVec::new(vec![0.5, 0.4]).is_err());
    }

    #[test]
    fn kl_divergence_cases() {
        let u = ProbVec::uniform(4);
        assert_eq!(kl_divergence(&u, &u).unwrap(), 0.0);
        let p = ProbVec::new(vec![1.0, 0.0]).unwrap();
        let q = ProbVec::uniform(2);
        assert!((kl_divergence(&p, &q).unwrap() - LN2).abs() < 1e-12);
        let r = ProbVec::new(vec![0.0, 1.0]).unwrap();
        assert!(kl_divergence(&p, &r).unwrap().is_infinite());
        assert!(kl_divergence(&p, &ProbVec::uniform(3)).is_err());
    }

    fn two_bit_joint(table: Vec<f64>) -> JointDist {
        JointDist::new(vec![Axis::new("a", 2), Axis::new("b", 2)], table).unwrap()
    }

    #[test]
    fn cond_entropy_and_mutual_info() {
        // independent uniform bits
        let j = two_bit_joint(vec![0.25; 4]);
        assert!((j.cond_entropy(&["a"], &["b"]).unwrap() - LN2).abs() < 1e-12);
        assert!(j.mutual_info(&["a"], &["b"]).unwrap().abs() < 1e-12);
        // perfectly copied bit
        let j = two_bit_joint(vec![0.5, 0.0, 0.0, 0.5]);
        assert!(j.cond_entropy(&["a"], &["b"]).unwrap().abs() < 1e-12);
        assert!((j.mutual_info(&["a"], &["b"]).unwrap() - LN2).abs() < 1e-12);
        assert!(j.cond_entropy(&["a"], &["a"]).is_err());
    }

    #[test]
    fn chain_rule_on_random_joints() {
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..50 {
            let raw: Vec<f64> = (0..12).map(|_| next() + 1e-6).collect();
            let mass: f64 = raw.iter().sum();
            let j = JointDist::new(
                vec![Axis::new("a", 3), Axis::new("b", 4)],
                raw.iter().map(|x| x / mass).collect(),
            )
            .unwrap();
            let lhs = j.entropy();
            let rhs = j.marginal_entropy(&["b"]).unwrap() + j.cond_entropy(&["a"], &["b"]).unwrap();
            assert!((lhs - rhs).abs() < 1e-10);
            assert!(j.cond_entropy(&["a"], &["b"]).unwrap() >= 0.0);
            assert!(j.mutual_info(&["a"], &["b"]).unwrap() >= -1e-12);
        }
    }

    #[test]
    fn vn_entropy_basics() {
        let pure = DensityMatrix::from_pure(
            vec![Factor::new("q", 2)],
            &[c(1.0, 0.0), c(0.0, 0.0)],
        )
        .unwrap();
        assert!(pure.vn_entropy().abs() < 1e-12);
        let mixed =
            DensityMatrix::from_probs(Factor::new("q", 2), &ProbVec::uniform(2)).unwrap();
        assert!((mixed.vn_entropy() - LN2).abs() < 1e-12);
        let thermal = DensityMatrix::from_probs(
            Factor::new("q", 2),
            &ProbVec::new(vec![0.7311, 0.2689]).unwrap(),
        )
        .unwrap();
        assert!((thermal.vn_entropy() - 0.5823).abs() < 1e-3);
    }

    #[test]
    fn density_matrix_rejects_bad_input() {
        let m = DMatrix::from_row_slice(2, 2, &[c(0.5, 0.0), c(0.3, 0.1), c(0.3, 0.3), c(0.5, 0.0)]);
        assert!(DensityMatrix::new(vec![Factor::new("q", 2)], m).is_err());
    }

    fn bell_state() -> DensityMatrix {
        let s = 1.0 / 2f64.sqrt();
        DensityMatrix::from_pure(
            vec![Factor::new("a", 2), Factor::new("b", 2)],
            &[c(s, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(s, 0.0)],
        )
        .unwrap()
    }

    #[test]
    fn partial_trace_cases() {
        // product state
        let a = DensityMatrix::from_probs(Factor::new("a", 2), &ProbVec::new(vec![0.3, 0.7]).unwrap())
            .unwrap();
        let b = DensityMatrix::from_probs(Factor::new("b", 3), &ProbVec::uniform(3)).unwrap();
        let ab = a.tensor(&b).unwrap();
        let back = ab.partial_trace(&["a"]).unwrap();
        assert!((back.matrix() - a.matrix()).norm() < 1e-12);
        // Bell state reduces to maximally mixed
        let half = bell_state().partial_trace(&["a"]).unwrap();
        assert!((half.vn_entropy() - LN2).abs() < 1e-12);
        // tracing all factors leaves the scalar 1
        let scalar = ab.partial_trace(&[]).unwrap();
        assert!((scalar.matrix()[(0, 0)].re - 1.0).abs() < 1e-12);
        assert!(ab.partial_trace(&["zz"]).is_err());
    }

    #[test]
    fn quantum_conditional_entropy_and_mutual_info() {
        let a = DensityMatrix::from_probs(Factor::new("a", 2), &ProbVec::new(vec![0.3, 0.7]).unwrap())
            .unwrap();
        let b = DensityMatrix::from_probs(Factor::new("b", 2), &ProbVec::uniform(2)).unwrap();
        let ab = a.tensor(&b).unwrap();
        let sa = a.vn_entropy();
        assert!((ab.cond_entropy(&["a"], &["b"]).unwrap() - sa).abs() < 1e-12);
        assert!(ab.mutual_info(&["a"], &["b"]).unwrap().abs() < 1e-12);
        // Bell state: negative conditional entropy
        let bell = bell_state();
        assert!((bell.cond_entropy(&["a"], &["b"]).unwrap() + LN2).abs() < 1e-12);
        assert!((bell.mutual_info(&["a"], &["b"]).unwrap() - 2.0 * LN2).abs() < 1e-12);
    }

    #[test]
    fn diagonal_state_matches_classical() {
        let table = vec![0.1, 0.2, 0.3, 0.4];
        let j = two_bit_joint(table.clone());
        let mut mat = DMatrix::<Complex64>::zeros(4, 4);
        for (k, &p) in table.iter().enumerate() {
            mat[(k, k)] = c(p, 0.0);
        }
        let rho =
            DensityMatrix::new(vec![Factor::new("a", 2), Factor::new("b", 2)], mat).unwrap();
        assert!(
            (rho.cond_entropy(&["a"], &["b"]).unwrap() - j.cond_entropy(&["a"], &["b"]).unwrap())
                .abs()
                < 1e-10
        );
        assert!(
            (rho.mutual_info(&["a"], &["b"]).unwrap() - j.mutual_info(&["a"], &["b"]).unwrap())
                .abs()
                < 1e-10
        );
    }

    #[test]
    fn relative_entropy_cases() {
        let a = DensityMatrix::from_probs(Factor::new("a", 2), &ProbVec::new(vec![0.3, 0.7]).unwrap())
            .unwrap();
        assert!(q_relative_entropy(&a, &a).unwrap().abs() < 1e-12);
        let b = DensityMatrix::from_probs(Factor::new("a", 2), &ProbVec::new(vec![0.6, 0.4]).unwrap())
            .unwrap();
        let kl = kl_divergence(
            &ProbVec::new(vec![0.3, 0.7]).unwrap(),
            &ProbVec::new(vec![0.6, 0.4]).unwrap(),
        )
        .unwrap();
        assert!((q_relative_entropy(&a, &b).unwrap() - kl).abs() < 1e-12);
        // support failure
        let pure =
            DensityMatrix::from_pure(vec![Factor::new("a", 2)], &[c(1.0, 0.0), c(0.0, 0.0)])
                .unwrap();
        let other =
            DensityMatrix::from_pure(vec![Factor::new("a", 2)], &[c(0.0, 0.0), c(1.0, 0.0)])
                .unwrap();
        assert!(q_relative_entropy(&pure, &other).unwrap().is_infinite());
    }

    #[test]
    fn classicalize_plus_state() {
        let s = 1.0 / 2f64.sqrt();
        let plus =
            DensityMatrix::from_pure(vec![Factor::new("q", 2)], &[c(s, 0.0), c(s, 0.0)]).unwrap();
        let hybrid = plus.classicalize("q").unwrap();
        let w = hybrid.weights().unwrap();
        assert!((w.probs()[0] - 0.5).abs() < 1e-12);
        assert!((hybrid.entropy().unwrap() - LN2).abs() < 1e-12);
        let diag = hybrid.block_diagonal().unwrap();
        assert!((diag.vn_entropy() - LN2).abs() < 1e-12);
        // entropy decomposition agrees with the reassembled matrix
        assert!((diag.vn_entropy() - hybrid.entropy().unwrap()).abs() < 1e-12);
    }

    #[test]
    fn classicalize_block_diagonal_is_identity() {
        let a = DensityMatrix::from_probs(Factor::new("c", 2), &ProbVec::new(vec![0.3, 0.7]).unwrap())
            .unwrap();
        let b = DensityMatrix::from_probs(Factor::new("q", 2), &ProbVec::uniform(2)).unwrap();
        let ab = a.tensor(&b).unwrap();
        let reassembled = ab.classicalize("c").unwrap().block_diagonal().unwrap();
        assert!((reassembled.matrix() - ab.matrix()).norm() < 1e-12);
    }

    #[test]
    fn transition_matrix_validation() {
        assert!(TransitionMatrix::new(2, 2, vec![0.9, 0.2, 0.1, 0.8]).is_ok());
        assert!(TransitionMatrix::new(2, 2, vec![0.9, 0.2, 0.2, 0.8]).is_err());
        let m = TransitionMatrix::new(2, 2, vec![0.9, 0.1, 0.1, 0.9]).unwrap();
        assert!(m.is_doubly_stochastic());
        let m = TransitionMatrix::new(2, 2, vec![0.9, 0.5, 0.1, 0.5]).unwrap();
        assert!(!m.is_doubly_stochastic());
    }
}
