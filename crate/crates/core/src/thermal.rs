//! Thermal-state toolkit: Gibbs states, free energies, capping functionals,
//! and the conditional-entropy growth bound for bipartite feedback dynamics.
//!
//! Conventions: energies are dimensionless, temperatures satisfy `T = 1/beta`,
//! and all entropies are in nats.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::info::{xlnx, DensityMatrix, Factor, HERM_TOL};

/// A Hamiltonian with its eigendecomposition cached.
#[derive(Clone, Debug)]
pub struct Hamiltonian {
    mat: DMatrix<Complex64>,
    /// Real spectrum, same order as the eigenvector columns.
    eigenvalues: Vec<f64>,
    eigenvectors: DMatrix<Complex64>,
    ground_energy: f64,
}

impl Hamiltonian {
    pub fn new(mat: DMatrix<Complex64>) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::DimensionMismatch("Hamiltonian must be square".into()));
        }
        let herm_dev = (&mat - mat.adjoint()).norm();
        if herm_dev > HERM_TOL {
            return Err(Error::NotHermitian(herm_dev));
        }
        let eig = mat.clone().symmetric_eigen();
        let eigenvalues: Vec<f64> = eig.eigenvalues.iter().cloned().collect();
        let ground_energy = eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
        Ok(Self { mat, eigenvalues, eigenvectors: eig.eigenvectors, ground_energy })
    }

    /// Diagonal Hamiltonian from real level energies.
    pub fn diagonal(levels: &[f64]) -> Self {
        let mat = DMatrix::from_diagonal(&DVector::from_iterator(
            levels.len(),
            levels.iter().map(|&e| Complex64::new(e, 0.0)),
        ));
        Self::new(mat).expect("diagonal real matrix is Hermitian")
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.mat
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn ground_energy(&self) -> f64 {
        self.ground_energy
    }

    /// `<H>_rho = Tr(H rho)`.
    pub fn expectation(&self, rho: &DensityMatrix) -> Result<f64> {
        if rho.dim() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "state dim {} vs Hamiltonian dim {}",
                rho.dim(),
                self.dim()
            )));
        }
        Ok((&self.mat * rho.matrix()).trace().re)
    }

    /// `I tensor self`, lifting onto a joint space with `left_dim` ahead of it.
    pub fn lift_right(&self, left_dim: usize) -> Hamiltonian {
        let id = DMatrix::<Complex64>::identity(left_dim, left_dim);
        Hamiltonian::new(id.kronecker(&self.mat)).expect("kron of Hermitian is Hermitian")
    }

    /// `self tensor I`, lifting onto a joint space with `right_dim` after it.
    pub fn lift_left(&self, right_dim: usize) -> Hamiltonian {
        let id = DMatrix::<Complex64>::identity(right_dim, right_dim);
        Hamiltonian::new(self.mat.kronecker(&id)).expect("kron of Hermitian is Hermitian")
    }

    /// Sum of two Hamiltonians on the same space.
    pub fn add(&self, other: &Hamiltonian) -> Result<Hamiltonian> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch("Hamiltonian sum dims differ".into()));
        }
        Hamiltonian::new(&self.mat + &other.mat)
    }

    /// Spectral norm (largest |eigenvalue|).
    pub fn spectral_norm(&self) -> f64 {
        self.eigenvalues.iter().map(|e| e.abs()).fold(0.0, f64::max)
    }
}

/// Inverse temperature; `T = 1/beta`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ThermalParams {
    pub beta: f64,
}

impl ThermalParams {
    pub fn new(beta: f64) -> Result<Self> {
        if !(beta > 0.0) {
            return Err(Error::OutOfRange(format!("beta must be positive, got {beta}")));
        }
        Ok(Self { beta })
    }

    pub fn temperature(&self) -> f64 {
        1.0 / self.beta
    }
}

/// Boltzmann weights of `h` at inverse temperature `beta`, computed with the
/// spectrum shifted by the ground energy for stability at large `beta`.
fn gibbs_probs(h: &Hamiltonian, t: ThermalParams) -> Vec<f64> {
    let e0 = h.ground_energy();
    let weights: Vec<f64> =
        h.eigenvalues().iter().map(|&e| (-t.beta * (e - e0)).exp()).collect();
    let z: f64 = weights.iter().sum();
    weights.iter().map(|&w| w / z).collect()
}

/// `Z = Tr e^{-beta H}`.
pub fn partition_function(h: &Hamiltonian, t: ThermalParams) -> f64 {
    h.eigenvalues().iter().map(|&e| (-t.beta * e).exp()).sum()
}

/// Gibbs state `e^{-beta H} / Z` as a density matrix with the given factor name.
pub fn gibbs_state_named(h: &Hamiltonian, t: ThermalParams, name: &str) -> DensityMatrix {
    let probs = gibbs_probs(h, t);
    let diag = DMatrix::from_diagonal(&DVector::from_iterator(
        probs.len(),
        probs.iter().map(|&p| Complex64::new(p, 0.0)),
    ));
    let mat = &h.eigenvectors * diag * h.eigenvectors.adjoint();
    // Symmetrize away eigensolver round-off before validation.
    let mat = (mat.clone() + mat.adjoint()).map(|z| z / Complex64::new(2.0, 0.0));
    DensityMatrix::new(vec![Factor::new(name, h.dim())], mat)
        .expect("Gibbs construction yields a valid state")
}

/// Gibbs state with the default factor name `sys`.
pub fn gibbs_state(h: &Hamiltonian, t: ThermalParams) -> DensityMatrix {
    gibbs_state_named(h, t, "sys")
}

/// Entropy of the Gibbs state, in nats.
pub fn thermal_entropy(h: &Hamiltonian, t: ThermalParams) -> f64 {
    -gibbs_probs(h, t).iter().map(|&p| xlnx(p)).sum::<f64>()
}

/// Equilibrium free energy `-T ln Z`, evaluated stably as
/// `E0 - T ln sum_j e^{-beta (E_j - E0)}`.
pub fn free_energy(h: &Hamiltonian, t: ThermalParams) -> f64 {
    let e0 = h.ground_energy();
    let s: f64 = h.eigenvalues().iter().map(|&e| (-t.beta * (e - e0)).exp()).sum();
    e0 - t.temperature() * s.ln()
}

/// Mean energy of the Gibbs state.
pub fn thermal_energy(h: &Hamiltonian, t: ThermalParams) -> f64 {
    gibbs_probs(h, t).iter().zip(h.eigenvalues()).map(|(&p, &e)| p * e).sum()
}

/// Energy variance `<(H - <H>)^2>` in the Gibbs state.
pub fn thermal_energy_variance(h: &Hamiltonian, t: ThermalParams) -> f64 {
    let probs = gibbs_probs(h, t);
    let mean: f64 = probs.iter().zip(h.eigenvalues()).map(|(&p, &e)| p * e).sum();
    probs.iter().zip(h.eigenvalues()).map(|(&p, &e)| p * (e - mean) * (e - mean)).sum()
}

/// Entropy capping functional `s_cap(H, rho) = beta (<H>_rho - F(H))`.
///
/// Reduces to the thermal entropy at `rho = gibbs_state(H)` and dominates
/// `S(rho)` everywhere else.
pub fn s_cap(h: &Hamiltonian, t: ThermalParams, rho: &DensityMatrix) -> Result<f64> {
    Ok(t.beta * (h.expectation(rho)? - free_energy(h, t)))
}

/// Free-energy capping functional `f_cap(H, rho) = <H>_rho - T S(rho)`.
///
/// Reduces to the equilibrium free energy at the Gibbs state and dominates
/// it everywhere else.
pub fn f_cap(h: &Hamiltonian, t: ThermalParams, rho: &DensityMatrix) -> Result<f64> {
    Ok(h.expectation(rho)? - t.temperature() * rho.vn_entropy())
}

/// One grid point of [`check_energy_entropy_monotone`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MonotoneEntry {
    pub beta: f64,
    pub variance: f64,
    /// `-dS/(beta dbeta)` by central difference; should equal `variance`.
    pub entropy_rate: f64,
    /// `-d<H>/dbeta` by central difference; should equal `variance`.
    pub energy_rate: f64,
    /// `dF/dbeta` by central difference; should equal `S/beta^2`.
    pub free_energy_rate: f64,
    pub free_energy_rate_expected: f64,
}

/// Report from [`check_energy_entropy_monotone`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MonotoneReport {
    pub entries: Vec<MonotoneEntry>,
    pub max_deviation: f64,
    pub ok: bool,
}

/// Verifies the derivative identities
/// `-dS/(beta dbeta) = -d<H>/dbeta = Var(H) >= 0` and `dF/dbeta = S/beta^2`
/// by central finite differences (relative step 1e-5) against the analytic
/// Gibbs-state variance, tolerance 1e-5.
pub fn check_energy_entropy_monotone(h: &Hamiltonian, betas: &[f64]) -> Result<MonotoneReport> {
    let tol = 1e-5;
    let mut entries = Vec::with_capacity(betas.len());
    let mut max_dev: f64 = 0.0;
    for &beta in betas {
        let t = ThermalParams::new(beta)?;
        let step = 1e-5 * beta;
        let tp = ThermalParams::new(beta + step)?;
        let tm = ThermalParams::new(beta - step)?;
        let variance = thermal_energy_variance(h, t);
        let ds = (thermal_entropy(h, tp) - thermal_entropy(h, tm)) / (2.0 * step);
        let de = (thermal_energy(h, tp) - thermal_energy(h, tm)) / (2.0 * step);
        let df = (free_energy(h, tp) - free_energy(h, tm)) / (2.0 * step);
        let entry = MonotoneEntry {
            beta,
            variance,
            entropy_rate: -ds / beta,
            energy_rate: -de,
            free_energy_rate: df,
            free_energy_rate_expected: thermal_entropy(h, t) / (beta * beta),
        };
        // Scale-aware comparison: derivatives grow with the spectral range.
        let scale = 1.0 + variance.abs() + entry.free_energy_rate_expected.abs();
        max_dev = max_dev
            .max((entry.entropy_rate - variance).abs() / scale)
            .max((entry.energy_rate - variance).abs() / scale)
            .max((entry.free_energy_rate - entry.free_energy_rate_expected).abs() / scale)
            .max((-variance).max(0.0));
        entries.push(entry);
    }
    Ok(MonotoneReport { entries, max_deviation: max_dev, ok: max_dev <= tol })
}

/// Slack of `F(h2) <= F(h1) + <h2 - h1>_{gibbs(h1)}`; non-negative when the
/// inequality holds.
pub fn peierls_bogoliubov_check(
    h1: &Hamiltonian,
    h2: &Hamiltonian,
    t: ThermalParams,
) -> Result<f64> {
    if h1.dim() != h2.dim() {
        return Err(Error::DimensionMismatch("Hamiltonian dims differ".into()));
    }
    let rho1 = gibbs_state(h1, t);
    let cross = h2.expectation(&rho1)? - h1.expectation(&rho1)?;
    Ok(free_energy(h1, t) + cross - free_energy(h2, t))
}

/// Report from [`free_energy_sandwich_check`]: all slacks are non-negative
/// when the bounds hold.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SandwichReport {
    /// `F(H+dH) - [F(H) + <dH>_{gibbs(H+dH)}]`.
    pub slack_lower: f64,
    /// `[F(H) + <dH>_{gibbs(H)}] - F(H+dH)`.
    pub slack_upper: f64,
    /// `F(H+dH) - [F(H) + F(dH)]` (superadditivity).
    pub slack_superadditive: f64,
}

/// Checks the two-sided free-energy perturbation bound
/// `F(H) + <dH>_{gibbs(H+dH)} <= F(H+dH) <= F(H) + <dH>_{gibbs(H)}`
/// along with free-energy superadditivity.
pub fn free_energy_sandwich_check(
    h: &Hamiltonian,
    dh: &Hamiltonian,
    t: ThermalParams,
) -> Result<SandwichReport> {
    let total = h.add(dh)?;
    let f_h = free_energy(h, t);
    let f_total = free_energy(&total, t);
    let rho_total = gibbs_state(&total, t);
    let rho_h = gibbs_state(h, t);
    Ok(SandwichReport {
        slack_lower: f_total - (f_h + dh.expectation(&rho_total)?),
        slack_upper: (f_h + dh.expectation(&rho_h)?) - f_total,
        slack_superadditive: f_total - (f_h + free_energy(dh, t)),
    })
}

/// Bipartite Hamiltonian split `H = h_x + h_th + eps` on the joint space
/// `x tensor th`, with the coupling `eps` switched on only at the final time.
#[derive(Clone, Debug)]
pub struct CouplingSplit {
    pub h_x: Hamiltonian,
    pub h_th: Hamiltonian,
    /// Hermitian coupling on the joint space (may be zero).
    pub eps: DMatrix<Complex64>,
}

impl CouplingSplit {
    pub fn new(h_x: Hamiltonian, h_th: Hamiltonian, eps: DMatrix<Complex64>) -> Result<Self> {
        let joint = h_x.dim() * h_th.dim();
        if eps.nrows() != joint || eps.ncols() != joint {
            return Err(Error::DimensionMismatch(format!(
                "coupling is {}x{}, joint space is {joint}",
                eps.nrows(),
                eps.ncols()
            )));
        }
        let herm_dev = (&eps - eps.adjoint()).norm();
        if herm_dev > HERM_TOL {
            return Err(Error::NotHermitian(herm_dev));
        }
        Ok(Self { h_x, h_th, eps })
    }

    /// Zero coupling.
    pub fn uncoupled(h_x: Hamiltonian, h_th: Hamiltonian) -> Self {
        let joint = h_x.dim() * h_th.dim();
        let eps = DMatrix::zeros(joint, joint);
        Self { h_x, h_th, eps }
    }

    /// `I tensor h_th`, the non-`x` part of the Hamiltonian before coupling.
    pub fn delta_h_initial(&self) -> Hamiltonian {
        self.h_th.lift_right(self.h_x.dim())
    }

    /// `I tensor h_th + eps`, the non-`x` part with the coupling on.
    pub fn delta_h_final(&self) -> Result<Hamiltonian> {
        Hamiltonian::new(self.delta_h_initial().matrix() + &self.eps)
    }

    /// Ratio of the coupling's spectral norm to the smaller local norm.
    pub fn coupling_ratio(&self) -> Result<f64> {
        let eps_norm = Hamiltonian::new(self.eps.clone())?.spectral_norm();
        let local = self.h_x.spectral_norm().min(self.h_th.spectral_norm());
        Ok(if local > 0.0 { eps_norm / local } else { f64::INFINITY })
    }
}

/// Verdict on the free-energy lower bound implied by non-decreasing
/// conditional entropy of the hidden factor given the observed one.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CainBoundReport {
    /// `-(f_cap(h_x, rho_tau|x) - f_cap(h_x, rho_0|x))`.
    pub lhs_free_drop: f64,
    /// `-T (s_cap(dH_tau, rho_tau) - s_cap(dH_0, rho_0))`.
    pub lhs_theta_term: f64,
    /// `-(F(h_x)|_tau - F(h_x)|_0)`; zero for a static observed-factor Hamiltonian.
    pub rhs_free_drop: f64,
    /// `S_tau(th|x) - S_0(th|x)`.
    pub cain_delta: f64,
    pub satisfied: bool,
}

/// Tolerance on the inequality slack in [`cain_bound_report`].
pub const CAIN_TOL: f64 = 1e-9;

/// Computes both sides of the bound
/// `-Δf_cap(h_x, rho|x) - T Δs_cap(dH, rho) <= -ΔF(h_x)`
/// between times 0 and tau, plus the conditional-entropy change that the
/// bound's derivation assumes is non-negative.
///
/// The initial state must be the product of local Gibbs states (coupling off
/// at time zero); the final state may be anything on the joint space. When
/// `cain_delta < 0` the bound carries no guarantee and `satisfied` is purely
/// descriptive.
pub fn cain_bound_report(
    split: &CouplingSplit,
    t: ThermalParams,
    rho_0: &DensityMatrix,
    rho_tau: &DensityMatrix,
) -> Result<CainBoundReport> {
    let joint = split.h_x.dim() * split.h_th.dim();
    for (label, rho) in [("initial", rho_0), ("final", rho_tau)] {
        if rho.dim() != joint {
            return Err(Error::DimensionMismatch(format!(
                "{label} state dim {} vs joint dim {joint}",
                rho.dim()
            )));
        }
        if rho.factors().len() != 2
            || rho.factors()[0].dim != split.h_x.dim()
            || rho.factors()[1].dim != split.h_th.dim()
        {
            return Err(Error::Precondition(format!(
                "{label} state must carry factors (x, th) of dims ({}, {})",
                split.h_x.dim(),
                split.h_th.dim()
            )));
        }
    }
    let x_name = rho_0.factors()[0].name.clone();
    let th_name = rho_0.factors()[1].name.clone();

    // Initial state must be the product of local Gibbs states.
    let product = gibbs_state_named(&split.h_x, t, &x_name)
        .tensor(&gibbs_state_named(&split.h_th, t, &th_name))?;
    let dev = (rho_0.matrix() - product.matrix()).norm();
    if dev > 1e-8 {
        return Err(Error::InitialStateNotProduct(dev));
    }

    let x = [x_name.as_str()];
    let th = [th_name.as_str()];
    let cain_delta =
        rho_tau.cond_entropy(&th, &x)? - rho_0.cond_entropy(&th, &x)?;

    let rho_0_x = rho_0.partial_trace(&x)?;
    let rho_tau_x = rho_tau.partial_trace(&x)?;
    let lhs_free_drop = -(f_cap(&split.h_x, t, &rho_tau_x)? - f_cap(&split.h_x, t, &rho_0_x)?);

    let dh0 = split.delta_h_initial();
    let dht = split.delta_h_final()?;
    let lhs_theta_term =
        -t.temperature() * (s_cap(&dht, t, rho_tau)? - s_cap(&dh0, t, rho_0)?);

    // The observed-factor Hamiltonian is the same at both ends here.
    let rhs_free_drop = 0.0;
    let satisfied = lhs_free_drop + lhs_theta_term <= rhs_free_drop + CAIN_TOL;

    Ok(CainBoundReport { lhs_free_drop, lhs_theta_term, rhs_free_drop, cain_delta, satisfied })
}

// ---------------------------------------------------------------------------
// Random sampling and reference dynamics
// ---------------------------------------------------------------------------

/// Standard normal via Box-Muller.
fn gaussian(rng: &mut impl Rng) -> f64 {
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen::<f64>();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Random Hermitian matrix with Gaussian entries (GUE-like, unnormalized).
pub fn random_hermitian(dim: usize, rng: &mut impl Rng) -> DMatrix<Complex64> {
    let g = DMatrix::from_fn(dim, dim, |_, _| Complex64::new(gaussian(rng), gaussian(rng)));
    (&g + g.adjoint()).map(|z| z / Complex64::new(2.0_f64.sqrt(), 0.0))
}

/// Random Hamiltonian with Gaussian Hermitian matrix.
pub fn random_hamiltonian(dim: usize, rng: &mut impl Rng) -> Hamiltonian {
    Hamiltonian::new(random_hermitian(dim, rng)).expect("construction is Hermitian")
}

/// Random full-rank density matrix `G G^dagger / Tr` (Ginibre ensemble).
pub fn random_density(factors: Vec<Factor>, rng: &mut impl Rng) -> DensityMatrix {
    let dim: usize = factors.iter().map(|f| f.dim).product();
    let g = DMatrix::from_fn(dim, dim, |_, _| Complex64::new(gaussian(rng), gaussian(rng)));
    let w = &g * g.adjoint();
    let tr = w.trace().re;
    let mat = w.map(|z| z / Complex64::new(tr, 0.0));
    let mat = (mat.clone() + mat.adjoint()).map(|z| z / Complex64::new(2.0, 0.0));
    DensityMatrix::new(factors, mat).expect("Ginibre construction is a valid state")
}

/// Random unitary from the QR decomposition of a Gaussian matrix, with the
/// column phases fixed by the R diagonal (Haar up to numerical detail).
pub fn random_unitary(dim: usize, rng: &mut impl Rng) -> DMatrix<Complex64> {
    let g = DMatrix::from_fn(dim, dim, |_, _| Complex64::new(gaussian(rng), gaussian(rng)));
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        for i in 0..dim {
            q[(i, j)] *= phase.conj();
        }
    }
    q
}

/// A channel that dephases the observed factor and applies a random mixture
/// of unitaries (a unital map) to the hidden factor within each block.
///
/// By construction this family can only increase the conditional entropy of
/// the hidden factor given the observed one when the input is a product
/// state, so it always satisfies the growth assumption behind
/// [`cain_bound_report`].
pub struct BlockUnitalChannel {
    dim_x: usize,
    dim_th: usize,
    /// Per observed value: list of (weight, unitary on the hidden factor).
    blocks: Vec<Vec<(f64, DMatrix<Complex64>)>>,
}

impl BlockUnitalChannel {
    /// Sample a channel with `n_unitaries` mixture terms per block.
    pub fn sample(dim_x: usize, dim_th: usize, n_unitaries: usize, rng: &mut impl Rng) -> Self {
        let mut blocks = Vec::with_capacity(dim_x);
        for _ in 0..dim_x {
            // Flat Dirichlet weights via normalized exponentials.
            let raw: Vec<f64> =
                (0..n_unitaries).map(|_| -rng.gen_range(f64::EPSILON..1.0_f64).ln()).collect();
            let mass: f64 = raw.iter().sum();
            let block = raw
                .into_iter()
                .map(|w| (w / mass, random_unitary(dim_th, rng)))
                .collect();
            blocks.push(block);
        }
        Self { dim_x, dim_th, blocks }
    }

    /// Apply the channel to a joint state with factors `(x, th)`.
    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        let joint = self.dim_x * self.dim_th;
        if rho.dim() != joint {
            return Err(Error::DimensionMismatch(format!(
                "state dim {} vs channel dim {joint}",
                rho.dim()
            )));
        }
        let mut out = DMatrix::<Complex64>::zeros(joint, joint);
        for (x, block) in self.blocks.iter().enumerate() {
            for (w, u) in block {
                // Kraus operator |x><x| tensor sqrt(w) U.
                let mut kraus = DMatrix::<Complex64>::zeros(joint, joint);
                let scale = Complex64::new(w.sqrt(), 0.0);
                for i in 0..self.dim_th {
                    for j in 0..self.dim_th {
                        kraus[(x * self.dim_th + i, x * self.dim_th + j)] = scale * u[(i, j)];
                    }
                }
                out += &kraus * rho.matrix() * kraus.adjoint();
            }
        }
        let out = (out.clone() + out.adjoint()).map(|z| z / Complex64::new(2.0, 0.0));
        DensityMatrix::new(rho.factors().to_vec(), out)
    }
}

/// Applies the full SWAP unitary to a joint state of two equal-dimension
/// factors. Starting from a product of Gibbs states with unequal local
/// entropies this strictly decreases the conditional entropy of the hidden
/// factor, providing a concrete probe outside the guaranteed family.
pub fn apply_swap(rho: &DensityMatrix) -> Result<DensityMatrix> {
    if rho.factors().len() != 2 || rho.factors()[0].dim != rho.factors()[1].dim {
        return Err(Error::Precondition(
            "swap probe needs two factors of equal dimension".into(),
        ));
    }
    let d = rho.factors()[0].dim;
    let joint = d * d;
    let mut swap = DMatrix::<Complex64>::zeros(joint, joint);
    for i in 0..d {
        for j in 0..d {
            swap[(j * d + i, i * d + j)] = Complex64::new(1.0, 0.0);
        }
    }
    let out = &swap * rho.matrix() * swap.adjoint();
    DensityMatrix::new(rho.factors().to_vec(), out)
}
