//! Single-particle feedback-engine scenarios: classical one- and two-particle
//! cycles (C1, C2) and their quantum counterparts (Q1, Q2), each built as
//! explicit states at times 0..3 with per-leg entropy-change tables computed
//! two independent ways, plus the isothermal work bookkeeping.
//!
//! Cycle stages: measurement (time 1), feedback (time 2), reset (time 3).

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::info::{
    Axis, DensityMatrix, Factor, JointDist, ProbVec, TransitionMatrix,
};

// ---------------------------------------------------------------------------
// Classical one-particle cycle (C1)
// ---------------------------------------------------------------------------

/// Parameters of the classical one-particle cycle: arbitrary initial system
/// law, sensor kernel, and feedback kernel that resamples the system from the
/// sensor value.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct C1Params {
    pub p_s0: ProbVec,
    pub p_sigma1_given_s0: TransitionMatrix,
    pub p_s2_given_sigma1: TransitionMatrix,
}

impl C1Params {
    pub fn validate(&self) -> Result<(usize, usize)> {
        let n_s = self.p_s0.len();
        let n_sig = self.p_sigma1_given_s0.rows();
        if self.p_sigma1_given_s0.cols() != n_s {
            return Err(Error::DimensionMismatch("sensor kernel input != system dim".into()));
        }
        if self.p_s2_given_sigma1.cols() != n_sig || self.p_s2_given_sigma1.rows() != n_s {
            return Err(Error::DimensionMismatch("feedback kernel dims".into()));
        }
        Ok((n_s, n_sig))
    }
}

/// Exact joint law of the C1 cycle over `(s0,sig0,s1,sig1,s2,sig2,s3,sig3)`:
/// the sensor starts and ends at 0, the system is copied into the measurement
/// leg, resampled by feedback, and re-initialized from the original law.
pub fn build_c1(params: &C1Params) -> Result<JointDist> {
    let (n_s, n_sig) = params.validate()?;
    let axes = vec![
        Axis::new("s0", n_s),
        Axis::new("sig0", n_sig),
        Axis::new("s1", n_s),
        Axis::new("sig1", n_sig),
        Axis::new("s2", n_s),
        Axis::new("sig2", n_sig),
        Axis::new("s3", n_s),
        Axis::new("sig3", n_sig),
    ];
    let size: usize = axes.iter().map(|a| a.size).product();
    let mut table = vec![0.0; size];
    let dims: Vec<usize> = axes.iter().map(|a| a.size).collect();
    for (flat, slot) in table.iter_mut().enumerate() {
        let mut idx = [0usize; 8];
        let mut rem = flat;
        for k in (0..8).rev() {
            idx[k] = rem % dims[k];
            rem /= dims[k];
        }
        let [s0, sig0, s1, sig1, s2, sig2, s3, sig3] = idx;
        if sig0 != 0 || sig3 != 0 || s1 != s0 || sig2 != sig1 {
            continue;
        }
        *slot = params.p_s0.probs()[s0]
            * params.p_sigma1_given_s0.get(sig1, s0)
            * params.p_s2_given_sigma1.get(s2, sig1)
            * params.p_s0.probs()[s3];
    }
    JointDist::new(axes, table)
}

// ---------------------------------------------------------------------------
// Leg tables
// ---------------------------------------------------------------------------

/// One table cell: the entropy change computed directly from the built state
/// and from the closed-form identity.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Cell {
    pub direct: f64,
    pub closed_form: f64,
}

impl Cell {
    fn new(direct: f64, closed_form: f64) -> Self {
        Self { direct, closed_form }
    }

    pub fn deviation(&self) -> f64 {
        (self.direct - self.closed_form).abs()
    }
}

/// One leg of the cycle (e.g. `1<-0`).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LegRow {
    pub leg: String,
    /// System-only entropy change.
    pub system: Cell,
    /// System-plus-sensor entropy change.
    pub joint: Cell,
}

/// The 4x2 per-leg entropy-change table of one scenario, with the named
/// scalar terms that feed the closed forms and the work report.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LegTable {
    pub case_tag: String,
    pub legs: Vec<LegRow>,
    /// Named entropy terms in nats (volume, erasure, correlation, ..).
    pub terms: BTreeMap<String, f64>,
}

impl LegTable {
    /// Largest direct-vs-closed-form disagreement over all cells.
    pub fn max_cell_deviation(&self) -> f64 {
        self.legs
            .iter()
            .flat_map(|r| [r.system.deviation(), r.joint.deviation()])
            .fold(0.0, f64::max)
    }

    /// `(system column sum, joint column sum)` over the full cycle, for both
    /// the direct and closed-form values.
    pub fn column_sums(&self) -> [(f64, f64); 2] {
        let sys_direct: f64 = self.legs.iter().map(|r| r.system.direct).sum();
        let joint_direct: f64 = self.legs.iter().map(|r| r.joint.direct).sum();
        let sys_closed: f64 = self.legs.iter().map(|r| r.system.closed_form).sum();
        let joint_closed: f64 = self.legs.iter().map(|r| r.joint.closed_form).sum();
        [(sys_direct, joint_direct), (sys_closed, joint_closed)]
    }

    /// Aligned Markdown rendering of the 4x2 layout.
    pub fn to_markdown(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("### {} entropy changes (nats)\n\n", self.case_tag));
        out.push_str("| leg | system (direct) | system (closed) | system+sensor (direct) | system+sensor (closed) |\n");
        out.push_str("|-----|----------------:|----------------:|-----------------------:|-----------------------:|\n");
        for r in &self.legs {
            out.push_str(&format!(
                "| {} | {:+.10} | {:+.10} | {:+.10} | {:+.10} |\n",
                r.leg, r.system.direct, r.system.closed_form, r.joint.direct, r.joint.closed_form
            ));
        }
        out
    }

    fn from_entropies(
        case_tag: &str,
        h_sys: [f64; 4],
        h_joint: [f64; 4],
        closed_sys: [f64; 4],
        closed_joint: [f64; 4],
        terms: BTreeMap<String, f64>,
    ) -> Self {
        let labels = ["1<-0", "2<-1", "3<-2", "0<-3"];
        let legs = (0..4)
            .map(|k| {
                let next = (k + 1) % 4;
                LegRow {
                    leg: labels[k].to_string(),
                    system: Cell::new(h_sys[next] - h_sys[k], closed_sys[k]),
                    joint: Cell::new(h_joint[next] - h_joint[k], closed_joint[k]),
                }
            })
            .collect();
        Self { case_tag: case_tag.into(), legs, terms }
    }
}

/// Per-leg table for C1. Every closed form is an identity of the built
/// joint; the volume term is `dH_vol = H(s0) - H(s2|sig1)`.
pub fn table_c1(params: &C1Params) -> Result<LegTable> {
    let joint = build_c1(params)?;
    c1_table_from_slices(
        "C1",
        &joint.marginal(&["s0"])?,
        &joint.marginal(&["s0", "sig1"])?,
        &joint.marginal(&["s2", "sig2"])?,
    )
}

/// Assembles the C1 table from the three time-slice marginals that determine
/// it: `P(s0)`, `P(s0, sig1)`, and `P(s2, sig2)`. The closed forms depend on
/// nothing else, which is what the quantum embedding check exploits.
pub fn c1_table_from_slices(
    case_tag: &str,
    p_s0: &JointDist,
    p_s0_sig1: &JointDist,
    p_s2_sig2: &JointDist,
) -> Result<LegTable> {
    let h_s0 = p_s0.entropy();
    let h_sig1 = p_s0_sig1.marginal_entropy(&["sig1"])?;
    let mi_sig1_s0 = p_s0_sig1.mutual_info(&["sig1"], &["s0"])?;
    let h_s2 = p_s2_sig2.marginal_entropy(&["s2"])?;
    let h_s2_given_sig = p_s2_sig2.cond_entropy(&["s2"], &["sig2"])?;
    let mi_s2_sig = p_s2_sig2.mutual_info(&["s2"], &["sig2"])?;
    let dh_vol = h_s0 - h_s2_given_sig;

    // Direct entropies at the four times. Time 1 copies the system and
    // attaches the sensor; time 3 re-initializes both.
    let h_sys = [h_s0, h_s0, h_s2, h_s0];
    let h_joint = [
        h_s0,
        p_s0_sig1.entropy(),
        p_s2_sig2.entropy(),
        h_s0,
    ];
    let closed_sys = [0.0, -dh_vol + mi_s2_sig, dh_vol - mi_s2_sig, 0.0];
    let closed_joint = [
        -mi_sig1_s0 + h_sig1,
        -dh_vol + mi_sig1_s0,
        dh_vol - h_sig1,
        0.0,
    ];
    let mut terms = BTreeMap::new();
    terms.insert("volume_entropy".into(), dh_vol);
    terms.insert("erasure_h_sigma1".into(), h_sig1);
    terms.insert("measurement_info_sigma1_s0".into(), mi_sig1_s0);
    terms.insert("feedback_info_s2_sigma1".into(), mi_s2_sig);
    Ok(LegTable::from_entropies(case_tag, h_sys, h_joint, closed_sys, closed_joint, terms))
}

// ---------------------------------------------------------------------------
// Classical two-particle cycle (C2)
// ---------------------------------------------------------------------------

/// Parameters of the classical two-particle cycle: correlated initial pair
/// `(s0, t0)`, a sensor that reads `s0` only, and feedback that resamples
/// each particle independently from the sensor value.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct C2Params {
    pub p_s0t0: JointDist,
    pub p_sigma1_given_s0: TransitionMatrix,
    pub p_s2_given_sigma1: TransitionMatrix,
    pub p_t2_given_sigma1: TransitionMatrix,
}

impl C2Params {
    pub fn validate(&self) -> Result<(usize, usize, usize)> {
        if self.p_s0t0.axes().len() != 2 {
            return Err(Error::DimensionMismatch("initial pair needs axes (s0, t0)".into()));
        }
        let n_s = self.p_s0t0.axes()[0].size;
        let n_t = self.p_s0t0.axes()[1].size;
        let n_sig = self.p_sigma1_given_s0.rows();
        if self.p_sigma1_given_s0.cols() != n_s
            || self.p_s2_given_sigma1.cols() != n_sig
            || self.p_s2_given_sigma1.rows() != n_s
            || self.p_t2_given_sigma1.cols() != n_sig
            || self.p_t2_given_sigma1.rows() != n_t
        {
            return Err(Error::DimensionMismatch("C2 kernel dims".into()));
        }
        Ok((n_s, n_t, n_sig))
    }
}

/// Exact joint law of the C2 cycle over
/// `(s0,t0,sig0, s1,t1,sig1, s2,t2,sig2, s3,t3,sig3)`.
pub fn build_c2(params: &C2Params) -> Result<JointDist> {
    let (n_s, n_t, n_sig) = params.validate()?;
    let axes = vec![
        Axis::new("s0", n_s),
        Axis::new("t0", n_t),
        Axis::new("sig0", n_sig),
        Axis::new("s1", n_s),
        Axis::new("t1", n_t),
        Axis::new("sig1", n_sig),
        Axis::new("s2", n_s),
        Axis::new("t2", n_t),
        Axis::new("sig2", n_sig),
        Axis::new("s3", n_s),
        Axis::new("t3", n_t),
        Axis::new("sig3", n_sig),
    ];
    let dims: Vec<usize> = axes.iter().map(|a| a.size).collect();
    let size: usize = dims.iter().product();
    if size > 1_000_000 {
        return Err(Error::StateSpaceOverflow { size, limit: 1_000_000 });
    }
    let pair = params.p_s0t0.table();
    let mut table = vec![0.0; size];
    for (flat, slot) in table.iter_mut().enumerate() {
        let mut idx = [0usize; 12];
        let mut rem = flat;
        for k in (0..12).rev() {
            idx[k] = rem % dims[k];
            rem /= dims[k];
        }
        let [s0, t0, sig0, s1, t1, sig1, s2, t2, sig2, s3, t3, sig3] = idx;
        if sig0 != 0 || sig3 != 0 || s1 != s0 || t1 != t0 || sig2 != sig1 {
            continue;
        }
        *slot = pair[s0 * n_t + t0]
            * params.p_sigma1_given_s0.get(sig1, s0)
            * params.p_s2_given_sigma1.get(s2, sig1)
            * params.p_t2_given_sigma1.get(t2, sig1)
            * pair[s3 * n_t + t3];
    }
    JointDist::new(axes, table)
}

/// Per-leg table for C2. The closed forms add the initial-pair correlation
/// term `H(s0:t0)` to the one-particle structure, with the combined volume
/// term `dH_vol_x = dH_vol_s + dH_vol_t`.
pub fn table_c2(params: &C2Params) -> Result<LegTable> {
    let joint = build_c2(params)?;
    let h_x0 = joint.marginal_entropy(&["s0", "t0"])?;
    let h_s0 = joint.marginal_entropy(&["s0"])?;
    let h_t0 = joint.marginal_entropy(&["t0"])?;
    let mi_s0_t0 = h_s0 + h_t0 - h_x0;
    let slice1 = joint.marginal(&["s0", "t0", "sig1"])?;
    let h_sig1 = slice1.marginal_entropy(&["sig1"])?;
    let mi_sig1_s0 = joint.marginal(&["s0", "sig1"])?.mutual_info(&["sig1"], &["s0"])?;
    let slice2 = joint.marginal(&["s2", "t2", "sig2"])?;
    let h_x2 = slice2.marginal_entropy(&["s2", "t2"])?;
    let dh_vol_s = h_s0 - slice2.cond_entropy(&["s2"], &["sig2"])?;
    let dh_vol_t = h_t0 - slice2.cond_entropy(&["t2"], &["sig2"])?;
    let dh_vol_x = dh_vol_s + dh_vol_t;
    let mi_x2_sig = slice2.mutual_info(&["s2", "t2"], &["sig2"])?;

    let h_sys = [h_x0, h_x0, h_x2, h_x0];
    let h_joint = [h_x0, slice1.entropy(), slice2.entropy(), h_x0];
    let closed_sys = [
        0.0,
        -dh_vol_x + mi_x2_sig + mi_s0_t0,
        dh_vol_x - mi_x2_sig - mi_s0_t0,
        0.0,
    ];
    let closed_joint = [
        -mi_sig1_s0 + h_sig1,
        -dh_vol_x + mi_sig1_s0 + mi_s0_t0,
        dh_vol_x - h_sig1 - mi_s0_t0,
        0.0,
    ];
    let mut terms = BTreeMap::new();
    terms.insert("volume_entropy_s".into(), dh_vol_s);
    terms.insert("volume_entropy_t".into(), dh_vol_t);
    terms.insert("volume_entropy_x".into(), dh_vol_x);
    terms.insert("erasure_h_sigma1".into(), h_sig1);
    terms.insert("measurement_info_sigma1_s0".into(), mi_sig1_s0);
    terms.insert("feedback_info_x2_sigma1".into(), mi_x2_sig);
    terms.insert("correlation_s0_t0".into(), mi_s0_t0);
    Ok(LegTable::from_entropies("C2", h_sys, h_joint, closed_sys, closed_joint, terms))
}

// ---------------------------------------------------------------------------
// Quantum one-particle cycle (Q1)
// ---------------------------------------------------------------------------

/// Parameters of the quantum one-particle cycle.
///
/// The initial amplitude tensor `a_init[s, r]` purifies the system against a
/// traced reference `r`; `a_meas` is a unitary on the `(s, sig)` space whose
/// output sensor index is classicalized; feedback is one unitary on `s` per
/// sensor value, applied inside the matching sensor block.
#[derive(Clone, Debug)]
pub struct Q1Params {
    pub a_init: DMatrix<Complex64>,
    pub a_meas: DMatrix<Complex64>,
    pub feedback: Vec<DMatrix<Complex64>>,
}

const ISO_TOL: f64 = 1e-10;

fn check_isometry(m: &DMatrix<Complex64>, tensor: &str) -> Result<()> {
    let dev = (m.adjoint() * m - DMatrix::<Complex64>::identity(m.ncols(), m.ncols())).norm();
    if dev > ISO_TOL {
        return Err(Error::IsometryViolation { tensor: tensor.into(), deviation: dev });
    }
    Ok(())
}

impl Q1Params {
    /// Returns `(n_s, n_r, n_sigma)` after checking normalization and the
    /// isometry constraints.
    pub fn validate(&self) -> Result<(usize, usize, usize)> {
        let n_s = self.a_init.nrows();
        let n_r = self.a_init.ncols();
        let n_sig = self.feedback.len();
        if n_sig == 0 {
            return Err(Error::Precondition("need at least one feedback block".into()));
        }
        let norm: f64 = self.a_init.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidDensityMatrix(format!(
                "initial tensor norm^2 = {norm}"
            )));
        }
        let dim_x = n_s * n_sig;
        if self.a_meas.nrows() != dim_x || self.a_meas.ncols() != dim_x {
            return Err(Error::DimensionMismatch(format!(
                "measurement tensor is {}x{}, composite space is {dim_x}",
                self.a_meas.nrows(),
                self.a_meas.ncols()
            )));
        }
        check_isometry(&self.a_meas, "a_meas")?;
        for (sig, u) in self.feedback.iter().enumerate() {
            if u.nrows() != n_s || u.ncols() != n_s {
                return Err(Error::DimensionMismatch(format!(
                    "feedback block {sig} is {}x{}",
                    u.nrows(),
                    u.ncols()
                )));
            }
            check_isometry(u, &format!("a_feedback[{sig}]"))?;
        }
        Ok((n_s, n_r, n_sig))
    }
}

/// Zero the off-diagonal sensor blocks (make the `sig` factor classical).
fn classicalize_sig(rho: &DensityMatrix) -> Result<DensityMatrix> {
    rho.classicalize("sig")?.block_diagonal()
}

/// The block-controlled feedback unitary `sum_sig U_sig (x) |sig><sig|` on a
/// space with factors `(.., sig)` where `sig` is the final (minor) factor.
fn controlled_unitary(blocks: &[DMatrix<Complex64>], n_sys: usize) -> DMatrix<Complex64> {
    let n_sig = blocks.len();
    let dim = n_sys * n_sig;
    let mut w = DMatrix::<Complex64>::zeros(dim, dim);
    for (sig, u) in blocks.iter().enumerate() {
        for i in 0..n_sys {
            for j in 0..n_sys {
                w[(i * n_sig + sig, j * n_sig + sig)] = u[(i, j)];
            }
        }
    }
    w
}

fn conjugate(
    op: &DMatrix<Complex64>,
    rho: &DensityMatrix,
) -> Result<DensityMatrix> {
    let m = op * rho.matrix() * op.adjoint();
    let m = (m.clone() + m.adjoint()).map(|z| z / Complex64::new(2.0, 0.0));
    DensityMatrix::new(rho.factors().to_vec(), m)
}

/// Builds the four Q1 states on factors `(s, sig)`:
/// time 0 = purified system with sensor at 0; time 1 = measurement unitary
/// followed by sensor classicalization; time 2 = sensor-controlled feedback;
/// time 3 = reset (fresh copy of time 0, the old content swept into a traced
/// reservoir by an isometry).
pub fn build_q1(params: &Q1Params) -> Result<[DensityMatrix; 4]> {
    let (n_s, _n_r, n_sig) = params.validate()?;
    // rho_s[s, s'] = sum_r A[s, r] conj(A[s', r])
    let rho_s_mat = &params.a_init * params.a_init.adjoint();
    let rho_s = DensityMatrix::new(vec![Factor::new("s", n_s)], rho_s_mat)?;
    let sensor0 = DensityMatrix::from_probs(Factor::new("sig", n_sig), &ProbVec::delta(n_sig, 0))?;
    let rho0 = rho_s.tensor(&sensor0)?;
    let rho1 = classicalize_sig(&conjugate(&params.a_meas, &rho0)?)?;
    let w = controlled_unitary(&params.feedback, n_s);
    let rho2 = classicalize_sig(&conjugate(&w, &rho1)?)?;
    let rho3 = rho0.clone();
    Ok([rho0, rho1, rho2, rho3])
}

/// Per-leg table for Q1, with the volume terms
/// `dS_vol(tau) = S0(s0) - S_tau(s_tau | sig)`.
pub fn table_q1(params: &Q1Params) -> Result<LegTable> {
    let states = build_q1(params)?;
    let s = ["s"];
    let sig = ["sig"];
    let s_sys: Vec<f64> = states
        .iter()
        .map(|r| r.partial_trace(&s).map(|m| m.vn_entropy()))
        .collect::<Result<_>>()?;
    let s_joint: Vec<f64> = states.iter().map(|r| r.vn_entropy()).collect();
    let s0_s = s_sys[0];
    let h_sig1 = states[1].partial_trace(&sig)?.vn_entropy();
    let ds_vol_1 = s0_s - states[1].cond_entropy(&s, &sig)?;
    let ds_vol_2 = s0_s - states[2].cond_entropy(&s, &sig)?;
    let mi_s2_sig = states[2].mutual_info(&s, &sig)?;

    let closed_sys = [
        s_sys[1] - s_sys[0],
        -ds_vol_2 + mi_s2_sig + s_sys[0] - s_sys[1],
        ds_vol_2 - mi_s2_sig,
        0.0,
    ];
    let closed_joint = [
        -ds_vol_1 + h_sig1,
        -ds_vol_2 + ds_vol_1,
        ds_vol_2 - h_sig1,
        0.0,
    ];
    let mut terms = BTreeMap::new();
    terms.insert("volume_entropy_1".into(), ds_vol_1);
    terms.insert("volume_entropy_2".into(), ds_vol_2);
    terms.insert("erasure_h_sigma1".into(), h_sig1);
    terms.insert("feedback_info_s2_sigma1".into(), mi_s2_sig);
    Ok(LegTable::from_entropies(
        "Q1",
        [s_sys[0], s_sys[1], s_sys[2], s_sys[3]],
        [s_joint[0], s_joint[1], s_joint[2], s_joint[3]],
        closed_sys,
        closed_joint,
        terms,
    ))
}

// ---------------------------------------------------------------------------
// Quantum two-particle cycle (Q2)
// ---------------------------------------------------------------------------

/// Parameters of the quantum two-particle cycle: as Q1 with the composite
/// system `x = (s, t)`; the initial tensor `a_init[(s,t), r]` may entangle
/// the two particles, and each feedback block is a unitary on `(s, t)`.
#[derive(Clone, Debug)]
pub struct Q2Params {
    pub n_s: usize,
    pub n_t: usize,
    pub a_init: DMatrix<Complex64>,
    pub a_meas: DMatrix<Complex64>,
    pub feedback: Vec<DMatrix<Complex64>>,
}

impl Q2Params {
    pub fn validate(&self) -> Result<(usize, usize, usize, usize)> {
        let n_x = self.n_s * self.n_t;
        if self.a_init.nrows() != n_x {
            return Err(Error::DimensionMismatch("initial tensor rows != n_s * n_t".into()));
        }
        let n_r = self.a_init.ncols();
        let n_sig = self.feedback.len();
        if n_sig == 0 {
            return Err(Error::Precondition("need at least one feedback block".into()));
        }
        let norm: f64 = self.a_init.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidDensityMatrix(format!(
                "initial tensor norm^2 = {norm}"
            )));
        }
        let dim_x = n_x * n_sig;
        if self.a_meas.nrows() != dim_x || self.a_meas.ncols() != dim_x {
            return Err(Error::DimensionMismatch("measurement tensor dims".into()));
        }
        check_isometry(&self.a_meas, "a_meas")?;
        for (sig, u) in self.feedback.iter().enumerate() {
            if u.nrows() != n_x || u.ncols() != n_x {
                return Err(Error::DimensionMismatch(format!("feedback block {sig} dims",)));
            }
            check_isometry(u, &format!("a_feedback[{sig}]"))?;
        }
        Ok((self.n_s, self.n_t, n_r, n_sig))
    }
}

/// Builds the four Q2 states on factors `(s, t, sig)`.
pub fn build_q2(params: &Q2Params) -> Result<[DensityMatrix; 4]> {
    let (n_s, n_t, _n_r, n_sig) = params.validate()?;
    let rho_x_mat = &params.a_init * params.a_init.adjoint();
    let rho_x = DensityMatrix::new(
        vec![Factor::new("s", n_s), Factor::new("t", n_t)],
        rho_x_mat,
    )?;
    let sensor0 = DensityMatrix::from_probs(Factor::new("sig", n_sig), &ProbVec::delta(n_sig, 0))?;
    let rho0 = rho_x.tensor(&sensor0)?;
    let rho1 = classicalize_sig(&conjugate(&params.a_meas, &rho0)?)?;
    let w = controlled_unitary(&params.feedback, n_s * n_t);
    let rho2 = classicalize_sig(&conjugate(&w, &rho1)?)?;
    let rho3 = rho0.clone();
    Ok([rho0, rho1, rho2, rho3])
}

/// Per-leg table for Q2.
///
/// The closed forms are exact identities obtained by the chain rule; they
/// carry conditional-correlation corrections `I_tau = S_tau(s:t|sig)`
/// relative to the simpler two-particle forms, which are recovered exactly
/// when the measurement leaves the conditional s:t correlation unchanged
/// (`I_1 = I_0`) and the feedback removes it (`I_2 = 0`). The correction
/// terms are reported under `terms` so the reduction can be inspected.
pub fn table_q2(params: &Q2Params) -> Result<LegTable> {
    let states = build_q2(params)?;
    let x = ["s", "t"];
    let sig = ["sig"];
    let s_sys: Vec<f64> = states
        .iter()
        .map(|r| r.partial_trace(&x).map(|m| m.vn_entropy()))
        .collect::<Result<_>>()?;
    let s_joint: Vec<f64> = states.iter().map(|r| r.vn_entropy()).collect();
    let h_sig1 = states[1].partial_trace(&sig)?.vn_entropy();

    // Conditional mutual information I_tau = S(s|sig) + S(t|sig) - S(s,t|sig).
    let cond_mi = |rho: &DensityMatrix| -> Result<f64> {
        Ok(rho.cond_entropy(&["s"], &sig)? + rho.cond_entropy(&["t"], &sig)?
            - rho.cond_entropy(&x, &sig)?)
    };
    let i0 = cond_mi(&states[0])?;
    let i1 = cond_mi(&states[1])?;
    let i2 = cond_mi(&states[2])?;

    let s0_s = states[0].partial_trace(&["s"])?.vn_entropy();
    let s0_t = states[0].partial_trace(&["t"])?.vn_entropy();
    let ds_vol = |tau: usize, states: &[DensityMatrix; 4]| -> Result<(f64, f64)> {
        let vs = s0_s - states[tau].cond_entropy(&["s"], &sig)?;
        let vt = s0_t - states[tau].cond_entropy(&["t"], &sig)?;
        Ok((vs, vt))
    };
    let (ds1_s, ds1_t) = ds_vol(1, &states)?;
    let (ds2_s, ds2_t) = ds_vol(2, &states)?;
    let ds1_x = ds1_s + ds1_t;
    let ds2_x = ds2_s + ds2_t;
    let mi_x2_sig = states[2].mutual_info(&x, &sig)?;

    let closed_sys = [
        s_sys[1] - s_sys[0],
        -ds2_x + mi_x2_sig + i0 - i2 + s_sys[0] - s_sys[1],
        ds2_x - mi_x2_sig - i0 + i2,
        0.0,
    ];
    let closed_joint = [
        -ds1_x + h_sig1 + i0 - i1,
        -ds2_x + ds1_x + i1 - i2,
        ds2_x - h_sig1 - i0 + i2,
        0.0,
    ];
    let mut terms = BTreeMap::new();
    terms.insert("volume_entropy_1_s".into(), ds1_s);
    terms.insert("volume_entropy_1_t".into(), ds1_t);
    terms.insert("volume_entropy_1_x".into(), ds1_x);
    terms.insert("volume_entropy_2_s".into(), ds2_s);
    terms.insert("volume_entropy_2_t".into(), ds2_t);
    terms.insert("volume_entropy_2_x".into(), ds2_x);
    terms.insert("erasure_h_sigma1".into(), h_sig1);
    terms.insert("feedback_info_x2_sigma1".into(), mi_x2_sig);
    terms.insert("correlation_s0_t0".into(), i0);
    terms.insert("cond_correlation_0".into(), i0);
    terms.insert("cond_correlation_1".into(), i1);
    terms.insert("cond_correlation_2".into(), i2);
    Ok(LegTable::from_entropies(
        "Q2",
        [s_sys[0], s_sys[1], s_sys[2], s_sys[3]],
        [s_joint[0], s_joint[1], s_joint[2], s_joint[3]],
        closed_sys,
        closed_joint,
        terms,
    ))
}

// ---------------------------------------------------------------------------
// Work bookkeeping
// ---------------------------------------------------------------------------

/// One labelled work contribution.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WorkEntry {
    pub label: String,
    /// Category: volume extraction, sensor erasure, information, correlation.
    pub kind: String,
    pub entropy_nats: f64,
    /// `T * entropy_nats`, in energy units.
    pub work: f64,
}

/// Isothermal work report: each named entropy term of a leg table multiplied
/// by the bath temperature.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WorkReport {
    pub case_tag: String,
    pub temperature: f64,
    pub entries: Vec<WorkEntry>,
}

/// Converts the entropy terms of a leg table into work values `W = T dH`.
pub fn work_report(table: &LegTable, temperature: f64) -> Result<WorkReport> {
    if !(temperature > 0.0) {
        return Err(Error::OutOfRange(format!(
            "temperature must be positive, got {temperature}"
        )));
    }
    let kind_of = |label: &str| -> &'static str {
        if label.starts_with("volume_entropy") {
            "volume"
        } else if label.starts_with("erasure") {
            "erasure"
        } else if label.starts_with("correlation") || label.starts_with("cond_correlation") {
            "correlation"
        } else {
            "information"
        }
    };
    let entries = table
        .terms
        .iter()
        .map(|(label, &v)| WorkEntry {
            label: label.clone(),
            kind: kind_of(label).into(),
            entropy_nats: v,
            work: temperature * v,
        })
        .collect();
    Ok(WorkReport { case_tag: table.case_tag.clone(), temperature, entries })
}

// ---------------------------------------------------------------------------
// Time-reversal cross-check for the C1 chain
// ---------------------------------------------------------------------------

/// Result of [`c1_time_reversal_crosscheck`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReversalCrosscheck {
    /// Maximum entrywise disagreement between the generic Bayes reversal and
    /// the closed-form reversed kernels, over supported columns.
    pub max_abs_error: f64,
    /// Columns skipped because the conditioning state has no forward support.
    pub flagged: Vec<crate::chain::FlaggedColumn>,
}

/// Composite index `X = s * n_sig + sig` for the measurement-feedback chain.
fn c1_chain(params: &C1Params) -> Result<crate::chain::MarkovChainSpec> {
    let (n_s, n_sig) = params.validate()?;
    let dim = n_s * n_sig;
    let mut initial = vec![0.0; dim];
    for s in 0..n_s {
        initial[s * n_sig] = params.p_s0.probs()[s];
    }
    // step 1: copy s, sample sensor from it
    let mut m1 = vec![0.0; dim * dim];
    for s0 in 0..n_s {
        for sig0 in 0..n_sig {
            let from = s0 * n_sig + sig0;
            for sig1 in 0..n_sig {
                let to = s0 * n_sig + sig1;
                m1[to * dim + from] = params.p_sigma1_given_s0.get(sig1, s0);
            }
        }
    }
    // step 2: copy sensor, resample system from it
    let mut m2 = vec![0.0; dim * dim];
    for s1 in 0..n_s {
        for sig1 in 0..n_sig {
            let from = s1 * n_sig + sig1;
            for s2 in 0..n_s {
                let to = s2 * n_sig + sig1;
                m2[to * dim + from] = params.p_s2_given_sigma1.get(s2, sig1);
            }
        }
    }
    crate::chain::MarkovChainSpec::new(
        ProbVec::new(initial)?,
        vec![
            TransitionMatrix::new(dim, dim, m1)?,
            TransitionMatrix::new(dim, dim, m2)?,
        ],
    )
}

/// Reverses the C1 measurement-feedback chain with the generic Bayes
/// machinery and compares against the closed-form reversed kernels: the
/// first reversed step copies the sensor and Bayes-inverts the system from
/// it; the second is a deterministic copy of the system with sensor reset.
pub fn c1_time_reversal_crosscheck(params: &C1Params) -> Result<ReversalCrosscheck> {
    let (n_s, n_sig) = params.validate()?;
    let dim = n_s * n_sig;
    let spec = c1_chain(params)?;
    let rev = crate::chain::reverse_chain(&spec)?;

    // P(sigma1) and the Bayes-inverted sensor kernel P(s1 | sigma1).
    let p_sig: Vec<f64> = (0..n_sig)
        .map(|sig| {
            (0..n_s)
                .map(|s| params.p_sigma1_given_s0.get(sig, s) * params.p_s0.probs()[s])
                .sum()
        })
        .collect();

    let skip = |step: usize, state: usize| {
        rev.flagged.iter().any(|f| f.step == step && f.state == state)
    };

    let mut max_err: f64 = 0.0;
    // Reversed step 0 (time 2 -> time 1): delta on sigma, Bayes inversion on s.
    for from in 0..dim {
        if skip(0, from) {
            continue;
        }
        let (_, sig2) = (from / n_sig, from % n_sig);
        for to in 0..dim {
            let (s1, sig1) = (to / n_sig, to % n_sig);
            let want = if sig1 == sig2 && p_sig[sig2] > 0.0 {
                params.p_sigma1_given_s0.get(sig2, s1) * params.p_s0.probs()[s1] / p_sig[sig2]
            } else {
                0.0
            };
            max_err = max_err.max((rev.chain.steps[0].get(to, from) - want).abs());
        }
    }
    // Reversed step 1 (time 1 -> time 0): copy s, reset sensor to 0.
    for from in 0..dim {
        if skip(1, from) {
            continue;
        }
        let (s1, _) = (from / n_sig, from % n_sig);
        for to in 0..dim {
            let (s0, sig0) = (to / n_sig, to % n_sig);
            let want = if s0 == s1 && sig0 == 0 { 1.0 } else { 0.0 };
            max_err = max_err.max((rev.chain.steps[1].get(to, from) - want).abs());
        }
    }
    Ok(ReversalCrosscheck { max_abs_error: max_err, flagged: rev.flagged })
}

// ---------------------------------------------------------------------------
// Classical embeddings of the quantum cycles
// ---------------------------------------------------------------------------

/// Unitary whose first column is the given non-negative unit vector,
/// completed by Gram-Schmidt over the canonical basis.
pub fn unitary_with_first_column(v: &[f64]) -> DMatrix<Complex64> {
    let n = v.len();
    let mut cols: Vec<Vec<Complex64>> =
        vec![v.iter().map(|&x| Complex64::new(x, 0.0)).collect()];
    for k in 0..n {
        if cols.len() == n {
            break;
        }
        let mut cand: Vec<Complex64> = (0..n)
            .map(|i| Complex64::new(if i == k { 1.0 } else { 0.0 }, 0.0))
            .collect();
        for c in &cols {
            let inner: Complex64 =
                c.iter().zip(&cand).map(|(a, b)| a.conj() * b).sum();
            for i in 0..n {
                cand[i] -= inner * c[i];
            }
        }
        let norm: f64 = cand.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-8 {
            for z in &mut cand {
                *z /= Complex64::new(norm, 0.0);
            }
            cols.push(cand);
        }
    }
    DMatrix::from_fn(n, n, |i, j| cols[j][i])
}

/// Measurement unitary on `(sys, sig)` implementing a classical sensor: it
/// fixes the system and rotates the sensor from 0 into the amplitude vector
/// `sqrt(P(sig | readout(sys)))`.
pub fn measurement_from_classical(
    p_sig_given_readout: &TransitionMatrix,
    n_sys: usize,
    readout: impl Fn(usize) -> usize,
) -> DMatrix<Complex64> {
    let n_sig = p_sig_given_readout.rows();
    let dim = n_sys * n_sig;
    let mut v = DMatrix::<Complex64>::zeros(dim, dim);
    for sys in 0..n_sys {
        let amps: Vec<f64> =
            (0..n_sig).map(|sig| p_sig_given_readout.get(sig, readout(sys)).sqrt()).collect();
        let block = unitary_with_first_column(&amps);
        for i in 0..n_sig {
            for j in 0..n_sig {
                v[(sys * n_sig + i, sys * n_sig + j)] = block[(i, j)];
            }
        }
    }
    v
}

/// Permutation matrix on `n` states.
pub fn permutation_matrix(perm: &[usize]) -> DMatrix<Complex64> {
    let n = perm.len();
    let mut m = DMatrix::<Complex64>::zeros(n, n);
    for (from, &to) in perm.iter().enumerate() {
        m[(to, from)] = Complex64::new(1.0, 0.0);
    }
    m
}

/// Classical instance of the quantum one-particle cycle: diagonal initial
/// state carrying `p_s0`, a classical-sensor measurement, and one system
/// permutation per sensor value.
pub fn q1_embed_classical(
    p_s0: &ProbVec,
    p_sigma1_given_s0: &TransitionMatrix,
    perms: &[Vec<usize>],
) -> Q1Params {
    let n_s = p_s0.len();
    let a_init = DMatrix::from_fn(n_s, n_s, |i, j| {
        if i == j {
            Complex64::new(p_s0.probs()[i].sqrt(), 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let a_meas = measurement_from_classical(p_sigma1_given_s0, n_s, |s| s);
    let feedback = perms.iter().map(|p| permutation_matrix(p)).collect();
    Q1Params { a_init, a_meas, feedback }
}

/// The classical one-particle parameters induced by a permutation-feedback
/// instance: the feedback kernel is the marginal law of the permuted system
/// given the sensor value.
///
/// The per-leg table depends only on the time-slice marginals, which is why
/// the resampling net with this marginal kernel reproduces it exactly.
pub fn induced_c1_params(
    p_s0: &ProbVec,
    p_sigma1_given_s0: &TransitionMatrix,
    perms: &[Vec<usize>],
) -> Result<C1Params> {
    let n_s = p_s0.len();
    let n_sig = p_sigma1_given_s0.rows();
    let mut kernel = vec![0.0; n_s * n_sig];
    for sig in 0..n_sig {
        let p_joint: Vec<f64> = (0..n_s)
            .map(|s| p_sigma1_given_s0.get(sig, s) * p_s0.probs()[s])
            .collect();
        let mass: f64 = p_joint.iter().sum();
        for s in 0..n_s {
            let w = if mass > 0.0 { p_joint[s] / mass } else { 1.0 / n_s as f64 };
            kernel[perms[sig][s] * n_sig + sig] += w;
        }
    }
    Ok(C1Params {
        p_s0: p_s0.clone(),
        p_sigma1_given_s0: p_sigma1_given_s0.clone(),
        p_s2_given_sigma1: TransitionMatrix::new(n_s, n_sig, kernel)?,
    })
}

/// Classical instance of the quantum two-particle cycle with an uncorrelated
/// initial pair and per-sensor-value permutations acting independently on
/// each particle.
///
/// The two-particle resampling net needs the feedback to break the `s:t`
/// correlation given the sensor, which unitary feedback cannot do for a
/// correlated pair; with a product pair both constructions coincide.
pub fn q2_embed_classical(
    p_s0: &ProbVec,
    p_t0: &ProbVec,
    p_sigma1_given_s0: &TransitionMatrix,
    perms_s: &[Vec<usize>],
    perms_t: &[Vec<usize>],
) -> Q2Params {
    let n_s = p_s0.len();
    let n_t = p_t0.len();
    let n_x = n_s * n_t;
    let a_init = DMatrix::from_fn(n_x, n_x, |i, j| {
        if i == j {
            let (s, t) = (i / n_t, i % n_t);
            Complex64::new((p_s0.probs()[s] * p_t0.probs()[t]).sqrt(), 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let a_meas = measurement_from_classical(p_sigma1_given_s0, n_x, |x| x / n_t);
    let feedback = perms_s
        .iter()
        .zip(perms_t)
        .map(|(ps, pt)| permutation_matrix(ps).kronecker(&permutation_matrix(pt)))
        .collect();
    Q2Params { n_s, n_t, a_init, a_meas, feedback }
}

/// The classical two-particle parameters induced by a product-permutation
/// instance of the quantum cycle.
pub fn induced_c2_params(
    p_s0: &ProbVec,
    p_t0: &ProbVec,
    p_sigma1_given_s0: &TransitionMatrix,
    perms_s: &[Vec<usize>],
    perms_t: &[Vec<usize>],
) -> Result<C2Params> {
    let c1 = induced_c1_params(p_s0, p_sigma1_given_s0, perms_s)?;
    let n_t = p_t0.len();
    let n_sig = p_sigma1_given_s0.rows();
    // t is a spectator: its permuted law does not depend on the sensor via
    // Bayes (the sensor reads s only), so P(t2|sig) = perm_t(sig) applied to
    // the initial law.
    let mut kernel_t = vec![0.0; n_t * n_sig];
    for sig in 0..n_sig {
        for t in 0..n_t {
            kernel_t[perms_t[sig][t] * n_sig + sig] += p_t0.probs()[t];
        }
    }
    let pair_table: Vec<f64> = (0..p_s0.len() * n_t)
        .map(|i| p_s0.probs()[i / n_t] * p_t0.probs()[i % n_t])
        .collect();
    Ok(C2Params {
        p_s0t0: JointDist::new(
            vec![Axis::new("s0", p_s0.len()), Axis::new("t0", n_t)],
            pair_table,
        )?,
        p_sigma1_given_s0: c1.p_sigma1_given_s0,
        p_s2_given_sigma1: c1.p_s2_given_sigma1,
        p_t2_given_sigma1: TransitionMatrix::new(n_t, n_sig, kernel_t)?,
    })
}

// ---------------------------------------------------------------------------
// Random instance samplers
// ---------------------------------------------------------------------------

/// Random C1 parameters at the given dimensions.
pub fn random_c1(n_s: usize, n_sig: usize, rng: &mut impl rand::Rng) -> C1Params {
    C1Params {
        p_s0: crate::chain::random_distribution(n_s, rng),
        p_sigma1_given_s0: crate::chain::random_stochastic(n_sig, n_s, rng),
        p_s2_given_sigma1: crate::chain::random_stochastic(n_s, n_sig, rng),
    }
}

/// Random C2 parameters with a correlated initial pair.
pub fn random_c2(n_s: usize, n_t: usize, n_sig: usize, rng: &mut impl rand::Rng) -> C2Params {
    let pair = crate::chain::random_distribution(n_s * n_t, rng);
    C2Params {
        p_s0t0: JointDist::new(
            vec![Axis::new("s0", n_s), Axis::new("t0", n_t)],
            pair.probs().to_vec(),
        )
        .expect("normalized"),
        p_sigma1_given_s0: crate::chain::random_stochastic(n_sig, n_s, rng),
        p_s2_given_sigma1: crate::chain::random_stochastic(n_s, n_sig, rng),
        p_t2_given_sigma1: crate::chain::random_stochastic(n_t, n_sig, rng),
    }
}

/// Random Q1 parameters (Gaussian initial tensor, Haar-like measurement and
/// feedback unitaries).
pub fn random_q1(n_s: usize, n_r: usize, n_sig: usize, rng: &mut impl rand::Rng) -> Q1Params {
    let mut a_init = crate::thermal::random_hermitian(n_s.max(n_r), rng)
        .view((0, 0), (n_s, n_r))
        .into_owned();
    let norm: f64 = a_init.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    a_init /= Complex64::new(norm, 0.0);
    Q1Params {
        a_init,
        a_meas: crate::thermal::random_unitary(n_s * n_sig, rng),
        feedback: (0..n_sig).map(|_| crate::thermal::random_unitary(n_s, rng)).collect(),
    }
}

/// Random Q2 parameters.
pub fn random_q2(
    n_s: usize,
    n_t: usize,
    n_r: usize,
    n_sig: usize,
    rng: &mut impl rand::Rng,
) -> Q2Params {
    let n_x = n_s * n_t;
    let mut a_init = crate::thermal::random_hermitian(n_x.max(n_r), rng)
        .view((0, 0), (n_x, n_r))
        .into_owned();
    let norm: f64 = a_init.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    a_init /= Complex64::new(norm, 0.0);
    Q2Params {
        n_s,
        n_t,
        a_init,
        a_meas: crate::thermal::random_unitary(n_x * n_sig, rng),
        feedback: (0..n_sig).map(|_| crate::thermal::random_unitary(n_x, rng)).collect(),
    }
}
