//! Classical-thermodynamics bookkeeping: per-system first-law ledgers,
//! contact-edge conservation, system-plus-bath inequalities, two-bath flow,
//! the heat-engine cycle, and the Carnot rectangle in the (T, S) plane.
//!
//! Quantities are finite deltas over one process step: `d_q` is heat into
//! the system, `d_w` work done by the system, `d_e` internal-energy change,
//! `d_s` entropy change in nats.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const BALANCE_TOL: f64 = 1e-12;

/// First-law ledger of one named system over one step.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PortLedger {
    pub system: String,
    pub d_q: f64,
    pub d_e: f64,
    pub d_w: f64,
    #[serde(default)]
    pub d_s: f64,
}

/// First-law residual `dQ - dE - dW`; zero (within 1e-12) for a balanced
/// ledger.
pub fn check_first_law(ledger: &PortLedger) -> f64 {
    ledger.d_q - ledger.d_e - ledger.d_w
}

/// A heat bath: its entire energy exchange is heat at fixed temperature,
/// `dQ = T dS`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BathSpec {
    pub temperature: f64,
    pub d_s: f64,
}

impl BathSpec {
    pub fn new(temperature: f64, d_s: f64) -> Result<Self> {
        if !(temperature > 0.0) {
            return Err(Error::OutOfRange(format!(
                "bath temperature must be positive, got {temperature}"
            )));
        }
        Ok(Self { temperature, d_s })
    }

    pub fn d_q(&self) -> f64 {
        self.temperature * self.d_s
    }
}

/// One process step: the participating ledgers plus the contact graph.
/// Thermal edges join heat ports, mechanical edges join work ports; each
/// edge conserves its quantity (the two flows are opposite).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProcessStep {
    pub ledgers: Vec<PortLedger>,
    pub thermal_edges: Vec<(String, String)>,
    pub mechanical_edges: Vec<(String, String)>,
}

impl ProcessStep {
    fn ledger(&self, name: &str) -> Result<&PortLedger> {
        self.ledgers
            .iter()
            .find(|l| l.system == name)
            .ok_or_else(|| Error::Precondition(format!("no ledger for system '{name}'")))
    }

    /// Checks first-law balance of every ledger and zero-sum flow on every
    /// contact edge; returns the largest residual.
    pub fn check_contacts(&self) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for l in &self.ledgers {
            worst = worst.max(check_first_law(l).abs());
        }
        for (a, b) in &self.thermal_edges {
            worst = worst.max((self.ledger(a)?.d_q + self.ledger(b)?.d_q).abs());
        }
        for (a, b) in &self.mechanical_edges {
            worst = worst.max((self.ledger(a)?.d_w + self.ledger(b)?.d_w).abs());
        }
        Ok(worst)
    }
}

/// An ordered sequence of steps; the named systems return to their initial
/// state, so their summed entropy and energy changes vanish.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CycleSpec {
    pub steps: Vec<ProcessStep>,
    pub cyclic_systems: Vec<String>,
}

impl CycleSpec {
    /// Largest cycle-closure residual `|sum dS|, |sum dE|` over the cyclic
    /// systems, after validating every step's contacts.
    pub fn check_closure(&self) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for step in &self.steps {
            worst = worst.max(step.check_contacts()?);
        }
        for name in &self.cyclic_systems {
            let (mut s, mut e) = (0.0, 0.0);
            for step in &self.steps {
                if let Ok(l) = step.ledger(name) {
                    s += l.d_s;
                    e += l.d_e;
                }
            }
            worst = worst.max(s.abs()).max(e.abs());
        }
        Ok(worst)
    }

    /// Net heat into the named system summed over the cycle.
    pub fn cycle_heat(&self, name: &str) -> f64 {
        self.steps
            .iter()
            .filter_map(|st| st.ledger(name).ok())
            .map(|l| l.d_q)
            .sum()
    }

    /// Net work done by the named system summed over the cycle.
    pub fn cycle_work(&self, name: &str) -> f64 {
        self.steps
            .iter()
            .filter_map(|st| st.ledger(name).ok())
            .map(|l| l.d_w)
            .sum()
    }
}

/// Second-law slacks for a system in thermal contact with one bath:
/// `entropy_slack = dS_s - dQ_s / T` and `work_slack = -dF_s - dW_s`, both
/// nonnegative. The free-energy change `dF_s = dE_s - T dS_s` is taken at
/// the bath temperature. Inputs whose total entropy decreases are rejected.
pub fn system_bath_bounds(sys: &PortLedger, bath: &BathSpec) -> Result<(f64, f64)> {
    let t = bath.temperature;
    let balance = check_first_law(sys);
    if balance.abs() > 1e-9 {
        return Err(Error::Precondition(format!(
            "system ledger violates the first law by {balance}"
        )));
    }
    if (sys.d_q + bath.d_q()).abs() > 1e-9 {
        return Err(Error::Precondition(
            "thermal contact requires dQ_sys = -dQ_bath".into(),
        ));
    }
    let total_entropy = sys.d_s + bath.d_s;
    if total_entropy < -BALANCE_TOL {
        return Err(Error::Precondition(format!(
            "total entropy change {total_entropy} is negative"
        )));
    }
    let entropy_slack = sys.d_s - sys.d_q / t;
    let d_f = sys.d_e - t * sys.d_s;
    let work_slack = -d_f - sys.d_w;
    Ok((entropy_slack, work_slack))
}

/// Direct heat flow between a hot and a cold bath.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TwoBathReport {
    /// Heat received by the cold bath.
    pub d_q_c: f64,
    /// Heat received by the hot bath (`-d_q_c`).
    pub d_q_h: f64,
    /// Total entropy production `dQ_c (T_h - T_c) / (T_h T_c)`.
    pub entropy_production: f64,
    /// Whether the flow direction is allowed (hot to cold).
    pub valid: bool,
}

/// Checks that heat between two baths flows from hot to cold.
pub fn two_bath_flow(t_h: f64, t_c: f64, d_q_c: f64) -> Result<TwoBathReport> {
    if !(t_h > t_c && t_c > 0.0) {
        return Err(Error::Precondition(format!(
            "need T_h > T_c > 0, got T_h = {t_h}, T_c = {t_c}"
        )));
    }
    let entropy_production = d_q_c * (t_h - t_c) / (t_h * t_c);
    Ok(TwoBathReport {
        d_q_c,
        d_q_h: -d_q_c,
        entropy_production,
        valid: entropy_production >= -BALANCE_TOL,
    })
}

/// Quasi-static heat-engine cycle between two baths.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HeatEngineReport {
    /// Heat received by the hot bath over the cycle (negative: it supplies).
    pub d_q_h_cyc: f64,
    /// Heat received by the cold bath over the cycle.
    pub d_q_c_cyc: f64,
    /// Net work extracted over the cycle.
    pub work_cyc: f64,
    /// Work per unit of heat dumped into the cold bath, `(T_h - T_c)/T_c`.
    pub efficiency_per_cold_heat: f64,
    /// Conventional Carnot efficiency `1 - T_c/T_h` (work per unit of heat
    /// drawn from the hot bath).
    pub efficiency_carnot: f64,
}

/// Heat-engine cycle: quasi-static balance `dQ_c/T_c = -dQ_h/T_h` fixes the
/// hot-bath heat and the extracted work `W = dQ_c (T_h - T_c)/T_c`.
pub fn heat_engine_cycle(t_h: f64, t_c: f64, d_q_c_cyc: f64) -> Result<HeatEngineReport> {
    if !(t_h > t_c && t_c > 0.0) {
        return Err(Error::Precondition(format!(
            "need T_h > T_c > 0, got T_h = {t_h}, T_c = {t_c}"
        )));
    }
    let d_q_h_cyc = -d_q_c_cyc * t_h / t_c;
    let work_cyc = -d_q_h_cyc - d_q_c_cyc;
    Ok(HeatEngineReport {
        d_q_h_cyc,
        d_q_c_cyc,
        work_cyc,
        efficiency_per_cold_heat: (t_h - t_c) / t_c,
        efficiency_carnot: 1.0 - t_c / t_h,
    })
}

/// Four-step rectangle cycle in the (T, S) plane, as a [`CycleSpec`] for a
/// working system "s" alternating isentropic strokes with isothermal
/// contacts to baths "hot" and "cold".
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CarnotReport {
    pub cycle: CycleSpec,
    pub net_work: f64,
    /// Worst contact / first-law / closure residual.
    pub max_residual: f64,
}

/// Builds and checks the Carnot rectangle: isentropic heating, isothermal
/// expansion at `T_h` with `dQ = T_h dS`, isentropic cooling, isothermal
/// compression at `T_c`. Net work is the rectangle area
/// `(T_h - T_c)(S_high - S_low)`.
pub fn carnot_cycle_check(t_h: f64, t_c: f64, s_low: f64, s_high: f64) -> Result<CarnotReport> {
    if !(t_h > t_c && t_c > 0.0) {
        return Err(Error::Precondition(format!(
            "need T_h > T_c > 0, got T_h = {t_h}, T_c = {t_c}"
        )));
    }
    if s_high < s_low {
        return Err(Error::Precondition(format!(
            "need S_high >= S_low, got {s_high} < {s_low}"
        )));
    }
    let ds = s_high - s_low;
    // Internal energy of the working system is bookkept as E = T S along the
    // rectangle so the cycle closes; only differences enter the checks.
    let iso = |label: &str, t0: f64, t1: f64| -> ProcessStep {
        // isentropic stroke: dQ = 0, work = -dE
        let d_e = (t1 - t0) * s_low;
        ProcessStep {
            ledgers: vec![PortLedger {
                system: format!("s:{label}"),
                d_q: 0.0,
                d_e,
                d_w: -d_e,
                d_s: 0.0,
            }],
            thermal_edges: vec![],
            mechanical_edges: vec![],
        }
    };
    let isothermal = |label: &str, bath: &str, t: f64, d_s: f64| -> ProcessStep {
        let d_q = t * d_s;
        ProcessStep {
            ledgers: vec![
                PortLedger {
                    system: format!("s:{label}"),
                    d_q,
                    d_e: t * d_s,
                    d_w: 0.0,
                    d_s,
                },
                PortLedger {
                    system: bath.into(),
                    d_q: -d_q,
                    d_e: -d_q,
                    d_w: 0.0,
                    d_s: -d_s,
                },
            ],
            thermal_edges: vec![(format!("s:{label}"), bath.into())],
            mechanical_edges: vec![],
        }
    };
    // The four strokes; the system ledger name is shared so cycle sums see
    // all of them.
    let mut steps = vec![
        iso("1", t_c, t_h),
        isothermal("2", "hot", t_h, ds),
        iso("3", t_h, t_c),
        isothermal("4", "cold", t_c, -ds),
    ];
    for st in &mut steps {
        for l in &mut st.ledgers {
            if l.system.starts_with("s:") {
                l.system = "s".into();
            }
        }
        for e in &mut st.thermal_edges {
            if e.0.starts_with("s:") {
                e.0 = "s".into();
            }
        }
    }
    // Correction: during the isentropic strokes E changes by (t1 - t0) * S at
    // the current entropy; stroke 1 runs at S_low, stroke 3 at S_high.
    steps[2].ledgers[0].d_e = (t_c - t_h) * s_high;
    steps[2].ledgers[0].d_w = -steps[2].ledgers[0].d_e;

    let cycle = CycleSpec { steps, cyclic_systems: vec!["s".into()] };
    let max_residual = cycle.check_closure()?;
    // over a closed cycle dE sums to zero, so net work equals net heat in
    let net_work = cycle.cycle_heat("s");
    Ok(CarnotReport { cycle, net_work, max_residual })
}

/// Isothermal ideal-gas work bridge: compares `T ln(V2/V1)` against the
/// numerical quadrature of `P dV` with `P = T/V` (Simpson rule).
pub fn ideal_gas_work_bridge(t: f64, v1: f64, v2: f64) -> Result<(f64, f64)> {
    if !(t > 0.0 && v1 > 0.0 && v2 > 0.0) {
        return Err(Error::OutOfRange(
            "temperature and volumes must be positive".into(),
        ));
    }
    let closed = t * (v2 / v1).ln();
    let n = 4096; // even
    let h = (v2 - v1) / n as f64;
    let p = |v: f64| t / v;
    let mut acc = p(v1) + p(v2);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * p(v1 + k as f64 * h);
    }
    let quad = acc * h / 3.0;
    Ok((quad, closed))
}
