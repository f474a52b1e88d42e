//! Binary-symmetric-channel algebra: complement, symmetric product,
//! the 2x2 symmetric channel matrix `M(a)` and symmetric vector `v(l)`,
//! binary entropy, and the specialization of the one-particle cycle table
//! to these kernels.

use crate::error::{Error, Result};
use crate::info::ProbVec;
use crate::info::TransitionMatrix;
use crate::szilard::{table_c1, C1Params, Cell, LegTable};

fn in_unit(name: &str, x: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&x) {
        Ok(x)
    } else {
        Err(Error::OutOfRange(format!("{name} = {x} is outside [0, 1]")))
    }
}

/// The complement `1 - a`.
pub fn complement(a: f64) -> Result<f64> {
    Ok(1.0 - in_unit("probability", a)?)
}

/// Symmetric product `a * b = ab + (1-a)(1-b)`: the probability that two
/// independent coins with biases `a`, `b` agree.
pub fn sym_product(a: f64, b: f64) -> Result<f64> {
    in_unit("a", a)?;
    in_unit("b", b)?;
    Ok(a * b + (1.0 - a) * (1.0 - b))
}

/// The symmetric doubly stochastic matrix with `a` on the diagonal
/// (column-stochastic layout; `m_matrix(1)` is the identity).
pub fn m_matrix(a: f64) -> Result<TransitionMatrix> {
    in_unit("a", a)?;
    TransitionMatrix::new(2, 2, vec![a, 1.0 - a, 1.0 - a, a])
}

/// The symmetric two-point law `(l, 1-l)`.
pub fn v_vector(l: f64) -> Result<ProbVec> {
    in_unit("l", l)?;
    ProbVec::new(vec![l, 1.0 - l])
}

/// Binary entropy `h(a) = -a ln a - (1-a) ln(1-a)` in nats, with the
/// continuity convention `0 ln 0 = 0`.
pub fn binary_entropy(a: f64) -> Result<f64> {
    in_unit("a", a)?;
    Ok(-crate::info::xlnx(a) - crate::info::xlnx(1.0 - a))
}

/// Slack of the mixing-increases-entropy inequality: `h(a*l) - h(l)`.
pub fn h_monotone_check(a: f64, l: f64) -> Result<f64> {
    Ok(binary_entropy(sym_product(a, l)?)? - binary_entropy(l)?)
}

/// One-particle cycle table for symmetric kernels: initial law `v(l)`,
/// sensor channel `M(alpha)`, feedback channel `M(beta)`.
///
/// The `closed_form` cells come from the binary-entropy formulas; the
/// `direct` cells are taken from the generic cycle pipeline run on the same
/// kernels, so each cell doubles as a cross-module equality check.
pub fn c1_bsc_table(l: f64, alpha: f64, beta: f64) -> Result<LegTable> {
    let params = C1Params {
        p_s0: v_vector(l)?,
        p_sigma1_given_s0: m_matrix(alpha)?,
        p_s2_given_sigma1: m_matrix(beta)?,
    };
    let generic = table_c1(&params)?;

    let h = binary_entropy;
    let al = sym_product(alpha, l)?;
    let bal = sym_product(beta, al)?;
    let sys = [0.0, h(bal)? - h(l)?, h(l)? - h(bal)?, 0.0];
    let joint = [
        h(alpha)?,
        h(beta)? + h(al)? - h(alpha)? - h(l)?,
        h(l)? - h(beta)? - h(al)?,
        0.0,
    ];

    let mut table = generic;
    table.case_tag = "C1-BSC".into();
    for (k, row) in table.legs.iter_mut().enumerate() {
        row.system = Cell { direct: row.system.direct, closed_form: sys[k] };
        row.joint = Cell { direct: row.joint.direct, closed_form: joint[k] };
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const LN2: f64 = std::f64::consts::LN_2;

    #[test]
    fn sym_product_identities() {
        let a = 0.37;
        assert!((sym_product(a, 0.0).unwrap() - (1.0 - a)).abs() < 1e-15);
        assert!((sym_product(a, 1.0).unwrap() - a).abs() < 1e-15);
        assert!((sym_product(a, 0.5).unwrap() - 0.5).abs() < 1e-15);
        assert!((sym_product(0.3, 0.6).unwrap() - 0.46).abs() < 1e-15);
        // complement rule: (1-a)*b = 1 - a*b
        let b = 0.81;
        assert!(
            (sym_product(1.0 - a, b).unwrap() - (1.0 - sym_product(a, b).unwrap())).abs() < 1e-15
        );
        assert!(sym_product(1.2, 0.5).is_err());
        assert!(complement(-0.1).is_err());
    }

    #[test]
    fn sym_product_commutative_associative() {
        let mut rng = ChaCha8Rng::seed_from_u64(101);
        for _ in 0..10_000 {
            let (a, b, g): (f64, f64, f64) = (rng.gen(), rng.gen(), rng.gen());
            let ab = sym_product(a, b).unwrap();
            let ba = sym_product(b, a).unwrap();
            assert!((ab - ba).abs() < 1e-15);
            let left = sym_product(ab, g).unwrap();
            let right = sym_product(a, sym_product(b, g).unwrap()).unwrap();
            assert!((left - right).abs() < 1e-15);
        }
    }

    #[test]
    fn matrix_vector_calculus() {
        // M(1) = identity; M(1/2) maps everything to v(1/2)
        let m1 = m_matrix(1.0).unwrap();
        assert!((m1.get(0, 0) - 1.0).abs() < 1e-15 && m1.get(1, 0).abs() < 1e-15);
        let mixed = m_matrix(0.5).unwrap().apply(&v_vector(0.9).unwrap()).unwrap();
        assert!((mixed.probs()[0] - 0.5).abs() < 1e-15);
        // M(0.8) v(0.5) = v(0.5)
        let fixed = m_matrix(0.8).unwrap().apply(&v_vector(0.5).unwrap()).unwrap();
        assert!((fixed.probs()[0] - 0.5).abs() < 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(103);
        for _ in 0..200 {
            let (a, b, l): (f64, f64, f64) = (rng.gen(), rng.gen(), rng.gen());
            assert!(m_matrix(a).unwrap().is_doubly_stochastic());
            // M(a) v(l) = v(a*l)
            let got = m_matrix(a).unwrap().apply(&v_vector(l).unwrap()).unwrap();
            let want = v_vector(sym_product(a, l).unwrap()).unwrap();
            assert!((got.probs()[0] - want.probs()[0]).abs() < 1e-14);
            // M(b) M(a) = M(b*a)
            let comp = m_matrix(b).unwrap().compose(&m_matrix(a).unwrap()).unwrap();
            let want = m_matrix(sym_product(b, a).unwrap()).unwrap();
            for y in 0..2 {
                for x in 0..2 {
                    assert!((comp.get(y, x) - want.get(y, x)).abs() < 1e-14);
                }
            }
        }
        // composition example: M(0.7) M(0.9) = M(0.66)
        let comp = m_matrix(0.7).unwrap().compose(&m_matrix(0.9).unwrap()).unwrap();
        assert!((comp.get(0, 0) - 0.66).abs() < 1e-14);
    }

    #[test]
    fn binary_entropy_values() {
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        assert!((binary_entropy(0.5).unwrap() - LN2).abs() < 1e-15);
        assert!((binary_entropy(0.8).unwrap() - 0.500402).abs() < 1e-6);
        let a = 0.23;
        assert!(
            (binary_entropy(a).unwrap() - binary_entropy(1.0 - a).unwrap()).abs() < 1e-15
        );
        // channel noise entropy H(y|x) for M(a) is h(a): each column of M(a)
        // is the two-point law (a, 1-a)
        let col = ProbVec::new(vec![0.8, 0.2]).unwrap();
        assert!(
            (crate::info::shannon_entropy(&col) - binary_entropy(0.8).unwrap()).abs() < 1e-15
        );
    }

    #[test]
    fn h_monotone_grid() {
        assert!(h_monotone_check(1.0, 0.3).unwrap().abs() < 1e-15);
        assert!(h_monotone_check(0.5, 0.3).unwrap() >= 0.0);
        let mut min_slack = f64::INFINITY;
        for i in 0..=20 {
            for j in 0..=20 {
                let (a, l) = (i as f64 / 20.0, j as f64 / 20.0);
                min_slack = min_slack.min(h_monotone_check(a, l).unwrap());
            }
        }
        assert!(min_slack >= -1e-12, "min slack {min_slack}");
    }

    #[test]
    fn bsc_table_matches_generic_pipeline() {
        // (1/2, 1, 1): noiseless transport of a uniform bit
        let t = c1_bsc_table(0.5, 1.0, 1.0).unwrap();
        assert!(t.legs[1].system.closed_form.abs() < 1e-12);
        // (1/2, 0.8, 0.9): measurement-leg joint change is h(0.8)
        let t = c1_bsc_table(0.5, 0.8, 0.9).unwrap();
        assert!((t.legs[0].joint.closed_form - binary_entropy(0.8).unwrap()).abs() < 1e-12);
        assert!((t.legs[0].joint.closed_form - 0.5004).abs() < 1e-4);
        // grid: closed forms equal the generic pipeline and cycles close
        for i in 0..=10 {
            for j in 0..=10 {
                for k in 0..=10 {
                    let (l, a, b) =
                        (i as f64 / 10.0, j as f64 / 10.0, k as f64 / 10.0);
                    let t = c1_bsc_table(l, a, b).unwrap();
                    assert!(
                        t.max_cell_deviation() < 1e-10,
                        "(l,a,b)=({l},{a},{b}): {}",
                        t.max_cell_deviation()
                    );
                    for (s, jt) in t.column_sums() {
                        assert!(s.abs() < 1e-10 && jt.abs() < 1e-10);
                    }
                }
            }
        }
    }
}
