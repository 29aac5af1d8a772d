//! Mutual information between the trine label and a measurement outcome,
//! and the inner maximization over the azimuth of the `V(theta)` basis.

use std::f64::consts::FRAC_PI_3;

use nalgebra::SymmetricEigen;
use rayon::prelude::*;

use crate::error::{check_unit_interval, Result, TrineError};
use crate::geometry::{trine_state, verify_completeness, von_neumann_basis, GeneralPovm, StateEnsemble};
use crate::scalar::grid_then_golden;
use crate::COMPLETENESS_TOL;

/// Probabilities below this are treated as exact zeros.
const PROB_FLOOR: f64 = 1e-300;

/// Grid cells over `[0, pi/3]` used to bracket the optimal azimuth
/// (a step of `pi/300`).
const THETA_CELLS: usize = 100;

/// Default azimuth tolerance for [`optimal_theta`].
pub const THETA_TOL: f64 = 1e-10;

pub fn log2_3() -> f64 {
    3.0f64.log2()
}

/// `x log2 x` with `0 log 0 = 0`.
fn xlog2x(x: f64) -> f64 {
    if x < PROB_FLOOR {
        0.0
    } else {
        x * x.log2()
    }
}

/// Shannon entropy in bits.
pub fn entropy_bits(probs: &[f64]) -> f64 {
    -probs.iter().map(|&p| xlog2x(p)).sum::<f64>()
}

/// Squared overlaps `<V_0(theta)|T_b(alpha)>^2` for `b = 0, 1, 2`. They are
/// the conditional probabilities of the label given the first outcome.
pub fn first_outcome_overlaps(alpha: f64, theta: f64) -> Result<[f64; 3]> {
    let v0 = von_neumann_basis(theta).vectors[0];
    let mut out = [0.0; 3];
    for (b, o) in out.iter_mut().enumerate() {
        *o = v0.dot(&trine_state(alpha, b)?).powi(2);
    }
    Ok(out)
}

/// Mutual information in bits between a uniformly chosen trine `T_b(alpha)`
/// and the outcome of the `V(theta)` measurement.
///
/// Every outcome of `V(theta)` has probability 1/3 and the three outcomes
/// are related by the ensemble symmetry, so only the first one is needed.
pub fn symmetric_info(alpha: f64, theta: f64) -> Result<f64> {
    check_unit_interval("alpha", alpha)?;
    let overlaps = first_outcome_overlaps(alpha, theta)?;
    Ok(log2_3() + overlaps.iter().map(|&q| xlog2x(q)).sum::<f64>())
}

/// Mutual information in bits between the ensemble label and the outcome
/// of an arbitrary rank-one POVM, from the joint distribution
/// `p(b, i) = prior_b * w_i * <v_i|T_b>^2`.
pub fn general_info<E: StateEnsemble + ?Sized>(ensemble: &E, povm: &GeneralPovm) -> Result<f64> {
    let residual = verify_completeness(povm);
    if residual > COMPLETENESS_TOL {
        return Err(TrineError::Incomplete(residual));
    }
    Ok(unchecked_general_info(ensemble, povm))
}

/// [`general_info`] without the completeness check, for inner loops that
/// construct complete POVMs by design.
pub(crate) fn unchecked_general_info<E: StateEnsemble + ?Sized>(ensemble: &E, povm: &GeneralPovm) -> f64 {
    let states = ensemble.states();
    let priors = ensemble.priors();
    let mut info = 0.0;
    for e in &povm.elements {
        let joint: Vec<f64> = states
            .iter()
            .zip(priors)
            .map(|(s, &q)| q * e.weight * e.direction.dot(s).powi(2))
            .collect();
        let outcome: f64 = joint.iter().sum();
        if outcome < PROB_FLOOR {
            continue;
        }
        for (&pj, &q) in joint.iter().zip(priors) {
            if pj >= PROB_FLOOR {
                info += pj * (pj / (q * outcome)).log2();
            }
        }
    }
    info
}

/// Von Neumann entropy in bits of the ensemble's average density matrix,
/// an upper bound on any measurement's mutual information.
pub fn holevo_bound<E: StateEnsemble + ?Sized>(ensemble: &E) -> f64 {
    let eigen = SymmetricEigen::new(ensemble.density_matrix());
    entropy_bits(eigen.eigenvalues.as_slice())
}

/// A sample of the optimized-basis information curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InfoCurvePoint {
    pub alpha_prime: f64,
    /// Maximizing azimuth, in `[0, pi/3]`.
    pub theta_star: f64,
    pub info_bits: f64,
}

/// Maximizes [`symmetric_info`] over `theta` in `[0, pi/3]`, which covers
/// every distinct basis up to the ensemble symmetry. Exact ties resolve
/// toward `theta = 0`.
pub fn optimal_theta(alpha: f64, tol: f64) -> Result<InfoCurvePoint> {
    check_unit_interval("alpha", alpha)?;
    if tol.is_nan() || tol <= 0.0 {
        return Err(TrineError::Domain {
            name: "tol",
            value: tol,
            expected: "(0, inf)",
        });
    }
    let f = |theta: f64| symmetric_info(alpha, theta).expect("alpha checked");
    let best = grid_then_golden(f, 0.0, FRAC_PI_3, THETA_CELLS, tol);
    Ok(InfoCurvePoint {
        alpha_prime: alpha,
        theta_star: best.x,
        info_bits: best.value,
    })
}

/// [`optimal_theta`] at each grid value, evaluated in parallel. Output
/// order follows input order.
pub fn info_curve(alpha_grid: &[f64], tol: f64) -> Result<Vec<InfoCurvePoint>> {
    alpha_grid.par_iter().map(|&a| optimal_theta(a, tol)).collect()
}

/// Optimal azimuths at or below this are counted as having reached zero.
pub const ONSET_THETA: f64 = 1e-3;

/// The smallest lift at which the optimal azimuth has collapsed to zero.
///
/// Bisection on `alpha` in `[lo, hi]` for the switch of the predicate
/// `theta*(alpha) > ONSET_THETA`. Since `theta*` vanishes like a square
/// root at the onset, the threshold biases the result low by
/// roughly `(ONSET_THETA / 1.7)^2 ~ 3.5e-7`.
pub fn theta_onset(lo: f64, hi: f64, tol: f64) -> Result<f64> {
    let above = |a: f64| -> Result<bool> { Ok(optimal_theta(a, THETA_TOL)?.theta_star > ONSET_THETA) };
    if !above(lo)? || above(hi)? {
        return Err(TrineError::Domain {
            name: "lo",
            value: lo,
            expected: "a bracket with theta*(lo) > 0 and theta*(hi) = 0",
        });
    }
    let (mut a, mut b) = (lo, hi);
    while b - a > tol {
        let mid = 0.5 * (a + b);
        if above(mid)? {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}
