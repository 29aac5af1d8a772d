//! The outer optimization over lift mixtures.
//!
//! A symmetric POVM factors into a partial measurement `sqrt(p_i) M(phi_i)`
//! followed by the `V(theta_i)` basis. The first stage maps the ensemble
//! at lift `alpha` to an ensemble at lift `alpha'_i` with probability
//! `p'_i`, independently of the label, so the total information is the
//! `p'`-weighted average of the second-stage informations. Because
//! `sum p'_i alpha'_i = alpha`, the best achievable value is the concave
//! envelope of the optimized-basis curve `I_opt(alpha')`. For small
//! `alpha` that envelope is the chord from `alpha' = 0` to the tangent
//! point `gamma1`, which needs two triples: six outcomes.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_6};

use crate::error::{check_lift_angle, check_unit_interval, Result, TrineError};
use crate::geometry::{balanced_lift, SymmetricPovm, SymmetricTriple, TrineEnsemble};
use crate::info::{general_info, optimal_theta, symmetric_info, InfoCurvePoint, THETA_TOL};
use crate::scalar::grid_then_golden;
use crate::LIFT_LIMIT;

/// Below this, the first-stage outcome is treated as impossible.
const OUTCOME_FLOOR: f64 = 1e-15;

/// Lifts within this distance of `gamma1` take the tangent-point branch.
const TANGENT_SNAP: f64 = 1e-12;

/// Search interval and grid step for the chord tangency.
const GAMMA1_SEARCH_MAX: f64 = 0.2;
const GAMMA1_GRID_STEP: f64 = 1e-3;

/// `alpha sin^2(phi) + (1 - alpha) cos^2(phi) / 2`, the squared norm of
/// `M(phi) T_b(alpha)` divided by three.
fn lift_norm(alpha: f64, phi: f64) -> f64 {
    let (s, c) = phi.sin_cos();
    alpha * s * s + 0.5 * (1.0 - alpha) * c * c
}

/// The lift of the trine left behind by the partial measurement `M(phi)`.
pub fn alpha_prime(alpha: f64, phi: f64) -> Result<f64> {
    check_unit_interval("alpha", alpha)?;
    check_lift_angle(phi)?;
    let denom = lift_norm(alpha, phi);
    if denom < OUTCOME_FLOOR {
        return Err(TrineError::Domain {
            name: "phi",
            value: phi,
            expected: "an angle where M(phi) T(alpha) is nonzero",
        });
    }
    Ok((alpha * phi.sin().powi(2) / denom).clamp(0.0, 1.0))
}

/// Probability of the first-stage outcome `sqrt(p) M(phi)` on any trine.
pub fn p_prime(p: f64, alpha: f64, phi: f64) -> Result<f64> {
    check_unit_interval("alpha", alpha)?;
    check_lift_angle(phi)?;
    Ok(3.0 * p * lift_norm(alpha, phi))
}

/// `(2 - 3 gamma1) / gamma1`, the slope coefficient in the `phi_alpha`
/// denominator.
pub fn phi_alpha_coefficient(gamma1: f64) -> f64 {
    (2.0 - 3.0 * gamma1) / gamma1
}

/// The lift angle whose partial measurement takes `T(alpha)` to
/// `T(gamma1)`: `sin^2(phi) = (1 - alpha) / (1 + alpha (2 - 3 gamma1) / gamma1)`.
pub fn phi_alpha(alpha: f64, gamma1: f64) -> Result<f64> {
    if !(0.0..=gamma1).contains(&alpha) {
        return Err(TrineError::Domain {
            name: "alpha",
            value: alpha,
            expected: "[0, gamma1]",
        });
    }
    let sin2 = (1.0 - alpha) / (1.0 + alpha * phi_alpha_coefficient(gamma1));
    Ok(sin2.clamp(0.0, 1.0).sqrt().asin())
}

/// Slope of the chord from `(0, I_opt(0))` to `(a, I_opt(a))`.
pub fn chord_slope(a: f64, planar_info: f64) -> Result<f64> {
    Ok((optimal_theta(a, THETA_TOL)?.info_bits - planar_info) / a)
}

/// Chord slopes on the search grid `(0, 0.2]`, step `1e-3`.
pub fn chord_slope_profile() -> Result<Vec<(f64, f64)>> {
    let planar = optimal_theta(0.0, THETA_TOL)?.info_bits;
    let cells = (GAMMA1_SEARCH_MAX / GAMMA1_GRID_STEP).round() as usize;
    (1..=cells)
        .map(|k| {
            let a = k as f64 * GAMMA1_GRID_STEP;
            chord_slope(a, planar).map(|s| (a, s))
        })
        .collect()
}

/// Locates `gamma1` as the lift maximizing the chord slope from the planar
/// point, i.e. where that chord is tangent to `I_opt`.
pub fn find_gamma1(tol: f64) -> Result<f64> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(TrineError::Domain {
            name: "tol",
            value: tol,
            expected: "(0, inf)",
        });
    }
    let planar = optimal_theta(0.0, THETA_TOL)?.info_bits;
    let cells = (GAMMA1_SEARCH_MAX / GAMMA1_GRID_STEP).round() as usize - 1;
    let slope = |a: f64| chord_slope(a, planar).expect("grid inside [0, 1]");
    Ok(grid_then_golden(slope, GAMMA1_GRID_STEP, GAMMA1_SEARCH_MAX, cells, tol).x)
}

/// One first-stage outcome of a symmetric POVM and what it leaves behind.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixtureComponent {
    /// Triple weight `p_i`.
    pub p: f64,
    /// Outcome probability `p'_i`.
    pub outcome_prob: f64,
    /// Lift of the residual trine. Set to 1 when the outcome is impossible
    /// (the residual vectors, if any, lie along `z`).
    pub alpha_prime: f64,
    pub theta: f64,
}

/// Pushes the ensemble at lift `alpha` through the partial measurements of
/// each triple.
pub fn mixture_decomposition(alpha: f64, triples: &[SymmetricTriple]) -> Result<Vec<MixtureComponent>> {
    triples
        .iter()
        .map(|t| {
            let outcome_prob = p_prime(t.p, alpha, t.phi)?;
            let alpha_prime = if lift_norm(alpha, t.phi) < OUTCOME_FLOOR {
                1.0
            } else {
                alpha_prime(alpha, t.phi)?
            };
            Ok(MixtureComponent {
                p: t.p,
                outcome_prob,
                alpha_prime,
                theta: t.theta,
            })
        })
        .collect()
}

/// `sum_i p'_i I(alpha'_i, theta_i)`, the chain-rule value of a mixture.
pub fn chain_rule_info(components: &[MixtureComponent]) -> Result<f64> {
    components
        .iter()
        .filter(|c| c.outcome_prob >= OUTCOME_FLOOR)
        .map(|c| Ok(c.outcome_prob * symmetric_info(c.alpha_prime, c.theta)?))
        .sum()
}

/// Absolute difference between the information of the assembled `3m`
/// outcome POVM and its chain-rule decomposition.
pub fn two_stage_check(alpha: f64, triples: &[SymmetricTriple]) -> Result<f64> {
    let povm = SymmetricPovm::new(triples.to_vec())?;
    let direct = general_info(&TrineEnsemble::new(alpha)?, &povm.to_general())?;
    let decomposed = chain_rule_info(&mixture_decomposition(alpha, triples)?)?;
    Ok((direct - decomposed).abs())
}

/// Which construction [`Envelope::optimal_povm`] returned.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// `0 < alpha < gamma1`: planar triple plus lifted triple, six outcomes.
    SixElement,
    /// `alpha = 0`: the lifted triple collapses onto the `z` axis and only
    /// completes the planar anti-trine measurement.
    PlanarLimit,
    /// `alpha = gamma1`: the planar weight vanishes, leaving `V(0)`.
    TangentPoint,
    /// `gamma1 < alpha < 8/9`: the `V(0)` basis alone.
    VonNeumann,
}

impl Branch {
    pub fn is_degenerate(self) -> bool {
        matches!(self, Branch::PlanarLimit | Branch::TangentPoint)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeSolution {
    pub alpha: f64,
    pub info_bits: f64,
    pub povm: SymmetricPovm,
    pub mixture: Vec<MixtureComponent>,
    pub branch: Branch,
}

/// The two endpoints of the chord, computed once for a given `gamma1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Envelope {
    gamma1: f64,
    planar: InfoCurvePoint,
    tangent: InfoCurvePoint,
}

impl Envelope {
    pub fn new(gamma1: f64) -> Result<Self> {
        if !(gamma1 > 0.0 && gamma1 < LIFT_LIMIT) {
            return Err(TrineError::Domain {
                name: "gamma1",
                value: gamma1,
                expected: "(0, 8/9)",
            });
        }
        Ok(Envelope {
            gamma1,
            planar: optimal_theta(0.0, THETA_TOL)?,
            tangent: optimal_theta(gamma1, THETA_TOL)?,
        })
    }

    /// Runs [`find_gamma1`] and builds the envelope on the result.
    pub fn discover(tol: f64) -> Result<Self> {
        Envelope::new(find_gamma1(tol)?)
    }

    pub fn gamma1(&self) -> f64 {
        self.gamma1
    }

    pub fn planar_point(&self) -> InfoCurvePoint {
        self.planar
    }

    pub fn tangent_point(&self) -> InfoCurvePoint {
        self.tangent
    }

    /// Height of the chord at `alpha`.
    pub fn chord(&self, alpha: f64) -> f64 {
        self.planar.info_bits + alpha / self.gamma1 * (self.tangent.info_bits - self.planar.info_bits)
    }

    pub fn optimal_povm(&self, alpha: f64) -> Result<EnvelopeSolution> {
        check_unit_interval("alpha", alpha)?;
        if alpha >= LIFT_LIMIT {
            return Err(TrineError::UnsupportedRegime(alpha));
        }

        let (triples, branch, info_bits) = if alpha == 0.0 {
            let triples = vec![
                SymmetricTriple::new(2.0 / 3.0, 0.0, FRAC_PI_6)?,
                SymmetricTriple::new(1.0 / 3.0, FRAC_PI_2, 0.0)?,
            ];
            (triples, Branch::PlanarLimit, self.planar.info_bits)
        } else if (alpha - self.gamma1).abs() <= TANGENT_SNAP {
            let triples = vec![SymmetricTriple::new(1.0, balanced_lift(), 0.0)?];
            (triples, Branch::TangentPoint, self.tangent.info_bits)
        } else if alpha < self.gamma1 {
            let phi = phi_alpha(alpha, self.gamma1)?;
            // the unique weights solving sum p = 1, sum p sin^2 = 1/3
            let lifted = 1.0 / (3.0 * phi.sin().powi(2));
            let triples = vec![
                SymmetricTriple::new(1.0 - lifted, 0.0, FRAC_PI_6)?,
                SymmetricTriple::new(lifted, phi, 0.0)?,
            ];
            (triples, Branch::SixElement, self.chord(alpha))
        } else {
            let triples = vec![SymmetricTriple::new(1.0, balanced_lift(), 0.0)?];
            (triples, Branch::VonNeumann, symmetric_info(alpha, 0.0)?)
        };

        let mixture = mixture_decomposition(alpha, &triples)?;
        Ok(EnvelopeSolution {
            alpha,
            info_bits,
            povm: SymmetricPovm::new(triples)?,
            mixture,
            branch,
        })
    }

    /// The accessible information on `[0, gamma1]`, where it is the chord.
    pub fn accessible_information(&self, alpha: f64) -> Result<EnvelopeSolution> {
        if !(0.0..=self.gamma1).contains(&alpha) {
            return Err(TrineError::Domain {
                name: "alpha",
                value: alpha,
                expected: "[0, gamma1]",
            });
        }
        self.optimal_povm(alpha)
    }
}
