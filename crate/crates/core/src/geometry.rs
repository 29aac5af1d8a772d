//! States, measurement directions and matrices for the lifted trine ensemble.
//!
//! Everything here is a closed-form constructor. The three trine states are
//! the planar trines tilted out of the `x,y` plane until their common `z`
//! component is `sqrt(alpha)`. Measurements that respect the three-fold
//! symmetry come in triples `sqrt(p) * P_b(phi, theta)`, where `phi` is the
//! elevation above the plane and `theta` the azimuth of the first vector.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::{Matrix3, Vector3};

use crate::error::{check_lift_angle, check_unit_interval, Result, TrineError};
use crate::{COMPLETENESS_TOL, IDENTITY_TOL};

pub type RealVec3 = Vector3<f64>;
pub type RealMat3 = Matrix3<f64>;

/// Rotation by a third of a turn about the `z` axis.
pub const THIRD_TURN: f64 = 2.0 * PI / 3.0;

/// Azimuth offsets of the three members of a symmetric triple, in the
/// order `b = 0, 1, 2`.
const TRIPLE_OFFSETS: [f64; 3] = [0.0, THIRD_TURN, -THIRD_TURN];

/// The elevation with `sin^2(phi) = 1/3`, where the lift matrix is the
/// identity and a triple is an orthonormal basis.
pub fn balanced_lift() -> f64 {
    (1.0 / 3.0f64).sqrt().asin()
}

pub fn rotate_z(v: &RealVec3, angle: f64) -> RealVec3 {
    let (s, c) = angle.sin_cos();
    RealVec3::new(c * v.x - s * v.y, s * v.x + c * v.y, v.z)
}

/// Max-entry deviation of a 3x3 matrix from the identity.
pub fn identity_residual(m: &RealMat3) -> f64 {
    (m - RealMat3::identity()).amax()
}

/// Reduces an azimuth to its representative in `[0, pi/3]` under the
/// symmetry group of the ensemble (rotations by `2 pi / 3` and the
/// reflection `theta -> -theta`).
pub fn canonical_theta(theta: f64) -> f64 {
    let t = theta.rem_euclid(THIRD_TURN);
    if t > THIRD_TURN / 2.0 {
        THIRD_TURN - t
    } else {
        t
    }
}

/// The lifted trine state `T_b(alpha)`.
pub fn trine_state(alpha: f64, b: usize) -> Result<RealVec3> {
    check_unit_interval("alpha", alpha)?;
    let planar = (1.0 - alpha).sqrt();
    let lift = alpha.sqrt();
    let half_root3 = 3.0f64.sqrt() / 2.0;
    match b {
        0 => Ok(RealVec3::new(planar, 0.0, lift)),
        1 => Ok(RealVec3::new(-0.5 * planar, half_root3 * planar, lift)),
        2 => Ok(RealVec3::new(-0.5 * planar, -half_root3 * planar, lift)),
        _ => Err(TrineError::Domain {
            name: "b",
            value: b as f64,
            expected: "{0, 1, 2}",
        }),
    }
}

/// A finite ensemble of real pure states with prior probabilities.
pub trait StateEnsemble {
    fn states(&self) -> &[RealVec3];
    fn priors(&self) -> &[f64];

    /// The average density matrix `sum_b prior_b |T_b><T_b|`.
    fn density_matrix(&self) -> RealMat3 {
        self.states()
            .iter()
            .zip(self.priors())
            .fold(RealMat3::zeros(), |acc, (s, &q)| acc + q * s * s.transpose())
    }
}

/// The three lifted trine states with equal priors.
#[derive(Debug, Clone, PartialEq)]
pub struct TrineEnsemble {
    alpha: f64,
    states: [RealVec3; 3],
}

const UNIFORM_PRIORS: [f64; 3] = [1.0 / 3.0; 3];

impl TrineEnsemble {
    pub fn new(alpha: f64) -> Result<Self> {
        Ok(TrineEnsemble {
            alpha,
            states: [trine_state(alpha, 0)?, trine_state(alpha, 1)?, trine_state(alpha, 2)?],
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

impl StateEnsemble for TrineEnsemble {
    fn states(&self) -> &[RealVec3] {
        &self.states
    }

    fn priors(&self) -> &[f64] {
        &UNIFORM_PRIORS
    }
}

/// An arbitrary ensemble, mostly useful for checks against degenerate inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    pub states: Vec<RealVec3>,
    pub priors: Vec<f64>,
}

impl StateEnsemble for Ensemble {
    fn states(&self) -> &[RealVec3] {
        &self.states
    }

    fn priors(&self) -> &[f64] {
        &self.priors
    }
}

/// The unit vectors `P_0, P_1, P_2` of a symmetric triple.
pub fn povm_triple_vectors(phi: f64, theta: f64) -> Result<[RealVec3; 3]> {
    check_lift_angle(phi)?;
    let (sin_phi, cos_phi) = phi.sin_cos();
    Ok(TRIPLE_OFFSETS.map(|offset| {
        let (s, c) = (theta + offset).sin_cos();
        RealVec3::new(cos_phi * c, cos_phi * s, sin_phi)
    }))
}

/// One orbit `sqrt(p) * P_b(phi, theta)` of rank-one POVM elements.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetricTriple {
    pub p: f64,
    pub phi: f64,
    pub theta: f64,
}

impl SymmetricTriple {
    pub fn new(p: f64, phi: f64, theta: f64) -> Result<Self> {
        if !(p > 0.0 && p <= 1.0) {
            return Err(TrineError::NonPositiveWeight(p));
        }
        check_lift_angle(phi)?;
        Ok(SymmetricTriple { p, phi, theta })
    }

    /// Unit directions of the three elements.
    pub fn directions(&self) -> [RealVec3; 3] {
        povm_triple_vectors(self.phi, self.theta).expect("phi validated on construction")
    }

    /// The scaled vectors `sqrt(p) * P_b`.
    pub fn vectors(&self) -> [RealVec3; 3] {
        let scale = self.p.sqrt();
        self.directions().map(|v| scale * v)
    }

    pub fn sin2_phi(&self) -> f64 {
        self.phi.sin().powi(2)
    }
}

/// Residuals `(|sum p - 1|, |sum p sin^2(phi) - 1/3|)` of the two POVM
/// conditions for symmetric triples.
pub fn triple_constraint_residuals(triples: &[SymmetricTriple]) -> (f64, f64) {
    let weight: f64 = triples.iter().map(|t| t.p).sum();
    let lift: f64 = triples.iter().map(|t| t.p * t.sin2_phi()).sum();
    ((weight - 1.0).abs(), (lift - 1.0 / 3.0).abs())
}

/// A list of symmetric triples known to satisfy the POVM conditions.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricPovm {
    triples: Vec<SymmetricTriple>,
}

impl SymmetricPovm {
    pub fn new(triples: Vec<SymmetricTriple>) -> Result<Self> {
        let (weight_residual, lift_residual) = triple_constraint_residuals(&triples);
        if weight_residual > COMPLETENESS_TOL || lift_residual > COMPLETENESS_TOL {
            return Err(TrineError::InvalidTriples {
                weight_residual,
                lift_residual,
            });
        }
        Ok(SymmetricPovm { triples })
    }

    pub fn triples(&self) -> &[SymmetricTriple] {
        &self.triples
    }

    pub fn to_general(&self) -> GeneralPovm {
        GeneralPovm::new(
            self.triples
                .iter()
                .flat_map(|t| t.directions().map(|d| PovmElement::new(t.p, d)))
                .collect(),
        )
    }
}

/// A rank-one element `weight * |direction><direction|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PovmElement {
    pub weight: f64,
    pub direction: RealVec3,
}

impl PovmElement {
    pub fn new(weight: f64, direction: RealVec3) -> Self {
        PovmElement { weight, direction }
    }

    /// Splits an unnormalized vector `u` into `|u|^2` and `u / |u|`.
    pub fn from_vector(u: &RealVec3) -> Self {
        let norm = u.norm();
        if norm == 0.0 {
            PovmElement::new(0.0, RealVec3::z())
        } else {
            PovmElement::new(norm * norm, u / norm)
        }
    }

    pub fn operator(&self) -> RealMat3 {
        self.weight * self.direction * self.direction.transpose()
    }

    /// The vector `sqrt(weight) * direction`.
    pub fn vector(&self) -> RealVec3 {
        self.weight.sqrt() * self.direction
    }
}

/// A rank-one POVM with no symmetry assumed. Completeness is not enforced
/// on construction; see [`verify_completeness`].
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GeneralPovm {
    pub elements: Vec<PovmElement>,
}

impl GeneralPovm {
    pub fn new(elements: Vec<PovmElement>) -> Self {
        GeneralPovm { elements }
    }

    pub fn from_vectors(vectors: &[RealVec3]) -> Self {
        GeneralPovm::new(vectors.iter().map(PovmElement::from_vector).collect())
    }

    /// An orthonormal basis measured with unit weights.
    pub fn from_basis(basis: &[RealVec3; 3]) -> Self {
        GeneralPovm::new(basis.iter().map(|v| PovmElement::new(1.0, *v)).collect())
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn element_sum(&self) -> RealMat3 {
        self.elements
            .iter()
            .fold(RealMat3::zeros(), |acc, e| acc + e.operator())
    }
}

/// Builds the `3m` rank-one elements of a list of triples, rejecting lists
/// that violate the POVM conditions by more than the completeness tolerance.
pub fn assemble_symmetric_povm(triples: &[SymmetricTriple]) -> Result<GeneralPovm> {
    SymmetricPovm::new(triples.to_vec()).map(|p| p.to_general())
}

/// Max-entry deviation of the element sum from the identity.
pub fn verify_completeness(povm: &GeneralPovm) -> f64 {
    identity_residual(&povm.element_sum())
}

/// The diagonal partial-measurement operator `M(phi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LiftMatrix {
    pub phi: f64,
    pub matrix: RealMat3,
}

pub fn lift_matrix(phi: f64) -> Result<LiftMatrix> {
    check_lift_angle(phi)?;
    let (sin_phi, cos_phi) = phi.sin_cos();
    let planar = 1.5f64.sqrt() * cos_phi;
    let vertical = 3.0f64.sqrt() * sin_phi;
    Ok(LiftMatrix {
        phi,
        matrix: RealMat3::from_diagonal(&RealVec3::new(planar, planar, vertical)),
    })
}

/// The orthonormal basis `V_0, V_1, V_2` with common `z` component
/// `1/sqrt(3)` and first azimuth `theta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VonNeumannBasis {
    pub theta: f64,
    pub vectors: [RealVec3; 3],
}

impl VonNeumannBasis {
    pub fn gram_residual(&self) -> f64 {
        let m = RealMat3::from_columns(&self.vectors);
        identity_residual(&(m.transpose() * m))
    }

    pub fn to_povm(&self) -> GeneralPovm {
        GeneralPovm::from_basis(&self.vectors)
    }
}

pub fn von_neumann_basis(theta: f64) -> VonNeumannBasis {
    let radial = (2.0f64 / 3.0).sqrt();
    let z = 1.0 / 3.0f64.sqrt();
    VonNeumannBasis {
        theta,
        vectors: TRIPLE_OFFSETS.map(|offset| {
            let (s, c) = (theta + offset).sin_cos();
            RealVec3::new(radial * c, radial * s, z)
        }),
    }
}

/// Largest entry deviation between `V_b(theta)^T M(phi)` and `P_b(phi, theta)`
/// over the three members.
pub fn factorization_check(phi: f64, theta: f64) -> f64 {
    let phi = phi.clamp(0.0, FRAC_PI_2);
    let lift = lift_matrix(phi).expect("clamped").matrix;
    let basis = von_neumann_basis(theta);
    let direct = povm_triple_vectors(phi, theta).expect("clamped");
    basis
        .vectors
        .iter()
        .zip(&direct)
        .map(|(v, p)| (lift.transpose() * v - p).amax())
        .fold(0.0, f64::max)
}

/// Deviation from the identity of `sum_i p_i M(phi_i)^2`, the completeness
/// condition of the first-stage partial measurement.
pub fn partial_measurement_residual(triples: &[SymmetricTriple]) -> f64 {
    let sum = triples.iter().fold(RealMat3::zeros(), |acc, t| {
        let m = lift_matrix(t.phi).expect("phi validated").matrix;
        acc + t.p * m.transpose() * m
    });
    identity_residual(&sum)
}

/// Checks a unit vector against the algebraic-identity tolerance.
pub fn is_unit(v: &RealVec3) -> bool {
    (v.norm() - 1.0).abs() <= IDENTITY_TOL
}
