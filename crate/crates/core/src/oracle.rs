//! Brute-force and local searches that witness the envelope construction.
//!
//! None of these use the chord or `gamma1`; they only evaluate
//! [`general_info`] on explicitly assembled POVMs. Every random draw comes
//! from a ChaCha stream keyed by `(seed, index)`, so reports do not depend
//! on how rayon schedules the work.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, PI};
use std::fmt;

use nalgebra::{Rotation3, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use rayon::prelude::*;

use crate::error::{Result, TrineError};
use crate::geometry::{
    balanced_lift, identity_residual, verify_completeness, GeneralPovm, PovmElement, RealMat3, RealVec3,
    SymmetricTriple, TrineEnsemble,
};
use crate::info::{general_info, log2_3, unchecked_general_info};
use crate::COMPLETENESS_TOL;

/// An RNG for stream `stream` of `seed`.
pub fn seeded_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Draws `m` symmetric triples satisfying `sum p = 1` and
/// `sum p sin^2(phi) = 1/3`.
///
/// Weights are Dirichlet(1); the `sin^2(phi)` values start uniform and are
/// then contracted toward 1/3 about their weighted mean, by a random
/// fraction of the largest contraction that keeps them in `[0, 1]`.
pub fn random_valid_mixture<R: Rng + ?Sized>(rng: &mut R, m: usize) -> Vec<SymmetricTriple> {
    assert!(m >= 1, "a mixture needs at least one triple");
    let raw: Vec<f64> = (0..m).map(|_| rng.sample::<f64, _>(Exp1) + 1e-3).collect();
    let total: f64 = raw.iter().sum();
    let weights: Vec<f64> = raw.iter().map(|w| w / total).collect();

    let s: Vec<f64> = (0..m).map(|_| rng.random::<f64>()).collect();
    let mean: f64 = weights.iter().zip(&s).map(|(w, s)| w * s).sum();
    let room = s
        .iter()
        .map(|&si| {
            let d = si - mean;
            if d > 0.0 {
                (2.0 / 3.0) / d
            } else if d < 0.0 {
                (1.0 / 3.0) / -d
            } else {
                f64::INFINITY
            }
        })
        .fold(f64::INFINITY, f64::min);
    let scale = if room.is_finite() {
        room * rng.random_range(0.05..1.0)
    } else {
        0.0
    };

    weights
        .iter()
        .zip(&s)
        .map(|(&p, &si)| {
            let lifted = (1.0 / 3.0 + scale * (si - mean)).clamp(0.0, 1.0);
            let theta = rng.random_range(0.0..2.0 * PI);
            SymmetricTriple::new(p, lifted.sqrt().asin(), theta).expect("weights in (0, 1]")
        })
        .collect()
}

/// Grid sizes for [`grid_search_symmetric`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Resolution {
    /// Points on `phi` in `[0, pi/2]`.
    pub phi_points: usize,
    /// Points on `theta` in `[0, pi/3]`.
    pub theta_points: usize,
    /// Interior points on the free weight in `(0, 1)`; used when `m = 3`.
    pub weight_points: usize,
}

impl Resolution {
    pub const COARSE: Resolution = Resolution {
        phi_points: 19,
        theta_points: 7,
        weight_points: 9,
    };

    /// `phi` in steps of `pi/200`, `theta` in 3 degree steps.
    pub const FINE: Resolution = Resolution {
        phi_points: 101,
        theta_points: 21,
        weight_points: 19,
    };
}

fn linspace(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![lo],
        n => (0..n)
            .map(|k| {
                if k + 1 == n {
                    hi
                } else {
                    lo + (hi - lo) * k as f64 / (n - 1) as f64
                }
            })
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SearchParameters {
    Mixture(Vec<SymmetricTriple>),
    /// ZYZ Euler angles of the rotation whose columns are the basis.
    Basis {
        euler: [f64; 3],
        vectors: [RealVec3; 3],
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchBest {
    pub info_bits: f64,
    pub parameters: SearchParameters,
}

/// Result of an oracle search. `best` is `None` when no grid point
/// satisfied the constraints.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchReport {
    pub alpha: f64,
    pub best: Option<SearchBest>,
    pub evaluations: u64,
    pub seed: u64,
}

impl SearchReport {
    pub fn best_info_bits(&self) -> Option<f64> {
        self.best.as_ref().map(|b| b.info_bits)
    }

    pub fn is_empty(&self) -> bool {
        self.best.is_none()
    }
}

impl fmt::Display for SearchReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "alpha={:.6} ", self.alpha)?;
        match &self.best {
            None => write!(f, "best_info_bits=none")?,
            Some(best) => {
                write!(f, "best_info_bits={:.12} ", best.info_bits)?;
                match &best.parameters {
                    SearchParameters::Mixture(triples) => {
                        write!(f, "mixture=")?;
                        for (i, t) in triples.iter().enumerate() {
                            let sep = if i == 0 { "" } else { ";" };
                            write!(f, "{sep}{:.6}:{:.6}:{:.6}", t.p, t.phi, t.theta)?;
                        }
                    }
                    SearchParameters::Basis { euler, .. } => {
                        write!(f, "basis_zyz={:.6}:{:.6}:{:.6}", euler[0], euler[1], euler[2])?;
                    }
                }
            }
        }
        write!(f, " evaluations={} seed={}", self.evaluations, self.seed)
    }
}

/// Keeps the larger value; equal values keep the smaller index.
fn better<T>(a: Option<(f64, usize, T)>, b: Option<(f64, usize, T)>) -> Option<(f64, usize, T)> {
    match (a, b) {
        (None, x) | (x, None) => x,
        (Some(a), Some(b)) => {
            if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
                Some(b)
            } else {
                Some(a)
            }
        }
    }
}

fn mixture_info(ensemble: &TrineEnsemble, triples: &[SymmetricTriple]) -> f64 {
    let povm = GeneralPovm::new(
        triples
            .iter()
            .flat_map(|t| t.directions().map(|d| PovmElement::new(t.p, d)))
            .collect(),
    );
    general_info(ensemble, &povm).expect("weights solved from the completeness conditions")
}

/// Every assignment of grid azimuths to `m` triples, as index tuples.
fn theta_assignments(theta_points: usize, m: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..m {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..theta_points).map(move |k| {
                    let mut next = prefix.clone();
                    next.push(k);
                    next
                })
            })
            .collect();
    }
    out
}

/// Lift-and-weight skeletons `(p_i, phi_i)` for `m` triples on the grid,
/// with weights eliminated through the two POVM conditions.
fn weight_skeletons(m: usize, res: Resolution) -> Vec<Vec<(f64, f64)>> {
    const MIN_WEIGHT: f64 = 1e-12;
    let phis = linspace(0.0, FRAC_PI_2, res.phi_points);
    let sin2 = |phi: f64| phi.sin().powi(2);
    let third = 1.0 / 3.0;
    match m {
        1 => vec![vec![(1.0, balanced_lift())]],
        2 => {
            let mut out = Vec::new();
            for &lo in &phis {
                for &hi in &phis {
                    let (s1, s2) = (sin2(lo), sin2(hi));
                    if s1 < third && s2 > third {
                        let p1 = (s2 - third) / (s2 - s1);
                        if p1 > MIN_WEIGHT && 1.0 - p1 > MIN_WEIGHT {
                            out.push(vec![(p1, lo), (1.0 - p1, hi)]);
                        }
                    }
                }
            }
            out
        }
        3 => {
            let free = linspace(0.0, 1.0, res.weight_points + 2);
            let free = &free[1..free.len().saturating_sub(1)];
            let mut out = Vec::new();
            for (i, &a) in phis.iter().enumerate() {
                for &b in &phis[i + 1..] {
                    for &c in &phis {
                        let (s1, s2, s3) = (sin2(a), sin2(b), sin2(c));
                        for &p3 in free {
                            let rest = 1.0 - p3;
                            let target = third - p3 * s3;
                            let p1 = (target - rest * s2) / (s1 - s2);
                            let p2 = rest - p1;
                            if p1 > MIN_WEIGHT && p2 > MIN_WEIGHT {
                                out.push(vec![(p1, a), (p2, b), (p3, c)]);
                            }
                        }
                    }
                }
            }
            out
        }
        _ => Vec::new(),
    }
}

/// Best mutual information over grid-sampled mixtures of `m` symmetric
/// triples (`1 <= m <= 3`). The lifts and, for `m = 3`, one weight come
/// from the grid; the remaining weights are solved from the POVM
/// conditions. With `m = 1` the only feasible lift is `sin^2(phi) = 1/3`.
pub fn grid_search_symmetric(alpha: f64, m: usize, res: Resolution) -> Result<SearchReport> {
    if !(1..=3).contains(&m) {
        return Err(TrineError::Domain {
            name: "m",
            value: m as f64,
            expected: "{1, 2, 3}",
        });
    }
    let ensemble = TrineEnsemble::new(alpha)?;
    let thetas = linspace(0.0, FRAC_PI_3, res.theta_points);
    let skeletons = weight_skeletons(m, res);
    let assignments = theta_assignments(thetas.len(), m);
    let per_skeleton = assignments.len();

    let best = skeletons
        .par_iter()
        .enumerate()
        .map(|(si, skeleton)| {
            let mut local = None;
            for (ai, assignment) in assignments.iter().enumerate() {
                let triples: Vec<SymmetricTriple> = skeleton
                    .iter()
                    .zip(assignment)
                    .map(|(&(p, phi), &k)| SymmetricTriple::new(p, phi, thetas[k]).expect("grid values in range"))
                    .collect();
                let value = mixture_info(&ensemble, &triples);
                local = better(local, Some((value, si * per_skeleton + ai, triples)));
            }
            local
        })
        .reduce(|| None, better);

    Ok(SearchReport {
        alpha,
        best: best.map(|(info_bits, _, triples)| SearchBest {
            info_bits,
            parameters: SearchParameters::Mixture(triples),
        }),
        evaluations: (skeletons.len() * per_skeleton) as u64,
        seed: 0,
    })
}

fn euler_basis(euler: [f64; 3]) -> [RealVec3; 3] {
    let r = Rotation3::from_axis_angle(&RealVec3::z_axis(), euler[0])
        * Rotation3::from_axis_angle(&RealVec3::y_axis(), euler[1])
        * Rotation3::from_axis_angle(&RealVec3::z_axis(), euler[2]);
    let m = r.matrix();
    [m.column(0).into(), m.column(1).into(), m.column(2).into()]
}

fn basis_info(ensemble: &TrineEnsemble, euler: [f64; 3]) -> f64 {
    unchecked_general_info(ensemble, &GeneralPovm::from_basis(&euler_basis(euler)))
}

/// Local refinement starts taken from the best grid cells.
const BASIS_STARTS: usize = 8;
const BASIS_PROPOSALS: usize = 16;
const BASIS_MIN_STEP: f64 = 1e-10;
const BASIS_MAX_ROUNDS: usize = 4000;

/// Best mutual information over all orthonormal bases, i.e. over all von
/// Neumann measurements.
///
/// Bases are rotations `Rz(a) Ry(b) Rz(c)` of the standard axes. A grid of
/// `resolution` points per angle is evaluated, and the best
/// [`BASIS_STARTS`] cells are refined by a seeded random local search whose
/// step halves whenever a round of proposals fails to improve.
pub fn best_von_neumann(alpha: f64, resolution: usize, seed: u64) -> Result<SearchReport> {
    let ensemble = TrineEnsemble::new(alpha)?;
    let n = resolution.max(2);
    let az = linspace(0.0, 2.0 * PI, n + 1)[..n].to_vec();
    let tilt = linspace(0.0, PI, n);
    let mut cells = Vec::with_capacity(n * n * n);
    for &a in &az {
        for &b in &tilt {
            for &c in &az {
                cells.push([a, b, c]);
            }
        }
    }

    let mut scored: Vec<(f64, usize)> = cells
        .par_iter()
        .enumerate()
        .map(|(i, &e)| (basis_info(&ensemble, e), i))
        .collect();
    scored.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)));

    let initial_step = PI / n as f64;
    let refined = scored
        .iter()
        .take(BASIS_STARTS)
        .enumerate()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(start, &(value, cell))| {
            let mut rng = seeded_rng(seed, start as u64);
            let mut point = cells[cell];
            let mut value = value;
            let mut step = initial_step;
            let mut evaluations = 0u64;
            for _ in 0..BASIS_MAX_ROUNDS {
                if step < BASIS_MIN_STEP {
                    break;
                }
                let mut round_best: Option<([f64; 3], f64)> = None;
                for _ in 0..BASIS_PROPOSALS {
                    let candidate = point.map(|x| x + step * rng.sample::<f64, _>(StandardNormal));
                    let v = basis_info(&ensemble, candidate);
                    evaluations += 1;
                    if v > value && round_best.is_none_or(|(_, b)| v > b) {
                        round_best = Some((candidate, v));
                    }
                }
                match round_best {
                    Some((p, v)) => {
                        point = p;
                        value = v;
                    }
                    None => step *= 0.5,
                }
            }
            (value, start, point, evaluations)
        })
        .collect::<Vec<_>>();

    let extra: u64 = refined.iter().map(|r| r.3).sum();
    let best = refined
        .into_iter()
        .map(|(v, start, point, _)| Some((v, start, point)))
        .fold(None, better);

    Ok(SearchReport {
        alpha,
        best: best.map(|(info_bits, _, euler)| SearchBest {
            info_bits,
            parameters: SearchParameters::Basis {
                euler,
                vectors: euler_basis(euler),
            },
        }),
        evaluations: cells.len() as u64 + extra,
        seed,
    })
}

/// Outcome of [`local_perturbation_test`].
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationReport {
    /// Information gained by the end of the walk over the starting POVM.
    pub max_improvement: f64,
    /// Trials that were accepted as improvements.
    pub accepted: usize,
    /// Trials rejected because the perturbed elements no longer spanned
    /// the space.
    pub rejected: usize,
    pub final_povm: GeneralPovm,
}

/// Trials evaluated per round of [`local_perturbation_test`].
pub const PERTURBATION_BATCH: usize = 100;

/// Smallest eigenvalue of the perturbed element sum that is still
/// corrected back to the identity.
const MIN_FRAME_EIGENVALUE: f64 = 1e-8;

/// Maps vectors `u_i` with `S = sum u_i u_i^T` invertible to
/// `S^{-1/2} u_i`, which sum to the identity.
fn project_to_povm(vectors: &[RealVec3]) -> Option<Vec<RealVec3>> {
    let frame = vectors.iter().fold(RealMat3::zeros(), |acc, u| acc + u * u.transpose());
    let eigen = SymmetricEigen::new(frame);
    if eigen.eigenvalues.min() < MIN_FRAME_EIGENVALUE {
        return None;
    }
    let inv_sqrt = eigen.eigenvalues.map(|l| 1.0 / l.sqrt());
    let correction = eigen.eigenvectors * RealMat3::from_diagonal(&inv_sqrt) * eigen.eigenvectors.transpose();
    let projected: Vec<RealVec3> = vectors.iter().map(|u| correction * u).collect();
    let sum = projected
        .iter()
        .fold(RealMat3::zeros(), |acc, u| acc + u * u.transpose());
    (identity_residual(&sum) <= COMPLETENESS_TOL).then_some(projected)
}

/// Greedy random walk on POVMs near `povm`, looking for more information.
///
/// Each element is first split into two half-weight copies (the same
/// measurement, but it lets outcomes separate). Trials are processed in
/// rounds of [`PERTURBATION_BATCH`]: trial `t` adds Gaussian noise of
/// size `step` to every vector `sqrt(w_i) v_i` using stream `t` of `seed`,
/// projects back onto the completeness constraint, and the best
/// improving trial of the round, if any, becomes the new point.
pub fn local_perturbation_test(
    alpha: f64,
    povm: &GeneralPovm,
    trials: usize,
    step: f64,
    seed: u64,
) -> Result<PerturbationReport> {
    let ensemble = TrineEnsemble::new(alpha)?;
    let residual = verify_completeness(povm);
    if residual > COMPLETENESS_TOL {
        return Err(TrineError::Incomplete(residual));
    }

    let mut current: Vec<RealVec3> = povm
        .elements
        .iter()
        .flat_map(|e| {
            let half = PovmElement::new(0.5 * e.weight, e.direction).vector();
            [half, half]
        })
        .collect();
    let initial = unchecked_general_info(&ensemble, &GeneralPovm::from_vectors(&current));
    let mut value = initial;
    let (mut accepted, mut rejected) = (0, 0);

    for round in (0..trials).step_by(PERTURBATION_BATCH) {
        let end = (round + PERTURBATION_BATCH).min(trials);
        let outcomes: Vec<Option<(f64, usize, Vec<RealVec3>)>> = (round..end)
            .into_par_iter()
            .map(|t| {
                let mut rng = seeded_rng(seed, t as u64);
                let moved: Vec<RealVec3> = current
                    .iter()
                    .map(|u| u + step * RealVec3::from_fn(|_, _| rng.sample::<f64, _>(StandardNormal)))
                    .collect();
                project_to_povm(&moved).map(|p| {
                    let v = unchecked_general_info(&ensemble, &GeneralPovm::from_vectors(&p));
                    (v, t, p)
                })
            })
            .collect();
        rejected += outcomes.iter().filter(|o| o.is_none()).count();
        if let Some((v, _, p)) = outcomes.into_iter().fold(None, better) {
            if v > value {
                value = v;
                current = p;
                accepted += 1;
            }
        }
    }

    Ok(PerturbationReport {
        max_improvement: value - initial,
        accepted,
        rejected,
        final_povm: GeneralPovm::from_vectors(&current),
    })
}

/// Upper bound used to sanity-check reports.
pub fn info_ceiling() -> f64 {
    log2_3()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envelope::{mixture_decomposition, two_stage_check};
    use crate::geometry::{triple_constraint_residuals, von_neumann_basis};
    use crate::info::symmetric_info;

    #[test]
    fn random_mixtures_are_valid() {
        for seed in 0..200 {
            let mut rng = seeded_rng(seed, 0);
            let m = 1 + (seed as usize % 4);
            let triples = random_valid_mixture(&mut rng, m);
            assert_eq!(triples.len(), m);
            let (w, l) = triple_constraint_residuals(&triples);
            assert!(w <= 1e-12 && l <= 1e-12, "seed {seed}: {w} {l}");
            assert!(two_stage_check(0.04, &triples).unwrap() <= 1e-10);
            let mix = mixture_decomposition(0.04, &triples).unwrap();
            let pp: f64 = mix.iter().map(|c| c.outcome_prob).sum();
            assert!((pp - 1.0).abs() <= 1e-10);
        }
    }

    #[test]
    fn streams_are_independent_of_order() {
        let a: f64 = seeded_rng(7, 3).random();
        let _ = seeded_rng(7, 2).random::<f64>();
        let b: f64 = seeded_rng(7, 3).random();
        assert_eq!(a, b);
        assert_ne!(a, seeded_rng(7, 4).random::<f64>());
    }

    #[test]
    fn single_triple_grid_is_the_basis_family() {
        let report = grid_search_symmetric(0.0, 1, Resolution::FINE).unwrap();
        let best = report.best.unwrap();
        assert!((best.info_bits - (log2_3() - 1.0)).abs() < 1e-12);
        match best.parameters {
            SearchParameters::Mixture(t) => {
                assert_eq!(t.len(), 1);
                assert!((t[0].theta - std::f64::consts::FRAC_PI_6).abs() < 1e-12);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(report.evaluations, 21);
    }

    #[test]
    fn infeasible_grid_gives_empty_report() {
        let res = Resolution {
            phi_points: 1,
            theta_points: 5,
            weight_points: 3,
        };
        let report = grid_search_symmetric(0.03, 2, res).unwrap();
        assert!(report.is_empty());
        assert_eq!(report.evaluations, 0);
        assert!(report.to_string().contains("best_info_bits=none"));
        assert!(grid_search_symmetric(0.03, 4, res).is_err());
    }

    #[test]
    fn three_triple_grid_stays_below_log3() {
        let report = grid_search_symmetric(0.03, 3, Resolution::COARSE).unwrap();
        let v = report.best_info_bits().unwrap();
        assert!(v <= info_ceiling());
        assert!(v > symmetric_info(0.03, 0.0).unwrap());
    }

    #[test]
    fn euler_bases_are_orthonormal() {
        for e in [[0.1, 0.2, 0.3], [3.0, 1.0, -2.0], [0.0, 0.0, 0.0]] {
            let b = euler_basis(e);
            let m = RealMat3::from_columns(&b);
            assert!(identity_residual(&(m.transpose() * m)) < 1e-14);
        }
    }

    #[test]
    fn orthogonal_trines_max_out_basis_search() {
        let report = best_von_neumann(1.0 / 3.0, 8, 1).unwrap();
        assert!((report.best_info_bits().unwrap() - log2_3()).abs() < 1e-9);
    }

    #[test]
    fn perturbation_projection_is_complete() {
        let basis = von_neumann_basis(0.2).vectors;
        let mut rng = seeded_rng(3, 0);
        let moved: Vec<RealVec3> = basis
            .iter()
            .chain(basis.iter())
            .map(|u| u * 0.5f64.sqrt() + 0.05 * RealVec3::from_fn(|_, _| rng.sample::<f64, _>(StandardNormal)))
            .collect();
        let p = project_to_povm(&moved).unwrap();
        assert!(verify_completeness(&GeneralPovm::from_vectors(&p)) <= 1e-12);

        let flat = vec![RealVec3::x(), RealVec3::y()];
        assert!(project_to_povm(&flat).is_none());
    }

    #[test]
    fn orthogonal_basis_cannot_improve() {
        let povm = von_neumann_basis(0.0).to_povm();
        let r = local_perturbation_test(1.0 / 3.0, &povm, 500, 1e-2, 9).unwrap();
        assert!(r.max_improvement <= 1e-12);
    }

    #[test]
    fn perturbation_rejects_incomplete_input() {
        let mut povm = von_neumann_basis(0.0).to_povm();
        povm.elements[0].weight = 0.5;
        assert!(matches!(
            local_perturbation_test(0.1, &povm, 10, 1e-2, 0),
            Err(TrineError::Incomplete(_))
        ));
    }

    #[test]
    fn report_line_is_single_line() {
        let report = grid_search_symmetric(0.03, 1, Resolution::COARSE).unwrap();
        let line = report.to_string();
        assert!(!line.contains('\n'));
        assert!(line.starts_with("alpha=0.030000 best_info_bits="));
        assert!(line.ends_with("seed=0"));
    }
}
