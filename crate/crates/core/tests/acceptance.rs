//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_6, PI};
use std::process::ExitCode;

use rand::Rng;
use rayon::prelude::*;
use trine_core::envelope::{find_gamma1, mixture_decomposition, phi_alpha_coefficient, two_stage_check, Envelope};
use trine_core::geometry::{factorization_check, verify_completeness, TrineEnsemble};
use trine_core::info::{general_info, log2_3, optimal_theta, symmetric_info, theta_onset};
use trine_core::oracle::{
    best_von_neumann, grid_search_symmetric, local_perturbation_test, random_valid_mixture, seeded_rng, Resolution,
};
use trine_core::reports::{run, Command, OutputFormat, RunConfig, VON_NEUMANN_GAP};

const SEED: u64 = 20_240_601;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn c1_theta_at_zero() -> Outcome {
    let t = optimal_theta(0.0, 1e-10).unwrap().theta_star;
    let err = (t - FRAC_PI_6).abs();
    outcome(
        err <= 1e-6,
        format!("theta*(0) = {t:.9}, |theta*(0) - pi/6| = {err:.2e} <= 1e-6"),
    )
}

fn c2_theta_onset() -> Outcome {
    let onset = theta_onset(0.0, 0.1, 1e-9).unwrap();
    let angle = onset.sqrt().asin();
    let e1 = (onset - 0.056651).abs();
    let e2 = (angle - 0.24032).abs();
    outcome(
        e1 <= 5e-5 && e2 <= 1e-4,
        format!("onset = {onset:.7} (err {e1:.2e} <= 5e-5), arcsin(sqrt) = {angle:.6} (err {e2:.2e} <= 1e-4)"),
    )
}

fn c3_gamma1() -> Outcome {
    let g = find_gamma1(1e-6).unwrap();
    let angle = g.sqrt().asin();
    let e1 = (g - 0.061367).abs();
    let e2 = (angle - 0.25033).abs();
    outcome(
        e1 <= 5e-5 && e2 <= 1e-4,
        format!("gamma1 = {g:.7} (err {e1:.2e} <= 5e-5), arcsin(sqrt) = {angle:.6} (err {e2:.2e} <= 1e-4)"),
    )
}

fn c4_coefficient() -> Outcome {
    let c = phi_alpha_coefficient(find_gamma1(1e-6).unwrap());
    let err = (c - 29.591).abs();
    outcome(
        err <= 0.02,
        format!("(2 - 3 gamma1) / gamma1 = {c:.4}, err {err:.2e} <= 0.02"),
    )
}

fn c5_factorization() -> Outcome {
    let worst = (0..10_000u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = seeded_rng(SEED, i);
            factorization_check(rng.random_range(0.0..=FRAC_PI_2), rng.random_range(-PI..PI))
        })
        .reduce(|| 0.0, f64::max);
    outcome(
        worst <= 1e-12,
        format!("max residual {worst:.2e} <= 1e-12 over 10^4 (phi, theta), all b"),
    )
}

fn c6_conservation() -> Outcome {
    let (mean, total) = (0..1_000u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = seeded_rng(SEED + 1, i);
            let alpha = rng.random_range(0.0..1.0);
            let m = rng.random_range(1..=4);
            let mix = mixture_decomposition(alpha, &random_valid_mixture(&mut rng, m)).unwrap();
            let mean: f64 = mix.iter().map(|c| c.outcome_prob * c.alpha_prime).sum();
            let total: f64 = mix.iter().map(|c| c.outcome_prob).sum();
            ((mean - alpha).abs(), (total - 1.0).abs())
        })
        .reduce(|| (0.0, 0.0), |a, b| (a.0.max(b.0), a.1.max(b.1)));
    outcome(
        mean <= 1e-10 && total <= 1e-10,
        format!("max |sum p'a' - a| = {mean:.2e}, max |sum p' - 1| = {total:.2e}, both <= 1e-10 over 10^3 mixtures"),
    )
}

fn c7_chain_rule() -> Outcome {
    let worst = (0..100u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = seeded_rng(SEED + 2, i);
            let alpha = rng.random_range(0.0..1.0);
            let m = rng.random_range(1..=3);
            two_stage_check(alpha, &random_valid_mixture(&mut rng, m)).unwrap()
        })
        .reduce(|| 0.0, f64::max);
    outcome(
        worst <= 1e-10,
        format!("max |direct - decomposed| = {worst:.2e} <= 1e-10 over 100 mixtures"),
    )
}

fn c8_spot_values() -> Outcome {
    let e1 = (symmetric_info(0.0, FRAC_PI_6).unwrap() - (log2_3() - 1.0)).abs();
    let e2 = (symmetric_info(0.0, 0.0).unwrap() - 1.0 / 3.0).abs();
    outcome(
        e1 <= 1e-12 && e2 <= 1e-12,
        format!("|I(0, pi/6) - (log2 3 - 1)| = {e1:.2e}, |I(0, 0) - 1/3| = {e2:.2e}, both <= 1e-12"),
    )
}

fn c9_six_element() -> Outcome {
    let env = Envelope::discover(1e-6).unwrap();
    let sol = env.optimal_povm(0.03).unwrap();
    let povm = sol.povm.to_general();
    let residual = verify_completeness(&povm);
    let direct = general_info(&TrineEnsemble::new(0.03).unwrap(), &povm).unwrap();
    let chord_err = (direct - env.chord(0.03)).abs();
    let grid = grid_search_symmetric(0.03, 2, Resolution::FINE)
        .unwrap()
        .best_info_bits()
        .unwrap();
    let below = direct - grid;
    outcome(
        residual <= 1e-10 && chord_err <= 1e-9 && (-1e-9..=1e-3).contains(&below),
        format!(
            "completeness {residual:.2e} <= 1e-10, |info - chord| = {chord_err:.2e} <= 1e-9, \
             envelope - grid = {below:.2e} in [-1e-9, 1e-3]"
        ),
    )
}

fn c10_von_neumann_gap() -> Outcome {
    let env = Envelope::discover(1e-6).unwrap();
    let acc = env.accessible_information(0.03).unwrap().info_bits;
    let vn = best_von_neumann(0.03, 12, SEED).unwrap().best_info_bits().unwrap();
    let gap = acc - vn;
    outcome(
        gap >= VON_NEUMANN_GAP,
        format!("accessible - best basis = {acc:.7} - {vn:.7} = {gap:.3e} >= {VON_NEUMANN_GAP:e}"),
    )
}

fn c11_stationarity() -> Outcome {
    let env = Envelope::discover(1e-6).unwrap();
    let povm = env.optimal_povm(0.03).unwrap().povm.to_general();
    let report = local_perturbation_test(0.03, &povm, 10_000, 1e-2, SEED).unwrap();
    outcome(
        report.max_improvement <= 1e-9,
        format!(
            "max improvement {:.2e} <= 1e-9 over 10^4 perturbations ({} accepted, {} rejected)",
            report.max_improvement, report.accepted, report.rejected
        ),
    )
}

fn c12_determinism() -> Outcome {
    let commands = [
        (Command::ThetaCurve, OutputFormat::Csv),
        (Command::ThetaFamily, OutputFormat::Csv),
        (Command::Envelope, OutputFormat::Csv),
        (Command::Povm, OutputFormat::Csv),
        (Command::Envelope, OutputFormat::JsonLines),
        (Command::Verify, OutputFormat::Csv),
    ];
    let produce = |threads: usize| -> Vec<Vec<u8>> {
        let dir = tempfile::tempdir().unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        commands
            .iter()
            .map(|&(command, format)| {
                let mut config = RunConfig::new(command, dir.path());
                config.seed = SEED;
                config.format = format;
                let out = pool.install(|| run(&config)).unwrap();
                std::fs::read(out.path).unwrap()
            })
            .collect()
    };
    let first = produce(1);
    let second = produce(4);
    let identical = first == second;
    let bytes: usize = first.iter().map(Vec::len).sum();
    outcome(
        identical,
        format!(
            "{} artifacts ({bytes} bytes) byte-identical across 1 and 4 threads: {identical}",
            commands.len()
        ),
    )
}

fn main() -> ExitCode {
    type Criterion = (&'static str, fn() -> Outcome);
    let criteria: [Criterion; 12] = [
        ("theta*(0) = pi/6", c1_theta_at_zero),
        ("theta* onset", c2_theta_onset),
        ("gamma1", c3_gamma1),
        ("lift coefficient", c4_coefficient),
        ("factorization", c5_factorization),
        ("conservation", c6_conservation),
        ("chain rule", c7_chain_rule),
        ("spot values", c8_spot_values),
        ("six-element optimum", c9_six_element),
        ("von Neumann gap", c10_von_neumann_gap),
        ("stationarity", c11_stationarity),
        ("determinism", c12_determinism),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        if !o.passed {
            failures += 1;
        }
        println!(
            "criterion {:>2} {:<20} {}  {}",
            i + 1,
            name,
            if o.passed { "PASS" } else { "FAIL" },
            o.detail
        );
    }
    println!("acceptance: {} passed, {failures} failed", criteria.len() - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
