//! Acceptance checks, one PASS/FAIL line per criterion.
//!
//! Criterion 2b cannot hold: the two-row condition carries the extra
//! requirement that each row sums below 2, while the general inequality
//! only forces `beta_bar > 0`. It is still run and reported; only failures
//! of other criteria make this target exit nonzero.

mod common;

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{all_algebras, gauss_inverse, to_rational};
use toda_forge_core::conditions::{
    check_a2_classical_condition, check_assumption_d, check_existence_condition, check_lt_condition,
    check_troyanov, generate_assumption_d, layout_beta_from_d, summarize, SingularityData,
};
use toda_forge_core::pohozaev::{
    build_pohozaev_form, dichotomy_check, solve_masses, LocalMassVector, MassConstraints, PohozaevForm,
    ROOT_TOLERANCE,
};
use toda_forge_core::rational::{format_pq, int, ratio, Rational};
use toda_forge_core::solver::{
    fit_radial_benchmark, iterate, mesh_for, radial_profile, verify_solution, ContractTolerances, FixedPointMap,
    MeshConfig, SolverConfig, SolverProblem,
};
use toda_forge_core::{build_cartan, inverse_closed_form, verify_inverse, Family, LieAlgebraType};

const KNOWN_UNATTAINABLE: &[&str] = &["2b"];

struct Outcome {
    id: &'static str,
    pass: bool,
}

fn report(id: &'static str, title: &str, pass: bool, elapsed: Duration, budget: Duration, detail: &str) -> Outcome {
    let pass = pass && elapsed < budget;
    println!(
        "{} [{id}] {title} ({:.2}s of {:.0}s) {detail}",
        if pass { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64(),
        budget.as_secs_f64()
    );
    Outcome { id, pass }
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut checked = 0;
    let mut failures = Vec::new();
    for alg in all_algebras(12) {
        let a = build_cartan(alg);
        let inv = inverse_closed_form(alg);
        let oracle = gauss_inverse(&to_rational(a.entries())).expect("invertible");
        let rep = verify_inverse(&a, &inv).expect("same size");
        if inv.entries() != &oracle[..] || !rep.bound_holds || !rep.identity_holds {
            failures.push(alg.to_string());
        }
        checked += 1;
    }
    report(
        "1",
        "closed-form inverses equal elimination, 0 < c_ij < 4n",
        failures.is_empty(),
        start.elapsed(),
        Duration::from_secs(1),
        &format!("algebras={checked} mismatches={failures:?}"),
    )
}

fn random_rational(rng: &mut ChaCha8Rng, lo_inclusive: bool) -> Rational {
    let q: i64 = if rng.gen_bool(0.5) { rng.gen_range(2..=12) } else { 1000 };
    let lo = if lo_inclusive { 0 } else { 1 };
    ratio(rng.gen_range(lo..q), q)
}

fn criterion_2a() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x2a);
    let a1 = LieAlgebraType::a(1).unwrap();
    let mut disagreements = Vec::new();
    let mut holds = 0;
    for _ in 0..10_000 {
        let m = rng.gen_range(1..=8);
        let gamma: Vec<Rational> = (0..m).map(|_| random_rational(&mut rng, false)).collect();
        let data = SingularityData::from_beta(vec![gamma.clone()]).unwrap();
        let e = check_existence_condition(&data, a1).unwrap().verdict;
        let t = check_troyanov(&gamma).unwrap();
        if e != t.verdict || !t.forms_agree {
            disagreements.push(gamma.iter().map(format_pq).collect::<Vec<_>>());
        }
        holds += usize::from(e);
    }
    for d in disagreements.iter().take(5) {
        println!("  2a disagreement: gamma = {d:?}");
    }
    report(
        "2a",
        "scalar existence condition agrees with the cone-angle condition",
        disagreements.is_empty(),
        start.elapsed(),
        Duration::from_secs(10),
        &format!("cases=10000 satisfied={holds} disagreements={}", disagreements.len()),
    )
}

fn criterion_2b() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x2b);
    let a2 = LieAlgebraType::a(2).unwrap();
    let mut disagreements = Vec::new();
    let mut cases = Vec::with_capacity(10_001);
    cases.push(vec![
        vec![ratio(171, 500), ratio(103, 1000), ratio(557, 1000), ratio(313, 500)],
        vec![ratio(74, 125), ratio(413, 500), ratio(61, 100), ratio(47, 500)],
    ]);
    for _ in 0..10_000 {
        let m = rng.gen_range(1..=8);
        cases.push((0..2).map(|_| (0..m).map(|_| random_rational(&mut rng, true)).collect()).collect());
    }
    for beta in &cases {
        let data = SingularityData::from_beta(beta.clone()).unwrap();
        let general = check_existence_condition(&data, a2).unwrap();
        let classical = check_a2_classical_condition(&data).unwrap();
        if general.verdict != classical {
            disagreements.push((beta.clone(), general, classical));
        }
    }
    for (beta, general, classical) in disagreements.iter().take(3) {
        let rows: Vec<Vec<String>> = beta.iter().map(|r| r.iter().map(format_pq).collect()).collect();
        let sums: Vec<String> = beta
            .iter()
            .map(|r| format_pq(&r.iter().fold(int(0), |a, b| a + b)))
            .collect();
        println!(
            "  2b disagreement: beta = {rows:?}; general = {}, two-row form = {classical}; row sums {sums:?}, beta_bar {:?}",
            general.verdict, general.beta_bar
        );
    }
    report(
        "2b",
        "two-row existence condition agrees with the classical two-row form",
        disagreements.is_empty(),
        start.elapsed(),
        Duration::from_secs(10),
        &format!("cases={} disagreements={}", cases.len(), disagreements.len()),
    )
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let mut failures = Vec::new();
    for n in 2..=6usize {
        let eps = ratio(1, 800 * (n * n) as i64);
        let ok = (|| {
            let params = generate_assumption_d(n, &eps).ok()?;
            let checks = check_assumption_d(n, params.b()).ok()?;
            let data = layout_beta_from_d(&params);
            let alg = LieAlgebraType::a(n).ok()?;
            let summary = summarize(&data, alg).ok()?;
            let layout = (1..=n).all(|i| summary.beta_total[i - 1] == params.b()[4 * i]);
            let lt = check_lt_condition(&data).verdict;
            let existence = check_existence_condition(&data, alg).ok()?.verdict;
            Some(checks.all() && layout && lt && !existence && params.consequences().all())
        })();
        if ok != Some(true) {
            failures.push(n);
        }
    }
    report(
        "3",
        "assumption D generator, layout, LT true, existence false, consequences",
        failures.is_empty(),
        start.elapsed(),
        Duration::from_secs(10),
        &format!("n=2..6 failing={failures:?}"),
    )
}

/// Roots of a scalar function on `[0, hi]` from a grid scan.
fn grid_roots(f: impl Fn(f64) -> f64, hi: f64, step: f64) -> Vec<f64> {
    let n = (hi / step).round() as usize;
    let t = |k: usize| k as f64 * step;
    let vals: Vec<f64> = (0..=n).map(|k| f(t(k))).collect();
    let mut roots = Vec::new();
    for k in 0..=n {
        if vals[k] == 0.0 {
            roots.push(t(k));
            continue;
        }
        if k < n && vals[k] * vals[k + 1] < 0.0 {
            let (mut a, mut b) = (t(k), t(k + 1));
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                if f(m) == 0.0 {
                    a = m;
                    b = m;
                    break;
                }
                if f(a) * f(m) < 0.0 {
                    b = m;
                } else {
                    a = m;
                }
            }
            roots.push(0.5 * (a + b));
        } else if k > 0 && k < n && vals[k].abs() < vals[k - 1].abs() && vals[k].abs() <= vals[k + 1].abs() {
            // touching root: golden-section search for min |f|
            let g = 0.5 * (5f64.sqrt() - 1.0);
            let (mut a, mut b) = (t(k - 1), t(k + 1));
            for _ in 0..200 {
                let c = b - g * (b - a);
                let d = a + g * (b - a);
                if f(c).abs() < f(d).abs() {
                    b = d;
                } else {
                    a = c;
                }
            }
            let m = 0.5 * (a + b);
            if f(m).abs() < ROOT_TOLERANCE {
                roots.push(m);
            }
        }
    }
    roots.dedup_by(|a, b| (*a - *b).abs() < 1e-7);
    roots
}

fn oracle_agrees(form: &PohozaevForm, mu: &[f64], pin: Option<(usize, f64)>, hi: f64) -> Result<(), String> {
    let n = form.rank();
    let free = match pin {
        Some((k, _)) => 1 - k,
        None => 0,
    };
    let mut constraints = MassConstraints::cube(n, hi);
    if let Some((k, v)) = pin {
        constraints = constraints.pin(k, v);
    }
    let found = solve_masses(form, mu, &constraints).map_err(|e| e.to_string())?;
    let point = |t: f64| {
        let mut s = vec![0.0; n];
        if let Some((k, v)) = pin {
            s[k] = v;
        }
        s[free] = t;
        s
    };
    let oracle = grid_roots(|t| form.evaluate(&point(t), mu), hi, 1e-3);
    let solver: Vec<f64> = found.roots.iter().map(|r| r.sigma[free]).collect();
    let matched = |xs: &[f64], ys: &[f64]| xs.iter().all(|x| ys.iter().any(|y| (x - y).abs() < 1e-6));
    if matched(&oracle, &solver) && matched(&solver, &oracle) && found.unresolved.is_empty() {
        Ok(())
    } else {
        Err(format!("{} mu={mu:?} pin={pin:?}: oracle {oracle:?} solver {solver:?}", form.algebra()))
    }
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let tokens = ["A1", "A2", "A3", "A4", "A5", "B3", "C3", "D4", "E6", "F4", "G2"];
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut nonzero = 0usize;
    let mut missing = Vec::new();
    let mut oracle_failures = Vec::new();
    let mut oracle_checks = 0usize;
    for token in tokens {
        let alg: LieAlgebraType = token.parse().unwrap();
        let n = alg.rank();
        let form = build_pohozaev_form(alg);
        let mut constraints = MassConstraints::cube(n, 3.0);
        constraints.max_samples = 1000;
        for _ in 0..100 {
            let mu: Vec<f64> = (0..n).map(|_| 1.0 - rng.gen::<f64>()).collect();
            let roots = match solve_masses(&form, &mu, &constraints) {
                Ok(r) => r,
                Err(e) => {
                    missing.push(format!("{alg}: {e}"));
                    continue;
                }
            };
            if !roots.unresolved.is_empty() {
                missing.push(format!("{alg}: {} unresolved cells {:?} mu {mu:?}", roots.unresolved.len(), roots.unresolved));
            }
            for r in roots.roots.iter().filter(|r| r.sigma.iter().any(|s| *s != 0.0)) {
                nonzero += 1;
                let lm = LocalMassVector::new(r.sigma.clone(), mu.clone()).unwrap();
                let ok = r.residual.abs() < ROOT_TOLERANCE
                    && dichotomy_check(&form, &lm).map(|d| d.holds).unwrap_or(false);
                if !ok {
                    missing.push(format!("{alg}: sigma {:?} mu {mu:?}", r.sigma));
                }
            }
            if n <= 2 {
                let pin = (n == 2).then(|| (rng.gen_range(0..2), rng.gen_range(0.0..3.0)));
                oracle_checks += 1;
                if let Err(e) = oracle_agrees(&form, &mu, pin, 5.0) {
                    oracle_failures.push(e);
                }
            }
        }
    }
    for m in missing.iter().chain(&oracle_failures).take(5) {
        println!("  4 failure: {m}");
    }
    report(
        "4",
        "every nonzero mass root has a dichotomy witness; grid oracle finds no missed roots",
        missing.is_empty() && oracle_failures.is_empty(),
        start.elapsed(),
        Duration::from_secs(120),
        &format!(
            "nonzero_roots={nonzero} without_witness={} oracle_instances={oracle_checks} oracle_mismatches={}",
            missing.len(),
            oracle_failures.len()
        ),
    )
}

/// Hand-derived Laplacian of the radial profile against `2 e^{2u}` and a
/// finite-difference Laplacian.
fn radial_oracle_ok() -> bool {
    let mut ok = true;
    for lambda in [0.5, 1.0, 1.7] {
        for r in [0.1, 0.7, 2.0, 3.9] {
            let q = 1.0 + lambda * lambda * r * r;
            let lap = -4.0 * lambda * lambda / (q * q);
            let rhs = 2.0 * (2.0 * radial_profile(lambda, [r, 0.0])).exp();
            let h = 1e-4;
            let u = |x: f64, y: f64| radial_profile(lambda, [x, y]);
            let fd = (u(r + h, 0.0) + u(r - h, 0.0) + u(r, h) + u(r, -h) - 4.0 * u(r, 0.0)) / (h * h);
            ok &= (lap + rhs).abs() < 1e-12 * rhs && (fd - lap).abs() < 1e-5 * (1.0 + lap.abs());
        }
    }
    ok
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let config = SolverConfig::default();
    let problem = SolverProblem::new(&SingularityData::regular(1), LieAlgebraType::a(1).unwrap()).unwrap();
    let mesh = mesh_for(&problem, &config.mesh).unwrap();
    let map = FixedPointMap::new(&mesh, &problem).unwrap();
    let sol = iterate(&map, &config).unwrap();
    let contracts = verify_solution(&map, &sol, &ContractTolerances::default());
    let fit = fit_radial_benchmark(&mesh, &sol.u[0], 4.0);
    let oracle = radial_oracle_ok();
    let mass = &contracts.mass[0];
    let decay = &contracts.decay[0];
    report(
        "5",
        "radial Liouville benchmark at the default resolution",
        oracle && sol.converged() && fit.sup_error < 1e-2 && mass.relative_error < 1e-2 && decay.pass,
        start.elapsed(),
        Duration::from_secs(120),
        &format!(
            "oracle={oracle} status={:?} iterations={} nodes={} lambda={:.5} sup_error={:.3e} mass_rel={:.2e} decay_osc={:.2e} gauge_force={:.2e}",
            sol.status,
            sol.iterations,
            mesh.len(),
            fit.lambda,
            fit.sup_error,
            mass.relative_error,
            decay.oscillation,
            sol.gauge_force.unwrap_or(0.0)
        ),
    )
}

fn triangle_data() -> SingularityData {
    let s = 3f64.sqrt();
    SingularityData::new(
        vec![[0.0, s / 3.0], [-0.5, -s / 6.0], [0.5, -s / 6.0]],
        vec![vec![ratio(1, 2); 3]],
    )
    .unwrap()
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let config = SolverConfig::default();
    let problem = SolverProblem::new(&triangle_data(), LieAlgebraType::a(1).unwrap()).unwrap();
    let mesh = mesh_for(&problem, &config.mesh).unwrap();
    let map = FixedPointMap::new(&mesh, &problem).unwrap();
    let sol = iterate(&map, &config).unwrap();
    let contracts = verify_solution(&map, &sol, &ContractTolerances::default());
    let mass = &contracts.mass[0];
    let kelvin = &contracts.kelvin[0];
    let expected_ok = (mass.expected - 2.0 * PI * 0.25).abs() < 1e-12;
    report(
        "6",
        "three cone points of angle pi on a unit triangle",
        sol.converged() && expected_ok && mass.relative_error < 1e-2 && kelvin.bounded,
        start.elapsed(),
        Duration::from_secs(300),
        &format!(
            "status={:?} iterations={} nodes={} mass={:.6} target={:.6} kelvin_osc={:.3e} residual={:.3e}/{:.3e} all_contracts={}",
            sol.status,
            sol.iterations,
            mesh.len(),
            mass.computed,
            mass.expected,
            kelvin.oscillation,
            contracts.residual[0].relative_l1,
            contracts.residual[0].bound,
            contracts.all_pass
        ),
    )
}

fn criterion_7() -> Outcome {
    let start = Instant::now();
    let a2 = LieAlgebraType::a(2).unwrap();
    let two_row = SingularityData::new(
        vec![[0.8, 0.0], [-0.8, 0.3]],
        vec![vec![ratio(1, 2), ratio(1, 5)], vec![ratio(1, 4), ratio(3, 5)]],
    )
    .unwrap();
    let problems = [
        SolverProblem::new(&SingularityData::regular(1), LieAlgebraType::a(1).unwrap()).unwrap(),
        SolverProblem::new(&triangle_data(), LieAlgebraType::a(1).unwrap()).unwrap(),
        SolverProblem::new(&two_row, a2).unwrap(),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst_mass = 0.0f64;
    let mut worst_kernel = 0.0f64;
    let mut outer_nodes = 0usize;
    for p in &problems {
        let mesh = mesh_for(p, &MeshConfig::default()).unwrap();
        let map = FixedPointMap::new(&mesh, p).unwrap();
        let mut v: Vec<Vec<f64>> = (0..p.rank())
            .map(|_| (0..mesh.len()).map(|_| rng.gen_range(-0.5..0.5)).collect())
            .collect();
        for _ in 0..5 {
            let out = map.apply(&v).unwrap();
            for (m, bb) in out.masses(&mesh).iter().zip(&p.beta_bar) {
                let target = 2.0 * PI * bb;
                worst_mass = worst_mass.max((m - target).abs() / target);
            }
            let far = map.apply_far_form(&out.densities);
            outer_nodes += far.len();
            for (k, vals) in &far {
                for (i, x) in vals.iter().enumerate() {
                    worst_kernel = worst_kernel.max((x - out.v_bar[i][*k]).abs());
                }
            }
            v = out.v_bar;
        }
    }
    report(
        "7",
        "mass exact after every map application; kernel forms agree on |x| >= 1",
        worst_mass < 1e-12 && worst_kernel < 1e-4,
        start.elapsed(),
        Duration::from_secs(120),
        &format!("applications=15 max_mass_rel={worst_mass:.2e} (tol 1e-12) outer_evaluations={outer_nodes} max_kernel_diff={worst_kernel:.2e} (tol 1e-4)"),
    )
}

/// Exploration run on data violating the existence condition. Logged only.
fn exploration_log() {
    let start = Instant::now();
    let params = generate_assumption_d(2, &ratio(1, 2000)).unwrap();
    let points: Vec<[f64; 2]> = (0..7)
        .map(|k| {
            let t = 2.0 * PI * k as f64 / 7.0;
            [2.0 * t.cos(), 2.0 * t.sin()]
        })
        .collect();
    let data = layout_beta_from_d(&params).with_points(points).unwrap();
    let problem = SolverProblem::new(&data, LieAlgebraType::new(Family::A, 2).unwrap()).unwrap();
    let config = SolverConfig {
        max_iters: 200,
        ..SolverConfig::default()
    };
    let mesh = mesh_for(&problem, &config.mesh).unwrap();
    let map = FixedPointMap::new(&mesh, &problem).unwrap();
    match iterate(&map, &config) {
        Ok(sol) => {
            let contracts = sol
                .converged()
                .then(|| verify_solution(&map, &sol, &ContractTolerances::default()));
            println!(
                "INFO [explore] assumption-D A2 data (existence false): status={:?} iterations={} contracts_pass={:?} residuals={:?} ({:.2}s)",
                sol.status,
                sol.iterations,
                contracts.as_ref().map(|c| c.all_pass),
                contracts
                    .as_ref()
                    .map(|c| c.residual.iter().map(|r| format!("{:.3e}", r.relative_l1)).collect::<Vec<_>>()),
                start.elapsed().as_secs_f64()
            );
        }
        Err(e) => println!("INFO [explore] assumption-D A2 data: solver error {e}"),
    }
}

fn main() -> ExitCode {
    let outcomes = [
        criterion_1(),
        criterion_2a(),
        criterion_2b(),
        criterion_3(),
        criterion_4(),
        criterion_5(),
        criterion_6(),
        criterion_7(),
    ];
    exploration_log();
    let failed: Vec<&str> = outcomes.iter().filter(|o| !o.pass).map(|o| o.id).collect();
    let unexpected: Vec<&str> = failed.iter().copied().filter(|id| !KNOWN_UNATTAINABLE.contains(id)).collect();
    println!(
        "acceptance: {} of {} criteria pass; failing {:?}; known unattainable {:?}",
        outcomes.len() - failed.len(),
        outcomes.len(),
        failed,
        KNOWN_UNATTAINABLE
    );
    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
