//! Acceptance criteria 1-9. Each test prints one `acceptance N PASS|FAIL` line.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use replab_core::bounds::{bound_for, bound_sweep, outside_option_bound};
use replab_core::equilibria::{construct_full_effort, construct_non_efe, NonEfeOptions};
use replab_core::fei::{binary_threshold, check_fei, fei_oracle, FeiError};
use replab_core::model::{belief_growth_bound, belief_growth_bound_holds, Belief};
use replab_core::simulate::{analytic_long_run_effort, martingale_diagnostic, simulate, SimulationConfig};
use replab_core::verifier::{mutations, verify};
use replab_core::{GameParams, Model, MonitoringStructure, ValidationLevel};

fn report(n: u32, pass: bool, elapsed: Duration, detail: &str) {
    println!(
        "acceptance {n} {}: {detail} [{:.3}s]",
        if pass { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64()
    );
}

fn binary(p: f64, kappa: f64, delta: f64, pi0: f64, c: f64) -> Model {
    Model::validate(MonitoringStructure::binary(p), GameParams::new(kappa, delta, pi0, c), ValidationLevel::Relaxed)
        .unwrap()
}

fn reference() -> Model {
    binary(0.75, 0.2, 0.5, 0.3, 0.05)
}

#[test]
fn acceptance_1_fei_frontier() {
    let start = Instant::now();
    let holds = check_fei(&binary(0.75, 0.2, 0.4, 0.5, 0.0)).holds;
    let fails = !check_fei(&binary(0.75, 0.2, 0.3, 0.5, 0.0)).holds;
    let per_check = start.elapsed() / 2;
    let thr = binary_threshold(0.75, 0.2).unwrap();
    let closed = 0.2 / (0.75 - 0.25 * 0.8);
    let exact = (thr - 4.0 / 11.0).abs() <= 1e-12 && (thr - closed).abs() <= 1e-12;
    let fast = per_check < Duration::from_millis(1);
    let pass = holds && fails && exact && fast;
    report(
        1,
        pass,
        start.elapsed(),
        &format!("delta 0.40 holds={holds}, delta 0.30 fails={fails}, threshold={thr}, per check {per_check:?}"),
    );
    assert!(pass);
}

fn random_simplex(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
    let t: f64 = w.iter().sum();
    w.iter().map(|x| x / t).collect()
}

#[test]
fn acceptance_2_fei_oracle_agreement() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut agree, mut total, mut excluded, mut holds) = (0, 0, 0, 0);
    while total < 200 {
        let n = rng.random_range(2..=4);
        let names = (0..n).map(|i| format!("s{i}")).collect();
        let f0 = random_simplex(&mut rng, n);
        let f1 = random_simplex(&mut rng, n);
        let Ok(mon) = MonitoringStructure::new(names, f0, f1) else { continue };
        let params = GameParams::new(rng.random_range(0.01..0.99), rng.random_range(0.01..0.99), 0.5, 0.0);
        let Ok(model) = Model::validate(mon, params, ValidationLevel::Strict) else { continue };
        match fei_oracle(&model, 1e-9) {
            Err(FeiError::ResolutionTooCoarse { .. }) => excluded += 1,
            Err(e) => panic!("oracle error {e}"),
            Ok(o) => {
                total += 1;
                let c = check_fei(&model).holds;
                holds += c as u32;
                agree += (o == c) as u32;
            }
        }
    }
    let pass = agree == 200 && start.elapsed() < Duration::from_secs(30);
    report(2, pass, start.elapsed(), &format!("{agree}/200 agree ({holds} hold), {excluded} excluded near frontier"));
    assert!(pass);
}

#[test]
fn acceptance_3_non_efe_closed_forms() {
    let start = Instant::now();
    let m = reference();
    let (_, q) = construct_non_efe(&m, NonEfeOptions::default()).unwrap();
    let targets = [(q.v_bar, 0.64), (q.v_tilde, 0.24), (q.v_hat, 0.67), (q.x, 1.0 - 0.24 / 0.67)];
    let close = targets.iter().all(|(got, want)| (got - want).abs() <= 1e-9);
    let r = q.identity_residuals(&m);
    // the two equalities defining v̂: work side and shirk side
    let identities = r[1] <= 1e-12 && r[2] <= 1e-12;
    let pass = close && identities;
    report(
        3,
        pass,
        start.elapsed(),
        &format!("v_bar={} v_tilde={} v_hat={} x={} identity residuals {:?}", q.v_bar, q.v_tilde, q.v_hat, q.x, r),
    );
    assert!(pass);
}

#[test]
fn acceptance_4_verifier_soundness() {
    let start = Instant::now();
    let m = reference();
    let fe = verify(&construct_full_effort(&m).unwrap(), &m, 1e-8, 200).unwrap();
    let (a, _) = construct_non_efe(&m, NonEfeOptions::default()).unwrap();
    let ne = verify(&a, &m, 1e-8, 200).unwrap();
    let mut caught = 0;
    let mut lines = Vec::new();
    let catalog = mutations::catalog(&m).unwrap();
    for mu in &catalog {
        let r = verify(&mu.automaton, &m, 1e-8, 200).unwrap();
        let ok = !r.passed && r.worst_offenders.first().map(|o| o.category) == Some(mu.expected);
        caught += ok as usize;
        lines.push(format!("{} -> {:?}", mu.name, r.failing_categories()));
    }
    let pass = fe.passed && ne.passed && catalog.len() == 6 && caught == 6 && start.elapsed() < Duration::from_secs(10);
    report(
        4,
        pass,
        start.elapsed(),
        &format!(
            "full effort {}, non-EFE {}, mutations caught {caught}/6 [{}]",
            fe.passed,
            ne.passed,
            lines.join("; ")
        ),
    );
    assert!(pass);
}

#[test]
fn acceptance_5_simulation_vs_oracle() {
    let start = Instant::now();
    let m = reference();
    let (a, _) = construct_non_efe(&m, NonEfeOptions::default()).unwrap();
    let oracle = analytic_long_run_effort(&a, &m);
    let s = simulate(&a, &m, &SimulationConfig::new(500, 100_000, 20240601)).unwrap();
    let lr = &s.long_run_effort;
    let within = (lr.estimate - oracle.value).abs() <= 3.0 * lr.std_error;
    let below_one = (1.0 - lr.estimate) > 10.0 * lr.std_error;
    let z = martingale_diagnostic(&s);
    let favorable = s.favorable_replacement_total > 0;
    let survival = s.tenure_exceedance.iter().find(|e| e.threshold == 200).unwrap().any_incumbent;
    let pass = within && below_one && z.abs() <= 3.0 && favorable && survival < 1e-3 && start.elapsed() < Duration::from_secs(60);
    report(
        5,
        pass,
        start.elapsed(),
        &format!(
            "estimate {} +- {} vs oracle {}, martingale z {z}, favorable replacements {}, tenure>200 share {survival}",
            lr.estimate, lr.std_error, oracle.value, s.favorable_replacement_total
        ),
    );
    assert!(pass);
}

#[test]
fn acceptance_6_full_effort_invariants() {
    let start = Instant::now();
    let m = reference();
    let a = construct_full_effort(&m).unwrap();
    let s = simulate(&a, &m, &SimulationConfig::new(500, 20_000, 6)).unwrap();
    let all_work = s.mean_effort.iter().all(|&e| e == 1.0);
    let none_favorable = s.favorable_replacements.iter().all(|&n| n == 0);
    let pass = all_work && none_favorable;
    report(6, pass, start.elapsed(), &format!("effort identically 1: {all_work}, favorable replacements zero: {none_favorable}"));
    assert!(pass);
}

#[test]
fn acceptance_7_outside_option_bound() {
    let start = Instant::now();
    let m = binary(0.75, 0.2, 0.3, 0.3, 0.05);
    let b = outside_option_bound(&m).unwrap();
    let cbar = b.c_threshold;
    let below_one = [0.0, 0.5 * cbar, cbar * (1.0 - 1e-9)]
        .iter()
        .all(|&c| bound_for(0.3, c, b.horizon_t).bound_value < 1.0);
    let pi0s: Vec<f64> = (0..9).map(|k| 0.3 * 10f64.powi(-k)).collect();
    let sweep = bound_sweep(&m, &pi0s, &[0.0]).unwrap();
    let col: Vec<f64> = sweep.rows.iter().map(|r| r.bound).collect();
    let decreasing = col.windows(2).all(|w| w[1] < w[0]);
    let last = *col.last().unwrap();
    let vanishing = last <= 0.05;
    let pass = below_one && decreasing && vanishing && start.elapsed() < Duration::from_secs(5);
    report(
        7,
        pass,
        start.elapsed(),
        &format!(
            "T={}, bound(c=0.05)={}, below one under c_bar={cbar}: {below_one}, strictly decreasing: {decreasing}, bound at pi0=3e-9: {last} (target <= 0.05)",
            b.horizon_t, b.bound_value
        ),
    );
    assert!(pass);
}

#[test]
fn acceptance_8_belief_operators() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut mart_bad, mut growth_bad, mut grid_bad) = (0, 0, 0);
    let mut worst_mart: f64 = 0.0;
    for _ in 0..10_000 {
        let p = rng.random_range(0.51..0.99);
        let m = binary(p, 0.2, 0.5, 0.3, 0.0);
        let pi: f64 = rng.random_range(1e-6..1.0);
        let a: f64 = rng.random_range(0.0..=1.0);
        let e = pi + (1.0 - pi) * a;
        let mean: f64 = (0..2).map(|s| m.monitoring().prob(e, s) * m.posterior(pi, a, s)).sum();
        worst_mart = worst_mart.max((mean - pi).abs());
        mart_bad += ((mean - pi).abs() > 1e-12) as u32;

        let eta: f64 = rng.random_range(1e-6..1.0 - 1e-6);
        let t = rng.random_range(0..=50);
        growth_bad += (!belief_growth_bound_holds(&m, pi, eta, t)
            || belief_growth_bound(pi, eta, t + 1) < belief_growth_bound(pi, eta, t) - 1e-15) as u32;

        let closed = m.max_update(Belief::new(pi).unwrap(), eta).unwrap().value();
        let grid = (0..=200)
            .flat_map(|i| {
                let ai = eta + (1.0 - eta) * i as f64 / 200.0;
                (0..2).map(move |s| (ai, s))
            })
            .map(|(ai, s)| m.posterior(pi, ai, s))
            .fold(0.0, f64::max);
        grid_bad += ((closed - grid).abs() > 1e-12 * closed.max(1.0)) as u32;
    }
    let pass = mart_bad == 0 && growth_bad == 0 && grid_bad == 0;
    report(
        8,
        pass,
        start.elapsed(),
        &format!(
            "martingale violations {mart_bad} (worst {worst_mart:e}), growth-bound violations {growth_bad}, grid-max mismatches {grid_bad}"
        ),
    );
    assert!(pass);
}

#[test]
fn acceptance_9_determinism() {
    let start = Instant::now();
    let m = reference();
    let (a, _) = construct_non_efe(&m, NonEfeOptions::default()).unwrap();
    let cfg = SimulationConfig::new(200, 5_000, 99);
    let first = serde_json::to_string(&simulate(&a, &m, &cfg).unwrap()).unwrap();
    let second = serde_json::to_string(&simulate(&a, &m, &cfg).unwrap()).unwrap();
    let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let third = single.install(|| serde_json::to_string(&simulate(&a, &m, &cfg).unwrap()).unwrap());
    let pass = first == second && first == third;
    report(9, pass, start.elapsed(), &format!("3 runs (one single-threaded) byte-identical: {pass}, {} bytes", first.len()));
    assert!(pass);
}
