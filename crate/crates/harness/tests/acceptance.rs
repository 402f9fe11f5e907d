//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails. Pass criterion numbers as arguments to run a subset.

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use balldiv::permute::binomial;
use balldiv::rng::{below, derive_seed, substream};
use balldiv::scenarios::{draw_with, Law, LawSpec, Marginal};
use balldiv::{
    ball_statistic_fast, ball_statistic_naive, cutoff_upper_bound, empirical_quantile,
    energy_distance_monte_carlo, estimate_probability_profile, expected_statistic_estimate, lookup,
    observed_statistic, perm_conditional_expectation, permutation_test, theta_bound_gap,
    theta_estimate, theta_lower_bound, BallIndex, DataMatrix, DistanceKind, Labeling,
    PermutationPlan, PooledSample, ScenarioParams,
};
use balldiv_harness::{run_power_study, GridEntry, PowerCurve, StudyConfig};

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

const SMALL_SIZES: [(usize, usize); 4] = [(3, 3), (3, 4), (4, 4), (3, 7)];
const SAMPLES_PER_SIZE: u64 = 20;

fn normal(mean: f64, var: f64, d: usize) -> Law {
    LawSpec::iid(Marginal::normal(mean, var)).resolve(d).unwrap()
}

fn small_instance(n: usize, m: usize, sample: u64) -> PooledSample<f64> {
    let seed = derive_seed(1, &[n as u64, m as u64, sample]);
    draw_with(&normal(0.0, 1.0, 2), &normal(0.5, 1.0, 2), n, m, seed).unwrap()
}

/// Replicates of every exhaustive instance: `(n, m, kind, replicates)`.
fn exhaustive_runs() -> Vec<(usize, usize, DistanceKind, Vec<f64>)> {
    let mut runs = Vec::new();
    for (n, m) in SMALL_SIZES {
        for sample in 0..SAMPLES_PER_SIZE {
            let pooled = small_instance(n, m, sample);
            for kind in DistanceKind::ALL {
                let r = permutation_test(&pooled, &kind.spec(), PermutationPlan::exhaustive(), 0.05).unwrap();
                runs.push((n, m, kind, r.replicates));
            }
        }
    }
    runs
}

fn exhaustive_mean() -> Outcome {
    let mut worst = 0.0f64;
    let mut ok = true;
    let runs = exhaustive_runs();
    for (n, m, _, reps) in &runs {
        ok &= reps.len() as u128 == binomial(n + m, *n);
        let mean = reps.iter().sum::<f64>() / reps.len() as f64;
        worst = worst.max((mean - perm_conditional_expectation(*n, *m).unwrap()).abs());
    }
    outcome(
        ok && worst <= 1e-12,
        format!("{} instances, max |mean - closed form| = {worst:.2e} (tol 1e-12)", runs.len()),
    )
}

fn coarse_instance(n: usize, m: usize, d: usize, seed: u64, duplicate: bool) -> PooledSample<f64> {
    let mut rng = substream(seed, &[7]);
    let mut draw = |rows: usize| -> Vec<f64> { (0..rows * d).map(|_| f64::from(below(&mut rng, 3))).collect() };
    let x = draw(n);
    let mut y = draw(m);
    if duplicate {
        // the first rows of y repeat rows of x
        let copies = n.min(m) / 2 + 1;
        y[..copies * d].copy_from_slice(&x[..copies * d]);
    }
    PooledSample::new(DataMatrix::new(n, d, x).unwrap(), DataMatrix::new(m, d, y).unwrap()).unwrap()
}

fn fast_matches_naive() -> Outcome {
    let mut worst = 0.0f64;
    let mut checks = 0;
    for case in 0..200u64 {
        let mut rng = substream(case, &[1]);
        let n = 3 + below(&mut rng, 10) as usize;
        let m = 3 + below(&mut rng, 10) as usize;
        let d = 1 + below(&mut rng, 4) as usize;
        let pooled = match case % 3 {
            0 => draw_with(&normal(0.0, 1.0, d), &normal(0.3, 1.0, d), n, m, case).unwrap(),
            1 => coarse_instance(n, m, d, case, false),
            _ => coarse_instance(n, m, d, case, true),
        };
        let mut shuffled: Vec<u8> = Labeling::identity(n, m).labels().to_vec();
        balldiv::rng::shuffle(&mut shuffled, &mut rng);
        for labels in [Labeling::identity(n, m), Labeling::from_labels(shuffled).unwrap()] {
            for kind in DistanceKind::ALL {
                let index = BallIndex::build(&pooled, &kind.spec()).unwrap();
                let fast = ball_statistic_fast(&index, &labels).unwrap();
                let naive = ball_statistic_naive(&index, &labels).unwrap();
                worst = worst.max((fast.t - naive.t).abs());
                checks += 1;
            }
        }
    }
    outcome(
        worst <= 1e-12,
        format!("200 instances (1/3 Gaussian, 1/3 coarse with ties, 1/3 with duplicated points), {checks} evaluations, max |fast - naive| = {worst:.2e}"),
    )
}

fn markov_chain() -> Outcome {
    let mut violations = 0;
    let mut checks = 0;
    let mut tightest = f64::INFINITY;
    for (n, m, _, reps) in exhaustive_runs() {
        for alpha in [0.05, 0.1] {
            let cutoff = empirical_quantile(&reps, 1.0 - alpha);
            let markov = perm_conditional_expectation(n, m).unwrap() / alpha;
            let bound = cutoff_upper_bound(alpha, n, m).unwrap();
            if !(cutoff <= markov && markov <= bound) {
                violations += 1;
            }
            tightest = tightest.min(markov - cutoff);
            checks += 1;
        }
    }
    outcome(
        violations == 0,
        format!("{checks} checks of cutoff <= E/alpha <= bound, {violations} violations, smallest margin {tightest:.4}"),
    )
}

fn study(kinds: &[DistanceKind], grid: Vec<GridEntry>, reps: usize) -> Vec<PowerCurve> {
    let config = StudyConfig {
        reps,
        kinds: kinds.to_vec(),
        master_seed: 1,
        ..StudyConfig::new(grid)
    };
    run_power_study(&config).unwrap()
}

fn level() -> Outcome {
    let rows = study(&[DistanceKind::L2], vec![GridEntry::new("level").dims(&[4, 64, 1024])], 500);
    let pass = rows.iter().all(|r| (r.power - 0.05).abs() <= 0.03);
    let detail: Vec<String> = rows.iter().map(|r| format!("d={} {:.3}", r.d, r.power)).collect();
    outcome(pass, format!("rejection rate at alpha 0.05 (target 0.05 +- 0.03): {}", detail.join(", ")))
}

fn power_points() -> Outcome {
    use DistanceKind::{Exp, L2};
    // (scenario, d, kind, low, high, reference value)
    let targets: [(&str, usize, DistanceKind, f64, f64, f64); 5] = [
        ("ex2", 64, L2, 0.736 - 0.06, 0.736 + 0.06, 0.736),
        ("ex3", 32, Exp, 0.954 - 0.05, 0.954 + 0.05, 0.954),
        ("ex3", 32, L2, 0.0, 0.10, 0.034),
        ("ex4", 8, Exp, 0.95, 1.0, 1.0),
        ("ex1", 1024, L2, 0.99 - 0.03, 0.99 + 0.03, 0.99),
    ];
    let mut pass = true;
    let mut detail = Vec::new();
    for (id, d, kind, low, high, reference) in targets {
        let rows = study(&[kind], vec![GridEntry::new(id).dims(&[d])], 500);
        let power = rows[0].power;
        pass &= (low..=high).contains(&power);
        detail.push(format!("{id} {kind} d={d} {power:.3} (reference {reference}, allowed [{low:.3}, {high:.3}])"));
    }
    outcome(pass, detail.join("; "))
}

fn shrinking_alternative() -> Outcome {
    let entry = |gamma: f64| GridEntry {
        beta: Some(0.5),
        gamma: Some(gamma),
        ..GridEntry::new("shrinking").dims(&[64])
    };
    let rows = study(&[DistanceKind::L2], vec![entry(0.0), entry(1.1)], 200);
    let (low, high) = (rows[0].power, rows[1].power);
    outcome(
        high - low >= 0.5,
        format!("beta 0.5, d=64, L2: gamma 0 -> {low:.3} (n={}), gamma 1.1 -> {high:.3} (n={}), gap {:.3} (need 0.5)", rows[0].n, rows[1].n, high - low),
    )
}

fn expected_statistic_closure() -> Outcome {
    let spec = lookup("ex1", &ScenarioParams::default()).unwrap().at(4).unwrap();
    let (f, g) = (spec.f_law().unwrap(), spec.g_law().unwrap());
    let kind = DistanceKind::L2.spec();
    let values: Vec<f64> = (0..2000u64)
        .map(|k| {
            let pooled = draw_with(&f, &g, 10, 10, derive_seed(7, &[k])).unwrap();
            observed_statistic(&pooled, &kind).unwrap().t
        })
        .collect();
    let count = values.len() as f64;
    let mean = values.iter().sum::<f64>() / count;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (count - 1.0);
    let se = (var / count).sqrt();
    let profile = estimate_probability_profile(&f, &g, &kind, 1_000_000, 8).unwrap();
    let predicted = expected_statistic_estimate(10, 10, &profile).unwrap();
    let combined = se.hypot(predicted.se);
    let z = (mean - predicted.value) / combined;
    outcome(
        z.abs() <= 3.0,
        format!(
            "simulated {mean:.5} +- {se:.5}, predicted {:.5} +- {:.5}, z = {z:.2}",
            predicted.value, predicted.se
        ),
    )
}

fn oracle_null() -> Outcome {
    let law = normal(0.0, 1.0, 8);
    let kind = DistanceKind::L2.spec();
    let profile = estimate_probability_profile(&law, &law, &kind, 100_000, 11).unwrap();
    let theta = theta_estimate(&profile);
    let energy = energy_distance_monte_carlo(&law, &law, &kind, 100_000, 200, 12).unwrap();
    let (zt, ze) = (theta.raw / theta.se, energy.value / energy.se);
    outcome(
        zt.abs() <= 3.0 && ze.abs() <= 3.0,
        format!(
            "N(0, I_8) vs itself, L2: theta^2 {:.2e} (z = {zt:.2}), energy {:.2e} (z = {ze:.2})",
            theta.raw, energy.value
        ),
    )
}

fn lower_bound_dominance() -> Outcome {
    let scenario = |id: &str, d: usize| {
        let spec = lookup(id, &ScenarioParams::default()).unwrap().at(d).unwrap();
        (spec.f_law().unwrap(), spec.g_law().unwrap())
    };
    let (n, m, c) = (50.0f64, 50.0f64, 1.0);
    let configs: Vec<(String, (Law, Law), DistanceKind)> = vec![
        ("ex1 d=4 l2".into(), scenario("ex1", 4), DistanceKind::L2),
        ("ex3 d=16 exp".into(), scenario("ex3", 16), DistanceKind::Exp),
        ("ex6 d=8 log".into(), scenario("ex6", 8), DistanceKind::Log),
        ("N(0,1) vs N(0,2) d=8 l1".into(), (normal(0.0, 1.0, 8), normal(0.0, 2.0, 8)), DistanceKind::L1),
        (
            "N(c/sqrt n, 1) vs N(-c/sqrt m, 1), c=1, n=m=50".into(),
            (normal(c / n.sqrt(), 1.0, 1), normal(-c / m.sqrt(), 1.0, 1)),
            DistanceKind::L2,
        ),
    ];
    let mut pass = true;
    let mut detail = Vec::new();
    for (i, (name, (f, g), kind)) in configs.iter().enumerate() {
        let profile = estimate_probability_profile(f, g, &kind.spec(), 100_000, 20 + i as u64).unwrap();
        let theta = theta_estimate(&profile);
        let bound = theta_lower_bound(&profile);
        let gap = theta_bound_gap(&profile);
        pass &= gap.value >= -3.0 * gap.se;
        detail.push(format!("{name}: {:.4} vs bound {:.4} (gap z = {:.1})", theta.raw, bound.value, gap.value / gap.se));
    }
    outcome(pass, detail.join("; "))
}

const DETERMINISM_CONFIG: &str = r#"
version = 1
reps = 40
permutations = 99
kinds = ["l2", "exp"]
master_seed = 17

[[grid]]
scenario = "ex1"
dims = [4, 16]

[[grid]]
scenario = "shrinking"
beta = 0.5
gamma = 0.5
dims = [8]
"#;

fn study_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files = Vec::new();
    for name in ["power.csv", "config.json"] {
        files.push((name.to_string(), std::fs::read(dir.join(name)).unwrap()));
    }
    let mut plots: Vec<_> = std::fs::read_dir(dir.join("plots")).unwrap().map(|e| e.unwrap().path()).collect();
    plots.sort();
    for p in plots {
        files.push((p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()));
    }
    files
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let config = tmp.path().join("study.toml");
    std::fs::write(&config, DETERMINISM_CONFIG).unwrap();
    let mut outputs = Vec::new();
    for (run, threads) in [1, 1, 8, 8].into_iter().enumerate() {
        let out = tmp.path().join(format!("run{run}"));
        let status = Command::new(env!("CARGO_BIN_EXE_balldiv"))
            .args(["power", "--config"])
            .arg(&config)
            .args(["--threads", &threads.to_string(), "--out"])
            .arg(&out)
            .output()
            .unwrap();
        if !status.status.success() {
            return outcome(false, format!("run {run} failed: {}", String::from_utf8_lossy(&status.stderr)));
        }
        outputs.push(study_files(&out));
    }
    let same = outputs.iter().all(|o| *o == outputs[0]);
    outcome(
        same,
        format!("4 CLI runs (threads 1, 1, 8, 8), {} files each, identical: {same}", outputs[0].len()),
    )
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("exhaustive permutation mean", exhaustive_mean),
        ("fast and naive statistic agree", fast_matches_naive),
        ("cutoff below Markov bound", markov_chain),
        ("level control", level),
        ("power at reference points", power_points),
        ("shrinking alternative trend", shrinking_alternative),
        ("expected statistic closure", expected_statistic_closure),
        ("oracle null", oracle_null),
        ("lower bound dominance", lower_bound_dominance),
        ("deterministic study output", determinism),
    ];
    let selected: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let number = i + 1;
        if !selected.is_empty() && !selected.contains(&number) {
            continue;
        }
        let start = Instant::now();
        let result = run();
        let verdict = if result.pass { "PASS" } else { "FAIL" };
        println!(
            "{verdict} criterion {number:>2} {name} [{:.1}s]: {}",
            start.elapsed().as_secs_f64(),
            result.detail
        );
        failures += usize::from(!result.pass);
    }
    if failures > 0 {
        println!("{failures} acceptance criteria failed");
        std::process::exit(1);
    }
}
