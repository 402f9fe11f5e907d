use balldiv::rng::substream;
use balldiv::scenarios::{catalogue, lookup, Law, LawSpec, Marginal, ScenarioParams};
use balldiv::{DataMatrix, Sampler};

const DRAWS: usize = 5000;

fn draws(law: &Law, seed: u64) -> DataMatrix<f64> {
    law.sample_matrix(DRAWS, &mut substream(seed, &[])).unwrap()
}

fn column(mat: &DataMatrix<f64>, q: usize) -> Vec<f64> {
    mat.iter_rows().map(|r| r[q]).collect()
}

fn mean_var(v: &[f64]) -> (f64, f64) {
    let k = v.len() as f64;
    let mean = v.iter().sum::<f64>() / k;
    (mean, v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1.0))
}

/// Standardized deviations of column means and variances of an independent
/// Gaussian law from their targets.
fn gaussian_column_z(mat: &DataMatrix<f64>, means: &[f64], vars: &[f64]) -> Vec<f64> {
    let k = mat.rows() as f64;
    let mut z = Vec::new();
    for q in 0..mat.dim() {
        let (mean, var) = mean_var(&column(mat, q));
        z.push((mean - means[q]) / (vars[q] / k).sqrt());
        // variance of a Gaussian sample variance is 2 sigma^4 / (k - 1)
        z.push((var - vars[q]) / (vars[q] * (2.0 / (k - 1.0)).sqrt()));
    }
    z
}

/// Many simultaneous 4-SE checks: allow one exceedance, none past 5 SE.
fn assert_family(z: &[f64], label: &str) {
    let over = z.iter().filter(|v| v.abs() > 4.0).count();
    let worst = z.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    assert!(over <= 1 && worst < 5.0, "{label}: {over} of {} beyond 4 SE, worst {worst}", z.len());
}

fn check_gaussian_columns(mat: &DataMatrix<f64>, means: &[f64], vars: &[f64], label: &str) {
    assert_family(&gaussian_column_z(mat, means, vars), label);
}

/// Two-sample Kolmogorov-Smirnov statistic.
fn ks_statistic(mut a: Vec<f64>, mut b: Vec<f64>) -> f64 {
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (mut i, mut j, mut best) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let v = a[i].min(b[j]);
        while i < a.len() && a[i] <= v {
            i += 1;
        }
        while j < b.len() && b[j] <= v {
            j += 1;
        }
        best = best.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
    }
    best
}

#[test]
fn swapped_variance_halves() {
    let spec = lookup("ex3", &ScenarioParams::default()).unwrap().at(8).unwrap();
    let x = draws(&spec.f_law().unwrap(), 1);
    let y = draws(&spec.g_law().unwrap(), 2);
    let zeros = [0.0; 8];
    check_gaussian_columns(&x, &zeros, &[1.0, 1.0, 1.0, 1.0, 2.0, 2.0, 2.0, 2.0], "F");
    check_gaussian_columns(&y, &zeros, &[2.0, 2.0, 2.0, 2.0, 1.0, 1.0, 1.0, 1.0], "G");
}

type Column = Vec<f64>;

#[test]
fn gaussian_catalogue_moments() {
    let p = ScenarioParams::default();
    let d = 6;
    let ones = |v: f64| vec![v; d];
    // (id, F means, F variances, G means, G variances)
    let cases: Vec<(&str, Column, Column, Column, Column)> = vec![
        ("ex1", ones(0.0), ones(1.0), ones(0.15), ones(1.0)),
        ("ex2", ones(0.0), ones(1.0), ones(0.0), ones(1.1)),
        ("ex5", ones(1.0 / (d as f64).sqrt()), ones(1.0), ones(-1.0 / (d as f64).sqrt()), ones(1.0)),
        ("ex9", ones((d as f64).powf(-0.3)), ones(1.0), ones(-(d as f64).powf(-0.3)), ones(1.0)),
        ("ex10", ones(0.0), vec![1., 1., 1., 5., 5., 5.], ones(0.0), vec![5., 5., 5., 1., 1., 1.]),
        ("level", ones(0.0), ones(1.0), ones(0.0), ones(1.0)),
    ];
    let mut z = Vec::new();
    for (i, (id, fm, fv, gm, gv)) in cases.into_iter().enumerate() {
        let spec = lookup(id, &p).unwrap().at(d).unwrap();
        z.extend(gaussian_column_z(&draws(&spec.f_law().unwrap(), 10 + i as u64), &fm, &fv));
        z.extend(gaussian_column_z(&draws(&spec.g_law().unwrap(), 20 + i as u64), &gm, &gv));
    }
    assert_family(&z, "catalogue");
}

#[test]
fn sparse_scenarios_have_the_stated_head() {
    // d = 64: floor(64^0.7) = 18 differing coordinates
    let d = 64;
    let head = 18;
    let p = ScenarioParams::default();

    let ex12 = lookup("ex12", &p).unwrap().at(d).unwrap();
    let mut means = vec![0.0; d];
    means[..head].fill(2.0);
    check_gaussian_columns(&draws(&ex12.f_law().unwrap(), 1), &means, &vec![1.0; d], "ex12 F");

    let ex13 = lookup("ex13", &p).unwrap().at(d).unwrap();
    let mut vars = vec![1.0; d];
    vars[..head].fill(5.0);
    check_gaussian_columns(&draws(&ex13.g_law().unwrap(), 2), &vec![0.0; d], &vars, "ex13 G");

    let ex14 = lookup("ex14", &p).unwrap().at(d).unwrap();
    let g = draws(&ex14.g_law().unwrap(), 3);
    for q in 0..head {
        let (_, var) = mean_var(&column(&g, q));
        // t(4) has variance 2, same as the N(0, 2) it replaces; heavy tails make the
        // sample variance noisy, so only a loose check here
        assert!((var - 2.0).abs() < 0.5, "col {q}: {var}");
    }
}

#[test]
fn sparse_scenarios_agree_beyond_the_head() {
    // 5% KS critical value for two samples of 5000: 1.358 * sqrt(2 / 5000)
    let critical = 1.358 * (2.0 / DRAWS as f64).sqrt();
    let d = 32;
    let head = 11; // floor(32^0.7) = floor(11.31)
    let p = ScenarioParams::default();
    for id in ["ex12", "ex13", "ex14"] {
        let spec = lookup(id, &p).unwrap().at(d).unwrap();
        let x = draws(&spec.f_law().unwrap(), 100);
        let y = draws(&spec.g_law().unwrap(), 200);
        let rejected = (head..d).filter(|&q| ks_statistic(column(&x, q), column(&y, q)) > critical).count();
        // 21 tail coordinates at 5%: expect about 1; 5 or more would be very unlikely
        assert!(rejected < 5, "{id}: {rejected} tail coordinates differ");
        let head_rejected = (0..head).filter(|&q| ks_statistic(column(&x, q), column(&y, q)) > critical).count();
        assert!(head_rejected >= head - 1, "{id}: only {head_rejected} head coordinates differ");
    }
}

#[test]
fn autoregressive_correlation() {
    let spec = lookup("ex11", &ScenarioParams::default()).unwrap().at(16).unwrap();
    for (law, rho) in [(spec.f_law().unwrap(), 0.1), (spec.g_law().unwrap(), 0.5)] {
        let mat = draws(&law, 9);
        let mut num = 0.0;
        let mut den = 0.0;
        for r in mat.iter_rows() {
            for q in 1..r.len() {
                num += r[q] * r[q - 1];
            }
            den += r.iter().map(|v| v * v).sum::<f64>();
        }
        let lag1 = num / (den * 15.0 / 16.0);
        assert!((lag1 - rho).abs() < 0.05, "lag-1 {lag1} vs {rho}");
        check_gaussian_columns(&mat, &[0.0; 16], &[1.0; 16], "ar1");
    }
}

#[test]
fn mixture_moments() {
    // equal mixture of N(0.5, 1) and N(-0.5, 1) per coordinate: mean 0, variance 1.25,
    // and coordinates are correlated through the shared component (cov 0.25)
    let spec = lookup("ex6", &ScenarioParams::default()).unwrap().at(4).unwrap();
    let g = draws(&spec.g_law().unwrap(), 5);
    let (m0, v0) = mean_var(&column(&g, 0));
    assert!(m0.abs() < 4.0 * (1.25 / DRAWS as f64).sqrt());
    assert!((v0 - 1.25).abs() < 0.1, "{v0}");
    let cov: f64 = g.iter_rows().map(|r| r[0] * r[1]).sum::<f64>() / DRAWS as f64;
    assert!((cov - 0.25).abs() < 0.06, "{cov}");

    // 0.2 N(1, 1) + 0.8 N(-0.25, 1): mean 0, variance 1 + 0.2 + 0.05 = 1.25
    let spec = lookup("ex7", &ScenarioParams::default()).unwrap().at(3).unwrap();
    let g = draws(&spec.g_law().unwrap(), 6);
    let (m, v) = mean_var(&column(&g, 2));
    assert!(m.abs() < 0.07, "{m}");
    assert!((v - 1.25).abs() < 0.1, "{v}");
}

#[test]
fn heavy_tailed_marginals() {
    let law = LawSpec::iid(Marginal::Cauchy { location: 1.0, scale: 1.0 }).resolve(2).unwrap();
    let mut col = column(&draws(&law, 4), 0);
    col.sort_by(f64::total_cmp);
    let median = col[DRAWS / 2];
    let q1 = col[DRAWS / 4];
    let q3 = col[3 * DRAWS / 4];
    assert!((median - 1.0).abs() < 0.08, "{median}");
    // quartiles of Cauchy(1, 1) sit at 0 and 2
    assert!(q1.abs() < 0.1 && (q3 - 2.0).abs() < 0.1, "{q1} {q3}");

    let law = LawSpec::iid(Marginal::StudentT { dof: 4 }).resolve(1).unwrap();
    let col = column(&law.sample_matrix(50_000, &mut substream(8, &[])).unwrap(), 0);
    let (mean, var) = mean_var(&col);
    assert!(mean.abs() < 0.03, "{mean}");
    assert!((var - 2.0).abs() < 0.2, "{var}");
}

#[test]
fn level_scenario_has_identical_laws() {
    let spec = lookup("level", &ScenarioParams::default()).unwrap();
    assert_eq!(spec.f, spec.g);
    assert!(catalogue().iter().all(|t| t.id != "level" || t.f == t.g));
}
