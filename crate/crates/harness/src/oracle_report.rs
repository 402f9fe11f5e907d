//! Population-level summaries of one scenario.

use balldiv::oracle::EVENTS;
use balldiv::rng::derive_seed;
use balldiv::{
    energy_distance_monte_carlo, estimate_probability_profile, expected_statistic_estimate,
    separation_rate, theta_estimate, theta_lower_bound, DistanceKind, Estimate, ScenarioSpec,
    ThetaEstimate,
};
use serde::Serialize;

use crate::error::Result;

const ENERGY_BOOTSTRAP: usize = 200;

#[derive(Debug, Clone, Serialize)]
pub struct OracleReport {
    pub scenario: String,
    pub d: usize,
    pub n: usize,
    pub m: usize,
    pub replicates: u64,
    pub seed: u64,
    /// `(1/sqrt(n) + 1/sqrt(m))^2`.
    pub separation_rate: f64,
    pub kinds: Vec<KindReport>,
}

#[derive(Debug, Clone, Serialize)]
pub struct KindReport {
    pub kind: DistanceKind,
    pub probabilities: [f64; EVENTS],
    pub theta: ThetaEstimate,
    pub lower_bound: Estimate,
    /// Mean of the statistic at this scenario's `(n, m)`.
    pub expected_statistic: Estimate,
    pub energy: Estimate,
    /// Divergence over the separation rate; large values predict high power.
    pub theta_over_rate: f64,
}

/// Kind `k` uses profile stream `(seed, 2k)` and energy stream `(seed, 2k + 1)`.
pub fn oracle_report(
    spec: &ScenarioSpec,
    label: &str,
    kinds: &[DistanceKind],
    replicates: u64,
    seed: u64,
) -> Result<OracleReport> {
    let (f, g) = (spec.f_law()?, spec.g_law()?);
    let rate = separation_rate(spec.n, spec.m);
    let kinds = kinds
        .iter()
        .map(|&kind| -> Result<KindReport> {
            let dist = kind.spec();
            let profile =
                estimate_probability_profile(&f, &g, &dist, replicates, derive_seed(seed, &[2 * kind.id()]))?;
            let energy = energy_distance_monte_carlo(
                &f,
                &g,
                &dist,
                replicates.max(2),
                ENERGY_BOOTSTRAP,
                derive_seed(seed, &[2 * kind.id() + 1]),
            )?;
            let theta = theta_estimate(&profile);
            Ok(KindReport {
                kind,
                probabilities: profile.p,
                theta,
                lower_bound: theta_lower_bound(&profile),
                expected_statistic: expected_statistic_estimate(spec.n, spec.m, &profile)?,
                energy,
                theta_over_rate: theta.value / rate,
            })
        })
        .collect::<Result<_>>()?;
    Ok(OracleReport {
        scenario: label.to_string(),
        d: spec.d,
        n: spec.n,
        m: spec.m,
        replicates,
        seed,
        separation_rate: rate,
        kinds,
    })
}
