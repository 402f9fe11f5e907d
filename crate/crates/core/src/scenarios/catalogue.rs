//! The built-in scenarios.

use std::collections::BTreeMap;

use super::law::{CoordCount, LawSpec, Marginal, MixtureComponent};
use super::{ScenarioTemplate, SizeRule};
use crate::error::{Error, Result};

/// `2^1 ..= 2^10`.
pub const DIM_GRID: [usize; 10] = [2, 4, 8, 16, 32, 64, 128, 256, 512, 1024];
/// `2^1 ..= 2^8`, used where sizes grow with `d`.
pub const SHORT_GRID: [usize; 8] = [2, 4, 8, 16, 32, 64, 128, 256];

const FIXED_50: SizeRule = SizeRule::Fixed { n: 50, m: 50 };
const SPARSE_BETA: f64 = 0.7;

/// Free parameters a caller may set when looking up a scenario.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ScenarioParams {
    /// Sparsity or shrinkage exponent (`ex12`-`ex14`, `shrinking`).
    pub beta: Option<f64>,
    /// Sample-size growth exponent (`shrinking`).
    pub gamma: Option<f64>,
    /// Replaces a fixed `n = m` (scenarios with fixed sizes only).
    pub size: Option<usize>,
}

fn normal(mean: f64, var: f64) -> Marginal {
    Marginal::normal(mean, var)
}

fn std_normal() -> LawSpec {
    LawSpec::iid(normal(0.0, 1.0))
}

fn shifted(mean: f64) -> LawSpec {
    LawSpec::iid(normal(mean, 1.0))
}

/// Coordinates `N(sign * d^-beta, 1)`.
fn shrinking(sign: f64, beta: f64) -> LawSpec {
    LawSpec::iid(Marginal::Normal {
        mean: sign,
        var: 1.0,
        mean_dim_power: -beta,
    })
}

fn halves(first: f64, rest: f64) -> LawSpec {
    LawSpec::split(CoordCount::Half, normal(0.0, first), normal(0.0, rest))
}

fn mixture(parts: &[(f64, f64)]) -> LawSpec {
    LawSpec::Mixture {
        components: parts
            .iter()
            .map(|&(weight, mean)| MixtureComponent {
                weight,
                law: shifted(mean),
            })
            .collect(),
    }
}

fn template(
    id: &str,
    title: &str,
    sizes: SizeRule,
    f: LawSpec,
    g: LawSpec,
    dims: &[usize],
    params: &[(&str, f64)],
) -> ScenarioTemplate {
    ScenarioTemplate {
        id: id.to_string(),
        title: title.to_string(),
        sizes,
        f,
        g,
        dims: dims.to_vec(),
        params: params.iter().map(|&(k, v)| (k.to_string(), v)).collect::<BTreeMap<_, _>>(),
    }
}

fn sparse(id: &str, beta: f64) -> ScenarioTemplate {
    let head = CoordCount::FloorPower { beta };
    let (title, f, g) = match id {
        "ex12" => (
            "sparse location: first floor(d^beta) means 2",
            LawSpec::split(head, normal(2.0, 1.0), normal(0.0, 1.0)),
            std_normal(),
        ),
        "ex13" => (
            "sparse scale: first floor(d^beta) variances 5",
            std_normal(),
            LawSpec::split(head, normal(0.0, 5.0), normal(0.0, 1.0)),
        ),
        _ => (
            "sparse shape: first floor(d^beta) coordinates t(4) against N(0, 2)",
            LawSpec::iid(normal(0.0, 2.0)),
            LawSpec::split(head, Marginal::StudentT { dof: 4 }, normal(0.0, 2.0)),
        ),
    };
    template(id, title, SizeRule::SqrtPlus5, f, g, &SHORT_GRID, &[("beta", beta)])
}

fn shrinking_template(beta: f64, gamma: f64) -> ScenarioTemplate {
    template(
        "shrinking",
        "shrinking location: N(d^-beta, 1) against N(-d^-beta, 1) coordinates, n = m = 5 + floor(d^gamma)",
        SizeRule::PowerPlus5 { gamma },
        shrinking(1.0, beta),
        shrinking(-1.0, beta),
        &DIM_GRID,
        &[("beta", beta), ("gamma", gamma)],
    )
}

/// Every built-in scenario with default parameters.
pub fn catalogue() -> Vec<ScenarioTemplate> {
    let p = &DIM_GRID;
    let s = &SHORT_GRID;
    vec![
        template("ex1", "location: N(0, I) against N(0.15 1, I)", FIXED_50, std_normal(), shifted(0.15), p, &[]),
        template(
            "ex2",
            "scale: N(0, I) against N(0, 1.1 I)",
            FIXED_50,
            std_normal(),
            LawSpec::iid(normal(0.0, 1.1)),
            p,
            &[],
        ),
        template(
            "ex3",
            "swapped variance halves 1 and 2",
            FIXED_50,
            halves(1.0, 2.0),
            halves(2.0, 1.0),
            p,
            &[],
        ),
        template(
            "ex4",
            "iid Cauchy(0, 1) against Cauchy(1, 1) coordinates",
            FIXED_50,
            LawSpec::iid(Marginal::Cauchy { location: 0.0, scale: 1.0 }),
            LawSpec::iid(Marginal::Cauchy { location: 1.0, scale: 1.0 }),
            p,
            &[],
        ),
        template(
            "ex5",
            "location at constant distance: N(d^-1/2 1, I) against N(-d^-1/2 1, I)",
            FIXED_50,
            shrinking(1.0, 0.5),
            shrinking(-1.0, 0.5),
            p,
            &[],
        ),
        template(
            "ex6",
            "N(0, I) against equal mixture of N(0.5 1, I) and N(-0.5 1, I)",
            FIXED_50,
            std_normal(),
            mixture(&[(0.5, 0.5), (0.5, -0.5)]),
            p,
            &[],
        ),
        template(
            "ex7",
            "N(0, I) against 0.2 N(1, I) + 0.8 N(-0.25 1, I)",
            FIXED_50,
            std_normal(),
            mixture(&[(0.2, 1.0), (0.8, -0.25)]),
            p,
            &[],
        ),
        template(
            "ex8",
            "iid N(0, 2) against t(4) coordinates",
            FIXED_50,
            LawSpec::iid(normal(0.0, 2.0)),
            LawSpec::iid(Marginal::StudentT { dof: 4 }),
            p,
            &[],
        ),
        template(
            "ex9",
            "shrinking location N(d^-0.3, 1) against N(-d^-0.3, 1), n = m = 5 + floor(sqrt d)",
            SizeRule::SqrtPlus5,
            shrinking(1.0, 0.3),
            shrinking(-1.0, 0.3),
            s,
            &[("beta", 0.3)],
        ),
        template(
            "ex10",
            "swapped variance halves 1 and 5, n = m = d + 5",
            SizeRule::LinearPlus5,
            halves(1.0, 5.0),
            halves(5.0, 1.0),
            s,
            &[],
        ),
        template(
            "ex11",
            "AR(1) correlation 0.1 against 0.5, n = m = d + 5",
            SizeRule::LinearPlus5,
            LawSpec::Ar1 { rho: 0.1, mean: 0.0, var: 1.0 },
            LawSpec::Ar1 { rho: 0.5, mean: 0.0, var: 1.0 },
            s,
            &[("rho_f", 0.1), ("rho_g", 0.5)],
        ),
        sparse("ex12", SPARSE_BETA),
        sparse("ex13", SPARSE_BETA),
        sparse("ex14", SPARSE_BETA),
        template("level", "null: N(0, I) in both groups", FIXED_50, std_normal(), std_normal(), p, &[]),
        shrinking_template(0.5, 0.0),
    ]
}

/// Built-in scenario by id, with `params` applied.
pub fn lookup(id: &str, params: &ScenarioParams) -> Result<ScenarioTemplate> {
    let reject = |what: &str| {
        Err(Error::InvalidParameter(format!("scenario `{id}` has no free parameter `{what}`")))
    };
    let mut t = match id {
        "shrinking" => {
            let beta = params.beta.unwrap_or(0.5);
            let gamma = params.gamma.unwrap_or(0.0);
            if !(beta.is_finite() && beta > 0.0) {
                return Err(Error::InvalidParameter(format!("beta must be > 0, got {beta}")));
            }
            if !(gamma.is_finite() && gamma >= 0.0) {
                return Err(Error::InvalidParameter(format!("gamma must be >= 0, got {gamma}")));
            }
            shrinking_template(beta, gamma)
        }
        "ex12" | "ex13" | "ex14" => {
            if params.gamma.is_some() {
                return reject("gamma");
            }
            let beta = params.beta.unwrap_or(SPARSE_BETA);
            if !(beta.is_finite() && beta > 0.0 && beta < 1.0) {
                return Err(Error::InvalidParameter(format!("beta must lie in (0, 1), got {beta}")));
            }
            sparse(id, beta)
        }
        _ => {
            if params.beta.is_some() {
                return reject("beta");
            }
            if params.gamma.is_some() {
                return reject("gamma");
            }
            catalogue()
                .into_iter()
                .find(|t| t.id == id)
                .ok_or_else(|| Error::UnknownScenario(id.to_string()))?
        }
    };
    if let Some(size) = params.size {
        match t.sizes {
            SizeRule::Fixed { .. } => t.sizes = SizeRule::Fixed { n: size, m: size },
            _ => return reject("size"),
        }
    }
    Ok(t)
}
