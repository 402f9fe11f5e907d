//! Two-sample permutation tests built on the ball divergence.
//!
//! ```
//! use balldiv::{permutation_test, DataMatrix, DistanceKind, PermutationPlan, PooledSample};
//!
//! let x = DataMatrix::from_rows(&[[0.0, 0.1], [0.2, 0.0], [0.1, 0.3], [0.3, 0.2]]).unwrap();
//! let y = DataMatrix::from_rows(&[[5.0, 5.1], [5.2, 5.0], [5.1, 5.3], [5.3, 5.2]]).unwrap();
//! let pooled = PooledSample::new(x, y).unwrap();
//! let result = permutation_test(
//!     &pooled,
//!     &DistanceKind::L2.spec(),
//!     PermutationPlan::exhaustive(),
//!     0.05,
//! )
//! .unwrap();
//! assert!(result.reject);
//! ```

pub mod data;
pub mod distance;
pub mod error;
pub mod oracle;
pub mod permute;
pub mod rng;
pub mod scalar;
pub mod scenarios;
pub mod statistic;

pub use data::{labeling_from_permutation, DataMatrix, Labeling, PooledSample, MIN_GROUP_SIZE};
pub use distance::{distance, psi_mean, CustomHPsi, DistanceKind, DistanceSpec};
pub use error::{Error, Result};
pub use oracle::{
    energy_distance_estimate, energy_distance_monte_carlo, estimate_probability_profile,
    expected_statistic, expected_statistic_estimate, separation_rate, theta_bound_gap,
    theta_estimate, theta_lower_bound, EnergyEstimate, Estimate, ProbabilityProfile, Sampler,
    ThetaEstimate,
};
pub use permute::{
    cutoff_upper_bound, empirical_quantile, perm_conditional_expectation, permutation_test,
    permutation_test_indexed, PermutationPlan, TestResult,
};
pub use scalar::Real;
pub use scenarios::{catalogue, draw_dataset, lookup, ScenarioParams, ScenarioSpec, ScenarioTemplate};
pub use statistic::{
    ball_statistic_fast, ball_statistic_naive, observed_statistic, BallIndex, StatisticValue,
    MAX_POOLED,
};

pub type DataMatrix64 = DataMatrix<f64>;
pub type DataMatrix32 = DataMatrix<f32>;
pub type PooledSample64 = PooledSample<f64>;
pub type PooledSample32 = PooledSample<f32>;
pub type BallIndex64 = BallIndex<f64>;
pub type BallIndex32 = BallIndex<f32>;
pub type DistanceSpec64 = DistanceSpec<f64>;
pub type DistanceSpec32 = DistanceSpec<f32>;
