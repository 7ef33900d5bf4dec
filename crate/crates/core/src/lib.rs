//! Kernel independence testing with the Hilbert-Schmidt independence
//! criterion (HSIC).
//!
//! * [`kernels`]: Gaussian, Laplace and linear kernels, Gram matrices,
//!   the median heuristic, strict positive-definiteness diagnostics.
//! * [`hsic`]: the biased empirical statistic and the exact population
//!   value of finitely supported joint distributions.
//! * [`testing`]: permutation tests and power experiments.
//! * [`datagen`]: reproducible samplers (including the uniform circle, on
//!   which a linear kernel on one side hides the dependence) and the grid
//!   of discrete joint distributions.
//! * [`sweep`]: exhaustive population-HSIC checks over that grid.
//!
//! Everything is generic over [`Scalar`] (`f32` or `f64`); the `*F64`
//! aliases below fix the common case.

pub mod datagen;
pub mod error;
pub mod hsic;
pub mod kernels;
pub mod points;
pub mod scalar;
pub mod sweep;
pub mod testing;

pub use datagen::{enumerate_discrete, sample, GeneratorKind, GeneratorSpec};
pub use error::{Error, Result};
pub use hsic::{
    hsic_biased, population_hsic, theta, CenteredGrams, Dataset, DiscreteJointDistribution,
    Estimator, HsicValue,
};
pub use kernels::{
    gram, kernel_eval, median_heuristic, strict_pd_witness, Bandwidth, GramMatrix, KernelFamily,
    KernelSpec, PdDiagnostic,
};
pub use points::Points;
pub use scalar::Scalar;
pub use sweep::{oracle_sweep, SweepSummary};
pub use testing::{
    exhaustive_permutation_test, permutation_test, power_experiment, PermutationConfig,
    PowerResult, TestResult,
};

pub type PointsF64 = Points<f64>;
pub type DatasetF64 = Dataset<f64>;
pub type KernelSpecF64 = KernelSpec<f64>;
pub type GramMatrixF64 = GramMatrix<f64>;
pub type DiscreteJointDistributionF64 = DiscreteJointDistribution<f64>;
pub type HsicValueF64 = HsicValue<f64>;
pub type TestResultF64 = TestResult<f64>;
pub type GeneratorSpecF64 = GeneratorSpec<f64>;

pub type PointsF32 = Points<f32>;
pub type DatasetF32 = Dataset<f32>;
pub type KernelSpecF32 = KernelSpec<f32>;
pub type GramMatrixF32 = GramMatrix<f32>;
pub type DiscreteJointDistributionF32 = DiscreteJointDistribution<f32>;
pub type HsicValueF32 = HsicValue<f32>;
pub type TestResultF32 = TestResult<f32>;
pub type GeneratorSpecF32 = GeneratorSpec<f32>;
