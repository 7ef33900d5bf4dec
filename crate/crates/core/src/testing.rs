//! Permutation tests of independence built on the biased HSIC statistic.
//!
//! Randomness is derived from `(seed, index)` pairs: permutation `b` of a
//! test draws from a ChaCha8 stream keyed by the test seed with stream id
//! `b`, and trial `t` of a power experiment derives its data and test seeds
//! from the experiment seed and `t`. Every replicate is therefore
//! independent of the thread schedule.

use itertools::Itertools;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::datagen::{sample, GeneratorSpec};
use crate::error::{Error, Result};
use crate::hsic::{CenteredGrams, Dataset, HsicValue};
use crate::kernels::KernelSpec;
use crate::scalar::{rel_tol, Scalar};

/// Description of the permutation generator, recorded in every result.
pub const PERMUTATION_RNG: &str = "ChaCha8 (rand_chacha), key = seed, stream = permutation index";

/// Largest sample size for which [`exhaustive_permutation_test`] enumerates
/// all `n!` permutations.
pub const MAX_EXHAUSTIVE_N: usize = 8;

/// Null replicates within `1e-12 · max|K| · max|L|` of the observed
/// statistic count as ties.
pub const TIE_REL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PermutationConfig {
    pub num_permutations: usize,
    pub alpha: f64,
    pub seed: u64,
}

impl PermutationConfig {
    pub fn new(num_permutations: usize, alpha: f64, seed: u64) -> Result<Self> {
        let cfg = Self {
            num_permutations,
            alpha,
            seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_permutations == 0 {
            return Err(Error::InvalidConfig(
                "number of permutations must be at least 1".into(),
            ));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "alpha must lie in (0, 1), got {}",
                self.alpha
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestResult<T> {
    pub statistic: HsicValue<T>,
    /// `(1 + #{b : T_b ≥ T₀}) / (B + 1)`.
    pub p_value: f64,
    pub reject: bool,
    /// Empirical `(1 − α)`-quantile of the permuted statistics.
    pub null_quantile: T,
    pub num_permutations: usize,
    pub alpha: f64,
    pub seed: u64,
    pub rng: &'static str,
    pub resolved_bandwidth_x: Option<T>,
    pub resolved_bandwidth_y: Option<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExhaustiveResult<T> {
    pub statistic: HsicValue<T>,
    /// `#{π : T_π ≥ T₀} / n!`, identity included.
    pub p_value: f64,
    pub num_permutations: usize,
}

/// SplitMix64 finaliser applied to `seed` combined with `index`.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed
        ^ index
            .wrapping_add(1)
            .wrapping_mul(0x9E37_79B9_7F4A_7C15)
            .rotate_left(17);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// The `index`-th random permutation of `0..n` under `seed`.
pub fn permutation_for(seed: u64, index: u64, n: usize) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut rng);
    perm
}

/// Add-one Monte Carlo p-value. Replicates at least `observed − tie_tol`
/// count as exceedances.
pub fn p_value_from_null<T: Scalar>(observed: T, null: &[T], tie_tol: T) -> f64 {
    let threshold = observed - tie_tol;
    let exceed = null.iter().filter(|&&t| t >= threshold).count();
    (1 + exceed) as f64 / (null.len() + 1) as f64
}

/// Lower empirical `(1 − α)`-quantile: the `⌈(1 − α)B⌉`-th smallest value.
pub fn null_quantile<T: Scalar>(null: &[T], alpha: f64) -> T {
    let mut sorted = null.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite statistics"));
    let b = sorted.len();
    let rank = ((1.0 - alpha) * b as f64).ceil() as usize;
    sorted[rank.clamp(1, b) - 1]
}

/// Permutation test of independence of `data.x` and `data.y`.
///
/// Bandwidths are resolved once on the unpermuted data; each replicate
/// reindexes the centred `y` Gram matrix by a fresh permutation.
pub fn permutation_test<T: Scalar>(
    data: &Dataset<T>,
    kx: &KernelSpec<T>,
    ky: &KernelSpec<T>,
    cfg: &PermutationConfig,
) -> Result<TestResult<T>> {
    cfg.validate()?;
    let grams = CenteredGrams::new(data, kx, ky)?;
    let observed = grams.statistic();
    let statistic = grams.value_of(observed)?;
    let n = grams.n();
    let null: Vec<T> = (0..cfg.num_permutations as u64)
        .into_par_iter()
        .map(|b| grams.statistic_permuted(&permutation_for(cfg.seed, b, n)))
        .collect();
    let tie_tol = rel_tol::<T>(TIE_REL_TOL) * grams.scale();
    let p_value = p_value_from_null(observed, &null, tie_tol);
    Ok(TestResult {
        statistic,
        p_value,
        reject: p_value <= cfg.alpha,
        null_quantile: null_quantile(&null, cfg.alpha),
        num_permutations: cfg.num_permutations,
        alpha: cfg.alpha,
        seed: cfg.seed,
        rng: PERMUTATION_RNG,
        resolved_bandwidth_x: grams.kernel_x().resolved_bandwidth(),
        resolved_bandwidth_y: grams.kernel_y().resolved_bandwidth(),
    })
}

/// Exact permutation p-value over all `n!` reorderings of `y`, for
/// `n ≤ MAX_EXHAUSTIVE_N`.
pub fn exhaustive_permutation_test<T: Scalar>(
    data: &Dataset<T>,
    kx: &KernelSpec<T>,
    ky: &KernelSpec<T>,
) -> Result<ExhaustiveResult<T>> {
    let n = data.len();
    if n > MAX_EXHAUSTIVE_N {
        return Err(Error::InvalidConfig(format!(
            "exhaustive enumeration limited to n <= {MAX_EXHAUSTIVE_N}, got {n}"
        )));
    }
    let grams = CenteredGrams::new(data, kx, ky)?;
    let observed = grams.statistic();
    let tie_tol = rel_tol::<T>(TIE_REL_TOL) * grams.scale();
    let threshold = observed - tie_tol;
    let mut total = 0usize;
    let mut exceed = 0usize;
    for perm in (0..n).permutations(n) {
        total += 1;
        if grams.statistic_permuted(&perm) >= threshold {
            exceed += 1;
        }
    }
    Ok(ExhaustiveResult {
        statistic: grams.value_of(observed)?,
        p_value: exceed as f64 / total as f64,
        num_permutations: total,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerResult {
    pub rejection_rate: f64,
    pub trials: usize,
    pub per_trial_p_values: Vec<f64>,
}

/// Seed of trial `t`'s data draw.
pub fn trial_data_seed(seed: u64, trial: u64) -> u64 {
    derive_seed(seed, 2 * trial)
}

/// Seed of trial `t`'s permutation test.
pub fn trial_test_seed(seed: u64, trial: u64) -> u64 {
    derive_seed(seed, 2 * trial + 1)
}

/// Fraction of `num_trials` independent size-`n` draws from `generator` on
/// which the permutation test rejects at level `cfg.alpha`.
///
/// The generator's own seed is replaced by a per-trial seed derived from
/// `cfg.seed`.
pub fn power_experiment<T: Scalar>(
    generator: &GeneratorSpec<T>,
    kx: &KernelSpec<T>,
    ky: &KernelSpec<T>,
    cfg: &PermutationConfig,
    num_trials: usize,
    n: usize,
) -> Result<PowerResult> {
    cfg.validate()?;
    generator.validate()?;
    if num_trials == 0 {
        return Err(Error::InvalidConfig(
            "number of trials must be at least 1".into(),
        ));
    }
    let per_trial_p_values = (0..num_trials as u64)
        .into_par_iter()
        .map(|t| {
            let data = sample(&generator.with_seed(trial_data_seed(cfg.seed, t)), n)?;
            let trial_cfg = PermutationConfig {
                seed: trial_test_seed(cfg.seed, t),
                ..*cfg
            };
            Ok(permutation_test(&data, kx, ky, &trial_cfg)?.p_value)
        })
        .collect::<Result<Vec<f64>>>()?;
    let rejections = per_trial_p_values
        .iter()
        .filter(|&&p| p <= cfg.alpha)
        .count();
    Ok(PowerResult {
        rejection_rate: rejections as f64 / num_trials as f64,
        trials: num_trials,
        per_trial_p_values,
    })
}
