//! Independent brute-force oracles for the HSIC estimators and the
//! population value, plus the finite-support independence properties.

use hsic_core::datagen::{centered_support, discrete_ring, enumerate_discrete, is_dependent};
use hsic_core::testing::{exhaustive_permutation_test, permutation_for};
use hsic_core::{
    hsic_biased, population_hsic, sample, theta, Dataset, DiscreteJointDistribution, GeneratorSpec,
    KernelSpec, Points,
};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `(1/n²) Σᵢⱼ (HKH)ᵢⱼ (HLH)ᵢⱼ` with explicit centring matrices.
fn centered_double_sum(
    x: &Points<f64>,
    y: &Points<f64>,
    kx: &KernelSpec<f64>,
    ky: &KernelSpec<f64>,
) -> f64 {
    let n = x.len();
    let kx = kx.resolve(x).unwrap();
    let ky = ky.resolve(y).unwrap();
    let k = DMatrix::from_fn(n, n, |i, j| kx.eval(x.row(i), x.row(j)).unwrap());
    let l = DMatrix::from_fn(n, n, |i, j| ky.eval(y.row(i), y.row(j)).unwrap());
    let h = DMatrix::<f64>::identity(n, n) - DMatrix::from_element(n, n, 1.0 / n as f64);
    let kc = &h * k * &h;
    let lc = &h * l * &h;
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            s += kc[(i, j)] * lc[(i, j)];
        }
    }
    s / (n * n) as f64
}

/// `Σ_{i,j,i',j'} θᵢⱼ θᵢ'ⱼ' k(xᵢ, xᵢ') l(yⱼ, yⱼ')` with θ formed from
/// hand-computed marginals.
fn quadruple_sum(
    d: &DiscreteJointDistribution<f64>,
    kx: &KernelSpec<f64>,
    ky: &KernelSpec<f64>,
) -> f64 {
    let p = d.pmf();
    let (mx, my) = p.shape();
    let px: Vec<f64> = (0..mx).map(|i| (0..my).map(|j| p[(i, j)]).sum()).collect();
    let py: Vec<f64> = (0..my).map(|j| (0..mx).map(|i| p[(i, j)]).sum()).collect();
    let th = |i: usize, j: usize| p[(i, j)] - px[i] * py[j];
    let mut s = 0.0;
    for i in 0..mx {
        for j in 0..my {
            for i2 in 0..mx {
                for j2 in 0..my {
                    s += th(i, j)
                        * th(i2, j2)
                        * kx.eval(d.x_support().row(i), d.x_support().row(i2))
                            .unwrap()
                        * ky.eval(d.y_support().row(j), d.y_support().row(j2))
                            .unwrap();
                }
            }
        }
    }
    s
}

fn random_kernel(rng: &mut ChaCha8Rng) -> KernelSpec<f64> {
    let s = rng.random_range(0.3..3.0);
    match rng.random_range(0..3) {
        0 => KernelSpec::gaussian(s).unwrap(),
        1 => KernelSpec::laplace(s).unwrap(),
        _ => KernelSpec::linear(),
    }
}

fn random_points(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> Points<f64> {
    Points::new(
        dim,
        (0..n * dim).map(|_| rng.random_range(-3.0..3.0)).collect(),
    )
    .unwrap()
}

fn random_distribution(
    rng: &mut ChaCha8Rng,
    mx: usize,
    my: usize,
) -> DiscreteJointDistribution<f64> {
    let raw: Vec<f64> = (0..mx * my).map(|_| rng.random::<f64>()).collect();
    let total: f64 = raw.iter().sum();
    let pmf = DMatrix::from_row_iterator(mx, my, raw.iter().map(|v| v / total));
    let xs: Vec<f64> = (0..mx)
        .map(|i| i as f64 * 1.3 - 1.0 + rng.random::<f64>() * 0.5)
        .collect();
    let ys: Vec<f64> = (0..my)
        .map(|j| j as f64 * 0.9 + rng.random::<f64>() * 0.5)
        .collect();
    DiscreteJointDistribution::new(Points::from_scalars(&xs), Points::from_scalars(&ys), pmf)
        .unwrap()
}

#[test]
fn trace_formula_matches_centered_double_sum() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..100 {
        let n = rng.random_range(2..=8);
        let (dx, dy) = (rng.random_range(1..=3), rng.random_range(1..=2));
        let x = random_points(&mut rng, n, dx);
        let y = random_points(&mut rng, n, dy);
        let (kx, ky) = (random_kernel(&mut rng), random_kernel(&mut rng));
        let d = Dataset::new(x.clone(), y.clone()).unwrap();
        let fast = hsic_biased(&d, &kx, &ky).unwrap().raw;
        let slow = centered_double_sum(&x, &y, &kx, &ky);
        assert!((fast - slow).abs() <= 1e-10, "{fast} vs {slow}");
    }
}

#[test]
fn matrix_form_matches_quadruple_sum() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..100 {
        let (mx, my) = (rng.random_range(1..=4), rng.random_range(1..=4));
        let d = random_distribution(&mut rng, mx, my);
        let (kx, ky) = (random_kernel(&mut rng), random_kernel(&mut rng));
        let fast = population_hsic(&d, &kx, &ky).unwrap().raw;
        let slow = quadruple_sum(&d, &kx, &ky);
        assert!((fast - slow).abs() <= 1e-10, "{fast} vs {slow}");
    }
}

#[test]
fn quadruple_sum_reproduces_diagonal_closed_form() {
    let d =
        DiscreteJointDistribution::from_scalars(&[0.0, 1.0], &[0.0, 1.0], &[0.5, 0.0, 0.0, 0.5])
            .unwrap();
    let g = KernelSpec::gaussian(1.0).unwrap();
    let closed = (1.0 - (-0.5f64).exp()).powi(2) / 4.0;
    assert!((quadruple_sum(&d, &g, &g) - closed).abs() < 1e-15);
    assert!((population_hsic(&d, &g, &g).unwrap().value - closed).abs() < 1e-15);
}

#[test]
fn biased_statistic_is_population_value_of_empirical_pmf() {
    let dist = random_distribution(&mut ChaCha8Rng::seed_from_u64(3), 3, 4);
    let data = sample(&GeneratorSpec::discrete(dist.clone(), 8), 150).unwrap();
    let (mx, my) = dist.pmf().shape();
    let mut counts = DMatrix::<f64>::zeros(mx, my);
    for t in 0..data.len() {
        let i = dist
            .x_support()
            .rows()
            .position(|r| r == data.x().row(t))
            .unwrap();
        let j = dist
            .y_support()
            .rows()
            .position(|r| r == data.y().row(t))
            .unwrap();
        counts[(i, j)] += 1.0;
    }
    let emp = DiscreteJointDistribution::new(
        dist.x_support().clone(),
        dist.y_support().clone(),
        counts / data.len() as f64,
    )
    .unwrap();
    let kx = KernelSpec::gaussian(0.8).unwrap();
    let ky = KernelSpec::laplace(1.5).unwrap();
    let a = hsic_biased(&data, &kx, &ky).unwrap().raw;
    let b = population_hsic(&emp, &kx, &ky).unwrap().raw;
    assert!((a - b).abs() < 1e-12, "{a} vs {b}");
}

#[test]
fn independent_distributions_have_zero_population_hsic() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..200 {
        let (mx, my) = (rng.random_range(1..=4), rng.random_range(1..=4));
        let px: Vec<f64> = (0..mx).map(|_| rng.random::<f64>() + 0.01).collect();
        let py: Vec<f64> = (0..my).map(|_| rng.random::<f64>() + 0.01).collect();
        let (sx, sy): (f64, f64) = (px.iter().sum(), py.iter().sum());
        let px: Vec<f64> = px.iter().map(|v| v / sx).collect();
        let py: Vec<f64> = py.iter().map(|v| v / sy).collect();
        let d = DiscreteJointDistribution::product(
            centered_support(mx),
            centered_support(my),
            &px,
            &py,
        )
        .unwrap();
        let (kx, ky) = (random_kernel(&mut rng), random_kernel(&mut rng));
        assert!(population_hsic(&d, &kx, &ky).unwrap().raw.abs() < 1e-12);
    }
}

#[test]
fn dependent_distributions_detected_by_characteristic_kernels() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let kernels = [
        KernelSpec::gaussian(1.0).unwrap(),
        KernelSpec::laplace(1.0).unwrap(),
    ];
    for _ in 0..300 {
        let (mx, my) = (rng.random_range(2..=4), rng.random_range(2..=4));
        let d = random_distribution(&mut rng, mx, my);
        assert!(is_dependent(&d));
        for kx in &kernels {
            for ky in &kernels {
                let v = population_hsic(&d, kx, ky).unwrap().value;
                assert!(v > 1e-10, "{v}");
            }
        }
    }
    for (mx, my) in [(2, 4), (4, 2), (4, 4)] {
        for d in enumerate_discrete::<f64>(mx, my, 3, true).unwrap() {
            for kx in &kernels {
                for ky in &kernels {
                    assert!(population_hsic(&d, kx, ky).unwrap().value > 1e-10);
                }
            }
        }
    }
}

#[test]
fn ring_defeats_one_sided_characteristic_kernels() {
    let ring = discrete_ring::<f64>(1.0).unwrap();
    assert!(theta(&ring).amax() >= 0.0625);
    let g = KernelSpec::gaussian(1.0).unwrap();
    let l = KernelSpec::laplace(1.0).unwrap();
    let lin = KernelSpec::linear();
    for k in [&g, &l] {
        // linear on either side hides the dependence
        assert!(population_hsic(&ring, k, &lin).unwrap().raw.abs() < 1e-12);
        assert!(population_hsic(&ring, &lin, k).unwrap().raw.abs() < 1e-12);
        assert!(population_hsic(&ring, k, k).unwrap().value > 1e-6);
    }
}

#[test]
fn estimator_converges_to_population_value() {
    let dist = DiscreteJointDistribution::from_scalars(
        &[-1.0, 0.0, 1.0],
        &[-0.5, 0.5],
        &[0.25, 0.05, 0.1, 0.2, 0.05, 0.35],
    )
    .unwrap();
    let g = KernelSpec::<f64>::gaussian(1.0).unwrap();
    let truth = population_hsic(&dist, &g, &g).unwrap().value;
    let mut errors = Vec::new();
    for n in [100, 1000, 10_000] {
        let mean_err: f64 = (0..5)
            .map(|seed| -> f64 {
                let data = sample(&GeneratorSpec::discrete(dist.clone(), seed), n).unwrap();
                (hsic_biased(&data, &g, &g).unwrap().value - truth).abs()
            })
            .sum::<f64>()
            / 5.0;
        errors.push(mean_err);
    }
    assert!(
        errors[0] >= errors[1] && errors[1] >= errors[2],
        "{errors:?}"
    );
    assert!(errors[2] < 0.1 * truth, "{errors:?} truth {truth}");
}

#[test]
fn exhaustive_oracle_counts_match_brute_force() {
    // independent check: recompute every permuted statistic from scratch
    let d = Dataset::from_scalars(&[0.0, 1.0, 2.5, -0.7], &[0.3, 1.1, 2.0, 0.1]).unwrap();
    let g = KernelSpec::gaussian(1.0).unwrap();
    let observed = hsic_biased(&d, &g, &g).unwrap().raw;
    let mut exceed = 0;
    let mut total = 0;
    let mut perm: Vec<usize> = (0..4).collect();
    permute_all(&mut perm, 0, &mut |p| {
        total += 1;
        if hsic_biased(&d.with_y_permuted(p), &g, &g).unwrap().raw >= observed - 1e-12 {
            exceed += 1;
        }
    });
    let e = exhaustive_permutation_test(&d, &g, &g).unwrap();
    assert_eq!(total, 24);
    assert_eq!(e.num_permutations, 24);
    assert_eq!(e.p_value, exceed as f64 / 24.0);
}

fn permute_all(p: &mut Vec<usize>, k: usize, f: &mut impl FnMut(&[usize])) {
    if k == p.len() {
        f(p);
        return;
    }
    for i in k..p.len() {
        p.swap(k, i);
        permute_all(p, k + 1, f);
        p.swap(k, i);
    }
}

proptest! {
    #[test]
    fn biased_statistic_is_non_negative(
        xs in proptest::collection::vec(-5.0f64..5.0, 2..25),
        shift in -2.0f64..2.0,
        family in 0usize..3,
    ) {
        let ys: Vec<f64> = xs.iter().map(|x| (x * 1.7).cos() + shift).collect();
        let d = Dataset::from_scalars(&xs, &ys).unwrap();
        let k = match family {
            0 => KernelSpec::gaussian(1.0).unwrap(),
            1 => KernelSpec::laplace(1.0).unwrap(),
            _ => KernelSpec::linear(),
        };
        let v = hsic_biased(&d, &k, &k).unwrap();
        prop_assert!(v.raw >= -v.tolerance);
        prop_assert!(v.value >= 0.0);
    }

    #[test]
    fn joint_reindexing_leaves_statistic_unchanged(
        xs in proptest::collection::vec(-5.0f64..5.0, 2..25),
        seed in any::<u64>(),
    ) {
        let ys: Vec<f64> = xs.iter().map(|x| x * x).collect();
        let d = Dataset::from_scalars(&xs, &ys).unwrap();
        let g = KernelSpec::gaussian_median();
        let perm = permutation_for(seed, 0, xs.len());
        let a = hsic_biased(&d, &g, &g);
        let b = hsic_biased(&d.reindexed(&perm), &g, &g);
        match (a, b) {
            (Ok(a), Ok(b)) => prop_assert!((a.raw - b.raw).abs() <= 1e-12),
            (a, b) => prop_assert_eq!(a.is_err(), b.is_err()),
        }
    }

    #[test]
    fn population_hsic_is_non_negative(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (mx, my) = (rng.random_range(1..=4), rng.random_range(1..=4));
        let d = random_distribution(&mut rng, mx, my);
        let (kx, ky) = (random_kernel(&mut rng), random_kernel(&mut rng));
        let v = population_hsic(&d, &kx, &ky).unwrap();
        prop_assert!(v.raw >= -v.tolerance);
    }
}
